"""Complex probe wave functions sampled on a bounded momentum interval.

Conventions: coupling g = 1 and hbar = 1, so momenta are dimensionless and
the default domain is |k| <= pi/2.  The position operator acts as
``x = i d/dk``; a position eigenfunction located at x0 is
``exp(-1j * x0 * k) / sqrt(pi)``.
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import BadParams, ZeroNorm

HALF_PI = 0.5 * np.pi
DEFAULT_POINTS = 2048
DERIVATIVE_ORDER = 8
ZERO_NORM = 1e-300


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform grid on ``[k_min, k_max]`` including both endpoints."""

    k_min: float = -HALF_PI
    k_max: float = HALF_PI
    n_points: int = DEFAULT_POINTS

    def __post_init__(self):
        if not self.k_min < self.k_max:
            raise BadParams(f"need k_min < k_max, got [{self.k_min}, {self.k_max}]")
        if int(self.n_points) != self.n_points or self.n_points < 16:
            raise BadParams(f"n_points must be an integer >= 16, got {self.n_points}")

    @property
    def spacing(self):
        return (self.k_max - self.k_min) / (self.n_points - 1)

    @cached_property
    def k(self):
        k = np.linspace(self.k_min, self.k_max, self.n_points)
        k.setflags(write=False)
        return k

    @cached_property
    def weights(self):
        """Composite trapezoid weights."""
        w = np.full(self.n_points, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        w.setflags(write=False)
        return w

    def is_default_domain(self, tol=1e-12):
        return abs(self.k_min + HALF_PI) <= tol and abs(self.k_max - HALF_PI) <= tol

    def refined(self, n_points):
        return MomentumGrid(self.k_min, self.k_max, n_points)


@dataclass(frozen=True, eq=False)
class ProbeWaveFunction:
    """Samples ``xi(k_j)`` of a probe on a :class:`MomentumGrid`."""

    grid: MomentumGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.shape != (self.grid.n_points,):
            raise BadParams(
                f"expected {self.grid.n_points} samples, got shape {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, func, grid=None):
        grid = MomentumGrid() if grid is None else grid
        return cls(grid, np.broadcast_to(func(grid.k), grid.k.shape))

    @cached_property
    def norm_sq(self):
        return float(np.dot(self.grid.weights, np.abs(self.values) ** 2))

    @property
    def periodic_compatible(self):
        dens = np.abs(self.values) ** 2
        return bool(abs(dens[0] - dens[-1]) <= 1e-9 * dens.max())

    def __mul__(self, other):
        return ProbeWaveFunction(self.grid, self.values * other)

    __rmul__ = __mul__


def fd_weights(z, x, m):
    """Fornberg weights for derivatives 0..m at ``z`` from nodes ``x``.

    Returns an array ``c`` of shape ``(len(x), m + 1)``; ``c[:, d]`` are the
    weights of the d-th derivative.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for d in range(mn, 0, -1):
                    c[i, d] = c1 * (d * c[i - 1, d - 1] - c5 * c[i - 1, d]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for d in range(mn, 0, -1):
                c[j, d] = (c4 * c[j, d] - d * c[j, d - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


@lru_cache(maxsize=32)
def derivative_matrix(n_points, spacing, order=DERIVATIVE_ORDER):
    """Sparse first-derivative operator of the given (even) accuracy order.

    Central stencils in the interior; the ``order // 2`` nodes at each end
    use off-centred stencils over the first/last ``order + 1`` nodes.
    """
    if order % 2 or order < 2:
        raise BadParams(f"derivative order must be even and >= 2, got {order}")
    half = order // 2
    if n_points < order + 1:
        raise BadParams(f"need at least {order + 1} points for order {order}")
    central = fd_weights(0.0, np.arange(-half, half + 1), 1)[:, 1]
    diags = [np.full(n_points - abs(o), central[o + half]) for o in range(-half, half + 1)]
    mat = sp.diags(diags, list(range(-half, half + 1)), shape=(n_points, n_points)).tolil()
    nodes = np.arange(order + 1)
    for i in range(half):
        row = fd_weights(float(i), nodes, 1)[:, 1]
        mat[i, :] = 0.0
        mat[i, : order + 1] = row
        mat[n_points - 1 - i, :] = 0.0
        mat[n_points - 1 - i, n_points - order - 1:] = -row[::-1]
    mat = (mat / spacing).tocsr()
    return mat


def derivative(xi, order=DERIVATIVE_ORDER):
    """d xi / dk on the grid (complex samples)."""
    g = xi.grid
    # removing a constant first keeps stencil round-off off constant parts
    v = xi.values - xi.values[0]
    return derivative_matrix(g.n_points, g.spacing, order) @ v


def norm_squared(xi):
    return xi.norm_sq


def _checked_norm(xi):
    n = xi.norm_sq
    if n <= ZERO_NORM:
        raise ZeroNorm("probe has zero norm")
    return n


def normalize(xi):
    return ProbeWaveFunction(xi.grid, xi.values / np.sqrt(_checked_norm(xi)))


def overlap_derivative(xi):
    """Quadrature of ``conj(xi) * xi'`` over the grid."""
    return complex(np.dot(xi.grid.weights, np.conj(xi.values) * derivative(xi)))


def expectation_x(xi):
    """Position expectation ``-Im(int conj(xi) xi' dk) / N``."""
    n = _checked_norm(xi)
    return -overlap_derivative(xi).imag / n


def variance_x(xi):
    """Position variance using ``<x^2> = int |xi'|^2 dk / N``."""
    n = _checked_norm(xi)
    d = derivative(xi)
    second = float(np.dot(xi.grid.weights, np.abs(d) ** 2)) / n
    mean = -complex(np.dot(xi.grid.weights, np.conj(xi.values) * d)).imag / n
    var = second - mean * mean
    if var < 0.0:
        if var < -1e-10 * max(1.0, second):
            raise ArithmeticError(f"negative variance {var}")
        var = 0.0
    return var


def gauge_translate(xi, x0):
    """Phase translation ``xi -> exp(i x0 k) xi``; lowers <x> by x0."""
    return ProbeWaveFunction(xi.grid, np.exp(1j * x0 * xi.grid.k) * xi.values)


def eigenstate(x0, grid=None):
    """Normalized position eigenfunction ``exp(-i x0 k) / sqrt(pi)``."""
    grid = MomentumGrid() if grid is None else grid
    return ProbeWaveFunction(grid, np.exp(-1j * x0 * grid.k) / np.sqrt(np.pi))


def random_probe(rng, grid=None, n_modes=6, max_position=6.0):
    """Smooth random probe: a few plane waves with random complex weights.

    Positions are drawn uniformly in ``[-max_position, max_position]`` and
    are generally not on the even-integer lattice.
    """
    grid = MomentumGrid() if grid is None else grid
    amps = rng.normal(size=n_modes) + 1j * rng.normal(size=n_modes)
    pos = rng.uniform(-max_position, max_position, size=n_modes)
    values = np.exp(-1j * np.outer(grid.k, pos)) @ amps
    return normalize(ProbeWaveFunction(grid, values))
