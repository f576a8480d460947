"""Discrete position spectrum of probes on ``|k| <= pi/2``.

On this domain the position operator has eigenvalues ``x = 2n`` with
eigenfunctions ``exp(-2i n k) / sqrt(pi)``.  Coefficients

    c_n = pi^{-1/2} int exp(2i n k) xi(k) dk

are computed with the trapezoid rule (an FFT) plus Euler-Maclaurin
endpoint corrections.  The corrections vanish for probes that are smooth
and pi-periodic, where the trapezoid sum is already exact, and restore
high accuracy for probes that are not (an eigenstate at an odd position,
for instance).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import bernoulli, comb

from .errors import BadParams, DomainMismatch, EmptySpectrum
from .grid import ZERO_NORM, MomentumGrid, ProbeWaveFunction, fd_weights

EM_TERMS = 5
ENDPOINT_STENCIL = 13
SINC_SERIES_RADIUS = 1e-6


@dataclass(frozen=True, eq=False)
class PositionAmplitudes:
    """Coefficients ``c_n`` for ``n_min <= n <= n_max`` (position ``x = 2n``)."""

    n_min: int
    n_max: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.n_min > self.n_max:
            raise BadParams(f"n_min {self.n_min} > n_max {self.n_max}")
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.n_max - self.n_min + 1,):
            raise BadParams("coefficient count does not match [n_min, n_max]")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self):
        return np.arange(self.n_min, self.n_max + 1)

    @property
    def x(self):
        return 2.0 * self.n

    @property
    def prob(self):
        return np.abs(self.coeffs) ** 2

    def __getitem__(self, n):
        if not self.n_min <= n <= self.n_max:
            raise IndexError(n)
        return self.coeffs[n - self.n_min]

    def truncated(self, cutoff):
        lo, hi = max(self.n_min, -cutoff), min(self.n_max, cutoff)
        return PositionAmplitudes(lo, hi, self.coeffs[lo - self.n_min: hi - self.n_min + 1])


def _require_default(grid):
    if not grid.is_default_domain():
        raise DomainMismatch(
            f"position spectrum needs the domain [-pi/2, pi/2], got [{grid.k_min}, {grid.k_max}]")


@lru_cache(maxsize=8)
def _endpoint_weights(spacing, n_deriv):
    w = fd_weights(0.0, np.arange(ENDPOINT_STENCIL), n_deriv)
    scale = spacing ** -np.arange(n_deriv + 1)
    return w * scale


def _endpoint_derivatives(xi):
    """Derivatives 0..2*EM_TERMS-1 of xi at both ends, from local interpolants."""
    n_deriv = 2 * EM_TERMS - 1
    w = _endpoint_weights(xi.grid.spacing, n_deriv)
    v = xi.values
    left = w.T @ v[:ENDPOINT_STENCIL]
    right = (w.T @ v[::-1][:ENDPOINT_STENCIL]) * (-1.0) ** np.arange(n_deriv + 1)
    return left, right


@lru_cache(maxsize=1)
def _em_coefficients():
    b = bernoulli(2 * EM_TERMS)
    fact = np.cumprod(np.arange(1, 2 * EM_TERMS + 1, dtype=float))
    return np.array([b[2 * j] / fact[2 * j - 1] for j in range(1, EM_TERMS + 1)])


def _endpoint_correction(xi, omega):
    """Euler-Maclaurin correction to the trapezoid sum of ``exp(i omega k) xi``.

    Returned value is to be subtracted from the trapezoid sum.
    """
    omega = np.asarray(omega, dtype=float)
    a, b = xi.grid.k_min, xi.grid.k_max
    h = xi.grid.spacing
    left, right = _endpoint_derivatives(xi)
    coef = _em_coefficients()
    iw = 1j * omega
    total = np.zeros(omega.shape, dtype=complex)
    for j in range(1, EM_TERMS + 1):
        r = 2 * j - 1
        fb = np.zeros(omega.shape, dtype=complex)
        fa = np.zeros(omega.shape, dtype=complex)
        for s in range(r + 1):
            c = comb(r, s, exact=True) * iw ** (r - s)
            fb += c * right[s]
            fa += c * left[s]
        diff = np.exp(iw * b) * fb - np.exp(iw * a) * fa
        total += coef[j - 1] * h ** (2 * j) * diff
    return total


def to_position_coefficients(xi, n_min, n_max):
    _require_default(xi.grid)
    if n_min > n_max:
        raise BadParams(f"n_min {n_min} > n_max {n_max}")
    period = xi.grid.n_points - 1
    if max(abs(n_min), abs(n_max)) > period // 2:
        raise BadParams(
            f"|n| <= {period // 2} resolvable on {xi.grid.n_points} points, asked {n_min}..{n_max}")
    v = xi.values
    g = v[:-1].copy()
    g[0] = 0.5 * (v[0] + v[-1])
    dft = np.fft.ifft(g) * period
    n = np.arange(n_min, n_max + 1)
    trap = xi.grid.spacing * (-1.0) ** (n % 2) * dft[n % period]
    coeffs = (trap - _endpoint_correction(xi, 2.0 * n)) / np.sqrt(np.pi)
    return PositionAmplitudes(n_min, n_max, coeffs)


def position_amplitude_continuum(xi, x):
    """``a(x) = pi^{-1/2} int exp(i k x) xi(k) dk`` at arbitrary real x."""
    _require_default(xi.grid)
    x = np.asarray(x, dtype=float)
    phase = np.exp(1j * np.multiply.outer(x, xi.grid.k))
    trap = phase @ (xi.grid.weights * xi.values)
    out = (trap - _endpoint_correction(xi, x)) / np.sqrt(np.pi)
    return out if out.ndim else complex(out)


def eigenstate_amplitude(x, m):
    """Closed form of ``a(x)`` for the eigenstate at ``2m``.

    ``(2/pi) sin((pi/2)(x - 2m)) / (x - 2m)``, with a series near ``x = 2m``.
    """
    t = np.asarray(x, dtype=float) - 2.0 * m
    near = np.abs(t) < SINC_SERIES_RADIUS
    safe = np.where(near, 1.0, t)
    u = 0.5 * np.pi * t
    series = 1.0 - u * u / 6.0 + u ** 4 / 120.0
    out = np.where(near, series, (2.0 / np.pi) * np.sin(0.5 * np.pi * safe) / safe)
    return out if out.ndim else float(out)


def from_position_coefficients(amps, grid=None):
    """Synthesize ``xi(k) = pi^{-1/2} sum_n c_n exp(-2i n k)``."""
    grid = MomentumGrid() if grid is None else grid
    _require_default(grid)
    basis = np.exp(-2j * np.outer(grid.k, amps.n))
    return ProbeWaveFunction(grid, basis @ amps.coeffs / np.sqrt(np.pi))


def discrete_moments(amps):
    """``(mean, variance, captured_weight)`` of the truncated distribution on x = 2n."""
    p = amps.prob
    w = float(p.sum())
    if w <= ZERO_NORM:
        raise EmptySpectrum("no weight in the retained coefficients")
    x = amps.x
    mean = float(np.dot(x, p)) / w
    var = float(np.dot((x - mean) ** 2, p)) / w
    return mean, var, w


def kronecker_check(xi_f, m, n_range):
    """``max_{|n| <= n_range} |c_n - delta_{mn}|``."""
    amps = to_position_coefficients(xi_f, -n_range, n_range)
    target = (amps.n == m).astype(float)
    return float(np.max(np.abs(amps.coeffs - target)))


def variance_divergence_scan(xi_f, cutoffs):
    """Truncated discrete variance for each cutoff ``|n| <= cutoff``."""
    cutoffs = [int(c) for c in cutoffs]
    top = max(cutoffs)
    amps = to_position_coefficients(xi_f, -top, top)
    return [(c, discrete_moments(amps.truncated(c))[1]) for c in cutoffs]


def odd_shift_variance_law(cutoff):
    """Leading-order truncated variance of an eigenstate at an odd position."""
    return 4.0 / np.pi ** 2 * (2 * cutoff + 1)
