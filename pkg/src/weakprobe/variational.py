"""Gauge-fixed pointer-shift functional and its stationary points.

With ``psi = B xi`` the objective is

    F(xi) = -Im[ int conj(psi) psi' dk / N_f  -  mu_t int conj(xi) xi' dk ]

where ``mu_t`` is the combined multiplier.  On probes with ``<x>_i = 0``
and ``mu_t = 0`` it equals the pointer shift.  The shift is invariant
under ``xi -> exp(i x0 k) xi``, so stationary points are only isolated
after fixing ``<x>_i = 0``.

Variations are taken with the ends of the interval held fixed: ascent
directions are multiplied by a smooth window that vanishes on the nodes
where the discrete derivative is not antisymmetric.  This is the discrete
counterpart of dropping boundary terms in the Euler-Lagrange equation.
"""

import enum
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import BadParams, DegenerateConstraints, NotConverged, ZeroNorm
from .grid import (
    DERIVATIVE_ORDER,
    ZERO_NORM,
    ProbeWaveFunction,
    derivative_matrix,
    expectation_x,
    gauge_translate,
    normalize,
)
from .postselection import apply_kernel, check_kernel, kernel_eval, shift


class Branch(enum.Enum):
    NORMALIZABLE = "Normalizable"
    UNNORMALIZABLE = "UnNormalizable"
    INDETERMINATE = "Indeterminate"


class Normalizability(enum.Enum):
    CONVERGING = "Converging"
    DIVERGING = "Diverging"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class GaugeFixedFunctional:
    kernel: object
    mu_tilde: complex = 0.0

    def __post_init__(self):
        if not np.isfinite(complex(self.mu_tilde)):
            raise BadParams("mu_tilde must be finite")


@dataclass(frozen=True)
class OptimizerConfig:
    step: float = 0.1
    tol: float = 1e-6
    max_iter: int = 2000
    rng_seed: int = 42

    def __post_init__(self):
        if self.step <= 0:
            raise BadParams("step must be positive")
        if self.tol < 1e-12:
            raise BadParams("tol must be >= 1e-12")
        if self.max_iter < 0 or self.rng_seed < 0:
            raise BadParams("max_iter and rng_seed must be non-negative")


@dataclass(frozen=True, eq=False)
class StationaryResult:
    probe: ProbeWaveFunction
    shift: float
    grad_norm: float
    mu_tilde: complex
    branch: Branch
    iterations: int
    converged: bool = True
    multiplier: float = float("nan")

    def to_json_dict(self, probe_csv_path=None):
        mu = complex(self.mu_tilde)
        return {
            "shift": self.shift,
            "grad_norm": self.grad_norm,
            "mu_tilde": [mu.real, mu.imag],
            "branch": self.branch.value,
            "iterations": self.iterations,
            "probe_csv_path": probe_csv_path,
        }


class StationarityReport(NamedTuple):
    grad_norm: float
    scaling_exponent: float
    max_delta: float


def _operators(grid):
    d = derivative_matrix(grid.n_points, grid.spacing, DERIVATIVE_ORDER)
    return d, grid.weights


@lru_cache(maxsize=16)
def _boundary_layer(n_points, spacing):
    """Nodes per end where ``W D + D^T W`` is non-zero."""
    d = derivative_matrix(n_points, spacing, DERIVATIVE_ORDER)
    w = np.full(n_points, spacing)
    w[0] = w[-1] = 0.5 * spacing
    s = (d.multiply(w[:, None]) + d.T.multiply(w[None, :])).tocsc()
    cols = np.abs(s).max(axis=0).toarray().ravel()
    nz = np.nonzero(cols[: n_points // 2] > 1e-12 * cols.max())[0]
    return int(nz.max()) + 1 if nz.size else 0


def boundary_layer(grid):
    return _boundary_layer(grid.n_points, grid.spacing)


def _to_real(z):
    return np.concatenate([z.real, z.imag])


def _to_complex(v):
    n = v.size // 2
    return v[:n] + 1j * v[n:]


def functional_value(xi, functional):
    d, w = _operators(xi.grid)
    raw, n_f = apply_kernel(xi, functional.kernel)
    psi = raw.values
    a = np.dot(w, np.conj(psi) * (d @ psi))
    j = np.dot(w, np.conj(xi.values) * (d @ xi.values))
    return float(-(a / n_f).imag + (complex(functional.mu_tilde) * j).imag)


def _grad_im_form(c, xi_vals, w, d, left=None, right=None):
    """Wirtinger-type gradient ``g`` of ``Im(c * conj(u) W D u)`` with ``u = L xi``.

    The real gradient w.r.t. (Re xi, Im xi) is ``(Re g, Im g)``.
    ``left``/``right`` are diagonal factors applied as ``conj(L) ... L``.
    """
    lam = np.ones_like(xi_vals) if left is None else left
    u = lam * xi_vals
    m_u = w * (d @ u)
    mh_u = d.T @ (w * u)
    c = complex(c)
    return np.conj(lam) * 1j * (np.conj(c) * mh_u - c * m_u)


def gradient_complex(xi, functional):
    """Complex representation ``g`` of the Euclidean gradient (see :func:`gradient`)."""
    d, w = _operators(xi.grid)
    raw, n_f = apply_kernel(xi, functional.kernel)
    b = kernel_eval(functional.kernel, xi.grid.k)
    psi = raw.values
    a = np.dot(w, np.conj(psi) * (d @ psi))
    g_neg_im_a = _grad_im_form(-1.0, xi.values, w, d, left=b)
    g_nf = 2.0 * w * np.abs(b) ** 2 * xi.values
    g = g_neg_im_a / n_f - (-a.imag) / n_f ** 2 * g_nf
    mu = complex(functional.mu_tilde)
    if mu != 0:
        g = g + _grad_im_form(mu, xi.values, w, d)
    return g


def gradient(xi, functional):
    """Gradient of :func:`functional_value` w.r.t. ``(Re xi_j, Im xi_j)``."""
    return _to_real(gradient_complex(xi, functional))


def constraint_gradients(xi):
    """L2 gradients (complex) of the squared norm and of ``-Im int conj(xi) xi'``."""
    d, w = _operators(xi.grid)
    g_norm = 2.0 * xi.values
    g_pos = _grad_im_form(-1.0, xi.values, w, d) / w
    return g_norm, g_pos


def _w_inner(a, b, w):
    return float(np.dot(w, (np.conj(a) * b).real))


def tangent_window(grid):
    """Smooth weight selecting interior variations.

    ``sin^4`` of the normalized position in the interval, set to zero on
    the boundary layer of the derivative stencil.
    """
    u = (grid.k - grid.k_min) / (grid.k_max - grid.k_min)
    chi = np.sin(np.pi * u) ** 4
    pin = boundary_layer(grid)
    if pin:
        chi[:pin] = 0.0
        chi[-pin:] = 0.0
    return chi


def project_constraints(direction, xi, window=None):
    """Remove the components of ``direction`` along both constraint gradients.

    ``direction`` is a real vector over ``(Re, Im)``; inner products use
    the trapezoid (L2) metric.  Without a window this is the orthogonal
    projector onto the tangent space of ``||xi||^2 = 1`` and ``<x>_i = 0``.
    With a window ``chi`` the correction is taken along ``chi * grad``, an
    oblique projector that keeps windowed directions smooth and windowed.
    Either way the result is orthogonal to both constraint gradients and
    the map is idempotent.
    """
    w = xi.grid.weights
    z = _to_complex(np.asarray(direction, dtype=float))
    cons = constraint_gradients(xi)
    norms = [np.sqrt(_w_inner(c, c, w)) for c in cons]
    if min(norms) <= 1e-300:
        raise DegenerateConstraints("a constraint gradient vanishes")
    cos = _w_inner(cons[0], cons[1], w) / (norms[0] * norms[1])
    if abs(cos) >= 1.0 - 1e-12:
        raise DegenerateConstraints("constraint gradients are parallel")
    cons = [c / n for c, n in zip(cons, norms)]
    along = cons if window is None else [window * c for c in cons]
    gram = np.array([[_w_inner(ci, aj, w) for aj in along] for ci in cons])
    rhs = np.array([_w_inner(ci, z, w) for ci in cons])
    try:
        alpha = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        raise DegenerateConstraints("windowed constraint gradients are degenerate") from None
    out = z - alpha[0] * along[0] - alpha[1] * along[1]
    # one refinement pass against round-off
    rhs = np.array([_w_inner(ci, out, w) for ci in cons])
    alpha = np.linalg.solve(gram, rhs)
    out = out - alpha[0] * along[0] - alpha[1] * along[1]
    return _to_real(out)


def projected_gradient(xi, functional):
    """Windowed, projected L2 gradient (complex samples): the ascent direction."""
    chi = tangent_window(xi.grid)
    g = gradient_complex(xi, functional) / xi.grid.weights
    return _to_complex(project_constraints(_to_real(chi * g), xi, window=chi))


def l2_norm(z, grid):
    return float(np.sqrt(np.dot(grid.weights, np.abs(z) ** 2)))


def gauge_fix(xi, tol=1e-13, max_steps=20):
    """Translate so that ``<x>_i = 0``.

    The first translation by ``<x>_i`` is exact up to the discretization
    error of the derivative.  For probes that oscillate near the grid
    resolution that error is not small, and a secant solve on the
    translation finishes the job.
    """
    t_prev, f_prev = 0.0, expectation_x(xi)
    if abs(f_prev) <= tol:
        return xi
    t = f_prev
    for _ in range(max_steps):
        out = gauge_translate(xi, t)
        f = expectation_x(out)
        if abs(f) <= tol or f == f_prev:
            break
        t, t_prev, f_prev = t - f * (t - t_prev) / (f - f_prev), t, f
    return out


def constraint_residual(xi):
    """Derivative of ``-Im[mu int conj(xi) xi']`` with respect to real ``mu``.

    Equals ``N_i <x>_i`` and vanishes exactly on gauge-fixed probes.
    """
    d, w = _operators(xi.grid)
    return float(-np.dot(w, np.conj(xi.values) * (d @ xi.values)).imag)


def multiplier_estimate(xi, functional):
    """Effective combined multiplier at a (near-)stationary probe.

    The interior L2 gradient is fitted as ``alpha * grad N + nu * grad C``
    with ``C = -Im int conj(xi) xi'``; the effective multiplier is
    ``nu + Re(mu_tilde)``, i.e. the value of ``mu_tilde`` for which ``xi``
    satisfies the unconstrained Euler-Lagrange equation.  It is zero on
    the normalizable branch whatever ``mu_tilde`` was scanned.
    """
    w = xi.grid.weights
    chi = tangent_window(xi.grid)
    keep = chi > 0
    g = gradient_complex(xi, functional) / w
    cons = constraint_gradients(xi)
    sw = np.sqrt(np.tile(w[keep], 2))
    a = np.stack([_to_real(c[keep]) for c in cons], axis=1) * sw[:, None]
    coef, *_ = np.linalg.lstsq(a, _to_real(g[keep]) * sw, rcond=None)
    return float(coef[1] + complex(functional.mu_tilde).real)


def kernel_inverse_probe(kernel, x0, grid):
    """Unnormalized ``exp(-i x0 k) / B(k)``; no check for kernel zeros."""
    b = kernel_eval(kernel, grid.k)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.exp(-1j * x0 * grid.k) / b
    vals[~np.isfinite(vals)] = np.inf
    return ProbeWaveFunction(grid, vals)


def analytic_optimal_probe(kernel, x0, grid):
    """Normalized probe whose postselected image is the eigenstate at ``x0``."""
    check_kernel(kernel, grid)
    return normalize(kernel_inverse_probe(kernel, x0, grid))


def optimal_shift(kernel, grid):
    """Stationary shift of the normalizable optimum, ``Re(A_w) int|B|^-4 / int|B|^-2``.

    Independent of the x0 chosen in :func:`analytic_optimal_probe`, since
    different x0 are related by a gauge translation.
    """
    check_kernel(kernel, grid)
    b2 = np.abs(kernel_eval(kernel, grid.k)) ** 2
    w = grid.weights
    return float(kernel.weak_value.real * np.dot(w, b2 ** -2) / np.dot(w, 1.0 / b2))


def weak_value_for_shift(target):
    """Real weak value whose optimal shift equals ``target`` (``|target| >= 1``).

    For real ``A_w = a`` the optimal shift is ``(a + 1/a) / 2``; the root
    with ``|a| >= 1`` is returned.
    """
    if abs(target) < 1.0:
        raise BadParams("real weak values give optimal shifts with |shift| >= 1")
    return float(target + np.sign(target) * np.sqrt(target * target - 1.0))


def _smooth_direction(rng, grid, n_modes=4, max_position=4.0):
    amps = rng.normal(size=n_modes) + 1j * rng.normal(size=n_modes)
    pos = rng.uniform(-max_position, max_position, size=n_modes)
    return np.exp(-1j * np.outer(grid.k, pos)) @ amps


def _feasible(xi):
    return gauge_fix(normalize(xi))


def stationarity_check(xi, functional, trials=4, seed=42,
                       eps=(1e-2, 1e-3, 1e-4)):
    """Projected-gradient norm and perturbation scaling exponent at ``xi``.

    The exponent is the log-log slope of ``|F(xi + e d) - F(xi)|`` against
    ``e``, averaged over random smooth feasible tangent directions ``d``;
    the perturbed probe is renormalized and gauge-fixed before evaluation.
    About 2 at a stationary point and about 1 elsewhere.  It is NaN when
    every change is at round-off level (a flat functional).
    """
    xi = _feasible(xi)
    grid = xi.grid
    chi = tangent_window(grid)
    grad_norm = l2_norm(projected_gradient(xi, functional), grid)
    f0 = functional_value(xi, functional)
    children = np.random.SeedSequence(seed).spawn(trials)
    slopes, max_delta = [], 0.0
    log_eps = np.log(np.asarray(eps, dtype=float))
    for child in children:
        rng = np.random.Generator(np.random.Philox(child))
        d = _to_complex(project_constraints(_to_real(chi * _smooth_direction(rng, grid)), xi, chi))
        d /= l2_norm(d, grid)
        deltas = np.array([
            abs(functional_value(_feasible(ProbeWaveFunction(grid, xi.values + e * d)), functional) - f0)
            for e in eps
        ])
        max_delta = max(max_delta, float(deltas.max()))
        if np.all(deltas > 1e-13):
            slopes.append(np.polyfit(log_eps, np.log(deltas), 1)[0])
    exponent = float(np.mean(slopes)) if slopes else float("nan")
    return StationarityReport(grad_norm, exponent, max_delta)


def normalizability_check(builder, refinements):
    """Classify a probe construction by how its squared norm behaves under refinement.

    ``builder(n_points)`` returns a probe on a grid with that many points.
    """
    refinements = [int(r) for r in refinements]
    if len(refinements) < 3 or any(b <= a for a, b in zip(refinements, refinements[1:])):
        raise BadParams("need >= 3 strictly increasing refinements")
    norms = []
    for n in refinements:
        try:
            norms.append(builder(n).norm_sq)
        except ZeroNorm:
            norms.append(0.0)
    norms = np.array(norms)
    if not np.all(np.isfinite(norms)):
        return Normalizability.DIVERGING
    if norms[0] > 0 and norms[-1] / norms[0] >= 1.5:
        return Normalizability.DIVERGING
    if np.any(norms <= ZERO_NORM):
        return Normalizability.INDETERMINATE
    rel = np.abs(np.diff(norms)) / norms[:-1]
    if np.all(rel <= 1e-4) and np.all(np.diff(rel) <= 1e-12):
        return Normalizability.CONVERGING
    return Normalizability.INDETERMINATE


def _ascend(functional, xi, cfg):
    step = cfg.step
    f = functional_value(xi, functional)
    g = projected_gradient(xi, functional)
    gn = l2_norm(g, xi.grid)
    it = 0
    while gn > cfg.tol and it < cfg.max_iter:
        it += 1
        trial = _feasible(ProbeWaveFunction(xi.grid, xi.values + step * g))
        f_trial = functional_value(trial, functional)
        if f_trial > f:
            xi, f = trial, f_trial
            g = projected_gradient(xi, functional)
            gn = l2_norm(g, xi.grid)
        else:
            step *= 0.5
            if step < 1e-16:
                break
    return xi, gn, it, gn <= cfg.tol


def find_stationary(functional, init, cfg=None, multiplier_tol=1e-5):
    """Projected-gradient ascent to a stationary point of the gauge-fixed functional.

    Iterates stay feasible: each step is followed by renormalization and an
    exact gauge fix.  Raises :class:`NotConverged` (carrying the best
    iterate, branch ``INDETERMINATE``) when ``cfg.max_iter`` is exhausted
    or the step size collapses.
    """
    cfg = OptimizerConfig() if cfg is None else cfg
    if init.norm_sq <= ZERO_NORM:
        raise ZeroNorm("initial probe has zero norm")
    xi = _feasible(init)
    xi, gn, it, ok = _ascend(functional, xi, cfg)
    m = multiplier_estimate(xi, functional)
    result = StationaryResult(
        probe=xi,
        shift=shift(xi, functional.kernel),
        grad_norm=gn,
        mu_tilde=complex(functional.mu_tilde),
        branch=Branch.INDETERMINATE,
        iterations=it,
        converged=ok,
        multiplier=m,
    )
    if not ok:
        raise NotConverged(result, f"projected gradient {gn:.3e} > tol {cfg.tol:.1e} after {it} iterations")
    return replace(result, branch=classify_branch(functional.kernel, xi, m, multiplier_tol))


def classify_branch(kernel, xi, multiplier, multiplier_tol=1e-5):
    """Branch of a converged stationary probe.

    With a vanishing multiplier the Euler-Lagrange solution is
    ``exp(-i s k) / B``; its normalizability is confirmed under grid
    refinement.  Otherwise the equation's leading coefficient
    ``|B|^2 - m N_f`` decides: a sign change inside the domain makes
    ``|xi|^2`` behave like ``1/|k - k0|``, which is not integrable.
    """
    grid = xi.grid
    if abs(multiplier) <= multiplier_tol:
        s = shift(xi, kernel)
        sizes = [512, 2048, 8192]

        def builder(n):
            return kernel_inverse_probe(kernel, s, grid.refined(n))

        verdict = normalizability_check(builder, sizes)
        return {
            Normalizability.CONVERGING: Branch.NORMALIZABLE,
            Normalizability.DIVERGING: Branch.UNNORMALIZABLE,
            Normalizability.INDETERMINATE: Branch.INDETERMINATE,
        }[verdict]
    _, n_f = apply_kernel(normalize(xi), kernel)
    lead = np.abs(kernel_eval(kernel, grid.k)) ** 2 - multiplier * n_f
    if lead.min() < 0 < lead.max():
        return Branch.UNNORMALIZABLE
    return Branch.INDETERMINATE
