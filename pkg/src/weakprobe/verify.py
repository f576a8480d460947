"""Quick invariant checks run by ``weakprobe verify``.

Each check returns ``(passed, detail)``.  Grids are kept small enough that
the whole suite finishes in a few seconds.
"""

import numpy as np

from .families import fit_scaling, make_family, sweep
from .grid import (
    MomentumGrid,
    ProbeWaveFunction,
    eigenstate,
    expectation_x,
    gauge_translate,
    random_probe,
    variance_x,
)
from .postselection import PostselectionKernel, final_probe, shift
from .spectrum import (
    discrete_moments,
    from_position_coefficients,
    kronecker_check,
    odd_shift_variance_law,
    to_position_coefficients,
    variance_divergence_scan,
)
from .variational import (
    GaugeFixedFunctional,
    Normalizability,
    analytic_optimal_probe,
    functional_value,
    gauge_fix,
    gradient,
    kernel_inverse_probe,
    normalizability_check,
    stationarity_check,
)


def _rngs(seed, n):
    return [np.random.Generator(np.random.Philox(s)) for s in np.random.SeedSequence(seed).spawn(n)]


def check_kronecker(seed):
    k = PostselectionKernel(1 + 1j)
    grid = MomentumGrid()
    res = max(kronecker_check(final_probe(analytic_optimal_probe(k, 2.0 * m, grid), k), m, 64)
              for m in (0, 1, 5))
    return res <= 1e-8, f"max residual {res:.2e}"


def check_zero_variance(seed):
    k = PostselectionKernel(1 + 1j)
    xf = final_probe(analytic_optimal_probe(k, 4.0, MomentumGrid()), k)
    var = discrete_moments(to_position_coefficients(xf, -256, 256))[1]
    return var <= 1e-12, f"variance {var:.2e}"


def check_odd_variance(seed):
    scan = variance_divergence_scan(eigenstate(1.0), [50, 100, 200])
    errs = [abs(v / odd_shift_variance_law(c) - 1.0) for c, v in scan]
    vs = [v for _, v in scan]
    ok = max(errs) <= 0.02 and all(b > a for a, b in zip(vs, vs[1:]))
    return ok, f"max relative deviation {max(errs):.2e}"


def check_gauge_invariance(seed):
    k = PostselectionKernel(1 + 1j)
    worst = 0.0
    for rng in _rngs(seed, 20):
        xi = random_probe(rng)
        x0 = rng.uniform(-10, 10)
        worst = max(worst, abs(shift(gauge_translate(xi, x0), k) - shift(xi, k)))
    return worst <= 1e-9, f"max |dshift| {worst:.2e}"


def check_gauge_fix(seed):
    worst_x, worst_idem = 0.0, 0.0
    for rng in _rngs(seed, 20):
        g = gauge_fix(random_probe(rng))
        worst_x = max(worst_x, abs(expectation_x(g)))
        worst_idem = max(worst_idem, float(np.max(np.abs(gauge_fix(g).values - g.values))))
    return worst_x <= 1e-10 and worst_idem <= 1e-12, f"|<x>| {worst_x:.2e}, idempotence {worst_idem:.2e}"


def check_stationarity(seed):
    grid = MomentumGrid()
    worst_g, exps = 0.0, []
    for a in (1 + 1j, 2 - 1j, 0.5 + 0.5j):
        f = GaugeFixedFunctional(PostselectionKernel(a))
        rep = stationarity_check(analytic_optimal_probe(f.kernel, 2.0, grid), f, seed=seed)
        worst_g = max(worst_g, rep.grad_norm)
        exps.append(rep.scaling_exponent)
    f = GaugeFixedFunctional(PostselectionKernel(1 + 1j))
    flat = stationarity_check(ProbeWaveFunction(grid, np.ones(grid.n_points)), f, seed=seed)
    ok = worst_g <= 1e-6 and all(1.8 <= e <= 2.2 for e in exps) and 0.9 <= flat.scaling_exponent <= 1.1
    return ok, (f"grad {worst_g:.2e}, exponents {min(exps):.3f}..{max(exps):.3f}, "
                f"non-stationary {flat.scaling_exponent:.3f}")


def check_gradient(seed, h=1e-6):
    grid = MomentumGrid(n_points=64)
    worst = 0.0
    for rng, mu in zip(_rngs(seed, 2), (0.0, 0.3)):
        f = GaugeFixedFunctional(PostselectionKernel(1 + 1j), mu)
        xi = random_probe(rng, grid)
        g = gradient(xi, f)
        n = grid.n_points
        fd = np.empty(2 * n)
        for j in range(2 * n):
            e = np.zeros(n, dtype=complex)
            e[j % n] = h if j < n else 1j * h
            fd[j] = (functional_value(ProbeWaveFunction(grid, xi.values + e), f)
                     - functional_value(ProbeWaveFunction(grid, xi.values - e), f)) / (2 * h)
        worst = max(worst, float(np.linalg.norm(g - fd) / np.linalg.norm(fd)))
    return worst <= 1e-5, f"relative error {worst:.2e}"


def check_tradeoff(seed):
    table = sweep(make_family("Chirp"), [4, 8, 16, 32, 64], PostselectionKernel(1j), 1000,
                  MomentumGrid(n_points=4096))
    fit = fit_scaling(table)
    ok = abs(fit.shift_exponent - 1) <= 0.02 and abs(fit.variance_exponent - 2) <= 0.02
    return ok, f"exponents {fit.shift_exponent:.4f}, {fit.variance_exponent:.4f}"


def check_branches(seed):
    sizes = [512, 2048, 8192]
    good = normalizability_check(
        lambda n: kernel_inverse_probe(PostselectionKernel(1 + 1j), 0.0, MomentumGrid(n_points=n)), sizes)
    bad = normalizability_check(
        lambda n: kernel_inverse_probe(PostselectionKernel(1j), 0.0, MomentumGrid(n_points=n)), sizes)
    ok = good is Normalizability.CONVERGING and bad is Normalizability.DIVERGING
    return ok, f"A_w=1+i {good.value}, A_w=i {bad.value}"


def check_round_trip(seed):
    grid = MomentumGrid()
    worst = 0.0
    for rng in _rngs(seed, 5):
        n = rng.integers(-20, 21, size=6)
        c = rng.normal(size=6) + 1j * rng.normal(size=6)
        xi = ProbeWaveFunction(grid, np.exp(-2j * np.outer(grid.k, n)) @ c)
        top = (grid.n_points - 1) // 2
        back = from_position_coefficients(to_position_coefficients(xi, -top, top), grid)
        worst = max(worst, float(np.max(np.abs(back.values - xi.values))))
    return worst <= 1e-10, f"max error {worst:.2e}"


def check_moments(seed):
    xi = final_probe(analytic_optimal_probe(PostselectionKernel(1 + 1j), 0.0, MomentumGrid()),
                     PostselectionKernel(0.5 + 0.2j))
    mean, var, _ = discrete_moments(to_position_coefficients(xi, -512, 512))
    err = max(abs(mean - expectation_x(xi)), abs(var - variance_x(xi)))
    return err <= 1e-7, f"grid vs spectral {err:.2e}"


CHECKS = [
    ("kronecker_delta", check_kronecker),
    ("zero_variance_even_shift", check_zero_variance),
    ("odd_shift_variance_law", check_odd_variance),
    ("gauge_invariance", check_gauge_invariance),
    ("gauge_fix", check_gauge_fix),
    ("stationarity", check_stationarity),
    ("gradient_fd", check_gradient),
    ("shift_variance_tradeoff", check_tradeoff),
    ("branch_normalizability", check_branches),
    ("transform_round_trip", check_round_trip),
    ("moment_consistency", check_moments),
]


def run_suite(seed=42):
    return [(name, *fn(seed)) for name, fn in CHECKS]
