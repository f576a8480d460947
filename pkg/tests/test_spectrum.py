import numpy as np
import pytest

from weakprobe.errors import BadParams, DomainMismatch, EmptySpectrum
from weakprobe.grid import MomentumGrid, ProbeWaveFunction, eigenstate, expectation_x, normalize, variance_x
from weakprobe.postselection import PostselectionKernel, final_probe
from weakprobe.spectrum import (
    PositionAmplitudes,
    discrete_moments,
    eigenstate_amplitude,
    from_position_coefficients,
    kronecker_check,
    odd_shift_variance_law,
    position_amplitude_continuum,
    to_position_coefficients,
    variance_divergence_scan,
)
from weakprobe.variational import analytic_optimal_probe


@pytest.fixture
def grid():
    return MomentumGrid()


def smooth_periodic(grid):
    k = grid.k
    return normalize(ProbeWaveFunction(
        grid, (1 + 0.5 * np.cos(2 * k) + 0.3j * np.sin(4 * k)) * np.exp(0.7j * np.cos(2 * k))))


def odd_coefficients(cutoff):
    # exact c_n of exp(-ik)/sqrt(pi): (2/pi) (-1)^(n+1) / (2n - 1)
    n = np.arange(-cutoff, cutoff + 1)
    return n, 2 / np.pi * (-1.0) ** (n + 1) / (2 * n - 1)


@pytest.mark.parametrize("m", range(-8, 9))
def test_orthonormality(grid, m):
    assert kronecker_check(eigenstate(2.0 * m, grid), m, 64) <= 1e-10


def test_examples(grid):
    amps = to_position_coefficients(ProbeWaveFunction(grid, (1 + np.exp(-2j * grid.k)) / np.sqrt(2 * np.pi)), -5, 5)
    assert amps[0] == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    assert amps[1] == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    assert abs(amps[2]) <= 1e-12
    np.testing.assert_array_equal(amps.x, 2 * amps.n)


def test_odd_position_coefficients(grid):
    n, oracle = odd_coefficients(200)
    amps = to_position_coefficients(eigenstate(1.0, grid), -200, 200)
    np.testing.assert_allclose(amps.coeffs, oracle, atol=1e-9)


def test_linearity(grid):
    a, b = eigenstate(1.0, grid), smooth_periodic(grid)
    ca = to_position_coefficients(a, -30, 30).coeffs
    cb = to_position_coefficients(b, -30, 30).coeffs
    cab = to_position_coefficients(ProbeWaveFunction(grid, 2 * a.values - 1j * b.values), -30, 30).coeffs
    np.testing.assert_allclose(cab, 2 * ca - 1j * cb, atol=1e-13)


def test_domain_and_range_errors():
    off = MomentumGrid(-1.0, 1.0, 64)
    with pytest.raises(DomainMismatch):
        to_position_coefficients(ProbeWaveFunction(off, np.ones(64)), -2, 2)
    with pytest.raises(DomainMismatch):
        position_amplitude_continuum(ProbeWaveFunction(off, np.ones(64)), 0.0)
    g = MomentumGrid(n_points=65)
    with pytest.raises(BadParams):
        to_position_coefficients(eigenstate(0.0, g), -40, 40)
    with pytest.raises(BadParams):
        to_position_coefficients(eigenstate(0.0, g), 3, 2)


def test_continuum_amplitudes(grid):
    xf = final_probe(analytic_optimal_probe(PostselectionKernel(1 + 1j), 0.0, grid), PostselectionKernel(1 + 1j))
    assert position_amplitude_continuum(xf, 0.0) == pytest.approx(1.0, abs=1e-10)
    assert abs(position_amplitude_continuum(xf, 2.0)) <= 1e-10
    assert position_amplitude_continuum(xf, 1.0) == pytest.approx(2 / np.pi, abs=1e-10)


def test_continuum_matches_sinc(grid):
    x = np.linspace(-7.3, 9.1, 23)
    for m in (0, 2):
        np.testing.assert_allclose(position_amplitude_continuum(eigenstate(2.0 * m, grid), x),
                                   eigenstate_amplitude(x, m), atol=1e-10)
    assert eigenstate_amplitude(1e-9, 0) == pytest.approx(1.0, abs=1e-15)


def test_continuum_lattice_consistency(grid):
    xi = smooth_periodic(grid)
    n = np.arange(-10, 11)
    np.testing.assert_allclose(position_amplitude_continuum(xi, 2.0 * n),
                               to_position_coefficients(xi, -10, 10).coeffs, atol=1e-12)


def test_discrete_moments_examples():
    c = np.zeros(3)
    c[2] = 1
    mean, var, w = discrete_moments(PositionAmplitudes(-1, 1, c))
    assert (mean, var, w) == (2.0, 0.0, 1.0)
    c = np.zeros(6)
    c[0] = c[5] = 1 / np.sqrt(2)
    mean, var, _ = discrete_moments(PositionAmplitudes(0, 5, c))
    assert mean == pytest.approx(5.0) and var == pytest.approx(25.0)
    with pytest.raises(EmptySpectrum):
        discrete_moments(PositionAmplitudes(0, 2, np.zeros(3)))


def test_odd_shift_variance_against_series(grid):
    scan = variance_divergence_scan(eigenstate(1.0, grid), [50, 100, 200])
    for cutoff, var in scan:
        n, c = odd_coefficients(cutoff)
        p = np.abs(c) ** 2
        mean = np.dot(2 * n, p) / p.sum()
        oracle = np.dot((2 * n - mean) ** 2, p) / p.sum()
        assert var == pytest.approx(oracle, rel=1e-6)
        assert var == pytest.approx(odd_shift_variance_law(cutoff), rel=0.02)
    vs = [v for _, v in scan]
    assert vs[0] < vs[1] < vs[2]
    assert vs[1] == pytest.approx(81.5, abs=0.2)


def test_even_shift_variance_vanishes(grid):
    for _, var in variance_divergence_scan(eigenstate(2.0, grid), [50, 100]):
        assert var <= 1e-10


def test_perturbed_eigenstate_residual(grid):
    rng = np.random.default_rng(5)
    noise = rng.normal(size=8) + 1j * rng.normal(size=8)
    noise *= 0.01 / np.linalg.norm(noise)
    amps = np.zeros(17, dtype=complex)
    amps[8] = 1
    amps[4:12] += noise
    xi = from_position_coefficients(PositionAmplitudes(-8, 8, amps), grid)
    assert 5e-3 <= kronecker_check(xi, 0, 64) <= 5e-2


def test_synthesis_examples(grid):
    xi = from_position_coefficients(PositionAmplitudes(0, 0, [1.0]), grid)
    np.testing.assert_allclose(xi.values, 1 / np.sqrt(np.pi), atol=1e-15)
    xi = from_position_coefficients(PositionAmplitudes(0, 1, [1 / np.sqrt(2)] * 2), grid)
    np.testing.assert_allclose(xi.values, (1 + np.exp(-2j * grid.k)) / np.sqrt(2 * np.pi), atol=1e-15)


def test_round_trip_coefficients(grid):
    rng = np.random.default_rng(9)
    c = rng.normal(size=5) + 1j * rng.normal(size=5)
    back = to_position_coefficients(from_position_coefficients(PositionAmplitudes(-2, 2, c), grid), -2, 2)
    np.testing.assert_allclose(back.coeffs, c, atol=1e-10)


def test_parseval_convergence(grid):
    xi = smooth_periodic(grid)
    losses = [1 - to_position_coefficients(xi, -n, n).prob.sum() / xi.norm_sq for n in (4, 8, 16, 32, 256)]
    assert all(b <= a + 1e-15 for a, b in zip(losses, losses[1:]))
    assert abs(losses[-1]) <= 1e-6
    amps = to_position_coefficients(eigenstate(1.0, grid), -300, 300)
    assert amps.prob.sum() <= 1 + 1e-9


def test_moment_consistency(grid):
    xi = smooth_periodic(grid)
    mean, var, _ = discrete_moments(to_position_coefficients(xi, -512, 512))
    assert mean == pytest.approx(expectation_x(xi), abs=1e-7)
    assert var == pytest.approx(variance_x(xi), abs=1e-7)


def test_truncated():
    amps = PositionAmplitudes(-3, 3, np.arange(7))
    t = amps.truncated(1)
    assert (t.n_min, t.n_max) == (-1, 1)
    np.testing.assert_array_equal(t.coeffs, [2, 3, 4])
