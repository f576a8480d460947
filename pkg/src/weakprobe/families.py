"""Trial-probe families and shift/variance sweeps.

Each family maps a scale parameter ``alpha`` (and the kernel) to an initial
probe.  :func:`evaluate` gauge-fixes the probe, computes the pointer shift,
and takes the variance of the postselected probe on the truncated
position lattice ``x = 2n``, so that a divergent continuum variance shows
up as growth with the cutoff instead of being hidden.

Families
--------
EigenstatePair
    Postselected probe ``sqrt(p)|x=0> + sqrt(1-p)|x=2 floor(alpha)>``,
    divided by ``B`` to get the initial probe.  The gauge-invariant shift
    of ``phi / B`` does not grow with alpha (the kernel acts identically on
    both flat-momentum components), so this family illustrates broadening
    without amplification.
TruncatedGaussian
    ``exp(-k^2 / (2 sigma^2 alpha^2))`` on the bounded domain.
Chirp
    ``cos^4(k) exp(i alpha rate cos(2k) / 2)``: local position
    ``alpha * rate * sin(2k)``.  For a purely imaginary weak value the
    kernel reweights momenta asymmetrically, giving shift exactly
    proportional to alpha while the variance grows like alpha^2.
Custom
    Any callable ``(alpha, kernel, grid) -> ProbeWaveFunction``.
"""

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.stats import linregress

from .errors import BadParams, DegenerateFit, WeakProbeError
from .grid import MomentumGrid, ProbeWaveFunction, normalize
from .postselection import check_kernel, final_probe, kernel_eval, shift
from .spectrum import PositionAmplitudes, discrete_moments, from_position_coefficients, to_position_coefficients
from .variational import analytic_optimal_probe, gauge_fix

EPS_FLOOR = 1e-12


class FamilyId(enum.Enum):
    EIGENSTATE_PAIR = "EigenstatePair"
    TRUNCATED_GAUSSIAN = "TruncatedGaussian"
    CHIRP = "Chirp"
    CUSTOM = "Custom"


@dataclass(frozen=True, eq=False)
class TrialFamily:
    id: FamilyId
    params: dict
    generator: Callable = field(repr=False)

    def __call__(self, alpha, kernel, grid):
        return self.generator(alpha, kernel, grid)


class SweepRow(NamedTuple):
    alpha: float
    shift: float
    variance_f: float
    snr: float
    captured_weight: float


@dataclass
class SweepTable:
    rows: list
    errors: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])


class ScalingFit(NamedTuple):
    shift_exponent: float
    variance_exponent: float
    r2_shift: float
    r2_var: float


def _eigenstate_pair(p):
    def gen(alpha, kernel, grid):
        m = int(math.floor(alpha))
        if m < 1:
            raise BadParams(f"EigenstatePair needs alpha >= 1, got {alpha}")
        coeffs = np.zeros(m + 1, dtype=complex)
        coeffs[0] = np.sqrt(p)
        coeffs[m] = np.sqrt(1.0 - p)
        final = from_position_coefficients(PositionAmplitudes(0, m, coeffs), grid)
        check_kernel(kernel, grid)
        return normalize(ProbeWaveFunction(grid, final.values / kernel_eval(kernel, grid.k)))
    return gen


def _truncated_gaussian(sigma):
    def gen(alpha, kernel, grid):
        if alpha <= 0:
            raise BadParams("TruncatedGaussian needs alpha > 0")
        width = sigma * alpha
        return normalize(ProbeWaveFunction(grid, np.exp(-grid.k ** 2 / (2.0 * width * width))))
    return gen


def _chirp(rate):
    def gen(alpha, kernel, grid):
        k = grid.k
        return normalize(ProbeWaveFunction(
            grid, np.cos(k) ** 4 * np.exp(0.5j * alpha * rate * np.cos(2.0 * k))))
    return gen


def make_family(spec, generator=None):
    """Build a family from ``{"id": ..., <params>}``.

    Parameters: ``p`` in (0, 1) for EigenstatePair (default 0.5),
    ``sigma`` > 0 for TruncatedGaussian (default 0.3), ``rate`` > 0 for
    Chirp (default 8).  Custom requires ``generator``.
    """
    if isinstance(spec, str):
        spec = {"id": spec}
    spec = dict(spec)
    try:
        fid = FamilyId(spec.pop("id"))
    except (KeyError, ValueError):
        raise BadParams(f"unknown or missing family id in {spec!r}") from None
    allowed = {
        FamilyId.EIGENSTATE_PAIR: {"p"},
        FamilyId.TRUNCATED_GAUSSIAN: {"sigma"},
        FamilyId.CHIRP: {"rate"},
        FamilyId.CUSTOM: set(spec),
    }[fid]
    extra = set(spec) - allowed
    if extra:
        raise BadParams(f"unknown parameters {sorted(extra)} for {fid.value}")
    if fid is FamilyId.EIGENSTATE_PAIR:
        p = float(spec.get("p", 0.5))
        if not 0.0 < p < 1.0:
            raise BadParams(f"p must lie in (0, 1), got {p}")
        return TrialFamily(fid, {"p": p}, _eigenstate_pair(p))
    if fid is FamilyId.TRUNCATED_GAUSSIAN:
        sigma = float(spec.get("sigma", 0.3))
        if sigma <= 0:
            raise BadParams("sigma must be positive")
        return TrialFamily(fid, {"sigma": sigma}, _truncated_gaussian(sigma))
    if fid is FamilyId.CHIRP:
        rate = float(spec.get("rate", 8.0))
        if rate <= 0:
            raise BadParams("rate must be positive")
        return TrialFamily(fid, {"rate": rate}, _chirp(rate))
    if generator is None:
        raise BadParams("Custom family needs a generator")
    return TrialFamily(fid, spec, generator)


def optimal_family(x0=0.0):
    """The analytic optimum as a (alpha-independent) Custom family member."""
    return TrialFamily(FamilyId.CUSTOM, {"x0": x0},
                       lambda alpha, kernel, grid: analytic_optimal_probe(kernel, x0, grid))


def evaluate(family, alpha, kernel, cutoff, grid=None):
    grid = MomentumGrid() if grid is None else grid
    xi = gauge_fix(family(alpha, kernel, grid))
    s = shift(xi, kernel)
    amps = to_position_coefficients(final_probe(xi, kernel), -cutoff, cutoff)
    _, var, weight = discrete_moments(amps)
    snr = abs(s) / np.sqrt(max(var, EPS_FLOOR))
    return SweepRow(float(alpha), s, var, float(snr), weight)


def _threads():
    try:
        return max(1, int(os.environ.get("WEAKPROBE_THREADS", "1")))
    except ValueError:
        return 1


def sweep(family, alphas, kernel, cutoff, grid=None, threads=None):
    """Evaluate the family at each alpha; failing rows go to ``errors``."""
    alphas = [float(a) for a in alphas]
    if len(alphas) < 4 or any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise BadParams("sweep needs >= 4 strictly increasing alphas")
    grid = MomentumGrid() if grid is None else grid

    def one(alpha):
        try:
            return evaluate(family, alpha, kernel, cutoff, grid)
        except WeakProbeError as exc:
            return exc

    n = _threads() if threads is None else max(1, int(threads))
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(one, alphas))
    else:
        results = [one(a) for a in alphas]
    table = SweepTable([])
    for alpha, res in zip(alphas, results):
        if isinstance(res, Exception):
            table.errors.append((alpha, f"{type(res).__name__}: {res}"))
        else:
            table.rows.append(res)
    return table


def fit_scaling(table):
    """Log-log slopes of |shift| and variance against alpha."""
    rows = list(table)
    if len(rows) < 4:
        raise DegenerateFit("need at least 4 rows")
    alpha = np.array([r.alpha for r in rows])
    s = np.abs(np.array([r.shift for r in rows]))
    v = np.array([r.variance_f for r in rows])
    if np.any(alpha <= 0) or np.any(s <= 0) or np.any(v <= 0):
        raise DegenerateFit("alpha, |shift| and variance must all be positive")
    la = np.log(alpha)
    fs = linregress(la, np.log(s))
    fv = linregress(la, np.log(v))
    return ScalingFit(float(fs.slope), float(fv.slope), float(fs.rvalue ** 2), float(fv.rvalue ** 2))
