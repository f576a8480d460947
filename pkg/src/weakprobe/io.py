"""CSV/JSON import and export.

Floats are written with ``repr`` so values round-trip exactly and identical
inputs give byte-identical files.
"""

import csv
import json

import numpy as np

from .errors import BadParams
from .grid import MomentumGrid, ProbeWaveFunction
from .spectrum import PositionAmplitudes

PROBE_HEADER = ["k", "re", "im"]
SPECTRUM_HEADER = ["n", "x", "re", "im", "prob"]
SWEEP_HEADER = ["alpha", "shift", "variance_f", "snr", "captured_weight"]


def _f(x):
    return repr(float(x))


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _read_rows(path, header):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        got = next(r, None)
        if got != header:
            raise BadParams(f"{path}: expected header {','.join(header)}, got {got}")
        try:
            return np.array([[float(v) for v in row] for row in r if row], dtype=float)
        except ValueError as exc:
            raise BadParams(f"{path}: {exc}") from None


def write_probe_csv(path, xi):
    rows = ((_f(k), _f(v.real), _f(v.imag)) for k, v in zip(xi.grid.k, xi.values))
    _write_rows(path, PROBE_HEADER, rows)


def read_probe_csv(path):
    data = _read_rows(path, PROBE_HEADER)
    if data.shape[0] < 16:
        raise BadParams(f"{path}: need at least 16 grid rows")
    k = data[:, 0]
    grid = MomentumGrid(float(k[0]), float(k[-1]), len(k))
    if np.max(np.abs(k - grid.k)) > 1e-9 * max(1.0, np.abs(k).max()):
        raise BadParams(f"{path}: k column is not a uniform grid")
    return ProbeWaveFunction(grid, data[:, 1] + 1j * data[:, 2])


def write_spectrum_csv(path, amps):
    rows = ((str(int(n)), _f(x), _f(c.real), _f(c.imag), _f(p))
            for n, x, c, p in zip(amps.n, amps.x, amps.coeffs, amps.prob))
    _write_rows(path, SPECTRUM_HEADER, rows)


def read_spectrum_csv(path):
    data = _read_rows(path, SPECTRUM_HEADER)
    if data.size == 0:
        raise BadParams(f"{path}: no rows")
    n = data[:, 0].astype(int)
    if np.any(np.diff(n) != 1):
        raise BadParams(f"{path}: n column must be consecutive integers")
    return PositionAmplitudes(int(n[0]), int(n[-1]), data[:, 2] + 1j * data[:, 3])


def write_sweep_csv(path, table):
    _write_rows(path, SWEEP_HEADER, ([_f(getattr(r, h)) for h in SWEEP_HEADER] for r in table))


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
