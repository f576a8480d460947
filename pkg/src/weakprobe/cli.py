"""Command-line front end.

Subcommands: ``optimal-probe``, ``verify``, ``sweep``, ``optimize``,
``transform``.  Settings come from an optional JSON file (``--config``)
overridden by flags.  Exit codes: 0 success, 1 invalid input, 2 numerical
failure, 3 I/O error.
"""

import argparse
import json
import re
import sys

import numpy as np

from . import io
from .errors import BadParams, NotConverged, NumericalError, ValidationError
from .families import fit_scaling, make_family, sweep
from .grid import DEFAULT_POINTS, MomentumGrid, random_probe
from .postselection import (
    InvolutiveObservable,
    PostselectionKernel,
    QubitState,
    final_probe,
    parse_kernel_spec,
)
from .spectrum import from_position_coefficients, kronecker_check, to_position_coefficients
from .variational import (
    GaugeFixedFunctional,
    OptimizerConfig,
    analytic_optimal_probe,
    find_stationary,
    optimal_shift,
)

COMMANDS = ("optimal-probe", "verify", "sweep", "optimize", "transform")
DEFAULTS = {
    "weak_value": "1+1i",
    "grid_points": DEFAULT_POINTS,
    "x0": 0.0,
    "mu_tilde": "0",
    "family": "EigenstatePair",
    "alphas": "4,8,16,32",
    "cutoffs": "256",
    "seed": 42,
    "init": "analytic",
}
CONFIG_KEYS = {
    "command", "kernel", "weak_value", "pre", "post", "bloch", "x0", "m", "mu_tilde",
    "grid_points", "family", "alphas", "cutoffs", "out", "input", "seed", "init",
}
KRONECKER_RANGE = 64

_COMPLEX_RE = re.compile(r"^[\d.eE+\-ij]+$")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise BadParams(message)


def parse_complex(text):
    """Parse ``a+bi`` style literals (``1+1i``, ``-0.5i``, ``2``)."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return complex(float(text[0]), float(text[1]))
    s = str(text).strip().replace(" ", "")
    if not s or not _COMPLEX_RE.match(s):
        raise BadParams(f"cannot parse complex number {text!r}")
    s = s.replace("i", "j")
    if s.endswith("j") and (len(s) == 1 or s[-2] in "+-"):
        s = s[:-1] + "1j"
    try:
        return complex(s)
    except ValueError:
        raise BadParams(f"cannot parse complex number {text!r}") from None


def _parse_list(text, kind):
    if isinstance(text, (list, tuple)):
        items = list(text)
    else:
        items = [t for t in str(text).split(",") if t.strip()]
    try:
        return [kind(x) for x in items]
    except (TypeError, ValueError):
        raise BadParams(f"cannot parse list {text!r}") from None


def build_parser():
    p = _Parser(prog="weakprobe", description="Optimal probe wave functions for weak-value amplification.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file of settings; flags override it")
    p.add_argument("--weak-value", dest="weak_value", help="complex weak value, e.g. 1+1i")
    p.add_argument("--pre", help="preselected qubit amplitudes a0,a1")
    p.add_argument("--post", help="postselected qubit amplitudes a0,a1")
    p.add_argument("--bloch", help="observable Bloch vector x,y,z")
    p.add_argument("--x0", type=float, help="target final position")
    p.add_argument("--m", type=int, help="target lattice index (x0 = 2m)")
    p.add_argument("--mu-tilde", dest="mu_tilde", help="multiplier of the gauge term")
    p.add_argument("--grid-points", dest="grid_points", type=int)
    p.add_argument("--family", help="family id or JSON object with id and params")
    p.add_argument("--alphas", help="comma-separated sweep parameters")
    p.add_argument("--cutoffs", help="comma-separated spectral cutoffs")
    p.add_argument("--out", help="output path")
    p.add_argument("--in", dest="input", help="input CSV for transform")
    p.add_argument("--init", choices=("analytic", "random"), help="optimizer start")
    p.add_argument("--seed", type=int)
    return p


def load_config(args):
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            try:
                cfg = json.load(fh)
            except json.JSONDecodeError as exc:
                raise BadParams(f"config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise BadParams("config must be a JSON object")
        unknown = set(cfg) - CONFIG_KEYS
        if unknown:
            raise BadParams(f"unknown config keys: {', '.join(sorted(unknown))}")
        if "command" in cfg and cfg["command"] != args.command:
            raise BadParams(f"config is for {cfg['command']!r}, not {args.command!r}")
    merged = dict(DEFAULTS)
    merged.update(cfg)
    for key, val in vars(args).items():
        if val is not None and key not in ("command", "config"):
            merged[key] = val
    # explicit states or kernel spec take precedence over the default weak value
    user_wv = "weak_value" in cfg or args.weak_value is not None
    if not user_wv and ({"pre", "post", "bloch", "kernel"} & set(merged)):
        merged.pop("weak_value")
    return merged


def _state(text):
    return QubitState.from_amplitudes(*[parse_complex(a) for a in _parse_list(text, str)])


def kernel_from(cfg):
    state_keys = {"pre", "post", "bloch"} & set(cfg)
    sources = ("weak_value" in cfg) + ("kernel" in cfg) + bool(state_keys)
    if sources != 1:
        raise BadParams("give exactly one of --weak-value, --pre/--post/--bloch, or a kernel spec")
    if "kernel" in cfg:
        return parse_kernel_spec(cfg["kernel"])
    if "weak_value" in cfg:
        return PostselectionKernel(parse_complex(cfg["weak_value"]))
    if state_keys != {"pre", "post", "bloch"}:
        raise BadParams("--pre, --post and --bloch must be given together")
    bloch = _parse_list(cfg["bloch"], float)
    return PostselectionKernel.from_states(_state(cfg["pre"]), _state(cfg["post"]),
                                           InvolutiveObservable(tuple(bloch)))


def _grid(cfg):
    return MomentumGrid(n_points=int(cfg["grid_points"]))


def _target(cfg):
    if "m" in cfg:
        return 2.0 * int(cfg["m"])
    return float(cfg["x0"])


def _require_out(cfg):
    if not cfg.get("out"):
        raise BadParams("--out is required")
    return cfg["out"]


def cmd_optimal_probe(cfg, out):
    kernel = kernel_from(cfg)
    grid = _grid(cfg)
    x0 = _target(cfg)
    xi = analytic_optimal_probe(kernel, x0, grid)
    if cfg.get("out"):
        io.write_probe_csv(cfg["out"], xi)
    print(f"optimal_shift {optimal_shift(kernel, grid)!r}", file=out)
    if float(x0 / 2).is_integer():
        res = kronecker_check(final_probe(xi, kernel), int(x0 // 2), KRONECKER_RANGE)
        print(f"kronecker_residual {res!r}", file=out)
    else:
        print("kronecker_residual n/a (x0 is not an even integer)", file=out)
    return 0


def cmd_verify(cfg, out):
    from .verify import run_suite

    failed = 0
    for name, ok, detail in run_suite(int(cfg["seed"])):
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", file=out)
        failed += not ok
    if failed:
        raise NumericalError(f"{failed} verification check(s) failed")
    return 0


def _family(cfg):
    spec = cfg["family"]
    if isinstance(spec, str) and spec.lstrip().startswith("{"):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise BadParams(f"family spec: {exc}") from None
    return make_family(spec)


def cmd_sweep(cfg, out):
    path = _require_out(cfg)
    kernel = kernel_from(cfg)
    fam = _family(cfg)
    cutoffs = _parse_list(cfg["cutoffs"], int)
    if len(cutoffs) != 1:
        raise BadParams("sweep takes a single cutoff")
    table = sweep(fam, _parse_list(cfg["alphas"], float), kernel, cutoffs[0], _grid(cfg))
    io.write_sweep_csv(path, table)
    summary = {"family": fam.id.value, "params": fam.params, "cutoff": cutoffs[0],
               "errors": [[a, msg] for a, msg in table.errors]}
    try:
        summary["fit"] = fit_scaling(table)._asdict()
    except NumericalError as exc:
        summary["fit"] = None
        summary["fit_error"] = str(exc)
    io.write_json(path + ".fit.json", summary)
    for r in table:
        print(f"alpha {r.alpha!r} shift {r.shift!r} variance_f {r.variance_f!r} snr {r.snr!r}", file=out)
    for a, msg in table.errors:
        print(f"alpha {a!r} error {msg}", file=out)
    return 0


def cmd_optimize(cfg, out):
    path = _require_out(cfg)
    kernel = kernel_from(cfg)
    grid = _grid(cfg)
    func = GaugeFixedFunctional(kernel, parse_complex(cfg["mu_tilde"]))
    seed = int(cfg["seed"])
    if cfg["init"] == "random":
        init = random_probe(np.random.Generator(np.random.Philox(seed)), grid)
    else:
        init = analytic_optimal_probe(kernel, _target(cfg), grid)
    csv_path = path + ".probe.csv"
    try:
        result = find_stationary(func, init, OptimizerConfig(rng_seed=seed))
    except NotConverged as exc:
        io.write_probe_csv(csv_path, exc.result.probe)
        io.write_json(path, exc.result.to_json_dict(csv_path))
        raise
    io.write_probe_csv(csv_path, result.probe)
    io.write_json(path, result.to_json_dict(csv_path))
    print(f"shift {result.shift!r} branch {result.branch.value} iterations {result.iterations}", file=out)
    return 0


def cmd_transform(cfg, out):
    path = _require_out(cfg)
    src = cfg.get("input")
    if not src:
        raise BadParams("--in is required")
    with open(src) as fh:
        header = fh.readline().strip()
    if header == ",".join(io.PROBE_HEADER):
        xi = io.read_probe_csv(src)
        top = (xi.grid.n_points - 1) // 2
        if "cutoffs" in cfg and cfg["cutoffs"] != DEFAULTS["cutoffs"]:
            top = max(_parse_list(cfg["cutoffs"], int))
        io.write_spectrum_csv(path, to_position_coefficients(xi, -top, top))
        print(f"momentum -> position, |n| <= {top}", file=out)
    elif header == ",".join(io.SPECTRUM_HEADER):
        amps = io.read_spectrum_csv(src)
        io.write_probe_csv(path, from_position_coefficients(amps, _grid(cfg)))
        print(f"position -> momentum, {cfg['grid_points']} points", file=out)
    else:
        raise BadParams(f"{src}: unrecognized header {header!r}")
    return 0


HANDLERS = {
    "optimal-probe": cmd_optimal_probe,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "transform": cmd_transform,
}


def run(argv=None, out=None, err=None):
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args)
        return HANDLERS[args.command](cfg, out)
    except ValidationError as exc:
        print(f"error: {exc}", file=err)
        return 1
    except NumericalError as exc:
        print(str(exc), file=err)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=err)
        return 3


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
