import io as _io
import json

import numpy as np
import pytest

from weakprobe import io
from weakprobe.cli import parse_complex, run
from weakprobe.errors import BadParams
from weakprobe.grid import MomentumGrid, ProbeWaveFunction


def call(*argv):
    out, err = _io.StringIO(), _io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("text,value", [
    ("1+1i", 1 + 1j), ("0+1i", 1j), ("2-1i", 2 - 1j), ("-0.5i", -0.5j), ("i", 1j),
    ("3", 3 + 0j), ("1e-3+2i", 1e-3 + 2j), ("0.5+0.5j", 0.5 + 0.5j), ([1, -2], 1 - 2j),
])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("text", ["", "abc", "1+", "1+1k", "--1"])
def test_parse_complex_rejects(text):
    with pytest.raises(BadParams):
        parse_complex(text)


def test_optimal_probe(tmp_path):
    out = tmp_path / "p.csv"
    code, text, _ = call("optimal-probe", "--weak-value", "1+1i", "--x0", "2", "--out", str(out))
    assert code == 0
    lines = dict(line.split(" ", 1) for line in text.splitlines())
    assert float(lines["kronecker_residual"]) <= 1e-8
    assert float(lines["optimal_shift"]) == pytest.approx(1.5)
    xi = io.read_probe_csv(out)
    assert xi.grid.n_points == 2048 and xi.norm_sq == pytest.approx(1.0)


def test_optimal_probe_m_flag(tmp_path):
    code, text, _ = call("optimal-probe", "--weak-value", "2-1i", "--m", "3", "--grid-points", "512")
    assert code == 0 and "kronecker_residual" in text


def test_kernel_zero_exit_code():
    code, _, err = call("optimal-probe", "--weak-value", "0+1i", "--x0", "0")
    assert code == 2
    assert err.strip() == "KernelZero at k≈-0.7854"


def test_states_instead_of_weak_value():
    code, text, _ = call("optimal-probe", "--pre", "1,1", "--post", "1,-0.8", "--bloch", "0,0,1")
    assert code == 0 and "optimal_shift" in text
    code, _, err = call("optimal-probe", "--pre", "1,1", "--post", "1,-0.8")
    assert code == 1
    code, _, _ = call("optimal-probe", "--pre", "1,0", "--post", "0,1", "--bloch", "1,0,0")
    assert code == 1


def test_validation_errors(tmp_path):
    assert call("optimal-probe", "--weak-value", "x")[0] == 1
    assert call("frobnicate")[0] == 1
    assert call("optimal-probe", "--grid-points", "4")[0] == 1
    assert call("sweep", "--alphas", "1,2")[0] == 1
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"weak_value": "1+1i", "colour": "red"}))
    code, _, err = call("optimal-probe", "--config", str(cfg))
    assert code == 1 and "colour" in err


def test_io_errors(tmp_path):
    assert call("optimal-probe", "--config", str(tmp_path / "missing.json"))[0] == 3
    assert call("optimal-probe", "--out", str(tmp_path / "no" / "dir.csv"))[0] == 3
    assert call("transform", "--in", str(tmp_path / "none.csv"), "--out", str(tmp_path / "o.csv"))[0] == 3


def test_config_with_flag_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "optimal-probe", "weak_value": [0, 1], "x0": 2}))
    assert call("optimal-probe", "--config", str(cfg))[0] == 2
    code, text, _ = call("optimal-probe", "--config", str(cfg), "--weak-value", "1+1i")
    assert code == 0
    cfg.write_text(json.dumps({"kernel": {"weak_value": [2.0, -1.0]}, "grid_points": 256}))
    assert call("optimal-probe", "--config", str(cfg))[0] == 0
    cfg.write_text(json.dumps({"command": "sweep"}))
    assert call("optimal-probe", "--config", str(cfg))[0] == 1


def test_verify():
    code, text, _ = call("verify")
    assert code == 0
    lines = text.splitlines()
    assert len(lines) >= 10 and all(line.startswith("PASS ") for line in lines)


def test_sweep(tmp_path):
    out = tmp_path / "s.csv"
    code, _, _ = call("sweep", "--family", "Chirp", "--weak-value", "1i", "--alphas", "4,8,16,32,64",
                      "--cutoffs", "1000", "--grid-points", "4096", "--out", str(out))
    assert code == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "alpha,shift,variance_f,snr,captured_weight"
    assert len(rows) == 6
    fit = json.loads((tmp_path / "s.csv.fit.json").read_text())
    assert abs(fit["fit"]["shift_exponent"] - 1) <= 0.02
    assert fit["family"] == "Chirp" and fit["cutoff"] == 1000


def test_sweep_json_family_and_errors(tmp_path):
    out = tmp_path / "s.csv"
    code, text, _ = call("sweep", "--family", '{"id": "EigenstatePair", "p": 0.3}', "--alphas", "0.5,4,8,16",
                         "--grid-points", "512", "--cutoffs", "128", "--out", str(out))
    assert code == 0
    summary = json.loads((tmp_path / "s.csv.fit.json").read_text())
    assert summary["params"] == {"p": 0.3}
    assert len(summary["errors"]) == 1 and "BadParams" in summary["errors"][0][1]
    assert call("sweep", "--cutoffs", "100,200", "--out", str(out))[0] == 1


def test_optimize(tmp_path):
    out = tmp_path / "r.json"
    code, _, _ = call("optimize", "--weak-value", "1+1i", "--x0", "2", "--out", str(out))
    assert code == 0
    res = json.loads(out.read_text())
    assert set(res) == {"shift", "grad_norm", "mu_tilde", "branch", "iterations", "probe_csv_path"}
    assert res["branch"] == "Normalizable"
    assert res["shift"] == pytest.approx(1.5, abs=1e-6)
    assert io.read_probe_csv(res["probe_csv_path"]).grid.n_points == 2048


def test_optimize_not_converged(tmp_path):
    out = tmp_path / "r.json"
    code, _, err = call("optimize", "--weak-value", "1+1i", "--init", "random", "--mu-tilde", "0.3",
                        "--grid-points", "64", "--out", str(out))
    assert code == 2 and err.startswith("NotConverged")
    res = json.loads(out.read_text())
    assert res["branch"] == "Indeterminate"
    assert res["mu_tilde"] == [0.3, 0.0]


def test_transform_round_trip(tmp_path):
    grid = MomentumGrid()
    rng = np.random.default_rng(3)
    n = rng.integers(-30, 31, size=5)
    c = rng.normal(size=5) + 1j * rng.normal(size=5)
    xi = ProbeWaveFunction(grid, np.exp(-2j * np.outer(grid.k, n)) @ c)
    src, mid, back = tmp_path / "m.csv", tmp_path / "x.csv", tmp_path / "b.csv"
    io.write_probe_csv(src, xi)
    assert call("transform", "--in", str(src), "--out", str(mid))[0] == 0
    assert mid.read_text().splitlines()[0] == "n,x,re,im,prob"
    assert call("transform", "--in", str(mid), "--out", str(back))[0] == 0
    np.testing.assert_allclose(io.read_probe_csv(back).values, xi.values, atol=1e-10)
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert call("transform", "--in", str(bad), "--out", str(back))[0] == 1


@pytest.mark.parametrize("argv", [
    ("optimal-probe", "--weak-value", "2-1i", "--x0", "4"),
    ("sweep", "--family", "TruncatedGaussian", "--alphas", "1,2,3,4"),
    ("optimize", "--weak-value", "0.5+0.5i", "--seed", "7"),
])
def test_deterministic_outputs(tmp_path, argv):
    blobs = []
    for run_id in range(2):
        out = tmp_path / f"run{run_id}"
        out.mkdir()
        code, _, _ = call(*argv, "--out", str(out / "result"))
        assert code == 0
        files = sorted(out.iterdir())
        blobs.append([f.read_bytes().replace(str(out).encode(), b"") for f in files])
    assert blobs[0] == blobs[1]
