import csv
import io
import json

import pytest

from heatchain.cli import EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK, main, parse_tau_grid
from heatchain.sweep import format_number

CHAIN = {"k": 1.8, "T": 0.27, "dT_over_T": 0.95, "DT_over_T": 0.0, "delta_omega": 0.5}


def write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def cfg_file(tmp_path):
    return write(tmp_path / "cfg.json", {"chain": CHAIN})


@pytest.fixture
def sweep_file(tmp_path):
    doc = {
        "chain": CHAIN,
        "axes": [{"param": "DT_over_T", "values": [-0.5, 1.0]}, {"param": "k", "linspace": [1.0, 1.8, 2]}],
        "observables": "J,E_N(L,R),K_JJ(0)",
    }
    return write(tmp_path / "sweep.json", doc)


def test_steady_json(cfg_file, tmp_path):
    out = tmp_path / "out.json"
    assert main(["steady", "--config", cfg_file, "--observables", "J,j_CL,E_N(L,R)", "--out", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert len(doc["V"]) == 36
    assert set(doc["observables"]) == {"J", "j_CL", "E_N(L,R)"}
    assert doc["physical"]["ok"] and doc["stationarity"]["ok"]
    assert doc["quad_error"] < 1e-6


def test_steady_default_observables(cfg_file, capsys):
    assert main(["steady", "--config", cfg_file]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert list(doc["observables"]) == ["j_CL", "j_RC", "J", "H_int"]


def test_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["steady", "--config", str(bad)]) == EXIT_INVALID
    assert "malformed" in capsys.readouterr().err


def test_missing_file_and_bad_observable(cfg_file, tmp_path):
    assert main(["steady", "--config", str(tmp_path / "nope.json")]) == EXIT_INVALID
    assert main(["steady", "--config", cfg_file, "--observables", "E_N(L,L)"]) == EXIT_INVALID
    assert main(["steady", "--config", cfg_file, "--observables", "entropy"]) == EXIT_INVALID


def test_invalid_parameters(tmp_path):
    f = write(tmp_path / "neg.json", {"chain": dict(CHAIN, T=-1.0)})
    assert main(["steady", "--config", f]) == EXIT_INVALID
    f = write(tmp_path / "extra.json", {"chain": dict(CHAIN, colour="red")})
    assert main(["steady", "--config", f]) == EXIT_INVALID


def test_unstable_configuration_exit_code(tmp_path, capsys):
    f = write(tmp_path / "low.json", {"chain": dict(CHAIN, omega_c=0.1)})
    assert main(["steady", "--config", f]) == EXIT_NUMERICAL
    err = capsys.readouterr().err
    assert "violations" in err and "cutoff" in err


def test_sweep_csv(sweep_file, tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--config", sweep_file, "--out", str(out)]) == EXIT_OK
    raw = out.read_bytes()
    assert raw.count(b"\r\n") == 5
    rows = list(csv.reader(io.StringIO(raw.decode())))
    assert rows[0] == ["DT_over_T", "k", "J", "E_N(L,R)", "K_JJ(tau=0.0000000000000000e+00)", "quad_error", "error"]
    assert [r[:2] for r in rows[1:]] == [
        [format_number(a), format_number(b)] for a in (-0.5, 1.0) for b in (1.0, 1.8)
    ]
    for r in rows[1:]:
        assert r[-1] == ""
        for v in r[:-1]:
            float(v)
            assert "e" in v and len(v.split("e")[0].replace("-", "").replace(".", "")) == 17


def test_sweep_parallel_identical(sweep_file, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--config", sweep_file, "--out", str(a)]) == EXIT_OK
    assert main(["sweep", "--config", sweep_file, "--out", str(b), "--jobs", "2"]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_sweep_rejects_empty_grid(tmp_path):
    doc = {"chain": CHAIN, "axes": [{"param": "k", "values": []}], "observables": "J"}
    assert main(["sweep", "--config", write(tmp_path / "e.json", doc)]) == EXIT_INVALID
    doc = {"chain": CHAIN, "axes": [{"param": "k", "values": [1]}] * 3, "observables": "J"}
    assert main(["sweep", "--config", write(tmp_path / "three.json", doc)]) == EXIT_INVALID


def test_sweep_failing_point_recorded(tmp_path, capsys):
    doc = {"chain": CHAIN, "axes": [{"param": "omega_c", "values": [20.0, 0.1]}], "observables": "J"}
    out = tmp_path / "o.csv"
    assert main(["sweep", "--config", write(tmp_path / "f.json", doc), "--out", str(out)]) == EXIT_OK
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[1][-1] == "" and rows[2][1] == "nan" and "Stationarity" in rows[2][-1]
    assert "failed" in capsys.readouterr().err


def test_jobs_must_be_positive(sweep_file):
    assert main(["sweep", "--config", sweep_file, "--jobs", "0"]) == EXIT_INVALID


def test_correlate(cfg_file, tmp_path, capsys):
    out = tmp_path / "k.csv"
    assert main(["correlate", "--config", cfg_file, "--tau-grid", "0,1,1,0.5", "--out", str(out)]) == EXIT_OK
    assert "duplicate" in capsys.readouterr().err
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0] == ["tau", "K_JJ", "quad_error"]
    assert [float(r[0]) for r in rows[1:]] == [0.0, 0.5, 1.0]
    assert float(rows[1][1]) > 0


def test_tau_grid_parsing():
    assert parse_tau_grid("0:1:3") == ([0.0, 0.5, 1.0], False)
    for bad in ("", "a,b", "0:1", "nan"):
        with pytest.raises(Exception):
            parse_tau_grid(bad)


def test_figure_unknown_and_missing_out(tmp_path):
    assert main(["figure", "fig9", "--out", str(tmp_path)]) == EXIT_INVALID
    assert main(["figure", "fig1"]) == EXIT_INVALID


def test_usage_error_exit_code():
    assert main(["steady"]) == EXIT_INVALID
    assert main(["transmogrify"]) == EXIT_INVALID


def test_rerun_byte_identical(cfg_file, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(["steady", "--config", cfg_file, "--observables", "J,T33", "--seed", "3", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
