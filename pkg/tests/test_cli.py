import csv
import json
import os

import pytest

from wcdshock.cli import main


def manifest(tmp_path, **over):
    raw = {
        "model": {"name": "cubic", "params": {"delta": 1.0}},
        "grid": {"x_min": 0.0, "x_max": 1.0, "n_cells": 120},
        "initial": {"type": "riemann", "left": 2.0, "right": -2.0, "jump_location": 0.3},
        "scheme": {"t_end": 0.004, "snapshot_times": [0.002]},
        "wcd": {"tau": 0.1, "p": 4},
        "output": {"dir": str(tmp_path / "out")},
    }
    raw.update(over)
    path = tmp_path / "m.json"
    path.write_text(json.dumps(raw))
    return str(path)


def rows(path):
    with open(path) as f:
        return list(csv.reader(f))


def test_run_writes_outputs(tmp_path, capsys):
    assert main(["run", manifest(tmp_path)]) == 0
    out = tmp_path / "out"
    final = rows(out / "final.csv")
    assert final[0] == ["x", "u"] and len(final) == 121
    assert len(rows(out / "snapshot_000.csv")) == 121
    diag = rows(out / "diagnostics.csv")
    assert diag[0] == ["step", "t", "dt", "c"] and float(diag[-1][1]) == 0.004
    meta = json.loads((out / "run.json").read_text())
    assert meta["n_steps"] == len(diag) - 1
    assert meta["series_bounds"]["p"] == 4


def test_run_is_deterministic(tmp_path):
    m = manifest(tmp_path)
    main(["run", m, "--out", str(tmp_path / "a")])
    main(["run", m, "--out", str(tmp_path / "b")])
    assert (tmp_path / "a/final.csv").read_bytes() == (tmp_path / "b/final.csv").read_bytes()


def test_run_system_columns(tmp_path):
    m = manifest(tmp_path, model={"name": "hall-mhd", "params": {"alpha": 1.0}},
                 initial={"type": "riemann", "left": [0.5, 0.8], "right": [-0.3, -0.5],
                          "jump_location": 0.3},
                 wcd={"tau": 0.1, "p": 2})
    assert main(["run", m]) == 0
    assert len(rows(tmp_path / "out/final.csv")[0]) == 3


def test_config_errors(tmp_path, capsys):
    assert main(["run", manifest(tmp_path, model={"name": "burgers"})]) == 2
    assert "model.name" in capsys.readouterr().err
    assert main(["run", manifest(tmp_path), "--tau", "0.01", "--order", "2"]) == 2
    assert "S_C/tau" in capsys.readouterr().err
    assert main(["run", manifest(tmp_path, grid={"x_min": 0, "x_max": 1, "n_cells": 0})]) == 2
    assert "grid.n_cells" in capsys.readouterr().err


def test_sweep_empty_range(tmp_path, capsys):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"kind": "cubic", "u_l": [], "output": {"dir": str(tmp_path)}}))
    assert main(["sweep", str(path)]) == 2
    assert "u_l" in capsys.readouterr().err


def test_sweep_cubic(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"kind": "cubic", "u_l": [3.0], "u_r": -2.0, "delta": [1.0],
                                "grid": {"n_cells": 300}, "wcd": {"tau": 0.1, "p": 4}}))
    assert main(["sweep", str(path), "--out", str(tmp_path / "sw")]) == 0
    table = rows(tmp_path / "sw/kinetic_1.csv")
    assert table[0][:2] == ["u_L", "u_M"]
    assert -3.0 < float(table[1][1]) < -1.5


def test_compare(tmp_path, capsys):
    main(["run", manifest(tmp_path)])
    final = str(tmp_path / "out/final.csv")
    capsys.readouterr()
    assert main(["compare", final, final]) == 0
    lines = capsys.readouterr().out.split()
    assert lines == ["L1,0", "L2,0", "Linf,0"]


def test_stencil_dump(capsys):
    assert main(["stencil", "dump", "--p", "2"]) == 0
    out = capsys.readouterr().out
    assert "alpha" in out
    assert main(["stencil", "dump", "--p", "0"]) == 2


def test_oracles(tmp_path, capsys):
    assert main(["oracle", "kinetic", "--delta", "1", "--uL", "4"]) == 0
    out = dict(line.split(",") for line in capsys.readouterr().out.split())
    assert float(out["u_plus"]) == pytest.approx(-4 + 2**0.5 / 3, rel=1e-9)
    assert main(["oracle", "kinetic", "--uL", "0.5"]) == 3

    assert main(["oracle", "classical", "--uL", "4", "--uR", "2"]) == 0
    assert capsys.readouterr().out.startswith("shock,4,2,28")
    main(["run", manifest(tmp_path)])
    dest = tmp_path / "cls.csv"
    assert main(["oracle", "classical", "--uL", "2", "--uR", "-2", "--t", "0.004",
                 "--x0", "0.3", "--like", str(tmp_path / "out/final.csv"),
                 "--out", str(dest)]) == 0
    assert len(rows(dest)) == 121


CONFIGS = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


@pytest.mark.parametrize("name", sorted(f for f in os.listdir(CONFIGS) if f.endswith(".json")))
def test_shipped_configs_parse(name):
    from wcdshock.io import load_json, parse_manifest
    raw = load_json(os.path.join(CONFIGS, name))
    if "kind" in raw:
        assert raw["kind"] in ("cubic", "hall-mhd")
    else:
        parse_manifest(raw)
