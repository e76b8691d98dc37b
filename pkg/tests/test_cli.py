import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from lookahead.cli import ExperimentConfig, main

INSTANCES = Path(__file__).parent.parent / "paper-instances"


def invoke(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_cournot_curve(capsys):
    code, out, err = invoke(capsys, "cournot", "--k-max", "40")
    assert code == 0
    table = rows(out)
    assert len(table) == 40
    k2 = next(r for r in table if r["k"] == "2")
    assert float(k2["output_gain_pct"]) == pytest.approx(12.5, abs=0.05)


def test_gsp_check_bad_example(capsys):
    code, out, err = invoke(capsys, "gsp", "--instance", str(INSTANCES / "gsp-badexample.json"),
                            "--order", "average", "--depth", "2", "--check")
    assert code == 0
    assert "equilibrium=true" in err and "output_truthful=false" in err


def test_gsp_enumeration_and_sweep(capsys):
    code, out, _ = invoke(capsys, "gsp", "--instance", str(INSTANCES / "gsp-badexample.json"),
                          "--order", "worst")
    assert code == 0
    table = rows(out)
    assert table and all(r["output_truthful"] == "True" for r in table)
    code, out, _ = invoke(capsys, "gsp", "--random", "5", "--max-bidders", "3", "--order", "worst")
    assert code == 0 and rows(out)


def test_utility_basic(capsys):
    code, out, err = invoke(capsys, "utility", "--construction", "basic", "--kappa", "120",
                            "--depth", "2")
    assert code == 0
    assert "equilibria=B,B" in err and "ratio=10.0" in err
    code, out, _ = invoke(capsys, "utility", "--instance", str(INSTANCES / "utility-basic.json"),
                          "--format", "json")
    data = json.loads(out)
    assert data["ratio"] == 10 and data["equilibria"] == [["B", "B"]]


def test_utility_steiner(capsys):
    code, out, err = invoke(capsys, "utility", "--instance", str(INSTANCES / "utility-steiner.json"))
    assert code == 0
    table = rows(out)
    assert float(table[-1]["social_value"]) == 14 and float(table[-1]["optimum"]) == 28


@pytest.mark.parametrize("mode", ["lemmas", "walk", "equilibria"])
def test_routing_modes(capsys, mode):
    for name in ("routing-example.json", "routing-shared-edge.json"):
        code, out, _ = invoke(capsys, "routing", "--instance", str(INSTANCES / name),
                              "--mode", mode, "--trials", "10")
        assert code == 0 and out


def test_shapley(capsys):
    code, out, _ = invoke(capsys, "shapley", "--instance", str(INSTANCES / "shapley-parallel-1-6.json"))
    assert code == 0
    table = rows(out)
    assert float(table[-1]["ratio"]) == 1
    for name in ("shapley-parallel-3-links.json", "shapley-graph.json"):
        code, out, _ = invoke(capsys, "shapley", "--instance", str(INSTANCES / name), "--steps", "30")
        assert code == 0 and rows(out)


def test_engine_selftest(capsys):
    code, out, err = invoke(capsys, "engine-selftest", "--trials", "50")
    assert code == 0 and "PASS" in out + err


def test_every_instance_file_loads(capsys):
    games = {"gsp": "gsp", "routing": "routing", "utility": "utility", "shapley": "shapley"}
    files = sorted(INSTANCES.glob("*.json"))
    assert len(files) >= 8
    for f in files:
        game = games[f.name.split("-")[0]]
        extra = ["--trials", "3"] if game == "routing" else []
        code, _, err = invoke(capsys, game, "--instance", str(f), "--steps", "20", *extra)
        assert code == 0, (f.name, err)


def test_output_is_reproducible_with_lf_endings(capsys, tmp_path):
    outs = []
    for _ in range(2):
        path = tmp_path / f"walk{len(outs)}.csv"
        code, _, _ = invoke(capsys, "routing", "--mode", "walk", "--seed", "7", "--out", str(path))
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert b"\r" not in outs[0] and outs[0].endswith(b"\n")


def test_errors_exit_two(capsys, tmp_path):
    code, _, err = invoke(capsys, "gsp", "--instance", str(tmp_path / "missing.json"))
    assert code == 2 and err.startswith("error:")
    bad = tmp_path / "bad.json"
    bad.write_text('{"ctr": [1, 2], "valuations": [3]}')
    code, _, err = invoke(capsys, "gsp", "--instance", str(bad))
    assert code == 2
    with pytest.raises(SystemExit):
        main(["nonsense"])


def test_state_cap_env(capsys, monkeypatch):
    monkeypatch.setenv("LOOKAHEAD_STATE_CAP", "3")
    code, _, err = invoke(capsys, "gsp")
    assert code == 2 and "error" in err


def test_config_serialises():
    cfg = ExperimentConfig("cournot", None, 2, "worst", "leaf", 10, 3, None, "csv", {"k_max": 4})
    data = json.loads(cfg.to_json())
    assert data["game"] == "cournot" and data["extra"] == {"k_max": 4}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lookahead.cli", "cournot", "--k-max", "3"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.splitlines()[0].startswith("k,")
