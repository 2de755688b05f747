import csv
import json
import subprocess
import sys

import pytest

from taylor_learning import reference_config
from taylor_learning.cli import main


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def cfg_file(tmp_path):
    def make(name, **kw):
        c = reference_config(name)
        c.update(kw)
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(c))
        return str(p)

    return make


def test_weights(capsys):
    code, out, _ = run(["weights", "--nodes", "-1", "0", "1", "--order", "2", "--point", "0"],
                       capsys)
    assert code == 0
    d = json.loads(out)
    assert d["weights"] == pytest.approx([1, -2, 1])
    assert d["condition_estimate"] >= 1 and "config_hash" in d


def test_weights_exact_and_comma(capsys):
    code, out, _ = run(["weights", "--nodes=-1,0,0.5", "--order", "1", "--exact"], capsys)
    assert code == 0
    assert json.loads(out)["weights_exact"] == ["-1/3", "-1", "4/3"]


def test_weights_errors(capsys):
    assert run(["weights", "--nodes", "0", "0", "--order", "1"], capsys)[0] == 2
    assert run(["weights", "--nodes", "0", "1", "--order", "3"], capsys)[0] == 2
    assert run(["weights", "--order", "1"], capsys)[0] == 2


def test_sample_fit_risk_roundtrip(tmp_path, cfg_file, capsys):
    cfg = cfg_file("sin_gaussian")
    data = tmp_path / "d.csv"
    model = tmp_path / "m.json"
    assert run(["sample", "--config", cfg, "--count", "3000", "--out", str(data)], capsys)[0] == 0
    with open(data, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "y"] and len(rows) == 3001
    assert run(["fit", "--config", cfg, "--data", str(data), "--out", str(model)], capsys)[0] == 0
    m = json.loads(model.read_text())
    assert len(m["coefficients"]) == 10 and m["config_hash"] and m["seed"] == 20240601
    code, out, _ = run(["risk", "--model", str(model), "--fn", "sin", "--dist",
                        '{"dist": "gaussian", "sigma": 1.0}', "--T", "3.14159",
                        "--test-size", "20000"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["decomposition_holds"] and rep["empirical_risk"] < 0.05


def test_sample_json_envelope(tmp_path, cfg_file, capsys):
    out = tmp_path / "d.json"
    assert run(["sample", "--config", cfg_file("exp_uniform"), "--count", "10", "--out",
                str(out)], capsys)[0] == 0
    env = json.loads(out.read_text())
    assert env["seed"] == 20240602 and env["dist"]["dist"] == "uniform" and len(env["x"]) == 10


def test_trial_seed_override(cfg_file, capsys):
    cfg = cfg_file("sin_gaussian", M=500)
    a = json.loads(run(["trial", "--config", cfg, "--index", "0"], capsys)[1])
    b = json.loads(run(["trial", "--config", cfg, "--index", "0", "--seed", "5"], capsys)[1])
    assert a["seed"] == 20240601 and b["seed"] == 5
    assert a["record"]["risk"] != b["record"]["risk"]


def test_trial_all(tmp_path, cfg_file, capsys):
    out = tmp_path / "t.json"
    cfg = cfg_file("exp_uniform", trials=5, test_size=1000)
    assert run(["trial", "--config", cfg, "--out", str(out)], capsys)[0] == 0
    d = json.loads(out.read_text())
    assert d["trials"] == 5 and len(d["records"]) == 5 and d["config_hash"]


def test_complexity_exit_codes(cfg_file, capsys):
    code, out, _ = run(["complexity", "--config", cfg_file("poly_mixture", trials=20)], capsys)
    assert code == 0 and json.loads(out)["converged"]
    code, out, err = run(["complexity", "--config",
                          cfg_file("runge_counterexample", trials=10, test_size=2000),
                          "--M-max", "400"], capsys)
    assert code == 4 and not json.loads(out)["converged"]


def test_sweep_csv_and_plot_script(tmp_path, cfg_file, capsys):
    out = tmp_path / "s.csv"
    cfg = cfg_file("poly_mixture", trials=10, test_size=1000)
    assert run(["sweep", "--config", cfg, "--values", "8,16", "--out", str(out),
                "--emit-plot-script"], capsys)[0] == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["value"] for r in rows] == ["8", "16"]
    assert set(rows[0]) == {"value", "median_risk", "q25_risk", "q75_risk",
                            "success_frequency", "config_hash", "seed"}
    script = tmp_path / "s.plot.py"
    compile(script.read_text(), str(script), "exec")


def test_capability_and_config_exit_codes(tmp_path, capsys):
    model = tmp_path / "m.json"
    model.write_text(json.dumps({"expansion_point": 0.0, "coefficients": [0.0, 1.0]}))
    assert run(["risk", "--model", str(model), "--fn", "sin", "--dist", "cauchy", "--T", "1"],
               capsys)[0] == 3
    assert run(["risk", "--model", str(model), "--fn", "nope", "--dist", "gaussian", "--T", "1"],
               capsys)[0] == 2
    assert run(["fit", "--data", str(tmp_path / "missing.csv")], capsys)[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["trial", "--config", str(bad)], capsys)[0] == 2


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "taylor_learning.cli", "weights", "--nodes",
                          "0", "1", "--order", "1"], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["weights"] == pytest.approx([-1, 1])
