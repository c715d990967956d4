import json
import subprocess
import sys

import numpy as np
import pytest

import oracles
from sysinterp.cli import RunConfig, build_parser, load_trace, main, run_demo, zoh_input
from sysinterp.exceptions import SysInterpError
from sysinterp.legendre import build_quadrature
from sysinterp.planner import robot_spec, save_spec
from sysinterp.systems import read_csv, read_discrete_csv, save_system


@pytest.fixture
def files(tmp_path):
    save_system(tmp_path / "ct.json", *oracles.DOUBLE_INTEGRATOR)
    save_system(tmp_path / "dt.json", oracles.REFERENCE_A_D, oracles.REFERENCE_B_D)
    save_system(tmp_path / "hold.json", np.eye(2), np.zeros((2, 1)))
    save_spec(tmp_path / "spec.json", robot_spec())
    return tmp_path


def test_quadrature_csv(files, capsys):
    assert main(["quadrature", "--tau", "1", "--degree", "1", "--out", str(files / "q.csv")]) == 0
    header, data = read_csv(files / "q.csv")
    assert header == ["index", "node", "weight"]
    np.testing.assert_allclose(data[:, 1:], [[0, 0.25], [2 / 3, 0.75]], atol=1e-15)
    assert main(["quadrature", "--tau", "0.2", "--degree", "3"]) == 0
    assert capsys.readouterr().out.startswith("index,node,weight")


def test_check_verdicts(files, capsys):
    args = ["--system", str(files / "ct.json"), "--tau", "0.2"]
    assert main(["check", "--model", str(files / "dt.json"), "--degree", "5", *args]) == 0
    out = capsys.readouterr().out
    report = json.loads(out.splitlines()[1])
    assert report["holds"] and report["rank_rhs"] == report["rank_augmented"]
    assert main(["check", "--model", str(files / "hold.json"), "--degree", "3", *args]) == 1
    assert "is NOT" in capsys.readouterr().out


def test_discretize_writes_model(files, capsys):
    out = files / "found.json"
    assert main(["discretize", "--system", str(files / "ct.json"), "--tau", "0.2", "--degree", "5", "--out", str(out)]) == 0
    assert "free_dims 6" in capsys.readouterr().out
    assert json.loads(out.read_text())["n"] == 2


def test_plan_synthesize_simulate_bounds_pipeline(files):
    plan_csv = files / "plan.csv"
    assert main([
        "plan", "--model", str(files / "dt.json"), "--spec", str(files / "spec.json"),
        "--x0", "0,0", "--horizon", "10", "--out", str(plan_csv),
    ]) == 0
    assert read_discrete_csv(plan_csv).values.shape == (11, 1)

    outdir = files / "syn"
    assert main([
        "synthesize", "--system", str(files / "ct.json"), "--model", str(files / "dt.json"),
        "--tau", "0.2", "--degree", "5", "--x0", "0,0", "--inputs", str(plan_csv), "--outdir", str(outdir),
    ]) == 0
    for name in ("input.csv", "state_pred.csv", "synthesis.json"):
        assert (outdir / name).exists()
    ct, dt, scheme, x0, syn = load_trace(outdir / "synthesis.json")
    np.testing.assert_array_equal(syn.u_d.values, read_discrete_csv(plan_csv).values)
    assert scheme.N == 5 and len(syn.segments) == 10

    assert main(["simulate", "--trace", str(outdir / "synthesis.json"), "--out", str(files / "traj.csv")]) == 0
    header, data = read_csv(files / "traj.csv")
    assert header == ["time", "x_1", "x_2", "u_1"]
    np.testing.assert_allclose(data[::256, 1:3], syn.x_d.values, atol=1e-6 * 20)

    regions = files / "regions.json"
    regions.write_text(json.dumps({"target": {"type": "box", "lower": [-3, -20], "upper": [3, 20]}}))
    assert main(["bounds", "--trace", str(outdir / "synthesis.json"), "--regions", str(regions),
                 "--subsamples", "200", "--out", str(files / "b.csv")]) == 0
    header, data = read_csv(files / "b.csv")
    assert header[0] == "segment" and data.shape == (10, 6)
    assert np.all(data[:, 4] >= data[:, 5] - 1e-9)


def test_plan_reports_infeasible(files, capsys):
    save_system(files / "weak.json", np.eye(2), np.zeros((2, 1)))
    assert main([
        "plan", "--model", str(files / "weak.json"), "--spec", str(files / "spec.json"),
        "--x0", "0,0", "--horizon", "10", "--out", str(files / "p.csv"),
    ]) == 1
    assert "infeasible" in capsys.readouterr().out


def test_missing_file_is_reported(files, capsys):
    assert main(["check", "--system", str(files / "nope.json"), "--model", str(files / "dt.json"),
                 "--tau", "0.2", "--degree", "5"]) == 2
    assert "error" in capsys.readouterr().err


def test_demo_and_zoh(tmp_path):
    assert main(["demo", "--outdir", str(tmp_path / "demo")]) == 0
    summary = json.loads((tmp_path / "demo" / "summary.json").read_text())
    assert all(summary["checks"].values())
    assert summary["segment_null_dims"] == [0] * 10
    for name in ("displacement.csv", "velocity.csv", "input.csv", "bounds.csv"):
        assert (tmp_path / "demo" / name).exists()
    assert main(["zoh-baseline", "--outdir", str(tmp_path / "zoh")]) == 0
    zoh = json.loads((tmp_path / "zoh" / "zoh_summary.json").read_text())
    assert len(zoh["continuous_atoms"]) == 5


def test_demo_with_min_norm_model_reports_stage():
    config = RunConfig("demo", model_source="min-norm")
    with pytest.raises(SysInterpError, match=r"\[plan\]"):
        run_demo(config)


def test_run_config_validation():
    with pytest.raises(SysInterpError):
        RunConfig("demo", tau=0.0)
    with pytest.raises(SysInterpError):
        RunConfig("demo", mode="best")


def test_zoh_input_is_piecewise_constant():
    from sysinterp.systems import DiscreteSignal

    s = build_quadrature(0.5, 3)
    sig = zoh_input(s, DiscreteSignal([[1.0], [2.0], [3.0]]))
    np.testing.assert_allclose(sig(np.array([0.1, 0.4, 0.6]))[:, 0], [1, 1, 2])


def test_parser_requires_subcommand():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "sysinterp.cli", "quadrature", "--tau", "1", "--degree", "2"],
        capture_output=True, text=True, check=True,
    )
    assert len(proc.stdout.strip().splitlines()) == 4
