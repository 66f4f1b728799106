import csv

import numpy as np
import pytest

from tvmoprox import ScenarioParseError, load_scenario, parse_scenario, run_experiment
from tvmoprox import metrics
from tvmoprox.cli import main
from tvmoprox.scenarios import TRACE_COLUMNS, bundled_scenarios, emit_report, lemma1_suite

MINIMAL = """\
name = tiny
n = 1
N = 2
T = 1
K = 2
objective.1.quadratic.A = 1
objective.2.quadratic.A = 2
objective.2.quadratic.b = -1   # trailing comment
"""


def test_parse_minimal_defaults():
    spec = parse_scenario(MINIMAL)
    assert spec.name == "tiny" and (spec.n, spec.N, spec.T, spec.K) == (1, 2, 1, 2)
    np.testing.assert_array_equal(spec.alphas, [0.5, 0.5])
    np.testing.assert_array_equal(spec.x1, [0.0])
    np.testing.assert_allclose(spec.steps(), [1.0, 0.5])
    assert spec.objectives[0].g == ("zero",) and spec.objectives[0].drift == ("none",)


@pytest.mark.parametrize("line, key, message", [
    ("alphas = 0.5, 0.4", "alphas", "weights must sum to 1"),
    ("bogus = 3", "bogus", "unknown key"),
    ("objective.1.quadratic.b = 1, 2", "objective.1.quadratic.b", "expected n=1"),
    ("objective.3.quadratic.A = 1", "objective.3.quadratic.A", "outside"),
    ("objective.1.step = 2", "objective.1.step", "outside"),
    ("objective.1.g = huber:1", "objective.1.g", "huber"),
    ("objective.1.drift = spiral:1", "objective.1.drift", "spiral"),
])
def test_parse_errors_name_line_and_key(line, key, message):
    text = MINIMAL + line + "\n"
    with pytest.raises(ScenarioParseError, match=message) as info:
        parse_scenario(text)
    assert info.value.key == key
    assert info.value.line == len(text.splitlines())


def test_parse_rejects_indefinite_and_missing():
    with pytest.raises(ScenarioParseError):
        parse_scenario(MINIMAL.replace("quadratic.A = 2", "quadratic.A = -2"))
    with pytest.raises(ScenarioParseError) as info:
        parse_scenario(MINIMAL.replace("K = 2\n", ""))
    assert info.value.key == "K"


def test_illscaled_coefficients():
    spec = load_scenario("illscaled")
    objs = spec.build_stream().at(1)
    assert objs[0].lipschitz == 2000.0 and objs[1].lipschitz == pytest.approx(0.002)
    # 1000 x^2 and 0.001 (x - 2)^2
    assert objs[0].value([1.0]) == pytest.approx(1000.0)
    assert objs[1].value([0.0]) == pytest.approx(0.004)
    assert objs[1].value([2.0]) == pytest.approx(0.0, abs=1e-15)


def test_overrides_and_bundled():
    spec = load_scenario("single_drift", ["K=20", "T = 4"])
    assert spec.K == 20 and spec.T == 4
    assert set(bundled_scenarios()) >= {"drift2.scn", "illscaled.scn", "single_drift.scn",
                                        "stationary1.scn", "stationary2.scn"}
    with pytest.raises(FileNotFoundError):
        load_scenario("no-such-scenario")


def test_drift_shapes():
    spec = parse_scenario(MINIMAL + "objective.1.drift = jump:3,0.7\nobjective.2.drift = sin:1,4\n")
    u = spec.directions
    assert np.allclose(np.linalg.norm(u, axis=1), 1.0)
    np.testing.assert_allclose(spec.shift(0, 2), 0.0)
    np.testing.assert_allclose(spec.shift(0, 3), 0.7 * u[0])
    np.testing.assert_allclose(spec.shift(1, 2), u[1])
    np.testing.assert_allclose(spec.shift(1, 3), 0.0, atol=1e-15)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_emit_report_T1(tmp_path):
    res = run_experiment(parse_scenario(MINIMAL))
    trace_path, summary_path = emit_report(res.report, res.trajectory, tmp_path)
    rows = read_rows(trace_path)
    assert tuple(rows[0]) == TRACE_COLUMNS and len(rows) == 1 + 2
    assert [r[:2] for r in rows[1:]] == [["1", "1"], ["1", "2"]]


def test_emit_report_default_and_summary(tmp_path):
    res = run_experiment(load_scenario("drift2"))
    trace_path, summary_path = emit_report(res.report, res.trajectory, tmp_path)
    rows = read_rows(trace_path)
    assert len(rows) == 1 + 50 * 2
    for r in rows[1:]:
        assert float(r[2]) - float(r[3]) == pytest.approx(float(r[4]), abs=1e-12)
    lines = summary_path.read_text().splitlines()
    for name in metrics.BOUND_NAMES:
        assert sum(ln.split(" ")[0] == name for ln in lines) == 1
    for prefix in ("e=", "alpha_min=", "L=", "dynamic_regret.1=", "static_regret.2="):
        assert sum(ln.startswith(prefix) for ln in lines) == 1
    assert "Lemma1 lhs=" in summary_path.read_text()


def test_summary_not_applicable_for_one_hot(tmp_path):
    res = run_experiment(load_scenario("single_drift"))
    _, summary_path = emit_report(res.report, res.trajectory, tmp_path)
    text = summary_path.read_text()
    assert "Thm1-stated not-applicable reason=" in text
    assert "Cor1 lhs=" in text


def test_rerun_is_byte_identical(tmp_path):
    outs = []
    for j in range(2):
        res = run_experiment(load_scenario("drift2"))
        outs.append([p.read_bytes() for p in emit_report(res.report, res.trajectory, tmp_path / str(j))])
    assert outs[0] == outs[1]


def test_cli_run(tmp_path, capsys):
    assert main(["run", "stationary1", "--out", str(tmp_path), "--override", "T=2"]) == 0
    assert len(read_rows(tmp_path / "trace.csv")) == 1 + 2
    assert "Cor1" in capsys.readouterr().out


def test_cli_check_lemma1(capsys):
    assert main(["check-lemma1", "--samples", "50", "--seed", "3"]) == 0
    assert "satisfied=50/50" in capsys.readouterr().out


def test_cli_pareto(capsys):
    assert main(["pareto", "illscaled", "--grid", "101", "--box=-1,3"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[1] == "x1,phi1,phi2"
    xs = [float(ln.split(",")[0]) for ln in out[2:]]
    assert min(xs) == pytest.approx(0.0, abs=1e-12) and max(xs) == pytest.approx(2.0, abs=1e-12)


def test_lemma1_suite_small():
    res = lemma1_suite(200, seed=11)
    assert res.satisfied == res.descent_ok == 200 and not res.failures
