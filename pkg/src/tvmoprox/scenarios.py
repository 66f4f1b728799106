"""
Scenario files, experiment runs and report emission.

A scenario file is line-oriented ``key = value`` text with ``#`` comments::

    name = drift2
    n = 2
    N = 2
    T = 50
    K = 10
    alphas = 0.3, 0.7
    x1 = 0, 0
    seed = 7
    objective.1.quadratic.A = 2, 0.5, 0.5, 1    # row-major
    objective.1.quadratic.b = -1, 0
    objective.1.drift = linear:0.02
    objective.1.g = l1:0.1

Objectives are numbered from 1. Each objective is a quadratic whose center is
moved along a unit direction (drawn from ``seed``) by the drift schedule:
``none``, ``linear:<rate>``, ``sin:<amp>,<period>`` or ``jump:<t>,<delta>``.
"""

from __future__ import annotations

import csv
import io
import math
import re
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import metrics
from .engine import EngineConfig, Trajectory, run_online
from .errors import ConvergenceFailure, ScenarioParseError, UnsupportedScenario
from .objective_model import (
    Box,
    CompositeObjective,
    L1Norm,
    ObjectiveStream,
    Quadratic,
    Zero,
)
from .oracles import DEFAULT_TOL, OptimumTrace, optimum_trace, solve_scalarized

_TOP_KEYS = {"name", "n", "N", "T", "K", "alphas", "x1", "seed"}
_OBJ_KEY = re.compile(r"^objective\.(\d+)\.(quadratic\.A|quadratic\.b|quadratic\.c|drift|g|step)$")


@dataclass
class ObjectiveSpec:
    A: np.ndarray
    b: np.ndarray
    c: float = 0.0
    drift: tuple = ("none",)
    g: tuple = ("zero",)
    step: float | None = None


@dataclass
class ScenarioSpec:
    name: str
    n: int
    N: int
    T: int
    K: int
    alphas: np.ndarray
    x1: np.ndarray
    objectives: list
    seed: int = 0
    directions: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        rng = np.random.default_rng(self.seed)
        d = rng.standard_normal((self.N, self.n))
        self.directions = d / np.linalg.norm(d, axis=1, keepdims=True)

    def shift(self, i: int, t: int) -> np.ndarray:
        """Center displacement of objective ``i`` (0-based) at time ``t``."""
        kind, *p = self.objectives[i].drift
        if kind == "none":
            s = 0.0
        elif kind == "linear":
            s = p[0] * (t - 1)
        elif kind == "sin":
            s = p[0] * math.sin(2 * math.pi * (t - 1) / p[1])
        else:  # jump
            s = p[1] if t >= p[0] else 0.0
        return s * self.directions[i]

    def _nonsmooth(self, i):
        kind, *p = self.objectives[i].g
        if kind == "zero":
            return Zero()
        if kind == "l1":
            return L1Norm(p[0])
        return Box(p[0], p[1])

    def build_stream(self) -> ObjectiveStream:
        base = [Quadratic(o.A, o.b, o.c) for o in self.objectives]
        gs = [self._nonsmooth(i) for i in range(self.N)]

        def at(t):
            return [CompositeObjective(base[i].shifted(self.shift(i, t)), gs[i]) for i in range(self.N)]

        return ObjectiveStream(self.n, self.N, at, T=self.T)

    def steps(self) -> np.ndarray:
        """Declared steps, defaulting to ``1/L_i`` (the drift never changes ``A``)."""
        out = []
        for o in self.objectives:
            if o.step is not None:
                out.append(o.step)
            else:
                L = float(np.linalg.eigvalsh(o.A)[-1])
                out.append(1.0 / L if L > 0 else 1.0)
        return np.array(out)

    def config(self) -> EngineConfig:
        return EngineConfig(self.alphas, self.steps(), self.K, self.T)


def _floats(value, line, key):
    try:
        return [float(v) for v in value.split(",")]
    except ValueError:
        raise ScenarioParseError(f"expected a comma list of numbers, got {value!r}", line, key) from None


def _int(value, line, key, minimum=1):
    try:
        v = int(value)
    except ValueError:
        raise ScenarioParseError(f"expected an integer, got {value!r}", line, key) from None
    if v < minimum:
        raise ScenarioParseError(f"must be >= {minimum}, got {v}", line, key)
    return v


def _parse_drift(value, line, key):
    value = value.strip()
    if value == "none":
        return ("none",)
    kind, _, rest = value.partition(":")
    params = _floats(rest, line, key) if rest else []
    arity = {"linear": 1, "sin": 2, "jump": 2}
    if kind not in arity or len(params) != arity[kind]:
        raise ScenarioParseError(f"bad drift {value!r}; use none|linear:<rate>|sin:<amp>,<period>|jump:<t>,<delta>",
                                 line, key)
    if kind == "sin" and params[1] == 0:
        raise ScenarioParseError("sinusoidal drift needs a nonzero period", line, key)
    return (kind, *params)


def _parse_g(value, line, key):
    value = value.strip()
    if value == "zero":
        return ("zero",)
    kind, _, rest = value.partition(":")
    params = _floats(rest, line, key) if rest else []
    if kind == "l1" and len(params) == 1 and params[0] >= 0:
        return ("l1", params[0])
    if kind == "box" and len(params) == 2 and params[0] <= params[1]:
        return ("box", params[0], params[1])
    raise ScenarioParseError(f"bad nonsmooth term {value!r}; use zero | l1:<lambda> | box:<lo>,<hi>", line, key)


def parse_scenario(text: str, overrides=()) -> ScenarioSpec:
    """
    Parse and validate a scenario document.

    ``overrides`` are extra ``key=value`` strings applied after the document.
    Defaults: ``alphas`` uniform, steps ``1/L``, drift ``none``, g ``zero``,
    ``b`` zero, ``x1`` the origin, ``seed`` 0.
    """
    entries = {}
    lines = [(no, raw) for no, raw in enumerate(text.splitlines(), start=1)]
    lines += [(f"override {j}", o) for j, o in enumerate(overrides, start=1)]
    for no, raw in lines:
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ScenarioParseError(f"expected 'key = value', got {body!r}", no)
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in _TOP_KEYS and not _OBJ_KEY.match(key):
            raise ScenarioParseError("unknown key", no, key)
        entries[key] = (value, no)

    def get(key, default=None):
        return entries.get(key, (default, None))

    for key in ("name", "n", "N", "T", "K"):
        if key not in entries:
            raise ScenarioParseError("missing required key", None, key)
    name = entries["name"][0]
    n = _int(*entries["n"], "n")
    N = _int(*entries["N"], "N")
    T = _int(*entries["T"], "T")
    K = _int(*entries["K"], "K", minimum=0)
    seed = _int(*get("seed", "0"), "seed", minimum=0)

    value, no = get("alphas")
    alphas = np.full(N, 1.0 / N) if value is None else np.array(_floats(value, no, "alphas"))
    if alphas.size != N:
        raise ScenarioParseError(f"{alphas.size} weights for N={N} objectives", no, "alphas")
    if np.any(alphas < 0) or np.any(alphas > 1):
        raise ScenarioParseError("weights must lie in [0, 1]", no, "alphas")
    if abs(alphas.sum() - 1.0) > 1e-12:
        raise ScenarioParseError(f"weights must sum to 1 (sum is {alphas.sum()!r})", no, "alphas")

    value, no = get("x1")
    x1 = np.zeros(n) if value is None else np.array(_floats(value, no, "x1"))
    if x1.size != n:
        raise ScenarioParseError(f"x1 has {x1.size} entries, n={n}", no, "x1")

    indices = {int(_OBJ_KEY.match(k).group(1)) for k in entries if k.startswith("objective.")}
    extra = sorted(j for j in indices if not 1 <= j <= N)
    if extra:
        k = next(k for k in entries if k.startswith(f"objective.{extra[0]}."))
        raise ScenarioParseError(f"objective index {extra[0]} outside 1..{N}", entries[k][1], k)

    objectives = []
    for j in range(1, N + 1):
        pre = f"objective.{j}."
        value, no = get(pre + "quadratic.A")
        if value is None:
            raise ScenarioParseError("missing quadratic matrix", None, pre + "quadratic.A")
        A = _floats(value, no, pre + "quadratic.A")
        if len(A) != n * n:
            raise ScenarioParseError(f"{len(A)} entries, expected n*n={n * n}", no, pre + "quadratic.A")
        A = np.array(A).reshape(n, n)
        value, no_b = get(pre + "quadratic.b")
        b = np.zeros(n) if value is None else np.array(_floats(value, no_b, pre + "quadratic.b"))
        if b.size != n:
            raise ScenarioParseError(f"{b.size} entries, expected n={n}", no_b, pre + "quadratic.b")
        value, no_c = get(pre + "quadratic.c")
        c = 0.0 if value is None else _floats(value, no_c, pre + "quadratic.c")[0]
        try:
            Quadratic(A, b, c)
        except Exception as exc:
            raise ScenarioParseError(str(exc), no, pre + "quadratic.A") from None
        value, no_d = get(pre + "drift", "none")
        drift = _parse_drift(value, no_d, pre + "drift")
        value, no_g = get(pre + "g", "zero")
        g = _parse_g(value, no_g, pre + "g")
        value, no_s = get(pre + "step")
        step = None
        if value is not None:
            step = _floats(value, no_s, pre + "step")[0]
            L = float(np.linalg.eigvalsh(A)[-1])
            if step <= 0 or (L > 0 and step * L > 1 + 1e-12):
                raise ScenarioParseError(f"step {step} outside (0, 1/L] with L={L}", no_s, pre + "step")
        objectives.append(ObjectiveSpec(A, b, c, drift, g, step))
    return ScenarioSpec(name, n, N, T, K, alphas, x1, objectives, seed)


def bundled_scenarios() -> list:
    return sorted(p.name for p in resources.files("tvmoprox.data").iterdir() if p.name.endswith(".scn"))


def read_scenario_text(path_or_name) -> str:
    """Read a scenario file, falling back to the bundled copies by name."""
    p = Path(path_or_name)
    if p.exists():
        return p.read_text()
    name = p.name if p.name.endswith(".scn") else p.name + ".scn"
    res = resources.files("tvmoprox.data") / name
    if res.is_file():
        return res.read_text()
    raise FileNotFoundError(f"no scenario file {path_or_name!s} (bundled: {', '.join(bundled_scenarios())})")


def load_scenario(path_or_name, overrides=()) -> ScenarioSpec:
    return parse_scenario(read_scenario_text(path_or_name), overrides)


@dataclass
class ExperimentResult:
    spec: ScenarioSpec
    stream: ObjectiveStream
    trajectory: Trajectory
    trace: OptimumTrace
    report: metrics.RegretReport


def run_experiment(spec: ScenarioSpec, tol: float = DEFAULT_TOL, record_inner: bool = False,
                   static: bool = True) -> ExperimentResult:
    """
    Run the engine on a scenario, solve the oracles and evaluate every bound.

    Deterministic in ``(spec, seed)``.
    """
    stream = spec.build_stream()
    config = spec.config()
    streamed = {"v": 0.0}

    def observer(t, x_t, x_next, rec):
        streamed["v"] += float(np.linalg.norm(x_next - x_t))

    trajectory = run_online(stream, spec.x1, config, observer=observer, record_inner=record_inner)
    try:
        trace = optimum_trace(stream, tol)
    except ConvergenceFailure as exc:
        raise ConvergenceFailure(f"scenario {spec.name}: {exc}", exc.x, exc.residual) from None
    report = metrics.evaluate(trajectory, trace, stream, static=static, tol=tol)
    report.extras["opt_values"] = trace.values
    report.extras["v_streamed"] = streamed["v"]
    try:
        report.extras["scalarized_T"] = solve_scalarized(stream.at(spec.T), spec.alphas, tol)
    except UnsupportedScenario:
        report.extras["scalarized_T"] = None
    return ExperimentResult(spec, stream, trajectory, trace, report)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

TRACE_COLUMNS = ("t", "i", "phi_t_xt", "phi_t_opt", "gap", "reg_cum", "v_t", "w_t", "sigma_t",
                 "sigma_surrogate")


def _fmt(x) -> str:
    return repr(float(x))


def trace_csv(report: metrics.RegretReport) -> str:
    gaps = report.gaps
    opt = report.extras["opt_values"]
    reg = np.cumsum(gaps, axis=0)
    p = report.paths
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    T, N = gaps.shape
    for t in range(T):
        for i in range(N):
            w.writerow([t + 1, i + 1, _fmt(opt[t, i] + gaps[t, i]), _fmt(opt[t, i]), _fmt(gaps[t, i]),
                        _fmt(reg[t, i]), _fmt(p.v[t]), _fmt(p.w[t]), _fmt(p.sigma[t]),
                        int(p.surrogate[t].any())])
    return buf.getvalue()


def summary_text(report: metrics.RegretReport) -> str:
    lines = []
    for name in metrics.BOUND_NAMES:
        if name in report.verdicts:
            v = metrics.worst(report.verdicts[name])
            tag = " basis=surrogate" if v.surrogate else ""
            lines.append(f"{name} lhs={_fmt(v.lhs)} rhs={_fmt(v.rhs)} "
                         f"satisfied={'true' if v.satisfied else 'false'} slack={_fmt(v.slack)}{tag}")
        else:
            lines.append(f"{name} not-applicable reason={report.not_applicable.get(name, 'unknown')}")
    lines.append(f"e={_fmt(report.e)}")
    lines.append(f"alpha_min={_fmt(report.alpha_min)}")
    lines.append(f"L={_fmt(report.L)}")
    for i, r in enumerate(report.dynamic, start=1):
        lines.append(f"dynamic_regret.{i}={_fmt(r)}")
    if report.static is not None:
        for i, r in enumerate(report.static, start=1):
            lines.append(f"static_regret.{i}={_fmt(r)}")
    lines.append(f"sigma_surrogate={'true' if report.sigma_surrogate else 'false'}")
    lines.append(f"inner_chain_violations={len(report.chain_violations)}")
    return "\n".join(lines) + "\n"


def emit_report(report: metrics.RegretReport, trajectory: Trajectory, destination) -> tuple:
    """Write ``trace.csv`` and ``summary.txt`` into ``destination``; returns both paths."""
    out = Path(destination)
    out.mkdir(parents=True, exist_ok=True)
    trace_path, summary_path = out / "trace.csv", out / "summary.txt"
    if report.gaps.shape[0] != trajectory.T:
        raise ValueError("report and trajectory horizons differ")
    trace_path.write_text(trace_csv(report))
    summary_path.write_text(summary_text(report))
    return trace_path, summary_path


# ---------------------------------------------------------------------------
# randomized prox-gradient inequality suite
# ---------------------------------------------------------------------------

def random_composite(rng: np.random.Generator, max_dim: int = 5, max_cond: float = 1e4):
    """Random builtin composite: quadratic with bounded condition number plus zero / l1 / box."""
    n = int(rng.integers(1, max_dim + 1))
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    L = 10 ** rng.uniform(-1, 1)
    cond = 10 ** rng.uniform(0, np.log10(max_cond))
    eigs = L * np.geomspace(1.0 / cond, 1.0, n) if n > 1 else np.array([L])
    A = (Q * eigs) @ Q.T
    A = 0.5 * (A + A.T)
    b = rng.uniform(-5, 5, n)
    kind = rng.choice(["zero", "l1", "box"])
    if kind == "zero":
        g = Zero()
    elif kind == "l1":
        g = L1Norm(rng.uniform(0.01, 2.0))
    else:
        lo = rng.uniform(-5, 0, n)
        g = Box(lo, lo + rng.uniform(0.5, 6, n))
    return CompositeObjective(Quadratic(A, b), g)


@dataclass
class Lemma1SuiteResult:
    samples: int
    satisfied: int
    descent_ok: int
    elapsed: float
    failures: list


def lemma1_suite(samples: int = 1000, seed: int = 0) -> Lemma1SuiteResult:
    """Prox-gradient inequality and descent on random composites, x and y in [-10, 10]^n."""
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    ok = desc = 0
    failures = []
    for s in range(samples):
        obj = random_composite(rng)
        n = obj.smooth.n
        c = (1.0 - rng.uniform()) / obj.lipschitz  # (0, 1/L]
        x = rng.uniform(-10, 10, n)
        y = rng.uniform(-10, 10, n)
        if isinstance(obj.nonsmooth, Box):
            y = np.clip(y, obj.nonsmooth.lo, obj.nonsmooth.hi)
        v = metrics.check_lemma1(obj, x, y, c)
        d = metrics.check_descent(obj, x, c)
        ok += v.satisfied
        desc += d.satisfied
        if not (v.satisfied and d.satisfied):
            failures.append((s, v, d))
    return Lemma1SuiteResult(samples, ok, desc, time.perf_counter() - start, failures)
