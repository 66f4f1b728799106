"""
Regret, path lengths and numerical checks of the tradeoff bounds.

Each ``check_*`` function evaluates both sides of an inequality on a completed
run and returns Verdict records; none of them assume the inequality holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import Trajectory
from .errors import ContractViolation
from .objective_model import INF, CompositeObjective, ObjectiveStream
from .oracles import DEFAULT_TOL, OptimumTrace, static_optimum

VERDICT_RTOL = 1e-9


@dataclass
class Verdict:
    name: str
    lhs: float
    rhs: float
    satisfied: bool
    slack: float
    surrogate: bool = False
    where: tuple = ()

    @classmethod
    def compare(cls, name, lhs, rhs, surrogate=False, where=()):
        lhs, rhs = float(lhs), float(rhs)
        slack = rhs - lhs
        if lhs == -INF or rhs == INF:
            ok = True
        elif np.isnan(lhs) or np.isnan(rhs) or lhs == INF:
            ok = False
        else:
            ok = lhs <= rhs + VERDICT_RTOL * (1.0 + abs(lhs) + abs(rhs))
        return cls(name, lhs, rhs, ok, slack, surrogate, where)


def worst(verdicts) -> Verdict | None:
    """Aggregate: the entry with the least slack, satisfied only if all are."""
    verdicts = list(verdicts)
    if not verdicts:
        return None
    w = min(verdicts, key=lambda v: (v.satisfied, v.slack))
    return Verdict(w.name, w.lhs, w.rhs, all(v.satisfied for v in verdicts), w.slack,
                   any(v.surrogate for v in verdicts), w.where)


def _horizon_check(trajectory: Trajectory, trace: OptimumTrace):
    if trace.T < trajectory.T:
        raise ContractViolation(f"optimum trace covers {trace.T} steps, trajectory {trajectory.T}")


def regret_gaps(trajectory: Trajectory, trace: OptimumTrace, stream: ObjectiveStream) -> np.ndarray:
    """``gaps[t-1, i] = phi_{i,t}(x^t) - phi_{i,t}(x^{opt,t,i})``."""
    _horizon_check(trajectory, trace)
    T = trajectory.T
    gaps = np.empty((T, stream.N))
    for t in range(1, T + 1):
        for i, obj in enumerate(stream.at(t)):
            gaps[t - 1, i] = obj.value(trajectory.x(t)) - trace.values[t - 1, i]
    return gaps


def dynamic_regret(trajectory: Trajectory, trace: OptimumTrace, stream: ObjectiveStream, i: int) -> float:
    """``sum_t phi_{i,t}(x^t) - phi_{i,t}(x^{opt,t,i})``, ``i`` 0-based."""
    return float(regret_gaps(trajectory, trace, stream)[:, i].sum())


def static_regret(trajectory: Trajectory, stream: ObjectiveStream, i: int, tol: float = DEFAULT_TOL) -> float:
    T = trajectory.T
    x_star = static_optimum(stream, i, tol, T=T)
    objs = [stream.at(t)[i] for t in range(1, T + 1)]
    played = sum(o.value(trajectory.x(t)) for t, o in enumerate(objs, start=1))
    best = sum(o.value(x_star) for o in objs)
    return float(played - best)


@dataclass
class PathLengths:
    """Cumulative sequences indexed by ``t - 1``."""

    v: np.ndarray
    w: np.ndarray
    sigma: np.ndarray
    sigma_terms: np.ndarray
    surrogate: np.ndarray

    @property
    def any_surrogate(self) -> bool:
        return bool(self.surrogate.any())


def path_lengths(trajectory: Trajectory, trace: OptimumTrace, stream: ObjectiveStream) -> PathLengths:
    """
    Cumulative iterate movement ``v_t``, optimum movement ``w_t`` and
    subdifferential mass ``sigma_t``.

    ``w_t`` needs ``x^{opt,t+1,i}``; the term for ``j = T`` lies beyond the
    horizon and is taken as zero, so ``w_T = w_{T-1}``.
    """
    _horizon_check(trajectory, trace)
    T = trajectory.T
    steps = np.linalg.norm(np.diff(trajectory.outer, axis=0), axis=1)
    v = np.cumsum(steps)
    opt = trace.points[:T]
    moves = np.zeros(T)
    if T > 1:
        moves[:-1] = np.linalg.norm(np.diff(opt, axis=0), axis=2).max(axis=1)
    w = np.cumsum(moves)
    terms = np.empty((T, stream.N))
    surrogate = np.zeros((T, stream.N), dtype=bool)
    for t in range(1, T + 1):
        for i, obj in enumerate(stream.at(t)):
            terms[t - 1, i], surrogate[t - 1, i] = obj.subdiff_distance(trajectory.x(t))
    sigma = np.cumsum(terms.sum(axis=1))
    return PathLengths(v, w, sigma, terms, surrogate)


def drift_bound(trajectory: Trajectory, stream: ObjectiveStream) -> float:
    """
    Slow-changes constant ``e``: the largest change of any ``f_{i,t}`` or
    ``g_{i,t}`` between ``x^t`` and ``x^{t+1}``, over ``t = 1..T``.

    Returns ``inf`` when some ``g_{i,t}`` is infinite at an iterate, since no
    finite drift constant exists then.
    """
    e = 0.0
    for t in range(1, trajectory.T + 1):
        x, x_next = trajectory.x(t), trajectory.x(t + 1)
        for obj in stream.at(t):
            gx, gn = obj.nonsmooth.value(x), obj.nonsmooth.value(x_next)
            if gx == INF or gn == INF:
                return INF
            e = max(e, abs(obj.smooth.value(x_next) - obj.smooth.value(x)), abs(gn - gx))
    return float(e)


def check_lemma1(obj: CompositeObjective, x, y, c: float) -> Verdict:
    """``phi(T(x)) - phi(y) <= (|x-y|^2 - |T(x)-y|^2) / (2c)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    Tx, _ = obj.prox_grad(x, c)
    phi_y = obj.value(y)
    lhs = -INF if phi_y == INF else obj.value(Tx) - phi_y
    rhs = (np.sum((x - y) ** 2) - np.sum((Tx - y) ** 2)) / (2.0 * c)
    return Verdict.compare("Lemma1", lhs, rhs)


def check_descent(obj: CompositeObjective, x, c: float, atol: float = 1e-12) -> Verdict:
    """``phi(T(x)) <= phi(x)`` with absolute slack ``atol``."""
    Tx, _ = obj.prox_grad(x, c)
    lhs, rhs = obj.value(Tx), obj.value(x)
    ok = rhs == INF or lhs <= rhs + atol
    return Verdict("Lemma1-descent", lhs, rhs, ok, rhs - lhs)


def check_lemma2(trajectory: Trajectory, trace: OptimumTrace, K: int, paths: PathLengths):
    """
    Per-``t`` (a) and per-``(t, i)`` (b), (c) verdicts.

    (c) needs ``x^{t,K}``; it comes back as None when the trajectory does not
    carry it.
    """
    _horizon_check(trajectory, trace)
    T, N = trajectory.T, trace.points.shape[1]
    sur = paths.any_surrogate
    a, b, c = [], [], []
    for t in range(1, T + 1):
        step = np.linalg.norm(trajectory.x(t + 1) - trajectory.x(t))
        a.append(Verdict.compare("Lemma2a", step, K * paths.sigma[t - 1], sur, (t,)))
        for i in range(N):
            start = np.linalg.norm(trajectory.x(1) - trace.point(1, i))
            opt = trace.point(t, i)
            rhs_b = 2 * paths.v[t - 1] + paths.w[t - 1] + start
            b.append(Verdict.compare("Lemma2b", np.linalg.norm(trajectory.x(t + 1) - opt), rhs_b,
                                     False, (t, i + 1)))
            if trajectory.penultimate is not None:
                lhs_c = np.linalg.norm(trajectory.penultimate[t - 1] - opt)
                c.append(Verdict.compare("Lemma2c", lhs_c, rhs_b + K * paths.sigma[t - 1], sur, (t, i + 1)))
    return a, b, (c if trajectory.penultimate is not None else None)


def _start_factor(trajectory, trace, alpha_min, steps):
    steps = np.asarray(steps, dtype=float)
    dists = np.linalg.norm(trace.points[0] - trajectory.x(1), axis=1)
    return float(np.sum(dists / (2.0 * alpha_min * steps)))


def theorem1_rhs(trajectory, trace, paths, K, alpha_min, steps, proof_variant=False) -> float:
    """
    ``(v_T + w_T + K sigma_T)^2 (sum_i |x^1 - x^{opt,1,i}| / (2 alpha C_i))^2``;
    the proof variant has ``2 v_T`` in place of ``v_T``.
    """
    v = paths.v[-1] * (2.0 if proof_variant else 1.0)
    path = v + paths.w[-1] + K * paths.sigma[-1]
    return path ** 2 * _start_factor(trajectory, trace, alpha_min, steps) ** 2


def check_theorem1(trajectory, trace, stream, paths, K, alphas, steps):
    """
    Dynamic regret of every objective against the stated right-hand side and
    against the proof-side variant. Returns ``(stated, proof_variant)`` lists.

    ``steps`` are the per-objective ``C_i`` (time-invariant).
    """
    alphas = np.asarray(alphas, dtype=float)
    if np.count_nonzero(alphas) == 1:
        raise ContractViolation("one-hot weights reduce to a single objective; use check_corollary")
    alpha_min = float(alphas[alphas != 0].min())
    gaps = regret_gaps(trajectory, trace, stream)
    out = []
    for variant, name in ((False, "Thm1-stated"), (True, "Thm1-proof-variant")):
        rhs = theorem1_rhs(trajectory, trace, paths, K, alpha_min, steps, variant)
        out.append([Verdict.compare(name, gaps[:, i].sum(), rhs, paths.any_surrogate, (i + 1,))
                    for i in range(stream.N)])
    return out[0], out[1]


def check_corollary(trajectory, trace, stream, i, steps, K, e):
    """
    Single-objective bounds for objective ``i`` (0-based):

    1. ``sum_t phi_{i,t}(x^{t+1}) - phi_{i,t}(x^{opt,t,i}) <= C/(K+1) |x^1 - x^{opt,1,i}|^2``
    2. ``sum_t phi_{i,t}(x^t) - phi_{i,t}(x^{opt,t,i}) <= T e + C/(K+1) |x^1 - x^{opt,1,i}|^2``

    with ``C = max_i 1/C_i``.
    """
    T = trajectory.T
    C = float(np.max(1.0 / np.asarray(steps, dtype=float)))
    core = C / (K + 1) * float(np.sum((trajectory.x(1) - trace.point(1, i)) ** 2))
    after = sum(stream.at(t)[i].value(trajectory.x(t + 1)) - trace.values[t - 1, i] for t in range(1, T + 1))
    before = sum(stream.at(t)[i].value(trajectory.x(t)) - trace.values[t - 1, i] for t in range(1, T + 1))
    return (Verdict.compare("Cor1", after, core, where=(i + 1,)),
            Verdict.compare("Cor2", before, T * e + core, where=(i + 1,)))


def check_corollary_box(trajectory, trace, stream, i, steps, K, e):
    """
    The per-step pair displayed after the corollary (no derivation is given,
    so these are reported but never asserted):

    * ``phi_{i,t}(x^{t+1}) - phi_{i,t}(x^{opt,t,i}) <= C/(T(K+1)) |x^1 - x^{opt,1,i}|`` for every t
    * ``phi_{i,T}(x^T) - phi_{i,T}(x^{opt,T,i}) <= e + C/(T(K+1)) |x^1 - x^{opt,1,i}|``
    """
    T = trajectory.T
    C = float(np.max(1.0 / np.asarray(steps, dtype=float)))
    core = C / (T * (K + 1)) * float(np.linalg.norm(trajectory.x(1) - trace.point(1, i)))
    first = [Verdict.compare("CorBox1", stream.at(t)[i].value(trajectory.x(t + 1)) - trace.values[t - 1, i],
                             core, where=(t, i + 1)) for t in range(1, T + 1)]
    last = Verdict.compare("CorBox2", stream.at(T)[i].value(trajectory.x(T)) - trace.values[T - 1, i],
                           e + core, where=(T, i + 1))
    return first, last


def check_proposition(trajectory, trace, stream, L, theorem_rhs, surrogate=False):
    """``|grad f_{i,t}(x^t) - grad f_{i,t}(x^{opt,t,i})|^2 <= 2 L * theorem_rhs`` per ``(t, i)``."""
    out = []
    for t in range(1, trajectory.T + 1):
        for i, obj in enumerate(stream.at(t)):
            gap = obj.smooth.gradient(trajectory.x(t)) - obj.smooth.gradient(trace.point(t, i))
            out.append(Verdict.compare("Prop", float(gap @ gap), 2.0 * L * theorem_rhs, surrogate, (t, i + 1)))
    return out


def min_composite_trace(trajectory, stream, alphas, trace):
    """
    Per-``t`` min-composite quantities.

    Returns a dict of arrays: ``phi_xt`` (``min_i phi_{i,t}(x^t)``), ``x_opt``
    (``sum_i alpha_i x^{opt,t,i}``), ``phi_xopt`` (``min_i phi_{i,t}`` at that
    point) and ``weighted_opt`` (``sum_i alpha_i phi_{i,t}(x^{opt,t,i})``). The
    last two are claimed equal without proof; both are exposed, no equality
    is assumed.
    """
    alphas = np.asarray(alphas, dtype=float)
    T = trajectory.T
    x_opt = trace.combined(alphas)[:T]
    phi_xt = np.array([min(o.value(trajectory.x(t)) for o in stream.at(t)) for t in range(1, T + 1)])
    phi_xopt = np.array([min(o.value(x_opt[t - 1]) for o in stream.at(t)) for t in range(1, T + 1)])
    weighted_opt = trace.values[:T] @ alphas
    return {"phi_xt": phi_xt, "x_opt": x_opt, "phi_xopt": phi_xopt, "weighted_opt": weighted_opt}


def inner_chain_violations(trajectory: Trajectory, rtol: float = 1e-12):
    """
    ``(t, k)`` pairs where an inner step grows: ``|x^{t,k+1}-x^{t,k}| > |x^{t,k}-x^{t,k-1}|``.

    Reported only; the shrinking-chain property is not guaranteed in general.
    """
    d = trajectory.displacements
    out = []
    for t in range(d.shape[0]):
        for k in range(1, d.shape[1]):
            if d[t, k] > d[t, k - 1] * (1 + rtol) + 1e-300:
                out.append((t + 1, k))
    return out


@dataclass
class RegretReport:
    dynamic: np.ndarray
    static: np.ndarray | None
    gaps: np.ndarray
    paths: PathLengths
    e: float
    alpha_min: float
    L: float
    composite: dict
    verdicts: dict = field(default_factory=dict)
    not_applicable: dict = field(default_factory=dict)
    chain_violations: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def sigma_surrogate(self) -> bool:
        return self.paths.any_surrogate

    def all_satisfied(self, names=None) -> bool:
        names = self.verdicts.keys() if names is None else names
        return all(v.satisfied for n in names for v in self.verdicts[n])


# fixed order of the summary checklist
BOUND_NAMES = ("Lemma1", "Lemma2a", "Lemma2b", "Lemma2c", "Thm1-stated", "Thm1-proof-variant",
               "Cor1", "Cor2", "CorBox1", "CorBox2", "Prop")


def evaluate(trajectory: Trajectory, trace: OptimumTrace, stream: ObjectiveStream, *,
             static: bool = True, tol: float = DEFAULT_TOL) -> RegretReport:
    """Compute every quantity and run every bound check on a finished run."""
    cfg = trajectory.config
    T, N, K = trajectory.T, stream.N, cfg.K
    if cfg.steps.ndim != 1:
        raise ContractViolation("bound checks need time-invariant step sizes C_i")
    steps = cfg.steps
    gaps = regret_gaps(trajectory, trace, stream)
    paths = path_lengths(trajectory, trace, stream)
    e = drift_bound(trajectory, stream)
    L = max(o.lipschitz for t in range(1, T + 1) for o in stream.at(t))
    static_reg = None
    if static:
        static_reg = np.array([static_regret(trajectory, stream, i, tol) for i in range(N)])
    report = RegretReport(gaps.sum(axis=0), static_reg, gaps, paths, e, cfg.alpha_min, L,
                          min_composite_trace(trajectory, stream, cfg.alphas, trace))
    V, NA = report.verdicts, report.not_applicable

    V["Lemma1"] = [check_lemma1(obj, trajectory.x(t), trace.point(t, i), cfg.step(t, i))
                   for t in range(1, T + 1) for i, obj in enumerate(stream.at(t))]
    for v, (t, i) in zip(V["Lemma1"], [(t, i) for t in range(1, T + 1) for i in range(1, N + 1)]):
        v.where = (t, i)
    a, b, c = check_lemma2(trajectory, trace, K, paths)
    V["Lemma2a"], V["Lemma2b"] = a, b
    if c is None:
        NA["Lemma2c"] = "inner-iterates-not-recorded"
    else:
        V["Lemma2c"] = c

    hot = cfg.one_hot
    if hot is None:
        stated, proof = check_theorem1(trajectory, trace, stream, paths, K, cfg.alphas, steps)
        V["Thm1-stated"], V["Thm1-proof-variant"] = stated, proof
        rhs = theorem1_rhs(trajectory, trace, paths, K, cfg.alpha_min, steps)
        V["Prop"] = check_proposition(trajectory, trace, stream, L, rhs, paths.any_surrogate)
        for name in ("Cor1", "Cor2", "CorBox1", "CorBox2"):
            NA[name] = "weights-not-one-hot"
    else:
        c1, c2 = check_corollary(trajectory, trace, stream, hot, steps, K, e)
        V["Cor1"], V["Cor2"] = [c1], [c2]
        box1, box2 = check_corollary_box(trajectory, trace, stream, hot, steps, K, e)
        V["CorBox1"], V["CorBox2"] = box1, [box2]
        # with one-hot weights alpha_min = 1 and the theorem's core is still defined
        rhs = theorem1_rhs(trajectory, trace, paths, K, 1.0, steps)
        V["Prop"] = check_proposition(trajectory, trace, stream, L, rhs, paths.any_surrogate)
        for name in ("Thm1-stated", "Thm1-proof-variant"):
            NA[name] = "weights-one-hot-use-corollary"
    report.chain_violations = inner_chain_violations(trajectory)
    return report
