"""
Offline ground truth: per-objective minimizers, static and scalarized
optima, Pareto dominance on grids, finite-difference gradients.

Nothing here shares a code path with the online engine beyond the
prox-gradient operator itself; solves start from their own points and run to
a much tighter tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, UnsupportedScenario
from .objective_model import (
    CompositeObjective,
    ObjectiveStream,
    Quadratic,
    SmoothTerm,
    Zero,
    weighted_sum,
)

DEFAULT_TOL = 1e-10


def solve_offline(obj: CompositeObjective, x0, tol: float = DEFAULT_TOL, max_iters: int = 200_000):
    """
    Minimize a composite objective to ``d(0, dphi(x)) <= tol``.

    Pure quadratics (``g == 0``) are solved by a linear solve; everything else
    by prox-gradient iterations with step ``1/L``.

    Returns
    -------
    x : ndarray
    residual : float
        Subdifferential distance at ``x``.

    Raises
    ------
    ConvergenceFailure
        When ``max_iters`` is hit with the residual still above ``tol``.
    """
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    if isinstance(obj.smooth, Quadratic) and isinstance(obj.nonsmooth, Zero):
        x = obj.smooth.minimizer()
        res, _ = obj.subdiff_distance(x)
        # one refinement step against rounding in lstsq
        if res > tol:
            dx, *_ = np.linalg.lstsq(obj.smooth.A, -obj.smooth.gradient(x), rcond=None)
            x = x + dx
            res, _ = obj.subdiff_distance(x)
        if res <= tol:
            return x, res
    L = obj.lipschitz
    c = 1.0 / L if L > 0 else 1.0
    if not obj.nonsmooth.in_domain(x):
        x = obj.nonsmooth.prox(x, c)
    best_x, best_res = x, obj.subdiff_distance(x)[0]
    for _ in range(max_iters):
        if best_res <= tol:
            return best_x, best_res
        x, _ = obj.prox_grad(x, c)
        res = obj.subdiff_distance(x)[0]
        if res < best_res:
            best_x, best_res = x, res
    if best_res <= tol:
        return best_x, best_res
    raise ConvergenceFailure(
        f"prox-gradient stopped after {max_iters} iterations with residual {best_res:.3e} > {tol:.1e}",
        x=best_x, residual=best_res)


@dataclass
class OptimumTrace:
    """
    Per-objective, per-time minimizers.

    ``points[t-1, i]``, ``values[t-1, i]`` and ``residuals[t-1, i]`` refer to
    objective ``i`` (0-based) at time ``t``.
    """

    points: np.ndarray
    values: np.ndarray
    residuals: np.ndarray
    tol: float = DEFAULT_TOL
    meta: dict = field(default_factory=dict)

    @property
    def T(self) -> int:
        return self.points.shape[0]

    def point(self, t: int, i: int) -> np.ndarray:
        return self.points[t - 1, i]

    def combined(self, alphas) -> np.ndarray:
        """``x^{opt,t} = sum_i alpha_i x^{opt,t,i}`` for every ``t``, shape ``(T, n)``."""
        return np.einsum("i,tin->tn", np.asarray(alphas, dtype=float), self.points)


def optimum_trace(stream: ObjectiveStream, tol: float = DEFAULT_TOL, x0=None,
                  max_iters: int = 200_000) -> OptimumTrace:
    """
    Solve every ``phi_{i,t}`` for ``t = 1..T``.

    Each objective is warm-started from its own optimum at ``t - 1`` (from
    ``x0``, default the origin, at ``t = 1``).
    """
    T, N, n = stream.T, stream.N, stream.n
    points = np.empty((T, N, n))
    values = np.empty((T, N))
    residuals = np.empty((T, N))
    start = [np.zeros(n) if x0 is None else np.asarray(x0, dtype=float) for _ in range(N)]
    for t in range(1, T + 1):
        for i, obj in enumerate(stream.at(t)):
            try:
                x, res = solve_offline(obj, start[i], tol, max_iters)
            except ConvergenceFailure as exc:
                raise ConvergenceFailure(f"oracle for objective {i + 1} at t={t}: {exc}",
                                         x=exc.x, residual=exc.residual) from None
            points[t - 1, i] = x
            values[t - 1, i] = obj.value(x)
            residuals[t - 1, i] = res
            start[i] = x
    # the argmin may be a set (flat L1 regions); w_t depends on this choice
    meta = {"argmin_selection": "prox-gradient limit point, warm-started from previous t"}
    return OptimumTrace(points, values, residuals, tol, meta)


def static_optimum(stream: ObjectiveStream, i: int, tol: float = DEFAULT_TOL, T: int | None = None,
                   x0=None):
    """
    Best fixed decision in hindsight for objective ``i`` (0-based).

    Minimizes the time average of ``phi_{i,t}``, which has the same minimizer
    as the sum. Raises UnsupportedScenario if the nonsmooth parts do not sum
    to a builtin family.
    """
    T = stream.T if T is None else T
    objs = [stream.at(t)[i] for t in range(1, T + 1)]
    total = weighted_sum(objs, [1.0 / T] * T)
    x0 = np.zeros(stream.n) if x0 is None else x0
    x, _ = solve_offline(total, x0, tol)
    return x


def solve_scalarized(objectives, omegas, tol: float = DEFAULT_TOL, x0=None):
    """
    Minimize ``sum_i omega_i phi_i`` with ``omega`` on the simplex.

    Only supported when the weighted nonsmooth parts stay in a builtin family
    (identical up to scale).
    """
    omegas = np.asarray(omegas, dtype=float)
    if np.any(omegas < 0) or abs(omegas.sum() - 1.0) > 1e-12:
        raise ValueError(f"scalarization weights must lie on the simplex, got {omegas}")
    obj = weighted_sum(objectives, omegas)
    if x0 is None:
        n = next(o.smooth.n for o in objectives if isinstance(o.smooth, Quadratic))
        x0 = np.zeros(n)
    x, _ = solve_offline(obj, x0, tol)
    return x


def pareto_dominates(values_a, values_b) -> bool:
    """True iff ``a <= b`` componentwise with at least one strict inequality."""
    a = np.asarray(values_a, dtype=float)
    b = np.asarray(values_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def dominates_with_margin(values_a, values_b, margin: float) -> bool:
    """``a`` dominates ``b`` even after ``a`` is worsened by ``margin`` in every component."""
    return pareto_dominates(np.asarray(values_a, dtype=float) + margin, values_b)


def nondominated_mask(F: np.ndarray) -> np.ndarray:
    """
    Boolean mask of the rows of ``F`` not dominated by any other row.

    Same result as the pairwise scan; rows are visited in lexicographic order
    so a row can only be dominated by rows already on the front.
    """
    F = np.asarray(F, dtype=float)
    order = np.lexsort(F.T[::-1])
    front = []
    keep = np.zeros(F.shape[0], dtype=bool)
    for idx in order:
        f = F[idx]
        if front:
            P = F[front]
            if np.any(np.all(P <= f, axis=1) & np.any(P < f, axis=1)):
                continue
        front.append(idx)
        keep[idx] = True
    return keep


@dataclass
class ParetoFront:
    points: np.ndarray
    values: np.ndarray
    grid: np.ndarray
    grid_values: np.ndarray


def grid_pareto_front(objectives, box, resolution: int = 401) -> ParetoFront:
    """
    Brute-force Pareto front of ``objectives`` on a regular grid.

    ``box`` is ``(lo, hi)`` for ``n = 1`` or a sequence of ``(lo, hi)`` pairs,
    one per axis, for ``n <= 2``.
    """
    box = np.asarray(box, dtype=float)
    if box.ndim == 1:
        box = box[None, :]
    n = box.shape[0]
    if n > 2:
        raise UnsupportedScenario(f"grid Pareto fronts support n <= 2, got n={n}")
    if resolution > 401:
        raise UnsupportedScenario(f"resolution {resolution} exceeds 401 per axis")
    axes = [np.linspace(lo, hi, resolution) for lo, hi in box]
    grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    values = np.array([[obj.value(x) for obj in objectives] for x in grid])
    keep = nondominated_mask(values)
    return ParetoFront(grid[keep], values[keep], grid, values)


def finite_diff_gradient(f: SmoothTerm, x, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of ``f.value`` at ``x``."""
    if h <= 0:
        raise ValueError("h must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    g = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (f.value(x + e) - f.value(x - e)) / (2 * h)
    return g
