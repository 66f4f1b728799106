"""
On-line multi-objective proximal gradient descent.

At every time step the engine sees only the objectives of that step. It runs
``K + 1`` inner iterations; each one takes a prox-gradient step on every
objective separately and combines the candidates with the weights ``alphas``.
The last combined inner iterate becomes the next decision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, ContractViolation
from .objective_model import ObjectiveStream

ALPHA_SUM_TOL = 1e-12


@dataclass
class EngineConfig:
    """
    Parameters of a run.

    ``steps`` is either one step size per objective, shape ``(N,)``, or a
    per-time table of shape ``(T, N)``.
    """

    alphas: np.ndarray
    steps: np.ndarray
    K: int
    T: int

    def __post_init__(self):
        self.alphas = np.atleast_1d(np.asarray(self.alphas, dtype=float))
        self.steps = np.asarray(self.steps, dtype=float)
        if self.steps.ndim == 0:
            self.steps = np.full(self.alphas.shape, float(self.steps))
        if int(self.K) != self.K or self.K < 0:
            raise ConfigError(f"inner budget K must be a nonnegative integer, got {self.K}")
        if int(self.T) != self.T or self.T < 1:
            raise ConfigError(f"horizon T must be a positive integer, got {self.T}")
        self.K, self.T = int(self.K), int(self.T)
        if np.any(self.alphas < 0) or np.any(self.alphas > 1):
            raise ConfigError(f"weights must lie in [0, 1], got {self.alphas}")
        if abs(self.alphas.sum() - 1.0) > ALPHA_SUM_TOL:
            raise ConfigError(f"weights must sum to 1, got sum {self.alphas.sum()!r}")
        if self.steps.shape[-1] != self.N or self.steps.ndim not in (1, 2):
            raise ConfigError(f"steps shape {self.steps.shape} does not match N={self.N}")
        if self.steps.ndim == 2 and self.steps.shape[0] < self.T:
            raise ConfigError(f"step table covers {self.steps.shape[0]} < T={self.T} time steps")
        if np.any(self.steps <= 0):
            raise ConfigError("step sizes must be positive")

    @property
    def N(self) -> int:
        return self.alphas.shape[0]

    @property
    def alpha_min(self) -> float:
        return float(self.alphas[self.alphas != 0].min())

    @property
    def one_hot(self) -> int | None:
        """Index of the objective carrying all the weight, or None."""
        hot = np.flatnonzero(self.alphas == 1.0)
        return int(hot[0]) if hot.size == 1 and np.count_nonzero(self.alphas) == 1 else None

    def step(self, t: int, i: int) -> float:
        return float(self.steps[i] if self.steps.ndim == 1 else self.steps[t - 1, i])

    def validate(self, stream: ObjectiveStream) -> None:
        """Check ``C_i <= 1/L_{f_{i,t}}`` for every ``i, t`` of the horizon."""
        if stream.N != self.N:
            raise ConfigError(f"config has N={self.N} weights, stream has {stream.N} objectives")
        if len(stream) < self.T:
            raise ConfigError(f"stream covers {len(stream)} steps, horizon is T={self.T}")
        for t in range(1, self.T + 1):
            for i, obj in enumerate(stream.at(t)):
                try:
                    obj.check_step(self.step(t, i))
                except ContractViolation as exc:
                    raise ContractViolation(f"objective {i + 1} at t={t}: {exc}") from None


@dataclass
class InnerRecord:
    """
    Inner iterates of one time step.

    ``xs[k]`` is ``x^{t,k}`` for ``k = 0..K+1``; ``ys[k, i]`` is the candidate
    ``y^{t,k+1,i}`` (NaN rows for zero-weight objectives that were skipped).
    """

    xs: np.ndarray
    ys: np.ndarray | None = None

    @property
    def displacements(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.xs, axis=0), axis=1)


@dataclass
class Trajectory:
    """
    Outer iterates ``x^1..x^{T+1}`` (rows of ``outer``) of a run.

    ``penultimate[t-1]`` holds ``x^{t,K}`` and ``displacements[t-1]`` the inner
    step lengths ``|x^{t,k+1} - x^{t,k}|``; both are always kept because they
    are cheap. ``inner`` holds full InnerRecords when recording was requested.
    """

    outer: np.ndarray
    penultimate: np.ndarray | None = None
    displacements: np.ndarray | None = None
    inner: list | None = None
    config: EngineConfig | None = field(default=None, repr=False)

    @property
    def T(self) -> int:
        return self.outer.shape[0] - 1

    def x(self, t: int) -> np.ndarray:
        """1-based access: ``x(1)`` is the initial point."""
        return self.outer[t - 1]


def inner_step(objectives, x, config: EngineConfig, t: int = 1, record: bool = False):
    """
    One combine: candidates ``y_i = T_i(x)`` and ``sum_i alpha_i y_i``.

    The sum runs over ``i = 1..N`` in order. Zero-weight candidates are only
    computed when ``record`` is set; otherwise their slot is None.
    """
    x = np.asarray(x, dtype=float)
    x_next = np.zeros_like(x)
    candidates = []
    for i, obj in enumerate(objectives):
        a = config.alphas[i]
        if a == 0.0 and not record:
            candidates.append(None)
            continue
        y, _ = obj.prox_grad(x, config.step(t, i))
        candidates.append(y)
        if a != 0.0:
            x_next = x_next + a * y
    return x_next, candidates


def run_time_step(stream: ObjectiveStream, t: int, x_in, config: EngineConfig, record: bool = False):
    """
    Run the ``K + 1`` inner iterations ``k = 0..K`` at time ``t``.

    Returns ``(x_out, InnerRecord)``; the record always carries the inner
    iterates, and the candidates too when ``record`` is set.
    """
    objectives = stream.at(t)
    x = np.asarray(x_in, dtype=float).copy()
    xs = np.empty((config.K + 2, x.size))
    xs[0] = x
    ys = np.full((config.K + 1, config.N, x.size), np.nan) if record else None
    for k in range(config.K + 1):
        x, cands = inner_step(objectives, x, config, t, record)
        xs[k + 1] = x
        if record:
            for i, y in enumerate(cands):
                ys[k, i] = y
    return x, InnerRecord(xs, ys)


def run_online(stream: ObjectiveStream, x1, config: EngineConfig,
               observer: Callable | None = None, record_inner: bool = False) -> Trajectory:
    """
    Run the algorithm over ``t = 1..T``.

    ``observer(t, x_t, x_next, record)`` is called once per step, in order,
    right after ``x^{t+1}`` is committed.
    """
    config.validate(stream)
    x = np.atleast_1d(np.asarray(x1, dtype=float)).copy()
    if x.size != stream.n:
        raise ConfigError(f"x1 has dimension {x.size}, stream has n={stream.n}")
    outer = np.empty((config.T + 1, x.size))
    penultimate = np.empty((config.T, x.size))
    displacements = np.empty((config.T, config.K + 1))
    inner = [] if record_inner else None
    outer[0] = x
    for t in range(1, config.T + 1):
        x_next, rec = run_time_step(stream, t, x, config, record=record_inner)
        outer[t] = x_next
        penultimate[t - 1] = rec.xs[config.K]
        displacements[t - 1] = rec.displacements
        if record_inner:
            inner.append(rec)
        if observer is not None:
            observer(t, x, x_next, rec)
        x = x_next
    return Trajectory(outer, penultimate, displacements, inner, config)
