"""
Composite time-varying objectives.

Every objective is a sum ``phi = f + g`` of a smooth convex term ``f``
(value, gradient and a Lipschitz constant for the gradient) and a convex,
possibly nonsmooth term ``g`` that comes with an exact proximal map.
A stream maps each time index ``t = 1..T`` to the list of ``N`` composites
active at that time.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .errors import ConstructionError, ContractViolation, DomainError, UnsupportedScenario

#: Extended-real +infinity, used for values outside the domain of an indicator.
INF = math.inf

# c*L may land one ulp above 1 when c is computed as 1/L
_STEP_RTOL = 1e-12


def _as_vector(x):
    return np.atleast_1d(np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# smooth terms
# ---------------------------------------------------------------------------

class SmoothTerm:
    """
    Differentiable convex function with an L-Lipschitz gradient.

    Parameters
    ----------
    value : callable
        ``x -> float``.
    gradient : callable
        ``x -> ndarray``.
    lipschitz : float
        Declared Lipschitz constant of the gradient.
    """

    def __init__(self, value: Callable, gradient: Callable, lipschitz: float):
        if lipschitz < 0 or not np.isfinite(lipschitz):
            raise ConstructionError(f"lipschitz must be finite and nonnegative, got {lipschitz}")
        self._value = value
        self._gradient = gradient
        self.lipschitz = float(lipschitz)

    def value(self, x) -> float:
        return float(self._value(_as_vector(x)))

    def gradient(self, x) -> np.ndarray:
        return _as_vector(self._gradient(_as_vector(x)))

    def scaled(self, w: float) -> "SmoothTerm":
        return SmoothTerm(lambda x: w * self.value(x), lambda x: w * self.gradient(x),
                          w * self.lipschitz)

    def __add__(self, other: "SmoothTerm") -> "SmoothTerm":
        return SmoothTerm(lambda x: self.value(x) + other.value(x),
                          lambda x: self.gradient(x) + other.gradient(x),
                          self.lipschitz + other.lipschitz)


class Quadratic(SmoothTerm):
    """``f(x) = 0.5 x'Ax + b'x + const`` with ``A`` symmetric PSD."""

    def __init__(self, A, b, const: float = 0.0):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = _as_vector(b)
        if A.shape[0] != A.shape[1] or A.shape[0] != b.shape[0]:
            raise ConstructionError(f"shape mismatch: A {A.shape}, b {b.shape}")
        scale = max(1.0, float(np.max(np.abs(A))))
        if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * scale):
            raise ConstructionError("quadratic matrix is not symmetric")
        eigs = np.linalg.eigvalsh(A)
        if eigs[0] < -1e-12 * scale:
            raise ConstructionError(f"quadratic matrix is indefinite (min eigenvalue {eigs[0]:.3e})")
        self.A = A
        self.b = b
        self.const = float(const)
        self.mu = max(float(eigs[0]), 0.0)
        super().__init__(self._quad_value, self._quad_gradient, max(float(eigs[-1]), 0.0))

    def _quad_value(self, x):
        return 0.5 * x @ (self.A @ x) + self.b @ x + self.const

    def _quad_gradient(self, x):
        return self.A @ x + self.b

    @property
    def n(self) -> int:
        return self.b.shape[0]

    def minimizer(self) -> np.ndarray:
        # min-norm solution when A is singular
        x, *_ = np.linalg.lstsq(self.A, -self.b, rcond=None)
        return x

    def scaled(self, w: float) -> "Quadratic":
        return Quadratic(w * self.A, w * self.b, w * self.const)

    def shifted(self, d) -> "Quadratic":
        """Return ``x -> f(x - d)``."""
        d = _as_vector(d)
        return Quadratic(self.A, self.b - self.A @ d,
                         self.const + 0.5 * d @ (self.A @ d) - self.b @ d)

    def __add__(self, other):
        if isinstance(other, Quadratic):
            return Quadratic(self.A + other.A, self.b + other.b, self.const + other.const)
        return SmoothTerm.__add__(self, other)


def make_quadratic(A, b, drift: Callable | None = None, const: float = 0.0):
    """
    Build a time-indexed family of quadratics.

    ``drift`` maps ``t`` to ``(A_t, b_t)`` or ``(A_t, b_t, const_t)``; when it
    is None the family is stationary. Validation (symmetry, PSD) happens at
    construction of every member, and the Lipschitz constant is the largest
    eigenvalue of ``A_t``, computed once per ``t``.
    """
    base = Quadratic(A, b, const)
    if drift is None:
        return lambda t: base
    cache = {}

    def family(t):
        if t not in cache:
            cache[t] = Quadratic(*drift(t))
        return cache[t]

    return family


def validate_lipschitz(term: SmoothTerm, n: int, *, pairs: int = 1000, radius: float = 10.0,
                       seed: int = 0, rtol: float = 1e-9) -> float:
    """
    Check the declared gradient Lipschitz constant on random pairs.

    Returns the largest observed ratio ``|grad(x)-grad(y)| / |x-y|``; raises
    ConstructionError if it exceeds the declared constant by more than ``rtol``.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(pairs):
        x = rng.uniform(-radius, radius, n)
        y = rng.uniform(-radius, radius, n)
        dist = np.linalg.norm(x - y)
        if dist == 0.0:
            continue
        worst = max(worst, np.linalg.norm(term.gradient(x) - term.gradient(y)) / dist)
    if worst > term.lipschitz * (1.0 + rtol) + 1e-300:
        raise ConstructionError(
            f"declared lipschitz {term.lipschitz:.6g} violated by sampled ratio {worst:.6g}")
    return worst


# ---------------------------------------------------------------------------
# nonsmooth terms
# ---------------------------------------------------------------------------

class ProxTerm:
    """
    Proper lsc convex function with an exact proximal map.

    Subclasses implement ``value`` (possibly returning ``INF``), ``prox`` and,
    when a closed form exists, ``subdiff_distance``.
    """

    has_exact_subdiff = False

    def value(self, x) -> float:
        raise NotImplementedError

    def prox(self, v, c: float) -> np.ndarray:
        """argmin_u 0.5*|u - v|^2 + c*g(u)."""
        raise NotImplementedError

    def in_domain(self, x) -> bool:
        return self.value(x) < INF

    def subdiff_distance(self, x, shift=None) -> float:
        """
        Distance from the origin to ``shift + dg(x)``.

        With ``shift = grad f(x)`` this is ``d(0, d(f+g)(x))``.
        """
        raise NotImplementedError


class Zero(ProxTerm):
    has_exact_subdiff = True

    def value(self, x):
        return 0.0

    def prox(self, v, c):
        return _as_vector(v).copy()

    def subdiff_distance(self, x, shift=None):
        x = _as_vector(x)
        return 0.0 if shift is None else float(np.linalg.norm(shift))

    def __repr__(self):
        return "Zero()"


class L1Norm(ProxTerm):
    """``lam * |x|_1``; prox is soft thresholding."""

    has_exact_subdiff = True

    def __init__(self, lam: float):
        if lam < 0:
            raise ConstructionError(f"l1 weight must be nonnegative, got {lam}")
        self.lam = float(lam)

    def value(self, x):
        return self.lam * float(np.sum(np.abs(_as_vector(x))))

    def prox(self, v, c):
        v = _as_vector(v)
        return np.sign(v) * np.maximum(np.abs(v) - c * self.lam, 0.0)

    def subdiff_distance(self, x, shift=None):
        x = _as_vector(x)
        u = np.zeros_like(x) if shift is None else _as_vector(shift)
        nz = x != 0
        d = np.where(nz, np.abs(u + self.lam * np.sign(x)), np.maximum(np.abs(u) - self.lam, 0.0))
        return float(np.linalg.norm(d))

    def __repr__(self):
        return f"L1Norm({self.lam!r})"


class Box(ProxTerm):
    """Indicator of ``[lo, hi]^n``; prox is the clamp."""

    has_exact_subdiff = True

    def __init__(self, lo, hi):
        lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        if np.any(lo > hi):
            raise ConstructionError(f"empty box: lo={lo} hi={hi}")
        self.lo, self.hi = lo, hi

    def value(self, x):
        x = _as_vector(x)
        return 0.0 if np.all((x >= self.lo) & (x <= self.hi)) else INF

    def prox(self, v, c):
        return np.clip(_as_vector(v), self.lo, self.hi)

    def subdiff_distance(self, x, shift=None):
        x = _as_vector(x)
        if not self.in_domain(x):
            raise DomainError(f"point {x} lies outside the box [{self.lo}, {self.hi}]")
        u = np.zeros_like(x) if shift is None else _as_vector(shift)
        lo = np.broadcast_to(self.lo, x.shape)
        hi = np.broadcast_to(self.hi, x.shape)
        # normal cone: (-inf,0] at lo, [0,inf) at hi, R when lo == hi
        d = np.abs(u)
        d = np.where(x == lo, np.maximum(-u, 0.0), d)
        d = np.where(x == hi, np.maximum(u, 0.0), d)
        d = np.where(lo == hi, 0.0, d)
        return float(np.linalg.norm(d))

    def __repr__(self):
        return f"Box({self.lo!r}, {self.hi!r})"


def builtin_prox_terms() -> dict:
    """Catalog of the closed-form nonsmooth families, keyed by scenario name."""
    return {"zero": Zero, "l1": L1Norm, "box": Box}


def combine_prox_terms(terms: Sequence[ProxTerm], weights: Sequence[float]) -> ProxTerm:
    """
    Weighted sum of nonsmooth terms, when it stays in a builtin family.

    Zero-weight terms are dropped. Supported: all zero, L1 mixed with zero
    (weights add up in lambda), or boxes alone (intersection). Anything else
    raises UnsupportedScenario.
    """
    active = [(g, w) for g, w in zip(terms, weights) if w != 0 and not isinstance(g, Zero)]
    if not active:
        return Zero()
    if all(isinstance(g, L1Norm) for g, _ in active):
        return L1Norm(sum(w * g.lam for g, w in active))
    if all(isinstance(g, Box) for g, _ in active):
        lo = np.max(np.broadcast_arrays(*[g.lo for g, _ in active]), axis=0)
        hi = np.min(np.broadcast_arrays(*[g.hi for g, _ in active]), axis=0)
        return Box(lo, hi)
    raise UnsupportedScenario(
        "weighted sum of nonsmooth terms leaves the builtin families: "
        + ", ".join(repr(g) for g, _ in active))


# ---------------------------------------------------------------------------
# composites
# ---------------------------------------------------------------------------

class CompositeObjective:
    """``phi = smooth + nonsmooth``."""

    def __init__(self, smooth: SmoothTerm, nonsmooth: ProxTerm | None = None):
        self.smooth = smooth
        self.nonsmooth = Zero() if nonsmooth is None else nonsmooth

    @property
    def lipschitz(self) -> float:
        return self.smooth.lipschitz

    def value(self, x) -> float:
        g = self.nonsmooth.value(x)
        if g == INF:
            return INF
        return self.smooth.value(x) + g

    def check_step(self, c: float) -> None:
        L = self.smooth.lipschitz
        if not (c > 0) or (L > 0 and c * L > 1.0 + _STEP_RTOL):
            raise ContractViolation(f"step C={c!r} outside (0, 1/L] for L={L!r}")

    def prox_grad(self, x, c: float):
        """Return ``(T(x), G(x))`` with ``T(x) = prox_{cg}(x - c grad f(x))``."""
        self.check_step(c)
        x = _as_vector(x)
        Tx = self.nonsmooth.prox(x - c * self.smooth.gradient(x), c)
        return Tx, (x - Tx) / c

    def subdiff_distance(self, x, c: float | None = None):
        """
        ``d(0, dphi(x))`` and a flag telling whether it is a surrogate.

        Builtin nonsmooth families give the exact distance. Otherwise the
        gradient-mapping norm ``|G(x)|`` at step ``c`` (default ``1/L``) is
        returned with the flag set.
        """
        x = _as_vector(x)
        if not self.nonsmooth.in_domain(x):
            raise DomainError(f"point {x} is outside the domain of {self.nonsmooth!r}")
        grad = self.smooth.gradient(x)
        if self.nonsmooth.has_exact_subdiff:
            return self.nonsmooth.subdiff_distance(x, grad), False
        if c is None:
            L = self.smooth.lipschitz
            c = 1.0 / L if L > 0 else 1.0
        _, G = self.prox_grad(x, c)
        return float(np.linalg.norm(G)), True

    def __repr__(self):
        return f"CompositeObjective({self.smooth.__class__.__name__}, {self.nonsmooth!r})"


def prox_grad_map(obj: CompositeObjective, x, c: float):
    """
    Prox-gradient operator ``T(x) = prox_{cg}(x - c grad f(x))``.

    Returns ``(T(x), G(x))`` where ``G(x) = (x - T(x))/c`` is the gradient
    mapping. Raises ContractViolation unless ``0 < c <= 1/L``.
    """
    return obj.prox_grad(x, c)


def subdiff_distance(obj: CompositeObjective, x):
    """Return ``(d(0, dphi(x)), is_surrogate)``; see CompositeObjective.subdiff_distance."""
    return obj.subdiff_distance(x)


def weighted_sum(objectives: Sequence[CompositeObjective], weights: Sequence[float]) -> CompositeObjective:
    """Composite ``sum_i w_i phi_i``; zero-weight terms are dropped."""
    pairs = [(o, w) for o, w in zip(objectives, weights) if w != 0]
    if not pairs:
        raise ConstructionError("weighted sum needs at least one positive weight")
    smooth = pairs[0][0].smooth.scaled(pairs[0][1])
    for o, w in pairs[1:]:
        smooth = smooth + o.smooth.scaled(w)
    nonsmooth = combine_prox_terms([o.nonsmooth for o, _ in pairs], [w for _, w in pairs])
    return CompositeObjective(smooth, nonsmooth)


class ObjectiveStream:
    """
    Time-indexed family ``t -> (phi_{1,t}, ..., phi_{N,t})`` over ``R^n``.

    Parameters
    ----------
    n, N : int
        Decision dimension and number of objectives.
    at : callable or sequence
        Either ``t -> list of N CompositeObjective`` or a list whose entry
        ``t-1`` holds the objectives at time ``t``.
    T : int, optional
        Horizon. Required when ``at`` is a callable; inferred from a list.
    """

    def __init__(self, n: int, N: int, at, T: int | None = None):
        self.n, self.N = int(n), int(N)
        if callable(at):
            if T is None:
                raise ConstructionError("a callable stream needs an explicit horizon T")
            self._at, self.T = at, int(T)
        else:
            frames = [list(f) for f in at]
            self._at = lambda t: frames[t - 1]
            self.T = len(frames) if T is None else min(int(T), len(frames))
        self._cache = {}

    def at(self, t: int) -> list:
        if not 1 <= t <= self.T:
            raise IndexError(f"time index {t} outside 1..{self.T}")
        if t not in self._cache:
            objs = list(self._at(t))
            if len(objs) != self.N:
                raise ConstructionError(f"stream yields {len(objs)} objectives at t={t}, expected {self.N}")
            self._cache[t] = objs
        return self._cache[t]

    def __len__(self):
        return self.T

    def max_lipschitz(self) -> float:
        return max(o.lipschitz for t in range(1, self.T + 1) for o in self.at(t))

    @classmethod
    def stationary(cls, objectives: Sequence[CompositeObjective], T: int, n: int | None = None):
        objectives = list(objectives)
        if n is None:
            n = _infer_dim(objectives[0])
        return cls(n, len(objectives), lambda t: objectives, T=T)


def _infer_dim(obj: CompositeObjective) -> int:
    if isinstance(obj.smooth, Quadratic):
        return obj.smooth.n
    raise ConstructionError("cannot infer the dimension of a non-quadratic objective; pass n")
