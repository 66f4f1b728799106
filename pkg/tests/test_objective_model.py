import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tvmoprox import (
    INF,
    Box,
    CompositeObjective,
    ConstructionError,
    ContractViolation,
    DomainError,
    L1Norm,
    ObjectiveStream,
    Quadratic,
    SmoothTerm,
    Zero,
    builtin_prox_terms,
    make_quadratic,
    prox_grad_map,
    subdiff_distance,
)
from tvmoprox.objective_model import validate_lipschitz
from tvmoprox.oracles import finite_diff_gradient
from tvmoprox.scenarios import random_composite


def grid_argmin(fun, lo, hi, num=2_000_001):
    u = np.linspace(lo, hi, num)
    return u[np.argmin(fun(u))]


def test_prox_grad_unconstrained_minimizer():
    obj = CompositeObjective(Quadratic([[1.0]], [-3.0]))
    for x in (-4.0, 0.0, 11.0):
        Tx, G = prox_grad_map(obj, [x], 1.0)
        assert Tx[0] == pytest.approx(3.0, abs=1e-15)


def test_prox_grad_l1_matches_grid():
    # T(2) = prox_{0.5|.|}(2 - 0.5*2) = prox_{0.5|.|}(1)
    expected = grid_argmin(lambda u: 0.5 * (u - 1) ** 2 + 0.5 * np.abs(u), -3, 3)
    assert expected == pytest.approx(0.5, abs=1e-5)
    obj = CompositeObjective(Quadratic([[1.0]], [0.0]), L1Norm(1.0))
    Tx, G = prox_grad_map(obj, [2.0], 0.5)
    assert Tx[0] == pytest.approx(expected, abs=1e-5)
    assert Tx[0] == 0.5
    assert G[0] == pytest.approx((2.0 - 0.5) / 0.5)


def test_prox_grad_fixed_point_at_minimizer():
    # f = 0.5(x-3)^2 + |x| has minimizer 2
    obj = CompositeObjective(Quadratic([[1.0]], [-3.0], 4.5), L1Norm(1.0))
    Tx, G = prox_grad_map(obj, [2.0], 1.0)
    assert Tx[0] == 2.0 and G[0] == 0.0


def test_step_contract():
    obj = CompositeObjective(Quadratic([[4.0]], [0.0]))
    prox_grad_map(obj, [1.0], 0.25)
    with pytest.raises(ContractViolation, match="C=0.3"):
        prox_grad_map(obj, [1.0], 0.3)
    with pytest.raises(ContractViolation):
        prox_grad_map(obj, [1.0], 0.0)
    flat = CompositeObjective(Quadratic([[0.0]], [1.0]))
    prox_grad_map(flat, [1.0], 1e6)


def test_subdiff_distance_smooth():
    a = np.array([1.0, -2.0])
    obj = CompositeObjective(Quadratic(np.eye(2), -a))
    x = np.array([4.0, 2.0])
    d, sur = subdiff_distance(obj, x)
    assert not sur
    assert d == pytest.approx(np.linalg.norm(x - a))


def test_subdiff_distance_l1_origin_and_nonzero():
    obj = CompositeObjective(Quadratic([[1.0]], [0.0]), L1Norm(1.0))
    assert subdiff_distance(obj, [0.0]) == (0.0, False)
    # enumerate subgradients of |.| at 3: only {1}; at 0: [-1, 1]
    subgrads_at_3 = [1.0]
    expected = min(abs(3.0 + s) for s in subgrads_at_3)
    assert subdiff_distance(obj, [3.0])[0] == pytest.approx(expected) == 4.0
    shifted = CompositeObjective(Quadratic([[1.0]], [-3.0]), L1Norm(1.0))
    enum = min(abs(-3.0 + s) for s in np.linspace(-1, 1, 20001))
    assert subdiff_distance(shifted, [0.0])[0] == pytest.approx(enum, abs=1e-9)


def test_subdiff_distance_box():
    obj = CompositeObjective(Quadratic([[1.0]], [-5.0]), Box(-1.0, 1.0))
    # at hi the gradient -4 points outward: optimal
    assert subdiff_distance(obj, [1.0])[0] == 0.0
    assert subdiff_distance(obj, [-1.0])[0] == pytest.approx(6.0)
    assert subdiff_distance(obj, [0.0])[0] == pytest.approx(5.0)
    with pytest.raises(DomainError):
        subdiff_distance(obj, [2.0])


class Huber(Zero):
    """Non-builtin nonsmooth term: falls back to the gradient-mapping surrogate."""

    has_exact_subdiff = False


def test_surrogate_flag():
    obj = CompositeObjective(Quadratic([[2.0]], [-2.0]), Huber())
    d, sur = subdiff_distance(obj, [3.0])
    assert sur
    assert d == pytest.approx(4.0)


def test_make_quadratic_examples():
    f = make_quadratic(np.eye(3), np.zeros(3))(1)
    assert f.lipschitz == 1.0
    assert f.value([1.0, 2.0, 2.0]) == pytest.approx(4.5)
    f1 = make_quadratic([[2000.0]], [0.0])(1)
    assert f1.lipschitz == 2000.0
    assert f1.value([0.5]) == pytest.approx(1000 * 0.25)
    f2 = make_quadratic([[0.002]], [-0.004], const=0.004)(1)
    assert f2.lipschitz == pytest.approx(0.002)
    for x in (-1.0, 2.0, 3.7):
        assert f2.value([x]) == pytest.approx(0.001 * (x - 2) ** 2, abs=1e-15)


def test_make_quadratic_drift_and_validation():
    fam = make_quadratic(np.eye(2), np.zeros(2), drift=lambda t: (t * np.eye(2), np.full(2, t)))
    assert fam(3).lipschitz == 3.0
    assert fam(3) is fam(3)
    with pytest.raises(ConstructionError, match="symmetric"):
        Quadratic([[1.0, 1.0], [0.0, 1.0]], [0.0, 0.0])
    with pytest.raises(ConstructionError, match="indefinite"):
        Quadratic([[1.0, 0.0], [0.0, -1.0]], [0.0, 0.0])
    bad = make_quadratic(np.eye(2), np.zeros(2), drift=lambda t: (-np.eye(2), np.zeros(2)))
    with pytest.raises(ConstructionError):
        bad(1)


def test_builtin_prox_catalog():
    cat = builtin_prox_terms()
    assert set(cat) >= {"zero", "l1", "box"}
    l1 = cat["l1"](1.0)
    for c in (0.1, 1.0, 7.0):
        assert np.all(l1.prox([0.0], c) == 0.0)
    expected = grid_argmin(lambda u: 0.5 * (u - 2) ** 2 + 0.5 * np.abs(u), -3, 3)
    assert l1.prox([2.0], 0.5)[0] == pytest.approx(expected, abs=1e-5) == 1.5
    box = cat["box"](-1.0, 1.0)
    for c in (0.1, 5.0):
        assert box.prox([3.0], c)[0] == 1.0
    assert box.value([3.0]) == INF
    assert cat["zero"]().prox([3.0], 2.0)[0] == 3.0


def test_lipschitz_validator():
    q = Quadratic([[3.0, 1.0], [1.0, 2.0]], [0.0, 0.0])
    assert validate_lipschitz(q, 2) <= q.lipschitz * (1 + 1e-9)
    liar = SmoothTerm(q.value, q.gradient, 1.0)
    with pytest.raises(ConstructionError, match="violated"):
        validate_lipschitz(liar, 2)


def test_stream_shape_checks():
    q = CompositeObjective(Quadratic([[1.0]], [0.0]))
    s = ObjectiveStream.stationary([q, q], T=4)
    assert s.n == 1 and s.N == 2 and len(s) == 4
    with pytest.raises(IndexError):
        s.at(5)
    broken = ObjectiveStream(1, 2, lambda t: [q], T=2)
    with pytest.raises(ConstructionError):
        broken.at(1)


# --- properties over random builtin composites -------------------------------

seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    obj = random_composite(rng)
    x = rng.uniform(-10, 10, obj.smooth.n)
    g = obj.smooth.gradient(x)
    fd = finite_diff_gradient(obj.smooth, x, 1e-5)
    assert np.linalg.norm(fd - g) <= 1e-5 * max(1.0, np.linalg.norm(g))


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_smooth_lipschitz_and_convexity(seed):
    rng = np.random.default_rng(seed)
    f = random_composite(rng).smooth
    x, y = rng.uniform(-10, 10, (2, f.n))
    assert np.linalg.norm(f.gradient(x) - f.gradient(y)) <= f.lipschitz * np.linalg.norm(x - y) * (1 + 1e-9)
    mid = f.value(0.5 * x + 0.5 * y)
    assert mid <= 0.5 * f.value(x) + 0.5 * f.value(y) + 1e-9 * (1 + abs(mid))


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_prox_optimality_and_nonexpansive(seed):
    rng = np.random.default_rng(seed)
    g = random_composite(rng).nonsmooth
    n = 3
    if isinstance(g, Box):
        g = Box(g.lo[0], g.hi[0])
    u, v = rng.uniform(-10, 10, (2, n))
    c = rng.uniform(0.01, 5.0)
    pu, pv = g.prox(u, c), g.prox(v, c)
    assert np.linalg.norm(pu - pv) <= np.linalg.norm(u - v) * (1 + 1e-12)
    # (v - p)/c must be a subgradient of g at p, i.e. d((p - v)/c + dg(p)) = 0
    assert g.subdiff_distance(pv, (pv - v) / c) <= 1e-9
    assert g.in_domain(pv)


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_descent_and_three_point_inequality(seed):
    rng = np.random.default_rng(seed)
    obj = random_composite(rng)
    n = obj.smooth.n
    c = rng.uniform(0.05, 1.0) / obj.lipschitz
    x, y = rng.uniform(-10, 10, (2, n))
    if isinstance(obj.nonsmooth, Box):
        x = np.clip(x, obj.nonsmooth.lo, obj.nonsmooth.hi)
        y = np.clip(y, obj.nonsmooth.lo, obj.nonsmooth.hi)
    Tx, _ = obj.prox_grad(x, c)
    assert obj.value(Tx) <= obj.value(x) + 1e-12 * (1 + abs(obj.value(x)))
    lhs = obj.value(Tx) - obj.value(y)
    rhs = (np.sum((x - y) ** 2) - np.sum((Tx - y) ** 2)) / (2 * c)
    assert lhs <= rhs + 1e-9 * (1 + abs(lhs) + abs(rhs))
