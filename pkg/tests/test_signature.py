import numpy as np
import pytest
from conftest import curve_pairs
from hypothesis import given
from hypothesis import strategies as st

from curvehash import Curve, continuous_frechet_1d
from curvehash.dataset import near_copy
from curvehash.grid import GridShift
from curvehash.index import estimate_collision_probability
from curvehash.signature import (
    ContinuousScheme,
    check_signature,
    compute_signature,
    continuous_hash,
    plan_continuous,
    remove_collinear,
    Signature1D,
    signature_ranges,
    visits_ranges,
)


def C(*xs):
    return Curve(np.array(xs, dtype=float))


class TestSignatureExamples:
    def test_two_vertices(self):
        assert compute_signature(C(0, 5), 2.0).vertices == (0, 5)

    def test_nothing_to_contract(self):
        assert compute_signature(C(0, 3, 1, 8), 0.4).vertices == (0, 3, 1, 8)

    def test_small_oscillation_contracted(self):
        sig = compute_signature(C(0, 3, 2.5, 8), 1.0)
        assert sig.vertices == (0, 8) and sig.indices == (0, 3)

    def test_single_vertex(self):
        assert compute_signature(C(4), 1.0).vertices == (4,)

    def test_constant_curve(self):
        assert compute_signature(C(2, 2, 2), 1.0).indices == (0, 2)

    def test_needs_1d(self):
        with pytest.raises(ValueError):
            compute_signature(Curve([[0, 0], [1, 1]]), 1.0)


def _random_1d(rng, m):
    return Curve(np.cumsum(rng.normal(size=m) * rng.choice([0.01, 1, 100])))


@given(st.integers(0, 2**32 - 1), st.integers(1, 40), st.floats(1e-3, 1e3))
def test_conditions_hold(seed, m, delta):
    P = _random_1d(np.random.default_rng(seed), m)
    sig = compute_signature(P, delta)
    assert all(check_signature(P, sig).values())


@given(st.integers(0, 2**32 - 1), st.integers(2, 40))
def test_nesting_across_deltas(seed, m):
    P = _random_1d(np.random.default_rng(seed), m)
    previous = None
    for delta in np.geomspace(1e-3, 1e3, 7):
        idx = set(compute_signature(P, delta).indices)
        if previous is not None:
            assert idx <= previous
        previous = idx


@given(st.integers(0, 2**32 - 1), st.integers(1, 30), st.floats(0.01, 10), st.floats(0.05, 1.0))
def test_perturbed_curve_visits_ranges(seed, m, delta, frac):
    rng = np.random.default_rng(seed)
    P = _random_1d(rng, m)
    eps = frac * delta
    sig = compute_signature(P, delta)
    Q = near_copy(P, rng, eps)
    assert visits_ranges(Q, signature_ranges(sig, eps))


def test_check_signature_detects_violations():
    P = C(0, 3, 2.5, 8)
    assert all(check_signature(P, compute_signature(P, 0.1)).values())
    wrong = Signature1D("", 1.0, (0, 1, 3), (0.0, 3.0, 8.0))
    assert not check_signature(P, wrong)["non_degenerate"]
    short = Signature1D("", 1.0, (0, 1, 2, 3), (0.0, 3.0, 2.5, 8.0))
    assert not check_signature(P, short)["edge_length"]


class TestRanges:
    def test_example(self):
        sig = compute_signature(C(0, 8), 2.0)
        assert signature_ranges(sig, 1.0) == [(-1, 1), (7, 9)]

    def test_eps_bounds(self):
        sig = compute_signature(C(0, 8), 2.0)
        with pytest.raises(ValueError):
            signature_ranges(sig, 3.0)
        with pytest.raises(ValueError):
            signature_ranges(sig, 0.0)

    def test_order_matters(self):
        assert visits_ranges(C(0, 8), [(-1, 1), (7, 9)])
        assert not visits_ranges(C(8, 0), [(-1, 1), (7, 9)])
        assert not visits_ranges(C(0), [(-1, 1), (-1, 1)])


class TestContinuousHash:
    def test_collinear_snap_removed(self):
        p = plan_continuous(0.5, 1)
        key = continuous_hash(C(0.4, 3.1, 6.2), p, GridShift(2, [0.0]))
        assert [c[0] for c in key.cells] == [0, 3]

    def test_extremum_kept(self):
        p = plan_continuous(0.5, 1)
        key = continuous_hash(C(0.4, 3.1, 0.2), p, GridShift(2, [0.0]))
        assert [c[0] for c in key.cells] == [0, 2, 0]

    def test_single_vertex(self):
        key = continuous_hash(C(5.0), plan_continuous(1, 1), GridShift(4, [1.0]))
        assert len(key) == 1

    @given(st.lists(st.integers(-5, 5), min_size=1, max_size=12))
    def test_remove_collinear_leaves_turning_points(self, xs):
        out = remove_collinear(xs)
        assert out[0] == xs[0] and out[-1] == xs[-1]
        assert all(a != b for a, b in zip(out, out[1:]))
        for a, b, c in zip(out, out[1:], out[2:]):
            assert not (min(a, c) <= b <= max(a, c))
        assert remove_collinear(out) == out

    @pytest.mark.parametrize("r,m,delta,c", [(1, 3, 12, 12), (0.5, 2, 4, 8), (1, 1, 4, 4)])
    def test_planner(self, r, m, delta, c):
        p = plan_continuous(r, m)
        assert (p.delta, p.c, p.d) == (delta, c, 1)


class TestContinuousScheme:
    @given(curve_pairs(d=1, max_m=6), st.floats(0.1, 5), st.integers(0, 2**32 - 1))
    def test_collisions_within_delta(self, pair, delta, seed):
        P, Q = pair
        params = plan_continuous(delta / 4, 1)
        scheme = ContinuousScheme(params)
        if scheme.collisions(P, Q, 100, np.random.default_rng(seed)).any():
            assert continuous_frechet_1d(P, Q) <= params.delta + 1e-7

    def test_near_rate(self, rng):
        params = plan_continuous(1.0, 5)
        scheme = ContinuousScheme(params)
        for _ in range(5):
            P = Curve(rng.uniform(-40, 40, size=(5, 1)))
            Q = near_copy(P, rng, 1.0)
            est = estimate_collision_probability(scheme, P, Q, 4000, rng)
            assert est.estimate >= 0.5 - est.half_width

    def test_batch_agrees_with_scalar(self, rng):
        scheme = ContinuousScheme(plan_continuous(0.5, 4))
        for _ in range(10):
            P = Curve(rng.uniform(-10, 10, size=(int(rng.integers(1, 7)), 1)))
            Q = near_copy(P, rng, 2.0)
            batch = scheme.sample_batch(P, Q, 50, rng)
            fast = scheme.collide_batch(P, Q, batch)
            slow = [a == b for a, b in (scheme.trial_keys(P, Q, batch, k) for k in range(50))]
            assert fast.tolist() == slow
