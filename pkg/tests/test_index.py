import numpy as np
import pytest

from curvehash import Curve, DimensionMismatch, discrete_frechet
from curvehash.constrained import plan_anchored, plan_speed
from curvehash.curves import random_curve
from curvehash.dataset import planted_instance
from curvehash.grid import plan_basic, plan_constant
from curvehash.index import (
    MAX_TABLES,
    IndexConfig,
    IndexTooLarge,
    NNIndex,
    make_scheme,
    meets_lower_bound,
    plan_index,
)
from curvehash.partition import plan_tradeoff
from curvehash.signature import plan_continuous


class TestPlanning:
    def test_basic(self):
        cfg = plan_index(plan_basic(1, 1, 3), 1024)
        assert (cfg.k, cfg.L, cfg.reps, cfg.tables) == (1, 2, 10, 20)

    def test_tradeoff(self):
        cfg = plan_index(plan_tradeoff(1, 1, 4, 2), 100)
        assert cfg.alpha1 == pytest.approx(1 / 64) and cfg.L == 64

    @pytest.mark.parametrize("n", [0, 1])
    def test_tiny_datasets(self, n):
        assert plan_index(plan_basic(1, 1, 3), n).reps == 1

    def test_guard(self):
        with pytest.raises(IndexTooLarge) as info:
            plan_index(plan_constant(1, 1), 10, m=20)
        assert info.value.L > MAX_TABLES
        assert plan_index(plan_constant(1, 1), 10, m=20, check_size=False).L > MAX_TABLES

    def test_config_round_trip(self):
        cfg = plan_index(plan_anchored(1, 2, 2, 4), 50, m=4, seed=9)
        assert IndexConfig.from_dict(cfg.to_dict()) == cfg


def _dataset(rng, n=40, m=5, d=2):
    return [random_curve(rng, int(rng.integers(1, m + 1)), d, scale=50, id=f"c{i}") for i in range(n)]


SCHEMES = [
    lambda: plan_basic(1, 2, 5),
    lambda: plan_tradeoff(1, 2, 5, 2),
    lambda: plan_speed(1, 2, 1, 1),
    lambda: plan_anchored(1, 2, 5, 2),
]


class TestQueries:
    @pytest.mark.parametrize("plan", SCHEMES)
    def test_stored_curve_finds_a_match(self, rng, plan):
        params = plan()
        curves = _dataset(rng)
        index = NNIndex.build(curves, plan_index(params, len(curves), 5, seed=3))
        for c in curves[:10]:
            hit = index.query(c)
            assert hit is not None
            match = next(x for x in curves if x.id == hit)
            assert discrete_frechet(c, match) <= make_scheme(params).certified_radius(c.m, match.m) + 1e-9

    def test_basic_returns_itself_when_alone(self, rng):
        curves = _dataset(rng, n=1)
        index = NNIndex.build(curves, plan_index(plan_basic(1, 2, 5), 1))
        assert index.query(curves[0]) == "c0"
        assert all(len(t) == 1 for t in index.tables)

    def test_far_dataset_returns_none(self, rng):
        params = plan_basic(0.5, 2, 4)
        inst = planted_instance(200, 4, 2, 0.25, params.far_radius, rng)
        far_only = inst.curves[1:]
        index = NNIndex.build(far_only, plan_index(params, len(far_only), seed=1))
        assert index.query(inst.query) is None
        assert index.candidates(inst.query) == []

    def test_planted_found(self, rng):
        params = plan_basic(1, 2, 6)
        inst = planted_instance(300, 6, 2, 0.5, params.far_radius, rng)
        index = NNIndex.build(inst.curves, plan_index(params, 300, seed=2))
        assert index.query(inst.query) == inst.planted_id

    def test_deterministic(self, rng):
        curves = _dataset(rng, n=12)
        cfg = plan_index(plan_tradeoff(1, 2, 5, 2), len(curves), seed=4)
        a, b = NNIndex.build(curves, cfg), NNIndex.build(curves, cfg)
        assert np.array_equal(a.codes, b.codes)

    def test_dimension_checks(self, rng):
        curves = _dataset(rng, d=2)
        index = NNIndex.build(curves, plan_index(plan_basic(1, 2, 5), len(curves)))
        with pytest.raises(DimensionMismatch):
            index.query(Curve([[0.0]]))
        with pytest.raises(DimensionMismatch):
            NNIndex.build(curves, plan_index(plan_basic(1, 3, 5), len(curves)))

    def test_duplicate_ids_rejected(self):
        c = Curve([[0.0]], id="x")
        with pytest.raises(ValueError):
            NNIndex.build([c, c], plan_index(plan_basic(1, 1, 1), 2))

    def test_empty(self):
        index = NNIndex.build([], plan_index(plan_basic(1, 1, 1), 0))
        assert len(index) == 0 and index.query(Curve([[0.0]])) is None


class TestStorage:
    @pytest.mark.parametrize("plan", SCHEMES + [lambda: plan_continuous(1, 5)])
    def test_round_trip(self, tmp_path, rng, plan):
        params = plan()
        curves = _dataset(rng, d=params.d)
        index = NNIndex.build(curves, plan_index(params, len(curves), 5, seed=8))
        index.save(tmp_path / "idx.bin")
        loaded = NNIndex.load(tmp_path / "idx.bin")
        assert loaded.config == index.config and loaded.ids == index.ids
        assert np.array_equal(loaded.codes, index.codes)
        for k, c in enumerate(curves[:5]):
            assert loaded.query(c, k) == index.query(c, k)

    def test_rejects_foreign_file(self, tmp_path):
        (tmp_path / "x").write_bytes(b"not an index")
        with pytest.raises(ValueError):
            NNIndex.load(tmp_path / "x")


def test_meets_lower_bound():
    assert meets_lower_bound(0.25, 0.25, 1000)
    assert not meets_lower_bound(0.0, 0.25, 10_000)
    assert meets_lower_bound(0.01, 0.0, 10)
