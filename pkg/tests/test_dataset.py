import io

import numpy as np
import pytest

from curvehash import DistanceKind, distance
from curvehash.curves import random_curve
from curvehash.dataset import (
    DatasetError,
    GenerationError,
    dumps_curve,
    near_copy,
    parse_jsonl,
    planted_instance,
    write_jsonl,
)


def test_round_trip(rng):
    curves = [random_curve(rng, 3, 2, id=f"k{i}") for i in range(4)]
    buf = io.StringIO()
    write_jsonl(curves, buf)
    back = parse_jsonl(buf.getvalue().splitlines())
    assert [c.id for c in back] == [c.id for c in curves]
    assert all(np.array_equal(a.points, b.points) for a, b in zip(curves, back))


def test_blank_lines_skipped():
    assert len(parse_jsonl(['{"id": "a", "points": [[1]]}', "", "  "])) == 1


@pytest.mark.parametrize("lines,line,msg", [
    (["{"], 1, "invalid JSON"),
    (["[1, 2]"], 1, "object"),
    (['{"id": 3, "points": [[1]]}'], 1, "id"),
    (['{"id": "a", "points": []}'], 1, "points"),
    (['{"id": "a", "points": [[1], [1, 2]]}'], 1, "dimensions"),
    (['{"id": "a", "points": [[true]]}'], 1, "numbers"),
    (['{"id": "a", "points": [[1e999]]}'], 1, "finite"),
    (['{"id": "a", "points": [[1]]}', '{"id": "b", "points": [[1, 2]]}'], 2, "dimension"),
    (['{"id": "a", "points": [[1]]}', '{"id": "a", "points": [[2]]}'], 2, "duplicate"),
])
def test_malformed(lines, line, msg):
    with pytest.raises(DatasetError, match=msg) as info:
        parse_jsonl(lines)
    assert info.value.line == line and str(info.value).startswith(f"line {line}:")


def test_near_copy_is_near(rng):
    for _ in range(50):
        P = random_curve(rng, 6, 3)
        Q = near_copy(P, rng, 0.5)
        assert np.all(np.linalg.norm(P.points - Q.points, axis=1) < 0.5)


class TestPlanted:
    def test_structure(self, rng):
        inst = planted_instance(50, 5, 2, 0.5, 3.0, rng)
        assert inst.curves[0].id == inst.planted_id == "planted"
        assert len({c.id for c in inst.curves}) == 50
        assert distance(inst.query, inst.curves[0], "frechet") < 0.5
        assert all(distance(inst.query, c, "frechet") > 3.0 for c in inst.curves[1:])

    def test_single_curve(self, rng):
        assert [c.id for c in planted_instance(1, 4, 1, 0.5, 1.0, rng).curves] == ["planted"]

    def test_dtw_kind(self, rng):
        inst = planted_instance(20, 4, 1, 0.5, 2.0, rng, kind=DistanceKind("dtw"))
        assert distance(inst.query, inst.curves[0], "dtw") < 0.5

    def test_deterministic(self):
        a = planted_instance(20, 4, 2, 0.5, 2.0, np.random.default_rng(1))
        b = planted_instance(20, 4, 2, 0.5, 2.0, np.random.default_rng(1))
        assert [dumps_curve(c) for c in a.curves] == [dumps_curve(c) for c in b.curves]

    def test_gives_up(self, rng):
        with pytest.raises(GenerationError):
            planted_instance(5, 3, 1, 0.5, 100.0, rng, extent=1.0, max_rejections=100)

    def test_bad_radii(self, rng):
        with pytest.raises(ValueError):
            planted_instance(5, 3, 1, 2.0, 1.0, rng)
