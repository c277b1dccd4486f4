"""JSON-lines curve datasets and planted near-neighbour workloads."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from .curves import Curve, DistanceKind, distance, random_curve

__all__ = ["DatasetError", "GenerationError", "PlantedInstance", "read_jsonl", "parse_jsonl",
           "write_jsonl", "dumps_curve", "planted_instance", "near_copy"]


class DatasetError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class GenerationError(RuntimeError):
    pass


def _parse_record(obj, lineno: int) -> Curve:
    if not isinstance(obj, dict):
        raise DatasetError("record must be a JSON object", lineno)
    cid, pts = obj.get("id"), obj.get("points")
    if not isinstance(cid, str):
        raise DatasetError("'id' must be a string", lineno)
    if not isinstance(pts, list) or not pts:
        raise DatasetError("'points' must be a non-empty list of vertices", lineno)
    if not all(isinstance(p, list) and p for p in pts):
        raise DatasetError("every vertex must be a non-empty list of coordinates", lineno)
    if len({len(p) for p in pts}) != 1:
        raise DatasetError("vertices have different dimensions", lineno)
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for p in pts for x in p):
        raise DatasetError("coordinates must be numbers", lineno)
    arr = np.asarray(pts, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DatasetError("coordinates must be finite", lineno)
    return Curve(arr, id=cid)


def parse_jsonl(lines: Iterable[str]) -> list[Curve]:
    curves: list[Curve] = []
    seen: set[str] = set()
    d = None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"invalid JSON ({exc.msg})", lineno) from None
        c = _parse_record(obj, lineno)
        if d is None:
            d = c.d
        elif c.d != d:
            raise DatasetError(f"dimension {c.d} differs from dimension {d} of earlier records", lineno)
        if c.id in seen:
            raise DatasetError(f"duplicate id {c.id!r}", lineno)
        seen.add(c.id)
        curves.append(c)
    return curves


def read_jsonl(path) -> list[Curve]:
    with open(path, encoding="utf-8") as f:
        return parse_jsonl(f)


def dumps_curve(c: Curve) -> str:
    return json.dumps({"id": c.id, "points": c.points.tolist()})


def write_jsonl(curves: Iterable[Curve], out: IO[str]) -> None:
    for c in curves:
        out.write(dumps_curve(c) + "\n")


# -------------------------------------------------------------- workloads


@dataclass
class PlantedInstance:
    query: Curve
    curves: list[Curve]
    planted_id: str


def near_copy(P: Curve, rng: np.random.Generator, radius: float, id: str = "") -> Curve:
    """Copy of ``P`` with each vertex moved by strictly less than ``radius``
    (Euclidean), so its discrete Fréchet distance to ``P`` is below ``radius``."""
    direction = rng.normal(size=P.points.shape)
    direction /= np.maximum(np.linalg.norm(direction, axis=1, keepdims=True), 1e-300)
    length = rng.uniform(0, 0.99 * radius, size=(P.m, 1))
    return Curve(P.points + direction * length, id=id)


def planted_instance(n: int, m: int, d: int, planted_r: float, far_cr: float, rng: np.random.Generator,
                     kind: DistanceKind | str = "frechet", extent: float | None = None,
                     max_rejections: int = 10**6) -> PlantedInstance:
    """One curve within ``planted_r`` of a random query, ``n - 1`` curves
    verified by exact distance computation to lie beyond ``far_cr``.

    Curves have i.i.d. uniform vertices in a box of side ``extent``
    (default ``4 * far_cr``).  The planted curve is the first record.
    """
    if n < 1:
        raise ValueError("need at least the planted curve")
    if not far_cr > planted_r > 0:
        raise ValueError("need far_cr > planted_r > 0")
    extent = 4 * far_cr if extent is None else extent
    query = random_curve(rng, m, d, scale=extent / 2, id="query")
    width = math.ceil(math.log10(max(n, 2)))
    rejected = 0
    while True:
        planted = near_copy(query, rng, planted_r, id="planted")
        if distance(query, planted, kind) < planted_r:
            break
        rejected += 1
        if rejected > max_rejections:
            raise GenerationError("could not place the planted curve")
    curves = [planted]
    while len(curves) < n:
        c = random_curve(rng, m, d, scale=extent / 2, id=f"c{len(curves):0{width}d}")
        if distance(query, c, kind) > far_cr:
            curves.append(c)
            continue
        rejected += 1
        if rejected > max_rejections:
            raise GenerationError(f"gave up after {max_rejections} rejected far curves")
    return PlantedInstance(query, curves, planted.id)
