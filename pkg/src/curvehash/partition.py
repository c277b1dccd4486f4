"""Trade-off hashing: partition a curve into K blocks, hash each block on
its own shifted grid.

Input curves use a uniformly random partition (cut positions drawn as a
multiset), query curves a deterministic one into blocks of equal size.
Consecutive blocks share one vertex.  Raising K lowers the grid resolution
needed per block, and with it the approximation factor, at the price of a
smaller collision probability for near pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import Curve, DimensionMismatch
from .grid import (
    ArrayKey,
    GridShift,
    HashTable,
    LatticeKey,
    Scheme,
    SchemeParams,
    _positive,
    batch_equal,
    batch_keys,
    group_rows,
    make_scheme_id,
    snap_to_grid,
)

__all__ = [
    "PartitionSpec",
    "sample_partition",
    "query_partition",
    "tradeoff_hash",
    "plan_tradeoff",
    "TradeoffScheme",
    "count_partitions",
]


@dataclass(frozen=True)
class PartitionSpec:
    """Cut positions (1-based) splitting a curve of ``m`` vertices.

    ``overlapping`` partitions (trade-off scheme) have K-1 non-decreasing
    cuts and blocks ``p[s_{i-1}]..p[s_i]`` sharing their end vertex.
    Non-overlapping partitions (constrained schemes) have strictly
    increasing cuts below ``m`` and blocks ``p[s_{i-1}+1]..p[s_i]``.
    """

    m: int
    cuts: tuple[int, ...]
    kind: str = "sampled-input"
    overlapping: bool = True

    def __post_init__(self):
        object.__setattr__(self, "cuts", tuple(int(c) for c in self.cuts))
        cuts = self.cuts
        if self.m < 1:
            raise ValueError("partition of an empty curve")
        if any(c < 1 or c > self.m for c in cuts):
            raise ValueError(f"cuts {cuts} outside [1, {self.m}]")
        if self.overlapping:
            if any(a > b for a, b in zip(cuts, cuts[1:])):
                raise ValueError(f"cuts {cuts} are not monotone")
        elif any(a >= b for a, b in zip(cuts, cuts[1:])) or (cuts and cuts[-1] >= self.m):
            raise ValueError(f"cuts {cuts} are not strictly increasing below m")

    @property
    def K(self) -> int:
        return len(self.cuts) + 1

    def blocks(self) -> list[tuple[int, int]]:
        """Inclusive 1-based ``(first, last)`` vertex index of every block."""
        if self.overlapping:
            starts = (1,) + self.cuts
            ends = self.cuts + (self.m,)
        else:
            starts = (1,) + tuple(c + 1 for c in self.cuts)
            ends = self.cuts + (self.m,)
        return list(zip(starts, ends))

    def code(self) -> int:
        """Integer encoding used to group trials with equal partitions."""
        code = 0
        for c in self.cuts:
            code = code * (self.m + 1) + c
        return code


def sample_partition(m: int, K: int, rng: np.random.Generator) -> PartitionSpec:
    """Cut multiset drawn uniformly among all ``C(m+K-2, K-1)`` of them."""
    if m < 1 or K < 1:
        raise ValueError("m and K must be positive")
    picks = np.sort(rng.choice(m + K - 2, size=K - 1, replace=False)) if K > 1 else np.zeros(0, int)
    return PartitionSpec(m, tuple(picks - np.arange(K - 1) + 1), "sampled-input")


def query_partition(m: int, K: int) -> PartitionSpec:
    if m < 1 or K < 1:
        raise ValueError("m and K must be positive")
    b = math.ceil((m - 1) / K) + 1
    return PartitionSpec(m, tuple(min(1 + i * (b - 1), m) for i in range(1, K)), "deterministic-query")


def count_partitions(m: int, K: int) -> int:
    """Number of distinct block structures induced by all cut multisets."""
    from itertools import combinations_with_replacement

    seen = {tuple(PartitionSpec(m, cuts).blocks())
            for cuts in combinations_with_replacement(range(1, m + 1), K - 1)}
    return len(seen)


def _block_keys(P: Curve, part: PartitionSpec, shifts, scheme_id: int) -> ArrayKey:
    if part.m != P.m:
        raise ValueError(f"partition for m={part.m} applied to a curve with m={P.m}")
    if len(shifts) < part.K:
        raise ValueError(f"{part.K} blocks but only {len(shifts)} shifts")
    keys = []
    for (a, b), shift in zip(part.blocks(), shifts):
        if shift.d != P.d:
            raise DimensionMismatch(f"shift has dimension {shift.d}, curve {P.d}")
        keys.append(snap_to_grid(Curve(P.points[a - 1:b]), shift, scheme_id))
    return ArrayKey(tuple(keys), scheme_id)


def tradeoff_hash(P: Curve, params: SchemeParams, shifts, part: PartitionSpec,
                  scheme_id: int | None = None) -> ArrayKey:
    """Basic hash of every block, block ``i`` on the grid shifted by ``t_i``.

    The result keeps block boundaries, so collisions always align blocks
    index by index.
    """
    if len(shifts) != part.K:
        raise ValueError(f"need {part.K} shifts, got {len(shifts)}")
    shifts = [GridShift(params.delta, s.t) for s in shifts]
    if scheme_id is None:
        scheme_id = make_scheme_id("tradeoff", float(params.delta), np.stack([s.t for s in shifts]))
    return _block_keys(P, part, shifts, scheme_id)


def plan_tradeoff(r: float, d: int, M: int, K: int) -> SchemeParams:
    _positive(r=r, d=d, M=M, K=K)
    blocks = math.ceil(M / K)
    return SchemeParams("tradeoff", r, 4 * d**1.5 * blocks, 4 * d * r * blocks, d, m_bound=M, K=K)


class TradeoffTable(HashTable):
    def __init__(self, params, seed, index=0):
        super().__init__(params, seed, index)
        rng = np.random.default_rng(self.seed)
        self.shifts = [GridShift(params.delta, t) for t in rng.uniform(0, params.delta, (params.K, params.d))]

    def hash_input(self, P, rng):
        return tradeoff_hash(P, self.params, self.shifts, sample_partition(P.m, self.params.K, rng), self.scheme_id)

    def hash_query(self, Q, rng=None):
        return tradeoff_hash(Q, self.params, self.shifts, query_partition(Q.m, self.params.K), self.scheme_id)


class TradeoffScheme(Scheme):
    variant = "tradeoff"
    table_class = TradeoffTable

    def alpha1(self, m1, m2):
        K = self.params.K
        return 0.25**K * (1.0 / max(m1, m2)) ** (K - 1)

    def sample_batch(self, P, Q, n, rng):
        K, d = self.params.K, self.params.d
        if K > 1:
            picks = np.sort(np.argsort(rng.random((n, P.m + K - 2)), axis=1)[:, :K - 1], axis=1)
            cuts = picks - np.arange(K - 1)[None, :] + 1
        else:
            cuts = np.zeros((n, 0), dtype=np.int64)
        return {"shift": rng.uniform(0, self.params.delta, (n, K, d)), "cuts": cuts}

    def collide_batch(self, P, Q, batch):
        shift, cuts = batch["shift"], batch["cuts"]
        n = len(shift)
        q_blocks = query_partition(Q.m, self.params.K).blocks()
        out = np.zeros(n, dtype=bool)
        if cuts.shape[1] == 0:
            groups = [(np.zeros(0, int), np.arange(n))]
        else:
            groups = group_rows(cuts)
        for row, idx in groups:
            p_blocks = PartitionSpec(P.m, tuple(row)).blocks()
            out[idx] = _blocks_collide(P, Q, p_blocks, q_blocks, shift[idx], self.params.delta)
        return out

    def trial_keys(self, P, Q, batch, k):
        shifts = [GridShift(self.params.delta, t) for t in batch["shift"][k]]
        part = PartitionSpec(P.m, tuple(batch["cuts"][k]))
        return (tradeoff_hash(P, self.params, shifts, part),
                tradeoff_hash(Q, self.params, shifts, query_partition(Q.m, self.params.K)))


def _blocks_collide(P: Curve, Q: Curve, p_blocks, q_blocks, shift: np.ndarray, delta: float) -> np.ndarray:
    """Blockwise key equality for trials sharing one pair of partitions;
    ``shift`` is (n, >=K, d) and block ``i`` uses ``shift[:, i]``."""
    n = len(shift)
    if len(p_blocks) != len(q_blocks):
        return np.zeros(n, dtype=bool)
    ok = np.ones(n, dtype=bool)
    for i, ((a, b), (c, e)) in enumerate(zip(p_blocks, q_blocks)):
        off = -shift[:, i][:, None, :]
        kp, lp = batch_keys(P.points[a - 1:b], off, delta)
        kq, lq = batch_keys(Q.points[c - 1:e], off, delta)
        ok &= batch_equal(kp, lp, kq, lq)
    return ok
