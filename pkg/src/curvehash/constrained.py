"""Hashing for anchored and speed-constrained distances.

Both schemes split a curve into consecutive, non-overlapping blocks and hash
block ``i`` on a grid shifted by ``t_i``.  The key is the array of block
keys, so two curves collide only if they were cut into the same number of
blocks and agree block by block; this is what enforces the alignment
constraint.

* anchored: fixed cuts every ``ell`` vertices, each pushed right by a
  uniform draw from ``[1, w/2]``, then overlapping cuts are dropped;
* speed: block lengths drawn uniformly from ``[1, w*ell]``.

Input and query curves draw independent cut noise and share the shifts.
The guarantees are bi-criteria: a collision certifies a small distance only
under a looser constraint (``w + 2(ell-1)`` anchored, ``w*ell`` speed).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .curves import Curve, DistanceKind
from .grid import (
    ArrayKey,
    GridShift,
    HashTable,
    Scheme,
    SchemeParams,
    _positive,
    group_rows,
    make_scheme_id,
)
from .partition import PartitionSpec, _block_keys, _blocks_collide

__all__ = [
    "ArrayKey",
    "CutNoise",
    "sample_noise",
    "anchored_partition",
    "speed_partition",
    "constrained_hash",
    "plan_anchored",
    "plan_speed",
    "plan_anchored_dtw",
    "plan_speed_dtw",
    "AnchoredScheme",
    "SpeedScheme",
]


@dataclass(frozen=True, eq=False)
class CutNoise:
    """Integer draws perturbing the partition of one curve."""

    variant: str
    w: int
    ell: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.int64).reshape(-1)
        if self.variant == "anchored":
            if self.w < 2 or self.w % 2:
                raise ValueError(f"anchored width must be even and >= 2, got {self.w}")
        elif self.variant != "speed":
            raise ValueError(f"unknown noise variant {self.variant!r}")
        if self.w < 1 or self.ell < 1:
            raise ValueError("w and ell must be positive")
        if np.any(vals < 1) or np.any(vals > self.high):
            raise ValueError(f"noise values must lie in [1, {self.high}]")
        object.__setattr__(self, "values", vals)

    @property
    def high(self) -> int:
        return self.w // 2 if self.variant == "anchored" else self.w * self.ell


def sample_noise(variant: str, m: int, w: int, ell: int, rng: np.random.Generator) -> CutNoise:
    high = w // 2 if variant == "anchored" else w * ell
    return CutNoise(variant, w, ell, rng.integers(1, high + 1, size=max(m, 1)))


def anchored_partition(m: int, w: int, ell: int, noise: CutNoise) -> PartitionSpec:
    """Cuts ``min(i*ell + noise_i, m)`` for ``i < ceil(m/ell)``, dropping
    any cut not beyond the previous one and any cut at ``m``."""
    if w < 2 or w % 2 or ell < 1:
        raise ValueError("need even w >= 2 and ell >= 1")
    n_cuts = math.ceil(m / ell) - 1
    if len(noise.values) < n_cuts:
        raise ValueError(f"need {n_cuts} noise values, got {len(noise.values)}")
    cuts = []
    for i in range(1, n_cuts + 1):
        s = min(i * ell + int(noise.values[i - 1]), m)
        if s < m and (not cuts or s > cuts[-1]):
            cuts.append(s)
    return PartitionSpec(m, tuple(cuts), "anchored", overlapping=False)


def speed_partition(m: int, w: int, ell: int, noise: CutNoise) -> PartitionSpec:
    """Consecutive block lengths taken from ``noise``; the last block is
    truncated at ``m``."""
    if w < 1 or ell < 1:
        raise ValueError("w and ell must be positive")
    cuts = []
    s = 0
    for length in noise.values:
        s += int(length)
        if s >= m:
            break
        cuts.append(s)
    else:
        if s < m:
            raise ValueError(f"noise covers only {s} of {m} vertices")
    return PartitionSpec(m, tuple(cuts), "speed", overlapping=False)


def _partition(variant: str, m: int, params: SchemeParams, noise: CutNoise) -> PartitionSpec:
    if variant == "anchored":
        return anchored_partition(m, params.w, params.ell, noise)
    return speed_partition(m, params.w, params.ell, noise)


def constrained_hash(P: Curve, params: SchemeParams, shifts, noise: CutNoise,
                     scheme_id: int | None = None) -> ArrayKey:
    """Array of basic hashes of the blocks of ``P``; block ``i`` uses ``shifts[i]``."""
    if params.variant not in ("anchored", "speed"):
        raise ValueError(f"constrained hashing needs an anchored or speed scheme, got {params.variant!r}")
    if noise.variant != params.variant:
        raise ValueError(f"{noise.variant} noise used with a {params.variant} scheme")
    part = _partition(params.variant, P.m, params, noise)
    shifts = [GridShift(params.delta, s.t) for s in shifts[:part.K]]
    if scheme_id is None:
        scheme_id = make_scheme_id(params.variant, float(params.delta), np.stack([s.t for s in shifts]))
    return _block_keys(P, part, shifts, scheme_id)


# ------------------------------------------------------------ planners


def _check_w(variant, w):
    if variant == "anchored" and (w is None or w < 2 or w % 2):
        raise ValueError(f"anchored width must be even and >= 2, got {w}")
    _positive(w=w)


def plan_anchored(r: float, d: int, ell: int, w: int = 2) -> SchemeParams:
    _positive(r=r, d=d, ell=ell)
    _check_w("anchored", w)
    return SchemeParams("anchored", r, 4 * d**1.5 * ell, 4 * d * r * ell, d, w=w, ell=ell)


def plan_speed(r: float, d: int, ell: int, w: int = 1) -> SchemeParams:
    _positive(r=r, d=d, ell=ell)
    _check_w("speed", w)
    return SchemeParams("speed", r, 4 * d**1.5 * ell, 4 * d * r * ell, d, w=w, ell=ell)


def plan_anchored_dtw(r: float, d: int, m1: int, m2: int, w: int = 2, ell: int = 1) -> SchemeParams:
    _positive(r=r, d=d, m1=m1, m2=m2, ell=ell)
    _check_w("anchored", w)
    return SchemeParams("anchored", r, 4 * d**1.5 * (m1 + m2), 2 * d * r, d,
                        m_bound=max(m1, m2), w=w, ell=ell, metric="dtw")


def plan_speed_dtw(r: float, d: int, m1: int, m2: int, w: int = 1, ell: int = 1) -> SchemeParams:
    _positive(r=r, d=d, m1=m1, m2=m2, ell=ell)
    _check_w("speed", w)
    return SchemeParams("speed", r, 4 * d**1.5 * (m1 + m2), 2 * d * r, d,
                        m_bound=max(m1, m2), w=w, ell=ell, metric="dtw")


# -------------------------------------------------------------- schemes


class ConstrainedTable(HashTable):
    """Shift sequence grows on demand; shift ``i`` is always the ``i``-th
    draw of the table generator, so keys do not depend on call order."""

    def __init__(self, params, seed, index=0):
        super().__init__(params, seed, index)
        self._rng = np.random.default_rng(self.seed)
        self._lock = threading.Lock()
        self._shifts: list[GridShift] = []
        self.shifts(params.m_bound or 1)

    def shifts(self, k: int) -> list[GridShift]:
        with self._lock:
            while len(self._shifts) < k:
                self._shifts.append(GridShift(self.params.delta, self._rng.uniform(0, self.params.delta, self.params.d)))
            return self._shifts[:k]

    def hash_input(self, P, rng):
        noise = sample_noise(self.params.variant, P.m, self.params.w, self.params.ell, rng)
        return constrained_hash(P, self.params, self.shifts(P.m), noise, self.scheme_id)


class _ConstrainedScheme(Scheme):
    table_class = ConstrainedTable

    def _high(self) -> int:
        raise NotImplementedError

    def _cut_mask(self, m: int, noise: np.ndarray) -> np.ndarray:
        """Boolean (n, m) with column ``s-1`` set when ``s`` is a cut."""
        raise NotImplementedError

    def sample_batch(self, P, Q, n, rng):
        h = self._high()
        k = max(P.m, Q.m)
        return {"noise_p": rng.integers(1, h + 1, size=(n, P.m)),
                "noise_q": rng.integers(1, h + 1, size=(n, Q.m)),
                "shift": rng.uniform(0, self.params.delta, (n, k, self.params.d))}

    def collide_batch(self, P, Q, batch):
        mp = self._cut_mask(P.m, batch["noise_p"])
        mq = self._cut_mask(Q.m, batch["noise_q"])
        n = len(mp)
        out = np.zeros(n, dtype=bool)
        live = np.flatnonzero(mp.sum(axis=1) == mq.sum(axis=1))
        if len(live) == 0:
            return out
        codes = np.concatenate([mp[live], mq[live]], axis=1).astype(np.uint8)
        for row, idx in group_rows(codes):
            cp = tuple(np.flatnonzero(row[:P.m]) + 1)
            cq = tuple(np.flatnonzero(row[P.m:]) + 1)
            pb = PartitionSpec(P.m, cp, overlapping=False).blocks()
            qb = PartitionSpec(Q.m, cq, overlapping=False).blocks()
            sel = live[idx]
            out[sel] = _blocks_collide(P, Q, pb, qb, batch["shift"][sel], self.params.delta)
        return out

    def trial_keys(self, P, Q, batch, k):
        p = self.params
        shifts = [GridShift(p.delta, t) for t in batch["shift"][k]]
        np_ = CutNoise(p.variant, p.w, p.ell, batch["noise_p"][k])
        nq = CutNoise(p.variant, p.w, p.ell, batch["noise_q"][k])
        return constrained_hash(P, p, shifts, np_), constrained_hash(Q, p, shifts, nq)


    def certified_radius(self, m1, m2):
        base = math.sqrt(self.params.d) * self.params.delta
        # per-block DTW bounds add up over blocks of total length m1 + m2
        return 2 * (m1 + m2) * base if self.params.metric == "dtw" else base


class AnchoredScheme(_ConstrainedScheme):
    variant = "anchored"

    def _high(self):
        return self.params.w // 2

    def alpha1(self, m1, m2):
        p = self.params
        return (1 / (math.sqrt(2) * p.w)) ** (2 * min(m1, m2) / p.ell)

    def verify_kind(self):
        p = self.params
        return DistanceKind.make(p.metric, "anchored", p.w + 2 * (p.ell - 1))

    def _cut_mask(self, m, noise):
        ell = self.params.ell
        n_cuts = math.ceil(m / ell) - 1
        mask = np.zeros((len(noise), m), dtype=bool)
        if n_cuts <= 0:
            return mask
        s = np.minimum(ell * np.arange(1, n_cuts + 1)[None, :] + noise[:, :n_cuts], m)
        prev = np.concatenate([np.zeros((len(s), 1), dtype=s.dtype), np.maximum.accumulate(s, axis=1)[:, :-1]], axis=1)
        keep = (s > prev) & (s < m)
        rows, cols = np.nonzero(keep)
        mask[rows, s[rows, cols] - 1] = True
        return mask


class SpeedScheme(_ConstrainedScheme):
    variant = "speed"

    def _high(self):
        return self.params.w * self.params.ell

    def alpha1(self, m1, m2):
        p = self.params
        return (1 / (math.sqrt(2) * p.w * p.ell)) ** (2 * min(m1, m2) / p.ell)

    def verify_kind(self):
        p = self.params
        return DistanceKind.make(p.metric, "speed", p.w * p.ell)

    def _cut_mask(self, m, noise):
        s = np.cumsum(noise, axis=1)
        mask = np.zeros((len(noise), m), dtype=bool)
        rows, cols = np.nonzero(s < m)
        mask[rows, s[rows, cols] - 1] = True
        return mask

