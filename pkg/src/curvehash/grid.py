"""Randomly shifted grid hashing and the perturbation (constant factor) scheme.

A hash value is a `LatticeKey`: the grid-cell indices of the snapped
vertices with consecutive duplicates removed.  Cell indices are integers,
so keys compare exactly.

Besides the per-curve functions, this module holds the `Scheme` base class
shared by every hash family in the package.  A scheme knows how to

* build the hash functions of one index table (`Scheme.table`), and
* estimate collision rates in bulk (`Scheme.collisions`), using numpy
  kernels over pre-sampled randomness where a scheme provides them.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, fields
from typing import ClassVar

import numpy as np

from .curves import Curve, DimensionMismatch, DistanceKind

__all__ = [
    "GridShift",
    "PerturbationSeq",
    "LatticeKey",
    "ArrayKey",
    "SchemeParams",
    "Scheme",
    "BasicScheme",
    "ConstantScheme",
    "snap_to_grid",
    "basic_hash",
    "constant_hash",
    "plan_basic",
    "plan_basic_dtw",
    "plan_constant",
    "sample_shift",
    "sample_perturbation",
    "make_scheme_id",
    "fingerprint",
]

PAD = np.iinfo(np.int64).min


def make_scheme_id(*parts) -> int:
    """64-bit identifier mixing the given values (floats, ints, str, arrays)."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        if isinstance(part, np.ndarray):
            h.update(np.ascontiguousarray(part, dtype=np.float64).tobytes())
        elif isinstance(part, float):
            h.update(struct.pack("<d", part))
        elif isinstance(part, (int, np.integer)):
            h.update(int(part).to_bytes(16, "little", signed=True))
        else:
            h.update(str(part).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True, eq=False)
class GridShift:
    delta: float
    t: np.ndarray

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.t, dtype=np.float64))
        if self.delta <= 0:
            raise ValueError("grid resolution must be positive")
        if np.any(t < 0) or np.any(t >= self.delta):
            raise ValueError("shift coordinates must lie in [0, delta)")
        object.__setattr__(self, "t", t)

    @property
    def d(self) -> int:
        return self.t.shape[0]


@dataclass(frozen=True, eq=False)
class PerturbationSeq:
    delta: float
    offsets: np.ndarray

    def __post_init__(self):
        off = np.asarray(self.offsets, dtype=np.float64)
        if off.ndim == 1:
            off = off[:, None]
        half = self.delta / 2
        if np.any(off < -half) or np.any(off >= half):
            raise ValueError("perturbations must lie in [-delta/2, delta/2)")
        object.__setattr__(self, "offsets", off)


@dataclass(frozen=True)
class LatticeKey:
    """Deduplicated sequence of lattice cells, tagged with its scheme."""

    cells: tuple[tuple[int, ...], ...]
    scheme_id: int = 0

    def __post_init__(self):
        for a, b in zip(self.cells, self.cells[1:]):
            if a == b:
                raise ValueError("lattice key contains consecutive duplicates")

    def __len__(self):
        return len(self.cells)

    @classmethod
    def from_array(cls, cells: np.ndarray, scheme_id: int = 0) -> LatticeKey:
        return cls(tuple(tuple(int(x) for x in row) for row in _dedup_rows(cells)), scheme_id)


@dataclass(frozen=True)
class ArrayKey:
    """Ordered array of per-block keys.

    Two array keys are equal only if they have the same number of blocks
    and agree block by block; ``((a, b), (c))`` and ``((a), (b, c))`` differ
    although their concatenations coincide.
    """

    blocks: tuple[LatticeKey, ...]
    scheme_id: int = 0

    def __len__(self):
        return len(self.blocks)

    def flat(self) -> tuple[tuple[int, ...], ...]:
        return tuple(cell for block in self.blocks for cell in block.cells)


def _digest_blocks(scheme_id: int, tag: bytes, blocks) -> int:
    h = hashlib.blake2b(digest_size=8)
    h.update(struct.pack("<Q", scheme_id & (2**64 - 1)))
    h.update(tag)
    h.update(struct.pack("<I", len(blocks)))
    for cells in blocks:
        h.update(struct.pack("<II", *cells.shape))
        h.update(np.ascontiguousarray(cells, dtype="<i8").tobytes())
    return int.from_bytes(h.digest(), "little")


def _cell_array(key: LatticeKey) -> np.ndarray:
    return np.asarray(key.cells, dtype=np.int64).reshape(len(key.cells), -1)


def fingerprint(key: LatticeKey | ArrayKey) -> int:
    """64-bit digest of a key, block structure and scheme id included.

    Equal keys give equal fingerprints; distinct keys share one with
    probability about 2**-64.
    """
    if isinstance(key, ArrayKey):
        return _digest_blocks(key.scheme_id, b"A", [_cell_array(b) for b in key.blocks])
    return _digest_blocks(key.scheme_id, b"L", [_cell_array(key)])


def _dedup_rows(cells: np.ndarray) -> np.ndarray:
    if len(cells) <= 1:
        return cells
    keep = np.ones(len(cells), dtype=bool)
    keep[1:] = np.any(cells[1:] != cells[:-1], axis=1)
    return cells[keep]


@dataclass(frozen=True)
class SchemeParams:
    """Parameters of one hash family, as bound by a planner.

    ``c * r`` is the distance beyond which the family never collides;
    ``m_bound`` is the curve length the bounds were planned for.
    """

    variant: str
    r: float
    c: float
    delta: float
    d: int
    m_bound: int | None = None
    K: int | None = None
    w: int | None = None
    ell: int | None = None
    metric: str = "frechet"

    VARIANTS: ClassVar[tuple[str, ...]] = (
        "basic", "constant", "tradeoff", "anchored", "speed", "continuous1d")

    def __post_init__(self):
        if self.variant not in self.VARIANTS:
            raise ValueError(f"unknown scheme variant {self.variant!r}")
        if min(self.r, self.c, self.delta) <= 0 or self.d < 1:
            raise ValueError("scheme parameters must be positive")

    @property
    def far_radius(self) -> float:
        return self.c * self.r

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> SchemeParams:
        return cls(**data)


def _positive(**kwargs):
    for name, v in kwargs.items():
        if v is None or v <= 0:
            raise ValueError(f"{name} must be positive, got {v}")


def plan_basic(r: float, d: int, m: int) -> SchemeParams:
    _positive(r=r, d=d, m=m)
    return SchemeParams("basic", r, 4 * d**1.5 * m, 4 * d * m * r, d, m_bound=m)


def plan_basic_dtw(r: float, d: int, M: int) -> SchemeParams:
    _positive(r=r, d=d, M=M)
    return SchemeParams("basic", r, 4 * d**1.5 * M, 2 * d * r, d, m_bound=M, metric="dtw")


def plan_constant(r: float, d: int, m_bound: int | None = None) -> SchemeParams:
    _positive(r=r, d=d)
    return SchemeParams("constant", r, 4 * d**1.5, 4 * d * r, d, m_bound=m_bound)


def sample_shift(delta: float, d: int, rng: np.random.Generator) -> GridShift:
    return GridShift(delta, rng.uniform(0.0, delta, size=d))


def sample_perturbation(delta: float, m: int, d: int, rng: np.random.Generator) -> PerturbationSeq:
    return PerturbationSeq(delta, rng.uniform(-delta / 2, delta / 2, size=(m, d)))


def _cells(points: np.ndarray, offset, delta: float) -> np.ndarray:
    # nearest grid point; exact half-way ties round up
    return np.floor((points + offset) / delta + 0.5).astype(np.int64)


def snap_to_grid(P: Curve, shift: GridShift, scheme_id: int = 0) -> LatticeKey:
    if shift.d != P.d:
        raise DimensionMismatch(f"shift has dimension {shift.d}, curve {P.d}")
    return LatticeKey.from_array(_cells(P.points, -shift.t, shift.delta), scheme_id)


def basic_hash(P: Curve, params: SchemeParams, shift: GridShift, scheme_id: int | None = None) -> LatticeKey:
    if scheme_id is None:
        scheme_id = make_scheme_id("basic", float(shift.delta), shift.t)
    return snap_to_grid(P, GridShift(params.delta, shift.t), scheme_id)


def constant_hash(P: Curve, params: SchemeParams, pert: PerturbationSeq,
                  scheme_id: int | None = None) -> LatticeKey:
    """Perturb each vertex independently, snap to the unshifted grid."""
    if pert.offsets.shape != P.points.shape:
        raise ValueError(f"perturbation shape {pert.offsets.shape} does not match curve {P.points.shape}")
    if scheme_id is None:
        scheme_id = make_scheme_id("constant", float(params.delta))
    return LatticeKey.from_array(_cells(P.points, pert.offsets, params.delta), scheme_id)


# ------------------------------------------------------- batch kernels


def batch_cells(points: np.ndarray, offsets: np.ndarray, delta: float) -> np.ndarray:
    """Snap ``points`` (m, d) under ``offsets`` broadcastable to (T, m, d)."""
    return _cells(points[None, :, :], offsets, delta)


def batch_keep(cells: np.ndarray) -> np.ndarray:
    """Mask of rows surviving consecutive-duplicate removal, per trial."""
    keep = np.ones(cells.shape[:2], dtype=bool)
    keep[:, 1:] = np.any(cells[:, 1:] != cells[:, :-1], axis=2)
    return keep


def batch_compact(cells: np.ndarray, keep: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Move kept rows to the front of every trial, padding the rest."""
    order = np.argsort(~keep, axis=1, kind="stable")
    out = np.take_along_axis(cells, order[:, :, None], axis=1)
    lengths = keep.sum(axis=1)
    out[np.arange(cells.shape[1])[None, :] >= lengths[:, None]] = PAD
    return out, lengths


def batch_keys(points: np.ndarray, offsets: np.ndarray, delta: float) -> tuple[np.ndarray, np.ndarray]:
    cells = batch_cells(points, offsets, delta)
    return batch_compact(cells, batch_keep(cells))


def batch_equal(a: np.ndarray, la: np.ndarray, b: np.ndarray, lb: np.ndarray) -> np.ndarray:
    width = max(a.shape[1], b.shape[1])
    a = _pad_to(a, width)
    b = _pad_to(b, width)
    return (la == lb) & np.all(a == b, axis=(1, 2))


def group_rows(codes: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Group trial indices by identical rows of ``codes`` (n, k)."""
    if len(codes) == 0:
        return []
    uniq, inv = np.unique(codes, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    order = np.argsort(inv, kind="stable")
    bounds = np.cumsum(np.bincount(inv, minlength=len(uniq)))[:-1]
    return list(zip(uniq, np.split(order, bounds)))


def _pad_to(x: np.ndarray, width: int) -> np.ndarray:
    if x.shape[1] == width:
        return x
    pad = np.full((x.shape[0], width - x.shape[1], x.shape[2]), PAD, dtype=x.dtype)
    return np.concatenate([x, pad], axis=1)


# -------------------------------------------------------------- schemes


class HashTable:
    """The pair of hash functions (input side, query side) of one table.

    Shared randomness is fixed at construction; per-curve randomness
    (perturbations, partitions, cut noise) is drawn from the ``rng`` passed
    to each call.
    """

    def __init__(self, params: SchemeParams, seed: int, index: int = 0):
        self.params = params
        self.seed = int(seed)
        self.scheme_id = make_scheme_id(params.variant, float(params.delta), self.seed, index)

    def hash_input(self, P: Curve, rng: np.random.Generator):
        raise NotImplementedError

    def hash_query(self, Q: Curve, rng: np.random.Generator):
        return self.hash_input(Q, rng)

    def input_fingerprints(self, curves: list[Curve], rng_for) -> np.ndarray:
        """Fingerprints of the input-side keys; ``rng_for(i)`` supplies the
        per-curve randomness of curve ``i``."""
        return np.array([fingerprint(self.hash_input(c, rng_for(i))) for i, c in enumerate(curves)],
                        dtype=np.uint64)


class Scheme:
    """A hash family bound to planned parameters."""

    variant: ClassVar[str] = ""
    table_class: ClassVar[type[HashTable]] = HashTable

    def __init__(self, params: SchemeParams):
        if params.variant != self.variant:
            raise ValueError(f"{type(self).__name__} needs variant {self.variant!r}")
        self.params = params

    def __repr__(self):
        return f"{type(self).__name__}({self.params})"

    def table(self, seed: int, index: int = 0) -> HashTable:
        return self.table_class(self.params, seed, index)

    # bounds

    def alpha1(self, m1: int, m2: int) -> float:
        """Lower bound on the collision probability of near pairs."""
        raise NotImplementedError

    def verify_kind(self) -> DistanceKind:
        """Distance that a collision bounds (see `certified_radius`)."""
        return DistanceKind(self.params.metric)

    def certified_radius(self, m1: int, m2: int) -> float:
        """Largest ``verify_kind`` distance of any colliding pair of curves
        with ``m1`` and ``m2`` vertices."""
        p = self.params
        base = math.sqrt(p.d) * p.delta
        return 2 * max(m1, m2) * base if p.metric == "dtw" else base

    # Monte Carlo

    def collisions(self, P: Curve, Q: Curve, trials: int, rng: np.random.Generator,
                   chunk: int = 100_000) -> np.ndarray:
        """Collision indicator of ``P`` (input side) and ``Q`` (query side)
        for ``trials`` independent draws of the full scheme randomness."""
        if P.d != self.params.d or Q.d != self.params.d:
            raise DimensionMismatch("curve and scheme dimensions differ")
        out = []
        done = 0
        while done < trials:
            n = min(chunk, trials - done)
            out.append(self.collide_batch(P, Q, self.sample_batch(P, Q, n, rng)))
            done += n
        return np.concatenate(out) if out else np.zeros(0, dtype=bool)

    def sample_batch(self, P: Curve, Q: Curve, n: int, rng: np.random.Generator) -> dict:
        return {"seed": rng.integers(0, 2**63, size=n)}

    def collide_batch(self, P: Curve, Q: Curve, batch: dict) -> np.ndarray:
        n = len(next(iter(batch.values())))
        return np.array([a == b for a, b in (self.trial_keys(P, Q, batch, k) for k in range(n))], dtype=bool)

    def trial_keys(self, P: Curve, Q: Curve, batch: dict, k: int):
        """Keys of trial ``k`` of ``batch`` computed with the scalar API."""
        seed = int(batch["seed"][k])
        table = self.table(seed)
        return (table.hash_input(P, np.random.default_rng([seed, 1])),
                table.hash_query(Q, np.random.default_rng([seed, 2])))


class BasicTable(HashTable):
    def __init__(self, params, seed, index=0):
        super().__init__(params, seed, index)
        self.shift = sample_shift(params.delta, params.d, np.random.default_rng(self.seed))

    def hash_input(self, P, rng=None):
        return basic_hash(P, self.params, self.shift, self.scheme_id)

    def input_fingerprints(self, curves, rng_for=None):
        # no per-curve randomness: snap all curves of equal length at once
        out = np.zeros(len(curves), dtype=np.uint64)
        by_m: dict[int, list[int]] = {}
        for i, c in enumerate(curves):
            by_m.setdefault(c.m, []).append(i)
        for idx in by_m.values():
            pts = np.stack([curves[i].points for i in idx])
            cells = _cells(pts, -self.shift.t, self.params.delta)
            keep = batch_keep(cells)
            for row, i in enumerate(idx):
                out[i] = _digest_blocks(self.scheme_id, b"L", [cells[row][keep[row]]])
        return out


class BasicScheme(Scheme):
    """Snap to one randomly shifted grid, drop consecutive duplicates."""

    variant = "basic"
    table_class = BasicTable

    def alpha1(self, m1, m2):
        return 0.5

    def sample_batch(self, P, Q, n, rng):
        return {"shift": rng.uniform(0.0, self.params.delta, size=(n, self.params.d))}

    def collide_batch(self, P, Q, batch):
        off = -batch["shift"][:, None, :]
        kp, lp = batch_keys(P.points, off, self.params.delta)
        kq, lq = batch_keys(Q.points, off, self.params.delta)
        return batch_equal(kp, lp, kq, lq)

    def trial_keys(self, P, Q, batch, k):
        shift = GridShift(self.params.delta, batch["shift"][k])
        return basic_hash(P, self.params, shift), basic_hash(Q, self.params, shift)


class ConstantTable(HashTable):
    def hash_input(self, P, rng):
        pert = sample_perturbation(self.params.delta, P.m, P.d, rng)
        return constant_hash(P, self.params, pert, self.scheme_id)


class ConstantScheme(Scheme):
    """Perturb every vertex independently and snap to the canonical grid.

    Input and query curves draw independent perturbations.
    """

    variant = "constant"
    table_class = ConstantTable

    def alpha1(self, m1, m2):
        return 2.0 ** (-2 * self.params.d * (m1 + m2))

    def certified_radius(self, m1, m2):
        # perturbation and snapping each move a vertex by up to sqrt(d)*delta/2
        return 2 * math.sqrt(self.params.d) * self.params.delta

    def sample_batch(self, P, Q, n, rng):
        h = self.params.delta / 2
        d = self.params.d
        return {"pert_p": rng.uniform(-h, h, size=(n, P.m, d)),
                "pert_q": rng.uniform(-h, h, size=(n, Q.m, d))}

    def collide_batch(self, P, Q, batch):
        kp, lp = batch_keys(P.points, batch["pert_p"], self.params.delta)
        kq, lq = batch_keys(Q.points, batch["pert_q"], self.params.delta)
        return batch_equal(kp, lp, kq, lq)

    def trial_keys(self, P, Q, batch, k):
        pp = PerturbationSeq(self.params.delta, batch["pert_p"][k])
        pq = PerturbationSeq(self.params.delta, batch["pert_q"][k])
        return constant_hash(P, self.params, pp), constant_hash(Q, self.params, pq)
