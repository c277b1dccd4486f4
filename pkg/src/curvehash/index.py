"""(c, r)-near-neighbour index over any hash family of the package.

Every family here has no far collisions, so a single hash function per
table suffices (k = 1), L = ceil(1/alpha1) tables give constant success
probability, and ceil(log2 n) independent repetitions boost it to 1 - 1/n.
A query returns the first stored curve sharing a bucket with it; no
distance is ever computed.

Keys are shortened to 64-bit fingerprints before they enter a table.
"""

from __future__ import annotations

import io
import json
import math
import struct
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .constrained import AnchoredScheme, SpeedScheme
from .curves import Curve, DimensionMismatch
from .grid import BasicScheme, ConstantScheme, Scheme, SchemeParams, fingerprint
from .partition import TradeoffScheme
from .signature import ContinuousScheme

__all__ = [
    "IndexConfig",
    "IndexTooLarge",
    "NNIndex",
    "CollisionEstimate",
    "plan_index",
    "make_scheme",
    "fingerprint",
    "estimate_collision_probability",
    "hoeffding_half_width",
    "meets_lower_bound",
    "MAX_TABLES",
]

MAX_TABLES = 2**20
MAGIC = b"CVHIDX\x00\x01"
FORMAT_VERSION = 1

_SCHEMES: dict[str, type[Scheme]] = {
    cls.variant: cls
    for cls in (BasicScheme, ConstantScheme, TradeoffScheme, AnchoredScheme, SpeedScheme, ContinuousScheme)
}


def make_scheme(params: SchemeParams) -> Scheme:
    return _SCHEMES[params.variant](params)


class IndexTooLarge(ValueError):
    """The planned number of tables exceeds `MAX_TABLES`."""

    def __init__(self, L: int, alpha1: float):
        super().__init__(f"planned L = {L} tables (alpha1 = {alpha1:.3g}) exceeds the limit of {MAX_TABLES}")
        self.L = L
        self.alpha1 = alpha1


@dataclass(frozen=True)
class IndexConfig:
    scheme: SchemeParams
    alpha1: float
    L: int
    reps: int
    n: int
    seed: int = 0
    alpha2: float = 0.0
    k: int = 1

    @property
    def tables(self) -> int:
        return self.reps * self.L

    def to_dict(self) -> dict:
        d = asdict(self)
        d["scheme"] = self.scheme.to_dict()
        return d

    @classmethod
    def from_dict(cls, data: dict) -> IndexConfig:
        data = dict(data)
        data["scheme"] = SchemeParams.from_dict(data["scheme"])
        return cls(**data)


def plan_index(scheme: SchemeParams, n: int, m: int | None = None, seed: int = 0,
               check_size: bool = True) -> IndexConfig:
    """Table counts for a dataset of ``n`` curves with at most ``m`` vertices.

    ``m`` defaults to ``scheme.m_bound`` and is only needed by families whose
    collision bound depends on curve length.
    """
    if n < 0:
        raise ValueError("dataset size must be nonnegative")
    m = m or scheme.m_bound or 1
    alpha1 = make_scheme(scheme).alpha1(m, m)
    if not alpha1 > 0:
        raise ValueError(f"collision lower bound must be positive, got {alpha1}")
    L = max(1, math.ceil(1 / alpha1 - 1e-9))
    if check_size and L > MAX_TABLES:
        raise IndexTooLarge(L, alpha1)
    reps = max(1, math.ceil(math.log2(n))) if n > 1 else 1
    return IndexConfig(scheme, alpha1, L, reps, n, seed)


def _table_seed(seed: int, t: int) -> int:
    return int(np.random.default_rng([seed, t]).integers(0, 2**63))


class NNIndex:
    """Hash tables of fingerprints; after `build` the index is read-only."""

    def __init__(self, config: IndexConfig, curves: list[Curve], codes: np.ndarray):
        self.config = config
        self.scheme = make_scheme(config.scheme)
        self.curves = list(curves)
        self.ids = [c.id for c in self.curves]
        self.codes = codes  # (tables, n) fingerprints, insertion order
        self.hash_tables = [self.scheme.table(_table_seed(config.seed, t), t) for t in range(config.tables)]
        self.tables: list[dict[int, list[int]]] = []
        for row in codes:
            buckets: dict[int, list[int]] = {}
            for i, fp in enumerate(row.tolist()):
                buckets.setdefault(fp, []).append(i)
            self.tables.append(buckets)

    @classmethod
    def build(cls, curves, config: IndexConfig) -> NNIndex:
        curves = list(curves)
        d = config.scheme.d
        for c in curves:
            if c.d != d:
                raise DimensionMismatch(f"curve {c.id!r} has dimension {c.d}, scheme expects {d}")
        if len({c.id for c in curves}) != len(curves):
            raise ValueError("curve ids must be unique")
        scheme = make_scheme(config.scheme)
        codes = np.zeros((config.tables, len(curves)), dtype=np.uint64)
        for t in range(config.tables):
            table = scheme.table(_table_seed(config.seed, t), t)
            codes[t] = table.input_fingerprints(curves, lambda i: np.random.default_rng([config.seed, t, 1, i]))
        return cls(config, curves, codes)

    def __len__(self):
        return len(self.curves)

    def query_keys(self, Q: Curve, ordinal: int = 0):
        if Q.d != self.config.scheme.d:
            raise DimensionMismatch(f"query dimension {Q.d}, index dimension {self.config.scheme.d}")
        for t, table in enumerate(self.hash_tables):
            rng = np.random.default_rng([self.config.seed, t, 2, ordinal])
            yield t, fingerprint(table.hash_query(Q, rng))

    def query(self, Q: Curve, ordinal: int = 0) -> str | None:
        """Id of the first stored curve colliding with ``Q``, scanning
        repetitions and then tables in order; ``None`` if no bucket is hit."""
        for t, fp in self.query_keys(Q, ordinal):
            hit = self.tables[t].get(fp)
            if hit:
                return self.ids[hit[0]]
        return None

    def candidates(self, Q: Curve, ordinal: int = 0) -> list[str]:
        """All stored ids colliding with ``Q`` in any table, without repeats."""
        seen: dict[int, None] = {}
        for t, fp in self.query_keys(Q, ordinal):
            for i in self.tables[t].get(fp, ()):
                seen.setdefault(i)
        return [self.ids[i] for i in seen]

    # ------------------------------------------------------------ storage
    #
    # layout (little endian):
    #   magic[8] | u32 version | u64 header length | header (UTF-8 JSON:
    #   config, ids, curve shapes) | float64 vertices of all curves, in order
    #   | uint64 fingerprints, tables x n

    def save(self, path) -> None:
        header = {
            "config": self.config.to_dict(),
            "ids": self.ids,
            "shapes": [list(c.points.shape) for c in self.curves],
        }
        blob = json.dumps(header).encode()
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<IQ", FORMAT_VERSION, len(blob)))
            f.write(blob)
            for c in self.curves:
                f.write(np.ascontiguousarray(c.points, dtype="<f8").tobytes())
            f.write(np.ascontiguousarray(self.codes, dtype="<u8").tobytes())

    @classmethod
    def load(cls, path) -> NNIndex:
        data = Path(path).read_bytes()
        f = io.BytesIO(data)
        if f.read(len(MAGIC)) != MAGIC:
            raise ValueError(f"{path} is not an index file")
        version, size = struct.unpack("<IQ", f.read(12))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported index format version {version}")
        header = json.loads(f.read(size).decode())
        config = IndexConfig.from_dict(header["config"])
        curves = []
        for cid, (m, d) in zip(header["ids"], header["shapes"]):
            pts = np.frombuffer(f.read(8 * m * d), dtype="<f8").reshape(m, d)
            curves.append(Curve(pts, id=cid))
        n = len(curves)
        codes = np.frombuffer(f.read(8 * config.tables * n), dtype="<u8").reshape(config.tables, n)
        return cls(config, curves, codes.astype(np.uint64))


# ----------------------------------------------------------- Monte Carlo


@dataclass(frozen=True)
class CollisionEstimate:
    estimate: float
    half_width: float
    collisions: int
    trials: int


def hoeffding_half_width(trials: int, confidence: float = 0.99) -> float:
    return math.sqrt(math.log(2 / (1 - confidence)) / (2 * trials))


def estimate_collision_probability(scheme: Scheme, P: Curve, Q: Curve, trials: int,
                                   rng: np.random.Generator) -> CollisionEstimate:
    """Fraction of ``trials`` fresh draws of the scheme's randomness under
    which ``P`` (input side) and ``Q`` (query side) collide."""
    if trials < 1:
        raise ValueError("need at least one trial")
    hits = int(scheme.collisions(P, Q, trials, rng).sum())
    return CollisionEstimate(hits / trials, hoeffding_half_width(trials), hits, trials)


def meets_lower_bound(estimate: float, bound: float, trials: int, sigmas: float = 3.0) -> bool:
    """``estimate > bound - sigmas * sd``, with ``sd`` the binomial standard
    deviation of an estimator whose mean sits exactly at the bound."""
    b = min(max(bound, 0.0), 1.0)
    return estimate > bound - sigmas * math.sqrt(b * (1 - b) / trials)
