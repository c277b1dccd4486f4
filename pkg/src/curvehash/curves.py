"""Polygonal curves, traversals and exact distance computations.

All discrete distances are computed by dynamic programming over the
``m1 x m2`` grid of vertex pairs.  A brute-force enumerator of traversals
(`enumerate_traversals`, `brute_force_distance`) is kept next to the DPs
and serves as their correctness oracle on small inputs.

Vertex indices in `Traversal` are 1-based, everywhere else 0-based.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "Curve",
    "Traversal",
    "DistanceKind",
    "DimensionMismatch",
    "InfeasibleTraversal",
    "discrete_frechet",
    "dtw",
    "constrained_distance",
    "distance",
    "enumerate_traversals",
    "brute_force_distance",
    "normalize_traversal",
    "traversal_components",
    "continuous_frechet_1d",
    "frechet_decision_1d",
    "pairwise_distances",
]

MAX_ENUMERATION = 8


class DimensionMismatch(ValueError):
    pass


class InfeasibleTraversal(ValueError):
    """Raised when the alignment constraint admits no traversal at all."""

    def __init__(self, detail: str = ""):
        msg = "no valid traversal"
        super().__init__(f"{msg}: {detail}" if detail else msg)


@dataclass(frozen=True, eq=False)
class Curve:
    """A polygonal curve with ``m`` vertices in ``R^d``.

    ``points`` is stored as a read-only ``(m, d)`` float64 array.  One
    dimensional input (a flat list of numbers) is promoted to ``(m, 1)``.
    """

    points: np.ndarray
    id: str = ""

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"curve needs shape (m>=1, d>=1), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("curve coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.m

    def __eq__(self, other):
        if not isinstance(other, Curve):
            return NotImplemented
        return self.id == other.id and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash((self.id, self.points.tobytes()))

    def __repr__(self):
        return f"Curve(id={self.id!r}, m={self.m}, d={self.d})"


@dataclass(frozen=True)
class Traversal:
    """Monotone pairing of the vertices of two curves (1-based pairs)."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((int(i), int(j)) for i, j in self.pairs))

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def is_valid(self, m1: int, m2: int) -> bool:
        if not self.pairs or self.pairs[0] != (1, 1) or self.pairs[-1] != (m1, m2):
            return False
        for (i0, j0), (i1, j1) in zip(self.pairs, self.pairs[1:]):
            di, dj = i1 - i0, j1 - j0
            if di not in (0, 1) or dj not in (0, 1) or di + dj < 1:
                return False
        return True

    def max_cost(self, P: Curve, Q: Curve) -> float:
        return max(_pair_cost(P, Q, i, j) for i, j in self.pairs)

    def sum_cost(self, P: Curve, Q: Curve) -> float:
        return math.fsum(_pair_cost(P, Q, i, j) for i, j in self.pairs)

    def degrees(self) -> tuple[dict[int, int], dict[int, int]]:
        """Number of partners of every vertex of P and of Q."""
        deg_p: dict[int, int] = {}
        deg_q: dict[int, int] = {}
        for i, j in self.pairs:
            deg_p[i] = deg_p.get(i, 0) + 1
            deg_q[j] = deg_q.get(j, 0) + 1
        return deg_p, deg_q


def _pair_cost(P: Curve, Q: Curve, i: int, j: int) -> float:
    return float(np.linalg.norm(P.points[i - 1] - Q.points[j - 1]))


_VARIANTS = (
    "frechet",
    "dtw",
    "anchored-frechet",
    "anchored-dtw",
    "speed-frechet",
    "speed-dtw",
    "continuous-frechet-1d",
)


@dataclass(frozen=True)
class DistanceKind:
    variant: str = "frechet"
    w: int | None = None

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown distance variant {self.variant!r}")
        if self.constraint == "anchored":
            if self.w is None or self.w < 2 or self.w % 2:
                raise ValueError(f"anchored width must be even and >= 2, got {self.w}")
        elif self.constraint == "speed":
            if self.w is None or self.w < 1:
                raise ValueError(f"speed must be >= 1, got {self.w}")
        elif self.w is not None:
            raise ValueError(f"{self.variant} takes no width parameter")

    @property
    def metric(self) -> str:
        if self.variant.startswith("continuous"):
            return "continuous"
        return "dtw" if self.variant.endswith("dtw") else "frechet"

    @property
    def constraint(self) -> str:
        head = self.variant.split("-")[0]
        return head if head in ("anchored", "speed") else "none"

    @classmethod
    def make(cls, metric: str, constraint: str = "none", w: int | None = None) -> DistanceKind:
        if constraint == "none":
            return cls(metric if metric != "continuous" else "continuous-frechet-1d")
        return cls(f"{constraint}-{metric}", w)

    def __str__(self):
        return self.variant if self.w is None else f"{self.variant}(w={self.w})"


def _check_dims(P: Curve, Q: Curve):
    if P.d != Q.d:
        raise DimensionMismatch(f"dimension mismatch: {P.d} vs {Q.d}")


def pairwise_distances(P: Curve, Q: Curve) -> np.ndarray:
    _check_dims(P, Q)
    diff = P.points[:, None, :] - Q.points[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def _grid_dp(cost: list[list[float]], combine, band: int | None = None) -> float:
    m1, m2 = len(cost), len(cost[0])
    inf = math.inf
    prev = [inf] * m2
    for i in range(m1):
        row = cost[i]
        cur = [inf] * m2
        lo, hi = 0, m2 - 1
        if band is not None:
            lo, hi = max(0, i - band), min(m2 - 1, i + band)
        for j in range(lo, hi + 1):
            if i == 0 and j == 0:
                best = 0.0 if combine is _add else -inf
            else:
                best = prev[j]
                if j > 0:
                    if cur[j - 1] < best:
                        best = cur[j - 1]
                    if prev[j - 1] < best:
                        best = prev[j - 1]
                if best == inf:
                    continue
            cur[j] = combine(best, row[j])
        prev = cur
    return prev[m2 - 1]


def _add(a, b):
    return a + b


def discrete_frechet(P: Curve, Q: Curve) -> float:
    """Minimum over traversals of the maximum paired vertex distance."""
    cost = pairwise_distances(P, Q).tolist()
    return float(_grid_dp(cost, max))


def dtw(P: Curve, Q: Curve) -> float:
    """Minimum over traversals of the sum of paired vertex distances."""
    cost = pairwise_distances(P, Q).tolist()
    return float(_grid_dp(cost, _add))


def _speed_dp(cost: list[list[float]], w: int, combine) -> float:
    # state per cell: (direction, run) -> best value; direction 0 = arrived
    # diagonally (or start), 1 = advanced on P only, 2 = advanced on Q only.
    # A run of k single-axis steps gives the fixed vertex k+1 partners.
    m1, m2 = len(cost), len(cost[0])
    start = 0.0 if combine is _add else -math.inf
    states: list[list[dict]] = [[{} for _ in range(m2)] for _ in range(m1)]
    states[0][0][(0, 0)] = combine(start, cost[0][0])

    def relax(cell: dict, key, value):
        old = cell.get(key)
        if old is None or value < old:
            cell[key] = value

    for i in range(m1):
        for j in range(m2):
            here = states[i][j]
            for (direction, run), val in here.items():
                if i + 1 < m1 and j + 1 < m2:
                    relax(states[i + 1][j + 1], (0, 0), combine(val, cost[i + 1][j + 1]))
                if i + 1 < m1:
                    r = run + 1 if direction == 1 else 1
                    if r <= w - 1:
                        relax(states[i + 1][j], (1, r), combine(val, cost[i + 1][j]))
                if j + 1 < m2:
                    r = run + 1 if direction == 2 else 1
                    if r <= w - 1:
                        relax(states[i][j + 1], (2, r), combine(val, cost[i][j + 1]))
            if (i, j) != (m1 - 1, m2 - 1):
                states[i][j] = {}  # free memory of finished cells
    final = states[m1 - 1][m2 - 1]
    return min(final.values()) if final else math.inf


def constrained_distance(P: Curve, Q: Curve, kind: DistanceKind) -> float:
    """Fréchet or DTW distance restricted to anchored / speed traversals.

    Raises `InfeasibleTraversal` when the constraint admits no traversal
    (``|m1 - m2| > w/2`` for anchored, ``m1/m2`` outside ``[1/w, w]`` for
    speed).  Unconstrained kinds are forwarded to `distance`.
    """
    if kind.constraint == "none":
        return distance(P, Q, kind)
    cost = pairwise_distances(P, Q).tolist()
    combine = _add if kind.metric == "dtw" else max
    m1, m2 = P.m, Q.m
    w = kind.w
    if kind.constraint == "anchored":
        if abs(m1 - m2) > w // 2:
            raise InfeasibleTraversal(f"|m1-m2|={abs(m1 - m2)} > w/2={w // 2}")
        value = _grid_dp(cost, combine, band=w // 2)
    else:
        if m1 > w * m2 or m2 > w * m1:
            raise InfeasibleTraversal(f"m1/m2={m1}/{m2} outside [1/{w}, {w}]")
        value = _speed_dp(cost, w, combine)
    if value == math.inf:
        raise InfeasibleTraversal()
    return float(value)


def distance(P: Curve, Q: Curve, kind: DistanceKind | str = "frechet") -> float:
    if isinstance(kind, str):
        kind = DistanceKind(kind)
    if kind.constraint != "none":
        return constrained_distance(P, Q, kind)
    if kind.metric == "continuous":
        return continuous_frechet_1d(P, Q)
    return dtw(P, Q) if kind.metric == "dtw" else discrete_frechet(P, Q)


# ---------------------------------------------------------------- oracle


def _walks(i: int, j: int, m1: int, m2: int) -> Iterator[list[tuple[int, int]]]:
    if (i, j) == (m1, m2):
        yield [(i, j)]
        return
    for di, dj in ((1, 1), (1, 0), (0, 1)):
        ni, nj = i + di, j + dj
        if ni <= m1 and nj <= m2:
            for rest in _walks(ni, nj, m1, m2):
                yield [(i, j)] + rest


def enumerate_traversals(m1: int, m2: int) -> list[Traversal]:
    """Every traversal of two curves with ``m1`` and ``m2`` vertices."""
    if m1 < 1 or m2 < 1:
        raise ValueError("curve lengths must be positive")
    if m1 > MAX_ENUMERATION or m2 > MAX_ENUMERATION:
        raise ValueError(f"enumeration limited to lengths <= {MAX_ENUMERATION}")
    return [Traversal(tuple(w)) for w in _walks(1, 1, m1, m2)]


@lru_cache(maxsize=None)
def _traversal_masks(m1: int, m2: int) -> np.ndarray:
    ts = enumerate_traversals(m1, m2)
    masks = np.zeros((len(ts), m1, m2), dtype=bool)
    for k, t in enumerate(ts):
        for i, j in t.pairs:
            masks[k, i - 1, j - 1] = True
    masks.setflags(write=False)
    return masks


def brute_force_distance(P: Curve, Q: Curve, kind: DistanceKind | str = "frechet") -> float:
    """Exact distance by exhaustive search over all (feasible) traversals.

    Pairs of a traversal are distinct cells, so each traversal is a boolean
    mask over the cost matrix; anchored feasibility is a band test on the
    mask and speed feasibility a bound on row and column sums (degrees).
    """
    if isinstance(kind, str):
        kind = DistanceKind(kind)
    if kind.metric == "continuous":
        raise ValueError("no traversal oracle for the continuous distance")
    cost = pairwise_distances(P, Q)
    masks = _traversal_masks(P.m, Q.m)
    if kind.constraint == "anchored":
        i, j = np.indices(cost.shape)
        outside = np.abs(i - j) > kind.w // 2
        masks = masks[~np.any(masks & outside, axis=(1, 2))]
    elif kind.constraint == "speed":
        ok = (masks.sum(axis=2).max(axis=1) <= kind.w) & (masks.sum(axis=1).max(axis=1) <= kind.w)
        masks = masks[ok]
    if len(masks) == 0:
        raise InfeasibleTraversal()
    if kind.metric == "dtw":
        costs = np.where(masks, cost, 0.0).sum(axis=(1, 2))
    else:
        costs = np.where(masks, cost, -np.inf).max(axis=(1, 2))
    return float(costs.min())


# ------------------------------------------------------- normalization


def normalize_traversal(T: Traversal) -> Traversal:
    """Drop middle pairs of ``(i,j),(i,j+1),(i+1,j+1)`` (and the symmetric
    pattern) until every connected component is a star."""
    pairs = list(T.pairs)
    changed = True
    while changed:
        changed = False
        k = 1
        while k < len(pairs) - 1:
            (a0, b0), (a1, b1), (a2, b2) = pairs[k - 1], pairs[k], pairs[k + 1]
            if a2 == a0 + 1 and b2 == b0 + 1 and (a1, b1) in ((a0, b0 + 1), (a0 + 1, b0)):
                del pairs[k]
                changed = True
            else:
                k += 1
    return Traversal(tuple(pairs))


def traversal_components(T: Traversal) -> list[list[tuple[int, int]]]:
    """Split a traversal into its connected components (runs joined by
    non-diagonal steps)."""
    comps: list[list[tuple[int, int]]] = []
    for k, pair in enumerate(T.pairs):
        if k and (pair[0] == T.pairs[k - 1][0] or pair[1] == T.pairs[k - 1][1]):
            comps[-1].append(pair)
        else:
            comps.append([pair])
    return comps


# ------------------------------------------------ continuous distance, 1D


def _free_interval(a: float, b: float, x: float, eps: float) -> tuple[float, float] | None:
    """Parameters s in [0,1] with |a + s(b-a) - x| <= eps."""
    if a == b:
        return (0.0, 1.0) if abs(a - x) <= eps else None
    with np.errstate(over="ignore"):  # tiny b - a: +-inf clamps correctly below
        s0 = (x - eps - a) / (b - a)
        s1 = (x + eps - a) / (b - a)
    lo, hi = max(0.0, min(s0, s1)), min(1.0, max(s0, s1))
    return (lo, hi) if lo <= hi else None


def frechet_decision_1d(p: Sequence[float], q: Sequence[float], eps: float) -> bool:
    """Free-space reachability test: is the continuous Fréchet distance of
    the 1D polylines ``p`` and ``q`` at most ``eps``?"""
    a, b = len(p) - 1, len(q) - 1
    if abs(p[0] - q[0]) > eps or abs(p[-1] - q[-1]) > eps:
        return False
    if a == 0:
        return all(abs(p[0] - y) <= eps for y in q)
    if b == 0:
        return all(abs(q[0] - x) <= eps for x in p)
    # left[i][j]: reachable part of the free interval on {x=i} x [j, j+1]
    # bottom[i][j]: reachable part on [i, i+1] x {y=j}; both as (lo, hi).
    left = [[None] * b for _ in range(a + 1)]
    bottom = [[None] * (b + 1) for _ in range(a)]
    for j in range(b):
        iv = _free_interval(q[j], q[j + 1], p[0], eps)
        if iv is None or iv[0] > 0.0 or (j > 0 and (left[0][j - 1] is None or left[0][j - 1][1] < 1.0)):
            break
        left[0][j] = iv
    for i in range(a):
        iv = _free_interval(p[i], p[i + 1], q[0], eps)
        if iv is None or iv[0] > 0.0 or (i > 0 and (bottom[i - 1][0] is None or bottom[i - 1][0][1] < 1.0)):
            break
        bottom[i][0] = iv
    for i in range(a):
        for j in range(b):
            lr, br = left[i][j], bottom[i][j]
            if lr is None and br is None:
                continue
            top = _free_interval(p[i], p[i + 1], q[j + 1], eps)
            if top is not None and lr is None:
                top = (max(top[0], br[0]), top[1])
                if top[0] > top[1]:
                    top = None
            right = _free_interval(q[j], q[j + 1], p[i + 1], eps)
            if right is not None and br is None:
                right = (max(right[0], lr[0]), right[1])
                if right[0] > right[1]:
                    right = None
            bottom[i][j + 1] = top
            left[i + 1][j] = right
    end_l, end_b = left[a][b - 1], bottom[a - 1][b]
    return (end_l is not None and end_l[1] >= 1.0) or (end_b is not None and end_b[1] >= 1.0)


def continuous_frechet_1d(P: Curve, Q: Curve, tol: float = 1e-10) -> float:
    """Continuous Fréchet distance of two curves on the real line.

    Binary search over the decision procedure, bracketed by the endpoint
    distances below and the largest vertex-vertex distance above.
    """
    _check_dims(P, Q)
    if P.d != 1:
        raise DimensionMismatch("continuous Fréchet distance is implemented for d = 1 only")
    p = P.points[:, 0].tolist()
    q = Q.points[:, 0].tolist()
    lo = max(abs(p[0] - q[0]), abs(p[-1] - q[-1]))
    if frechet_decision_1d(p, q, lo):
        return lo
    hi = float(np.max(np.abs(P.points[:, 0][:, None] - Q.points[:, 0][None, :])))
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if frechet_decision_1d(p, q, mid):
            hi = mid
        else:
            lo = mid
    return hi


def random_curve(rng: np.random.Generator, m: int, d: int, scale: float = 1.0, id: str = "") -> Curve:
    return Curve(rng.uniform(-scale, scale, size=(m, d)), id=id)


def perturbed(P: Curve, rng: np.random.Generator, radius: float, id: str = "") -> Curve:
    """Copy of ``P`` with every coordinate moved by less than ``radius``."""
    return Curve(P.points + rng.uniform(-radius, radius, size=P.points.shape), id=id)
