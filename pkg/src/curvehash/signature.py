"""1D continuous Fréchet hashing and δ-signatures.

The hash snaps vertices to a shifted grid and then drops every vertex lying
between its two neighbours, so that curves whose snapped versions trace
the same path get identical keys.

Signatures are a testing aid: a δ-signature keeps the turning points of a
curve that survive contracting all short edges, and any curve within
Fréchet distance ε ≤ δ must visit every ε-range around them in order.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .curves import Curve, DistanceKind
from .grid import (
    GridShift,
    HashTable,
    LatticeKey,
    Scheme,
    SchemeParams,
    _cells,
    _positive,
    make_scheme_id,
    sample_shift,
)

__all__ = [
    "Signature1D",
    "compute_signature",
    "check_signature",
    "signature_ranges",
    "visits_ranges",
    "remove_collinear",
    "continuous_hash",
    "plan_continuous",
    "ContinuousScheme",
]

_TOL = 1e-9


def _values_1d(P: Curve) -> np.ndarray:
    if P.d != 1:
        raise ValueError(f"1D curve required, got dimension {P.d}")
    return P.points[:, 0]


def _between(x, a, b) -> bool:
    return min(a, b) <= x <= max(a, b)


def remove_collinear(values) -> list:
    """Drop consecutive duplicates, then every interior value lying in the
    closed interval spanned by its neighbours, pass after pass until stable."""
    out = []
    for v in values:
        if not out or v != out[-1]:
            out.append(v)
    changed = True
    while changed and len(out) > 2:
        changed = False
        kept = [out[0]]
        for i in range(1, len(out) - 1):
            if _between(out[i], kept[-1], out[i + 1]):
                changed = True
            else:
                kept.append(out[i])
        kept.append(out[-1])
        out = kept
    return out


def continuous_hash(P: Curve, params: SchemeParams, shift: GridShift, scheme_id: int | None = None) -> LatticeKey:
    x = _values_1d(P)
    if shift.d != 1:
        raise ValueError("continuous hashing needs a 1D shift")
    if scheme_id is None:
        scheme_id = make_scheme_id("continuous1d", float(params.delta), shift.t)
    cells = _cells(x, -shift.t[0], params.delta).tolist()
    return LatticeKey(tuple((c,) for c in remove_collinear(cells)), scheme_id)


def plan_continuous(r: float, m: int) -> SchemeParams:
    _positive(r=r, m=m)
    return SchemeParams("continuous1d", r, 4 * m, 4 * m * r, 1, m_bound=m, metric="continuous")


# ------------------------------------------------------------ signatures


@dataclass(frozen=True)
class Signature1D:
    """Signature vertices of a 1D curve.

    ``indices`` are 0-based positions into the parent curve's vertices
    (the parameters ``t_i``), ``vertices`` the values there.
    """

    parent_id: str
    delta: float
    indices: tuple[int, ...]
    vertices: tuple[float, ...]

    def __len__(self):
        return len(self.indices)


def _turning_points(x: np.ndarray) -> list[int]:
    idx = [0]
    for i in range(1, len(x)):
        if x[i] != x[idx[-1]]:
            idx.append(i)
    if len(idx) == 1:
        return [0] if len(x) == 1 else [0, len(x) - 1]
    # keep the last occurrence of a repeated endpoint value as the last vertex
    if idx[-1] != len(x) - 1:
        idx[-1] = len(x) - 1
    changed = True
    while changed and len(idx) > 2:
        changed = False
        kept = [idx[0]]
        for k in range(1, len(idx) - 1):
            if _between(x[idx[k]], x[kept[-1]], x[idx[k + 1]]):
                changed = True
            else:
                kept.append(idx[k])
        kept.append(idx[-1])
        idx = kept
    return idx


def compute_signature(P: Curve, delta: float) -> Signature1D:
    """δ-signature by shortest-edge-first contraction.

    Inner edges are keyed by their length, edges touching the first or last
    vertex by twice their length, so an end edge goes only once it is shorter
    than half of every inner edge.  Contracting an inner edge removes both of
    its vertices; contracting an end edge removes its inner vertex.  We stop
    when the smallest key exceeds ``2*delta`` or two vertices remain.  Ties
    go to the edge with the smaller left index.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    x = _values_1d(P)
    order = _turning_points(x)
    n = len(order)
    if n <= 2:
        return Signature1D(P.id, delta, tuple(order), tuple(float(x[i]) for i in order))

    first, last = order[0], order[-1]
    prev = {order[k]: order[k - 1] for k in range(1, n)}
    nxt = {order[k]: order[k + 1] for k in range(n - 1)}
    alive = set(order)

    def key(a, b):
        length = abs(x[b] - x[a])
        return 2 * length if a == first or b == last else length

    heap = [(key(a, b), a, b) for a, b in nxt.items()]
    heapq.heapify(heap)
    while heap and len(alive) > 2:
        k, a, b = heapq.heappop(heap)
        if a not in alive or b not in alive or nxt.get(a) != b:
            continue
        if k > 2 * delta:
            break
        if a == first and b == last:
            break
        if a == first:
            drop = [b]
        elif b == last:
            drop = [a]
        else:
            drop = [a, b]
        left, right = prev[drop[0]], nxt[drop[-1]]
        for v in drop:
            alive.discard(v)
        nxt[left], prev[right] = right, left
        heapq.heappush(heap, (key(left, right), left, right))

    idx = [first]
    while idx[-1] != last:
        idx.append(nxt[idx[-1]])
    return Signature1D(P.id, delta, tuple(idx), tuple(float(x[i]) for i in idx))


def check_signature(P: Curve, sig: Signature1D, tol: float = _TOL) -> dict[str, bool]:
    """Evaluate the four defining conditions of a δ-signature of ``P``.

    Returns ``{"non_degenerate", "direction", "edge_length", "range"}``
    flags.  Two conventions: the range condition of the last edge mirrors
    that of the first edge (ε-slack around the last vertex); a two-vertex
    signature is exempt from the minimum edge length, since nothing further
    can be contracted.
    """
    x = _values_1d(P)
    idx, v, delta = sig.indices, sig.vertices, sig.delta
    k = len(idx)
    ok = {"non_degenerate": True, "direction": True, "edge_length": True, "range": True}
    if k == 0 or idx[0] != 0 or idx[-1] != len(x) - 1 or any(a >= b for a, b in zip(idx, idx[1:])):
        return {name: False for name in ok}
    if k == 1:
        return ok

    for i in range(1, k - 1):
        if _between(v[i], v[i - 1], v[i + 1]):
            ok["non_degenerate"] = False

    for i in range(k - 1):
        seg = x[idx[i]:idx[i + 1] + 1]
        if v[i] < v[i + 1]:
            back = np.max(np.maximum.accumulate(seg) - seg)
        else:
            back = np.max(seg - np.minimum.accumulate(seg))
        if back > 2 * delta + tol:
            ok["direction"] = False

        length = abs(v[i + 1] - v[i])
        if k > 2:
            inner = 0 < i < k - 2
            if length <= (2 * delta if inner else delta):
                ok["edge_length"] = False

        lo, hi = min(v[i], v[i + 1]), max(v[i], v[i + 1])
        in_edge = (seg >= lo - tol) & (seg <= hi + tol)
        if k == 2:
            near = (np.abs(seg - v[0]) <= delta + tol) | (np.abs(seg - v[1]) <= delta + tol)
        elif i == 0:
            near = np.abs(seg - v[0]) <= delta + tol
        elif i == k - 2:
            near = np.abs(seg - v[-1]) <= delta + tol
        else:
            near = np.zeros_like(in_edge)
        if not np.all(in_edge | near):
            ok["range"] = False
    return ok


def signature_ranges(sig: Signature1D, eps: float) -> list[tuple[float, float]]:
    if not 0 < eps <= sig.delta:
        raise ValueError(f"eps must lie in (0, {sig.delta}], got {eps}")
    return [(v - eps, v + eps) for v in sig.vertices]


def visits_ranges(Q: Curve, ranges, tol: float = _TOL) -> bool:
    """True if ``Q`` has vertices inside ``ranges``, one per range, in order."""
    y = _values_1d(Q)
    j = 0
    for lo, hi in ranges:
        while j < len(y) and not (lo - tol <= y[j] <= hi + tol):
            j += 1
        if j == len(y):
            return False
        j += 1
    return True


# ---------------------------------------------------------------- scheme


class ContinuousTable(HashTable):
    def __init__(self, params, seed, index=0):
        super().__init__(params, seed, index)
        self.shift = sample_shift(params.delta, 1, np.random.default_rng(self.seed))

    def hash_input(self, P, rng=None):
        return continuous_hash(P, self.params, self.shift, self.scheme_id)


class ContinuousScheme(Scheme):
    """Shifted 1D grid followed by removal of non-turning vertices."""

    variant = "continuous1d"
    table_class = ContinuousTable

    def alpha1(self, m1, m2):
        return 0.5

    def verify_kind(self):
        return DistanceKind("continuous-frechet-1d")

    def certified_radius(self, m1, m2):
        return self.params.delta

    def sample_batch(self, P, Q, n, rng):
        return {"shift": rng.uniform(0.0, self.params.delta, size=(n, 1))}

    def collide_batch(self, P, Q, batch):
        delta = self.params.delta
        cp = _cells(_values_1d(P)[None, :], -batch["shift"], delta)
        cq = _cells(_values_1d(Q)[None, :], -batch["shift"], delta)
        out = np.empty(len(cp), dtype=bool)
        cache: dict[tuple, tuple] = {}
        for k in range(len(cp)):
            a, b = tuple(cp[k].tolist()), tuple(cq[k].tolist())
            ka = cache.get(a) or cache.setdefault(a, tuple(remove_collinear(a)))
            kb = cache.get(b) or cache.setdefault(b, tuple(remove_collinear(b)))
            out[k] = ka == kb
        return out

    def trial_keys(self, P, Q, batch, k):
        shift = GridShift(self.params.delta, batch["shift"][k])
        return continuous_hash(P, self.params, shift), continuous_hash(Q, self.params, shift)
