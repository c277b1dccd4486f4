"""Monte Carlo checks of collision bounds for a single pair of curves.

``near`` claims are lower bounds on the collision probability of a pair
satisfying the family's closeness premise; ``far`` claims say a pair beyond
``c*r`` never collides.  Both are judged with a one-sided 99% Hoeffding
interval.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .curves import Curve, DistanceKind, InfeasibleTraversal, distance, random_curve
from .dataset import near_copy
from .grid import SchemeParams, plan_basic, plan_basic_dtw, plan_constant
from .index import estimate_collision_probability, make_scheme
from .partition import plan_tradeoff
from .constrained import plan_anchored, plan_anchored_dtw, plan_speed, plan_speed_dtw
from .signature import plan_continuous

__all__ = ["SCHEME_NAMES", "plan_scheme", "premise_kind", "near_bound", "ProbeReport", "run_probe", "generate_pair"]

SCHEME_NAMES = ("basic", "basic-dtw", "constant", "tradeoff", "anchored", "anchored-dtw",
                "speed", "speed-dtw", "continuous")


def plan_scheme(name: str, r: float, d: int, m: int, K: int | None = None, w: int | None = None,
                ell: int | None = None) -> SchemeParams:
    """Planned parameters for a family, by its command-line name."""
    if name == "basic":
        return plan_basic(r, d, m)
    if name == "basic-dtw":
        return plan_basic_dtw(r, d, m)
    if name == "constant":
        return plan_constant(r, d, m)
    if name == "tradeoff":
        return plan_tradeoff(r, d, m, K or 1)
    if name == "anchored":
        return plan_anchored(r, d, ell or 1, w or 2)
    if name == "anchored-dtw":
        return plan_anchored_dtw(r, d, m, m, w or 2, ell or 1)
    if name == "speed":
        return plan_speed(r, d, ell or 1, w or 1)
    if name == "speed-dtw":
        return plan_speed_dtw(r, d, m, m, w or 1, ell or 1)
    if name == "continuous":
        if d != 1:
            raise ValueError("the continuous scheme is one-dimensional")
        return plan_continuous(r, m)
    raise ValueError(f"unknown scheme {name!r}")


def premise_kind(params: SchemeParams) -> DistanceKind:
    """Distance in which the near premise of a family is stated."""
    if params.variant in ("anchored", "speed"):
        return DistanceKind.make(params.metric, params.variant, params.w)
    return DistanceKind.make(params.metric)


def _dist(P, Q, kind) -> float:
    try:
        return distance(P, Q, kind)
    except InfeasibleTraversal:
        return math.inf


def near_bound(params: SchemeParams, P: Curve, Q: Curve) -> tuple[float, bool, float]:
    """``(bound, premise_holds, premise_distance)`` for the pair.

    Pair-specific bounds are used where the family has one (basic,
    continuous); otherwise the family's lower bound under its premise.
    """
    p = params
    dist = _dist(P, Q, premise_kind(p))
    m = min(P.m, Q.m)
    if p.variant in ("basic", "continuous1d"):
        if p.metric == "dtw":
            return max(0.0, 1 - p.d * dist / p.delta), True, dist
        dim = 1 if p.variant == "continuous1d" else p.d
        return max(0.0, 1 - 2 * dim * m * dist / p.delta), True, dist
    scheme = make_scheme(p)
    if p.variant == "constant":
        return scheme.alpha1(P.m, Q.m), p.delta > 4 * dist, dist
    if p.variant == "tradeoff":
        return scheme.alpha1(p.m_bound, p.m_bound), dist < p.r and max(P.m, Q.m) <= p.m_bound, dist
    return scheme.alpha1(P.m, Q.m), dist < p.r, dist


@dataclass
class ProbeReport:
    scheme: dict
    pair: dict
    claim: str
    bound: float
    premise_holds: bool
    estimate: float
    half_width: float
    threshold: float
    collisions: int
    trials: int
    verdict: str
    rule: str = field(default="")

    def to_dict(self) -> dict:
        return asdict(self)


def run_probe(params: SchemeParams, P: Curve, Q: Curve, claim: str, trials: int,
              rng: np.random.Generator) -> ProbeReport:
    scheme = make_scheme(params)
    est = estimate_collision_probability(scheme, P, Q, trials, rng)
    pair = {"P": P.id, "Q": Q.id, "m1": P.m, "m2": Q.m}
    if claim == "near":
        bound, premise, dist = near_bound(params, P, Q)
        pair["premise_distance"] = dist
        threshold = bound - est.half_width
        ok = est.estimate >= threshold
        rule = "pass iff estimate + half_width >= bound"
    elif claim == "far":
        dist = _dist(P, Q, scheme.verify_kind())
        premise = dist > params.far_radius
        pair["verify_distance"] = dist
        bound = threshold = 0.0
        ok = est.collisions == 0
        rule = "pass iff no collision"
    else:
        raise ValueError(f"unknown claim {claim!r}")
    return ProbeReport(params.to_dict(), pair, claim, bound, premise, est.estimate, est.half_width,
                       threshold, est.collisions, est.trials, "pass" if ok and premise else "fail", rule)


def generate_pair(params: SchemeParams, claim: str, m: int, rng: np.random.Generator) -> tuple[Curve, Curve]:
    """A random pair meeting the claim's premise."""
    P = random_curve(rng, m, params.d, scale=2 * params.delta, id="P")
    if claim == "near":
        radius = params.r / 2
        if params.metric == "dtw":
            radius /= m
        while True:
            Q = near_copy(P, rng, radius, id="Q")
            if near_bound(params, P, Q)[1]:
                return P, Q
    kind = make_scheme(params).verify_kind()
    direction = rng.normal(size=params.d)
    direction /= np.linalg.norm(direction)
    step = 1.05 * params.far_radius
    while True:
        Q = Curve(P.points + step * direction, id="Q")
        if _dist(P, Q, kind) > params.far_radius:
            return P, Q
        step *= 1.5
