"""Locality-sensitive hashing for polygonal curves under discrete Fréchet,
DTW, their anchored and speed-constrained variants, and the 1D continuous
Fréchet distance."""

from .constrained import (
    AnchoredScheme,
    CutNoise,
    SpeedScheme,
    anchored_partition,
    constrained_hash,
    plan_anchored,
    plan_anchored_dtw,
    plan_speed,
    plan_speed_dtw,
    speed_partition,
)
from .curves import (
    Curve,
    DimensionMismatch,
    DistanceKind,
    InfeasibleTraversal,
    Traversal,
    brute_force_distance,
    constrained_distance,
    continuous_frechet_1d,
    discrete_frechet,
    distance,
    dtw,
    enumerate_traversals,
    normalize_traversal,
)
from .grid import (
    ArrayKey,
    BasicScheme,
    ConstantScheme,
    GridShift,
    LatticeKey,
    PerturbationSeq,
    SchemeParams,
    basic_hash,
    constant_hash,
    fingerprint,
    plan_basic,
    plan_basic_dtw,
    plan_constant,
    sample_perturbation,
    sample_shift,
    snap_to_grid,
)
from .index import (
    CollisionEstimate,
    IndexConfig,
    IndexTooLarge,
    NNIndex,
    estimate_collision_probability,
    make_scheme,
    plan_index,
)
from .partition import PartitionSpec, TradeoffScheme, plan_tradeoff, query_partition, sample_partition, tradeoff_hash
from .signature import (
    ContinuousScheme,
    Signature1D,
    check_signature,
    compute_signature,
    continuous_hash,
    plan_continuous,
    signature_ranges,
)

__version__ = "0.1.0"
