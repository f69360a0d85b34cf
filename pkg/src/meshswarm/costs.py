"""Decision cost terms and the constrained per-tick objective.

Each agent scores candidate next positions with three normalized terms,
cohesion (stay in communication range of the swarm), safety (altitude
band) and goal (progress toward the claimed tile), combined as a weighted
sum. Separation is not a cost term: it is the hard minimum-distance
constraint evaluated by feasible().
"""

import math
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

# The five adaptation variables first, then the fixed shape parameters.
PROFILE_KEYS = (
    "w_eta", "w_z", "w_g", "delta_min", "c_penalty",
    "alpha", "c_dist", "z_min", "z_max",
)


@dataclass
class CostProfile:
    """Weights and shape parameters of the decision objective.

    delta_min is the hard separation margin in meters; the rest are
    dimensionless weights except c_dist (goal distance scale, m) and the
    altitude band bounds z_min/z_max (m).
    """

    w_eta: float = 0.25
    w_z: float = 0.2
    w_g: float = 0.6
    delta_min: float = 5.0
    c_penalty: float = 0.5
    alpha: float = 0.5
    c_dist: float = 50.0
    z_min: float = 35.0
    z_max: float = 100.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "CostProfile":
        unknown = set(data) - set(PROFILE_KEYS)
        if unknown:
            raise ValueError("unknown profile keys: %s" % ", ".join(sorted(unknown)))
        return cls(**{k: float(v) for k, v in data.items()})


@dataclass
class DecisionContext:
    """Everything one optimize call needs besides the candidate point."""

    profile: CostProfile
    comm_range: float
    box_lower: np.ndarray
    box_upper: np.ndarray
    neighbors: np.ndarray            # (K, 3) predicted neighbor positions
    goal: Optional[np.ndarray]       # (3,) claimed or candidate tile center


def make_context(position: np.ndarray, velocity: np.ndarray, max_acc: np.ndarray,
                 dt: float, neighbors: np.ndarray, goal: Optional[np.ndarray],
                 profile: CostProfile, comm_range: float) -> DecisionContext:
    """Build a context whose search box is the one-step reachable set.

    Per axis the box is [p + v*dt - a_max*dt^2/2, p + v*dt + a_max*dt^2/2].
    """
    center = position + velocity * dt
    half = 0.5 * max_acc * dt * dt
    return DecisionContext(
        profile=profile,
        comm_range=comm_range,
        box_lower=center - half,
        box_upper=center + half,
        neighbors=np.asarray(neighbors, dtype=float).reshape(-1, 3),
        goal=goal,
    )


def cohesion_cost(distances: Sequence[float], profile: CostProfile,
                  comm_range: float) -> float:
    """Connectivity pressure from neighbor distances; in [-1, 1].

    Distances are sorted ascending and discounted geometrically, so the
    nearest neighbor dominates. Each distance maps through a linear ramp
    that rewards proximity, switching to the flat c_penalty once a
    neighbor is at 75% of communication range or farther. No neighbors
    means no term (0).
    """
    n = len(distances)
    if n == 0:
        return 0.0
    total = 0.0
    weight = 1.0
    for d in sorted(distances):
        if d < 0.75 * comm_range:
            f = 2.0 * d / comm_range - 1.0
        else:
            f = profile.c_penalty
        weight *= profile.alpha
        total += weight * f
    return min(1.0, total / n)


def safety_cost(z: float, profile: CostProfile) -> float:
    """Altitude penalty, quadratic away from the [z_min, z_max] band floor."""
    if profile.z_min > z:
        t = z / profile.z_min - 1.0
    else:
        t = (z - profile.z_min) / profile.z_max
    return min(1.0, t * t)


def goal_cost(distance: float, profile: CostProfile) -> float:
    """Saturating distance-to-goal cost in [0, 1)."""
    return min(1.0, (2.0 / math.pi) * math.atan(distance / profile.c_dist))


def _neighbor_distances(candidate: np.ndarray, neighbors: np.ndarray) -> List[float]:
    out = []
    for k in range(neighbors.shape[0]):
        dx = candidate[0] - neighbors[k, 0]
        dy = candidate[1] - neighbors[k, 1]
        dz = candidate[2] - neighbors[k, 2]
        out.append(math.sqrt(dx * dx + dy * dy + dz * dz))
    return out


def objective(candidate: np.ndarray, ctx: DecisionContext) -> float:
    """Weighted sum of the cost terms at a candidate next position.

    The goal term is omitted entirely (not merely zero-weighted) when the
    context carries no goal.
    """
    prof = ctx.profile
    dists = _neighbor_distances(candidate, ctx.neighbors)
    value = prof.w_eta * cohesion_cost(dists, prof, ctx.comm_range)
    value += prof.w_z * safety_cost(candidate[2], prof)
    if ctx.goal is not None:
        dx = candidate[0] - ctx.goal[0]
        dy = candidate[1] - ctx.goal[1]
        dz = candidate[2] - ctx.goal[2]
        value += prof.w_g * goal_cost(math.sqrt(dx * dx + dy * dy + dz * dz), prof)
    return value


def feasible(candidate: np.ndarray, ctx: DecisionContext) -> Tuple[bool, float]:
    """Constraint check with a scalar violation magnitude.

    Violation sums per-axis excursion outside the reachability box and,
    for every predicted neighbor, the depth of intrusion inside the
    delta_min separation sphere. Zero violation means feasible.
    """
    violation = 0.0
    for axis in range(3):
        if candidate[axis] < ctx.box_lower[axis]:
            violation += ctx.box_lower[axis] - candidate[axis]
        elif candidate[axis] > ctx.box_upper[axis]:
            violation += candidate[axis] - ctx.box_upper[axis]
    for d in _neighbor_distances(candidate, ctx.neighbors):
        if d < ctx.profile.delta_min:
            violation += ctx.profile.delta_min - d
    return violation == 0.0, violation
