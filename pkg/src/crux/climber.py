"""Success-probability model, fear penalty, and seeded climber populations.

The per-move success chance is a logistic link on (ability - effective
difficulty - fear); a route's success chance is the product over the moves of
that climber's own least-resistance beta. Population sampling and ascent
simulation are fully deterministic given their seeds, with independent
per-(climber, route) streams so Monte-Carlo batches are schedule-independent.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .model import (
    ClimberProfile,
    MOVE_TYPES,
    NUM_MOVE_TYPES,
    Route,
    Wall,
    reach_limit,
)
from .params import DEFAULT_PARAMS, EngineParams
from .planner import Beta, BodyState, Move, UnreachableError, compile_route, plan_beta


@dataclass(frozen=True)
class PopulationSpec:
    size: int
    ability_mean: float = 1.0
    ability_std: float = 0.3
    height_mean: float = 1.75
    height_std: float = 0.0
    fear_mean: float = 0.5
    exposure_skew: float = 0.0  # 0 = uniform exposure for everyone
    seed: Optional[int] = None

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("population size must be >= 1")
        if not 0.0 <= self.exposure_skew <= 1.0:
            raise ValueError("exposure_skew must lie in [0,1]")
        if self.fear_mean < 0:
            raise ValueError("fear_mean must be >= 0")

    @staticmethod
    def from_json(obj: dict) -> "PopulationSpec":
        return PopulationSpec(
            size=int(obj["size"]),
            ability_mean=float(obj.get("ability_mean", 1.0)),
            ability_std=float(obj.get("ability_std", 0.3)),
            height_mean=float(obj.get("height_mean", 1.75)),
            height_std=float(obj.get("height_std", 0.0)),
            fear_mean=float(obj.get("fear_mean", 0.5)),
            exposure_skew=float(obj.get("exposure_skew", 0.0)),
            seed=None if obj.get("seed") is None else int(obj["seed"]),
        )

    def to_json(self) -> dict:
        return {
            "size": self.size,
            "ability_mean": self.ability_mean,
            "ability_std": self.ability_std,
            "height_mean": self.height_mean,
            "height_std": self.height_std,
            "fear_mean": self.fear_mean,
            "exposure_skew": self.exposure_skew,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class AscentResult:
    success: bool
    fall_move_index: Optional[int] = None


def derive_rng(seed: int, *parts) -> np.random.Generator:
    """Independent, order-insensitive stream for (seed, parts).

    Hash-derived so streams do not depend on how many other streams exist or
    in which order they are drawn.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(seed)).encode())
    for p in parts:
        h.update(b"\x1f")
        h.update(str(p).encode())
    return np.random.default_rng(int.from_bytes(h.digest(), "little"))


def fear_penalty(move: Move, state: BodyState, wall: Wall, climber: ClimberProfile) -> float:
    """Overhang fear: grows with panel steepness past vertical and with height."""
    com = state.com_y(wall)
    over = wall.panel_angle_at(com) - 90.0
    if over <= 0.0 or climber.fear_sensitivity == 0.0:
        return 0.0
    return climber.fear_sensitivity * (over / 90.0) * (com / wall.height)


def move_success_probability(move: Move, state: BodyState, wall: Wall,
                             climber: ClimberProfile,
                             exposure_weight: float = DEFAULT_PARAMS.exposure_weight,
                             kappa: float = DEFAULT_PARAMS.kappa) -> float:
    """Logistic success chance of one move; strictly increasing in ability.

    Effective difficulty = destination hold difficulty + a span-normalized
    distance term + an exposure deficit (zero under uniform exposure), clamped
    below at the hold difficulty; fear is added on top.
    """
    base = 0.0 if move.to_hold == "FREE" else wall.hold(move.to_hold).difficulty
    expo = climber.exposure.get(move.move_type, 0.0)
    d_eff = base + 0.5 * (move.distance / climber.arm_span) \
        + exposure_weight * (1.0 - NUM_MOVE_TYPES * expo)
    d_eff = max(d_eff, base)
    t = kappa * (climber.ability - d_eff - fear_penalty(move, state, wall, climber))
    #: exp(-softplus(-t)) == sigmoid(t) without overflow, matching the kernels
    if -t > 0:
        sp = -t + math.log1p(math.exp(t))
    else:
        sp = math.log1p(math.exp(-t))
    return math.exp(-sp)


def route_success_probability(route: Route, wall: Wall, climber: ClimberProfile,
                              params: EngineParams = DEFAULT_PARAMS) -> float:
    """Success chance on the climber's own least-resistance beta; 0 if unreachable."""
    try:
        beta = plan_beta(route, wall, climber, params=params)
    except UnreachableError:
        return 0.0
    return beta.success_probability()


def sample_population(spec: PopulationSpec, seed: Optional[int] = None) -> list[ClimberProfile]:
    """Deterministic population draw; armSpan = height, exposure skewed by exposure_skew."""
    if seed is None:
        seed = spec.seed if spec.seed is not None else 0
    rng = np.random.default_rng(int(seed))
    a_std = max(0.0, spec.ability_std)
    h_std = max(0.0, spec.height_std)
    climbers = []
    for _ in range(spec.size):
        ability = float(rng.normal(spec.ability_mean, a_std)) if a_std > 0 else spec.ability_mean
        height = float(rng.normal(spec.height_mean, h_std)) if h_std > 0 else spec.height_mean
        height = max(height, 0.5)
        hot = int(rng.integers(0, NUM_MOVE_TYPES))
        base = (1.0 - spec.exposure_skew) / NUM_MOVE_TYPES
        exposure = {t: base + (spec.exposure_skew if i == hot else 0.0)
                    for i, t in enumerate(MOVE_TYPES)}
        climbers.append(ClimberProfile(
            ability=ability,
            height=height,
            arm_span=height,
            fear_sensitivity=spec.fear_mean,
            exposure=exposure,
        ))
    return climbers


def simulate_ascent(route: Route, wall: Wall, climber: ClimberProfile,
                    rng: np.random.Generator,
                    params: EngineParams = DEFAULT_PARAMS,
                    beta: Optional[Beta] = None) -> AscentResult:
    """Walk the planned beta, sampling each move; first failure is the fall."""
    if beta is None:
        try:
            beta = plan_beta(route, wall, climber, params=params)
        except UnreachableError:
            return AscentResult(success=False, fall_move_index=0)
    for i, move in enumerate(beta.moves):
        if rng.random() >= move.success_probability:
            return AscentResult(success=False, fall_move_index=i)
    return AscentResult(success=True)


class PopulationArrays:
    """Column layout of a climber population for the batch kernel."""

    def __init__(self, climbers: Sequence[ClimberProfile]):
        m = len(climbers)
        self.size = m
        self.ability = np.array([c.ability for c in climbers], dtype=np.float64)
        self.arm_span = np.array([c.arm_span for c in climbers], dtype=np.float64)
        self.hand_foot = np.array([reach_limit(c)["handFoot"] for c in climbers], dtype=np.float64)
        self.fear = np.array([c.fear_sensitivity for c in climbers], dtype=np.float64)
        self.exposure = np.array([c.exposure_vector() for c in climbers], dtype=np.float64)


MAX_PROFILE_MOVES = 127


@dataclass
class SuccessProfiles:
    """Per-climber plan outcomes on one route: cost, move count, move probabilities."""

    status: np.ndarray      # kernels.OK / UNREACHABLE / NO_START per climber
    total_cost: np.ndarray
    n_moves: np.ndarray
    move_probs: np.ndarray  # (m, MAX_PROFILE_MOVES)

    def route_probability(self, i: int) -> float:
        if self.status[i] != kernels.OK:
            return 0.0
        p = 1.0
        for j in range(self.n_moves[i]):
            p *= self.move_probs[i, j]
        return float(p)

    def route_probabilities(self) -> np.ndarray:
        m = self.status.shape[0]
        out = np.zeros(m, dtype=np.float64)
        for i in range(m):
            out[i] = self.route_probability(i)
        return out


def success_profiles(route: Route, wall: Wall, pop: PopulationArrays,
                     params: EngineParams = DEFAULT_PARAMS) -> SuccessProfiles:
    """Batch plan one route for a whole population (the grading hot path)."""
    cr = compile_route(route, wall)
    m = pop.size
    status = np.empty(m, dtype=np.int64)
    cost = np.empty(m, dtype=np.float64)
    nmoves = np.empty(m, dtype=np.int64)
    probs = np.zeros((m, MAX_PROFILE_MOVES), dtype=np.float64)
    kernels.batch_profiles_kernel(
        cr.n, cr.dmat, cr.hx, cr.hy, cr.hdiff, cr.hhand, cr.hfoot,
        cr.pan_y0, cr.pan_y1, cr.pan_ang, wall.height,
        cr.hand_placements, cr.must_foot, cr.finish,
        pop.ability, pop.arm_span, pop.hand_foot, pop.fear, pop.exposure,
        params.kappa, params.exposure_weight, params.lambda_effort,
        status, cost, nmoves, probs)
    return SuccessProfiles(status=status, total_cost=cost, n_moves=nmoves, move_probs=probs)


def seeded_ascents(profiles: SuccessProfiles, seed: int, tag: str) -> np.ndarray:
    """One seeded ascent attempt per climber from precomputed move probabilities.

    Climber i consumes row i of a (m, MAX_PROFILE_MOVES) uniform block drawn
    from the (seed, tag) stream, so outcomes do not depend on which other
    routes were simulated or in what order.
    """
    m = profiles.status.shape[0]
    u = derive_rng(seed, "ascent", tag).random((m, MAX_PROFILE_MOVES))
    ok = np.zeros(m, dtype=bool)
    for i in range(m):
        if profiles.status[i] != kernels.OK:
            continue
        k = int(profiles.n_moves[i])
        ok[i] = bool(np.all(u[i, :k] < profiles.move_probs[i, :k]))
    return ok
