"""Move classification, style vectors, beta reward, and chaotic route variation."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .model import (
    ClimberProfile,
    Hold,
    HoldType,
    MOVE_TYPES,
    MoveType,
    NUM_MOVE_TYPES,
    Route,
    Wall,
    reach_limit,
    validate_route,
)
from .planner import FREE, LIMBS, Beta, BodyState, Move


@dataclass(frozen=True)
class StyleVector:
    """Point on the move-type simplex: the movement content of a beta."""

    weights: dict[MoveType, float]

    def __post_init__(self):
        total = sum(self.weights.get(t, 0.0) for t in MOVE_TYPES)
        if abs(total - 1.0) > 1e-9 or any(v < -1e-12 for v in self.weights.values()):
            raise ValueError("style weights must form a probability distribution")

    def as_array(self) -> np.ndarray:
        return np.array([self.weights.get(t, 0.0) for t in MOVE_TYPES], dtype=np.float64)

    def to_json(self) -> dict:
        return {t.value: self.weights.get(t, 0.0) for t in MOVE_TYPES}

    @staticmethod
    def from_json(obj: dict) -> "StyleVector":
        tags = {t.value: t for t in MOVE_TYPES}
        weights = {tags[k]: float(v) for k, v in obj.items() if k in tags}
        total = sum(weights.values())
        if total <= 0:
            raise ValueError("style vector needs positive total weight")
        return StyleVector({t: w / total for t, w in weights.items()})

    @staticmethod
    def uniform() -> "StyleVector":
        return StyleVector({t: 1.0 / NUM_MOVE_TYPES for t in MOVE_TYPES})


@dataclass(frozen=True)
class RewardWeights:
    diversity: float = 0.4
    style_match: float = 0.3
    novelty: float = 0.2
    repetition: float = 0.1


DEFAULT_REWARD_WEIGHTS = RewardWeights()


def classify_move(move: Move, from_state: BodyState, wall: Wall,
                  climber: ClimberProfile) -> MoveType:
    """Deterministic first-match-wins taxonomy over a single legal move."""
    ids = sorted({h for h in (*from_state.key(), move.to_hold, move.from_hold) if h != FREE})
    index = {hid: i for i, hid in enumerate(ids)}
    by_id = wall.holds_by_id
    n = len(ids)
    hx = np.array([by_id[h].x for h in ids], dtype=np.float64)
    hy = np.array([by_id[h].y for h in ids], dtype=np.float64)
    dx = hx[:, None] - hx[None, :]
    dy = hy[:, None] - hy[None, :]
    dmat = np.sqrt(dx * dx + dy * dy)

    def idx(hold: str) -> int:
        return n if hold == FREE else index[hold]

    lh, rh, lf, rf = (idx(h) for h in from_state.key())
    limb = LIMBS.index(move.limb)
    frm = (lh, rh, lf, rf)[limb]
    reach = reach_limit(climber)
    com = from_state.com_y(wall)
    code = kernels._classify_move(limb, frm, idx(move.to_hold), lh, rh, lf, rf,
                                  n, dmat, hx, hy,
                                  reach["handHand"], reach["handFoot"], com)
    return MOVE_TYPES[int(code)]


def style_vector(beta: Beta) -> StyleVector:
    """Normalized move-type histogram; the empty beta is uniform by convention."""
    if not beta.moves:
        return StyleVector.uniform()
    counts = {t: 0 for t in MOVE_TYPES}
    for m in beta.moves:
        counts[m.move_type] += 1
    k = len(beta.moves)
    return StyleVector({t: c / k for t, c in counts.items()})


def _normalized_entropy(weights: np.ndarray) -> float:
    h = 0.0
    for w in weights:
        if w > 0.0:
            h -= w * math.log(w)
    return h / math.log(NUM_MOVE_TYPES)


def _edit_distance(a: Sequence, b: Sequence) -> int:
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, start=1):
        cur = [i]
        for j, y in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def _max_run(types: Sequence[MoveType]) -> int:
    best = run = 0
    last = None
    for t in types:
        run = run + 1 if t == last else 1
        last = t
        best = max(best, run)
    return best


def reward_from_types(types: Sequence[MoveType],
                      target_style: Optional[StyleVector],
                      prior_type_sequences: Sequence[Sequence[MoveType]],
                      weights: RewardWeights = DEFAULT_REWARD_WEIGHTS) -> float:
    """Reward of a move-type sequence (what `reward` computes for a beta)."""
    if types:
        counts = np.zeros(NUM_MOVE_TYPES)
        for t in types:
            counts[MOVE_TYPES.index(t)] += 1
        sv = counts / counts.sum()
    else:
        sv = np.full(NUM_MOVE_TYPES, 1.0 / NUM_MOVE_TYPES)

    diversity = _normalized_entropy(sv)

    if target_style is not None:
        match = 1.0 - float(np.abs(sv - target_style.as_array()).sum()) / 2.0
    else:
        match = 0.0

    if prior_type_sequences:
        novelty = min(
            _edit_distance(types, prior) / max(len(types), len(prior), 1)
            for prior in prior_type_sequences
        )
    else:
        novelty = 1.0  # nothing like it exists yet

    repetition = _max_run(types) / len(types) if types else 0.0

    return (weights.diversity * diversity
            + weights.style_match * match
            + weights.novelty * novelty
            - weights.repetition * repetition)


def reward(beta: Beta, target_style: Optional[StyleVector] = None,
           prior_betas: Sequence[Beta] = (),
           weights: RewardWeights = DEFAULT_REWARD_WEIGHTS) -> float:
    """Scalar reward of a beta: diversity + style match + novelty - repetition.

    Depends only on the move-type sequence and the given references, so it is
    invariant under hold relabeling.
    """
    return reward_from_types(beta.move_types(), target_style,
                             [b.move_types() for b in prior_betas], weights)


class StyleError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class LorenzState:
    x: float
    y: float
    z: float
    sigma: float = 10.0
    rho: float = 28.0
    beta: float = 8.0 / 3.0


MAX_LORENZ_DT = 0.02


def lorenz_trajectory(initial: LorenzState, dt: float, steps: int) -> list[LorenzState]:
    """RK4-integrated chaotic trajectory, steps+1 samples including the initial."""
    if dt <= 0 or dt > MAX_LORENZ_DT:
        raise StyleError("DT_TOO_LARGE", f"dt must lie in (0, {MAX_LORENZ_DT}]")
    if steps < 1:
        raise StyleError("RANGE", "steps must be >= 1")
    out = np.empty((steps + 1, 3), dtype=np.float64)
    kernels.lorenz_kernel(initial.x, initial.y, initial.z,
                          initial.sigma, initial.rho, initial.beta,
                          dt, steps, out)
    return [LorenzState(float(x), float(y), float(z),
                        initial.sigma, initial.rho, initial.beta)
            for x, y, z in out]


# Canonical per-type base difficulty used to pick the "nearest" alternative
# type during variation; foothold excluded for hand-capable holds.
TYPE_BASE_DIFFICULTY = {
    HoldType.JUG: 0.15,
    HoldType.VOLUME: 0.25,
    HoldType.FOOTHOLD: 0.35,
    HoldType.POCKET: 0.45,
    HoldType.PINCH: 0.55,
    HoldType.SLOPER: 0.70,
    HoldType.CRIMP: 0.80,
}

VARY_MAX_DISPLACEMENT = 0.5   # meters at intensity 1
VARY_BURN_IN = 100            # integrator steps before sampling
VARY_STRIDE = 10              # integrator steps between per-move samples
VARY_SWAP_Z = 35.0            # z above this swaps the hold type


def _nearest_alternative_type(hold: Hold) -> HoldType:
    candidates = [t for t in HoldType if t is not hold.type]
    if hold.is_hand:
        candidates = [t for t in candidates if t is not HoldType.FOOTHOLD]
    base = TYPE_BASE_DIFFICULTY[hold.type]
    return min(candidates, key=lambda t: (abs(TYPE_BASE_DIFFICULTY[t] - base), t.value))


def vary_route(route: Route, wall: Wall, beta: Beta, intensity: float,
               seed: int) -> tuple[Route, Wall]:
    """Chaos-driven variation: displace the destination hold of each move.

    A seeded trajectory sample is paired with each move; its (x, y) components
    pick the displacement direction and magnitude (at most intensity * 0.5 m),
    and a large z swaps the hold type to the nearest-difficulty alternative.
    Each hold is edited at most once; results are clamped into the wall so the
    varied route always validates. Zero intensity returns the inputs unchanged.
    """
    if not 0.0 <= intensity <= 1.0:
        raise StyleError("RANGE", "intensity must lie in [0,1]")
    if intensity == 0.0 or not beta.moves:
        return route, wall

    rng = np.random.default_rng(int(seed))
    x0, y0, z0 = rng.uniform(-15.0, 15.0, 3)
    steps = VARY_BURN_IN + VARY_STRIDE * len(beta.moves)
    traj = np.empty((steps + 1, 3), dtype=np.float64)
    kernels.lorenz_kernel(float(x0), float(y0), float(z0), 10.0, 28.0, 8.0 / 3.0,
                          0.01, steps, traj)

    new_holds = {h.id: h for h in wall.holds}
    edited: set[str] = set()
    for i, move in enumerate(beta.moves):
        hid = move.to_hold
        if hid == FREE or hid in edited:
            continue
        edited.add(hid)
        sx, sy, sz = traj[VARY_BURN_IN + VARY_STRIDE * i]
        norm = math.hypot(sx, sy)
        hold = new_holds[hid]
        if norm > 1e-12:
            mag = intensity * VARY_MAX_DISPLACEMENT * min(1.0, norm / 20.0)
            nx = hold.x + mag * (sx / norm)
            ny = hold.y + mag * (sy / norm)
            # clamp into the wall: projection can only shrink the displacement
            nx = min(max(nx, 0.0), wall.width)
            ny = min(max(ny, 0.0), wall.height)
            hold = replace(hold, x=nx, y=ny)
        if sz > VARY_SWAP_Z:
            hold = replace(hold, type=_nearest_alternative_type(hold))
        new_holds[hid] = hold

    new_wall = Wall(width=wall.width, height=wall.height, panels=wall.panels,
                    holds=tuple(new_holds[h.id] for h in wall.holds))
    report = validate_route(route, new_wall)
    if not report.ok:  # pragma: no cover - clamping keeps the route valid
        return route, wall
    return route, new_wall
