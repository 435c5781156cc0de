"""Goal-directed route generation: annealed hold-placement search.

Each proposal edits one hold (move / retype / add / remove), the candidate is
re-planned and re-graded, and acceptance follows the usual exp(-delta/T) rule.
The objective rewards hitting the target grade, a rewarding beta, and a
positive necessitation margin: the intended key moves must lie on the path of
least resistance with slack, not merely be possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .grading import GradeSet, GradingContext, GradingError, assign_grade
from .model import (
    ClimberProfile,
    GradeLabel,
    Hold,
    HoldType,
    Route,
    Wall,
    grade_step_distance,
    uniform_exposure,
    validate_route,
)
from .params import DEFAULT_PARAMS, EngineParams, MARGIN_SENTINEL, UNREACHABLE_PENALTY
from .planner import Beta, PlannerError, UnreachableError, plan_beta
from .style import StyleVector, reward, reward_from_types


@dataclass(frozen=True)
class GenerationConfig:
    target_grade: GradeLabel
    target_style: Optional[StyleVector] = None
    max_iterations: int = 2000
    initial_temperature: float = 1.0
    cooling_rate: float = 0.9975
    w_grade: float = 1.0
    w_reward: float = 0.5
    w_necessity: float = 0.5
    seed: int = 0
    hold_budget: int = 12
    in_loop_population: int = 200  # reduced Monte-Carlo budget inside the loop

    def __post_init__(self):
        if not 0.0 < self.cooling_rate < 1.0:
            raise ValueError("cooling_rate must lie in (0,1)")
        if self.hold_budget < 2:
            raise ValueError("hold_budget must be >= 2 (start + finish)")
        if min(self.w_grade, self.w_reward, self.w_necessity) < 0:
            raise ValueError("objective weights must be >= 0")

    @staticmethod
    def from_json(obj: dict) -> "GenerationConfig":
        style = obj.get("target_style")
        return GenerationConfig(
            target_grade=GradeLabel.parse(obj["target_grade"]),
            target_style=StyleVector.from_json(style) if style else None,
            max_iterations=int(obj.get("max_iterations", 2000)),
            initial_temperature=float(obj.get("initial_temperature", 1.0)),
            cooling_rate=float(obj.get("cooling_rate", 0.9975)),
            w_grade=float(obj.get("w_grade", 1.0)),
            w_reward=float(obj.get("w_reward", 0.5)),
            w_necessity=float(obj.get("w_necessity", 0.5)),
            seed=int(obj.get("seed", 0)),
            hold_budget=int(obj.get("hold_budget", 12)),
            in_loop_population=int(obj.get("in_loop_population", 200)),
        )


@dataclass
class GenerationReport:
    iterations: int
    best_objective: float
    objective_trace: list[float]
    achieved_grade: Optional[GradeLabel]
    achieved_reward: float
    necessitation_margin: float
    achieved_grade_in_loop: Optional[GradeLabel] = None
    seed: int = 0

    def to_json(self) -> dict:
        return {
            "iterations": self.iterations,
            "best_objective": self.best_objective,
            "objective_trace": self.objective_trace,
            "achieved_grade": str(self.achieved_grade) if self.achieved_grade else None,
            "achieved_reward": self.achieved_reward,
            "necessitation_margin": self.necessitation_margin,
            "achieved_grade_in_loop": (str(self.achieved_grade_in_loop)
                                       if self.achieved_grade_in_loop else None),
            "seed": self.seed,
        }


@dataclass
class GenerationResult:
    route: Route
    wall: Wall
    beta: Optional[Beta]
    report: GenerationReport


class GenerationError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def representative_climber(population: Sequence[ClimberProfile]) -> ClimberProfile:
    """Population centroid used for reward and necessitation probes."""
    n = len(population)
    return ClimberProfile(
        ability=sum(c.ability for c in population) / n,
        height=sum(c.height for c in population) / n,
        arm_span=sum(c.arm_span for c in population) / n,
        fear_sensitivity=sum(c.fear_sensitivity for c in population) / n,
        exposure=uniform_exposure(),
    )


def _softplus(x: float) -> float:
    return max(x, 0.0) + math.log1p(math.exp(-abs(x)))


def necessitation_margin(route: Route, wall: Wall, beta: Beta,
                         climber: ClimberProfile,
                         params: EngineParams = DEFAULT_PARAMS) -> float:
    """Extra cost of the best beta that avoids a key move; the sentinel when none exists.

    Key moves are the top-k reward contributors (k = min(3, len)); for each,
    the probe bans that (limb, destination) pair and re-plans. A positive
    minimum means the intended moves sit on the least-resistance path with slack.
    """
    if not beta.moves:
        return MARGIN_SENTINEL
    types = list(beta.move_types())
    full = reward_from_types(types, None, ())
    contributions = []
    for i in range(len(types)):
        dropped = types[:i] + types[i + 1:]
        contributions.append((full - reward_from_types(dropped, None, ()), -i))
    k = min(3, len(types))
    key_idx = [-(c[1]) for c in sorted(contributions, reverse=True)[:k]]

    margin = MARGIN_SENTINEL
    for i in key_idx:
        move = beta.moves[i]
        try:
            alt = plan_beta(route, wall, climber, params=params,
                            banned=(move.limb, move.to_hold))
        except (UnreachableError, PlannerError):
            continue  # no alternative: this key move is fully necessitated
        margin = min(margin, alt.total_cost - beta.total_cost)
    return margin


def objective(route: Route, wall: Wall, config: GenerationConfig,
              corpus: Sequence[GradeSet], population: Sequence[ClimberProfile],
              seed: int, params: EngineParams = DEFAULT_PARAMS,
              context: Optional[GradingContext] = None,
              climber: Optional[ClimberProfile] = None) -> float:
    """Lower-is-better layout score; unreachable candidates get a flat penalty."""
    if climber is None:
        climber = representative_climber(population)
    try:
        beta = plan_beta(route, wall, climber, params=params)
    except (UnreachableError, PlannerError):
        return UNREACHABLE_PENALTY
    try:
        assignment = assign_grade(route, wall, corpus, population, seed=seed,
                                  params=params, context=context)
    except GradingError:
        return UNREACHABLE_PENALTY
    g = grade_step_distance(assignment.grade, config.target_grade)
    r = reward(beta, config.target_style, ())
    m = necessitation_margin(route, wall, beta, climber, params)
    return (config.w_grade * g
            + config.w_reward * (1.0 - r)
            + config.w_necessity * _softplus(-m))


_HAND_TYPES = (HoldType.JUG, HoldType.CRIMP, HoldType.SLOPER,
               HoldType.PINCH, HoldType.POCKET, HoldType.VOLUME)

NEIGHBOR_MAX_SHIFT = 0.4
NEIGHBOR_RETRIES = 16


def _next_hold_id(wall: Wall) -> str:
    n = 0
    for h in wall.holds:
        if h.id.startswith("g") and h.id[1:].isdigit():
            n = max(n, int(h.id[1:]) + 1)
    return f"g{n:03d}"


def _compatible_types(hold: Hold) -> list[HoldType]:
    if hold.is_hand:
        return [t for t in _HAND_TYPES if t is not hold.type]
    return [t for t in HoldType if t is not hold.type]


def neighbor(route: Route, wall: Wall, rng: np.random.Generator,
             hold_budget: int = 12) -> tuple[Route, Wall]:
    """One random layout edit; invalid edits retried, identity after 16 misses."""
    by_id = wall.holds_by_id
    protected = set(route.start_hold_ids) | {route.finish_hold_id}
    for _ in range(NEIGHBOR_RETRIES):
        editable = sorted(route.hold_ids - protected)
        kinds = ["retype"]
        if editable:
            kinds.extend(["move", "remove"])
        if len(route.hold_ids) < hold_budget:
            kinds.append("add")
        kinds.sort()
        kind = kinds[int(rng.integers(0, len(kinds)))]

        if kind == "move":
            hid = editable[int(rng.integers(0, len(editable)))]
            hold = by_id[hid]
            angle = rng.uniform(0.0, 2.0 * math.pi)
            radius = rng.uniform(0.0, NEIGHBOR_MAX_SHIFT)
            nx = min(max(hold.x + radius * math.cos(angle), 0.0), wall.width)
            ny = min(max(hold.y + radius * math.sin(angle), 0.0), wall.height)
            new_wall = replace(wall, holds=tuple(
                replace(h, x=nx, y=ny) if h.id == hid else h for h in wall.holds))
            new_route = route
        elif kind == "retype":
            pool = sorted(route.hold_ids)
            hid = pool[int(rng.integers(0, len(pool)))]
            hold = by_id[hid]
            options = _compatible_types(hold)
            new_type = options[int(rng.integers(0, len(options)))]
            new_wall = replace(wall, holds=tuple(
                replace(h, type=new_type) if h.id == hid else h for h in wall.holds))
            new_route = route
        elif kind == "add":
            anchors = sorted(route.hold_ids)
            anchor = by_id[anchors[int(rng.integers(0, len(anchors)))]]
            angle = rng.uniform(0.0, 2.0 * math.pi)
            radius = rng.uniform(0.15, 0.6)
            nx = min(max(anchor.x + radius * math.cos(angle), 0.0), wall.width)
            ny = min(max(anchor.y + radius * math.sin(angle), 0.0), wall.height)
            diff = min(max(anchor.difficulty + rng.uniform(-0.3, 0.3), 0.0), 1.0)
            types = [t for t in _HAND_TYPES] if anchor.is_hand else list(HoldType)
            new_hold = Hold(
                id=_next_hold_id(wall), x=nx, y=ny,
                type=types[int(rng.integers(0, len(types)))],
                difficulty=diff, roles=anchor.roles,
            )
            new_wall = replace(wall, holds=wall.holds + (new_hold,))
            new_route = replace(route, hold_ids=route.hold_ids | {new_hold.id})
        else:  # remove
            hid = editable[int(rng.integers(0, len(editable)))]
            new_route = replace(route, hold_ids=route.hold_ids - {hid})
            new_wall = replace(wall, holds=tuple(h for h in wall.holds if h.id != hid))

        if validate_route(new_route, new_wall).ok:
            return new_route, new_wall
    return route, wall


def _random_initial_route(wall: Wall, rng: np.random.Generator,
                          hold_budget: int) -> Optional[Route]:
    hand_holds = [h for h in wall.holds if h.is_hand]
    if len(hand_holds) < 2:
        return None
    ids = [h.id for h in wall.holds]
    k = min(hold_budget, len(ids))
    picked = list(rng.choice(len(ids), size=k, replace=False))
    chosen = [wall.holds[i] for i in picked]
    hands = sorted((h for h in chosen if h.is_hand), key=lambda h: (h.y, h.id))
    if len(hands) < 2:
        return None
    start, finish = hands[0], hands[-1]
    if start.id == finish.id:
        return None
    route = Route(
        name="generated",
        hold_ids=frozenset(h.id for h in chosen),
        start_hold_ids=(start.id,),
        finish_hold_id=finish.id,
    )
    return route if validate_route(route, wall).ok else None


def generate_route(wall: Wall, seed_route: Optional[Route],
                   config: GenerationConfig, corpus: Sequence[GradeSet],
                   population: Sequence[ClimberProfile],
                   params: EngineParams = DEFAULT_PARAMS,
                   progress: Optional[Callable[[int, float], None]] = None,
                   cancelled: Optional[Callable[[], bool]] = None) -> GenerationResult:
    """Simulated annealing over hold layouts; deterministic given config.seed."""
    rng = np.random.default_rng(config.seed)
    reduced = population[:config.in_loop_population]
    context = GradingContext(corpus, reduced, config.seed, params)
    climber = representative_climber(population)

    if seed_route is not None:
        if not validate_route(seed_route, wall).ok:
            raise GenerationError("NO_VALID_START", "seed route fails validation")
        current_route, current_wall = seed_route, wall
    else:
        current_route = None
        for _ in range(1000):
            current_route = _random_initial_route(wall, rng, config.hold_budget)
            if current_route is not None:
                break
        if current_route is None:
            raise GenerationError("NO_VALID_START", "could not build a valid initial route")
        current_wall = wall

    def score(r: Route, w: Wall) -> float:
        return objective(r, w, config, corpus, reduced, config.seed,
                         params=params, context=context, climber=climber)

    current_obj = score(current_route, current_wall)
    best_route, best_wall, best_obj = current_route, current_wall, current_obj
    trace: list[float] = []
    temperature = config.initial_temperature
    iterations = 0

    for i in range(config.max_iterations):
        if cancelled is not None and cancelled():
            break
        iterations = i + 1
        cand_route, cand_wall = neighbor(current_route, current_wall, rng, config.hold_budget)
        cand_obj = score(cand_route, cand_wall)
        delta = cand_obj - current_obj
        if delta <= 0.0:
            accept = True
        elif temperature > 0.0:
            accept = rng.random() < math.exp(-delta / temperature)
        else:
            accept = False
        if accept:
            current_route, current_wall, current_obj = cand_route, cand_wall, cand_obj
            if current_obj < best_obj:
                best_route, best_wall, best_obj = current_route, current_wall, current_obj
        temperature *= config.cooling_rate
        trace.append(best_obj)
        if progress is not None:
            progress(iterations, best_obj)

    # final report: full-budget re-grade plus probes on the best layout
    beta: Optional[Beta] = None
    margin = MARGIN_SENTINEL
    achieved_reward = 0.0
    try:
        beta = plan_beta(best_route, best_wall, climber, params=params)
        achieved_reward = reward(beta, config.target_style, ())
        margin = necessitation_margin(best_route, best_wall, beta, climber, params)
    except (UnreachableError, PlannerError):
        beta = None

    achieved = None
    achieved_in_loop = None
    try:
        achieved_in_loop = assign_grade(best_route, best_wall, corpus, reduced,
                                        seed=config.seed, params=params,
                                        context=context).grade
        full_ctx = GradingContext(corpus, population, config.seed, params)
        achieved = assign_grade(best_route, best_wall, corpus, population,
                                seed=config.seed, params=params,
                                context=full_ctx).grade
    except GradingError:
        pass

    graded_route = replace(best_route, assigned_grade=achieved)
    report = GenerationReport(
        iterations=iterations,
        best_objective=best_obj,
        objective_trace=trace,
        achieved_grade=achieved,
        achieved_reward=achieved_reward,
        necessitation_margin=margin,
        achieved_grade_in_loop=achieved_in_loop,
        seed=config.seed,
    )
    return GenerationResult(route=graded_route, wall=best_wall, beta=beta, report=report)
