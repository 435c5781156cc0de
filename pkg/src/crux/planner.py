"""Beta planning: least-resistance movement sequences over four-limb body states.

A climber's beta is the cheapest path from a start state (hands on the start
hold(s)) to a state with both hands matched on the finish hold, where each
edge is a single-limb relocation priced by -ln(success probability) plus a
small effort term. The optimal planner, the greedy baseline, and the
exhaustive test oracle all live here.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional

import numpy as np

from . import kernels
from .model import (
    ClimberProfile,
    MOVE_TYPES,
    MoveType,
    Route,
    Wall,
    reach_limit,
    validate_route,
)
from .params import DEFAULT_PARAMS, EngineParams

FREE = "FREE"
LIMBS = ("LH", "RH", "LF", "RF")

# Packed state space is n^2 (n+1)^2; keep the artifact at desk scale.
MAX_PLANNER_HOLDS = 32
MAX_PATH_STATES = 256


class PlannerError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class UnreachableError(PlannerError):
    def __init__(self, message: str = "no feasible move sequence reaches the finish"):
        super().__init__("UNREACHABLE", message)


class GreedyStuckError(PlannerError):
    def __init__(self, message: str = "greedy climber has no improving move"):
        super().__init__("STUCK", message)


@dataclass(frozen=True)
class BodyState:
    """One assignment of all four limbs; FREE marks a dangling foot."""

    lh: str
    rh: str
    lf: str
    rf: str

    def assignment(self, limb: str) -> str:
        return getattr(self, limb.lower())

    def key(self) -> tuple[str, str, str, str]:
        return (self.lh, self.rh, self.lf, self.rf)

    def com_y(self, wall: Wall) -> float:
        by_id = wall.holds_by_id
        ys = [by_id[h].y for h in self.key() if h != FREE]
        return sum(ys) / len(ys)


@dataclass(frozen=True)
class Move:
    limb: str
    from_hold: str  # hold id or FREE
    to_hold: str
    distance: float
    move_type: MoveType
    cost: float
    success_probability: float


@dataclass(frozen=True)
class Beta:
    states: tuple[BodyState, ...]
    moves: tuple[Move, ...]
    total_cost: float

    def move_types(self) -> tuple[MoveType, ...]:
        return tuple(m.move_type for m in self.moves)

    def success_probability(self) -> float:
        p = 1.0
        for m in self.moves:
            p *= m.success_probability
        return p


class CompiledRoute:
    """Array view of (route, wall) in canonical hold order, shared by kernels."""

    def __init__(self, route: Route, wall: Wall):
        report = validate_route(route, wall)
        if not report.ok:
            raise PlannerError("INVALID_ROUTE", "; ".join(i.message for i in report.issues))
        self.route = route
        self.wall = wall
        self.ids: list[str] = sorted(route.hold_ids)
        if len(self.ids) > MAX_PLANNER_HOLDS:
            raise PlannerError(
                "PLANNER_LIMIT",
                f"route has {len(self.ids)} holds; planner handles at most {MAX_PLANNER_HOLDS}",
            )
        self.index = {hid: i for i, hid in enumerate(self.ids)}
        by_id = wall.holds_by_id
        holds = [by_id[h] for h in self.ids]
        n = len(holds)
        self.n = n
        self.hx = np.array([h.x for h in holds], dtype=np.float64)
        self.hy = np.array([h.y for h in holds], dtype=np.float64)
        self.hdiff = np.array([h.difficulty for h in holds], dtype=np.float64)
        self.hhand = np.array([1 if h.is_hand else 0 for h in holds], dtype=np.uint8)
        self.hfoot = np.array([1 if h.is_foot else 0 for h in holds], dtype=np.uint8)
        dx = self.hx[:, None] - self.hx[None, :]
        dy = self.hy[:, None] - self.hy[None, :]
        self.dmat = np.sqrt(dx * dx + dy * dy)
        self.pan_y0 = np.array([p.y0 for p in wall.panels], dtype=np.float64)
        self.pan_y1 = np.array([p.y1 for p in wall.panels], dtype=np.float64)
        self.pan_ang = np.array([p.angle for p in wall.panels], dtype=np.float64)
        self.finish = self.index[route.finish_hold_id]

        # hands cover the hand-capable start holds; foot-only start holds
        # must be occupied by a foot in every start state
        start_hands = [self.index[h] for h in route.start_hold_ids if by_id[h].is_hand]
        start_feet = [self.index[h] for h in route.start_hold_ids if not by_id[h].is_hand]
        if len(start_hands) == 1:
            placements = [(start_hands[0], start_hands[0])]
        elif len(start_hands) == 2:
            a, b = start_hands
            placements = [(a, b), (b, a)]
        else:
            placements = []
        self.hand_placements = np.array(placements or np.empty((0, 2)), dtype=np.int64).reshape(-1, 2)
        self.must_foot = np.array(start_feet, dtype=np.int64)

    def hold_id(self, idx: int) -> str:
        return FREE if idx >= self.n else self.ids[idx]

    def unpack(self, state: int) -> BodyState:
        n1 = self.n + 1
        rf = state % n1
        lf = (state // n1) % n1
        rh = (state // (n1 * n1)) % self.n
        lh = state // (n1 * n1 * self.n)
        return BodyState(self.ids[lh], self.ids[rh], self.hold_id(lf), self.hold_id(rf))

    def pack(self, state: BodyState) -> int:
        n1 = self.n + 1
        lh = self.index[state.lh]
        rh = self.index[state.rh]
        lf = self.n if state.lf == FREE else self.index[state.lf]
        rf = self.n if state.rf == FREE else self.index[state.rf]
        return ((lh * self.n + rh) * n1 + lf) * n1 + rf

    def climber_args(self, climber: ClimberProfile) -> tuple:
        reach = reach_limit(climber)
        expo = np.array(climber.exposure_vector(), dtype=np.float64)
        return (climber.ability, reach["handHand"], reach["handFoot"],
                climber.fear_sensitivity, expo)


# Route and Wall are immutable, so compilation is a pure function of its
# arguments; the annealing loop and Monte-Carlo grading hit this constantly.
compile_route = lru_cache(maxsize=512)(CompiledRoute)


def _limb_code(limb: str) -> int:
    return LIMBS.index(limb)


def start_states(route: Route, wall: Wall, climber: ClimberProfile) -> list[BodyState]:
    """Feasible opening states, deduplicated, in canonical key order."""
    cr = compile_route(route, wall)
    reach = reach_limit(climber)
    out = np.empty(4 * (cr.n + 1) ** 2, dtype=np.int64)
    cnt = kernels._enumerate_starts(cr.hand_placements, cr.must_foot, cr.n, cr.dmat,
                                    cr.hy, cr.hfoot, reach["handHand"], reach["handFoot"], out)
    return [cr.unpack(int(s)) for s in out[:cnt]]


def _iter_successor_indices(cr: CompiledRoute, packed: int, climber: ClimberProfile,
                            finish_locked: bool = True) -> Iterator[tuple[int, int, int]]:
    """Yield (limb_code, target_index, new_packed) in deterministic order."""
    n = cr.n
    n1 = n + 1
    rf = packed % n1
    lf = (packed // n1) % n1
    rh = (packed // (n1 * n1)) % n
    lh = packed // (n1 * n1 * n)
    reach = reach_limit(climber)
    hh, hf = reach["handHand"], reach["handFoot"]
    at_finish = lh == cr.finish and rh == cr.finish

    for limb in range(4):
        if limb <= 1 and at_finish and finish_locked:
            continue  # hands stay matched on the finish
        hi = n if limb <= 1 else n1
        for t in range(hi):
            if limb == 0:
                if t == lh or not cr.hhand[t]:
                    continue
                if not kernels._hand_move_ok(t, rh, lf, rf, n, cr.dmat, cr.hy, hh, hf):
                    continue
                new = ((t * n + rh) * n1 + lf) * n1 + rf
            elif limb == 1:
                if t == rh or not cr.hhand[t]:
                    continue
                if not kernels._hand_move_ok(t, lh, lf, rf, n, cr.dmat, cr.hy, hh, hf):
                    continue
                new = ((lh * n + t) * n1 + lf) * n1 + rf
            elif limb == 2:
                if t == lf:
                    continue
                if t < n and (not cr.hfoot[t] or not kernels._foot_move_ok(t, lh, rh, n, cr.dmat, cr.hy, hf)):
                    continue
                new = ((lh * n + rh) * n1 + t) * n1 + rf
            else:
                if t == rf:
                    continue
                if t < n and (not cr.hfoot[t] or not kernels._foot_move_ok(t, lh, rh, n, cr.dmat, cr.hy, hf)):
                    continue
                new = ((lh * n + rh) * n1 + lf) * n1 + t
            yield limb, t, new


def _build_move(cr: CompiledRoute, packed_from: int, limb: int, target: int,
                climber: ClimberProfile, params: EngineParams,
                lambda_effort: float) -> Move:
    n = cr.n
    n1 = n + 1
    rf = packed_from % n1
    lf = (packed_from // n1) % n1
    rh = (packed_from // (n1 * n1)) % n
    lh = packed_from // (n1 * n1 * n)
    ability, hh, hf, fear, expo = cr.climber_args(climber)
    cost, prob, mtype = kernels._edge_eval(
        limb, target, lh, rh, lf, rf, n, cr.dmat, cr.hx, cr.hy, cr.hdiff,
        cr.pan_y0, cr.pan_y1, cr.pan_ang, cr.wall.height,
        ability, hh, hf, fear, expo,
        params.kappa, params.exposure_weight, lambda_effort)
    frm = (lh, rh, lf, rf)[limb]
    dist = 0.0 if (frm >= n or target >= n) else float(cr.dmat[frm, target])
    return Move(
        limb=LIMBS[limb],
        from_hold=cr.hold_id(frm),
        to_hold=cr.hold_id(target),
        distance=dist,
        move_type=MOVE_TYPES[int(mtype)],
        cost=float(cost),
        success_probability=float(prob),
    )


def successors(state: BodyState, route: Route, wall: Wall, climber: ClimberProfile,
               params: EngineParams = DEFAULT_PARAMS,
               lambda_effort: Optional[float] = None) -> list[tuple[Move, BodyState]]:
    """All legal single-limb relocations from a state, deterministic order."""
    lam = params.lambda_effort if lambda_effort is None else lambda_effort
    cr = compile_route(route, wall)
    packed = cr.pack(state)
    out = []
    for limb, t, new in _iter_successor_indices(cr, packed, climber):
        out.append((_build_move(cr, packed, limb, t, climber, params, lam), cr.unpack(new)))
    return out


def move_cost(move: Move, from_state: BodyState, wall: Wall, climber: ClimberProfile,
              lambda_effort: float, route: Optional[Route] = None,
              params: EngineParams = DEFAULT_PARAMS) -> float:
    """-ln(success probability) plus the normalized-distance effort term."""
    if route is None:
        hold_ids = frozenset(k for k in (*from_state.key(), move.to_hold, move.from_hold)
                             if k != FREE)
        route = Route(name="_probe", hold_ids=hold_ids,
                      start_hold_ids=(from_state.lh,), finish_hold_id=from_state.lh)
    cr = compile_route(route, wall)
    packed = cr.pack(from_state)
    target = cr.n if move.to_hold == FREE else cr.index[move.to_hold]
    rebuilt = _build_move(cr, packed, _limb_code(move.limb), target, climber, params, lambda_effort)
    return rebuilt.cost


def _beta_from_packed(cr: CompiledRoute, states: np.ndarray, length: int,
                      climber: ClimberProfile, params: EngineParams,
                      lambda_effort: float) -> Beta:
    n = cr.n
    ability, hh, hf, fear, expo = cr.climber_args(climber)
    k = max(length, 1)
    mcost = np.empty(k, dtype=np.float64)
    mprob = np.empty(k, dtype=np.float64)
    mtype = np.empty(k, dtype=np.int64)
    mlimb = np.empty(k, dtype=np.int64)
    mfrom = np.empty(k, dtype=np.int64)
    mto = np.empty(k, dtype=np.int64)
    total = kernels._path_eval(states, length, n, cr.dmat, cr.hx, cr.hy, cr.hdiff,
                               cr.pan_y0, cr.pan_y1, cr.pan_ang, cr.wall.height,
                               ability, hh, hf, fear, expo,
                               params.kappa, params.exposure_weight, lambda_effort,
                               mcost, mprob, mtype, mlimb, mfrom, mto)
    body_states = tuple(cr.unpack(int(states[i])) for i in range(length))
    moves = []
    for i in range(length - 1):
        frm = int(mfrom[i])
        to = int(mto[i])
        dist = 0.0 if (frm >= n or to >= n) else float(cr.dmat[frm, to])
        moves.append(Move(
            limb=LIMBS[int(mlimb[i])],
            from_hold=cr.hold_id(frm),
            to_hold=cr.hold_id(to),
            distance=dist,
            move_type=MOVE_TYPES[int(mtype[i])],
            cost=float(mcost[i]),
            success_probability=float(mprob[i]),
        ))
    return Beta(states=body_states, moves=tuple(moves), total_cost=float(total))


def plan_beta(route: Route, wall: Wall, climber: ClimberProfile,
              lambda_effort: Optional[float] = None,
              params: EngineParams = DEFAULT_PARAMS,
              banned: Optional[tuple[str, str]] = None) -> Beta:
    """Minimum-total-cost beta; raises UnreachableError when none exists.

    `banned` excludes every move of one limb onto one hold id, which is how
    the necessitation probe asks for the best alternative sequence.
    """
    lam = params.lambda_effort if lambda_effort is None else lambda_effort
    cr = compile_route(route, wall)
    ability, hh, hf, fear, expo = cr.climber_args(climber)
    banned_limb, banned_hold = -1, -1
    if banned is not None:
        banned_limb = _limb_code(banned[0])
        banned_hold = cr.n if banned[1] == FREE else cr.index[banned[1]]

    out_states = np.empty(MAX_PATH_STATES, dtype=np.int64)
    k = MAX_PATH_STATES
    out_cost = np.empty(k, dtype=np.float64)
    out_prob = np.empty(k, dtype=np.float64)
    out_type = np.empty(k, dtype=np.int64)
    out_limb = np.empty(k, dtype=np.int64)
    out_from = np.empty(k, dtype=np.int64)
    out_to = np.empty(k, dtype=np.int64)
    status, cost, length = kernels.plan_kernel(
        cr.n, cr.dmat, cr.hx, cr.hy, cr.hdiff, cr.hhand, cr.hfoot,
        cr.pan_y0, cr.pan_y1, cr.pan_ang, cr.wall.height,
        cr.hand_placements, cr.must_foot, cr.finish,
        ability, hh, hf, fear, expo,
        params.kappa, params.exposure_weight, lam,
        banned_limb, banned_hold,
        out_states, out_cost, out_prob, out_type, out_limb, out_from, out_to)

    if status == kernels.NO_START:
        raise PlannerError("EMPTY", "no feasible start state")
    if status == kernels.UNREACHABLE:
        raise UnreachableError()
    if status == kernels.TRUNCATED:
        raise PlannerError("PATH_OVERFLOW", "optimal path exceeds the path buffer")
    return _beta_from_packed(cr, out_states, length, climber, params, lam)


def greedy_beta(route: Route, wall: Wall, climber: ClimberProfile,
                lambda_effort: Optional[float] = None,
                params: EngineParams = DEFAULT_PARAMS) -> Beta:
    """Height-greedy baseline: always take the cheapest strictly-upward move.

    Starts from the canonical-first start state; a move qualifies when it puts
    a hand on the finish hold or raises the highest hand. Raises
    GreedyStuckError at dead ends the optimal planner can route around.
    """
    lam = params.lambda_effort if lambda_effort is None else lambda_effort
    cr = compile_route(route, wall)
    starts = start_states(route, wall, climber)
    if not starts:
        raise PlannerError("EMPTY", "no feasible start state")
    state = starts[0]
    by_id = cr.wall.holds_by_id

    states = [state]
    moves: list[Move] = []
    total = 0.0
    seen = {state.key()}
    while not (state.lh == route.finish_hold_id and state.rh == route.finish_hold_id):
        packed = cr.pack(state)
        max_hand_y = max(by_id[state.lh].y, by_id[state.rh].y)
        best: Optional[tuple[float, int, int, int]] = None
        for limb, t, new in _iter_successor_indices(cr, packed, climber):
            target_id = cr.hold_id(t)
            is_hand = limb <= 1
            to_finish = is_hand and target_id == route.finish_hold_id
            raises_hand = is_hand and t < cr.n and cr.hy[t] > max_hand_y
            if not (to_finish or raises_hand):
                continue
            move = _build_move(cr, packed, limb, t, climber, params, lam)
            cand = (move.cost, limb, t, new)
            if best is None or cand < best:
                best = cand
        if best is None:
            raise GreedyStuckError()
        _, limb, t, new = best
        move = _build_move(cr, packed, limb, t, climber, params, lam)
        state = cr.unpack(new)
        if state.key() in seen:
            raise GreedyStuckError("greedy climber is looping")
        seen.add(state.key())
        states.append(state)
        moves.append(move)
        total += move.cost
    return Beta(states=tuple(states), moves=tuple(moves), total_cost=total)


def brute_force_beta(route: Route, wall: Wall, climber: ClimberProfile,
                     lambda_effort: Optional[float] = None,
                     max_moves: int = 12,
                     params: EngineParams = DEFAULT_PARAMS) -> Beta:
    """Exhaustive depth-limited oracle; only for tests on tiny routes.

    Enumerates every legal move sequence up to max_moves (with safe
    cost/dominance pruning) and returns the global minimum-cost beta.
    """
    if len(route.hold_ids) > 8:
        raise PlannerError("LIMIT_EXCEEDED", "oracle guard: more than 8 holds")
    if max_moves > 12:
        raise PlannerError("LIMIT_EXCEEDED", "oracle guard: max_moves above 12")
    lam = params.lambda_effort if lambda_effort is None else lambda_effort
    cr = compile_route(route, wall)
    finish = cr.finish
    n1 = cr.n + 1

    best_cost = np.inf
    best_len = -1
    best_states: Optional[list[int]] = None
    best_moves: Optional[list[Move]] = None
    # dominance: per state, Pareto front of (cost, moves_used) already explored
    visited: dict[int, list[tuple[float, int]]] = {}

    def dominated(s: int, cost: float, used: int) -> bool:
        for c, u in visited.get(s, ()):
            if c <= cost and u <= used:
                return True
        return False

    def record(s: int, cost: float, used: int) -> None:
        lst = [x for x in visited.get(s, []) if not (cost <= x[0] and used <= x[1])]
        lst.append((cost, used))
        visited[s] = lst

    def is_terminal(packed: int) -> bool:
        rh = (packed // (n1 * n1)) % cr.n
        lh = packed // (n1 * n1 * cr.n)
        return lh == finish and rh == finish

    def walk(packed: int, cost: float, used: int,
             trail_states: list[int], trail_moves: list[Move]) -> None:
        nonlocal best_cost, best_len, best_states, best_moves
        if is_terminal(packed):
            if cost < best_cost or (cost == best_cost and used < best_len):
                best_cost = cost
                best_len = used
                best_states = list(trail_states)
                best_moves = list(trail_moves)
            return
        if used >= max_moves or cost >= best_cost:
            return
        for limb, t, new in _iter_successor_indices(cr, packed, climber):
            move = _build_move(cr, packed, limb, t, climber, params, lam)
            c2 = cost + move.cost
            if c2 >= best_cost or dominated(new, c2, used + 1):
                continue
            record(new, c2, used + 1)
            trail_states.append(new)
            trail_moves.append(move)
            walk(new, c2, used + 1, trail_states, trail_moves)
            trail_states.pop()
            trail_moves.pop()

    for start in start_states(route, wall, climber):
        packed = cr.pack(start)
        record(packed, 0.0, 0)
        walk(packed, 0.0, 0, [packed], [])

    if best_states is None:
        raise UnreachableError("no sequence within the move bound")
    return Beta(states=tuple(cr.unpack(s) for s in best_states),
                moves=tuple(best_moves),
                total_cost=float(best_cost))


def beta_success_probability(beta: Beta, wall: Wall, climber: ClimberProfile) -> float:
    """Product of per-move success probabilities; exp(-cost) when effort = 0."""
    return beta.success_probability()


def replay_check(beta: Beta, route: Route, wall: Wall, climber: ClimberProfile) -> bool:
    """Verify every state on a beta satisfies the body-state invariants."""
    cr = compile_route(route, wall)
    reach = reach_limit(climber)
    for st in beta.states:
        packed = cr.pack(st)
        n1 = cr.n + 1
        rf = packed % n1
        lf = (packed // n1) % n1
        rh = (packed // (n1 * n1)) % cr.n
        lh = packed // (n1 * n1 * cr.n)
        if not cr.hhand[lh] or not cr.hhand[rh]:
            return False
        for f in (lf, rf):
            if f < cr.n and not cr.hfoot[f]:
                return False
        if not kernels._state_feasible(lh, rh, lf, rf, cr.n, cr.dmat, cr.hy,
                                       reach["handHand"], reach["handFoot"]):
            return False
    if beta.states:
        last = beta.states[-1]
        if last.lh != route.finish_hold_id or last.rh != route.finish_hold_id:
            return False
    used = {h for st in beta.states for h in st.key() if h != FREE}
    return used <= set(route.hold_ids)
