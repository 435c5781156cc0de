"""Shared fixtures: walls, routes, climbers, and the synthetic graded corpus."""

from __future__ import annotations

import numpy as np
import pytest

from crux.climber import PopulationSpec, sample_population
from crux.grading import GradeSet
from crux.model import (
    ClimberProfile,
    GradeLabel,
    Hold,
    HoldType,
    Panel,
    Route,
    Wall,
    uniform_exposure,
)

__all__ = ["ladder_route", "build_synthetic_corpus"]


def vertical_wall(holds, width=3.0, height=4.5, angle=90.0) -> Wall:
    return Wall(width, height, (Panel(0.0, height, angle),), tuple(holds))


def ladder_route(name: str, difficulty: float, grade, n_rungs: int = 6,
                 spacing: float = 0.55, rng: np.random.Generator | None = None,
                 roles=frozenset({"hand"}), angle: float = 90.0):
    """A rail of jugs; the workhorse synthetic route."""
    holds = []
    for i in range(n_rungs):
        d, x = difficulty, 1.5
        if rng is not None:
            d = float(np.clip(difficulty + rng.uniform(-0.04, 0.04), 0.0, 1.0))
            x = 1.5 + float(rng.uniform(-0.25, 0.25))
        holds.append(Hold(f"{name}_{i}", x, 0.4 + i * spacing, HoldType.JUG, d, roles))
    wall = vertical_wall(holds, angle=angle)
    route = Route(name=name, hold_ids=frozenset(h.id for h in holds),
                  start_hold_ids=(f"{name}_0",), finish_hold_id=f"{name}_{n_rungs - 1}",
                  assigned_grade=grade)
    return route, wall


def build_synthetic_corpus(per_grade: int = 10, seed: int = 100) -> list[GradeSet]:
    """Three difficulty-separated grade sets of seeded ladder routes."""
    rng = np.random.default_rng(seed)
    labels = [GradeLabel(8), GradeLabel(10, "a"), GradeLabel(12, "a")]
    sets = []
    for d, g in zip((0.2, 0.55, 0.9), labels):
        routes = tuple(
            ladder_route(str(g).replace(".", "_") + f"_r{k}", d, g, rng=rng)
            for k in range(per_grade)
        )
        sets.append(GradeSet(g, routes))
    return sets


@pytest.fixture(scope="session")
def climber() -> ClimberProfile:
    return ClimberProfile(ability=1.0, height=1.75, arm_span=1.75,
                          fear_sensitivity=0.5, exposure=uniform_exposure())


@pytest.fixture(scope="session")
def weak_climber() -> ClimberProfile:
    return ClimberProfile(ability=0.5, height=1.75, arm_span=1.75,
                          fear_sensitivity=0.5, exposure=uniform_exposure())


@pytest.fixture(scope="session")
def ladder():
    """5 well-spaced hand-only rungs: greedy and optimal agree here."""
    holds = [Hold(f"r{i}", 1.5, 0.5 + i * 0.9, HoldType.JUG, 0.5, frozenset({"hand"}))
             for i in range(5)]
    wall = vertical_wall(holds)
    route = Route(name="ladder", hold_ids=frozenset(h.id for h in holds),
                  start_hold_ids=("r0",), finish_hold_id="r4")
    return route, wall


@pytest.fixture(scope="session")
def ladder_4limb():
    """Closely spaced rungs usable by hands and feet."""
    holds = [Hold(f"q{i}", 1.5, 0.5 + i * 0.4, HoldType.JUG, 0.3, frozenset({"hand", "foot"}))
             for i in range(5)]
    wall = vertical_wall(holds)
    route = Route(name="rungs", hold_ids=frozenset(h.id for h in holds),
                  start_hold_ids=("q0",), finish_hold_id="q4")
    return route, wall


@pytest.fixture(scope="session")
def trap():
    """A cheap high dead-end jug lures the greedy climber into a corner.

    From the bait the only higher holds are beyond arm span for both hands,
    so no move raises the high hand and the greedy baseline is stuck; the
    optimal planner takes the modest crimp rail on the left instead.
    """
    holds = [
        Hold("s", 1.5, 0.5, HoldType.JUG, 0.3, frozenset({"hand"})),
        Hold("g1", 0.9, 1.2, HoldType.CRIMP, 0.5, frozenset({"hand"})),
        Hold("g2", 0.9, 2.2, HoldType.CRIMP, 0.5, frozenset({"hand"})),
        Hold("f", 0.9, 3.0, HoldType.JUG, 0.3, frozenset({"hand"})),
        Hold("b", 2.9, 1.4, HoldType.JUG, 0.0, frozenset({"hand"})),
    ]
    wall = vertical_wall(holds)
    route = Route(name="trap", hold_ids=frozenset(h.id for h in holds),
                  start_hold_ids=("s",), finish_hold_id="f")
    return route, wall


@pytest.fixture(scope="session")
def twin_hold_route():
    """The key middle hold has an exact mirror twin at equal cost."""
    holds = [
        Hold("a", 1.5, 0.5, HoldType.JUG, 0.3, frozenset({"hand"})),
        Hold("k", 1.2, 1.4, HoldType.JUG, 0.4, frozenset({"hand"})),
        Hold("k2", 1.8, 1.4, HoldType.JUG, 0.4, frozenset({"hand"})),
        Hold("f", 1.5, 2.3, HoldType.JUG, 0.3, frozenset({"hand"})),
    ]
    wall = vertical_wall(holds)
    route = Route(name="twin", hold_ids=frozenset(h.id for h in holds),
                  start_hold_ids=("a",), finish_hold_id="f")
    return route, wall


@pytest.fixture(scope="session")
def two_hold_route():
    holds = [
        Hold("a", 1.5, 0.8, HoldType.JUG, 0.2, frozenset({"hand"})),
        Hold("f", 1.5, 1.9, HoldType.JUG, 0.2, frozenset({"hand"})),
    ]
    wall = vertical_wall(holds)
    route = Route(name="pair", hold_ids=frozenset({"a", "f"}),
                  start_hold_ids=("a",), finish_hold_id="f")
    return route, wall


@pytest.fixture(scope="session")
def synthetic_corpus():
    return build_synthetic_corpus()


@pytest.fixture(scope="session")
def population():
    spec = PopulationSpec(size=2000, ability_mean=1.35, ability_std=0.5)
    return sample_population(spec, seed=42)


@pytest.fixture(scope="session")
def small_population():
    spec = PopulationSpec(size=300, ability_mean=1.35, ability_std=0.5)
    return sample_population(spec, seed=42)
