"""Grade assignment: T-norm conjunction of two conditional success estimates.

A route belongs to a grade when climbers who handle that grade's routes are
likely to succeed on it (P(R|S)) and success on it predicts handling the
grade's routes (P(S|R)). Both are Monte-Carlo estimates over a seeded climber
population; the assigned grade maximizes their T-norm conjunction, with ties
resolved toward the lower grade. Early grades stay tentative until enough
recorded ascents lock them.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .climber import PopulationArrays, seeded_ascents, success_profiles
from .model import ClimberProfile, GradeLabel, Route, Wall
from .params import DEFAULT_PARAMS, EngineParams


class TNormKind(Enum):
    PRODUCT = "product"
    MINIMUM = "minimum"
    LUKASIEWICZ = "lukasiewicz"


class GradingError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def tnorm(kind: TNormKind | str, a: float, b: float) -> float:
    """Monoidal conjunction on [0,1]; raises DOMAIN outside the unit square."""
    if isinstance(kind, str):
        kind = TNormKind(kind)
    if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
        raise GradingError("DOMAIN", f"t-norm arguments must lie in [0,1], got {a}, {b}")
    if kind is TNormKind.PRODUCT:
        return a * b
    if kind is TNormKind.MINIMUM:
        return min(a, b)
    return max(0.0, a + b - 1.0)


@dataclass(frozen=True)
class GradeSet:
    """All corpus routes sharing one grade label."""

    label: GradeLabel
    routes: tuple[tuple[Route, Wall], ...]

    def __post_init__(self):
        if not self.routes:
            raise GradingError("EMPTY_SET", f"grade set {self.label} has no routes")
        for r, _ in self.routes:
            if r.assigned_grade != self.label:
                raise GradingError(
                    "GRADE_MISMATCH",
                    f"route {r.name} graded {r.assigned_grade}, set is {self.label}",
                )


@dataclass(frozen=True)
class ConditionalScore:
    value: float
    qualifiers: int
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class MembershipScore:
    label: GradeLabel
    p_route_given_set: float
    p_set_given_route: float
    conjunction: float
    qualifiers: int   # climbers conditioning P(R|S)
    ascenders: int    # climbers conditioning P(S|R)
    flags: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "grade": str(self.label),
            "p_route_given_set": self.p_route_given_set,
            "p_set_given_route": self.p_set_given_route,
            "conjunction": self.conjunction,
            "qualifiers": self.qualifiers,
            "ascenders": self.ascenders,
            "flags": list(self.flags),
        }


@dataclass(frozen=True)
class GradeAssignment:
    grade: GradeLabel
    scores: tuple[MembershipScore, ...]

    def to_json(self) -> dict:
        return {"grade": str(self.grade), "scores": [s.to_json() for s in self.scores]}


class GradingContext:
    """Precomputed per-climber data for a fixed (corpus, population, seed).

    Qualification and per-set success fractions only depend on the corpus, so
    grading many candidate routes (leave-one-out studies, annealing loops)
    reuses them; per candidate only that route's success profiles are new.
    """

    def __init__(self, corpus: Sequence[GradeSet], population: Sequence[ClimberProfile],
                 seed: int, params: EngineParams = DEFAULT_PARAMS,
                 profile_cache: Optional[dict] = None):
        """profile_cache, when given, memoizes set-route profiles by route name
        across contexts (e.g. leave-one-out studies); the caller must ensure
        names uniquely identify (route, wall) pairs and the population is fixed.
        """
        if not corpus:
            raise GradingError("EMPTY_CORPUS", "no grade sets given")
        self.params = params
        self.seed = int(seed)
        self.population = list(population)
        self.pop = PopulationArrays(self.population)
        self.sets = sorted(corpus, key=lambda s: s.label.index)
        m = self.pop.size
        self.qual_frac: dict[int, np.ndarray] = {}
        self.high_frac: dict[int, np.ndarray] = {}
        for gs in self.sets:
            ascended = np.zeros(m, dtype=np.float64)
            high = np.zeros(m, dtype=np.float64)
            for route, wall in gs.routes:
                if profile_cache is not None and route.name in profile_cache:
                    prof = profile_cache[route.name]
                else:
                    prof = success_profiles(route, wall, self.pop, params)
                    if profile_cache is not None:
                        profile_cache[route.name] = prof
                ascended += seeded_ascents(prof, self.seed, f"set:{route.name}")
                high += prof.route_probabilities() >= params.threshold
            k = len(gs.routes)
            self.qual_frac[gs.label.index] = ascended / k
            self.high_frac[gs.label.index] = high / k

    def membership_scores(self, route: Route, wall: Wall,
                          kind: TNormKind | str | None = None) -> tuple[MembershipScore, ...]:
        params = self.params
        kind = TNormKind(kind) if kind is not None else TNormKind(params.tnorm)
        prof = success_profiles(route, wall, self.pop, params)
        cand_prob = prof.route_probabilities()
        cand_asc = seeded_ascents(prof, self.seed, f"target:{route.name}")

        scores = []
        for gs in self.sets:
            qualifies = self.qual_frac[gs.label.index] >= params.threshold
            nq = int(qualifies.sum())
            flags: list[str] = []
            if nq > 0:
                p_rs = float(cand_prob[qualifies].mean())
            else:
                p_rs = 0.0
                flags.append("NO_QUALIFIERS")
            na = int(cand_asc.sum())
            if na > 0:
                p_sr = float(self.high_frac[gs.label.index][cand_asc].mean())
            else:
                p_sr = 0.0
                flags.append("NO_ASCENDERS")
            if min(nq, na) < params.min_qualifiers:
                flags.append("LOW_CONFIDENCE")
            scores.append(MembershipScore(
                label=gs.label,
                p_route_given_set=p_rs,
                p_set_given_route=p_sr,
                conjunction=tnorm(kind, p_rs, p_sr),
                qualifiers=nq,
                ascenders=na,
                flags=tuple(flags),
            ))
        return tuple(scores)


def p_route_given_set(route: Route, wall: Wall, grade_set: GradeSet,
                      population: Sequence[ClimberProfile],
                      threshold: float = DEFAULT_PARAMS.threshold,
                      seed: int = 0,
                      params: EngineParams = DEFAULT_PARAMS) -> ConditionalScore:
    """Mean success chance on `route` among climbers who climbed the set."""
    if not grade_set.routes:
        raise GradingError("EMPTY_SET", "grade set has no routes")
    params = params.with_overrides(threshold=threshold)
    ctx = GradingContext([grade_set], population, seed, params)
    score = ctx.membership_scores(route, wall)[0]
    flags = tuple(f for f in score.flags if f == "NO_QUALIFIERS")
    return ConditionalScore(score.p_route_given_set, score.qualifiers, flags)


def p_set_given_route(route: Route, wall: Wall, grade_set: GradeSet,
                      population: Sequence[ClimberProfile],
                      threshold: float = DEFAULT_PARAMS.threshold,
                      seed: int = 0,
                      params: EngineParams = DEFAULT_PARAMS) -> ConditionalScore:
    """Mean high-probability coverage of the set among ascenders of `route`."""
    if not grade_set.routes:
        raise GradingError("EMPTY_SET", "grade set has no routes")
    params = params.with_overrides(threshold=threshold)
    ctx = GradingContext([grade_set], population, seed, params)
    score = ctx.membership_scores(route, wall)[0]
    flags = ("NO_QUALIFIERS",) if score.ascenders == 0 else ()
    return ConditionalScore(score.p_set_given_route, score.ascenders, flags)


def assign_grade(route: Route, wall: Wall, corpus: Sequence[GradeSet],
                 population: Sequence[ClimberProfile],
                 tnorm_kind: TNormKind | str | None = None,
                 threshold: Optional[float] = None,
                 seed: int = 0,
                 params: EngineParams = DEFAULT_PARAMS,
                 context: Optional[GradingContext] = None) -> GradeAssignment:
    """Argmax of the conjunction over all grade sets; ties go to the lower grade."""
    if route.grade_locked:
        raise GradingError("LOCKED", f"route {route.name} has a locked grade")
    if not corpus and context is None:
        raise GradingError("EMPTY_CORPUS", "no grade sets given")
    if threshold is not None:
        params = params.with_overrides(threshold=threshold)
    ctx = context if context is not None else GradingContext(corpus, population, seed, params)
    scores = ctx.membership_scores(route, wall, tnorm_kind)
    best = scores[0]
    for s in scores[1:]:
        if s.conjunction > best.conjunction:
            best = s
    return GradeAssignment(grade=best.label, scores=scores)


def record_ascent_and_maybe_lock(route: Route, exposure_increment: int = 1,
                                 lock_threshold: int = DEFAULT_PARAMS.lock_threshold) -> Route:
    """Community exposure bookkeeping: enough recorded ascents lock the grade."""
    if exposure_increment < 1:
        raise ValueError("exposure increment must be >= 1")
    count = route.exposure_count + exposure_increment
    return replace(route, exposure_count=count,
                   grade_locked=route.grade_locked or count >= lock_threshold)


def build_corpus(routes_with_walls: Sequence[tuple[Route, Wall]],
                 locked_only: bool = False) -> list[GradeSet]:
    """Group graded routes into grade sets, ascending by label."""
    groups: dict[int, list[tuple[Route, Wall]]] = {}
    labels: dict[int, GradeLabel] = {}
    for route, wall in routes_with_walls:
        if route.assigned_grade is None:
            continue
        if locked_only and not route.grade_locked:
            continue
        idx = route.assigned_grade.index
        groups.setdefault(idx, []).append((route, wall))
        labels[idx] = route.assigned_grade
    return [GradeSet(labels[i], tuple(groups[i])) for i in sorted(groups)]
