"""Core domain types: grades, holds, walls, routes, climbers.

Everything here is an immutable value object; the rest of the engine shares
instances freely across threads. Grade arithmetic (the 33-label YDS class-5
scale) and structural route validation live here too.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

GRADE_LETTERS = ("a", "b", "c", "d")

# Feet may reach this factor times body height below a hand.
HAND_FOOT_REACH_FACTOR = 1.2

# Wall panel angle limits, degrees from horizontal. 90 = vertical, >90 = overhung.
PANEL_ANGLE_MIN = 60.0
PANEL_ANGLE_MAX = 180.0


class HoldType(Enum):
    JUG = "jug"
    CRIMP = "crimp"
    SLOPER = "sloper"
    PINCH = "pinch"
    POCKET = "pocket"
    FOOTHOLD = "foothold"
    VOLUME = "volume"


class MoveType(Enum):
    """Movement taxonomy used for style vectors and exposure weighting."""

    REACH = "reach"
    CROSS = "cross"
    MATCH = "match"
    HIGH_STEP = "high_step"
    MANTLE = "mantle"
    DYNO = "dyno"
    FOOT_SWAP = "foot_swap"


MOVE_TYPES = tuple(MoveType)
NUM_MOVE_TYPES = len(MOVE_TYPES)


class GradeError(ValueError):
    pass


@dataclass(frozen=True, order=False)
class GradeLabel:
    """One YDS class-5 grade, e.g. 5.9 or 5.12a.

    Letters exist exactly for numbers 10..15; the full scale has 33 labels.
    """

    number: int
    letter: Optional[str] = None

    def __post_init__(self):
        if not 1 <= self.number <= 15:
            raise GradeError(f"grade number out of range: {self.number}")
        if self.number >= 10:
            if self.letter not in GRADE_LETTERS:
                raise GradeError(f"grade 5.{self.number} requires a letter a-d")
        elif self.letter is not None:
            raise GradeError(f"grade 5.{self.number} must not carry a letter")

    @property
    def index(self) -> int:
        """Position in the ascending 33-label scale (0-based)."""
        if self.number < 10:
            return self.number - 1
        return 9 + (self.number - 10) * 4 + GRADE_LETTERS.index(self.letter)

    def __str__(self) -> str:
        return f"5.{self.number}{self.letter or ''}"

    @staticmethod
    def parse(text: str) -> "GradeLabel":
        s = text.strip()
        if not s.startswith("5."):
            raise GradeError(f"not a class-5 grade label: {text!r}")
        body = s[2:]
        letter = None
        if body and body[-1] in GRADE_LETTERS:
            letter = body[-1]
            body = body[:-1]
        if not body.isdigit():
            raise GradeError(f"malformed grade label: {text!r}")
        return GradeLabel(int(body), letter)

    def __lt__(self, other: "GradeLabel") -> bool:
        return self.index < other.index

    def __le__(self, other: "GradeLabel") -> bool:
        return self.index <= other.index


_SCALE: tuple[GradeLabel, ...] = tuple(
    [GradeLabel(n) for n in range(1, 10)]
    + [GradeLabel(n, c) for n in range(10, 16) for c in GRADE_LETTERS]
)


def grade_scale() -> tuple[GradeLabel, ...]:
    """All 33 grade labels, ascending from 5.1 to 5.15d."""
    return _SCALE


def compare_grades(a: GradeLabel, b: GradeLabel) -> int:
    """Total order on grades: -1 (easier), 0 (equal), +1 (harder)."""
    return (a.index > b.index) - (a.index < b.index)


def grade_step_distance(a: GradeLabel, b: GradeLabel) -> int:
    """Number of scale steps between two grades (always >= 0)."""
    return abs(a.index - b.index)


@dataclass(frozen=True)
class Hold:
    id: str
    x: float
    y: float
    type: HoldType
    difficulty: float
    roles: frozenset[str]  # subset of {"hand", "foot"}, nonempty
    orientation: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.difficulty <= 1.0:
            raise ValueError(f"hold {self.id}: difficulty {self.difficulty} not in [0,1]")
        if not self.roles or not self.roles <= {"hand", "foot"}:
            raise ValueError(f"hold {self.id}: bad roles {set(self.roles)}")
        if self.type is HoldType.FOOTHOLD and self.roles != frozenset({"foot"}):
            raise ValueError(f"hold {self.id}: foothold type forces roles={{foot}}")
        if not 0.0 <= self.orientation < 360.0:
            raise ValueError(f"hold {self.id}: orientation {self.orientation} not in [0,360)")

    @property
    def is_hand(self) -> bool:
        return "hand" in self.roles

    @property
    def is_foot(self) -> bool:
        return "foot" in self.roles


@dataclass(frozen=True)
class Panel:
    y0: float
    y1: float
    angle: float  # degrees; 90 vertical, >90 overhung

    def __post_init__(self):
        if self.y1 <= self.y0:
            raise ValueError(f"panel span [{self.y0},{self.y1}] is empty")
        if not PANEL_ANGLE_MIN <= self.angle <= PANEL_ANGLE_MAX:
            raise ValueError(f"panel angle {self.angle} not in [60,180]")


@dataclass(frozen=True)
class Wall:
    """Planar unrolled wall: panels partition [0,height], holds lie inside it."""

    width: float
    height: float
    panels: tuple[Panel, ...]
    holds: tuple[Hold, ...]

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("wall dimensions must be positive")
        panels = tuple(sorted(self.panels, key=lambda p: p.y0))
        if not panels:
            raise ValueError("wall needs at least one panel")
        cursor = 0.0
        for p in panels:
            if abs(p.y0 - cursor) > 1e-9:
                raise ValueError(f"panels do not partition the height range at y={cursor}")
            cursor = p.y1
        if abs(cursor - self.height) > 1e-9:
            raise ValueError(f"panels stop at {cursor}, wall height is {self.height}")
        seen = set()
        for h in self.holds:
            if h.id in seen:
                raise ValueError(f"duplicate hold id {h.id}")
            seen.add(h.id)
            if not (0.0 <= h.x <= self.width and 0.0 <= h.y <= self.height):
                raise ValueError(f"hold {h.id} outside the wall")
        object.__setattr__(self, "panels", panels)
        object.__setattr__(self, "holds", tuple(self.holds))

    def hold(self, hold_id: str) -> Hold:
        for h in self.holds:
            if h.id == hold_id:
                return h
        raise KeyError(hold_id)

    @property
    def holds_by_id(self) -> dict[str, Hold]:
        return {h.id: h for h in self.holds}

    def panel_angle_at(self, y: float) -> float:
        """Angle of the panel containing height y (last panel is inclusive at the top)."""
        for p in self.panels:
            if p.y0 <= y < p.y1:
                return p.angle
        return self.panels[-1].angle


@dataclass(frozen=True)
class Route:
    """A hold subset with start/finish designation on some wall."""

    name: str
    hold_ids: frozenset[str]
    start_hold_ids: tuple[str, ...]  # 1 or 2 ids
    finish_hold_id: str
    assigned_grade: Optional[GradeLabel] = None
    grade_locked: bool = False
    exposure_count: int = 0
    style_tags: tuple[MoveType, ...] = ()

    def with_grade(self, grade: Optional[GradeLabel]) -> "Route":
        return replace(self, assigned_grade=grade)


@dataclass(frozen=True)
class ClimberProfile:
    ability: float
    height: float
    arm_span: float
    fear_sensitivity: float
    exposure: dict[MoveType, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.height <= 0 or self.arm_span <= 0:
            raise ValueError("height and armSpan must be positive")
        if self.fear_sensitivity < 0:
            raise ValueError("fearSensitivity must be >= 0")
        expo = dict(self.exposure) or {t: 1.0 / NUM_MOVE_TYPES for t in MOVE_TYPES}
        total = sum(expo.get(t, 0.0) for t in MOVE_TYPES)
        if abs(total - 1.0) > 1e-9 or any(v < 0 for v in expo.values()):
            raise ValueError("exposure must be a probability distribution over move types")
        object.__setattr__(self, "exposure", expo)

    def exposure_vector(self) -> list[float]:
        return [self.exposure.get(t, 0.0) for t in MOVE_TYPES]


def uniform_exposure() -> dict[MoveType, float]:
    return {t: 1.0 / NUM_MOVE_TYPES for t in MOVE_TYPES}


@dataclass(frozen=True)
class Issue:
    code: str
    message: str
    hold_id: Optional[str] = None


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...]

    @property
    def ok(self) -> bool:
        return not self.issues


def reach_limit(climber: ClimberProfile) -> dict[str, float]:
    """Reach envelope: hand-hand span and hand-foot extension in meters."""
    return {
        "handHand": climber.arm_span,
        "handFoot": HAND_FOOT_REACH_FACTOR * climber.height,
    }


def validate_route(route: Route, wall: Wall) -> ValidationReport:
    """Check route structural invariants against a wall. Pure; never raises."""
    issues: list[Issue] = []
    by_id = wall.holds_by_id

    for hid in sorted(route.hold_ids):
        if hid not in by_id:
            issues.append(Issue("HOLD_NOT_ON_WALL", f"route hold {hid} is not on the wall", hid))
    if not route.hold_ids:
        issues.append(Issue("EMPTY_ROUTE", "route has no holds"))
    if len(route.start_hold_ids) not in (1, 2):
        issues.append(Issue("START_COUNT", f"route must designate 1 or 2 start holds, got {len(route.start_hold_ids)}"))
    for hid in route.start_hold_ids:
        if hid not in route.hold_ids:
            issues.append(Issue("START_NOT_IN_ROUTE", f"start hold {hid} not among route holds", hid))
    if route.finish_hold_id not in route.hold_ids:
        issues.append(Issue("FINISH_NOT_IN_ROUTE", f"finish hold {route.finish_hold_id} not among route holds", route.finish_hold_id))

    finish = by_id.get(route.finish_hold_id)
    if finish is not None and not finish.is_hand:
        issues.append(Issue("FINISH_NOT_HANDHOLD", f"finish hold {finish.id} has no hand role", finish.id))
    starts = [by_id[h] for h in route.start_hold_ids if h in by_id]
    if starts and not any(h.is_hand for h in starts):
        issues.append(Issue("START_NOT_HANDHOLD", "no start hold offers a hand role"))

    return ValidationReport(tuple(issues))
