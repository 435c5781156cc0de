"""Line-based text format (.crux) and JSON object mapping for walls and routes.

One record per line, `#` comments, blank lines ignored:

    WALL <width> <height>
    PANEL <y0> <y1> <angle>
    HOLD <id> <x> <y> <type> <difficulty> <roles> <orientation>
    ROUTE <name>
    START <id> [<id>]
    FINISH <id>
    USE <id>...
    GRADE <label>          (optional)
    STYLE <tag>...         (optional)

Parsing collects every error instead of failing fast; serialization emits a
canonical form (fixed record order, sorted holds/routes, 3-decimal floats)
that is byte-stable and a fixpoint of parse-then-serialize.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .model import (
    GradeError,
    GradeLabel,
    Hold,
    HoldType,
    MoveType,
    Panel,
    Route,
    Wall,
)

KEYWORDS = ("WALL", "PANEL", "HOLD", "ROUTE", "START", "FINISH", "USE", "GRADE", "STYLE")

_TOKEN = re.compile(r"\S+")
_HOLD_TYPES = {t.value: t for t in HoldType}
_STYLE_TAGS = {t.value: t for t in MoveType}


@dataclass(frozen=True)
class SourceLocation:
    line: int  # 1-based
    column: int  # 1-based


@dataclass(frozen=True)
class ParseError:
    location: SourceLocation
    code: str  # UNKNOWN_KEYWORD | ARITY | NUMBER_FORMAT | DUPLICATE_ID | UNDEFINED_REF | RANGE
    message: str


@dataclass(frozen=True)
class ParseResult:
    wall: Optional[Wall]
    routes: tuple[Route, ...]
    errors: tuple[ParseError, ...]

    @property
    def ok(self) -> bool:
        return not self.errors


class _RouteDraft:
    def __init__(self, name: str, line: int):
        self.name = name
        self.line = line
        self.start: Optional[list[str]] = None
        self.finish: Optional[str] = None
        self.use: list[str] = []
        self.grade: Optional[GradeLabel] = None
        self.style: list[MoveType] = []
        self.refs: list[tuple[str, int, int]] = []  # (hold id, line, col)


def parse_document(text: str) -> ParseResult:
    """Parse a .crux document; collects all errors, never raises."""
    errors: list[ParseError] = []
    wall_dims: Optional[tuple[float, float]] = None
    wall_line = 0
    panels: list[tuple[int, int, Panel]] = []  # (line, col, panel)
    holds: dict[str, tuple[int, int, Hold]] = {}
    drafts: list[_RouteDraft] = []
    current: Optional[_RouteDraft] = None

    def err(line: int, col: int, code: str, message: str) -> None:
        errors.append(ParseError(SourceLocation(line, col), code, message))

    def parse_float(tok: str, line: int, col: int, what: str) -> Optional[float]:
        try:
            v = float(tok)
        except ValueError:
            err(line, col, "NUMBER_FORMAT", f"{what}: not a number: {tok!r}")
            return None
        if v != v or v in (float("inf"), float("-inf")):
            err(line, col, "NUMBER_FORMAT", f"{what}: not a finite number: {tok!r}")
            return None
        return v

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = [(m.group(0), m.start() + 1) for m in _TOKEN.finditer(line)]
        if not toks:
            continue
        (kw, kwcol), args = toks[0], toks[1:]

        if kw == "WALL":
            if wall_dims is not None:
                err(lineno, kwcol, "DUPLICATE_ID", "WALL already declared")
                continue
            if len(args) != 2:
                err(lineno, kwcol, "ARITY", f"WALL takes 2 fields, got {len(args)}")
                continue
            w = parse_float(args[0][0], lineno, args[0][1], "wall width")
            h = parse_float(args[1][0], lineno, args[1][1], "wall height")
            if w is None or h is None:
                continue
            if w <= 0 or h <= 0:
                err(lineno, kwcol, "RANGE", "wall dimensions must be positive")
                continue
            wall_dims = (w, h)
            wall_line = lineno

        elif kw == "PANEL":
            if len(args) != 3:
                err(lineno, kwcol, "ARITY", f"PANEL takes 3 fields, got {len(args)}")
                continue
            y0 = parse_float(args[0][0], lineno, args[0][1], "panel y0")
            y1 = parse_float(args[1][0], lineno, args[1][1], "panel y1")
            ang = parse_float(args[2][0], lineno, args[2][1], "panel angle")
            if y0 is None or y1 is None or ang is None:
                continue
            if y1 <= y0:
                err(lineno, args[1][1], "RANGE", f"panel span [{y0},{y1}] is empty")
                continue
            if not 60.0 <= ang <= 180.0:
                err(lineno, args[2][1], "RANGE", f"panel angle {ang} not in [60,180]")
                continue
            panels.append((lineno, kwcol, Panel(y0, y1, ang)))

        elif kw == "HOLD":
            if len(args) != 7:
                err(lineno, kwcol, "ARITY", f"HOLD takes 7 fields, got {len(args)}")
                continue
            hid = args[0][0]
            if hid in holds:
                err(lineno, args[0][1], "DUPLICATE_ID", f"hold id {hid} already defined")
                continue
            x = parse_float(args[1][0], lineno, args[1][1], "hold x")
            y = parse_float(args[2][0], lineno, args[2][1], "hold y")
            tname, tcol = args[3]
            htype = _HOLD_TYPES.get(tname)
            if htype is None:
                err(lineno, tcol, "RANGE", f"unknown hold type {tname!r}")
            diff = parse_float(args[4][0], lineno, args[4][1], "hold difficulty")
            if diff is not None and not 0.0 <= diff <= 1.0:
                err(lineno, args[4][1], "RANGE", f"difficulty {diff} not in [0,1]")
                diff = None
            rtext, rcol = args[5]
            roles = frozenset(rtext.split("|"))
            if not roles <= {"hand", "foot"} or not roles:
                err(lineno, rcol, "RANGE", f"roles must be hand, foot or hand|foot, got {rtext!r}")
                roles = None
            elif htype is HoldType.FOOTHOLD and roles != frozenset({"foot"}):
                err(lineno, rcol, "RANGE", "foothold type forces roles=foot")
                roles = None
            ori = parse_float(args[6][0], lineno, args[6][1], "hold orientation")
            if ori is not None and not 0.0 <= ori < 360.0:
                err(lineno, args[6][1], "RANGE", f"orientation {ori} not in [0,360)")
                ori = None
            if None in (x, y, diff, ori) or htype is None or roles is None:
                continue
            holds[hid] = (lineno, args[0][1], Hold(hid, x, y, htype, diff, roles, ori))

        elif kw == "ROUTE":
            if len(args) != 1:
                err(lineno, kwcol, "ARITY", f"ROUTE takes 1 field, got {len(args)}")
                current = None
                continue
            name = args[0][0]
            if any(d.name == name for d in drafts):
                err(lineno, args[0][1], "DUPLICATE_ID", f"route name {name} already used")
                current = None
                continue
            current = _RouteDraft(name, lineno)
            drafts.append(current)

        elif kw in ("START", "FINISH", "USE", "GRADE", "STYLE"):
            if current is None:
                err(lineno, kwcol, "ARITY", f"{kw} record outside a ROUTE")
                continue
            if kw == "START":
                if not 1 <= len(args) <= 2:
                    err(lineno, kwcol, "ARITY", f"START takes 1 or 2 ids, got {len(args)}")
                    continue
                if current.start is not None:
                    err(lineno, kwcol, "DUPLICATE_ID", "START already given for this route")
                    continue
                current.start = [a[0] for a in args]
                current.refs.extend((a[0], lineno, a[1]) for a in args)
            elif kw == "FINISH":
                if len(args) != 1:
                    err(lineno, kwcol, "ARITY", f"FINISH takes 1 id, got {len(args)}")
                    continue
                if current.finish is not None:
                    err(lineno, kwcol, "DUPLICATE_ID", "FINISH already given for this route")
                    continue
                current.finish = args[0][0]
                current.refs.append((args[0][0], lineno, args[0][1]))
            elif kw == "USE":
                if not args:
                    err(lineno, kwcol, "ARITY", "USE needs at least one id")
                    continue
                current.use.extend(a[0] for a in args)
                current.refs.extend((a[0], lineno, a[1]) for a in args)
            elif kw == "GRADE":
                if len(args) != 1:
                    err(lineno, kwcol, "ARITY", f"GRADE takes 1 label, got {len(args)}")
                    continue
                try:
                    current.grade = GradeLabel.parse(args[0][0])
                except GradeError as e:
                    code = "RANGE" if "require" in str(e) or "must not" in str(e) or "out of range" in str(e) else "NUMBER_FORMAT"
                    err(lineno, args[0][1], code, str(e))
            else:  # STYLE
                if not args:
                    err(lineno, kwcol, "ARITY", "STYLE needs at least one tag")
                    continue
                for tok, col in args:
                    tag = _STYLE_TAGS.get(tok)
                    if tag is None:
                        err(lineno, col, "RANGE", f"unknown style tag {tok!r}")
                    else:
                        current.style.append(tag)

        else:
            err(lineno, kwcol, "UNKNOWN_KEYWORD", f"unknown record {kw!r}")

    if wall_dims is None:
        err(1, 1, "RANGE", "missing WALL record")
    else:
        w, h = wall_dims
        ordered = sorted(panels, key=lambda p: p[2].y0)
        cursor = 0.0
        for pline, pcol, p in ordered:
            if abs(p.y0 - cursor) > 1e-9:
                err(pline, pcol, "RANGE", f"panels do not partition the height range at y={cursor:g}")
            cursor = p.y1
        if ordered and abs(cursor - h) > 1e-9:
            err(ordered[-1][0], ordered[-1][1], "RANGE", f"panels stop at {cursor:g}, wall height is {h:g}")
        if not ordered:
            err(wall_line or 1, 1, "RANGE", "wall has no panels")
        for hid, (hline, hcol, hold) in holds.items():
            if not (0.0 <= hold.x <= w and 0.0 <= hold.y <= h):
                err(hline, hcol, "RANGE", f"hold {hid} lies outside the wall")

    for d in drafts:
        if d.start is None:
            err(d.line, 1, "ARITY", f"route {d.name} has no START record")
        if d.finish is None:
            err(d.line, 1, "ARITY", f"route {d.name} has no FINISH record")
        for ref, rline, rcol in d.refs:
            if ref not in holds:
                err(rline, rcol, "UNDEFINED_REF", f"route {d.name} references undefined hold {ref}")

    if errors:
        return ParseResult(None, (), tuple(errors))

    wall = Wall(
        width=wall_dims[0],
        height=wall_dims[1],
        panels=tuple(p for _, _, p in panels),
        holds=tuple(h for _, _, h in holds.values()),
    )
    routes = tuple(
        Route(
            name=d.name,
            hold_ids=frozenset(d.use) | frozenset(d.start) | {d.finish},
            start_hold_ids=tuple(d.start),
            finish_hold_id=d.finish,
            assigned_grade=d.grade,
            style_tags=tuple(d.style),
        )
        for d in drafts
    )
    return ParseResult(wall, routes, ())


def _f(v: float) -> str:
    return f"{v:.3f}"


def _roles_text(roles: frozenset[str]) -> str:
    return "|".join(r for r in ("hand", "foot") if r in roles)


def serialize_document(wall: Wall, routes: tuple[Route, ...] | list[Route]) -> str:
    """Canonical text form: fixed record order, sorted ids, 3-decimal floats."""
    lines = [f"WALL {_f(wall.width)} {_f(wall.height)}"]
    for p in sorted(wall.panels, key=lambda p: p.y0):
        lines.append(f"PANEL {_f(p.y0)} {_f(p.y1)} {_f(p.angle)}")
    for h in sorted(wall.holds, key=lambda h: h.id):
        lines.append(
            f"HOLD {h.id} {_f(h.x)} {_f(h.y)} {h.type.value} {_f(h.difficulty)} "
            f"{_roles_text(h.roles)} {_f(h.orientation)}"
        )
    for r in sorted(routes, key=lambda r: r.name):
        lines.append(f"ROUTE {r.name}")
        lines.append("START " + " ".join(sorted(r.start_hold_ids)))
        lines.append(f"FINISH {r.finish_hold_id}")
        lines.append("USE " + " ".join(sorted(r.hold_ids)))
        if r.assigned_grade is not None:
            lines.append(f"GRADE {r.assigned_grade}")
        if r.style_tags:
            lines.append("STYLE " + " ".join(t.value for t in r.style_tags))
    return "\n".join(lines) + "\n"


def to_json_object(wall: Wall, routes: tuple[Route, ...] | list[Route]) -> dict:
    """Lossless structured-object form used by the HTTP API."""
    return {
        "wall": {
            "width_m": wall.width,
            "height_m": wall.height,
            "panels": [{"y0": p.y0, "y1": p.y1, "angle_deg": p.angle} for p in wall.panels],
            "holds": [
                {
                    "id": h.id,
                    "x": h.x,
                    "y": h.y,
                    "type": h.type.value,
                    "difficulty": h.difficulty,
                    "roles": sorted(h.roles),
                    "orientation_deg": h.orientation,
                }
                for h in sorted(wall.holds, key=lambda h: h.id)
            ],
        },
        "routes": [route_to_json(r) for r in sorted(routes, key=lambda r: r.name)],
    }


def route_to_json(r: Route) -> dict:
    return {
        "name": r.name,
        "hold_ids": sorted(r.hold_ids),
        "start_hold_ids": list(r.start_hold_ids),
        "finish_hold_id": r.finish_hold_id,
        "grade": str(r.assigned_grade) if r.assigned_grade else None,
        "style_tags": [t.value for t in r.style_tags],
    }


class JsonShapeError(ValueError):
    """Structural mismatch in the JSON object form; message carries the path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _need(obj: dict, key: str, path: str):
    if not isinstance(obj, dict) or key not in obj or obj[key] is None:
        raise JsonShapeError(f"{path}.{key}", "missing required field")
    return obj[key]


def _num(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise JsonShapeError(path, f"expected a number, got {type(v).__name__}")
    return float(v)


def route_from_json(obj: dict, path: str = "$.route") -> Route:
    name = _need(obj, "name", path)
    hold_ids = _need(obj, "hold_ids", path)
    start = _need(obj, "start_hold_ids", path)
    finish = _need(obj, "finish_hold_id", path)
    if not isinstance(hold_ids, list) or not all(isinstance(h, str) for h in hold_ids):
        raise JsonShapeError(f"{path}.hold_ids", "expected a list of hold ids")
    if not isinstance(start, list) or not all(isinstance(h, str) for h in start):
        raise JsonShapeError(f"{path}.start_hold_ids", "expected a list of hold ids")
    grade = None
    if obj.get("grade") is not None:
        try:
            grade = GradeLabel.parse(str(obj["grade"]))
        except GradeError as e:
            raise JsonShapeError(f"{path}.grade", str(e))
    tags = []
    for i, t in enumerate(obj.get("style_tags") or []):
        tag = _STYLE_TAGS.get(t)
        if tag is None:
            raise JsonShapeError(f"{path}.style_tags[{i}]", f"unknown style tag {t!r}")
        tags.append(tag)
    return Route(
        name=str(name),
        hold_ids=frozenset(hold_ids),
        start_hold_ids=tuple(start),
        finish_hold_id=str(finish),
        assigned_grade=grade,
        style_tags=tuple(tags),
    )


def from_json_object(obj: dict) -> tuple[Wall, tuple[Route, ...]]:
    """Inverse of to_json_object; raises JsonShapeError naming the bad path."""
    wobj = _need(obj, "wall", "$")
    width = _num(_need(wobj, "width_m", "$.wall"), "$.wall.width_m")
    height = _num(_need(wobj, "height_m", "$.wall"), "$.wall.height_m")
    panels = []
    for i, p in enumerate(_need(wobj, "panels", "$.wall")):
        ppath = f"$.wall.panels[{i}]"
        try:
            panels.append(Panel(
                y0=_num(_need(p, "y0", ppath), f"{ppath}.y0"),
                y1=_num(_need(p, "y1", ppath), f"{ppath}.y1"),
                angle=_num(_need(p, "angle_deg", ppath), f"{ppath}.angle_deg"),
            ))
        except ValueError as e:
            if isinstance(e, JsonShapeError):
                raise
            raise JsonShapeError(ppath, str(e))
    holds = []
    for i, h in enumerate(_need(wobj, "holds", "$.wall")):
        hpath = f"$.wall.holds[{i}]"
        tname = _need(h, "type", hpath)
        htype = _HOLD_TYPES.get(tname)
        if htype is None:
            raise JsonShapeError(f"{hpath}.type", f"unknown hold type {tname!r}")
        roles = _need(h, "roles", hpath)
        if not isinstance(roles, list):
            raise JsonShapeError(f"{hpath}.roles", "expected a list")
        try:
            holds.append(Hold(
                id=str(_need(h, "id", hpath)),
                x=_num(_need(h, "x", hpath), f"{hpath}.x"),
                y=_num(_need(h, "y", hpath), f"{hpath}.y"),
                type=htype,
                difficulty=_num(_need(h, "difficulty", hpath), f"{hpath}.difficulty"),
                roles=frozenset(roles),
                orientation=_num(h.get("orientation_deg", 0.0), f"{hpath}.orientation_deg"),
            ))
        except ValueError as e:
            if isinstance(e, JsonShapeError):
                raise
            raise JsonShapeError(hpath, str(e))
    try:
        wall = Wall(width=width, height=height, panels=tuple(panels), holds=tuple(holds))
    except ValueError as e:
        raise JsonShapeError("$.wall", str(e))
    routes = []
    for i, r in enumerate(obj.get("routes") or []):
        routes.append(route_from_json(r, f"$.routes[{i}]"))
    return wall, tuple(routes)
