"""File-backed corpus: a directory of .crux documents plus meta.json.

The working document lives in wall.crux; every other .crux file contributes
graded corpus routes. Exposure counts and grade locks are not part of the
text format, so they live in meta.json and are applied on load. All writes
are atomic (write temp, rename) and serialized through a single lock.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import replace
from pathlib import Path
from typing import Optional

from .format import parse_document, serialize_document
from .grading import GradeSet, build_corpus
from .model import Panel, Route, Wall
from .params import DEFAULT_PARAMS

WALL_FILE = "wall.crux"
META_FILE = "meta.json"


def default_wall() -> Wall:
    return Wall(width=3.0, height=4.5, panels=(Panel(0.0, 4.5, 90.0),), holds=())


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


class CorpusError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class CorpusStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    # ----- meta -----

    def _read_meta(self) -> dict:
        path = self.root / META_FILE
        if not path.exists():
            return {}
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, OSError):
            return {}

    def _write_meta(self, meta: dict) -> None:
        _atomic_write(self.root / META_FILE, json.dumps(meta, indent=2, sort_keys=True) + "\n")

    def _apply_meta(self, route: Route, meta: dict) -> Route:
        entry = meta.get(route.name)
        if not entry:
            return route
        return replace(route,
                       exposure_count=int(entry.get("exposure_count", 0)),
                       grade_locked=bool(entry.get("grade_locked", False)))

    # ----- documents -----

    def current_document(self) -> tuple[Wall, tuple[Route, ...]]:
        path = self.root / WALL_FILE
        if not path.exists():
            return default_wall(), ()
        result = parse_document(path.read_text(encoding="utf-8"))
        if not result.ok:
            raise CorpusError("CORRUPT", f"{path}: {result.errors[0].message}")
        meta = self._read_meta()
        return result.wall, tuple(self._apply_meta(r, meta) for r in result.routes)

    def put_document(self, wall: Wall, routes: tuple[Route, ...]) -> None:
        with self._lock:
            _atomic_write(self.root / WALL_FILE, serialize_document(wall, routes))

    # ----- corpus routes -----

    def corpus_entries(self) -> list[tuple[Route, Wall, Path]]:
        """Graded and ungraded routes from every corpus file, sorted by path."""
        meta = self._read_meta()
        out = []
        for path in sorted(self.root.glob("*.crux")):
            if path.name == WALL_FILE:
                continue
            result = parse_document(path.read_text(encoding="utf-8"))
            if not result.ok:
                raise CorpusError("CORRUPT", f"{path}: {result.errors[0].message}")
            for r in result.routes:
                out.append((self._apply_meta(r, meta), result.wall, path))
        return out

    def grade_sets(self, locked_only: bool = False) -> list[GradeSet]:
        entries = [(r, w) for r, w, _ in self.corpus_entries()]
        return build_corpus(entries, locked_only=locked_only)

    def save_route(self, route: Route, wall: Wall, filename: Optional[str] = None) -> Path:
        name = filename or f"{route.name}.crux"
        if not name.endswith(".crux"):
            name += ".crux"
        path = self.root / name
        with self._lock:
            _atomic_write(path, serialize_document(wall, (route,)))
        return path

    def find_route(self, name: str) -> tuple[Route, Wall]:
        wall, routes = self.current_document()
        for r in routes:
            if r.name == name:
                return r, wall
        for r, w, _ in self.corpus_entries():
            if r.name == name:
                return r, w
        raise CorpusError("NOT_FOUND", f"no route named {name}")

    def is_locked(self, name: str) -> bool:
        entry = self._read_meta().get(name)
        return bool(entry and entry.get("grade_locked", False))

    def record_ascent(self, name: str, increment: int = 1,
                      lock_threshold: int = DEFAULT_PARAMS.lock_threshold) -> Route:
        """Bump a route's exposure; lock its grade past the threshold."""
        route, _wall = self.find_route(name)  # raises NOT_FOUND
        with self._lock:
            meta = self._read_meta()
            entry = meta.get(name, {})
            count = int(entry.get("exposure_count", 0)) + increment
            locked = bool(entry.get("grade_locked", False)) or count >= lock_threshold
            meta[name] = {"exposure_count": count, "grade_locked": locked}
            self._write_meta(meta)
        return replace(route, exposure_count=count, grade_locked=locked)
