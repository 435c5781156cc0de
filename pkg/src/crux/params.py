"""Engine tuning knobs with their stated defaults, loadable from a JSON config."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path


@dataclass(frozen=True)
class EngineParams:
    # success model
    kappa: float = 4.0              # logistic slope
    exposure_weight: float = 0.25   # style-exposure difficulty inflation
    # planner
    lambda_effort: float = 0.1      # distance-effort term; 0 = pure probability
    # grading
    tnorm: str = "product"
    threshold: float = 0.5          # "high probability" cutoff
    lock_threshold: int = 50        # ascents before a grade locks
    min_qualifiers: int = 30        # below this, scores carry LOW_CONFIDENCE

    def with_overrides(self, **kwargs) -> "EngineParams":
        return replace(self, **kwargs)

    @staticmethod
    def from_file(path: str | Path) -> "EngineParams":
        data = json.loads(Path(path).read_text())
        allowed = {f for f in EngineParams.__dataclass_fields__}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return EngineParams(**data)


DEFAULT_PARAMS = EngineParams()

# Objective handling of candidates the planner cannot solve.
UNREACHABLE_PENALTY = 1e6
# Stand-in for an infinite necessitation margin (no alternative path exists).
MARGIN_SENTINEL = 1e9
