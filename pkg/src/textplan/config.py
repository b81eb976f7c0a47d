"""Pipeline configuration: defaults, flat JSON config files, flag overrides."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .errors import SchemaError
from .matcher import MATCH_THRESHOLD
from .scorer import DEFAULT_LAMBDA, MAX_RANKED, Selection


@dataclass(frozen=True)
class PipelineConfig:
    lam: float = DEFAULT_LAMBDA
    levenshtein_threshold: float = MATCH_THRESHOLD
    max_plans: int = MAX_RANKED
    seed: int = 0
    select_mode: str = "best"
    top_percent: float = 10.0

    def __post_init__(self):
        if not self.lam > 0:
            raise SchemaError(f"lambda must be positive, got {self.lam}")
        if not 0 < self.levenshtein_threshold <= 1:
            raise SchemaError(f"levenshtein_threshold must be in (0, 1], got {self.levenshtein_threshold}")
        if self.max_plans < 1:
            raise SchemaError(f"max_plans must be >= 1, got {self.max_plans}")
        if not 0 < self.top_percent <= 100:
            raise SchemaError(f"top_percent must be in (0, 100], got {self.top_percent}")
        try:
            self.selection()
        except ValueError as exc:
            raise SchemaError(str(exc)) from exc

    def selection(self) -> Selection:
        mode = self.select_mode
        if mode == "random-top":
            mode = f"random-top:{self.top_percent:g}"
        return Selection.parse(mode, self.seed)

    def to_json(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "PipelineConfig":
        if not isinstance(obj, dict):
            raise SchemaError("config must be a JSON object")
        obj = dict(obj)
        if "lambda" in obj:
            obj["lam"] = obj.pop("lambda")
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise SchemaError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)

    def merged(self, **overrides) -> "PipelineConfig":
        """Apply the overrides that are not None."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def load_config(path: str | Path | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    try:
        return PipelineConfig.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config {path}: {exc}") from exc
