"""Result records and their JSON serialization."""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from typing import Any

SCHEMA_VERSION = 1
VOLATILE_FIELDS = ("timestamp", "wall_time")


def _plain(obj):
    """Recursively convert to JSON-compatible builtins."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return obj.item()
    if hasattr(obj, "as_tuple"):
        return list(obj.as_tuple())
    return obj


def envelope(kind: str, payload: dict, wall_time: float | None = None) -> dict:
    rec = {"schema_version": SCHEMA_VERSION, "kind": kind}
    rec.update(_plain(payload))
    rec["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    if wall_time is not None:
        rec["wall_time"] = wall_time
    return rec


def dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, indent=2) + "\n"


def strip_volatile(record):
    if isinstance(record, dict):
        return {k: strip_volatile(v) for k, v in record.items() if k not in VOLATILE_FIELDS}
    if isinstance(record, list):
        return [strip_volatile(v) for v in record]
    return record


@dataclass
class PeriodResult:
    target: Any
    p: int
    outcomes: dict
    period: int | None
    verified: bool
    shots: int
    gate_counts: dict
    seed: int | None
    backend: str
    config: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return envelope("period", asdict(self))


@dataclass
class SearchResult:
    search: str
    spec: dict
    t: int
    condition: dict
    found: list
    shots: int
    hits: int
    k: int
    predicted_success: float | None
    exact_success: float | None
    gate_counts: dict
    seed: int | None
    backend: str
    M_estimate: float | None = None
    flags: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def hit_frequency(self) -> float:
        return self.hits / self.shots if self.shots else 0.0

    @property
    def points(self) -> set:
        return {tuple(f["point"]) for f in self.found}

    @property
    def verified(self) -> bool:
        return all(f["verified"] for f in self.found)

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["hit_frequency"] = self.hit_frequency
        rec["verified"] = self.verified
        return envelope("search", rec)


@dataclass
class CountResult:
    S: int
    c: int
    observed_index: int
    M_estimate: float
    interval: tuple[float, float]
    shots: int
    seed: int | None
    backend: str
    histogram: dict = field(default_factory=dict)
    gate_counts: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.M_estimate <= self.S * (1 + 1e-12):
            raise ValueError("M estimate outside [0, S]")

    @property
    def M_rounded(self) -> int:
        return int(round(self.M_estimate))

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["M_rounded"] = self.M_rounded
        return envelope("count", rec)
