"""Engine configuration.

Every tunable constant of the interest/recommendation pipeline lives in one
record so tests can pin them and operators can override them from a JSON
file (CONFIG_PATH). Unknown keys in the file are rejected to catch typos.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path


def _default_deltas() -> dict[str, float]:
    return {
        "click": 0.05,
        "save": 0.15,
        "unsave": -0.10,
        "mail": 0.10,
        "share": 0.20,
        "search": 0.10,
        "rate_step": 0.10,  # rate(r) applies (r - 3) * rate_step
    }


def _default_video_hosts() -> list[str]:
    return ["youtube.com", "vimeo.com"]


@dataclass(frozen=True)
class EngineConfig:
    # interest weighting
    deltas: dict[str, float] = field(default_factory=_default_deltas)
    tier_high: float = 0.6
    tier_mid: float = 0.3
    decay_per_day: float = 0.99
    flush_days: int = 30
    progress_k: float = 25.0
    import_base_weight: float = 0.3
    import_step_weight: float = 0.1
    import_cap_weight: float = 0.9
    follow_weight: float = 0.3

    # recommender
    svd_rank: int = 8  # effective rank is min(users, keywords, svd_rank)
    sim_threshold: float = 0.7
    max_recommendations: int = 20
    # True factors a 0/1 occupancy matrix instead of the raw weights
    matrix_binary: bool = False

    # magazine
    freshness_hours: float = 72.0
    page_size: int = 6
    snippet_chars: int = 280
    negative_cache_days: float = 1.0
    on_demand_fetch: bool = True

    # ingest
    fetch_timeout_secs: float = 10.0
    video_hosts: list[str] = field(default_factory=_default_video_hosts)

    # api
    token_salt: str = "emag-dev"
    session_ttl_days: float = 365.0
    # ISO timestamp; when set, the engine clock is frozen (reproducible runs)
    fixed_now: str | None = None

    def with_overrides(self, **kw) -> "EngineConfig":
        return replace(self, **kw)


def load_config(path: str | Path | None) -> EngineConfig:
    """Load an EngineConfig from a JSON file; missing path gives defaults."""
    if path is None:
        return EngineConfig()
    raw = json.loads(Path(path).read_text())
    known = {f.name for f in fields(EngineConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "deltas" in raw:
        merged = _default_deltas()
        merged.update(raw["deltas"])
        raw["deltas"] = merged
    return EngineConfig(**raw)


def dump_config(config: EngineConfig, path: str | Path) -> None:
    data = {f.name: getattr(config, f.name) for f in fields(EngineConfig)}
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True))
