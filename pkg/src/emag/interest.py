"""Per-user weighted interest model.

Each user holds a map keyword -> InterestEntry with a weight in [0, 1].
The weight alone decides the priority tier: High publishes to the
magazine, Mid goes to recommendations, Low sits waiting and is flushed
once stale. Weights move from three directions: profile imports, behavior
events (clicks, saves, ratings, shares, searches), and explicit settings
(sliders / manual edits). All the numeric knobs live in EngineConfig.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .config import EngineConfig
from .errors import ContractViolation, NotFound
from .taxonomy import Taxonomy

TIER_LOW = "Low"
TIER_MID = "Mid"
TIER_HIGH = "High"
TIER_ORDER = {TIER_LOW: 0, TIER_MID: 1, TIER_HIGH: 2}

ORIGINS = ("profile", "behavior", "manual", "followed")
VISIBILITIES = ("public", "private")
LIST_VISIBILITIES = ("public", "partial", "private")

EVENT_KINDS = ("click", "save", "unsave", "rate", "share", "mail", "search", "slider_set")
# events whose target is a keyword rather than a content id
KEYWORD_TARGET_KINDS = ("search", "slider_set")

ALL_KEYWORDS = "ALL"

_DAY_SECONDS = 86400.0


def tier_of(weight: float, config: EngineConfig | None = None) -> str:
    config = config or EngineConfig()
    if not 0.0 <= weight <= 1.0:
        raise ContractViolation(f"weight out of range [0,1]: {weight}")
    if weight >= config.tier_high:
        return TIER_HIGH
    if weight >= config.tier_mid:
        return TIER_MID
    return TIER_LOW


@dataclass
class InterestEntry:
    keyword: str
    weight: float
    last_touched: datetime
    origin: str = "behavior"
    visibility: str = "public"
    # full days of decay already folded into `weight` since last_touched;
    # makes decay_and_flush idempotent within a day
    decay_days_applied: int = 0

    def tier(self, config: EngineConfig | None = None) -> str:
        return tier_of(self.weight, config)

    def to_dict(self) -> dict:
        return {
            "keyword": self.keyword,
            "weight": self.weight,
            "last_touched": self.last_touched.isoformat(),
            "origin": self.origin,
            "visibility": self.visibility,
            "decay_days_applied": self.decay_days_applied,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InterestEntry":
        return cls(
            keyword=d["keyword"],
            weight=d["weight"],
            last_touched=datetime.fromisoformat(d["last_touched"]),
            origin=d["origin"],
            visibility=d["visibility"],
            decay_days_applied=d.get("decay_days_applied", 0),
        )


@dataclass
class BehaviorEvent:
    user_id: str
    kind: str
    target: str
    at: datetime
    value: float | None = None
    event_id: str | None = None

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ContractViolation(f"unknown event kind: {self.kind}")
        if self.kind == "rate":
            if self.value not in (1, 2, 3, 4, 5):
                raise ContractViolation(f"rate value must be 1..5, got {self.value}")
        elif self.kind == "slider_set":
            if self.value is None or not 0.0 <= float(self.value) <= 1.0:
                raise ContractViolation(f"slider value must be in [0,1], got {self.value}")
        if not self.target:
            raise ContractViolation("event target is required")

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "kind": self.kind,
            "target": self.target,
            "at": self.at.isoformat(),
            "value": self.value,
            "event_id": self.event_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BehaviorEvent":
        return cls(
            user_id=d["user_id"],
            kind=d["kind"],
            target=d["target"],
            at=datetime.fromisoformat(d["at"]),
            value=d.get("value"),
            event_id=d.get("event_id"),
        )


@dataclass
class ProfileDocument:
    """Offline stand-in for a social-profile extraction: the liked strings,
    post snippets and professional descriptors a connected account yields."""

    user_id: str
    likes: list[str] = field(default_factory=list)
    posts: list[str] = field(default_factory=list)
    professional: list[str] = field(default_factory=list)
    demographics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.user_id:
            raise ContractViolation("profile document needs a user_id")

    @classmethod
    def from_dict(cls, d: dict) -> "ProfileDocument":
        return cls(
            user_id=d["user_id"],
            likes=list(d.get("likes", [])),
            posts=list(d.get("posts", [])),
            professional=list(d.get("professional", [])),
            demographics=dict(d.get("demographics", {})),
        )


@dataclass
class UserProfile:
    user_id: str
    email: str
    created_at: datetime
    interests: dict[str, InterestEntry] = field(default_factory=dict)
    list_visibility: str = "public"
    event_count: int = 0
    last_event_at: datetime | None = None

    def to_dict(self) -> dict:
        # interests persist separately, keyed (user, keyword)
        return {
            "user_id": self.user_id,
            "email": self.email,
            "created_at": self.created_at.isoformat(),
            "list_visibility": self.list_visibility,
            "event_count": self.event_count,
            "last_event_at": self.last_event_at.isoformat() if self.last_event_at else None,
        }

    @classmethod
    def from_dict(cls, d: dict, interests: dict[str, InterestEntry] | None = None) -> "UserProfile":
        last = d.get("last_event_at")
        return cls(
            user_id=d["user_id"],
            email=d["email"],
            created_at=datetime.fromisoformat(d["created_at"]),
            interests=interests or {},
            list_visibility=d.get("list_visibility", "public"),
            event_count=d.get("event_count", 0),
            last_event_at=datetime.fromisoformat(last) if last else None,
        )


@dataclass
class FlushReport:
    decayed: int = 0
    flushed: int = 0
    flushed_keywords: list[str] = field(default_factory=list)


def _clamp(weight: float) -> float:
    return min(1.0, max(0.0, weight))


def import_profile(
    profile: UserProfile,
    doc: ProfileDocument,
    taxonomy: Taxonomy,
    now: datetime,
    config: EngineConfig | None = None,
) -> dict[str, InterestEntry]:
    """Map liked/professional strings onto taxonomy terms.

    Every string containing a trigger keyword or category name counts one
    occurrence for that term; weight starts at the base and gains one step
    per extra occurrence, capped. Existing entries keep the higher weight.
    """
    config = config or EngineConfig()
    counts: dict[str, int] = {}
    for text in list(doc.likes) + list(doc.professional):
        for term in taxonomy.match_terms(text):
            counts[term] = counts.get(term, 0) + 1

    touched: dict[str, InterestEntry] = {}
    for term in sorted(counts):
        weight = min(
            config.import_base_weight + config.import_step_weight * (counts[term] - 1),
            config.import_cap_weight,
        )
        existing = profile.interests.get(term)
        if existing is not None:
            existing.weight = max(existing.weight, weight)
            existing.last_touched = now
            existing.decay_days_applied = 0
            touched[term] = existing
        else:
            entry = InterestEntry(keyword=term, weight=weight, last_touched=now, origin="profile")
            profile.interests[term] = entry
            touched[term] = entry
    return touched


def event_delta(event: BehaviorEvent, config: EngineConfig) -> float:
    if event.kind == "rate":
        return (int(event.value) - 3) * config.deltas["rate_step"]
    if event.kind == "slider_set":
        raise ContractViolation("slider_set assigns a weight, it has no delta")
    return config.deltas[event.kind]


def apply_event(
    profile: UserProfile,
    event: BehaviorEvent,
    item_keywords: set[str] | None = None,
    config: EngineConfig | None = None,
) -> list[tuple[str, float | None, float]]:
    """Replay-deterministic weight update for one event.

    For keyword-target kinds the single target keyword moves; otherwise
    every keyword of the referenced content item moves equally. Returns
    (keyword, old weight or None, new weight) per touched keyword.
    """
    config = config or EngineConfig()
    if profile.last_event_at is not None and event.at < profile.last_event_at:
        raise ContractViolation(
            f"event stream must be monotone: {event.at.isoformat()} "
            f"< {profile.last_event_at.isoformat()}"
        )

    if event.kind in KEYWORD_TARGET_KINDS:
        keywords = [event.target.lower()]
    else:
        if item_keywords is None:
            raise NotFound(f"unknown event target: {event.target}")
        keywords = sorted(k.lower() for k in item_keywords)

    changes: list[tuple[str, float | None, float]] = []
    for keyword in keywords:
        entry = profile.interests.get(keyword)
        old = entry.weight if entry is not None else None
        if event.kind == "slider_set":
            new = _clamp(float(event.value))
        else:
            new = _clamp((old or 0.0) + event_delta(event, config))
        if entry is None:
            entry = InterestEntry(keyword=keyword, weight=new, last_touched=event.at, origin="behavior")
            profile.interests[keyword] = entry
        else:
            entry.weight = new
            entry.last_touched = event.at
        entry.decay_days_applied = 0
        changes.append((keyword, old, new))

    profile.event_count += 1
    profile.last_event_at = event.at
    return changes


def decay_and_flush(
    profile: UserProfile,
    now: datetime,
    config: EngineConfig | None = None,
) -> FlushReport:
    """Age the interest map.

    Weights decay multiplicatively per full untouched day (idempotent
    within a day thanks to the applied-days marker). Entries that end up
    Low tier after at least `flush_days` untouched days are dropped,
    except manual ones, which the user placed deliberately.
    """
    config = config or EngineConfig()
    report = FlushReport()
    for keyword in sorted(profile.interests):
        entry = profile.interests[keyword]
        full_days = int((now - entry.last_touched).total_seconds() // _DAY_SECONDS)
        if full_days < 1:
            continue
        pending = full_days - entry.decay_days_applied
        if pending > 0:
            entry.weight *= config.decay_per_day**pending
            entry.decay_days_applied = full_days
            report.decayed += 1
        if (
            full_days >= config.flush_days
            and entry.origin != "manual"
            and tier_of(entry.weight, config) == TIER_LOW
        ):
            del profile.interests[keyword]
            report.flushed += 1
            report.flushed_keywords.append(keyword)
    return report


def set_interest(
    profile: UserProfile,
    keyword: str,
    weight: float,
    now: datetime,
    visibility: str = "public",
) -> InterestEntry:
    if not 0.0 <= weight <= 1.0:
        raise ContractViolation(f"weight out of range [0,1]: {weight}")
    if visibility not in VISIBILITIES:
        raise ContractViolation(f"visibility must be one of {VISIBILITIES}")
    keyword = keyword.lower()
    entry = profile.interests.get(keyword)
    if entry is None:
        entry = InterestEntry(keyword=keyword, weight=weight, last_touched=now, origin="manual")
        profile.interests[keyword] = entry
    else:
        entry.weight = weight
        entry.origin = "manual"
        entry.last_touched = now
    entry.visibility = visibility
    entry.decay_days_applied = 0
    return entry


def delete_interest(profile: UserProfile, keyword: str) -> bool:
    """Idempotent removal; reports whether the keyword was present."""
    return profile.interests.pop(keyword.lower(), None) is not None


def progress(profile: UserProfile, config: EngineConfig | None = None) -> int:
    """Learning progress as a saturating percentage of processed events."""
    config = config or EngineConfig()
    percent = round(100.0 * (1.0 - math.exp(-profile.event_count / config.progress_k)))
    return max(0, min(100, percent))


def visible_interests(
    owner: UserProfile, viewer_id: str
) -> list[tuple[str, float]]:
    """(keyword, weight) pairs the viewer may see, weight-descending."""
    if viewer_id == owner.user_id or owner.list_visibility == "public":
        entries = list(owner.interests.values())
    elif owner.list_visibility == "partial":
        entries = [e for e in owner.interests.values() if e.visibility == "public"]
    else:
        entries = []
    entries.sort(key=lambda e: (-e.weight, e.keyword))
    return [(e.keyword, e.weight) for e in entries]


def follow_keywords(
    viewer: UserProfile,
    owner: UserProfile,
    keywords: list[str] | str,
    now: datetime,
    config: EngineConfig | None = None,
) -> list[InterestEntry]:
    """Adopt another user's visible keywords at the follow weight.

    Asking for a keyword the owner keeps hidden is rejected outright;
    already-held keywords keep whichever weight is higher.
    """
    config = config or EngineConfig()
    visible = dict(visible_interests(owner, viewer.user_id))
    if keywords == ALL_KEYWORDS:
        wanted = sorted(visible)
    else:
        wanted = sorted(k.lower() for k in keywords)
        hidden = [k for k in wanted if k not in visible]
        if hidden:
            raise ContractViolation(f"keywords not visible to {viewer.user_id}: {hidden}")

    adopted: list[InterestEntry] = []
    for keyword in wanted:
        entry = viewer.interests.get(keyword)
        if entry is None:
            entry = InterestEntry(
                keyword=keyword, weight=config.follow_weight, last_touched=now, origin="followed"
            )
            viewer.interests[keyword] = entry
        else:
            entry.weight = max(entry.weight, config.follow_weight)
            entry.last_touched = now
        entry.decay_days_applied = 0
        adopted.append(entry)
    return adopted
