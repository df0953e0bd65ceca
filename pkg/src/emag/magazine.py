"""Magazine assembly, search, saved items, ratings, share payloads.

An item is published for a user when it shares at least one keyword with
the user's High-tier interests; its score is the summed weights of the
matching keywords damped exponentially by content age, so fresh items on
strong interests float to the front. Everything here is a pure function
over store snapshots; behavior events are emitted by the engine layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta

from .config import EngineConfig
from .errors import ContractViolation, NotFound
from .ingest import MEDIA_KINDS, ContentItem, IngestReport, ingest_all
from .interest import UserProfile
from .store import SEP, Store

SHARE_CHANNELS = ("facebook", "twitter", "linkedin", "googleplus", "mail")


@dataclass
class MagazineSlot:
    content_id: str
    matched_keywords: list[str]
    score: float

    def to_dict(self) -> dict:
        return {
            "content_id": self.content_id,
            "matched_keywords": list(self.matched_keywords),
            "score": self.score,
        }


@dataclass
class MagazinePage:
    page_number: int
    slots: list[MagazineSlot]
    generated_at: datetime

    def to_dict(self) -> dict:
        return {
            "page_number": self.page_number,
            "slots": [s.to_dict() for s in self.slots],
            "generated_at": self.generated_at.isoformat(),
        }


@dataclass
class MagazineResult:
    pages: list[MagazinePage]
    cold_start: bool


@dataclass
class SearchQuery:
    keyword: str
    media_kind: str | None = None
    date_from: datetime | None = None
    date_to: datetime | None = None
    source_id: str | None = None
    limit: int | None = None

    def __post_init__(self):
        if not self.keyword or not self.keyword.strip():
            raise ContractViolation("search keyword must be non-empty")
        if self.media_kind is not None and self.media_kind not in MEDIA_KINDS:
            raise ContractViolation(f"media_kind must be one of {MEDIA_KINDS}")
        if self.date_from and self.date_to and self.date_from > self.date_to:
            raise ContractViolation("date range start must be <= end")


@dataclass
class SavedItem:
    user_id: str
    content_id: str
    saved_at: datetime
    rating: int | None = None

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "content_id": self.content_id,
            "saved_at": self.saved_at.isoformat(),
            "rating": self.rating,
        }


def high_tier_weights(profile: UserProfile, config: EngineConfig) -> dict[str, float]:
    # threshold comparison, not tier_of(): keeps scoring usable on scaled
    # weight sets test harnesses construct with matching scaled thresholds
    return {
        kw: e.weight for kw, e in profile.interests.items() if e.weight >= config.tier_high
    }


def score_item(
    item: ContentItem,
    high_weights: dict[str, float],
    now: datetime,
    config: EngineConfig | None = None,
) -> tuple[float, list[str]]:
    """(score, matched keywords): summed matching High weights times an
    exponential freshness factor. No High match means score 0."""
    config = config or EngineConfig()
    matched = sorted(kw for kw in item.keywords if kw in high_weights)
    if not matched:
        return 0.0, []
    base = sum(high_weights[kw] for kw in matched)
    age_hours = (now - item.publish_date).total_seconds() / 3600.0
    return base * math.exp(-age_hours / config.freshness_hours), matched


def build_magazine(
    items: list[ContentItem],
    profile: UserProfile,
    now: datetime,
    page_size: int | None = None,
    config: EngineConfig | None = None,
) -> MagazineResult:
    """All positively scored items, best first, chunked into fixed pages.

    A user with no High-tier interest at all gets the cold-start signal
    instead of a silently empty magazine.
    """
    config = config or EngineConfig()
    size = page_size if page_size is not None else config.page_size
    if size < 1:
        raise ContractViolation(f"page_size must be >= 1, got {size}")
    high = high_tier_weights(profile, config)
    if not high:
        return MagazineResult(pages=[], cold_start=True)

    scored: list[tuple[float, ContentItem, list[str]]] = []
    for item in items:
        score, matched = score_item(item, high, now, config)
        if score > 0.0:
            scored.append((score, item, matched))
    scored.sort(key=lambda t: (-t[0], -t[1].publish_date.timestamp(), t[1].id))

    pages: list[MagazinePage] = []
    for start in range(0, len(scored), size):
        chunk = scored[start : start + size]
        pages.append(
            MagazinePage(
                page_number=len(pages) + 1,
                slots=[
                    MagazineSlot(content_id=item.id, matched_keywords=matched, score=score)
                    for score, item, matched in chunk
                ],
                generated_at=now,
            )
        )
    return MagazineResult(pages=pages, cold_start=False)


def _matches_query(item: ContentItem, query: SearchQuery) -> bool:
    needle = query.keyword.lower()
    if not (
        needle in item.keywords
        or needle in item.title.lower()
        or needle in item.body_text.lower()
    ):
        return False
    if query.media_kind is not None and item.media_kind != query.media_kind:
        return False
    if query.date_from is not None and item.publish_date < query.date_from:
        return False
    if query.date_to is not None and item.publish_date > query.date_to:
        return False
    if query.source_id is not None and item.source_id != query.source_id:
        return False
    return True


def search(items: list[ContentItem], query: SearchQuery) -> list[ContentItem]:
    """Keyword containment (keywords, title, or body) intersected with all
    supplied filters, newest first."""
    hits = [i for i in items if _matches_query(i, query)]
    hits.sort(key=lambda i: (-i.publish_date.timestamp(), i.id))
    if query.limit is not None:
        hits = hits[: query.limit]
    return hits


def cached_keyword_category(
    store: Store, keyword: str, now: datetime, config: EngineConfig
) -> dict | None:
    """Fresh keyword->category cache entry, if any. Negative entries expire
    after the configured TTL so a failed hunt is retried eventually."""
    entry = store.get("keyword_category_cache", keyword.lower())
    if entry is None:
        return None
    if entry.get("negative"):
        cached_at = datetime.fromisoformat(entry["cached_at"])
        if now - cached_at >= timedelta(days=config.negative_cache_days):
            return None
    return entry


def fetch_on_demand(
    keyword: str,
    sources,
    store: Store,
    taxonomy,
    now: datetime,
    config: EngineConfig | None = None,
) -> tuple[IngestReport, list[ContentItem]]:
    """Hunt the configured sources for a keyword that had no stored content.

    Re-ingests every enabled source, then records the keyword->category
    association (negative when still not found) so the next lookup answers
    from the store instead of the network.
    """
    config = config or EngineConfig()
    combined = IngestReport(source_id="on-demand")
    for report in ingest_all(sources, store, taxonomy, now, config):
        combined.merge(report)

    all_items = [ContentItem.from_dict(v) for _, v in store.items("contents")]
    found = search(all_items, SearchQuery(keyword=keyword))
    store.put(
        "keyword_category_cache",
        keyword.lower(),
        {
            "keyword": keyword.lower(),
            "category": found[0].category if found else None,
            "cached_at": now.isoformat(),
            "negative": not found,
        },
    )
    return combined, found


def save_item(store: Store, user_id: str, content_id: str, now: datetime) -> tuple[SavedItem, bool]:
    """Idempotent save; returns (record, created)."""
    if store.get("contents", content_id) is None:
        raise NotFound(f"unknown content id: {content_id}")
    key = f"{user_id}{SEP}{content_id}"
    existing = store.get("saved", key)
    if existing is not None:
        return (
            SavedItem(
                user_id=user_id,
                content_id=content_id,
                saved_at=datetime.fromisoformat(existing["saved_at"]),
            ),
            False,
        )
    record = SavedItem(user_id=user_id, content_id=content_id, saved_at=now)
    store.put("saved", key, {"saved_at": now.isoformat()})
    return record, True


def unsave_item(store: Store, user_id: str, content_id: str) -> bool:
    key = f"{user_id}{SEP}{content_id}"
    existed = store.get("saved", key) is not None
    store.delete("saved", key)
    return existed


def list_saved(
    store: Store,
    user_id: str,
    sort: str = "saved_at",
    query: SearchQuery | None = None,
) -> list[tuple[SavedItem, ContentItem]]:
    """Saved items newest-save-first by default, or by publish date; the
    same filters as search apply when a query is given."""
    if sort not in ("saved_at", "publish_date"):
        raise ContractViolation(f"sort must be saved_at or publish_date, got {sort}")
    rows: list[tuple[SavedItem, ContentItem]] = []
    for key, value in store.scan("saved", f"{user_id}{SEP}"):
        content_id = key.split(SEP, 1)[1]
        raw = store.get("contents", content_id)
        if raw is None:
            continue
        item = ContentItem.from_dict(raw)
        if query is not None and not _matches_query(item, query):
            continue
        rating = store.get("ratings", f"{user_id}{SEP}{content_id}")
        rows.append(
            (
                SavedItem(
                    user_id=user_id,
                    content_id=content_id,
                    saved_at=datetime.fromisoformat(value["saved_at"]),
                    rating=rating["value"] if rating else None,
                ),
                item,
            )
        )
    if sort == "saved_at":
        rows.sort(key=lambda r: (-r[0].saved_at.timestamp(), r[0].content_id))
    else:
        rows.sort(key=lambda r: (-r[1].publish_date.timestamp(), r[1].id))
    return rows


def rate_item(store: Store, user_id: str, content_id: str, value: int, now: datetime) -> dict:
    """Store (or overwrite) a one-to-five rating."""
    if not isinstance(value, int) or isinstance(value, bool) or value not in (1, 2, 3, 4, 5):
        raise ContractViolation(f"rating must be an integer 1..5, got {value!r}")
    if store.get("contents", content_id) is None:
        raise NotFound(f"unknown content id: {content_id}")
    record = {"value": value, "rated_at": now.isoformat()}
    store.put("ratings", f"{user_id}{SEP}{content_id}", record)
    return record


def share_payload(item: ContentItem, channel: str, config: EngineConfig | None = None) -> dict:
    """Title/link/snippet bundle for the caller to post; nothing is sent."""
    config = config or EngineConfig()
    if channel not in SHARE_CHANNELS:
        raise ContractViolation(f"channel must be one of {SHARE_CHANNELS}")
    text = item.body_text
    if len(text) > config.snippet_chars:
        text = text[: config.snippet_chars - 3] + "…"
    return {"title": item.title, "link": item.canonical_link, "text_snippet": text}
