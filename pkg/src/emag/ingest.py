"""Feed-to-store ingestion pipeline.

fetch -> parse -> scrape description -> classify -> dedupe -> persist.
Classification starts from the source's configured category and refines
into a child category when one of the child's trigger keywords shows up
in the item text; the triggers that matched become item keywords along
with the longer title tokens.
"""

from __future__ import annotations

import hashlib
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime

from .config import EngineConfig
from .feeds import FeedError, FeedSource, RawItem, fetch_feed, parse_feed
from .scrape import DescriptionDetails, description_details
from .store import SEP, Store
from .taxonomy import Taxonomy

MEDIA_KINDS = ("article", "image", "video", "mixed")


@dataclass
class ContentItem:
    id: str
    title: str
    canonical_link: str
    body_text: str
    links: list[str]
    image_urls: list[str]
    video_urls: list[str]
    publish_date: datetime
    fetched_at: datetime
    category: str
    media_kind: str
    source_id: str
    keywords: set[str]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "canonical_link": self.canonical_link,
            "body_text": self.body_text,
            "links": self.links,
            "image_urls": self.image_urls,
            "video_urls": self.video_urls,
            "publish_date": self.publish_date.isoformat(),
            "fetched_at": self.fetched_at.isoformat(),
            "category": self.category,
            "media_kind": self.media_kind,
            "source_id": self.source_id,
            "keywords": sorted(self.keywords),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ContentItem":
        return cls(
            id=d["id"],
            title=d["title"],
            canonical_link=d["canonical_link"],
            body_text=d["body_text"],
            links=list(d["links"]),
            image_urls=list(d["image_urls"]),
            video_urls=list(d["video_urls"]),
            publish_date=datetime.fromisoformat(d["publish_date"]),
            fetched_at=datetime.fromisoformat(d["fetched_at"]),
            category=d["category"],
            media_kind=d["media_kind"],
            source_id=d["source_id"],
            keywords=set(d["keywords"]),
        )


@dataclass
class IngestReport:
    source_id: str
    fetched: int = 0
    new: int = 0
    duplicates: int = 0
    skipped: int = 0
    errors: list[str] = field(default_factory=list)

    def merge(self, other: "IngestReport") -> None:
        self.fetched += other.fetched
        self.new += other.new
        self.duplicates += other.duplicates
        self.skipped += other.skipped
        self.errors.extend(other.errors)

    def to_dict(self) -> dict:
        return {
            "source_id": self.source_id,
            "fetched": self.fetched,
            "new": self.new,
            "duplicates": self.duplicates,
            "skipped": self.skipped,
            "errors": list(self.errors),
        }


def content_id(canonical_link: str, title: str) -> str:
    """Stable id: same (link, title) always hashes the same."""
    digest = hashlib.sha256(f"{canonical_link}\n{title}".encode()).hexdigest()
    return digest[:32]


def _word_match(term: str, text: str) -> bool:
    return re.search(rf"\b{re.escape(term)}\b", text) is not None


def _title_tokens(title: str) -> set[str]:
    return {t.lower() for t in re.findall(r"[A-Za-z0-9']+", title) if len(t) > 3}


def media_kind_of(details: DescriptionDetails) -> str:
    has_images = bool(details.images)
    has_videos = bool(details.video_urls)
    if has_images and has_videos:
        return "mixed"
    if has_videos:
        return "video"
    if has_images:
        return "image"
    return "article"


def classify_item(
    item: RawItem,
    details: DescriptionDetails,
    source: FeedSource,
    taxonomy: Taxonomy,
) -> tuple[str, set[str], str]:
    """(category path, keyword set, media kind) for one scraped item.

    The category defaults to the source's; when trigger keywords of a child
    category appear in the title or body text the item moves into the child
    with the most distinct matches (first declared wins ties).
    """
    haystack = f"{item.title}\n{details.text}".lower()
    category = source.category
    matched: set[str] = set()

    if taxonomy.contains(source.category):
        node = taxonomy.resolve(source.category)
        matched.update(t for t in node.triggers if _word_match(t, haystack))
        best_path, best_hits = None, 0
        for child_path, child in taxonomy.children_of(source.category):
            hits = {t for t in child.triggers if _word_match(t, haystack)}
            matched.update(hits)
            if len(hits) > best_hits:
                best_path, best_hits = child_path, len(hits)
        if best_path is not None:
            category = best_path

    keywords = matched | _title_tokens(item.title)
    return category, keywords, media_kind_of(details)


def build_content_item(
    item: RawItem,
    source: FeedSource,
    taxonomy: Taxonomy,
    now: datetime,
    config: EngineConfig,
) -> ContentItem | None:
    """Scrape + classify one raw item; None when it fails the quality gate
    (no text and no media at all)."""
    details = description_details(
        item.description, base_url=item.link, video_hosts=tuple(config.video_hosts)
    )
    if not details.text and not details.images and not details.video_urls:
        return None
    category, keywords, media_kind = classify_item(item, details, source, taxonomy)
    return ContentItem(
        id=content_id(item.link, item.title),
        title=item.title,
        canonical_link=item.link,
        body_text=details.text,
        links=details.links,
        image_urls=details.images,
        video_urls=details.video_urls,
        publish_date=item.publish_date or now,
        fetched_at=now,
        category=category,
        media_kind=media_kind,
        source_id=source.id,
        keywords=keywords,
    )


def persist_item(store: Store, content: ContentItem) -> None:
    # content record and its category index entry commit atomically
    store.put_many(
        [
            ("contents", content.id, content.to_dict()),
            ("contents_by_category", f"{content.category}{SEP}{content.id}", {"id": content.id}),
        ]
    )


def ingest_source(
    source: FeedSource,
    store: Store,
    taxonomy: Taxonomy,
    now: datetime,
    config: EngineConfig | None = None,
    feed_xml: str | None = None,
) -> IngestReport:
    """Run the full pipeline for one source and persist what survives.

    Fetch/parse failures land in the report instead of raising so a bad
    source never aborts a multi-source run. `feed_xml` short-circuits the
    HTTP fetch (used by fixtures and offline replays).
    """
    config = config or EngineConfig()
    report = IngestReport(source_id=source.id)
    try:
        xml = feed_xml if feed_xml is not None else fetch_feed(source, timeout=config.fetch_timeout_secs)
        parsed = parse_feed(xml)
    except FeedError as exc:
        report.errors.append(str(exc))
        return report

    report.fetched = len(parsed.items) + parsed.skipped
    report.skipped = parsed.skipped
    seen_ids: set[str] = set()
    for raw in parsed.items:
        content = build_content_item(raw, source, taxonomy, now, config)
        if content is None:
            report.skipped += 1
            continue
        if content.id in seen_ids or store.get("contents", content.id) is not None:
            report.duplicates += 1
            continue
        persist_item(store, content)
        seen_ids.add(content.id)
        report.new += 1

    source.last_fetched = now
    store.put("sources", source.id, source.to_dict())
    return report


def ingest_all(
    sources: list[FeedSource],
    store: Store,
    taxonomy: Taxonomy,
    now: datetime,
    config: EngineConfig | None = None,
    max_workers: int = 4,
) -> list[IngestReport]:
    """Fetch enabled sources concurrently; per-source pipelines stay sequential."""
    enabled = [s for s in sources if s.enabled]
    if not enabled:
        return []
    with ThreadPoolExecutor(max_workers=min(max_workers, len(enabled))) as pool:
        futures = [
            pool.submit(ingest_source, source, store, taxonomy, now, config)
            for source in enabled
        ]
        return [f.result() for f in futures]
