"""RSS source registry and feed fetching/parsing.

fetch_feed speaks plain HTTP(S) and hands back the raw XML body; parse_feed
walks the RSS 2.0 <item> elements reading title/link/description/pubDate.
Items missing a title or link are skipped and counted, never guessed at.
"""

from __future__ import annotations

import email.utils
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime, timezone
from urllib.parse import urlparse

import httpx


class FeedError(Exception):
    pass


class FetchError(FeedError):
    """A feed could not be retrieved. `retriable` distinguishes transient
    network trouble from permanent misconfiguration (404 and friends)."""

    def __init__(self, source_id: str, message: str, retriable: bool):
        super().__init__(f"{source_id}: {message}")
        self.source_id = source_id
        self.retriable = retriable


class FeedParseError(FeedError):
    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset


@dataclass
class FeedSource:
    id: str
    url: str
    category: str
    last_fetched: datetime | None = None
    enabled: bool = True

    def __post_init__(self):
        parsed = urlparse(self.url)
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            raise ValueError(f"source {self.id}: not an absolute http(s) URL: {self.url}")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "url": self.url,
            "category": self.category,
            "last_fetched": self.last_fetched.isoformat() if self.last_fetched else None,
            "enabled": self.enabled,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeedSource":
        lf = d.get("last_fetched")
        return cls(
            id=d["id"],
            url=d["url"],
            category=d["category"],
            last_fetched=datetime.fromisoformat(lf) if lf else None,
            enabled=d.get("enabled", True),
        )


@dataclass
class RawItem:
    title: str
    link: str
    description: str = ""
    publish_date: datetime | None = None


@dataclass
class ParsedFeed:
    items: list[RawItem] = field(default_factory=list)
    skipped: int = 0


def fetch_feed(source: FeedSource, timeout: float = 10.0) -> str:
    """GET the source URL and return the body on 2xx.

    4xx answers are non-retriable (the source is misconfigured); 5xx and
    transport-level failures are retriable.
    """
    if not source.enabled:
        raise FetchError(source.id, "source disabled", retriable=False)
    try:
        response = httpx.get(source.url, timeout=timeout, follow_redirects=True)
    except httpx.TimeoutException as exc:
        raise FetchError(source.id, f"timeout: {exc}", retriable=True) from exc
    except httpx.HTTPError as exc:
        raise FetchError(source.id, f"network failure: {exc}", retriable=True) from exc
    if 200 <= response.status_code < 300:
        return response.text
    retriable = response.status_code >= 500
    raise FetchError(source.id, f"HTTP {response.status_code}", retriable=retriable)


def _text_of(item: ET.Element, tag: str) -> str:
    node = item.find(tag)
    if node is None or node.text is None:
        return ""
    return node.text.strip()


def parse_pub_date(value: str) -> datetime | None:
    """RFC 822 pubDate -> aware UTC datetime, None if unparseable."""
    if not value:
        return None
    try:
        parsed = email.utils.parsedate_to_datetime(value)
    except (TypeError, ValueError):
        return None
    if parsed is None:
        return None
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc)


def _byte_offset(xml: str, line: int, column: int) -> int:
    # expat reports 1-based line and 0-based column
    lines = xml.split("\n")
    prior = sum(len(l.encode()) + 1 for l in lines[: line - 1])
    return prior + column


def parse_feed(xml: str) -> ParsedFeed:
    """One RawItem per <item> element, document order.

    Items without a non-empty title or link are skipped and counted so
    parsed-item count + skipped always equals the number of <item> elements.
    """
    try:
        root = ET.fromstring(xml)
    except ET.ParseError as exc:
        line, column = exc.position
        raise FeedParseError(str(exc), _byte_offset(xml, line, column)) from exc

    result = ParsedFeed()
    for item in root.iter("item"):
        title = _text_of(item, "title")
        link = _text_of(item, "link")
        if not title or not link:
            result.skipped += 1
            continue
        description = item.find("description")
        desc_text = description.text if description is not None and description.text else ""
        result.items.append(
            RawItem(
                title=title,
                link=link,
                description=desc_text,
                publish_date=parse_pub_date(_text_of(item, "pubDate")),
            )
        )
    return result
