"""Screen-scraping of item description fragments.

Turns the raw HTML/text fragment carried in an RSS item description into
plain text, anchor hrefs, and image srcs. Built on a tolerant tag tokenizer
(stdlib html.parser) rather than regexes so malformed markup degrades
gracefully instead of corrupting the output.

Contract notes:
- only the five entities &amp; &lt; &gt; &quot; &#39; are decoded in text;
  anything else (&nbsp;, &#x27;, ...) passes through verbatim
- script/style contents are dropped entirely
- every tag boundary contributes whitespace, then runs of whitespace are
  collapsed to single spaces and the result is trimmed
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from html.parser import HTMLParser
from urllib.parse import urljoin

_FIVE_ENTITIES = {"&amp;": "&", "&lt;": "<", "&gt;": ">", "&quot;": '"', "&#39;": "'"}
_FIVE_ENTITY_RE = re.compile("|".join(re.escape(e) for e in _FIVE_ENTITIES))

# ampersands are masked before tokenizing so the tokenizer never invents or
# swallows entity boundaries; the mask survives into the collected chunks
_AMP_MASK = "\x00"


def _decode_entities(text: str) -> str:
    """Decode exactly the five supported entities in one simultaneous pass;
    every other &-sequence stays byte-for-byte as written."""
    return _FIVE_ENTITY_RE.sub(lambda m: _FIVE_ENTITIES[m.group()], text)


def _unmask(text: str) -> str:
    return _decode_entities(text.replace(_AMP_MASK, "&"))

# hosts (or their subdomains) whose anchor/iframe URLs count as video links
DEFAULT_VIDEO_HOSTS = ("youtube.com", "vimeo.com")

_SUPPRESSED_CONTENT_TAGS = {"script", "style"}


@dataclass
class DescriptionDetails:
    text: str
    links: list[str]
    images: list[str]
    video_urls: list[str] = field(default_factory=list)


class _FragmentScanner(HTMLParser):
    """Single pass over a fragment collecting text, hrefs, srcs and iframe srcs."""

    def __init__(self) -> None:
        super().__init__(convert_charrefs=False)
        self.chunks: list[str] = []
        self.hrefs: list[str] = []
        self.srcs: list[str] = []
        self.iframe_srcs: list[str] = []
        self._suppress_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in _SUPPRESSED_CONTENT_TAGS:
            self._suppress_depth += 1
        attr_map = dict(attrs)
        if tag == "a" and attr_map.get("href"):
            self.hrefs.append(_unmask(attr_map["href"]))
        elif tag == "img" and attr_map.get("src"):
            self.srcs.append(_unmask(attr_map["src"]))
        elif tag == "iframe" and attr_map.get("src"):
            self.iframe_srcs.append(_unmask(attr_map["src"]))
        self.chunks.append(" ")

    def handle_endtag(self, tag):
        if tag in _SUPPRESSED_CONTENT_TAGS and self._suppress_depth:
            self._suppress_depth -= 1
        self.chunks.append(" ")

    def handle_startendtag(self, tag, attrs):
        self.handle_starttag(tag, attrs)
        if tag in _SUPPRESSED_CONTENT_TAGS and self._suppress_depth:
            self._suppress_depth -= 1

    def handle_data(self, data):
        if not self._suppress_depth:
            self.chunks.append(data)

    # comments, declarations and PIs are markup: drop them
    def handle_comment(self, data):
        self.chunks.append(" ")

    def handle_decl(self, decl):
        self.chunks.append(" ")

    def handle_pi(self, data):
        self.chunks.append(" ")


def _scan(fragment: str) -> _FragmentScanner:
    scanner = _FragmentScanner()
    # NUL is not valid content; reusing it as the ampersand mask is safe
    scanner.feed(fragment.replace(_AMP_MASK, "").replace("&", _AMP_MASK))
    scanner.close()
    return scanner


def strip_html_text(fragment: str) -> str:
    """Plain text of a fragment: tags gone, five entities decoded,
    whitespace collapsed, trimmed."""
    return " ".join(_unmask("".join(_scan(fragment).chunks)).split())


def _resolve(urls: list[str], base_url: str | None) -> list[str]:
    if base_url is None:
        return list(urls)
    return [urljoin(base_url, u) for u in urls]


def extract_links(fragment: str, base_url: str | None = None) -> list[str]:
    """href values of all anchors in document order, duplicates preserved.
    Relative URLs are resolved against base_url when given, else kept verbatim."""
    return _resolve(_scan(fragment).hrefs, base_url)


def extract_images(fragment: str, base_url: str | None = None) -> list[str]:
    """src values of all img tags in document order, duplicates preserved."""
    return _resolve(_scan(fragment).srcs, base_url)


def _host_of(url: str) -> str:
    from urllib.parse import urlparse

    return (urlparse(url).hostname or "").lower()


def is_video_url(url: str, video_hosts=DEFAULT_VIDEO_HOSTS) -> bool:
    host = _host_of(url)
    return any(host == h or host.endswith("." + h) for h in video_hosts)


def description_details(
    fragment: str,
    base_url: str | None = None,
    video_hosts=DEFAULT_VIDEO_HOSTS,
) -> DescriptionDetails:
    """One-pass composition of text/link/image extraction over a fragment.

    Video URLs are the anchor and iframe targets whose host matches the
    allowlist; they are reported separately and also remain in `links`
    when they came from anchors.
    """
    scanner = _scan(fragment)
    links = _resolve(scanner.hrefs, base_url)
    images = _resolve(scanner.srcs, base_url)
    iframes = _resolve(scanner.iframe_srcs, base_url)
    videos = [u for u in links + iframes if is_video_url(u, video_hosts)]
    text = " ".join("".join(scanner.chunks).split())
    return DescriptionDetails(text=text, links=links, images=images, video_urls=videos)
