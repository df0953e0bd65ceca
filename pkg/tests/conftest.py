import http.server
import json
import sys
import threading
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
sys.path.insert(0, str(TESTS_DIR))  # for `import oracles`

from emag.config import EngineConfig
from emag.feeds import FeedSource
from emag.ingest import ContentItem
from emag.interest import InterestEntry, UserProfile
from emag.store import Store
from emag.taxonomy import Taxonomy

FIXTURES = TESTS_DIR / "fixtures"
SCRAPING = FIXTURES / "scraping"

NOW = datetime(2026, 8, 1, 12, 0, 0, tzinfo=timezone.utc)


@pytest.fixture
def now():
    return NOW


@pytest.fixture
def config():
    return EngineConfig()


@pytest.fixture
def taxonomy():
    return Taxonomy.from_file(FIXTURES / "taxonomy.json")


@pytest.fixture
def mem_store():
    return Store(data_dir=None)


@pytest.fixture
def disk_store(tmp_path):
    store = Store(data_dir=tmp_path / "data")
    yield store
    store.close()


def make_item(
    item_id="c1",
    title="Sample",
    keywords=("cricket",),
    publish_date=None,
    media_kind="article",
    source_id="s1",
    category="sports/cricket",
    body_text="body",
    image_urls=(),
    video_urls=(),
) -> ContentItem:
    publish_date = publish_date or NOW
    return ContentItem(
        id=item_id,
        title=title,
        canonical_link=f"http://content.example/{item_id}",
        body_text=body_text,
        links=[],
        image_urls=list(image_urls),
        video_urls=list(video_urls),
        publish_date=publish_date,
        fetched_at=publish_date,
        category=category,
        media_kind=media_kind,
        source_id=source_id,
        keywords=set(keywords),
    )


def make_profile(user_id="u1", email=None, weights=None, origins=None, now=NOW) -> UserProfile:
    profile = UserProfile(user_id=user_id, email=email or f"{user_id}@example.net", created_at=now)
    for keyword, weight in (weights or {}).items():
        profile.interests[keyword] = InterestEntry(
            keyword=keyword,
            weight=weight,
            last_touched=now,
            origin=(origins or {}).get(keyword, "behavior"),
        )
    return profile


def hours_ago(hours, base=NOW):
    return base - timedelta(hours=hours)


def days_ago(days, base=NOW):
    return base - timedelta(days=days)


class _FixtureFeedHandler(http.server.SimpleHTTPRequestHandler):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, directory=str(SCRAPING), **kwargs)

    def log_message(self, *args):
        pass


@pytest.fixture(scope="session")
def feed_server():
    """Local HTTP server rooted at the scraping fixture directory."""
    server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), _FixtureFeedHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


def fixture_sources(base_url: str) -> list[FeedSource]:
    return [
        FeedSource(id="tech", url=f"{base_url}/01_feed_basic.xml", category="technology"),
        FeedSource(id="mixed", url=f"{base_url}/08_feed_mixed_categories.xml", category="sports"),
    ]


def load_expected(stem: str) -> dict:
    return json.loads((SCRAPING / f"{stem}.expected.json").read_text())
