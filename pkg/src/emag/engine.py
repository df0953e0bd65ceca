"""Engine: the single facade the API and CLI drive.

Owns the store, taxonomy and configuration; loads/persists user profiles;
serializes writes per user; records behavior events to the append-only log
before applying them so the interest state is always reproducible by
replay. Recommender rebuilds publish immutable model blobs versioned in
the store; readers only ever see a fully published version.
"""

from __future__ import annotations

import hashlib
import threading
import uuid
from datetime import datetime, timedelta, timezone
from pathlib import Path

from . import interest, magazine, recommender
from .config import EngineConfig, load_config
from .errors import Conflict, ContractViolation, NotFound
from .feeds import FeedSource
from .ingest import ContentItem, IngestReport, ingest_all, ingest_source
from .interest import BehaviorEvent, InterestEntry, ProfileDocument, UserProfile
from .magazine import MagazineResult, SearchQuery
from .recommender import Recommendation, RecommenderModel
from .store import SEP, Store
from .taxonomy import Taxonomy, default_taxonomy


class StaleModelError(ContractViolation):
    """No current decomposition; a rebuild is required first."""


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class Engine:
    def __init__(
        self,
        store: Store,
        taxonomy: Taxonomy | None = None,
        config: EngineConfig | None = None,
    ):
        self.store = store
        self.taxonomy = taxonomy or default_taxonomy()
        self.config = config or EngineConfig()
        self._user_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    @classmethod
    def open(
        cls,
        data_dir: str | Path | None,
        config_path: str | Path | None = None,
        taxonomy_path: str | Path | None = None,
    ) -> "Engine":
        config = load_config(config_path)
        taxonomy = Taxonomy.from_file(taxonomy_path) if taxonomy_path else default_taxonomy()
        return cls(Store(data_dir), taxonomy=taxonomy, config=config)

    def now(self) -> datetime:
        if self.config.fixed_now is not None:
            return datetime.fromisoformat(self.config.fixed_now)
        return _utcnow()

    def _lock_for(self, user_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._user_locks.setdefault(user_id, threading.Lock())

    # ----------------------------------------------------------------- users

    def register_user(self, email: str) -> tuple[UserProfile, str]:
        email = email.strip().lower()
        if not email or "@" not in email:
            raise ContractViolation(f"not an email address: {email!r}")
        user_id = "u" + hashlib.sha256(email.encode()).hexdigest()[:12]
        if self.store.get("users", user_id) is not None:
            raise Conflict(f"already registered: {email}")
        profile = UserProfile(user_id=user_id, email=email, created_at=self.now())
        self.store.put_many(
            [
                ("users", user_id, profile.to_dict()),
                ("meta", f"token{SEP}{self.token_for(profile)}", user_id),
            ]
        )
        return profile, self.token_for(profile)

    def token_for(self, profile: UserProfile) -> str:
        # deterministic per user: survives dump/load round trips
        raw = f"{profile.user_id}|{profile.email}|{self.config.token_salt}"
        return hashlib.sha256(raw.encode()).hexdigest()[:40]

    def authenticate(self, token: str) -> UserProfile:
        user_id = self.store.get("meta", f"token{SEP}{token}")
        if user_id is None:
            raise NotFound("unknown token")
        profile = self.load_user(user_id)
        expires_at = profile.created_at + timedelta(days=self.config.session_ttl_days)
        if self.now() >= expires_at:
            raise NotFound("token expired")
        return profile

    def load_user(self, user_id: str) -> UserProfile:
        raw = self.store.get("users", user_id)
        if raw is None:
            raise NotFound(f"unknown user: {user_id}")
        interests = {
            key.split(SEP, 1)[1]: InterestEntry.from_dict(value)
            for key, value in self.store.scan("interests", f"{user_id}{SEP}")
        }
        return UserProfile.from_dict(raw, interests)

    def all_users(self) -> list[UserProfile]:
        return [self.load_user(uid) for uid, _ in self.store.items("users")]

    def _persist_user(
        self,
        profile: UserProfile,
        touched: list[str] | None = None,
        deleted: list[str] | None = None,
    ) -> None:
        """Write back a profile, skipping no-op writes.

        The interest epoch (recommender staleness marker) only moves when an
        interest entry materially changed, so replayed no-op requests leave
        the store dump byte-identical and the published model stays fresh.
        """
        ops: list[tuple[str, str, object]] = []
        record = profile.to_dict()
        if self.store.get("users", profile.user_id) != record:
            ops.append(("users", profile.user_id, record))
        interests_changed = False
        keywords = profile.interests.keys() if touched is None else touched
        for keyword in keywords:
            entry = profile.interests.get(keyword)
            if entry is None:
                continue
            key = f"{profile.user_id}{SEP}{keyword}"
            value = entry.to_dict()
            if self.store.get("interests", key) != value:
                ops.append(("interests", key, value))
                interests_changed = True
        for keyword in deleted or ():
            key = f"{profile.user_id}{SEP}{keyword}"
            if self.store.get("interests", key) is not None:
                ops.append(("interests", key, None))
                interests_changed = True
        if interests_changed:
            ops.append(("meta", "interest_epoch", self._interest_epoch() + 1))
        if ops:
            self.store.put_many(ops)

    def _interest_epoch(self) -> int:
        return int(self.store.get("meta", "interest_epoch", 0))

    # --------------------------------------------------------------- sources

    def add_source(self, source: FeedSource) -> None:
        if not self.taxonomy.contains(source.category):
            raise ContractViolation(f"unknown category: {source.category}")
        if self.store.get("sources", source.id) is not None:
            raise Conflict(f"source already exists: {source.id}")
        self.store.put("sources", source.id, source.to_dict())

    def list_sources(self) -> list[FeedSource]:
        return [FeedSource.from_dict(v) for _, v in self.store.items("sources")]

    def set_source_enabled(self, source_id: str, enabled: bool) -> FeedSource:
        raw = self.store.get("sources", source_id)
        if raw is None:
            raise NotFound(f"unknown source: {source_id}")
        raw["enabled"] = enabled
        self.store.put("sources", source_id, raw)
        return FeedSource.from_dict(raw)

    def ingest(self, source_id: str | None = None) -> list[IngestReport]:
        now = self.now()
        if source_id is not None:
            raw = self.store.get("sources", source_id)
            if raw is None:
                raise NotFound(f"unknown source: {source_id}")
            source = FeedSource.from_dict(raw)
            if not source.enabled:
                raise ContractViolation(f"source disabled: {source_id}")
            return [ingest_source(source, self.store, self.taxonomy, now, self.config)]
        return ingest_all(self.list_sources(), self.store, self.taxonomy, now, self.config)

    # ---------------------------------------------------------------- events

    def record_event(self, event: BehaviorEvent) -> list[tuple[str, float | None, float]]:
        """Validate, log, apply, persist. Duplicate event ids are absorbed
        so retried/replayed requests cannot double-count."""
        if event.event_id is None:
            event.event_id = uuid.uuid4().hex
        with self._lock_for(event.user_id):
            profile = self.load_user(event.user_id)
            if self.store.get("event_ids", event.event_id) is not None:
                return []
            if event.kind in interest.KEYWORD_TARGET_KINDS:
                item_keywords = None
            else:
                raw = self.store.get("contents", event.target)
                if raw is None:
                    raise NotFound(f"unknown event target: {event.target}")
                item_keywords = set(raw["keywords"])
            changes = interest.apply_event(profile, event, item_keywords, self.config)
            self.store.append_event(event.user_id, event.to_dict())
            self.store.put("event_ids", event.event_id, {"user_id": event.user_id})
            self._persist_user(profile, touched=[c[0] for c in changes])
            return changes

    def replay_events(self, user_id: str) -> UserProfile:
        """Rebuild a user's interest state purely from the event log."""
        raw = self.store.get("users", user_id)
        if raw is None:
            raise NotFound(f"unknown user: {user_id}")
        profile = UserProfile.from_dict(raw, interests={})
        profile.event_count = 0
        profile.last_event_at = None
        for record in self.store.events(user_id):
            event = BehaviorEvent.from_dict(record)
            if event.kind in interest.KEYWORD_TARGET_KINDS:
                item_keywords = None
            else:
                content = self.store.get("contents", event.target)
                item_keywords = set(content["keywords"]) if content else set()
            interest.apply_event(profile, event, item_keywords, self.config)
        return profile

    def _emit(
        self,
        user_id: str,
        kind: str,
        target: str,
        value: float | None = None,
        request_id: str | None = None,
    ) -> None:
        event_id = None
        if request_id is not None:
            event_id = hashlib.sha256(f"{user_id}|{kind}|{target}|{request_id}".encode()).hexdigest()[:32]
        self.record_event(
            BehaviorEvent(
                user_id=user_id,
                kind=kind,
                target=target,
                at=self.now(),
                value=value,
                event_id=event_id,
            )
        )

    # -------------------------------------------------------------- interest

    def import_profile(self, doc: ProfileDocument) -> dict[str, InterestEntry]:
        with self._lock_for(doc.user_id):
            profile = self.load_user(doc.user_id)
            touched = interest.import_profile(profile, doc, self.taxonomy, self.now(), self.config)
            self._persist_user(profile, touched=sorted(touched))
            return touched

    def set_interest(
        self, user_id: str, keyword: str, weight: float, visibility: str = "public"
    ) -> InterestEntry:
        with self._lock_for(user_id):
            profile = self.load_user(user_id)
            entry = interest.set_interest(profile, keyword, weight, self.now(), visibility)
            self._persist_user(profile, touched=[entry.keyword])
            return entry

    def delete_interest(self, user_id: str, keyword: str) -> bool:
        with self._lock_for(user_id):
            profile = self.load_user(user_id)
            existed = interest.delete_interest(profile, keyword)
            self._persist_user(profile, touched=[], deleted=[keyword.lower()])
            return existed

    def set_visibility(self, user_id: str, list_visibility: str) -> UserProfile:
        if list_visibility not in interest.LIST_VISIBILITIES:
            raise ContractViolation(
                f"visibility must be one of {interest.LIST_VISIBILITIES}"
            )
        with self._lock_for(user_id):
            profile = self.load_user(user_id)
            profile.list_visibility = list_visibility
            self._persist_user(profile, touched=[])
            return profile

    def visible_interests(self, owner_id: str, viewer_id: str) -> list[tuple[str, float]]:
        return interest.visible_interests(self.load_user(owner_id), viewer_id)

    def follow(self, viewer_id: str, owner_id: str, keywords: list[str] | str) -> list[InterestEntry]:
        owner = self.load_user(owner_id)
        with self._lock_for(viewer_id):
            viewer = self.load_user(viewer_id)
            adopted = interest.follow_keywords(viewer, owner, keywords, self.now(), self.config)
            self._persist_user(viewer, touched=[e.keyword for e in adopted])
            return adopted

    def progress(self, user_id: str) -> int:
        return interest.progress(self.load_user(user_id), self.config)

    def decay_flush_all(self) -> dict[str, interest.FlushReport]:
        now = self.now()
        reports: dict[str, interest.FlushReport] = {}
        for profile in self.all_users():
            with self._lock_for(profile.user_id):
                report = interest.decay_and_flush(profile, now, self.config)
                self._persist_user(profile, deleted=report.flushed_keywords)
                reports[profile.user_id] = report
        return reports

    # -------------------------------------------------------------- contents

    def content_items(self) -> list[ContentItem]:
        return [ContentItem.from_dict(v) for _, v in self.store.items("contents")]

    def get_content(self, content_id: str) -> ContentItem:
        raw = self.store.get("contents", content_id)
        if raw is None:
            raise NotFound(f"unknown content id: {content_id}")
        return ContentItem.from_dict(raw)

    # -------------------------------------------------------------- magazine

    def magazine(
        self, user_id: str, page_size: int | None = None, now: datetime | None = None
    ) -> MagazineResult:
        profile = self.load_user(user_id)
        return magazine.build_magazine(
            self.content_items(), profile, now or self.now(), page_size, self.config
        )

    def search(
        self,
        query: SearchQuery,
        user_id: str | None = None,
        request_id: str | None = None,
    ) -> list[ContentItem]:
        """Search stored content; when a user is attached the search itself
        is a behavior signal. An empty result may trigger the on-demand
        source hunt unless a fresh cache entry says it is hopeless."""
        results = magazine.search(self.content_items(), query)
        if user_id is not None:
            self._emit(user_id, "search", query.keyword.lower(), request_id=request_id)
        if not results and self.config.on_demand_fetch:
            now = self.now()
            if magazine.cached_keyword_category(self.store, query.keyword, now, self.config) is None:
                _, found = magazine.fetch_on_demand(
                    query.keyword, self.list_sources(), self.store, self.taxonomy, now, self.config
                )
                results = magazine.search(found, query)
        return results

    def save_item(self, user_id: str, content_id: str, request_id: str | None = None):
        self.load_user(user_id)
        record, created = magazine.save_item(self.store, user_id, content_id, self.now())
        if created:
            self._emit(user_id, "save", content_id, request_id=request_id)
        return record, created

    def unsave_item(self, user_id: str, content_id: str, request_id: str | None = None) -> bool:
        existed = magazine.unsave_item(self.store, user_id, content_id)
        if existed:
            self._emit(user_id, "unsave", content_id, request_id=request_id)
        return existed

    def list_saved(self, user_id: str, sort: str = "saved_at", query: SearchQuery | None = None):
        self.load_user(user_id)
        return magazine.list_saved(self.store, user_id, sort, query)

    def rate_item(
        self, user_id: str, content_id: str, value: int, request_id: str | None = None
    ) -> dict:
        record = magazine.rate_item(self.store, user_id, content_id, value, self.now())
        self._emit(user_id, "rate", content_id, value=value, request_id=request_id)
        return record

    def share(
        self, user_id: str, content_id: str, channel: str, request_id: str | None = None
    ) -> dict:
        item = self.get_content(content_id)
        payload = magazine.share_payload(item, channel, self.config)
        kind = "mail" if channel == "mail" else "share"
        self._emit(user_id, kind, content_id, request_id=request_id)
        return payload

    # ----------------------------------------------------------- recommender

    def rebuild_recommendations(self) -> RecommenderModel:
        """Exclusive rebuild: new version only becomes current once fully stored."""
        profiles = self.all_users()
        version = int(self.store.get("meta", "recommender_version", 0)) + 1
        model = recommender.build_model(profiles, version, self.config)
        blob = model.to_dict()
        blob["interest_epoch"] = self._interest_epoch()
        self.store.put_many(
            [
                ("decomposition_blobs", str(version), blob),
                ("meta", "recommender_version", version),
            ]
        )
        return model

    def current_model(self) -> tuple[RecommenderModel, bool]:
        """(model, fresh); fresh means no interest write happened since."""
        version = self.store.get("meta", "recommender_version")
        if version is None:
            raise StaleModelError("rebuild required: no decomposition yet")
        blob = self.store.get("decomposition_blobs", str(version))
        if blob is None:
            raise StaleModelError("rebuild required: blob missing")
        fresh = blob.get("interest_epoch") == self._interest_epoch()
        return RecommenderModel.from_dict(blob), fresh

    def recommendations(
        self,
        user_id: str,
        auto_rebuild: bool = True,
        sim_threshold: float | None = None,
        max_results: int | None = None,
    ) -> list[Recommendation]:
        profiles = self.all_users()
        if user_id not in {p.user_id for p in profiles}:
            raise NotFound(f"unknown user: {user_id}")
        try:
            model, fresh = self.current_model()
            if not fresh:
                raise StaleModelError("rebuild required: interests changed")
        except StaleModelError:
            if not auto_rebuild:
                raise
            try:
                model = self.rebuild_recommendations()
            except recommender.EmptyMatrixError:
                return []
        return recommender.recommend_keywords(
            user_id, profiles, model, self.config, sim_threshold, max_results
        )

    # ------------------------------------------------------------- dump/load

    def dump_to(self, path: str | Path) -> None:
        self.store.export_dump_file(path)

    def load_from(self, path: str | Path) -> None:
        self.store.import_dump_file(path)
