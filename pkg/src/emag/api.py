"""HTTP/JSON service over the engine.

Every route answers JSON and the error envelope is uniform:
{"error": {"code": <http status>, "message": ...}}. Statuses follow one
rule set: 400 malformed body/params, 401 bad or expired token, 404 unknown
entity, 409 conflicts (duplicate registration), 422 contract violations
(rating 0, weight 1.2, bad media kind).

Auth is a bearer token issued at registration. The token identifies the
acting user; user-scoped paths only answer for their own id.
"""

from __future__ import annotations

import os
import threading
from datetime import datetime

from fastapi import Depends, FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .engine import Engine, StaleModelError
from .errors import Conflict, ContractViolation, NotFound
from .interest import ALL_KEYWORDS, BehaviorEvent, ProfileDocument, UserProfile
from .magazine import SearchQuery


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def _error_response(status: int, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": {"code": status, "message": message}}
    )


def _require(body: dict, field: str, kind=None):
    if not isinstance(body, dict) or field not in body:
        raise ApiError(400, f"missing field: {field}")
    value = body[field]
    if kind is not None and not isinstance(value, kind):
        raise ApiError(400, f"field {field} has wrong type")
    return value


def _parse_when(value, default):
    if value is None:
        return default
    try:
        return datetime.fromisoformat(value)
    except (TypeError, ValueError):
        raise ContractViolation(f"not an ISO timestamp: {value!r}") from None


def _content_summary(item) -> dict:
    return {
        "id": item.id,
        "title": item.title,
        "canonical_link": item.canonical_link,
        "body_text": item.body_text,
        "links": item.links,
        "image_urls": item.image_urls,
        "video_urls": item.video_urls,
        "publish_date": item.publish_date.isoformat(),
        "category": item.category,
        "media_kind": item.media_kind,
        "source_id": item.source_id,
        "keywords": sorted(item.keywords),
    }


def _entry_payload(entry, config) -> dict:
    return {
        "keyword": entry.keyword,
        "weight": entry.weight,
        "tier": entry.tier(config),
        "origin": entry.origin,
        "visibility": entry.visibility,
        "last_touched": entry.last_touched.isoformat(),
    }


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="emag", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return _error_response(400, "malformed request")

    @app.exception_handler(ApiError)
    async def api_error(request: Request, exc: ApiError):
        return _error_response(exc.status, exc.message)

    @app.exception_handler(ContractViolation)
    async def contract(request: Request, exc: ContractViolation):
        return _error_response(422, str(exc))

    @app.exception_handler(NotFound)
    async def missing(request: Request, exc: NotFound):
        return _error_response(404, str(exc))

    @app.exception_handler(Conflict)
    async def conflict(request: Request, exc: Conflict):
        return _error_response(409, str(exc))

    def actor(request: Request) -> UserProfile:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise ApiError(401, "missing bearer token")
        try:
            return engine.authenticate(header.split(None, 1)[1])
        except NotFound as exc:
            raise ApiError(401, str(exc)) from exc

    def own(user_id: str, user: UserProfile) -> str:
        if user.user_id != user_id:
            raise ApiError(401, "token does not match user")
        return user_id

    async def json_body(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise ApiError(400, "request body is not valid JSON") from None
        if not isinstance(body, dict):
            raise ApiError(400, "request body must be a JSON object")
        return body

    # ----------------------------------------------------------- routes

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/users", status_code=201)
    async def register(request: Request):
        body = await json_body(request)
        email = _require(body, "email", str)
        profile, token = engine.register_user(email)
        return {
            "user_id": profile.user_id,
            "email": profile.email,
            "token": token,
            "created_at": profile.created_at.isoformat(),
        }

    @app.post("/users/{user_id}/profile-import")
    async def profile_import(user_id: str, request: Request, user: UserProfile = Depends(actor)):
        own(user_id, user)
        body = await json_body(request)
        doc = ProfileDocument(
            user_id=user_id,
            likes=_require(body, "likes", list) if "likes" in body else [],
            posts=body.get("posts", []),
            professional=body.get("professional", []),
            demographics=body.get("demographics", {}),
        )
        touched = engine.import_profile(doc)
        return {
            "user_id": user_id,
            "imported": [_entry_payload(touched[k], engine.config) for k in sorted(touched)],
        }

    @app.get("/users/{user_id}/magazine")
    def magazine(
        user_id: str,
        page: int = Query(default=1),
        page_size: int | None = Query(default=None),
        user: UserProfile = Depends(actor),
    ):
        own(user_id, user)
        if page < 1:
            raise ContractViolation(f"page must be >= 1, got {page}")
        result = engine.magazine(user_id, page_size=page_size)
        total_items = sum(len(p.slots) for p in result.pages)
        slots = []
        if 1 <= page <= len(result.pages):
            for slot in result.pages[page - 1].slots:
                slots.append(
                    {
                        "content": _content_summary(engine.get_content(slot.content_id)),
                        "matched_keywords": slot.matched_keywords,
                        "score": slot.score,
                    }
                )
        return {
            "user_id": user_id,
            "cold_start": result.cold_start,
            "page_number": page,
            "total_pages": len(result.pages),
            "total_items": total_items,
            "generated_at": engine.now().isoformat(),
            "slots": slots,
        }

    @app.get("/search")
    def search(
        keyword: str = Query(...),
        media: str | None = Query(default=None),
        date_from: str | None = Query(default=None, alias="from"),
        date_to: str | None = Query(default=None, alias="to"),
        source: str | None = Query(default=None),
        limit: int | None = Query(default=None),
        request_id: str | None = Query(default=None),
        user: UserProfile = Depends(actor),
    ):
        query = SearchQuery(
            keyword=keyword,
            media_kind=media,
            date_from=_parse_when(date_from, None),
            date_to=_parse_when(date_to, None),
            source_id=source,
            limit=limit,
        )
        results = engine.search(query, user_id=user.user_id, request_id=request_id)
        return {"keyword": keyword, "results": [_content_summary(i) for i in results]}

    @app.post("/events")
    async def post_event(request: Request, user: UserProfile = Depends(actor)):
        body = await json_body(request)
        if body.get("user_id", user.user_id) != user.user_id:
            raise ApiError(401, "event user_id does not match token")
        event = BehaviorEvent(
            user_id=user.user_id,
            kind=_require(body, "kind", str),
            target=_require(body, "target", str),
            at=_parse_when(body.get("at"), engine.now()),
            value=body.get("value"),
            event_id=body.get("event_id"),
        )
        changes = engine.record_event(event)
        return {
            "applied": bool(changes),
            "changes": [
                {"keyword": k, "old_weight": old, "new_weight": new} for k, old, new in changes
            ],
        }

    @app.get("/users/{user_id}/interests")
    def get_interests(user_id: str, user: UserProfile = Depends(actor)):
        own(user_id, user)
        profile = engine.load_user(user_id)
        entries = sorted(profile.interests.values(), key=lambda e: (-e.weight, e.keyword))
        return {
            "user_id": user_id,
            "list_visibility": profile.list_visibility,
            "interests": [_entry_payload(e, engine.config) for e in entries],
        }

    @app.put("/users/{user_id}/interests/{keyword}")
    async def put_interest(
        user_id: str, keyword: str, request: Request, user: UserProfile = Depends(actor)
    ):
        own(user_id, user)
        body = await json_body(request)
        weight = _require(body, "weight", (int, float))
        entry = engine.set_interest(
            user_id, keyword, float(weight), body.get("visibility", "public")
        )
        return _entry_payload(entry, engine.config)

    @app.delete("/users/{user_id}/interests/{keyword}")
    def delete_interest(user_id: str, keyword: str, user: UserProfile = Depends(actor)):
        own(user_id, user)
        return {"keyword": keyword.lower(), "deleted": engine.delete_interest(user_id, keyword)}

    @app.put("/users/{user_id}/visibility")
    async def put_visibility(user_id: str, request: Request, user: UserProfile = Depends(actor)):
        own(user_id, user)
        body = await json_body(request)
        profile = engine.set_visibility(user_id, _require(body, "list_visibility", str))
        return {"user_id": user_id, "list_visibility": profile.list_visibility}

    @app.get("/users/{owner_id}/interests/visible")
    def visible(owner_id: str, viewer: str = Query(...), user: UserProfile = Depends(actor)):
        if viewer != user.user_id:
            raise ApiError(401, "viewer must be the authenticated user")
        pairs = engine.visible_interests(owner_id, viewer)
        return {
            "owner": owner_id,
            "viewer": viewer,
            "interests": [{"keyword": k, "weight": w} for k, w in pairs],
        }

    @app.post("/users/{user_id}/follow")
    async def follow(user_id: str, request: Request, user: UserProfile = Depends(actor)):
        own(user_id, user)
        body = await json_body(request)
        owner = _require(body, "owner", str)
        keywords = _require(body, "keywords", (list, str))
        if isinstance(keywords, str) and keywords != ALL_KEYWORDS:
            raise ApiError(400, 'keywords must be a list or "ALL"')
        adopted = engine.follow(user_id, owner, keywords)
        return {
            "user_id": user_id,
            "owner": owner,
            "adopted": [_entry_payload(e, engine.config) for e in adopted],
        }

    @app.get("/users/{user_id}/recommendations")
    def recommendations(user_id: str, user: UserProfile = Depends(actor)):
        own(user_id, user)
        recs = engine.recommendations(user_id)
        return {"user_id": user_id, "recommendations": [r.to_dict() for r in recs]}

    @app.post("/users/{user_id}/saved", status_code=201)
    async def save(user_id: str, request: Request, user: UserProfile = Depends(actor)):
        own(user_id, user)
        body = await json_body(request)
        content_id = _require(body, "content_id", str)
        record, created = engine.save_item(user_id, content_id, request_id=body.get("request_id"))
        return {
            "content_id": content_id,
            "saved_at": record.saved_at.isoformat(),
            "created": created,
        }

    @app.get("/users/{user_id}/saved")
    def list_saved(
        user_id: str,
        sort: str = Query(default="saved_at"),
        keyword: str | None = Query(default=None),
        media: str | None = Query(default=None),
        date_from: str | None = Query(default=None, alias="from"),
        date_to: str | None = Query(default=None, alias="to"),
        source: str | None = Query(default=None),
        user: UserProfile = Depends(actor),
    ):
        own(user_id, user)
        query = None
        if any(v is not None for v in (keyword, media, date_from, date_to, source)):
            query = SearchQuery(
                keyword=keyword or "",
                media_kind=media,
                date_from=_parse_when(date_from, None),
                date_to=_parse_when(date_to, None),
                source_id=source,
            )
        rows = engine.list_saved(user_id, sort=sort, query=query)
        return {
            "user_id": user_id,
            "saved": [
                {
                    "content_id": saved.content_id,
                    "saved_at": saved.saved_at.isoformat(),
                    "rating": saved.rating,
                    "content": _content_summary(item),
                }
                for saved, item in rows
            ],
        }

    @app.delete("/users/{user_id}/saved/{content_id}")
    def unsave(user_id: str, content_id: str, user: UserProfile = Depends(actor)):
        own(user_id, user)
        return {"content_id": content_id, "removed": engine.unsave_item(user_id, content_id)}

    @app.post("/contents/{content_id}/rating")
    async def rate(content_id: str, request: Request, user: UserProfile = Depends(actor)):
        body = await json_body(request)
        value = _require(body, "value")
        if isinstance(value, bool) or not isinstance(value, int):
            raise ContractViolation(f"rating must be an integer 1..5, got {value!r}")
        record = engine.rate_item(
            user.user_id, content_id, value, request_id=body.get("request_id")
        )
        return {"content_id": content_id, "value": record["value"], "rated_at": record["rated_at"]}

    @app.post("/contents/{content_id}/share")
    async def share(content_id: str, request: Request, user: UserProfile = Depends(actor)):
        body = await json_body(request)
        channel = _require(body, "channel", str)
        payload = engine.share(user.user_id, content_id, channel, request_id=body.get("request_id"))
        return {"content_id": content_id, "channel": channel, "payload": payload}

    @app.get("/users/{user_id}/progress")
    def progress(user_id: str, user: UserProfile = Depends(actor)):
        own(user_id, user)
        return {"user_id": user_id, "percent": engine.progress(user_id)}

    return app


def _rebuild_loop(engine: Engine, interval: float, stop: threading.Event) -> None:
    while not stop.wait(interval):
        try:
            engine.rebuild_recommendations()
        except Exception:
            pass  # empty matrix or transient trouble; next tick retries


def serve() -> None:
    """Entry point honoring BIND_ADDR, DATA_DIR, CONFIG_PATH, TAXONOMY_PATH,
    REBUILD_INTERVAL_SECS environment variables."""
    import uvicorn

    bind = os.environ.get("BIND_ADDR", "127.0.0.1:8470")
    host, _, port = bind.rpartition(":")
    engine = Engine.open(
        os.environ.get("DATA_DIR", "./data"),
        config_path=os.environ.get("CONFIG_PATH"),
        taxonomy_path=os.environ.get("TAXONOMY_PATH"),
    )
    interval = float(os.environ.get("REBUILD_INTERVAL_SECS", "0"))
    stop = threading.Event()
    if interval > 0:
        threading.Thread(
            target=_rebuild_loop, args=(engine, interval, stop), daemon=True
        ).start()
    try:
        uvicorn.run(create_app(engine), host=host or "127.0.0.1", port=int(port))
    finally:
        stop.set()
        engine.store.close()
