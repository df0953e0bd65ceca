import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient
from jsonschema import Draft202012Validator

from emag.api import create_app
from emag.config import EngineConfig
from emag.engine import Engine
from emag.store import Store
from emag.taxonomy import Taxonomy

from conftest import FIXTURES, NOW, fixture_sources

SCHEMA_BUNDLE = json.loads((Path(__file__).parent.parent / "schemas/responses.json").read_text())


def validate_route(method: str, template: str, response, expected_status: int | None = None):
    """Assert the response matches the published schema for its route."""
    route = SCHEMA_BUNDLE["routes"][f"{method} {template}"]
    status = expected_status if expected_status is not None else route["status"]
    assert response.status_code == status, response.text
    schema = {"$defs": SCHEMA_BUNDLE["$defs"], **route["schema"]}
    Draft202012Validator(schema).validate(response.json())
    return response.json()


def validate_error(response, status: int):
    assert response.status_code == status, response.text
    schema = {"$defs": SCHEMA_BUNDLE["$defs"], "$ref": "#/$defs/error"}
    Draft202012Validator(schema).validate(response.json())
    assert response.json()["error"]["code"] == status


def build_engine(feed_server=None, ingest=True, fixed_now=NOW.isoformat()):
    engine = Engine(
        Store(None),
        taxonomy=Taxonomy.from_file(FIXTURES / "taxonomy.json"),
        config=EngineConfig(fixed_now=fixed_now, on_demand_fetch=False),
    )
    if feed_server is not None:
        for source in fixture_sources(feed_server):
            engine.add_source(source)
        if ingest:
            engine.ingest()
    return engine


@pytest.fixture
def seeded_client(feed_server):
    engine = build_engine(feed_server)
    client = TestClient(create_app(engine))
    return client, engine


def register(client, email="alice@example.net"):
    response = client.post("/users", json={"email": email})
    body = validate_route("POST", "/users", response)
    return body["user_id"], {"Authorization": f"Bearer {body['token']}"}


# ------------------------------------------------------------------ basics

def test_healthz(seeded_client):
    client, _ = seeded_client
    body = validate_route("GET", "/healthz", client.get("/healthz"))
    assert body == {"status": "ok"}


def test_register_then_duplicate_conflicts(seeded_client):
    client, _ = seeded_client
    register(client)
    validate_error(client.post("/users", json={"email": "alice@example.net"}), 409)


def test_register_malformed_bodies(seeded_client):
    client, _ = seeded_client
    validate_error(client.post("/users", json={"wrong": 1}), 400)
    validate_error(client.post("/users", json={"email": 7}), 400)
    validate_error(
        client.post("/users", content=b"not json", headers={"content-type": "application/json"}),
        400,
    )
    validate_error(client.post("/users", json={"email": "not-an-email"}), 422)


def test_missing_or_bad_token_is_401(seeded_client):
    client, _ = seeded_client
    user_id, _ = register(client)
    validate_error(client.get(f"/users/{user_id}/magazine"), 401)
    validate_error(
        client.get(f"/users/{user_id}/magazine", headers={"Authorization": "Bearer junk"}), 401
    )


def test_token_scoped_to_its_user(seeded_client):
    client, _ = seeded_client
    alice, alice_auth = register(client, "alice@example.net")
    bob, _bob_auth = register(client, "bob@example.net")
    validate_error(client.get(f"/users/{bob}/magazine", headers=alice_auth), 401)


# ---------------------------------------------------------------- magazine

def test_fresh_user_gets_cold_start_magazine(seeded_client):
    client, _ = seeded_client
    user_id, auth = register(client)
    body = validate_route(
        "GET", "/users/{id}/magazine", client.get(f"/users/{user_id}/magazine", headers=auth)
    )
    assert body["cold_start"] is True and body["slots"] == []


def test_magazine_pages_after_interests(seeded_client):
    client, _ = seeded_client
    user_id, auth = register(client)
    client.put(
        f"/users/{user_id}/interests/android", json={"weight": 0.9}, headers=auth
    )
    body = validate_route(
        "GET",
        "/users/{id}/magazine",
        client.get(f"/users/{user_id}/magazine?page=1&page_size=2", headers=auth),
    )
    assert body["cold_start"] is False
    assert body["total_items"] == 1
    assert body["slots"][0]["matched_keywords"] == ["android"]
    validate_error(client.get(f"/users/{user_id}/magazine?page=0", headers=auth), 422)


# ------------------------------------------------------------------ search

def test_search_with_filters_and_schema(seeded_client):
    client, _ = seeded_client
    user_id, auth = register(client)
    body = validate_route("GET", "/search", client.get("/search?keyword=golf", headers=auth))
    assert [r["title"] for r in body["results"]] == ["Golf tour heads north"]
    filtered = validate_route(
        "GET", "/search", client.get("/search?keyword=golf&media=video", headers=auth)
    )
    assert filtered["results"] == []
    validate_error(client.get("/search?keyword=golf&media=podcast", headers=auth), 422)
    validate_error(client.get("/search", headers=auth), 400)  # keyword required


def test_search_records_interest_signal(seeded_client):
    client, engine = seeded_client
    user_id, auth = register(client)
    client.get("/search?keyword=golf", headers=auth)
    assert engine.load_user(user_id).interests["golf"].weight == pytest.approx(0.10)


# ------------------------------------------------------------------ events

def test_event_endpoint_applies_changes(seeded_client):
    client, engine = seeded_client
    user_id, auth = register(client)
    content_id = engine.content_items()[0].id
    body = validate_route(
        "POST",
        "/events",
        client.post("/events", json={"kind": "save", "target": content_id}, headers=auth),
    )
    assert body["applied"] is True and body["changes"]


def test_event_validation_statuses(seeded_client):
    client, engine = seeded_client
    user_id, auth = register(client)
    content_id = engine.content_items()[0].id
    validate_error(
        client.post("/events", json={"kind": "rate", "target": content_id, "value": 0}, headers=auth),
        422,
    )
    validate_error(client.post("/events", json={"kind": "save"}, headers=auth), 400)
    validate_error(
        client.post("/events", json={"kind": "save", "target": "ghost"}, headers=auth), 404
    )
    validate_error(
        client.post(
            "/events",
            json={"kind": "save", "target": content_id, "user_id": "someone-else"},
            headers=auth,
        ),
        401,
    )


def test_duplicate_event_id_not_applied_twice(seeded_client):
    client, engine = seeded_client
    user_id, auth = register(client)
    content_id = engine.content_items()[0].id
    event = {"kind": "save", "target": content_id, "event_id": "evt-1"}
    first = client.post("/events", json=event, headers=auth).json()
    second = client.post("/events", json=event, headers=auth).json()
    assert first["applied"] is True and second["applied"] is False
    assert engine.load_user(user_id).event_count == 1


# --------------------------------------------------------------- interests

def test_interest_crud_roundtrip(seeded_client):
    client, _ = seeded_client
    user_id, auth = register(client)
    put = client.put(
        f"/users/{user_id}/interests/Cricket",
        json={"weight": 0.7, "visibility": "public"},
        headers=auth,
    )
    entry = validate_route("PUT", "/users/{id}/interests/{keyword}", put)
    assert entry["keyword"] == "cricket" and entry["tier"] == "High"

    listing = validate_route(
        "GET", "/users/{id}/interests", client.get(f"/users/{user_id}/interests", headers=auth)
    )
    assert [e["keyword"] for e in listing["interests"]] == ["cricket"]

    deleted = validate_route(
        "DELETE",
        "/users/{id}/interests/{keyword}",
        client.delete(f"/users/{user_id}/interests/cricket", headers=auth),
    )
    assert deleted["deleted"] is True
    again = validate_route(
        "DELETE",
        "/users/{id}/interests/{keyword}",
        client.delete(f"/users/{user_id}/interests/cricket", headers=auth),
    )
    assert again["deleted"] is False


def test_put_interest_validation(seeded_client):
    client, _ = seeded_client
    user_id, auth = register(client)
    validate_error(
        client.put(f"/users/{user_id}/interests/x", json={"weight": 1.4}, headers=auth), 422
    )
    validate_error(client.put(f"/users/{user_id}/interests/x", json={}, headers=auth), 400)


def test_profile_import_endpoint(seeded_client):
    client, _ = seeded_client
    user_id, auth = register(client)
    doc = json.loads((FIXTURES / "profile_alice.json").read_text())
    doc["user_id"] = user_id
    body = validate_route(
        "POST",
        "/users/{id}/profile-import",
        client.post(f"/users/{user_id}/profile-import", json=doc, headers=auth),
    )
    imported = {e["keyword"]: e["weight"] for e in body["imported"]}
    assert imported["cricket"] == pytest.approx(0.4)
    assert imported["golf"] == pytest.approx(0.3)
    assert imported["software"] == pytest.approx(0.3)


# ------------------------------------------------- visibility + following

def test_visibility_follow_flow(seeded_client):
    client, _ = seeded_client
    alice, alice_auth = register(client, "alice@example.net")
    bob, bob_auth = register(client, "bob@example.net")
    for kw, w in (("cricket", 0.9), ("golf", 0.8)):
        client.put(f"/users/{alice}/interests/{kw}", json={"weight": w}, headers=alice_auth)

    visible = validate_route(
        "GET",
        "/users/{id}/interests/visible",
        client.get(f"/users/{alice}/interests/visible?viewer={bob}", headers=bob_auth),
    )
    assert len(visible["interests"]) == 2

    follow = validate_route(
        "POST",
        "/users/{id}/follow",
        client.post(
            f"/users/{bob}/follow", json={"owner": alice, "keywords": ["cricket"]}, headers=bob_auth
        ),
    )
    assert follow["adopted"][0]["keyword"] == "cricket"
    assert follow["adopted"][0]["weight"] == pytest.approx(0.3)

    updated = validate_route(
        "PUT",
        "/users/{id}/visibility",
        client.put(f"/users/{alice}/visibility", json={"list_visibility": "private"}, headers=alice_auth),
    )
    assert updated["list_visibility"] == "private"
    hidden = validate_route(
        "GET",
        "/users/{id}/interests/visible",
        client.get(f"/users/{alice}/interests/visible?viewer={bob}", headers=bob_auth),
    )
    assert hidden["interests"] == []
    validate_error(
        client.post(
            f"/users/{bob}/follow", json={"owner": alice, "keywords": ["golf"]}, headers=bob_auth
        ),
        422,
    )
    validate_error(
        client.get(f"/users/{alice}/interests/visible?viewer={alice}", headers=bob_auth), 401
    )


# ----------------------------------------------------- saved/rating/share

def test_saved_roundtrip_with_schema(seeded_client):
    client, engine = seeded_client
    user_id, auth = register(client)
    content_id = engine.content_items()[0].id

    created = validate_route(
        "POST",
        "/users/{id}/saved",
        client.post(f"/users/{user_id}/saved", json={"content_id": content_id}, headers=auth),
    )
    assert created["created"] is True
    again = validate_route(
        "POST",
        "/users/{id}/saved",
        client.post(f"/users/{user_id}/saved", json={"content_id": content_id}, headers=auth),
    )
    assert again["created"] is False

    listing = validate_route(
        "GET", "/users/{id}/saved", client.get(f"/users/{user_id}/saved", headers=auth)
    )
    assert [s["content_id"] for s in listing["saved"]] == [content_id]

    removed = validate_route(
        "DELETE",
        "/users/{id}/saved/{content_id}",
        client.delete(f"/users/{user_id}/saved/{content_id}", headers=auth),
    )
    assert removed["removed"] is True
    validate_error(
        client.post(f"/users/{user_id}/saved", json={"content_id": "ghost"}, headers=auth), 404
    )


def test_rating_endpoint_statuses(seeded_client):
    client, engine = seeded_client
    user_id, auth = register(client)
    content_id = engine.content_items()[0].id
    body = validate_route(
        "POST",
        "/contents/{id}/rating",
        client.post(f"/contents/{content_id}/rating", json={"value": 5}, headers=auth),
    )
    assert body["value"] == 5
    validate_error(client.post(f"/contents/{content_id}/rating", json={"value": 0}, headers=auth), 422)
    validate_error(
        client.post(f"/contents/{content_id}/rating", json={"value": "five"}, headers=auth), 422
    )
    validate_error(client.post("/contents/ghost/rating", json={"value": 3}, headers=auth), 404)


def test_share_endpoint(seeded_client):
    client, engine = seeded_client
    user_id, auth = register(client)
    content_id = engine.content_items()[0].id
    body = validate_route(
        "POST",
        "/contents/{id}/share",
        client.post(f"/contents/{content_id}/share", json={"channel": "twitter"}, headers=auth),
    )
    assert body["payload"]["link"]
    client.post(f"/contents/{content_id}/share", json={"channel": "mail"}, headers=auth)
    kinds = [e["kind"] for e in engine.store.events(user_id)]
    assert kinds == ["share", "mail"]
    validate_error(
        client.post(f"/contents/{content_id}/share", json={"channel": "fax"}, headers=auth), 422
    )


# ----------------------------------------------- recommendations/progress

def test_recommendations_endpoint(seeded_client):
    client, _ = seeded_client
    alice, alice_auth = register(client, "alice@example.net")
    bob, bob_auth = register(client, "bob@example.net")
    for kw, w in (("cricket", 0.9), ("tech", 0.8)):
        client.put(f"/users/{alice}/interests/{kw}", json={"weight": w}, headers=alice_auth)
    for kw, w in (("cricket", 0.9), ("tech", 0.8), ("sachin tendulkar", 0.7)):
        client.put(f"/users/{bob}/interests/{kw}", json={"weight": w}, headers=bob_auth)
    body = validate_route(
        "GET",
        "/users/{id}/recommendations",
        client.get(f"/users/{alice}/recommendations", headers=alice_auth),
    )
    keywords = {r["keyword"]: r for r in body["recommendations"]}
    assert keywords["sachin tendulkar"]["reason"] == "similar_user"


def test_progress_endpoint(seeded_client):
    client, engine = seeded_client
    user_id, auth = register(client)
    content_id = engine.content_items()[0].id
    for i in range(25):
        client.post(
            "/events",
            json={"kind": "click", "target": content_id, "event_id": f"e{i}"},
            headers=auth,
        )
    body = validate_route(
        "GET", "/users/{id}/progress", client.get(f"/users/{user_id}/progress", headers=auth)
    )
    assert body["percent"] == 63


def test_unknown_owner_404(seeded_client):
    client, _ = seeded_client
    user_id, auth = register(client)
    # an authenticated viewer probing an owner that does not exist
    validate_error(
        client.get(f"/users/ghost/interests/visible?viewer={user_id}", headers=auth), 404
    )
    # viewer mismatch is an auth failure, checked before the lookup
    validate_error(client.get("/users/ghost/interests/visible?viewer=ghost", headers=auth), 401)


# ---------------------------------------------------------- trace replay

TRACE_EMAILS = ("alice@example.net", "bob@example.net")


def run_trace(feed_server) -> dict:
    """Seed, replay a fixed request trace, return the final store dump."""
    engine = build_engine(feed_server)
    client = TestClient(create_app(engine))
    tokens = {}
    ids = {}
    for email in TRACE_EMAILS:
        response = client.post("/users", json={"email": email}).json()
        ids[email] = response["user_id"]
        tokens[email] = {"Authorization": f"Bearer {response['token']}"}
    alice, bob = ids[TRACE_EMAILS[0]], ids[TRACE_EMAILS[1]]
    alice_auth, bob_auth = tokens[TRACE_EMAILS[0]], tokens[TRACE_EMAILS[1]]
    content_id = engine.content_items()[0].id

    trace = [
        ("PUT", f"/users/{alice}/interests/android", {"weight": 0.9}, alice_auth),
        ("PUT", f"/users/{bob}/interests/android", {"weight": 0.8}, bob_auth),
        ("POST", "/events", {"kind": "save", "target": content_id, "event_id": "t1"}, alice_auth),
        ("POST", f"/users/{alice}/saved", {"content_id": content_id, "request_id": "r1"}, alice_auth),
        ("POST", f"/contents/{content_id}/rating", {"value": 4, "request_id": "r2"}, alice_auth),
        ("POST", f"/contents/{content_id}/share", {"channel": "mail", "request_id": "r3"}, alice_auth),
        ("GET", f"/users/{alice}/magazine", None, alice_auth),
        ("GET", "/search?keyword=golf&request_id=r4", None, bob_auth),
        ("POST", f"/users/{bob}/follow", {"owner": alice, "keywords": "ALL"}, bob_auth),
        ("GET", f"/users/{alice}/recommendations", None, alice_auth),
        ("GET", f"/users/{alice}/progress", None, alice_auth),
    ]
    responses = []
    for method, path, body, headers in trace:
        if method == "GET":
            response = client.get(path, headers=headers)
        elif method == "PUT":
            response = client.put(path, json=body, headers=headers)
        else:
            response = client.post(path, json=body, headers=headers)
        assert response.status_code < 500, response.text
        responses.append((response.status_code, response.json()))
    return {"dump": engine.store.export_dump(), "responses": responses}


def test_request_trace_replay_is_deterministic(feed_server):
    first = run_trace(feed_server)
    second = run_trace(feed_server)
    assert first["responses"] == second["responses"]
    assert first["dump"] == second["dump"]
