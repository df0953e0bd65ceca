"""Operator command line.

Embedded mode (default) opens the store in DATA_DIR directly; --server
switches to remote mode and talks to a running API instead, for the
commands that have an endpoint. Exit codes: 0 success, 1 operational
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .engine import Engine, StaleModelError
from .errors import EmagError
from .feeds import FeedSource
from .interest import ProfileDocument


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emag", description="personal e-magazine engine")
    parser.add_argument("--data-dir", default=os.environ.get("DATA_DIR", "./data"))
    parser.add_argument("--config", default=os.environ.get("CONFIG_PATH"))
    parser.add_argument("--taxonomy", default=os.environ.get("TAXONOMY_PATH"))
    parser.add_argument("--server", default=None, help="API base URL (remote mode)")
    parser.add_argument("--token", default=None, help="bearer token for remote mode")
    parser.add_argument("--json", action="store_true", dest="as_json")
    sub = parser.add_subparsers(dest="command", required=True)

    source = sub.add_parser("source", help="manage feed sources")
    source_sub = source.add_subparsers(dest="action", required=True)
    add = source_sub.add_parser("add")
    add.add_argument("id")
    add.add_argument("url")
    add.add_argument("category")
    source_sub.add_parser("list")
    disable = source_sub.add_parser("disable")
    disable.add_argument("id")

    ingest = sub.add_parser("ingest", help="fetch and store feed items")
    group = ingest.add_mutually_exclusive_group()
    group.add_argument("--source", dest="source_id")
    group.add_argument("--all", action="store_true")

    maintain = sub.add_parser("maintain", help="scheduled maintenance")
    maintain_sub = maintain.add_subparsers(dest="action", required=True)
    maintain_sub.add_parser("decay-flush")

    recommend = sub.add_parser("recommend", help="recommender model")
    recommend_sub = recommend.add_subparsers(dest="action", required=True)
    recommend_sub.add_parser("rebuild")
    show = recommend_sub.add_parser("show")
    show.add_argument("user")

    profile = sub.add_parser("profile", help="profile documents")
    profile_sub = profile.add_subparsers(dest="action", required=True)
    pimport = profile_sub.add_parser("import")
    pimport.add_argument("file")

    user = sub.add_parser("user", help="user accounts")
    user_sub = user.add_subparsers(dest="action", required=True)
    uadd = user_sub.add_parser("add")
    uadd.add_argument("email")
    ushow = user_sub.add_parser("show")
    ushow.add_argument("user")

    dump = sub.add_parser("dump", help="export the store to a JSON file")
    dump.add_argument("file")
    load = sub.add_parser("load", help="import a JSON dump into the store")
    load.add_argument("file")

    sub.add_parser("serve", help="run the HTTP API (BIND_ADDR et al.)")
    return parser


def _emit(args, payload: dict, human: list[str]) -> None:
    if args.as_json:
        print(json.dumps(payload, indent=1, sort_keys=True, default=str))
    else:
        for line in human:
            print(line)


def _open_engine(args) -> Engine:
    return Engine.open(args.data_dir, config_path=args.config, taxonomy_path=args.taxonomy)


# ---------------------------------------------------------------- embedded

def _cmd_source(args, engine: Engine) -> int:
    if args.action == "add":
        engine.add_source(FeedSource(id=args.id, url=args.url, category=args.category))
        _emit(args, {"added": args.id}, [f"added source {args.id}"])
    elif args.action == "list":
        sources = [s.to_dict() for s in engine.list_sources()]
        _emit(
            args,
            {"sources": sources},
            [
                f"{s['id']:<12} {'on ' if s['enabled'] else 'off'} {s['category']:<22} {s['url']}"
                for s in sources
            ]
            or ["no sources"],
        )
    elif args.action == "disable":
        engine.set_source_enabled(args.id, False)
        _emit(args, {"disabled": args.id}, [f"disabled source {args.id}"])
    return 0


def _cmd_ingest(args, engine: Engine) -> int:
    reports = engine.ingest(None if (args.all or not args.source_id) else args.source_id)
    payload = {"reports": [r.to_dict() for r in reports]}
    lines = [
        f"{r.source_id}: fetched={r.fetched} new={r.new} duplicates={r.duplicates} "
        f"skipped={r.skipped} errors={len(r.errors)}"
        for r in reports
    ] or ["no enabled sources"]
    _emit(args, payload, lines)
    return 1 if any(r.errors for r in reports) else 0


def _cmd_maintain(args, engine: Engine) -> int:
    reports = engine.decay_flush_all()
    payload = {
        "users": {
            uid: {"decayed": r.decayed, "flushed": r.flushed} for uid, r in reports.items()
        }
    }
    lines = [
        f"{uid}: decayed={r.decayed} flushed={r.flushed}" for uid, r in sorted(reports.items())
    ] or ["no users"]
    _emit(args, payload, lines)
    return 0


def _cmd_recommend(args, engine: Engine) -> int:
    if args.action == "rebuild":
        model = engine.rebuild_recommendations()
        _emit(
            args,
            {"version": model.version, "users": len(model.users), "keywords": len(model.keywords)},
            [f"rebuilt model version {model.version} "
             f"({len(model.users)} users x {len(model.keywords)} keywords)"],
        )
        return 0
    try:
        recs = engine.recommendations(args.user, auto_rebuild=False)
    except StaleModelError:
        print("rebuild required: run `emag recommend rebuild` first", file=sys.stderr)
        return 1
    payload = {"user": args.user, "recommendations": [r.to_dict() for r in recs]}
    lines = [
        f"{r.keyword:<24} {r.score:6.3f} {r.reason}"
        + (f" (from {r.contributing_user})" if r.contributing_user else "")
        for r in recs
    ] or ["no recommendations"]
    _emit(args, payload, lines)
    return 0


def _cmd_profile_import(args, engine: Engine) -> int:
    doc = ProfileDocument.from_dict(json.loads(open(args.file).read()))
    touched = engine.import_profile(doc)
    payload = {
        "user": doc.user_id,
        "imported": {k: e.weight for k, e in touched.items()},
    }
    _emit(
        args,
        payload,
        [f"{k}: {e.weight:.2f} ({e.tier(engine.config)})" for k, e in sorted(touched.items())]
        or ["nothing matched"],
    )
    return 0


def _cmd_user(args, engine: Engine) -> int:
    if args.action == "add":
        profile, token = engine.register_user(args.email)
        _emit(
            args,
            {"user_id": profile.user_id, "email": profile.email, "token": token},
            [f"user {profile.user_id} ({profile.email})", f"token {token}"],
        )
        return 0
    profile = engine.load_user(args.user)
    entries = sorted(profile.interests.values(), key=lambda e: (-e.weight, e.keyword))
    payload = {
        "user_id": profile.user_id,
        "email": profile.email,
        "list_visibility": profile.list_visibility,
        "event_count": profile.event_count,
        "progress": engine.progress(profile.user_id),
        "token": engine.token_for(profile),
        "interests": [
            {"keyword": e.keyword, "weight": e.weight, "tier": e.tier(engine.config)}
            for e in entries
        ],
    }
    lines = [
        f"user {profile.user_id} ({profile.email}) "
        f"visibility={profile.list_visibility} events={profile.event_count} "
        f"progress={payload['progress']}%",
    ] + [f"  {e.keyword:<24} {e.weight:5.2f} {e.tier(engine.config)}" for e in entries]
    _emit(args, payload, lines)
    return 0


def _cmd_dump(args, engine: Engine) -> int:
    engine.dump_to(args.file)
    _emit(args, {"dumped": args.file}, [f"dumped store to {args.file}"])
    return 0


def _cmd_load(args, engine: Engine) -> int:
    engine.load_from(args.file)
    _emit(args, {"loaded": args.file}, [f"loaded store from {args.file}"])
    return 0


# ------------------------------------------------------------------ remote

def _remote(args) -> int:
    import httpx

    base = args.server.rstrip("/")
    headers = {"Authorization": f"Bearer {args.token}"} if args.token else {}

    def fail(response) -> int:
        print(f"server error {response.status_code}: {response.text}", file=sys.stderr)
        return 1

    if args.command == "profile" and args.action == "import":
        doc = json.loads(open(args.file).read())
        response = httpx.post(
            f"{base}/users/{doc['user_id']}/profile-import", json=doc, headers=headers
        )
        if response.status_code != 200:
            return fail(response)
        _emit(args, response.json(), [json.dumps(response.json(), indent=1)])
        return 0
    if args.command == "user" and args.action == "show":
        response = httpx.get(f"{base}/users/{args.user}/interests", headers=headers)
        if response.status_code != 200:
            return fail(response)
        progress = httpx.get(f"{base}/users/{args.user}/progress", headers=headers)
        payload = {**response.json(), "progress": progress.json().get("percent")}
        _emit(args, payload, [json.dumps(payload, indent=1)])
        return 0
    if args.command == "recommend" and args.action == "show":
        response = httpx.get(f"{base}/users/{args.user}/recommendations", headers=headers)
        if response.status_code != 200:
            return fail(response)
        _emit(args, response.json(), [json.dumps(response.json(), indent=1)])
        return 0
    print(f"command not available in remote mode: {args.command}", file=sys.stderr)
    return 2


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    if args.command == "serve":
        from .api import serve

        os.environ.setdefault("DATA_DIR", args.data_dir)
        if args.config:
            os.environ.setdefault("CONFIG_PATH", args.config)
        if args.taxonomy:
            os.environ.setdefault("TAXONOMY_PATH", args.taxonomy)
        serve()
        return 0

    if args.server:
        return _remote(args)

    try:
        engine = _open_engine(args)
    except (OSError, ValueError) as exc:
        print(f"cannot open engine: {exc}", file=sys.stderr)
        return 1

    handlers = {
        "source": _cmd_source,
        "ingest": _cmd_ingest,
        "maintain": _cmd_maintain,
        "recommend": _cmd_recommend,
        "user": _cmd_user,
        "dump": _cmd_dump,
        "load": _cmd_load,
    }
    try:
        if args.command == "profile":
            return _cmd_profile_import(args, engine)
        return handlers[args.command](args, engine)
    except EmagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        engine.store.close()


if __name__ == "__main__":
    sys.exit(main())
