"""Category taxonomy.

A tree of named category nodes, each carrying a set of trigger keywords.
Feed sources point at a category path ("technology/mobile"); ingest refines
an item's category into a child node when one of the child's triggers
appears in the item text, and profile import matches liked strings against
trigger keywords and node names.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class CategoryNode:
    name: str
    triggers: set[str] = field(default_factory=set)
    children: list["CategoryNode"] = field(default_factory=list)


class Taxonomy:
    def __init__(self, roots: list[CategoryNode]):
        self.roots = roots
        self._by_path: dict[str, CategoryNode] = {}
        self._index(roots, prefix="")
        if not self._by_path:
            raise ValueError("taxonomy is empty")

    def _index(self, nodes: list[CategoryNode], prefix: str) -> None:
        for node in nodes:
            path = f"{prefix}/{node.name}" if prefix else node.name
            if path in self._by_path:
                raise ValueError(f"duplicate category path: {path}")
            self._by_path[path] = node
            self._index(node.children, path)

    @classmethod
    def from_dict(cls, data: dict) -> "Taxonomy":
        def build(d: dict) -> CategoryNode:
            return CategoryNode(
                name=d["name"],
                triggers={t.lower() for t in d.get("triggers", [])},
                children=[build(c) for c in d.get("children", [])],
            )

        return cls([build(d) for d in data["categories"]])

    @classmethod
    def from_file(cls, path: str | Path) -> "Taxonomy":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        def dump(node: CategoryNode) -> dict:
            return {
                "name": node.name,
                "triggers": sorted(node.triggers),
                "children": [dump(c) for c in node.children],
            }

        return {"categories": [dump(r) for r in self.roots]}

    def paths(self) -> list[str]:
        return sorted(self._by_path)

    def resolve(self, path: str) -> CategoryNode:
        try:
            return self._by_path[path]
        except KeyError:
            raise KeyError(f"unknown category path: {path}") from None

    def contains(self, path: str) -> bool:
        return path in self._by_path

    def children_of(self, path: str) -> list[tuple[str, CategoryNode]]:
        node = self.resolve(path)
        return [(f"{path}/{c.name}", c) for c in node.children]

    def match_terms(self, text: str) -> set[str]:
        """Trigger keywords and node names found in `text` (word-boundary,
        case-insensitive). Returns the matched terms lowercased."""
        lowered = text.lower()
        found: set[str] = set()
        for term in self._all_terms():
            if re.search(rf"\b{re.escape(term)}\b", lowered):
                found.add(term)
        return found

    def _all_terms(self) -> set[str]:
        terms: set[str] = set()
        for path, node in self._by_path.items():
            terms.add(node.name.lower())
            terms.update(node.triggers)
        return terms


def default_taxonomy() -> Taxonomy:
    """Small built-in taxonomy used when the operator supplies none."""
    return Taxonomy.from_dict(
        {
            "categories": [
                {
                    "name": "technology",
                    "triggers": ["software", "gadget", "startup"],
                    "children": [
                        {"name": "mobile", "triggers": ["android", "iphone", "smartphone", "app"]},
                        {"name": "ai", "triggers": ["ai", "machine learning", "neural"]},
                    ],
                },
                {
                    "name": "sports",
                    "triggers": ["tournament", "championship"],
                    "children": [
                        {
                            "name": "cricket",
                            "triggers": ["cricket", "wicket", "batsman", "ipl", "sachin tendulkar"],
                        },
                        {"name": "golf", "triggers": ["golf", "pga"]},
                    ],
                },
                {
                    "name": "entertainment",
                    "triggers": [],
                    "children": [
                        {"name": "movies", "triggers": ["movie", "film", "bollywood", "hollywood"]},
                        {"name": "music", "triggers": ["music", "album", "concert"]},
                    ],
                },
                {
                    "name": "lifestyle",
                    "triggers": ["wellness"],
                    "children": [
                        {"name": "travel", "triggers": ["travel", "tourism", "flight"]},
                    ],
                },
            ]
        }
    )
