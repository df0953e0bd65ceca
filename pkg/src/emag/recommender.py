"""Keyword recommendations from user-user similarity in latent space.

The user x keyword weight matrix is factorized (truncated SVD) and each
user gets an index vector: their row of U scaled by the singular values.
Cosine between index vectors measures how alike two users' interests are.
Recommendations combine the user's own Mid-tier keywords (worth surfacing,
not yet published) with Mid/High keywords of sufficiently similar users
that the target user does not hold at all.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import EngineConfig
from .errors import ContractViolation, NotFound
from .interest import TIER_LOW, UserProfile, tier_of
from .svd import Decomposition, svd_truncate

REASON_OWN_MID = "own_mid_tier"
REASON_SIMILAR_USER = "similar_user"


class EmptyMatrixError(ContractViolation):
    pass


@dataclass
class InterestMatrix:
    users: list[str]       # row order, sorted by id
    keywords: list[str]    # column order, lexicographic
    values: np.ndarray     # m x n weights, 0 where absent

    def row_of(self, user_id: str) -> int:
        try:
            return self.users.index(user_id)
        except ValueError:
            raise NotFound(f"user not in matrix: {user_id}") from None


@dataclass
class LatentIndex:
    user_id: str
    vector: np.ndarray
    decomposition_version: int

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "vector": self.vector.tolist(),
            "decomposition_version": self.decomposition_version,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LatentIndex":
        return cls(
            user_id=d["user_id"],
            vector=np.array(d["vector"], dtype=float),
            decomposition_version=int(d["decomposition_version"]),
        )


@dataclass
class Recommendation:
    keyword: str
    score: float
    reason: str
    contributing_user: str | None = None

    def to_dict(self) -> dict:
        return {
            "keyword": self.keyword,
            "score": self.score,
            "reason": self.reason,
            "contributing_user": self.contributing_user,
        }


@dataclass
class RecommenderModel:
    """One immutable published rebuild: matrix ordering, factors, indexes."""

    version: int
    users: list[str]
    keywords: list[str]
    decomposition: Decomposition
    indexes: dict[str, LatentIndex] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "users": list(self.users),
            "keywords": list(self.keywords),
            "decomposition": self.decomposition.to_dict(),
            "indexes": {uid: ix.to_dict() for uid, ix in self.indexes.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RecommenderModel":
        return cls(
            version=int(d["version"]),
            users=list(d["users"]),
            keywords=list(d["keywords"]),
            decomposition=Decomposition.from_dict(d["decomposition"]),
            indexes={uid: LatentIndex.from_dict(ix) for uid, ix in d["indexes"].items()},
        )


def build_matrix(profiles: list[UserProfile]) -> InterestMatrix:
    """Weights as a dense matrix: users sorted by id, keywords lexicographic."""
    users = sorted(p.user_id for p in profiles)
    by_id = {p.user_id: p for p in profiles}
    keywords = sorted({kw for p in profiles for kw in p.interests})
    if not users or not keywords:
        raise EmptyMatrixError("no interests to build a matrix from")
    values = np.zeros((len(users), len(keywords)))
    kw_col = {kw: j for j, kw in enumerate(keywords)}
    for i, uid in enumerate(users):
        for kw, entry in by_id[uid].interests.items():
            values[i, kw_col[kw]] = entry.weight
    return InterestMatrix(users=users, keywords=keywords, values=values)


def user_index(
    matrix: InterestMatrix, decomposition: Decomposition, user_id: str, version: int
) -> LatentIndex:
    row = matrix.row_of(user_id)
    vector = decomposition.u[row] * decomposition.s
    return LatentIndex(user_id=user_id, vector=vector, decomposition_version=version)


def similarity(a: LatentIndex, b: LatentIndex) -> float:
    """Cosine of two index vectors from the same rebuild."""
    if a.decomposition_version != b.decomposition_version:
        raise ContractViolation(
            f"index versions differ: {a.decomposition_version} != {b.decomposition_version}"
        )
    norm_a = float(np.linalg.norm(a.vector))
    norm_b = float(np.linalg.norm(b.vector))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ContractViolation("similarity undefined for zero index vectors")
    cos = float(a.vector @ b.vector) / (norm_a * norm_b)
    return max(-1.0, min(1.0, cos))


def build_model(
    profiles: list[UserProfile],
    version: int,
    config: EngineConfig | None = None,
    k: int | None = None,
) -> RecommenderModel:
    """Matrix -> truncated SVD -> index per user, all in one shot."""
    config = config or EngineConfig()
    matrix = build_matrix(profiles)
    if config.matrix_binary:
        matrix.values = (matrix.values > 0).astype(float)
    m, n = matrix.values.shape
    rank = k if k is not None else min(m, n, config.svd_rank)
    decomposition = svd_truncate(matrix.values, rank)
    model = RecommenderModel(
        version=version,
        users=matrix.users,
        keywords=matrix.keywords,
        decomposition=decomposition,
    )
    for uid in matrix.users:
        model.indexes[uid] = user_index(matrix, decomposition, uid, version)
    return model


def recommend_keywords(
    user_id: str,
    profiles: list[UserProfile],
    model: RecommenderModel,
    config: EngineConfig | None = None,
    sim_threshold: float | None = None,
    max_results: int | None = None,
) -> list[Recommendation]:
    """Own Mid-tier keywords plus uncommon keywords of very similar users.

    A similar user's keyword only qualifies when the target user lacks it
    at every tier; scores are similarity x holder weight, deduplicated by
    keeping the best-scoring contributor.
    """
    config = config or EngineConfig()
    threshold = sim_threshold if sim_threshold is not None else config.sim_threshold
    limit = max_results if max_results is not None else config.max_recommendations
    by_id = {p.user_id: p for p in profiles}
    if user_id not in by_id:
        raise NotFound(f"unknown user: {user_id}")
    me = by_id[user_id]

    best: dict[str, Recommendation] = {}
    for keyword in sorted(me.interests):
        entry = me.interests[keyword]
        if entry.tier(config) == "Mid":
            best[keyword] = Recommendation(
                keyword=keyword, score=entry.weight, reason=REASON_OWN_MID
            )

    my_index = model.indexes.get(user_id)
    if my_index is not None and float(np.linalg.norm(my_index.vector)) > 0.0:
        for other_id in model.users:
            if other_id == user_id or other_id not in by_id:
                continue
            other_index = model.indexes[other_id]
            if float(np.linalg.norm(other_index.vector)) == 0.0:
                continue
            sim = similarity(my_index, other_index)
            if sim < threshold:
                continue
            for keyword in sorted(by_id[other_id].interests):
                if keyword in me.interests:
                    continue
                entry = by_id[other_id].interests[keyword]
                if entry.tier(config) == TIER_LOW:
                    continue
                score = sim * entry.weight
                current = best.get(keyword)
                if (
                    current is None
                    or (current.reason == REASON_SIMILAR_USER and score > current.score)
                ):
                    best[keyword] = Recommendation(
                        keyword=keyword,
                        score=score,
                        reason=REASON_SIMILAR_USER,
                        contributing_user=other_id,
                    )

    ranked = sorted(best.values(), key=lambda r: (-r.score, r.keyword))
    return ranked[:limit]
