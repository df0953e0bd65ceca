"""Truncated SVD via one-sided Jacobi rotations.

The user-keyword matrices this engine decomposes are desk-scale (tens of
rows/columns), so the factorization is computed here directly instead of
delegating: plane rotations orthogonalize pairs of columns of the working
matrix until every pairwise cosine is negligible, at which point the
column norms are the singular values. That keeps the computation fully
deterministic, which the serialized decomposition format relies on.

Sign convention: the largest-magnitude component of every left singular
vector is made positive (first index wins ties), with the matching right
vector flipped alongside.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_PAIR_TOL = 1e-14  # |cos| between columns below this counts as orthogonal
_RANK_TOL = 1e-12  # sigma below sigma_max * this is treated as zero


class SvdConvergenceError(Exception):
    def __init__(self, sweeps: int):
        super().__init__(f"one-sided Jacobi did not converge within {sweeps} sweeps")
        self.sweeps = sweeps


@dataclass
class Decomposition:
    u: np.ndarray  # m x k, column-orthonormal
    s: np.ndarray  # k singular values, non-increasing, >= 0
    v: np.ndarray  # n x k, column-orthonormal
    k: int

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.s) @ self.v.T

    def to_dict(self) -> dict:
        return {
            "u": self.u.tolist(),
            "s": self.s.tolist(),
            "v": self.v.tolist(),
            "k": self.k,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Decomposition":
        return cls(
            u=np.array(d["u"], dtype=float),
            s=np.array(d["s"], dtype=float),
            v=np.array(d["v"], dtype=float),
            k=int(d["k"]),
        )


def _sweep_cap(m: int, n: int) -> int:
    return max(30, 10 * min(m, n) ** 2)


def _jacobi_tall(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full decomposition of a tall matrix (m >= n), unsorted signs."""
    m, n = a.shape
    w = a.astype(float).copy()
    v = np.eye(n)
    cap = _sweep_cap(m, n)

    if n == 1:
        pass  # a single column is trivially orthogonal
    else:
        for _ in range(cap):
            rotated = False
            for p in range(n - 1):
                for q in range(p + 1, n):
                    alpha = float(w[:, p] @ w[:, p])
                    beta = float(w[:, q] @ w[:, q])
                    gamma = float(w[:, p] @ w[:, q])
                    scale = np.sqrt(alpha * beta)
                    if scale == 0.0 or abs(gamma) <= _PAIR_TOL * scale:
                        continue
                    rotated = True
                    zeta = (beta - alpha) / (2.0 * gamma)
                    t = np.sign(zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                    if zeta == 0.0:
                        t = 1.0
                    c = 1.0 / np.sqrt(1.0 + t * t)
                    s = c * t
                    wp = w[:, p].copy()
                    w[:, p] = c * wp - s * w[:, q]
                    w[:, q] = s * wp + c * w[:, q]
                    vp = v[:, p].copy()
                    v[:, p] = c * vp - s * v[:, q]
                    v[:, q] = s * vp + c * v[:, q]
            if not rotated:
                break
        else:
            raise SvdConvergenceError(cap)

    norms = np.linalg.norm(w, axis=0)
    order = np.argsort(-norms, kind="stable")
    sigma = norms[order]
    w = w[:, order]
    v = v[:, order]

    cutoff = sigma[0] * _RANK_TOL if sigma.size and sigma[0] > 0 else 0.0
    u = np.zeros((m, n))
    deficient: list[int] = []
    for j in range(n):
        if sigma[j] > cutoff:
            u[:, j] = w[:, j] / sigma[j]
        else:
            sigma[j] = 0.0
            deficient.append(j)
    if deficient:
        _complete_basis(u, deficient)
    return u, sigma, v


def _complete_basis(u: np.ndarray, deficient: list[int]) -> None:
    """Fill zero-sigma columns with deterministic orthonormal vectors."""
    m = u.shape[0]
    filled = [j for j in range(u.shape[1]) if j not in deficient]
    for j in deficient:
        for i in range(m):
            cand = np.zeros(m)
            cand[i] = 1.0
            for col in filled:
                cand -= (u[:, col] @ cand) * u[:, col]
            norm = np.linalg.norm(cand)
            if norm > 0.5:
                u[:, j] = cand / norm
                filled.append(j)
                break
        else:
            raise SvdConvergenceError(0)  # cannot happen for j < m


def _fix_signs(u: np.ndarray, v: np.ndarray) -> None:
    for j in range(u.shape[1]):
        lead = int(np.argmax(np.abs(u[:, j])))
        if u[lead, j] < 0:
            u[:, j] = -u[:, j]
            v[:, j] = -v[:, j]


def jacobi_svd(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full SVD A = U diag(s) V^T with min(m,n) factors."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("need a non-empty 2-D matrix")
    m, n = a.shape
    if m >= n:
        u, s, v = _jacobi_tall(a)
    else:
        v, s, u = _jacobi_tall(a.T)
    _fix_signs(u, v)
    return u, s, v


def svd_truncate(a: np.ndarray, k: int) -> Decomposition:
    """Best rank-k factorization of `a` (1 <= k <= min(m, n))."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("need a non-empty 2-D matrix")
    limit = min(a.shape)
    if not 1 <= k <= limit:
        raise ValueError(f"k must be in [1, {limit}], got {k}")
    u, s, v = jacobi_svd(a)
    return Decomposition(u=u[:, :k].copy(), s=s[:k].copy(), v=v[:, :k].copy(), k=k)
