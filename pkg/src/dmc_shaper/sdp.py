"""Cutoff-rate subset selection via semidefinite relaxation.

Selecting the size-k subset that maximizes the cutoff rate is equivalent to
minimizing b^T A b over binary b with exactly k ones, where A is the Gram
matrix of square-root likelihood rows (pairwise confusability). The problem
is lifted with a sign slack variable to a symmetric form, relaxed by dropping
the rank-one constraint, solved by an ADMM splitting between the affine
constraint set and the PSD cone, and rounded back to a subset by Gaussian
sampling from the solution covariance (or by its dominant eigenvector).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .channel import DmcChannel, SubsetMask
from .rates import cutoff_rate

ROUNDING_METHODS = ("randomized", "eigen")


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric unit-diagonal matrix of pairwise row confusability in [0, 1]."""

    a: np.ndarray

    def __post_init__(self) -> None:
        a = np.ascontiguousarray(self.a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("Gram matrix must be square")
        if not np.array_equal(a, a.T):
            raise ValueError("Gram matrix must be symmetric")
        if np.any(a < 0.0) or np.any(a > 1.0):
            raise ValueError("Gram entries must lie in [0, 1]")
        if not np.all(np.diag(a) == 1.0):
            raise ValueError("Gram diagonal must be exactly 1")
        object.__setattr__(self, "a", a)

    @property
    def m(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class SdpSolution:
    """PSD iterate of the relaxed program with solver diagnostics.

    ``s_hat`` is exactly PSD (it leaves the cone projection); the affine
    constraints hold up to ``primal_residual``.
    """

    s_hat: np.ndarray
    objective: float
    primal_residual: float
    dual_residual: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class RoundingConfig:
    n_rand: int = 100
    rng_seed: int = 0
    method: str = "randomized"

    def __post_init__(self) -> None:
        if not (1 <= self.n_rand <= 10**6):
            raise ValueError("n_rand must be in [1, 10^6]")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be non-negative")
        if self.method not in ROUNDING_METHODS:
            raise ValueError(f"method must be one of {ROUNDING_METHODS}")


def build_gram(ch: DmcChannel) -> GramMatrix:
    """Pairwise confusability A_ij = sum_y sqrt(P(y|i) P(y|j))."""
    sq = np.sqrt(ch.trans)
    a = sq @ sq.T
    a = np.minimum((a + a.T) / 2.0, 1.0)
    np.fill_diagonal(a, 1.0)
    return GramMatrix(a)


def embed(a: GramMatrix) -> np.ndarray:
    """Zero-bordered (M+1) x (M+1) embedding of the Gram matrix."""
    m = a.m
    b = np.zeros((m + 1, m + 1))
    b[:m, :m] = a.a
    return b


def _affine_project(s: np.ndarray, k: int) -> np.ndarray:
    """Closest symmetric matrix with S_nn = 1, S_ii = S_in, sum_i S_ni = k+1.

    Only the diagonal, the last row/column, and the corner are constrained,
    so the projection is closed-form in those coordinates.
    """
    m = s.shape[0] - 1
    out = s.copy()
    d0 = np.diag(s)[:m]
    v0 = s[:m, m]
    w = (d0 + 2.0 * v0) / 3.0
    v = w - (w.sum() - k) / m
    out[m, m] = 1.0
    idx = np.arange(m)
    out[idx, idx] = v
    out[:m, m] = v
    out[m, :m] = v
    return out


def _psd_project(s: np.ndarray, rank_hint: int | None = None) -> tuple[np.ndarray, int]:
    """Project onto the PSD cone; returns (projection, positive count).

    When a rank hint says the positive part is small, only the top slice of
    the spectrum is computed; if the slice turns out entirely positive the
    hint was too small and the full decomposition runs instead.
    """
    sym = (s + s.T) / 2.0
    n = sym.shape[0]
    # The sliced solver only wins while the positive part is genuinely small.
    if (
        rank_hint is not None
        and 0 < rank_hint + 8 < n
        and rank_hint + 8 <= max(16, n // 6)
    ):
        w, q = scipy.linalg.eigh(
            sym, subset_by_index=[n - (rank_hint + 8), n - 1],
            driver="evr", check_finite=False,
        )
        if w[0] <= 0.0:
            pos = w > 0.0
            wp = w[pos]
            qp = q[:, pos]
            return (qp * wp) @ qp.T, int(pos.sum())
    w, q = scipy.linalg.eigh(sym, driver="evd", overwrite_a=True, check_finite=False)
    count = int((w > 0.0).sum())
    np.maximum(w, 0.0, out=w)
    return (q * w) @ q.T, count


def _constraint_violation(s: np.ndarray, k: int) -> float:
    m = s.shape[0] - 1
    diag_vs_border = np.abs(np.diag(s)[:m] - s[:m, m]).max()
    corner = abs(s[m, m] - 1.0)
    border_sum = abs(s[m, :].sum() - (k + 1))
    return max(diag_vs_border, corner, border_sum)


def solve_sdp(
    b_mat: np.ndarray,
    k: int,
    tol: float = 1e-6,
    max_iter: int = 5000,
    rho: float = 1.0,
    alpha: float = 1.6,
) -> SdpSolution:
    """Minimize tr(B S) over PSD S meeting the subset-lift affine constraints.

    ADMM with over-relaxation: alternate the closed-form affine projection
    and the eigenvalue-clipping PSD projection, carrying a scaled dual. The
    penalty parameter self-tunes by residual balancing. Terminates when both
    the max affine violation of the PSD iterate (plus the splitting gap) and
    the dual step fall below ``tol``.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    b_mat = np.asarray(b_mat, dtype=np.float64)
    n = b_mat.shape[0]
    m = n - 1
    if b_mat.shape != (n, n) or m < 2:
        raise ValueError("embedded matrix must be (M+1) x (M+1) with M >= 2")
    if not (1 <= k <= m):
        raise ValueError(f"k must be in [1, {m}], got {k}")

    # Start from the covariance of a uniformly random k-subset lift: feasible
    # for every constraint and PSD.
    off = k * (k - 1) / (m * (m - 1)) if m > 1 else 1.0
    z = np.full((n, n), off)
    idx = np.arange(m)
    z[idx, idx] = k / m
    z[:m, m] = k / m
    z[m, :m] = k / m
    z[m, m] = 1.0
    u = np.zeros((n, n))

    primal = dual = math.inf
    iterations = 0
    rank_hint: int | None = None
    for iterations in range(1, max_iter + 1):
        x = _affine_project(z - u - b_mat / rho, k)
        x_hat = alpha * x + (1.0 - alpha) * z
        z_new, rank_hint = _psd_project(x_hat + u, rank_hint)
        u += x_hat - z_new
        primal = max(
            _constraint_violation(z_new, k), float(np.abs(x - z_new).max())
        )
        dual = rho * float(np.abs(z_new - z).max())
        z = z_new
        if max(primal, dual) < tol:
            return SdpSolution(
                s_hat=z,
                objective=float((b_mat * z).sum()),
                primal_residual=primal,
                dual_residual=dual,
                iterations=iterations,
                converged=True,
            )
        if iterations % 10 == 0:
            if primal > 10.0 * dual and rho < 1e6:
                rho *= 2.0
                u /= 2.0
            elif dual > 10.0 * primal and rho > 1e-6:
                rho /= 2.0
                u *= 2.0

    return SdpSolution(
        s_hat=z,
        objective=float((b_mat * z).sum()),
        primal_residual=primal,
        dual_residual=dual,
        iterations=iterations,
        converged=False,
    )


def psd_factorize(sol: SdpSolution) -> np.ndarray:
    """Factor V with V^T V = s_hat, via eigendecomposition.

    Negative eigenvalues are clipped to zero; anything below -1e-5 means the
    solution is not acceptably PSD and raises.
    """
    s = sol.s_hat
    w, q = np.linalg.eigh((s + s.T) / 2.0)
    if float(w.min()) < -1e-5:
        raise ValueError(f"solution has eigenvalue {w.min()!r}, not PSD")
    np.maximum(w, 0.0, out=w)
    return np.sqrt(w)[:, None] * q.T


def _quantize_top_k(s_vec: np.ndarray, k: int) -> np.ndarray:
    """Sign-normalize on the slack entry, then select the k largest of the
    first M entries (ties to the smallest index)."""
    if s_vec[-1] < 0.0:
        s_vec = -s_vec
    m = s_vec.shape[0] - 1
    order = np.lexsort((np.arange(m), -s_vec[:m]))
    return np.sort(order[:k])


def round_solution(
    v: np.ndarray,
    k: int,
    b_mat: np.ndarray,
    cfg: RoundingConfig,
) -> tuple[SubsetMask, float]:
    """Recover a k-subset from the factor V of the relaxed solution.

    randomized: draw unit-sphere vectors u (stream per draw index), form
    s = V^T u, and quantize; keep the candidate minimizing b^T A b.
    eigen: quantize the dominant eigenvector of V^T V once.
    """
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[1]
    m = n - 1
    a = np.asarray(b_mat, dtype=np.float64)[:m, :m]

    if cfg.method == "eigen":
        _, q = np.linalg.eigh(v.T @ v)
        candidates = [q[:, -1]]
    else:
        candidates = []
        for i in range(cfg.n_rand):
            rng = np.random.default_rng([cfg.rng_seed, i])
            u = rng.standard_normal(n)
            norm = np.linalg.norm(u)
            if norm > 0.0:
                u /= norm
            candidates.append(v.T @ u)

    best_idx: np.ndarray | None = None
    best_obj = math.inf
    for s_vec in candidates:
        chosen = _quantize_top_k(s_vec, k)
        obj = float(a[np.ix_(chosen, chosen)].sum())
        if obj < best_obj:
            best_obj = obj
            best_idx = chosen
    assert best_idx is not None
    return SubsetMask.from_indices(m, best_idx), best_obj


@dataclass(frozen=True)
class SdpSelectResult:
    """Output of the full relaxation pipeline for one channel and k."""

    mask: SubsetMask
    cutoff_rate_bits: float
    rounded_objective: float
    sdp_objective: float
    sdp_bound_bits: float
    solution: SdpSolution


def sdp_select(
    ch: DmcChannel,
    k: int,
    tol: float = 1e-6,
    cfg: RoundingConfig | None = None,
    max_iter: int = 5000,
) -> SdpSelectResult:
    """Gram build, lift, relaxed solve, factorization, and rounding in one call.

    ``sdp_bound_bits`` converts the relaxation objective into the cutoff-rate
    upper bound 2*log2(k) - log2(objective) for context.
    """
    if cfg is None:
        cfg = RoundingConfig()
    b_mat = embed(build_gram(ch))
    sol = solve_sdp(b_mat, k, tol=tol, max_iter=max_iter)
    v = psd_factorize(sol)
    mask, rounded_obj = round_solution(v, k, b_mat, cfg)
    if sol.objective > 0.0:
        bound = 2.0 * math.log2(k) - math.log2(sol.objective)
    else:
        bound = math.inf
    return SdpSelectResult(
        mask=mask,
        cutoff_rate_bits=cutoff_rate(ch, mask),
        rounded_objective=rounded_obj,
        sdp_objective=sol.objective,
        sdp_bound_bits=bound,
        solution=sol,
    )
