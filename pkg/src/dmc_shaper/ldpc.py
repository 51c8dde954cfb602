"""Random sparse parity-check codes with systematic encoding and
sum-product decoding.

Construction fills columns one at a time with a fixed column weight, biased
toward the currently lightest check rows and rejecting (up to a retry limit)
placements that would close a length-4 cycle. The systematic generator comes
from GF(2) elimination with column pivoting; rank-deficient draws are retried
with a fresh derived seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LLR_CLIP = 40.0
# tanh(LLR_CLIP / 2) rounds to 1.0; clip inside the open interval instead.
_TANH_LIMIT = 1.0 - 1e-15


@dataclass
class LdpcCode:
    """Parity-check matrix with its derived systematic encoder.

    ``message_positions`` are the codeword coordinates that carry the message
    verbatim; the remaining coordinates are parity determined by ``h``.
    """

    h: np.ndarray
    generator: np.ndarray
    message_positions: np.ndarray
    rate: float

    # Edge structure for message passing, derived once.
    _edge_check: np.ndarray = field(init=False, repr=False)
    _edge_var: np.ndarray = field(init=False, repr=False)
    _row_starts: np.ndarray = field(init=False, repr=False)
    _col_order: np.ndarray = field(init=False, repr=False)
    _col_starts: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        chk, var = np.nonzero(self.h)
        self._edge_check = chk
        self._edge_var = var
        counts = np.bincount(chk, minlength=self.m_checks)
        self._row_starts = np.concatenate(([0], np.cumsum(counts)))[:-1]
        self._col_order = np.lexsort((chk, var))
        col_counts = np.bincount(var, minlength=self.n)
        self._col_starts = np.concatenate(([0], np.cumsum(col_counts)))[:-1]

    @property
    def n(self) -> int:
        return self.h.shape[1]

    @property
    def m_checks(self) -> int:
        return self.h.shape[0]

    @property
    def message_length(self) -> int:
        return self.message_positions.shape[0]

    def encode(self, message: np.ndarray) -> np.ndarray:
        message = np.asarray(message, dtype=np.uint8)
        if message.shape != (self.message_length,):
            raise ValueError(
                f"message must have length {self.message_length}, got {message.shape}"
            )
        return (message.astype(np.int64) @ self.generator & 1).astype(np.uint8)


class RankDeficientError(ValueError):
    pass


def _fill_parity_matrix(
    n: int, m: int, col_weight: int, rng: np.random.Generator
) -> np.ndarray:
    h = np.zeros((m, n), dtype=np.uint8)
    row_weights = np.zeros(m, dtype=np.int64)
    used_pairs: set[tuple[int, int]] = set()
    for col in range(n):
        placed: np.ndarray | None = None
        rows = None
        for attempt in range(200):
            # Draw from the lightest rows; widen the pool as retries mount so
            # collisions near the end of the fill can still be avoided.
            limit = row_weights.min() + 1 + attempt // 20
            pool = np.flatnonzero(row_weights <= limit)
            if pool.size < col_weight:
                continue
            rows = np.sort(rng.choice(pool, size=col_weight, replace=False))
            pairs = [
                (int(rows[i]), int(rows[j]))
                for i in range(col_weight)
                for j in range(i + 1, col_weight)
            ]
            if all(p not in used_pairs for p in pairs):
                placed = rows
                used_pairs.update(pairs)
                break
        if placed is None:
            # 4-cycle avoidance is best effort; fall back to the last draw.
            placed = rows
        h[placed, col] = 1
        row_weights[placed] += 1
    return h


def _systematic_generator(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """GF(2) row reduction with column pivoting; raises if h is rank deficient."""
    m, n = h.shape
    work = h.copy()
    pivot_cols: list[int] = []
    row = 0
    for col in range(n):
        if row == m:
            break
        hot = np.nonzero(work[row:, col])[0]
        if hot.size == 0:
            continue
        pivot = row + int(hot[0])
        if pivot != row:
            work[[row, pivot]] = work[[pivot, row]]
        others = np.nonzero(work[:, col])[0]
        others = others[others != row]
        work[others] ^= work[row]
        pivot_cols.append(col)
        row += 1
    if row < m:
        raise RankDeficientError(f"parity matrix rank {row} < {m}")
    piv = np.asarray(pivot_cols, dtype=np.intp)
    msg = np.setdiff1d(np.arange(n), piv, assume_unique=True)
    k = msg.shape[0]
    gen = np.zeros((k, n), dtype=np.uint8)
    gen[np.arange(k), msg] = 1
    gen[:, piv] = work[:, msg].T
    return gen, msg


def build_ldpc(n: int, rate: float, col_weight: int = 3, seed: int = 0) -> LdpcCode:
    """Random regular-column-weight code of length n at (nearly) the given rate."""
    if not (0.0 < rate < 1.0):
        raise ValueError("rate must lie strictly between 0 and 1")
    if col_weight < 2:
        raise ValueError("column weight must be at least 2")
    m = int(round(n * (1.0 - rate)))
    if m < col_weight or m >= n:
        raise ValueError(f"{m} checks for length {n} is not constructible")
    achieved = (n - m) / n
    if abs(achieved - rate) > 1.0 / n:
        raise ValueError(f"achievable rate {achieved} is off the request by > 1/{n}")
    last_error: Exception | None = None
    for attempt in range(10):
        rng = np.random.default_rng([seed, attempt])
        h = _fill_parity_matrix(n, m, col_weight, rng)
        if int(h.sum(axis=1).min()) < 2:
            last_error = ValueError("a check row ended up with weight < 2")
            continue
        try:
            gen, msg = _systematic_generator(h)
        except RankDeficientError as exc:
            last_error = exc
            continue
        return LdpcCode(h=h, generator=gen, message_positions=msg, rate=achieved)
    raise ValueError(f"no usable parity matrix after 10 attempts: {last_error}")


@dataclass(frozen=True)
class BpResult:
    bits: np.ndarray
    converged: bool
    iterations: int


def bp_decode(code: LdpcCode, llrs: np.ndarray, max_iter: int = 100) -> BpResult:
    """Flooding sum-product decoding of bit-1 log-odds.

    Declares convergence when every parity check is satisfied and every
    belief is nonzero (exact-zero beliefs leave the hard decision arbitrary,
    so they never count as converged).
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.shape != (code.n,):
        raise ValueError(f"need {code.n} LLRs, got {llrs.shape}")
    # Work in the classical log(P0/P1) orientation.
    lam = -llrs
    chk = code._edge_check
    var = code._edge_var
    row_starts = code._row_starts
    col_order = code._col_order
    col_starts = code._col_starts

    var_to_chk = lam[var]
    bits = (lam < 0.0).astype(np.uint8)
    for iteration in range(1, max_iter + 1):
        t = np.tanh(0.5 * np.clip(var_to_chk, -LLR_CLIP, LLR_CLIP))
        zero = t == 0.0
        t_safe = np.where(zero, 1.0, t)
        prod = np.multiply.reduceat(t_safe, row_starts)
        n_zero = np.add.reduceat(zero.astype(np.int64), row_starts)
        p_edge = prod[chk]
        z_edge = n_zero[chk]
        excl = np.where(
            z_edge == 0,
            p_edge / t_safe,
            np.where((z_edge == 1) & zero, p_edge, 0.0),
        )
        chk_to_var = 2.0 * np.arctanh(np.clip(excl, -_TANH_LIMIT, _TANH_LIMIT))

        incoming = np.add.reduceat(chk_to_var[col_order], col_starts)
        total = lam + incoming
        bits = (total < 0.0).astype(np.uint8)
        syndrome = np.add.reduceat(bits[var], row_starts) & 1
        if not syndrome.any() and np.all(total != 0.0):
            return BpResult(bits=bits, converged=True, iterations=iteration)
        var_to_chk = total[var] - chk_to_var

    return BpResult(bits=bits, converged=False, iterations=max_iter)
