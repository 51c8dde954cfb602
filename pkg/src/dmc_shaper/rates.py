"""Information rates of a DMC: mutual information, subset-uniform rate,
ML symbol error rate, cutoff rate, per-symbol misdetection cost, and
channel capacity via alternating maximization (Blahut-Arimoto).

All rates are in bits per channel use. Conventions: 0*log(0) = 0 and
sqrt(0) = 0 throughout; ML argmax ties break toward the smallest input index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import DmcChannel, InputDistribution, SubsetMask

_LN2 = math.log(2.0)


def _check_mask(ch: DmcChannel, mask: SubsetMask) -> np.ndarray:
    if mask.m != ch.num_inputs:
        raise ValueError("mask length does not match channel inputs")
    return mask.indices


def mutual_information(ch: DmcChannel, p: InputDistribution) -> float:
    """I(X;Y) in bits for input pmf p over the channel inputs."""
    if len(p) != ch.num_inputs:
        raise ValueError(
            f"distribution has {len(p)} entries, channel has {ch.num_inputs} inputs"
        )
    probs = p.probs
    rows = probs > 0.0
    sub = ch.trans[rows]
    q = probs[rows] @ sub
    # q(y) > 0 wherever any contributing P(y|x) > 0, so the log is safe; the
    # -inf logs of zero entries are masked out before multiplying.
    log_q = np.log(np.where(q > 0.0, q, 1.0))
    log_sub = np.where(sub > 0.0, ch.log_trans[rows], 0.0)
    terms = sub * (log_sub - log_q[None, :])
    return float(probs[rows] @ terms.sum(axis=1)) / _LN2


def uniform_subset_rate(ch: DmcChannel, mask: SubsetMask) -> float:
    """Mutual information achieved by the uniform prior on the selected inputs.

    Evaluated in the algebraic form log2(K) + (1/K) * sum_y sum_{x in subset}
    P(y|x) * log2(P(y|x) / sum_{x' in subset} P(y|x')).
    """
    sel = _check_mask(ch, mask)
    k = mask.k
    sub = ch.trans[sel]
    denom = sub.sum(axis=0)
    log_denom = np.log(np.where(denom > 0.0, denom, 1.0))
    log_sub = np.where(sub > 0.0, ch.log_trans[sel], 0.0)
    terms = sub * (log_sub - log_denom[None, :])
    return math.log2(k) + float(terms.sum()) / (k * _LN2)


def ser_ml(ch: DmcChannel, mask: SubsetMask) -> float:
    """Symbol error rate of ML decoding under the uniform prior on the subset."""
    sel = _check_mask(ch, mask)
    best = ch.trans[sel].max(axis=0)
    return 1.0 - float(best.sum()) / mask.k


def per_symbol_misdetect(ch: DmcChannel, mask: SubsetMask) -> np.ndarray:
    """Misdetection probability of each selected input under ML decoding.

    Entry j covers the j-th selected input (ascending index order): the mass
    P(y|x_j) summed over outputs won by a different selected input. Argmax
    ties go to the smallest input index, so their mass counts against every
    later tied input.
    """
    sel = _check_mask(ch, mask)
    sub = ch.trans[sel]
    # argmax returns the first maximum; sel is ascending, so ties resolve low.
    winner = sub.argmax(axis=0)
    won_mass = np.zeros(mask.k)
    np.add.at(won_mass, winner, sub[winner, np.arange(sub.shape[1])])
    return sub.sum(axis=1) - won_mass


def cutoff_rate(ch: DmcChannel, mask: SubsetMask) -> float:
    """Cutoff rate of the subset under the uniform prior, in bits:
    2*log2(K) - log2( sum_y [ sum_{x in subset} sqrt(P(y|x)) ]^2 ).
    """
    sel = _check_mask(ch, mask)
    k = mask.k
    col = np.sqrt(ch.trans[sel]).sum(axis=0)
    return 2.0 * math.log2(k) - math.log2(float(col @ col))


# ---------------------------------------------------------------------------
# Capacity by alternating maximization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BaResult:
    """Capacity estimate with the bracketing bounds at termination.

    ``capacity_bits`` is the lower bound, achieved by ``input_dist``; the true
    capacity lies in [lower_bits, upper_bits]. ``converged`` is False when the
    iteration cap was hit before the gap fell below the tolerance.
    """

    capacity_bits: float
    input_dist: InputDistribution
    lower_bits: float
    upper_bits: float
    iterations: int
    converged: bool


def blahut_arimoto(ch: DmcChannel, tol: float = 1e-9, max_iter: int = 200_000) -> BaResult:
    """Channel capacity and its maximizing input distribution.

    Starts from the uniform distribution and alternates the standard update
    p(x) <- p(x) * exp(D(x)) / Z, where D(x) is the KL divergence of row x
    from the current output distribution. Stops when the capacity bracket
    max_x D(x) - sum_x p(x) D(x) falls below ``tol`` (in bits).
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    trans = ch.trans
    m = ch.num_inputs
    # Row "negative entropy" sum_y P log P is constant across iterations.
    safe_log = np.where(trans > 0.0, ch.log_trans, 0.0)
    row_plogp = (trans * safe_log).sum(axis=1)

    p = np.full(m, 1.0 / m)
    p_eval = p
    lower = upper = 0.0
    iterations = 0
    for iterations in range(1, max_iter + 1):
        p_eval = p
        q = p @ trans
        cols = q > 0.0
        # Columns with q == 0 carry only probabilities below the zero floor;
        # skipping them is exact at double precision.
        d = row_plogp - trans[:, cols] @ np.log(q[cols])
        lower = float(p @ d) / _LN2
        upper = float(d.max()) / _LN2
        if upper - lower < tol:
            return BaResult(
                capacity_bits=lower,
                input_dist=InputDistribution(p_eval),
                lower_bits=lower,
                upper_bits=upper,
                iterations=iterations,
                converged=True,
            )
        p = p * np.exp(d - d.max())
        # Keep every input alive so no symbol is absorbed at exactly zero.
        p = np.maximum(p, 1e-300)
        p /= p.sum()

    # Bounds belong to the last evaluated distribution, not the final update.
    return BaResult(
        capacity_bits=lower,
        input_dist=InputDistribution(p_eval),
        lower_bits=lower,
        upper_bits=upper,
        iterations=iterations,
        converged=False,
    )
