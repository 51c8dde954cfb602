"""Coded Monte-Carlo link over the quantized MIMO channel.

Code bits are mapped log2(K) at a time onto the selected channel inputs
(ascending input index = natural binary label, most significant bit first).
The receiver computes per-bit log-odds from the exact channel law under a
uniform symbol prior and hands them to the sum-product decoder; detection and
decoding stay decoupled.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .channel import DmcChannel, SubsetMask
from .ldpc import LLR_CLIP, bp_decode, build_ldpc
from .mimo import (
    ComplexChannelMatrix,
    SnrPoint,
    build_quantized_mimo,
    enumerate_qpsk_inputs,
    sample_receive_many,
)


@dataclass(frozen=True)
class SymbolLabeling:
    """Bijection between the K selected inputs and log2(K)-bit labels.

    The r-th selected input (ascending index order) carries label r; bit j of
    a label is bit (q-1-j) of r, i.e. the first bit of a group is the most
    significant.
    """

    mask: SubsetMask
    selected: np.ndarray
    bits_per_symbol: int

    @classmethod
    def from_mask(cls, mask: SubsetMask) -> "SymbolLabeling":
        k = mask.k
        q = k.bit_length() - 1
        if 2**q != k:
            raise ValueError(f"subset size must be a power of two, got {k}")
        return cls(mask=mask, selected=mask.indices, bits_per_symbol=q)

    def label_bits(self) -> np.ndarray:
        """(q, K) matrix: entry [j, r] is bit j of label r."""
        q = self.bits_per_symbol
        ranks = np.arange(self.mask.k)
        return ((ranks[None, :] >> (q - 1 - np.arange(q))[:, None]) & 1).astype(bool)


def map_bits(codebits: np.ndarray, lab: SymbolLabeling) -> tuple[np.ndarray, int]:
    """Map a bit vector onto channel input indices, log2(K) bits per use.

    Returns (global input indices, number of zero pad bits appended).
    """
    bits = np.asarray(codebits, dtype=np.uint8).ravel()
    q = lab.bits_per_symbol
    n_pad = (-bits.shape[0]) % q
    if n_pad:
        bits = np.concatenate((bits, np.zeros(n_pad, dtype=np.uint8)))
    groups = bits.reshape(-1, q)
    ranks = groups @ (1 << np.arange(q - 1, -1, -1))
    return lab.selected[ranks], n_pad


def demap_bits(indices: np.ndarray, lab: SymbolLabeling) -> np.ndarray:
    """Inverse of map_bits (padding included)."""
    q = lab.bits_per_symbol
    ranks = np.searchsorted(lab.selected, np.asarray(indices))
    if not np.array_equal(lab.selected[ranks], np.asarray(indices)):
        raise ValueError("index not in the selected subset")
    out = ((ranks[:, None] >> (q - 1 - np.arange(q))[None, :]) & 1).astype(np.uint8)
    return out.ravel()


def compute_llrs_block(
    ch: DmcChannel, lab: SymbolLabeling, y_indices: np.ndarray
) -> np.ndarray:
    """Bit-1 log-odds for each received output index, shape (n_uses, q).

    Uniform prior over the selected symbols; evaluated with log-sum-exp and
    clipped to +/- LLR_CLIP. Outputs unreachable from every selected symbol
    yield zero LLRs (with a warning).
    """
    y = np.asarray(y_indices, dtype=np.intp)
    log_p = ch.log_trans[np.ix_(lab.selected, y)].T  # (n_uses, K)
    bits = lab.label_bits()
    q = lab.bits_per_symbol
    llrs = np.empty((y.shape[0], q))
    with np.errstate(invalid="ignore"):
        for j in range(q):
            ones = logsumexp(log_p[:, bits[j]], axis=1)
            zeros = logsumexp(log_p[:, ~bits[j]], axis=1)
            llrs[:, j] = ones - zeros
    dead = ~np.isfinite(log_p.max(axis=1))
    if dead.any():
        warnings.warn(
            "received outputs with zero likelihood under every selected symbol; "
            "their LLRs are set to zero",
            RuntimeWarning,
            stacklevel=2,
        )
        llrs[dead] = 0.0
    return np.clip(llrs, -LLR_CLIP, LLR_CLIP)


def compute_llrs(ch: DmcChannel, lab: SymbolLabeling, y_index: int) -> np.ndarray:
    """Bit-1 log-odds of the log2(K) bits carried by one received output."""
    return compute_llrs_block(ch, lab, np.asarray([y_index]))[0]


@dataclass(frozen=True)
class BerRecord:
    """Error counts of one simulated SNR point (one code seed)."""

    snr_db: float
    bits_sent: int
    bit_errors: int
    frame_errors: int
    frames: int
    ber: float
    seed: int | None = None


def average_ber_records(records: list[BerRecord]) -> list[BerRecord]:
    """Merge per-seed records into one aggregate record per SNR point."""
    by_snr: dict[float, list[BerRecord]] = {}
    for rec in records:
        by_snr.setdefault(rec.snr_db, []).append(rec)
    out = []
    for snr_db in sorted(by_snr):
        group = by_snr[snr_db]
        bits = sum(r.bits_sent for r in group)
        errs = sum(r.bit_errors for r in group)
        out.append(
            BerRecord(
                snr_db=snr_db,
                bits_sent=bits,
                bit_errors=errs,
                frame_errors=sum(r.frame_errors for r in group),
                frames=sum(r.frames for r in group),
                ber=errs / bits if bits else 0.0,
                seed=None,
            )
        )
    return out


def run_coded_ber(
    h: ComplexChannelMatrix,
    mask: SubsetMask,
    snr_db_list,
    n: int = 250,
    total_rate: float = 2.5,
    seeds=(0,),
    min_frame_errors: int = 50,
    max_frames: int = 10**6,
    bp_max_iter: int = 100,
) -> list[BerRecord]:
    """Coded BER sweep: one record per (seed, SNR point).

    Per frame: encode a random message, map code bits onto selected inputs,
    draw the quantized outputs, compute LLRs from the analytic channel, and
    decode. Each point stops at ``min_frame_errors`` or at ``max_frames``.
    Frame RNG streams derive from (seed, frame index), so the same noise is
    reused across SNR points.
    """
    lab = SymbolLabeling.from_mask(mask)
    q = lab.bits_per_symbol
    code_rate = total_rate / q
    if not (0.0 < code_rate < 1.0):
        raise ValueError(
            f"total rate {total_rate} with {q} bits/use needs code rate in (0,1)"
        )
    table = enumerate_qpsk_inputs(h.n_tx)
    if mask.m != table.shape[0]:
        raise ValueError("mask length does not match the QPSK input alphabet")

    records: list[BerRecord] = []
    for seed in seeds:
        code = build_ldpc(n, code_rate, col_weight=3, seed=seed)
        k_msg = code.message_length
        for snr_db in snr_db_list:
            snr = SnrPoint.from_db(float(snr_db))
            ch = build_quantized_mimo(h, snr)
            bit_errors = 0
            frame_errors = 0
            frames = 0
            while frames < max_frames and frame_errors < min_frame_errors:
                rng = np.random.default_rng([seed, frames])
                message = rng.integers(0, 2, size=k_msg, dtype=np.uint8)
                codeword = code.encode(message)
                symbols, _ = map_bits(codeword, lab)
                xs = table[symbols]
                y = sample_receive_many(h, xs, snr, rng)
                llrs = compute_llrs_block(ch, lab, y).ravel()[: code.n]
                decoded = bp_decode(code, llrs, max_iter=bp_max_iter)
                errs = int((decoded.bits[code.message_positions] != message).sum())
                bit_errors += errs
                frame_errors += int(errs > 0)
                frames += 1
            bits_sent = frames * k_msg
            records.append(
                BerRecord(
                    snr_db=float(snr_db),
                    bits_sent=bits_sent,
                    bit_errors=bit_errors,
                    frame_errors=frame_errors,
                    frames=frames,
                    ber=bit_errors / bits_sent if bits_sent else 0.0,
                    seed=int(seed),
                )
            )
    return records
