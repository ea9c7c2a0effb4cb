"""Identity suites: the parity algebra checked over whole input spaces or random samples.

Each suite returns ``{"checked": n, "violations": k}``; a violation count of
zero on every suite is the pass condition.
"""

from __future__ import annotations

import itertools
from typing import Iterator, Optional

import numpy as np

from .arx_core import add_raw, carry_vector_recurrence, parity, rotl_raw, width_mask
from .ced import (
    InputParities, classic_syndrome, gbpp, gbpp_syndromes, lemma_parities, predict_outputs_lemma,
    predict_qr_parity,
)
from .quarterround import DEFAULT_SCHEDULE, qr_output_parity, quarterround

BATCH = 1 << 17
MAX_EXHAUSTIVE_BITS = 24


def _split(idx: np.ndarray, width: int, k: int) -> tuple:
    m = np.uint64(width_mask(width))
    return tuple((idx >> np.uint64(i * width)) & m for i in range(k))


def word_batches(width: int, k: int, mode: str, samples: int = 0, seed: int = 0) -> Iterator[tuple]:
    """Yield batches of ``k``-tuples of ``width``-bit words (exhaustive or random)."""
    if mode == "exhaustive":
        total = 1 << (k * width)
        if k * width > MAX_EXHAUSTIVE_BITS:
            raise ValueError(f"exhaustive mode over {k}x{width} bits is too large")
        for lo in range(0, total, BATCH):
            yield _split(np.arange(lo, min(total, lo + BATCH), dtype=np.uint64), width, k)
    elif mode == "random":
        if samples <= 0:
            raise ValueError("random mode needs samples > 0")
        rng = np.random.default_rng(seed)
        hi = np.iinfo(np.uint64).max if width == 64 else (1 << width) - 1
        for lo in range(0, samples, BATCH):
            n = min(BATCH, samples - lo)
            yield tuple(rng.integers(0, hi, size=n, dtype=np.uint64, endpoint=True) for _ in range(k))
    else:
        raise ValueError(f"unknown mode {mode!r}")


def _count(results: dict, name: str, bad: np.ndarray, n: int) -> None:
    r = results.setdefault(name, {"checked": 0, "violations": 0})
    r["checked"] += n
    r["violations"] += int(np.count_nonzero(bad))


def arx_suites(width: int, mode: str, samples: int = 0, seed: int = 0) -> dict:
    """Parity laws of XOR, modular addition and rotation."""
    results: dict = {}
    for a, b in word_batches(width, 2, mode, samples, seed):
        n = len(a)
        s, cv = add_raw(a, b, width)
        cv_rec = carry_vector_recurrence(a, b, width)
        _count(results, "add_carry_vector_matches_recurrence", cv != cv_rec, n)
        _count(results, "add_carry_vector_bit0_zero", (cv_rec & np.uint64(1)) != 0, n)
        _count(results, "add_sum_matches_wide_integer",
               s != ((a.astype(object) + b.astype(object)) % (1 << width)).astype(np.uint64), n)
        _count(results, "add_parity", parity(s) != (parity(a) ^ parity(b) ^ parity(cv_rec)), n)
        _count(results, "xor_parity", parity(a ^ b) != (parity(a) ^ parity(b)), n)
    for (a,) in word_batches(width, 1, "exhaustive" if mode == "exhaustive" and width <= 20 else "random",
                             samples or BATCH, seed):
        for r in range(width):
            _count(results, "rotation_parity", parity(rotl_raw(a, r, width)) != parity(a), len(a))
    return results


def qr_suites(width: int, mode: str, samples: int = 0, seed: int = 0,
              schedule: tuple = DEFAULT_SCHEDULE) -> dict:
    """Output-parity identities of fault-free Quarterrounds and checker silence."""
    results: dict = {}
    for a, b, c, d in word_batches(width, 4, mode, samples, seed):
        n = len(a)
        t = quarterround(a, b, c, d, schedule=schedule, width=width)
        outs = [parity(o) for o in t.outputs]
        lem = predict_outputs_lemma(t)
        _count(results, "whole_output_parity", qr_output_parity(t) != predict_qr_parity(t), n)
        for name, pred, obs in zip(("lemma_a_out", "lemma_b_out", "lemma_c_out", "lemma_d_out"), lem, outs):
            _count(results, name, pred != obs, n)
        ip = InputParities.of(a, b, c, d)
        pa, pd = parity(a), parity(d)
        _count(results, "code_disjoint_form", (ip.p_block ^ predict_qr_parity(t)) != (pa ^ pd ^ t.beta), n)
        g = gbpp(ip, t.alpha, t.beta, t.gamma, t.delta)
        _count(results, "gbpp_matches_outputs",
               np.logical_or.reduce([p != o for p, o in zip(g, outs)]), n)
        _count(results, "classic_silent_fault_free", classic_syndrome(t, ip) != 0, n)
        _count(results, "gbpp_silent_fault_free",
               np.logical_or.reduce([s != 0 for s in gbpp_syndromes(t, InputParities.local(t))]), n)
    return results


def gbpp_vs_lemmas() -> dict:
    """Compare the sequential predictor with the closed forms on all 2**8 bit inputs."""
    bad = 0
    for bits in itertools.product((0, 1), repeat=8):
        ip = InputParities(*bits[:4], p_block=bits[0] ^ bits[1] ^ bits[2] ^ bits[3])
        if gbpp(ip, *bits[4:]) != lemma_parities(*bits):
            bad += 1
    return {"gbpp_equals_lemmas": {"checked": 256, "violations": bad}}


def run_all(width: int, mode: str, samples: int = 0, seed: int = 0,
            schedule: Optional[tuple] = None) -> dict:
    schedule = tuple(schedule or DEFAULT_SCHEDULE)
    arx_mode = mode
    if mode == "exhaustive" and 2 * width > MAX_EXHAUSTIVE_BITS:
        arx_mode = "random"
    out = {}
    out.update(arx_suites(width, arx_mode, samples or BATCH, seed))
    out.update(qr_suites(width, mode, samples, seed, schedule))
    out.update(gbpp_vs_lemmas())
    return dict(sorted(out.items()))
