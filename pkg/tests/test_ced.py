import itertools
import random

import numpy as np
import pytest

from chacha_ced.arx_core import Word, parity
from chacha_ced.ced import (
    InputParities, ParitySource, Scheme, check, check_classic, check_gbpp, gbpp, lemma_parities,
    predict_outputs_lemma, predict_qr_parity,
)
from chacha_ced.quarterround import FaultSpec, Signal, qr_output_parity, quarterround


def all_w4():
    idx = np.arange(1 << 16, dtype=np.uint64)
    return tuple((idx >> np.uint64(4 * k)) & np.uint64(0xF) for k in range(4))


def odd_masks(bits):
    return [e for e in range(1, 1 << bits) if bin(e).count("1") % 2]


def test_all_zero():
    t = quarterround(*[Word(0)] * 4)
    assert predict_qr_parity(t) == 0
    assert predict_outputs_lemma(t) == (0, 0, 0, 0)
    assert gbpp(InputParities(0, 0, 0, 0, 0), 0, 0, 0, 0) == (0, 0, 0, 0)


def test_small_example_brute_force():
    t = quarterround(Word(1, 4), Word(1, 4), Word(0, 4), Word(0, 4))
    # a0 = 2, d0 = 2, d1 = rot(2, 0) = 2, c0 = 0 + 2 with no carries -> beta 0
    assert (t.a0, t.d1, t.c0, t.beta) == (2, 2, 2, 0)
    assert predict_qr_parity(t) == 1 ^ 0 ^ 0
    assert qr_output_parity(t) == predict_qr_parity(t)


def test_identities_exhaustive_w4():
    t = quarterround(*all_w4(), width=4)
    outs = [parity(o) for o in t.outputs]
    assert np.array_equal(qr_output_parity(t), predict_qr_parity(t))
    for pred, obs in zip(predict_outputs_lemma(t), outs):
        assert np.array_equal(pred, obs)
    g = gbpp(InputParities.local(t), t.alpha, t.beta, t.gamma, t.delta)
    for pred, obs in zip(g, outs):
        assert np.array_equal(pred, obs)


def test_lemma_xor_collapses_to_whole_prediction():
    for bits in itertools.product((0, 1), repeat=8):
        pa, pb, pc, pd, al, be, ga, de = bits
        x = 0
        for v in lemma_parities(*bits):
            x ^= v
        assert x == pb ^ pc ^ be


def test_gbpp_equals_lemmas_all_assignments():
    for bits in itertools.product((0, 1), repeat=8):
        ip = InputParities(*bits[:4], p_block=0)
        assert gbpp(ip, *bits[4:]) == lemma_parities(*bits)


def test_checkers_silent_fault_free():
    rng = random.Random(11)
    for _ in range(200):
        xs = [Word(rng.getrandbits(32)) for _ in range(4)]
        t = quarterround(*xs)
        for scheme in Scheme:
            v = check(t, scheme, tuple(x.value for x in xs))
            assert not v.detected and not v.fired_comparators


def test_classic_detects_input_block_error():
    xs = (0x1234, 0xABCD, 0x0F0F, 0x7777)
    honest = InputParities.of(*xs)
    t = quarterround(*xs, width=16, faults=[FaultSpec(Signal.INPUT_BLOCK, 1 << 40)])
    v = check_classic(t, honest)
    assert v.detected and v.fired_comparators == {"single"}
    # with locally recomputed parities the input error is invisible
    assert not check_classic(t, InputParities.local(t)).detected


def test_classic_misses_a_out():
    rng = random.Random(5)
    for _ in range(100):
        xs = tuple(rng.getrandbits(32) for _ in range(4))
        t = quarterround(*xs, width=32, faults=[FaultSpec(Signal.A_OUT, 1 << rng.randrange(32))])
        assert not check_classic(t, InputParities.of(*xs)).detected


def test_classic_detects_b0_odd():
    rng = random.Random(6)
    for _ in range(100):
        xs = tuple(rng.getrandbits(32) for _ in range(4))
        t = quarterround(*xs, width=32, faults=[FaultSpec(Signal.B0, 0b111 << rng.randrange(29))])
        assert qr_output_parity(t) != parity(xs[1]) ^ parity(xs[2]) ^ t.beta
        assert check_classic(t, InputParities.of(*xs)).detected


def test_gbpp_a0_fires_comparator_d():
    rng = random.Random(8)
    for _ in range(200):
        xs = tuple(rng.getrandbits(32) for _ in range(4))
        t = quarterround(*xs, width=32, faults=[FaultSpec(Signal.A0, 1 << rng.randrange(32))])
        v = check_gbpp(t, InputParities.local(t))
        assert "d" in v.fired_comparators


def test_gbpp_gamma_flip_detected():
    t = quarterround(*[Word(0x55555555)] * 4, faults=[FaultSpec(Signal.GAMMA, 1)])
    v = check_gbpp(t, InputParities.local(t))
    assert v.detected
    assert v.detected == bool(v.fired_comparators)


def test_input_parities_sources():
    t = quarterround(*(Word(v) for v in (1, 3, 7, 0xF)))
    ip = InputParities.local(t)
    assert ip.source is ParitySource.COMPUTED_LOCAL
    assert (ip.pa, ip.pb, ip.pc, ip.pd, ip.p_block) == (1, 0, 1, 0, 0)
    assert InputParities.of(1, 3, 7, 0xF).source is ParitySource.SUPPLIED_UPSTREAM


def test_carry_error_can_vanish_or_change_weight():
    # an odd error on an adder operand: e_c = cv(a^e, b) ^ cv(a, b)
    def cv(x, y):
        return (x ^ y ^ ((x + y) & 0xF)) & 0xF

    zero = differs = False
    for a in range(16):
        for b in range(16):
            for e in odd_masks(4):
                ec = cv(a ^ e, b) ^ cv(a, b)
                s = (a ^ e) + b & 0xF
                assert parity(s) == parity(a ^ e) ^ parity(b) ^ parity(cv(a ^ e, b))
                zero |= ec == 0
                differs |= bin(ec).count("1") != bin(e).count("1")
    assert zero and differs


def test_verdict_dict():
    t = quarterround(*[Word(0)] * 4, faults=[FaultSpec(Signal.B_OUT, 1)])
    d = check_gbpp(t, InputParities.local(t)).to_dict()
    assert d == {"scheme": "gbpp", "detected": True, "fired": ["b"], "predicted": [0, 0, 0, 0],
                 "observed": [0, 1, 0, 0]}
