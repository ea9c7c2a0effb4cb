import json

import numpy as np
import pytest

from chacha_ced.ced import InputParities, Scheme, classic_syndrome, gbpp_syndromes
from chacha_ced.fault import (
    CampaignConfig, Coverage, CoverageReport, ErrorPolicy, InputPolicy, SignalRow, Tally, carry_error_census,
    classify_report, enumerate_masks, evaluate, expectation, find_counterexample, parse_signals, random_masks,
    run_campaign, run_chunk,
)
from chacha_ced.quarterround import OUTPUTS, Signal, TAPS, quarterround


def fake_report(scheme, rates):
    cfg = CampaignConfig(4, scheme, tuple(rates), samples=1, inputs="random")
    rows = []
    for sig, (hit, n) in rates.items():
        rows.append(SignalRow(sig, expectation(scheme, sig), Tally(n, n, hit)))
    return CoverageReport(cfg, rows)


def small(scheme, signals, errors="odd-random", samples=3000, seed=1, **kw):
    return CampaignConfig(4, scheme, tuple(signals), errors, InputPolicy.RANDOM, samples, seed, **kw)


# ---- classification ----

def test_classify_all_covered_passes():
    rep = fake_report(Scheme.GBPP, {s: (100, 100) for s in (Signal.A0, Signal.BETA, Signal.D_OUT)})
    assert classify_report(rep).passed


def test_classify_classic_a0_full_rate_fails():
    rep = fake_report(Scheme.CLASSIC, {Signal.A0: (100, 100), Signal.B0: (100, 100)})
    verdict = classify_report(rep)
    assert not verdict.passed and "a0" in verdict.failures[0]


def test_classify_partial_coverage_fails():
    rep = fake_report(Scheme.CLASSIC, {Signal.B0: (97, 100)})
    assert not classify_report(rep).passed


def test_classify_nothing_to_judge():
    rep = fake_report(Scheme.GBPP, {Signal.A: (0, 100)})   # inputs are unclaimed for gbpp
    with pytest.raises(ValueError):
        classify_report(rep)


def test_expectations():
    assert expectation(Scheme.CLASSIC, Signal.C_OUT) is Coverage.UNCOVERED
    assert expectation(Scheme.CLASSIC, Signal.INPUT_BLOCK) is Coverage.COVERED
    assert expectation(Scheme.CLASSIC, Signal.GAMMA) is Coverage.UNCLAIMED
    assert expectation(Scheme.GBPP, Signal.C0) is Coverage.COVERED
    assert expectation(Scheme.GBPP, Signal.INPUT_BLOCK) is Coverage.UNCLAIMED


# ---- witness search ----

def test_counterexample_classic_a0():
    w = find_counterexample(4, Scheme.CLASSIC, Signal.A0)
    assert w is not None and bin(w["mask"]).count("1") % 2 == 1
    # replay: the witness must really escape the checker
    syn = evaluate(small(Scheme.CLASSIC, [Signal.A0]).probe, Signal.A0,
                   tuple(np.array([x], dtype=np.uint64) for x in w["inputs"]), w["mask"])
    assert not any(np.asarray(s).any() for s in syn)


@pytest.mark.slow
def test_counterexample_none_for_covered():
    assert find_counterexample(4, Scheme.CLASSIC, Signal.B0) is None
    assert find_counterexample(4, Scheme.GBPP, Signal.D1) is None
    assert find_counterexample(4, "gbpp", "gamma") is None


def test_counterexample_width_limit():
    with pytest.raises(ValueError):
        find_counterexample(9, Scheme.CLASSIC, Signal.A0)


# ---- campaigns ----

def test_campaign_deterministic_and_worker_independent():
    cfg = small(Scheme.GBPP, [Signal.B1, Signal.INPUT_BLOCK, Signal.ALPHA], samples=70000, seed=9)
    one = json.dumps(run_campaign(cfg, jobs=1).to_dict(), sort_keys=True)
    again = json.dumps(run_campaign(cfg, jobs=1).to_dict(), sort_keys=True)
    two = json.dumps(run_campaign(cfg, jobs=2).to_dict(), sort_keys=True)
    assert one == again == two


def test_seed_changes_trials():
    a = run_campaign(small(Scheme.CLASSIC, [Signal.A0], seed=1)).rows[0].tally.witness
    b = run_campaign(small(Scheme.CLASSIC, [Signal.A0], seed=2)).rows[0].tally.witness
    assert a is not None and b is not None and a != b


@pytest.mark.parametrize("scheme", list(Scheme))
def test_even_errors_are_not_fully_detected(scheme):
    sigs = [s for s in Signal if not s.is_tap]
    rep = run_campaign(small(scheme, sigs, errors="even-random"))
    for row in rep.rows:
        assert row.tally.injected_odd == 0
        assert row.detection_rate_even < 1.0, row.signal


def test_even_random_skips_taps():
    rep = run_campaign(small(Scheme.GBPP, [Signal.BETA], errors="even-random"))
    assert rep.rows[0].tally.trials == 0 and rep.rows[0].detection_rate_even is None


def test_single_bit_policy():
    rep = run_campaign(small(Scheme.GBPP, OUTPUTS, errors="single-bit", samples=500))
    for row in rep.rows:
        assert row.tally.injected_odd == 500 * 4
        assert row.detection_rate_odd == 1.0
        assert row.tally.witness is None


def test_classic_miss_witness_recorded():
    rep = run_campaign(small(Scheme.CLASSIC, [Signal.D0, Signal.D2]))
    d0, d2 = rep.row(Signal.D0), rep.row(Signal.D2)
    assert d0.detection_rate_odd == 0.0 and d0.tally.witness is not None
    assert d2.detection_rate_odd == 1.0 and d2.tally.witness is None


def test_gbpp_upstream_parities_cover_input_errors():
    sigs = [Signal.A, Signal.D, Signal.INPUT_BLOCK]
    local = run_campaign(small(Scheme.GBPP, sigs))
    upstream = run_campaign(small(Scheme.GBPP, sigs, gbpp_parities="supplied_upstream"))
    assert all(r.detection_rate_odd == 0.0 for r in local.rows)
    assert all(r.detection_rate_odd == 1.0 for r in upstream.rows)


def test_input_block_fast_path_matches_injection():
    rng = np.random.default_rng(0)
    clean = tuple(rng.integers(0, 16, 500, dtype=np.uint64) for _ in range(4))
    masks = random_masks(rng, Signal.INPUT_BLOCK, 4, 500, ErrorPolicy.ODD_RANDOM)
    for scheme, source in ((Scheme.CLASSIC, "computed_local"), (Scheme.GBPP, "computed_local"),
                           (Scheme.GBPP, "supplied_upstream")):
        p = small(scheme, [Signal.INPUT_BLOCK], gbpp_parities=source).probe
        fast = evaluate(p, Signal.INPUT_BLOCK, clean, masks)
        # direct route: run the datapath on corrupted words, parities from the clean ones
        t = quarterround(*(c ^ m for c, m in zip(clean, masks)), width=4)
        honest = InputParities.of(*clean)
        if scheme is Scheme.CLASSIC:
            slow = (classic_syndrome(t, honest),)
        elif source == "computed_local":
            slow = gbpp_syndromes(t, InputParities.local(t))
        else:
            slow = gbpp_syndromes(t, honest)
        for f, s in zip(fast, slow):
            assert np.array_equal(np.asarray(f, dtype=np.uint8), np.asarray(s, dtype=np.uint8))


def test_random_masks_weight_parity():
    rng = np.random.default_rng(4)
    for sig in (Signal.B2, Signal.INPUT_BLOCK):
        for policy, want in ((ErrorPolicy.ODD_RANDOM, 1), (ErrorPolicy.EVEN_RANDOM, 0)):
            m = random_masks(rng, sig, 8, 2000, policy)
            parts = m if isinstance(m, tuple) else (m,)
            w = sum(np.bitwise_count(x).astype(int) for x in parts)
            assert np.all(w % 2 == want) and np.all(w > 0)
    tap = random_masks(rng, Signal.GAMMA, 8, 100, ErrorPolicy.ODD_RANDOM)
    assert np.all(tap == 1)


def test_enumerate_masks():
    assert enumerate_masks(4, ErrorPolicy.ODD_EXHAUSTIVE) == [1, 2, 4, 7, 8, 11, 13, 14]
    assert enumerate_masks(3, ErrorPolicy.SINGLE_BIT) == [1, 2, 4]
    with pytest.raises(ValueError):
        enumerate_masks(4, ErrorPolicy.ODD_RANDOM)


def test_run_chunk_counts_exhaustive():
    cfg = CampaignConfig(4, Scheme.GBPP, (Signal.GAMMA,))
    t = run_chunk(cfg, Signal.GAMMA, 0)
    assert t.trials == t.injected_odd == t.detected_odd == 1 << 16


@pytest.mark.parametrize("kwargs", [
    dict(width=3),
    dict(signals=()),
    dict(signals=(Signal.A, Signal.A)),
    dict(width=8),                                       # exhaustive inputs too large
    dict(inputs="random", samples=0),
    dict(width=8, inputs="random", samples=10, signals=(Signal.INPUT_BLOCK,)),   # 32-bit mask space
    dict(errors="bogus"),
])
def test_config_errors(kwargs):
    base = dict(width=4, scheme=Scheme.CLASSIC, signals=(Signal.B0,))
    base.update(kwargs)
    with pytest.raises(ValueError):
        CampaignConfig(**base)


def test_config_canonical_order():
    cfg = CampaignConfig(4, "gbpp", ("d_out", Signal.A0))
    assert cfg.signals == (Signal.A0, Signal.D_OUT)


def test_parse_signals():
    assert len(parse_signals("all")) == len(Signal)
    assert parse_signals("a0, BETA") == (Signal.A0, Signal.BETA)
    with pytest.raises(ValueError):
        parse_signals("zz")


def test_carry_error_census_w4():
    c = carry_error_census(4)
    assert c["cases"] == 256 * 8
    assert c["parity_identity_violations"] == 0
    assert c["e_c_zero"] > 0 and c["e_c_weight_differs"] > 0
    ex = c["example_zero"]
    a, b, e = int(ex["a"], 16), int(ex["b"], 16), int(ex["e"], 16)
    cv = lambda x, y: x ^ y ^ ((x + y) & 0xF)
    assert cv(a ^ e, b) == cv(a, b)


def test_report_serializes():
    rep = run_campaign(small(Scheme.CLASSIC, TAPS, samples=200))
    d = json.loads(json.dumps(rep.to_dict()))
    assert [r["signal"] for r in d["rows"]] == ["alpha", "beta", "gamma", "delta"]
    rates = {r["signal"]: r["detection_rate_odd"] for r in d["rows"]}
    # the single-bit predictor only reads beta
    assert rates == {"alpha": 0.0, "beta": 1.0, "gamma": 0.0, "delta": 0.0}
    assert len(rep.csv_rows()) == 4
    for r in d["rows"]:
        assert r["detected_odd"] <= r["injected_odd"] and r["detected_even"] <= r["injected_even"]
