"""Fault-injection campaigns against the two checkers.

A campaign injects one XOR error mask on one wire per trial, runs the
checker, and tallies detections split by mask weight parity.  Trials are
evaluated in numpy batches.  Work is cut into fixed-size chunks keyed by
``(signal, chunk)``; random draws are seeded per chunk, so a report does not
depend on how many worker processes ran it.
"""

from __future__ import annotations

import enum
import functools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .arx_core import add_raw, check_width, parity, weight, width_mask
from .ced import InputParities, ParitySource, Scheme, classic_syndrome, gbpp, gbpp_syndromes
from .quarterround import (
    DEFAULT_SCHEDULE, INPUTS, INTERMEDIATES, OUTPUTS, TAPS, FaultSpec, Signal, join_block, quarterround,
)

CHUNK = 1 << 16
MAX_EXHAUSTIVE_INPUT_BITS = 20
MAX_EXHAUSTIVE_MASK_BITS = 20
MAX_SEARCH_WIDTH = 8


class ErrorPolicy(str, enum.Enum):
    ODD_EXHAUSTIVE = "odd-exhaustive"
    ODD_RANDOM = "odd-random"
    SINGLE_BIT = "single-bit"
    EVEN_RANDOM = "even-random"

    @property
    def random(self) -> bool:
        return self in (ErrorPolicy.ODD_RANDOM, ErrorPolicy.EVEN_RANDOM)


class InputPolicy(str, enum.Enum):
    EXHAUSTIVE = "exhaustive"
    RANDOM = "random"


class Coverage(str, enum.Enum):
    COVERED = "covered"        # claimed: every odd-weight error detected
    UNCOVERED = "uncovered"    # claimed: not detected
    UNCLAIMED = "unclaimed"


EXPECTATIONS = {
    Scheme.CLASSIC: {
        **{s: Coverage.COVERED for s in (Signal.INPUT_BLOCK, *INPUTS, Signal.B0, Signal.C0, Signal.B1,
                                         Signal.B2, Signal.D2, Signal.B_OUT, Signal.D_OUT)},
        **{s: Coverage.UNCOVERED for s in (Signal.A0, Signal.D0, Signal.D1, Signal.A_OUT, Signal.C_OUT)},
    },
    Scheme.GBPP: {s: Coverage.COVERED for s in (*INTERMEDIATES, *TAPS, *OUTPUTS)},
}


def expectation(scheme: Scheme, signal: Signal) -> Coverage:
    return EXPECTATIONS[Scheme(scheme)].get(signal, Coverage.UNCLAIMED)


@dataclass(frozen=True)
class Probe:
    """What a single trial evaluation needs to know."""

    width: int
    scheme: Scheme
    schedule: tuple = DEFAULT_SCHEDULE
    gbpp_parities: ParitySource = ParitySource.COMPUTED_LOCAL


@dataclass(frozen=True)
class CampaignConfig:
    width: int
    scheme: Scheme
    signals: tuple
    errors: ErrorPolicy = ErrorPolicy.ODD_EXHAUSTIVE
    inputs: InputPolicy = InputPolicy.EXHAUSTIVE
    samples: int = 0
    seed: int = 0
    schedule: tuple = DEFAULT_SCHEDULE
    gbpp_parities: ParitySource = ParitySource.COMPUTED_LOCAL

    def __post_init__(self) -> None:
        check_width(self.width)
        for name, enum_cls in (("scheme", Scheme), ("errors", ErrorPolicy), ("inputs", InputPolicy),
                               ("gbpp_parities", ParitySource)):
            object.__setattr__(self, name, enum_cls(getattr(self, name)))
        sigs = tuple(Signal(s) if not isinstance(s, Signal) else s for s in self.signals)
        if not sigs:
            raise ValueError("signal set is empty")
        if len(set(sigs)) != len(sigs):
            raise ValueError("signal set has duplicates")
        object.__setattr__(self, "signals", tuple(s for s in Signal if s in sigs))
        object.__setattr__(self, "schedule", tuple(int(r) for r in self.schedule))
        if self.width < 4:
            raise ValueError("campaigns need width >= 4")
        if self.inputs is InputPolicy.EXHAUSTIVE:
            if 4 * self.width > MAX_EXHAUSTIVE_INPUT_BITS:
                raise ValueError(f"exhaustive inputs need 4*width <= {MAX_EXHAUSTIVE_INPUT_BITS}")
        elif self.samples <= 0:
            raise ValueError("random inputs need samples > 0")
        if self.errors is ErrorPolicy.ODD_EXHAUSTIVE:
            wide = [s.name for s in self.signals if s.mask_width(self.width) > MAX_EXHAUSTIVE_MASK_BITS]
            if wide:
                raise ValueError(f"odd-exhaustive masks too wide for {', '.join(wide)}; use odd-random")

    @property
    def probe(self) -> Probe:
        return Probe(self.width, self.scheme, self.schedule, self.gbpp_parities)

    @property
    def n_inputs(self) -> int:
        return 1 << (4 * self.width) if self.inputs is InputPolicy.EXHAUSTIVE else self.samples

    @property
    def n_chunks(self) -> int:
        return -(-self.n_inputs // CHUNK)

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "scheme": self.scheme.value,
            "signals": [s.value for s in self.signals],
            "errors": self.errors.value,
            "inputs": self.inputs.value,
            "samples": self.samples,
            "seed": self.seed,
            "schedule": list(self.schedule),
            "gbpp_parities": self.gbpp_parities.value,
        }


@dataclass
class Tally:
    trials: int = 0
    injected_odd: int = 0
    detected_odd: int = 0
    injected_even: int = 0
    detected_even: int = 0
    comparator_hits: dict = field(default_factory=dict)
    witness: Optional[dict] = None   # first undetected odd-weight trial in scan order

    def merge(self, other: "Tally") -> "Tally":
        hits = dict(self.comparator_hits)
        for k, v in other.comparator_hits.items():
            hits[k] = hits.get(k, 0) + v
        return Tally(
            self.trials + other.trials,
            self.injected_odd + other.injected_odd,
            self.detected_odd + other.detected_odd,
            self.injected_even + other.injected_even,
            self.detected_even + other.detected_even,
            hits,
            self.witness if self.witness is not None else other.witness,
        )


@dataclass
class SignalRow:
    signal: Signal
    expected: Coverage
    tally: Tally

    @staticmethod
    def _rate(hit: int, n: int) -> Optional[float]:
        return hit / n if n else None

    @property
    def detection_rate_odd(self) -> Optional[float]:
        return self._rate(self.tally.detected_odd, self.tally.injected_odd)

    @property
    def detection_rate_even(self) -> Optional[float]:
        return self._rate(self.tally.detected_even, self.tally.injected_even)

    def to_dict(self) -> dict:
        t = self.tally
        return {
            "signal": self.signal.value,
            "expected": self.expected.value,
            "trials": t.trials,
            "injected_odd": t.injected_odd,
            "detected_odd": t.detected_odd,
            "injected_even": t.injected_even,
            "detected_even": t.detected_even,
            "detection_rate_odd": self.detection_rate_odd,
            "detection_rate_even": self.detection_rate_even,
            "comparator_hits": dict(sorted(t.comparator_hits.items())),
            "odd_miss_witness": t.witness,
        }


@dataclass
class CoverageReport:
    config: CampaignConfig
    rows: list
    carry_error_census: Optional[dict] = None

    @property
    def scheme(self) -> Scheme:
        return self.config.scheme

    def row(self, signal: Signal) -> SignalRow:
        for r in self.rows:
            if r.signal is signal:
                return r
        raise KeyError(signal)

    def to_dict(self) -> dict:
        return {
            "tool": "chacha-ced",
            "version": __version__,
            "scheme": self.scheme.value,
            "config": self.config.to_dict(),
            "rows": [r.to_dict() for r in self.rows],
            "carry_error_census": self.carry_error_census,
        }

    CSV_FIELDS = ("signal", "expected", "trials", "injected_odd", "detected_odd", "injected_even",
                  "detected_even", "detection_rate_odd", "detection_rate_even")

    def csv_rows(self) -> list:
        return [{k: r.to_dict()[k] for k in self.CSV_FIELDS} for r in self.rows]


# ---- trial generation ----

def _chunk_rng(seed: int, signal: Signal, chunk: int) -> np.random.Generator:
    ordinal = list(Signal).index(signal)
    return np.random.default_rng(np.random.SeedSequence([seed, ordinal, chunk]))


def _uniform(rng: np.random.Generator, bits: int, n: int) -> np.ndarray:
    if bits == 64:
        return rng.integers(0, np.iinfo(np.uint64).max, size=n, dtype=np.uint64, endpoint=True)
    return rng.integers(0, 1 << bits, size=n, dtype=np.uint64)


def _chunk_inputs(cfg: CampaignConfig, signal: Signal, chunk: int, rng) -> tuple:
    lo = chunk * CHUNK
    hi = min(cfg.n_inputs, lo + CHUNK)
    w, m = cfg.width, width_mask(cfg.width)
    if cfg.inputs is InputPolicy.EXHAUSTIVE:
        idx = np.arange(lo, hi, dtype=np.uint64)
        return tuple((idx >> np.uint64(k * w)) & np.uint64(m) for k in range(4))
    return tuple(_uniform(rng, w, hi - lo) for _ in range(4))


def enumerate_masks(bits: int, policy: ErrorPolicy) -> list:
    """Deterministic mask list for the exhaustive policies."""
    if policy is ErrorPolicy.SINGLE_BIT:
        return [1 << i for i in range(bits)]
    if policy is ErrorPolicy.ODD_EXHAUSTIVE:
        return [e for e in range(1, 1 << bits) if e.bit_count() & 1]
    raise ValueError(f"{policy.value} masks are drawn, not enumerated")


def _force_weight_parity(words: list, want_odd: bool) -> list:
    """Flip bit 0 of the first word where the total weight parity is wrong."""
    total = sum(weight(x) for x in words) & 1
    fix = (total ^ int(want_odd)).astype(np.uint64)
    words[0] = words[0] ^ fix
    if not want_odd:
        # a zero mask is no error at all; replace it with the lowest even pattern
        zero = np.logical_and.reduce([x == 0 for x in words])
        words[0] = np.where(zero, np.uint64(3), words[0])
    return words


def random_masks(rng: np.random.Generator, signal: Signal, width: int, n: int, policy: ErrorPolicy):
    """Uniform masks with the low bit flipped to reach the wanted weight parity."""
    want_odd = policy is ErrorPolicy.ODD_RANDOM
    if signal is Signal.INPUT_BLOCK:
        return tuple(_force_weight_parity([_uniform(rng, width, n) for _ in range(4)], want_odd))
    bits = signal.mask_width(width)
    return _force_weight_parity([_uniform(rng, bits, n)], want_odd)[0]


def _mask_weight(mask):
    if isinstance(mask, tuple):
        return sum(weight(x) for x in mask)
    return weight(mask)


# ---- evaluation ----

def _syndromes(p: Probe, t, clean: tuple) -> tuple:
    if p.scheme is Scheme.CLASSIC:
        return (classic_syndrome(t, InputParities.of(*clean)),)
    if p.gbpp_parities is ParitySource.COMPUTED_LOCAL:
        return gbpp_syndromes(t, InputParities.local(t))
    return gbpp_syndromes(t, InputParities.of(*clean))


@functools.lru_cache(maxsize=4)
def _input_table(p: Probe) -> tuple:
    """Syndromes of fault-free runs on every input tuple, with zero supplied parities.

    Supplied parities enter both checkers only through XOR, so the syndrome of
    a trial is this table entry XOR the contribution of the supplied bits.
    """
    idx = np.arange(1 << (4 * p.width), dtype=np.uint64)
    m = np.uint64(width_mask(p.width))
    words = tuple((idx >> np.uint64(k * p.width)) & m for k in range(4))
    t = quarterround(*words, schedule=p.schedule, width=p.width)
    zero = InputParities(0, 0, 0, 0, 0)
    if p.scheme is Scheme.CLASSIC:
        return (classic_syndrome(t, zero),)
    if p.gbpp_parities is ParitySource.COMPUTED_LOCAL:
        return gbpp_syndromes(t, InputParities.local(t))
    return gbpp_syndromes(t, zero)


def _supplied_contribution(p: Probe, clean: tuple) -> tuple:
    ip = InputParities.of(*clean)
    if p.scheme is Scheme.CLASSIC:
        return (ip.p_block,)
    if p.gbpp_parities is ParitySource.COMPUTED_LOCAL:
        return (0, 0, 0, 0)
    return gbpp(ip, 0, 0, 0, 0)


def _flat_mask(mask, width: int):
    if isinstance(mask, tuple):
        return join_block(*mask, width)
    return mask


def prepare(p: Probe, signal: Signal, clean: tuple) -> Optional[tuple]:
    """Per-batch data reused across masks; only input-block faults need any."""
    if signal is not Signal.INPUT_BLOCK or 4 * p.width > MAX_EXHAUSTIVE_INPUT_BITS:
        return None
    index = join_block(*clean, p.width).astype(np.intp)
    return index, _supplied_contribution(p, clean), _input_table(p)


def evaluate(p: Probe, signal: Signal, clean: tuple, mask, ctx: Optional[tuple] = None) -> tuple:
    """Per-comparator syndrome arrays for one mask (scalar or per-trial array)."""
    if ctx is None:
        ctx = prepare(p, signal, clean)
    if ctx is not None:
        # an input-block fault is a fault-free run on the corrupted tuple
        index, extra, table = ctx
        flat = _flat_mask(mask, p.width)
        y = index ^ (flat.astype(np.intp) if isinstance(flat, np.ndarray) else int(flat))
        return tuple(col[y] ^ e for col, e in zip(table, extra))
    t = quarterround(*clean, schedule=p.schedule, faults=(FaultSpec(signal, mask),), width=p.width)
    return _syndromes(p, t, clean)


def _detected(syn: tuple) -> np.ndarray:
    return functools.reduce(np.logical_or, (np.asarray(s, dtype=bool) for s in syn))


def _pick(x, i: int) -> int:
    return int(x[i]) if isinstance(x, np.ndarray) else int(x)


COMPARATOR_NAMES = {Scheme.CLASSIC: ("single",), Scheme.GBPP: ("a", "b", "c", "d")}


def _tally_batch(p: Probe, clean: tuple, mask, syn: tuple, tally: Tally) -> None:
    n = len(clean[0])
    detected = np.broadcast_to(_detected(syn), (n,))
    w = _mask_weight(mask)
    tally.trials += n
    if isinstance(w, np.ndarray):
        odd = (w & 1).astype(bool)
        n_odd = int(odd.sum())
        tally.injected_odd += n_odd
        tally.detected_odd += int(np.count_nonzero(detected & odd))
        tally.injected_even += n - n_odd
        tally.detected_even += int(np.count_nonzero(detected & ~odd))
    else:
        odd = bool(w & 1)
        hits = int(np.count_nonzero(detected))
        if odd:
            tally.injected_odd += n
            tally.detected_odd += hits
        else:
            tally.injected_even += n
            tally.detected_even += hits
    for name, s in zip(COMPARATOR_NAMES[p.scheme], syn):
        hits = int(np.count_nonzero(s)) * (1 if np.ndim(s) else n)
        tally.comparator_hits[name] = tally.comparator_hits.get(name, 0) + hits
    if tally.witness is None and np.any(odd):
        miss = np.flatnonzero(odd & ~detected)
        if miss.size:
            i = int(miss[0])
            if isinstance(mask, tuple):
                flat = join_block(*(_pick(x, i) for x in mask), p.width)
            else:
                flat = _pick(mask, i)
            tally.witness = {"inputs": [f"{int(x[i]):#x}" for x in clean], "mask": f"{flat:#x}"}


def run_chunk(cfg: CampaignConfig, signal: Signal, chunk: int) -> Tally:
    rng = _chunk_rng(cfg.seed, signal, chunk)
    clean = _chunk_inputs(cfg, signal, chunk, rng)
    tally = Tally()
    n = len(clean[0])
    if cfg.errors is ErrorPolicy.EVEN_RANDOM and signal.is_tap:
        return tally   # a one-bit wire has no nonzero even-weight error
    if cfg.errors.random:
        masks: Iterable = [random_masks(rng, signal, cfg.width, n, cfg.errors)]
    else:
        masks = enumerate_masks(signal.mask_width(cfg.width), cfg.errors)
    probe = cfg.probe
    ctx = prepare(probe, signal, clean)
    for mask in masks:
        syn = evaluate(probe, signal, clean, mask, ctx)
        _tally_batch(probe, clean, mask, syn, tally)
    return tally


def _run_task(args) -> Tally:
    return run_chunk(*args)


def run_campaign(cfg: CampaignConfig, jobs: int = 1) -> CoverageReport:
    tasks = [(cfg, s, c) for s in cfg.signals for c in range(cfg.n_chunks)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]
    rows = []
    for k, s in enumerate(cfg.signals):
        part = results[k * cfg.n_chunks:(k + 1) * cfg.n_chunks]
        tally = functools.reduce(Tally.merge, part, Tally())
        rows.append(SignalRow(s, expectation(cfg.scheme, s), tally))
    census = carry_error_census(cfg.width) if cfg.width <= MAX_SEARCH_WIDTH else None
    return CoverageReport(cfg, rows, census)


# ---- classification ----

@dataclass
class Classification:
    passed: bool
    failures: list
    checked: list

    def to_dict(self) -> dict:
        return asdict(self)


def classify_report(report: CoverageReport) -> Classification:
    """Compare measured odd-weight detection rates with the claimed coverage.

    Covered rows must reach exactly 1.0, uncovered rows must stay below 1.0;
    unclaimed rows are reported but not judged.
    """
    failures, checked = [], []
    for r in report.rows:
        exp = expectation(report.scheme, r.signal)
        if exp is Coverage.UNCLAIMED:
            continue
        rate = r.detection_rate_odd
        if rate is None:
            continue
        checked.append(r.signal.value)
        if exp is Coverage.COVERED and rate != 1.0:
            failures.append(f"{r.signal.value}: claimed covered, measured odd rate {rate:.6f}")
        elif exp is Coverage.UNCOVERED and rate >= 1.0:
            failures.append(f"{r.signal.value}: claimed undetected, but every odd error was caught")
    if not checked:
        raise ValueError("report has no odd-weight rows with a coverage claim to classify")
    return Classification(not failures, failures, checked)


# ---- witness search ----

def find_counterexample(width: int, scheme: Scheme, signal: Signal,
                        schedule: Sequence[int] = DEFAULT_SCHEDULE) -> Optional[dict]:
    """First undetected odd-weight (inputs, mask) in scan order, or None.

    Scan order: input chunks ascending, masks ascending within a chunk, then
    input index.  Exhaustive, so only practical for small widths.
    """
    check_width(width)
    if width > MAX_SEARCH_WIDTH:
        raise ValueError(f"exhaustive search needs width <= {MAX_SEARCH_WIDTH}")
    signal = Signal.parse(signal) if isinstance(signal, str) else signal
    probe = Probe(width, Scheme(scheme), tuple(schedule))
    if signal.mask_width(width) > MAX_EXHAUSTIVE_MASK_BITS:
        raise ValueError(f"too many odd masks on {signal.name} at width {width}")
    masks = enumerate_masks(signal.mask_width(width), ErrorPolicy.ODD_EXHAUSTIVE)
    n_inputs = 1 << (4 * width)
    m = np.uint64(width_mask(width))
    for lo in range(0, n_inputs, CHUNK):
        idx = np.arange(lo, min(n_inputs, lo + CHUNK), dtype=np.uint64)
        clean = tuple((idx >> np.uint64(k * width)) & m for k in range(4))
        ctx = prepare(probe, signal, clean)
        for mask in masks:
            miss = np.flatnonzero(~_detected(evaluate(probe, signal, clean, mask, ctx)))
            if miss.size:
                i = int(miss[0])
                return {"inputs": tuple(int(x[i]) for x in clean), "mask": mask}
    return None


# ---- carry-error census ----

def carry_error_census(width: int) -> dict:
    """How an odd error on one adder operand shows up in the carry vector.

    For every (a, b) and odd e, e_c = cv(a ^ e, b) ^ cv(a, b).  Records how
    often e_c vanishes or differs in weight from e, and checks the parity
    identity for the corrupted sum.
    """
    check_width(width)
    if width > MAX_SEARCH_WIDTH:
        raise ValueError(f"census is exhaustive; width must be <= {MAX_SEARCH_WIDTH}")
    m = np.uint64(width_mask(width))
    idx = np.arange(1 << (2 * width), dtype=np.uint64)
    a, b = idx & m, (idx >> np.uint64(width)) & m
    _, cv = add_raw(a, b, width)
    total = zero = differs = violations = 0
    example_zero = example_differs = None
    for e in enumerate_masks(width, ErrorPolicy.ODD_EXHAUSTIVE):
        ae = a ^ np.uint64(e)
        s_bad, cv_bad = add_raw(ae, b, width)
        ec = cv_bad ^ cv
        wc = weight(ec)
        violations += int(np.count_nonzero(parity(s_bad) != (parity(ae) ^ parity(b) ^ parity(cv_bad))))
        z = wc == 0
        d = wc != e.bit_count()
        total += len(a)
        zero += int(z.sum())
        differs += int(d.sum())
        if example_zero is None and z.any():
            i = int(np.flatnonzero(z)[0])
            example_zero = {"a": f"{int(a[i]):#x}", "b": f"{int(b[i]):#x}", "e": f"{e:#x}", "e_c": "0x0"}
        if example_differs is None and d.any():
            i = int(np.flatnonzero(d)[0])
            example_differs = {"a": f"{int(a[i]):#x}", "b": f"{int(b[i]):#x}", "e": f"{e:#x}",
                               "e_c": f"{int(ec[i]):#x}"}
    return {
        "width": width,
        "cases": total,
        "e_c_zero": zero,
        "e_c_weight_differs": differs,
        "parity_identity_violations": violations,
        "example_zero": example_zero,
        "example_weight_differs": example_differs,
    }


def all_signals() -> tuple:
    return tuple(Signal)


def parse_signals(spec: str) -> tuple:
    if spec.strip().lower() == "all":
        return all_signals()
    return tuple(Signal.parse(s) for s in spec.split(",") if s.strip())
