"""Parity-based concurrent error detection for the Quarterround.

Two checkers consume a :class:`~chacha_ced.quarterround.QrTrace`:

* ``classic`` -- one predicted parity bit for the whole 4w-bit output,
  operated as a code-disjoint circuit (the input parity bit comes from
  upstream, so input errors stay visible);
* ``gbpp`` -- group-based prediction, one parity bit per output word,
  merged by a 4-way OR of comparators.

The syndrome helpers are vectorized; ``check_*`` wrap them into verdicts.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .arx_core import parity
from .quarterround import QrTrace, qr_output_parity


class Scheme(str, enum.Enum):
    CLASSIC = "classic"
    GBPP = "gbpp"


class ParitySource(str, enum.Enum):
    COMPUTED_LOCAL = "computed_local"
    SUPPLIED_UPSTREAM = "supplied_upstream"


@dataclass(frozen=True)
class InputParities:
    pa: object
    pb: object
    pc: object
    pd: object
    p_block: object
    source: ParitySource = ParitySource.SUPPLIED_UPSTREAM

    @classmethod
    def of(cls, a, b, c, d, source: ParitySource = ParitySource.SUPPLIED_UPSTREAM) -> "InputParities":
        pa, pb, pc, pd = parity(a), parity(b), parity(c), parity(d)
        return cls(pa, pb, pc, pd, pa ^ pb ^ pc ^ pd, source)

    @classmethod
    def local(cls, t: QrTrace) -> "InputParities":
        """Parities of the inputs the datapath actually consumed."""
        return cls.of(t.a, t.b, t.c, t.d, ParitySource.COMPUTED_LOCAL)


@dataclass
class CheckVerdict:
    scheme: Scheme
    detected: bool
    fired_comparators: frozenset = field(default_factory=frozenset)
    predicted: tuple = ()
    observed: tuple = ()

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme.value,
            "detected": self.detected,
            "fired": sorted(self.fired_comparators),
            "predicted": list(self.predicted),
            "observed": list(self.observed),
        }


def predict_qr_parity(t: QrTrace):
    """Predicted parity of the whole output: p(b) ^ p(c) ^ beta."""
    return parity(t.b) ^ parity(t.c) ^ t.beta


def predict_outputs_lemma(t: QrTrace) -> tuple:
    """Closed-form per-word output parities from input parities and carry taps."""
    return lemma_parities(parity(t.a), parity(t.b), parity(t.c), parity(t.d), t.alpha, t.beta, t.gamma, t.delta)


def lemma_parities(pa, pb, pc, pd, al, be, ga, de) -> tuple:
    return (
        pb ^ pc ^ pd ^ be ^ ga,
        pa ^ pb ^ pc ^ al ^ be ^ ga ^ de,
        pb ^ pd ^ ga ^ de,
        pa ^ pc ^ al ^ be ^ ga,
    )


def gbpp(ip: InputParities, alpha, beta, gamma, delta) -> tuple:
    """Group-based parity prediction: the Quarterround replayed on parity bits.

    XOR maps to XOR of parities, each modular add contributes its carry
    parity, and rotations are invisible.
    """
    pa, pb, pc, pd = ip.pa, ip.pb, ip.pc, ip.pd
    pa = pa ^ pb ^ alpha
    pd = pd ^ pa
    pc = pc ^ pd ^ beta
    pb = pb ^ pc
    pa = pa ^ pb ^ gamma
    pd = pd ^ pa
    pc = pc ^ pd ^ delta
    pb = pb ^ pc
    return pa, pb, pc, pd


def classic_prediction(t: QrTrace, ip: InputParities):
    """Code-disjoint form: p_block ^ p(a) ^ p(d) ^ beta, with a, d, beta from the trace."""
    return ip.p_block ^ parity(t.a) ^ parity(t.d) ^ t.beta


def classic_syndrome(t: QrTrace, ip: InputParities):
    return classic_prediction(t, ip) ^ qr_output_parity(t)


def gbpp_syndromes(t: QrTrace, ip: InputParities) -> tuple:
    predicted = gbpp(ip, t.alpha, t.beta, t.gamma, t.delta)
    return tuple(p ^ parity(o) for p, o in zip(predicted, t.outputs))


def check_classic(t: QrTrace, ip: InputParities) -> CheckVerdict:
    predicted = int(classic_prediction(t, ip))
    observed = int(qr_output_parity(t))
    fired = frozenset({"single"}) if predicted != observed else frozenset()
    return CheckVerdict(Scheme.CLASSIC, bool(fired), fired, (predicted,), (observed,))


def check_gbpp(t: QrTrace, ip: InputParities) -> CheckVerdict:
    predicted = tuple(int(p) for p in gbpp(ip, t.alpha, t.beta, t.gamma, t.delta))
    observed = tuple(int(parity(o)) for o in t.outputs)
    fired = frozenset(name for name, p, o in zip("abcd", predicted, observed) if p != o)
    return CheckVerdict(Scheme.GBPP, bool(fired), fired, predicted, observed)


def check(t: QrTrace, scheme: Scheme, clean_inputs: tuple) -> CheckVerdict:
    """Run ``scheme`` on ``t`` with the default parity sourcing.

    classic gets honest upstream parities of ``clean_inputs`` (pre-fault);
    gbpp computes its word parities locally from the trace.
    """
    if Scheme(scheme) is Scheme.CLASSIC:
        return check_classic(t, InputParities.of(*clean_inputs))
    return check_gbpp(t, InputParities.local(t))

