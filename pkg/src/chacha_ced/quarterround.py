"""Traced ChaCha Quarterround with per-wire fault hooks.

Every named wire of the datapath is recorded in a :class:`QrTrace`.  A fault
XORs its mask onto a wire at the moment that wire is produced, so the error
reaches every consumer of the wire (downstream adders, rotations, outputs).

The datapath is written once over "raw" operands: Python ints for single
evaluations, numpy ``uint64`` arrays for batched campaigns.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields
from typing import Iterable, Optional, Sequence

import numpy as np

from .arx_core import Raw, Word, add_raw, check_width, parity, rotl_raw, width_mask

DEFAULT_SCHEDULE = (16, 12, 8, 7)


class Signal(enum.Enum):
    A = "a"
    B = "b"
    C = "c"
    D = "d"
    A0 = "a0"
    B0 = "b0"
    B1 = "b1"
    B2 = "b2"
    C0 = "c0"
    D0 = "d0"
    D1 = "d1"
    D2 = "d2"
    ALPHA = "alpha"
    BETA = "beta"
    GAMMA = "gamma"
    DELTA = "delta"
    A_OUT = "a_out"
    B_OUT = "b_out"
    C_OUT = "c_out"
    D_OUT = "d_out"
    INPUT_BLOCK = "input_block"

    @classmethod
    def parse(cls, name: str) -> "Signal":
        key = name.strip()
        for s in cls:
            if key.upper() == s.name or key.lower() == s.value:
                return s
        raise ValueError(f"unknown signal {name!r}")

    @property
    def is_tap(self) -> bool:
        return self in TAPS

    def mask_width(self, width: int) -> int:
        """Bit width of an error mask on this wire."""
        if self in TAPS:
            return 1
        if self is Signal.INPUT_BLOCK:
            return 4 * width
        return width


INPUTS = (Signal.A, Signal.B, Signal.C, Signal.D)
INTERMEDIATES = (Signal.A0, Signal.B0, Signal.C0, Signal.D0, Signal.B1, Signal.B2, Signal.D1, Signal.D2)
TAPS = (Signal.ALPHA, Signal.BETA, Signal.GAMMA, Signal.DELTA)
OUTPUTS = (Signal.A_OUT, Signal.B_OUT, Signal.C_OUT, Signal.D_OUT)


@dataclass(frozen=True)
class FaultSpec:
    """An XOR error mask on one named wire."""

    signal: Signal
    mask: Raw

    @property
    def weight(self):
        parts = self.mask if isinstance(self.mask, tuple) else (self.mask,)
        total = 0
        for m in parts:
            total = total + (np.bitwise_count(m) if isinstance(m, np.ndarray) else int(m).bit_count())
        return total


@dataclass
class QrTrace:
    """Every wire of one Quarterround evaluation.

    Word-valued fields hold raw ints (or arrays for batched runs); ``a``..``d``
    are the inputs as the datapath saw them, after any input fault.
    """

    width: int
    schedule: tuple
    a: Raw
    b: Raw
    c: Raw
    d: Raw
    a0: Raw
    b0: Raw
    b1: Raw
    b2: Raw
    c0: Raw
    d0: Raw
    d1: Raw
    d2: Raw
    alpha: Raw
    beta: Raw
    gamma: Raw
    delta: Raw
    a_out: Raw
    b_out: Raw
    c_out: Raw
    d_out: Raw
    faults: tuple = field(default=())

    WORD_FIELDS = ("a", "b", "c", "d", "a0", "b0", "b1", "b2", "c0", "d0", "d1", "d2",
                   "a_out", "b_out", "c_out", "d_out")
    TAP_FIELDS = ("alpha", "beta", "gamma", "delta")

    @property
    def inputs(self) -> tuple:
        return self.a, self.b, self.c, self.d

    @property
    def outputs(self) -> tuple:
        return self.a_out, self.b_out, self.c_out, self.d_out

    def word(self, name: str) -> Word:
        return Word(int(getattr(self, name)), self.width)

    def to_dict(self) -> dict:
        out = {"width": self.width, "schedule": list(self.schedule)}
        for name in self.WORD_FIELDS:
            out[name] = self.word(name).hex()
        for name in self.TAP_FIELDS:
            out[name] = int(getattr(self, name))
        out["faults"] = [
            {"signal": f.signal.value, "mask": _mask_hex(f, self.width)}
            for f in self.faults
        ]
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QrTrace):
            return NotImplemented
        for f in fields(self):
            x, y = getattr(self, f.name), getattr(other, f.name)
            if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
                if not np.array_equal(x, y):
                    return False
            elif f.name != "faults" and x != y:
                return False
        return True


def _mask_hex(f: FaultSpec, width: int) -> str:
    m = f.mask
    if isinstance(m, tuple):
        m = join_block(*(int(x) for x in m), width)
    return Word(int(m), f.signal.mask_width(width)).hex()


def _effective_schedule(schedule: Sequence[int], width: int) -> tuple:
    if len(schedule) != 4:
        raise ValueError("rotation schedule needs exactly four amounts")
    if any(r < 0 for r in schedule):
        raise ValueError("rotation amounts must be non-negative")
    return tuple(int(r) % width for r in schedule)


def _check_mask(m, limit: int, sig: Signal) -> None:
    if isinstance(m, np.ndarray):
        bad = m.size and int(m.max()) > limit
    else:
        bad = not 0 <= int(m) <= limit
    if bad:
        raise ValueError(f"mask for {sig.name} does not fit in its wire")


def _fault_table(faults: Iterable[FaultSpec], width: int) -> dict:
    table: dict = {}
    for f in faults:
        if f.signal in table:
            raise ValueError(f"duplicate fault on signal {f.signal.name}")
        m = f.mask
        if f.signal is Signal.INPUT_BLOCK and isinstance(m, tuple):
            if len(m) != 4:
                raise ValueError("INPUT_BLOCK mask tuple needs one mask per input word")
            for part in m:
                _check_mask(part, width_mask(width), f.signal)
        else:
            _check_mask(m, width_mask(f.signal.mask_width(width)), f.signal)
        table[f.signal] = m
    return table


def split_block_mask(mask, width: int) -> tuple:
    """Split a 4w-bit input mask into per-word masks (a takes the low w bits).

    A 4-tuple is taken as already split.
    """
    if isinstance(mask, tuple):
        return mask
    m = width_mask(width)
    return tuple((mask >> (k * width)) & m for k in range(4))


def join_block(a: Raw, b: Raw, c: Raw, d: Raw, width: int) -> Raw:
    return a | (b << width) | (c << (2 * width)) | (d << (3 * width))


def _raw(x, width: Optional[int]):
    if isinstance(x, Word):
        return x.value, x.width
    return x, width


def quarterround(
    a, b, c, d,
    schedule: Sequence[int] = DEFAULT_SCHEDULE,
    faults: Iterable[FaultSpec] = (),
    width: Optional[int] = None,
) -> QrTrace:
    """Run one Quarterround and return its full trace.

    Inputs may be :class:`Word` (width taken from them), ints or uint64 arrays
    (``width`` required).  Faults on ALPHA..DELTA flip only the tap bit handed
    to the predictors; the datapath sums are unaffected.
    """
    raws = [_raw(x, width) for x in (a, b, c, d)]
    widths = {w for _, w in raws}
    if len(widths) != 1 or None in widths:
        raise ValueError(f"operand widths must be given and equal, got {sorted(widths, key=str)}")
    w = check_width(widths.pop())
    a, b, c, d = (v for v, _ in raws)
    if isinstance(a, np.ndarray) or any(isinstance(v, np.ndarray) for v in (b, c, d)):
        a, b, c, d = np.broadcast_arrays(*(np.asarray(v, dtype=np.uint64) for v in (a, b, c, d)))
    faults = tuple(faults)
    table = _fault_table(faults, w)
    r0, r1, r2, r3 = _effective_schedule(schedule, w)

    def hit(sig: Signal, x):
        m = table.get(sig)
        return x if m is None else x ^ m

    if Signal.INPUT_BLOCK in table:
        ma, mb, mc, md = split_block_mask(table[Signal.INPUT_BLOCK], w)
        a, b, c, d = a ^ ma, b ^ mb, c ^ mc, d ^ md
    a, b, c, d = hit(Signal.A, a), hit(Signal.B, b), hit(Signal.C, c), hit(Signal.D, d)

    a0, cv = add_raw(a, b, w)
    a0 = hit(Signal.A0, a0)
    alpha = hit(Signal.ALPHA, parity(cv))
    d0 = hit(Signal.D0, d ^ a0)
    d1 = hit(Signal.D1, rotl_raw(d0, r0, w))
    c0, cv = add_raw(c, d1, w)
    c0 = hit(Signal.C0, c0)
    beta = hit(Signal.BETA, parity(cv))
    b0 = hit(Signal.B0, b ^ c0)
    b1 = hit(Signal.B1, rotl_raw(b0, r1, w))
    a_out, cv = add_raw(a0, b1, w)
    a_out = hit(Signal.A_OUT, a_out)
    gamma = hit(Signal.GAMMA, parity(cv))
    d2 = hit(Signal.D2, d1 ^ a_out)
    d_out = hit(Signal.D_OUT, rotl_raw(d2, r2, w))
    c_out, cv = add_raw(c0, d_out, w)
    c_out = hit(Signal.C_OUT, c_out)
    delta = hit(Signal.DELTA, parity(cv))
    b2 = hit(Signal.B2, b1 ^ c_out)
    b_out = hit(Signal.B_OUT, rotl_raw(b2, r3, w))

    return QrTrace(
        width=w, schedule=(r0, r1, r2, r3),
        a=a, b=b, c=c, d=d,
        a0=a0, b0=b0, b1=b1, b2=b2, c0=c0, d0=d0, d1=d1, d2=d2,
        alpha=alpha, beta=beta, gamma=gamma, delta=delta,
        a_out=a_out, b_out=b_out, c_out=c_out, d_out=d_out,
        faults=faults,
    )


def qr_output_parity(t: QrTrace):
    """Parity of the 4w-bit output block (a' b' c' d')."""
    return parity(t.a_out) ^ parity(t.b_out) ^ parity(t.c_out) ^ parity(t.d_out)

