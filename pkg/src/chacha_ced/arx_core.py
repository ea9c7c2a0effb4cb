"""Width-parametric ARX words: XOR, modular addition with carry tracing, rotation, parity.

The low-level helpers (``add_raw``, ``rotl_raw``, ``parity``) work on plain
Python ints and on numpy unsigned-integer arrays alike, so the same code
drives single traced evaluations and vectorized campaigns.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

MIN_WIDTH = 2
MAX_WIDTH = 64

Raw = Union[int, np.ndarray]


def width_mask(width: int) -> int:
    return (1 << width) - 1


def check_width(width: int) -> int:
    if not isinstance(width, (int, np.integer)) or not MIN_WIDTH <= width <= MAX_WIDTH:
        raise ValueError(f"word width must be an integer in [{MIN_WIDTH}, {MAX_WIDTH}], got {width!r}")
    return int(width)


@dataclass(frozen=True, order=True)
class Word:
    """An unsigned ``width``-bit value; bit 0 is the least significant bit."""

    value: int
    width: int = 32

    def __post_init__(self) -> None:
        check_width(self.width)
        if not 0 <= self.value <= width_mask(self.width):
            raise ValueError(f"value {self.value:#x} does not fit in {self.width} bits")

    @classmethod
    def wrap(cls, value: int, width: int = 32) -> "Word":
        """Build a word, reducing ``value`` modulo 2**width."""
        return cls(int(value) & width_mask(width), width)

    @classmethod
    def parse(cls, text: str, width: int = 32) -> "Word":
        """Parse ``0x``-prefixed (or bare) hex."""
        s = text.strip().lower()
        if s.startswith("0x"):
            s = s[2:]
        return cls(int(s, 16), width)

    @property
    def hex_digits(self) -> int:
        return (self.width + 3) // 4

    def hex(self) -> str:
        return f"0x{self.value:0{self.hex_digits}x}"

    def __str__(self) -> str:
        return self.hex()

    def __int__(self) -> int:
        return self.value

    def __index__(self) -> int:
        return self.value

    def bit(self, i: int) -> int:
        return (self.value >> i) & 1

    def weight(self) -> int:
        return self.value.bit_count()


@dataclass(frozen=True)
class AddResult:
    sum: Word
    carry_vector: Word
    carry_parity: int


def _same_width(a: Word, b: Word) -> int:
    if a.width != b.width:
        raise ValueError(f"width mismatch: {a.width} vs {b.width}")
    return a.width


# ---- raw helpers (int or ndarray) ----

def parity(x: Union[Word, Raw]) -> Union[int, np.ndarray]:
    """XOR of all bits of ``x`` (popcount mod 2)."""
    if isinstance(x, Word):
        return x.value.bit_count() & 1
    if isinstance(x, np.ndarray):
        return (np.bitwise_count(x) & 1).astype(np.uint8)
    return int(x).bit_count() & 1


def weight(x: Raw) -> Union[int, np.ndarray]:
    if isinstance(x, np.ndarray):
        return np.bitwise_count(x)
    return int(x).bit_count()


def add_raw(a: Raw, b: Raw, width: int) -> tuple:
    """Return ``(sum, carry_vector)`` of the ``width``-bit ripple-carry addition.

    ``carry_vector`` holds at bit i the carry *into* position i, so bit 0 is
    always 0 and the carry out of the top bit is dropped.  Since each sum bit
    is ``a_i ^ b_i ^ c_i``, the carry vector is exactly ``a ^ b ^ sum``.
    """
    m = width_mask(width)
    s = (a + b) & m
    return s, (a ^ b ^ s) & m


def rotl_raw(x: Raw, r: int, width: int) -> Raw:
    r %= width
    if r == 0:
        return x
    m = width_mask(width)
    return ((x << r) | (x >> (width - r))) & m


# ---- Word-level operations ----

def xor(a: Word, b: Word) -> Word:
    w = _same_width(a, b)
    return Word(a.value ^ b.value, w)


def add_traced(a: Word, b: Word) -> AddResult:
    w = _same_width(a, b)
    s, cv = add_raw(a.value, b.value, w)
    return AddResult(Word(s, w), Word(cv, w), parity(cv))


def rotl(a: Word, r: int) -> Word:
    if r < 0:
        raise ValueError("rotation amount must be non-negative")
    return Word(rotl_raw(a.value, r, a.width), a.width)


def carry_vector_recurrence(a: Raw, b: Raw, width: int) -> Raw:
    """Carry-in vector built bit by bit from the ripple recurrence.

    c_0 = 0 and c_i = a_{i-1} b_{i-1} | (a_{i-1} ^ b_{i-1}) c_{i-1}.  Used to
    check ``add_raw`` and the parity identity independently of the sum.
    """
    cv = a & 0
    carry = a & 0
    for i in range(width):
        cv = cv | (carry << i)
        ai, bi = (a >> i) & 1, (b >> i) & 1
        carry = (ai & bi) | ((ai ^ bi) & carry)
    return cv


def carry_vector_as_printed(a: Raw, b: Raw, width: int) -> Raw:
    """Same-index recurrence c_i = a_i b_i | (a_i ^ b_i) c_{i-1}, c_0 = 0.

    Kept only to show that this indexing breaks the parity identity
    (a = b = 1 is the smallest counterexample).
    """
    cv = a & 0
    prev = a & 0
    for i in range(1, width):
        ai, bi = (a >> i) & 1, (b >> i) & 1
        prev = (ai & bi) | ((ai ^ bi) & prev)
        cv = cv | (prev << i)
    return cv
