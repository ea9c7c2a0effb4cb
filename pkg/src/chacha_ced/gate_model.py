"""Gate-count accounting for the checking logic of both schemes.

Only the detection overhead is counted; the datapath's own adders are not.
Parity trees over n bits are taken as n-1 two-input XOR gates.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class GateTally:
    scheme: str
    width: int
    breakdown: dict = field(default_factory=dict)
    or4: int = 0

    @property
    def total(self) -> int:
        return sum(self.breakdown.values())

    @property
    def xor2(self) -> int:
        return self.total - self.or4

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "width": self.width,
            "xor2": self.xor2,
            "or4": self.or4,
            "total": self.total,
            "breakdown": dict(self.breakdown),
        }


def _check(width: int) -> None:
    if width < 2:
        raise ValueError("width must be at least 2")


def count_classic(width: int = 32) -> GateTally:
    """Single-bit predictor p(b) ^ p(c) ^ beta plus one output parity tree."""
    _check(width)
    return GateTally("classic", width, {
        # p(b) and p(c) trees plus the two XORs folding in beta
        "input_parities": 2 * (width - 1) + 2,
        "output_parity": 4 * width - 1,
        "comparator": 1,
    })


def count_gbpp(width: int = 32) -> GateTally:
    """Per-word parities in and out, 12 XORs for the eight update lines, 4 comparators + OR4."""
    _check(width)
    return GateTally("gbpp", width, {
        "input_parities": 4 * (width - 1),
        "output_parities": 4 * (width - 1),
        # four three-operand updates (2 gates) and four two-operand updates (1 gate)
        "predictor": 4 * 2 + 4 * 1,
        "comparators": 4,
        "merge_or4": 1,
    }, or4=1)


def count(scheme: str, width: int = 32) -> GateTally:
    if scheme == "classic":
        return count_classic(width)
    if scheme == "gbpp":
        return count_gbpp(width)
    raise ValueError(f"unknown scheme {scheme!r}")
