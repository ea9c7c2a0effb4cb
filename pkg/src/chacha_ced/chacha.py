"""ChaCha block function, keystream and XOR encryption on top of the traced Quarterround."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Sequence

from .ced import CheckVerdict, Scheme, check
from .quarterround import FaultSpec, quarterround

CONSTANTS = (0x61707865, 0x3320646E, 0x79622D32, 0x6B206574)
VALID_ROUNDS = (8, 12, 20)
BLOCK_BYTES = 64
M32 = 0xFFFFFFFF

# (a, b, c, d) state indices of the eight QR calls of one double round,
# columns first, then diagonals; row-major 4x4 layout.
COLUMN_QRS = ((0, 4, 8, 12), (1, 5, 9, 13), (2, 6, 10, 14), (3, 7, 11, 15))
DIAGONAL_QRS = ((0, 5, 10, 15), (1, 6, 11, 12), (2, 7, 8, 13), (3, 4, 9, 14))
DOUBLE_ROUND = COLUMN_QRS + DIAGONAL_QRS


class NonceLayout(str, enum.Enum):
    ORIGINAL = "orig"   # 64-bit counter, 64-bit nonce
    IETF = "ietf"       # 32-bit counter, 96-bit nonce

    @property
    def counter_bits(self) -> int:
        return 64 if self is NonceLayout.ORIGINAL else 32

    @property
    def nonce_bytes(self) -> int:
        return 8 if self is NonceLayout.ORIGINAL else 12


@dataclass(frozen=True)
class CipherParams:
    key: bytes
    nonce: bytes
    rounds: int = 20
    layout: NonceLayout = NonceLayout.IETF

    def __post_init__(self) -> None:
        if self.rounds not in VALID_ROUNDS:
            raise ValueError(f"rounds must be one of {VALID_ROUNDS}, got {self.rounds}")
        if len(self.key) != 32:
            raise ValueError(f"key must be 32 bytes, got {len(self.key)}")
        layout = NonceLayout(self.layout)
        object.__setattr__(self, "layout", layout)
        if len(self.nonce) != layout.nonce_bytes:
            raise ValueError(f"{layout.value} layout needs a {layout.nonce_bytes}-byte nonce, got {len(self.nonce)}")


def _words(data: bytes) -> list:
    return [int.from_bytes(data[i:i + 4], "little") for i in range(0, len(data), 4)]


def initial_state(params: CipherParams, counter: int) -> list:
    """Row-major 16-word matrix: constants, key, then counter/nonce."""
    bits = params.layout.counter_bits
    if not 0 <= counter < 1 << bits:
        raise OverflowError(f"counter {counter} does not fit in {bits} bits")
    ctr = counter.to_bytes(bits // 8, "little")
    return list(CONSTANTS) + _words(params.key) + _words(ctr + params.nonce)


def serialize(state: Sequence[int]) -> bytes:
    return b"".join(w.to_bytes(4, "little") for w in state)


def qr_schedule(rounds: int) -> Iterator[tuple]:
    """Yield ``(qr_index, indices)`` for every QR call of a block, in order."""
    n = 0
    for _ in range(rounds // 2):
        for idx in DOUBLE_ROUND:
            yield n, idx
            n += 1


def _permute(
    params: CipherParams,
    state: list,
    scheme: Optional[Scheme] = None,
    faults: Optional[Mapping[int, Sequence[FaultSpec]]] = None,
) -> list:
    verdicts = []
    faults = faults or {}
    for n, (ia, ib, ic, id_) in qr_schedule(params.rounds):
        clean = (state[ia], state[ib], state[ic], state[id_])
        t = quarterround(*clean, faults=faults.get(n, ()), width=32)
        if scheme is not None:
            verdicts.append(check(t, scheme, clean))
        state[ia], state[ib], state[ic], state[id_] = t.outputs
    return verdicts


def block_words(params: CipherParams, counter: int) -> list:
    init = initial_state(params, counter)
    state = list(init)
    _permute(params, state)
    return [(x + y) & M32 for x, y in zip(state, init)]


def block(params: CipherParams, counter: int) -> bytes:
    """One 64-byte keystream block."""
    return serialize(block_words(params, counter))


def block_checked(
    params: CipherParams,
    counter: int,
    scheme: Scheme,
    faults: Optional[Mapping[int, Sequence[FaultSpec]]] = None,
) -> tuple:
    """Block plus one :class:`CheckVerdict` per Quarterround call.

    ``faults`` maps a QR call index (0 .. 4*rounds-1, in execution order) to
    the faults injected into that call.  The feed-forward addition is not
    checked.
    """
    scheme = Scheme(scheme)
    init = initial_state(params, counter)
    state = list(init)
    verdicts: list = _permute(params, state, scheme, faults)
    out = [(x + y) & M32 for x, y in zip(state, init)]
    return serialize(out), verdicts


def keystream(params: CipherParams, counter_start: int, nbytes: int) -> bytes:
    nblocks = -(-nbytes // BLOCK_BYTES)
    last = counter_start + nblocks - 1
    if nblocks and last >= 1 << params.layout.counter_bits:
        raise OverflowError("block counter would overflow")
    return b"".join(block(params, counter_start + i) for i in range(nblocks))[:nbytes]


def encrypt(params: CipherParams, counter_start: int, message: bytes) -> bytes:
    """XOR ``message`` with the keystream; the same call decrypts."""
    ks = keystream(params, counter_start, len(message))
    return bytes(m ^ k for m, k in zip(message, ks))


decrypt = encrypt


def encrypt_checked(params: CipherParams, counter_start: int, message: bytes, scheme: Scheme) -> tuple:
    """Like :func:`encrypt` but also returns ``(counter, verdicts)`` per block."""
    nblocks = -(-len(message) // BLOCK_BYTES)
    if nblocks and counter_start + nblocks - 1 >= 1 << params.layout.counter_bits:
        raise OverflowError("block counter would overflow")
    ks = bytearray()
    report = []
    for i in range(nblocks):
        blk, verdicts = block_checked(params, counter_start + i, scheme)
        ks += blk
        report.append((counter_start + i, verdicts))
    return bytes(m ^ k for m, k in zip(message, ks)), report
