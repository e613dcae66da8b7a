"""Bit-packed Pauli strings.

Qubit ``k`` of a string acts as I/X/Z/Y for (x,z) bit pairs
(0,0)/(1,0)/(0,1)/(1,1); the operator encoded by a row is
``sign * prod_k i^{x_k z_k} X^{x_k} Z^{z_k}``, which makes (1,1) exactly Y.
Only real signs (+1/-1) are exposed; products that would leave a stray
``i`` are rejected, since they never arise for the Hermitian operators
handled here.

Bits are packed 64 per machine word, so row products and commutation
checks are word-wise XOR/AND plus a popcount.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError, VerificationError

WORD_BITS = 64


def n_words(n_qubits: int) -> int:
    return max(1, (n_qubits + WORD_BITS - 1) // WORD_BITS)


def pack_bits(bits: Sequence[int] | np.ndarray, n_qubits: int) -> np.ndarray:
    """Pack qubit-indexed bits (qubit k -> word k//64, bit k%64) into uint64."""
    words = np.zeros(n_words(n_qubits), dtype=np.uint64)
    for k, b in enumerate(bits):
        if b:
            words[k >> 6] |= np.uint64(1) << np.uint64(k & 63)
    return words


def unpack_bits(words: np.ndarray, n_qubits: int) -> np.ndarray:
    out = np.zeros(n_qubits, dtype=np.uint8)
    for k in range(n_qubits):
        out[k] = (int(words[k >> 6]) >> (k & 63)) & 1
    return out


def phase_exponent_mod4(x1: np.ndarray, z1: np.ndarray,
                        x2: np.ndarray, z2: np.ndarray) -> int:
    """i-exponent (mod 4) of the qubit-wise product P1*P2, word-parallel.

    Counts qubits contributing +i (cyclic pairs XY, YZ, ZX) minus qubits
    contributing -i (the anticyclic pairs).
    """
    plus = (x1 & ~z1 & x2 & z2) | (x1 & z1 & ~x2 & z2) | (~x1 & z1 & x2 & ~z2)
    anti = (x1 & z2) ^ (z1 & x2)
    minus = anti & ~plus
    cnt = int(np.bitwise_count(plus).sum()) - int(np.bitwise_count(minus).sum())
    return cnt % 4


class PauliString:
    """An n-qubit Pauli with a +/-1 sign, stored as packed x/z bit rows."""

    __slots__ = ("n", "x", "z", "sign_bit")

    def __init__(self, n: int, x: np.ndarray | None = None, z: np.ndarray | None = None,
                 sign: int = +1):
        self.n = int(n)
        w = n_words(self.n)
        self.x = np.zeros(w, dtype=np.uint64) if x is None else x.astype(np.uint64)
        self.z = np.zeros(w, dtype=np.uint64) if z is None else z.astype(np.uint64)
        if sign not in (+1, -1):
            raise ValidationError("sign must be +1 or -1")
        self.sign_bit = 0 if sign == +1 else 1

    @property
    def sign(self) -> int:
        return -1 if self.sign_bit else +1

    @classmethod
    def from_bits(cls, x_bits: Iterable[int], z_bits: Iterable[int], sign: int = +1
                  ) -> "PauliString":
        xb = list(x_bits)
        zb = list(z_bits)
        if len(xb) != len(zb):
            raise ValidationError("x and z bit vectors must have equal length")
        return cls(len(xb), pack_bits(xb, len(xb)), pack_bits(zb, len(xb)), sign)

    @classmethod
    def from_text(cls, text: str) -> "PauliString":
        """Parse the text form, e.g. ``+XZZI`` or ``-IYXZ``."""
        text = text.strip()
        sign = +1
        if text and text[0] in "+-":
            sign = -1 if text[0] == "-" else +1
            text = text[1:]
        xb, zb = [], []
        for ch in text:
            if ch not in "IXYZ":
                raise ValidationError(f"bad Pauli character {ch!r}")
            xb.append(1 if ch in "XY" else 0)
            zb.append(1 if ch in "ZY" else 0)
        return cls.from_bits(xb, zb, sign)

    @classmethod
    def single(cls, n: int, qubit: int, kind: str, sign: int = +1) -> "PauliString":
        if not (0 <= qubit < n):
            raise ValidationError(f"qubit {qubit} out of range")
        p = cls(n, sign=sign)
        w, b = qubit >> 6, np.uint64(1) << np.uint64(qubit & 63)
        if kind in ("X", "Y"):
            p.x[w] |= b
        if kind in ("Z", "Y"):
            p.z[w] |= b
        if kind not in ("X", "Y", "Z"):
            raise ValidationError(f"kind must be X, Y or Z, got {kind!r}")
        return p

    def qubit(self, k: int) -> str:
        xb = (int(self.x[k >> 6]) >> (k & 63)) & 1
        zb = (int(self.z[k >> 6]) >> (k & 63)) & 1
        return "IXZY"[xb + 2 * zb]

    def to_text(self) -> str:
        return ("-" if self.sign_bit else "+") + "".join(self.qubit(k) for k in range(self.n))

    def copy(self) -> "PauliString":
        return PauliString(self.n, self.x.copy(), self.z.copy(), self.sign)

    def commutes_with(self, other: "PauliString") -> bool:
        if self.n != other.n:
            raise ValidationError("qubit counts differ")
        anti = (self.x & other.z) ^ (self.z & other.x)
        return int(np.bitwise_count(anti).sum()) % 2 == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        """Operator product self * other; raises if the result is not real."""
        if self.n != other.n:
            raise ValidationError("qubit counts differ")
        phase = (2 * (self.sign_bit + other.sign_bit)
                 + phase_exponent_mod4(self.x, self.z, other.x, other.z)) % 4
        if phase % 2:
            raise VerificationError("product has imaginary sign")
        return PauliString(self.n, self.x ^ other.x, self.z ^ other.z,
                           +1 if phase == 0 else -1)

    def is_identity(self) -> bool:
        return not self.x.any() and not self.z.any()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliString):
            return NotImplemented
        return (self.n == other.n and self.sign_bit == other.sign_bit
                and bool(np.array_equal(self.x, other.x))
                and bool(np.array_equal(self.z, other.z)))

    def __hash__(self):
        return hash((self.n, self.sign_bit, self.x.tobytes(), self.z.tobytes()))

    def __repr__(self):
        return f"PauliString({self.to_text()!r})"


def symplectic_rank(paulis: Sequence[PauliString]) -> int:
    """Rank over GF(2) of the (x|z) rows, ignoring signs."""
    if not paulis:
        return 0
    n = paulis[0].n
    rows = [(p.x.copy(), p.z.copy()) for p in paulis]
    rank = 0
    used = [False] * len(rows)
    for col in range(2 * n):
        is_x = col < n
        q = col if is_x else col - n
        w, m = q >> 6, np.uint64(1) << np.uint64(q & 63)
        pivot = None
        for i, (xr, zr) in enumerate(rows):
            if used[i]:
                continue
            bit = (xr[w] if is_x else zr[w]) & m
            if bit:
                pivot = i
                break
        if pivot is None:
            continue
        used[pivot] = True
        rank += 1
        px, pz = rows[pivot]
        for i, (xr, zr) in enumerate(rows):
            if i == pivot or used[i]:
                continue
            bit = (xr[w] if is_x else zr[w]) & m
            if bit:
                xr ^= px
                zr ^= pz
    return rank
