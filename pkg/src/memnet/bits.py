"""Binary strings, bit windows and the block encodings of floors and labels."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass(frozen=True)
class BitString:
    """``a1...am . b1...bn``, most significant bit first."""

    int_bits: tuple[int, ...] = ()
    frac_bits: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "int_bits", tuple(self.int_bits))
        object.__setattr__(self, "frac_bits", tuple(self.frac_bits))
        if any(b not in (0, 1) for b in self.int_bits + self.frac_bits):
            raise ValueError("bits must be 0 or 1")

    @classmethod
    def parse(cls, text: str) -> "BitString":
        head, _, tail = text.partition(".")
        return cls(tuple(int(c) for c in head), tuple(int(c) for c in tail))


def bin_value(bits: BitString) -> Fraction:
    m = len(bits.int_bits)
    whole = sum(a << (m - i - 1) for i, a in enumerate(bits.int_bits))
    frac = sum(Fraction(b, 1 << (j + 1)) for j, b in enumerate(bits.frac_bits))
    return whole + frac


def to_bits(v: int, m: int) -> tuple[int, ...]:
    """The m-bit, zero-padded representation of v."""
    if not 0 <= v < (1 << m):
        raise ValueError(f"{v} does not fit in {m} bits")
    return tuple((v >> (m - 1 - i)) & 1 for i in range(m))


def gamma(m: int, i: int, j: int, v: int) -> int:
    """Integer value of bits i..j (1-based, MSB first) of the m-bit string of v."""
    if not 1 <= i <= j <= m:
        raise ValueError(f"need 1 <= i <= j <= m, got i={i}, j={j}, m={m}")
    if not 0 <= v < (1 << m):
        raise ValueError(f"{v} does not fit in {m} bits")
    return (v >> (m - j)) & ((1 << (j - i + 1)) - 1)


@dataclass(frozen=True)
class BlockEncoding:
    S: int
    rho: int
    c: int
    u: tuple[int, ...]
    w: tuple[int, ...]

    @property
    def n_blocks(self) -> int:
        return len(self.u)

    def segments(self, j: int) -> list[int]:
        """The S floors packed into u[j] (0-based block index)."""
        m = self.rho * self.S
        return [gamma(m, k * self.rho + 1, (k + 1) * self.rho, self.u[j]) for k in range(self.S)]

    def labels(self, j: int) -> list[int]:
        m = self.c * self.S
        return [gamma(m, k * self.c + 1, (k + 1) * self.c, self.w[j]) for k in range(self.S)]


def _pack(values: Sequence[int], width: int) -> int:
    out = 0
    for v in values:
        out = (out << width) | v
    return out


def encode_blocks(floors: Sequence[int], labels0: Sequence[int], S: int, rho: int, c: int) -> BlockEncoding:
    """Pack consecutive groups of S floors/labels into integers u_j, w_j.

    A short last block is completed with copies of the first floors and with
    zero labels; those padded slots are never the match for any data point.
    """
    n = len(floors)
    if len(labels0) != n:
        raise ValueError("floors and labels differ in length")
    if not 1 <= S <= max(n, 1):
        raise ValueError(f"block size S={S} must satisfy 1 <= S <= N={n}")
    for f in floors:
        if not 0 <= f < (1 << rho):
            raise ValueError(f"floor {f} does not fit in rho={rho} bits")
    for y in labels0:
        if not 0 <= y < (1 << c):
            raise ValueError(f"label {y} does not fit in c={c} bits")
    n_blocks = -(-n // S)
    pad = S * n_blocks - n
    fl = list(floors) + list(floors[:pad])
    lab = list(labels0) + [0] * pad
    u, w = [], []
    for j in range(n_blocks):
        seg = fl[j * S:(j + 1) * S]
        srt = sorted(seg)
        for a, b in zip(srt, srt[1:]):
            if b - a < 2:
                raise ValueError(f"floors {a} and {b} in block {j + 1} are closer than 2")
        u.append(_pack(seg, rho))
        w.append(_pack(lab[j * S:(j + 1) * S], c))
    return BlockEncoding(S, rho, c, tuple(u), tuple(w))
