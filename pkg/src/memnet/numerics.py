"""Exact rational arithmetic helpers.

``Rat`` is :class:`fractions.Fraction`; everything here stays exact.  The
transcendental brackets (``e``, ``pi``, square roots, exponentials) are
computed with mpmath interval arithmetic and converted to rationals, so the
direction of every rounding is known.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Union

import mpmath
from mpmath import iv

Rat = Fraction
RatLike = Union[Fraction, int]

_RAT_RE = re.compile(r"\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?")

# working precision (bits) for interval brackets
_PREC = 160


def rat_arith(a: RatLike, b: RatLike, op: str):
    """Apply ``op`` in {add, sub, mul, div, cmp, floor} to two rationals.

    ``floor`` ignores ``b`` and returns ``floor(a)``; ``cmp`` returns -1, 0
    or 1.  Division by zero raises :class:`ZeroDivisionError`.
    """
    a, b = Fraction(a), Fraction(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0:
            raise ZeroDivisionError("rational division by zero")
        return a / b
    if op == "cmp":
        return (a > b) - (a < b)
    if op == "floor":
        return math.floor(a)
    raise ValueError(f"unknown op {op!r}")


def ceil_log2(x: RatLike) -> int:
    """Smallest k >= 0 with 2**k >= x, by exact integer comparison."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError(f"ceil_log2 requires x > 0, got {x}")
    if x <= 1:
        return 0
    # 2**k >= p/q  <=>  q * 2**k >= p
    p, q = x.numerator, x.denominator
    k = max(0, p.bit_length() - q.bit_length() - 1)
    while (q << k) < p:
        k += 1
    while k > 0 and (q << (k - 1)) >= p:
        k -= 1
    return k


def format_rat(x: RatLike) -> str:
    """Canonical text form: ``num/den``, or ``num`` when den is 1."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_rat(text: str) -> Fraction:
    m = _RAT_RE.fullmatch(text)
    if m is None:
        raise ValueError(f"malformed rational {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def _mpf_to_fraction(x) -> Fraction:
    man, exp = mpmath.mpf(x).man_exp
    return Fraction(int(man)) * (Fraction(2) ** int(exp))


def _bracket(interval) -> tuple[Fraction, Fraction]:
    return _mpf_to_fraction(interval.a), _mpf_to_fraction(interval.b)


class _ivprec:
    def __enter__(self):
        self._old = iv.prec
        iv.prec = _PREC

    def __exit__(self, *exc):
        iv.prec = self._old


def e_bounds() -> tuple[Fraction, Fraction]:
    """Rational lo <= e <= hi, width far below 2**-30."""
    with _ivprec():
        return _bracket(iv.e)


def pi_bounds() -> tuple[Fraction, Fraction]:
    with _ivprec():
        return _bracket(iv.pi)


def exp_bounds(x: RatLike) -> tuple[Fraction, Fraction]:
    """Rational bracket of exp(x) with relative width about 2**-150."""
    x = Fraction(x)
    with _ivprec():
        val = iv.exp(iv.mpf(x.numerator) / x.denominator)
        return _bracket(val)


def log2_bounds(x: RatLike) -> tuple[Fraction, Fraction]:
    x = Fraction(x)
    if x <= 0:
        raise ValueError("log2 of a nonpositive number")
    with _ivprec():
        val = iv.log(iv.mpf(x.numerator) / x.denominator) / iv.log(2)
        return _bracket(val)


def sqrt_upper(x: RatLike, bits: int = 24) -> Fraction:
    """Dyadic q with sqrt(x) <= q <= sqrt(x) + 2**-bits."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("sqrt of a negative number")
    # floor(x * 4**bits) then integer sqrt; +1 covers both floors
    scaled = (x.numerator << (2 * bits)) // x.denominator
    r = math.isqrt(scaled)
    if r * r == scaled and Fraction(scaled, 1 << (2 * bits)) == x:
        return Fraction(r, 1 << bits)
    return Fraction(r + 1, 1 << bits)


def sqrt_lower(x: RatLike, bits: int = 24) -> Fraction:
    """Dyadic q with sqrt(x) - 2**-bits <= q <= sqrt(x)."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("sqrt of a negative number")
    scaled = (x.numerator << (2 * bits)) // x.denominator
    return Fraction(math.isqrt(scaled), 1 << bits)


def sqrt_pi_d_upper(d: int, bits: int = 24) -> Fraction:
    """Rational upper bound of sqrt(pi*d), within 2**-bits + tiny."""
    _, pi_hi = pi_bounds()
    return sqrt_upper(pi_hi * d, bits)
