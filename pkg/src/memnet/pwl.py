"""Continuous piecewise-linear functions on the real line."""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass(frozen=True)
class PwlFunction:
    """Continuous PWL function given by its values at sorted breakpoints.

    Between breakpoints the function interpolates linearly; left of the
    first and right of the last breakpoint it follows ``left_slope`` and
    ``right_slope``.  With no breakpoints the function is the constant
    ``offset`` plus ``left_slope * x`` (``right_slope`` must then agree).
    """

    breakpoints: tuple[Fraction, ...]
    values: tuple[Fraction, ...]
    left_slope: Fraction = Fraction(0)
    right_slope: Fraction = Fraction(0)
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        bps = tuple(Fraction(b) for b in self.breakpoints)
        vals = tuple(Fraction(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "left_slope", Fraction(self.left_slope))
        object.__setattr__(self, "right_slope", Fraction(self.right_slope))
        object.__setattr__(self, "offset", Fraction(self.offset))
        if len(bps) != len(vals):
            raise ValueError("breakpoints and values differ in length")
        if any(a >= b for a, b in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if not bps and self.left_slope != self.right_slope:
            raise ValueError("a PWL function without breakpoints is affine")

    @classmethod
    def constant(cls, value) -> "PwlFunction":
        return cls((), (), 0, 0, value)

    @classmethod
    def affine(cls, slope, intercept) -> "PwlFunction":
        return cls((), (), slope, slope, intercept)

    @property
    def n_pieces(self) -> int:
        return len(self.breakpoints) + 1

    @property
    def hull(self) -> tuple[Fraction, Fraction] | None:
        if not self.breakpoints:
            return None
        return self.breakpoints[0], self.breakpoints[-1]

    def __call__(self, x) -> Fraction:
        return pwl_eval(self, x)

    def slopes(self) -> list[Fraction]:
        """Slopes of all pieces, left to right."""
        bps, vals = self.breakpoints, self.values
        inner = [(vals[i + 1] - vals[i]) / (bps[i + 1] - bps[i]) for i in range(len(bps) - 1)]
        if not bps:
            return [self.left_slope]
        return [self.left_slope, *inner, self.right_slope]

    def kinks(self) -> list[tuple[Fraction, Fraction]]:
        """(breakpoint, slope change) for every breakpoint."""
        s = self.slopes()
        return [(b, s[i + 1] - s[i]) for i, b in enumerate(self.breakpoints)]

    def simplify(self) -> "PwlFunction":
        """Drop breakpoints where the slope does not change."""
        if not self.breakpoints:
            return self
        keep = [(b, v) for (b, dk), v in zip(self.kinks(), self.values) if dk != 0]
        if not keep:
            # affine: rebuild from the first breakpoint
            b0, v0 = self.breakpoints[0], self.values[0]
            return PwlFunction.affine(self.left_slope, v0 - self.left_slope * b0)
        return PwlFunction(
            tuple(b for b, _ in keep), tuple(v for _, v in keep), self.left_slope, self.right_slope
        )


def pwl_eval(g: PwlFunction, x) -> Fraction:
    x = Fraction(x)
    bps, vals = g.breakpoints, g.values
    if not bps:
        return g.offset + g.left_slope * x
    if x <= bps[0]:
        return vals[0] + g.left_slope * (x - bps[0])
    if x >= bps[-1]:
        return vals[-1] + g.right_slope * (x - bps[-1])
    i = bisect.bisect_right(bps, x)
    x0, x1 = bps[i - 1], bps[i]
    v0, v1 = vals[i - 1], vals[i]
    return v0 + (v1 - v0) * (x - x0) / (x1 - x0)


def from_kinks(
    base: Fraction, slope: Fraction, kinks: Sequence[tuple[Fraction, Fraction]]
) -> PwlFunction:
    """PWL function ``base + slope*x + sum c*(x - t)_+`` over (t, c) kinks."""
    kinks = sorted((Fraction(t), Fraction(c)) for t, c in kinks)
    if not kinks:
        return PwlFunction.affine(slope, base)
    bps, vals = [], []
    s = Fraction(slope)
    v = Fraction(base) + s * kinks[0][0]
    prev = kinks[0][0]
    for t, c in kinks:
        v += s * (t - prev)
        bps.append(t)
        vals.append(v)
        s += c
        prev = t
    return PwlFunction(tuple(bps), tuple(vals), slope, s)


def canonical_grid(g: PwlFunction) -> list[Fraction]:
    """Breakpoints, midpoints of consecutive breakpoints, hull endpoints."""
    bps = list(g.breakpoints)
    mids = [(a + b) / 2 for a, b in zip(bps, bps[1:])]
    return sorted(set(bps) | set(mids))
