"""Width-1, depth-1 projection of a separated point set onto a line.

The projected values are nonnegative, at most R, and pairwise at least 2
apart, so their floors are pairwise at least 2 apart as well.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .datasets import integer_coords, min_sq_distance
from .network import AffineLayer, ReluNetwork, identity_layer
from .numerics import sqrt_pi_d_upper

DIRECTION_BITS = 32


def compute_R(N: int, delta, d: int) -> Fraction:
    """Rational upper bound of 10 N^2 sqrt(pi d) / delta, with sqrt(pi d) rounded up within 2**-20."""
    delta = Fraction(delta)
    if N < 1 or d < 1 or delta <= 0:
        raise ValueError("need N >= 1, d >= 1, delta > 0")
    return 10 * N * N / delta * sqrt_pi_d_upper(d, bits=21)


@dataclass(frozen=True)
class ProjectionResult:
    direction: tuple[Fraction, ...]
    scale: Fraction
    offset: Fraction
    net: ReluNetwork
    values: tuple[Fraction, ...]  # per original point
    order: tuple[int, ...]  # point indices by increasing projected value
    trials: int

    @property
    def projected(self) -> tuple[Fraction, ...]:
        return tuple(self.values[i] for i in self.order)


def _draw_direction(seed: int, trial: int, d: int) -> list[int]:
    rng = np.random.default_rng([seed, trial])
    g = rng.standard_normal(d)
    return [int(v) for v in np.rint(g * (1 << DIRECTION_BITS))]


def project(
    points: Sequence[Sequence], delta, R=None, seed: int = 0, max_trials: int = 64
) -> ProjectionResult:
    """Search seeded random directions until the projection is R-spread and 2-separated.

    Trial ``k`` uses a direction drawn from ``default_rng([seed, k])``; the
    first accepted trial wins.
    """
    points = [tuple(Fraction(v) for v in p) for p in points]
    delta = Fraction(delta)
    N = len(points)
    if N < 1:
        raise ValueError("need at least one point")
    d = len(points[0])
    for i, p in enumerate(points):
        if len(p) != d:
            raise ValueError(f"point {i} has dimension {len(p)}, expected {d}")
        if sum(v * v for v in p) > 1:
            raise ValueError(f"point {i} lies outside the unit ball")
    found = min_sq_distance(points)
    if found is not None and found[0] < delta * delta:
        raise ValueError(f"points {found[1][0]} and {found[1][1]} are closer than delta={delta}")
    R = compute_R(N, delta, d) if R is None else Fraction(R)
    rows, den = integer_coords(points)

    best = None
    for trial in range(max_trials):
        v = _draw_direction(seed, trial, d)
        if not any(v):
            continue
        # integer projections Z_i = (v . x_i) * den * 2^DIRECTION_BITS
        Z = [sum(a * b for a, b in zip(v, r)) for r in rows]
        srt = sorted(Z)
        lo, hi = srt[0], srt[-1]
        gap = min((b - a for a, b in zip(srt, srt[1:])), default=None)
        if gap == 0:
            continue
        if gap is None:
            spread = Fraction(0)
        else:
            spread = Fraction(2 * (hi - lo), gap)
            if best is None or spread < best:
                best = spread
        if spread > R:
            continue
        unit = Fraction(1, den << DIRECTION_BITS)
        direction = tuple(Fraction(a, 1 << DIRECTION_BITS) for a in v)
        # a = 2 / gap in x-units; a single point maps to 0
        scale = Fraction(2) / (gap * unit) if gap is not None else Fraction(1)
        offset = -scale * lo * unit
        hidden = AffineLayer((tuple((k, scale * a) for k, a in enumerate(direction)),), (offset,), d)
        net = ReluNetwork((hidden, identity_layer(1)))
        values = tuple(scale * z * unit + offset for z in Z)
        order = tuple(sorted(range(N), key=lambda i: Z[i]))
        return ProjectionResult(direction, scale, offset, net, values, order, trial + 1)
    raise RuntimeError(
        f"no direction accepted in {max_trials} trials; best spread {float(best) if best else None} vs R={float(R)}"
    )
