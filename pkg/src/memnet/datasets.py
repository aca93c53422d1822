"""Labeled point sets in the unit ball and their exact validation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

# generated coordinates live on this dyadic grid
GRID_BITS = 20


def integer_coords(points: Sequence[Sequence[Fraction]]) -> tuple[list[list[int]], int]:
    """Common-denominator form: (integer rows, D) with points[i][k] = rows[i][k] / D."""
    den = 1
    for p in points:
        for v in p:
            den = math.lcm(den, Fraction(v).denominator)
    rows = [[int(Fraction(v) * den) for v in p] for p in points]
    return rows, den


def _as_int64(rows: list[list[int]]) -> np.ndarray | None:
    """An int64 array when squared distances provably cannot overflow."""
    if not rows or not rows[0]:
        return None
    mx = max(abs(v) for r in rows for v in r)
    if (2 * mx) ** 2 * len(rows[0]) >= 2**62:
        return None
    return np.array(rows, dtype=np.int64)


def min_sq_distance(points: Sequence[Sequence[Fraction]]) -> tuple[Fraction, tuple[int, int]] | None:
    """Exact minimum squared distance and an index pair attaining it."""
    n = len(points)
    if n < 2:
        return None
    rows, den = integer_coords(points)
    arr = _as_int64(rows)
    best, pair = None, None
    for i in range(n - 1):
        if arr is not None:
            diff = arr[i + 1:] - arr[i]
            sq = np.einsum("ij,ij->i", diff, diff)
            j = int(np.argmin(sq))
            val = int(sq[j])
            j += i + 1
        else:
            val, j = min(
                (sum((a - b) ** 2 for a, b in zip(rows[i], rows[k])), k) for k in range(i + 1, n)
            )
        if best is None or val < best:
            best, pair = val, (i, j)
    return Fraction(best, den * den), pair


@dataclass(frozen=True)
class LabeledDataset:
    """Points in the closed unit ball, pairwise at least ``delta`` apart, labels in 1..C."""

    d: int
    C: int
    delta: Fraction
    points: tuple[tuple[Fraction, ...], ...]
    labels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "delta", Fraction(self.delta))
        object.__setattr__(self, "points", tuple(tuple(Fraction(v) for v in p) for p in self.points))
        object.__setattr__(self, "labels", tuple(int(y) for y in self.labels))

    @property
    def N(self) -> int:
        return len(self.points)

    def validate(self) -> "LabeledDataset":
        """Raise ValueError naming the first violated invariant."""
        if self.d < 1 or self.C < 1:
            raise ValueError("d and C must be positive")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if len(self.labels) != len(self.points):
            raise ValueError("points and labels differ in length")
        for i, p in enumerate(self.points):
            if len(p) != self.d:
                raise ValueError(f"point {i} has dimension {len(p)}, expected {self.d}")
            if sum(v * v for v in p) > 1:
                raise ValueError(f"point {i} lies outside the unit ball")
        for i, y in enumerate(self.labels):
            if not 1 <= y <= self.C:
                raise ValueError(f"label {y} of point {i} is outside 1..{self.C}")
        found = min_sq_distance(self.points)
        if found is not None and found[0] < self.delta**2:
            i, j = found[1]
            raise ValueError(f"points {i} and {j} are closer than delta={self.delta}")
        return self


def packing_plausible(N: int, d: int, delta: Fraction) -> bool:
    """Volume heuristic for a delta-separated N-set in the unit ball."""
    h = Fraction(delta) / 2
    return N * h**d <= (1 + h) ** d


def gen_dataset(N: int, d: int, C: int, delta, seed: int, max_draws: int | None = None) -> LabeledDataset:
    """Random delta-separated points on the 2**-20 grid of the unit ball, uniform labels.

    Points are drawn uniformly from the ball, truncated toward zero onto
    the grid (so they stay inside), and kept only if at least ``delta``
    from every kept point.
    """
    delta = Fraction(delta)
    if N < 1 or d < 1 or C < 1:
        raise ValueError("N, d and C must be positive")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if not packing_plausible(N, d, delta):
        raise ValueError(f"{N} points {delta}-apart in the {d}-ball look infeasible; lower N or delta")
    rng = np.random.default_rng(seed)
    scale = 1 << GRID_BITS
    # integer squared distance must reach delta^2 scale^2
    thr = -(-(delta.numerator**2 * scale * scale) // delta.denominator**2)
    budget = max_draws if max_draws is not None else 2000 * N + 10000
    kept = np.zeros((N, d), dtype=np.int64)
    n = 0
    draws = 0
    while n < N:
        if draws >= budget:
            raise RuntimeError(f"placed {n} of {N} points after {draws} draws; lower N or delta")
        draws += 1
        g = rng.standard_normal(d)
        norm = float(np.sqrt(g @ g))
        if norm == 0.0:
            continue
        r = rng.random() ** (1.0 / d)
        p = np.trunc(g / norm * r * scale).astype(np.int64)
        if int(p @ p) > scale * scale:
            continue
        if n:
            diff = kept[:n] - p
            if int(np.einsum("ij,ij->i", diff, diff).min()) < thr:
                continue
        kept[n] = p
        n += 1
    labels = rng.integers(1, C + 1, size=N)
    pts = tuple(tuple(Fraction(int(v), scale) for v in row) for row in kept)
    return LabeledDataset(d, C, delta, pts, tuple(int(y) for y in labels))
