"""scikit-learn style wrapper around the exact memorizer."""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .datasets import LabeledDataset, min_sq_distance
from .memorizer import bounded_width_S, construct
from .numerics import ceil_log2, sqrt_lower
from .projector import compute_R


def as_rational_matrix(X) -> tuple[tuple[Fraction, ...], ...]:
    """2-D input (floats, ints or Fractions) as exact rational rows."""
    if isinstance(X, np.ndarray) and X.dtype != object:
        if X.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("input contains NaN or infinity")
        return tuple(tuple(Fraction(v) for v in row.tolist()) for row in X)
    rows = [list(r) for r in X]
    if not rows:
        raise ValueError("empty input")
    d = len(rows[0])
    if d == 0 or any(len(r) != d for r in rows):
        raise ValueError("rows must be nonempty and of equal length")
    out = []
    for r in rows:
        vals = []
        for v in r:
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError("input contains NaN or infinity")
            vals.append(Fraction(v))
        out.append(tuple(vals))
    return tuple(out)


def check_labels(y, n: int) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or len(y) != n:
        raise ValueError(f"expected {n} labels in a 1-D array")
    return y


def default_delta(points) -> Fraction:
    """A rational lower bound of the minimum pairwise distance."""
    found = min_sq_distance(points)
    if found is None:
        return Fraction(1)
    if found[0] == 0:
        raise ValueError(f"points {found[1][0]} and {found[1][1]} coincide")
    lo = sqrt_lower(found[0], bits=40)
    return lo if lo > 0 else found[0] / 2 if found[0] < 1 else Fraction(1, 2)


class MemorizingNetwork(BaseEstimator, ClassifierMixin):
    """Exact ReLU classifier that interpolates its training set.

    Parameters
    ----------
    S : int or None
        Block size of the lookup stage.  None picks about sqrt(N/(T+3)).
    T : int or None
        Bit-extraction depth per stored floor.  None picks ceil(rho/3).
    delta : rational or None
        Separation used in the construction; None takes a lower bound of the
        actual minimum distance.
    seed : int
        Seed of the projection search.
    strict_constants : bool
    max_trials : int
    """

    def __init__(self, S=None, T=None, delta=None, seed=0, strict_constants=False, max_trials=64):
        self.S = S
        self.T = T
        self.delta = delta
        self.seed = seed
        self.strict_constants = strict_constants
        self.max_trials = max_trials

    def fit(self, X, y):
        pts = as_rational_matrix(X)
        y = check_labels(y, len(pts))
        self.classes_, codes = np.unique(y, return_inverse=True)
        C = max(2, len(self.classes_))
        delta = Fraction(self.delta) if self.delta is not None else default_delta(pts)
        N, d = len(pts), len(pts[0])
        T = self.T
        if T is None:
            rho = max(1, ceil_log2(compute_R(N, delta, d)))
            T = max(1, -(-rho // 3))
        S = self.S if self.S is not None else bounded_width_S(N, T)
        ds = LabeledDataset(d, C, delta, pts, tuple(int(k) + 1 for k in codes))
        self.network_, self.report_ = construct(
            ds, S, T, seed=self.seed, strict_constants=self.strict_constants, max_trials=self.max_trials
        )
        self.n_features_in_ = d
        return self

    def _check(self, X):
        check_is_fitted(self, "network_")
        pts = as_rational_matrix(X)
        if len(pts[0]) != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {len(pts[0])}")
        return pts

    def decision_function(self, X) -> np.ndarray:
        """Exact network outputs (Fractions, object dtype)."""
        pts = self._check(X)
        return np.array([self.network_(p)[0] for p in pts], dtype=object)

    def transform(self, X) -> np.ndarray:
        """The 1-D projected coordinate of each point, as floats."""
        pts = self._check(X)
        first = self.network_.layers[0]
        return np.array([[float(max(v, 0)) for v in first.apply(p)] for p in pts])

    def predict(self, X) -> np.ndarray:
        out = self.decision_function(X)
        k = len(self.classes_)
        idx = [min(max(int(round(v)), 1), k) - 1 for v in out]
        return self.classes_[idx]
