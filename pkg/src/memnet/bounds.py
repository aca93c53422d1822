"""Capacity calculators: sign-pattern ceilings, necessary size conditions, piece counts.

Every verdict that depends on a transcendental constant is computed from
rational brackets of that constant.  When the bracket straddles the
decision threshold the verdict is ``"unknown"`` rather than a guess.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .numerics import e_bounds, exp_bounds, log2_bounds


def param_count(W: int, L: int) -> int:
    """Parameters of a scalar-input, scalar-output net with L hidden layers of width W."""
    return (L - 1) * W * W + (L + 2) * W + 1


def serra_bound(W: int, L: int) -> int:
    """Maximum number of linear pieces of a 1-D width-W, depth-L ReLU net."""
    if W < 1 or L < 1:
        raise ValueError("need W >= 1 and L >= 1")
    return (W + 1) ** L


def warren_bound(P: int, M: int, D: int) -> Fraction:
    """Rational upper bound of 2 (2 e M D / P)^P on sign vectors of M degree-D polynomials in P variables."""
    if not 1 <= P <= M:
        raise ValueError(f"need 1 <= P <= M, got P={P}, M={M}")
    if D < 1:
        raise ValueError("need D >= 1")
    _, e_hi = e_bounds()
    return 2 * (2 * e_hi * M * D / P) ** P


def _log2_exact_or_bounds(x) -> tuple[Fraction, Fraction]:
    x = Fraction(x)
    if x.denominator == 1 and x.numerator & (x.numerator - 1) == 0:
        k = Fraction(x.numerator.bit_length() - 1)
        return k, k
    return log2_bounds(x)


@dataclass
class BoundsReport:
    W: int
    L: int
    N: int
    C: int | None
    delta: Fraction
    T_pack: int | None = None
    verdict: str | None = None  # holds / fails / unknown
    necessary_condition_holds: bool | None = None
    lower_bound_value: Fraction | None = None
    regime: str | None = None  # exp-small-delta / mid-delta / none
    n_ceiling: Fraction | None = None
    implied_inequalities: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"W={self.W} L={self.L} N={self.N} C={self.C} delta={self.delta}"]
        for k in ("T_pack", "verdict", "necessary_condition_holds", "lower_bound_value", "regime", "n_ceiling"):
            v = getattr(self, k)
            if v is not None:
                out.append(f"{k}={v}")
        for name, lhs, rhs, ok in self.implied_inequalities:
            out.append(f"implied {name}: lhs={lhs} rhs={rhs} holds={ok}")
        out += [f"note={n}" for n in self.notes]
        return out


def packing_size(delta) -> int:
    """Size of the maximal delta-grid packing of [-1, 1]."""
    return int(2 // Fraction(delta)) + 1


def thm32_feasibility(W: int, L: int, N: int, C: int, delta) -> BoundsReport:
    """Necessary condition for a width-W, depth-L class to memorize every admissible N-set.

    Checks W^2 (L+1)(L+2) log2(4 e T C) >= N log2 C with T the packing size.
    Failing it rules the class out; passing it proves nothing.
    """
    delta = Fraction(delta)
    if W < 2 or L < 1 or C < 2:
        raise ValueError("need W >= 2, L >= 1, C >= 2")
    T = packing_size(delta)
    expo = W * W * (L + 1) * (L + 2)
    e_lo, e_hi = e_bounds()
    lhs_lo = expo * log2_bounds(4 * e_lo * T * C)[0]
    lhs_hi = expo * log2_bounds(4 * e_hi * T * C)[1]
    c_lo, c_hi = _log2_exact_or_bounds(C)
    rhs_lo, rhs_hi = N * c_lo, N * c_hi
    if lhs_lo >= rhs_hi:
        verdict = "holds"
    elif lhs_hi < rhs_lo:
        verdict = "fails"
    else:
        verdict = "unknown"
    d_hi = _log2_exact_or_bounds(1 / delta)[1]
    lower = N * c_lo / (d_hi + c_hi)
    rep = BoundsReport(W, L, N, C, delta, T_pack=T, verdict=verdict,
                       necessary_condition_holds=verdict != "fails", lower_bound_value=lower)
    rep.implied_inequalities.append(("pattern count", lhs_lo, rhs_hi, verdict != "fails"))
    rep.notes.append("necessary condition only, never sufficient")
    rep.notes.append("lower_bound_value is N log2 C / (log2(1/delta) + log2 C), up to an absolute constant")
    return rep


def prop33_check(W: int, L: int, N: int, delta) -> BoundsReport:
    """Classify delta into the two separation regimes and report the implied N ceiling."""
    delta = Fraction(delta)
    if W < 2 or L < 1:
        raise ValueError("need W >= 2 and L >= 1")
    inv = 1 / delta
    if inv < 2 * N:
        raise ValueError(f"1/delta = {inv} < 2N = {2 * N}")
    ex_lo, ex_hi = exp_bounds(5 * W * L)
    small = 17 * (W + 1) ** (2 * L)
    rep = BoundsReport(W, L, N, None, delta, regime="none")
    if inv > ex_hi:
        rep.regime = "exp-small-delta"
        ceiling = Fraction(32 * W * W * L)
        rep.n_ceiling = ceiling
        rep.implied_inequalities.append(("W^2 L >= N/32", W * W * L, Fraction(N, 32), N <= ceiling))
    elif inv > ex_lo:
        msg = "1/delta falls inside the bracket of exp(5WL); regime undecided"
        warnings.warn(msg)
        rep.notes.append(msg)
    elif inv > small:
        rep.regime = "mid-delta"
        lg_lo, lg_hi = _log2_exact_or_bounds(W)
        lhs_lo, lhs_hi = W**3 * L / lg_hi, W**3 * L / lg_lo
        rep.n_ceiling = 72 * lhs_lo
        holds = True if N <= 72 * lhs_lo else (False if N > 72 * lhs_hi else None)
        rep.implied_inequalities.append(("W^3 L / log2 W >= N/72", lhs_lo, Fraction(N, 72), holds))
    rep.notes.append("log in the mid-delta regime is log2")
    return rep


def layer_param_counts(W: int, L: int) -> list[int]:
    """Parameters up to and including each of the L+1 affine layers."""
    counts, total = [], 0
    for ell in range(1, L + 2):
        if ell == 1:
            total += 2 * W
        elif ell <= L:
            total += W * (W + 1)
        else:
            total += W + 1
        counts.append(total)
    return counts


def sign_pattern_ceilings(W: int, L: int, n_inputs: int, C: int) -> dict[str, Fraction]:
    """Upper bounds on distinct sign patterns over n_inputs * C (x, y) pairs."""
    m = n_inputs * C
    out = {"trivial": Fraction(2**m)}
    _, e_hi = e_bounds()
    out["packing"] = (4 * e_hi * n_inputs * C) ** (W * W * (L + 1) * (L + 2))
    P_ell = layer_param_counts(W, L)
    if all(p <= m * W for p in P_ell[:-1]) and P_ell[-1] <= m:
        prod = Fraction(1)
        for ell, p in enumerate(P_ell[:-1], start=1):
            prod *= warren_bound(p, m * W, ell)
        prod *= warren_bound(P_ell[-1], m, L + 1)
        out["layered"] = prod
    return out


def _draw_params(rng, W: int, L: int, n: int, bound: int):
    dims = [1] + [W] * L + [1]
    return [
        (rng.integers(-bound, bound + 1, size=(n, dims[i + 1], dims[i])),
         rng.integers(-bound, bound + 1, size=(n, dims[i + 1], 1)))
        for i in range(L + 1)
    ]


def sample_sign_patterns(
    W: int, L: int, inputs: Sequence, labels_C: int, samples: int, seed: int = 0,
    weight_bound: int = 128, weight_den: int = 16, batch: int = 2048,
) -> int:
    """Distinct sign vectors of f(x_i) - y over inputs x_i and labels y in 1..C.

    Parameters are integer multiples of 1/weight_den with numerators in
    [-weight_bound, weight_bound].  Evaluation is exact integer arithmetic
    and sgn(0) counts as +1.  The result is a lower estimate of the true
    pattern count.
    """
    if W < 1 or L < 1 or samples < 1:
        raise ValueError("need W, L, samples >= 1")
    xs = [Fraction(v) for v in inputs]
    den = math.lcm(*(v.denominator for v in xs)) if xs else 1
    X = [int(v * den) for v in xs]
    # magnitude bound decides between int64 and Python ints
    mag, dd = max([abs(v) for v in X] + [1]), den
    for k in range(L + 1):
        fan_in = 1 if k == 0 else W
        mag = weight_bound * (fan_in * mag + dd)
        dd *= weight_den
    dtype = np.int64 if mag + labels_C * dd < 2**62 else object
    rng = np.random.default_rng(seed)
    seen: set[bytes] = set()
    ys = np.arange(1, labels_C + 1)
    done = 0
    while done < samples:
        n = min(batch, samples - done)
        done += n
        params = _draw_params(rng, W, L, n, weight_bound)
        h = np.broadcast_to(np.array(X, dtype=dtype), (n, 1, len(X))).astype(dtype)
        cur_den = den
        for k, (Wk, bk) in enumerate(params):
            h = np.matmul(Wk.astype(dtype), h) + bk.astype(dtype) * cur_den
            cur_den *= weight_den
            if k < L:
                h = np.where(h > 0, h, 0).astype(dtype)
        out = h[:, 0, :]  # value = out / cur_den
        signs = (out[:, :, None] - ys[None, None, :].astype(dtype) * cur_den) >= 0
        packed = np.packbits(signs.reshape(n, -1).astype(np.uint8), axis=1)
        seen.update(row.tobytes() for row in packed)
    return len(seen)
