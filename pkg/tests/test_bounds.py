import math
import random
import warnings
from fractions import Fraction

import mpmath
import pytest

from conftest import random_net
from memnet.bounds import (
    layer_param_counts,
    packing_size,
    param_count,
    prop33_check,
    sample_sign_patterns,
    serra_bound,
    sign_pattern_ceilings,
    thm32_feasibility,
    warren_bound,
)
from memnet.network import to_pwl


def test_warren_examples():
    mpmath.mp.prec = 200
    def mp(q):
        return mpmath.mpf(q.numerator) / q.denominator

    b = warren_bound(1, 1, 1)
    assert mp(b) >= 4 * mpmath.e and float(b) == pytest.approx(10.8731, abs=1e-4)
    assert warren_bound(1, 5, 6) == 2 * warren_bound(1, 5, 3)
    b2 = warren_bound(2, 4, 1)
    assert mp(b2) >= 2 * (4 * mpmath.e) ** 2 and float(b2) == pytest.approx(236.45, abs=0.01)
    with pytest.raises(ValueError):
        warren_bound(3, 2, 1)


def test_thm32_examples():
    rep = thm32_feasibility(2, 1, 10**6, 2, Fraction(1, 1000))
    assert rep.T_pack == 2001
    assert rep.verdict == "fails" and rep.necessary_condition_holds is False
    lhs = rep.implied_inequalities[0][1]
    assert 24 * math.log2(4 * math.e * 4002) == pytest.approx(float(lhs), rel=1e-9)
    assert thm32_feasibility(2, 1, 1, 2, Fraction(1, 3)).verdict == "holds"
    assert any("necessary" in n for n in rep.notes)
    assert float(rep.lower_bound_value) == pytest.approx(10**6 / (math.log2(1000) + 1), rel=1e-9)


def test_thm32_monotone():
    for N in (50, 400, 3000):
        verdicts = [thm32_feasibility(W, L, N, 4, Fraction(1, 50)).necessary_condition_holds for W in (2, 3, 5) for L in (1, 2, 4)]
        grid = [verdicts[i * 3:(i + 1) * 3] for i in range(3)]
        for row in grid:
            assert row == sorted(row)
        for col in zip(*grid):
            assert list(col) == sorted(col)


def test_prop33_examples():
    r1 = prop33_check(2, 3, 10, Fraction(1, 10**14))
    assert r1.regime == "exp-small-delta" and r1.n_ceiling == 384
    r2 = prop33_check(2, 3, 10, Fraction(1, 10**10))
    assert r2.regime == "mid-delta" and r2.n_ceiling == 1728
    assert r2.implied_inequalities[0][3] is True
    assert prop33_check(2, 3, 2000, Fraction(1, 10**10)).implied_inequalities[0][3] is False
    r3 = prop33_check(4, 4, 3, Fraction(1, 6))
    assert r3.regime == "none"
    with pytest.raises(ValueError):
        prop33_check(2, 3, 10, Fraction(1, 19))


def test_prop33_ambiguous_window_warns(monkeypatch):
    import memnet.bounds as bd

    monkeypatch.setattr(bd, "exp_bounds", lambda x: (Fraction(10**9), Fraction(10**9 + 10)))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = bd.prop33_check(2, 3, 10, Fraction(1, 10**9 + 5))
    assert rep.regime == "none" and caught


def test_serra_and_params():
    assert serra_bound(2, 2) == 9
    assert serra_bound(1, 5) == 32
    assert param_count(2, 1) == 7
    assert layer_param_counts(3, 2)[-1] == param_count(3, 2)
    assert packing_size(Fraction(1, 1000)) == 2001


def test_serra_on_random_nets():
    rng = random.Random(33)
    for _ in range(100):
        W, L = rng.randint(1, 4), rng.randint(1, 5)
        net = random_net(rng, [W] * L)
        assert to_pwl(net).simplify().n_pieces <= serra_bound(W, L)


def test_sign_patterns_small():
    xs = [Fraction(-1) + Fraction(2 * i, 7) for i in range(8)]
    assert sample_sign_patterns(2, 1, xs, 2, 1, seed=0) == 1
    k = sample_sign_patterns(2, 1, xs, 2, 10**4, seed=0)
    assert 1 < k <= 2 ** (8 * 2)
    assert k <= min(sign_pattern_ceilings(2, 1, 8, 2).values())
    assert sample_sign_patterns(2, 1, xs, 2, 500, seed=3) == sample_sign_patterns(2, 1, xs, 2, 500, seed=3)


def test_sign_patterns_large_weights_use_python_ints():
    xs = [Fraction(k, 3) for k in range(-3, 4)]
    a = sample_sign_patterns(3, 4, xs, 2, 200, seed=1, weight_bound=2**20)
    assert 1 <= a <= 2**14
