import math
import random
from fractions import Fraction

import mpmath
import pytest

from memnet.datasets import LabeledDataset, gen_dataset, min_sq_distance, packing_plausible
from memnet.projector import compute_R, project


def sqrt_oracle_bracket(x):
    mpmath.mp.prec = 200
    return mpmath.sqrt(mpmath.mpf(x))


def test_compute_R_examples():
    R = compute_R(10, Fraction(1, 10), 2)
    q = R / (10 * 100 * 10)
    ref = sqrt_oracle_bracket(2 * mpmath.pi)
    qf = mpmath.mpf(q.numerator) / q.denominator
    assert ref <= qf <= ref + mpmath.mpf(2) ** -20
    assert math.isclose(float(R), 25066.28, rel_tol=1e-6)
    q1 = compute_R(1, 1, 1) / 10
    assert math.isclose(float(q1), math.sqrt(math.pi), rel_tol=1e-6)
    assert compute_R(20, Fraction(1, 10), 2) == 4 * R


def test_compute_R_monotone():
    base = compute_R(5, Fraction(1, 10), 3)
    assert compute_R(6, Fraction(1, 10), 3) > base
    assert compute_R(5, Fraction(1, 11), 3) > base
    assert compute_R(5, Fraction(1, 10), 4) > base


def check_projection(res, points, R):
    vals = res.values
    assert all(0 <= v <= R for v in vals)
    srt = sorted(vals)
    assert list(res.projected) == srt
    assert all(b - a >= 2 for a, b in zip(srt, srt[1:]))
    floors = sorted(math.floor(v) for v in vals)
    assert all(b - a >= 2 for a, b in zip(floors, floors[1:]))
    assert (res.net.width, res.net.depth) == (1, 1)
    for p, v in zip(points, vals):
        affine = res.scale * sum(a * b for a, b in zip(res.direction, p)) + res.offset
        assert res.net(p) == [v] == [affine]


def test_project_1d_pair():
    pts = [(Fraction(-1),), (Fraction(1),)]
    R = compute_R(2, 2, 1)
    check_projection(project(pts, 2, R, seed=0), pts, R)


def test_project_single_point():
    pts = [(Fraction(1, 3), Fraction(-1, 5))]
    res = project(pts, 1, seed=4)
    check_projection(res, pts, compute_R(1, 1, 2))


def test_project_random_50_in_r5():
    ds = gen_dataset(50, 5, 3, Fraction(1, 20), seed=12)
    R = compute_R(50, Fraction(1, 20), 5)
    res = project(ds.points, ds.delta, R, seed=1)
    check_projection(res, ds.points, R)
    again = project(ds.points, ds.delta, R, seed=1)
    assert again == res


def test_project_errors():
    with pytest.raises(ValueError, match="0 and 1"):
        project([(Fraction(0),), (Fraction(1, 100),)], Fraction(1, 10))
    with pytest.raises(ValueError, match="outside"):
        project([(Fraction(3, 2),)], 1)
    with pytest.raises(RuntimeError, match="no direction"):
        project([(Fraction(-1),), (Fraction(1, 2),), (Fraction(1),)], Fraction(1, 2), R=Fraction(3), max_trials=3)


def test_gen_dataset_invariants_and_determinism():
    for N, d, delta in ((1, 3, Fraction(1, 2)), (40, 2, Fraction(1, 10)), (25, 16, Fraction(1, 2))):
        a = gen_dataset(N, d, 5, delta, seed=3)
        a.validate()
        assert a.N == N and all(1 <= y <= 5 for y in a.labels)
        assert gen_dataset(N, d, 5, delta, seed=3) == a


def test_gen_dataset_rejects_impossible():
    assert not packing_plausible(100, 1, Fraction(1, 10))
    with pytest.raises(ValueError):
        gen_dataset(100, 1, 2, Fraction(1, 10), seed=0)
    with pytest.raises(RuntimeError):
        gen_dataset(30, 1, 2, Fraction(1, 15), seed=0, max_draws=40)


def test_min_sq_distance_oracle():
    rng = random.Random(1)
    pts = [tuple(Fraction(rng.randint(-99, 99), 100) for _ in range(3)) for _ in range(30)]
    best = min(
        sum((a - b) ** 2 for a, b in zip(pts[i], pts[j])) for i in range(30) for j in range(i + 1, 30)
    )
    assert min_sq_distance(pts)[0] == best


def test_dataset_validation_errors():
    with pytest.raises(ValueError, match="outside the unit ball"):
        LabeledDataset(1, 2, Fraction(1, 2), ((Fraction(2),),), (1,)).validate()
    with pytest.raises(ValueError, match="closer"):
        LabeledDataset(1, 2, Fraction(1, 2), ((Fraction(0),), (Fraction(1, 4),)), (1, 2)).validate()
    with pytest.raises(ValueError, match="label"):
        LabeledDataset(1, 2, Fraction(1, 2), ((Fraction(0),),), (3,)).validate()
