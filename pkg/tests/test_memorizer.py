import random
from fractions import Fraction

import pytest

from memnet.datasets import LabeledDataset, gen_dataset
from memnet.memorizer import bounded_width_S, construct, derive_params, least_W1, sweep, verify
from memnet.network import AffineLayer, ReluNetwork


def test_derive_params_examples():
    p = derive_params(100, 2, 4, Fraction(1, 10), 5, 4)
    assert p.target_L == 106
    assert p.W1 == 1
    assert (p.rho, p.c) == (22, 2)
    assert p.extract_width == 268 and p.target_W == 268
    assert p.L1 == 35 and 3 * p.W1**2 * p.L1 >= -(-100 // 5)


@pytest.mark.parametrize("N,S,T", [(100, 5, 4), (1000, 1, 1), (7, 2, 9), (500, 3, 2)])
def test_least_W1_exact(N, S, T):
    w = least_W1(N, S, T)
    assert w * w * S * S * (T + 3) >= N
    assert w == 1 or (w - 1) ** 2 * S * S * (T + 3) < N


def test_derive_params_errors():
    with pytest.raises(ValueError):
        derive_params(10, 2, 2, Fraction(1, 10), 10, 1)
    with pytest.raises(ValueError):
        derive_params(10, 2, 1, Fraction(1, 10), 2, 1)
    with pytest.raises(ValueError):
        derive_params(10, 2, 2, Fraction(0), 2, 1)


def test_construct_two_points():
    ds = LabeledDataset(1, 2, 1, ((Fraction(-1, 2),), (Fraction(1, 2),)), (1, 2))
    net, rep = construct(ds, 1, 1)
    assert rep.verified and rep.mismatches == []
    assert rep.achieved_L == 3 * 1 * 4 + 1 == net.depth


def test_constant_labels():
    ds = gen_dataset(21, 3, 2, Fraction(1, 10), seed=5)
    ds = LabeledDataset(ds.d, ds.C, ds.delta, ds.points, (2,) * ds.N)
    net, rep = construct(ds, 3, 6)
    assert rep.verified
    assert len(set(net.meta["encoding"].w)) == 1
    _, rep1 = construct(ds, 1, 6)
    assert rep1.verified


def test_construct_200_points():
    ds = gen_dataset(200, 4, 10, Fraction(1, 100), seed=8)
    net, rep = construct(ds, 10, 6)
    assert rep.verified
    assert rep.achieved_L == 271 == net.depth
    assert rep.achieved_W <= rep.params.target_W and rep.strict_constants_ok


def test_verify_examples():
    ds = gen_dataset(15, 2, 3, Fraction(1, 10), seed=2)
    net, _ = construct(ds, 2, 6)
    assert verify(net, ds).verified
    zero = ReluNetwork((AffineLayer(((),), (0,), 2),))
    res = verify(zero, ds)
    assert [i for i, _, _ in res.mismatches] == list(range(ds.N))
    idx = list(range(ds.N))
    random.Random(0).shuffle(idx)
    perm = LabeledDataset(ds.d, ds.C, ds.delta, tuple(ds.points[i] for i in idx), tuple(ds.labels[i] for i in idx))
    assert verify(net, perm).verified
    _, rep = construct(perm, 2, 6)
    assert rep.verified


def test_sweep_rows():
    ds = gen_dataset(30, 2, 2, Fraction(1, 10), seed=1)
    one = sweep(ds, [2], [5], include_bounded=False)
    _, rep = construct(ds, 2, 5)
    assert len(one) == 1 and one[0]["verified"] == rep.verified is True
    assert one[0]["target_L"] == rep.params.target_L
    rows = sweep(ds, [1, 2, 3], [4, 5, 6], max_width=1024)
    assert all(r["verified"] for r in rows)
    by = {(r["S"], r["T"]): r for r in rows}
    for S in (1, 2, 3):
        assert by[(S, 4)]["target_L"] < by[(S, 5)]["target_L"] < by[(S, 6)]["target_L"]
    assert any((bounded_width_S(30, T), T) in by for T in (4, 5, 6))
    many = sweep(ds, [1, 2], [1, 5], max_width=300)
    full = {(r["S"], r["T"]): r for r in many}
    assert full[(1, 1)]["verified"] is None
    assert min(r["W2L2"] for r in many) <= full[(1, 1)]["W2L2"]


def test_first_width_term_monotone_in_T():
    for S in (1, 3):
        vals = [derive_params(300, 2, 2, Fraction(1, 10), S, T).lookup_width for T in range(1, 15)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_strict_constants_passes_when_within_target():
    ds = gen_dataset(12, 2, 2, Fraction(1, 10), seed=4)
    _, rep = construct(ds, 2, 4, strict_constants=True)
    assert rep.verified and rep.strict_constants_ok


def test_parallel_verify_matches_sequential(monkeypatch):
    ds = gen_dataset(24, 2, 3, Fraction(1, 10), seed=6)
    net, _ = construct(ds, 2, 6)
    shifted = LabeledDataset(ds.d, ds.C, ds.delta, ds.points, tuple(y % 3 + 1 for y in ds.labels))
    seq = verify(net, shifted, workers=1)
    monkeypatch.setenv("MEMNET_THREADS", "3")
    par = verify(net, shifted)
    assert par == seq and not seq.verified
    assert verify(net, ds, workers=2).verified
