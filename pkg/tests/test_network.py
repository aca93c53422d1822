import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_net
from memnet.network import (
    AffineLayer,
    ReluNetwork,
    compose,
    concat,
    evaluate,
    evaluate_batch,
    evaluate_float,
    forward_trace,
    identity_layer,
    pad_to,
    to_pwl,
)


def dense_eval(net, x):
    """Row-by-row dense evaluation oracle."""
    h = [Fraction(v) for v in x]
    for k, layer in enumerate(net.layers):
        W = layer.weight
        h = [sum((W[i][j] * h[j] for j in range(layer.in_dim)), Fraction(0)) + layer.bias[i] for i in range(layer.out_dim)]
        if k < len(net.layers) - 1:
            h = [max(v, Fraction(0)) for v in h]
    return h


def test_relu_identity_pair():
    net = ReluNetwork((AffineLayer.dense([[1], [-1]], [0, 0]), AffineLayer.dense([[1, -1]], [0])))
    for x in (-3, 0, Fraction(5, 2)):
        assert net([x]) == [Fraction(x)]
    assert (net.width, net.depth) == (2, 1)


def test_shape_mismatch_names_layer():
    with pytest.raises(ValueError, match="layer 1"):
        ReluNetwork((AffineLayer.dense([[1]], [0]), AffineLayer.dense([[1, 1]], [0])))


def test_param_count_dense():
    net = random_net(random.Random(0), [3, 4])
    assert net.param_count() == 3 * 2 + 4 * 4 + 1 * 5


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_sparse_matches_dense(seed):
    rng = random.Random(seed)
    net = random_net(rng, [rng.randint(1, 5) for _ in range(rng.randint(1, 4))], in_dim=2, out_dim=2)
    x = [Fraction(rng.randint(-20, 20), 7), Fraction(rng.randint(-20, 20), 3)]
    assert evaluate(net, x) == dense_eval(net, x)
    hidden, out = forward_trace(net, x)
    assert out == dense_eval(net, x)
    assert len(hidden) == net.depth and all(v >= 0 for h in hidden for v in h)
    approx = evaluate_float(net, [float(t) for t in x])
    assert all(math.isclose(a, float(b), rel_tol=1e-9, abs_tol=1e-9) for a, b in zip(approx, out))


def test_compose_and_concat_semantics():
    rng = random.Random(5)
    f = random_net(rng, [3, 2], in_dim=1, out_dim=2)
    g = random_net(rng, [4], in_dim=2, out_dim=1)
    h = random_net(rng, [2, 2, 2], in_dim=1, out_dim=1)
    fg = compose(f, g)
    fh = concat(f, h)
    assert fg.depth == f.depth + g.depth
    assert fh.depth == 3 and fh.width == 5
    for x in [Fraction(k, 3) for k in range(-9, 10)]:
        assert fg([x]) == g(f([x]))
        assert fh([x]) == f([x]) + h([x])


def test_pad_to_preserves_function():
    rng = random.Random(9)
    net = random_net(rng, [2, 3])
    padded = pad_to(net, W=7, L=6)
    assert (padded.width, padded.depth) == (7, 6)
    for x in [Fraction(k, 4) for k in range(-20, 21)]:
        assert padded([x]) == net([x])
    aff = ReluNetwork((AffineLayer.dense([[2]], [-3]),))
    p2 = pad_to(aff, L=2)
    assert p2.meta["pair_channels"] == 1
    assert all(p2([x]) == aff([x]) for x in (-5, 0, 7))
    with pytest.raises(ValueError):
        pad_to(net, W=1)


def test_identity_layer():
    net = ReluNetwork((identity_layer(3), identity_layer(3)))
    assert net([1, 2, 3]) == [1, 2, 3]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_to_pwl_matches_evaluation(seed):
    rng = random.Random(seed)
    net = random_net(rng, [rng.randint(1, 4) for _ in range(rng.randint(1, 4))])
    g = to_pwl(net)
    bps = list(g.breakpoints)
    probes = bps + [(a + b) / 2 for a, b in zip(bps, bps[1:])]
    lo = bps[0] if bps else Fraction(0)
    hi = bps[-1] if bps else Fraction(0)
    probes += [lo - 1, lo - 100, hi + 1, hi + 100]
    for x in probes:
        assert g(x) == net([x])[0]


def test_single_relu_unit():
    net = ReluNetwork((AffineLayer.dense([[1]], [0]), identity_layer(1)))
    assert net([-3]) == [0]
    assert net([Fraction(5, 2)]) == [Fraction(5, 2)]
    nested = ReluNetwork((AffineLayer.dense([[-1]], [1]), AffineLayer.dense([[-1]], [1]), identity_layer(1)))
    assert nested([Fraction(1, 4)]) == [Fraction(1, 4)]


def test_structural_bookkeeping():
    from memnet.extractor import build_indicator

    rng = random.Random(2)
    a = random_net(rng, [5, 5])
    b = random_net(rng, [7, 7, 7, 7, 7])
    assert concat(a, b).width == 12 and concat(a, b).depth == 5
    one = random_net(rng, [1])
    assert (compose(one, one).width, compose(one, one).depth) == (1, 2)
    pre = random_net(rng, [3, 3, 3, 3], out_dim=2)
    joined = compose(pre, build_indicator())
    assert (joined.width, joined.depth) == (3, 6)


def test_piece_counts():
    assert to_pwl(ReluNetwork((AffineLayer.dense([[3]], [1]),))).n_pieces == 1
    relu = to_pwl(ReluNetwork((AffineLayer.dense([[1]], [0]), identity_layer(1))))
    assert relu.breakpoints == (0,) and relu.n_pieces == 2
    # hat(x) = relu(x) - 2 relu(x - 1) + relu(x - 2)
    hat = ReluNetwork((AffineLayer.dense([[1], [1], [1]], [0, -1, -2]), AffineLayer.dense([[1, -2, 1]], [0])))
    twice = compose(hat, hat)
    g = to_pwl(twice)
    xs = [Fraction(k, 64) for k in range(-64, 64 * 3)]
    slopes = [(twice([b])[0] - twice([a])[0]) / (b - a) for a, b in zip(xs, xs[1:])]
    changes = sum(1 for s, t in zip(slopes, slopes[1:]) if s != t)
    assert g.n_pieces == changes + 1


@pytest.mark.parametrize("seed", range(4))
def test_evaluate_batch_matches_pointwise(seed):
    rng = random.Random(seed)
    net = random_net(rng, [3, 4, 2], in_dim=2, out_dim=2)
    X = [[Fraction(rng.randint(-30, 30), rng.choice([1, 3, 7])) for _ in range(2)] for _ in range(25)]
    assert evaluate_batch(net, X) == [evaluate(net, x) for x in X]


def test_evaluate_batch_large_magnitudes_fall_back():
    big = Fraction(2**70, 3)
    net = ReluNetwork((AffineLayer.dense([[big]], [1]), AffineLayer.dense([[big]], [0])))
    X = [[Fraction(1)], [Fraction(-1)], [Fraction(5, 2)]]
    assert evaluate_batch(net, X) == [evaluate(net, x) for x in X]
    assert evaluate_batch(net, []) == []
    with pytest.raises(ValueError):
        evaluate_batch(net, [[1, 2]])
