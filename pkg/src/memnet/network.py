"""Exact ReLU networks: representation, evaluation and network algebra.

A network is a nonempty sequence of affine layers.  ReLU is applied after
every layer except the last, so a network with ``k`` layers has depth
``k - 1``.  Weights are stored sparsely (zero entries dropped) because the
constructed memorizers are deep, narrow and mostly identity wiring.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import gmpy2
import numpy as np

from .pwl import PwlFunction

Row = tuple[tuple[int, Fraction], ...]


def _row(entries: Iterable[tuple[int, object]] | Mapping[int, object]) -> Row:
    if isinstance(entries, Mapping):
        entries = entries.items()
    acc: dict[int, Fraction] = {}
    for j, w in entries:
        acc[j] = acc.get(j, Fraction(0)) + Fraction(w)
    return tuple((j, w) for j, w in sorted(acc.items()) if w != 0)


@dataclass(frozen=True)
class AffineLayer:
    """``x -> weight @ x + bias`` with a sparse row representation."""

    rows: tuple[Row, ...]
    bias: tuple[Fraction, ...]
    in_dim: int

    def __post_init__(self):
        rows = tuple(_row(r) for r in self.rows)
        bias = tuple(Fraction(b) for b in self.bias)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "bias", bias)
        if len(rows) != len(bias):
            raise ValueError(f"weight has {len(rows)} rows but bias has {len(bias)} entries")
        for r in rows:
            if r and not 0 <= r[-1][0] < self.in_dim:
                raise ValueError("column index out of range")
            if r and r[0][0] < 0:
                raise ValueError("column index out of range")

    @classmethod
    def dense(cls, weight: Sequence[Sequence], bias: Sequence, in_dim: int | None = None) -> "AffineLayer":
        if in_dim is None:
            in_dim = len(weight[0]) if weight else 0
        for r in weight:
            if len(r) != in_dim:
                raise ValueError("ragged weight matrix")
        return cls(tuple(tuple(enumerate(r)) for r in weight), tuple(bias), in_dim)

    @property
    def out_dim(self) -> int:
        return len(self.bias)

    @property
    def weight(self) -> list[list[Fraction]]:
        out = []
        for r in self.rows:
            dense = [Fraction(0)] * self.in_dim
            for j, w in r:
                dense[j] = w
            out.append(dense)
        return out

    @property
    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def apply(self, x: Sequence) -> list:
        return [sum((w * x[j] for j, w in r), b) for r, b in zip(self.rows, self.bias)]


@dataclass(frozen=True)
class ReluNetwork:
    layers: tuple[AffineLayer, ...]
    meta: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if not layers:
            raise ValueError("a network needs at least one layer")
        for i in range(1, len(layers)):
            if layers[i].in_dim != layers[i - 1].out_dim:
                raise ValueError(
                    f"layer {i} expects {layers[i].in_dim} inputs, "
                    f"layer {i - 1} produces {layers[i - 1].out_dim}"
                )
        object.__setattr__(self, "_compiled", None)

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def depth(self) -> int:
        return len(self.layers) - 1

    @property
    def hidden_dims(self) -> list[int]:
        return [layer.out_dim for layer in self.layers[:-1]]

    @property
    def width(self) -> int:
        return max(self.hidden_dims, default=0)

    @property
    def nnz(self) -> int:
        return sum(layer.nnz for layer in self.layers)

    def param_count(self) -> int:
        """Dense parameter count of the fully connected architecture."""
        return sum(layer.out_dim * (layer.in_dim + 1) for layer in self.layers)

    def __call__(self, x: Sequence) -> list[Fraction]:
        return evaluate(self, x)

    def _compile(self):
        if self._compiled is None:
            comp = []
            for layer in self.layers:
                rows = []
                for r, b in zip(layer.rows, layer.bias):
                    cols = tuple(j for j, _ in r)
                    ws = tuple(_to_gmp(w) for _, w in r)
                    rows.append((cols, ws, _to_gmp(b)))
                comp.append(rows)
            object.__setattr__(self, "_compiled", comp)
        return self._compiled


def _to_gmp(w: Fraction):
    if w.denominator == 1:
        return gmpy2.mpz(w.numerator)
    return gmpy2.mpq(w.numerator, w.denominator)


def _from_gmp(v) -> Fraction:
    return Fraction(int(gmpy2.numer(v)), int(gmpy2.denom(v)))


def _run(net: ReluNetwork, x: Sequence, trace: list | None = None) -> list:
    if len(x) != net.input_dim:
        raise ValueError(f"input has length {len(x)}, network expects {net.input_dim}")
    zero = gmpy2.mpz(0)
    vals = [gmpy2.mpq(Fraction(v).numerator, Fraction(v).denominator) for v in x]
    comp = net._compile()
    last = len(comp) - 1
    for li, rows in enumerate(comp):
        out = []
        for cols, ws, b in rows:
            if len(cols) == 1:
                s = ws[0] * vals[cols[0]] + b
            else:
                s = b
                for j, w in zip(cols, ws):
                    s += w * vals[j]
            if li != last and s < 0:
                s = zero
            out.append(s)
        vals = out
        if trace is not None and li != last:
            trace.append([_from_gmp(v) for v in vals])
    return vals


def evaluate(net: ReluNetwork, x: Sequence) -> list[Fraction]:
    """Exact forward pass; no activation on the output layer."""
    return [_from_gmp(v) for v in _run(net, x)]


def forward_trace(net: ReluNetwork, x: Sequence) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Hidden activations of every layer plus the output."""
    trace: list = []
    out = _run(net, x, trace)
    return trace, [_from_gmp(v) for v in out]


def _int_layers(net: ReluNetwork):
    """Per layer: integer weight matrix A, integer bias B and scale q with W = A/q, b = B/q."""
    out = []
    for layer in net.layers:
        q = 1
        for r in layer.rows:
            for _, w in r:
                q = math.lcm(q, w.denominator)
        for b in layer.bias:
            q = math.lcm(q, b.denominator)
        A = [[0] * layer.in_dim for _ in layer.rows]
        for i, r in enumerate(layer.rows):
            for j, w in r:
                A[i][j] = int(w * q)
        out.append((A, [int(b * q) for b in layer.bias], q))
    return out


def evaluate_batch(net: ReluNetwork, X: Sequence[Sequence]) -> list[list[Fraction]]:
    """Exact forward pass over many inputs at once.

    Activations are carried as integer numerators over one shared
    denominator.  When a worst-case magnitude bound fits in int64 the pass
    runs as numpy integer matmuls; otherwise it falls back to ``evaluate``.
    """
    X = [[Fraction(v) for v in x] for x in X]
    if not X:
        return []
    for x in X:
        if len(x) != net.input_dim:
            raise ValueError(f"input has length {len(x)}, network expects {net.input_dim}")
    den = math.lcm(*(v.denominator for x in X for v in x)) if net.input_dim else 1
    H = [[int(v * den) for v in x] for x in X]
    if max((abs(v) for h in H for v in h), default=0) >= 2**62 or den >= 2**62:
        return [evaluate(net, x) for x in X]
    h = np.array(H, dtype=np.int64).reshape(len(X), -1).T
    d = den
    last = len(net.layers) - 1
    for li, (A, B, q) in enumerate(_int_layers(net)):
        Am = np.array(A, dtype=object).reshape(len(B), -1)
        Bv = np.array(B, dtype=object)
        # bound from the current exact values so the int64 product cannot overflow
        mag = int(np.abs(h).max()) if h.size else 0
        row = np.abs(Am).sum(axis=1) * mag + np.abs(Bv) * d if len(B) else np.zeros(0)
        if max(int(max(row, default=0)), d * q) >= 2**62:
            return [evaluate(net, x) for x in X]
        h = Am.astype(np.int64) @ h + Bv.astype(np.int64)[:, None] * d
        d *= q
        if li != last:
            np.maximum(h, 0, out=h)
    return [[Fraction(int(v), d) for v in col] for col in h.T]


def evaluate_float(net: ReluNetwork, x: Sequence[float]) -> list[float]:
    """Double-precision forward pass.  Diagnostic only: the memorizer's weights overflow it."""
    vals = [float(v) for v in x]
    last = len(net.layers) - 1
    for li, layer in enumerate(net.layers):
        vals = [sum(float(w) * vals[j] for j, w in r) + float(b) for r, b in zip(layer.rows, layer.bias)]
        if li != last:
            vals = [max(v, 0.0) for v in vals]
    return vals


# --- network algebra -------------------------------------------------------


def identity_layer(dim: int) -> AffineLayer:
    return AffineLayer(tuple(((i, 1),) for i in range(dim)), (0,) * dim, dim)


def affine_network(weight: Sequence[Sequence], bias: Sequence) -> ReluNetwork:
    """Depth-0 network (a bare affine map); used internally for composition."""
    return ReluNetwork((AffineLayer.dense(weight, bias),))


def merge_affine(outer: AffineLayer, inner: AffineLayer) -> AffineLayer:
    """The affine layer ``outer(inner(x))``."""
    if outer.in_dim != inner.out_dim:
        raise ValueError("cannot merge affine layers: dimension mismatch")
    rows, bias = [], []
    for r, b in zip(outer.rows, outer.bias):
        acc: dict[int, Fraction] = {}
        bb = b
        for k, w in r:
            for j, v in inner.rows[k]:
                acc[j] = acc.get(j, Fraction(0)) + w * v
            bb += w * inner.bias[k]
        rows.append(tuple(acc.items()))
        bias.append(bb)
    return AffineLayer(tuple(rows), tuple(bias), inner.in_dim)


def compose(f1: ReluNetwork, f2: ReluNetwork) -> ReluNetwork:
    """The network computing ``f2(f1(x))``.

    ``f1``'s output affine is folded into ``f2``'s first layer, so the width
    is ``max(W1, W2)`` and the depth ``L1 + L2``.
    """
    if f1.output_dim != f2.input_dim:
        raise ValueError(f"cannot compose: f1 outputs {f1.output_dim}, f2 expects {f2.input_dim}")
    joint = merge_affine(f2.layers[0], f1.layers[-1])
    return ReluNetwork(f1.layers[:-1] + (joint,) + f2.layers[1:], _merged_meta(f1, f2))


def _merged_meta(*nets: ReluNetwork) -> dict:
    pairs = sum(n.meta.get("pair_channels", 0) for n in nets)
    return {"pair_channels": pairs} if pairs else {}


def _shift_row(r: Row, offset: int) -> Row:
    return tuple((j + offset, w) for j, w in r)


def concat(f1: ReluNetwork, f2: ReluNetwork, nonnegative: bool = False) -> ReluNetwork:
    """The network computing ``(f1(x), f2(x))``.

    The shallower branch is depth-padded first (see :func:`pad_to`).
    """
    if f1.input_dim != f2.input_dim:
        raise ValueError(f"cannot concatenate: input dims {f1.input_dim} and {f2.input_dim}")
    depth = max(f1.depth, f2.depth)
    f1 = pad_to(f1, L=depth, nonnegative=nonnegative)
    f2 = pad_to(f2, L=depth, nonnegative=nonnegative)
    layers = []
    for i, (a, b) in enumerate(zip(f1.layers, f2.layers)):
        # the first layer shares the input; later layers are block-diagonal
        off = 0 if i == 0 else a.in_dim
        rows = a.rows + tuple(_shift_row(r, off) for r in b.rows)
        layers.append(AffineLayer(rows, a.bias + b.bias, a.in_dim + (b.in_dim if i else 0)))
    return ReluNetwork(tuple(layers), _merged_meta(f1, f2))


def pad_to(net: ReluNetwork, W: int | None = None, L: int | None = None, nonnegative: bool = False) -> ReluNetwork:
    """Embed ``net`` into a network of width ``W`` and depth ``L``.

    Extra depth is identity layers inserted right after the last hidden
    layer, whose values are post-ReLU and therefore pass through a single
    ReLU unchanged.  A depth-0 (pure affine) network has no such layer; its
    outputs are routed through one ReLU each when ``nonnegative`` certifies
    they are >= 0, otherwise through the pair ``relu(t) - relu(-t)``.
    Extra width is zero neurons in the last hidden layer.
    """
    W = net.width if W is None else W
    L = net.depth if L is None else L
    if L < net.depth or W < net.width:
        raise ValueError(f"cannot shrink a (W={net.width}, L={net.depth}) network to (W={W}, L={L})")
    layers = list(net.layers)
    meta = dict(net.meta)
    if L > 0 and net.depth == 0:
        aff = layers[0]
        k = aff.out_dim
        if nonnegative:
            layers = [aff, identity_layer(k)]
        else:
            neg = AffineLayer(tuple(tuple((j, -w) for j, w in r) for r in aff.rows), tuple(-b for b in aff.bias), aff.in_dim)
            hidden = AffineLayer(aff.rows + neg.rows, aff.bias + neg.bias, aff.in_dim)
            out = AffineLayer(tuple(((i, 1), (i + k, -1)) for i in range(k)), (0,) * k, 2 * k)
            layers = [hidden, out]
            meta["pair_channels"] = meta.get("pair_channels", 0) + k
    cur_depth = len(layers) - 1
    if L > cur_depth:
        h = layers[-2].out_dim
        layers = layers[:-1] + [identity_layer(h)] * (L - cur_depth) + layers[-1:]
    if L > 0 and W > max(layer.out_dim for layer in layers[:-1]):
        h = layers[-2]
        extra = W - h.out_dim
        layers[-2] = AffineLayer(h.rows + ((),) * extra, h.bias + (0,) * extra, h.in_dim)
        out = layers[-1]
        layers[-1] = AffineLayer(out.rows, out.bias, out.in_dim + extra)
    elif W > 0 and L == 0:
        raise ValueError("a depth-0 network has no hidden layer to widen")
    return ReluNetwork(tuple(layers), meta)


# --- exact 1-D piece propagation -------------------------------------------


def _lincomb(terms: Sequence[tuple[Fraction, PwlFunction]], bias: Fraction) -> PwlFunction:
    pts = sorted({b for _, g in terms for b in g.breakpoints})
    left = sum((c * g.left_slope for c, g in terms), Fraction(0))
    right = sum((c * g.right_slope for c, g in terms), Fraction(0))
    if not pts:
        off = bias + sum((c * g.offset for c, g in terms), Fraction(0))
        return PwlFunction.affine(left, off)
    vals = [bias + sum((c * g(p) for c, g in terms), Fraction(0)) for p in pts]
    return PwlFunction(tuple(pts), tuple(vals), left, right).simplify()


def _relu_pwl(g: PwlFunction) -> PwlFunction:
    if not g.breakpoints:
        s, c = g.left_slope, g.offset
        if s == 0:
            return PwlFunction.constant(max(c, Fraction(0)))
        z = -c / s
        return PwlFunction((z,), (Fraction(0),), s if s < 0 else 0, s if s > 0 else 0)
    bps, vals = list(g.breakpoints), list(g.values)
    new_b, new_v = [], []
    s_left = g.left_slope
    if s_left != 0:
        z = bps[0] - vals[0] / s_left
        if z < bps[0]:
            new_b.append(z)
            new_v.append(Fraction(0))
    for i, (b, v) in enumerate(zip(bps, vals)):
        if i > 0:
            a, u = bps[i - 1], vals[i - 1]
            if (u < 0 < v) or (v < 0 < u):
                new_b.append(a + (b - a) * (-u) / (v - u))
                new_v.append(Fraction(0))
        new_b.append(b)
        new_v.append(max(v, Fraction(0)))
    s_right = g.right_slope
    if s_right != 0:
        z = bps[-1] - vals[-1] / s_right
        if z > bps[-1]:
            new_b.append(z)
            new_v.append(Fraction(0))
    left_cross = bool(new_b) and new_b[0] < bps[0]
    right_cross = bool(new_b) and new_b[-1] > bps[-1]
    left = _ray_slope(s_left, vals[0], left_cross, positive_when=s_left < 0)
    right = _ray_slope(s_right, vals[-1], right_cross, positive_when=s_right > 0)
    return PwlFunction(tuple(new_b), tuple(new_v), left, right).simplify()


def _ray_slope(s, v_end, crossed, positive_when):
    # slope of relu(g) on an unbounded end piece of g
    if crossed or v_end == 0:
        return s if positive_when else Fraction(0)
    return s if v_end > 0 else Fraction(0)


def to_pwl(net: ReluNetwork) -> PwlFunction:
    """The exact PWL function computed by a 1-input, 1-output network."""
    if net.input_dim != 1 or net.output_dim != 1:
        raise ValueError("to_pwl needs a network with 1-D input and output")
    current = [PwlFunction.affine(1, 0)]
    last = len(net.layers) - 1
    for li, layer in enumerate(net.layers):
        nxt = []
        for r, b in zip(layer.rows, layer.bias):
            g = _lincomb([(w, current[j]) for j, w in r], b)
            nxt.append(g if li == last else _relu_pwl(g))
        current = nxt
    return current[0]
