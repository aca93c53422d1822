"""Bit extraction, the interval indicator, the label gate, and the lookup net F3.

F3 reads a point ``x``, a packed block of floors ``u`` and a packed block of
labels ``w``, and returns the label whose floor equals ``floor(x)``.  It
scans the S packed slots one stage at a time: extract the next floor and
label, test ``x`` against the floor, and add the label to an accumulator
only when the test fires.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .network import AffineLayer, ReluNetwork

Lin = tuple[dict, Fraction]  # linear form over the previous layer's outputs


@dataclass(frozen=True)
class ExtractorSpec:
    n: int
    m: int
    L: int
    achieved_width: int

    @property
    def width_bound(self) -> int:
        return 2 ** (-(-self.m // self.L) + 2) + 2


def _lin(col: int, coef=1, bias=0) -> Lin:
    return {col: Fraction(coef)}, Fraction(bias)


def _add(*terms: tuple[Fraction, Lin], bias=0) -> Lin:
    out: dict = {}
    b = Fraction(bias)
    for s, (row, rb) in terms:
        for j, w in row.items():
            out[j] = out.get(j, Fraction(0)) + s * w
        b += s * rb
    return out, b


class _Builder:
    """Appends hidden layers of neurons given as linear forms."""

    def __init__(self, in_dim: int):
        self.in_dim = in_dim
        self.layers: list[AffineLayer] = []
        self._rows: list = []
        self._bias: list = []

    def neuron(self, form: Lin) -> int:
        self._rows.append(tuple(form[0].items()))
        self._bias.append(form[1])
        return len(self._rows) - 1

    def close(self) -> int:
        """Finish the current hidden layer; returns its width."""
        prev = self.layers[-1].out_dim if self.layers else self.in_dim
        self.layers.append(AffineLayer(tuple(self._rows), tuple(self._bias), prev))
        self._rows, self._bias = [], []
        return self.layers[-1].out_dim

    def finish(self, outputs: list[Lin], meta: dict | None = None) -> ReluNetwork:
        prev = self.layers[-1].out_dim if self.layers else self.in_dim
        out = AffineLayer(tuple(tuple(f[0].items()) for f in outputs), tuple(f[1] for f in outputs), prev)
        return ReluNetwork(tuple(self.layers) + (out,), meta or {})


def bit_schedule(m: int, L: int) -> list[int]:
    """Bits taken per layer: ceil(m/L) while they last, then zeros."""
    k = -(-m // L)
    out = []
    left = m
    for _ in range(L):
        take = min(k, left)
        out.append(take)
        left -= take
    return out


def _extract_step(b: _Builder, r: Lin, acc: Lin | None, k: int, frac_bits: int):
    """Emit one layer moving the top k bits of r (frac_bits bits) into acc.

    Returns the new (r, acc) as linear forms over the emitted layer.
    """
    r_idx = b.neuron(r)
    a_idx = b.neuron(acc) if acc is not None else None
    if k == 0:
        return _lin(r_idx), (_lin(a_idx) if a_idx is not None else None)
    # on the dyadic grid 2^k r sits at least 2^-(frac_bits) from a threshold it does not reach
    K = Fraction(2 ** (frac_bits + 2))
    scaled = _add((Fraction(2**k), r))
    pairs = []
    for j in range(1, 2**k):
        ramp = _add((K, scaled), bias=-K * j)
        hi = b.neuron(_add((1, ramp), bias=1))
        lo = b.neuron(ramp)
        pairs.append((hi, lo))
    count = {}
    for hi, lo in pairs:
        count[hi] = Fraction(1)
        count[lo] = Fraction(-1)
    new_r = _add((Fraction(2**k), _lin(r_idx)), (-1, (count, Fraction(0))))
    if a_idx is None:
        new_a = (dict(count), Fraction(0))
    else:
        new_a = _add((Fraction(2**k), _lin(a_idx)), (1, (count, Fraction(0))))
    return new_r, new_a


def build_extractor(n: int, m: int, L: int) -> ReluNetwork:
    """Net mapping BIN(0.b1..bn) to (BIN(b1..bm), BIN(0.b_{m+1}..bn)).

    Exact for dyadic inputs with n fractional bits.  Width is at most
    ``2**(ceil(m/L)+1)`` and depth exactly L.
    """
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    if L < 1:
        raise ValueError("L must be >= 1")
    b = _Builder(1)
    r, acc = _lin(0), None
    left = n
    widths = []
    for k in bit_schedule(m, L):
        r, acc = _extract_step(b, r, acc, k, left)
        left -= k
        widths.append(b.close())
    spec = ExtractorSpec(n, m, L, max(widths))
    return b.finish([acc, r], {"spec": spec})


def build_indicator() -> ReluNetwork:
    """Net of (x, y) that is 1 on y <= x <= y+1 and 0 off (y-1/2, y+3/2)."""
    b = _Builder(2)
    z = ({0: Fraction(1), 1: Fraction(-1)}, Fraction(0))
    h1 = b.neuron(_add((-2, z)))
    h2 = b.neuron(_add((2, z), bias=-2))
    b.close()
    b.neuron(({h1: Fraction(-1), h2: Fraction(-1)}, Fraction(1)))
    b.close()
    return b.finish([_lin(0)], {"target": (2, 2)})


def build_gate(c: int) -> ReluNetwork:
    """Net of (flag, t) computing relu(flag * 2^(c+1) - 2^(c+1) + t)."""
    big = Fraction(2 ** (c + 1))
    b = _Builder(2)
    b.neuron(({0: big, 1: Fraction(1)}, -big))
    b.close()
    return b.finish([_lin(0)])


def f3_width_formula(rho: int, c: int, T: int) -> int:
    return 4 * (2 ** (-(-rho // T)) + 2 ** (-(-c // T)) + 1)


def build_f3(rho: int, c: int, S: int, T: int) -> ReluNetwork:
    """Lookup net (x, u, w) -> label packed in w at the slot whose floor is floor(x).

    Depth is exactly S*(T+3).  ``meta`` records the hidden positions of the
    indicator, gate and accumulator channels for inspection.
    """
    if min(rho, c, S, T) < 1:
        raise ValueError("rho, c, S, T must all be >= 1")
    b = _Builder(3)
    x = _lin(0)
    ru = _lin(1, Fraction(1, 2 ** (rho * S)))
    rw = _lin(2, Fraction(1, 2 ** (c * S)))
    acc = ({}, Fraction(0))
    u_bits, w_bits = rho * S, c * S
    indicators, gates, accs = [], [], []
    widths = []
    sched_u, sched_w = bit_schedule(rho, T), bit_schedule(c, T)

    def layer_done():
        widths.append(b.close())

    for stage in range(S):
        seg, lab = None, None
        for ku, kw in zip(sched_u, sched_w):
            xi = b.neuron(x)
            ai = b.neuron(acc)
            ru, seg = _extract_step(b, ru, seg, ku, u_bits)
            rw, lab = _extract_step(b, rw, lab, kw, w_bits)
            u_bits -= ku
            w_bits -= kw
            x, acc = _lin(xi), _lin(ai)
            accs.append((len(b.layers), ai))
            layer_done()
        # indicator, first layer: z = x - segment
        z = _add((1, x), (-1, seg))
        h1 = b.neuron(_add((-2, z)))
        h2 = b.neuron(_add((2, z), bias=-2))
        xi, rui, rwi, ti, ai = (b.neuron(f) for f in (x, ru, rw, lab, acc))
        accs.append((len(b.layers), ai))
        layer_done()
        # indicator, second layer
        yi = b.neuron(({h1: Fraction(-1), h2: Fraction(-1)}, Fraction(1)))
        indicators.append((len(b.layers), yi))
        xi, rui, rwi, ti, ai = (b.neuron(_lin(i)) for i in (xi, rui, rwi, ti, ai))
        accs.append((len(b.layers), ai))
        layer_done()
        # gate
        big = Fraction(2 ** (c + 1))
        gi = b.neuron(({yi: big, ti: Fraction(1)}, -big))
        gates.append((len(b.layers), gi))
        xi, rui, rwi, ai = (b.neuron(_lin(i)) for i in (xi, rui, rwi, ai))
        accs.append((len(b.layers), ai))
        layer_done()
        x, ru, rw = _lin(xi), _lin(rui), _lin(rwi)
        acc = ({ai: Fraction(1), gi: Fraction(1)}, Fraction(0))
    meta = {
        "rho": rho, "c": c, "S": S, "T": T,
        "indicator_channels": indicators,
        "gate_channels": gates,
        "acc_channels": accs,
        "achieved_width": max(widths),
        "width_formula": f3_width_formula(rho, c, T),
    }
    return b.finish([acc], meta)
