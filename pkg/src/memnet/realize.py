"""Realizing 1-D piecewise-linear functions as ReLU networks.

Budget mode packs ``n <= 6 W^2 L`` breakpoints into width ``6W + 2`` and
depth ``2L``.  The network works on the shifted input ``z = x - alpha`` and
is exact on ``[alpha, beta]``.  Breakpoints are consumed by two-layer
blocks.  The first layer of a block computes ``relu(z - k)`` at a few
coarse knots; each neuron of the second layer is ``relu(phi(z))`` for a
zigzag ``phi`` built from those knots, and it crosses zero at exactly one
target breakpoint between each pair of consecutive knots.  So one such
neuron contributes one convex kink per group, and everything else it adds
bends only at the knots.  A correction neuron folds those knot bends, plus
a constant keeping it nonnegative, into a running accumulator.  Both ``z``
and the accumulator ride along in single ReLU channels.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from .bits import BlockEncoding
from .network import AffineLayer, ReluNetwork, concat, identity_layer, pad_to
from .pwl import PwlFunction, from_kinks, pwl_eval


class BudgetError(ValueError):
    """The breakpoint count exceeds what the (W, L) budget can hold."""

    def __init__(self, n: int, W: int, L: int):
        self.n, self.W, self.L = n, W, L
        self.min_W = max(1, math.isqrt(-(-n // (6 * L))))
        while 6 * self.min_W**2 * L < n:
            self.min_W += 1
        self.min_L = max(1, -(-n // (6 * W * W)))
        super().__init__(
            f"{n} breakpoints exceed the budget 6*W^2*L = {6 * W * W * L} for W={W}, L={L}; "
            f"feasible: W={self.min_W} at L={L}, or L={self.min_L} at W={W}"
        )


def realize_pwl(
    g: PwlFunction,
    W: int | None = None,
    L: int | None = None,
    mode: str = "budget",
    interval: tuple | None = None,
) -> ReluNetwork:
    """Build a ReLU network equal to ``g``.

    Parameters
    ----------
    g : PwlFunction
    W, L : int
        Budget-mode size parameters; the result has width <= 6W+2 and
        depth <= 2L.  Ignored in naive mode.
    mode : {"budget", "naive"}
        ``naive`` is one hidden layer of shifted ReLUs, exact on all of R.
    interval : (alpha, beta), optional
        Where budget mode must be exact.  Defaults to the breakpoint hull and
        must contain it.
    """
    if mode == "naive":
        return _naive(g)
    if mode != "budget":
        raise ValueError(f"unknown mode {mode!r}")
    if W is None or L is None or W < 1 or L < 1:
        raise ValueError("budget mode needs W >= 1 and L >= 1")
    n = len(g.breakpoints)
    if n > 6 * W * W * L:
        raise BudgetError(n, W, L)
    if interval is None:
        if not g.breakpoints:
            return _naive(g)
        interval = (g.breakpoints[0], g.breakpoints[-1])
    alpha, beta = Fraction(interval[0]), Fraction(interval[1])
    if alpha > beta:
        raise ValueError("empty interval")
    if g.breakpoints and (g.breakpoints[0] < alpha or g.breakpoints[-1] > beta):
        raise ValueError("interval must contain every breakpoint")
    return _budget(g, W, alpha, beta)


def _naive(g: PwlFunction) -> ReluNetwork:
    kinks = g.kinks()
    if not kinks:
        s, c = g.left_slope, g.offset
        if s == 0:
            hidden = AffineLayer(((),), (0,), 1)
            return ReluNetwork((hidden, AffineLayer(((),), (c,), 1)))
        hidden = AffineLayer((((0, 1),), ((0, -1),)), (0, 0), 1)
        return ReluNetwork((hidden, AffineLayer((((0, s), (1, -s)),), (c,), 2)))
    t1 = kinks[0][0]
    # g = g(t1) + s_left (x - t1) + sum c_k relu(x - t_k), and x - t1 = relu(x-t1) - relu(t1-x)
    rows = [((0, -1),)] + [((0, 1),) for _ in kinks]
    bias = [t1] + [-t for t, _ in kinks]
    hidden = AffineLayer(tuple(rows), tuple(bias), 1)
    s = g.left_slope
    out = [(0, -s)] + [(i + 1, c + (s if i == 0 else 0)) for i, (_, c) in enumerate(kinks)]
    return ReluNetwork((hidden, AffineLayer((tuple(out),), (g.values[0],), len(rows))))


def _slope_right_of(g: PwlFunction, a: Fraction) -> Fraction:
    bps = g.breakpoints
    nxt = next((b for b in bps if b > a), None)
    h = (nxt - a) if nxt is not None else Fraction(1)
    return (pwl_eval(g, a + h) - pwl_eval(g, a)) / h


def _group(kinks: list[tuple[Fraction, Fraction]], cap: int) -> list[list[tuple[Fraction, Fraction]]]:
    """Split consecutive kinks into groups holding at most ``cap`` of each sign."""
    groups, cur, npos, nneg = [], [], 0, 0
    for t, c in kinks:
        if (c > 0 and npos == cap) or (c < 0 and nneg == cap):
            groups.append(cur)
            cur, npos, nneg = [], 0, 0
        cur.append((t, c))
        if c > 0:
            npos += 1
        else:
            nneg += 1
    if cur:
        groups.append(cur)
    return groups


def _zigzag(groups, slot_kinks, knots):
    """Knot values of one family neuron and the (gamma, betas) realizing it.

    ``slot_kinks[p]`` is the (t, |c|) this neuron must bend at inside group
    ``p``, or None.  Consecutive knots bracket each group.
    """
    vals = []
    v = Fraction(-1)
    for p, _ in enumerate(groups):
        lam, rho = knots[2 * p], knots[2 * p + 1]
        kink = slot_kinks[p]
        if kink is None:
            vals += [v, v]
            continue
        t, a = kink
        if v < 0:
            vals += [a * (lam - t), a * (rho - t)]
        else:
            vals += [-a * (lam - t), -a * (rho - t)]
        v = vals[-1]
    segs = [(vals[i + 1] - vals[i]) / (knots[i + 1] - knots[i]) for i in range(len(knots) - 1)]
    betas = [segs[0]] + [segs[i] - segs[i - 1] for i in range(1, len(segs))] + [-segs[-1]]
    return vals, vals[0], betas


def _budget(g: PwlFunction, W: int, alpha: Fraction, beta: Fraction) -> ReluNetwork:
    span = beta - alpha
    base = pwl_eval(g, alpha)
    s0 = _slope_right_of(g, alpha)
    kinks = [(t - alpha, c) for t, c in g.kinks() if alpha < t < beta and c != 0]
    if not kinks:
        hidden = AffineLayer((((0, 1),),), (-alpha,), 1)
        return ReluNetwork((hidden, AffineLayer((((0, s0),),), (base,), 1)))

    cap = 3 * W
    groups = _group(kinks, cap)
    blocks = [groups[i:i + cap] for i in range(0, len(groups), cap)]
    positions = [t for t, _ in kinks]

    layers: list[AffineLayer] = []
    prev_fams: list[int] = []  # output signs of the previous block's family neurons
    total_offset = Fraction(0)
    idx = 0  # index into `positions` of the current block's first kink
    for b, block in enumerate(blocks):
        first = b == 0
        # knots bracketing each group, placed inside the gaps between groups
        knots: list[Fraction] = []
        k = idx
        for p, grp in enumerate(block):
            lo = positions[k - 1] if k > 0 else Fraction(0)
            t_first = grp[0][0]
            t_last = grp[-1][0]
            k += len(grp)
            hi = positions[k] if k < len(positions) else span
            if p == 0:
                lam = (lo + t_first) / 2
            else:
                lam = lo + 2 * (t_first - lo) / 3
            if p == len(block) - 1:
                rho = (t_last + hi) / 2
            else:
                rho = t_last + (hi - t_last) / 3
            knots += [lam, rho]
        block_kinks = [kk for grp in block for kk in grp]
        idx = k

        # family neurons: one per (sign, slot)
        pos = [[(t, c) for t, c in grp if c > 0] for grp in block]
        neg = [[(t, -c) for t, c in grp if c < 0] for grp in block]
        fams = []  # (sign, gamma, betas, knot values)
        for sign, table in ((1, pos), (-1, neg)):
            for slot in range(max(len(x) for x in table)):
                slot_kinks = [x[slot] if slot < len(x) else None for x in table]
                vals, gam, betas = _zigzag(block, slot_kinks, knots)
                fams.append((sign, gam, betas, vals))

        # G = (family sum) - (target kinks); it bends only at the knots
        h_fn = from_kinks(0, 0, block_kinks)

        def f_at(i):
            return sum((s * max(vals[i], 0) for s, _, _, vals in fams), Fraction(0))

        m = len(knots)
        gk = [f_at(i) - h_fn(knots[i]) for i in range(m)]
        f_lin = gk[0] - (f_at(0) - h_fn(knots[0] - 1))
        e_lin = gk[0] - f_lin * knots[0]
        segs = [(gk[i + 1] - gk[i]) / (knots[i + 1] - knots[i]) for i in range(m - 1)]
        s_right = (f_at(m - 1) - h_fn(knots[-1] + 1)) - gk[-1]
        slopes = [f_lin] + segs + [s_right]
        d = [slopes[i + 1] - slopes[i] for i in range(m)]

        g_end = e_lin + f_lin * span + sum((di * max(span - kn, 0) for di, kn in zip(d, knots)), Fraction(0))
        g_max = max([e_lin, g_end] + gk)
        h_pts = [Fraction(0), span] + [t for t, _ in block_kinks]
        h_min = min(h_fn(p) for p in h_pts)
        offset = max(Fraction(0), g_max, -h_min)
        total_offset += offset

        # layer 1: [z, acc, knots...]
        if first:
            z_row, z_bias = ((0, 1),), -alpha
            rows1 = [z_row, ()]
            bias1 = [z_bias, Fraction(0)]
            in1 = 1
        else:
            z_row, z_bias = ((0, 1),), Fraction(0)
            acc_row = ((1, 1),) + tuple((2 + q, s) for q, s in enumerate(prev_fams))
            rows1 = [z_row, acc_row]
            bias1 = [z_bias, Fraction(0)]
            in1 = 2 + len(prev_fams)
        for kn in knots:
            rows1.append(z_row)
            bias1.append(z_bias - kn)
        layers.append(AffineLayer(tuple(rows1), tuple(bias1), in1))

        # layer 2: [z, acc, families...]
        acc2 = [(1, 1), (0, -f_lin)] + [(2 + i, -di) for i, di in enumerate(d)]
        rows2 = [((0, 1),), tuple(acc2)]
        bias2 = [Fraction(0), offset - e_lin]
        for _, gam, betas, _ in fams:
            rows2.append(tuple((2 + i, bt) for i, bt in enumerate(betas)))
            bias2.append(gam)
        layers.append(AffineLayer(tuple(rows2), tuple(bias2), 2 + m))
        prev_fams = [s for s, _, _, _ in fams]

    out = ((0, s0), (1, 1)) + tuple((2 + q, s) for q, s in enumerate(prev_fams))
    layers.append(AffineLayer((out,), (base - total_offset,), 2 + len(prev_fams)))
    return ReluNetwork(tuple(layers))


def block_lookup_pwl(xs: Sequence[Fraction], values: Sequence[int], S: int) -> PwlFunction:
    """Step-like PWL equal to values[ceil(i/S)-1] at xs[i-1], linear between blocks."""
    n_blocks = len(values)
    if n_blocks == 1:
        return PwlFunction.constant(values[0])
    bps, vals = [], []
    for t in range(1, n_blocks):
        for x, v in ((xs[t * S - 1], values[t - 1]), (xs[t * S], values[t])):
            # with S = 1 consecutive blocks share a point, carrying the same value
            if bps and bps[-1] == x:
                continue
            bps.append(x)
            vals.append(v)
    return PwlFunction(tuple(bps), tuple(vals), 0, 0)


def build_f2(xs: Sequence, enc: BlockEncoding, W1: int, L1: int) -> ReluNetwork:
    """Map each sorted data point x_i to (x_i, u_j, w_j) of its block j.

    The result has width exactly 12*W1 + 5 and depth exactly 2*L1; it needs
    ``3 * W1**2 * L1 >= number of blocks``.
    """
    xs = [Fraction(x) for x in xs]
    n_blocks = enc.n_blocks
    if 3 * W1 * W1 * L1 < n_blocks:
        raise ValueError(f"3*W1^2*L1 = {3 * W1 * W1 * L1} < ceil(N/S) = {n_blocks}")
    if any(a >= b for a, b in zip(xs, xs[1:])) or xs[0] < 0:
        raise ValueError("data points must be nonnegative and strictly increasing")
    if -(-len(xs) // enc.S) != n_blocks:
        raise ValueError("encoding does not match the number of points")
    interval = (xs[0], xs[-1])
    g_u = block_lookup_pwl(xs, enc.u, enc.S)
    g_w = block_lookup_pwl(xs, enc.w, enc.S)
    f_u = realize_pwl(g_u, W1, L1, interval=interval)
    f_w = realize_pwl(g_w, W1, L1, interval=interval)
    f_x = ReluNetwork((AffineLayer((((0, 1),),), (0,), 1), identity_layer(1)))
    net = concat(concat(f_x, f_u), f_w)
    net = pad_to(net, W=12 * W1 + 5, L=2 * L1)
    return ReluNetwork(net.layers, {"W1": W1, "L1": L1, "u_width": f_u.width, "w_width": f_w.width})
