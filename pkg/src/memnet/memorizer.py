"""Assembling, verifying and sweeping the exact memorizing network.

The network is projector, then block lookup, then bit lookup:
``x -> z = F1(x) -> (z, u_j, w_j) -> label``.  Its depth is exactly
``3 S (T + 3) + 1`` for every dataset.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .bits import encode_blocks
from .datasets import LabeledDataset
from .extractor import build_f3, f3_width_formula
from .network import AffineLayer, ReluNetwork, compose
from .numerics import ceil_log2
from .projector import compute_R, project
from .realize import build_f2


@dataclass(frozen=True)
class ConstructionParams:
    N: int
    d: int
    C: int
    delta: Fraction
    S: int
    T: int
    R: Fraction
    rho: int
    c: int
    W1: int
    L1: int

    @property
    def lookup_width(self) -> int:
        return 12 * self.W1 + 5

    @property
    def extract_width(self) -> int:
        return f3_width_formula(self.rho, self.c, self.T)

    @property
    def target_W(self) -> int:
        return max(self.lookup_width, self.extract_width)

    @property
    def target_L(self) -> int:
        return 3 * self.S * (self.T + 3) + 1

    @property
    def bounded_width(self) -> bool:
        """True when the lookup term does not dominate the width."""
        return self.lookup_width <= self.extract_width


def least_W1(N: int, S: int, T: int) -> int:
    """Least integer W1 with W1^2 S^2 (T+3) >= N."""
    den = S * S * (T + 3)
    w = max(1, math.isqrt(-(-N // den)))
    while w * w * den < N:
        w += 1
    while w > 1 and (w - 1) ** 2 * den >= N:
        w -= 1
    return w


def derive_params(N: int, d: int, C: int, delta, S: int, T: int) -> ConstructionParams:
    delta = Fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    if C < 2:
        raise ValueError("need at least C=2 classes")
    if not 1 <= S < N:
        raise ValueError(f"need 1 <= S < N, got S={S}, N={N}")
    if T < 1 or d < 1:
        raise ValueError("need T >= 1 and d >= 1")
    R = compute_R(N, delta, d)
    return ConstructionParams(
        N, d, C, delta, S, T, R,
        rho=max(1, ceil_log2(R)),
        c=max(1, ceil_log2(C)),
        W1=least_W1(N, S, T),
        L1=S * (T + 3),
    )


def bounded_width_S(N: int, T: int) -> int:
    """Block size near sqrt(N/(T+3)), clipped to 1..N-1."""
    return max(1, min(N - 1, round(math.sqrt(N / (T + 3)))))


@dataclass
class MemorizationReport:
    params: ConstructionParams
    achieved_W: int
    achieved_L: int
    param_count: int
    verified: bool
    mismatches: list = field(default_factory=list)
    projection_trials: int = 0
    strict_constants_ok: bool = True
    deviations: list = field(default_factory=list)
    seconds: float = 0.0

    def as_dict(self) -> dict:
        p = self.params
        return {
            "N": p.N, "d": p.d, "C": p.C, "delta": p.delta, "S": p.S, "T": p.T,
            "rho": p.rho, "c": p.c, "W1": p.W1, "L1": p.L1,
            "target_W": p.target_W, "target_L": p.target_L,
            "achieved_W": self.achieved_W, "achieved_L": self.achieved_L,
            "param_count": self.param_count, "verified": self.verified,
            "mismatches": len(self.mismatches), "projection_trials": self.projection_trials,
            "strict_constants_ok": self.strict_constants_ok,
        }


@dataclass(frozen=True)
class VerificationResult:
    verified: bool
    mismatches: tuple


def _check_chunk(net: ReluNetwork, items) -> list:
    bad = []
    for i, x, y in items:
        got = net(x)[0]
        if got != y:
            bad.append((i, y, got))
    return bad


def worker_count() -> int:
    """Worker cap from MEMNET_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("MEMNET_THREADS", "1")))
    except ValueError:
        return 1


def verify(net: ReluNetwork, ds: LabeledDataset, workers: int | None = None) -> VerificationResult:
    """Exact comparison of net(x_i) with y_i for every point."""
    if net.input_dim != ds.d or net.output_dim != 1:
        raise ValueError(f"net maps R^{net.input_dim} -> R^{net.output_dim}, dataset needs R^{ds.d} -> R")
    items = [(i, x, y) for i, (x, y) in enumerate(zip(ds.points, ds.labels))]
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) < 2 * workers:
        bad = _check_chunk(net, items)
    else:
        plain = ReluNetwork(net.layers)
        chunks = [items[k::workers] for k in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_check_chunk, [plain] * workers, chunks)
            bad = sorted(b for part in parts for b in part)
    return VerificationResult(not bad, tuple(bad))


def construct(
    ds: LabeledDataset,
    S: int,
    T: int,
    seed: int = 0,
    strict_constants: bool = False,
    max_trials: int = 64,
    check: bool = True,
) -> tuple[ReluNetwork, MemorizationReport]:
    """Build a network with net(x_i) = y_i exactly, and (optionally) verify it."""
    t0 = time.perf_counter()
    ds.validate()
    params = derive_params(ds.N, ds.d, ds.C, ds.delta, S, T)
    proj = project(ds.points, ds.delta, params.R, seed=seed, max_trials=max_trials)
    xs = [proj.values[i] for i in proj.order]
    floors = [math.floor(z) for z in xs]
    labels0 = [ds.labels[i] - 1 for i in proj.order]
    enc = encode_blocks(floors, labels0, S, params.rho, params.c)
    f2 = build_f2(xs, enc, params.W1, params.L1)
    f3 = build_f3(params.rho, params.c, S, T)
    net = compose(compose(proj.net, f2), f3)
    out = net.layers[-1]
    shifted = AffineLayer(out.rows, tuple(b + 1 for b in out.bias), out.in_dim)
    meta = {"f3": f3.meta, "f2": f2.meta, "direction": proj.direction, "encoding": enc}
    net = ReluNetwork(net.layers[:-1] + (shifted,), meta)

    deviations = []
    if f3.meta["achieved_width"] > params.extract_width:
        deviations.append(("bit lookup", f3.meta["achieved_width"], params.extract_width))
    if f2.width > params.lookup_width:
        deviations.append(("block lookup", f2.width, params.lookup_width))
    ok = net.width <= params.target_W
    if strict_constants and not ok:
        raise RuntimeError(f"achieved width {net.width} exceeds target {params.target_W}: {deviations}")
    if net.depth != params.target_L:
        raise AssertionError(f"depth {net.depth} differs from {params.target_L}")
    mismatches: tuple = ()
    verified = False
    if check:
        res = verify(net, ds)
        verified, mismatches = res.verified, res.mismatches
    report = MemorizationReport(
        params, net.width, net.depth, net.param_count(), verified, list(mismatches),
        proj.trials, ok, deviations, time.perf_counter() - t0,
    )
    return net, report


def sweep(
    ds: LabeledDataset,
    S_list,
    T_list,
    seed: int = 0,
    max_width: int | None = 512,
    include_bounded: bool = True,
) -> list[dict]:
    """One row per (S, T); rows whose target width exceeds ``max_width`` are not built.

    Unbuilt rows keep their analytic columns and report ``verified=None``.
    """
    pairs = [(S, T) for T in T_list for S in S_list]
    if include_bounded:
        for T in T_list:
            sb = bounded_width_S(ds.N, T)
            if (sb, T) not in pairs:
                pairs.append((sb, T))
    rows = []
    for S, T in pairs:
        row: dict = {"S": S, "T": T}
        try:
            p = derive_params(ds.N, ds.d, ds.C, ds.delta, S, T)
        except ValueError as exc:
            row.update(error=str(exc), verified=False)
            rows.append(row)
            continue
        W, L = p.target_W, p.target_L
        row.update(
            target_W=W, target_L=L, W2L2=W * W * L * L,
            param_count=(L - 1) * W * W + (L + 2) * W + 1,
            bounded_width=p.bounded_width, verified=None, error=None,
        )
        if max_width is None or W <= max_width:
            try:
                _, rep = construct(ds, S, T, seed=seed)
                row["verified"] = rep.verified
                row["achieved_W"] = rep.achieved_W
            except (ValueError, RuntimeError) as exc:
                row.update(error=str(exc), verified=False)
        rows.append(row)
    return rows
