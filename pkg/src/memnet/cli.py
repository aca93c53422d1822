"""Command-line driver: ``memnet <command> [options]``.

Each command prints a short human-readable summary followed by a
``key=value`` block, and exits with status 0 exactly when its verdict is
success.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import bounds as bd
from .datasets import gen_dataset
from .formats import read_dataset, read_network, write_dataset, write_network
from .memorizer import construct, sweep, verify
from .network import to_pwl
from .numerics import format_rat, parse_rat


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        if "-" in part and not part.startswith("-"):
            lo, hi = part.split("-")
            out += list(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _kv_block(pairs: dict, stream=None) -> None:
    stream = stream or sys.stdout
    for k, v in pairs.items():
        if isinstance(v, Fraction):
            v = format_rat(v)
        print(f"{k}={v}", file=stream)


def cmd_gen(args) -> int:
    ds = gen_dataset(args.N, args.d, args.C, args.delta, args.seed)
    write_dataset(ds, args.out)
    print(f"wrote {ds.N} points in dimension {ds.d} to {args.out}")
    _kv_block({"N": ds.N, "d": ds.d, "C": ds.C, "delta": ds.delta, "seed": args.seed})
    return 0


def cmd_construct(args) -> int:
    ds = read_dataset(args.data)
    net, rep = construct(ds, args.S, args.T, seed=args.seed,
                         strict_constants=args.strict_constants, max_trials=args.max_trials)
    if args.out_net:
        write_network(net, args.out_net)
    info = rep.as_dict()
    print(f"constructed width {rep.achieved_W} (target {rep.params.target_W}), "
          f"depth {rep.achieved_L} (target {rep.params.target_L}); verified={rep.verified}")
    for name, got, want in rep.deviations:
        print(f"deviation in {name}: width {got} vs {want}")
    if args.report:
        with open(args.report, "w") as fh:
            _kv_block(info, fh)
    _kv_block(info)
    return 0 if rep.verified else 1


def cmd_verify(args) -> int:
    net = read_network(args.net)
    ds = read_dataset(args.data)
    res = verify(net, ds)
    for i, want, got in res.mismatches[:20]:
        print(f"mismatch at {i}: expected {want}, got {format_rat(got)}")
    _kv_block({"N": ds.N, "mismatches": len(res.mismatches), "verified": res.verified})
    return 0 if res.verified else 1


def cmd_sweep(args) -> int:
    ds = read_dataset(args.data)
    rows = sweep(ds, _int_list(args.S_list), _int_list(args.T_list), seed=args.seed,
                 max_width=args.max_width)
    cols = ("S", "T", "target_W", "target_L", "W2L2", "param_count", "bounded_width", "verified")
    print(" ".join(f"{c:>12}" for c in cols))
    for r in rows:
        print(" ".join(f"{str(r.get(c, '')):>12}" for c in cols))
    built = [r for r in rows if r.get("verified") is not None]
    ok = all(r["verified"] for r in built)
    good = [r for r in rows if r.get("W2L2") is not None]
    best = min(good, key=lambda r: r["W2L2"]) if good else None
    summary = {"rows": len(rows), "built": len(built), "all_verified": ok}
    if best:
        summary.update(best_S=best["S"], best_T=best["T"], best_W2L2=best["W2L2"])
    _kv_block(summary)
    return 0 if ok else 1


def cmd_bounds(args) -> int:
    rep = bd.thm32_feasibility(args.W, args.L, args.N, args.C, args.delta)
    lines = rep.lines()
    ok = bool(rep.necessary_condition_holds)
    if args.prop33:
        p = bd.prop33_check(args.W, args.L, args.N, args.delta)
        lines += [f"prop33_{ln}" for ln in p.lines()[1:]]
        ok = ok and all(h is not False for _, _, _, h in p.implied_inequalities)
    for ln in lines:
        print(ln)
    print(f"param_count={bd.param_count(args.W, args.L)}")
    print(f"serra_bound={bd.serra_bound(args.W, args.L)}")
    return 0 if ok else 1


def cmd_pieces(args) -> int:
    net = read_network(args.net)
    if net.input_dim != 1 or net.output_dim != 1:
        print("pieces needs a network from R to R", file=sys.stderr)
        return 2
    g = to_pwl(net).simplify()
    bound = bd.serra_bound(max(net.width, 1), max(net.depth, 1))
    _kv_block({"pieces": g.n_pieces, "width": net.width, "depth": net.depth, "serra_bound": bound})
    return 0 if g.n_pieces <= bound else 1


def cmd_patterns(args) -> int:
    n = args.points
    xs = [Fraction(-1) + Fraction(2 * i, max(n - 1, 1)) for i in range(n)]
    count = bd.sample_sign_patterns(args.W, args.L, xs, args.C, args.samples, args.seed)
    ceilings = bd.sign_pattern_ceilings(args.W, args.L, n, args.C)
    low = min(ceilings.values())
    kv = {"patterns": count}
    kv.update({f"ceiling_{k}": format_rat(v) if v.denominator == 1 else f"{float(v):.6g}" for k, v in ceilings.items()})
    _kv_block(kv)
    return 0 if count <= low else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="memnet", description="Exact ReLU memorizers and capacity bounds.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a separated labeled dataset")
    g.add_argument("--N", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--C", type=int, required=True)
    g.add_argument("--delta", type=parse_rat, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("construct", help="build and verify a memorizing network")
    c.add_argument("--data", required=True)
    c.add_argument("--S", type=int, required=True)
    c.add_argument("--T", type=int, required=True)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--strict-constants", action="store_true")
    c.add_argument("--max-trials", type=int, default=64)
    c.add_argument("--out-net")
    c.add_argument("--report")
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", help="check a network against a dataset exactly")
    v.add_argument("--net", required=True)
    v.add_argument("--data", required=True)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="tabulate the width/depth trade-off")
    s.add_argument("--data", required=True)
    s.add_argument("--S-list", required=True, help="e.g. 1,2,4 or 1-14")
    s.add_argument("--T-list", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-width", type=int, default=512)
    s.set_defaults(func=cmd_sweep)

    b = sub.add_parser("bounds", help="necessary-size calculators")
    b.add_argument("--W", type=int, required=True)
    b.add_argument("--L", type=int, required=True)
    b.add_argument("--N", type=int, required=True)
    b.add_argument("--C", type=int, required=True)
    b.add_argument("--delta", type=parse_rat, required=True)
    b.add_argument("--prop33", action="store_true")
    b.set_defaults(func=cmd_bounds)

    pc = sub.add_parser("pieces", help="count linear pieces of a 1-D network")
    pc.add_argument("--net", required=True)
    pc.set_defaults(func=cmd_pieces)

    pt = sub.add_parser("patterns", help="sample sign patterns of a width/depth class")
    pt.add_argument("--W", type=int, required=True)
    pt.add_argument("--L", type=int, required=True)
    pt.add_argument("--points", type=int, required=True)
    pt.add_argument("--C", type=int, default=2)
    pt.add_argument("--samples", type=int, default=10000)
    pt.add_argument("--seed", type=int, default=0)
    pt.set_defaults(func=cmd_patterns)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
