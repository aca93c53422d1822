import random
from fractions import Fraction

from memnet.network import AffineLayer, ReluNetwork
from memnet.pwl import PwlFunction


def random_net(rng: random.Random, widths, in_dim=1, out_dim=1, den=4, span=4):
    """Dense random net with small rational weights; widths are the hidden sizes."""
    dims = [in_dim, *widths, out_dim]
    layers = []
    for a, b in zip(dims, dims[1:]):
        w = [[Fraction(rng.randint(-span * den, span * den), den) for _ in range(a)] for _ in range(b)]
        bias = [Fraction(rng.randint(-span * den, span * den), den) for _ in range(b)]
        layers.append(AffineLayer.dense(w, bias, a))
    return ReluNetwork(tuple(layers))


def random_pwl(rng: random.Random, n_breaks: int, lo=-50, hi=50) -> PwlFunction:
    pts = set()
    while len(pts) < n_breaks:
        pts.add(Fraction(rng.randint(lo * 12, hi * 12), 12))
    bps = sorted(pts)
    vals = [Fraction(rng.randint(-40, 40), rng.choice([1, 2, 3])) for _ in bps]
    return PwlFunction(tuple(bps), tuple(vals), Fraction(rng.randint(-3, 3)), Fraction(rng.randint(-3, 3)))


def interp_oracle(bps, vals, left, right, x):
    """Two-point interpolation written independently of pwl_eval."""
    if x <= bps[0]:
        return vals[0] + left * (x - bps[0])
    if x >= bps[-1]:
        return vals[-1] + right * (x - bps[-1])
    for (a, u), (b, v) in zip(zip(bps, vals), zip(bps[1:], vals[1:])):
        if a <= x <= b:
            return u + (v - u) * (x - a) / (b - a)
    raise AssertionError("unreachable")


def grid(g: PwlFunction):
    bps = list(g.breakpoints)
    return bps + [(a + b) / 2 for a, b in zip(bps, bps[1:])]


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
