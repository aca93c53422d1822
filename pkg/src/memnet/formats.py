"""Line-oriented text formats for datasets and networks.

Every number is written as a canonical rational (``p/q`` or ``p``), so
files round-trip byte for byte.
"""
from __future__ import annotations

import io
import os
from fractions import Fraction
from typing import TextIO, Union

from .datasets import LabeledDataset
from .network import AffineLayer, ReluNetwork
from .numerics import format_rat, parse_rat

DATASET_MAGIC = "memnet-dataset v1"
NETWORK_MAGIC = "memnet-net v1"

PathOrFile = Union[str, os.PathLike, TextIO]


class FormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _kv(text: str, keys: tuple[str, ...], lineno: int) -> dict[str, str]:
    parts = text.split(" ")
    if len(parts) != len(keys):
        raise FormatError(f"expected fields {' '.join(k + '=' for k in keys)}", lineno)
    out = {}
    for part, key in zip(parts, keys):
        k, sep, v = part.partition("=")
        if k != key or not sep:
            raise FormatError(f"expected {key}=..., got {part!r}", lineno)
        out[key] = v
    return out


def _int(text: str, lineno: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise FormatError(f"malformed integer {text!r}", lineno) from None


def _rat(text: str, lineno: int) -> Fraction:
    try:
        return parse_rat(text)
    except ValueError as exc:
        raise FormatError(str(exc), lineno) from None


def dumps_dataset(ds: LabeledDataset) -> str:
    lines = [DATASET_MAGIC, f"d={ds.d} n={ds.N} c={ds.C} delta={format_rat(ds.delta)}"]
    for p, y in zip(ds.points, ds.labels):
        lines.append(" ".join([format_rat(v) for v in p] + [str(y)]))
    return "\n".join(lines) + "\n"


def loads_dataset(text: str, validate: bool = True) -> LabeledDataset:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != DATASET_MAGIC:
        raise FormatError(f"expected {DATASET_MAGIC!r}", 1)
    if len(lines) < 2:
        raise FormatError("missing header", 2)
    hdr = _kv(lines[1], ("d", "n", "c", "delta"), 2)
    d, n, C = (_int(hdr[k], 2) for k in ("d", "n", "c"))
    delta = _rat(hdr["delta"], 2)
    if len(lines) - 2 != n:
        raise FormatError(f"header announces {n} points, file has {len(lines) - 2}", len(lines))
    pts, labels = [], []
    for i, line in enumerate(lines[2:], start=3):
        toks = line.split(" ")
        if len(toks) != d + 1:
            raise FormatError(f"expected {d} coordinates and a label", i)
        pts.append(tuple(_rat(t, i) for t in toks[:d]))
        labels.append(_int(toks[d], i))
    ds = LabeledDataset(d, C, delta, tuple(pts), tuple(labels))
    return ds.validate() if validate else ds


def dumps_network(net: ReluNetwork) -> str:
    hidden = ",".join(str(h) for h in net.hidden_dims)
    lines = [NETWORK_MAGIC, f"in={net.input_dim} out={net.output_dim} hidden={hidden}"]
    for idx, layer in enumerate(net.layers):
        lines.append(f"layer {idx}")
        for row, b in zip(layer.weight, layer.bias):
            lines.append(" ".join([format_rat(w) for w in row] + [format_rat(b)]))
    return "\n".join(lines) + "\n"


def loads_network(text: str) -> ReluNetwork:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != NETWORK_MAGIC:
        raise FormatError(f"expected {NETWORK_MAGIC!r}", 1)
    if len(lines) < 2:
        raise FormatError("missing header", 2)
    hdr = _kv(lines[1], ("in", "out", "hidden"), 2)
    dims = [_int(hdr["in"], 2)]
    if hdr["hidden"]:
        dims += [_int(h, 2) for h in hdr["hidden"].split(",")]
    dims.append(_int(hdr["out"], 2))
    pos = 2
    layers = []
    for idx in range(len(dims) - 1):
        in_dim, out_dim = dims[idx], dims[idx + 1]
        if pos >= len(lines) or lines[pos] != f"layer {idx}":
            raise FormatError(f"expected 'layer {idx}'", pos + 1)
        pos += 1
        weight, bias = [], []
        for _ in range(out_dim):
            if pos >= len(lines) or lines[pos].startswith("layer "):
                raise FormatError(f"layer {idx}: expected {out_dim} rows", pos + 1)
            toks = lines[pos].split(" ")
            if len(toks) != in_dim + 1:
                raise FormatError(
                    f"layer {idx}: dimension mismatch, row has {len(toks) - 1} weights, expected {in_dim}", pos + 1
                )
            vals = [_rat(t, pos + 1) for t in toks]
            weight.append(vals[:-1])
            bias.append(vals[-1])
            pos += 1
        layers.append(AffineLayer.dense(weight, bias, in_dim))
    if pos != len(lines):
        raise FormatError(f"layer {len(dims) - 2}: dimension mismatch, trailing rows", pos + 1)
    return ReluNetwork(tuple(layers))


def _write(text: str, dest: PathOrFile) -> None:
    if isinstance(dest, io.TextIOBase) or hasattr(dest, "write"):
        dest.write(text)
        return
    with open(dest, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)


def _read(src: PathOrFile) -> str:
    if hasattr(src, "read"):
        return src.read()
    with open(src, encoding="ascii", newline="") as fh:
        return fh.read()


def write_dataset(ds: LabeledDataset, dest: PathOrFile) -> None:
    _write(dumps_dataset(ds), dest)


def read_dataset(src: PathOrFile, validate: bool = True) -> LabeledDataset:
    return loads_dataset(_read(src), validate)


def write_network(net: ReluNetwork, dest: PathOrFile) -> None:
    _write(dumps_network(net), dest)


def read_network(src: PathOrFile) -> ReluNetwork:
    return loads_network(_read(src))
