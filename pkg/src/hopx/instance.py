"""Text instance files and seeded instance generation.

Format (``hopx-instance v1``)::

    hopx-instance v1
    kind: quadratic
    p: 2
    sigma: 1
    n: 3
    c:
    <n decimals>
    A:
    <n rows of n decimals>
    b:
    <n decimals>

``linear`` instances carry an ``a:`` block and ``point`` instances a ``b:``
block; ``l1`` instances carry only ``c:``.  Numbers are written with 17
significant digits so every double survives a round trip.  Lines starting
with ``#`` are comments.

Random data comes from numpy's PCG64 bit generator seeded with the integer
seed (``numpy.random.Generator(numpy.random.PCG64(seed))``) and drawn with
``standard_normal`` in this order:

* ``quadratic``: the ``m x n`` matrix of rows ``a_i`` (row-major), then
  ``b_i`` (``m`` values), then ``c``;
* ``l1``: ``c``;
* ``linear``: ``a``, then ``c``;
* ``point``: ``b``, then ``c``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import HopProblem
from .functions import L1Norm, LinearFunction, PointIndicator, QuadraticFunction, logsumexp_instance

__all__ = [
    "HEADER",
    "KINDS",
    "Instance",
    "InstanceParseError",
    "generate",
    "parse_instance",
    "read_instance",
    "serialize_instance",
    "write_instance",
]

HEADER = "hopx-instance v1"
KINDS = ("quadratic", "l1", "linear", "point")
_BLOCKS = {"quadratic": ("c", "A", "b"), "l1": ("c",), "linear": ("c", "a"), "point": ("c", "b")}


class InstanceParseError(ValueError):
    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass
class Instance:
    kind: str
    p: float
    sigma: float
    c: np.ndarray
    A: np.ndarray = None
    b: np.ndarray = None
    a: np.ndarray = None

    @property
    def n(self):
        return self.c.size

    def function(self):
        if self.kind == "quadratic":
            return QuadraticFunction(self.A, self.b)
        if self.kind == "l1":
            return L1Norm(self.n)
        if self.kind == "linear":
            return LinearFunction(self.a)
        return PointIndicator(self.b)

    def problem(self, p=None):
        return HopProblem(self.function(), self.sigma, self.p if p is None else p, self.c)


def _row(v):
    return " ".join(f"{float(x):.17g}" for x in v)


def serialize_instance(inst):
    lines = [HEADER, f"kind: {inst.kind}", f"p: {inst.p:.17g}",
             f"sigma: {inst.sigma:.17g}", f"n: {inst.n}"]
    for name in _BLOCKS[inst.kind]:
        lines.append(f"{name}:")
        if name == "A":
            lines.extend(_row(r) for r in inst.A)
        else:
            lines.append(_row(getattr(inst, name)))
    return "\n".join(lines) + "\n"


def parse_instance(text):
    """Parse an instance document, raising InstanceParseError with a line number."""
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0][1] != HEADER:
        raise InstanceParseError(lines[0][0] if lines else 1, f"expected header {HEADER!r}")
    pos = 1
    meta = {}

    def numbers(lineno, s, count):
        try:
            vals = np.array([float(tok) for tok in s.split()], dtype=np.float64)
        except ValueError as exc:
            raise InstanceParseError(lineno, str(exc)) from None
        if vals.size != count:
            raise InstanceParseError(lineno, f"expected {count} numbers, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise InstanceParseError(lineno, "non-finite number")
        return vals

    while pos < len(lines) and not lines[pos][1].endswith(":"):
        lineno, ln = lines[pos]
        key, sep, value = ln.partition(":")
        if not sep:
            raise InstanceParseError(lineno, f"expected 'key: value', got {ln!r}")
        meta[key.strip()] = (lineno, value.strip())
        pos += 1

    for key in ("kind", "p", "sigma", "n"):
        if key not in meta:
            raise InstanceParseError(lines[-1][0], f"missing key {key!r}")
    kind = meta["kind"][1]
    if kind not in KINDS:
        raise InstanceParseError(meta["kind"][0], f"unknown kind {kind!r}")
    try:
        p = float(meta["p"][1])
        sigma = float(meta["sigma"][1])
    except ValueError as exc:
        raise InstanceParseError(meta["p"][0], str(exc)) from None
    try:
        n = int(meta["n"][1])
    except ValueError:
        raise InstanceParseError(meta["n"][0], f"n must be an integer, got {meta['n'][1]!r}") from None
    if n < 1:
        raise InstanceParseError(meta["n"][0], "n must be positive")
    if not p >= 1:
        raise InstanceParseError(meta["p"][0], "p must be >= 1")
    if not sigma > 0:
        raise InstanceParseError(meta["sigma"][0], "sigma must be positive")

    blocks = {}
    while pos < len(lines):
        lineno, ln = lines[pos]
        name = ln[:-1].strip()
        if not ln.endswith(":") or name not in _BLOCKS[kind]:
            raise InstanceParseError(lineno, f"unexpected line {ln!r}")
        if name in blocks:
            raise InstanceParseError(lineno, f"duplicate block {name!r}")
        rows = n if name == "A" else 1
        if pos + rows >= len(lines):
            raise InstanceParseError(lineno, f"block {name!r} is truncated")
        vals = [numbers(*lines[pos + 1 + j], n) for j in range(rows)]
        blocks[name] = np.vstack(vals) if name == "A" else vals[0]
        pos += 1 + rows
    for name in _BLOCKS[kind]:
        if name not in blocks:
            raise InstanceParseError(lines[-1][0], f"missing block {name!r}")
    return Instance(kind=kind, p=p, sigma=sigma, **blocks)


def write_instance(inst, path):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(serialize_instance(inst))


def read_instance(path):
    with open(path, encoding="ascii") as fh:
        return parse_instance(fh.read())


def generate(kind, n, seed, p=2.0, sigma=1.0, m=None):
    """Draw a standard-normal instance; see the module docstring for the stream order."""
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    if kind == "quadratic":
        m = 2 * n if m is None else m
        if m < 1:
            raise ValueError("m must be positive")
        a_rows = rng.standard_normal((m, n))
        b_shift = rng.standard_normal(m)
        c = rng.standard_normal(n)
        q = logsumexp_instance(a_rows, b_shift, c)
        return Instance(kind, float(p), float(sigma), c, A=np.array(q.A), b=np.array(q.b))
    if kind == "l1":
        return Instance(kind, float(p), float(sigma), rng.standard_normal(n))
    if kind == "linear":
        a = rng.standard_normal(n)
        return Instance(kind, float(p), float(sigma), rng.standard_normal(n), a=a)
    b = rng.standard_normal(n)
    return Instance(kind, float(p), float(sigma), rng.standard_normal(n), b=b)
