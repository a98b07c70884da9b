"""Truncated formal power series Q[h]/(h^(N+1)) with exact rational coefficients.

Everything in the package uses this ring for scalars.  Values are immutable.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Iterable, Sequence

DEFAULT_TRUNC = 6


class TruncationMismatch(ValueError):
    pass


class InexactDivision(ArithmeticError):
    pass


class NotAUnit(ArithmeticError):
    pass


def parse_rational(value) -> Fraction:
    """Read ``"p/q"``, ``"p"``, an int or a Fraction.  Floats are refused."""
    if isinstance(value, float):
        raise TypeError("floating point coefficients are not accepted")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    return Fraction(str(value).strip())


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class SeriesScalar:
    """An element of Q[h]/(h^(N+1)).

    ``prec`` is the effective precision: coefficients above h^prec are not
    trustworthy.  It only drops below N after a downward :func:`h_shift`.
    """

    __slots__ = ("coeffs", "trunc", "prec")

    def __init__(self, coeffs: Iterable = (), trunc: int = DEFAULT_TRUNC, prec: int | None = None):
        if trunc < 0:
            raise ValueError("truncation order must be >= 0")
        cs = [parse_rational(c) for c in coeffs]
        if len(cs) > trunc + 1:
            cs = cs[: trunc + 1]
        cs.extend([Fraction(0)] * (trunc + 1 - len(cs)))
        self.coeffs = tuple(cs)
        self.trunc = trunc
        self.prec = trunc if prec is None else min(prec, trunc)

    # constructors -------------------------------------------------------
    @classmethod
    def const(cls, c, trunc: int = DEFAULT_TRUNC) -> "SeriesScalar":
        return cls([c], trunc)

    @classmethod
    def zero(cls, trunc: int = DEFAULT_TRUNC) -> "SeriesScalar":
        return cls((), trunc)

    @classmethod
    def one(cls, trunc: int = DEFAULT_TRUNC) -> "SeriesScalar":
        return cls([1], trunc)

    @classmethod
    def h(cls, trunc: int = DEFAULT_TRUNC) -> "SeriesScalar":
        return cls([0, 1], trunc)

    @classmethod
    def monomial(cls, c, k: int, trunc: int = DEFAULT_TRUNC) -> "SeriesScalar":
        cs = [0] * (trunc + 1)
        if k <= trunc:
            cs[k] = c
        return cls(cs, trunc)

    @classmethod
    def from_dict(cls, d: dict, trunc: int) -> "SeriesScalar":
        cs = [Fraction(0)] * (trunc + 1)
        for k, c in d.items():
            if k <= trunc:
                cs[k] += c
        return cls(cs, trunc)

    # inspection ---------------------------------------------------------
    def valuation(self) -> int:
        """Lowest h-power with nonzero coefficient; ``trunc + 1`` for zero."""
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return self.trunc + 1

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_unit(self) -> bool:
        return self.coeffs[0] != 0

    def constant(self) -> Fraction:
        return self.coeffs[0]

    def as_dict(self) -> dict:
        return {k: c for k, c in enumerate(self.coeffs) if c}

    # arithmetic ---------------------------------------------------------
    def _check(self, other: "SeriesScalar"):
        if other.trunc != self.trunc:
            raise TruncationMismatch(f"truncation orders differ: {self.trunc} vs {other.trunc}")

    def _coerce(self, other) -> "SeriesScalar":
        if isinstance(other, SeriesScalar):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return SeriesScalar.const(other, self.trunc)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return SeriesScalar([a + b for a, b in zip(self.coeffs, o.coeffs)], self.trunc,
                            min(self.prec, o.prec))

    __radd__ = __add__

    def __neg__(self):
        return SeriesScalar([-a for a in self.coeffs], self.trunc, self.prec)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return SeriesScalar([a - b for a, b in zip(self.coeffs, o.coeffs)], self.trunc,
                            min(self.prec, o.prec))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        n = self.trunc
        out = [Fraction(0)] * (n + 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j in range(n + 1 - i):
                b = o.coeffs[j]
                if b:
                    out[i + j] += a * b
        # precision of a product is limited by the lowest valuation of the other factor
        prec = min(self.prec + o.valuation(), o.prec + self.valuation(), n)
        return SeriesScalar(out, n, prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * series_invert(o)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = SeriesScalar.const(other, self.trunc)
        if not isinstance(other, SeriesScalar):
            return NotImplemented
        return self.trunc == other.trunc and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.trunc, self.coeffs))

    def __repr__(self):
        return f"SeriesScalar({self}, N={self.trunc})"

    def __str__(self):
        parts = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            cs = format_rational(c)
            if k == 0:
                parts.append(cs)
            else:
                hk = "h" if k == 1 else f"h^{k}"
                parts.append(hk if c == 1 else ("-" + hk if c == -1 else f"{cs}*{hk}"))
        return " + ".join(parts).replace("+ -", "- ") if parts else "0"

    def to_json(self) -> list:
        last = max((k for k, c in enumerate(self.coeffs) if c), default=-1)
        return [format_rational(c) for c in self.coeffs[: last + 1]]

    @classmethod
    def from_json(cls, data: Sequence, trunc: int) -> "SeriesScalar":
        if len(data) > trunc + 1 and any(parse_rational(c) for c in data[trunc + 1:]):
            raise ValueError(f"series has terms above h^{trunc}")
        return cls([parse_rational(c) for c in data[: trunc + 1]], trunc)


def series_arith(a: SeriesScalar, b: SeriesScalar, op: str) -> SeriesScalar:
    if a.trunc != b.trunc:
        raise TruncationMismatch(f"truncation orders differ: {a.trunc} vs {b.trunc}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def h_shift(a: SeriesScalar, k: int) -> SeriesScalar:
    """Multiply by h^k.  For k < 0 the division must be exact."""
    n = a.trunc
    if k >= 0:
        cs = [Fraction(0)] * k + list(a.coeffs)
        return SeriesScalar(cs[: n + 1], n, a.prec + k if a.prec < n else n)
    m = -k
    if any(a.coeffs[:m]):
        raise InexactDivision(f"{a} is not divisible by h^{m}")
    return SeriesScalar(a.coeffs[m:], n, a.prec - m)


def series_invert(a: SeriesScalar) -> SeriesScalar:
    c0 = a.coeffs[0]
    if not c0:
        raise NotAUnit(f"{a} is not a unit")
    n = a.trunc
    inv = [Fraction(0)] * (n + 1)
    inv[0] = 1 / c0
    for k in range(1, n + 1):
        s = sum((a.coeffs[j] * inv[k - j] for j in range(1, k + 1)), Fraction(0))
        inv[k] = -s / c0
    return SeriesScalar(inv, n, a.prec)


def exact_quotient(a: SeriesScalar, b: SeriesScalar) -> SeriesScalar:
    """Some q with q*b = a, assuming valuation(b) <= valuation(a)."""
    v = b.valuation()
    if v > b.trunc:
        if a.is_zero():
            return SeriesScalar.zero(a.trunc)
        raise InexactDivision("division by zero")
    if a.valuation() < v:
        raise InexactDivision(f"{a} not divisible by {b}")
    n = a.trunc
    au = SeriesScalar(list(a.coeffs[v:]), n)
    bu = SeriesScalar(list(b.coeffs[v:]), n)
    return au * series_invert(bu)


class SeriesMatrix:
    """Dense matrix with SeriesScalar entries, all of one truncation order."""

    def __init__(self, entries: Sequence[Sequence[SeriesScalar]], trunc: int | None = None,
                 shape: tuple[int, int] | None = None):
        rows = [list(r) for r in entries]
        if shape is None:
            shape = (len(rows), len(rows[0]) if rows else 0)
        self.rows, self.cols = shape
        if len(rows) != self.rows or any(len(r) != self.cols for r in rows):
            raise ValueError("matrix is not rectangular")
        if trunc is None:
            if not rows or not rows[0]:
                raise ValueError("truncation order required for an empty matrix")
            trunc = rows[0][0].trunc
        for r in rows:
            for x in r:
                if x.trunc != trunc:
                    raise TruncationMismatch("matrix entries with differing truncation orders")
        self.trunc = trunc
        self.entries = rows

    @classmethod
    def zeros(cls, rows: int, cols: int, trunc: int) -> "SeriesMatrix":
        z = SeriesScalar.zero(trunc)
        return cls([[z] * cols for _ in range(rows)], trunc, (rows, cols))

    @classmethod
    def identity(cls, n: int, trunc: int) -> "SeriesMatrix":
        m = cls.zeros(n, n, trunc)
        for i in range(n):
            m.entries[i][i] = SeriesScalar.one(trunc)
        return m

    @classmethod
    def from_rationals(cls, rows, trunc: int) -> "SeriesMatrix":
        """Build from nested lists whose items are scalars or h-coefficient lists."""
        def conv(x):
            if isinstance(x, SeriesScalar):
                return x
            if isinstance(x, (list, tuple)):
                return SeriesScalar(x, trunc)
            return SeriesScalar.const(x, trunc)
        rows = [[conv(x) for x in r] for r in rows]
        return cls(rows, trunc, (len(rows), len(rows[0]) if rows else 0))

    def copy(self) -> "SeriesMatrix":
        return SeriesMatrix([list(r) for r in self.entries], self.trunc, (self.rows, self.cols))

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __matmul__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        if self.trunc != other.trunc:
            raise TruncationMismatch("matrix truncation orders differ")
        z = SeriesScalar.zero(self.trunc)
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = z
                for k in range(self.cols):
                    a = self.entries[i][k]
                    if a.is_zero():
                        continue
                    b = other.entries[k][j]
                    if not b.is_zero():
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return SeriesMatrix(out, self.trunc, (self.rows, other.cols))

    def __add__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        return SeriesMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)],
                            self.trunc, (self.rows, self.cols))

    def __sub__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        return SeriesMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)],
                            self.trunc, (self.rows, self.cols))

    def scale(self, c: SeriesScalar) -> "SeriesMatrix":
        return SeriesMatrix([[c * a for a in r] for r in self.entries], self.trunc, (self.rows, self.cols))

    def transpose(self) -> "SeriesMatrix":
        return SeriesMatrix([[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)],
                            self.trunc, (self.cols, self.rows))

    def is_zero(self) -> bool:
        return all(x.is_zero() for r in self.entries for x in r)

    def __eq__(self, other):
        if not isinstance(other, SeriesMatrix):
            return NotImplemented
        return (self.rows, self.cols, self.trunc) == (other.rows, other.cols, other.trunc) and \
            self.entries == other.entries

    def __repr__(self):
        body = "; ".join(", ".join(str(x) for x in r) for r in self.entries)
        return f"SeriesMatrix([{body}], N={self.trunc})"


def smith_normal_form(m: SeriesMatrix):
    """Diagonalize ``m`` over the local ring Q[h]/(h^(N+1)).

    Returns ``(divisors, U, V, D)`` with ``U @ m @ V == D`` diagonal, ``U`` and
    ``V`` invertible, and ``divisors`` the h-exponents of the diagonal entries
    (length min(rows, cols), sorted; ``N+1`` stands for a zero entry).
    Every nonzero diagonal entry of ``D`` is exactly a power of h.
    """
    n = m.trunc
    R, C = m.rows, m.cols
    a = [list(r) for r in m.entries]
    U = SeriesMatrix.identity(R, n).entries
    V = SeriesMatrix.identity(C, n).entries
    zero = SeriesScalar.zero(n)
    divisors = []
    for t in range(min(R, C)):
        best = None
        for i in range(t, R):
            for j in range(t, C):
                v = a[i][j].valuation()
                if v <= n and (best is None or v < best[0]):
                    best = (v, i, j)
                    if v == 0:
                        break
            if best is not None and best[0] == 0:
                break
        if best is None:
            divisors.extend([n + 1] * (min(R, C) - t))
            break
        v, pi, pj = best
        a[t], a[pi] = a[pi], a[t]
        U[t], U[pi] = U[pi], U[t]
        for row in a:
            row[t], row[pj] = row[pj], row[t]
        for row in V:
            row[t], row[pj] = row[pj], row[t]
        # scale pivot row so the pivot is exactly h^v
        piv = a[t][t]
        unit_inv = series_invert(h_shift_loose(piv, v))
        a[t] = [unit_inv * x for x in a[t]]
        U[t] = [unit_inv * x for x in U[t]]
        hv = SeriesScalar.monomial(1, v, n)
        for i in range(R):
            if i == t or a[i][t].is_zero():
                continue
            f = exact_quotient(a[i][t], hv)
            a[i] = [x - f * y for x, y in zip(a[i], a[t])]
            U[i] = [x - f * y for x, y in zip(U[i], U[t])]
        for j in range(C):
            if j == t or a[t][j].is_zero():
                continue
            f = exact_quotient(a[t][j], hv)
            for i in range(R):
                a[i][j] = a[i][j] - a[i][t] * f
            for i in range(C):
                V[i][j] = V[i][j] - V[i][t] * f
        divisors.append(v)
    D = SeriesMatrix(a if R else [], n, (R, C))
    return (sorted(divisors), SeriesMatrix(U, n, (R, R)), SeriesMatrix(V, n, (C, C)), D)


def h_shift_loose(a: SeriesScalar, k: int) -> SeriesScalar:
    """Divide by h^k discarding the (already checked zero) low coefficients."""
    return SeriesScalar(list(a.coeffs[k:]), a.trunc)


def random_series(rng: random.Random, trunc: int, unit: bool = False, span: int = 5) -> SeriesScalar:
    cs = [Fraction(rng.randint(-span, span), rng.randint(1, 3)) for _ in range(trunc + 1)]
    if unit and not cs[0]:
        cs[0] = Fraction(1)
    return SeriesScalar(cs, trunc)
