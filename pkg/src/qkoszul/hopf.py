"""Coproducts, twisting by R = exp(h r), the dual pairing, and the quantum-duality functor.

The dual side is handled through the functionals xi_1..xi_n on U(g)[[h]]
defined by <xi_i, X^a> = 1 if X^a = X_i and 0 otherwise.  Products of xi's are
the transpose of the twisted coproduct.  The monomial xi^alpha means the ordered
product xi_1^{alpha_1} ... xi_n^{alpha_n}; it pairs with X^alpha to alpha!
modulo h (no divided-power normalization).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from math import factorial
from typing import Mapping, Sequence

from .ncpoly import (NCPoly, Presentation, PresentationError, _unit, expo_degree)
from .series import DEFAULT_TRUNC, InexactDivision, SeriesScalar


class DegreeCapTooSmall(RuntimeError):
    pass


def monomials_upto(n: int, d: int, lo: int = 0) -> list:
    """All exponent vectors of total degree lo..d, sorted by degree then lexicographically."""
    out = []

    def rec(prefix, left, i):
        if i == n - 1:
            out.append(tuple(prefix + [left]))
            return
        for a in range(left, -1, -1):
            rec(prefix + [a], left - a, i + 1)

    for deg in range(lo, d + 1):
        if n == 0:
            if deg == 0:
                out.append(())
            continue
        rec([], deg, 0)
    return out


def expo_factorial(e) -> int:
    r = 1
    for a in e:
        r *= factorial(a)
    return r


class TensorElement:
    """Element of U (x) U: sparse map (left expo, right expo, h-power) -> rational."""

    __slots__ = ("n", "trunc", "_t")

    def __init__(self, n: int, trunc: int, terms: Mapping | None = None):
        self.n, self.trunc = n, trunc
        self._t = {}
        for key, c in (terms or {}).items():
            if c and key[2] <= trunc:
                self._t[(tuple(key[0]), tuple(key[1]), key[2])] = Fraction(c)

    @classmethod
    def _raw(cls, n, trunc, t) -> "TensorElement":
        x = cls.__new__(cls)
        x.n, x.trunc = n, trunc
        x._t = {k: c for k, c in t.items() if c}
        return x

    @classmethod
    def simple(cls, a: NCPoly, b: NCPoly) -> "TensorElement":
        t: dict = {}
        for (e1, k1), c1 in a.items():
            for (e2, k2), c2 in b.items():
                if k1 + k2 <= a.trunc:
                    key = (e1, e2, k1 + k2)
                    t[key] = t.get(key, 0) + c1 * c2
        return cls._raw(a.n, a.trunc, t)

    def items(self):
        return self._t.items()

    def flat(self) -> dict:
        return dict(self._t)

    def is_zero(self) -> bool:
        return not self._t

    def __add__(self, o):
        t = dict(self._t)
        for k, c in o._t.items():
            t[k] = t.get(k, 0) + c
        return TensorElement._raw(self.n, self.trunc, t)

    def __sub__(self, o):
        t = dict(self._t)
        for k, c in o._t.items():
            t[k] = t.get(k, 0) - c
        return TensorElement._raw(self.n, self.trunc, t)

    def __neg__(self):
        return TensorElement._raw(self.n, self.trunc, {k: -c for k, c in self._t.items()})

    def scale(self, c, hpow: int = 0) -> "TensorElement":
        return TensorElement._raw(self.n, self.trunc, {(a, b, k + hpow): v * c for (a, b, k), v in self._t.items()
                                                       if k + hpow <= self.trunc})

    def __eq__(self, o):
        if not isinstance(o, TensorElement):
            return NotImplemented
        return (self.n, self.trunc, self._t) == (o.n, o.trunc, o._t)

    def coeff(self, a, b) -> SeriesScalar:
        return SeriesScalar.from_dict({k: c for (x, y, k), c in self._t.items() if x == tuple(a) and y == tuple(b)},
                                      self.trunc)

    def format(self, names: Sequence[str] | None = None) -> str:
        names = names or [f"e{i + 1}" for i in range(self.n)]

        def mon(e):
            s = "*".join(names[i] + (f"^{a}" if a > 1 else "") for i, a in enumerate(e) if a)
            return s or "1"
        acc: dict = {}
        for (a, b, k), c in self._t.items():
            acc.setdefault((a, b), {})[k] = c
        parts = []
        for (a, b) in sorted(acc, key=lambda ab: (sum(ab[0]) + sum(ab[1]), ab)):
            s = str(SeriesScalar.from_dict(acc[(a, b)], self.trunc))
            body = f"{mon(a)}(x){mon(b)}"
            parts.append(body if s == "1" else f"({s})*{body}")
        return " + ".join(parts) if parts else "0"

    def to_json(self) -> list:
        from .series import format_rational
        return [{"coeff": format_rational(c), "h_pow": k, "left": list(a), "right": list(b)}
                for (a, b, k), c in sorted(self._t.items())]

    def __repr__(self):
        return f"TensorElement({self.format()})"


def tensor_mul(x: TensorElement, y: TensorElement, p: Presentation) -> TensorElement:
    """Leg-wise product in U_h (x) U_h."""
    N = p.trunc
    out: dict = {}
    for (a1, b1, k1), c1 in x.items():
        for (a2, b2, k2), c2 in y.items():
            k = k1 + k2
            if k > N:
                continue
            left = p._mul_mono(a1, a2, N - k)
            for (a3, ka), ca in left.items():
                right = p._mul_mono(b1, b2, N - k - ka)
                for (b3, kb), cb in right.items():
                    key = (a3, b3, k + ka + kb)
                    out[key] = out.get(key, 0) + c1 * c2 * ca * cb
    return TensorElement._raw(p.n, N, out)


def counit(poly: NCPoly) -> SeriesScalar:
    return poly.constant()


def primitive(i: int, p: Presentation) -> TensorElement:
    z = (0,) * p.n
    u = _unit(p.n, i)
    return TensorElement._raw(p.n, p.trunc, {(u, z, 0): Fraction(1), (z, u, 0): Fraction(1)})


def coproduct_pbw(m, p: Presentation) -> TensorElement:
    """Delta(X^m) with every generator primitive, multiplied out inside U_h (x) U_h."""
    m = tuple(m)
    z = (0,) * p.n
    acc = TensorElement._raw(p.n, p.trunc, {(z, z, 0): Fraction(1)})
    for i, a in enumerate(m):
        for _ in range(a):
            acc = tensor_mul(acc, primitive(i, p), p)
    return acc


def apply_counit_left(x: TensorElement) -> NCPoly:
    """(eps (x) id)(x)."""
    z = (0,) * x.n
    return NCPoly(x.n, x.trunc, {(b, k): c for (a, b, k), c in x.items() if a == z})


def apply_counit_right(x: TensorElement) -> NCPoly:
    z = (0,) * x.n
    return NCPoly(x.n, x.trunc, {(a, k): c for (a, b, k), c in x.items() if b == z})


@dataclass
class TwistData:
    """Classical U(g) plus r = sum sign * X_i (x) X_j, twisted by R = exp(h r)."""

    base: Presentation
    r_terms: list = field(default_factory=list)  # (sign, i, j), 0-based

    def __post_init__(self):
        if not self.base.is_classical():
            raise PresentationError("the twisted algebra must be a classical enveloping algebra")
        self._r = None
        self._cache: dict = {}

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def trunc(self) -> int:
        return self.base.trunc

    def r_tensor(self) -> TensorElement:
        if self._r is None:
            t: dict = {}
            for s, i, j in self.r_terms:
                key = (_unit(self.n, i), _unit(self.n, j), 0)
                t[key] = t.get(key, 0) + Fraction(s)
            self._r = TensorElement._raw(self.n, self.trunc, t)
        return self._r

    def R(self, sign: int = 1) -> TensorElement:
        """exp(sign * h r), truncated."""
        p = self.base
        r = self.r_tensor().scale(sign, 1)
        z = (0,) * self.n
        term = TensorElement._raw(self.n, self.trunc, {(z, z, 0): Fraction(1)})
        total = term
        for k in range(1, self.trunc + 1):
            term = tensor_mul(term, r, p).scale(Fraction(1, k))
            if term.is_zero():
                break
            total = total + term
        return total

    def coproduct(self, m) -> TensorElement:
        m = tuple(m)
        hit = self._cache.get(m)
        if hit is None:
            hit = twist_coproduct(self, m)
            self._cache[m] = hit
        return hit

    def to_json(self) -> dict:
        return {"base": self.base.to_json(),
                "r": [{"sign": s, "i": i + 1, "j": j + 1} for s, i, j in self.r_terms]}

    @classmethod
    def from_json(cls, data: Mapping, trunc: int | None = None) -> "TwistData":
        base = Presentation.from_json(data["base"], trunc=trunc)
        r = []
        for t in data.get("r", []):
            s = int(t["sign"])
            i, j = int(t["i"]) - 1, int(t["j"]) - 1
            if not (0 <= i < base.n and 0 <= j < base.n):
                raise PresentationError(f"twist index out of range: {t}")
            r.append((s, i, j))
        return cls(base, r)


def load_twist(path, trunc: int | None = None) -> TwistData:
    with open(path) as fh:
        return TwistData.from_json(json.load(fh), trunc=trunc)


def twist_coproduct(t: TwistData, m) -> TensorElement:
    """R^{-1} Delta_0(X^m) R = sum_k h^k/k! ad^k(Delta_0 X^m), ad(A) = A r - r A."""
    p = t.base
    delta = coproduct_pbw(m, p)
    if not t.r_terms:
        return delta
    r = t.r_tensor()
    total = delta
    cur = delta
    for k in range(1, t.trunc + 1):
        cur = (tensor_mul(cur, r, p) - tensor_mul(r, cur, p)).scale(Fraction(1, k))
        if cur.is_zero():
            break
        total = total + cur.scale(1, k)
    return total


def pair_tensor(xi_pairs: Mapping, x: TensorElement) -> SeriesScalar:
    """<sum c xi_i (x) xi_j, x> for degree-one functionals given as {(i, j): c}."""
    n = x.n
    acc: dict = {}
    for (a, b, k), c in x.items():
        if sum(a) == 1 and sum(b) == 1:
            w = xi_pairs.get((a.index(1), b.index(1)))
            if w:
                acc[k] = acc.get(k, 0) + c * w
    return SeriesScalar.from_dict(acc, x.trunc)


class DualPairing:
    """Values <xi^alpha, X^beta> for the twisted coproduct, computed lazily."""

    def __init__(self, t: TwistData, alpha_cap: int):
        self.t = t
        self.n = t.n
        self.N = t.trunc
        self.alpha_cap = alpha_cap
        self._cols: dict = {}

    def column(self, beta, prec: int | None = None) -> dict:
        """{(alpha, k): c} with <xi^alpha, X^beta> = sum_k c h^k."""
        beta = tuple(beta)
        prec = self.N if prec is None else prec
        key = (beta, prec)
        hit = self._cols.get(key)
        if hit is not None:
            return hit
        n = self.n
        if sum(beta) == 0:
            res = {((0,) * n, 0): Fraction(1)}
            self._cols[key] = res
            return res
        res: dict = {}
        for (a, b, k), c in self.t.coproduct(beta).items():
            if k > prec or sum(a) != 1:
                continue
            i = a.index(1)
            for (alpha, k2), v in self.column(b, prec - k).items():
                if any(alpha[:i]) or sum(alpha) + 1 > self.alpha_cap:
                    continue
                na = list(alpha)
                na[i] += 1
                kk = (tuple(na), k + k2)
                res[kk] = res.get(kk, 0) + c * v
        res = {kk: c for kk, c in res.items() if c}
        self._cols[key] = res
        return res

    def value(self, alpha, beta) -> SeriesScalar:
        alpha = tuple(alpha)
        return SeriesScalar.from_dict({k: c for (a, k), c in self.column(beta).items() if a == alpha}, self.N)


def pairing_matrix(t: TwistData, degree_cap: int):
    """Square matrix P[alpha, beta] over monomials of degree <= cap, plus the index list."""
    from .series import SeriesMatrix
    if degree_cap < 1:
        raise ValueError("degree cap must be >= 1")
    pair = DualPairing(t, degree_cap)
    mons = monomials_upto(t.n, degree_cap)
    index = {m: i for i, m in enumerate(mons)}
    N = t.trunc
    z = SeriesScalar.zero(N)
    rows = [[z] * len(mons) for _ in mons]
    for j, beta in enumerate(mons):
        acc: dict = {}
        for (alpha, k), c in pair.column(beta).items():
            if alpha in index:
                acc.setdefault(alpha, {})[k] = c
        for alpha, d in acc.items():
            rows[index[alpha]][j] = SeriesScalar.from_dict(d, N)
    return SeriesMatrix(rows, N, (len(mons), len(mons))), mons


def _solve_against_pairing(target: dict, pair: DualPairing, domain: list, N: int) -> dict:
    """Find coef {(alpha, k)} with sum_alpha coef_alpha <xi^alpha, X^beta> = target(beta) on domain.

    ``target`` maps beta -> {k: c}.  Uses that P = diag(alpha!) mod h.
    """
    coef: dict = {}
    for _ in range(N + 2):
        new: dict = {}
        for beta in domain:
            acc = dict(target.get(beta, {}))
            # subtract off-diagonal contributions of the current guess
            col = pair.column(beta)
            for (alpha, k), v in col.items():
                for kk in range(N + 1 - k):
                    c = coef.get((alpha, kk))
                    if c is None:
                        continue
                    if alpha == beta and k == 0:
                        continue
                    acc[k + kk] = acc.get(k + kk, 0) - c * v
            diag = expo_factorial(beta)
            for k, c in acc.items():
                if c:
                    new[(beta, k)] = Fraction(c) / diag
        if new == coef:
            break
        coef = new
    return coef


def _residual(coef: dict, target: dict, pair: DualPairing, betas: list, N: int) -> list:
    bad = []
    for beta in betas:
        acc = dict(target.get(beta, {}))
        for (alpha, k), v in pair.column(beta).items():
            for kk in range(N + 1 - k):
                c = coef.get((alpha, kk))
                if c is not None:
                    acc[k + kk] = acc.get(k + kk, 0) - c * v
        if any(acc.values()):
            bad.append(beta)
    return bad


def dual_product(i: int, j: int, t: TwistData, degree_cap: int = 6, guard: int = 2,
                 pairing: DualPairing | None = None) -> NCPoly:
    """xi_i . xi_j - xi_j . xi_i written in the ordered xi-monomial basis."""
    n, N = t.n, t.trunc
    pair = pairing or DualPairing(t, degree_cap + guard)
    target: dict = {}
    mons = monomials_upto(n, degree_cap + guard, lo=1)
    w = {(i, j): 1, (j, i): -1}
    for beta in mons:
        v = pair_tensor(w, t.coproduct(beta)).as_dict()
        if v:
            target[beta] = v
    domain = [b for b in mons if sum(b) <= degree_cap]
    coef = _solve_against_pairing(target, pair, domain, N)
    bad = _residual(coef, target, pair, [b for b in mons if sum(b) > degree_cap], N)
    if bad:
        raise DegreeCapTooSmall(f"commutator functional ({i + 1},{j + 1}) does not close at degree cap "
                                f"{degree_cap}: residual on X^{list(bad[0])}")
    return NCPoly(n, N, coef)


def dual_coproduct(i: int, t: TwistData, degree_cap: int = 6, guard: int = 1,
                   pairing: DualPairing | None = None) -> TensorElement:
    """Delta_h(xi_i), the transpose of multiplication, in the xi (x) xi basis."""
    n, N = t.n, t.trunc
    p = t.base
    top = degree_cap + guard
    pair = pairing or DualPairing(t, top)
    ui = _unit(n, i)
    pairs = []
    target: dict = {}
    mons = monomials_upto(n, top)
    for a in mons:
        for b in mons:
            if sum(a) + sum(b) > top:
                continue
            pairs.append((a, b))
            v = {k: c for (e, k), c in p._mul_mono(a, b, N).items() if e == ui}
            if v:
                target[(a, b)] = v
    domain = [ab for ab in pairs if sum(ab[0]) + sum(ab[1]) <= degree_cap]

    def value(coef, a, b):
        # sum coef[alpha,gamma,k] <xi^alpha, X^a> <xi^gamma, X^b>
        acc: dict = {}
        ca, cb = pair.column(a), pair.column(b)
        for (alpha, gamma, k), c in coef.items():
            for (al, k1), v1 in ca.items():
                if al != alpha:
                    continue
                for (ga, k2), v2 in cb.items():
                    if ga != gamma:
                        continue
                    kk = k + k1 + k2
                    if kk <= N:
                        acc[kk] = acc.get(kk, 0) + c * v1 * v2
        return acc

    coef: dict = {}
    for _ in range(N + 2):
        new: dict = {}
        for (a, b) in domain:
            acc = dict(target.get((a, b), {}))
            cur = value(coef, a, b)
            old = {k: c for (al, ga, k), c in coef.items() if al == a and ga == b}
            diag = expo_factorial(a) * expo_factorial(b)
            for k, c in cur.items():
                acc[k] = acc.get(k, 0) - c
            for k, c in old.items():
                acc[k] = acc.get(k, 0) + c * diag
            for k, c in acc.items():
                if c:
                    new[(a, b, k)] = Fraction(c) / diag
        if new == coef:
            break
        coef = new
    for (a, b) in pairs:
        if sum(a) + sum(b) <= degree_cap:
            continue
        acc = dict(target.get((a, b), {}))
        for k, c in value(coef, a, b).items():
            acc[k] = acc.get(k, 0) - c
        if any(acc.values()):
            raise DegreeCapTooSmall(f"coproduct of xi_{i + 1} does not close at degree cap {degree_cap}")
    return TensorElement(n, N, coef)


# ---------------------------------------------------------------------------
# quantum duality on presentations


class FPresentation(Presentation):
    """Presentation of a QFSHA in coordinates x_i: every commutator is divisible by h."""

    def validate(self):
        for (i, j), g in self.brackets.items():
            for (e, k), c in g.items():
                if k == 0:
                    raise PresentationError(
                        f"commutator [x{i + 1}, x{j + 1}] is not divisible by h")
                if sum(e) == 0:
                    raise PresentationError(f"commutator [x{i + 1}, x{j + 1}] has a constant term")

    def dual_constants(self) -> dict:
        """Structure constants of the dual Lie algebra: h^1-linear part of each commutator."""
        out = {}
        for (i, j), g in self.brackets.items():
            lin = {e.index(1): c for (e, k), c in g.items() if k == 1 and sum(e) == 1}
            if lin:
                out[(i, j)] = lin
        return out

    @classmethod
    def from_json(cls, data, trunc=None, validate=True) -> "FPresentation":
        p = Presentation.from_json(data, trunc=trunc, validate=False)
        return cls(p.names, p.brackets, p.trunc, p.name, validate=validate)


def vee_presentation(f: FPresentation) -> Presentation:
    """Generators e_i = x_i / h; relations rescaled and divided by h^2.

    The result has truncation order one less than ``f``: a linear term
    h^k x_a becomes h^(k-1) e_a, so the top order is lost.
    """
    if not isinstance(f, FPresentation):
        f = FPresentation(f.names, f.brackets, f.trunc, f.name)
    M = f.trunc - 1
    if M < 0:
        raise ValueError("truncation order too small to take the dual")
    names = [nm[1:] if nm.startswith("x") else nm for nm in f.names]
    names = [("e" + nm) if nm.isdigit() else nm for nm in names]
    br = {}
    for (i, j), g in f.brackets.items():
        t = {}
        for (e, k), c in g.items():
            s = k + sum(e) - 2
            if s < 0:
                raise InexactDivision(f"relation ({i + 1},{j + 1}) is not divisible by h^2 after rescaling")
            if s <= M:
                t[(e, s)] = c
        br[(i, j)] = NCPoly(f.n, M, t)
    return Presentation(names, br, M, (f.name + "^vee") if f.name else "vee")


def f_presentation(p: Presentation) -> FPresentation:
    """Inverse direction: x_i = h e_i, relations multiplied by h^2; truncation order goes up by one."""
    M = p.trunc + 1
    names = [("x" + nm[1:]) if nm.startswith("e") else ("x_" + nm) for nm in p.names]
    br = {}
    for (i, j), g in p.brackets.items():
        t = {}
        for (e, k), c in g.items():
            s = k + 2 - sum(e)
            if s < 1:
                raise InexactDivision(
                    f"relation ({i + 1},{j + 1}) term h^{k} of degree {sum(e)} has no QFSHA form")
            if s <= M:
                t[(e, s)] = c
        br[(i, j)] = NCPoly(p.n, M, t)
    return FPresentation(names, br, M, (p.name + "^F") if p.name else "F")


def twist_dual_presentation(t: TwistData, degree_cap: int = 6, pairing: DualPairing | None = None):
    """The QFSHA U_h(g)^* in xi-coordinates (truncation N) and its vee presentation (N-1)."""
    pair = pairing or DualPairing(t, degree_cap + 2)
    names = [f"x{i + 1}" for i in range(t.n)]
    br = {}
    for i in range(t.n):
        for j in range(i + 1, t.n):
            c = dual_product(i, j, t, degree_cap, pairing=pair)
            if not c.is_zero():
                br[(i, j)] = c
    f = FPresentation(names, br, t.trunc, (t.base.name + "^*") if t.base.name else "dual")
    return f, vee_presentation(f)


def antipode_generator(i: int, p: Presentation) -> NCPoly:
    """S(e_i) = -e_i; only the generator values are provided."""
    return -p.gen(i)


def counit_check(t: TwistData, degree_cap: int = 3) -> list:
    """Monomials on which (eps (x) id) or (id (x) eps) of the twisted coproduct is not the identity."""
    bad = []
    for m in monomials_upto(t.n, degree_cap):
        x = t.coproduct(m)
        ident = NCPoly.monomial(m, t.n, t.trunc)
        if apply_counit_left(x) != ident or apply_counit_right(x) != ident:
            bad.append(m)
    return bad


def _delta_leg(x: TensorElement, t: TwistData, leg: int) -> dict:
    out: dict = {}
    N = t.trunc
    for (a, b, k), c in x.items():
        src = a if leg == 0 else b
        for (u, v, k2), c2 in t.coproduct(src).items():
            if k + k2 > N:
                continue
            key = (u, v, b, k + k2) if leg == 0 else (a, u, v, k + k2)
            out[key] = out.get(key, 0) + c * c2
    return {k: c for k, c in out.items() if c}


def coassociativity_check(t: TwistData, degree_cap: int = 3) -> list:
    """Monomials where (Delta (x) id) Delta and (id (x) Delta) Delta disagree."""
    bad = []
    for m in monomials_upto(t.n, degree_cap):
        x = t.coproduct(m)
        if _delta_leg(x, t, 0) != _delta_leg(x, t, 1):
            bad.append(m)
    return bad
