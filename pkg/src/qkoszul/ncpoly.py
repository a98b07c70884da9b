"""Deformed enveloping algebras given by generators and commutation relations.

A :class:`Presentation` fixes generators e_1 < ... < e_n and, for each pair
i < j, the right-hand side g_ij of ``e_i e_j - e_j e_i = g_ij``.  Elements are
kept in PBW normal form (ordered monomials e_1^a1 ... e_n^an) with
coefficients in Q[h]/(h^(N+1)).

Generator indices are 0-based in the Python API and 1-based in JSON files.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .series import (DEFAULT_TRUNC, InexactDivision, SeriesScalar, format_rational,
                     parse_rational)

STEP_BUDGET = 10 ** 7

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


class PresentationError(ValueError):
    pass


class RewriteBudgetExceeded(RuntimeError):
    pass


Expo = tuple  # exponent vector (a_1, ..., a_n)


def _unit(n: int, i: int) -> Expo:
    e = [0] * n
    e[i] = 1
    return tuple(e)


def expo_word(expo: Expo) -> tuple:
    """Letters of the ordered monomial, e.g. (2,0,1) -> (0, 0, 2)."""
    w = []
    for i, a in enumerate(expo):
        w.extend([i] * a)
    return tuple(w)


def expo_add(a: Expo, b: Expo) -> Expo:
    return tuple(x + y for x, y in zip(a, b))


def expo_degree(e: Expo) -> int:
    return sum(e)


class NCPoly:
    """PBW-normal-form element: sparse map (exponent, h-power) -> rational.

    Instances are treated as immutable.
    """

    __slots__ = ("n", "trunc", "_t")

    def __init__(self, n: int, trunc: int, terms: Mapping | None = None):
        self.n = n
        self.trunc = trunc
        t = {}
        if terms:
            for (e, k), c in terms.items():
                if c and k <= trunc:
                    t[(tuple(e), k)] = Fraction(c)
        self._t = t

    # construction -------------------------------------------------------
    @classmethod
    def zero(cls, n: int, trunc: int) -> "NCPoly":
        return cls(n, trunc)

    @classmethod
    def one(cls, n: int, trunc: int) -> "NCPoly":
        return cls(n, trunc, {((0,) * n, 0): 1})

    @classmethod
    def monomial(cls, expo: Expo, n: int, trunc: int, coeff=1, hpow: int = 0) -> "NCPoly":
        return cls(n, trunc, {(tuple(expo), hpow): coeff})

    @classmethod
    def from_series_terms(cls, terms: Mapping[Expo, SeriesScalar], n: int, trunc: int) -> "NCPoly":
        t = {}
        for e, s in terms.items():
            for k, c in s.as_dict().items():
                t[(tuple(e), k)] = c
        return cls(n, trunc, t)

    @classmethod
    def _raw(cls, n: int, trunc: int, t: dict) -> "NCPoly":
        p = cls.__new__(cls)
        p.n, p.trunc = n, trunc
        p._t = {key: c for key, c in t.items() if c}
        return p

    # inspection ---------------------------------------------------------
    def items(self):
        """Iterate ((expo, hpow), coeff)."""
        return self._t.items()

    def flat(self) -> dict:
        return dict(self._t)

    def terms(self) -> dict:
        """Map exponent vector -> SeriesScalar."""
        acc: dict = {}
        for (e, k), c in self._t.items():
            acc.setdefault(e, {})[k] = c
        return {e: SeriesScalar.from_dict(d, self.trunc) for e, d in acc.items()}

    def coeff(self, expo: Expo) -> SeriesScalar:
        expo = tuple(expo)
        return SeriesScalar.from_dict({k: c for (e, k), c in self._t.items() if e == expo}, self.trunc)

    def h_part(self, k: int) -> dict:
        """Rational coefficients of h^k as expo -> Fraction."""
        return {e: c for (e, kk), c in self._t.items() if kk == k}

    def valuation(self) -> int:
        return min((k for (_, k) in self._t), default=self.trunc + 1)

    def degree(self) -> int:
        return max((sum(e) for (e, _) in self._t), default=-1)

    def is_zero(self) -> bool:
        return not self._t

    def constant(self) -> SeriesScalar:
        return self.coeff((0,) * self.n)

    def __len__(self):
        return len(self._t)

    # arithmetic ---------------------------------------------------------
    def _same(self, o: "NCPoly"):
        if (o.n, o.trunc) != (self.n, self.trunc):
            raise ValueError("polynomials from different rings")

    def __add__(self, o: "NCPoly") -> "NCPoly":
        self._same(o)
        t = dict(self._t)
        for key, c in o._t.items():
            t[key] = t.get(key, 0) + c
        return NCPoly._raw(self.n, self.trunc, t)

    def __sub__(self, o: "NCPoly") -> "NCPoly":
        self._same(o)
        t = dict(self._t)
        for key, c in o._t.items():
            t[key] = t.get(key, 0) - c
        return NCPoly._raw(self.n, self.trunc, t)

    def __neg__(self) -> "NCPoly":
        return NCPoly._raw(self.n, self.trunc, {k: -c for k, c in self._t.items()})

    def scale(self, s) -> "NCPoly":
        """Multiply by a scalar (rational or SeriesScalar)."""
        if isinstance(s, SeriesScalar):
            sd = s.as_dict()
        else:
            sd = {0: Fraction(s)}
        t: dict = {}
        for (e, k), c in self._t.items():
            for j, d in sd.items():
                if k + j <= self.trunc:
                    key = (e, k + j)
                    t[key] = t.get(key, 0) + c * d
        return NCPoly._raw(self.n, self.trunc, t)

    def h_mul(self, k: int) -> "NCPoly":
        """Multiply by h^k (k may be negative when exactly divisible)."""
        if k < 0 and any(kk < -k for (_, kk) in self._t):
            raise InexactDivision(f"not divisible by h^{-k}")
        return NCPoly._raw(self.n, self.trunc,
                           {(e, kk + k): c for (e, kk), c in self._t.items() if kk + k <= self.trunc})

    def mod_h(self) -> "NCPoly":
        return NCPoly._raw(self.n, self.trunc, {(e, 0): c for (e, k), c in self._t.items() if k == 0})

    def truncate(self, k: int) -> "NCPoly":
        return NCPoly._raw(self.n, self.trunc, {(e, kk): c for (e, kk), c in self._t.items() if kk <= k})

    def with_trunc(self, trunc: int) -> "NCPoly":
        return NCPoly(self.n, trunc, self._t)

    def __eq__(self, o):
        if not isinstance(o, NCPoly):
            return NotImplemented
        return (self.n, self.trunc) == (o.n, o.trunc) and self._t == o._t

    def __hash__(self):
        return hash((self.n, self.trunc, frozenset(self._t.items())))

    def __repr__(self):
        return f"NCPoly({self.format()})"

    def format(self, names: Sequence[str] | None = None) -> str:
        if not self._t:
            return "0"
        names = names or [f"e{i + 1}" for i in range(self.n)]
        parts = []
        for e, s in sorted(self.terms().items(), key=lambda kv: (sum(kv[0]), kv[0])):
            mon = "*".join(names[i] + (f"^{a}" if a > 1 else "") for i, a in enumerate(e) if a)
            cs = str(s)
            if not mon:
                parts.append(f"({cs})" if " " in cs else cs)
            elif cs == "1":
                parts.append(mon)
            else:
                parts.append(f"({cs})*{mon}" if (" " in cs or "*" in cs) else f"{cs}*{mon}")
        return " + ".join(parts)

    # serialization ------------------------------------------------------
    def to_json(self) -> list:
        return [{"coeff": format_rational(c), "h_pow": k, "expo": list(e)}
                for (e, k), c in sorted(self._t.items())]

    @classmethod
    def from_json(cls, data: Iterable, n: int, trunc: int) -> "NCPoly":
        t: dict = {}
        for term in data:
            e = tuple(int(x) for x in term["expo"])
            if len(e) != n:
                raise PresentationError(f"exponent vector {list(e)} has wrong length (expected {n})")
            if any(x < 0 for x in e):
                raise PresentationError(f"negative exponent in {list(e)}")
            k = int(term.get("h_pow", 0))
            if k < 0:
                raise PresentationError("negative h power")
            key = (e, k)
            t[key] = t.get(key, 0) + parse_rational(term["coeff"])
        return cls(n, trunc, t)


Word = tuple


class Presentation:
    """U_h = T(e_1..e_n)[[h]] / (e_i e_j - e_j e_i - g_ij), truncated at h^N.

    ``brackets`` maps pairs (i, j) with i < j to g_ij (an :class:`NCPoly`);
    missing pairs commute.
    """

    def __init__(self, names: Sequence[str], brackets: Mapping[tuple, NCPoly] | None = None,
                 trunc: int = DEFAULT_TRUNC, name: str = "", validate: bool = True):
        self.names = list(names)
        self.n = len(self.names)
        self.trunc = trunc
        self.name = name
        self.brackets: dict = {}
        for (i, j), g in (brackets or {}).items():
            if i == j:
                raise PresentationError("relation with i == j")
            if i > j:
                i, j, g = j, i, -g
            if (g.n, g.trunc) != (self.n, trunc):
                g = NCPoly(self.n, trunc, g.flat()) if g.n == self.n else None
                if g is None:
                    raise PresentationError("relation polynomial has wrong number of generators")
            if not g.is_zero():
                self.brackets[(i, j)] = g
        self.classical = self._classical_constants()
        self._gflat = {}
        for (i, j), g in self.brackets.items():
            self._gflat[(i, j)] = [(e, k, c) for (e, k), c in g.items()]
        self._memo_gen: dict = {}
        self._memo_mono: dict = {}
        self._steps = 0
        if validate:
            self.validate()

    # structure ----------------------------------------------------------
    def _classical_constants(self) -> dict:
        out = {}
        for (i, j), g in self.brackets.items():
            lin = {}
            for (e, k), c in g.items():
                if k == 0 and sum(e) == 1:
                    lin[e.index(1)] = c
            if lin:
                out[(i, j)] = lin
        return out

    def C(self, i: int, j: int) -> dict:
        """Classical structure constants {a: C^a_ij} for any ordered pair."""
        if i == j:
            return {}
        if i < j:
            return dict(self.classical.get((i, j), {}))
        return {a: -c for a, c in self.classical.get((j, i), {}).items()}

    def g(self, i: int, j: int) -> NCPoly:
        """The commutator right-hand side for any ordered pair."""
        if i == j:
            return self.zero()
        if i < j:
            return self.brackets.get((i, j), self.zero())
        return -self.brackets.get((j, i), self.zero())

    def jacobi_defects(self) -> list:
        out = []
        n = self.n
        for i, j, k in combinations(range(n), 3):
            tot: dict = {}
            for (x, y, z) in ((i, j, k), (j, k, i), (k, i, j)):
                for a, c in self.C(y, z).items():
                    for b, d in self.C(x, a).items():
                        tot[b] = tot.get(b, 0) + c * d
            tot = {b: c for b, c in tot.items() if c}
            if tot:
                out.append(((i, j, k), tot))
        return out

    def validate(self):
        for (i, j), g in self.brackets.items():
            for (e, k), c in g.items():
                d = sum(e)
                if d == 0:
                    raise PresentationError(
                        f"relation ({i + 1},{j + 1}) has a constant term; the bracket must have X-degree >= 1")
                if k == 0 and d != 1:
                    raise PresentationError(
                        f"relation ({i + 1},{j + 1}): degree-{d} term without a factor of h")
        bad = self.jacobi_defects()
        if bad:
            (i, j, k), _ = bad[0]
            raise PresentationError(
                f"classical structure constants violate the Jacobi identity on (e{i + 1}, e{j + 1}, e{k + 1})")

    def is_classical(self) -> bool:
        return all(k == 0 for g in self.brackets.values() for (_, k) in g.flat())

    def classical_limit(self) -> "Presentation":
        """Same generators, brackets reduced mod h."""
        return Presentation(self.names, {ij: g.mod_h() for ij, g in self.brackets.items()},
                            self.trunc, self.name + "@h=0", validate=False)

    def with_trunc(self, trunc: int) -> "Presentation":
        return Presentation(self.names, {ij: g.with_trunc(trunc) for ij, g in self.brackets.items()},
                            trunc, self.name, validate=False)

    # elements -----------------------------------------------------------
    def zero(self) -> NCPoly:
        return NCPoly.zero(self.n, self.trunc)

    def one(self) -> NCPoly:
        return NCPoly.one(self.n, self.trunc)

    def gen(self, i: int) -> NCPoly:
        return NCPoly.monomial(_unit(self.n, i), self.n, self.trunc)

    def mono(self, expo: Expo, coeff=1, hpow: int = 0) -> NCPoly:
        return NCPoly.monomial(tuple(expo), self.n, self.trunc, coeff, hpow)

    def const(self, s) -> NCPoly:
        return self.one().scale(s)

    # rewriting engine ---------------------------------------------------
    def _tick(self):
        self._steps += 1
        if self._steps > STEP_BUDGET:
            raise RewriteBudgetExceeded(
                f"normal form exceeded {STEP_BUDGET} rule applications; "
                "check that every non-classical bracket term carries a factor of h")

    def _mul_gen(self, expo: Expo, j: int, prec: int) -> dict:
        """expo * e_j in normal form, keeping h-powers <= prec.  Returns {(e, k): c}."""
        key = (expo, j, prec)
        hit = self._memo_gen.get(key)
        if hit is not None:
            return hit
        top = -1
        for idx in range(self.n - 1, -1, -1):
            if expo[idx]:
                top = idx
                break
        if top <= j:
            e = list(expo)
            e[j] += 1
            res = {(tuple(e), 0): Fraction(1)}
            self._memo_gen[key] = res
            return res
        self._tick()
        # expo = m1 * e_top with top > j:  m1 e_top e_j = m1 e_j e_top - m1 g_{j,top}
        m1 = list(expo)
        m1[top] -= 1
        m1 = tuple(m1)
        res: dict = {}
        for (e, k), c in self._mul_gen(m1, j, prec).items():
            for (e2, k2), c2 in self._mul_gen(e, top, prec - k).items():
                kk = (e2, k + k2)
                res[kk] = res.get(kk, 0) + c * c2
        for (ge, v, gc) in self._gflat.get((j, top), ()):
            if v > prec:
                continue
            for (e2, k2), c2 in self._mul_mono(m1, ge, prec - v).items():
                kk = (e2, v + k2)
                res[kk] = res.get(kk, 0) - gc * c2
        res = {kk: c for kk, c in res.items() if c}
        self._memo_gen[key] = res
        return res

    def _mul_mono(self, a: Expo, b: Expo, prec: int) -> dict:
        key = (a, b, prec)
        hit = self._memo_mono.get(key)
        if hit is not None:
            return hit
        cur = {(a, 0): Fraction(1)}
        for letter in expo_word(b):
            nxt: dict = {}
            for (e, k), c in cur.items():
                for (e2, k2), c2 in self._mul_gen(e, letter, prec - k).items():
                    kk = (e2, k + k2)
                    nxt[kk] = nxt.get(kk, 0) + c * c2
            cur = {kk: c for kk, c in nxt.items() if c}
        self._memo_mono[key] = cur
        return cur

    def normal_form(self, word: Sequence[int]) -> NCPoly:
        for x in word:
            if not 0 <= x < self.n:
                raise IndexError(f"letter {x} outside generator range 0..{self.n - 1}")
        cur = {((0,) * self.n, 0): Fraction(1)}
        for letter in word:
            nxt: dict = {}
            for (e, k), c in cur.items():
                for (e2, k2), c2 in self._mul_gen(e, letter, self.trunc - k).items():
                    kk = (e2, k + k2)
                    nxt[kk] = nxt.get(kk, 0) + c * c2
            cur = {kk: c for kk, c in nxt.items() if c}
        return NCPoly._raw(self.n, self.trunc, cur)

    def mul(self, a: NCPoly, b: NCPoly) -> NCPoly:
        if (a.n, a.trunc) != (self.n, self.trunc) or (b.n, b.trunc) != (self.n, self.trunc):
            raise ValueError("operands do not belong to this presentation")
        N = self.trunc
        out: dict = {}
        for (e1, k1), c1 in a.items():
            for (e2, k2), c2 in b.items():
                if k1 + k2 > N:
                    continue
                for (e3, k3), c3 in self._mul_mono(e1, e2, N - k1 - k2).items():
                    kk = (e3, k1 + k2 + k3)
                    out[kk] = out.get(kk, 0) + c1 * c2 * c3
        return NCPoly._raw(self.n, N, out)

    def mul_many(self, *polys: NCPoly) -> NCPoly:
        acc = self.one()
        for p in polys:
            acc = self.mul(acc, p)
        return acc

    def commutator_poly(self, a: NCPoly, b: NCPoly) -> NCPoly:
        return self.mul(a, b) - self.mul(b, a)

    def commutator(self, i: int, j: int) -> NCPoly:
        if i == j:
            raise ValueError("commutator needs i != j")
        return self.normal_form((i, j)) - self.normal_form((j, i))

    def evaluate(self, poly: NCPoly, values: Sequence, mul, add, one, scalar):
        """Substitute generator images (any ring) into a PBW polynomial."""
        total = None
        for (e, k), c in poly.items():
            term = one
            for letter in expo_word(e):
                term = mul(term, values[letter])
            term = scalar(c, k, term)
            total = term if total is None else add(total, term)
        return total

    # serialization ------------------------------------------------------
    def to_json(self) -> dict:
        rels = []
        for (i, j) in sorted(self.brackets):
            rels.append({"i": i + 1, "j": j + 1, "terms": self.brackets[(i, j)].to_json()})
        return {"name": self.name, "trunc_order": self.trunc, "generators": list(self.names),
                "relations": rels}

    @classmethod
    def from_json(cls, data: Mapping, trunc: int | None = None, validate: bool = True) -> "Presentation":
        try:
            names = list(data["generators"])
            file_trunc = int(data.get("trunc_order", DEFAULT_TRUNC))
        except (KeyError, TypeError, ValueError) as exc:
            raise PresentationError(f"malformed presentation: {exc}") from None
        n = len(names)
        max_h = 0
        brackets = {}
        for r, rel in enumerate(data.get("relations", [])):
            try:
                i, j = int(rel["i"]) - 1, int(rel["j"]) - 1
                terms = rel["terms"]
            except (KeyError, TypeError, ValueError) as exc:
                raise PresentationError(f"relations[{r}]: {exc}") from None
            if not (0 <= i < j < n):
                raise PresentationError(f"relations[{r}]: need 1 <= i < j <= {n}, got ({i + 1},{j + 1})")
            for t in terms:
                max_h = max(max_h, int(t.get("h_pow", 0)))
            brackets[(i, j)] = NCPoly.from_json(terms, n, 10 ** 6)
        N = file_trunc if trunc is None else trunc
        if trunc is None and max_h > N:
            raise PresentationError(f"trunc_order {N} is below the largest h power {max_h} in the relations")
        brackets = {ij: NCPoly(n, N, g.flat()) for ij, g in brackets.items()}
        return cls(names, brackets, N, str(data.get("name", "")), validate=validate)

    def __repr__(self):
        rels = ", ".join(f"[{self.names[i]},{self.names[j]}]={g.format(self.names)}"
                         for (i, j), g in sorted(self.brackets.items()))
        return f"Presentation({self.name or '?'}: {rels or 'abelian'}; N={self.trunc})"


def load_presentation(path, trunc: int | None = None, validate: bool = True) -> Presentation:
    with open(path) as fh:
        return Presentation.from_json(json.load(fh), trunc=trunc, validate=validate)


def abelian(n: int, trunc: int = DEFAULT_TRUNC) -> Presentation:
    return Presentation([f"e{i + 1}" for i in range(n)], {}, trunc, f"abelian{n}")


def normal_form(word: Sequence[int], p: Presentation) -> NCPoly:
    return p.normal_form(word)


def poly_mul(a: NCPoly, b: NCPoly, p: Presentation) -> NCPoly:
    return p.mul(a, b)


def commutator(i: int, j: int, p: Presentation) -> NCPoly:
    return p.commutator(i, j)


def confluence_check(p: Presentation, degree_cap: int = 3) -> dict:
    """Resolve every overlap e_k e_j e_i (k > j > i) along both one-step rewrites.

    Returns ``{"clean": bool, "checked": count, "discrepancies": [...]}``.
    """
    if degree_cap < 3:
        raise ValueError("degree cap must be at least 3")
    found = []
    checked = 0
    for i, j, k in combinations(range(p.n), 3):
        checked += 1
        # rewrite e_k e_j first: (e_j e_k - g_jk) e_i
        left = p.normal_form((j, k, i)) - p.mul(p.g(j, k), p.gen(i))
        # rewrite e_j e_i first: e_k (e_i e_j - g_ij)
        right = p.normal_form((k, i, j)) - p.mul(p.gen(k), p.g(i, j))
        diff = left - right
        if not diff.is_zero():
            found.append({"overlap": [k + 1, j + 1, i + 1], "difference": diff})
    return {"clean": not found, "checked": checked, "discrepancies": found}


def substitute_rescale(a: NCPoly, k_per_gen: Sequence[int]) -> NCPoly:
    """Replace each e_i by h^{k_i} e_i."""
    if len(k_per_gen) != a.n:
        raise ValueError("one shift per generator required")
    out = {}
    for (e, k), c in a.items():
        s = k + sum(x * y for x, y in zip(e, k_per_gen))
        if s < 0:
            raise InexactDivision(f"term h^{k}*{list(e)} is not divisible after rescaling")
        if s <= a.trunc:
            out[(e, s)] = c
    return NCPoly._raw(a.n, a.trunc, out)
