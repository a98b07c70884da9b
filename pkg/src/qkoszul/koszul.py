"""Koszul resolutions of the trivial module over U(a) and its h-deformations.

A chain in U_h (x) Lambda^q is a dict {subset: NCPoly}, subsets being strictly
increasing 0-based index tuples and coefficients written on the left.  A
complex stores d_q(1 (x) e_S) for every S; d_q extends left-linearly.
"""

from __future__ import annotations

import json
from fractions import Fraction
from itertools import combinations
from typing import Mapping

from .ncpoly import NCPoly, Presentation, PresentationError, _unit
from .series import SeriesScalar


class DegreeCapOverflow(RuntimeError):
    pass


class NotACycle(ValueError):
    pass


def wedge_insert(a: int, subset: tuple):
    """e_a ^ e_subset = sign * e_(sorted); None if a already present."""
    if a in subset:
        return None
    pos = sum(1 for t in subset if t < a)
    new = subset[:pos] + (a,) + subset[pos:]
    return (-1 if pos % 2 else 1), new


def chain_add(x: dict, y: dict) -> dict:
    out = dict(x)
    for k, v in y.items():
        out[k] = out[k] + v if k in out else v
    return {k: v for k, v in out.items() if not v.is_zero()}


def chain_sub(x: dict, y: dict) -> dict:
    return chain_add(x, {k: -v for k, v in y.items()})


def chain_is_zero(x: dict) -> bool:
    return all(v.is_zero() for v in x.values())


def chain_valuation(x: dict, trunc: int) -> int:
    return min((v.valuation() for v in x.values() if not v.is_zero()), default=trunc + 1)


class ChainComplex:
    """Left U_h-module complex U_h (x) Lambda^q with explicit differentials."""

    def __init__(self, p: Presentation, diffs: Mapping | None = None, label: str = ""):
        self.p = p
        self.n = p.n
        self.label = label
        self.diffs: dict = {q: dict(cols) for q, cols in (diffs or {}).items()}

    def basis(self, q: int) -> list:
        return list(combinations(range(self.n), q))

    def column(self, q: int, subset) -> dict:
        return self.diffs[q].get(tuple(subset), {})

    def apply(self, q: int, chain: Mapping) -> dict:
        """d_q of a chain in degree q; d_0 is the counit."""
        p = self.p
        if q == 0:
            tot = p.zero()
            for S, u in chain.items():
                tot = tot + NCPoly.from_series_terms({(0,) * self.n: u.constant()}, self.n, p.trunc)
            return {(): tot} if not tot.is_zero() else {}
        out: dict = {}
        for S, u in chain.items():
            if u.is_zero():
                continue
            for T, c in self.column(q, S).items():
                v = p.mul(u, c)
                out[T] = out[T] + v if T in out else v
        return {k: v for k, v in out.items() if not v.is_zero()}

    def mod_h(self) -> dict:
        return {q: {S: {T: c.mod_h() for T, c in col.items() if not c.mod_h().is_zero()}
                    for S, col in cols.items()} for q, cols in self.diffs.items()}

    def corrections(self, q: int) -> dict:
        """h-divisible part of each column."""
        out = {}
        for S, col in self.diffs.get(q, {}).items():
            c = {T: NCPoly(self.n, self.p.trunc, {(e, k): v for (e, k), v in x.items() if k > 0})
                 for T, x in col.items()}
            c = {T: x for T, x in c.items() if not x.is_zero()}
            if c:
                out[S] = c
        return out

    def copy(self) -> "ChainComplex":
        return ChainComplex(self.p, {q: {S: dict(col) for S, col in cols.items()}
                                     for q, cols in self.diffs.items()}, self.label)

    # serialization ------------------------------------------------------
    def to_json(self) -> dict:
        out = []
        for q in sorted(self.diffs):
            cols = []
            for S in sorted(self.diffs[q]):
                tg = [{"subset": [t + 1 for t in T], "poly": c.to_json()}
                      for T, c in sorted(self.diffs[q][S].items())]
                cols.append({"source": [s + 1 for s in S], "targets": tg})
            out.append({"q": q, "columns": cols})
        return {"schema": 1, "label": self.label, "presentation": self.p.to_json(), "differentials": out}

    @classmethod
    def from_json(cls, data: Mapping) -> "ChainComplex":
        p = Presentation.from_json(data["presentation"], validate=False)
        diffs = {}
        for block in data["differentials"]:
            q = int(block["q"])
            cols = {}
            for col in block["columns"]:
                S = tuple(s - 1 for s in col["source"])
                cols[S] = {tuple(t - 1 for t in tg["subset"]): NCPoly.from_json(tg["poly"], p.n, p.trunc)
                           for tg in col["targets"]}
            diffs[q] = cols
        return cls(p, diffs, str(data.get("label", "")))

    def __eq__(self, o):
        return isinstance(o, ChainComplex) and self.to_json() == o.to_json()


def classical_column(p: Presentation, S: tuple, constants=None, hpow: int = 0) -> dict:
    """Two-sum Koszul differential of 1 (x) e_S.

    ``constants`` maps ordered pairs to {a: C^a}; the bracket terms carry h^hpow.
    """
    n, N = p.n, p.trunc
    C = constants or p.C
    out: dict = {}

    def add(T, poly):
        out[T] = out[T] + poly if T in out else poly

    q = len(S)
    for r in range(q):
        T = S[:r] + S[r + 1:]
        sign = 1 if r % 2 == 0 else -1
        add(T, NCPoly.monomial(_unit(n, S[r]), n, N, sign))
    if hpow <= N:
        for r in range(q):
            for s in range(r + 1, q):
                rest = tuple(x for k, x in enumerate(S) if k not in (r, s))
                sign = -1 if (r + s) % 2 else 1  # (-1)^(r+s) with 1-based r, s
                for a, c in C(S[r], S[s]).items():
                    w = wedge_insert(a, rest)
                    if w is None:
                        continue
                    sg, T = w
                    add(T, NCPoly.monomial((0,) * n, n, N, sign * sg * c, hpow))
    return {T: v for T, v in out.items() if not v.is_zero()}


def classical_koszul(p: Presentation) -> ChainComplex:
    cl = p.classical_limit() if not p.is_classical() else p
    diffs = {q: {S: classical_column(cl, S) for S in combinations(range(p.n), q)} for q in range(1, p.n + 1)}
    return ChainComplex(cl, diffs, "classical")


# ---------------------------------------------------------------------------
# lifting through the complex


def symbol_homotopy(part: dict, n: int, trunc: int, hpow: int) -> dict:
    """Euler contracting homotopy of the symmetric Koszul complex, divided by the weight.

    ``part`` maps subset -> {expo: coeff}, all of one polynomial degree.
    """
    out: dict = {}
    for T, poly in part.items():
        for e, c in poly.items():
            w = sum(e) + len(T)
            if w == 0:
                raise NotACycle("constant term in degree 0 is not a boundary")
            for a in range(n):
                if e[a] == 0:
                    continue
                ins = wedge_insert(a, T)
                if ins is None:
                    continue
                sg, T2 = ins
                e2 = list(e)
                e2[a] -= 1
                key = (tuple(e2), hpow)
                d = out.setdefault(T2, {})
                d[key] = d.get(key, 0) + Fraction(sg * e[a] * c, w)
    return {T: NCPoly(n, trunc, d) for T, d in out.items() if any(d.values())}


def lift_preimage(c: ChainComplex, q: int, target: Mapping, max_steps: int = 10000) -> dict:
    """x in U_h (x) Lambda^q with d_q x = target, built order by order in h and degree by degree."""
    n, N = c.n, c.p.trunc
    target = {tuple(k): v for k, v in target.items() if not v.is_zero()}
    if q < 1 or q > n:
        raise ValueError(f"no differential in degree {q}")
    if q >= 2 and (q - 1) in c.diffs:
        if not chain_is_zero(c.apply(q - 1, target)):
            raise NotACycle("target is not a cycle")
    elif q == 1 and any(not v.constant().is_zero() for v in target.values()):
        raise NotACycle("target has a nonzero counit")
    result: dict = {}
    res = target
    last = None
    for _ in range(max_steps):
        if chain_is_zero(res):
            return result
        r = chain_valuation(res, N)
        d = max(sum(e) for v in res.values() for (e, k) in v.flat() if k == r)
        if last is not None and (r, -d) <= last:
            raise DegreeCapOverflow(f"residual did not decrease at h^{r}, degree {d}")
        last = (r, -d)
        part = {T: {e: cc for (e, k), cc in v.items() if k == r and sum(e) == d} for T, v in res.items()}
        part = {T: v for T, v in part.items() if v}
        y = symbol_homotopy(part, n, N, r)
        result = chain_add(result, y)
        res = chain_sub(res, c.apply(q, y))
    raise DegreeCapOverflow("step limit reached while lifting")


# ---------------------------------------------------------------------------
# deformation


def _q2_closed_form(p: Presentation, rem: NCPoly) -> dict:
    """-sum c (m / e_last(m)) (x) e_last: the left-coefficient form of a remainder."""
    out: dict = {}
    n, N = p.n, p.trunc
    for (e, k), c in rem.items():
        last = max(i for i, a in enumerate(e) if a)
        e2 = list(e)
        e2[last] -= 1
        d = out.setdefault((last,), {})
        d[(tuple(e2), k)] = d.get((tuple(e2), k), 0) - c
    return {T: NCPoly(n, N, d) for T, d in out.items() if any(d.values())}


def _deform(p: Presentation, leading, label: str) -> ChainComplex:
    """Shared induction: leading(S) gives the uncorrected column, corrections come from lifts."""
    n = p.n
    c = ChainComplex(p, {}, label)
    if n == 0:
        return c
    c.diffs[1] = {(i,): {(): p.gen(i)} for i in range(n)}
    for q in range(2, n + 1):
        cols = {}
        for S in combinations(range(n), q):
            x = leading(S)
            defect = c.apply(q - 1, x)
            if q == 2:
                rem = defect.get((), p.zero())
                y = _q2_closed_form(p, rem) if not rem.is_zero() else {}
                if not chain_is_zero(c.apply(1, chain_add(x, y))):
                    y = lift_preimage(c, 1, {(): -rem})
            else:
                y = lift_preimage(c, q - 1, {T: -v for T, v in defect.items()}) if defect else {}
            cols[S] = chain_add(x, y)
        c.diffs[q] = cols
    return c


def deform_koszul(p: Presentation) -> ChainComplex:
    """Resolution of the trivial U_h-module with classical leading part."""
    return _deform(p, lambda S: classical_column(p, S), p.name or "deformed")


def complex_check(c: ChainComplex, reference: ChainComplex | None = None) -> dict:
    """dd = 0 and graded-limit report."""
    nonzero = []
    for q in range(1, c.n + 1):
        if q not in c.diffs:
            continue
        for S, col in c.diffs[q].items():
            dd = c.apply(q - 1, col)
            if not chain_is_zero(dd):
                nonzero.append({"q": q, "source": [s + 1 for s in S],
                                "max_abs": str(max(abs(x) for v in dd.values() for x in v.flat().values()))})
    ref = reference if reference is not None else classical_koszul(c.p)
    limit_diff = []
    cm = c.mod_h()
    for q, cols in ref.diffs.items():
        for S, col in cols.items():
            want = {T: NCPoly(c.n, c.p.trunc, v.flat()) for T, v in col.items()}
            got = cm.get(q, {}).get(S, {})
            if want != got:
                limit_diff.append({"q": q, "source": [s + 1 for s in S]})
    return {"dd_zero": not nonzero, "dd_failures": nonzero, "graded_limit_ok": not limit_diff,
            "limit_differences": limit_diff, "clean": not nonzero and not limit_diff}


# ---------------------------------------------------------------------------
# the QFSHA side


def rescale_poly(poly: NCPoly, trunc: int, shift: int = 0) -> NCPoly:
    """c h^k x^m -> c h^(k + |m| + shift) e^m; raises if a power would be negative."""
    t = {}
    for (e, k), c in poly.items():
        s = k + sum(e) + shift
        if s < 0:
            raise ArithmeticError("rescaled term is not divisible by h")
        if s <= trunc:
            t[(e, s)] = c
    return NCPoly(poly.n, trunc, t)


def deform_koszul_qfsha(f, sample_degree: int = 2) -> tuple:
    """Resolution over F_h with h C leading brackets, plus its rescaled companion and a report.

    Returns (complex over f, complex over vee_presentation(f), report).
    """
    from .hopf import FPresentation, vee_presentation
    if not isinstance(f, FPresentation):
        raise PresentationError("expected an FPresentation")
    lin = f.dual_constants()

    def C(i, j):
        if i < j:
            return dict(lin.get((i, j), {}))
        return {a: -v for a, v in lin.get((j, i), {}).items()}

    cf = _deform(f, lambda S: classical_column(f, S, constants=C, hpow=1), (f.name or "F") + "-resolution")
    v = vee_presentation(f)
    M = v.trunc
    cv = ChainComplex(v, {}, (v.name or "vee") + "-resolution")
    for q, cols in cf.diffs.items():
        cv.diffs[q] = {}
        for S, col in cols.items():
            new = {T: rescale_poly(x, M, -1) for T, x in col.items()}
            cv.diffs[q][S] = {T: x for T, x in new.items() if not x.is_zero()}
    # alpha in I: corrections (h alpha) have constant terms divisible by h^2
    not_in_I = []
    for q in range(2, f.n + 1):
        for S, col in cf.diffs.get(q, {}).items():
            lead = classical_column(f, S, constants=C, hpow=1)
            for T, x in col.items():
                corr = x - lead.get(T, f.zero())
                for (e, k), val in corr.items():
                    if sum(e) == 0 and k < 2:
                        not_in_I.append({"q": q, "source": [s + 1 for s in S], "target": [t + 1 for t in T]})
    conj = conjugation_check(cf, cv, sample_degree)
    report = {"alpha_in_I": not not_in_I, "alpha_violations": not_in_I, "conjugation_ok": not conj,
              "conjugation_failures": conj, "F": complex_check(cf, _leading_complex(f, C)),
              "vee": complex_check(cv)}
    return cf, cv, report


def _leading_complex(f, C) -> ChainComplex:
    diffs = {q: {S: {T: x.mod_h() for T, x in classical_column(f, S, constants=C, hpow=1).items()
                     if not x.mod_h().is_zero()}
                 for S in combinations(range(f.n), q)} for q in range(1, f.n + 1)}
    return ChainComplex(f, diffs, "leading")


def conjugation_check(cf: ChainComplex, cv: ChainComplex, degree: int = 2) -> list:
    """d(P (x) x_S) = h * d_vee(P_vee (x) e_S) for PBW monomials P up to ``degree``."""
    from .hopf import monomials_upto
    f, v = cf.p, cv.p
    M = v.trunc
    bad = []
    for q, cols in cf.diffs.items():
        for S in cols:
            for m in monomials_upto(f.n, degree):
                P = NCPoly.monomial(m, f.n, f.trunc)
                lhs = cf.apply(q, {S: P})
                Pv = NCPoly.monomial(m, v.n, M, 1, sum(m)) if sum(m) <= M else v.zero()
                rhs = cv.apply(q, {S: Pv}) if not Pv.is_zero() else {}
                keys = set(lhs) | set(rhs)
                for T in keys:
                    a = rescale_poly(lhs.get(T, f.zero()), M)
                    b = rhs.get(T, v.zero()).h_mul(1)
                    if a != b:
                        bad.append({"q": q, "source": [s + 1 for s in S], "P": list(m)})
                        break
    return bad


def save_complex(c: ChainComplex, path) -> None:
    with open(path, "w") as fh:
        json.dump(c.to_json(), fh, indent=1, sort_keys=True)
