"""Ext of the trivial module, the modular character theta, and Poincare-duality checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Mapping

from .koszul import ChainComplex, deform_koszul, deform_koszul_qfsha
from .linalg import Indexer, jordan_type, nullspace, rank
from .ncpoly import NCPoly, Presentation, _unit
from .series import SeriesMatrix, SeriesScalar


class ThetaError(RuntimeError):
    pass


class CochainComplex:
    """Transposes of a chain complex on Lambda^q(a*) (x) U_h.

    ``tdiffs[q][T]`` lists (S, c) meaning d^t_q(e_T* (x) a) = sum_S e_S* (x) c a,
    for T of size q-1 and S of size q.
    """

    def __init__(self, chain: ChainComplex):
        self.chain = chain
        self.p = chain.p
        self.n = chain.n
        self.tdiffs: dict = {}
        for q, cols in chain.diffs.items():
            t: dict = {}
            for S, col in cols.items():
                for T, c in col.items():
                    t.setdefault(T, []).append((S, c))
            self.tdiffs[q] = {T: sorted(v) for T, v in t.items()}

    def apply(self, q: int, cochain: Mapping) -> dict:
        """d^t_q on a cochain {T: a_T} of degree q-1; coefficients act by left multiplication."""
        out: dict = {}
        for T, a in cochain.items():
            for S, c in self.tdiffs.get(q, {}).get(T, []):
                v = self.p.mul(c, a)
                out[S] = out[S] + v if S in out else v
        return {k: v for k, v in out.items() if not v.is_zero()}

    def transpose(self) -> ChainComplex:
        diffs: dict = {}
        for q, t in self.tdiffs.items():
            cols: dict = {}
            for T, lst in t.items():
                for S, c in lst:
                    cols.setdefault(S, {})[T] = c
            diffs[q] = cols
        return ChainComplex(self.p, diffs, self.chain.label)

    def square_zero(self) -> bool:
        for q in range(1, self.n):
            for T in combinations(range(self.n), q - 1):
                x = self.apply(q + 1, self.apply(q, {T: self.p.one()}))
                if x:
                    return False
        return True


def transpose_complex(c: ChainComplex) -> CochainComplex:
    return CochainComplex(c)


@dataclass
class Character:
    theta: dict                      # generator index -> SeriesScalar
    degree: int
    sigma: NCPoly
    witnesses: dict = field(default_factory=dict)  # generator -> {T: NCPoly}

    def value(self, poly: NCPoly, p: Presentation) -> SeriesScalar:
        vals = [self.theta[i] for i in range(p.n)]
        N = p.trunc
        out = p.evaluate(poly, vals, lambda a, b: a * b, lambda a, b: a + b, SeriesScalar.one(N),
                         lambda c, k, t: t * SeriesScalar.monomial(c, k, N))
        return out if out is not None else SeriesScalar.zero(N)

    def is_character(self, p: Presentation) -> bool:
        """theta kills every relation e_i e_j - e_j e_i - g_ij."""
        return all(self.value(g, p).is_zero() for g in p.brackets.values())

    def to_json(self, names) -> dict:
        from .series import format_rational
        return {"theta": {names[i]: [format_rational(c) for c in s.coeffs] for i, s in sorted(self.theta.items())},
                "degree": self.degree,
                "sigma": self.sigma.to_json(),
                "witnesses": {names[i]: [{"subset": [t + 1 for t in T], "poly": v.to_json()}
                                         for T, v in sorted(w.items())]
                              for i, w in sorted(self.witnesses.items())}}


def _top_ideal(c: ChainComplex) -> dict:
    """{t: (T, c_T)}: the right ideal generators of the top differential, keyed by the missing index."""
    n = c.n
    top = tuple(range(n))
    out = {}
    for T, poly in c.column(n, top).items():
        t = next(i for i in top if i not in T)
        out[t] = (T, poly)
    return out


def reduce_top(c: ChainComplex, x: NCPoly, witness_degree: int = 8):
    """Write x = theta + sum_T c_T mu_T with theta a constant series.

    Returns (theta, {T: mu_T}).  Reduction: at the lowest h-order carrying a
    term of positive degree, strip its highest monomial m via c_T with t the
    smallest letter of m.
    """
    p = c.p
    n, N = p.n, p.trunc
    gens = _top_ideal(c)
    sign = {}
    for t, (T, poly) in gens.items():
        lead = poly.h_part(0).get(_unit(n, t))
        if not lead:
            raise ThetaError(f"top differential lacks the leading term in e{t + 1}")
        sign[t] = lead
    rem = x
    mu: dict = {}
    for _ in range(100000):
        cand = [(k, e) for (e, k) in rem.flat() if sum(e) > 0]
        if not cand:
            break
        r = min(k for k, _ in cand)
        m = max((e for k, e in cand if k == r), key=lambda e: (sum(e), e))
        coef = rem.flat()[(m, r)]
        t = next(i for i, a in enumerate(m) if a)
        if sum(m) - 1 > witness_degree:
            raise ThetaError(f"witness degree exceeds cap {witness_degree}")
        rest = list(m)
        rest[t] -= 1
        T, poly = gens[t]
        step = NCPoly.monomial(tuple(rest), n, N, coef / sign[t], r)
        mu[T] = mu[T] + step if T in mu else step
        rem = rem - p.mul(poly, step)
    else:
        raise ThetaError("reduction did not terminate")
    theta = rem.constant()
    mu = {T: v for T, v in mu.items() if not v.is_zero()}
    return theta, mu


def theta_from_complex(c: ChainComplex, witness_degree: int = 8) -> Character:
    p = c.p
    n, N = p.n, p.trunc
    sigma = p.one()
    theta, wit = {}, {}
    for i in range(n):
        th, mu = reduce_top(c, p.gen(i), witness_degree)
        # witness identity: sigma e_i = theta sigma + d^t(mu)
        chk = p.gen(i) - NCPoly.from_series_terms({(0,) * n: th}, n, N)
        gens = {T: poly for T, poly in c.column(n, tuple(range(n))).items()}
        acc = p.zero()
        for T, v in mu.items():
            acc = acc + p.mul(gens[T], v)
        if acc != chk:
            raise ThetaError(f"witness identity fails for generator {i + 1}")
        theta[i], wit[i] = th, mu
    return Character(theta, n, sigma, wit)


def theta_character(p: Presentation, witness_degree: int = 8, complex_: ChainComplex | None = None) -> Character:
    """The character by which A_h acts on Ext^n(K, A_h), read off from the top cochains."""
    c = complex_ or deform_koszul(p)
    return theta_from_complex(c, witness_degree)


def theta_link_check(f, witness_degree: int = 8) -> dict:
    """theta_F(x_i) = h * theta_vee(e_i), coefficientwise."""
    from .hopf import vee_presentation
    cf, _, rep = deform_koszul_qfsha(f)
    th_f = theta_from_complex(cf, witness_degree)
    v = vee_presentation(f)
    th_v = theta_character(v, witness_degree)
    N = f.trunc
    rows = []
    ok = True
    for i in range(f.n):
        a = th_f.theta[i]
        b = SeriesScalar([0] + list(th_v.theta[i].coeffs), N)
        same = a == b
        ok &= same
        rows.append({"generator": i + 1, "theta_F": str(a), "h_theta_vee": str(b), "match": same})
    return {"ok": ok and rep["alpha_in_I"], "rows": rows, "alpha_in_I": rep["alpha_in_I"],
            "theta_F": th_f, "theta_vee": th_v}


# ---------------------------------------------------------------------------
# modules and homology


@dataclass
class ModulePresentation:
    rank: int
    actions: dict   # generator -> SeriesMatrix (rank x rank)
    trunc: int

    @classmethod
    def trivial(cls, p: Presentation) -> "ModulePresentation":
        return cls(1, {i: SeriesMatrix.zeros(1, 1, p.trunc) for i in range(p.n)}, p.trunc)

    @classmethod
    def zero(cls, p: Presentation) -> "ModulePresentation":
        return cls(0, {}, p.trunc)

    def is_trivial(self) -> bool:
        return all(m.is_zero() for m in self.actions.values())

    def rho(self, poly: NCPoly, p: Presentation) -> SeriesMatrix:
        N = self.trunc
        if self.rank == 0:
            return None
        vals = [self.actions[i] for i in range(p.n)]
        one = SeriesMatrix.identity(self.rank, N)
        out = p.evaluate(poly, vals, lambda a, b: a @ b, lambda a, b: a + b, one,
                         lambda c, k, t: t.scale(SeriesScalar.monomial(c, k, N)))
        return out if out is not None else SeriesMatrix.zeros(self.rank, self.rank, N)

    def check(self, p: Presentation) -> list:
        """Relations violated by the action matrices."""
        bad = []
        if self.rank == 0:
            return bad
        for i in range(p.n):
            for j in range(i + 1, p.n):
                lhs = self.actions[i] @ self.actions[j] - self.actions[j] @ self.actions[i]
                if lhs != self.rho(p.g(i, j), p):
                    bad.append((i + 1, j + 1))
        return bad


class InconsistentModule(ValueError):
    pass


def _free_complex_homology(dim_of, maps, degrees, N) -> dict:
    """Elementary divisors of a complex of free R-modules given by Q-coordinate maps.

    ``dim_of[q]`` is the R-rank, coordinates are (basis index, h-power);
    ``maps[q]`` sends a basis index of degree q to {(basis index of next degree): SeriesScalar}.
    ``degrees`` lists (q, next q) pairs.
    """
    def qcols(q, nxt):
        cols = []
        for b in range(dim_of[q]):
            img = maps.get(q, {}).get(b, {})
            for k in range(N + 1):
                v = {}
                for b2, s in img.items():
                    for l, c in enumerate(s.coeffs):
                        if c and k + l <= N:
                            v[b2 * (N + 1) + k + l] = v.get(b2 * (N + 1) + k + l, 0) + c
                cols.append({i: c for i, c in v.items() if c})
        return cols

    out = {}
    order = [q for q, _ in degrees]
    nxt = dict(degrees)
    prev = {b: a for a, b in degrees if b is not None}
    for q in order:
        dim = dim_of[q] * (N + 1)
        if dim == 0:
            out[q] = []
            continue
        dq = qcols(q, nxt[q]) if nxt[q] is not None else [{} for _ in range(dim)]
        ker = nullspace(dq, dim_of[nxt[q]] * (N + 1)) if nxt[q] is not None else [{i: Fraction(1)} for i in range(dim)]
        if nxt[q] is not None and dim_of[nxt[q]] == 0:
            ker = [{i: Fraction(1)} for i in range(dim)]
        im = qcols(prev[q], q) if q in prev else []
        im = [v for v in im if v]

        def shift(v):
            w = {}
            for i, c in v.items():
                b, k = divmod(i, N + 1)
                if k + 1 <= N:
                    w[b * (N + 1) + k + 1] = c
            return w
        out[q] = jordan_type(dim, ker, im, shift)
    return out


def ext_trivial_source(c: ChainComplex, m: ModulePresentation) -> dict:
    """Ext^q(K, M) as elementary divisors, via Hom(resolution, M)."""
    p = c.p
    n, N, r = p.n, p.trunc, m.rank
    bases = {q: list(combinations(range(n), q)) for q in range(n + 1)}
    idx = {q: {S: i for i, S in enumerate(bases[q])} for q in range(n + 1)}
    dim_of = {q: len(bases[q]) * r for q in range(n + 1)}
    maps: dict = {}
    if r:
        cache = {}
        for q in range(1, n + 1):
            maps[q - 1] = {}
            for S, col in c.diffs[q].items():
                for T, poly in col.items():
                    key = (q, S, T)
                    mat = cache.get(key) or m.rho(poly, p)
                    cache[key] = mat
                    for b in range(r):
                        src = idx[q - 1][T] * r + b
                        for b2 in range(r):
                            s = mat[b2, b]
                            if not s.is_zero():
                                d = maps[q - 1].setdefault(src, {})
                                tgt = idx[q][S] * r + b2
                                d[tgt] = d[tgt] + s if tgt in d else s
    degrees = [(q, q + 1 if q < n else None) for q in range(n + 1)]
    return _free_complex_homology(dim_of, maps, degrees, N)


def tor_omega(c: ChainComplex, theta: Character, m: ModulePresentation) -> dict:
    """Tor_j(Omega, M) for a trivial module M, from Omega (x)_A resolution."""
    p = c.p
    n, N = p.n, p.trunc
    if m.rank and not m.is_trivial():
        raise NotImplementedError("Tor is only computed against trivial modules")
    r = m.rank
    bases = {q: list(combinations(range(n), q)) for q in range(n + 1)}
    idx = {q: {S: i for i, S in enumerate(bases[q])} for q in range(n + 1)}
    dim_of = {q: len(bases[q]) * r for q in range(n + 1)}
    maps: dict = {}
    if r:
        for q in range(1, n + 1):
            maps[q] = {}
            for S, col in c.diffs[q].items():
                for T, poly in col.items():
                    s = theta.value(poly, p)
                    if s.is_zero():
                        continue
                    for b in range(r):
                        maps[q].setdefault(idx[q][S] * r + b, {})[idx[q - 1][T] * r + b] = s
    degrees = [(q, q - 1 if q > 0 else None) for q in range(n, -1, -1)]
    return _free_complex_homology(dim_of, maps, degrees, N)


def homology_ranks(c: ChainComplex, m: ModulePresentation, kind: str = "ext", theta: Character | None = None) -> dict:
    bad = m.check(c.p)
    if bad:
        raise InconsistentModule(f"action matrices violate relations {bad}")
    if kind == "ext":
        return ext_trivial_source(c, m)
    if kind == "tor":
        return tor_omega(c, theta or theta_from_complex(c), m)
    raise ValueError(kind)


def poincare_check(p: Presentation, m: ModulePresentation | None = None, complex_: ChainComplex | None = None) -> dict:
    """Ext^i(K, M) and Tor_{n-i}(Omega, M) have the same elementary divisors for every i."""
    c = complex_ or deform_koszul(p)
    m = m or ModulePresentation.trivial(p)
    th = theta_from_complex(c)
    ext = homology_ranks(c, m, "ext")
    tor = homology_ranks(c, m, "tor", th)
    n = p.n
    rows = [{"i": i, "ext": ext[i], "tor": tor[n - i], "match": ext[i] == tor[n - i]} for i in range(n + 1)]
    return {"ok": all(r["match"] for r in rows), "rows": rows, "trunc": p.trunc}


# ---------------------------------------------------------------------------
# Ext^i(K, A_h) for i != n, degree-capped


def _monos(n, d):
    from .hopf import monomials_upto
    return monomials_upto(n, d)


def ext_regular_vanishing(c: ChainComplex, degree_cap: int = 2, slack: int = 2, degrees=None) -> dict:
    """Every cocycle of PBW degree <= cap in Lambda^i* (x) A_h is a coboundary of one of degree <= cap + slack.

    Q-linear check on coordinates (subset, monomial, h-power).  Returns
    {i: {"cocycles": dim, "ok": bool}} for i in ``degrees`` (default all i < n).
    """
    p = c.p
    n, N = p.n, p.trunc
    cc = CochainComplex(c)
    degrees = list(range(n)) if degrees is None else list(degrees)
    out = {}
    for i in degrees:
        rows = Indexer()

        def image(q_next, T, e, k):
            # d^t_{q_next} of e_T* (x) h^k X^e
            a = NCPoly.monomial(e, n, N, 1, k)
            res = cc.apply(q_next, {T: a}) if q_next <= n else {}
            v = {}
            for S, poly in res.items():
                for (e2, k2), cval in poly.items():
                    v[rows((S, e2, k2))] = cval
            return v

        src = [(T, e, k) for T in combinations(range(n), i) for e in _monos(n, degree_cap) for k in range(N + 1)]
        cols = [image(i + 1, *s) for s in src]
        if i + 1 <= n:
            ker = nullspace(cols, max(len(rows), 1)) if len(rows) else [{j: Fraction(1)} for j in range(len(src))]
        else:
            ker = [{j: Fraction(1)} for j in range(len(src))]
        # express cocycles in coordinates of degree-i cochains
        coords = Indexer()
        for s in src:
            coords(s)
        zvecs = [{j: cval for j, cval in z.items()} for z in ker]
        if i == 0:
            ok = not zvecs
            out[i] = {"cocycles": len(zvecs), "ok": ok}
            continue
        pre = [(T, e, k) for T in combinations(range(n), i - 1) for e in _monos(n, degree_cap + slack)
               for k in range(N + 1)]
        bcols = []
        for (T, e, k) in pre:
            a = NCPoly.monomial(e, n, N, 1, k)
            res = cc.apply(i, {T: a})
            v = {}
            for S, poly in res.items():
                for (e2, k2), cval in poly.items():
                    v[coords((S, e2, k2))] = cval
            bcols.append(v)
        dim = len(coords)
        rb = rank(bcols, dim)
        rz = rank(bcols + zvecs, dim)
        out[i] = {"cocycles": len(zvecs), "ok": rb == rz}
    return out
