"""Low-degree Hochschild and Chevalley-Eilenberg cochains over a classical U(a).

A deformation U_h with the same PBW basis is viewed as a star product
u * v = sum_r h^r mu_r(u, v) on U(a)[[h]].  Cochains take PBW monomials
(exponent tuples) to classical polynomials (NCPoly at truncation 0).
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, permutations
from typing import Callable, Mapping

from .hopf import monomials_upto
from .linalg import Indexer, nullspace, solve
from .ncpoly import NCPoly, Presentation, _unit


class DegreeCapOverflow(RuntimeError):
    pass


class NotACoboundary(ValueError):
    pass


def classical_algebra(p: Presentation) -> Presentation:
    """U(a) with exact rationals: classical brackets, truncation 0."""
    return p.classical_limit().with_trunc(0)


def _perm_sign(perm) -> int:
    s = 1
    perm = list(perm)
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                s = -s
    return s


class Cochain:
    """k-linear map U(a)^k -> U(a), defined on PBW monomials.

    ``cap`` bounds the degree of each argument; None means no bound.
    """

    def __init__(self, k: int, fn: Callable, alg: Presentation, cap: int | None = None):
        self.k, self.fn, self.alg, self.cap = k, fn, alg, cap
        self._memo: dict = {}

    @classmethod
    def from_table(cls, k: int, table: Mapping, alg: Presentation, cap: int | None = None) -> "Cochain":
        table = {tuple(tuple(a) for a in key): v for key, v in table.items()}
        zero = alg.zero()
        return cls(k, lambda args: table.get(args, zero), alg, cap)

    def __call__(self, *args) -> NCPoly:
        args = tuple(tuple(a) for a in args)
        if len(args) != self.k:
            raise TypeError(f"expected {self.k} arguments")
        if self.cap is not None and any(sum(a) > self.cap for a in args):
            raise DegreeCapOverflow(f"argument degree exceeds cap {self.cap}")
        hit = self._memo.get(args)
        if hit is None:
            hit = self.fn(args)
            self._memo[args] = hit
        return hit

    def apply(self, *polys: NCPoly) -> NCPoly:
        """Multilinear extension to polynomial arguments (h-free)."""
        out = self.alg.zero()

        def rec(i, coef, args):
            nonlocal out
            if i == len(polys):
                out = out + self(*args).scale(coef)
                return
            for (e, k), c in polys[i].items():
                if k == 0:
                    rec(i + 1, coef * c, args + (e,))
        rec(0, Fraction(1), ())
        return out

    def table(self, degree: int) -> dict:
        mons = monomials_upto(self.alg.n, degree)
        out = {}
        for args in _tuples(mons, self.k, degree):
            v = self(*args)
            if not v.is_zero():
                out[args] = v
        return out

    def to_json(self, degree: int) -> list:
        return [{"args": [list(a) for a in args], "value": v.to_json()} for args, v in sorted(self.table(degree).items())]


def _tuples(mons, k, total):
    def rec(prefix, left):
        if len(prefix) == k:
            yield tuple(prefix)
            return
        for m in mons:
            if sum(m) <= left:
                yield from rec(prefix + [m], left - sum(m))
    yield from rec([], total)


def _prod(alg: Presentation, a, b) -> NCPoly:
    """Classical product of two monomials."""
    return NCPoly(alg.n, 0, {(e, 0): c for (e, k), c in alg._mul_mono(tuple(a), tuple(b), 0).items() if k == 0})


def mu_series(p: Presentation, r_max: int | None = None, degree_cap: int = 6) -> list:
    """[mu_1, ..., mu_rmax] with u * v = uv + sum_r h^r mu_r(u, v) on PBW monomials."""
    r_max = p.trunc if r_max is None else r_max
    if r_max > p.trunc:
        raise ValueError("r_max exceeds the truncation order")
    alg = classical_algebra(p)
    cache: dict = {}

    def full(args):
        hit = cache.get(args)
        if hit is None:
            hit = p._mul_mono(args[0], args[1], r_max)
            cache[args] = hit
        return hit

    def make(r):
        return Cochain(2, lambda args: NCPoly(p.n, 0, {(e, 0): c for (e, k), c in full(args).items() if k == r}),
                       alg, degree_cap)
    return [make(r) for r in range(1, r_max + 1)]


def hochschild_b(f: Cochain) -> Cochain:
    alg, k = f.alg, f.k

    def fn(args):
        a = list(args)
        if k == 0:
            u = f()
            return _poly_mul(alg, NCPoly.monomial(a[0], alg.n, 0), u) - _poly_mul(alg, u, NCPoly.monomial(a[0], alg.n, 0))
        out = _poly_mul(alg, NCPoly.monomial(a[0], alg.n, 0), f(*a[1:]))
        for i in range(1, k + 1):
            prod = _prod(alg, a[i - 1], a[i])
            sign = -1 if i % 2 else 1
            for (e, _), c in prod.items():
                out = out + f(*(a[:i - 1] + [e] + a[i + 1:])).scale(sign * c)
        last = f(*a[:k])
        tail = _poly_mul(alg, last, NCPoly.monomial(a[k], alg.n, 0))
        out = out + (tail if (k + 1) % 2 == 0 else -tail)
        return out
    return Cochain(k + 1, fn, alg, f.cap)


def _poly_mul(alg, a: NCPoly, b: NCPoly) -> NCPoly:
    return alg.mul(a, b)


class CECochain:
    """Alternating q-linear map a^q -> U(a), stored on increasing index tuples."""

    def __init__(self, q: int, values: Mapping, alg: Presentation):
        self.q, self.alg = q, alg
        self.values = {tuple(k): v for k, v in values.items() if not v.is_zero()}

    def __call__(self, *idx) -> NCPoly:
        if len(set(idx)) < len(idx):
            return self.alg.zero()
        order = sorted(range(len(idx)), key=lambda t: idx[t])
        key = tuple(idx[t] for t in order)
        v = self.values.get(key, self.alg.zero())
        return v if _perm_sign(order) == 1 else -v

    def __eq__(self, o):
        return isinstance(o, CECochain) and (self.q, self.values) == (o.q, o.values)

    def __sub__(self, o):
        keys = set(self.values) | set(o.values)
        return CECochain(self.q, {k: self(*k) - o(*k) for k in keys}, self.alg)

    def is_zero(self) -> bool:
        return not self.values

    def format(self) -> str:
        names = self.alg.names
        parts = [f"({v.format(names)}) (x) " + "^".join(names[i] + "*" for i in k) for k, v in sorted(self.values.items())]
        return " + ".join(parts) if parts else "0"

    def to_json(self) -> list:
        return [{"args": [i + 1 for i in k], "value": v.to_json()} for k, v in sorted(self.values.items())]


def ce_differential(f: CECochain) -> CECochain:
    alg, q, n = f.alg, f.q, f.alg.n
    out = {}
    for S in combinations(range(n), q + 1):
        acc = alg.zero()
        for i in range(q + 1):
            rest = S[:i] + S[i + 1:]
            v = f(*rest)
            if not v.is_zero():
                z = alg.gen(S[i])
                ad = alg.mul(z, v) - alg.mul(v, z)
                acc = acc + (ad if i % 2 == 0 else -ad)
        for i in range(q + 1):
            for j in range(i + 1, q + 1):
                rest = tuple(x for t, x in enumerate(S) if t not in (i, j))
                sign = 1 if (i + j) % 2 == 0 else -1
                for a, c in alg.C(S[i], S[j]).items():
                    acc = acc + f(a, *rest).scale(sign * c)
        if not acc.is_zero():
            out[S] = acc
    return CECochain(q + 1, out, alg)


def antisymmetrize(f: Cochain) -> CECochain:
    """Psi*(f)(z_1..z_k) = sum_sigma sign(sigma) f(z_sigma(1), ..., z_sigma(k)) on generators."""
    alg, k, n = f.alg, f.k, f.alg.n
    out = {}
    for S in combinations(range(n), k):
        acc = alg.zero()
        for perm in permutations(range(k)):
            args = [_unit(n, S[t]) for t in perm]
            v = f(*args)
            acc = acc + (v if _perm_sign(perm) == 1 else -v)
        if not acc.is_zero():
            out[S] = acc
    return CECochain(k, out, alg)


# ---------------------------------------------------------------------------
# coboundaries and gauge


def _extend(alg: Presentation, gen_values: list, mu1: Cochain) -> Callable:
    """alpha on all PBW monomials from alpha(e_i), via alpha(e_i m') = e_i alpha(m') + alpha(e_i) m' - mu1(e_i, m')."""
    n = alg.n
    memo: dict = {}

    def alpha(m):
        m = tuple(m)
        hit = memo.get(m)
        if hit is not None:
            return hit
        d = sum(m)
        if d == 0:
            res = alg.zero()
        elif d == 1:
            res = gen_values[m.index(1)]
        else:
            i = next(t for t, a in enumerate(m) if a)
            rest = list(m)
            rest[i] -= 1
            rest = tuple(rest)
            ei = alg.gen(i)
            res = alg.mul(ei, alpha(rest)) + alg.mul(gen_values[i], NCPoly.monomial(rest, n, 0)) - mu1(_unit(n, i), rest)
        memo[m] = res
        return res
    return alpha


class _Lin:
    """Affine-linear form in unknowns: {var or None: NCPoly}."""

    __slots__ = ("t",)

    def __init__(self, t):
        self.t = {k: v for k, v in t.items() if not v.is_zero()}

    def __add__(self, o):
        t = dict(self.t)
        for k, v in o.t.items():
            t[k] = t[k] + v if k in t else v
        return _Lin(t)

    def __sub__(self, o):
        return self + o.scale(-1)

    def scale(self, c):
        return _Lin({k: v.scale(c) for k, v in self.t.items()})

    def lmul(self, alg, poly):
        return _Lin({k: alg.mul(poly, v) for k, v in self.t.items()})

    def rmul(self, alg, poly):
        return _Lin({k: alg.mul(v, poly) for k, v in self.t.items()})


def solve_coboundary(mu1: Cochain, degree_cap: int = 4, gen_degree: int = 2, seed: Mapping | None = None) -> Cochain:
    """alpha with b(alpha) = mu1 on monomial pairs of total degree <= cap.

    Unknowns are the values alpha(e_i), spanned by monomials of degree <=
    ``gen_degree``; alpha elsewhere follows from the coboundary recursion.
    ``seed`` ({i: NCPoly}) is used as the base point, so it is returned
    unchanged whenever it already solves the system.
    """
    alg = mu1.alg
    n = alg.n
    mons = monomials_upto(n, gen_degree)
    base = [seed.get(i, alg.zero()) if seed else alg.zero() for i in range(n)]
    var = Indexer()
    gen_lin = []
    for i in range(n):
        t = {None: base[i]} if not base[i].is_zero() else {}
        for m in mons:
            t[var((i, m))] = NCPoly.monomial(m, n, 0)
        gen_lin.append(_Lin(t))
    memo: dict = {}

    def alpha(m):
        m = tuple(m)
        hit = memo.get(m)
        if hit is not None:
            return hit
        d = sum(m)
        if d == 0:
            res = _Lin({})
        elif d == 1:
            res = gen_lin[m.index(1)]
        else:
            i = next(t for t, a in enumerate(m) if a)
            rest = list(m)
            rest[i] -= 1
            rest = tuple(rest)
            res = alpha(rest).lmul(alg, alg.gen(i)) + gen_lin[i].rmul(alg, NCPoly.monomial(rest, n, 0)) \
                - _Lin({None: mu1(_unit(n, i), rest)})
        memo[m] = res
        return res

    def b_alpha(u, v):
        # u alpha(v) - alpha(uv) + alpha(u) v
        out = alpha(v).lmul(alg, NCPoly.monomial(u, n, 0)) + alpha(u).rmul(alg, NCPoly.monomial(v, n, 0))
        for (e, _), c in _prod(alg, u, v).items():
            out = out - alpha(e).scale(c)
        return out

    rows = Indexer()
    cols: list = [dict() for _ in range(len(var))]
    rhs: dict = {}
    allm = monomials_upto(n, degree_cap)
    for u in allm:
        for v in allm:
            if sum(u) + sum(v) > degree_cap or sum(u) == 0 or sum(v) == 0:
                continue
            res = b_alpha(u, v) - _Lin({None: mu1(u, v)})
            for key, poly in res.t.items():
                for (e, _), c in poly.items():
                    r = rows((u, v, e))
                    if key is None:
                        rhs[r] = rhs.get(r, 0) - c
                    else:
                        cols[key][r] = cols[key].get(r, 0) + c
    x = solve(cols, max(len(rows), 1), rhs) if len(rows) else {}
    if x is None:
        raise NotACoboundary(f"mu_1 is not a Hochschild coboundary at degree cap {degree_cap}")
    gen_values = []
    for i in range(n):
        val = base[i]
        for j, c in x.items():
            gi, m = var.keys[j]
            if gi == i:
                val = val + NCPoly.monomial(m, n, 0, c)
        gen_values.append(val)
    fn = _extend(alg, gen_values, mu1)
    out = Cochain(1, lambda args: fn(args[0]), alg, None)
    out.gen_values = gen_values
    out.verified_degree = degree_cap
    return out


def seed_cochain(alg: Presentation, values: Mapping) -> CECochain:
    return CECochain(1, {(i,): v for i, v in values.items()}, alg)


def _apply_alpha(alpha: Cochain, x: NCPoly, N: int) -> NCPoly:
    out: dict = {}
    for (e, k), c in x.items():
        for (e2, _), c2 in alpha(e).items():
            out[(e2, k)] = out.get((e2, k), 0) + c * c2
    return NCPoly(x.n, N, out)


def gauge_product(p: Presentation, alpha: Cochain):
    """u .' v = beta^{-1}(beta(u) . beta(v)), beta = id - h alpha, as a function on NCPolys."""
    N = p.trunc

    def beta(x):
        return x - _apply_alpha(alpha, x, N).h_mul(1)

    def beta_inv(x):
        total, term = x, x
        for _ in range(N):
            term = _apply_alpha(alpha, term, N).h_mul(1)
            if term.is_zero():
                break
            total = total + term
        return total

    def prod(u, v):
        return beta_inv(p.mul(beta(u), beta(v)))
    return prod


def to_ordered(prod, x: NCPoly, n: int, N: int) -> NCPoly:
    """Rewrite x (classical PBW coordinates) in ordered .'-monomials, order by order in h."""
    cache: dict = {}

    def ordered(m):
        hit = cache.get(m)
        if hit is None:
            acc = NCPoly.monomial((0,) * n, n, N)
            for i, a in enumerate(m):
                for _ in range(a):
                    acc = prod(acc, NCPoly.monomial(_unit(n, i), n, N))
            cache[m] = hit = acc
        return hit
    coef = NCPoly(n, N, {})
    res = x
    for _ in range(N + 2):
        if res.is_zero():
            break
        r = res.valuation()
        part = NCPoly(n, N, {(e, k): c for (e, k), c in res.items() if k == r})
        coef = coef + part
        for (e, k), c in part.items():
            res = res - ordered(e).scale(c).h_mul(k)
    return coef


def gauge_transform(p: Presentation, alpha: Cochain) -> Presentation:
    """Presentation of (U(a)[[h]], .'), relations in ordered .'-monomials."""
    prod = gauge_product(p, alpha)
    n, N = p.n, p.trunc
    br = {}
    for i in range(n):
        for j in range(i + 1, n):
            ei, ej = p.gen(i), p.gen(j)
            c = prod(ei, ej) - prod(ej, ei)
            c = to_ordered(prod, c, n, N)
            if not c.is_zero():
                br[(i, j)] = c
    return Presentation(p.names, br, N, (p.name + "'") if p.name else "gauge", validate=False)


# ---------------------------------------------------------------------------
# center


def center_basis(p: Presentation, degree_cap: int = 2) -> dict:
    """Central elements of PBW degree <= cap.

    Returns {"leading": [NCPoly mod h], "lifts": [NCPoly]}: a basis of the
    space of reductions mod h of central elements, each with a full lift.
    """
    n, N = p.n, p.trunc
    mons = monomials_upto(n, degree_cap)
    unk = [(m, k) for m in mons for k in range(N + 1)]
    rows = Indexer()
    cols = []
    for (m, k) in unk:
        v = {}
        z = NCPoly.monomial(m, n, N, 1, k)
        for i in range(n):
            c = p.mul(z, p.gen(i)) - p.mul(p.gen(i), z)
            for (e, kk), val in c.items():
                v[rows((i, e, kk))] = val
        cols.append(v)
    ker = nullspace(cols, max(len(rows), 1)) if len(rows) else [{j: Fraction(1)} for j in range(len(unk))]
    lead_idx = [j for j, (m, k) in enumerate(unk) if k == 0]
    # project to leading coordinates and pick an echelon basis
    proj = [{lead_idx.index(j): c for j, c in z.items() if j in lead_idx} for z in ker]
    keep = [t for t, v in enumerate(proj) if v]
    if not keep:
        return {"leading": [], "lifts": []}
    leading, lifts = [], []
    combos = _row_combinations([proj[t] for t in keep], len(lead_idx))
    for comb in combos:
        full: dict = {}
        for t, c in comb.items():
            for j, v in ker[keep[t]].items():
                full[j] = full.get(j, 0) + c * v
        z = NCPoly(n, N, {(unk[j][0], unk[j][1]): v for j, v in full.items() if v})
        lifts.append(z)
        leading.append(z.mod_h())
    order = sorted(range(len(leading)), key=lambda t: _lead_key(leading[t]))
    return {"leading": [leading[t] for t in order], "lifts": [lifts[t] for t in order]}


def _lead_key(x: NCPoly):
    top = max(((sum(e), e) for (e, _) in x.flat()), default=(0, ()))
    return top


def _row_combinations(vectors: list, dim: int) -> list:
    """Fraction-exact Gaussian elimination on vectors, returning combinations giving a reduced basis."""
    rows = [(dict(v), {t: Fraction(1)}) for t, v in enumerate(vectors)]
    basis = []
    pivots = []
    for vec, comb in rows:
        vec, comb = dict(vec), dict(comb)
        for (pv, bvec, bcomb) in basis:
            c = vec.get(pv)
            if c:
                for j, x in bvec.items():
                    vec[j] = vec.get(j, 0) - c * x
                for j, x in bcomb.items():
                    comb[j] = comb.get(j, 0) - c * x
                vec = {j: x for j, x in vec.items() if x}
        if not vec:
            continue
        pv = max(vec)
        s = vec[pv]
        vec = {j: x / s for j, x in vec.items()}
        comb = {j: x / s for j, x in comb.items() if x}
        # back-substitute into earlier basis vectors
        new_basis = []
        for (q, bvec, bcomb) in basis:
            c = bvec.get(pv)
            if c:
                bvec = {j: bvec.get(j, 0) - c * vec.get(j, 0) for j in set(bvec) | set(vec)}
                bvec = {j: x for j, x in bvec.items() if x}
                bcomb = {j: bcomb.get(j, 0) - c * comb.get(j, 0) for j in set(bcomb) | set(comb)}
                bcomb = {j: x for j, x in bcomb.items() if x}
            new_basis.append((q, bvec, bcomb))
        basis = new_basis + [(pv, vec, comb)]
    return [comb for (_, _, comb) in sorted(basis, key=lambda b: b[0])]
