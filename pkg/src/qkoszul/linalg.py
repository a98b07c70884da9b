"""Exact Q-linear algebra on sparse coordinate data, via sympy's DomainMatrix."""

from __future__ import annotations

from fractions import Fraction

from sympy import QQ
from sympy.polys.matrices import DomainMatrix


def _qq(c):
    c = Fraction(c)
    return QQ(c.numerator, c.denominator)


def sparse_matrix(columns: list, nrows: int) -> DomainMatrix:
    """Matrix whose j-th column is the sparse vector columns[j] ({row: value})."""
    rows: dict = {}
    for j, col in enumerate(columns):
        for i, v in col.items():
            if v:
                rows.setdefault(i, {})[j] = _qq(v)
    return DomainMatrix(rows, (nrows, len(columns)), QQ)


def rank(columns: list, nrows: int) -> int:
    if not columns or nrows == 0:
        return 0
    return sparse_matrix(columns, nrows).rank()


def nullspace(columns: list, nrows: int) -> list:
    """Basis of {x : sum_j x_j columns[j] = 0} as sparse dicts over column indices."""
    ncols = len(columns)
    if ncols == 0:
        return []
    if nrows == 0:
        return [{j: Fraction(1)} for j in range(ncols)]
    M = sparse_matrix(columns, nrows)
    ns = M.to_sparse().nullspace()
    out = []
    for r, row in ns.to_sdm().items():
        out.append({j: Fraction(int(v.numerator), int(v.denominator)) for j, v in row.items()})
    return out


def solve(columns: list, nrows: int, rhs: dict):
    """One solution x of sum_j x_j columns[j] = rhs with free variables zero, or None."""
    ncols = len(columns)
    aug = list(columns) + [rhs]
    M = sparse_matrix(aug, nrows)
    R, pivots = M.rref()
    if ncols in pivots:
        return None
    sdm = R.to_sdm()
    x = {}
    for r, pc in enumerate(pivots):
        v = sdm.get(r, {}).get(ncols)
        if v:
            x[pc] = Fraction(int(v.numerator), int(v.denominator))
    return x


class Indexer:
    """Stable integer labels for hashable coordinates."""

    def __init__(self):
        self.index: dict = {}
        self.keys: list = []

    def __call__(self, key) -> int:
        i = self.index.get(key)
        if i is None:
            i = len(self.keys)
            self.index[key] = i
            self.keys.append(key)
        return i

    def __len__(self):
        return len(self.keys)


def jordan_type(dim: int, ker: list, im: list, shift) -> list:
    """Elementary divisors of H = ker/im for a nilpotent operator h on a Q-space.

    ``ker`` and ``im`` are spanning lists of sparse vectors, ``shift`` maps a
    sparse vector v to h*v.  Returns the exponents a with H = sum R/h^a.
    """
    r_im = rank(im, dim)
    sizes = []
    cur = list(ker)
    j = 0
    while True:
        s = rank(cur + im, dim) - r_im
        sizes.append(s)
        if s == 0:
            break
        cur = [shift(v) for v in cur]
        cur = [v for v in cur if v]
        j += 1
    # sizes[j] = dim h^j H; count of summands with exponent > j is sizes[j] - sizes[j+1]
    gt = [sizes[k] - sizes[k + 1] for k in range(len(sizes) - 1)]
    out = []
    for a in range(1, len(gt) + 1):
        cnt = gt[a - 1] - (gt[a] if a < len(gt) else 0)
        out.extend([a] * cnt)
    return sorted(out)
