"""Exact linear algebra over Scalar or RatExpr entries.

Dense Gaussian elimination with exact field arithmetic; rank, kernel
bases and particular solutions are representation-independent.  A sparse
row-elimination routine backs the large ansatz solves.
"""

from .scalars import Scalar, ZERO, ONE
from .ratexpr import RatExpr


class InconsistentSystem(Exception):
    pass


def _as_ring(x):
    if hasattr(x, "is_unit"):
        return x
    return Scalar.of(x)


class ExactMatrix:
    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows):
        self.rows = [[_as_ring(e) for e in row] for row in rows]
        self.nrows = len(self.rows)
        self.ncols = len(self.rows[0]) if self.rows else 0
        for row in self.rows:
            if len(row) != self.ncols:
                raise ValueError("ragged matrix")

    @staticmethod
    def identity(n):
        return ExactMatrix([[ONE if i == j else ZERO for j in range(n)]
                            for i in range(n)])

    def copy_rows(self):
        return [list(r) for r in self.rows]

    def transpose(self):
        return ExactMatrix([[self.rows[i][j] for i in range(self.nrows)]
                            for j in range(self.ncols)])

    def mul(self, other):
        assert self.ncols == other.nrows
        out = []
        for i in range(self.nrows):
            row = []
            for j in range(other.ncols):
                acc = None
                for k in range(self.ncols):
                    t = self.rows[i][k] * other.rows[k][j]
                    acc = t if acc is None else acc + t
                row.append(acc)
            out.append(row)
        return ExactMatrix(out)

    def rref(self):
        """Returns (rref rows, pivot column list)."""
        rows = self.copy_rows()
        pivots = []
        r = 0
        for c in range(self.ncols):
            pr = None
            for i in range(r, len(rows)):
                if rows[i][c].is_unit():
                    pr = i
                    break
            if pr is None:
                continue
            rows[r], rows[pr] = rows[pr], rows[r]
            inv = rows[r][c].inverse()
            rows[r] = [e * inv for e in rows[r]]
            for i in range(len(rows)):
                if i != r and not rows[i][c].is_zero():
                    f = rows[i][c]
                    rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
            pivots.append(c)
            r += 1
            if r == len(rows):
                break
        return rows, pivots

    def rank(self):
        return len(self.rref()[1])

    def kernel_basis(self):
        """Basis of the right kernel, one vector per free column."""
        rows, pivots = self.rref()
        pivset = set(pivots)
        free = [c for c in range(self.ncols) if c not in pivset]
        basis = []
        for fc in free:
            vec = [ZERO] * self.ncols
            vec[fc] = ONE
            for r, pc in enumerate(pivots):
                vec[pc] = -rows[r][fc]
            basis.append(vec)
        return basis

    def solve(self, rhs):
        """One solution of A x = rhs, or raise InconsistentSystem."""
        aug = ExactMatrix([list(r) + [b] for r, b in zip(self.rows, rhs)])
        rows, pivots = aug.rref()
        if self.ncols in pivots:
            raise InconsistentSystem("no solution")
        x = [ZERO] * self.ncols
        for r, pc in enumerate(pivots):
            x[pc] = rows[r][self.ncols]
        return x

    def det(self):
        assert self.nrows == self.ncols
        rows = self.copy_rows()
        n = self.nrows
        det = ONE
        sign = 1
        for c in range(n):
            pr = None
            for i in range(c, n):
                if rows[i][c].is_unit():
                    pr = i
                    break
            if pr is None:
                return ZERO if isinstance(det, Scalar) else RatExpr.const(0)
            if pr != c:
                rows[c], rows[pr] = rows[pr], rows[c]
                sign = -sign
            piv = rows[c][c]
            det = det * piv
            inv = piv.inverse()
            for i in range(c + 1, n):
                if not rows[i][c].is_zero():
                    f = rows[i][c] * inv
                    rows[i] = [a - f * b for a, b in zip(rows[i], rows[c])]
        return det * sign if sign < 0 else det

    def inverse(self):
        assert self.nrows == self.ncols
        n = self.nrows
        aug = ExactMatrix([list(self.rows[i]) +
                           [ONE if i == j else ZERO for j in range(n)]
                           for i in range(n)])
        rows, pivots = aug.rref()
        if pivots != list(range(n)):
            raise InconsistentSystem("singular matrix")
        return ExactMatrix([r[n:] for r in rows])


def sparse_kernel(rows, ncols):
    """Kernel basis of a sparse system.

    rows: iterable of dicts {col: Scalar} (each row = one equation).
    Returns a list of dense kernel vectors (lists of Scalar).
    """
    pivot_rows = {}  # pivot col -> reduced row dict
    for row in rows:
        r = {c: v for c, v in row.items() if not v.is_zero()}
        while r:
            c = min(r)
            piv = pivot_rows.get(c)
            if piv is None:
                inv = r[c].inverse()
                pivot_rows[c] = {cc: vv * inv for cc, vv in r.items()}
                break
            f = r[c]
            for cc, vv in piv.items():
                nv = r.get(cc, ZERO) - f * vv
                if nv.is_zero():
                    r.pop(cc, None)
                else:
                    r[cc] = nv
    pivcols = sorted(pivot_rows)
    pivset = set(pivcols)
    free = [c for c in range(ncols) if c not in pivset]
    # back substitution: fully reduce pivot rows against each other
    for c in reversed(pivcols):
        row = pivot_rows[c]
        for c2 in pivcols:
            if c2 <= c:
                continue
            f = row.get(c2)
            if f is None or f.is_zero():
                continue
            for cc, vv in pivot_rows[c2].items():
                nv = row.get(cc, ZERO) - f * vv
                if nv.is_zero():
                    row.pop(cc, None)
                else:
                    row[cc] = nv
    basis = []
    for fc in free:
        vec = [ZERO] * ncols
        vec[fc] = ONE
        for c in pivcols:
            coef = pivot_rows[c].get(fc)
            if coef is not None and not coef.is_zero():
                vec[c] = -coef
        basis.append(vec)
    return basis
