"""Symmetry algebras by polynomial ansatz, isotropy, and Hilbert tables.

The ansatz solver looks for polynomial vector fields preserving a given
geometric structure.  All structures here are homogeneous for a weighted
grading of the chart, so the linear conditions split into independent
blocks by weight; each block is a small exact kernel computation.
"""

import itertools

from .scalars import Scalar, ZERO, ONE
from .poly import Poly, REGISTRY, mono_key
from .ratexpr import RatExpr
from .linalg import ExactMatrix, InconsistentSystem, sparse_kernel
from .vfields import VField
from .jets import JetContext, jname


def _monomials_leq(nvars, degree):
    """Exponent tuples with total degree <= degree."""
    def rec(i, rem):
        if i == nvars - 1:
            for e in range(rem + 1):
                yield (e,)
            return
        for e in range(rem + 1):
            for rest in rec(i + 1, rem - e):
                yield (e,) + rest
    return rec(0, degree)


def solve_field_ansatz(chart, weights, degree, conditions):
    """All polynomial fields v (deg <= degree) with conditions(v) == 0.

    conditions: callable VField -> list[Poly]; must be linear in v.
    weights: dict chart var -> positive weight making the conditions
    weighted-homogeneous (used only to split the solve into blocks).
    Returns a list of VField.
    """
    chart = tuple(chart)
    wlist = [weights[u] for u in chart]
    # candidate basis fields m * d/du, grouped by weight
    groups = {}
    for exps in _monomials_leq(len(chart), degree):
        mono = tuple((REGISTRY.idx(chart[i]), e) for i, e in enumerate(exps) if e)
        wdeg = sum(e * wlist[i] for i, e in enumerate(exps))
        for ci, u in enumerate(chart):
            w = wdeg - wlist[ci]
            groups.setdefault(w, []).append((mono, u))
    fields = []
    for w in sorted(groups):
        cand = groups[w]
        rows = {}
        for col, (mono, u) in enumerate(cand):
            basis_field = VField(chart, {u: RatExpr(Poly({mono: ONE}, copy=False))})
            for ci, cond in enumerate(conditions(basis_field)):
                for m, coeff in cond.terms.items():
                    rows.setdefault((ci, m), {})[col] = coeff
        kernel = sparse_kernel(rows.values(), len(cand))
        for vec in kernel:
            coeffs = {}
            for col, (mono, u) in enumerate(cand):
                if vec[col].is_unit():
                    coeffs[u] = coeffs.get(u, Poly()) + Poly({mono: vec[col]}, copy=False)
            fields.append(VField(chart, {u: RatExpr(p) for u, p in coeffs.items()}))
    return fields


def distribution_conditions(generators, membership):
    """Conditions for [v, E_i] in the distribution for each generator.

    membership: callable VField -> list[Poly] vanishing exactly on
    sections of the distribution.
    """
    def cond(v):
        out = []
        for g in generators:
            out.extend(membership(v.bracket(g)))
        return out
    return cond


class SymmetryBasis:
    """A bracket-closed list of fields with exact structure constants."""

    def __init__(self, chart, fields):
        self.chart = tuple(chart)
        self.fields = list(fields)
        self.dim = len(self.fields)
        self._sc = None

    def structure_constants(self):
        """c[i][j] = coefficient list of [v_i, v_j] in the basis."""
        if self._sc is not None:
            return self._sc
        keys = {}
        cols = []
        for f in self.fields:
            cols.append(self._vec(f, keys))
        nk = len(keys)
        mat = ExactMatrix([[cols[j].get(i, ZERO) for j in range(self.dim)]
                           for i in range(nk)])
        rows, pivots = mat.rref()
        sc = {}
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                b = self.fields[i].bracket(self.fields[j])
                tv = self._vec(b, keys, extend=False)
                if tv is None:
                    raise InconsistentSystem("bracket leaves the span")
                rhs = [tv.get(k, ZERO) for k in range(nk)]
                sol = _solve_from_rref(mat, rows, pivots, rhs)
                if sol is None:
                    raise InconsistentSystem("bracket leaves the span")
                sc[(i, j)] = sol
        self._sc = sc
        return sc

    def _vec(self, f, keys, extend=True):
        out = {}
        for u, c in f.coeffs.items():
            if not c.is_polynomial():
                raise ValueError("symmetry fields must be polynomial")
            d = c.den.constant_value()
            for m, co in c.num.terms.items():
                kk = (u, m)
                if kk not in keys:
                    if not extend:
                        return None
                    keys[kk] = len(keys)
                out[keys[kk]] = co / d
        return out

    def bracket_in_basis(self, ci, cj):
        """Bracket of two coefficient vectors, in basis coordinates."""
        sc = self.structure_constants()
        out = [ZERO] * self.dim
        for i in range(self.dim):
            a = ci[i]
            if a.is_zero():
                continue
            for j in range(self.dim):
                b = cj[j]
                if b.is_zero() or i == j:
                    continue
                if i < j:
                    coeffs = sc[(i, j)]
                    f = a * b
                else:
                    coeffs = sc[(j, i)]
                    f = -(a * b)
                for k in range(self.dim):
                    if coeffs[k].is_unit():
                        out[k] = out[k] + f * coeffs[k]
        return out

    def field_from_coeffs(self, coeffs):
        out = VField(self.chart, {})
        for c, f in zip(coeffs, self.fields):
            if c.is_unit():
                out = out + f * c
        return out

    def jacobi_holds(self):
        sc = self.structure_constants()
        n = self.dim
        basis_vecs = [[ONE if i == k else ZERO for k in range(n)] for i in range(n)]
        for i, j, k in itertools.combinations(range(n), 3):
            t1 = self.bracket_in_basis(basis_vecs[i], self.bracket_in_basis(basis_vecs[j], basis_vecs[k]))
            t2 = self.bracket_in_basis(basis_vecs[j], self.bracket_in_basis(basis_vecs[k], basis_vecs[i]))
            t3 = self.bracket_in_basis(basis_vecs[k], self.bracket_in_basis(basis_vecs[i], basis_vecs[j]))
            if any(not (a + b + c).is_zero() for a, b, c in zip(t1, t2, t3)):
                return False
        return True


def _solve_from_rref(mat, rows, pivots, rhs):
    """Solve mat x = rhs reusing a precomputed rref of mat.

    rref rows encode the elimination; redo it on the rhs by elimination
    against the original matrix (simple but adequate at this size).
    """
    aug = ExactMatrix([list(r) + [b] for r, b in zip(mat.rows, rhs)])
    rrows, rpiv = aug.rref()
    if mat.ncols in rpiv:
        return None
    x = [ZERO] * mat.ncols
    for r, pc in enumerate(rpiv):
        x[pc] = rrows[r][mat.ncols]
    return x


# -- isotropy ----------------------------------------------------------------


def evaluation_matrix(basis, ctx, point, k):
    """Rows = prolonged basis fields evaluated at the jet point."""
    coords = ctx.jet_coords(k)
    rows = []
    for f in basis.fields:
        vals = f.prolonged_values(ctx, point, k)
        rows.append([vals[c] for c in coords])
    return ExactMatrix(rows)


def orbit_rank(basis, ctx, point, k):
    return evaluation_matrix(basis, ctx, point, k).rank()


def isotropy(basis, ctx, point, k):
    """Kernel of evaluation at the jet: subalgebra coefficient vectors."""
    mat = evaluation_matrix(basis, ctx, point, k)
    return mat.transpose().kernel_basis()


def subalgebra_structure(basis, members):
    """Structure constants of a subalgebra given by coefficient vectors.

    Returns sc[(i, j)] = coefficients of [m_i, m_j] in the members basis.
    Raises if the members do not close under bracket.
    """
    n = len(members)
    mat = ExactMatrix([[members[j][i] for j in range(n)]
                       for i in range(basis.dim)])
    sc = {}
    for i in range(n):
        for j in range(i + 1, n):
            b = basis.bracket_in_basis(members[i], members[j])
            sol = mat.solve(b)
            sc[(i, j)] = sol
    return sc


class StructureMatchError(Exception):
    pass


def match_stab_a1_structure(basis, members):
    """Construct a basis of the 5-dim isotropy algebra realizing
    [s1,s2]=s2, [s1,s3]=s3, [s1,s4]=s4, [s1,s5]=2s5, [s2,s4]=3s5,
    [s3,s4]=4s5 (all other brackets zero).

    Returns the new basis as coefficient vectors over `basis`; raises
    StructureMatchError when the algebra is not isomorphic.
    """
    if len(members) != 5:
        raise StructureMatchError(f"expected dim 5, got {len(members)}")
    sc = subalgebra_structure(basis, members)
    n = 5

    def lincomb(vecs, coeffs):
        out = [ZERO] * n
        for v, c in zip(vecs, coeffs):
            for i in range(n):
                out[i] = out[i] + c * v[i]
        return out

    def br(a, b):
        # bracket of two coefficient-vectors-in-members coordinates
        out = [ZERO] * n
        for i in range(n):
            if a[i].is_zero():
                continue
            for j in range(n):
                if b[j].is_zero() or i == j:
                    continue
                if i < j:
                    cc = sc[(i, j)]
                    f = a[i] * b[j]
                else:
                    cc = sc[(j, i)]
                    f = -(a[i] * b[j])
                for k in range(n):
                    if cc[k].is_unit():
                        out[k] = out[k] + f * cc[k]
        return out

    idv = [[ONE if i == k else ZERO for k in range(n)] for i in range(n)]

    def span_basis(vectors):
        m = ExactMatrix(vectors)
        rows, piv = m.rref()
        return [rows[i] for i in range(len(piv))]

    derived = span_basis([br(idv[i], idv[j]) for i in range(n) for j in range(i + 1, n)]
                         + [[ZERO] * n])
    if len(derived) != 4:
        raise StructureMatchError(f"derived algebra dim {len(derived)} != 4")
    second = span_basis([br(a, b) for a in derived for b in derived] + [[ZERO] * n])
    if len(second) != 1:
        raise StructureMatchError(f"second derived dim {len(second)} != 1")
    s5 = second[0]
    # find h with [h, s5] = 2 s5
    h = None
    for cand in idv:
        out = br(cand, s5)
        ratio = None
        ok = True
        for a, b in zip(out, s5):
            if b.is_zero():
                if not a.is_zero():
                    ok = False
                    break
                continue
            rr = a / b
            if ratio is None:
                ratio = rr
            elif rr != ratio:
                ok = False
                break
        if ok and ratio is not None and ratio.is_unit():
            h = [c * (Scalar(2) / ratio) for c in cand]
            break
    if h is None:
        raise StructureMatchError("no grading element found")
    s1 = h
    # eigenspace of ad(s1) on derived with eigenvalue 1
    rows = []
    for d in derived:
        out = br(s1, d)
        rows.append([out[i] - d[i] for i in range(n)])
    # solve: combos of derived basis with bracket = combo itself
    mat = ExactMatrix([[rows[j][i] for j in range(len(derived))] for i in range(n)])
    ker = mat.kernel_basis()
    v1 = [lincomb(derived, k) for k in ker]
    if len(v1) != 3:
        raise StructureMatchError(f"weight-1 space dim {len(v1)} != 3")
    # antisymmetric form omega(a,b) with br(a,b) = omega * s5
    s5_pivot = next(i for i in range(n) if s5[i].is_unit())

    def omega(a, b):
        out = br(a, b)
        val = out[s5_pivot] / s5[s5_pivot]
        return val

    omega_mat = ExactMatrix([[omega(v1[i], v1[j]) for j in range(3)]
                             for i in range(3)])
    rad = omega_mat.kernel_basis()
    if len(rad) != 1:
        raise StructureMatchError(f"omega radical dim {len(rad)} != 1")
    kvec = lincomb(v1, rad[0])
    s4 = None
    for cand in v1:
        if any(omega(w, cand).is_unit() for w in v1):
            s4 = cand
            break
    if s4 is None:
        raise StructureMatchError("omega vanishes on the weight-1 space")
    # w with omega(w, s4) = 1
    vals = [omega(w, s4) for w in v1]
    wi = next(i for i, v in enumerate(vals) if v.is_unit())
    wvec = [c / vals[wi] for c in v1[wi]]
    s2 = [Scalar(3) * c for c in wvec]
    s3 = [Scalar(4) * a + b for a, b in zip(wvec, kvec)]
    new_basis = [s1, s2, s3, s4, s5]
    # verify every structure constant of the target presentation
    target = {(0, 1): (1, 1), (0, 2): (2, 1), (0, 3): (3, 1), (0, 4): (4, 2),
              (1, 3): (4, 3), (2, 3): (4, 4)}
    for i in range(5):
        for j in range(i + 1, 5):
            out = br(new_basis[i], new_basis[j])
            expect = [ZERO] * 5
            if (i, j) in target:
                k, c = target[(i, j)]
                expect = [Scalar(c) * x for x in new_basis[k]]
            if any((a - b).is_unit() for a, b in zip(out, expect)):
                raise StructureMatchError(f"relation [s{i+1},s{j+1}] mismatch")
    return new_basis


# -- Hilbert tables ----------------------------------------------------------


class Stratum:
    """A 1-jet type: constrained context plus sampling data.

    sample(rng, k) must return a full jet point on the prolonged stratum;
    free_coords(k) lists coordinates whose projection is injective on the
    stratum tangent space; dim(k) is the prolonged stratum dimension.
    Strata cut out by non-solvable equations (the tangent-cone quartic)
    override the sampler, the free coordinates and the dimension.
    """

    def __init__(self, name, ctx, avoid=(), sampler=None, ascii_id=None,
                 free_coords_fn=None, dim_fn=None):
        self.name = name
        self.ctx = ctx
        self.avoid = tuple(avoid)
        self._sampler = sampler
        self._free = free_coords_fn
        self._dim = dim_fn
        self.ascii_id = ascii_id or name

    def dim(self, k):
        return self._dim(k) if self._dim else self.ctx.dim(k)

    def free_coords(self, k):
        return self._free(k) if self._free else self.ctx.jet_coords(k)

    def sample(self, rng, k):
        if self._sampler is not None:
            return self._sampler(rng, k)
        return self.ctx.random_point(rng, k, avoid=self.avoid)


class RankInstability(Exception):
    pass


def stratum_orbit_rank(basis, stratum, k, rng, samples=5):
    """Max evaluation rank over sampled stratum points."""
    best = 0
    seen = []
    for _ in range(samples):
        pt = stratum.sample(rng, k)
        coords = stratum.free_coords(k)
        rows = []
        for f in basis.fields:
            vals = f.prolonged_values(stratum.ctx, pt, k)
            rows.append([vals[c] for c in coords])
        r = ExactMatrix(rows).rank()
        seen.append(r)
        best = max(best, r)
    if seen.count(best) < max(1, len(seen) - 2):
        raise RankInstability(f"unstable ranks {seen} on {stratum.name} at k={k}")
    return best


def hilbert_row(basis, stratum, k_max, seed, samples=5, ks=None):
    """s_k and h_k for one stratum; deterministic given the seed."""
    import random
    rng = random.Random(seed)
    out = []
    klist = list(range(0, k_max + 1)) if ks is None else sorted(ks)
    s_at = {}
    for k in klist:
        rank = stratum_orbit_rank(basis, stratum, k, rng, samples)
        s_at[k] = stratum.dim(k) - rank
    for k in klist:
        s_k = s_at[k]
        if k == 0:
            h_k = s_k
        elif (k - 1) in s_at:
            h_k = s_k - s_at[k - 1]
        else:
            h_k = None
        out.append((k, s_k, h_k))
    return out
