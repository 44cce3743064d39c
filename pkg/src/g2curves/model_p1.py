"""The 5-dimensional model with the rank-2 distribution of growth (2,3,5).

Chart (x,y,p,q,z) from the Monge equation y'' = (z')^2 normal form.  The
module owns: the distribution Pi and conformal metric g, the unipotent
m-level action and 1-jet classification, the relative invariants R1, R2
and absolute I2, the integral-curve invariants R8, R10, I10 with their
derivations, and Christoffel symbols for the frame construction.
"""

from fractions import Fraction
from functools import lru_cache

from .scalars import Scalar, ZERO, ONE, SQRT3, rational
from .poly import Poly, REGISTRY
from .ratexpr import RatExpr, register_cancel_hint
from .linalg import ExactMatrix
from .vfields import VField
from .jets import JetContext, jname
from .symmetry import (SymmetryBasis, Stratum, solve_field_ansatz,
                       distribution_conditions)

CHART = ("x", "y", "p", "q", "z")
WEIGHTS = {"x": 1, "y": 3, "p": 2, "q": 1, "z": 3}


def E(s):
    return RatExpr.parse(s)


def pi_generators():
    e1 = VField(CHART, {"x": 1, "y": "p", "p": "q", "z": E("q^2")})
    e2 = VField(CHART, {"q": 1})
    return e1, e2


def e3_field():
    return VField(CHART, {"p": 1, "z": E("2*q")})


def pi_membership(w):
    """Polynomials vanishing iff the field w is a section of Pi."""
    a = w.coeff("x")
    out = []
    for comp, factor in (("y", E("p")), ("p", E("q")), ("z", E("q^2"))):
        e = w.coeff(comp) - factor * a
        out.append(_num(e))
    return out


def pi2_membership(w):
    """Polynomials vanishing iff w is a section of Pi^2 = <e1, e2, e3>."""
    a = w.coeff("x")
    c = w.coeff("p")
    out = [w.coeff("y") - E("p") * a,
           w.coeff("z") - E("q^2") * a - E("2*q") * (c - E("q") * a)]
    return [_num(e) for e in out]


def _num(e):
    e = RatExpr.of(e)
    if not e.is_polynomial():
        raise ValueError("membership reduction must stay polynomial")
    return e.num * e.den.constant_value().inverse()


def symmetry_conditions():
    return distribution_conditions(pi_generators(), pi_membership)


@lru_cache(maxsize=None)
def symmetries(degree=6):
    fields = solve_field_ansatz(CHART, WEIGHTS, degree, symmetry_conditions())
    return SymmetryBasis(CHART, fields)


# -- conformal metric --------------------------------------------------------

# Printed coefficient table of g (cross coefficients as displayed).
METRIC_COEFFS = {
    ("x", "x"): E("q^2"), ("x", "p"): E("-2*q"), ("x", "q"): E("6*p"),
    ("x", "z"): E("-3"), ("y", "q"): E("-6"), ("p", "p"): E("4"),
}

# Gram computations use twice the half-symmetrized printed table; this is
# the overall scale pinned by kappa1 = 2 R1.
GRAM_SCALE = Scalar(2)


def metric_matrix(scale=None):
    """Symmetric matrix of the bilinear form (half-symmetrization)."""
    scale = GRAM_SCALE if scale is None else Scalar.of(scale)
    idx = {u: i for i, u in enumerate(CHART)}
    m = [[RatExpr.const(0)] * 5 for _ in range(5)]
    half = RatExpr.const(Scalar(Fraction(1, 2)))
    for (u, v), c in METRIC_COEFFS.items():
        i, j = idx[u], idx[v]
        if i == j:
            m[i][i] = m[i][i] + c * scale
        else:
            m[i][j] = m[i][j] + c * half * scale
            m[j][i] = m[j][i] + c * half * scale
    return m


def g_apply(m, vec1, vec2):
    """Bilinear form on coefficient dicts (chart coordinates)."""
    out = RatExpr.const(0)
    for i, u in enumerate(CHART):
        cu = vec1.get(u)
        if cu is None or (hasattr(cu, "is_zero") and cu.is_zero()):
            continue
        for j, v in enumerate(CHART):
            cv = vec2.get(v)
            if cv is None or (hasattr(cv, "is_zero") and cv.is_zero()):
                continue
            if m[i][j].is_zero():
                continue
            out = out + m[i][j] * cu * cv
    return out


def tangent_vector(order=1):
    """X = d_x + y1 d_y + p1 d_p + q1 d_q + z1 d_z as coefficient dict."""
    return {"x": RatExpr.const(1), "y": E("y1"), "p": E("p1"),
            "q": E("q1"), "z": E("z1")}


# -- printed relative/absolute invariants ------------------------------------

@lru_cache(maxsize=None)
def R1():
    return E("(q+2*p1)^2 + 6*(q1*(p-y1)-q*p1) - 3*z1")


@lru_cache(maxsize=None)
def R2():
    return E("-(q+2*p1)^3/18 + (p-y1)*(q*p2-z2/2) + (q+y2)*(q*p1-z1/2)"
             " + p1*z1 - q^2*y2/2")


@lru_cache(maxsize=None)
def I2():
    return R2() ** 2 / R1() ** 3


@lru_cache(maxsize=None)
def R8():
    return E("196*q2^5*q8 - 2352*q2^4*q3*q7 - 5040*q2^4*q4*q6"
             " - 3255*q2^4*q5^2 + 16632*q2^3*q3^2*q6 + 59598*q2^3*q3*q4*q5"
             " + 13772*q2^3*q4^3 - 83160*q2^2*q3^3*q5 - 174735*q2^2*q3^2*q4^2"
             " + 297000*q2*q3^4*q4 - 118800*q3^6")


def integral_context(order=12):
    return JetContext(CHART, order, {"y1": "p", "p1": "q", "z1": E("q^2")})


@lru_cache(maxsize=None)
def R10():
    ctx = integral_context()
    q2 = E("q2")
    r8 = R8()
    d1 = ctx.total_derivative(r8)
    d2 = ctx.total_derivative(q2 * d1)
    return (q2 * r8 * d2 * 21 - (q2 * d1) ** 2 * rational(91, 4)
            + r8 ** 2 * E("13*q3^2 - 19*q2*q4") * 9)


class MicroLocalInv:
    """Formal product scale * prod base_i^(e_i) with rational exponents.

    Bases are RatExprs, exponents Fractions.  Products, quotients and
    powers accumulate exponents without ever expanding; an object whose
    exponents are all integral is mathematically a rational function and
    reduces to a plain RatExpr on request (size permitting).  Sixth roots
    from the integral derivations are never evaluated numerically.
    """

    __slots__ = ("scale", "factors")

    def __init__(self, factors=(), scale=ONE):
        self.scale = Scalar.of(scale)
        merged = []
        for b, e in factors:
            e = Fraction(e)
            if e == 0:
                continue
            b = RatExpr.of(b)
            for i, (bb, ee) in enumerate(merged):
                if bb == b:
                    merged[i] = (bb, ee + e)
                    break
            else:
                merged.append((b, e))
        self.factors = tuple((b, e) for b, e in merged if e != 0)

    def __mul__(self, other):
        if isinstance(other, MicroLocalInv):
            return MicroLocalInv(self.factors + other.factors,
                                 self.scale * other.scale)
        if isinstance(other, (int, Fraction, Scalar)):
            return MicroLocalInv(self.factors, self.scale * Scalar.of(other))
        return MicroLocalInv(self.factors + ((RatExpr.of(other), Fraction(1)),),
                             self.scale)

    __rmul__ = __mul__

    def inverse(self):
        return MicroLocalInv(tuple((b, -e) for b, e in self.factors),
                             self.scale.inverse())

    def __truediv__(self, other):
        if isinstance(other, MicroLocalInv):
            return self * other.inverse()
        return self * MicroLocalInv(((RatExpr.of(other), Fraction(-1)),))

    def __pow__(self, n):
        return MicroLocalInv(tuple((b, e * n) for b, e in self.factors),
                             self.scale ** n)

    def is_rational(self):
        return all(e.denominator == 1 for _, e in self.factors)

    def as_ratexpr(self, term_limit=200000):
        """Expand to a plain RatExpr (integral exponents only)."""
        if not self.is_rational():
            raise ValueError("fractional root exponents remain")
        est = 1
        for b, e in self.factors:
            est *= max(len(b.num.terms), len(b.den.terms)) ** abs(int(e))
            if est > term_limit:
                raise ValueError("expansion would exceed the term limit")
        out = RatExpr.const(self.scale)
        for b, e in self.factors:
            out = out * b ** int(e)
        return out

    def eval(self, point):
        """Exact value at a point (integral exponents only)."""
        if not self.is_rational():
            raise ValueError("cannot evaluate fractional roots exactly")
        out = self.scale
        for b, e in self.factors:
            v = b.eval(point)
            out = out * v ** int(e)
        return out

    def __eq__(self, other):
        if isinstance(other, MicroLocalInv):
            d = self / other
            return d.is_one()
        return NotImplemented

    def is_one(self):
        m = MicroLocalInv(self.factors, self.scale)
        # cancel factor-by-factor; equal bases already merged in __init__
        return not m.factors and m.scale.is_one()

    def __repr__(self):
        rs = " * ".join(f"({b})^({e})" for b, e in self.factors)
        return f"MicroLocalInv({self.scale}{' * ' + rs if rs else ''})"


def I10_factored():
    """I10 = R10^3 / R8^7 (kept factored: the cube never expands)."""
    return MicroLocalInv(((RatExpr.of(R10()), Fraction(3)),
                          (RatExpr.of(R8()), Fraction(-7))))


@lru_cache(maxsize=None)
def dlog_I10():
    """D_x I10 / I10 = 3 D R10 / R10 - 7 D R8 / R8 on E_Pi (one RatExpr)."""
    ctx = integral_context()
    r8, r10 = R8(), R10()
    d8 = ctx.total_derivative(r8)
    d10 = ctx.total_derivative(r10)
    return (d10 * 3 * r8 - d8 * 7 * r10) / (r8 * r10)


def box_integral():
    """Micro-local derivation q2 * R8^(-1/6) * D_x on E_Pi.

    Acts on RatExprs and on factored MicroLocalInv values.
    """
    ctx = integral_context()
    r8 = RatExpr.of(R8())

    def box(e):
        if isinstance(e, MicroLocalInv):
            # D(prod b^e) = (sum e_i Db_i/b_i) * prod b^e
            t = RatExpr.const(0)
            for b, ee in e.factors:
                t = t + ctx.total_derivative(b) / b * Scalar(ee)
            return MicroLocalInv(e.factors + ((r8, Fraction(-1, 6)),),
                                 e.scale) * (E("q2") * t)
        return MicroLocalInv(((E("q2") * ctx.total_derivative(RatExpr.of(e)),
                               Fraction(1)), (r8, Fraction(-1, 6))))

    return box


def box_integral_rational():
    """Tresse derivative d/dI10 = (1/D_x I10) D_x on E_Pi.

    Equals (1/box(I10)) * box: the sixth roots cancel, the derivation is
    rational, and it sends I10 to 1.  Returns MicroLocalInv values with
    integral exponents (kept factored).
    """
    ctx = integral_context()
    inv_di10 = I10_factored().inverse() / dlog_I10()

    def box(e):
        if isinstance(e, MicroLocalInv):
            t = RatExpr.const(0)
            for b, ee in e.factors:
                t = t + ctx.total_derivative(b) / b * Scalar(ee)
            return e * t * inv_di10
        return inv_di10 * ctx.total_derivative(RatExpr.of(e))

    return box


@lru_cache(maxsize=None)
def I11_sixth():
    """bar I11 = I11^6 = q2^6 (D_x I10)^6 / R8: rational, kept factored."""
    box = box_integral()
    out = (box(I10_factored())) ** 6
    assert out.is_rational()
    return out


# -- m-level action and 1-jet classification --------------------------------

# brackets [f_i, e_j] on m = <e1..e5>; p+ kills g_{-1}
_F_ACTION = {
    1: {3: (2, 1), 4: (3, 1)},          # f1: e3 -> e2, e4 -> e3
    2: {3: (1, -1), 5: (3, 1)},         # f2: e3 -> -e1, e5 -> e3
    3: {4: (1, 1), 5: (2, 1)},          # f3: e4 -> e1, e5 -> e2
}


def _ad_matrix(i):
    m = [[ZERO] * 5 for _ in range(5)]
    for src, (dst, c) in _F_ACTION[i].items():
        m[dst - 1][src - 1] = Scalar(c)
    return m


def rho_matrix(s1, s2, s3):
    """exp(s1 ad_f1 + s2 ad_f2 + s3 ad_f3) on m; exact nilpotent exp."""
    s = [Scalar.of(s1), Scalar.of(s2), Scalar.of(s3)]
    n = [[ZERO] * 5 for _ in range(5)]
    for i in range(3):
        ad = _ad_matrix(i + 1)
        for a in range(5):
            for b in range(5):
                n[a][b] = n[a][b] + s[i] * ad[a][b]
    out = ExactMatrix.identity(5)
    term = ExactMatrix.identity(5)
    nm = ExactMatrix(n)
    fac = 1
    for k in range(1, 6):
        term = nm.mul(term)
        fac *= k
        scaled = [[term.rows[a][b] * Scalar(Fraction(1, fac)) for b in range(5)]
                  for a in range(5)]
        out = ExactMatrix([[out.rows[a][b] + scaled[a][b] for b in range(5)]
                           for a in range(5)])
    return out


def gl2_grading_matrix(g0):
    """Block action diag(A, det, det*A) on (v1..v5)."""
    (a, b), (c, d) = g0
    a, b, c, d = (Scalar.of(t) for t in (a, b, c, d))
    det = a * d - b * c
    if det.is_zero():
        raise ZeroDivisionError("singular g0 in the grading action")
    m = [[ZERO] * 5 for _ in range(5)]
    m[0][0], m[0][1], m[1][0], m[1][1] = a, b, c, d
    m[2][2] = det
    m[3][3], m[3][4], m[4][3], m[4][4] = det * a, det * b, det * c, det * d
    return ExactMatrix(m)


def m_coords_action(g0, s, v):
    """Composite P1-action: grading(g0) after rho(s) on an m-vector.

    Entries of v may be Scalars or symbolic RatExprs.
    """
    mat = gl2_grading_matrix(g0).mul(rho_matrix(*s))
    out = []
    for i in range(5):
        acc = None
        for j in range(5):
            t = mat.rows[i][j] * v[j] if not isinstance(v[j], RatExpr) \
                else RatExpr.of(v[j]) * mat.rows[i][j]
            acc = t if acc is None else acc + t
        out.append(acc)
    return out


def m_quadric(v):
    """2 v1 v5 - 2 v2 v4 + v3^2 (vanishes on the null cone)."""
    v = [x if isinstance(x, (RatExpr,)) else Scalar.of(x) for x in v]
    return (v[0] * v[4] * 2 - v[1] * v[3] * 2 + v[2] * v[2])


def classify_1jet_m(v):
    """Orbit of a nonzero m-vector: label, group matrix, achieved vector.

    The group matrix maps v onto the representative up to the torus
    square-class scaling (the label itself is exact).
    """
    v = [Scalar.of(x) for x in v]
    if all(x.is_zero() for x in v):
        raise ValueError("zero vector has no 1-jet orbit")
    acc = ExactMatrix.identity(5)

    def act(mat, vec):
        return [sum((mat.rows[i][j] * vec[j] for j in range(5)), start=ZERO)
                for i in range(5)]

    if v[3].is_unit() or v[4].is_unit():
        # GL2 moves (v4, v5) to (0, s)
        if v[4].is_zero():
            g = gl2_grading_matrix(((0, 1), (1, 0)))
            acc = g.mul(acc)
            v = act(g, v)
        g = gl2_grading_matrix(((v[4], -v[3]), (0, v[4].inverse())))
        acc = g.mul(acc)
        v = act(g, v)
        # rho kills v3 then v2; v1 -> quadric/2
        r = rho_matrix(0, -v[2] / v[4], 0)
        acc = r.mul(acc)
        v = act(r, v)
        r = rho_matrix(0, 0, -v[1] / v[4])
        acc = r.mul(acc)
        v = act(r, v)
        # scale v5 to 1 by the torus (v5 has weight det*lam2)
        g = gl2_grading_matrix(((1, 0), (0, v[4].inverse())))
        acc = g.mul(acc)
        v = act(g, v)
        sgn = v[0].sign()
        label = "e5+e1" if sgn > 0 else ("e5-e1" if sgn < 0 else "e5")
        return label, acc, v
    if v[2].is_unit():
        r = rho_matrix(-v[1] / v[2], v[0] / v[2], 0)
        acc = r.mul(acc)
        v = act(r, v)
        g = gl2_grading_matrix(((1, 0), (0, v[2].inverse())))
        acc = g.mul(acc)
        v = act(g, v)
        return "e3", acc, v
    # v in g_{-1}: rotate (v1, v2) to (1, 0)
    if v[0].is_zero():
        g = gl2_grading_matrix(((0, 1), (1, 0)))
        acc = g.mul(acc)
        v = act(g, v)
    g = gl2_grading_matrix(((v[0].inverse(), 0), (-v[1], v[0])))
    acc = g.mul(acc)
    v = act(g, v)
    return "e1", acc, v


def jet1_to_m(jet):
    """1-jet (over any base point: translated to the origin) -> m-coords.

    (v1..v5) = (1, q1, 2 p1, 3 y1, -3/2 z1) at the origin; the quadric
    then equals R1.  Translation by the nilpotent group preserves both.
    """
    pt = dict(jet)
    moved = translate_jet_to_origin(pt)
    return [ONE, Scalar.of(moved["q1"]), Scalar.of(moved["p1"]) * 2,
            Scalar.of(moved["y1"]) * 3, Scalar.of(moved["z1"]) * rational(-3, 2)]


def translate_jet_to_origin(jet):
    """Move the 0-jet to the origin by nilpotent model symmetries."""
    from .jets import compose_maps, prolong_point_map, unconstrained
    pt = dict(jet)
    basis = m_translation_fields()
    ctx = unconstrained(CHART, 1)
    for name, field in basis:
        val = Scalar.of(pt[name])
        if val.is_zero():
            continue
        fmap = field.nilpotent_flow(-val)
        pt = prolong_point_map(fmap, ctx, pt, 1)
    return pt


@lru_cache(maxsize=None)
def m_translation_fields():
    """Fields flowing each base coordinate at the origin, triangular order."""
    e1, e2 = pi_generators()
    e3 = e3_field()
    e4 = VField(CHART, {"y": 1})
    e5 = VField(CHART, {"z": 1})
    # order matters: kill x first (e1 moves x), then q, p, y, z
    return (("x", e1), ("q", e2), ("p", e3), ("y", e4), ("z", e5))


def classify_1jet_chart(jet):
    """Orbit label of a regular 1-jet in the chart."""
    pt = dict(jet)
    onpi2 = (Scalar.of(pt["y1"]) == Scalar.of(pt["p"]) and
             Scalar.of(pt["z1"]) == Scalar.of(pt["q"]) * (Scalar.of(pt["p1"]) * 2
                                                          - Scalar.of(pt["q"])))
    if onpi2:
        if Scalar.of(pt["p1"]) == Scalar.of(pt["q"]):
            return "Pi"
        return "Pi2\\Pi"
    r1 = Scalar.of(R1().eval(pt))
    s = r1.sign()
    if s == 0:
        return "N\\Pi2"
    return "generic+" if s > 0 else "generic-"


# -- strata for the Hilbert table --------------------------------------------


def stratum_generic(order=8):
    ctx = JetContext(CHART, order)
    return Stratum("TM\\(N u Pi2)", ctx, avoid=(R1(),), ascii_id="generic")


def stratum_null(order=8):
    # solve R1 = 0 for z1
    z1 = E("((q+2*p1)^2 + 6*(q1*(p-y1)-q*p1))/3")
    ctx = JetContext(CHART, order, {"z1": z1})
    return Stratum("N\\Pi2", ctx, avoid=(E("y1-p"),), ascii_id="null")


def stratum_pi2(order=8):
    ctx = JetContext(CHART, order, {"y1": "p", "z1": E("2*q*p1-q^2")})
    return Stratum("Pi2\\Pi", ctx, avoid=(E("p1-q"),), ascii_id="pi2")


def stratum_pi(order=12):
    return Stratum("Pi\\{0}", integral_context(order), avoid=(E("q2"),),
                   ascii_id="pi")


def hilbert_strata(order=8):
    return [stratum_generic(order), stratum_null(order),
            stratum_pi2(order), stratum_pi(order)]


HILBERT_EXPECTED = {
    "TM\\(N u Pi2)": [0, 0, 1, 2, 4, 4, 4, 4],
    "N\\Pi2": [0, 0, 0, 1, 2, 3, 3, 3],
    "Pi2\\Pi": [0, 0, 0, 0, 0, 1, 2, 2],
    "Pi\\{0}": [0, 0, 0, 0, 0, 0, 0, 0],
}


# -- relative weights ---------------------------------------------------------


def lie_weight(field_prolonged, R, ctx=None):
    """alpha with L_v R = alpha * R (exact division); None if not divisible.

    field_prolonged: VField on jet coordinates; R: RatExpr with constant
    denominator (the relative invariants are polynomial up to a scalar).
    """
    from .vfields import lie_poly_weight
    if not R.is_polynomial():
        raise ValueError("relative invariants must be polynomial")
    return lie_poly_weight(field_prolonged, R.num)


register_cancel_hint(R1().num)
register_cancel_hint(R2().num)
register_cancel_hint(R8().num)
