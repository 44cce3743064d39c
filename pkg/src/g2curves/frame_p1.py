"""Invariant frame along generic curves in the (2,3,5) model.

Builds the adapted frame Y, V, Z, X, W at a generic jet, normalizes the
Gram matrix to the canonical form, and extracts the order-3/4 absolute
invariants from the covariant-derivative coefficients a_ij.

The construction is written over an abstract coefficient ring: an
environment maps jet variable names to ring elements and D is the
derivation along the curve.  With RatExprs and the constrained total
derivative the output is symbolic; with truncated series over Scalars
(or dual numbers) the same code evaluates the frame at a jet.
"""

from fractions import Fraction
from functools import lru_cache

from .scalars import Scalar, ZERO, ONE, rational
from .poly import Poly
from .ratexpr import RatExpr
from .linalg import ExactMatrix, InconsistentSystem
from .jets import JetContext, jname
from .series import TSeries, Dual, dual_const, factorials
from . import model_p1 as p1

CHART = p1.CHART


class FrameDegeneracy(Exception):
    def __init__(self, locus):
        self.locus = locus
        super().__init__(f"frame degenerate on the locus {locus} = 0")


@lru_cache(maxsize=None)
def christoffel():
    """Levi-Civita coefficients Gamma[i][j][k] of the model metric.

    Scale-independent, so computed from the half-symmetrized printed
    table directly; entries are RatExprs in p, q.
    """
    g = p1.metric_matrix(scale=1)
    ginv = ExactMatrix(g).inverse().rows
    n = 5
    dg = [[[g[a][b].diff(CHART[c]) for c in range(n)] for b in range(n)]
          for a in range(n)]
    gamma = [[[RatExpr.const(0)] * n for _ in range(n)] for _ in range(n)]
    half = rational(1, 2)
    for i in range(n):
        for j in range(n):
            for k in range(j, n):
                acc = RatExpr.const(0)
                for l in range(n):
                    if ginv[i][l].is_zero():
                        continue
                    acc = acc + ginv[i][l] * (dg[l][k][j] + dg[j][l][k] - dg[j][k][l])
                acc = acc * half
                gamma[i][j][k] = acc
                gamma[i][k][j] = acc
    return gamma


class FrameEnv:
    """Ring-generic evaluation environment for the frame pipeline."""

    def __init__(self, values, derive, zero, one):
        self.values = values
        self.D = derive
        self.zero = zero
        self.one = one

    def ev(self, expr):
        return _as_ring(RatExpr.of(expr).eval(self.values), self)

    def var(self, name):
        return self.values[name]


def _as_ring(x, env):
    if isinstance(x, Scalar):
        return env.zero + x
    return x


def symbolic_env(order=6):
    ctx = JetContext(CHART, order)
    values = {n: RatExpr.var(n) for n in ctx.jet_coords(order)}
    return FrameEnv(values, ctx.total_derivative,
                    RatExpr.const(0), RatExpr.const(1))


def series_env(point, jet_order=4, depth=6):
    """Environment of truncated series along the curve at a jet point.

    point must carry jets to order jet_order + depth; coefficients may be
    Scalars or Duals.
    """
    fact = factorials(depth)
    values = {}
    sample = point["x"]
    wrap = (lambda v: v) if not isinstance(sample, Scalar) else (lambda v: v)
    names = ["x"] + [jname(u, j) for u in CHART[1:] for j in range(jet_order + 1)]
    for name in names:
        if name == "x":
            values["x"] = TSeries.tvar(point["x"], depth)
            continue
        base, j = _split(name)
        coeffs = [point[jname(base, j + m)] / Scalar(fact[m]) if m else point[name]
                  for m in range(depth + 1)]
        values[name] = TSeries(coeffs, depth)
    zero = TSeries.const(point["x"] * 0, depth)
    one = zero + 1
    return FrameEnv(values, lambda s: s.deriv(), zero, one)


def _split(name):
    from .jets import split_jet_name
    return split_jet_name(name)


# -- ring-generic geometry helpers -------------------------------------------


def _metric(env):
    m = p1.metric_matrix()
    return [[env.ev(m[i][j]) for j in range(5)] for i in range(5)]


def _gram(env, M, u, v):
    acc = env.zero
    for i, a in enumerate(CHART):
        cu = u.get(a)
        if cu is None:
            continue
        for j, b in enumerate(CHART):
            cv = v.get(b)
            if cv is None:
                continue
            ent = M[i][j]
            if ent.is_zero():
                continue
            acc = acc + ent * cu * cv
    return acc


def _vadd(u, v):
    out = dict(u)
    for k, c in v.items():
        out[k] = out.get(k, None)
        out[k] = c if out[k] is None else out[k] + c
    return out


def _vscale(u, c):
    return {k: v * c for k, v in u.items()}


def _nabla(env, gammas, X, V):
    """(nabla_X V)^i = D(V^i) + Gamma^i_{jk} X^j V^k along the curve."""
    out = {}
    for i, a in enumerate(CHART):
        acc = env.D(V[a]) if a in V else env.zero
        for j, b in enumerate(CHART):
            xb = X.get(b)
            if xb is None:
                continue
            for k, c in enumerate(CHART):
                vc = V.get(c)
                if vc is None:
                    continue
                gam = gammas[i][j][k]
                if gam.is_zero():
                    continue
                acc = acc + env.ev(gam) * xb * vc
        out[a] = acc
    return out


def _pi2_residues(env, v):
    """Components of v mod Pi^2 (both vanish iff v is in Pi^2)."""
    a = v.get("x", env.zero)
    r1 = v.get("y", env.zero) - env.var("p") * a
    r2 = (v.get("z", env.zero) - env.var("q") ** 2 * a
          - env.var("q") * 2 * (v.get("p", env.zero) - env.var("q") * a))
    return r1, r2


def _solve2(rows, rhs, env, locus):
    """Solve a small linear system over the ring (unique solution)."""
    mat = ExactMatrix([[c for c in row] for row in rows])
    try:
        sol = mat.solve(rhs)
    except InconsistentSystem:
        raise FrameDegeneracy(locus)
    return sol


def _const_zero(x):
    if isinstance(x, TSeries):
        return x.c[0].is_zero()
    return x.is_zero()


class FrameData:
    """Frame vectors, Gram data, gauge parameters and a_ij coefficients."""

    def __init__(self, **kw):
        self.__dict__.update(kw)


def build_frame(env, branch=1, want_aij=True):
    """Run the full frame normalization over the environment's ring.

    branch: +1 on the g(X,X) > 0 stratum, -1 on the other; the final
    metric scale is fixed by gbar(X,X) = branch.
    """
    M = _metric(env)
    gam = christoffel()
    one = env.one

    X = {"x": one, "y": env.var("y1"), "p": env.var("p1"),
         "q": env.var("q1"), "z": env.var("z1")}
    pv, qv = env.var("p"), env.var("q")
    e1 = {"x": one, "y": pv, "p": qv, "z": qv * qv}
    e2 = {"q": one}

    kappa1 = _gram(env, M, X, X)
    if not kappa1.is_unit():
        raise FrameDegeneracy("R1")

    # Y0 from the Levi bracket [Y, e3] = X mod Pi^2
    ya = pv - env.var("y1")
    yb = (env.var("z1") + qv * qv - qv * env.var("p1") * 2) / 2
    Y0 = {"x": ya, "y": pv * ya, "p": qv * ya + yb, "q": yb, "z": qv * qv * ya}
    # as a combination of e1, e2: Y0 = ya e1 + yb e2
    Y0 = _vadd(_vscale(e1, ya), _vscale(e2, yb))

    nXY = _nabla(env, gam, X, Y0)
    # Z0 = u X + w nabla_X Y with Z0 in Pi^2 and g(X, Z0) = kappa1
    rx1, rx2 = _pi2_residues(env, X)
    rn1, rn2 = _pi2_residues(env, nXY)
    gXn = _gram(env, M, X, nXY)
    sol = _solve2([[rx1, rn1], [rx2, rn2], [kappa1, gXn]],
                  [env.zero, env.zero, kappa1], env, "Pi_X cap Pi^2")
    u0, w0 = sol
    Z0 = _vadd(_vscale(X, u0), _vscale(nXY, w0))

    # normalize Y by the e3-component of Z0: gamma = Z_p - q Z_x
    gamma_e3 = Z0.get("p", env.zero) - qv * Z0.get("x", env.zero)
    if not gamma_e3.is_unit():
        raise FrameDegeneracy("e3-component of Z")
    Y = _vscale(Y0, gamma_e3.inverse())

    kappa2 = _gram(env, M, Z0, Z0)
    if not (kappa1 - kappa2).is_unit():
        raise FrameDegeneracy("kappa1 - kappa2")
    W0 = _nabla(env, gam, X, _vadd(Z0, _vscale(X, env.zero - one)))
    kappa3 = _gram(env, M, Y, W0)
    if not kappa3.is_unit():
        raise FrameDegeneracy("kappa3 (108 I2 - 1/3)")

    # V0 in Pi with g(X, V0) = kappa1
    gXe1 = _gram(env, M, X, e1)
    gXe2 = _gram(env, M, X, e2)
    if gXe2.is_unit():
        V0 = _vscale(e2, kappa1 / gXe2)
    elif gXe1.is_unit():
        V0 = _vscale(e1, kappa1 / gXe1)
    else:
        raise FrameDegeneracy("g(X, Pi)")

    # gauge: c1 = 1 / D_x I2
    i2 = env.ev(p1.I2())
    di2 = env.D(i2)
    if not di2.is_unit():
        raise FrameDegeneracy("D_x I2")
    c1 = di2.inverse()
    Xf = _vscale(X, c1)
    minus_one = env.zero - one

    # Remaining gauge freedom: Z -> c1 Z0 + c2 Y, V -> c1 V0 + c3 Y,
    # W -> c1^2 W0 + a Z0 + b X + c Y.  The metric conditions k1..k4 pin
    # (a, b, c) and the V-shift for every c2; the leftover c2-direction is
    # normalized intrinsically by a_YY = 0 (the Y-row/Y-column coefficient
    # of the covariant derivative is affine in c2).
    norm = c1 * c1 * kappa1
    if branch < 0:
        norm = env.zero - norm
    scale_inv = norm.inverse()
    abs_norm = c1 * c1 * kappa1
    xf_log = (env.zero - env.D(abs_norm) / abs_norm / 2) * c1

    wref = _vscale(W0, c1 * c1)
    gXwref = _gram(env, M, X, wref)
    gZ0wref = _gram(env, M, Z0, wref)
    gYwref = _gram(env, M, Y, wref)
    gXZ0 = _gram(env, M, X, Z0)          # = kappa1
    gZ0Z0 = kappa2

    def member(c2):
        """Frame for the gauge parameter c2; k1..k4 all solved."""
        Zf = _vadd(_vscale(Z0, c1), _vscale(Y, c2))
        # k2: g(X, wref + a Z0 + b X) = 0 ; k3: g(Zf, wref + a Z0 + b X + cY) = 0
        # (the Y-slot is g-orthogonal to X and Zf)
        r1 = [kappa1, kappa1]
        rhs1 = env.zero - gXwref
        r2 = [c1 * gZ0Z0 + c2 * env.zero, c1 * kappa1]
        rhs2 = env.zero - (c1 * gZ0wref + c2 * gYwref)
        det = r1[0] * r2[1] - r1[1] * r2[0]
        if not det.is_unit():
            raise FrameDegeneracy("kappa1 - kappa2")
        a_w = (rhs1 * r2[1] - r1[1] * rhs2) / det
        b_w = (r1[0] * rhs2 - rhs1 * r2[0]) / det
        w1 = _vadd(wref, _vadd(_vscale(Z0, a_w), _vscale(X, b_w)))
        gYw = _gram(env, M, Y, w1)
        if not gYw.is_unit():
            raise FrameDegeneracy("kappa3 (108 I2 - 1/3)")
        c5 = env.zero - _gram(env, M, w1, w1) / (gYw * 2)
        W2 = _vadd(w1, _vscale(Y, c5))
        Vc = _vscale(V0, c1)
        c3 = env.zero - _gram(env, M, Vc, W2) / _gram(env, M, Y, W2)
        Vf = _vadd(Vc, _vscale(Y, c3))
        return Zf, Vf, W2, c3, a_w, c5

    def aij_of(Zf, Vf, W2, Xf):
        w_basis = [Y, _vadd(Zf, _vscale(Xf, minus_one)),
                   _vadd(Vf, _vscale(Xf, minus_one)), W2]
        bm = ExactMatrix([[w.get(u, env.zero) for w in w_basis + [Xf]]
                          for u in CHART])
        rows = []
        for wvec in w_basis:
            nab = _vscale(_nabla(env, gam, X, wvec), c1)
            tot = _vadd(nab, _vscale(wvec, xf_log))
            rows.append(bm.solve([tot.get(u, env.zero) for u in CHART])[:4])
        return rows

    if not want_aij:
        c2 = env.zero
        Zf, Vf, W2, c3, c4, c5 = member(c2)
        vectors = {"Y": Y, "V": Vf, "Z": Zf, "X": Xf, "W": W2}
        order = ["Y", "V", "Z", "X", "W"]
        gram_final = [[_gram(env, M, vectors[a], vectors[b]) * scale_inv
                       for b in order] for a in order]
        return FrameData(env=env, metric=M, vectors=vectors, branch=branch,
                         kappa1=kappa1, kappa2=kappa2, kappa3=kappa3,
                         i2=i2, c1=c1, c2=c2, c3=c3, c4=c4, c5=c5,
                         gram_final=gram_final, a=None, k5=env.ev(_k5_expr()),
                         delta=env.zero)

    # a_YY is affine in the gauge parameter: pin it to zero
    f0 = aij_of(*member(env.zero)[:3], Xf)[0][0]
    f1 = aij_of(*member(env.one)[:3], Xf)[0][0]
    slope = f1 - f0
    if not slope.is_unit():
        raise FrameDegeneracy("a_YY gauge pin")
    delta = env.zero - f0 / slope
    c2 = delta
    Zf, Vf, W2, c3, c4, c5 = member(delta)
    aij = aij_of(Zf, Vf, W2, Xf)
    vectors = {"Y": Y, "V": Vf, "Z": Zf, "X": Xf, "W": W2}
    order = ["Y", "V", "Z", "X", "W"]
    gram_final = [[_gram(env, M, vectors[a], vectors[b]) * scale_inv
                   for b in order] for a in order]
    return FrameData(env=env, metric=M, vectors=vectors, branch=branch,
                     kappa1=kappa1, kappa2=kappa2, kappa3=kappa3,
                     i2=i2, c1=c1, c2=c2, c3=c3, c4=c4, c5=c5,
                     gram_final=gram_final, a=aij, k5=env.ev(_k5_expr()),
                     delta=delta)


@lru_cache(maxsize=None)
def _k5_expr():
    return RatExpr.parse("(p1-q)/3") + RatExpr.of(p1.R2()) * 3 / p1.R1()
