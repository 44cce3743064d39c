"""Vector fields on charts and their jet prolongations.

Coefficients are RatExprs in the chart variables.  Prolongation obeys
phi^0 = base coefficient, phi^{j+1} = D_x phi^j - u_{j+1} D_x(a), with a
the x-coefficient; on a constrained context the same recursion runs with
the constrained total derivative, which equals restriction of the free
prolongation for invariant equations.
"""

from .scalars import Scalar, ZERO, ONE
from .ratexpr import RatExpr
from .jets import JetContext, jname, split_jet_name, series_of_jet, jet_of_series
from .series import TSeries, Dual, dual_const, factorials


class ContextMismatch(Exception):
    pass


class FlowError(Exception):
    pass


class VField:
    """Vector field sum_u coeff[u] d/du on the chart `vars`."""

    __slots__ = ("vars", "coeffs")

    def __init__(self, chart_vars, coeffs):
        self.vars = tuple(chart_vars)
        self.coeffs = {}
        for k, v in coeffs.items():
            e = RatExpr.of(v)
            if not e.is_zero():
                self.coeffs[k] = e

    def coeff(self, name):
        return self.coeffs.get(name, RatExpr.const(0))

    def is_zero(self):
        return not self.coeffs

    def apply(self, e):
        """Lie derivative of a function (same chart or jet chart)."""
        e = RatExpr.of(e)
        out = RatExpr.const(0)
        names = e.var_names()
        for u, c in self.coeffs.items():
            if u in names:
                out = out + c * e.diff(u)
        return out

    def __add__(self, other):
        self._check(other)
        out = dict(self.coeffs)
        for u, c in other.coeffs.items():
            out[u] = out.get(u, RatExpr.const(0)) + c
        return VField(self.vars, out)

    def __sub__(self, other):
        self._check(other)
        out = dict(self.coeffs)
        for u, c in other.coeffs.items():
            out[u] = out.get(u, RatExpr.const(0)) - c
        return VField(self.vars, out)

    def __mul__(self, s):
        return VField(self.vars, {u: c * s for u, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __neg__(self):
        return self * Scalar(-1)

    def _check(self, other):
        if self.vars != other.vars:
            raise ContextMismatch(f"{self.vars} vs {other.vars}")

    def bracket(self, other):
        """Exact commutator [self, other]."""
        self._check(other)
        out = {}
        for u in set(self.coeffs) | set(other.coeffs):
            c = self.apply(other.coeff(u)) - other.apply(self.coeff(u))
            if not c.is_zero():
                out[u] = c
        return VField(self.vars, out)

    def evaluate(self, point):
        """Coefficient values at a point (dict name -> ring value)."""
        return {u: c.eval(point) for u, c in self.coeffs.items()}

    def prolong(self, ctx, k=None):
        """Symbolic prolongation to the (possibly constrained) jet context."""
        if not isinstance(ctx, JetContext):
            raise ContextMismatch("prolong needs a JetContext")
        k = ctx.order if k is None else k
        a = ctx.restrict(self.coeff("x"))
        da = ctx.total_derivative(a) if k >= 1 else None
        coeffs = {"x": a}
        for u in ctx.deps:
            coeffs[u] = ctx.restrict(self.coeff(u))
        for u in ctx.free_deps:
            phi = coeffs[u]
            for j in range(1, k + 1):
                phi = ctx.total_derivative(phi) - RatExpr.var(jname(u, j)) * da
                coeffs[jname(u, j)] = phi
        return VField(tuple(ctx.jet_coords(k)), coeffs)

    def prolonged_values(self, ctx, point, k=None):
        """v^(k) components at a jet point, via the exact dual-number flow
        of the point map id + eps*v (no symbolic prolongation)."""
        k = (ctx.order if isinstance(ctx, JetContext) else 0) if k is None else k
        pt = ctx.expand_point(point, k)
        if k == 0:
            out = {}
            for name in ctx.jet_coords(0):
                c = self.coeff(name)
                out[name] = Scalar.of(c.eval(pt)) if not c.is_zero() else ZERO
            return out
        xs, deps = series_of_jet(ctx, pt, k, ring_wrap=dual_const)
        env = dict(deps)
        env["x"] = xs
        eps = Dual(ZERO, ONE)

        def flowed(name):
            c = self.coeff(name)
            if c.is_zero():
                return env[name]
            val = c.eval(env)
            if not isinstance(val, TSeries):
                val = TSeries.const(val, k)
            return env[name] + val * eps

        tgt_x = flowed("x")
        tgt = {u: flowed(u) for u in ctx.deps}
        new = jet_of_series(tgt_x, tgt, k)
        out = {}
        for name in ctx.jet_coords(k):
            val = new[name]
            out[name] = val.im if isinstance(val, Dual) else ZERO
        return out

    def nilpotent_flow(self, t, bound=40):
        """Exact time-t flow of a coordinate-nilpotent field as a map.

        Returns dict var -> RatExpr.  Raises FlowError when the exp
        series fails to terminate within `bound` steps.
        """
        t = Scalar.of(t) if not isinstance(t, (RatExpr,)) else t
        fmap = {}
        for u in self.vars:
            term = RatExpr.var(u)
            total = term
            fac = 1
            for n in range(1, bound + 1):
                term = self.apply(term)
                if term.is_zero():
                    break
                fac *= n
                total = total + term * (t ** n) * _inv_fact(fac)
            else:
                raise FlowError(f"exp series for {u} did not terminate")
            fmap[u] = total
        return fmap

    def __repr__(self):
        inner = " + ".join(f"({c})*d_{u}" for u, c in sorted(self.coeffs.items()))
        return f"VField[{inner or '0'}]"


def _inv_fact(f):
    from fractions import Fraction
    return Scalar(Fraction(1, f))


def poly_lie(field, p):
    """Lie derivative of a Poly along a polynomial-coefficient field.

    Stays in the polynomial ring: no normalization, no gcd.
    """
    from .poly import Poly, REGISTRY
    out = Poly()
    names = {REGISTRY.name(v) for v in p.variables()}
    for u, c in field.coeffs.items():
        if u not in names:
            continue
        if not c.is_polynomial():
            raise ValueError("poly_lie needs polynomial coefficients")
        cp = c.num * c.den.constant_value().inverse()
        out = out + cp * p.diff(u)
    return out


def lie_is_zero(field, e):
    """Exact test L_v e == 0 for rational e, via the cross identity
    L(num)*den - num*L(den) == 0 (pure polynomial arithmetic)."""
    ln = poly_lie(field, e.num)
    ld = poly_lie(field, e.den)
    return (ln * e.den - e.num * ld).is_zero()


def lie_poly_weight(field, p):
    """alpha with L_v p = alpha * p for polynomial p; None if not divisible."""
    lv = poly_lie(field, p)
    if lv.is_zero():
        from .ratexpr import RatExpr
        return RatExpr.const(0)
    q = lv.try_div(p)
    if q is None:
        return None
    from .ratexpr import RatExpr
    return RatExpr(q)


def scaling_map(weights, factor):
    """Map u -> factor^w(u) * u for a rational factor."""
    f = Scalar.of(factor)
    return {u: RatExpr.var(u) * (f ** w) for u, w in weights.items()}


def jacobian_pushforward(fmap, field, inverse_map, out_vars):
    """phi_* field expressed in target coordinates.

    fmap: target coord -> expr in source vars; inverse_map: source coord
    -> expr in target vars.  Component i of the image is (dF_i . v)
    composed with the inverse map.
    """
    out = {}
    for tgt in out_vars:
        expr = RatExpr.of(fmap[tgt])
        comp = field.apply(expr)
        out[tgt] = comp.subst(inverse_map) if not comp.is_zero() else comp
    return VField(tuple(out_vars), out)


def decompose_in_basis(fields, target, extra_vars=None):
    """Write `target` as an exact linear combination of `fields`.

    Fields are compared as vectors over (coordinate, monomial) slots.
    Returns the coefficient list or None when target is outside the span.
    Coefficients must be constants (polynomial coefficient fields only).
    """
    from .linalg import ExactMatrix, InconsistentSystem
    keys = []
    keyset = {}

    def vec(f):
        cols = {}
        for u, c in f.coeffs.items():
            if not c.is_polynomial():
                raise ValueError("decompose_in_basis needs polynomial coefficients")
            den = c.den.constant_value()
            for m, co in c.num.terms.items():
                kk = (u, m)
                if kk not in keyset:
                    keyset[kk] = len(keys)
                    keys.append(kk)
                cols[keyset[kk]] = co / den
        return cols

    cols = [vec(f) for f in fields]
    tv = vec(target)
    rows = []
    rhs = []
    for i in range(len(keys)):
        rows.append([c.get(i, ZERO) for c in cols])
        rhs.append(tv.get(i, ZERO))
    try:
        sol = ExactMatrix(rows).solve(rhs)
    except InconsistentSystem:
        return None
    return sol
