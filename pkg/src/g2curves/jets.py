"""Jet coordinates for curves-as-graphs over a distinguished variable x.

A JetContext is a chart, a jet order, and an optional solved-form system
of first-order constraints together with all their prolongations (the
equation E_t).  Restriction to the equation is pure substitution; the
constrained total derivative is the restriction of the free one.
"""

from .scalars import Scalar, ZERO
from .poly import Poly, REGISTRY
from .ratexpr import RatExpr
from .series import TSeries, Dual, dual_const, factorials


class OrderOverflow(Exception):
    pass


class NotAGraph(Exception):
    pass


def jname(base, j):
    return base if j == 0 else f"{base}{j}"


def split_jet_name(name):
    """"q10" -> ("q", 10); "x" -> ("x", 0)."""
    i = len(name)
    while i > 0 and name[i - 1].isdigit():
        i -= 1
    if i == len(name) or i == 0:
        return name, 0
    return name[:i], int(name[i:])


class JetContext:
    """Chart with x distinguished, jet order, and solved constraints."""

    def __init__(self, base_vars, order, constraints=None):
        self.base = tuple(base_vars)
        assert self.base[0] == "x"
        self.deps = self.base[1:]
        self.order = order
        first = dict(constraints or {})
        for k in first:
            b, j = split_jet_name(k)
            assert j == 1 and b in self.deps, f"constraint {k} not solved first-order"
        self.constrained = tuple(sorted(split_jet_name(k)[0] for k in first))
        self.free_deps = tuple(u for u in self.deps if u not in self.constrained)
        self.solved = {}
        for k, v in first.items():
            self.solved[k] = RatExpr.of(v)
        self._prolong_constraints()

    def _prolong_constraints(self):
        for j in range(1, self.order):
            for u in self.constrained:
                cur = self.solved[jname(u, j)]
                self.solved[jname(u, j + 1)] = self._d_free_restricted(cur, j)

    def _d_free_restricted(self, e, max_order):
        out = e.diff("x")
        for name in sorted(e.var_names()):
            b, j = split_jet_name(name)
            if name == "x" or b not in self.deps:
                continue
            succ = jname(b, j + 1)
            val = self.solved.get(succ)
            term = e.diff(name) * (val if val is not None else RatExpr.var(succ))
            out = out + term
        return out

    # -- coordinates ---------------------------------------------------

    def jet_coords(self, k=None):
        """All chart coordinates of the k-jet space (free ones only)."""
        k = self.order if k is None else k
        out = ["x"] + list(self.deps)
        for j in range(1, k + 1):
            for u in self.free_deps:
                out.append(jname(u, j))
        return out

    def dim(self, k=None):
        return len(self.jet_coords(k))

    def is_free(self, name):
        return name not in self.solved

    def restrict(self, e):
        """Substitute every solved jet variable (iterated to fixpoint)."""
        e = RatExpr.of(e)
        # solved expressions only involve free variables, one pass suffices
        hit = {n: self.solved[n] for n in e.var_names() if n in self.solved}
        return e.subst(hit) if hit else e

    def total_derivative(self, e):
        """Constrained total derivative D_x."""
        e = self.restrict(RatExpr.of(e))
        top = 0
        for name in e.var_names():
            b, j = split_jet_name(name)
            if b in self.deps:
                top = max(top, j)
        if top >= self.order:
            raise OrderOverflow(
                f"D_x of an order-{top} expression exceeds context order {self.order}")
        out = e.diff("x")
        for name in sorted(e.var_names()):
            b, j = split_jet_name(name)
            if name == "x" or b not in self.deps:
                continue
            succ = jname(b, j + 1)
            val = self.solved.get(succ)
            term = e.diff(name) * (val if val is not None else RatExpr.var(succ))
            out = out + term
        return out

    # -- points ---------------------------------------------------------

    def expand_point(self, point, k=None):
        """Fill constrained jet values from the free data of a point."""
        k = self.order if k is None else k
        out = dict(point)
        for j in range(1, k + 1):
            for u in self.constrained:
                n = jname(u, j)
                if n not in out:
                    out[n] = self.solved[n].eval(out)
        return out

    def random_point(self, rng, k=None, lo=-9, hi=9, avoid=()):
        """Random integer point on the equation, rejecting `avoid` zeros.

        avoid: RatExprs that must evaluate to nonzero values.
        """
        k = self.order if k is None else k
        for _ in range(400):
            pt = {}
            for name in self.jet_coords(k):
                pt[name] = Scalar(rng.randint(lo, hi))
            pt = self.expand_point(pt, k)
            # inequations touching jets beyond order k do not apply yet
            live = [a for a in avoid if a.var_names() <= set(pt)]
            try:
                if all(Scalar.of(a.eval(pt)).is_unit() for a in live):
                    return pt
            except ZeroDivisionError:
                continue
        raise RuntimeError("could not sample a point off the degenerate locus")

    def symbolic_point(self, k=None):
        k = self.order if k is None else k
        pt = {name: RatExpr.var(name) for name in self.jet_coords(k)}
        for j in range(1, k + 1):
            for u in self.constrained:
                pt[jname(u, j)] = self.solved[jname(u, j)]
        return pt


def unconstrained(base_vars, order):
    return JetContext(base_vars, order)


# -- series transport -------------------------------------------------------


def series_of_jet(ctx, point, k, ring_wrap=None):
    """Taylor series (in the graph parameter t = x - x0) of a jet point.

    Returns (x_series, {dep: series}).  ring_wrap optionally lifts each
    Scalar into another ring (e.g. dual numbers).
    """
    fact = factorials(k)
    wrap = ring_wrap or (lambda v: v)
    pt = ctx.expand_point(point, k) if isinstance(ctx, JetContext) else dict(point)
    xs = TSeries.tvar(wrap(pt["x"]), k)
    deps = {}
    for u in (ctx.deps if isinstance(ctx, JetContext) else ctx):
        coeffs = []
        for j in range(k + 1):
            v = pt[jname(u, j)]
            coeffs.append(wrap(v) / fact[j])
        deps[u] = TSeries(coeffs, k)
    return xs, deps


def jet_of_series(x_series, dep_series, k):
    """Graph jets of a parametrized curve (x(t), u(t)); needs x'(0) unit."""
    fact = factorials(k)
    xp = x_series.c[1]
    if not xp.is_unit():
        raise NotAGraph("curve is not a graph over x at this point")
    tau = x_series - x_series.c[0]
    sigma = tau.reverse()
    out = {"x": x_series.c[0]}
    for u, s in dep_series.items():
        comp = s.compose(sigma)
        for j in range(k + 1):
            out[jname(u, j)] = comp.c[j] * fact[j]
    return out


def prolong_point_map(fmap, src_ctx, src_point, k, dst_deps=None, params=None):
    """Transport a k-jet through a point map.

    fmap: dict target coordinate -> RatExpr in the source chart vars;
    must contain "x" (the target graph variable).  params are extra
    symbols in fmap treated as constants along the curve.  Returns the
    target jet as a dict, raising NotAGraph if D_x of the target x
    vanishes.
    """
    xs, deps = series_of_jet(src_ctx, src_point, k)
    env = dict(deps)
    env["x"] = xs
    if params:
        for name, val in params.items():
            env[name] = TSeries.const(val, k)
    tgt = {}
    for name, expr in fmap.items():
        tgt[name] = RatExpr.of(expr).eval(env)
        if not isinstance(tgt[name], TSeries):
            tgt[name] = TSeries.const(tgt[name], k)
    names = dst_deps if dst_deps is not None else [n for n in fmap if n != "x"]
    return jet_of_series(tgt["x"], {n: tgt[n] for n in names}, k)


def identity_map(base_vars):
    return {n: RatExpr.var(n) for n in base_vars}


def compose_maps(f, g):
    """(f o g): apply g first, then f; both dicts of RatExprs."""
    return {name: expr.subst(g) for name, expr in
            ((n, RatExpr.of(e)) for n, e in f.items())}
