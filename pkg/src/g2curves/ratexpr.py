"""Normalized rational expressions num/den over Q(sqrt(3)).

Invariants: den is nonzero, num and den are coprime, and the leading
coefficient of den (in the global grlex order) is 1.  Equal values have
equal representations, so == is structural.
"""

from fractions import Fraction

from .scalars import Scalar, ZERO, ONE
from .poly import Poly, poly_gcd, REGISTRY, mono_key

# Polynomials that frequently occur as denominators (relative invariants,
# frame determinants).  normalize() tries exact division by these before
# falling back to a general gcd.
_CANCEL_HINTS = []


def register_cancel_hint(p):
    if not p.is_constant() and all(q.terms != p.terms for q in _CANCEL_HINTS):
        _CANCEL_HINTS.append(p)


class RatExpr:
    __slots__ = ("num", "den")

    def __init__(self, num, den=None, normalized=False):
        num = Poly.of(num)
        den = Poly.const(1) if den is None else Poly.of(den)
        if normalized:
            self.num = num
            self.den = den
            return
        if den.is_zero():
            raise ZeroDivisionError("zero denominator in RatExpr")
        if num.is_zero():
            self.num = Poly()
            self.den = Poly.const(1)
            return
        num, den = _cancel(num, den)
        lc = den.lead_coeff()
        if not lc.is_one():
            inv = lc.inverse()
            num = num * inv
            den = den * inv
        self.num = num
        self.den = den

    # -- constructors -------------------------------------------------

    @staticmethod
    def of(x):
        if isinstance(x, RatExpr):
            return x
        if isinstance(x, Poly):
            return RatExpr(x)
        if isinstance(x, str):
            return RatExpr(Poly.var(x))
        return RatExpr(Poly.const(x))

    @staticmethod
    def var(name):
        return RatExpr(Poly.var(name))

    @staticmethod
    def const(c):
        return RatExpr(Poly.const(c))

    # -- predicates ---------------------------------------------------

    def is_zero(self):
        return self.num.is_zero()

    def is_unit(self):
        return not self.num.is_zero()

    def is_constant(self):
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self):
        return self.num.constant_value() / self.den.constant_value()

    def is_polynomial(self):
        return self.den.is_constant()

    def variables(self):
        return self.num.variables() | self.den.variables()

    def var_names(self):
        return {REGISTRY.name(v) for v in self.variables()}

    # -- field ops ----------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, (RatExpr, Poly, str, int, Fraction, Scalar)):
            return NotImplemented
        other = RatExpr.of(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.den.terms == other.den.terms:
            return RatExpr(self.num + other.num, self.den)
        return RatExpr(self.num * other.den + other.num * self.den,
                       self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, (RatExpr, Poly, str, int, Fraction, Scalar)):
            return NotImplemented
        other = RatExpr.of(other)
        if other.is_zero():
            return self
        if self.den.terms == other.den.terms:
            return RatExpr(self.num - other.num, self.den)
        return RatExpr(self.num * other.den - other.num * self.den,
                       self.den * other.den)

    def __rsub__(self, other):
        return RatExpr.of(other) - self

    def __neg__(self):
        return RatExpr(-self.num, self.den, normalized=True)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            c = Scalar.of(other)
            if c.is_zero():
                return RatExpr.const(0)
            return RatExpr(self.num * c, self.den, normalized=True)
        if not isinstance(other, (RatExpr, Poly, str)):
            return NotImplemented
        other = RatExpr.of(other)
        if self.is_zero() or other.is_zero():
            return RatExpr.const(0)
        # cross-cancel first to keep products small
        n1, d2 = _cancel(self.num, other.den)
        n2, d1 = _cancel(other.num, self.den)
        return RatExpr(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero RatExpr")
        return RatExpr(self.den, self.num)

    def __truediv__(self, other):
        if not isinstance(other, (RatExpr, Poly, str, int, Fraction, Scalar)):
            return NotImplemented
        other = RatExpr.of(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return RatExpr.of(other) / self

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        return RatExpr(self.num ** n, self.den ** n)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Scalar, Poly)):
            other = RatExpr.of(other)
        if not isinstance(other, RatExpr):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    # -- calculus -------------------------------------------------------

    def diff(self, name):
        if name not in self.var_names():
            if REGISTRY.index.get(name) is None:
                raise KeyError(f"unknown variable {name}")
            return RatExpr.const(0)
        dn = self.num.diff(name)
        if self.den.is_constant():
            return RatExpr(dn, self.den, normalized=True) if dn.is_zero() else \
                RatExpr(dn, self.den)
        dd = self.den.diff(name)
        return RatExpr(dn * self.den - self.num * dd, self.den * self.den)

    def subst(self, bindings):
        """Substitute variables by RatExprs (exact composition)."""
        clean = {k: RatExpr.of(v) for k, v in bindings.items()}
        names = self.var_names()
        if not any(n in names for n in clean):
            return self
        point = {n: (clean[n] if n in clean else RatExpr.var(n)) for n in names}
        num = self.num.eval(point)
        den = self.den.eval(point)
        num = num if isinstance(num, RatExpr) else RatExpr.of(num)
        den = den if isinstance(den, RatExpr) else RatExpr.of(den)
        if den.is_zero():
            raise ZeroDivisionError("substitution produced a zero denominator")
        return num / den

    def eval(self, point, default=None):
        """Evaluate at a point (name -> ring element); exact."""
        num = self.num.eval(point, default)
        den = self.den.eval(point, default)
        if isinstance(den, Scalar) and den.is_zero():
            raise ZeroDivisionError("evaluation hit a pole")
        return num / den

    # -- text -----------------------------------------------------------

    def __str__(self):
        if self.den.is_constant() and self.den.constant_value().is_one():
            return f"({poly_str(self.num)})"
        return f"({poly_str(self.num)})/({poly_str(self.den)})"

    def __repr__(self):
        return f"RatExpr({self})"

    @staticmethod
    def parse(text):
        from .exprparse import parse_ratexpr
        return parse_ratexpr(text)


def _cancel(num, den):
    """Remove the gcd of num and den (both nonzero)."""
    if den.is_constant():
        c = den.constant_value()
        if c.is_one():
            return num, den
        inv = c.inverse()
        return num * inv, Poly.const(1)
    if num.is_constant():
        return num, den
    for h in _CANCEL_HINTS:
        while True:
            qn = num.try_div(h)
            if qn is None:
                break
            qd = den.try_div(h)
            if qd is None:
                break
            num, den = qn, qd
            if num.is_constant() or den.is_constant():
                return num, den
    g = poly_gcd(num, den)
    if not g.is_constant():
        num = num.try_div(g)
        den = den.try_div(g)
    return num, den


def normalize(e):
    """Re-normalize an expression (public entry point of the contract)."""
    e = RatExpr.of(e)
    return RatExpr(e.num, e.den)


def poly_str(p):
    """Deterministic fully-expanded polynomial text, grlex descending."""
    if p.is_zero():
        return "0"
    parts = []
    for m in sorted(p.terms, key=mono_key, reverse=True):
        c = p.terms[m]
        factors = []
        if m == () or not c.is_one():
            s = str(c)
            if ("+" in s[1:] or "-" in s[1:]) and m:
                s = f"({s})"
            factors.append(s)
        for v, e in m:
            nm = REGISTRY.name(v)
            factors.append(nm if e == 1 else f"{nm}^{e}")
        parts.append("*".join(factors))
    return " + ".join(parts)
