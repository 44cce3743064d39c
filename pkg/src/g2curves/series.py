"""Truncated power series, dual numbers and quadratic extensions.

These small rings parametrize all jet transport in the package:
  * TSeries drives prolongation of point maps (curves as Taylor data),
  * Dual numbers (e^2 = 0) turn the same transport into evaluation of
    prolonged vector fields at a jet,
  * QuadExt carries the two secant branches lambda+- exactly, so that
    symmetric functions of branch values stay in Q(sqrt3).

All coefficient arithmetic is duck-typed: Scalar, RatExpr, Dual and
QuadExt can serve as the base ring of a TSeries.
"""

from fractions import Fraction

from .scalars import Scalar, ZERO, ONE


def _coerce(x, like):
    """Promote ints/Fractions/Scalars into the ring of `like`."""
    if isinstance(x, (int, Fraction)):
        x = Scalar.of(x)
    if isinstance(like, Dual) and not isinstance(x, Dual):
        return Dual(x, _zero_like(like.re))
    if isinstance(like, QuadExt) and not isinstance(x, QuadExt):
        return QuadExt(x, _zero_like(like.u), like.d)
    return x


def _zero_like(x):
    return x * 0 if not isinstance(x, Scalar) else ZERO


class Dual:
    """re + eps*im with eps^2 = 0; exact first-order perturbations."""

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = re
        self.im = im

    def is_zero(self):
        return self.re.is_zero() and self.im.is_zero()

    def is_unit(self):
        return self.re.is_unit()

    def __add__(self, other):
        other = _coerce(other, self)
        if isinstance(other, Dual):
            return Dual(self.re + other.re, self.im + other.im)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other, self)
        return Dual(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return _coerce(other, self) - self

    def __neg__(self):
        return Dual(-self.re, -self.im)

    def __mul__(self, other):
        other = _coerce(other, self)
        if isinstance(other, Dual):
            return Dual(self.re * other.re,
                        self.re * other.im + self.im * other.re)
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self):
        inv = self.re.inverse()
        return Dual(inv, -(inv * inv) * self.im)

    def __truediv__(self, other):
        other = _coerce(other, self)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return _coerce(other, self) * self.inverse()

    def __pow__(self, n):
        r = Dual(_one_like(self.re), _zero_like(self.re))
        b = self
        if n < 0:
            b = self.inverse()
            n = -n
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    def __eq__(self, other):
        if not isinstance(other, Dual):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __repr__(self):
        return f"Dual({self.re}, {self.im})"


def _one_like(x):
    if isinstance(x, Scalar):
        return ONE
    return x * 0 + 1


class QuadExt:
    """u + v*sqrt(d) over a base ring; d fixed per computation."""

    __slots__ = ("u", "v", "d")

    def __init__(self, u, v, d):
        self.u = u
        self.v = v
        self.d = d

    def is_zero(self):
        return self.u.is_zero() and self.v.is_zero()

    def is_unit(self):
        return self.norm().is_unit()

    def conjugate(self):
        return QuadExt(self.u, -self.v, self.d)

    def norm(self):
        return self.u * self.u - self.d * self.v * self.v

    def trace(self):
        return self.u + self.u

    def __add__(self, other):
        other = _coerce(other, self)
        return QuadExt(self.u + other.u, self.v + other.v, self.d)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other, self)
        return QuadExt(self.u - other.u, self.v - other.v, self.d)

    def __rsub__(self, other):
        return _coerce(other, self) - self

    def __neg__(self):
        return QuadExt(-self.u, -self.v, self.d)

    def __mul__(self, other):
        other = _coerce(other, self)
        return QuadExt(self.u * other.u + self.d * self.v * other.v,
                       self.u * other.v + self.v * other.u, self.d)

    __rmul__ = __mul__

    def inverse(self):
        n = self.norm().inverse()
        return QuadExt(self.u * n, -self.v * n, self.d)

    def __truediv__(self, other):
        other = _coerce(other, self)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return _coerce(other, self) * self.inverse()

    def __pow__(self, n):
        r = QuadExt(_one_like(self.u), _zero_like(self.u), self.d)
        b = self
        if n < 0:
            b = self.inverse()
            n = -n
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    def __eq__(self, other):
        if not isinstance(other, QuadExt):
            return NotImplemented
        return self.u == other.u and self.v == other.v and self.d == other.d

    def __repr__(self):
        return f"QuadExt({self.u}, {self.v}; d={self.d})"


class TSeries:
    """Power series truncated after degree n (coeff list length n+1)."""

    __slots__ = ("c", "n")

    def __init__(self, coeffs, n):
        self.n = n
        c = list(coeffs[:n + 1])
        while len(c) < n + 1:
            c.append(None)
        self.c = c
        zero = None
        for x in self.c:
            if x is not None:
                zero = _zero_like(x)
                break
        if zero is None:
            zero = ZERO
        self.c = [zero if x is None else x for x in self.c]

    @staticmethod
    def const(value, n):
        return TSeries([value], n)

    @staticmethod
    def tvar(x0, n):
        """The series x0 + t."""
        one = _one_like(x0)
        return TSeries([x0, one], n)

    def is_zero(self):
        return all(x.is_zero() for x in self.c)

    def is_unit(self):
        return self.c[0].is_unit()

    def _z(self):
        return _zero_like(self.c[0])

    def __add__(self, other):
        other = self._promote(other)
        return TSeries([a + b for a, b in zip(self.c, other.c)], self.n)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._promote(other)
        return TSeries([a - b for a, b in zip(self.c, other.c)], self.n)

    def __rsub__(self, other):
        return self._promote(other) - self

    def __neg__(self):
        return TSeries([-a for a in self.c], self.n)

    def _promote(self, other):
        if isinstance(other, TSeries):
            assert other.n == self.n
            return other
        return TSeries.const(_coerce(other, self.c[0]), self.n)

    def __mul__(self, other):
        if not isinstance(other, TSeries):
            v = _coerce(other, self.c[0])
            return TSeries([a * v for a in self.c], self.n)
        assert other.n == self.n
        n = self.n
        z = self._z()
        out = [z] * (n + 1)
        for i, a in enumerate(self.c):
            if a.is_zero():
                continue
            for j in range(0, n - i + 1):
                b = other.c[j]
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return TSeries(out, n)

    __rmul__ = __mul__

    def inverse(self):
        a0 = self.c[0]
        if not a0.is_unit():
            raise ZeroDivisionError("series with non-unit constant term")
        inv0 = a0.inverse()
        n = self.n
        out = [inv0]
        for k in range(1, n + 1):
            acc = None
            for j in range(1, k + 1):
                t = self.c[j] * out[k - j]
                acc = t if acc is None else acc + t
            out.append(-(inv0 * acc))
        return TSeries(out, n)

    def __truediv__(self, other):
        if isinstance(other, TSeries):
            return self * other.inverse()
        v = _coerce(other, self.c[0])
        return self * v.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        r = TSeries.const(_one_like(self.c[0]), self.n)
        b = self
        while k:
            if k & 1:
                r = r * b
            b = b * b
            k >>= 1
        return r

    def compose(self, inner):
        """self(inner(t)); inner must have zero constant term."""
        assert inner.c[0].is_zero()
        n = self.n
        acc = TSeries.const(self.c[n], n)
        for k in range(n - 1, -1, -1):
            acc = acc * inner + self.c[k]
        return acc

    def reverse(self):
        """Compositional inverse g with self(g(s)) = s; needs c0 = 0, c1 unit."""
        if not self.c[0].is_zero():
            raise ValueError("reversion needs zero constant term")
        a1 = self.c[1]
        if not a1.is_unit():
            raise ZeroDivisionError("reversion needs unit linear term")
        n = self.n
        inv1 = a1.inverse()
        z = self._z()
        g = [z, inv1] + [z] * (n - 1)
        for k in range(2, n + 1):
            h = self.compose(TSeries(g, n))
            g[k] = -(h.c[k] * inv1)
        return TSeries(g, n)

    def deriv(self):
        z = self._z()
        out = [self.c[j] * j for j in range(1, self.n + 1)] + [z]
        return TSeries(out, self.n)

    def integrate(self, const):
        out = [const] + [self.c[j] / (j + 1) for j in range(self.n)]
        return TSeries(out, self.n)

    def __repr__(self):
        return f"TSeries({self.c})"


EPS = Dual(ZERO, ONE)


def dual_const(x):
    return Dual(x, ZERO)


def factorials(n):
    out = [1]
    for k in range(1, n + 1):
        out.append(out[-1] * k)
    return out
