"""Exact arithmetic in the quadratic field Q(sqrt(3)).

Every coefficient in the package is a Scalar a + b*sqrt(3) with rational
a, b.  The representation is unique (Fractions are always reduced), so
equality of values is equality of representations.
"""

from fractions import Fraction


class Scalar:
    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = a if isinstance(a, Fraction) else Fraction(a)
        self.b = b if isinstance(b, Fraction) else Fraction(b)

    # -- constructors -------------------------------------------------

    @staticmethod
    def of(x):
        if isinstance(x, Scalar):
            return x
        if isinstance(x, (int, Fraction)):
            return Scalar(x)
        raise TypeError(f"cannot coerce {x!r} to Scalar")

    # -- predicates ---------------------------------------------------

    def is_zero(self):
        return not self.a and not self.b

    def is_unit(self):
        return bool(self.a) or bool(self.b)

    def is_rational(self):
        return not self.b

    def is_one(self):
        return self.a == 1 and not self.b

    # -- ring ops -----------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        other = Scalar.of(other)
        return Scalar(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        other = Scalar.of(other)
        return Scalar(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        return Scalar.of(other) - self

    def __neg__(self):
        return Scalar(-self.a, -self.b)

    def __mul__(self, other):
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        other = Scalar.of(other)
        if not self.b and not other.b:
            return Scalar(self.a * other.a)
        return Scalar(self.a * other.a + 3 * self.b * other.b,
                      self.a * other.b + self.b * other.a)

    __rmul__ = __mul__

    def inverse(self):
        # (a + b s3)^(-1) = (a - b s3) / (a^2 - 3 b^2)
        n = self.a * self.a - 3 * self.b * self.b
        if not n:
            raise ZeroDivisionError("division by zero Scalar")
        return Scalar(self.a / n, -self.b / n)

    def __truediv__(self, other):
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        other = Scalar.of(other)
        if not self.b and not other.b:
            if not other.a:
                raise ZeroDivisionError("division by zero Scalar")
            return Scalar(self.a / other.a)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return Scalar.of(other) / self

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        r = Scalar(1)
        base = self
        while n:
            if n & 1:
                r = r * base
            base = base * base
            n >>= 1
        return r

    def conjugate(self):
        return Scalar(self.a, -self.b)

    # -- order --------------------------------------------------------

    def sign(self):
        """Exact sign of the real number a + b*sqrt(3)."""
        if not self.b:
            return 0 if not self.a else (1 if self.a > 0 else -1)
        if not self.a:
            return 1 if self.b > 0 else -1
        if self.a > 0 and self.b > 0:
            return 1
        if self.a < 0 and self.b < 0:
            return -1
        # opposite signs: compare a^2 with 3 b^2
        d = self.a * self.a - 3 * self.b * self.b
        big_is_a = d > 0
        if d == 0:
            raise ArithmeticError("sqrt(3) is irrational")  # unreachable
        if self.a > 0:
            return 1 if big_is_a else -1
        return -1 if big_is_a else 1

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Scalar(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __lt__(self, other):
        return (self - Scalar.of(other)).sign() < 0

    def __le__(self, other):
        return (self - Scalar.of(other)).sign() <= 0

    def __gt__(self, other):
        return (self - Scalar.of(other)).sign() > 0

    def __ge__(self, other):
        return (self - Scalar.of(other)).sign() >= 0

    # -- text ---------------------------------------------------------

    def __str__(self):
        """Serialize as "a/b+c/d*s3", omitting zero parts."""
        if self.is_zero():
            return "0"
        parts = []
        if self.a:
            parts.append(_frac_str(self.a))
        if self.b:
            s3 = f"{_frac_str(self.b)}*s3"
            if parts and self.b > 0:
                parts.append("+" + s3)
            else:
                parts.append(s3)
        return "".join(parts)

    def __repr__(self):
        return f"Scalar({self})"

    @staticmethod
    def parse(text):
        """Inverse of str(); bit-exact round trip."""
        t = text.strip().replace(" ", "")
        if not t:
            raise ValueError("empty scalar")
        if t == "0":
            return Scalar(0)
        # split into rational part and s3 part
        a = Fraction(0)
        b = Fraction(0)
        for piece in _split_signed(t):
            if piece.endswith("*s3"):
                b += Fraction(piece[:-3].rstrip("*") or "1")
            elif piece.endswith("s3"):
                core = piece[:-2]
                if core in ("", "+"):
                    b += 1
                elif core == "-":
                    b -= 1
                else:
                    b += Fraction(core.rstrip("*"))
            else:
                a += Fraction(piece)
        return Scalar(a, b)


def _frac_str(f):
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _split_signed(t):
    """Split "1/2-3*s3" into signed pieces ["1/2", "-3*s3"]."""
    pieces = []
    cur = ""
    for i, ch in enumerate(t):
        if ch in "+-" and i > 0 and t[i - 1] not in "+-/*":
            pieces.append(cur)
            cur = ch if ch == "-" else ""
        else:
            cur += ch
    pieces.append(cur)
    return [p for p in pieces if p]


ZERO = Scalar(0)
ONE = Scalar(1)
SQRT3 = Scalar(0, 1)


def rational(p, q=1):
    return Scalar(Fraction(p, q))
