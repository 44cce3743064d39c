"""Multivariate polynomials over Q(sqrt(3)).

Terms live in a dict keyed by sparse monomials (tuples of (var_index,
exponent) pairs, ascending index, positive exponents).  The term order is
graded lexicographic over a fixed global variable registry, which makes
printing, hashing and leading terms reproducible across runs.
"""

import threading
from fractions import Fraction

from .scalars import Scalar, ZERO, ONE


class _Registry:
    """Global append-only variable registry fixing the term order."""

    def __init__(self):
        self._lock = threading.Lock()
        self.names = []
        self.index = {}
        # standard chart and jet variables, registered up front so the
        # term order does not depend on import order
        base = ["x", "y", "p", "q", "z", "r"]
        self.register_all(base)
        for k in range(1, 17):
            self.register_all(f"{u}{k}" for u in ["y", "p", "q", "z", "r"])
        self.register_all(["t", "s1", "s2", "s3", "s4", "s5",
                           "a", "b", "c", "d", "lam", "mu",
                           "v1", "v2", "v3", "v4", "v5", "v6",
                           "w1", "w2", "w3", "w4", "w5", "w6", "eps"])

    def register(self, name):
        with self._lock:
            if name not in self.index:
                self.index[name] = len(self.names)
                self.names.append(name)
            return self.index[name]

    def register_all(self, names):
        for n in names:
            self.register(n)

    def idx(self, name):
        i = self.index.get(name)
        return self.register(name) if i is None else i

    def name(self, i):
        return self.names[i]


REGISTRY = _Registry()


_KEY_CACHE = {}


def mono_key(m):
    """grlex sort key: total degree first, then lex (earlier var bigger)."""
    k = _KEY_CACHE.get(m)
    if k is None:
        k = (sum(e for _, e in m), tuple((-i, e) for i, e in m))
        _KEY_CACHE[m] = k
    return k


def mono_mul(m1, m2):
    if not m1:
        return m2
    if not m2:
        return m1
    out = []
    i = j = 0
    while i < len(m1) and j < len(m2):
        v1, e1 = m1[i]
        v2, e2 = m2[j]
        if v1 == v2:
            out.append((v1, e1 + e2))
            i += 1
            j += 1
        elif v1 < v2:
            out.append(m1[i])
            i += 1
        else:
            out.append(m2[j])
            j += 1
    out.extend(m1[i:])
    out.extend(m2[j:])
    return tuple(out)


def mono_divides(m1, m2):
    """True when m1 | m2."""
    d = dict(m2)
    return all(d.get(v, 0) >= e for v, e in m1)


def mono_div(m2, m1):
    """m2 / m1, assuming divisibility."""
    d = dict(m2)
    for v, e in m1:
        d[v] -= e
    return tuple(sorted((v, e) for v, e in d.items() if e))


def mono_deg(m):
    return sum(e for _, e in m)


class Poly:
    __slots__ = ("terms", "_lead")

    def __init__(self, terms=None, copy=True):
        if terms is None:
            self.terms = {}
        elif copy:
            self.terms = {m: c for m, c in terms.items() if not c.is_zero()}
        else:
            self.terms = terms
        self._lead = None

    # -- constructors -------------------------------------------------

    @staticmethod
    def const(c):
        c = Scalar.of(c)
        if c.is_zero():
            return Poly()
        return Poly({(): c}, copy=False)

    @staticmethod
    def var(name, exp=1):
        i = REGISTRY.idx(name)
        return Poly({((i, exp),): ONE}, copy=False)

    @staticmethod
    def of(x):
        if isinstance(x, Poly):
            return x
        if isinstance(x, str):
            return Poly.var(x)
        return Poly.const(x)

    # -- predicates ---------------------------------------------------

    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def constant_value(self):
        if not self.terms:
            return ZERO
        if len(self.terms) == 1 and () in self.terms:
            return self.terms[()]
        raise ValueError("not a constant polynomial")

    def is_unit(self):
        return not self.is_zero()

    def variables(self):
        out = set()
        for m in self.terms:
            for v, _ in m:
                out.add(v)
        return out

    def total_degree(self):
        return max((mono_deg(m) for m in self.terms), default=0)

    def degree_in(self, name):
        i = REGISTRY.idx(name)
        best = 0
        for m in self.terms:
            for v, e in m:
                if v == i and e > best:
                    best = e
        return best

    def max_jet_order(self, jet_of):
        """Largest jet order among variables present; jet_of maps name->order."""
        return max((jet_of(REGISTRY.name(v)) for m in self.terms for v, _ in m),
                   default=0)

    # -- ring ops -----------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, (Poly, str, int, Fraction, Scalar)):
            return NotImplemented
        other = Poly.of(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        res = dict(self.terms)
        for m, c in other.terms.items():
            s = res.get(m)
            if s is None:
                res[m] = c
            else:
                s = s + c
                if s.is_zero():
                    del res[m]
                else:
                    res[m] = s
        return Poly(res, copy=False)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, (Poly, str, int, Fraction, Scalar)):
            return NotImplemented
        other = Poly.of(other)
        res = dict(self.terms)
        for m, c in other.terms.items():
            s = res.get(m)
            if s is None:
                res[m] = -c
            else:
                s = s - c
                if s.is_zero():
                    del res[m]
                else:
                    res[m] = s
        return Poly(res, copy=False)

    def __rsub__(self, other):
        return Poly.of(other) - self

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()}, copy=False)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            c = Scalar.of(other)
            if c.is_zero():
                return Poly()
            return Poly({m: cc * c for m, cc in self.terms.items()}, copy=False)
        if not isinstance(other, (Poly, str)):
            return NotImplemented
        other = Poly.of(other)
        if not self.terms or not other.terms:
            return Poly()
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        res = {}
        for m2, c2 in b.items():
            for m1, c1 in a.items():
                m = mono_mul(m1, m2)
                c = c1 * c2
                s = res.get(m)
                if s is None:
                    res[m] = c
                else:
                    s = s + c
                    if s.is_zero():
                        del res[m]
                    else:
                        res[m] = s
        return Poly(res, copy=False)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power of Poly")
        r = Poly.const(1)
        base = self
        while n:
            if n & 1:
                r = r * base
            base = base * base if n > 1 else base
            n >>= 1
        return r

    def __eq__(self, other):
        if not isinstance(other, Poly):
            if isinstance(other, (int, Fraction, Scalar)):
                other = Poly.const(other)
            else:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items(), key=lambda t: mono_key(t[0]))))

    # -- leading data ---------------------------------------------------

    def lead_mono(self):
        if self._lead is None and self.terms:
            self._lead = max(self.terms, key=mono_key)
        return self._lead

    def lead_coeff(self):
        m = self.lead_mono()
        return self.terms[m] if m is not None else ZERO

    # -- calculus -------------------------------------------------------

    def diff(self, name):
        i = REGISTRY.idx(name)
        res = {}
        for m, c in self.terms.items():
            for k, (v, e) in enumerate(m):
                if v == i:
                    nm = list(m)
                    if e == 1:
                        del nm[k]
                    else:
                        nm[k] = (v, e - 1)
                    nm = tuple(nm)
                    nc = c * e
                    s = res.get(nm)
                    if s is None:
                        res[nm] = nc
                    else:
                        s = s + nc
                        if s.is_zero():
                            del res[nm]
                        else:
                            res[nm] = s
                    break
        return Poly(res, copy=False)

    def eval(self, point, default=None):
        """Evaluate at point (name -> ring element).

        Works over any ring with +,*,** (Scalar, Dual, QuadExt, TSeries,
        Poly, RatExpr).  Missing variables fall back to `default(name)` or
        raise.  Power caching keeps repeated exponents cheap.
        """
        cache = {}

        def powered(v, e):
            key = (v, e)
            got = cache.get(key)
            if got is None:
                name = REGISTRY.name(v)
                if name in point:
                    base = point[name]
                elif default is not None:
                    base = default(name)
                else:
                    raise KeyError(f"no value for variable {name}")
                got = base ** e if e != 1 else base
                cache[key] = got
            return got

        total = None
        for m, c in self.terms.items():
            term = c
            for v, e in m:
                term = powered(v, e) * term
            total = term if total is None else total + term
        if total is None:
            return ZERO
        return total

    def subst_poly(self, bindings):
        """Substitute variables by Polys; unbound variables stay."""
        point = {}
        names = {REGISTRY.name(v) for v in self.variables()}
        for n in names:
            point[n] = bindings.get(n, Poly.var(n))
        out = self.eval(point)
        return out if isinstance(out, Poly) else Poly.const(out)

    # -- division -------------------------------------------------------

    def divmod(self, d):
        """Leading-term division: self = q*d + r with no term of r
        divisible by lead(d)."""
        if d.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q = {}
        r = Poly(dict(self.terms), copy=False)
        dm = d.lead_mono()
        dc = d.lead_coeff()
        rem = {}
        while r.terms:
            m = r.lead_mono()
            if mono_divides(dm, m):
                qm = mono_div(m, dm)
                qc = r.terms[m] / dc
                q[qm] = qc
                r = r - d * Poly({qm: qc}, copy=False)
                r._lead = None
            else:
                rem[m] = r.terms.pop(m)
                r._lead = None
        return Poly(q, copy=False), Poly(rem, copy=False)

    def try_div(self, d):
        """Exact quotient self/d, or None when not divisible."""
        if self.is_zero():
            return Poly()
        if d.is_zero():
            return None
        if d.is_constant():
            return self * d.constant_value().inverse()
        if d.total_degree() > self.total_degree():
            return None
        if len(d.terms) > len(self.terms):
            return None
        q = {}
        r = self
        dm = d.lead_mono()
        dc = d.lead_coeff()
        while r.terms:
            m = r.lead_mono()
            if not mono_divides(dm, m):
                return None
            qm = mono_div(m, dm)
            qc = r.terms[m] / dc
            q[qm] = qc
            r = r - d * Poly({qm: qc}, copy=False)
        return Poly(q, copy=False)

    # -- content and gcd -------------------------------------------------

    def rational_content(self):
        """Positive rational c with self/c having coprime integer parts."""
        num_gcd = 0
        den_lcm = 1
        for c in self.terms.values():
            for f in (c.a, c.b):
                if f:
                    num_gcd = _igcd(num_gcd, abs(f.numerator))
                    den_lcm = den_lcm * f.denominator // _igcd(den_lcm, f.denominator)
        if num_gcd == 0:
            return Fraction(1)
        return Fraction(num_gcd, den_lcm)

    def monomial_content(self):
        """Largest monomial dividing all terms."""
        it = iter(self.terms)
        try:
            first = next(it)
        except StopIteration:
            return ()
        common = dict(first)
        for m in it:
            if not common:
                break
            d = dict(m)
            for v in list(common):
                e = d.get(v, 0)
                if e == 0:
                    del common[v]
                elif e < common[v]:
                    common[v] = e
        return tuple(sorted(common.items()))

    def coeffs_in(self, name):
        """List of coefficient Polys in the given variable, index = power."""
        i = REGISTRY.idx(name)
        deg = self.degree_in(name)
        out = [dict() for _ in range(deg + 1)]
        for m, c in self.terms.items():
            e = 0
            rest = []
            for v, ee in m:
                if v == i:
                    e = ee
                else:
                    rest.append((v, ee))
            out[e][tuple(rest)] = c
        return [Poly(d, copy=False) for d in out]

    @staticmethod
    def from_coeffs(name, coeffs):
        i = REGISTRY.idx(name)
        res = {}
        for e, p in enumerate(coeffs):
            for m, c in p.terms.items():
                res[mono_mul(m, ((i, e),) if e else ())] = c
        return Poly(res, copy=False)

    def __str__(self):
        from .ratexpr import poly_str
        return poly_str(self)

    def __repr__(self):
        return f"Poly({self})"

    # pickling goes through variable names: registry indices are
    # session-local and must not leak into persisted data
    def __reduce__(self):
        named = tuple((tuple((REGISTRY.name(v), e) for v, e in m), c)
                      for m, c in self.terms.items())
        return (_poly_from_named, (named,))


def _poly_from_named(named):
    terms = {}
    for mono_named, c in named:
        mono = tuple(sorted((REGISTRY.idx(n), e) for n, e in mono_named))
        terms[mono] = c
    return Poly(terms, copy=False)


def _igcd(a, b):
    while b:
        a, b = b, a % b
    return a


# -- multivariate gcd -----------------------------------------------------

_RNG_POINTS = [3, -2, 5, -7, 11, -13, 17, -19, 23, -29]


def _univ_gcd(u, v):
    """gcd of two univariate coefficient lists over Q(sqrt3), monic."""
    def norm(w):
        while w and w[-1].is_zero():
            w.pop()
        return w
    u, v = norm(list(u)), norm(list(v))
    while v:
        # u mod v
        inv = v[-1].inverse()
        while len(u) >= len(v):
            c = u[-1] * inv
            off = len(u) - len(v)
            for k in range(len(v)):
                u[off + k] = u[off + k] - c * v[k]
            u = norm(u)
            if not u:
                break
        u, v = v, u
    if u:
        inv = u[-1].inverse()
        u = [c * inv for c in u]
    return u


def _univ_coeff_lists(p, main, point):
    """Coefficient list of p in `main` after evaluating other vars at point."""
    coeffs = p.coeffs_in(main)
    out = []
    for c in coeffs:
        val = c.eval(point) if not c.is_constant() else c.constant_value()
        out.append(Scalar.of(val) if not isinstance(val, Scalar) else val)
    return out


def _probably_coprime(p, q):
    """Certify deg(gcd)=0 by per-variable univariate projections.

    For each shared variable v: evaluate the other variables at random
    integers; if the leading coefficients survive and the univariate gcd
    is constant, deg_v(gcd)=0.  If that holds for every shared variable
    the gcd is a scalar.
    """
    shared = p.variables() & q.variables()
    for v in shared:
        name = REGISTRY.name(v)
        others = {REGISTRY.name(w) for w in (p.variables() | q.variables())} - {name}
        ok = False
        for trial in range(4):
            point = {n: Scalar(_RNG_POINTS[(hash(n) + trial * 3) % len(_RNG_POINTS)])
                     for n in others}
            cu = _univ_coeff_lists(p, name, point)
            cv = _univ_coeff_lists(q, name, point)
            if len(cu) == p.degree_in(name) + 1 and cu[-1].is_unit() and \
               len(cv) == q.degree_in(name) + 1 and cv[-1].is_unit():
                g = _univ_gcd(cu, cv)
                if len(g) == 1:
                    ok = True
                break
        if not ok:
            return False
    return True


def poly_gcd(p, q):
    """Exact gcd over Q(sqrt3), normalized with leading coefficient 1."""
    if p.is_zero():
        return _monic(q)
    if q.is_zero():
        return _monic(p)
    if not (p.variables() & q.variables()):
        return Poly.const(1)
    mp, mq = p.monomial_content(), q.monomial_content()
    mg = _mono_gcd(mp, mq)
    if mp:
        p = Poly({mono_div(m, mp): c for m, c in p.terms.items()}, copy=False)
    if mq:
        q = Poly({mono_div(m, mq): c for m, c in q.terms.items()}, copy=False)
    gm = Poly({mg: ONE}, copy=False) if mg else Poly.const(1)
    if p.is_constant() or q.is_constant():
        return _monic(gm)
    # cheap exact-divisibility shortcuts
    if p.terms == q.terms:
        return _monic(gm * p)
    t = q.try_div(p)
    if t is not None:
        return _monic(gm * p)
    t = p.try_div(q)
    if t is not None:
        return _monic(gm * q)
    if _probably_coprime(p, q):
        return _monic(gm)
    g = _gcd_prs(p, q)
    return _monic(gm * g)


def _mono_gcd(m1, m2):
    d2 = dict(m2)
    out = []
    for v, e in m1:
        e2 = d2.get(v, 0)
        if e2:
            out.append((v, min(e, e2)))
    return tuple(out)


def _monic(p):
    if p.is_zero():
        return p
    lc = p.lead_coeff()
    if lc.is_one():
        return p
    return p * lc.inverse()


def _gcd_prs(p, q):
    """Primitive PRS gcd, recursing on the variable set."""
    vs = sorted(p.variables() & q.variables())
    if not vs:
        return Poly.const(1)
    main = REGISTRY.name(vs[0])
    # choose main variable with minimal combined degree
    best, bestd = main, p.degree_in(main) + q.degree_in(main)
    for v in vs[1:]:
        n = REGISTRY.name(v)
        d = p.degree_in(n) + q.degree_in(n)
        if d < bestd:
            best, bestd = n, d
    main = best
    a, ca = _primitive(p, main)
    b, cb = _primitive(q, main)
    cg = poly_gcd(ca, cb)
    if len(a) < len(b):
        a, b = b, a
    while True:
        r = _pseudo_rem(a, b, main)
        if not r:
            g, _ = _primitive(Poly.from_coeffs(main, b), main)
            return cg * Poly.from_coeffs(main, g)
        if len(r) == 1:
            return cg
        rp, _ = _primitive(Poly.from_coeffs(main, r), main)
        a, b = b, rp


def _primitive(p, main):
    """Split p = content(poly in other vars) * primitive(coeff list in main)."""
    coeffs = p.coeffs_in(main)
    nz = [c for c in coeffs if not c.is_zero()]
    g = nz[0]
    for c in nz[1:]:
        if g.is_constant():
            break
        g = poly_gcd(g, c)
    if g.is_constant():
        g = Poly.const(1)
    out = []
    for c in coeffs:
        if c.is_zero():
            out.append(Poly())
        else:
            out.append(c.try_div(g))
    # scalar normalization
    lead = next(c for c in reversed(out) if not c.is_zero())
    lc = lead.lead_coeff()
    out = [c * lc.inverse() for c in out]
    return out, g


def _pseudo_rem(a, b, main):
    """Pseudo remainder of coefficient lists a, b (len(a) >= len(b))."""
    a = list(a)
    db = len(b) - 1
    lb = b[-1]
    while len(a) - 1 >= db and any(not c.is_zero() for c in a):
        while a and a[-1].is_zero():
            a.pop()
        if len(a) - 1 < db:
            break
        la = a[-1]
        off = len(a) - len(b)
        a = [c * lb for c in a]
        for k in range(len(b)):
            a[off + k] = a[off + k] - la * b[k]
        a.pop()
        while a and a[-1].is_zero():
            a.pop()
    return a
