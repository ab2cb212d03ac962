"""Exact univariate polynomial arithmetic over Z and Q.

Coefficients are stored lowest degree first, so ``p.coeffs[k]`` is the
coefficient of x**k.  IntPoly carries integer coefficients and is the type
attached to matrices and number fields; RatPoly appears wherever intermediate
arithmetic forces denominators (Sturm chains, monic gcds, minimal
polynomials).

Real roots are handled by the classical exact pipeline: a Sturm chain counts
roots in an interval, bisection separates them, and Newton steps with exact
dyadic arithmetic accelerate the final refinement while the sign-change
bracket keeps every enclosure certified.
"""

from __future__ import annotations

import re
from typing import Iterable, List, Sequence, Tuple

from ._backend import QQ, ZZ, qq_from_string, qq_to_string
from .errors import InputError


def _strip(coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


class IntPoly:
    """Dense polynomial with integer coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[int]):
        object.__setattr__(self, "coeffs", _strip(ZZ(c) for c in coeffs))

    def __setattr__(self, name, value):
        raise AttributeError("IntPoly is immutable")

    # ------------------------------------------------------------------
    # structure
    @property
    def degree(self) -> int:
        # degree of the zero polynomial is -1 by convention
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def leading(self):
        if not self.coeffs:
            return ZZ(0)
        return self.coeffs[-1]

    def constant(self):
        if not self.coeffs:
            return ZZ(0)
        return self.coeffs[0]

    def coeff(self, k: int):
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return ZZ(0)

    # ------------------------------------------------------------------
    # ring operations
    def __add__(self, other):
        other = _as_int_poly(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return IntPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return IntPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        other = _as_int_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _as_int_poly(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, int) or type(other) is type(ZZ(0)):
            return IntPoly(c * other for c in self.coeffs)
        other = _as_int_poly(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return IntPoly(())
        out = [ZZ(0)] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            for j, cb in enumerate(b):
                out[i + j] += ca * cb
        return IntPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise InputError("negative polynomial power")
        result = IntPoly((1,))
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __call__(self, x):
        """Horner evaluation; works for any ring element with + and *."""
        if not self.coeffs:
            return x * 0
        acc = x * 0 + self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    def derivative(self) -> "IntPoly":
        return IntPoly(k * c for k, c in enumerate(self.coeffs) if k > 0)

    def shift_degree(self, k: int) -> "IntPoly":
        """Multiply by x**k."""
        if self.is_zero():
            return self
        return IntPoly((ZZ(0),) * k + self.coeffs)

    def reverse(self) -> "IntPoly":
        """x**deg * p(1/x).  Roots map to their inverses."""
        return IntPoly(reversed(self.coeffs))

    def content(self):
        g = ZZ(0)
        for c in self.coeffs:
            g = _gcd(g, c)
        return g

    def primitive(self) -> "IntPoly":
        """Divide out the content, keeping the sign of the leading term."""
        g = self.content()
        if g == 0:
            return self
        if self.leading() < 0:
            g = -g
        return IntPoly(c // g for c in self.coeffs)

    def to_rat(self) -> "RatPoly":
        return RatPoly(QQ(c) for c in self.coeffs)

    # ------------------------------------------------------------------
    def __eq__(self, other):
        other = _as_int_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(("IntPoly",) + tuple(int(c) for c in self.coeffs))

    def __repr__(self):
        return "IntPoly(%s)" % poly_to_string(self)


def _as_int_poly(x):
    if isinstance(x, IntPoly):
        return x
    if isinstance(x, int) or type(x) is type(ZZ(0)):
        return IntPoly((x,))
    return NotImplemented


def _gcd(a, b):
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a % b
    return a


class RatPoly:
    """Dense polynomial with rational coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        object.__setattr__(self, "coeffs", _strip(QQ(c) for c in coeffs))

    def __setattr__(self, name, value):
        raise AttributeError("RatPoly is immutable")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def leading(self):
        if not self.coeffs:
            return QQ(0)
        return self.coeffs[-1]

    def constant(self):
        if not self.coeffs:
            return QQ(0)
        return self.coeffs[0]

    def coeff(self, k: int):
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return QQ(0)

    def __add__(self, other):
        other = _as_rat_poly(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return RatPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return RatPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        other = _as_rat_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _as_rat_poly(other) + (-self)

    def __mul__(self, other):
        if _is_rational_scalar(other):
            return RatPoly(c * QQ(other) for c in self.coeffs)
        other = _as_rat_poly(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return RatPoly(())
        out = [QQ(0)] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            for j, cb in enumerate(b):
                out[i + j] += ca * cb
        return RatPoly(out)

    __rmul__ = __mul__

    def __call__(self, x):
        if not self.coeffs:
            return x * 0
        acc = x * 0 + self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    def derivative(self) -> "RatPoly":
        return RatPoly(k * c for k, c in enumerate(self.coeffs) if k > 0)

    def monic(self) -> "RatPoly":
        if self.is_zero():
            return self
        lead = self.leading()
        return RatPoly(c / lead for c in self.coeffs)

    def divmod(self, other: "RatPoly") -> Tuple["RatPoly", "RatPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        quo = [QQ(0)] * max(0, len(rem) - len(other.coeffs) + 1)
        dlead = other.leading()
        dd = other.degree
        while len(rem) - 1 >= dd and any(c != 0 for c in rem):
            while rem and rem[-1] == 0:
                rem.pop()
            if len(rem) - 1 < dd:
                break
            k = len(rem) - 1 - dd
            factor = rem[-1] / dlead
            quo[k] = factor
            for i, c in enumerate(other.coeffs):
                rem[k + i] -= factor * c
            rem.pop()
        return RatPoly(quo), RatPoly(rem)

    def clear_denominators(self) -> IntPoly:
        """Smallest positive integer multiple with integer coefficients."""
        lcm = ZZ(1)
        for c in self.coeffs:
            den = ZZ(c.denominator)
            lcm = lcm // _gcd(lcm, den) * den
        return IntPoly(ZZ(c * lcm) for c in self.coeffs)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def to_int(self) -> IntPoly:
        if not self.is_integral():
            raise InputError("polynomial has non-integer coefficients")
        return IntPoly(ZZ(c.numerator) for c in self.coeffs)

    def __eq__(self, other):
        other = _as_rat_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(("RatPoly",) + tuple((int(c.numerator), int(c.denominator)) for c in self.coeffs))

    def __repr__(self):
        return "RatPoly(%s)" % poly_to_string(self)


def _is_rational_scalar(x):
    return isinstance(x, int) or type(x) is type(ZZ(0)) or type(x) is type(QQ(0))


def _as_rat_poly(x):
    if isinstance(x, RatPoly):
        return x
    if isinstance(x, IntPoly):
        return x.to_rat()
    if _is_rational_scalar(x):
        return RatPoly((QQ(x),))
    return NotImplemented


def int_poly_divmod(num: IntPoly, den: IntPoly) -> Tuple[IntPoly, IntPoly]:
    """Division over Z; raises if the quotient would need denominators."""
    q, r = num.to_rat().divmod(den.to_rat())
    if not (q.is_integral() and r.is_integral()):
        raise InputError("division not exact over the integers")
    return q.to_int(), r.to_int()


def int_poly_exact_div(num: IntPoly, den: IntPoly) -> IntPoly:
    q, r = int_poly_divmod(num, den)
    if not r.is_zero():
        raise InputError("polynomial division left a remainder")
    return q


def poly_gcd(a, b) -> RatPoly:
    """Monic gcd over Q via the Euclidean algorithm."""
    a = _as_rat_poly(a)
    b = _as_rat_poly(b)
    while not b.is_zero():
        _, r = a.divmod(b)
        a, b = b, r
    if a.is_zero():
        return a
    return a.monic()


def squarefree_part(p) -> IntPoly:
    p = _as_rat_poly(p)
    g = poly_gcd(p, p.derivative())
    if g.degree <= 0:
        return p.clear_denominators().primitive()
    q, _ = p.divmod(g)
    return q.clear_denominators().primitive()


def squarefree_decomposition(p) -> List[Tuple[IntPoly, int]]:
    """Yun's algorithm: [(factor_i, multiplicity_i)] with squarefree,
    pairwise coprime factors whose weighted product rebuilds p/lc."""
    p = _as_rat_poly(p).monic()
    out: List[Tuple[IntPoly, int]] = []
    if p.degree <= 0:
        return out
    dp = p.derivative()
    a = poly_gcd(p, dp)
    b, _ = p.divmod(a)
    c, _ = dp.divmod(a)
    d = c - b.derivative()
    k = 1
    while b.degree > 0:
        g = poly_gcd(b, d)
        if g.degree > 0:
            out.append((g.clear_denominators().primitive(), k))
        b, _ = b.divmod(g)
        c, _ = d.divmod(g)
        d = c - b.derivative()
        k += 1
    return out


# ----------------------------------------------------------------------
# domain constructions


_CYCLOTOMIC_CACHE = {1: IntPoly((-1, 1))}


def cyclotomic_poly(m: int) -> IntPoly:
    """m-th cyclotomic polynomial by exact division of x**m - 1."""
    if m < 1:
        raise InputError("cyclotomic index must be positive")
    if m in _CYCLOTOMIC_CACHE:
        return _CYCLOTOMIC_CACHE[m]
    num = IntPoly((-1,) + (0,) * (m - 1) + (1,))  # x**m - 1
    for d in range(1, m):
        if m % d == 0:
            num = int_poly_exact_div(num, cyclotomic_poly(d))
    _CYCLOTOMIC_CACHE[m] = num
    return num


def trace_poly(k: int) -> IntPoly:
    """c_k with c_k(z + 1/z) = z**k + z**-k.

    Recurrence c_0 = 2, c_1 = y, c_{k+1} = y*c_k - c_{k-1}; these are the
    rescaled Chebyshev polynomials 2*T_k(y/2).
    """
    if k < 0:
        raise InputError("trace polynomial index must be >= 0")
    prev, cur = IntPoly((2,)), IntPoly((0, 1))
    if k == 0:
        return prev
    y = IntPoly((0, 1))
    for _ in range(k - 1):
        prev, cur = cur, y * cur - prev
    return cur


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    if m < 4:
        return True
    if m % 2 == 0:
        return False
    f = 3
    while f * f <= m:
        if m % f == 0:
            return False
        f += 2
    return True


def real_subfield_minpoly(m: int) -> IntPoly:
    """Minimal polynomial of 2*cos(2*pi/m) for odd prime m.

    The cyclotomic polynomial of an odd prime is palindromic of degree m-1,
    so dividing by x**((m-1)/2) and substituting y = x + 1/x gives a monic
    integer polynomial of degree (m-1)/2:

        Phi_m(x) / x**d = 1 + sum_{k=1..d} (x**k + x**-k) = 1 + sum c_k(y).
    """
    if m % 2 == 0 or not is_prime(m):
        raise InputError("index must be an odd prime, got %d" % m)
    d = (m - 1) // 2
    acc = IntPoly((1,))
    for k in range(1, d + 1):
        acc = acc + trace_poly(k)
    return acc


# ----------------------------------------------------------------------
# text and JSON forms


_TERM_RE = re.compile(
    r"(?P<sign>[+-])?\s*(?:(?P<coeff>\d+)\s*\*?\s*)?"
    r"(?:(?P<var>[a-zA-Z])\s*(?:\^\s*(?P<exp>\d+))?)?"
)


def poly_from_string(text: str) -> IntPoly:
    """Parse forms like "x^3+x^2-2x-1", "3", "-x", "2*x^2 - 7"."""
    s = text.strip()
    if not s:
        raise InputError("empty polynomial text")
    pos = 0
    terms = {}
    varname = None
    first = True
    while pos < len(s):
        mo = _TERM_RE.match(s, pos)
        if not mo or mo.end() == pos:
            raise InputError("cannot parse polynomial text at %r" % s[pos:])
        sign, coeff, var, exp = mo.group("sign", "coeff", "var", "exp")
        if coeff is None and var is None:
            raise InputError("cannot parse polynomial text at %r" % s[pos:])
        if sign is None and not first:
            raise InputError("missing sign between terms in %r" % text)
        if var is not None:
            if varname is None:
                varname = var.lower()
            elif var.lower() != varname:
                raise InputError("mixed variable names in %r" % text)
        c = ZZ(coeff) if coeff is not None else ZZ(1)
        if sign == "-":
            c = -c
        k = 0
        if var is not None:
            k = int(exp) if exp is not None else 1
        terms[k] = terms.get(k, ZZ(0)) + c
        pos = mo.end()
        while pos < len(s) and s[pos].isspace():
            pos += 1
        first = False
    deg = max(terms) if terms else 0
    return IntPoly(terms.get(k, ZZ(0)) for k in range(deg + 1))


def poly_to_string(p, var: str = "x") -> str:
    coeffs = p.coeffs
    if not coeffs:
        return "0"
    parts = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            body = "" if mag == 1 else str(mag)
            body += var if k == 1 else "%s^%d" % (var, k)
        parts.append((sign, body))
    text = ""
    for i, (sign, body) in enumerate(parts):
        if i == 0:
            text += ("-" if sign == "-" else "") + body
        else:
            text += sign + body
    return text


def poly_to_json(p: IntPoly) -> List[str]:
    """JSON form: array of decimal integer strings, lowest degree first."""
    return [str(c) for c in p.coeffs]


def poly_from_json(data: Sequence[str]) -> IntPoly:
    try:
        return IntPoly(ZZ(str(c)) for c in data)
    except (ValueError, TypeError) as exc:
        raise InputError("bad polynomial JSON: %s" % exc) from None


def rat_to_json(q) -> str:
    return qq_to_string(QQ(q))


def rat_from_json(text: str):
    try:
        return qq_from_string(str(text))
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise InputError("bad rational string %r: %s" % (text, exc)) from None


# ----------------------------------------------------------------------
# exact real root machinery


def sign(x) -> int:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def _dyadic_parts(q) -> Tuple:
    """Split a rational with power-of-two denominator into (num, k)."""
    den = ZZ(q.denominator)
    k = int(den).bit_length() - 1
    if ZZ(1) << k != den:
        raise InputError("expected a dyadic rational, got %s" % q)
    return ZZ(q.numerator), k


def sign_at(p: IntPoly, q) -> int:
    """Exact sign of p at a rational point.

    Dyadic points go through an all-integer scaled Horner evaluation of
    p(n / 2**k) * 2**(k*deg); everything else falls back to rational Horner.
    """
    q = QQ(q)
    den = ZZ(q.denominator)
    if den & (den - 1) == 0:
        n, k = _dyadic_parts(q)
        d = p.degree
        if d < 0:
            return 0
        acc = p.coeffs[-1]
        for i in range(d - 1, -1, -1):
            acc = acc * n + (p.coeffs[i] << (k * (d - i)))
        return sign(acc)
    return sign(p(q))


class SturmChain:
    """Sturm chain of the squarefree part, stored as primitive IntPolys."""

    __slots__ = ("polys",)

    def __init__(self, p):
        p0 = squarefree_part(p)
        chain = [p0.to_rat(), p0.derivative().to_rat()]
        while not chain[-1].is_zero():
            _, r = chain[-2].divmod(chain[-1])
            chain.append(-r)
        chain.pop()  # the zero terminator
        # rescaling by a positive constant keeps signs and tames growth
        fixed = []
        for q in chain:
            ip = q.clear_denominators().primitive()
            if sign(ip.leading()) != sign(q.leading()):
                ip = -ip
            fixed.append(ip)
        object.__setattr__(self, "polys", fixed)

    def variations_at(self, x) -> int:
        count = 0
        last = 0
        for p in self.polys:
            s = sign_at(p, x)
            if s == 0:
                continue
            if last != 0 and s != last:
                count += 1
            last = s
        return count

    def variations_at_pos_inf(self) -> int:
        count = 0
        last = 0
        for p in self.polys:
            s = sign(p.leading())
            if s == 0:
                continue
            if last != 0 and s != last:
                count += 1
            last = s
        return count

    def variations_at_neg_inf(self) -> int:
        count = 0
        last = 0
        for p in self.polys:
            s = sign(p.leading()) * (-1 if p.degree % 2 else 1)
            if s == 0:
                continue
            if last != 0 and s != last:
                count += 1
            last = s
        return count

    def count_in(self, lo, hi) -> int:
        """Number of distinct real roots in (lo, hi]."""
        return self.variations_at(lo) - self.variations_at(hi)

    def count_all(self) -> int:
        return self.variations_at_neg_inf() - self.variations_at_pos_inf()


def count_real_roots(p) -> int:
    """Number of distinct real roots, exact."""
    sf = squarefree_part(p)
    if sf.degree <= 0:
        return 0
    return SturmChain(sf).count_all()


def cauchy_root_bound(p: IntPoly):
    """Integer B with every real root strictly inside (-B, B)."""
    if p.degree < 1:
        return ZZ(1)
    lead = abs(p.leading())
    big = max(abs(c) for c in p.coeffs[:-1]) if p.degree >= 1 else ZZ(0)
    return ZZ(1) + (big + lead - 1) // lead


def isolate_real_roots(p) -> List[Tuple]:
    """Disjoint isolating intervals for the distinct real roots, ascending.

    Returns (lo, hi) pairs of dyadic rationals: either lo == hi and the root
    is that exact rational, or the unique root lies in the open-closed
    interval (lo, hi] and p is nonzero at both endpoints' sign evaluations.
    """
    sf = squarefree_part(p)
    if sf.degree <= 0:
        return []
    chain = SturmChain(sf)
    bound = cauchy_root_bound(sf)
    lo, hi = QQ(-bound), QQ(bound)
    total = chain.count_in(lo, hi)
    out: List[Tuple] = []

    def split(a, b, count):
        if count == 0:
            return
        if count == 1:
            out.append((a, b))
            return
        mid = (a + b) / 2
        if sign_at(sf, mid) == 0:
            # exact dyadic root: record the point and recurse on shrunk
            # intervals that exclude it
            out.append((mid, mid))
            eps = _exclusion_radius(sf, mid)
            la, lb = a, max(a, mid - eps)
            ra, rb = min(b, mid + eps), b
            if lb > la:
                split(la, lb, chain.count_in(la, lb))
            if rb > ra:
                split(ra, rb, chain.count_in(ra, rb))
            return
        left = chain.count_in(a, mid)
        split(a, mid, left)
        split(mid, b, count - left)

    split(lo, hi, total)
    out.sort(key=lambda iv: (iv[0], iv[1]))
    return out


def _exclusion_radius(p: IntPoly, root):
    """A dyadic radius around an exact rational root free of other roots."""
    q, _ = p.to_rat().divmod(RatPoly((-QQ(root), QQ(1))))
    rest = q.clear_denominators().primitive()
    eps = QQ(1, 2)
    while True:
        chain = SturmChain(rest)
        if chain.count_in(QQ(root) - eps, QQ(root) + eps) == 0:
            return eps
        eps = eps / 2


def refine_root(p, lo, hi, bits: int) -> Tuple:
    """Shrink an isolating interval to width <= 2**-bits.

    Exact arithmetic throughout: bisection guarantees progress, and a Newton
    step from the midpoint (rounded to a dyadic rational so numbers stay
    small) is accepted whenever it lands strictly inside the bracket, which
    restores quadratic convergence near the root.
    """
    sf = squarefree_part(p)
    lo, hi = QQ(lo), QQ(hi)
    if lo == hi:
        return lo, hi
    target = QQ(1, ZZ(1) << bits)
    slo = sign_at(sf, lo)
    shi = sign_at(sf, hi)
    if slo == 0:
        return lo, lo
    if shi == 0:
        return hi, hi
    if slo == shi:
        raise InputError("interval endpoints do not bracket a sign change")
    dsf = sf.derivative()

    def width_bits(w):
        # number of correct bits, roughly -log2(width)
        num, den = ZZ(w.numerator), ZZ(w.denominator)
        return int(den).bit_length() - int(num).bit_length()

    while hi - lo > target:
        # Newton from the midpoint, rounded to twice the current precision
        mid = (lo + hi) / 2
        accepted = False
        fpm = dsf(mid)
        if fpm != 0:
            fm = sf(mid)
            step = QQ(fm) / QQ(fpm)
            cand = mid - step
            if lo < cand < hi:
                k = max(8, 2 * max(1, width_bits(hi - lo)) + 8)
                scaled = cand * (ZZ(1) << k)
                # round to nearest on the 2**-k grid
                n, d = ZZ(scaled.numerator), ZZ(scaled.denominator)
                cand = QQ((2 * n + d) // (2 * d), ZZ(1) << k)
                if lo < cand < hi:
                    sc = sign_at(sf, cand)
                    if sc == 0:
                        return cand, cand
                    if sc == slo:
                        accepted = cand != lo
                        lo = cand
                    else:
                        accepted = cand != hi
                        hi = cand
        # bisection keeps guaranteed progress regardless of Newton
        mid = (lo + hi) / 2
        sm = sign_at(sf, mid)
        if sm == 0:
            return mid, mid
        if sm == slo:
            lo = mid
        else:
            hi = mid
    return lo, hi
