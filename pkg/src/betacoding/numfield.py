"""Exact arithmetic in Q(beta) for a real algebraic number beta.

Elements are coordinate vectors in the power basis 1, beta, ..., beta^(d-1).
Sign and floor are decided exactly: the element's polynomial is evaluated
with rational interval arithmetic on an isolating interval for beta that is
narrowed until the sign is forced.
"""

from fractions import Fraction
from functools import total_ordering
from math import floor, gcd, lcm

import mpmath

from . import qpoly
from .errors import PrecisionExhausted

_MAX_REFINE_BITS = 1 << 16


def mpf_to_fraction(x):
    """Exact rational value of a finite real mpf."""
    man, exp = mpmath.mpf(x).man_exp
    return Fraction(int(man)) * Fraction(2) ** int(exp)


def _interval_eval(poly, lo, hi):
    """Enclosure of poly on [lo, hi] (0 <= lo or hi <= 0 not required)."""
    a = b = Fraction(0)
    for c in reversed(poly):
        cands = (a * lo, a * hi, b * lo, b * hi)
        a, b = min(cands) + c, max(cands) + c
    return a, b


class NumberField:
    """Q(beta) with beta the real root of ``minpoly`` inside a given interval.

    ``minpoly`` is a rational polynomial (ascending coefficients), irreducible
    over Q; ``approx`` is a floating approximation used to locate beta.
    """

    def __init__(self, minpoly, approx):
        self.minpoly = qpoly.monic(minpoly)
        self.degree = qpoly.degree(self.minpoly)
        self._approx = mpmath.mpf(approx)
        self._intervals = {}
        self._lo, self._hi = self._isolate()

    # --- locating beta

    def _isolate(self):
        m = self.minpoly
        if self.degree == 1:
            r = -m[0]
            return r, r
        width = Fraction(1, 1 << 20)
        for _ in range(64):
            c = mpf_to_fraction(self._approx)
            lo, hi = c - width, c + width
            if qpoly.sturm_count(m, lo, hi) == 1 and qpoly.evaluate(m, hi) != 0:
                return lo, hi
            width *= 2
        raise ValueError("could not isolate beta near its approximation")

    def interval(self, bits):
        """Rational interval of width <= 2^-bits containing beta."""
        if self._lo == self._hi:
            return self._lo, self._hi
        cached = self._intervals.get(bits)
        if cached is not None:
            return cached
        lo, hi = self._lo, self._hi
        m = self.minpoly
        s_lo = qpoly.evaluate(m, lo) > 0
        target = Fraction(1, 1 << bits)
        # jump close using a high-precision estimate, then confirm by a sign change
        with mpmath.workprec(bits + 40):
            rev = [mpmath.mpf(c.numerator) / c.denominator for c in reversed(m)]
            start = mpmath.mpf((lo + hi).numerator) / (2 * (lo + hi).denominator)
            est = mpmath.findroot(lambda t: mpmath.polyval(rev, t), start, verify=False)
        c = mpf_to_fraction(mpmath.re(est))
        a, b = c - target / 4, c + target / 4
        if lo < a < b < hi:
            va, vb = qpoly.evaluate(m, a), qpoly.evaluate(m, b)
            if va != 0 and vb != 0 and (va > 0) != (vb > 0):
                lo, hi = a, b
        while hi - lo > target:
            mid = (lo + hi) / 2
            v = qpoly.evaluate(m, mid)
            if v == 0:
                lo = hi = mid
                break
            if (v > 0) == s_lo:
                lo = mid
            else:
                hi = mid
        self._intervals[bits] = (lo, hi)
        return lo, hi

    @property
    def beta_approx(self):
        return self._approx

    # --- construction helpers

    def __call__(self, coords):
        return FieldElement(self, coords)

    def from_rational(self, q):
        return FieldElement(self, (Fraction(q),))

    def from_poly(self, poly):
        """Element sum poly[i] beta^i for a rational polynomial of any degree."""
        return FieldElement(self, qpoly.divmod_(qpoly.strip(poly), self.minpoly)[1])

    @property
    def beta(self):
        return self.from_poly((0, 1))

    @property
    def one(self):
        return self.from_rational(1)

    @property
    def zero(self):
        return self.from_rational(0)

    def power(self, n):
        """beta^n for any integer n."""
        b = self.beta
        return b**n

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.minpoly == other.minpoly and self._lo <= other._approx <= self._hi

    def __hash__(self):
        return hash(self.minpoly)

    def __repr__(self):
        return f"NumberField(minpoly={[str(c) for c in self.minpoly]}, beta~{mpmath.nstr(self._approx, 12)})"


@total_ordering
class FieldElement:
    __slots__ = ("field", "coords")

    def __init__(self, field, coords):
        coords = qpoly.strip(coords)
        if len(coords) > field.degree:
            coords = qpoly.divmod_(coords, field.minpoly)[1]
        self.field = field
        self.coords = coords

    def _other(self, other):
        if isinstance(other, FieldElement):
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.from_rational(other)
        return NotImplemented

    def is_zero(self):
        return not self.coords

    def __add__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, qpoly.add(self.coords, other.coords))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, qpoly.scale(self.coords, -1))

    def __sub__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, qpoly.sub(self.coords, other.coords))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        prod = qpoly.mul(self.coords, other.coords)
        return FieldElement(self.field, qpoly.divmod_(prod, self.field.minpoly)[1])

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(beta)")
        # extended Euclid: s*a + t*m = 1
        r0, r1 = self.field.minpoly, self.coords
        s0, s1 = (), (Fraction(1),)
        while qpoly.degree(r1) > 0:
            q, r = qpoly.divmod_(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, qpoly.sub(s0, qpoly.mul(q, s1))
        return FieldElement(self.field, qpoly.scale(s1, 1 / r1[0]))

    def __truediv__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._other(other) * self.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        result, base = self.field.one, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    # --- real embedding

    def sign(self):
        if self.is_zero():
            return 0
        size = max(abs(c) for c in self.coords)
        bits = max(32, size.numerator.bit_length() - size.denominator.bit_length() + 24)
        while bits <= _MAX_REFINE_BITS:
            lo, hi = self.field.interval(bits)
            a, b = _interval_eval(self.coords, lo, hi)
            if a > 0:
                return 1
            if b < 0:
                return -1
            bits *= 2
        raise PrecisionExhausted("sign undecided at maximal refinement")

    def __lt__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return (self - other).sign() < 0

    def enclosure(self, precision=128):
        """Rational interval around the real value with relative width <= 2^-precision."""
        if self.is_zero():
            return Fraction(0), Fraction(0)
        size = max(abs(c) for c in self.coords)
        bits = precision + 8 + int(size.numerator.bit_length() - size.denominator.bit_length())
        bits = max(bits, 32)
        while True:
            lo, hi = self.field.interval(bits)
            a, b = _interval_eval(self.coords, lo, hi)
            if (a > 0 or b < 0) and (b - a) <= min(abs(a), abs(b)) / (1 << precision):
                return a, b
            bits += max(precision // 2, 16)
            if bits > _MAX_REFINE_BITS:
                raise PrecisionExhausted("enclosure did not converge")

    def to_mpf(self, precision=128):
        """Real value, correct to about ``precision`` relative bits."""
        if self.is_zero():
            return mpmath.mpf(0)
        a, b = self.enclosure(precision)
        m = (a + b) / 2
        with mpmath.workprec(precision + 8):
            return mpmath.mpf(m.numerator) / m.denominator

    def __float__(self):
        return float(self.to_mpf(64))

    def floor(self):
        """Exact floor of the real value."""
        if len(self.coords) <= 1:
            return floor(self.coords[0]) if self.coords else 0
        a, b = self.enclosure(64)
        guess = floor(a)
        while True:
            if (self - guess).sign() >= 0 and (self - (guess + 1)).sign() < 0:
                return guess
            guess += 1 if guess < b else -1

    def ceil(self):
        return -((-self).floor())

    def nearest_distance(self):
        """|x - nearest integer| as an exact element."""
        n = self.floor()
        lo, hi = self - n, (n + 1) - self
        return lo if lo <= hi else hi

    def denominator(self):
        return lcm(*[c.denominator for c in self.coords]) if self.coords else 1

    def is_integral_coords(self):
        return all(c.denominator == 1 for c in self.coords)

    def __repr__(self):
        terms = " + ".join(f"{c}*b^{i}" for i, c in enumerate(self.coords) if c) or "0"
        return f"<{terms}>"


class ZBetaElement:
    """Canonical form beta^(-scale) * sum coeffs[i] beta^i of an element of Z[beta, 1/beta].

    Requires beta to be an algebraic integer (monic integer minimal polynomial);
    ``scale`` is the least non-negative integer making the coordinates integral.
    """

    __slots__ = ("coeffs", "scale")

    def __init__(self, coeffs, scale):
        self.coeffs = tuple(int(c) for c in coeffs)
        self.scale = int(scale)

    @classmethod
    def from_element(cls, x):
        """Canonical form of x, or None when x is not in Z[beta, 1/beta]."""
        F = x.field
        if x.is_zero():
            return cls((), 0)
        D = x.denominator()
        g0 = F.minpoly[0]
        if D > 1:
            # primes of D must divide the norm of beta
            num = g0.numerator
            rest = D
            while True:
                g = gcd(rest, num)
                if g == 1:
                    break
                while rest % g == 0:
                    rest //= g
            if rest != 1:
                return None
        cap = F.degree * (D.bit_length() + 1) + F.degree
        b = F.beta
        y = x
        for k in range(cap + 1):
            if y.is_integral_coords():
                return cls(tuple(int(c) for c in y.coords), k)
            y = y * b
        return None

    def to_element(self, field):
        return field(tuple(Fraction(c) for c in self.coeffs)) * field.power(-self.scale)

    def __eq__(self, other):
        return isinstance(other, ZBetaElement) and (self.coeffs, self.scale) == (other.coeffs, other.scale)

    def __hash__(self):
        return hash((self.coeffs, self.scale))

    def __repr__(self):
        return f"ZBetaElement({list(self.coeffs)}, scale={self.scale})"

    def to_json(self):
        return {"coeffs": list(self.coeffs), "scale": self.scale}


def in_zbeta(x):
    return ZBetaElement.from_element(x) is not None
