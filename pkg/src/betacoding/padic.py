"""Fixed-precision p-adic numbers.

A ``PadicNumber`` is ``p**valuation * unit`` where ``unit`` is known modulo
``p**precision`` (relative precision).  Zero carries ``precision == 0`` and
its ``valuation`` is the absolute precision to which it is known to vanish.
Every operation returns the largest precision justified by its inputs.
"""

from dataclasses import dataclass
from fractions import Fraction

DEFAULT_DIGITS = 64


def valuation(n, p):
    """p-adic valuation of a nonzero integer or Fraction."""
    if n == 0:
        raise ValueError("valuation of zero")
    if isinstance(n, Fraction):
        return valuation(n.numerator, p) - valuation(n.denominator, p)
    n = abs(int(n))
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _make(p, v, value, abs_prec):
    """Normalize p^v * value known modulo p^abs_prec."""
    if abs_prec <= v:
        return PadicNumber(p, abs_prec, 0, 0)
    value %= p ** (abs_prec - v)
    if value == 0:
        return PadicNumber(p, abs_prec, 0, 0)
    while value % p == 0:
        value //= p
        v += 1
    return PadicNumber(p, v, value, abs_prec - v)


@dataclass(frozen=True)
class PadicNumber:
    prime: int
    valuation: int
    unit: int
    precision: int

    @classmethod
    def zero(cls, p, abs_prec=DEFAULT_DIGITS):
        return cls(p, abs_prec, 0, 0)

    @classmethod
    def from_rational(cls, x, p, prec=DEFAULT_DIGITS):
        """Embed an int or Fraction with ``prec`` digits of relative precision."""
        x = Fraction(x)
        if x == 0:
            return cls.zero(p, prec)
        v = valuation(x, p)
        num, den = x.numerator, x.denominator
        if v > 0:
            num //= p**v
        elif v < 0:
            den //= p ** (-v)
        mod = p**prec
        return cls(p, v, num * pow(den, -1, mod) % mod, prec)

    @property
    def abs_precision(self):
        return self.valuation + self.precision

    def is_zero(self):
        return self.unit == 0

    @property
    def digits(self):
        """Base-p digits of the unit part, least significant first."""
        out, u = [], self.unit
        for _ in range(self.precision):
            out.append(u % self.prime)
            u //= self.prime
        return out

    def _coerce(self, other):
        if isinstance(other, PadicNumber):
            if other.prime != self.prime:
                raise ValueError("mixing p-adic numbers over different primes")
            return other
        # exact rationals get enough digits not to limit the absolute precision
        vx = valuation_or_zero(other, self.prime)
        return PadicNumber.from_rational(other, self.prime, max(1, self.abs_precision - vx))

    def __add__(self, other):
        other = self._coerce(other)
        p = self.prime
        ap = min(self.abs_precision, other.abs_precision)
        v = min(self.valuation, other.valuation)
        value = self.unit * p ** (self.valuation - v) + other.unit * p ** (other.valuation - v)
        return _make(p, v, value, ap)

    __radd__ = __add__

    def __neg__(self):
        return _make(self.prime, self.valuation, -self.unit, self.abs_precision)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        p = self.prime
        if self.is_zero() or other.is_zero():
            ap = self.valuation + other.valuation
            return PadicNumber.zero(p, ap)
        v = self.valuation + other.valuation
        rel = min(self.precision, other.precision)
        return _make(p, v, self.unit * other.unit, v + rel)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("p-adic zero (to the known precision) has no inverse")
        mod = self.prime**self.precision
        return PadicNumber(self.prime, -self.valuation, pow(self.unit, -1, mod), self.precision)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        result = PadicNumber.from_rational(1, self.prime, self.precision if not self.is_zero() else DEFAULT_DIGITS)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def lift(self):
        """A rational representative (exact for the known digits)."""
        return Fraction(self.unit) * Fraction(self.prime) ** self.valuation

    def truncate(self, abs_prec):
        """The same number known only modulo p^abs_prec."""
        return _make(self.prime, self.valuation, self.unit, min(abs_prec, self.abs_precision))

    def residue(self, abs_prec):
        """Integer r in [0, p^abs_prec) with self - r in p^abs_prec Z_p; needs valuation >= 0."""
        if self.valuation < 0:
            raise ValueError("residue of a non-integral p-adic number")
        if self.is_zero() or self.valuation >= abs_prec:
            return 0
        if abs_prec > self.abs_precision:
            raise ValueError("residue requested beyond known precision")
        return (self.unit * self.prime**self.valuation) % self.prime**abs_prec

    def __eq__(self, other):
        if not isinstance(other, PadicNumber):
            try:
                other = self._coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash((self.prime, self.valuation, self.unit, self.precision))

    def __repr__(self):
        if self.is_zero():
            return f"O({self.prime}^{self.valuation})"
        ds = "".join(str(d) if d < 10 else f"[{d}]" for d in reversed(self.digits))
        return f"...{ds} * {self.prime}^{self.valuation}"

    def to_json(self):
        return {
            "prime": self.prime,
            "valuation": self.valuation,
            "digits": "".join(str(d) if d < 10 else f"[{d}]" for d in reversed(self.digits)),
            "precision": self.precision,
        }


def valuation_or_zero(x, p):
    return 0 if x == 0 else valuation(x, p)
