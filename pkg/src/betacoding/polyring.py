"""Integer Laurent polynomials and the associated polynomial of a system."""

import re
from dataclasses import dataclass, field
from math import gcd

import mpmath

from .errors import NonFiniteReduction, NotHyperbolic, ParseError, PrecisionExhausted, ZeroPolynomial


@dataclass(frozen=True)
class IntLaurentPoly:
    """Sparse integer Laurent polynomial stored as sorted (exponent, coeff) pairs."""

    terms: tuple = ()

    def __post_init__(self):
        acc = {}
        for e, c in self.terms:
            acc[int(e)] = acc.get(int(e), 0) + int(c)
        object.__setattr__(self, "terms", tuple(sorted((e, c) for e, c in acc.items() if c)))

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d.items()))

    @classmethod
    def from_coeffs(cls, coeffs, shift=0):
        return cls(tuple((i + shift, c) for i, c in enumerate(coeffs)))

    def as_dict(self):
        return dict(self.terms)

    def is_zero(self):
        return not self.terms

    @property
    def min_exp(self):
        return self.terms[0][0]

    @property
    def max_exp(self):
        return self.terms[-1][0]

    def coeff(self, e):
        return self.as_dict().get(e, 0)

    def __add__(self, other):
        return IntLaurentPoly(self.terms + other.terms)

    def __neg__(self):
        return IntLaurentPoly(tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return IntLaurentPoly(tuple((e, c * other) for e, c in self.terms))
        return IntLaurentPoly(tuple((e1 + e2, c1 * c2) for e1, c1 in self.terms for e2, c2 in other.terms))

    __rmul__ = __mul__

    def shift(self, k):
        return IntLaurentPoly(tuple((e + k, c) for e, c in self.terms))

    def __str__(self):
        return format_poly(self)


@dataclass(frozen=True)
class AssociatedPoly:
    """Primitive integer polynomial a_0 + ... + a_d x^d with a_0 != 0, a_d > 0.

    ``shift`` records the power of x removed during normalization and
    ``sign`` the unit applied, so that ``input = sign * x^shift * content * f``.
    """

    coeffs: tuple
    shift: int = field(default=0, compare=False)
    sign: int = field(default=1, compare=False)
    content: int = field(default=1, compare=False)

    def __post_init__(self):
        c = tuple(int(a) for a in self.coeffs)
        object.__setattr__(self, "coeffs", c)
        if not c or c[0] == 0 or c[-1] <= 0:
            raise ValueError(f"not an associated polynomial: {c}")
        g = 0
        for a in c:
            g = gcd(g, a)
        if g != 1:
            raise ValueError(f"associated polynomial must be primitive: {c}")

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def leading(self):
        return self.coeffs[-1]

    @property
    def constant(self):
        return self.coeffs[0]

    def is_monic(self):
        return self.coeffs[-1] == 1

    def derivative(self):
        return tuple(i * a for i, a in enumerate(self.coeffs))[1:]

    def as_laurent(self):
        return IntLaurentPoly.from_coeffs(self.coeffs)

    def __call__(self, x):
        acc = 0
        for a in reversed(self.coeffs):
            acc = acc * x + a
        return acc

    def __str__(self):
        return format_poly(self.as_laurent())


_TERM = re.compile(
    r"""\s*([+-]?)\s*
        (\d+(?:/\d+)?)?\s*\*?\s*
        (?:([a-zA-Z])\s*(?:(?:\^|\*\*)\s*\(?\s*([+-]?\d+)\s*\)?)?)?\s*""",
    re.VERBOSE,
)


def parse_poly(text):
    """Parse ``"x^2+2x-1"``, ``"x^-1+2"`` or an ascending list ``"[-1,2,1]"``."""
    s = text.strip()
    if not s:
        raise ParseError("empty polynomial")
    if s.startswith("["):
        if not s.endswith("]"):
            raise ParseError(f"unterminated coefficient list: {text!r}")
        body = s[1:-1].strip()
        try:
            coeffs = [int(t) for t in body.split(",")] if body else []
        except ValueError as exc:
            raise ParseError(f"bad coefficient list: {text!r}") from exc
        return IntLaurentPoly.from_coeffs(coeffs)
    terms = []
    pos = 0
    var = None
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"cannot parse polynomial at {s[pos:]!r}")
        sign, num, v, exp = m.groups()
        if num is None and v is None:
            raise ParseError(f"dangling sign in {text!r}")
        if pos > 0 and not sign:
            raise ParseError(f"missing operator in {text!r}")
        if num is not None and "/" in num:
            raise ParseError("coefficients must be integers")
        if v is not None:
            if var is None:
                var = v
            elif v != var:
                raise ParseError(f"mixed variables in {text!r}")
        c = int(num) if num is not None else 1
        e = (int(exp) if exp is not None else 1) if v is not None else 0
        terms.append((e, -c if sign == "-" else c))
        pos = m.end()
    return IntLaurentPoly(tuple(terms))


def format_poly(p, var="x"):
    if p.is_zero():
        return "0"
    out = []
    for e, c in reversed(p.terms):
        mag = abs(c)
        if e == 0:
            body = str(mag)
        else:
            body = ("" if mag == 1 else str(mag)) + var + ("" if e == 1 else f"^{e}")
        out.append(("-" if c < 0 else "+") + body)
    s = "".join(out)
    return s[1:] if s.startswith("+") else s


def normalize_associated(p):
    """Generator of (p) with positive powers, nonzero constant, positive lead, primitive."""
    if isinstance(p, str):
        p = parse_poly(p)
    if p.is_zero():
        raise ZeroPolynomial("the zero polynomial generates no associated polynomial")
    lo, hi = p.min_exp, p.max_exp
    d = p.as_dict()
    coeffs = [d.get(e, 0) for e in range(lo, hi + 1)]
    content = 0
    for c in coeffs:
        content = gcd(content, c)
    sign = 1 if coeffs[-1] > 0 else -1
    coeffs = [sign * c // content for c in coeffs]
    return AssociatedPoly(tuple(coeffs), shift=lo, sign=sign, content=content)


def reciprocal_poly(f):
    """Normalized x^d f(1/x)."""
    return normalize_associated(IntLaurentPoly.from_coeffs(tuple(reversed(f.coeffs))))


@dataclass(frozen=True)
class RealLaurentWindow:
    """Coefficients of a two-sided series on ``window``; ``tail_bound`` bounds the
    l1 norm of everything outside the window."""

    coeffs: dict
    window: tuple
    tail_bound: mpmath.mpf

    def __getitem__(self, n):
        return self.coeffs.get(n, mpmath.mpf(0))

    def convolve(self, f):
        """Product with the integer polynomial f, restricted to the window."""
        lo, hi = self.window
        out = {}
        for k in range(lo, hi + len(f.coeffs)):
            out[k] = mpmath.fsum(a * self[k - i] for i, a in enumerate(f.coeffs) if lo <= k - i <= hi)
        return out


def _partial_fraction_data(f, precision):
    from .places import is_hyperbolic, isolate_roots

    hyp = is_hyperbolic(f)
    if not hyp:
        raise NotHyperbolic(f"{f} has roots on the unit circle")
    roots = isolate_roots(f, precision)
    if any(m > 1 for _, m in roots.roots):
        raise NotHyperbolic(f"{f} has repeated roots; partial fractions need simple roots")
    fp = f.derivative()
    data = []
    with mpmath.workprec(precision):
        for rho, _ in roots.roots:
            dval = mpmath.polyval(list(reversed(fp)), rho)
            data.append((rho, 1 / dval, abs(rho) < 1))
    return data


def inverse_laurent_coeffs(f, window, precision=128):
    """Laurent coefficients of 1/f on the annulus around |x| = 1.

    Stable roots contribute to negative powers, unstable roots to
    non-negative powers.
    """
    lo, hi = window
    data = _partial_fraction_data(f, precision)
    with mpmath.workprec(precision):
        coeffs = {}
        for k in range(lo, hi + 1):
            acc = mpmath.mpc(0)
            for rho, inv_d, stable in data:
                if stable and k <= -1:
                    acc += rho ** (-k - 1) * inv_d
                elif not stable and k >= 0:
                    acc -= rho ** (-k - 1) * inv_d
            coeffs[k] = mpmath.re(acc)
        tail = mpmath.mpf(0)
        for rho, inv_d, stable in data:
            r = abs(rho)
            if stable:
                m0 = max(0, -lo)
                tail += r ** m0 * abs(inv_d) / (1 - r)
            else:
                k0 = max(0, hi + 1)
                tail += r ** (-k0 - 1) * abs(inv_d) / (1 - 1 / r)
        # slack for rounding in the root approximations
        tail = tail * (1 + mpmath.mpf(2) ** (-precision // 2)) + mpmath.mpf(2) ** (-precision + 8)
    return RealLaurentWindow(coeffs, (lo, hi), tail)


def decay_rate(f, precision=64):
    """Largest of |stable root| and 1/|unstable root|: the two-sided decay of 1/f."""
    data = _partial_fraction_data(f, precision)
    return max(abs(r) if s else 1 / abs(r) for r, _, s in data)


def digit_reduce(g, f, window=None, precision=256):
    """Split ``g = f*h + r`` with h the floors of the coefficients of g/f.

    When the floors do not vanish on both tails (negative coefficients of
    g/f far out), h is infinite; pass an explicit ``window`` to truncate h
    to it, otherwise ``NonFiniteReduction`` is raised.
    """
    if g.is_zero():
        return IntLaurentPoly(), IntLaurentPoly()
    lam = decay_rate(f)
    mass = sum(abs(c) for _, c in g.terms)
    # margin after which |coefficient of g/f| < 2^-(precision/2)
    margin = int(mpmath.ceil((precision // 2 + mpmath.log(mass + 1, 2) + 16) / -mpmath.log(lam, 2))) + 2
    lo, hi = g.min_exp - margin, g.max_exp + margin
    inv = inverse_laurent_coeffs(f, (lo - g.max_exp, hi - g.min_exp), precision)
    eps = mpmath.mpf(2) ** (-(precision // 2))
    # far-tail coefficients sit near 2^-(precision/2); rounding noise is far below
    noise = mpmath.mpf(2) ** (-(3 * precision // 4))
    h = {}
    negative_tail = False
    with mpmath.workprec(precision):
        for i in range(lo, hi + 1):
            r_i = mpmath.fsum(c * inv[i - e] for e, c in g.terms)
            near = mpmath.nint(r_i)
            # within eps of an integer: treat as exact; the identity check below guards it
            n = int(near) if abs(r_i - near) < eps else int(mpmath.floor(r_i))
            if n:
                h[i] = n
            if (i - lo < 4 or hi - i < 4) and r_i < -noise:
                negative_tail = True
    if window is None:
        if negative_tail:
            raise NonFiniteReduction(f"floors of {g}/({f}) have infinite support")
    else:
        h = {i: c for i, c in h.items() if window[0] <= i <= window[1]}
    hp = IntLaurentPoly.from_dict(h)
    r = g - f.as_laurent() * hp
    bound = sum(abs(a) for a in f.coeffs)
    if window is None and any(abs(c) >= bound for _, c in r.terms):
        raise PrecisionExhausted("digit reduction left an out-of-range remainder")
    return hp, r


def mahler_entropy(f, precision=128):
    """log|a_d| + sum of log|root| over roots outside the unit disc."""
    from .places import isolate_roots

    roots = isolate_roots(f, precision)
    with mpmath.workprec(precision):
        total = mpmath.log(abs(f.leading))
        for rho, mult in roots.roots:
            if abs(rho) > 1:
                total += mult * mpmath.log(abs(rho))
        return +total


def poly_text_to_associated(text):
    return normalize_associated(parse_poly(text))


__all__ = [
    "AssociatedPoly",
    "IntLaurentPoly",
    "RealLaurentWindow",
    "digit_reduce",
    "format_poly",
    "inverse_laurent_coeffs",
    "mahler_entropy",
    "normalize_associated",
    "parse_poly",
    "reciprocal_poly",
]
