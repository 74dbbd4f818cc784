"""Roots, places and evaluation of digit series at stable and unstable places.

Archimedean places come from the complex roots of the associated polynomial
(one place per real root or per conjugate pair); non-archimedean places come
from the Newton polygon of f at primes dividing the constant or leading
coefficient.  A Newton side of slope m carries roots of p-adic valuation -m.
"""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import NamedTuple, Optional

import mpmath
import numpy as np

from . import qpoly
from .errors import (
    DegreeTooLarge,
    DivergentDirection,
    HenselFailure,
    NotHyperbolic,
    NotIrreducible,
    PrecisionExhausted,
)
from .padic import DEFAULT_DIGITS, PadicNumber, valuation
from .polyring import AssociatedPoly, reciprocal_poly

DEFAULT_PRECISION = 128


# ---------------------------------------------------------------- roots


@dataclass(frozen=True)
class RootSet:
    """Certified approximations: each root lies within ``radii[i]`` of ``roots[i][0]``."""

    roots: tuple
    radii: tuple
    precision: int

    def values(self):
        return [z for z, _ in self.roots]

    def __len__(self):
        return sum(m for _, m in self.roots)


def _yun(coeffs):
    """Squarefree decomposition [(s_1, 1), (s_2, 2), ...] of a rational polynomial."""
    f = qpoly.monic(coeffs)
    out = []
    a = qpoly.gcd_(f, qpoly.deriv(f))
    b = qpoly.divmod_(f, a)[0]
    c = qpoly.divmod_(qpoly.deriv(f), a)[0]
    d = qpoly.sub(c, qpoly.deriv(b))
    i = 1
    while qpoly.degree(b) > 0:
        a = qpoly.gcd_(b, d)
        if qpoly.degree(a) > 0:
            out.append((a, i))
        b = qpoly.divmod_(b, a)[0]
        c = qpoly.divmod_(d, a)[0]
        d = qpoly.sub(c, qpoly.deriv(b))
        i += 1
    return out


def _inclusion_radii(coeffs, zs):
    """Weierstrass inclusion radii n*|p(z_i)| / |lc * prod_{j!=i}(z_i - z_j)|."""
    n = len(zs)
    lc = coeffs[-1]
    rev = list(reversed(coeffs))
    radii = []
    for i, z in enumerate(zs):
        den = lc
        for j, w in enumerate(zs):
            if j != i:
                den *= z - w
        radii.append(n * abs(mpmath.polyval(rev, z)) / abs(den) if den != 0 else mpmath.inf)
    return radii


def _certified_simple_roots(coeffs, precision, max_rounds=6):
    coeffs = [mpmath.mpf(c.numerator) / c.denominator for c in coeffs]
    n = len(coeffs) - 1
    if n == 1:
        return [-coeffs[0] / coeffs[1]], [mpmath.mpf(0)]
    init = np.roots([float(c) for c in reversed(coeffs)])
    zs = [mpmath.mpc(complex(z)) for z in init]
    rev = list(reversed(coeffs))
    drev = [c * (n - k) for k, c in enumerate(rev[:-1])]
    for _ in range(max_rounds):
        # Newton, then a few Weierstrass sweeps to separate clustered starts
        new = []
        for z in zs:
            for _ in range(precision):
                d = mpmath.polyval(drev, z)
                if d == 0:
                    break
                step = mpmath.polyval(rev, z) / d
                z -= step
                if abs(step) <= abs(z) * mpmath.mpf(2) ** (-precision) or step == 0:
                    break
            new.append(z)
        zs = new
        radii = _inclusion_radii(coeffs, zs)
        disjoint = all(
            abs(zs[i] - zs[j]) > radii[i] + radii[j] for i in range(n) for j in range(i + 1, n)
        )
        if disjoint and max(radii) <= mpmath.mpf(2) ** (-precision // 2) * (1 + max(abs(z) for z in zs)):
            return zs, radii
        zs = [mpmath.mpc(z) for z in mpmath.polyroots(rev, maxsteps=200, extraprec=precision)]
    raise PrecisionExhausted(f"could not separate the roots at {precision} bits")


def isolate_roots(f, precision=DEFAULT_PRECISION):
    """All complex roots of f with multiplicities and certified inclusion radii."""
    coeffs = f.coeffs if isinstance(f, AssociatedPoly) else tuple(f)
    if not any(coeffs):
        raise ValueError("the zero polynomial has no roots")
    roots, radii = [], []
    with mpmath.workprec(precision + 32):
        for part, mult in _yun(coeffs):
            zs, rs = _certified_simple_roots(part, precision)
            n_real = qpoly.sturm_count(part, -_cauchy_bound(part), _cauchy_bound(part))
            order = sorted(range(len(zs)), key=lambda i: abs(mpmath.im(zs[i])))
            real_idx = set(order[:n_real])
            for i, z in enumerate(zs):
                if i in real_idx:
                    z = mpmath.mpc(mpmath.re(z), 0)
                roots.append((z, mult))
                radii.append(rs[i])
    return RootSet(tuple(roots), tuple(radii), precision)


def _cauchy_bound(p):
    p = qpoly.strip(p)
    return 1 + max(abs(c / p[-1]) for c in p[:-1]) if len(p) > 1 else Fraction(1)


# ---------------------------------------------------------------- hyperbolicity


class Hyperbolicity(NamedTuple):
    value: bool
    certificate: Optional[mpmath.mpf]
    reason: str

    def __bool__(self):
        return self.value


def _unit_circle_roots(coeffs):
    """Exact test for a root of modulus one."""
    if qpoly.evaluate(coeffs, 1) == 0 or qpoly.evaluate(coeffs, -1) == 0:
        return True, "root at +-1"
    h = qpoly.gcd_(coeffs, qpoly.reverse(coeffs))
    if qpoly.degree(h) < 1:
        return False, "no reciprocal root pairs"
    h = qpoly.squarefree(h)
    k, rem = divmod(qpoly.degree(h), 2)
    if rem:
        # a self-reciprocal factor of odd degree vanishes at +-1, handled above
        return True, "odd self-reciprocal factor"
    # h(x) = x^k H(x + 1/x); unit-circle roots <-> real roots of H in (-2, 2)
    rest = list(h)
    big_h = [Fraction(0)] * (k + 1)
    for j in range(k, -1, -1):
        c = rest[k + j] if k + j < len(rest) else Fraction(0)
        big_h[j] = c
        # peel off c * x^(k-j) * (x^2 + 1)^j
        term = [Fraction(0)] * (2 * k + 1)
        for i in range(j + 1):
            term[k - j + 2 * i] += c * comb(j, i)
        rest = [a - b for a, b in zip(rest + [Fraction(0)] * (len(term) - len(rest)), term)]
    if any(rest):
        return False, "gcd factor not self-reciprocal"
    n_in = qpoly.sturm_count(big_h, Fraction(-2), Fraction(2)) - (1 if qpoly.evaluate(big_h, 2) == 0 else 0)
    return n_in > 0, "Sturm count of the trace polynomial on (-2, 2)"


def is_hyperbolic(f, precision=64):
    """True iff no root of f lies on |z| = 1, decided exactly."""
    coeffs = tuple(Fraction(c) for c in f.coeffs)
    on_circle, reason = _unit_circle_roots(coeffs)
    if on_circle:
        return Hyperbolicity(False, mpmath.mpf(0), reason)
    roots = isolate_roots(f, precision)
    with mpmath.workprec(precision):
        cert = min(abs(abs(z) - 1) for z in roots.values())
    return Hyperbolicity(True, cert, reason)


# ---------------------------------------------------------------- irreducibility


def _divisors(n):
    n = abs(n)
    small = [d for d in range(1, int(n**0.5) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def _interpolate(xs, ys):
    """Coefficients (ascending, Fractions) of the polynomial through the points."""
    n = len(xs)
    coef = [Fraction(y) for y in ys]
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    poly = [Fraction(0)] * n
    poly[0] = coef[-1]
    deg = 0
    for k in range(n - 2, -1, -1):
        # poly = poly * (x - xs[k]) + coef[k]
        new = [Fraction(0)] * n
        for i in range(deg + 1):
            new[i + 1] += poly[i]
            new[i] -= xs[k] * poly[i]
        new[0] += coef[k]
        poly = new
        deg += 1
    return qpoly.strip(poly)


def is_irreducible(f):
    """Irreducibility over Q for degree <= 6: rational roots, then Kronecker's search."""
    d = f.degree
    if d > 6:
        raise DegreeTooLarge(f"irreducibility test limited to degree 6, got {d}")
    if d <= 1:
        return True
    a0, ad = f.constant, f.leading
    for p in _divisors(a0):
        for q in _divisors(ad):
            for s in (1, -1):
                if f(Fraction(s * p, q)) == 0:
                    return False
    if d <= 3:
        return True
    fq = tuple(Fraction(c) for c in f.coeffs)
    pts = sorted(range(-12, 13), key=lambda t: (abs(f(t)), abs(t)))
    for k in range(2, d // 2 + 1):
        xs = pts[: k + 1]
        choices = [_divisors(f(t)) for t in xs]
        for combo in itertools.product(*choices):
            for signs in itertools.product((1, -1), repeat=k):
                ys = [combo[0]] + [s * v for s, v in zip(signs, combo[1:])]
                g = _interpolate(xs, ys)
                if qpoly.degree(g) != k or any(c.denominator != 1 for c in g):
                    continue
                if ad % int(g[-1]) or a0 % int(g[0]):
                    continue
                if not qpoly.divmod_(fq, g)[1]:
                    return False
    return True


# ---------------------------------------------------------------- Newton polygons


def newton_polygon(f, p):
    """Sides (slope, length) of the lower convex hull of {(i, v_p(a_i))}.

    A side of slope m carries ``length`` roots of p-adic valuation -m.
    """
    pts = [(i, valuation(a, p)) for i, a in enumerate(f.coeffs) if a != 0]
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop hull[-1] when it lies on or above the segment hull[-2] -> pt
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return [
        (Fraction(y2 - y1, x2 - x1), x2 - x1) for (x1, y1), (x2, y2) in zip(hull, hull[1:])
    ]


def prime_factors(n):
    n, out, q = abs(n), [], 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


def hensel_roots(f, p, slope, digits=DEFAULT_DIGITS):
    """p-adic roots of f on the Newton side of the given (integer) slope.

    Returns one ``PadicNumber`` per root when the residual polynomial splits
    into distinct linear factors mod p; raises ``HenselFailure`` otherwise.
    """
    if slope.denominator != 1:
        raise HenselFailure(f"side of slope {slope} at p={p} is ramified")
    w = -int(slope)
    scaled = [Fraction(a) * Fraction(p) ** (w * i) for i, a in enumerate(f.coeffs)]
    c = min(valuation(s, p) for s in scaled if s != 0)
    ints = [s / Fraction(p) ** c for s in scaled]
    assert all(s.denominator == 1 for s in ints)
    ints = [int(s) for s in ints]
    length = dict(newton_polygon(f, p))[slope]
    red = [a % p for a in ints]
    dred = [(i * a) % p for i, a in enumerate(red)][1:]

    def ev(poly, x, mod):
        acc = 0
        for a in reversed(poly):
            acc = (acc * x + a) % mod
        return acc

    units = [u for u in range(1, p) if ev(red, u, p) == 0]
    if len(units) != length or any(ev(dred, u, p) == 0 for u in units):
        raise HenselFailure(f"residual polynomial at p={p}, slope {slope} is not a product of distinct linear factors")
    work = digits + 8
    dints = [i * a for i, a in enumerate(ints)][1:]
    roots = []
    for u in units:
        prec = 1
        while prec < work:
            prec = min(2 * prec, work)
            m = p**prec
            u = (u - ev(ints, u, m) * pow(ev(dints, u, m), -1, m)) % m
        roots.append(PadicNumber(p, w, u % p**digits, digits))
    return roots


# ---------------------------------------------------------------- Pisot


@dataclass(frozen=True)
class PisotReport:
    side: str  # "direct", "reciprocal" or "none"
    beta: Optional[mpmath.mpf] = None
    beta_radius: Optional[mpmath.mpf] = None
    is_unit: bool = False
    monic_poly: Optional[AssociatedPoly] = None

    @property
    def is_pisot(self):
        return self.side != "none"

    def to_json(self, digits=30):
        if not self.is_pisot:
            return {"side": "none"}
        return {
            "side": self.side,
            "beta": mpmath.nstr(self.beta, digits),
            "beta_radius": mpmath.nstr(self.beta_radius, 3),
            "is_unit": self.is_unit,
            "monic_polynomial": list(self.monic_poly.coeffs),
        }


def _pisot_root(g, precision):
    """The Pisot root of monic g, or None."""
    rs = isolate_roots(g, precision)
    big = [(z, r) for (z, m), r in zip(rs.roots, rs.radii) if abs(z) + r >= 1]
    if len(big) != 1 or any(m > 1 for _, m in rs.roots):
        return None
    z, r = big[0]
    if mpmath.im(z) != 0 or mpmath.re(z) - r <= 1:
        return None
    if any(abs(w) + rr >= 1 for (w, _), rr in zip(rs.roots, rs.radii) if w is not z):
        return None
    return mpmath.re(z), r


def pisot_classify(f, precision=DEFAULT_PRECISION):
    """Whether f or its reciprocal is monic, irreducible and has a Pisot root."""
    candidates = []
    if f.leading == 1:
        candidates.append(("direct", f))
    if abs(f.constant) == 1:
        candidates.append(("reciprocal", reciprocal_poly(f)))
    for side, g in candidates:
        if g.degree > 6 or not is_irreducible(g):
            continue
        found = _pisot_root(g, precision)
        if found is not None:
            beta, rad = found
            return PisotReport(side, beta, rad, abs(g.constant) == 1, g)
    return PisotReport("none")


# ---------------------------------------------------------------- places


@dataclass(frozen=True)
class ArchPlace:
    root: mpmath.mpc
    modulus: mpmath.mpf
    stable: bool
    is_complex: bool

    kind = "archimedean"

    @property
    def root_count(self):
        return 2 if self.is_complex else 1

    def label(self):
        return f"arch[{mpmath.nstr(self.root, 8)}]"


@dataclass(frozen=True)
class PadicPlace:
    prime: int
    slope: Fraction
    root_count: int
    stable: bool
    root: Optional[PadicNumber] = None

    kind = "padic"

    @property
    def evaluatable(self):
        return self.root is not None

    def label(self):
        return f"{self.prime}-adic[slope {self.slope}]"


@dataclass(frozen=True)
class PlaceClassification:
    f: AssociatedPoly
    archimedean: tuple
    nonarchimedean: tuple
    pisot: PisotReport
    precision: int = DEFAULT_PRECISION
    padic_digits: int = DEFAULT_DIGITS
    hyperbolicity: Optional[Hyperbolicity] = field(default=None, compare=False)

    @property
    def places(self):
        return self.archimedean + self.nonarchimedean

    def stable(self):
        return [P for P in self.places if P.stable]

    def unstable(self):
        return [P for P in self.places if not P.stable]

    def unstable_padic(self):
        return [P for P in self.nonarchimedean if not P.stable]

    def stable_padic(self):
        return [P for P in self.nonarchimedean if P.stable]

    def to_json(self, digits=20):
        rows = []
        for P in self.archimedean:
            rows.append(
                {
                    "kind": "archimedean",
                    "root": [mpmath.nstr(mpmath.re(P.root), digits), mpmath.nstr(mpmath.im(P.root), digits)],
                    "modulus": mpmath.nstr(P.modulus, digits),
                    "root_count": P.root_count,
                    "tag": "stable" if P.stable else "unstable",
                }
            )
        for P in self.nonarchimedean:
            rows.append(
                {
                    "kind": "padic",
                    "prime": P.prime,
                    "newton_slope": str(P.slope),
                    "root_count": P.root_count,
                    "tag": "stable" if P.stable else "unstable",
                    "evaluatable": P.evaluatable,
                    "root": P.root.to_json() if P.root is not None else None,
                }
            )
        return rows


def classify_places(f, precision=DEFAULT_PRECISION, padic_digits=DEFAULT_DIGITS):
    """Stable and unstable places of Q(root of f)."""
    hyp = is_hyperbolic(f)
    if not hyp:
        raise NotHyperbolic(f"{f} is not hyperbolic ({hyp.reason})")
    if not is_irreducible(f):
        raise NotIrreducible(f"{f} is reducible over Q")
    rs = isolate_roots(f, precision)
    arch = []
    with mpmath.workprec(precision):
        for z, _ in rs.roots:
            if mpmath.im(z) < 0:
                continue
            arch.append(ArchPlace(z, abs(z), abs(z) < 1, mpmath.im(z) != 0))
    nonarch = []
    for p in sorted(set(prime_factors(f.constant)) | set(prime_factors(f.leading))):
        for slope, length in newton_polygon(f, p):
            if slope == 0:
                continue
            stable = slope < 0
            try:
                for r in hensel_roots(f, p, slope, padic_digits):
                    nonarch.append(PadicPlace(p, slope, 1, stable, r))
            except HenselFailure:
                nonarch.append(PadicPlace(p, slope, length, stable, None))
    pisot = pisot_classify(f, precision)
    return PlaceClassification(f, tuple(arch), tuple(nonarch), pisot, precision, padic_digits, hyp)


# ---------------------------------------------------------------- series evaluation


@dataclass(frozen=True)
class DigitSeries:
    """Integer series sum s_n x^n: finitely many digits plus optional periodic tails.

    ``right_tail = (word, start)`` means s_{start + k} = word[k % len(word)]
    for k >= 0; ``left_tail = (word, end)`` means the block word occupies
    positions end-len(word)+1 .. end and repeats to the left.
    """

    digits: tuple = ()
    left_tail: Optional[tuple] = None
    right_tail: Optional[tuple] = None

    @classmethod
    def finite(cls, d):
        return cls(tuple(sorted((n, c) for n, c in dict(d).items() if c)))

    def digit(self, n):
        for m, c in self.digits:
            if m == n:
                return c
        if self.right_tail is not None:
            word, start = self.right_tail
            if n >= start:
                return word[(n - start) % len(word)]
        if self.left_tail is not None:
            word, end = self.left_tail
            if n <= end:
                return word[(n - end - 1) % len(word)]
        return 0


class Evaluation(NamedTuple):
    value: object
    error: object


def _arch_sum(series, z):
    total = mpmath.mpc(0)
    mag = mpmath.mpf(0)
    for n, c in series.digits:
        t = c * z**n
        total += t
        mag += abs(t)
    if series.right_tail is not None:
        word, start = series.right_tail
        if abs(z) >= 1:
            raise DivergentDirection("right tail at a place where the root is not contracting")
        w = sum(c * z**j for j, c in enumerate(word))
        t = z**start * w / (1 - z ** len(word))
        total += t
        mag += abs(t)
    if series.left_tail is not None:
        word, end = series.left_tail
        if abs(z) <= 1:
            raise DivergentDirection("left tail at a place where the root is not expanding")
        L = len(word)
        w = sum(c * z**j for j, c in enumerate(word))
        t = z ** (end - L + 1) * w / (1 - z ** (-L))
        total += t
        mag += abs(t)
    return total, mag


def _padic_sum(series, rho):
    p = rho.prime
    total = PadicNumber.zero(p, rho.precision + 1000)
    for n, c in series.digits:
        total = total + c * rho**n
    if series.right_tail is not None:
        word, start = series.right_tail
        if rho.valuation <= 0:
            raise DivergentDirection("right tail at a non-contracting p-adic place")
        w = sum((c * rho**j for j, c in enumerate(word)), PadicNumber.zero(p, rho.precision + 1000))
        total = total + rho**start * w / (1 - rho ** len(word))
    if series.left_tail is not None:
        word, end = series.left_tail
        if rho.valuation >= 0:
            raise DivergentDirection("left tail at a non-expanding p-adic place")
        L = len(word)
        w = sum((c * rho**j for j, c in enumerate(word)), PadicNumber.zero(p, rho.precision + 1000))
        total = total + rho ** (end - L + 1) * w / (1 - rho ** (-L))
    return total


def evaluate_series_at_place(series, place, precision=DEFAULT_PRECISION):
    """sum s_n root^n at the place, with an error bound.

    Archimedean results are complex numbers with a rounding bound; p-adic
    results are ``PadicNumber`` values whose error is p^-(absolute precision).
    """
    if isinstance(place, ArchPlace):
        with mpmath.workprec(precision + 16):
            total, mag = _arch_sum(series, place.root)
            err = mag * mpmath.mpf(2) ** (-precision + 4)
        return Evaluation(total, err)
    if not place.evaluatable:
        raise HenselFailure(f"{place.label()} has no lifted root to evaluate at")
    total = _padic_sum(series, place.root)
    return Evaluation(total, Fraction(1, place.prime**max(total.abs_precision, 0)) if total.abs_precision >= 0 else None)
