"""Beta-expansions: greedy digits, Parry data, the admissibility automaton and Fin(beta) addition."""

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple, Optional

import mpmath

from .errors import AlphabetViolation, NonTerminating, NotPisot, ParseError, PeriodCapExceeded
from .numfield import FieldElement, NumberField, ZBetaElement
from .places import classify_places, isolate_roots, pisot_classify
from .polyring import AssociatedPoly, normalize_associated, reciprocal_poly

DEFAULT_PERIOD_CAP = 4096
PADIC_GUARD = 16


# ---------------------------------------------------------------- context


class BetaContext:
    """A real algebraic beta > 1 with exact arithmetic in Q(beta).

    Built from an associated polynomial.  When f or its reciprocal carries a
    Pisot root that root is beta; otherwise beta is the largest real root
    above 1 of f or of its reciprocal, and only the non-Pisot operations
    (greedy expansion, entropy) are available.
    """

    def __init__(self, f, precision=128, padic_digits=64):
        if isinstance(f, str):
            f = normalize_associated(f)
        self.f = f
        self.precision = precision
        self.padic_digits = padic_digits
        self.pisot = pisot_classify(f, precision)
        if self.pisot.is_pisot:
            g, approx = self.pisot.monic_poly.coeffs, self.pisot.beta
        else:
            g, approx = _dominant_real_root(f, precision)
        self.minpoly = tuple(g)
        self.field = NumberField(g, approx)
        self.beta_value = approx
        self._powers = {0: self.field.one}

    @classmethod
    def from_text(cls, text, **kw):
        return cls(normalize_associated(text), **kw)

    @property
    def is_pisot(self):
        return self.pisot.is_pisot

    @property
    def is_unit(self):
        return self.pisot.is_unit

    @property
    def beta(self):
        return self.field.beta

    @property
    def degree(self):
        return self.field.degree

    @cached_property
    def digit_cap(self):
        """ceil(beta) - 1."""
        return self.beta.ceil() - 1

    def power(self, n):
        p = self._powers.get(n)
        if p is None:
            p = self._powers[n] = self.field.power(n)
        return p

    @cached_property
    def coding_poly(self):
        """The side of f whose Pisot-conjugate root is 1/beta."""
        self.require_pisot()
        return self.f if self.pisot.side == "reciprocal" else reciprocal_poly(self.f)

    @cached_property
    def places(self):
        # guard digits so results still hold padic_digits after cancellation
        return classify_places(self.coding_poly, self.precision, self.padic_digits + PADIC_GUARD)

    @cached_property
    def parry(self):
        return parry_data(self)

    @cached_property
    def automaton(self):
        return build_automaton(self.parry)

    @cached_property
    def carry_gap(self):
        """Empirical uniform carry gap G: the largest carry seen in random additions, at least 1."""
        return max(1, finitary_empirical(self, samples=100, seed=0).max_carry)

    def require_pisot(self):
        if not self.is_pisot:
            raise NotPisot(f"{self.f} is not a Pisot automorphism polynomial")

    def element(self, x):
        """Coerce an int, Fraction or coordinate list to an element of Q(beta)."""
        if isinstance(x, FieldElement):
            return x
        if isinstance(x, (int, Fraction)):
            return self.field.from_rational(x)
        return self.field(tuple(Fraction(c) for c in x))

    def zbeta(self, x):
        """Canonical Z[beta, 1/beta] form of x (None if outside, or if beta is not an integer)."""
        if not self.is_pisot:
            return None
        return ZBetaElement.from_element(self.element(x))

    def __repr__(self):
        return f"BetaContext({self.f}, beta~{mpmath.nstr(self.beta_value, 12)})"


def _dominant_real_root(f, precision):
    best = None
    for g in (f, reciprocal_poly(f)):
        rs = isolate_roots(g, precision)
        for z, _ in rs.roots:
            if mpmath.im(z) == 0 and mpmath.re(z) > 1 and (best is None or mpmath.re(z) > best[1]):
                best = (g, mpmath.re(z))
    if best is None:
        raise NotPisot(f"{f} has no real root above 1 on either side")
    g, beta = best
    # assumes the chosen side is irreducible; degree one covers the cases in scope
    return tuple(Fraction(c, g.leading) for c in g.coeffs), beta


# ---------------------------------------------------------------- digits


@dataclass(frozen=True)
class BetaDigits:
    """sum digits[i] * beta^-(start_exponent + i); no leading or trailing zeros."""

    digits: tuple = ()
    start_exponent: int = 0

    def __post_init__(self):
        ds = list(self.digits)
        start = self.start_exponent
        while ds and ds[0] == 0:
            ds.pop(0)
            start += 1
        while ds and ds[-1] == 0:
            ds.pop()
        object.__setattr__(self, "digits", tuple(int(d) for d in ds))
        object.__setattr__(self, "start_exponent", start if ds else 0)

    @classmethod
    def from_positions(cls, d):
        """From {k: digit} where digit multiplies beta^-k."""
        d = {k: v for k, v in d.items() if v}
        if not d:
            return cls()
        lo, hi = min(d), max(d)
        return cls(tuple(d.get(k, 0) for k in range(lo, hi + 1)), lo)

    @classmethod
    def parse(cls, text):
        """Radix-point text such as ``"1.111"``, ``".1"`` or ``""``."""
        s = text.strip()
        if s.count(".") > 1 or any(ch not in "0123456789." for ch in s):
            raise ParseError(f"bad digit string {text!r}")
        whole, _, frac = s.partition(".")
        ds = [int(ch) for ch in whole + frac]
        return cls(tuple(ds), -(len(whole) - 1))

    def is_zero(self):
        return not self.digits

    @property
    def end_exponent(self):
        return self.start_exponent + len(self.digits) - 1

    def positions(self):
        return {self.start_exponent + i: d for i, d in enumerate(self.digits) if d}

    def __str__(self):
        if not self.digits:
            return ""
        if any(d > 9 for d in self.digits):
            raise ValueError("digits above 9 have no single-character form")
        lo, hi = min(self.start_exponent, 1), max(self.end_exponent, 0)
        pos = self.positions()
        whole = "".join(str(pos.get(k, 0)) for k in range(lo, 1))
        frac = "".join(str(pos.get(k, 0)) for k in range(1, hi + 1))
        return whole + ("." + frac if frac else "")


class Expansion(NamedTuple):
    digits: BetaDigits
    remainder: FieldElement  # x - eval(digits), in [0, beta^-depth)


def _leading_exponent(x, ctx):
    """Largest k with beta^k <= x (x > 0)."""
    est = int(mpmath.floor(mpmath.log(x.to_mpf(64)) / mpmath.log(ctx.beta_value)))
    k = est
    while ctx.power(k + 1) <= x:
        k += 1
    while ctx.power(k) > x:
        k -= 1
    return k


def greedy_expand(x, ctx, depth=64):
    """Greedy beta-expansion of x >= 0 at positions <= depth (digit at k multiplies beta^-k)."""
    x = ctx.element(x)
    s = x.sign()
    if s < 0:
        raise ValueError("greedy expansion of a negative number")
    if s == 0:
        return Expansion(BetaDigits(), ctx.field.zero)
    E = _leading_exponent(x, ctx)
    if -E > depth:
        return Expansion(BetaDigits(), x)
    r = x * ctx.power(-(E + 1))
    beta = ctx.beta
    digits = []
    for _ in range(-E, depth + 1):
        r = r * beta
        d = r.floor()
        r = r - d
        digits.append(d)
        if r.is_zero():
            break
    k_last = -E + len(digits) - 1
    return Expansion(BetaDigits(tuple(digits), -E), r * ctx.power(-k_last))


class Evaluation(NamedTuple):
    element: FieldElement
    zbeta: Optional[ZBetaElement]
    value: mpmath.mpf


def eval_exact(digits, ctx):
    total = ctx.field.zero
    for k, d in digits.positions().items():
        total = total + d * ctx.power(-k)
    return total


def eval_digits(digits, ctx, precision=None):
    """Exact value in Q(beta) plus its canonical Z[beta, 1/beta] form and a real value."""
    x = eval_exact(digits, ctx)
    return Evaluation(x, ctx.zbeta(x), x.to_mpf(precision or ctx.precision))


# ---------------------------------------------------------------- Parry data


@dataclass(frozen=True)
class ParryData:
    """Greedy expansion d(1) and quasi-greedy expansion d*(1) = pre (period)^inf."""

    d1_pre: tuple
    d1_period: tuple  # empty when d(1) is finite
    dstar_pre: tuple
    dstar_period: tuple

    @property
    def d1_finite(self):
        return not self.d1_period

    @property
    def d1(self):
        return self.d1_pre if self.d1_finite else None

    @property
    def alphabet_max(self):
        return self.dstar(0)

    def dstar(self, i):
        if i < len(self.dstar_pre):
            return self.dstar_pre[i]
        j = i - len(self.dstar_pre)
        return self.dstar_period[j % len(self.dstar_period)]

    def dstar_prefix(self, n):
        return tuple(self.dstar(i) for i in range(n))

    def to_json(self):
        return {
            "d1": list(self.d1_pre) if self.d1_finite else {"preperiod": list(self.d1_pre), "period": list(self.d1_period)},
            "d1_finite": self.d1_finite,
            "dstar": {"preperiod": list(self.dstar_pre), "period": list(self.dstar_period)},
        }


def parry_data(ctx, period_cap=DEFAULT_PERIOD_CAP):
    """d(1) by exact greedy steps; eventual periodicity detected on exact remainders."""
    if isinstance(ctx, AssociatedPoly) or isinstance(ctx, str):
        ctx = BetaContext(ctx)
    ctx.require_pisot()
    beta = ctx.beta
    seen = {}
    digits = []
    r = ctx.field.one
    while True:
        key = r.coords
        if key in seen:
            start = seen[key]
            pre, period = tuple(digits[:start]), tuple(digits[start:])
            return ParryData(pre, period, pre, period)
        if len(digits) >= period_cap:
            raise PeriodCapExceeded(f"d(1) not periodic within {period_cap} digits")
        seen[key] = len(digits)
        r = r * beta
        d = r.floor()
        r = r - d
        digits.append(d)
        if r.is_zero():
            d1 = tuple(digits)
            return ParryData(d1, (), (), d1[:-1] + (d1[-1] - 1,))


def _check_alphabet(word, cap):
    for a in word:
        if not 0 <= a <= cap:
            raise AlphabetViolation(f"digit {a} outside 0..{cap}")


def is_admissible(word, pd):
    """Every suffix of the word is lexicographically <= the prefix of d*(1) of equal length."""
    word = tuple(word)
    _check_alphabet(word, pd.alphabet_max)
    n = len(word)
    ref = pd.dstar_prefix(n)
    return all(word[i:] <= ref[: n - i] for i in range(n))


# ---------------------------------------------------------------- automaton


@dataclass(frozen=True)
class ParryAutomaton:
    n_states: int
    transitions: dict = field(hash=False)  # (state, digit) -> state
    alphabet_max: int
    initial: int = 0

    def step(self, state, a):
        return self.transitions.get((state, a))

    def run(self, word, state=None):
        s = self.initial if state is None else state
        for a in word:
            s = self.transitions.get((s, a))
            if s is None:
                return None
        return s

    def accepts(self, word):
        return self.run(word) is not None

    def adjacency(self):
        m = [[0] * self.n_states for _ in range(self.n_states)]
        for (s, _), t in self.transitions.items():
            m[s][t] += 1
        return m

    @cached_property
    def is_finite_type(self):
        """No cycle among pairs of distinct states driven by a common word."""
        edges = {}
        for (s, a), t in self.transitions.items():
            for (s2, a2), t2 in self.transitions.items():
                if a == a2 and s < s2 and t != t2:
                    edges.setdefault((s, s2), set()).add((min(t, t2), max(t, t2)))
        colour = {}

        def dfs(u):
            colour[u] = 1
            for v in edges.get(u, ()):
                c = colour.get(v, 0)
                if c == 1 or (c == 0 and dfs(v)):
                    return True
            colour[u] = 2
            return False

        return not any(colour.get(u, 0) == 0 and dfs(u) for u in list(edges))

    def to_json(self):
        return {
            "states": self.n_states,
            "finite_type": self.is_finite_type,
            "transitions": [[s, a, t] for (s, a), t in sorted(self.transitions.items())],
        }


def build_automaton(pd):
    """Minimal deterministic automaton for the admissible words."""
    pre, per = pd.dstar_pre, pd.dstar_period
    n = len(pre) + len(per)
    cap = pd.alphabet_max
    trans = {}
    for i in range(n):
        di = pd.dstar(i)
        for a in range(cap + 1):
            if a < di:
                trans[(i, a)] = 0
            elif a == di:
                trans[(i, a)] = i + 1 if i + 1 < n else len(pre)
    # Moore refinement, with "missing transition" as its own signature value
    block = {s: 0 for s in range(n)}
    while True:
        sigs = {s: (block[s],) + tuple(block.get(trans.get((s, a)), -1) if (s, a) in trans else -1 for a in range(cap + 1)) for s in range(n)}
        ids = {}
        new = {}
        for s in range(n):
            new[s] = ids.setdefault(sigs[s], len(ids))
        if len(ids) == len(set(block.values())):
            break
        block = new
    # renumber blocks in order of first appearance from state 0 (breadth first)
    order, queue = {block[0]: 0}, [0]
    while queue:
        s = queue.pop(0)
        for a in range(cap + 1):
            t = trans.get((s, a))
            if t is not None and block[t] not in order:
                order[block[t]] = len(order)
                queue.append(t)
    mtrans = {}
    for (s, a), t in trans.items():
        if block[s] in order:
            mtrans[(order[block[s]], a)] = order[block[t]]
    return ParryAutomaton(len(order), mtrans, cap)


# ---------------------------------------------------------------- Fin(beta)


class CarrySpan(NamedTuple):
    left: int
    right: int

    @property
    def total(self):
        return max(self.left, self.right)


def fin_add(a, b, ctx, depth_cap=256):
    """Greedy expansion of eval(a) + eval(b), with how far it spills past the inputs' support."""
    x = eval_exact(a, ctx) + eval_exact(b, ctx)
    if x.is_zero():
        return BetaDigits(), CarrySpan(0, 0)
    ends = [d.end_exponent for d in (a, b) if not d.is_zero()]
    starts = [d.start_exponent for d in (a, b) if not d.is_zero()]
    depth = max(ends) + depth_cap
    exp = greedy_expand(x, ctx, depth)
    if not exp.remainder.is_zero():
        raise NonTerminating(f"expansion of {a} + {b} did not terminate by position {depth}", witness=(a, b))
    s = exp.digits
    return s, CarrySpan(max(0, min(starts) - s.start_exponent), max(0, s.end_exponent - max(ends)))


def finitary_sufficient(f_monic):
    """x^n - a_{n-1} x^{n-1} - ... - a_0 with a_{n-1} >= ... >= a_0 >= 1."""
    if isinstance(f_monic, str):
        f_monic = normalize_associated(f_monic)
    if not f_monic.is_monic():
        raise ValueError(f"{f_monic} is not monic")
    a = [-c for c in f_monic.coeffs[:-1]]
    return a[0] >= 1 and all(a[i] <= a[i + 1] for i in range(len(a) - 1))


@dataclass(frozen=True)
class FinitaryReport:
    verdict: bool
    samples: int
    max_carry: int
    max_span: CarrySpan
    failures: tuple = ()

    def to_json(self):
        return {
            "verdict": "pass" if self.verdict else "fail",
            "samples": self.samples,
            "max_carry_gap": self.max_carry,
            "max_left": self.max_span.left,
            "max_right": self.max_span.right,
            "failures": [[str(a), str(b)] for a, b in self.failures],
        }


def random_admissible_word(rng, pd, length):
    """Uniform digits, rejected until admissible."""
    cap = pd.alphabet_max
    while True:
        w = tuple(rng.randint(0, cap) for _ in range(length))
        if is_admissible(w, pd):
            return w


def finitary_empirical(ctx, samples=200, depth=64, seed=0, max_length=8):
    """Add random pairs of finite expansions; every sum must terminate.

    Returns the largest carry observed, an estimate of the uniform gap G.
    """
    rng = random.Random(seed)
    pd = ctx.parry
    worst, span = 0, CarrySpan(0, 0)
    failures = []
    for _ in range(samples):
        pair = []
        for _ in range(2):
            w = random_admissible_word(rng, pd, rng.randint(1, max_length))
            pair.append(BetaDigits(w, rng.randint(-max_length // 2, max_length // 2)))
        try:
            _, cs = fin_add(pair[0], pair[1], ctx, depth_cap=depth)
        except NonTerminating:
            failures.append(tuple(pair))
            continue
        if cs.total > worst:
            worst = cs.total
        span = CarrySpan(max(span.left, cs.left), max(span.right, cs.right))
    return FinitaryReport(not failures, samples, worst, span, tuple(failures))
