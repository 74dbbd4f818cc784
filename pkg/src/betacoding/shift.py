"""The two-sided beta-shift at desk scale: windowed sequences, periodic points, the odometer."""

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

import mpmath
import numpy as np

from .beta import BetaContext, BetaDigits, ParryData, build_automaton
from .errors import SearchCapExceeded


@lru_cache(maxsize=64)
def _automaton(pd):
    return build_automaton(pd)


def _tail_states(A, word, state):
    """States reached at block boundaries while reading word repeatedly: (transient, cycle)."""
    seen, order = {}, []
    s = state
    while s not in seen:
        seen[s] = len(order)
        order.append(s)
        s = A.run(word, s)
        if s is None:
            return None
    return order[: seen[s]], order[seen[s]:]


def _accepts_right_tail(A, state, word):
    """Whether the infinite word^inf is readable from state."""
    return _tail_states(A, word, state) is not None


@dataclass(frozen=True)
class BiSequence:
    """Digits s_n on [n_min, n_max] with periodic tails outside.

    The left tail word repeats leftwards and ends at n_min - 1; the right
    tail word starts at n_max + 1.  Both default to zeros.
    """

    n_min: int
    digits: tuple
    left_tail: tuple = (0,)
    right_tail: tuple = (0,)

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        object.__setattr__(self, "left_tail", tuple(self.left_tail) or (0,))
        object.__setattr__(self, "right_tail", tuple(self.right_tail) or (0,))

    @classmethod
    def from_window(cls, window, digits, **kw):
        lo, hi = window
        if hi < lo:
            raise ValueError(f"empty window [{lo}, {hi}]")
        if len(digits) != hi - lo + 1:
            raise ValueError("digit count does not match the window")
        return cls(lo, tuple(digits), **kw)

    @classmethod
    def zero(cls, window=(0, 0)):
        return cls.from_window(window, (0,) * (window[1] - window[0] + 1))

    @property
    def n_max(self):
        return self.n_min + len(self.digits) - 1

    @property
    def window(self):
        return (self.n_min, self.n_max)

    def __getitem__(self, n):
        if self.n_min <= n <= self.n_max:
            return self.digits[n - self.n_min]
        if n < self.n_min:
            w = self.left_tail
            return w[(n - self.n_min) % len(w)]
        w = self.right_tail
        return w[(n - self.n_max - 1) % len(w)]

    def shift(self, k=1):
        """(sigma^k s)_n = s_{n+k}."""
        return BiSequence(self.n_min - k, self.digits, self.left_tail, self.right_tail)

    def is_finite(self):
        return not any(self.left_tail) and not any(self.right_tail)

    def __str__(self):
        lt = "".join(map(str, self.left_tail))
        rt = "".join(map(str, self.right_tail))
        body = "".join(map(str, self.digits))
        return f"...({lt})|{body}|({rt})... @{self.n_min}"


def window_admissible(s, pd):
    """Every factor of the bi-infinite sequence is admissible."""
    A = _automaton(pd)
    if any(not 0 <= d <= A.alphabet_max for d in s.digits + s.left_tail + s.right_tail):
        return False
    tails = _tail_states(A, s.left_tail, A.initial)
    if tails is None:
        return False
    for state in tails[1]:
        t = A.run(s.digits, state)
        if t is None or not _accepts_right_tail(A, t, s.right_tail):
            return False
    return True


@dataclass(frozen=True, order=True)
class PeriodicSequence:
    """s_n = period_word[(n + phase) mod P]; the word is a least rotation."""

    period_word: tuple
    phase: int = 0

    @property
    def period(self):
        return len(self.period_word)

    def __getitem__(self, n):
        return self.period_word[(n + self.phase) % self.period]

    def rotated_word(self):
        """The P digits s_0 .. s_{P-1}."""
        return tuple(self[n] for n in range(self.period))

    def shift(self, k=1):
        return PeriodicSequence(self.period_word, (self.phase + k) % self.period)

    def as_bisequence(self, window):
        lo, hi = window
        digits = tuple(self[n] for n in range(lo, hi + 1))
        left = tuple(self[n] for n in range(lo - self.period, lo))
        right = tuple(self[n] for n in range(hi + 1, hi + 1 + self.period))
        return BiSequence(lo, digits, left, right)

    def __str__(self):
        return "(" + "".join(map(str, self.period_word)) + f")^inf@{self.phase}"

    def to_json(self):
        return {"word": "".join(map(str, self.period_word)), "period": self.period, "phase": self.phase}


def least_rotation(word):
    word = tuple(word)
    return min(word[i:] + word[:i] for i in range(len(word))) if word else word


def periodic_admissible(word, pd):
    A = _automaton(pd)
    if any(not 0 <= d <= A.alphabet_max for d in word):
        return False
    return _tail_states(A, tuple(word), A.initial) is not None


def _lyndon_words(n, cap, A):
    """Lyndon words of length n over 0..cap whose prefixes are admissible (Ruskey's recursion)."""
    a = [0] * (n + 1)
    out = []

    def gen(t, p, state):
        if t > n:
            if n % p == 0 and p == n:
                out.append(tuple(a[1:]))
            return
        for j in range(a[t - p], cap + 1):
            nxt = A.step(state, j)
            if nxt is None:
                continue
            a[t] = j
            gen(t + 1, p if j == a[t - p] else t, nxt)

    gen(1, 1, A.initial)
    return out


def enumerate_periodic(pd, max_period):
    """All admissible periodic points of minimal period <= max_period, every phase listed."""
    if max_period > 12:
        raise ValueError("max_period is limited to 12")
    A = _automaton(pd)
    out = []
    for n in range(1, max_period + 1):
        for w in _lyndon_words(n, A.alphabet_max, A):
            if periodic_admissible(w, pd):
                out.extend(PeriodicSequence(w, ph) for ph in range(n))
    return sorted(out, key=lambda s: (s.period, s.period_word, s.phase))


# ---------------------------------------------------------------- odometer


def _as_left_word(s):
    """Left-sided digits, most significant first, ending at position 0."""
    if isinstance(s, BetaDigits):
        if s.is_zero():
            return ()
        if s.end_exponent > 0:
            raise ValueError("odometer acts on sequences supported in n <= 0")
        return s.digits + (0,) * (-s.end_exponent)
    return tuple(s)


def odometer_successor(s, ctx, search_cap=8):
    """The admissible left-sided finite word of least value above that of s.

    Among admissible words of one fixed length the lexicographic and the
    numeric order agree, so the successor is a lexicographic successor at
    length len(s) + 1 (room for a carry into a new leading digit).
    """
    pd = ctx.parry if isinstance(ctx, BetaContext) else ctx
    A = _automaton(pd)
    word = _as_left_word(s)
    if not A.accepts(word):
        raise ValueError(f"{word} is not admissible")
    if search_cap < 1:
        raise SearchCapExceeded("search_cap must allow at least one extra digit")
    w = (0,) + word
    states = [A.initial]
    for a in w:
        states.append(A.step(states[-1], a))
    for i in range(len(w) - 1, -1, -1):
        for a in range(w[i] + 1, A.alphabet_max + 1):
            if A.step(states[i], a) is not None:
                new = w[:i] + (a,) + (0,) * (len(w) - i - 1)
                return BetaDigits(new, -(len(new) - 1))
    raise SearchCapExceeded("no successor found")


# ---------------------------------------------------------------- entropy


class EntropyPair(NamedTuple):
    log_beta: mpmath.mpf
    log_spectral_radius: Optional[float]


def _beta_from_parry(pd):
    """Root > 1 of sum d1_i x^-i = 1, from d(1) (finite or eventually periodic)."""
    if pd.d1_finite:
        coeffs = [1] + [-d for d in pd.d1_pre]
    else:
        # x^m (x^p - 1) = (pre-part)(x^p - 1) + period-part, cleared of denominators
        pre, per = pd.d1_pre, pd.d1_period
        m, p = len(pre), len(per)
        deg = m + p
        poly = [0] * (deg + 1)
        poly[0] += 1
        poly[p] -= 1
        for i, d in enumerate(pre, 1):
            poly[i] -= d
            poly[i + p] += d
        for j, d in enumerate(per, 1):
            poly[m + j] -= d
        coeffs = poly
    roots = np.roots(coeffs)
    guess = max(r.real for r in roots if abs(r.imag) < 1e-9)
    return mpmath.findroot(lambda x: mpmath.polyval(coeffs, x), guess)


def shift_entropy(x, precision=128):
    """log beta and, when an automaton exists, the log of its adjacency spectral radius."""
    with mpmath.workprec(precision):
        if isinstance(x, ParryData):
            log_beta = mpmath.log(_beta_from_parry(x))
            pd = x
        else:
            log_beta = mpmath.log(x.beta_value)
            pd = x.parry if x.is_pisot else None
        if pd is None:
            return EntropyPair(+log_beta, None)
        m = np.array(_automaton(pd).adjacency(), dtype=float)
        rho = max(abs(np.linalg.eigvals(m)))
        return EntropyPair(+log_beta, float(np.log(rho)))
