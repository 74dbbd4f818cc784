"""Dense univariate polynomials over the rationals.

Polynomials are tuples of coefficients in ascending order with no trailing
zeros; the zero polynomial is the empty tuple.  Coefficients may be ``int``
or ``Fraction``; results always hold ``Fraction`` values.
"""

from fractions import Fraction
from math import gcd, lcm


def strip(p):
    p = [Fraction(c) for c in p]
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def degree(p):
    return len(p) - 1


def add(p, q):
    n = max(len(p), len(q))
    return strip([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def sub(p, q):
    return add(p, scale(q, -1))


def scale(p, c):
    return strip([c * a for a in p])


def mul(p, q):
    if not p or not q:
        return ()
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return strip(out)


def divmod_(p, q):
    q = strip(q)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(strip(p))
    dq = len(q) - 1
    if len(r) - 1 < dq:
        return (), tuple(r)
    quot = [Fraction(0)] * (len(r) - dq)
    lead = q[-1]
    for k in range(len(r) - 1 - dq, -1, -1):
        c = r[k + dq] / lead
        quot[k] = c
        if c:
            for j in range(dq + 1):
                r[k + j] -= c * q[j]
    return strip(quot), strip(r[:dq])


def monic(p):
    p = strip(p)
    return scale(p, 1 / p[-1]) if p else p


def gcd_(p, q):
    p, q = strip(p), strip(q)
    while q:
        p, q = q, divmod_(p, q)[1]
    return monic(p)


def deriv(p):
    return strip([i * p[i] for i in range(1, len(p))])


def evaluate(p, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def squarefree(p):
    """Squarefree part of p, made monic."""
    g = gcd_(p, deriv(p))
    return monic(divmod_(p, g)[0]) if degree(g) > 0 else monic(p)


def reverse(p):
    """x^deg(p) * p(1/x)."""
    p = strip(p)
    while p and p[0] == 0:
        p = p[1:]
    return tuple(reversed(p))


def primitive_int(p):
    """Scale a rational polynomial to a primitive integer one with positive lead."""
    p = strip(p)
    if not p:
        return ()
    den = lcm(*[c.denominator for c in p])
    ints = [int(c * den) for c in p]
    g = 0
    for c in ints:
        g = gcd(g, c)
    ints = [c // g for c in ints]
    if ints[-1] < 0:
        ints = [-c for c in ints]
    return tuple(ints)


def sturm_count(p, a, b):
    """Number of distinct real roots of p in the half-open interval (a, b]."""
    p = strip(p)
    if degree(p) < 1:
        return 0
    seq = [p, deriv(p)]
    while True:
        r = divmod_(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append(scale(r, -1))

    def changes(x):
        signs = [evaluate(s, x) for s in seq]
        signs = [s for s in signs if s != 0]
        return sum(1 for u, v in zip(signs, signs[1:]) if (u > 0) != (v > 0))

    return changes(a) - changes(b)
