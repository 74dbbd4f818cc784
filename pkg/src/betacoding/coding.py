"""The natural coding of the beta-shift into the group, made concrete.

A symbol sequence s is sent to the pair (c-, c+) with
c+ = sum_{n >= 1} s_n rho^n at the stable places and
c- = sum_{n <= 0} s_n rho^n at the unstable places, where rho = 1/beta is a
root of the coding polynomial.  Points are taken modulo the diagonal image
of Z[beta, 1/beta], embedded as (-q, q): -q on the unstable block, q on the
stable block.

The fundamental domain used is built from the order Z[beta] rather than the
full ring of integers; every report says so.
"""

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import ceil
from typing import NamedTuple, Optional

import mpmath

from .beta import BetaContext, BetaDigits, fin_add, greedy_expand
from .errors import GapConditionUnmet, NonTerminating, ReductionFailure
from .numfield import FieldElement, ZBetaElement
from .padic import PadicNumber
from .places import ArchPlace, DigitSeries, evaluate_series_at_place
from .polyring import decay_rate, inverse_laurent_coeffs, normalize_associated
from .shift import BiSequence, PeriodicSequence, enumerate_periodic, window_admissible

ORDER_NOTE = "fundamental domain built from the order Z[beta], not the full ring of integers"
MEASURE_NOTE = "uniform path measure on the Parry automaton"


def _context(ctx):
    if isinstance(ctx, BetaContext):
        return ctx
    if isinstance(ctx, str):
        ctx = normalize_associated(ctx)
    return BetaContext(ctx)


# ---------------------------------------------------------------- phase points


@dataclass(frozen=True)
class PhasePoint:
    """Coordinates aligned with ``places``: mpc at archimedean places, PadicNumber at p-adic ones.

    Stable places carry the c+ block, unstable places the c- block.  A
    p-adic place without a lifted root has coordinate None.
    """

    places: tuple
    coords: tuple
    reduced: bool = False

    def arch_vector(self):
        return _arch_vector(self.places, self.coords)

    def is_zero(self, tol=mpmath.mpf("1e-9")):
        for P, c in zip(self.places, self.coords):
            if c is None:
                continue
            if isinstance(P, ArchPlace):
                if abs(c) > tol:
                    return False
            elif not c.is_zero():
                return False
        return True

    def arch_residual(self):
        vals = [abs(c) for P, c in zip(self.places, self.coords) if isinstance(P, ArchPlace)]
        return max(vals) if vals else mpmath.mpf(0)

    def padic_coords(self):
        return [c for P, c in zip(self.places, self.coords) if not isinstance(P, ArchPlace)]

    def to_json(self, digits=20):
        out = []
        for P, c in zip(self.places, self.coords):
            entry = {"place": P.label(), "tag": "stable" if P.stable else "unstable"}
            if c is None:
                entry["value"] = None
            elif isinstance(P, ArchPlace):
                entry["value"] = [mpmath.nstr(mpmath.re(c), digits), mpmath.nstr(mpmath.im(c), digits)]
            else:
                entry["value"] = c.to_json()
            out.append(entry)
        return {"reduced": self.reduced, "coordinates": out, "note": ORDER_NOTE}


def _arch_vector(places, coords):
    v = []
    for P, c in zip(places, coords):
        if isinstance(P, ArchPlace):
            v.append(mpmath.re(c))
            if P.is_complex:
                v.append(mpmath.im(c))
    return v


def embed(q, P, ctx):
    """Image of q in Q(beta) at the place P (beta_P = 1/rho_P)."""
    coeffs = q.coords if isinstance(q, FieldElement) else tuple(Fraction(c) for c in q)
    if isinstance(P, ArchPlace):
        with mpmath.workprec(ctx.precision + 16):
            b = 1 / P.root
            return mpmath.fsum(mpmath.mpf(c.numerator) / c.denominator * b**i for i, c in enumerate(coeffs))
    if P.root is None:
        return None
    b = P.root.inverse()
    total = PadicNumber.zero(P.prime, P.root.abs_precision + 4 * P.root.precision)
    for i, c in enumerate(coeffs):
        if c:
            total = total + c * b**i
    return total


def diagonal_point(q, ctx):
    """The lattice point of q: -q on the unstable block, q on the stable block."""
    ctx = _context(ctx)
    places = ctx.places.places
    coords = []
    with mpmath.workprec(ctx.precision + 16):
        # unary minus rounds to the working precision too
        for P in places:
            v = embed(q, P, ctx)
            coords.append(v if (P.stable or v is None) else -v)
    return PhasePoint(tuple(places), tuple(coords))


def _sub_diagonal(point, q, ctx):
    lat = diagonal_point(q, ctx)
    with mpmath.workprec(ctx.precision + 16):
        coords = tuple(None if a is None or b is None else a - b for a, b in zip(point.coords, lat.coords))
    return PhasePoint(point.places, coords, point.reduced)


# ---------------------------------------------------------------- coding


def _half_series(s, side):
    """DigitSeries for the stable half (n >= 1) or unstable half (n <= 0) of s."""
    if isinstance(s, PeriodicSequence):
        s = s.as_bisequence((0, s.period - 1))
    if side == "stable":
        a = max(1, s.n_max + 1)
        finite = {n: s[n] for n in range(1, a) if s[n]}
        word = tuple(s[a + k] for k in range(len(s.right_tail)))
        tail = (word, a) if any(word) else None
        return DigitSeries(tuple(sorted(finite.items())), right_tail=tail)
    b = min(0, s.n_min - 1)
    finite = {n: s[n] for n in range(b + 1, 1) if s[n]}
    L = len(s.left_tail)
    word = tuple(s[b - L + 1 + k] for k in range(L))
    tail = (word, b) if any(word) else None
    return DigitSeries(tuple(sorted(finite.items())), left_tail=tail)


def code_sequence(s, ctx, reduce=True):
    """PhasePoint of the sequence: c+ at stable places, c- at unstable places."""
    ctx = _context(ctx)
    places = ctx.places.places
    plus, minus = _half_series(s, "stable"), _half_series(s, "unstable")
    coords = []
    for P in places:
        series = plus if P.stable else minus
        if not isinstance(P, ArchPlace) and not P.evaluatable:
            coords.append(None)
            continue
        coords.append(evaluate_series_at_place(series, P, ctx.precision).value)
    point = PhasePoint(tuple(places), tuple(coords))
    return reduce_fundamental(point, ctx) if reduce else point


def exact_halves(s, ctx):
    """(c-, c+) as exact elements of Q(beta): geometric tails summed as rational functions."""
    ctx = _context(ctx)
    out = []
    for side in ("unstable", "stable"):
        series = _half_series(s, side)
        total = ctx.field.zero
        for n, c in series.digits:
            total = total + c * ctx.power(-n)
        if series.right_tail is not None:
            word, start = series.right_tail
            w = sum((c * ctx.power(-j) for j, c in enumerate(word)), ctx.field.zero)
            total = total + ctx.power(-start) * w / (1 - ctx.power(-len(word)))
        if series.left_tail is not None:
            word, end = series.left_tail
            L = len(word)
            w = sum((c * ctx.power(-j) for j, c in enumerate(word)), ctx.field.zero)
            total = total + ctx.power(-(end - L + 1)) * w / (1 - ctx.power(L))
        out.append(total)
    return tuple(out)


def same_image(s, t, ctx):
    """Exact test: s and t code to the same point of the group."""
    (m1, p1), (m2, p2) = exact_halves(s, ctx), exact_halves(t, ctx)
    dp, dm = p1 - p2, m1 - m2
    return (dp + dm).is_zero() and ZBetaElement.from_element(dp) is not None


# ---------------------------------------------------------------- reduction


def _arch_basis(ctx):
    """Columns: arch vectors of the lattice points of beta^i, i < d."""
    cached = ctx.__dict__.get("_arch_basis")
    if cached is not None:
        return cached
    places = ctx.places.places
    cols = []
    with mpmath.workprec(ctx.precision + 16):
        for i in range(ctx.degree):
            pt = diagonal_point(ctx.power(i), ctx)
            cols.append(_arch_vector(places, pt.coords))
        B = mpmath.matrix(len(cols[0]), len(cols))
        for j, col in enumerate(cols):
            for i, v in enumerate(col):
                B[i, j] = v
    ctx.__dict__["_arch_basis"] = B
    return B


def _padic_principal_part(point, ctx):
    """q in Z[beta, 1/beta] with the unstable p-adic coordinates of point + q integral."""
    todo = []
    for P, c in zip(point.places, point.coords):
        if isinstance(P, ArchPlace) or c is None or P.stable:
            continue
        if not c.is_zero() and c.valuation < 0:
            todo.append((P, c))
    if not todo:
        return None
    k = 0
    for P, c in todo:
        e = P.root.inverse().valuation
        k = max(k, ceil(-c.valuation / e))
    state = []
    for P, c in todo:
        b = P.root.inverse()
        state.append([P, b, -(c * b**k), b.valuation])
    digits = []
    for _ in range(k):
        # one integer digit per step, congruent to every u_P modulo p^e_P
        moduli = {}
        for P, b, u, e in state:
            m, r = P.prime**e, u.residue(e)
            prev = moduli.get(P.prime)
            if prev is not None:
                pm, pr = prev
                if (r - pr) % min(m, pm):
                    raise ReductionFailure(f"incompatible digits at two places over {P.prime}")
                if m > pm:
                    moduli[P.prime] = (m, r)
            else:
                moduli[P.prime] = (m, r)
        c, mod = 0, 1
        for m, r in moduli.values():
            # Chinese remainder across distinct primes
            t = ((r - c) * pow(mod, -1, m)) % m
            c, mod = c + mod * t, mod * m
        digits.append(c)
        for entry in state:
            entry[2] = (entry[2] - c) / entry[1]
    q = ctx.field.zero
    for j, c in enumerate(digits):
        q = q + c * ctx.power(j - k)
    return q


def reduce_fundamental(point, ctx):
    """Subtract a lattice point so p-adic coordinates are integral and the archimedean
    block lies in the centred parallelepiped of Z[beta]."""
    ctx = _context(ctx)
    q1 = _padic_principal_part(point, ctx)
    if q1 is not None:
        # unstable coordinates gain q1, stable ones lose it
        point = _sub_diagonal(point, q1, ctx)
    B = _arch_basis(ctx)
    w = point.arch_vector()
    with mpmath.workprec(ctx.precision + 16):
        y = mpmath.lu_solve(B, mpmath.matrix(w))
        r = [int(mpmath.floor(y[i] + mpmath.mpf(1) / 2)) for i in range(len(w))]
    if any(r):
        point = _sub_diagonal(point, ctx.field(tuple(Fraction(x) for x in r)), ctx)
    return PhasePoint(point.places, point.coords, True)


# ---------------------------------------------------------------- homoclinic point


@dataclass(frozen=True)
class HomoclinicSeq:
    """Coefficients of 1/f on the unit annulus over a window."""

    coeffs: dict
    window: tuple
    decay_rate: mpmath.mpf
    tail_bound: mpmath.mpf

    def __getitem__(self, k):
        return self.coeffs.get(k, mpmath.mpf(0))

    def mod1(self):
        return {k: v - mpmath.floor(v) for k, v in self.coeffs.items()}

    def convolution_defect(self, f, margin=None):
        """max |(f * e)_k - delta_k| over the window interior."""
        lo, hi = self.window
        m = f.degree if margin is None else margin
        worst = mpmath.mpf(0)
        for k in range(lo + m, hi + 1):
            v = mpmath.fsum(a * self[k - i] for i, a in enumerate(f.coeffs))
            worst = max(worst, abs(v - (1 if k == 0 else 0)))
        return worst


def homoclinic_fundamental(f, window, precision=128):
    """The fundamental homoclinic point: coefficients of 1/f over ``window``."""
    if isinstance(f, str):
        f = normalize_associated(f)
    w = inverse_laurent_coeffs(f, window, precision)
    return HomoclinicSeq(dict(w.coeffs), tuple(window), decay_rate(f), w.tail_bound)


def _padic_frac(x):
    """Fractional part {x}_p in Z[1/p] ∩ [0, 1)."""
    if x.is_zero() or x.valuation >= 0:
        return Fraction(0)
    m = x.prime ** (-x.valuation)
    return Fraction(x.unit % m, m)


def orbit_coordinates(point, ctx, ks):
    """Coordinates x_k (mod 1) of the point of the solenoid represented by ``point``.

    x_k = sum over stable archimedean places of tr(c rho^(-k-1) / f'(rho))
          - the same over unstable archimedean places
          + the p-adic fractional parts at unstable p-adic places.
    """
    ctx = _context(ctx)
    f = ctx.coding_poly
    fp = f.derivative()
    out = {}
    with mpmath.workprec(ctx.precision + 16):
        for k in ks:
            acc = mpmath.mpf(0)
            for P, c in zip(point.places, point.coords):
                if c is None:
                    continue
                if isinstance(P, ArchPlace):
                    rho = P.root
                    dv = mpmath.polyval(list(reversed(fp)), rho)
                    term = c * rho ** (-k - 1) / dv
                    val = 2 * mpmath.re(term) if P.is_complex else mpmath.re(term)
                    acc += val if P.stable else -val
                else:
                    rho = P.root
                    dv = sum((a * rho**i for i, a in enumerate(fp)), PadicNumber.zero(P.prime, rho.abs_precision + 200))
                    fr = _padic_frac(c * rho ** (-k - 1) / dv)
                    acc += mpmath.mpf(fr.numerator) / fr.denominator
            out[k] = acc - mpmath.floor(acc)
    return out


# ---------------------------------------------------------------- kernel


def periodic_halves(seq, ctx):
    """Exact (c-, c+) of a periodic sequence as rational functions of beta."""
    return exact_halves(seq, ctx)


def in_kernel(seq, ctx):
    """Zero-tolerance test: c+ in Z[beta, 1/beta] and c- = -c+."""
    minus, plus = periodic_halves(seq, ctx)
    return (minus + plus).is_zero() and ZBetaElement.from_element(plus) is not None


def kernel_periodic(ctx, max_period=6):
    """Admissible periodic sequences (all phases) coding to the identity."""
    ctx = _context(ctx)
    ctx.require_pisot()
    return [s for s in enumerate_periodic(ctx.parry, max_period) if in_kernel(s, ctx)]


# ---------------------------------------------------------------- sampling


def _path_counts(A, length):
    """counts[k][s] = number of admissible words of length k readable from state s."""
    counts = [[1] * A.n_states]
    for _ in range(length):
        prev = counts[-1]
        counts.append([
            sum(prev[t] for a in range(A.alphabet_max + 1) if (t := A.step(s, a)) is not None)
            for s in range(A.n_states)
        ])
    return counts


def sample_admissible(A, length, rng, counts=None):
    """A uniformly random admissible word of the given length (all words equally likely)."""
    counts = counts or _path_counts(A, length)
    s, word = A.initial, []
    for k in range(length, 0, -1):
        x = rng.randrange(counts[k][s])
        for a in range(A.alphabet_max + 1):
            t = A.step(s, a)
            if t is None:
                continue
            if x < counts[k - 1][t]:
                word.append(a)
                s = t
                break
            x -= counts[k - 1][t]
    return tuple(word)


def _dstar_tail_rewrite(w, lo, pd):
    """w with its last nonzero digit lowered by one and followed by d*(1): the same value."""
    last = max(i for i, d in enumerate(w) if d)
    digits = list(w[: last + 1])
    digits[last] -= 1
    digits.extend(pd.dstar_pre)
    return BiSequence(lo, tuple(digits), (0,), pd.dstar_period)


class Collision(NamedTuple):
    first: object
    second: object
    kind: str  # "kernel-explained" or "unexplained"
    injected: bool


@dataclass(frozen=True)
class CollisionReport:
    samples: int
    window: tuple
    epsilon: float
    distinct_points: int
    collisions: tuple
    near_misses: int
    injected: int
    injected_detected: int
    seed: int

    @property
    def unexplained(self):
        return sum(1 for c in self.collisions if c.kind == "unexplained")

    @property
    def kernel_explained(self):
        return sum(1 for c in self.collisions if c.kind == "kernel-explained")

    def to_json(self):
        return {
            "samples": self.samples,
            "window": list(self.window),
            "epsilon": self.epsilon,
            "seed": self.seed,
            "distinct_points": self.distinct_points,
            "collisions": len(self.collisions),
            "kernel_explained": self.kernel_explained,
            "unexplained": self.unexplained,
            "near_misses": self.near_misses,
            "injected_witnesses": self.injected,
            "injected_detected": self.injected_detected,
            "examples": [
                {"first": str(c.first), "second": str(c.second), "kind": c.kind, "injected": c.injected}
                for c in self.collisions[:10]
            ],
            "measure": MEASURE_NOTE,
            "note": ORDER_NOTE,
        }


def _tail_kind_ok(word, pd, kernel_words):
    """Tails allowed in a kernel-explained identification."""
    if not any(word):
        return True
    rot = [tuple(pd.dstar_period[i:] + pd.dstar_period[:i]) for i in range(len(pd.dstar_period))]
    P = len(word)
    for r in rot + kernel_words:
        if len(r) and P % len(r) == 0 and any(word == (r[i:] + r[:i]) * (P // len(r)) for i in range(len(r))):
            return True
    return False


def _bin_key(point, ctx, epsilon, kdigits):
    arch = tuple(int(mpmath.floor(v / epsilon)) for v in point.arch_vector())
    padic = tuple(
        (c.prime, c.residue(kdigits)) if c is not None and c.valuation >= 0 else None for c in point.padic_coords()
    )
    return arch, padic


def _sample_chunk(args):
    ctx, length, lo, seed, n = args
    rng = random.Random(seed)
    A = ctx.automaton
    counts = _path_counts(A, length)
    return [BiSequence(lo, sample_admissible(A, length, rng, counts)) for _ in range(n)]


CHUNK = 50


def almost_one_one_sample(ctx, n_samples=500, window=(-12, 12), epsilon=1e-6, seed=0, inject=True, threads=1):
    """Code random admissible windows, look for distinct sequences with equal images.

    Candidate pairs come from an epsilon grid on the reduced coordinates,
    searched across neighbouring cells and the 3^dim lattice translates at
    the faces of the domain; every candidate is then decided exactly.
    """
    ctx = _context(ctx)
    ctx.require_pisot()
    lo, hi = window
    if hi < lo:
        raise ValueError(f"empty window [{lo}, {hi}]")
    length = hi - lo + 1
    pd = ctx.parry
    jobs = []
    for i in range(0, n_samples, CHUNK):
        jobs.append((ctx, length, lo, (seed << 20) + i // CHUNK, min(CHUNK, n_samples - i)))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            chunks = list(ex.map(_sample_chunk, jobs))
    else:
        chunks = [_sample_chunk(j) for j in jobs]
    seqs = [s for chunk in chunks for s in chunk]

    injected_ids = []
    if inject:
        kernel = [k for k in kernel_periodic(ctx, 4) if any(k.period_word)]
        if kernel:
            injected_ids.append((len(seqs), len(seqs) + 1))
            seqs.extend([BiSequence.zero(window), kernel[0].as_bisequence(window)])
        base = next((i for i, s in enumerate(seqs[:n_samples]) if any(s.digits)), None)
        if base is not None:
            injected_ids.append((base, len(seqs)))
            seqs.append(_dstar_tail_rewrite(seqs[base].digits, lo, pd))

    points = [code_sequence(s, ctx) for s in seqs]
    p_min = min((P.prime for P in ctx.places.unstable_padic()), default=2)
    kdigits = max(1, ceil(mpmath.log(1 / mpmath.mpf(epsilon)) / mpmath.log(p_min)))
    grid = {}
    for idx, pt in enumerate(points):
        grid.setdefault(_bin_key(pt, ctx, epsilon, kdigits), []).append(idx)

    B = _arch_basis(ctx)
    dim = B.rows
    translates = []
    for eps in product((-1, 0, 1), repeat=B.cols):
        translates.append([sum(B[i, j] * eps[j] for j in range(B.cols)) for i in range(dim)])
    kernel_words = [k.period_word for k in kernel_periodic(ctx, 4) if any(k.period_word)]

    candidates = set()
    for idx, pt in enumerate(points):
        arch = pt.arch_vector()
        _, padic = _bin_key(pt, ctx, epsilon, kdigits)
        for tr in translates:
            shifted = [a + t for a, t in zip(arch, tr)]
            base = [int(mpmath.floor(v / epsilon)) for v in shifted]
            for off in product((-1, 0, 1), repeat=dim):
                key = (tuple(b + o for b, o in zip(base, off)), padic)
                for jdx in grid.get(key, ()):
                    if jdx > idx:
                        candidates.add((idx, jdx))

    collisions, near = [], 0
    injected_pairs = set(injected_ids)
    for i, j in sorted(candidates):
        s, t = seqs[i], seqs[j]
        if s == t:
            continue
        if not same_image(s, t, ctx):
            near += 1
            continue
        tails_ok = all(_tail_kind_ok(x, pd, kernel_words) for x in (s.left_tail, s.right_tail, t.left_tail, t.right_tail))
        kind = "kernel-explained" if tails_ok else "unexplained"
        collisions.append(Collision(s, t, kind, (i, j) in injected_pairs))
    detected = sum(1 for c in collisions if c.injected and c.kind == "kernel-explained")
    distinct = len(set(_bin_key(p, ctx, epsilon, kdigits) for p in points[: n_samples]))
    return CollisionReport(n_samples, tuple(window), epsilon, distinct, tuple(collisions), near, len(injected_ids), detected, seed)


# ---------------------------------------------------------------- PV decay


@dataclass(frozen=True)
class PVReport:
    distances: tuple  # (n, mpf) pairs
    fitted_rate: Optional[mpmath.mpf]
    expected_rate: Optional[mpmath.mpf]
    constant: Optional[mpmath.mpf]
    verdict: bool

    def to_json(self):
        s = lambda x: None if x is None else mpmath.nstr(x, 12)
        return {
            "distances": [[n, s(d)] for n, d in self.distances],
            "fitted_log_rate": s(self.fitted_rate),
            "expected_log_rate": s(self.expected_rate),
            "constant": s(self.constant),
            "verdict": "pass" if self.verdict else "fail",
        }


def pv_check(ctx, t=1, N=30, tolerance=0.05):
    """Distances ||t beta^n|| for n = 1..N against the largest conjugate modulus."""
    ctx = _context(ctx)
    ctx.require_pisot()
    t = ctx.element(t)
    dist = []
    x = t
    for n in range(1, N + 1):
        x = x * ctx.beta
        dist.append((n, x.nearest_distance().to_mpf(ctx.precision)))
    conj = [abs(1 / P.root) for P in ctx.places.archimedean if not P.stable]
    lam = max(conj) if conj else None
    expected = mpmath.log(lam) if lam else None
    pts = [(n, mpmath.log(d)) for n, d in dist if d > 0]
    if not pts:
        return PVReport(tuple(dist), None, expected, mpmath.mpf(0), True)
    if len(pts) == 1:
        return PVReport(tuple(dist), None, expected, None, False)
    mx = mpmath.fsum(n for n, _ in pts) / len(pts)
    my = mpmath.fsum(y for _, y in pts) / len(pts)
    slope = mpmath.fsum((n - mx) * (y - my) for n, y in pts) / mpmath.fsum((n - mx) ** 2 for n, _ in pts)
    C = mpmath.exp(my - slope * mx)
    ok = expected is not None and abs(slope - expected) <= tolerance * abs(expected)
    if ok:
        C = max(d / lam**n for n, d in dist)
    return PVReport(tuple(dist), slope, expected, C, ok)


# ---------------------------------------------------------------- additive flow


def _segments(pos, gap):
    """Group the support positions into runs separated by >= gap zeros."""
    segs = []
    for k in sorted(pos):
        if segs and k - segs[-1][1] - 1 < gap:
            segs[-1][1] = k
        else:
            segs.append([k, k])
    return segs


def additive_flow_step(s, t, ctx, gap=None):
    """s plus the greedy expansion of t, added block by block with fin_add.

    Blocks of s are runs separated by fewer than ``gap`` zeros.  t is added
    to the blocks its expansion comes within ``gap`` of; when the sum spills
    to within ``gap`` of a further block, that block joins the addition.
    Sequences with nonzero tails need ``gap`` zeros at both window ends, and
    the result must be admissible; otherwise GapConditionUnmet is raised.
    """
    ctx = _context(ctx)
    if gap is None:
        gap = ctx.carry_gap
    texp = greedy_expand(ctx.element(t), ctx, depth=ctx.precision)
    if not texp.remainder.is_zero():
        raise NonTerminating(f"{t} has no finite expansion", witness=t)
    tpos = texp.digits.positions()
    if not tpos:
        return s
    if not s.is_finite():
        flank = s.digits[:gap] + s.digits[-gap:]
        if len(s.digits) < 2 * gap or any(flank):
            raise GapConditionUnmet(f"window needs {gap} zeros at each end next to the tails")
    # sequence position n carries beta^-n, as does BetaDigits position n
    pos = {n: d for n, d in zip(range(s.n_min, s.n_max + 1), s.digits) if d}
    segs = _segments(pos, gap)
    lo, hi = min(tpos), max(tpos)
    used = []
    while True:
        grew = False
        for g in segs:
            if g not in used and g[1] >= lo - gap and g[0] <= hi + gap:
                used.append(g)
                grew = True
        span_lo = min([min(tpos)] + [g[0] for g in used])
        span_hi = max([max(tpos)] + [g[1] for g in used])
        block = BetaDigits.from_positions({k: v for k, v in pos.items() if span_lo <= k <= span_hi})
        total, _ = fin_add(block, texp.digits, ctx)
        new = total.positions()
        lo, hi = (min(new), max(new)) if new else (span_lo, span_hi)
        if not grew and all(g in used or g[1] < lo - gap or g[0] > hi + gap for g in segs):
            break
    out = {k: v for k, v in pos.items() if not span_lo <= k <= span_hi}
    out.update(new)
    if not s.is_finite() and out and (min(out) < s.n_min + gap or max(out) > s.n_max - gap):
        raise GapConditionUnmet("the sum reaches the window ends")
    wlo = min([s.n_min] + list(out))
    whi = max([s.n_max] + list(out))
    result = BiSequence(wlo, tuple(out.get(k, 0) for k in range(wlo, whi + 1)), s.left_tail, s.right_tail)
    if s.is_finite() or (wlo, whi) == (s.n_min, s.n_max):
        if not window_admissible(result, ctx.parry):
            raise GapConditionUnmet("blockwise sum is not admissible; the zero gaps are too short")
    return result
