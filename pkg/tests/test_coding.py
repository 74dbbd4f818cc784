import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betacoding.beta import BetaContext, greedy_expand
from betacoding.coding import (
    PhasePoint,
    additive_flow_step,
    almost_one_one_sample,
    code_sequence,
    diagonal_point,
    exact_halves,
    homoclinic_fundamental,
    in_kernel,
    kernel_periodic,
    orbit_coordinates,
    pv_check,
    reduce_fundamental,
    same_image,
    sample_admissible,
)
from betacoding.errors import GapConditionUnmet, NonTerminating
from betacoding.numfield import in_zbeta
from betacoding.padic import PadicNumber
from betacoding.places import ArchPlace
from betacoding.polyring import normalize_associated
from betacoding.shift import BiSequence, PeriodicSequence, window_admissible

NAMES = ["binary", "silver", "nonunit"]
TOL = mpmath.mpf("1e-9")


def _ctx(request, name):
    return request.getfixturevalue(name)


def _random_window(rng, ctx, lo=-8, hi=8):
    from betacoding.coding import _path_counts

    A = ctx.automaton
    w = sample_admissible(A, hi - lo + 1, rng, _path_counts(A, hi - lo + 1))
    return BiSequence(lo, w)


def _times_beta(point):
    coords = []
    for P, c in zip(point.places, point.coords):
        if c is None:
            coords.append(None)
        elif isinstance(P, ArchPlace):
            coords.append(c / P.root)
        else:
            coords.append(c * P.root.inverse())
    return PhasePoint(point.places, tuple(coords))


def _close(a, b):
    for P, x, y in zip(a.places, a.coords, b.coords):
        if x is None or y is None:
            continue
        if isinstance(P, ArchPlace):
            if abs(x - y) > TOL:
                return False
        elif not (x - y).is_zero() and (x - y).valuation < 40:
            return False
    return True


def test_zero_sequence_codes_to_zero(binary, silver, nonunit):
    for ctx in (binary, silver, nonunit):
        assert code_sequence(BiSequence.zero((-5, 5)), ctx).is_zero()


def test_all_ones_binary(binary):
    ones = BiSequence(0, (1,), (1,), (1,))
    raw = code_sequence(ones, binary, reduce=False)
    arch = [c for P, c in zip(raw.places, raw.coords) if isinstance(P, ArchPlace)]
    padic = raw.padic_coords()
    assert abs(arch[0] - 1) < 1e-30
    assert padic[0] == PadicNumber.from_rational(-1, 2, 40)
    red = reduce_fundamental(raw, binary)
    assert red.is_zero()
    assert all(c.is_zero() for c in red.padic_coords())


def test_silver_boundary_sequence_is_diagonal(silver):
    # (20) with 2's at odd indices: c+ = 1 and c- = -1 exactly
    s = PeriodicSequence((0, 2), 0)
    assert (s[1], s[2]) == (2, 0)
    minus, plus = exact_halves(s, silver)
    assert plus == 1 and minus == -1
    assert code_sequence(s, silver).is_zero()


def test_reduce_examples(binary):
    assert reduce_fundamental(code_sequence(BiSequence.zero(), binary, reduce=False), binary).is_zero()
    places = binary.places.places
    coords = tuple(mpmath.mpc(1) if isinstance(P, ArchPlace) else PadicNumber.from_rational(-1, 2, 60) for P in places)
    assert reduce_fundamental(PhasePoint(places, coords), binary).is_zero()


@pytest.mark.parametrize("name", NAMES + ["cubic"])
def test_diagonal_points_reduce_to_zero(name, request):
    ctx = BetaContext.from_text("x^3-2x^2+x-1") if name == "cubic" else _ctx(request, name)
    rng = random.Random(8)
    for _ in range(25):
        q = ctx.field(tuple(Fraction(rng.randint(-10**6, 10**6)) for _ in range(ctx.degree)))
        q = q * ctx.power(rng.randint(-6, 6))
        red = reduce_fundamental(diagonal_point(q, ctx), ctx)
        # 128-bit working precision leaves far less than the 1e-9 acceptance tolerance
        assert red.arch_residual() <= 1e-30
        assert all(c.is_zero() for c in red.padic_coords())


@pytest.mark.parametrize("name", NAMES)
def test_reduction_is_idempotent(name, request):
    ctx = _ctx(request, name)
    rng = random.Random(2)
    for _ in range(10):
        p = code_sequence(_random_window(rng, ctx), ctx)
        assert _close(reduce_fundamental(p, ctx), p)


@pytest.mark.parametrize("name", NAMES)
def test_shift_equivariance(name, request):
    ctx = _ctx(request, name)
    rng = random.Random(4)
    for _ in range(10):
        s = _random_window(rng, ctx)
        left = code_sequence(s.shift(1), ctx)
        right = reduce_fundamental(_times_beta(code_sequence(s, ctx, reduce=False)), ctx)
        assert _close(left, right)
        # exactly: the two codings differ by the integer s_1 moved across the cut
        (m1, p1), (m0, p0) = exact_halves(s.shift(1), ctx), exact_halves(s, ctx)
        assert p1 - ctx.beta * p0 == -s[1]
        assert m1 - ctx.beta * m0 == s[1]


@pytest.mark.parametrize("text", ["2x-1", "x^2+2x-1", "2x^2+3x-1", "x^3-2x^2+x-1"])
def test_homoclinic_consistency(text):
    # the coding of a single digit at n is the fundamental homoclinic point shifted by n
    ctx = BetaContext.from_text(text)
    h = homoclinic_fundamental(ctx.coding_poly, (-20, 20)).mod1()
    for n in (-3, 0, 1, 4):
        oc = orbit_coordinates(code_sequence(BiSequence(n, (1,)), ctx), ctx, range(-5, 6))
        for k, v in oc.items():
            d = abs(v - h[k - n])
            assert min(d, 1 - d) < 1e-12


def test_homoclinic_binary_values():
    h = homoclinic_fundamental(normalize_associated("2x-1"), (-6, 6))
    for k in range(-6, 7):
        assert abs(h[k] - (mpmath.mpf(2) ** k if k <= -1 else 0)) < 1e-30


@pytest.mark.parametrize("text", ["2x-1", "x^2+2x-1", "2x^2+3x-1", "3x^3-x^2+x-1"])
def test_homoclinic_convolution_defect(text):
    f = normalize_associated(text)
    h = homoclinic_fundamental(f, (-80, 80))
    assert h.convolution_defect(f) < 1e-12


def test_homoclinic_decay_silver():
    h = homoclinic_fundamental(normalize_associated("x^2+2x-1"), (-10, 10))
    assert abs(h.decay_rate - (mpmath.sqrt(2) - 1)) < 1e-12


@pytest.mark.parametrize(
    "name, expected",
    [("binary", {((0,), 0), ((1,), 0)}),
     ("silver", {((0,), 0), ((0, 2), 0), ((0, 2), 1)}),
     ("nonunit", {((0,), 0), ((1, 3), 0), ((1, 3), 1)})],
)
def test_kernel_periodic(name, expected, request):
    ctx = _ctx(request, name)
    got = kernel_periodic(ctx, 4)
    assert {(s.period_word, s.phase) for s in got} == expected
    for s in got:
        assert code_sequence(s, ctx).arch_residual() <= 1e-30


def test_in_kernel_negative(silver):
    assert not in_kernel(PeriodicSequence((1,)), silver)
    assert not in_kernel(PeriodicSequence((0, 1)), silver)


def test_same_image(binary, silver):
    assert same_image(BiSequence.zero(), BiSequence(0, (1,), (1,), (1,)), binary)
    w = BiSequence(-2, (1, 0, 1))
    assert same_image(w, w.shift(0), silver)
    assert not same_image(w, BiSequence(-2, (1, 0, 0)), silver)


@pytest.mark.parametrize("name", NAMES)
def test_sampling(name, request):
    rep = almost_one_one_sample(_ctx(request, name), n_samples=150, seed=1)
    assert rep.unexplained == 0
    assert rep.injected_detected == rep.injected > 0
    assert all(c.kind == "kernel-explained" for c in rep.collisions if c.injected)


def test_sampling_threads_agree(silver):
    a = almost_one_one_sample(silver, n_samples=120, seed=9, threads=1)
    b = almost_one_one_sample(silver, n_samples=120, seed=9, threads=3)
    assert a.to_json() == b.to_json()


def test_sampling_uniform_words(silver):
    # path counting gives every admissible word of length 2 the same chance
    rng = random.Random(0)
    counts = {}
    for _ in range(7000):
        w = sample_admissible(silver.automaton, 2, rng)
        counts[w] = counts.get(w, 0) + 1
    assert set(counts) == {(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2), (2, 0)}
    assert max(counts.values()) / min(counts.values()) < 1.2


def test_pv_silver(silver):
    rep = pv_check(silver, 1, 30)
    lam = mpmath.sqrt(2) - 1
    for n, d in rep.distances:
        assert abs(d - lam**n) < 1e-9
    assert rep.verdict


def test_pv_binary(binary):
    rep = pv_check(binary, 1, 20)
    assert rep.verdict and all(d == 0 for _, d in rep.distances)


def test_pv_nonunit(nonunit):
    assert pv_check(nonunit, 1, 30).verdict


def test_additive_flow_basic(silver):
    zero = BiSequence.zero((-4, 4))
    one = additive_flow_step(zero, 1, silver)
    assert one[0] == 1 and sum(one.digits) == 1
    frac = additive_flow_step(zero, silver.beta.inverse(), silver)
    assert frac[1] == 1 and sum(frac.digits) == 1


def test_additive_flow_binary_counter(binary):
    s = BiSequence.zero((-6, 2))
    for n in range(1, 17):
        s = additive_flow_step(s, 1, binary)
        assert sum(d * 2 ** (-k) for k, d in zip(range(s.n_min, s.n_max + 1), s.digits)) == n


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_additive_flow_adds_exactly(seed):
    ctx = BetaContext.from_text("x^2+2x-1")
    rng = random.Random(seed)
    s = _random_window(rng, ctx, -5, 5)
    t = ctx.power(-rng.randint(-2, 3)) * rng.randint(1, 3)
    try:
        out = additive_flow_step(s, t, ctx)
    except GapConditionUnmet:
        return
    (_, p0), (_, p1) = exact_halves(s, ctx), exact_halves(out, ctx)
    (m0, _), (m1, _) = exact_halves(s, ctx), exact_halves(out, ctx)
    assert (m1 + p1) - (m0 + p0) == t
    assert window_admissible(out, ctx.parry)


def test_additive_flow_rejects_infinite_t(silver):
    with pytest.raises(NonTerminating):
        additive_flow_step(BiSequence.zero(), Fraction(1, 3), silver)


def test_additive_flow_tail_gap(silver):
    s = BiSequence(0, (1, 0, 1), (2, 0), (0,))
    with pytest.raises(GapConditionUnmet):
        additive_flow_step(s, 1, silver)


def test_greedy_and_coding_agree(silver):
    # a finite expansion codes to its value on the unstable side only
    x = silver.field((Fraction(7), Fraction(3)))
    exp = greedy_expand(x, silver)
    d = exp.digits
    s = BiSequence(d.start_exponent, d.digits)
    minus, plus = exact_halves(s, silver)
    assert minus + plus == x
    assert in_zbeta(plus)
