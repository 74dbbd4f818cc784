import mpmath
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from betacoding.errors import DegreeTooLarge, NotHyperbolic, NotIrreducible
from betacoding.padic import PadicNumber, valuation
from betacoding.places import (
    ArchPlace,
    DigitSeries,
    classify_places,
    evaluate_series_at_place,
    is_hyperbolic,
    is_irreducible,
    isolate_roots,
    newton_polygon,
    pisot_classify,
)
from betacoding.polyring import AssociatedPoly, IntLaurentPoly, normalize_associated

from oracles import random_polys, root_moduli, sympy_hyperbolic, sympy_poly


def N(text):
    return normalize_associated(text)


@mpmath.workprec(128)
def test_isolate_quadratic():
    roots = sorted(mpmath.re(z) for z in isolate_roots(N("x^2-2x-1")).values())
    assert abs(roots[0] - (1 - mpmath.sqrt(2))) < 1e-35
    assert abs(roots[1] - (1 + mpmath.sqrt(2))) < 1e-35


def test_isolate_unit_circle_pair():
    rs = isolate_roots(N("x^2-x+1"))
    assert len(rs) == 2
    assert all(abs(abs(z) - 1) < 1e-30 for z in rs.values())


@pytest.mark.parametrize("coeffs", [(-1, 2), (-1, -2, 1), (-1, 3, 2), (-1, 1, -2, 1), (3, 0, 0, 0, 1), (7, -3, 5, 2, 6)])
def test_isolate_against_sympy(coeffs):
    f = AssociatedPoly(coeffs)
    mine = sorted(float(abs(z)) for z in isolate_roots(f).values())
    assert mine == pytest.approx(root_moduli(f), rel=1e-12)


@pytest.mark.parametrize(
    "text, expected",
    [("x^2-x+1", False), ("x^2-2x-1", True), ("x-1", False), ("x+1", False), ("x^4+1", False), ("2x-3", True),
     ("x^4-x^3-x^2-x+1", False), ("x^3-x-1", True), ("2x^2-x+2", False)],
)
def test_is_hyperbolic(text, expected):
    f = N(text)
    assert bool(is_hyperbolic(f)) is expected
    assert sympy_hyperbolic(f) is expected


@pytest.mark.parametrize(
    "text, expected",
    [("x^2-2x-1", True), ("x^2-1", False), ("2x-1", True), ("x^4+4", False), ("x^3-2", True), ("x^4-x^2+1", True),
     ("4x^4+1", False)],
)
def test_is_irreducible(text, expected):
    f = N(text)
    assert is_irreducible(f) is expected
    assert sympy_poly(f).is_irreducible is expected


def test_is_irreducible_degree_cap():
    with pytest.raises(DegreeTooLarge):
        is_irreducible(AssociatedPoly((1, 0, 0, 0, 0, 0, 0, 1)))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=2, max_size=5))
def test_irreducible_matches_sympy(cs):
    if cs[0] == 0 or cs[-1] == 0:
        return
    f = normalize_associated(IntLaurentPoly.from_coeffs(cs))
    assert is_irreducible(f) is sympy_poly(f).is_irreducible


@pytest.mark.parametrize(
    "text, p, sides",
    [("2x^2+3x-1", 2, [(0, 1), (1, 1)]), ("2x-1", 2, [(1, 1)]), ("x^2-2x-1", 2, [(0, 2)]), ("2x-3", 3, [(-1, 1)]),
     ("4x^2+x-2", 2, [(-1, 1), (2, 1)])],
)
def test_newton_polygon(text, p, sides):
    assert [(s, n) for s, n in newton_polygon(N(text), p)] == sides


def test_newton_polygon_valuations_via_sympy():
    # roots of 4x^2+x-2 over Q_2: product -1/2 (v = 1), one root of valuation -2 and one of 1
    f = N("4x^2+x-2")
    slopes = sorted(s for s, n in newton_polygon(f, 2) for _ in range(n))
    # slope s is minus the valuation of the root
    prod_val = -sum(slopes)
    assert prod_val == valuation(-2, 2) - valuation(4, 2)


@pytest.mark.parametrize(
    "text, side, beta, unit",
    [("2x^2+3x-1", "reciprocal", (3 + sympy.sqrt(17)) / 2, False), ("2x-3", "none", None, None),
     ("x^2+2x-1", "reciprocal", 1 + sympy.sqrt(2), True), ("x^3-2x^2+x-1", "direct", None, True)],
)
@mpmath.workprec(128)
def test_pisot_classify(text, side, beta, unit):
    rep = pisot_classify(N(text))
    assert rep.side == side
    if beta is not None:
        assert abs(rep.beta - mpmath.mpf(sympy.N(beta, 50))) < 1e-35
    if unit is not None:
        assert rep.is_unit is unit


def test_classify_binary():
    pc = classify_places(N("2x-1"))
    assert [(P.stable, float(P.modulus)) for P in pc.archimedean] == [(True, 0.5)]
    assert [(P.prime, P.stable) for P in pc.nonarchimedean] == [(2, False)]


def test_classify_silver():
    pc = classify_places(N("x^2+2x-1"))
    assert sorted(P.stable for P in pc.archimedean) == [False, True]
    assert pc.nonarchimedean == ()


def test_classify_nonunit():
    pc = classify_places(N("2x^2+3x-1"))
    unstable = pc.unstable()
    assert sum(isinstance(P, ArchPlace) for P in unstable) == 1
    assert [P.prime for P in unstable if not isinstance(P, ArchPlace)] == [2]


def test_classify_refusals():
    with pytest.raises(NotHyperbolic):
        classify_places(N("x^2-x+1"))
    with pytest.raises(NotIrreducible):
        classify_places(N("x^2-5x+6"))


def test_hensel_roots_are_roots():
    for text in ("2x-1", "2x^2+3x-1", "4x^2+x-2", "3x^3+x-1"):
        f = N(text)
        for P in classify_places(f).nonarchimedean:
            if P.root is None:
                continue
            r = P.root
            acc = PadicNumber.zero(P.prime, r.abs_precision)
            for i, a in enumerate(f.coeffs):
                acc = acc + a * r**i
            assert acc.is_zero() or acc.valuation >= r.abs_precision - 2 * f.degree
            assert r.valuation == -P.slope


def test_counts_match_degree():
    for f in random_polys(seed=11, count=40):
        pc = classify_places(f)
        arch = sum(P.root_count for P in pc.archimedean)
        assert arch == f.degree
        for p in {P.prime for P in pc.nonarchimedean}:
            assert sum(P.root_count for P in pc.nonarchimedean if P.prime == p) == sum(
                n for s, n in newton_polygon(f, p) if s != 0
            )


def test_monic_iff_no_unstable_padic():
    for f in random_polys(seed=2024, count=60):
        pc = classify_places(f)
        assert (f.leading == 1) is (not pc.unstable_padic())
        # the mirror statement for the constant term
        assert (abs(f.constant) == 1) is (not pc.stable_padic())


def test_series_stable_arch_geometric():
    pc = classify_places(N("2x-1"))
    P = pc.archimedean[0]
    ones = DigitSeries((), right_tail=((1,), 1))
    v = evaluate_series_at_place(ones, P)
    assert abs(v.value - 1) < 1e-30


def test_series_unstable_padic_geometric():
    pc = classify_places(N("2x-1"))
    P = pc.nonarchimedean[0]
    ones = DigitSeries((), left_tail=((1,), 0))
    v = evaluate_series_at_place(ones, P)
    assert v.value == PadicNumber.from_rational(-1, 2, v.value.abs_precision)


def test_series_empty():
    pc = classify_places(N("2x^2+3x-1"))
    for P in pc.places:
        v = evaluate_series_at_place(DigitSeries(()), P)
        assert v.value == 0 or v.value.is_zero()
