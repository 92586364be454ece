import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laxflow._series import Series, poly_at
from laxflow.curvefield import (
    BaseCurve,
    CurveError,
    Divisor,
    FunctionFieldElement as F,
    Place,
    UnsupportedRegimeError,
    canonical_divisor,
    infinity_places,
    laurent_expand,
    places_over,
    poles_of,
    regular_place,
    residue_at,
    residue_sum,
    rr_basis,
    rr_space,
    valuation,
    zeros_of,
)

from conftest import random_element

P1 = BaseCurve.rational()
E = BaseCurve.hyperelliptic([0, -1, 0, 1])  # y^2 = x^3 - x
G2 = BaseCurve.hyperelliptic([1, 1, 0, 0, 0, 1])  # y^2 = x^5 + x + 1


def test_series_inverse_and_sqrt():
    s = Series(0, [1.0, 2.0, 3.0, 0, 0, 0])
    one = s * s.inverse()
    assert abs(one[0] - 1) < 1e-14 and max(abs(one[k]) for k in range(1, 6)) < 1e-13
    r = (s * s).sqrt()
    assert np.allclose(r.window(0, 5), s.window(0, 5))


def test_poly_at_series_shift():
    x = Series(0, [2.0, 1.0, 0, 0])
    v = poly_at([1.0, 0.0, 1.0], x)  # 1 + (2 + w)^2
    assert np.allclose(v.window(0, 3), [5, 4, 1, 0])


def test_curve_genus_and_squarefree():
    assert P1.genus == 0 and E.genus == 1 and G2.genus == 2
    assert BaseCurve.hyperelliptic([1, 1, 0, 0, 0, 0, 1]).genus == 2
    with pytest.raises(CurveError):
        BaseCurve.hyperelliptic([0, 0, 1, 1])


def test_defining_relation():
    y = F.y(E)
    assert (y * y).almost_equal(F.poly(E, [0, -1, 0, 1]))


def test_rational_identity():
    x = F.x(P1)
    lhs = 1 / (x - 1) + 1 / (x + 1)
    rhs = F.make(P1, [0, 2], None, [(1.0, 1), (-1.0, 1)])
    assert lhs.almost_equal(rhs)


def test_y_over_x_squared():
    c = BaseCurve.hyperelliptic([1, 0, 0, 0, 0, 1])
    e = F.y(c) / F.x(c)
    assert (e * e).almost_equal(F.make(c, [1, 0, 0, 0, 0, 1], None, [(0.0, 2)]))


def test_inverse_roundtrip_genus2():
    e = F.make(G2, [0.3, 1.0], [0.5])
    assert (e * (1 / e)).almost_equal(F.const(G2, 1.0))


def test_laurent_pole_at_regular_point():
    e = 1 / (F.x(P1) - 2)
    ex = laurent_expand(e, Place("finite_regular", 2.0), -2, 0)
    assert np.allclose(ex.coef, [0, 1, 0])


def test_laurent_x_at_infinity():
    ex = laurent_expand(F.x(P1), Place("infinity"), -1, 0)
    assert np.allclose(ex.coef, [1, 0])


def test_laurent_one_over_y_at_branch():
    p = places_over(E, 0.0)[0]
    assert p.chart == "finite_branch"
    ex = laurent_expand(1 / F.y(E), p, -1, 1)
    # y is the local coordinate and x = -w^2 - w^6 - ..., so 1/y = 1/w exactly
    assert np.allclose(ex.coef, [1, 0, 0], atol=1e-12)


def test_residues_rational():
    x = F.x(P1)
    assert abs(residue_at(1 / x, Place("finite_regular", 0.0)) - 1) < 1e-14
    assert abs(residue_at(1 / x, Place("infinity")) + 1) < 1e-14


def test_residues_x_over_y_sum_to_zero():
    e = F.x(E) / F.y(E)
    places = [places_over(E, r)[0] for r in (-1.0, 0.0, 1.0)] + infinity_places(E)
    total = sum(residue_at(e, p) for p in places)
    assert abs(total) < 1e-12


def test_canonical_divisor():
    K = canonical_divisor(G2)
    assert K.degree == 2 and all(p.chart == "infinity" for p, _ in K.support)
    assert canonical_divisor(BaseCurve.hyperelliptic([1, 2, 0, 0, 1, 0, 0, 1])).degree == 4
    with pytest.raises(UnsupportedRegimeError):
        canonical_divisor(P1)


def test_rr_dimensions():
    assert rr_space(P1, Divisor.from_pairs([(Place("infinity"), 3)])).dim == 4
    pts = [regular_place(G2, x) for x in (0.3, -0.7 + 0.2j, 1.1j)]
    D = Divisor.from_pairs([(p, 1) for p in pts] + [(infinity_places(G2)[0], 2)])
    assert D.degree == 5
    assert rr_space(G2, D).dim == 4


def test_rr_basis_elements_have_bounded_poles():
    pts = [regular_place(G2, x) for x in (0.3, -0.7 + 0.2j)]
    D = Divisor.from_pairs([(p, 1) for p in pts] + [(infinity_places(G2)[0], 3)])
    for e in rr_basis(G2, D):
        for p in pts:
            assert valuation(e, p) >= -1
        assert valuation(e, infinity_places(G2)[0]) >= -3
        assert zeros_of(e).degree == poles_of(e).degree


def test_tyurin_count_genus2():
    # vector sections with simple poles at lg = 4 points whose residues are parallel to alpha_j
    rng = np.random.default_rng(3)
    pts = [regular_place(G2, x) for x in (0.4 + 0.1j, -0.5 + 0.6j, 0.9 - 0.4j, -1.1 - 0.3j)]
    sp = rr_space(G2, Divisor.from_pairs([(p, 1) for p in pts]))
    l, dim = 2, sp.dim
    rows = []
    for p in pts:
        al = np.r_[rng.normal() + 1j * rng.normal(), 1.0]
        r = sp.expand(p, -1, -1)[:, 0]
        row = np.zeros(l * dim, complex)
        row[:dim] = r
        row[dim:] = -al[0] * r
        rows.append(row)
    s = np.linalg.svd(np.array(rows), compute_uv=False)
    null = l * dim - int(np.sum(s > 1e-9 * s[0]))
    assert null >= l


@pytest.mark.parametrize("curve", [P1, G2], ids=["rational", "genus2"])
def test_residue_theorem_random(curve):
    rng = np.random.default_rng(11)
    for _ in range(10):
        assert abs(residue_sum(random_element(curve, rng))) < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_arithmetic_matches_pointwise(seed):
    rng = np.random.default_rng(seed)
    a = random_element(G2, rng, max_deg=3, max_poles=2)
    b = random_element(G2, rng, max_deg=3, max_poles=2)
    p = regular_place(G2, 2.3 + 1.7j)
    va, vb = a.evaluate(p), b.evaluate(p)
    scale = max(1.0, abs(va), abs(vb)) ** 2
    assert abs((a + b).evaluate(p) - (va + vb)) < 1e-9 * scale
    assert abs((a * b).evaluate(p) - va * vb) < 1e-9 * scale


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_zero_and_pole_degrees_agree(seed):
    rng = np.random.default_rng(seed)
    e = random_element(P1, rng, max_deg=3, max_poles=2)
    if e.is_zero:
        return
    assert zeros_of(e).degree == poles_of(e).degree
