import numpy as np
import pytest
from numpy.polynomial import polynomial as P

import laxflow.jacobian as J
from laxflow.flow import AnsatzSpec, integrate_flow
from laxflow.jacobian import (
    SingularSpectralCurveError,
    abel_map,
    agm_tau,
    jacobian_linearity,
    lattice_reduce,
    model_from_poly,
    periods,
    segment_integral,
)
from laxflow.laxmat import gauge_transform
from laxflow.spectral import spectral_curve


def test_square_lattice():
    m = model_from_poly([0, -1, 0, 1])
    assert m.genus == 1
    assert abs(periods(m).tau[0, 0] - 1j) < 1e-12
    assert abs(agm_tau(1, 0, -1) - 1j) < 1e-14


@pytest.mark.parametrize("e", [(2.0, 0.5, -1.0), (3.0, -0.2, -0.7)])
def test_genus_one_tau_matches_agm(e):
    m = model_from_poly(P.polyfromroots(e))
    tau = periods(m).tau[0, 0]
    ref = agm_tau(*e)
    # the symplectic basis may differ from the AGM one by a modular transformation
    cands = [ref, -1 / ref, ref + 1, ref - 1]
    assert min(abs(tau - c) for c in cands) < 1e-10


def test_genus_two_periods_converged(monkeypatch):
    m = model_from_poly([-1, 0, 0, 0, 0, 1])
    tau = periods(m).tau
    sym, mineig = periods(m).riemann_defects()
    assert sym < 1e-12 and mineig > 0
    x, w = np.polynomial.legendre.leggauss(96)
    monkeypatch.setattr(J, "_GLX", x)
    monkeypatch.setattr(J, "_GLW", w)
    assert np.max(np.abs(periods(m).tau - tau)) < 1e-8


def test_repeated_root_rejected():
    with pytest.raises(SingularSpectralCurveError):
        model_from_poly(P.polyfromroots([1, 1, 2]))


def test_segment_additivity():
    m = model_from_poly([1, 1, 0, 0, 0, 1])
    za, zm, zb = -0.1 + 0.1j, 0.2 - 0.3j, 0.5 + 0.1j  # no branch point inside
    nua = np.sqrt(P.polyval(za, m.Q))
    whole = segment_integral(m, za, zb, nua)
    first = segment_integral(m, za, zm, nua)
    num = J._nu_continued(m, zm, za, nua)
    second = segment_integral(m, zm, zb, num)
    assert np.max(np.abs(whole - first - second)) < 1e-12


def test_abel_base_is_zero():
    m = model_from_poly([1, 1, 0, 0, 0, 1])
    per = periods(m)
    z0 = 0.2 + 0.1j
    nu0 = np.sqrt(P.polyval(z0, m.Q))
    img = abel_map([(z0, nu0, 1)], (z0, nu0), per, m)
    assert np.max(np.abs(img.raw)) < 1e-14


def _zeros_of_line(m, a, b):
    """Zeros (z, a z + b) of nu - (a z + b), whose pole divisor is deg(Q) times infinity."""
    F = P.polysub(m.Q, P.polymul([b, a], [b, a]))
    return [(z, a * z + b, 1) for z in P.polyroots(F)]


def test_abels_theorem():
    m = model_from_poly([1, 1, 0, 0, 0, 1])
    per = periods(m)
    base = (0.1 + 0.3j, np.sqrt(P.polyval(0.1 + 0.3j, m.Q)))
    d1 = abel_map(_zeros_of_line(m, 0.5, -0.3), base, per, m).raw
    d2 = abel_map(_zeros_of_line(m, -1.2 + 0.4j, 0.7), base, per, m).raw
    red, frac = lattice_reduce(d1 - d2, per)
    assert np.max(np.abs(red)) < 1e-9


def _with_mult(pts):
    return [(z, nu, 1) for z, nu in pts]


def test_gauge_invariant_divisor_class(mumford_g2):
    m = J.hyperelliptic_model(spectral_curve(mumford_g2))
    per = periods(m)
    base = (m.branch[0], 0.0)
    a = abel_map(_with_mult(J._dhat_points(mumford_g2, m)), base, per, m).raw
    W = np.array([[1.0, 0.4], [-0.3, 1.1]])
    b = abel_map(_with_mult(J._dhat_points(gauge_transform(mumford_g2, W), m)), base, per, m).raw
    red, _ = lattice_reduce(a - b, per)
    assert np.max(np.abs(red)) < 1e-9


def test_stationary_flow_has_zero_velocity(mumford_g2):
    def mfun(Pl, t):
        return Pl

    tr = integrate_flow(mumford_g2, None, 0.2, 0.01, m_builder=mfun, stride=2)
    m = J.hyperelliptic_model(spectral_curve(mumford_g2))
    rep = jacobian_linearity(tr, m, with_residue=False)
    assert np.max(np.abs(rep.velocity)) < 1e-9


def test_flow_is_linear_and_matches_residue_velocity(mumford_g2):
    a = AnsatzSpec.at_infinity(1, -1)
    tr = integrate_flow(mumford_g2, a, 0.2, 1e-3, stride=20)
    m = J.hyperelliptic_model(spectral_curve(mumford_g2))
    rep = jacobian_linearity(tr, m)
    assert rep.max_second_difference < 1e-6
    assert rep.agreement < 1e-5
    assert np.max(np.abs(rep.velocity)) > 1e-2


@pytest.mark.parametrize("c", [0.3 + 0.4j, -1.7 + 0.2j, 2.5 - 1.0j])
def test_abels_theorem_through_infinity(c):
    m = model_from_poly([1, 1, 0, 0, 0, 1])
    per = periods(m)
    base = (0.1 + 0.3j, np.sqrt(P.polyval(0.1 + 0.3j, m.Q)))
    nu = np.sqrt(P.polyval(c, m.Q))
    inf = complex("inf")
    img = abel_map([(c, nu, 1), (c, -nu, 1), (inf, inf, -2)], base, per, m).raw
    red, _ = lattice_reduce(img, per)
    assert np.max(np.abs(red)) < 1e-9


def test_branch_point_to_infinity_is_half_period():
    m = model_from_poly([0, -1, 0, 1])
    per = periods(m)
    v = J._to_infinity(m, m.branch[0], 0.0)
    red, frac = lattice_reduce(2 * v, per)
    assert np.max(np.abs(red)) < 1e-10
    assert np.max(np.abs(lattice_reduce(v, per)[0])) > 0.1


def test_curvature_injection_bends_the_track():
    from laxflow.flow import ansatz_m_poly
    from laxflow.laxmat import mumford_lax

    L = mumford_lax([-1, 0, 1], [0], [0, 1])
    a = AnsatzSpec.at_infinity(1, -1)
    curved = lambda Pl, t: (1.0 + t) * ansatz_m_poly(Pl, a)
    tr = integrate_flow(L, None, 1.0, 1e-3, m_builder=curved, stride=50)
    rep = jacobian_linearity(tr, J.hyperelliptic_model(spectral_curve(L)), with_residue=False)
    assert rep.max_second_difference > 1e-3
