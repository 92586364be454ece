"""One pass/fail test per acceptance criterion, each with its tolerance and time budget."""

import time

import numpy as np
from numpy.polynomial import polynomial as P

from conftest import random_element
from laxflow.curvefield import BaseCurve, Place, canonical_divisor, residue_sum
from laxflow.flow import (
    AnsatzSpec,
    ansatz_m_poly,
    build_m,
    integrate_flow,
    isospectral_drift,
    lax_to_poly,
    poly_pow,
    tangency_check,
)
from laxflow.hamiltonian import HamiltonianSpec, commuting_flows_check, conservation_check, hamiltonian_value
from laxflow.jacobian import agm_tau, hyperelliptic_model, jacobian_linearity, model_from_poly, periods
from laxflow.laxmat import (
    construct_lax,
    expected_dims,
    gauge_transform,
    hitchin_invariants,
    mumford_lax,
    random_params,
    validate_lax,
)
from laxflow.residue import constancy_test, equivalence_checks, linearity_test
from laxflow.spectral import spectral_curve, spectral_genus

MUMFORD = mumford_lax([-1, 0, 1], [0], [0, 1])  # nu^2 = z^3 - z
G2_F = [1, 1, 0, 0, 0, 1]  # y^2 = x^5 + x + 1
ZL = AnsatzSpec.at_infinity(1, 1)  # (z L)_+
A1 = AnsatzSpec.at_infinity(1, -1)  # (L / z)_+
A2 = AnsatzSpec.at_infinity(1, -2)
INF = Place("infinity")


class Budget:
    def __init__(self, seconds: float):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        if exc[0] is None:
            assert time.perf_counter() - self.t0 < self.seconds


def _poly_in_l(coeffs):
    def mfun(Pl, t):
        out = np.zeros((max(1, (len(coeffs) - 1) * (Pl.shape[0] - 1) + 1), 2, 2), complex)
        for d, c in enumerate(coeffs):
            Ld = poly_pow(Pl, d)
            out[: Ld.shape[0]] += c * Ld
        return out

    return mfun


def _special_w(rng, n):
    out = []
    while len(out) < n:
        W = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        d = np.linalg.det(W)
        if abs(d) > 0.1:
            out.append(W / np.sqrt(d))
    return out


def test_criterion_1_closed_form_dimensions_and_genus():
    with Budget(1.0):
        want = {(2, 2): (12, 5, 6, 10), (3, 2): (27, 10, 12, 20), (2, 3): (20, 9, 10, 18)}
        for (l, g), dims in want.items():
            d = expected_dims(l, g)
            assert (d.dimLK, d.spectralGenus, d.eigenDivisorDegree, d.dimCotangent) == dims
            assert d.dimLK == l * l * (2 * g - 1)
            assert d.spectralGenus == l * l * (g - 1) + 1
            assert d.eigenDivisorDegree == d.spectralGenus + l - 1
            assert d.dimCotangent == 2 * (l * l * (g - 1) + 1)
        for f, l in ((G2_F, 2), (G2_F, 3), ([1, 1, 0, 0, 0, 0, 0, 1], 2)):
            c = BaseCurve.hyperelliptic(f)
            K = canonical_divisor(c)
            L = construct_lax(c, K, random_params(c, l, np.random.default_rng(1), K))
            assert spectral_genus(spectral_curve(L)) == expected_dims(l, c.genus).spectralGenus


def test_criterion_2_residue_theorem():
    with Budget(5.0):
        for curve in (BaseCurve.hyperelliptic(G2_F), BaseCurve.rational()):
            rng = np.random.default_rng(2024)
            for _ in range(50):
                assert abs(residue_sum(random_element(curve, rng))) < 1e-10


def test_criterion_3_constancy_of_polynomials_in_l():
    with Budget(10.0):
        for coeffs in ([1], [0, 1], [0, 0, 1], [0, -1, 3]):
            mfun = _poly_in_l(coeffs)
            tr = integrate_flow(MUMFORD, None, 1.0, 0.01, m_builder=mfun)
            P0 = tr.samples[0].poly
            assert max(float(np.max(np.abs(s.poly - P0))) for s in tr.samples) < 1e-10
            assert constancy_test(MUMFORD, mfun(P0, 0.0)).residual < 1e-9


def test_criterion_4_isospectrality():
    with Budget(30.0):
        # (z L)_+ equals z L here and commutes with L; (L / z)_+ gives a nontrivial flow
        for a in (ZL, A1):
            tr = integrate_flow(MUMFORD, a, 1.0, 1e-3, stride=50)
            assert max(isospectral_drift(tr).values()) < 1e-8


def test_criterion_5_abel_velocity_equals_residue_pairing():
    with Budget(60.0):
        tr = integrate_flow(MUMFORD, A1, 1.0, 1e-3, stride=50)
        rep = jacobian_linearity(tr, hyperelliptic_model(spectral_curve(MUMFORD)))
        assert rep.residue_velocity is not None and len(rep.residue_velocity) >= 10
        assert rep.agreement < 1e-5


def test_criterion_6_linearity_and_negative_control():
    with Budget(60.0):
        m = hyperelliptic_model(spectral_curve(MUMFORD))
        base = lambda Pl, t: ansatz_m_poly(Pl, A1)
        tr = integrate_flow(MUMFORD, A1, 1.0, 1e-3, stride=50)
        assert jacobian_linearity(tr, m, with_residue=False).max_second_difference < 1e-5
        lin = linearity_test(tr, base)
        assert lin.ok and lin.max_residual < 1e-8

        curved = lambda Pl, t: (1.0 + t) * base(Pl, t)
        bad = integrate_flow(MUMFORD, None, 1.0, 1e-3, m_builder=curved, stride=50)
        assert jacobian_linearity(bad, m, with_residue=False, mfun=curved).max_second_difference >= 1e-5
        badlin = linearity_test(bad, curved)
        assert not badlin.ok and badlin.max_residual >= 1e-8


def test_criterion_7_gauge_and_shift_equivalence():
    with Budget(10.0):
        M = ansatz_m_poly(lax_to_poly(MUMFORD), A1)
        g = equivalence_checks(MUMFORD, M, "gauge", _special_w(np.random.default_rng(7), 20), tol=1e-9)
        assert len(g.defects) == 20 and g.ok
        q = equivalence_checks(MUMFORD, M, "qshift", [[0, 1], [0, 0, 1]], tol=1e-8)
        assert q.ok


def test_criterion_8_krichever_structure():
    with Budget(300.0):
        curve = BaseCurve.hyperelliptic(G2_F)
        K = canonical_divisor(curve)
        first = None
        for seed in range(25):
            L = construct_lax(curve, K, random_params(curve, 2, np.random.default_rng(seed), K))
            assert validate_lax(L.matrix, L.tyurin, L.K).ok
            assert hitchin_invariants(L).max_tail < 1e-9
            for a in (AnsatzSpec.at_infinity(1, 0), AnsatzSpec.at_infinity(1, 1)):
                assert tangency_check(L, build_m(L, a)).ok
            first = first or L
        totals = [integrate_flow(first, AnsatzSpec.at_infinity(1, 0), 0.05, dt).diagnostics["total_defect"]
                  for dt in (1e-2, 5e-3, 2.5e-3)]
        order = np.polyfit(np.log([1e-2, 5e-3, 2.5e-3]), np.log(totals), 1)[0]
        assert order >= 1.8


def test_criterion_9_hamiltonians(mumford_g2):
    with Budget(60.0):
        tr = integrate_flow(MUMFORD, A1, 1.0, 1e-3, stride=50)
        specs = [HamiltonianSpec(INF, n, m) for n in (2, 3) for m in range(-6, 1)]
        assert conservation_check(tr, specs).max_drift < 1e-8

        small = commuting_flows_check(mumford_g2, A1, A2, 0.2, 0.16, dts=(1e-3,))
        assert small.discrepancies[0] < 1e-6
        halving = commuting_flows_check(mumford_g2, A1, A2, 0.2, 0.16, dts=(0.04, 0.02, 0.01))
        assert halving.order is not None and halving.order >= 3.5

        W = np.array([[1.2, -0.4], [0.7, 0.9]])
        W = W / np.sqrt(np.linalg.det(W))
        for L in (MUMFORD, mumford_g2):
            for h in HamiltonianSpec.for_ansatz(A1) + HamiltonianSpec.for_ansatz(A2) + specs:
                a = hamiltonian_value(L, h)
                assert abs(hamiltonian_value(gauge_transform(L, W), h) - a) <= 1e-10 * max(1.0, abs(a))


def test_criterion_10_periods(mumford_g2):
    with Budget(10.0):
        tau = periods(model_from_poly([0, -1, 0, 1])).tau[0, 0]
        assert abs(tau - agm_tau(1.0, 0.0, -1.0)) < 1e-6
        assert abs(tau - 1j) < 1e-6
        models = [
            model_from_poly([0, -1, 0, 1]),
            model_from_poly(P.polyfromroots([2.0, 0.5, -1.0])),
            model_from_poly([-1, 0, 0, 0, 0, 1]),
            model_from_poly(G2_F),
            model_from_poly([0.5, -1, 0.2, 0.3, -0.7, 0.1, 0.4, 1]),
            hyperelliptic_model(spectral_curve(mumford_g2)),
        ]
        for m in models:
            sym, mineig = periods(m).riemann_defects()
            assert sym < 1e-10 and mineig > 0
