import numpy as np
import pytest

from laxflow.curvefield import Place, regular_place
from laxflow.laxmat import MatrixFunc, TyurinData, mumford_lax, random_params, validate_lax, construct_lax
from laxflow.spectral import (
    ReducibleSpectralCurveError,
    SpectralPoint,
    eigen_divisor,
    fiber_roots,
    left_eigenvector,
    lift_fiber,
    spectral_curve,
    spectral_genus,
)

MUMFORD = mumford_lax([-1, 0, 1], [0], [0, 1])


def test_mumford_spectral_curve():
    S = spectral_curve(MUMFORD)
    assert S.genus == 1 and spectral_genus(S) == 1
    xs = sorted(round(p.x.real, 9) for p in S.branch_points if p.chart != "infinity")
    assert xs == [-1.0, 0.0, 1.0]
    assert any(p.chart == "infinity" for p in S.branch_points)
    assert np.allclose(S.disc.a, [0, -4, 0, 4])


def test_constant_diagonal_is_reducible():
    from laxflow.curvefield import BaseCurve

    m = MatrixFunc.constant(BaseCurve.rational(), [[1.5, 0], [0, -1.5]])
    L = validate_lax(m, TyurinData(), mumford_lax([1], [0], [1]).K).lax
    with pytest.raises(ReducibleSpectralCurveError):
        spectral_curve(L)


def test_fiber_at_four():
    S = spectral_curve(MUMFORD)
    pts = lift_fiber(S, Place("finite_regular", 4.0))
    mus = sorted(p.mu.real for p in pts)
    assert np.allclose(mus, [-np.sqrt(60), np.sqrt(60)], atol=1e-12)


def test_eigenvector_at_four():
    v = left_eigenvector(MUMFORD, SpectralPoint(Place("finite_regular", 4.0), np.sqrt(60)))
    assert np.allclose(v.psi, [15, np.sqrt(60)])


def test_eigen_divisor_mumford():
    D = eigen_divisor(MUMFORD, spectral_curve(MUMFORD))
    assert D.degree == 2
    assert sorted(round(p.place.x.real, 9) for p, _ in D.points) == [-1.0, 1.0]
    assert all(abs(p.mu) < 1e-12 for p, _ in D.points)


def test_generic_genus2(genus2_lax):
    S = spectral_curve(genus2_lax)
    assert S.genus == 5 and S.branch.degree == 4
    D = eigen_divisor(genus2_lax, S)
    assert D.degree == 6


def test_genus_rank_three(genus2_curve):
    from laxflow.curvefield import canonical_divisor

    K = canonical_divisor(genus2_curve)
    L = construct_lax(genus2_curve, K, random_params(genus2_curve, 3, np.random.default_rng(2), K))
    assert spectral_curve(L).genus == 10


def test_fiber_vieta_and_residuals(genus2_lax):
    S = spectral_curve(genus2_lax)
    rng = np.random.default_rng(7)
    for _ in range(100):
        p = regular_place(genus2_lax.curve, complex(rng.normal(), rng.normal()))
        if p.chart != "finite_regular" or min(abs(p.x - g.x) for g in genus2_lax.tyurin.gammas) < 0.05:
            continue
        roots = fiber_roots(S.coefficients_at(p))
        assert len(roots) == 2
        h2 = S.h[1].evaluate(p)
        assert abs(np.prod(roots) - h2) < 1e-10 * max(1.0, abs(h2))
        A = genus2_lax.matrix.evaluate(p)
        for mu in roots:
            psi = left_eigenvector(genus2_lax, SpectralPoint(p, mu)).psi
            res = np.linalg.norm(psi @ (A - mu * np.eye(2)))
            assert res < 1e-10 * np.linalg.norm(psi) * max(np.linalg.norm(A), 1.0)


def test_eigenvector_direction_at_tyurin_point(genus2_lax):
    # the normalized eigenvector becomes parallel to alpha_j as p approaches gamma_j
    L = genus2_lax
    S = spectral_curve(L)
    g, al = L.tyurin.gammas[0], L.tyurin.alphas[0]
    angles = []
    for eps in (1e-2, 1e-3, 1e-4):
        p = regular_place(L.curve, g.x + eps, g.y)
        worst = 0.0
        for mu in fiber_roots(S.coefficients_at(p)):
            psi = left_eigenvector(L, SpectralPoint(p, mu), "last-coordinate-1").psi
            cos = abs(np.vdot(al, psi)) / (np.linalg.norm(al) * np.linalg.norm(psi))
            worst = max(worst, np.sqrt(max(0.0, 1 - cos ** 2)))
        angles.append(worst)
    assert angles[-1] < 1e-3
    assert angles[0] > angles[1] > angles[2]


def test_eigen_divisor_degree_is_gauge_stable(mumford_g2):
    from laxflow.laxmat import gauge_transform

    D = eigen_divisor(mumford_g2, spectral_curve(mumford_g2))
    assert D.degree == 3
    assert [k for p, k in D.points if p.place.chart == "infinity"] == [1]
    Lg = gauge_transform(mumford_g2, np.array([[1.0, 0.4], [-0.3, 1.1]]))
    assert eigen_divisor(Lg, spectral_curve(Lg)).degree == 3
