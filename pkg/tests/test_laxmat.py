import numpy as np
import pytest

from laxflow.curvefield import BaseCurve, Divisor, FunctionFieldElement as F, canonical_divisor, valuation
from laxflow.laxmat import (
    KricheverTyurinParams,
    MatrixFunc,
    TyurinData,
    admissible_beta_basis,
    construct_lax,
    expected_dims,
    gauge_transform,
    hitchin_invariants,
    mumford_lax,
    random_params,
    validate_lax,
)

G2 = BaseCurve.hyperelliptic([1, 1, 0, 0, 0, 1])
K2 = canonical_divisor(G2)


def test_constant_matrix_is_valid():
    m = MatrixFunc.constant(G2, [[1.0, 2.0], [3.0, -1.0]])
    rep = validate_lax(m, TyurinData(), K2)
    assert rep.ok


def test_construct_roundtrip(genus2_lax):
    L = genus2_lax
    rep = validate_lax(L.matrix, L.tyurin, L.K)
    assert rep.ok
    assert np.max(np.abs(rep.lax.betas - L.betas)) < 1e-8
    assert np.max(np.abs(rep.lax.kappas - L.kappas)) < 1e-8


def test_double_pole_is_reported(genus2_lax):
    L = genus2_lax
    g = L.tyurin.gammas[0]
    bump = F.make(G2, [0.5], None, [(g.x, 2)])
    grid = [[L.matrix[i, k] for k in range(2)] for i in range(2)]
    grid[0][1] = grid[0][1] + bump
    rep = validate_lax(MatrixFunc.from_grid(grid), L.tyurin, L.K)
    bad = [v for v in rep.violations if v.clause == "simple pole"]
    assert bad and bad[0].index == 0 and bad[0].defect > 0


def test_zero_beta_and_kappa_give_zero_matrix():
    p = random_params(G2, 2, np.random.default_rng(4), K2)
    z = KricheverTyurinParams(p.gammas, p.alphas, np.zeros_like(p.betas), np.zeros_like(p.kappas))
    L = construct_lax(G2, K2, z)
    assert all(L.matrix[i, k].is_zero or np.max(np.abs(L.matrix[i, k].a)) < 1e-10 for i in range(2) for k in range(2))


def test_parameter_count_exceeds_traceless_count_by_one():
    for l in (2, 3):
        p = random_params(G2, l, np.random.default_rng(5), K2)
        nbeta = admissible_beta_basis(G2, K2, p.gammas, p.alphas).shape[1]
        n = len(p.gammas)
        count = n + n * (l - 1) + nbeta + n
        assert count == expected_dims(l, 2).dimLK + 1


def test_hitchin_diagonal():
    m = MatrixFunc.constant(G2, [[2.0, 0.0], [0.0, -2.0]])
    L = validate_lax(m, TyurinData(), K2).lax
    h1, h2 = hitchin_invariants(L).h
    assert h1.is_zero and h2.almost_equal(F.const(G2, -4.0))


def test_hitchin_mumford():
    L = mumford_lax([-1, 0, 1], [0], [0, 1])
    h1, h2 = hitchin_invariants(L).h
    assert h1.is_zero
    assert np.allclose(h2.a, [0, 1, 0, -1])


def test_hitchin_holomorphic_at_tyurin_points(genus2_lax):
    res = hitchin_invariants(genus2_lax)
    assert res.max_tail < 1e-9
    for h in res.h:
        for g in genus2_lax.tyurin.gammas:
            assert valuation(h, g) >= 0


def test_gauge_identity_and_invariance(genus2_lax):
    L = genus2_lax
    same = gauge_transform(L, np.eye(2))
    assert all(same.matrix[i, k].almost_equal(L.matrix[i, k]) for i in range(2) for k in range(2))
    rng = np.random.default_rng(9)
    W = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    Lg = gauge_transform(L, W)
    assert validate_lax(Lg.matrix, Lg.tyurin, Lg.K).ok
    assert np.allclose(Lg.kappas, L.kappas, atol=1e-10)
    for a, b in zip(hitchin_invariants(Lg).h, hitchin_invariants(L).h):
        assert a.almost_equal(b, 1e-10)


def test_gauge_mumford_revalidates():
    L = mumford_lax([-1, 0, 1], [0], [0, 1])
    Lg = gauge_transform(L, np.array([[1.0, 0.3], [-0.2, 2.0]]))
    assert validate_lax(Lg.matrix, Lg.tyurin, Lg.K).ok


@pytest.mark.parametrize("l,g,dims", [(2, 2, (12, 5, 6, 10)), (3, 2, (27, 10, 12, 20)), (2, 3, (20, 9, 10, 18))])
def test_expected_dims(l, g, dims):
    d = expected_dims(l, g)
    assert (d.dimLK, d.spectralGenus, d.eigenDivisorDegree, d.dimCotangent) == dims


def test_expected_dims_rank_one():
    with pytest.warns(RuntimeWarning):
        d = expected_dims(1, 1)
    assert d.spectralGenus == 1 and d.eigenDivisorDegree == 1
    assert expected_dims(1, 3).spectralGenus == 3


def test_construct_rejects_point_on_K():
    p = random_params(G2, 2, np.random.default_rng(1), K2)
    bad = Divisor.from_pairs([(p.gammas[0], 1)])
    with pytest.raises(Exception):
        construct_lax(G2, K2 + bad, p)


def test_roundtrip_many_seeds():
    for seed in range(100):
        p = random_params(G2, 2, np.random.default_rng(1000 + seed), K2)
        L = construct_lax(G2, K2, p)
        rep = validate_lax(L.matrix, L.tyurin, L.K)
        assert rep.ok
        assert np.max(np.abs(rep.lax.betas - p.betas)) < 1e-8
        assert np.max(np.abs(rep.lax.kappas - p.kappas)) < 1e-8
