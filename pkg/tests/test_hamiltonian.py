import numpy as np
import pytest

from laxflow.curvefield import Place
from laxflow.flow import AnsatzSpec, integrate_flow
from laxflow.hamiltonian import (
    HamiltonianSpec,
    commuting_flows_check,
    conservation_check,
    constant_generator,
    hamiltonian_value,
)
from laxflow.laxmat import gauge_transform, mumford_lax

INF = Place("infinity")
MUMFORD = mumford_lax([-1, 0, 1], [0], [0, 1])
F_G2 = [0.3, 1, 0, -0.5, 0, 1]
A1 = AnsatzSpec.at_infinity(1, -1)
A2 = AnsatzSpec.at_infinity(1, -2)


def test_traceless_linear_hamiltonian_vanishes(mumford_g2):
    for m in range(-6, 2):
        assert hamiltonian_value(mumford_g2, HamiltonianSpec(INF, 1, m)) == 0


@pytest.mark.parametrize("m", range(-6, 1))
def test_quadratic_hamiltonians_are_curve_coefficients(m, mumford_g2):
    # tr L^2 = 2 f, so H(inf, 2, m) = f_{-m-1}
    k = -m - 1
    want = F_G2[k] if 0 <= k < len(F_G2) else 0.0
    assert abs(hamiltonian_value(mumford_g2, HamiltonianSpec(INF, 2, m)) - want) < 1e-12


def test_benchmark_values():
    assert abs(hamiltonian_value(MUMFORD, HamiltonianSpec(INF, 2, -4)) - 1) < 1e-14
    assert abs(hamiltonian_value(MUMFORD, HamiltonianSpec(INF, 2, -2)) + 1) < 1e-14


def test_bad_degree():
    with pytest.raises(ValueError):
        hamiltonian_value(MUMFORD, HamiltonianSpec(INF, 0, 0))


def test_gauge_invariance(genus2_lax, mumford_g2):
    W = np.array([[1.2, -0.4], [0.7, 0.9]])
    for L in (genus2_lax, mumford_g2):
        for n, m in ((2, 0), (2, 1), (3, 0), (2, -1)):
            h = HamiltonianSpec(INF, n, m)
            a = hamiltonian_value(L, h)
            b = hamiltonian_value(gauge_transform(L, W), h)
            assert abs(a - b) <= 1e-10 * max(1.0, abs(a))


def test_for_ansatz_raises_degree():
    assert HamiltonianSpec.for_ansatz(A1) == [HamiltonianSpec(INF, 2, -1)]


def test_conserved_along_flow(mumford_g2):
    tr = integrate_flow(mumford_g2, A1, 1.0, 1e-3, stride=100)
    specs = [HamiltonianSpec(INF, n, m) for n in (2, 3) for m in range(-6, 1)]
    rep = conservation_check(tr, specs)
    assert rep.ok and rep.max_drift < 1e-8


def test_broken_integrator_breaks_conservation(mumford_g2):
    tr = integrate_flow(mumford_g2, A1, 0.2, 1e-3, stride=50, broken=True)
    rep = conservation_check(tr, [HamiltonianSpec(INF, 2, m) for m in range(-6, 1)])
    assert not rep.ok and rep.max_drift > 1e-4


def test_same_generator_commutes(mumford_g2):
    rep = commuting_flows_check(mumford_g2, A1, A1, 0.1, 0.07, dts=(1e-2,))
    assert rep.discrepancies[0] < 1e-13


def test_commuting_pair_fourth_order(mumford_g2):
    rep = commuting_flows_check(mumford_g2, A1, A2, 0.2, 0.16, dts=(0.04, 0.02, 0.01))
    assert rep.order is not None and rep.order > 3.5
    small = commuting_flows_check(mumford_g2, A1, A2, 0.2, 0.16, dts=(1e-3,))
    assert small.ok and small.discrepancies[0] < 1e-6


def test_benchmark_pair_at_roundoff():
    rep = commuting_flows_check(MUMFORD, A1, A2, 0.2, 0.16, dts=(0.04, 0.02, 0.01))
    assert rep.at_floor and rep.order is None and rep.ok


def test_constant_generators_do_not_commute(mumford_g2):
    E21 = constant_generator([[0, 0], [1, 0]])
    E12 = constant_generator([[0, 1], [0, 0]])
    rep = commuting_flows_check(mumford_g2, E21, E12, 0.2, 0.2, dts=(2e-3, 1e-3))
    assert min(rep.discrepancies) > 1e-2 and not rep.ok
