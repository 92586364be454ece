import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from laxflow.curvefield import BaseCurve, canonical_divisor
from laxflow.laxmat import construct_lax, mumford_lax, random_params


def mumford_from_roots(f, roots):
    """Mumford matrix [[v, w], [u, -v]] with u = prod (z - r), v interpolating sqrt(f) at the roots."""
    f = np.asarray(f, dtype=complex)
    r = np.asarray(roots, dtype=complex)
    u = P.polyfromroots(r)
    vals = np.sqrt(P.polyval(r, f))
    v = P.polyfit(r, vals, len(r) - 1) if len(r) > 1 else vals[:1]
    w, rem = P.polydiv(P.polysub(f, P.polymul(v, v)), u)
    assert np.max(np.abs(rem)) < 1e-10
    return mumford_lax(u, v, w)


@pytest.fixture(scope="session")
def genus2_curve():
    return BaseCurve.hyperelliptic([1, 1, 0, 0, 0, 1])


@pytest.fixture(scope="session")
def genus2_lax(genus2_curve):
    K = canonical_divisor(genus2_curve)
    return construct_lax(genus2_curve, K, random_params(genus2_curve, 2, np.random.default_rng(0), K))


@pytest.fixture(scope="session")
def mumford_g2():
    """Genus-2 Mumford matrix for f = z^5 - 0.5 z^3 + z + 0.3, off the branch locus."""
    return mumford_from_roots([0.3, 1, 0, -0.5, 0, 1], [0.4 + 0.3j, -0.6 + 0.2j])


def random_element(curve, rng, max_deg=4, max_poles=3):
    """(a + y b) / prod (x - r) with random coefficients and simple finite poles."""
    from laxflow.curvefield import FunctionFieldElement

    da, db = rng.integers(0, max_deg + 1, size=2)
    a = rng.normal(size=da + 1) + 1j * rng.normal(size=da + 1)
    b = rng.normal(size=db + 1) + 1j * rng.normal(size=db + 1)
    k = int(rng.integers(0, max_poles + 1))
    roots = 1.5 * (rng.normal(size=k) + 1j * rng.normal(size=k))
    return FunctionFieldElement.make(curve, a, b, [(r, 1) for r in roots])
