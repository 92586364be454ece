"""Spectral curves det(mu - L(p)) = 0, fiber lifting, eigenvectors and eigen divisors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curvefield import (
    BaseCurve,
    CurveError,
    Divisor,
    FunctionFieldElement,
    Place,
    _cplx,
    _pval,
    cluster_roots,
    infinity_places,
    poles_of,
    regular_place,
    valuation,
    zeros_of,
)
from .laxmat import KricheverLax, hitchin_invariants

__all__ = [
    "SpectralError",
    "ReducibleSpectralCurveError",
    "NonSimpleRamificationError",
    "BranchProximityError",
    "EigenvectorError",
    "SpectralCurve",
    "SpectralPoint",
    "EigenVector",
    "EigenDivisor",
    "spectral_curve",
    "spectral_genus",
    "discriminant",
    "lift_fiber",
    "fiber_roots",
    "left_eigenvector",
    "eigen_divisor",
]


class SpectralError(ValueError):
    pass


class ReducibleSpectralCurveError(SpectralError):
    pass


class NonSimpleRamificationError(SpectralError):
    pass


class BranchProximityError(SpectralError):
    def __init__(self, msg: str, pair=None):
        super().__init__(msg)
        self.pair = pair


class EigenvectorError(SpectralError):
    pass


@dataclass(frozen=True)
class SpectralPoint:
    place: Place
    mu: complex
    sheet: int = 0

    def to_json(self) -> dict:
        return {"place": self.place.to_json(), "mu": _cplx(self.mu), "sheet": self.sheet}


@dataclass(frozen=True, eq=False)
class SpectralCurve:
    base: BaseCurve
    l: int
    h: tuple
    disc: FunctionFieldElement
    branch: Divisor
    genus: int
    lax: KricheverLax
    base_place: Place

    def coefficients_at(self, p: Place) -> np.ndarray:
        """[1, h_1(p), ..., h_l(p)] (descending powers of mu)."""
        return np.array([1.0] + [h.evaluate(p) for h in self.h], dtype=complex)

    def R(self, mu, p: Place) -> complex:
        return complex(np.polyval(self.coefficients_at(p), mu))

    @property
    def branch_points(self) -> list[Place]:
        return self.branch.places

    def to_json(self) -> dict:
        return {
            "l": self.l,
            "h": [e.to_json() for e in self.h],
            "branch": self.branch.to_json(),
            "genus": self.genus,
        }


def discriminant(h: list[FunctionFieldElement]) -> FunctionFieldElement:
    l = len(h)
    if l == 2:
        a, b = h
        return a * a - b.scale(4.0)
    if l == 3:
        a, b, c = h
        return (
            (a * b * c).scale(18.0)
            - (a * a * a * c).scale(4.0)
            + a * a * b * b
            - (b * b * b).scale(4.0)
            - (c * c).scale(27.0)
        )
    raise SpectralError("spectral curves are supported for l = 2 and l = 3")


def _effective_orders(h, disc, l: int) -> list[tuple[Place, int]]:
    """Order of the discriminant after rescaling mu to be integral, per place."""
    cands: list[Place] = []
    for p, _ in zeros_of(disc).support:
        cands.append(p)
    for e in list(h) + [disc]:
        for p, _ in poles_of(e).support:
            cands.append(p)
    cands.extend(infinity_places(disc.curve))
    out: list[tuple[Place, int]] = []
    seen: list[Place] = []
    for p in cands:
        if any(q.same_as(p, 1e-6) for q in seen):
            continue
        seen.append(p)
        k = 0
        for d, e in enumerate(h, start=1):
            if e.is_zero:
                continue
            v = valuation(e, p)
            if v < 0:
                k = max(k, math.ceil(-v / d))
        ev = valuation(disc, p, tol=1e-8) + l * (l - 1) * k
        if ev:
            out.append((p, ev))
    return out


def spectral_curve(L: KricheverLax, base_x=0.3 + 0.7j) -> SpectralCurve:
    l = L.l
    if l not in (2, 3):
        raise SpectralError("spectral curves are supported for l = 2 and l = 3")
    h = hitchin_invariants(L).h
    disc = discriminant(list(h))
    if disc.is_zero or (disc.den_degree == 0 and not np.any(disc.b) and np.max(np.abs(disc.a[1:]), initial=0.0) < 1e-12 * max(abs(disc.a[0]), 1.0)):
        if disc.is_zero or abs(disc.a[0]) < 1e-12:
            raise ReducibleSpectralCurveError("characteristic polynomial has a repeated factor")
        raise ReducibleSpectralCurveError("discriminant is constant: the spectral curve is reducible")
    orders = _effective_orders(h, disc, l)
    bad = [(p, e) for p, e in orders if e < 0]
    if bad:
        raise SpectralError(f"negative effective discriminant order at {bad[0][0]}")
    nonsimple = [(p, e) for p, e in orders if e >= 2]
    if nonsimple:
        p, e = nonsimple[0]
        raise NonSimpleRamificationError(f"discriminant vanishes to order {e} at {p}")
    branch = Divisor.from_pairs([(p, e) for p, e in orders])
    B = branch.degree
    if B % 2:
        raise NonSimpleRamificationError(f"odd branch degree {B}")
    if B == 0 and L.curve.is_rational:
        raise ReducibleSpectralCurveError("unramified cover of the rational line is reducible")
    g = L.curve.genus
    genus = l * (g - 1) + 1 + B // 2
    base = regular_place(L.curve, base_x)
    return SpectralCurve(L.curve, l, tuple(h), disc, branch, genus, L, base)


def spectral_genus(S: SpectralCurve) -> int:
    B = S.branch.degree
    if B % 2 or any(m != 1 for _, m in S.branch.support):
        raise NonSimpleRamificationError("genus needs simple ramification")
    return S.l * (S.base.genus - 1) + 1 + B // 2


# ---------------------------------------------------------------------------
# fibers
# ---------------------------------------------------------------------------

def _polish(coeffs, r, iters: int = 20):
    d = np.polyder(coeffs)
    for _ in range(iters):
        v = np.polyval(coeffs, r)
        dv = np.polyval(d, r)
        if dv == 0:
            break
        step = v / dv
        r = r - step
        if abs(step) <= 1e-16 * max(1.0, abs(r)):
            break
    return r


def fiber_roots(coeffs, sep_tol: float = 1e-7) -> np.ndarray:
    """Roots of a monic descending-coefficient polynomial, Newton polished."""
    coeffs = np.asarray(coeffs, dtype=complex)
    roots = np.roots(coeffs)
    roots = np.array([_polish(coeffs, r) for r in roots])
    scale = max(1.0, float(np.max(np.abs(roots))))
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if abs(roots[i] - roots[j]) < sep_tol * scale:
                raise BranchProximityError(
                    f"fiber roots {roots[i]:.6g} and {roots[j]:.6g} collide", (i, j)
                )
    return roots


def _continue_place(curve: BaseCurve, p: Place, x) -> Place:
    if curve.is_rational:
        return Place("finite_regular", complex(x))
    return regular_place(curve, x, p.y)


def lift_fiber(S: SpectralCurve, p: Place, steps: int = 64) -> list[SpectralPoint]:
    """The l points over p, labelled by continuation from the stored base place."""
    if p.chart != "finite_regular":
        raise SpectralError("fibers are lifted over finite regular places only")
    base = S.base_place
    cur = fiber_roots(S.coefficients_at(base))
    order = np.lexsort((cur.imag, cur.real))
    cur = cur[order]
    q = base
    # continue the base point in x (and y on hyperelliptic bases)
    for s in range(1, steps + 1):
        x = base.x + (p.x - base.x) * s / steps
        q = _continue_place(S.base, q, x)
        new = np.roots(S.coefficients_at(q))
        matched = np.empty_like(cur)
        used = set()
        for i, r in enumerate(cur):
            dists = [abs(r - v) if j not in used else np.inf for j, v in enumerate(new)]
            j = int(np.argmin(dists))
            used.add(j)
            matched[i] = new[j]
        cur = matched
    if not S.base.is_rational and abs(q.y - p.y) > abs(q.y + p.y):
        # the straight path ended on the other base sheet; labels follow the path
        pass
    coeffs = S.coefficients_at(p)
    roots = fiber_roots(coeffs)
    out = []
    for i, r in enumerate(cur):
        j = int(np.argmin(np.abs(roots - r)))
        out.append(SpectralPoint(p, complex(roots[j]), i))
    return out


# ---------------------------------------------------------------------------
# eigenvectors and the eigen divisor
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EigenVector:
    point: SpectralPoint
    psi: np.ndarray
    norm: str


def _adjugate(B: np.ndarray) -> np.ndarray:
    l = B.shape[0]
    adj = np.zeros_like(B)
    for i in range(l):
        for j in range(l):
            minor = np.delete(np.delete(B, j, axis=0), i, axis=1)
            adj[i, j] = (-1) ** (i + j) * (np.linalg.det(minor) if minor.size else 1.0)
    return adj


def left_eigenvector(L: KricheverLax, pt: SpectralPoint, norm: str = "adjugate-row") -> EigenVector:
    A = L.matrix.evaluate(pt.place)
    l = A.shape[0]
    B = pt.mu * np.eye(l) - A
    if norm == "adjugate-row":
        if l == 2:
            psi = np.array([A[1, 0], pt.mu - A[0, 0]])
        else:
            psi = _adjugate(B)[-1]
        if np.max(np.abs(psi)) < 1e-14 * max(1.0, np.max(np.abs(A))):
            raise EigenvectorError(f"adjugate row vanishes at {pt.place}")
        return EigenVector(pt, psi, norm)
    if norm == "last-coordinate-1":
        _, s, vh = np.linalg.svd(B.T)
        if l > 1 and s[-2] < 1e-8 * max(s[0], 1e-300):
            raise EigenvectorError("eigenvalue collision: nullspace is not one-dimensional")
        v = vh[-1].conj()
        if abs(v[-1]) < 1e-12 * np.max(np.abs(v)):
            raise EigenvectorError(f"last coordinate of psi vanishes at {pt.place}")
        return EigenVector(pt, v / v[-1], norm)
    raise ValueError(f"unknown normalization {norm!r}")


@dataclass(frozen=True)
class EigenDivisor:
    points: tuple  # of (SpectralPoint, multiplicity)
    degenerate: tuple = ()  # indices of points lying over branch points

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.points)

    def to_json(self) -> list:
        return [{"point": p.to_json(), "mult": m} for p, m in self.points]


def eigen_divisor(L: KricheverLax, S: SpectralCurve) -> EigenDivisor:
    """Zeros of the adjugate-row eigenvector (l = 2): L21 = 0 on the sheet mu = L11.

    Places of K where L21 has less than the allowed pole order contribute the
    shortfall, so the degree is the same for every matrix in a gauge orbit.
    """
    if L.l != 2:
        raise SpectralError("closed-form eigen divisor is implemented for l = 2")
    L21, L11 = L.matrix[1, 0], L.matrix[0, 0]
    if L21.is_zero:
        raise SpectralError("L21 vanishes identically; the adjugate row is degenerate")
    pts = []
    degen = []
    for p, m in zeros_of(L21).support:
        if p.chart == "infinity":
            mu = complex("nan")
        else:
            mu = L11.evaluate(p)
        pt = SpectralPoint(p, mu, 0)
        if p.chart != "infinity":
            coeffs = S.coefficients_at(p)
            roots = np.roots(coeffs)
            scale = max(1.0, float(np.max(np.abs(roots))))
            if abs(roots[0] - roots[-1]) < 1e-6 * scale:
                degen.append(len(pts))
        pts.append((pt, m))
    # where L21 falls short of the pole order K allows, the normalized
    # eigenvector keeps a pole of the missing order
    for p, k in L.K.support:
        short = k - max(-valuation(L21, p), 0)
        if short > 0:
            mu = complex("nan") if p.chart == "infinity" else L11.evaluate(p)
            pts.append((SpectralPoint(p, mu, 0), short))
    return EigenDivisor(tuple(pts), tuple(degen))
