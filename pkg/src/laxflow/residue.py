"""Residue pairing of eigenvector cocycles with holomorphic differentials.

For an l = 2 polynomial Lax matrix with flow dL/dt = [M, L], the row
eigenvector psi = (L21, mu - L11) satisfies psi_t + psi M = lambda psi for a
scalar function lambda on the spectral curve. At the places over infinity
the principal part of lambda equals that of (psi M)_k / psi_k for any
component whose time derivative ratio psi_t,k / psi_k stays regular there.
These principal parts (the tails) form a cocycle whose class modulo tails
of global functions (polynomials in z and nu) lives in H^1(O), which the
residue pairing with z^j dz / nu identifies with C^g.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._series import Series, poly_at
from .flow import _padd, lax_to_poly, poly_mul, poly_pow
from .jacobian import HyperellipticModel, hyperelliptic_model
from .laxmat import KricheverLax, MatrixFunc
from .spectral import spectral_curve

__all__ = [
    "ResidueError",
    "InfinityPlace",
    "ResidueSection",
    "TangentVector",
    "ConstancyReport",
    "LinearityResidueReport",
    "EquivalenceReport",
    "infinity_chart",
    "lambda_tails",
    "global_tail_matrix",
    "class_residual",
    "connecting_map",
    "constancy_test",
    "linearity_test",
    "equivalence_checks",
    "model_of",
]

SERIES_PAD = 24


class ResidueError(ValueError):
    pass


@dataclass(frozen=True)
class InfinityPlace:
    """A place over z = infinity with local parameter w and series for z, nu, dz/dw."""

    index: int
    z: Series
    nu: Series
    dz: Series


def model_of(L: KricheverLax) -> HyperellipticModel:
    return hyperelliptic_model(spectral_curve(L))


def infinity_chart(m: HyperellipticModel, prec: int) -> list[InfinityPlace]:
    """Places over infinity of nu^2 = Q with series known below w^prec.

    Odd degree: one branch place, z = w^-2. Even degree: two places, z = 1/w,
    with nu = +-sqrt(lc) w^(-deg/2) (1 + ...).
    """
    N = m.degree
    if N % 2:
        z = Series.monomial(-2, prec + 2 * N + 4)
        roots = [None]
    else:
        z = Series.monomial(-1, prec + N + 4)
        r0 = np.sqrt(m.lc)
        roots = [r0, -r0]
    Qs = poly_at(m.Q, z)
    out = []
    for i, r0 in enumerate(roots):
        nu = Qs.sqrt(r0)
        out.append(InfinityPlace(i, z, nu, z.derivative()))
    return out


def _mat_series(Pz: np.ndarray, z: Series) -> list[list[Series]]:
    l = Pz.shape[1]
    return [[poly_at(Pz[:, i, k], z) for k in range(l)] for i in range(l)]


def _principal(s: Series, T: int) -> np.ndarray:
    """Coefficients of w^-1 .. w^-T."""
    return s.window(-T, -1)[::-1]


def _as_poly(M) -> np.ndarray:
    if isinstance(M, np.ndarray):
        return np.asarray(M, dtype=complex)
    if isinstance(M, KricheverLax):
        return lax_to_poly(M)
    if isinstance(M, MatrixFunc):
        return lax_to_poly(M)
    raise TypeError("M must be a coefficient array or a polynomial matrix")


def _pole_depth(m: HyperellipticModel, PL: np.ndarray, PM: np.ndarray) -> int:
    # lambda = (psi M)_k / psi_k has pole order at most that of M in w
    r = 2 if m.degree % 2 else 1
    return max(r * (PM.shape[0] - 1), 1) + r * max(PL.shape[0], 1)


@dataclass(frozen=True, eq=False)
class ResidueSection:
    """Principal parts of lambda at the places over infinity.

    ``tails[p, k - 1]`` is the coefficient of w^-k at place p.
    """

    tails: np.ndarray
    depth: int
    t: float
    components: tuple  # eigenvector component used per place
    disagreement: float

    @property
    def vector(self) -> np.ndarray:
        return self.tails.ravel()

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "depth": self.depth,
            "tails": [[[c.real, c.imag] for c in row] for row in self.tails],
            "components": list(self.components),
            "disagreement": self.disagreement,
        }


def _lambda_series(PL, PM, place: InfinityPlace, m: HyperellipticModel, PLdot=None, PMdot=None):
    """lambda_k series for k = 0, 1 at one place, or their time derivatives."""
    z = place.z
    Ls = _mat_series(PL, z)
    Ms = _mat_series(PM, z)
    h1 = poly_at(m.h1, z)
    mu = place.nu - h1 * 0.5
    psi = [Ls[1][0], mu - Ls[0][0]]
    psiM = [psi[0] * Ms[0][k] + psi[1] * Ms[1][k] for k in range(2)]
    lam = [psiM[k] / psi[k] for k in range(2)]
    if PLdot is None:
        return lam, psi
    Ld = _mat_series(PLdot, z)
    Md = _mat_series(PMdot, z)
    psid = [Ld[1][0], -Ld[0][0]]
    dlam = []
    for k in range(2):
        num = psid[0] * Ms[0][k] + psid[1] * Ms[1][k] + psi[0] * Md[0][k] + psi[1] * Md[1][k]
        dlam.append((num - lam[k] * psid[k]) / psi[k])
    return dlam, psi


def _choose(psi) -> int:
    v = [p.valuation() for p in psi]
    return int(np.argmin(v))


def lambda_tails(L, M, model: HyperellipticModel | None = None, depth: int | None = None,
                 t: float = 0.0, Ldot=None, Mdot=None) -> ResidueSection:
    """Tails of lambda (or of d lambda / dt when ``Ldot`` and ``Mdot`` are given)."""
    if isinstance(L, KricheverLax):
        if L.l != 2 or not L.curve.is_rational:
            raise ResidueError("residue pairing is implemented for l = 2 over the rational line")
        model = model or model_of(L)
    elif model is None:
        raise ResidueError("a model is required when L is a coefficient array")
    PL = _as_poly(L)
    PM = _as_poly(M)
    T = depth or _pole_depth(model, PL, PM)
    places = infinity_chart(model, 3 * T + SERIES_PAD)
    rows, comps, dis = [], [], 0.0
    for pl in places:
        if Ldot is None:
            lam, psi = _lambda_series(PL, PM, pl, model)
        else:
            lam, psi = _lambda_series(PL, PM, pl, model, _as_poly(Ldot), _as_poly(Mdot))
        k = _choose(psi)
        tails = [_principal(s, T) for s in lam]
        rows.append(tails[k])
        comps.append(k)
        dis = max(dis, float(np.max(np.abs(tails[0] - tails[1]))))
    return ResidueSection(np.array(rows), T, float(t), tuple(comps), dis)


def global_tail_matrix(model: HyperellipticModel, depth: int) -> np.ndarray:
    """Columns are tails of z^a and z^a nu with pole order at most ``depth``."""
    places = infinity_chart(model, 3 * depth + SERIES_PAD)
    r = 2 if model.degree % 2 else 1
    half = model.degree / 2.0
    cols = []
    a = 1
    while r * a <= depth:
        cols.append(np.concatenate([_principal(p.z ** a, depth) for p in places]))
        a += 1
    a = 0
    while r * (a + half) <= depth:
        cols.append(np.concatenate([_principal((p.z ** a) * p.nu if a else p.nu, depth) for p in places]))
        a += 1
    if not cols:
        return np.zeros((len(places) * depth, 0), dtype=complex)
    return np.stack(cols, axis=1)


def class_residual(r: ResidueSection, model: HyperellipticModel) -> float:
    """Norm of the tails modulo global tails (absolute)."""
    G = global_tail_matrix(model, r.depth)
    v = r.vector
    if G.shape[1] == 0:
        return float(np.linalg.norm(v))
    x, *_ = np.linalg.lstsq(G, v, rcond=None)
    return float(np.linalg.norm(v - G @ x))


@dataclass(frozen=True)
class TangentVector:
    components: np.ndarray

    def to_json(self) -> list:
        return [[c.real, c.imag] for c in self.components]


def connecting_map(r: ResidueSection, model: HyperellipticModel) -> TangentVector:
    """Sum over places at infinity of res(lambda z^j dz / nu), j < genus."""
    T = r.depth
    places = infinity_chart(model, 3 * T + SERIES_PAD)
    g = model.genus
    out = np.zeros(g, dtype=complex)
    for j in range(g):
        re, im = [], []
        for pl, tails in zip(places, r.tails):
            om = (pl.z ** j) * pl.dz / pl.nu if j else pl.dz / pl.nu
            c = om.window(0, T - 1)
            terms = tails * c  # w^-k times w^(k-1)
            re.extend(terms.real)
            im.extend(terms.imag)
        out[j] = complex(math.fsum(re), math.fsum(im))
    return TangentVector(out)


# ---------------------------------------------------------------------------
# tests on flows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstancyReport:
    residual: float
    scale: float
    ok: bool

    def to_json(self) -> dict:
        return {"residual": self.residual, "scale": self.scale, "ok": self.ok}


def constancy_test(L: KricheverLax, M, model: HyperellipticModel | None = None, tol: float = 1e-9) -> ConstancyReport:
    """The flow generated by M is trivial iff the lambda tails are global tails."""
    model = model or model_of(L)
    r = lambda_tails(L, M, model)
    res = class_residual(r, model)
    scale = max(1.0, float(np.max(np.abs(r.vector), initial=0.0)))
    return ConstancyReport(res / scale, scale, res / scale < tol)


def _mdot(mfun, P: np.ndarray, Pdot: np.ndarray, t: float, s: float = 0.125) -> np.ndarray:
    """d/dt M(P + t Pdot, t) by a five-point stencil, exact for quartic dependence."""
    vals = {k: mfun(P + k * s * Pdot, t + k * s) for k in (-2, -1, 1, 2)}
    n = max(v.shape[0] for v in vals.values())

    def pad(A):
        out = np.zeros((n,) + A.shape[1:], dtype=complex)
        out[: A.shape[0]] = A
        return out

    return (pad(vals[-2]) - 8 * pad(vals[-1]) + 8 * pad(vals[1]) - pad(vals[2])) / (12 * s)


@dataclass(frozen=True)
class LinearityResidueReport:
    times: np.ndarray
    residuals: np.ndarray  # class of d lambda / dt per sample, relative
    max_residual: float
    ok: bool

    def to_json(self) -> dict:
        return {
            "times": list(map(float, self.times)),
            "residuals": list(map(float, self.residuals)),
            "maxResidual": self.max_residual,
            "ok": self.ok,
        }


def linearity_test(tr, mfun, model: HyperellipticModel | None = None, tol: float = 1e-8) -> LinearityResidueReport:
    """Constancy in time of the class of the lambda tails along a trajectory.

    ``mfun(P, t)`` returns the coefficient array of M for the state P. The
    time derivative of the tails is computed exactly from dL/dt = [M, L] and
    dM/dt, so no finite differences in the sample spacing enter.
    """
    model = model or model_of(tr.samples[0].L)
    times, res = [], []
    for s in tr.samples:
        P = s.poly if s.poly is not None else lax_to_poly(s.L)
        M = mfun(P, s.t)
        Pdot = poly_mul(M, P) - poly_mul(P, M)
        Pdot = Pdot[: P.shape[0]]
        Mdot = _mdot(mfun, P, Pdot, s.t)
        r = lambda_tails(P, M, model, t=s.t)
        dr = lambda_tails(P, M, model, depth=r.depth, t=s.t, Ldot=Pdot, Mdot=Mdot)
        scale = max(float(np.linalg.norm(r.vector)), 1e-300)
        times.append(s.t)
        res.append(class_residual(dr, model) / scale)
    res = np.array(res)
    mx = float(np.max(res))
    return LinearityResidueReport(np.array(times), res, mx, mx < tol)


@dataclass(frozen=True)
class EquivalenceReport:
    kind: str
    defects: tuple
    max_defect: float
    ok: bool

    def to_json(self) -> dict:
        return {"kind": self.kind, "defects": list(self.defects), "maxDefect": self.max_defect, "ok": self.ok}


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    """Relative difference, absolute once the reference is below unit size."""
    return float(np.max(np.abs(a - b)) / max(float(np.max(np.abs(b))), 1.0))


def equivalence_checks(L: KricheverLax, M, kind: str, items, tol: float | None = None) -> EquivalenceReport:
    """Gauge ("gauge", constant matrices W) or shift ("qshift", polynomials Q in L) invariance.

    Gauge: the tangent vector of (W^-1 L W, W^-1 M W) must match that of
    (L, M). Shift: the tails of M + Q(L) minus the tails of M must lie in
    the span of global tails; ``items`` are ascending coefficients of Q.
    """
    from .laxmat import gauge_transform

    model = model_of(L)
    PM = _as_poly(M)
    v0 = connecting_map(lambda_tails(L, PM, model), model).components
    defects = []
    if kind == "gauge":
        tol = 1e-9 if tol is None else tol
        for W in items:
            W = np.asarray(W, dtype=complex)
            Winv = np.linalg.inv(W)
            Lg = gauge_transform(L, W)
            Mg = np.einsum("ab,kbc,cd->kad", Winv, PM, W)
            v = connecting_map(lambda_tails(Lg, Mg, model), model).components
            defects.append(_rel(v, v0))
    elif kind == "qshift":
        # the tails of (M + Q(L)) - tails of M must be tails of a global function
        tol = 1e-8 if tol is None else tol
        PL = lax_to_poly(L)
        r0 = lambda_tails(L, PM, model)
        for q in items:
            S = _padd(np.zeros((1, 2, 2), dtype=complex), PM)
            for d, c in enumerate(q):
                S = _padd(S, c * poly_pow(PL, d))
            r = lambda_tails(L, S, model, depth=r0.depth)
            diff = ResidueSection(r.tails - r0.tails, r0.depth, 0.0, r.components, 0.0)
            scale = max(float(np.linalg.norm(r0.vector)), 1.0)
            defects.append(class_residual(diff, model) / scale)
    else:
        raise ValueError(f"unknown equivalence kind {kind!r}")
    mx = max(defects) if defects else 0.0
    return EquivalenceReport(kind, tuple(defects), mx, mx < tol)
