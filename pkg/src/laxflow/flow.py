"""Lax flows dL/dt = [M, L]: the M-ansatz, tangency checks and integrators.

Two regimes are supported.

* Fixed poles (rational line, polynomial L). The state is the coefficient
  array of L, shape (deg + 1, l, l), ascending in z, integrated with RK4.
  An ansatz entry (inf, n, m) uses the chart w = 1/z, so w^-m L^n = z^m L^n
  and M is its polynomial part. An entry at z = 0 contributes
  -(z^-m L^n)_{>=0}, which generates the same flow as the singular part.
* Moving poles (hyperelliptic base). The state is the Krichever-Tyurin data
  (x_j, y_j, alpha_j, beta_j, kappa_j); L is rebuilt from it with
  :func:`construct_lax`. Time derivatives of the data are read off the local
  expansion of [M, L] at the Tyurin points and integrated with the midpoint
  rule, followed by a least-squares reprojection of beta onto the residue
  constraints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .curvefield import (
    BaseCurve,
    Divisor,
    FunctionFieldElement,
    Place,
    infinity_places,
    laurent_series,
    places_over,
    regular_place,
    rr_space,
    valuation,
)
from .laxmat import (
    InadmissibleParametersError,
    KricheverLax,
    KricheverTyurinParams,
    LaxError,
    MatrixFunc,
    MatSeries,
    TyurinData,
    Violation,
    admissible_beta_basis,
    construct_lax,
    local_matrix,
)

__all__ = [
    "FlowError",
    "AnsatzInfeasibleError",
    "StepRejectedError",
    "AnsatzEntry",
    "AnsatzSpec",
    "FlowState",
    "Trajectory",
    "TangencyReport",
    "lax_to_poly",
    "poly_to_lax",
    "poly_mul",
    "poly_pow",
    "poly_charpoly",
    "ansatz_m_poly",
    "build_m",
    "tangency_check",
    "integrate_flow",
    "isospectral_drift",
    "beta_constraint_matrix",
]


class FlowError(RuntimeError):
    pass


class AnsatzInfeasibleError(FlowError):
    def __init__(self, msg: str, defect: float = 0.0):
        super().__init__(msg)
        self.defect = defect


class StepRejectedError(FlowError):
    pass


@dataclass(frozen=True)
class AnsatzEntry:
    place: Place
    n: int
    m: int

    def to_json(self) -> dict:
        return {"place": self.place.to_json(), "n": self.n, "m": self.m}

    @classmethod
    def from_json(cls, d) -> "AnsatzEntry":
        return cls(Place.from_json(d["place"]), int(d["n"]), int(d["m"]))


@dataclass(frozen=True)
class AnsatzSpec:
    entries: tuple
    p0: Place | None = None

    @classmethod
    def at_infinity(cls, n: int, m: int, p0: Place | None = None, sheet: int = 0) -> "AnsatzSpec":
        return cls((AnsatzEntry(Place("infinity", sheet=sheet), n, m),), p0)

    @property
    def order(self) -> int:
        return max(e.m + e.n for e in self.entries)

    def to_json(self) -> dict:
        return {
            "entries": [e.to_json() for e in self.entries],
            "p0": None if self.p0 is None else self.p0.to_json(),
        }

    @classmethod
    def from_json(cls, d) -> "AnsatzSpec":
        p0 = d.get("p0")
        return cls(tuple(AnsatzEntry.from_json(e) for e in d["entries"]), None if p0 is None else Place.from_json(p0))


# ---------------------------------------------------------------------------
# polynomial matrices (rational regime)
# ---------------------------------------------------------------------------

def lax_to_poly(L) -> np.ndarray:
    m = L.matrix if isinstance(L, KricheverLax) else L
    if not m.curve.is_rational:
        raise FlowError("polynomial state needs the rational line")
    l = m.l
    deg = 0
    for r in m.entries:
        for e in r:
            if e.den:
                raise FlowError("fixed-pole regime needs polynomial entries")
            deg = max(deg, len(e.a) - 1)
    P = np.zeros((deg + 1, l, l), dtype=complex)
    for i in range(l):
        for k in range(l):
            a = m[i, k].a
            P[: len(a), i, k] = a
    return P


def poly_to_lax(P: np.ndarray, curve: BaseCurve | None = None, K: Divisor | None = None) -> KricheverLax:
    curve = curve or BaseCurve.rational()
    P = np.asarray(P, dtype=complex)
    l = P.shape[1]
    grid = [[FunctionFieldElement.poly(curve, P[:, i, k]) for k in range(l)] for i in range(l)]
    if K is None:
        K = Divisor.from_pairs([(Place("infinity"), P.shape[0] - 1)])
    z = np.zeros((0, l, l), dtype=complex)
    return KricheverLax(MatrixFunc.from_grid(grid), TyurinData(), K, np.zeros((0, l)), np.zeros(0), z, z)


def poly_mul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    out = np.zeros((A.shape[0] + B.shape[0] - 1, A.shape[1], B.shape[2]), dtype=complex)
    for i in range(A.shape[0]):
        out[i:i + B.shape[0]] += np.einsum("ab,kbc->kac", A[i], B)
    return out


def poly_pow(A: np.ndarray, n: int) -> np.ndarray:
    l = A.shape[1]
    out = np.eye(l, dtype=complex)[None]
    for _ in range(n):
        out = poly_mul(out, A)
    return out


def poly_charpoly(P: np.ndarray) -> list[np.ndarray]:
    """Coefficient arrays (in z) of h_1..h_l for det(mu - L(z))."""
    l = P.shape[1]
    I = np.eye(l, dtype=complex)[None]
    Mk = np.zeros((1, l, l), dtype=complex)
    c_prev = np.ones(1, dtype=complex)
    out = []
    for k in range(1, l + 1):
        Mk = poly_mul(P, Mk)
        add = c_prev[:, None, None] * I
        n = max(Mk.shape[0], add.shape[0])
        tmp = np.zeros((n, l, l), dtype=complex)
        tmp[: Mk.shape[0]] += Mk
        tmp[: add.shape[0]] += add
        Mk = tmp
        ck = -np.trace(poly_mul(P, Mk), axis1=1, axis2=2) / k
        out.append(ck)
        c_prev = ck
    return out


def ansatz_m_poly(P: np.ndarray, a: AnsatzSpec) -> np.ndarray:
    l = P.shape[1]
    M = np.zeros((1, l, l), dtype=complex)
    for e in a.entries:
        Ln = poly_pow(P, e.n)
        if e.place.chart == "infinity":
            shift = e.m
            sign = 1.0
        elif e.place.chart == "finite_regular" and abs(e.place.x) < 1e-14:
            shift = -e.m
            sign = -1.0
        else:
            raise FlowError("rational-regime ansatz places must be 0 or infinity")
        # coefficient k of Ln multiplies z^(k + shift); keep powers >= 0
        start = max(-shift, 0)
        part = Ln[start:]
        lead = max(shift, 0)
        Mi = np.zeros((lead + part.shape[0], l, l), dtype=complex)
        Mi[lead:] = part
        M = _padd(M, sign * Mi)
    return M


def _padd(A, B):
    n = max(A.shape[0], B.shape[0])
    out = np.zeros((n,) + A.shape[1:], dtype=complex)
    out[: A.shape[0]] += A
    out[: B.shape[0]] += B
    return out


def _pcomm(M, P):
    return poly_mul(M, P) - poly_mul(P, M)


# ---------------------------------------------------------------------------
# M in the Krichever regime
# ---------------------------------------------------------------------------

def _default_p0(L: KricheverLax) -> Place:
    for x0 in (0.37 - 0.29j, -0.71 + 0.53j, 1.13 + 0.41j):
        p = regular_place(L.curve, x0)
        if p.chart == "finite_regular" and all(abs(p.x - g.x) > 0.05 for g in L.tyurin.gammas):
            return p
    raise FlowError("no admissible normalization point")


def _target_principal(L: KricheverLax, e: AnsatzEntry, kp: int) -> MatSeries:
    top = e.m + e.n * kp
    S = local_matrix(L.matrix, e.place, -kp, top + 2)
    out = MatSeries.identity(L.l, S.prec + top + kp * e.n)
    for _ in range(e.n):
        out = out @ S
    return out.shift(-e.m)


def build_m(L: KricheverLax, a: AnsatzSpec) -> MatrixFunc:
    if L.curve.is_rational:
        P = lax_to_poly(L)
        Mp = ansatz_m_poly(P, a)
        return poly_to_lax(Mp).matrix
    l = L.l
    curve = L.curve
    pairs = [(g, 1) for g in L.tyurin.gammas]
    targets = []
    for e in a.entries:
        kp = L.K.mult(e.place)
        if kp <= 0:
            raise AnsatzInfeasibleError(f"ansatz place {e.place} is not in the support of K")
        top = e.m + e.n * kp
        pairs.append((e.place, top))
        targets.append((e, top, _target_principal(L, e, kp)))
    D = Divisor.from_pairs(pairs)
    sp = rr_space(curve, D)
    dim = sp.dim
    nunk = l * l * dim
    p0 = a.p0 or _default_p0(L)

    def idx(i, k):
        return (i * l + k) * dim

    rows, rhs = [], []
    for e, top, T in targets:
        E = sp.expand(e.place, -top, -1)
        for o in range(top):
            Tk = T[-top + o]
            for i in range(l):
                for k in range(l):
                    r = np.zeros(nunk, dtype=complex)
                    r[idx(i, k):idx(i, k) + dim] = E[:, o]
                    rows.append(r)
                    rhs.append(Tk[i, k])
    for j, g in enumerate(L.tyurin.gammas):
        E = sp.expand(g, -1, -1)[:, 0]
        al = L.tyurin.alphas[j]
        for i in range(l):
            for k in range(l - 1):
                r = np.zeros(nunk, dtype=complex)
                r[idx(i, k):idx(i, k) + dim] += E
                r[idx(i, l - 1):idx(i, l - 1) + dim] -= al[k] * E
                rows.append(r)
                rhs.append(0.0)
    E0 = sp.expand(p0, 0, 0)[:, 0]
    for i in range(l):
        for k in range(l):
            r = np.zeros(nunk, dtype=complex)
            r[idx(i, k):idx(i, k) + dim] = E0
            rows.append(r)
            rhs.append(0.0)
    A = np.array(rows)
    b = np.array(rhs, dtype=complex)
    rs = np.maximum(np.linalg.norm(A, axis=1), 1e-300)
    A, b = A / rs[:, None], b / rs
    s = np.linalg.svd(A, compute_uv=False)
    rank = int(np.sum(s > 1e-10 * s[0]))
    X, *_ = np.linalg.lstsq(A, b, rcond=None)
    defect = float(np.linalg.norm(A @ X - b) / max(np.linalg.norm(b), 1.0))
    if rank < nunk or defect > 1e-8:
        raise AnsatzInfeasibleError(
            f"ansatz matching is infeasible (rank {rank}/{nunk}, defect {defect:.3e})", defect
        )
    grid = [[sp.element(X[idx(i, k):idx(i, k) + dim]) for k in range(l)] for i in range(l)]
    return MatrixFunc.from_grid(grid)


# ---------------------------------------------------------------------------
# tangency
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TangencyReport:
    violations: tuple
    angles: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": [v.to_json() for v in self.violations], "angles": list(self.angles)}


def _commutator_series(M: MatrixFunc, L: MatrixFunc, p: Place, hi: int) -> MatSeries:
    Sm = local_matrix(M, p, -1, hi + 4)
    Sl = local_matrix(L, p, -1, hi + 4)
    return (Sm @ Sl) - (Sl @ Sm)


def tangency_check(L: KricheverLax, M: MatrixFunc, tol: float = 1e-8) -> TangencyReport:
    viol: list[Violation] = []
    angles = []
    if M.curve != L.curve:
        raise FlowError("M and L live on different curves")
    V = L.matrix.commutator(M)
    gam = L.tyurin.gammas
    for j, g in enumerate(gam):
        S = _commutator_series(M, L.matrix, g, 1)
        scale = max(1.0, float(np.max(np.abs(S.window(S.lo, 0)))))
        if S.lo < -2:
            d = float(np.max(np.abs(S.window(S.lo, -3))))
            if d > tol * scale:
                viol.append(Violation("[M,L] pole order at most 2 at tyurin point", d, j, str(g)))
        C = S[-2]
        R = L.L_m1[j]
        nc = np.linalg.norm(C)
        if nc > tol * scale:
            coef = np.vdot(R, C) / np.vdot(R, R)
            ang = float(np.linalg.norm(C - coef * R) / nc)
        else:
            ang = 0.0
        angles.append(ang)
        if ang >= 1e-8:
            viol.append(Violation("double-pole coefficient parallel to L_{-1}", ang, j, str(g)))
    cands: list[Place] = []
    for r in V.entries:
        for e in r:
            for root, _ in e.den:
                cands.extend(places_over(L.curve, root))
    cands.extend(infinity_places(L.curve))
    seen: list[Place] = []
    for p in cands:
        if any(q.same_as(p) for q in seen) or any(g.same_as(p) for g in gam):
            continue
        seen.append(p)
        order = max(-valuation(e, p, tol=1e-9) for r in V.entries for e in r if not e.is_zero) if any(
            not e.is_zero for r in V.entries for e in r) else 0
        allowed = L.K.mult(p)
        if order > allowed:
            viol.append(Violation("stray pole of [M,L]" if allowed == 0 else "pole order of [M,L] bounded by K",
                                  float(order - allowed), None, str(p)))
    return TangencyReport(tuple(viol), tuple(angles))


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FlowState:
    t: float
    L: KricheverLax
    regime: str
    poly: np.ndarray | None = None

    def to_json(self) -> dict:
        d = {"t": self.t, "regime": self.regime}
        if self.poly is not None:
            d["poly"] = [[[[c.real, c.imag] for c in row] for row in mat] for mat in self.poly]
        else:
            d["params"] = self.L.params.to_json()
        return d


@dataclass(eq=False)
class Trajectory:
    samples: list
    regime: str
    dt: float
    ansatz: AnsatzSpec | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def to_json(self) -> dict:
        return {
            "regime": self.regime,
            "dt": self.dt,
            "ansatz": None if self.ansatz is None else self.ansatz.to_json(),
            "samples": [s.to_json() for s in self.samples],
            "diagnostics": {k: (list(map(float, v)) if isinstance(v, (list, np.ndarray)) else v)
                            for k, v in self.diagnostics.items()},
        }

    @classmethod
    def from_json(cls, d: dict) -> "Trajectory":
        if d["regime"] != "FixedPole":
            raise FlowError("only fixed-pole trajectories can be reloaded")
        samples = []
        for s in d["samples"]:
            P = np.array([[[complex(*c) for c in row] for row in mat] for mat in s["poly"]])
            samples.append(FlowState(s["t"], poly_to_lax(P), "FixedPole", P))
        a = d.get("ansatz")
        return cls(samples, "FixedPole", d["dt"], None if a is None else AnsatzSpec.from_json(a), d.get("diagnostics", {}))


def integrate_flow(L0: KricheverLax, a: AnsatzSpec | None, t_end: float, dt: float,
                   scheme: str | None = None, m_builder: Callable | None = None,
                   stride: int = 1, broken: bool = False, check: bool = True) -> Trajectory:
    """Integrate dL/dt = [M, L] from L0 up to t_end with step dt.

    ``m_builder(P, t)`` overrides the ansatz in the fixed-pole regime and
    returns the coefficient array of M. ``broken`` replaces the commutator
    by the one-sided product M L; it exists only as a regression guard.
    """
    if L0.curve.is_rational:
        scheme = scheme or "rk4"
        if scheme != "rk4":
            raise FlowError("the fixed-pole regime uses rk4")
        return _integrate_fixed(L0, a, t_end, dt, m_builder, stride, broken, check)
    scheme = scheme or "moving-pole-rk2"
    if scheme != "moving-pole-rk2":
        raise FlowError("the moving-pole regime uses moving-pole-rk2")
    if m_builder is not None or broken:
        raise FlowError("custom M is supported in the fixed-pole regime only")
    return _integrate_moving(L0, a, t_end, dt, stride, check)


def _nsteps(t_end: float, dt: float) -> int:
    n = int(round(t_end / dt))
    if n < 1 or abs(n * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise FlowError("t_end must be a positive multiple of dt")
    return n


def _integrate_fixed(L0, a, t_end, dt, m_builder, stride, broken, check) -> Trajectory:
    P = lax_to_poly(L0)
    curve = L0.curve
    if m_builder is None:
        if a is None:
            raise FlowError("either an ansatz or an m_builder is required")
        if check:
            rep = tangency_check(L0, build_m(L0, a))
            if not rep.ok:
                raise FlowError(f"ansatz is not tangent at t=0: {rep.violations}")

        def mfun(Q, t):
            return ansatz_m_poly(Q, a)
    else:
        mfun = m_builder

    deg = P.shape[0]

    def rhs(Q, t):
        M = mfun(Q, t)
        V = poly_mul(M, Q) if broken else _pcomm(M, Q)
        out = np.zeros_like(Q)
        n = min(deg, V.shape[0])
        out[:n] = V[:n]
        if not broken and V.shape[0] > deg and np.max(np.abs(V[deg:])) > 1e-9 * max(1.0, np.max(np.abs(Q))):
            raise StepRejectedError("[M,L] raised the degree of L; M is not tangent")
        return out

    n = _nsteps(t_end, dt)
    K = L0.K
    samples = [FlowState(0.0, L0, "FixedPole", P.copy())]
    for s in range(1, n + 1):
        t = (s - 1) * dt
        k1 = rhs(P, t)
        k2 = rhs(P + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = rhs(P + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = rhs(P + dt * k3, t + dt)
        P = P + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if s % stride == 0 or s == n:
            samples.append(FlowState(s * dt, poly_to_lax(P, curve, K), "FixedPole", P.copy()))
    return Trajectory(samples, "FixedPole", dt, a, {"t": [x.t for x in samples]})


# ---------------------------------------------------------------------------
# moving poles
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class _KState:
    x: np.ndarray
    y: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    kappa: np.ndarray

    def axpy(self, h: float, d: "_KState", curve: BaseCurve) -> "_KState":
        x = self.x + h * d.x
        y = np.array([_continue_y(curve, xi, yi) for xi, yi in zip(x, self.y)])
        al = self.alpha + h * d.alpha
        al[:, -1] = 1.0
        return _KState(x, y, al, self.beta + h * d.beta, self.kappa + h * d.kappa)

    def params(self) -> KricheverTyurinParams:
        gam = tuple(Place("finite_regular", complex(x), complex(y)) for x, y in zip(self.x, self.y))
        return KricheverTyurinParams(gam, self.alpha, self.beta, self.kappa)


def _continue_y(curve: BaseCurve, x, yprev):
    y = np.sqrt(np.polynomial.polynomial.polyval(x, curve.fpoly))
    return y if abs(y - yprev) <= abs(y + yprev) else -y


def beta_constraint_matrix(curve: BaseCurve, K: Divisor, gammas, alphas) -> np.ndarray:
    """Rows whose kernel is the admissible set of stacked beta vectors."""
    B = admissible_beta_basis(curve, K, gammas, alphas)
    n, l = np.asarray(alphas).shape
    # orthogonal complement of the admissible subspace
    Q, _ = np.linalg.qr(np.hstack([B, np.eye(n * l)]))
    return Q[:, B.shape[1]:n * l].conj().T


def _constraint_residual(curve, K, st: _KState) -> tuple[float, np.ndarray]:
    C = beta_constraint_matrix(curve, K, st.params().gammas, st.alpha)
    b = st.beta.reshape(-1)
    r = C @ b
    return float(np.linalg.norm(r) / max(np.linalg.norm(b), 1e-300)), C


def _project(curve, K, st: _KState) -> tuple[_KState, float]:
    defect, C = _constraint_residual(curve, K, st)
    b = st.beta.reshape(-1)
    b = b - C.conj().T @ (C @ b)
    return _KState(st.x, st.y, st.alpha, b.reshape(st.beta.shape), st.kappa), defect


def _moving_rhs(curve: BaseCurve, K: Divisor, a: AnsatzSpec, st: _KState) -> tuple[_KState, KricheverLax]:
    L = construct_lax(curve, K, st.params())
    M = build_m(L, a)
    n, l = st.alpha.shape
    dx = np.zeros(n, dtype=complex)
    dal = np.zeros((n, l), dtype=complex)
    dbe = np.zeros((n, l), dtype=complex)
    dka = np.zeros(n, dtype=complex)
    for j, g in enumerate(L.tyurin.gammas):
        Sm = local_matrix(M, g, -1, 4)
        Sl = local_matrix(L.matrix, g, -1, 4)
        V = (Sm @ Sl) - (Sl @ Sm)
        R, L0m, L1 = Sl[-1], Sl[0], Sl[1]
        nr = np.vdot(R, R).real
        if nr < 1e-24:
            raise FlowError(f"residue at tyurin point {j} vanishes; the point is non-generic")
        xd = np.vdot(R, V[-2]) / nr
        Rd = V[-1]
        bd = Rd[:, -1].copy()
        al = st.alpha[j]
        be = st.beta[j]
        rem = Rd - np.outer(bd, al)
        ad = (be.conj() @ rem) / np.vdot(be, be)
        ad[-1] = 0.0
        L0d = V[0] + xd * L1
        kd = (ad @ L0m + al @ L0d)[-1]
        dx[j], dal[j], dbe[j], dka[j] = xd, ad, bd, kd
    return _KState(dx, np.zeros(n, complex), dal, dbe, dka), L


def _integrate_moving(L0: KricheverLax, a: AnsatzSpec, t_end, dt, stride, check) -> Trajectory:
    if a is None:
        raise FlowError("the moving-pole regime needs an ansatz")
    curve, K = L0.curve, L0.K
    if check:
        rep = tangency_check(L0, build_m(L0, a))
        if not rep.ok:
            raise FlowError(f"ansatz is not tangent at t=0: {rep.violations}")
    p = L0.params
    st = _KState(
        np.array([g.x for g in p.gammas]), np.array([g.y for g in p.gammas]),
        p.alphas.copy(), p.betas.copy(), p.kappas.copy(),
    )
    n = _nsteps(t_end, dt)
    samples = [FlowState(0.0, L0, "MovingPole")]
    defects, accum = [0.0], [0.0]
    total = 0.0
    for s in range(1, n + 1):
        k1, _ = _moving_rhs(curve, K, a, st)
        mid, _ = _project(curve, K, st.axpy(0.5 * dt, k1, curve))
        k2, _ = _moving_rhs(curve, K, a, mid)
        new = st.axpy(dt, k2, curve)
        for j in range(len(new.x)):
            for q in K.places:
                if q.chart != "infinity" and abs(new.x[j] - q.x) < 1e-3:
                    raise FlowError(f"tyurin point {j} collided with the support of K at t={s * dt}")
        st, d = _project(curve, K, new)
        total += d
        defects.append(d)
        accum.append(total)
        if s % stride == 0 or s == n:
            L = construct_lax(curve, K, st.params())
            samples.append(FlowState(s * dt, L, "MovingPole"))
    diag = {"t": [x.t for x in samples], "step_defect": defects, "accumulated_defect": accum,
            "max_defect": float(max(defects)), "total_defect": float(total)}
    return Trajectory(samples, "MovingPole", dt, a, diag)


# ---------------------------------------------------------------------------
# invariants along a trajectory
# ---------------------------------------------------------------------------

def _probe_places(curve: BaseCurve, count: int = 6) -> list[Place]:
    rng = np.random.default_rng(12345)
    out = []
    while len(out) < count:
        p = regular_place(curve, complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)))
        if p.chart == "finite_regular":
            out.append(p)
    return out


def sample_drifts(tr: Trajectory) -> np.ndarray:
    """Normalized drift of each h_d from its t = 0 value, shape (n_samples, l)."""
    if not tr.samples:
        raise FlowError("empty trajectory")
    if tr.regime == "FixedPole":
        hs = [poly_charpoly(s.poly) for s in tr.samples]
        out = np.zeros((len(hs), len(hs[0])))
        for d in range(len(hs[0])):
            ref = hs[0][d]
            scale = max(1.0, float(np.max(np.abs(ref))))
            for k, h in enumerate(hs):
                n = max(len(ref), len(h[d]))
                a = np.zeros(n, complex)
                b = np.zeros(n, complex)
                a[: len(ref)] = ref
                b[: len(h[d])] = h[d]
                out[k, d] = float(np.max(np.abs(a - b))) / scale
        return out
    from .laxmat import hitchin_invariants

    probes = None
    vals = []
    for s in tr.samples:
        if probes is None:
            probes = [p for p in _probe_places(s.L.curve)
                      if all(abs(p.x - g.x) > 0.2 for g in s.L.tyurin.gammas)]
        h = hitchin_invariants(s.L).h
        vals.append(np.array([[e.evaluate(p) for p in probes] for e in h]))
    out = np.zeros((len(vals), vals[0].shape[0]))
    for d in range(vals[0].shape[0]):
        scale = max(1.0, float(np.max(np.abs(vals[0][d]))))
        for k, v in enumerate(vals):
            out[k, d] = float(np.max(np.abs(v[d] - vals[0][d]))) / scale
    return out


def isospectral_drift(tr: Trajectory) -> dict[str, float]:
    """Maximal normalized drift of each h_d from its t = 0 value."""
    D = sample_drifts(tr)
    return {f"h{d + 1}": float(np.max(D[:, d])) for d in range(D.shape[1])}
