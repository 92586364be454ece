"""Krichever-Lax matrices: validation, construction, gauge action, invariants.

Convention: the residue of L at a Tyurin point gamma_j is the rank-one matrix
``outer(beta_j, alpha_j)``, so ``(L_{j,-1})_{ik} = beta_{j,i} alpha_{j,k}`` and,
because alpha_j ends in 1, beta_j is the last column of L_{j,-1}.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .curvefield import (
    BaseCurve,
    CurveError,
    Divisor,
    FunctionFieldElement,
    Place,
    canonical_divisor,
    infinity_places,
    laurent_series,
    places_over,
    pole_bound,
    regular_place,
    rr_space,
    valuation,
    _cplx,
    _uncplx,
)

__all__ = [
    "LaxError",
    "NonGenericParametersError",
    "InadmissibleParametersError",
    "GaugeError",
    "MatrixFunc",
    "MatSeries",
    "TyurinData",
    "KricheverTyurinParams",
    "KricheverLax",
    "Violation",
    "ValidationReport",
    "HitchinResult",
    "ExpectedDims",
    "validate_lax",
    "construct_lax",
    "admissible_beta_basis",
    "random_params",
    "hitchin_invariants",
    "gauge_transform",
    "expected_dims",
    "mumford_lax",
    "local_matrix",
]


class LaxError(ValueError):
    pass


class NonGenericParametersError(LaxError):
    def __init__(self, msg: str, deficiency: int = 0):
        super().__init__(msg)
        self.deficiency = deficiency


class InadmissibleParametersError(LaxError):
    def __init__(self, msg: str, residual: float = 0.0):
        super().__init__(msg)
        self.residual = residual


class GaugeError(LaxError):
    def __init__(self, msg: str, index: int):
        super().__init__(msg)
        self.index = index


# ---------------------------------------------------------------------------
# matrices of functions and of local series
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MatrixFunc:
    entries: tuple  # tuple of tuples of FunctionFieldElement

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.entries)
        object.__setattr__(self, "entries", rows)
        l = len(rows)
        if any(len(r) != l for r in rows):
            raise LaxError("matrix must be square")
        curve = rows[0][0].curve
        for r in rows:
            for e in r:
                if e.curve != curve:
                    raise CurveError("all entries must share one curve")

    @classmethod
    def from_grid(cls, grid) -> "MatrixFunc":
        return cls(tuple(tuple(r) for r in grid))

    @classmethod
    def constant(cls, curve: BaseCurve, A) -> "MatrixFunc":
        A = np.asarray(A, dtype=complex)
        return cls.from_grid([[FunctionFieldElement.const(curve, A[i, k]) for k in range(A.shape[1])] for i in range(A.shape[0])])

    @property
    def l(self) -> int:
        return len(self.entries)

    @property
    def curve(self) -> BaseCurve:
        return self.entries[0][0].curve

    def __getitem__(self, ik):
        i, k = ik
        return self.entries[i][k]

    def map(self, fn) -> "MatrixFunc":
        return MatrixFunc.from_grid([[fn(e) for e in r] for r in self.entries])

    def __add__(self, other: "MatrixFunc") -> "MatrixFunc":
        return MatrixFunc.from_grid([[self[i, k] + other[i, k] for k in range(self.l)] for i in range(self.l)])

    def __sub__(self, other: "MatrixFunc") -> "MatrixFunc":
        return MatrixFunc.from_grid([[self[i, k] - other[i, k] for k in range(self.l)] for i in range(self.l)])

    def __matmul__(self, other: "MatrixFunc") -> "MatrixFunc":
        l = self.l
        out = []
        for i in range(l):
            row = []
            for k in range(l):
                acc = self[i, 0] * other[0, k]
                for a in range(1, l):
                    acc = acc + self[i, a] * other[a, k]
                row.append(acc)
            out.append(row)
        return MatrixFunc.from_grid(out)

    def scale(self, c) -> "MatrixFunc":
        return self.map(lambda e: e.scale(c))

    def conj_const(self, Winv, W) -> "MatrixFunc":
        """Winv @ self @ W for constant matrices."""
        l = self.l
        out = []
        for i in range(l):
            row = []
            for k in range(l):
                acc = FunctionFieldElement.const(self.curve, 0.0)
                for a in range(l):
                    for b in range(l):
                        c = Winv[i, a] * W[b, k]
                        if c != 0:
                            acc = acc + self[a, b].scale(c)
                row.append(acc)
            out.append(row)
        return MatrixFunc.from_grid(out)

    def trace(self) -> FunctionFieldElement:
        acc = self[0, 0]
        for i in range(1, self.l):
            acc = acc + self[i, i]
        return acc

    def commutator(self, other: "MatrixFunc") -> "MatrixFunc":
        return (self @ other) - (other @ self)

    def evaluate(self, p: Place) -> np.ndarray:
        return np.array([[e.evaluate(p) for e in r] for r in self.entries])

    def expand(self, p: Place, lo: int, hi: int) -> np.ndarray:
        """Laurent coefficients at p, shape (hi - lo + 1, l, l)."""
        return local_matrix(self, p, lo, hi).window(lo, hi)

    def pole_bound(self, p: Place) -> int:
        return max(pole_bound(e, p) for r in self.entries for e in r)

    def to_json(self) -> list:
        return [[e.to_json() for e in r] for r in self.entries]

    @classmethod
    def from_json(cls, curve, rows) -> "MatrixFunc":
        return cls.from_grid([[FunctionFieldElement.from_json(curve, d) for d in r] for r in rows])


class MatSeries:
    """Matrix-valued truncated Laurent series: coef[i] multiplies w^(lo + i)."""

    __slots__ = ("lo", "coef")

    def __init__(self, lo: int, coef):
        self.lo = int(lo)
        self.coef = np.asarray(coef, dtype=complex)

    @property
    def prec(self) -> int:
        return self.lo + self.coef.shape[0]

    @property
    def l(self) -> int:
        return self.coef.shape[1]

    @classmethod
    def identity(cls, l: int, prec: int) -> "MatSeries":
        c = np.zeros((max(prec, 1), l, l), dtype=complex)
        c[0] = np.eye(l)
        return cls(0, c)

    def __getitem__(self, k: int) -> np.ndarray:
        if k >= self.prec:
            raise IndexError(k)
        if k < self.lo:
            return np.zeros((self.l, self.l), dtype=complex)
        return self.coef[k - self.lo]

    def window(self, lo: int, hi: int) -> np.ndarray:
        return np.array([self[k] for k in range(lo, hi + 1)])

    def _align(self, other):
        prec = min(self.prec, other.prec)
        lo = min(self.lo, other.lo)
        return lo, self.window(lo, prec - 1), other.window(lo, prec - 1)

    def __add__(self, other):
        lo, a, b = self._align(other)
        return MatSeries(lo, a + b)

    def __sub__(self, other):
        lo, a, b = self._align(other)
        return MatSeries(lo, a - b)

    def __neg__(self):
        return MatSeries(self.lo, -self.coef)

    def scale(self, c):
        return MatSeries(self.lo, self.coef * c)

    def __matmul__(self, other: "MatSeries") -> "MatSeries":
        n = min(self.coef.shape[0], other.coef.shape[0])
        out = np.zeros((n, self.l, self.l), dtype=complex)
        for i in range(n):
            for j in range(n - i):
                out[i + j] += self.coef[i] @ other.coef[j]
        return MatSeries(self.lo + other.lo, out)

    def trace(self) -> np.ndarray:
        return np.trace(self.coef, axis1=1, axis2=2)

    def shift(self, k: int) -> "MatSeries":
        """Multiply by w^k."""
        return MatSeries(self.lo + k, self.coef)

    def truncate(self, prec: int) -> "MatSeries":
        n = max(prec - self.lo, 1)
        return MatSeries(self.lo, self.coef[:n])


def local_matrix(m: MatrixFunc, p: Place, lo: int, hi: int) -> MatSeries:
    """Local series of m at p, exact for orders below ``hi + 1``."""
    l = m.l
    lo = min(lo, -m.pole_bound(p))
    coef = np.zeros((hi - lo + 1, l, l), dtype=complex)
    for i in range(l):
        for k in range(l):
            s = laurent_series(m[i, k], p, hi)
            coef[:, i, k] = s.window(lo, hi)
    return MatSeries(lo, coef)


# ---------------------------------------------------------------------------
# Tyurin data and Lax matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TyurinData:
    gammas: tuple = ()
    alphas: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), complex))

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(self.gammas))
        a = np.asarray(self.alphas, dtype=complex)
        object.__setattr__(self, "alphas", a.reshape(len(self.gammas), -1) if len(self.gammas) else a.reshape(0, 0))

    def __len__(self) -> int:
        return len(self.gammas)

    def to_json(self) -> list:
        return [{"gamma": g.to_json(), "alpha": [_cplx(a) for a in al]} for g, al in zip(self.gammas, self.alphas)]

    @classmethod
    def from_json(cls, items) -> "TyurinData":
        if not items:
            return cls()
        return cls(
            tuple(Place.from_json(d["gamma"]) for d in items),
            np.array([[_uncplx(a) for a in d["alpha"]] for d in items]),
        )


@dataclass(frozen=True, eq=False)
class KricheverTyurinParams:
    gammas: tuple
    alphas: np.ndarray
    betas: np.ndarray
    kappas: np.ndarray

    def __post_init__(self):
        n = len(self.gammas)
        object.__setattr__(self, "gammas", tuple(self.gammas))
        object.__setattr__(self, "alphas", np.asarray(self.alphas, dtype=complex).reshape(n, -1))
        object.__setattr__(self, "betas", np.asarray(self.betas, dtype=complex).reshape(n, -1))
        object.__setattr__(self, "kappas", np.asarray(self.kappas, dtype=complex).reshape(n))

    @property
    def l(self) -> int:
        return self.alphas.shape[1]

    @property
    def tyurin(self) -> TyurinData:
        return TyurinData(self.gammas, self.alphas)

    def to_json(self) -> dict:
        return {
            "tyurin": self.tyurin.to_json(),
            "beta": [[_cplx(v) for v in b] for b in self.betas],
            "kappa": [_cplx(v) for v in self.kappas],
        }


@dataclass(frozen=True, eq=False)
class KricheverLax:
    matrix: MatrixFunc
    tyurin: TyurinData
    K: Divisor
    betas: np.ndarray
    kappas: np.ndarray
    L_m1: np.ndarray  # (n, l, l)
    L_0: np.ndarray  # (n, l, l)

    @property
    def l(self) -> int:
        return self.matrix.l

    @property
    def curve(self) -> BaseCurve:
        return self.matrix.curve

    @property
    def params(self) -> KricheverTyurinParams:
        return KricheverTyurinParams(self.tyurin.gammas, self.tyurin.alphas, self.betas, self.kappas)

    def to_json(self) -> dict:
        return {
            "curve": self.curve.to_json(),
            "K": self.K.to_json(),
            "matrix": self.matrix.to_json(),
            "tyurin": self.tyurin.to_json(),
            "beta": [[_cplx(v) for v in b] for b in self.betas],
            "kappa": [_cplx(v) for v in self.kappas],
        }


def lax_from_json(d: dict):
    """(MatrixFunc, TyurinData, Divisor) from the JSON layout of KricheverLax."""
    curve = BaseCurve.from_json(d["curve"])
    m = MatrixFunc.from_json(curve, d["matrix"])
    return m, TyurinData.from_json(d.get("tyurin", [])), Divisor.from_json(d.get("K", []))


@dataclass(frozen=True)
class Violation:
    clause: str
    defect: float
    index: int | None = None
    place: str | None = None

    def to_json(self) -> dict:
        return {"clause": self.clause, "defect": self.defect, "index": self.index, "place": self.place}


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple
    lax: KricheverLax | None
    rank_ratios: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [v.to_json() for v in self.violations],
            "rank_ratios": list(self.rank_ratios),
        }


def validate_lax(m: MatrixFunc, t: TyurinData, K: Divisor, tol: float = 1e-8) -> ValidationReport:
    l = m.l
    viol: list[Violation] = []
    n = len(t)
    betas = np.zeros((n, l), dtype=complex)
    kappas = np.zeros(n, dtype=complex)
    Lm1 = np.zeros((n, l, l), dtype=complex)
    L0 = np.zeros((n, l, l), dtype=complex)
    ratios = []
    for j, (g, a) in enumerate(zip(t.gammas, t.alphas)):
        if g.chart != "finite_regular" and not m.curve.is_rational:
            viol.append(Violation("tyurin point must be a finite regular place", 1.0, j, str(g)))
        if abs(a[-1] - 1.0) > 1e-14:
            viol.append(Violation("alpha last coordinate", float(abs(a[-1] - 1.0)), j, str(g)))
        for k in range(j):
            if t.gammas[k].same_as(g):
                viol.append(Violation("distinct tyurin points", 0.0, j, str(g)))
        if K.mult(g):
            viol.append(Violation("tyurin point in support of K", float(K.mult(g)), j, str(g)))
        S = local_matrix(m, g, -1, 1)
        scale = max(1.0, float(np.max(np.abs(S.window(-1, 1)))))
        if S.lo <= -2:
            d = float(np.max(np.abs(S.window(S.lo, -2))))
            if d > tol * scale:
                viol.append(Violation("simple pole", d, j, str(g)))
        R, Z = S[-1], S[0]
        Lm1[j], L0[j] = R, Z
        beta = R[:, -1].copy()
        betas[j] = beta
        sv = np.linalg.svd(R, compute_uv=False)
        ratio = float(sv[1] / sv[0]) if sv[0] > tol * scale else 0.0
        ratios.append(ratio)
        if ratio >= 1e-8:
            viol.append(Violation("rank one residue", ratio, j, str(g)))
        form = float(np.max(np.abs(R - np.outer(beta, a))))
        if form > tol * scale:
            viol.append(Violation("residue of form beta^T alpha", form, j, str(g)))
        tr = float(abs(np.trace(R)))
        if tr > tol * scale:
            viol.append(Violation("traceless residue", tr, j, str(g)))
        row = a @ Z
        kappa = row[-1]
        kappas[j] = kappa
        eig = float(np.max(np.abs(row - kappa * a)))
        if eig > tol * scale:
            viol.append(Violation("alpha left eigenvector of L_0", eig, j, str(g)))
    # stray poles: candidate places are the denominators and infinity
    cands: list[Place] = []
    for r in m.entries:
        for e in r:
            for root, _ in e.den:
                cands.extend(places_over(m.curve, root))
    cands.extend(infinity_places(m.curve))
    seen: list[Place] = []
    for p in cands:
        if any(q.same_as(p) for q in seen) or any(g.same_as(p) for g in t.gammas):
            continue
        seen.append(p)
        order = max(-valuation(e, p) for r in m.entries for e in r)
        allowed = K.mult(p)
        if order > allowed:
            clause = "pole order bounded by K" if allowed > 0 else "stray pole"
            viol.append(Violation(clause, float(order - allowed), None, str(p)))
    lax = None
    if not viol:
        lax = KricheverLax(m, t, K, betas, kappas, Lm1, L0)
    return ValidationReport(tuple(viol), lax, tuple(ratios))


# ---------------------------------------------------------------------------
# construction from Krichever-Tyurin parameters
# ---------------------------------------------------------------------------

def _constraint_differentials(curve: BaseCurve, K: Divisor):
    """Functions phi with phi dx/y holomorphic and vanishing on K."""
    if curve.is_rational:
        return []
    K0 = canonical_divisor(curve)
    sp = rr_space(curve, K0 - K)
    return sp.basis


def admissible_beta_basis(curve: BaseCurve, K: Divisor, gammas, alphas) -> np.ndarray:
    """Basis (columns) of beta vectors compatible with the residue theorem.

    Each beta_j is orthogonal to alpha_j, and for every holomorphic
    differential phi dx/y vanishing on K the residues of the entries of L
    paired with it sum to zero.
    """
    alphas = np.asarray(alphas, dtype=complex)
    n, l = alphas.shape
    rows = []
    for j in range(n):
        r = np.zeros(n * l, dtype=complex)
        r[j * l:(j + 1) * l] = alphas[j]
        rows.append(r)
    for phi in _constraint_differentials(curve, K):
        for i in range(l):
            for k in range(l):
                r = np.zeros(n * l, dtype=complex)
                for j, g in enumerate(gammas):
                    r[j * l + i] = alphas[j, k] * phi.evaluate(g) / g.y
                rows.append(r)
    A = np.array(rows)
    _, s, vh = np.linalg.svd(A)
    rank = int(np.sum(s > 1e-10 * s[0]))
    return vh[rank:].conj().T


def random_params(curve: BaseCurve, l: int, rng: np.random.Generator, K: Divisor | None = None,
                  spread: float = 0.8) -> KricheverTyurinParams:
    g = curve.genus
    K = canonical_divisor(curve) if K is None else K
    n = l * g
    gammas = []
    while len(gammas) < n:
        x0 = spread * complex(rng.normal(), rng.normal())
        p = regular_place(curve, x0)
        if p.chart != "finite_regular":
            continue
        if any(abs(p.x - q.x) < 0.15 for q in gammas):
            continue
        if rng.random() < 0.5:
            p = Place("finite_regular", p.x, -p.y)
        gammas.append(p)
    alphas = np.ones((n, l), dtype=complex)
    alphas[:, :-1] = rng.normal(size=(n, l - 1)) + 1j * rng.normal(size=(n, l - 1))
    B = admissible_beta_basis(curve, K, gammas, alphas)
    c = rng.normal(size=B.shape[1]) + 1j * rng.normal(size=B.shape[1])
    beta = (B @ c).reshape(n, l)
    beta = beta / max(np.max(np.abs(beta)), 1e-300)
    kappas = rng.normal(size=n) + 1j * rng.normal(size=n)
    return KricheverTyurinParams(tuple(gammas), alphas, beta, kappas)


def construct_lax(curve: BaseCurve, K: Divisor, params: KricheverTyurinParams,
                  tol: float = 1e-8) -> KricheverLax:
    if curve.is_rational or curve.genus < 2:
        raise LaxError("construct_lax needs a hyperelliptic curve of genus >= 2")
    gam, al, be, ka = params.gammas, params.alphas, params.betas, params.kappas
    n, l = al.shape
    for j, g in enumerate(gam):
        if g.chart != "finite_regular":
            raise LaxError(f"tyurin point {j} must be a finite regular place")
        if K.mult(g):
            raise LaxError(f"tyurin point {j} lies on the support of K")
        for k in range(j):
            if gam[k].same_as(g, 1e-6):
                raise NonGenericParametersError(f"tyurin points {k} and {j} coincide", 1)
    D = Divisor.from_pairs([(g, 1) for g in gam]) + K
    sp = rr_space(curve, D)
    dim = sp.dim
    E = [sp.expand(g, -1, 0) for g in gam]  # (dim, 2) each
    nunk = l * l * dim

    def idx(i, k, c):
        return (i * l + k) * dim + c

    rows, rhs = [], []
    for j in range(n):
        for i in range(l):
            for k in range(l):
                r = np.zeros(nunk, dtype=complex)
                for c in range(dim):
                    r[idx(i, k, c)] = E[j][c, 0]
                rows.append(r)
                rhs.append(be[j, i] * al[j, k])
        for k in range(l):
            r = np.zeros(nunk, dtype=complex)
            for i in range(l):
                for c in range(dim):
                    r[idx(i, k, c)] += al[j, i] * E[j][c, 1]
            rows.append(r)
            rhs.append(ka[j] * al[j, k])
    A = np.array(rows)
    b = np.array(rhs)
    rs = np.maximum(np.linalg.norm(A, axis=1), 1e-300)
    A, b = A / rs[:, None], b / rs
    s = np.linalg.svd(A, compute_uv=False)
    rank = int(np.sum(s > 1e-10 * s[0]))
    if rank < nunk:
        raise NonGenericParametersError(
            f"linear system has rank {rank} < {nunk} unknowns", nunk - rank
        )
    X, *_ = np.linalg.lstsq(A, b, rcond=None)
    res = float(np.linalg.norm(A @ X - b) / max(np.linalg.norm(b), 1.0))
    if res > tol:
        raise InadmissibleParametersError(
            f"principal parts incompatible with the residue theorem (residual {res:.3e})", res
        )
    grid = [[sp.element(X[idx(i, k, 0):idx(i, k, 0) + dim]) for k in range(l)] for i in range(l)]
    m = MatrixFunc.from_grid(grid)
    rep = validate_lax(m, params.tyurin, K, tol=max(tol, 1e-8))
    if not rep.ok:
        raise LaxError(f"constructed matrix failed validation: {rep.violations}")
    return rep.lax


# ---------------------------------------------------------------------------
# invariants, gauge action, dimensions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HitchinResult:
    h: tuple
    tails: tuple  # per tyurin point: array (l, l) of coefficients of h_d at orders -l..-1

    @property
    def max_tail(self) -> float:
        if not self.tails:
            return 0.0
        return float(max(np.max(np.abs(t)) for t in self.tails))

    def to_json(self) -> dict:
        return {"h": [e.to_json() for e in self.h], "max_tail": self.max_tail}


def _charpoly_ffe(m: MatrixFunc) -> list[FunctionFieldElement]:
    """Coefficients c_1..c_l of det(mu - m) by Faddeev-LeVerrier."""
    l = m.l
    curve = m.curve
    one = FunctionFieldElement.const(curve, 1.0)
    zero = FunctionFieldElement.const(curve, 0.0)
    Mk = MatrixFunc.from_grid([[zero] * l for _ in range(l)])
    c_prev = one
    out = []
    for k in range(1, l + 1):
        Mk = m @ Mk
        Mk = MatrixFunc.from_grid([[Mk[i, j] + (c_prev if i == j else zero) for j in range(l)] for i in range(l)])
        ck = (m @ Mk).trace().scale(-1.0 / k)
        out.append(ck)
        c_prev = ck
    return out


def _charpoly_series(S: MatSeries) -> list[np.ndarray]:
    """Same recursion on a local matrix series; returns coefficient arrays."""
    l = S.l
    I = MatSeries.identity(l, S.prec)
    Mk = I.scale(0.0)
    c_prev = None
    out = []
    for k in range(1, l + 1):
        Mk = S @ Mk
        Mk = Mk + (I if c_prev is None else _scalar_times(I, c_prev))
        tr = (S @ Mk).trace() * (-1.0 / k)
        lo = (S @ Mk).lo
        c_prev = (lo, tr)
        out.append((lo, tr))
    return out


def _scalar_times(I: MatSeries, c) -> MatSeries:
    lo, coef = c
    l = I.l
    return MatSeries(lo, coef[:, None, None] * np.eye(l)[None])


def hitchin_invariants(L: KricheverLax) -> HitchinResult:
    h = _charpoly_ffe(L.matrix)
    l = L.l
    tails = []
    for g in L.tyurin.gammas:
        S = local_matrix(L.matrix, g, -1, l + 1)
        cs = _charpoly_series(S)
        t = np.zeros((l, l), dtype=complex)
        for d, (lo, coef) in enumerate(cs):
            for q in range(1, l + 1):
                k = -q
                if lo <= k < lo + len(coef):
                    t[d, q - 1] = coef[k - lo]
        tails.append(t)
    return HitchinResult(tuple(h), tuple(tails))


def gauge_transform(L: KricheverLax, W) -> KricheverLax:
    W = np.asarray(W, dtype=complex)
    l = L.l
    det = np.linalg.det(W)
    if abs(det) < 1e-14:
        raise LaxError("gauge matrix is singular")
    W = W / det ** (1.0 / l)
    Winv = np.linalg.inv(W)
    m = L.matrix.conj_const(Winv, W)
    n = len(L.tyurin)
    al = np.zeros((n, l), dtype=complex)
    be = np.zeros((n, l), dtype=complex)
    for j in range(n):
        aw = L.tyurin.alphas[j] @ W
        c = aw[-1]
        if abs(c) < 1e-12 * max(np.max(np.abs(aw)), 1e-300):
            raise GaugeError(f"alpha_{j} W has vanishing last coordinate", j)
        al[j] = aw / c
        al[j, -1] = 1.0
        be[j] = c * (Winv @ L.betas[j])
    Lm1 = np.array([Winv @ R @ W for R in L.L_m1]) if n else L.L_m1
    L0 = np.array([Winv @ Z @ W for Z in L.L_0]) if n else L.L_0
    return KricheverLax(m, TyurinData(L.tyurin.gammas, al), L.K, be, L.kappas.copy(), Lm1, L0)


@dataclass(frozen=True)
class ExpectedDims:
    dimLK: int
    spectralGenus: int
    eigenDivisorDegree: int
    dimCotangent: int


def expected_dims(l: int, g: int) -> ExpectedDims:
    if l < 1:
        raise ValueError("rank must be positive")
    if g < 2:
        warnings.warn("dimension formulas assume base genus >= 2", RuntimeWarning, stacklevel=2)
    gh = l * l * (g - 1) + 1
    return ExpectedDims(l * l * (2 * g - 1), gh, gh + l - 1, 2 * gh)


def mumford_lax(u, v, w, curve: BaseCurve | None = None) -> KricheverLax:
    """L = [[v, w], [u, -v]] with polynomial entries on the rational line.

    There are no Tyurin points; K is the tail-support divisor deg * infinity.
    """
    curve = curve or BaseCurve.rational()
    F = FunctionFieldElement.poly
    vv = F(curve, v)
    m = MatrixFunc.from_grid([[vv, F(curve, w)], [F(curve, u), -vv]])
    deg = max(len(np.trim_zeros(np.asarray(c, dtype=complex), "b")) - 1 for c in (u, v, w))
    K = Divisor.from_pairs([(Place("infinity"), max(deg, 0))])
    rep = validate_lax(m, TyurinData(), K)
    if not rep.ok:
        raise LaxError(f"Mumford matrix failed validation: {rep.violations}")
    return rep.lax
