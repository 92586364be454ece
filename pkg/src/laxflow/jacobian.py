"""Periods and Abel-Jacobi maps for hyperelliptic spectral curves nu^2 = Q(z).

For l = 2 over the rational line, completing the square in
mu^2 + h1 mu + h2 = 0 gives nu = mu + h1/2 with nu^2 = Q = h1^2/4 - h2.
Holomorphic differentials are z^j dz / nu for j < genus.

Integrals of such a differential along a straight segment use Gauss-Legendre
quadrature with nu continued from an anchor point by
``nu(z) = nu(z_a) * prod sqrt((z - e_i) / (z_a - e_i))``, which is continuous
along any segment that avoids the branch points.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .curvefield import BaseCurve, CurveError, polish_root

__all__ = [
    "JacobianError",
    "SingularSpectralCurveError",
    "HyperellipticModel",
    "PeriodData",
    "AbelImage",
    "LinearityReport",
    "hyperelliptic_model",
    "model_from_poly",
    "segment_integral",
    "periods",
    "agm",
    "agm_tau",
    "abel_map",
    "lattice_reduce",
    "abel_track",
    "jacobian_linearity",
]

GL_NODES = 64
_GLX, _GLW = np.polynomial.legendre.leggauss(GL_NODES)


class JacobianError(RuntimeError):
    pass


class SingularSpectralCurveError(JacobianError):
    pass


@dataclass(frozen=True, eq=False)
class HyperellipticModel:
    Q: np.ndarray  # ascending coefficients
    h1: np.ndarray
    curve: BaseCurve
    branch: np.ndarray  # finite branch points sorted by (real, imag)
    genus: int

    @property
    def degree(self) -> int:
        return len(self.Q) - 1

    @property
    def lc(self) -> complex:
        return complex(self.Q[-1])

    def nu_sq(self, z):
        return P.polyval(z, self.Q)

    def to_json(self) -> dict:
        return {
            "Q": [[c.real, c.imag] for c in self.Q],
            "branch": [[c.real, c.imag] for c in self.branch],
            "genus": self.genus,
        }


def model_from_poly(Q, h1=None) -> HyperellipticModel:
    Q = np.asarray(Q, dtype=complex)
    n = len(Q)
    while n > 1 and abs(Q[n - 1]) < 1e-14 * np.max(np.abs(Q)):
        n -= 1
    Q = Q[:n]
    if n < 3:
        raise SingularSpectralCurveError("Q must have degree >= 2")
    try:
        curve = BaseCurve.hyperelliptic(Q)
    except CurveError as exc:
        raise SingularSpectralCurveError(f"Q is not squarefree: {exc}") from exc
    roots = np.array([complex(polish_root(Q, r)) for r in P.polyroots(Q)])
    roots = roots[np.lexsort((np.round(roots.imag, 12), np.round(roots.real, 12)))]
    h1 = np.zeros(1, complex) if h1 is None else np.asarray(h1, dtype=complex)
    return HyperellipticModel(Q, h1, curve, roots, (n - 2) // 2)


def hyperelliptic_model(S) -> HyperellipticModel:
    """Model nu^2 = h1^2/4 - h2 of an l = 2 spectral curve over the rational line."""
    if S.l != 2 or not S.base.is_rational:
        raise JacobianError("hyperelliptic model needs l = 2 over the rational line")
    h1, h2 = S.h
    for e in (h1, h2):
        if e.den or np.any(e.b):
            raise JacobianError("spectral coefficients must be polynomials")
    Q = P.polysub(P.polymul(h1.a, h1.a) / 4.0, h2.a)
    return model_from_poly(Q, h1.a)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def _nu_continued(m: HyperellipticModel, z, za, nua, skip=()):
    ratio = np.ones_like(z, dtype=complex)
    for i, e in enumerate(m.branch):
        if i in skip:
            continue
        ratio = ratio * np.sqrt((z - e) / (za - e))
    return nua * ratio


def _gl(f, a: float, b: float) -> np.ndarray:
    x = 0.5 * (b - a) * _GLX + 0.5 * (b + a)
    return 0.5 * (b - a) * np.tensordot(_GLW, f(x), axes=(0, 0))


def _adaptive(f, a: float, b: float, tol: float, depth: int = 0) -> np.ndarray:
    whole = _gl(f, a, b)
    mid = 0.5 * (a + b)
    halves = _gl(f, a, mid) + _gl(f, mid, b)
    err = np.max(np.abs(whole - halves))
    if err <= tol * max(1.0, float(np.max(np.abs(halves)))):
        return halves
    if depth >= 30:
        raise JacobianError("quadrature did not converge")
    return _adaptive(f, a, mid, tol, depth + 1) + _adaptive(f, mid, b, tol, depth + 1)


def _diff_values(m: HyperellipticModel, z, nu) -> np.ndarray:
    """Values of z^j / nu for j < genus, shape (len(z), genus)."""
    return np.stack([z ** j / nu for j in range(m.genus)], axis=-1)


def _branch_index(m: HyperellipticModel, z) -> int | None:
    d = np.abs(m.branch - z)
    i = int(np.argmin(d))
    return i if d[i] <= 1e-12 * max(1.0, abs(z)) else None


def segment_integral(m: HyperellipticModel, za, zb, nua, anchor: str = "start", tol: float = 1e-13) -> np.ndarray:
    """Integral of (z^j dz/nu)_j along the segment za -> zb.

    nu is continued from ``nua``, its value at za (anchor "start") or at zb
    (anchor "end"). With z = za + (zb - za) sin^2(theta/2) a square-root
    singularity at a branch endpoint cancels against dz analytically.
    """
    za, zb = complex(za), complex(zb)
    h = zb - za
    ia, ib = _branch_index(m, za), _branch_index(m, zb)
    if anchor == "start":
        if ia is not None:
            raise JacobianError("cannot anchor nu at a branch point")
        z_anchor, ia = za, None
    else:
        if ib is not None:
            raise JacobianError("cannot anchor nu at a branch point")
        z_anchor, ib = zb, None
    skip = tuple(i for i in (ia, ib) if i is not None)

    def f(theta):
        sa, ca = np.sin(0.5 * theta), np.cos(0.5 * theta)
        z = za + h * sa * sa
        nu = _nu_continued(m, z, z_anchor, nua, skip)
        # a branch endpoint contributes sin(theta/2) (at za) or cos(theta/2) (at zb)
        # to nu, which cancels against dz = h sin cos dtheta
        jac = h * (sa if ia is None else 1.0) * (ca if ib is None else 1.0)
        return _diff_values(m, z, nu) * np.broadcast_to(jac, z.shape)[:, None]

    return _adaptive(f, 0.0, np.pi, tol)


def _between_branch(m: HyperellipticModel, ia: int, ib: int) -> np.ndarray:
    """2 * integral between branch points ia and ib, nu continued from the midpoint."""
    ea, eb = m.branch[ia], m.branch[ib]
    zm = 0.5 * (ea + eb)
    num = np.sqrt(m.nu_sq(zm))
    c = 0.5 * (eb - ea)

    def f(theta):
        # the pair factors sqrt(1 + sin) sqrt(1 - sin) = cos cancel against dz
        z = zm + c * np.sin(theta)
        nu = _nu_continued(m, z, zm, num, (ia, ib))
        return _diff_values(m, z, nu) * c

    return 2.0 * _adaptive(f, -np.pi / 2, np.pi / 2, 1e-13)


# ---------------------------------------------------------------------------
# periods
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PeriodData:
    A: np.ndarray  # (g, g): A[j, k] = integral of omega_j over A_k
    B: np.ndarray
    tau: np.ndarray
    cycles: tuple  # branch point index pairs per segment

    @property
    def lattice(self) -> np.ndarray:
        """Period lattice generators as columns, shape (g, 2g)."""
        return np.hstack([self.A, self.B])

    def riemann_defects(self) -> tuple[float, float]:
        sym = float(np.max(np.abs(self.tau - self.tau.T)))
        mineig = float(np.min(np.linalg.eigvalsh(0.5 * (self.tau.imag + self.tau.imag.T))))
        return sym, mineig

    def to_json(self) -> dict:
        return {
            "tau": [[[v.real, v.imag] for v in row] for row in self.tau],
            "A": [[[v.real, v.imag] for v in row] for row in self.A],
            "B": [[[v.real, v.imag] for v in row] for row in self.B],
            "cycles": [list(c) for c in self.cycles],
        }


def periods(m: HyperellipticModel) -> PeriodData:
    g = m.genus
    if g < 1:
        raise JacobianError("genus zero spectral curve has no periods")
    e = m.branch
    for i in range(len(e)):
        for j in range(i + 1, len(e)):
            if abs(e[i] - e[j]) < 1e-6:
                raise JacobianError("branch points closer than 1e-6")
    segs = [_between_branch(m, k, k + 1) for k in range(2 * g)]
    best = None
    for signs in itertools.product((1.0, -1.0), repeat=2 * g):
        c = [s * v for s, v in zip(signs, segs)]
        A = np.stack([c[2 * k] for k in range(g)], axis=1)
        B = np.stack([sum(c[2 * i + 1] for i in range(k, g)) for k in range(g)], axis=1)
        try:
            tau = np.linalg.solve(A, B)
        except np.linalg.LinAlgError:
            continue
        sym = float(np.max(np.abs(tau - tau.T)))
        im = np.linalg.eigvalsh(0.5 * (tau.imag + tau.imag.T))
        if im.min() <= 0:
            continue
        if best is None or sym < best[0]:
            best = (sym, A, B, tau)
    if best is None or best[0] > 1e-6:
        raise JacobianError("no sign convention gave a Riemann matrix; cut crossing suspected")
    _, A, B, tau = best
    cycles = tuple((k, k + 1) for k in range(2 * g))
    return PeriodData(A, B, tau, cycles)


def agm(a, b, tol: float = 1e-16):
    a, b = complex(a), complex(b)
    for _ in range(100):
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        if abs(a - b) <= tol * abs(a):
            break
    return a


def agm_tau(e1: float, e2: float, e3: float) -> complex:
    """Period ratio of nu^2 = (z - e1)(z - e2)(z - e3), real e1 > e2 > e3."""
    k1 = agm(np.sqrt(e1 - e3), np.sqrt(e1 - e2))
    k2 = agm(np.sqrt(e1 - e3), np.sqrt(e2 - e3))
    return 1j * k1 / k2


# ---------------------------------------------------------------------------
# Abel map
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AbelImage:
    raw: np.ndarray
    reduced: np.ndarray

    def to_json(self) -> dict:
        return {"raw": [[v.real, v.imag] for v in self.raw], "reduced": [[v.real, v.imag] for v in self.reduced]}


def lattice_reduce(v, per: PeriodData) -> tuple[np.ndarray, np.ndarray]:
    """Representative of v modulo the period lattice and its real lattice coordinates."""
    Lm = per.lattice
    g = Lm.shape[0]
    R = np.vstack([Lm.real, Lm.imag])
    vr = np.concatenate([np.real(v), np.imag(v)])
    coords = np.linalg.solve(R, vr)
    frac = coords - np.round(coords)
    return Lm @ frac, frac


def _nearest_branch(m: HyperellipticModel, z):
    i = int(np.argmin(np.abs(m.branch - z)))
    return m.branch[i]


def _path_integral(m: HyperellipticModel, z0, nu0, z1, nu1) -> np.ndarray:
    """Integral from (z0, nu0) to (z1, nu1), detouring through a branch point if needed."""
    if abs(z1 - z0) < 1e-15:
        if abs(nu1 - nu0) <= 1e-8 * max(1.0, abs(nu0)):
            return np.zeros(m.genus, complex)
    if abs(nu0) < 1e-12:
        # start at a branch point: anchor at the end instead
        return segment_integral(m, z0, z1, nu1, anchor="end")
    val = segment_integral(m, z0, z1, nu0, anchor="start")
    nu_end = _nu_continued(m, np.array([z1]), z0, nu0)[0]
    if abs(nu1) < 1e-12 or abs(nu_end - nu1) <= abs(nu_end + nu1):
        return val
    e = _nearest_branch(m, z1)
    return val + 2.0 * segment_integral(m, e, z1, nu1, anchor="end")


def _far_point(m: HyperellipticModel, z0) -> complex:
    """A point beyond every branch point whose segment from z0 and outward ray stay clear of them."""
    R = 2.0 * max(float(np.max(np.abs(m.branch))), abs(z0)) + 1.0
    best, far = -1.0, None
    for k in range(24):
        z1 = R * np.exp(2j * np.pi * (k + 0.5) / 24)
        h = z1 - z0
        s = np.clip(np.real((m.branch - z0) * np.conj(h)) / abs(h) ** 2, 0.0, 1.0)
        d = float(np.min(np.abs(m.branch - (z0 + s * h))))
        if d > best:
            best, far = d, z1
    return far


def _to_infinity(m: HyperellipticModel, z0, nu0) -> np.ndarray:
    """Integral from (z0, nu0) to the single place over infinity of an odd degree model.

    Beyond a far point z1 the ray z = z1 / s^2 is used; there nu = nu1 R(s) / s^(2g+1)
    with R regular on [0, 1], and z^j dz / nu is smooth in s for j < g.
    """
    if m.degree % 2 == 0:
        raise JacobianError("infinity is two places for an even degree model")
    g = m.genus
    z1 = _far_point(m, z0)
    if abs(nu0) < 1e-12:
        nu1 = np.sqrt(m.nu_sq(z1))
        head = segment_integral(m, z0, z1, nu1, anchor="end")
    else:
        head = segment_integral(m, z0, z1, nu0, anchor="start")
        nu1 = _nu_continued(m, np.array([z1]), z0, nu0)[0]
    e = m.branch

    def f(s):
        R = np.ones_like(s, dtype=complex)
        for ei in e:
            R = R * np.sqrt((z1 - ei * s * s) / (z1 - ei))
        return np.stack([s ** (2 * (g - j) - 2) / R for j in range(g)], axis=-1)

    tail = _adaptive(f, 0.0, 1.0, 1e-13) * np.array([2.0 * z1 ** (j + 1) / nu1 for j in range(g)])
    return head + tail


def abel_map(points, base, per: PeriodData, m: HyperellipticModel) -> AbelImage:
    """Sum of integrals from a finite ``base`` to each (z, nu, mult) in ``points``.

    A point with infinite z is the place over infinity of an odd degree model.
    """
    zb, nub = base
    total = np.zeros(m.genus, complex)
    for z, nu, mult in points:
        if np.isinf(z):
            total = total + mult * _to_infinity(m, complex(zb), complex(nub))
            continue
        total = total + mult * _path_integral(m, complex(zb), complex(nub), complex(z), complex(nu))
    red, _ = lattice_reduce(total, per)
    return AbelImage(total, red)


def _dhat_points(L, m: HyperellipticModel):
    """Eigen divisor of a polynomial l = 2 Lax matrix as (z, nu) pairs with multiplicity."""
    from .spectral import eigen_divisor, spectral_curve

    S = spectral_curve(L)
    D = eigen_divisor(L, S)
    h1 = m.h1
    out = []
    for pt, mult in D.points:
        if pt.place.chart == "infinity":
            if m.degree % 2 == 0:
                raise JacobianError("eigen divisor point at infinity on an even degree model")
            out.extend([(complex("inf"), complex("inf"))] * mult)
            continue
        z = pt.place.x
        out.extend([(z, pt.mu + 0.5 * P.polyval(z, h1))] * mult)
    return out


def abel_track(samples, m: HyperellipticModel) -> np.ndarray:
    """Unwrapped Abel images of the eigen divisor along samples of a trajectory.

    Each point of the divisor is followed from one sample to the next along a
    straight segment; consecutive images therefore differ by the honest
    integral rather than by a lattice-reduced jump.
    """
    prev = None
    A = []
    acc = np.zeros(m.genus, complex)
    for s in samples:
        # the place over infinity does not move and contributes nothing
        pts = [q for q in _dhat_points(s.L, m) if not np.isinf(q[0])]
        if prev is not None:
            order = _match(prev, pts)
            inc = np.zeros(m.genus, complex)
            for (z0, nu0), k in zip(prev, order):
                z1, nu1 = pts[k]
                nu_end = _nu_continued(m, np.array([z1]), z0, nu0)[0]
                if abs(nu_end - nu1) > 1e-6 * max(1.0, abs(nu1)):
                    raise JacobianError("step too large: divisor point changed sheet between samples")
                inc = inc + segment_integral(m, z0, z1, nu0, anchor="start")
            acc = acc + inc
            pts = [pts[k] for k in order]
        A.append(acc.copy())
        prev = pts
    return np.array(A)


def _match(prev, pts) -> list[int]:
    used = set()
    order = []
    for z0, nu0 in prev:
        d = [abs(z - z0) + abs(nu - nu0) if k not in used else np.inf for k, (z, nu) in enumerate(pts)]
        k = int(np.argmin(d))
        used.add(k)
        order.append(k)
    return order


@dataclass(frozen=True)
class LinearityReport:
    times: np.ndarray
    images: np.ndarray
    max_second_difference: float
    velocity: np.ndarray  # (len(times) - 2, g) central differences at interior times
    residue_velocity: np.ndarray | None
    agreement: float | None

    def to_json(self) -> dict:
        c = lambda a: [[[v.real, v.imag] for v in row] for row in a]
        return {
            "times": list(map(float, self.times)),
            "maxSecondDifference": self.max_second_difference,
            "velocity": c(self.velocity),
            "residuePairingVelocity": None if self.residue_velocity is None else c(self.residue_velocity),
            "agreement": self.agreement,
        }


def jacobian_linearity(tr, m: HyperellipticModel, per: PeriodData | None = None,
                       with_residue: bool = True, mfun=None) -> LinearityReport:
    """Straightness of Abel images along a fixed-pole trajectory.

    Samples at t = 0 are skipped when the eigen divisor sits on branch points
    there. The residue velocity is the connecting map applied to the lambda
    tails at each interior sample, in the same differential basis. M comes
    from ``mfun(P, t)`` when given and from the trajectory's ansatz otherwise.
    """
    samples = [s for s in tr.samples if s.t > 0] if _at_branch(tr.samples[0], m) else list(tr.samples)
    if len(samples) < 5:
        raise JacobianError("at least five samples are needed")
    ts = np.array([s.t for s in samples])
    hs = np.diff(ts)
    if np.max(np.abs(hs - hs[0])) > 1e-9:
        raise JacobianError("samples must be equally spaced")
    h = hs[0]
    A = abel_track(samples, m)
    sd = (A[2:] - 2 * A[1:-1] + A[:-2]) / h ** 2
    vel = (A[2:] - A[:-2]) / (2 * h)
    scale = max(1.0, float(np.max(np.abs(vel))))
    maxsd = float(np.max(np.abs(sd))) / scale
    rv = None
    agree = None
    if with_residue and (mfun is not None or tr.ansatz is not None):
        from .flow import build_m
        from .residue import connecting_map, lambda_tails

        rows = []
        for s in samples[1:-1]:
            M = mfun(s.poly, s.t) if mfun is not None else build_m(s.L, tr.ansatz)
            r = lambda_tails(s.L, M, m, t=s.t)
            rows.append(connecting_map(r, m).components)
        rv = np.array(rows)
        agree = float(np.max(np.abs(vel - rv)) / max(float(np.max(np.abs(rv))), 1e-300))
    return LinearityReport(ts, A, maxsd, vel, rv, agree)


def _at_branch(s, m: HyperellipticModel) -> bool:
    try:
        pts = _dhat_points(s.L, m)
    except JacobianError:
        return True
    return any(np.min(np.abs(m.branch - z)) < 1e-6 for z, _ in pts if not np.isinf(z))
