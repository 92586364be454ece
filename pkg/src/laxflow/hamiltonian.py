"""Spectral Hamiltonians, their conservation and commutation of the flows they generate.

For a place p with local parameter w and integers (n, m) the Hamiltonian is

    H_{p,n,m}(L) = -(1/n) res_p tr(w^-m L^n) (dx/dw) dw,

a linear combination of coefficients of the characteristic polynomial, so
every isospectral flow conserves it and it is invariant under constant gauge.
The flow of the ansatz (p, n, m) is generated by H_{p,n+1,m}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .curvefield import Place, local_param
from .flow import AnsatzSpec, FlowError, integrate_flow, lax_to_poly
from .laxmat import KricheverLax, MatSeries, local_matrix

__all__ = [
    "HamiltonianSpec",
    "ConservationReport",
    "CommutationReport",
    "hamiltonian_value",
    "conservation_check",
    "commuting_flows_check",
    "constant_generator",
]


ROUNDOFF_FLOOR = 1e-13


@dataclass(frozen=True)
class HamiltonianSpec:
    place: Place
    n: int
    m: int

    @classmethod
    def for_ansatz(cls, a: AnsatzSpec) -> list["HamiltonianSpec"]:
        return [cls(e.place, e.n + 1, e.m) for e in a.entries]

    def to_json(self) -> dict:
        return {"place": self.place.to_json(), "n": self.n, "m": self.m}


def hamiltonian_value(L: KricheverLax, spec: HamiltonianSpec) -> complex:
    if spec.n < 1:
        raise ValueError("n must be positive")
    p = spec.place
    kp = max(L.matrix.pole_bound(p), 0)
    # the w^-1 coefficient needs orders up to n*kp + m + a few of L
    hi = spec.n * kp + abs(spec.m) + 4
    S = local_matrix(L.matrix, p, -kp, hi)
    Ln = MatSeries.identity(L.l, S.prec + spec.n * kp + 2)
    for _ in range(spec.n):
        Ln = Ln @ S
    tr = Ln.shift(-spec.m).trace()  # coefficients from w^(Ln.lo - m)
    lo = Ln.lo - spec.m
    x, _ = local_param(L.curve, p, hi + spec.n * kp + 8)
    dx = x.derivative()
    if lo + len(tr) <= -1 - dx.val:
        raise ValueError("local series too short for the residue")
    total = []
    for k, c in enumerate(tr):
        j = -1 - (lo + k)  # pairs with w^j of dx/dw
        if j >= dx.prec:
            continue
        if j < dx.val:
            break
        total.append(c * dx[j])
    re = math.fsum(v.real for v in total)
    im = math.fsum(v.imag for v in total)
    return -complex(re, im) / spec.n


@dataclass(frozen=True)
class ConservationReport:
    specs: tuple
    values: np.ndarray  # (n_samples, n_specs)
    drifts: tuple
    max_drift: float
    ok: bool

    def to_json(self) -> dict:
        return {
            "specs": [s.to_json() for s in self.specs],
            "drifts": list(self.drifts),
            "maxDrift": self.max_drift,
            "ok": self.ok,
        }


def conservation_check(tr, specs, tol: float = 1e-8) -> ConservationReport:
    """Relative drift max_t |H(t) - H(0)| / max(1, |H(0)|) per spec."""
    specs = tuple(specs)
    vals = np.array([[hamiltonian_value(s.L, h) for h in specs] for s in tr.samples])
    drifts = tuple(
        float(np.max(np.abs(vals[:, j] - vals[0, j])) / max(1.0, abs(vals[0, j]))) for j in range(len(specs))
    )
    mx = max(drifts) if drifts else 0.0
    return ConservationReport(specs, vals, drifts, mx, mx < tol)


@dataclass(frozen=True)
class CommutationReport:
    dts: tuple
    discrepancies: tuple
    order: float | None
    ok: bool
    at_floor: bool = False  # every discrepancy is at roundoff level, so no order is observable

    def to_json(self) -> dict:
        return {"dts": list(self.dts), "discrepancies": list(self.discrepancies), "order": self.order,
                "atFloor": self.at_floor, "ok": self.ok}


def _flow(L: KricheverLax, gen, t: float, dt: float) -> KricheverLax:
    if isinstance(gen, AnsatzSpec):
        tr = integrate_flow(L, gen, t, dt, check=False)
    else:
        tr = integrate_flow(L, None, t, dt, m_builder=gen)
    return tr.samples[-1].L


def commuting_flows_check(L0: KricheverLax, gen1, gen2, s: float, t: float, dts=(1e-3,),
                          tol: float = 1e-6) -> CommutationReport:
    """Compare flowing by gen1 for time s then gen2 for t against the opposite order.

    Generators are ansatz specs or callables ``M(P, t)`` in the fixed-pole
    regime. The discrepancy is the max coefficient difference of the two
    endpoints relative to max(1, |L0|). With several step sizes the
    observed convergence order is fitted from the log-log slope over the
    discrepancies above the roundoff floor ``ROUNDOFF_FLOOR``.
    """
    if not L0.curve.is_rational:
        raise FlowError("commutation is checked in the fixed-pole regime")
    P0 = lax_to_poly(L0)
    scale = max(1.0, float(np.max(np.abs(P0))))
    disc = []
    for dt in dts:
        A = lax_to_poly(_flow(_flow(L0, gen1, s, dt), gen2, t, dt))
        B = lax_to_poly(_flow(_flow(L0, gen2, t, dt), gen1, s, dt))
        n = max(A.shape[0], B.shape[0])
        A = np.pad(A, ((0, n - A.shape[0]), (0, 0), (0, 0)))
        B = np.pad(B, ((0, n - B.shape[0]), (0, 0), (0, 0)))
        disc.append(float(np.max(np.abs(A - B))) / scale)
    order = None
    keep = [k for k, d in enumerate(disc) if d > ROUNDOFF_FLOOR]
    if len(keep) > 1:
        x = np.log(np.asarray(dts, dtype=float)[keep])
        y = np.log(np.asarray(disc)[keep])
        order = float(np.polyfit(x, y, 1)[0])
    ok = disc[-1] < tol
    return CommutationReport(tuple(map(float, dts)), tuple(disc), order, ok, not keep)


def constant_generator(A) -> Callable:
    """M(P, t) = A for every state; used as a non-commuting control."""
    A = np.asarray(A, dtype=complex)[None]
    return lambda P, t: A
