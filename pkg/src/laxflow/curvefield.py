"""Function fields of the rational line and of hyperelliptic curves y^2 = f(x).

Elements are stored as ``(a(x) + y*b(x)) / d(x)`` with ``d`` kept in factored
form (roots with multiplicities), which makes pole bookkeeping and local
expansions exact up to roundoff. Polynomials are ascending coefficient
arrays throughout.

Local coordinates:

* finite regular place (x0, y0): ``w = x - x0``
* finite branch place x0 (f(x0) = 0): ``w = y``
* infinity, rational line: ``w = 1/x``
* infinity, odd degree f: one place with ``x = w**-2``
* infinity, even degree f: two places with ``x = 1/w`` and
  ``y = +/- w**-(g+1) sqrt(f_top) (1 + ...)``; sheet 0 carries the ``+`` sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from ._series import InsufficientPrecision, Series, poly_at

__all__ = [
    "TOL",
    "PLACE_TOL",
    "CurveError",
    "UnsupportedRegimeError",
    "BaseCurve",
    "Place",
    "Divisor",
    "FunctionFieldElement",
    "LaurentExpansion",
    "LaurentTail",
    "RRSpace",
    "ff_arith",
    "laurent_expand",
    "laurent_series",
    "differential_expand",
    "residue_at",
    "valuation",
    "places_over",
    "infinity_places",
    "zeros_of",
    "poles_of",
    "residue_sum",
    "canonical_divisor",
    "rr_space",
    "rr_basis",
]

TOL = 1e-9
PLACE_TOL = 1e-8
RANK_TOL = 1e-8


class CurveError(ValueError):
    pass


class UnsupportedRegimeError(CurveError):
    pass


# ---------------------------------------------------------------------------
# polynomial helpers
# ---------------------------------------------------------------------------

def _trim(c, tol: float = 0.0) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    if len(c) == 0:
        return np.zeros(1, dtype=complex)
    scale = np.max(np.abs(c))
    thr = tol * scale
    n = len(c)
    while n > 1 and abs(c[n - 1]) <= thr:
        n -= 1
    return c[:n].copy()


def _pval(c, x):
    return P.polyval(x, c)


def _pscale(c, x) -> float:
    return float(np.sum(np.abs(c) * np.abs(x) ** np.arange(len(c)))) or 1.0


def _synthetic_div(c, r) -> np.ndarray:
    """Quotient of c(x) by (x - r), remainder dropped."""
    n = len(c) - 1
    if n <= 0:
        return np.zeros(1, dtype=complex)
    q = np.zeros(n, dtype=complex)
    acc = 0j
    for k in range(n, 0, -1):
        acc = c[k] + acc * r
        q[k - 1] = acc
    return q


def _from_roots(roots) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for r, m in roots:
        for _ in range(m):
            out = P.polymul(out, [-r, 1.0])
    return np.asarray(out, dtype=complex)


def polish_root(c, r, iters: int = 30):
    dc = P.polyder(c)
    for _ in range(iters):
        v = _pval(c, r)
        d = _pval(dc, r)
        if d == 0:
            break
        step = v / d
        r = r - step
        if abs(step) <= 1e-16 * max(1.0, abs(r)):
            break
    return r


def cluster_roots(c, tol: float = 1e-6) -> list[tuple[complex, int]]:
    """Roots of c with multiplicities; near-coincident roots are merged."""
    c = _trim(c)
    if len(c) <= 1:
        return []
    raw = P.polyroots(c)
    groups: list[list[complex]] = []
    for r in sorted(raw, key=lambda z: (z.real, z.imag)):
        for g in groups:
            if abs(g[0] - r) <= tol * max(1.0, abs(r)):
                g.append(r)
                break
        else:
            groups.append([r])
    out = []
    for g in groups:
        r = complex(np.mean(g))
        if len(g) == 1:
            r = complex(polish_root(c, r))
        out.append((r, len(g)))
    return out


def _cplx(v) -> list[float]:
    v = complex(v)
    return [v.real, v.imag]


def _uncplx(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


# ---------------------------------------------------------------------------
# curves and places
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BaseCurve:
    """The rational line (``f is None``) or the hyperelliptic curve y^2 = f(x)."""

    kind: str
    f: tuple = ()

    def __post_init__(self):
        if self.kind not in ("rational", "hyperelliptic"):
            raise CurveError(f"unknown curve kind {self.kind!r}")
        if self.kind == "hyperelliptic":
            f = _trim(self.f)
            if len(f) < 2:
                raise CurveError("hyperelliptic f must have degree >= 1")
            object.__setattr__(self, "f", tuple(complex(v) for v in f))
            roots = P.polyroots(f)
            scale = max(1.0, float(np.max(np.abs(roots)))) if len(roots) else 1.0
            for i in range(len(roots)):
                for j in range(i + 1, len(roots)):
                    if abs(roots[i] - roots[j]) < 1e-6 * scale:
                        raise CurveError("f has a repeated root; curve is singular")

    @classmethod
    def rational(cls) -> "BaseCurve":
        return cls("rational")

    @classmethod
    def hyperelliptic(cls, f) -> "BaseCurve":
        return cls("hyperelliptic", tuple(np.asarray(f, dtype=complex)))

    @property
    def is_rational(self) -> bool:
        return self.kind == "rational"

    @property
    def fpoly(self) -> np.ndarray:
        return np.asarray(self.f, dtype=complex)

    @property
    def degree(self) -> int:
        return len(self.f) - 1

    @property
    def genus(self) -> int:
        if self.is_rational:
            return 0
        return (self.degree - 1) // 2

    def __eq__(self, other):
        if not isinstance(other, BaseCurve) or other.kind != self.kind:
            return False
        if len(other.f) != len(self.f):
            return False
        return bool(np.allclose(self.f, other.f, rtol=1e-12, atol=1e-14))

    def __hash__(self):
        return hash((self.kind, len(self.f)))

    def branch_points(self) -> np.ndarray:
        if self.is_rational:
            return np.zeros(0, dtype=complex)
        return np.array([complex(polish_root(self.fpoly, r)) for r in P.polyroots(self.fpoly)])

    def to_json(self) -> dict:
        if self.is_rational:
            return {"kind": "rational"}
        return {"kind": "hyperelliptic", "f": [_cplx(c) for c in self.f]}

    @classmethod
    def from_json(cls, d: dict) -> "BaseCurve":
        if d["kind"] == "rational":
            return cls.rational()
        return cls.hyperelliptic([_uncplx(c) for c in d["f"]])


@dataclass(frozen=True)
class Place:
    chart: str
    x: complex | None = None
    y: complex | None = None
    sheet: int = 0

    def same_as(self, other: "Place", tol: float = PLACE_TOL) -> bool:
        if self.chart != other.chart:
            return False
        if self.chart == "infinity":
            return self.sheet == other.sheet
        if abs(self.x - other.x) > tol * max(1.0, abs(self.x)):
            return False
        if self.y is None or other.y is None:
            return self.y is None and other.y is None
        return abs(self.y - other.y) <= tol * max(1.0, abs(self.y))

    @property
    def is_infinite(self) -> bool:
        return self.chart == "infinity"

    def to_json(self) -> dict:
        if self.chart == "infinity":
            return {"chart": "infinity", "sheet": self.sheet}
        d = {"chart": self.chart, "x": _cplx(self.x)}
        if self.y is not None:
            d["y"] = _cplx(self.y)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "Place":
        if d["chart"] == "infinity":
            return cls("infinity", sheet=int(d.get("sheet", 0)))
        y = d.get("y")
        return cls(d["chart"], _uncplx(d["x"]), None if y is None else _uncplx(y))

    def __str__(self) -> str:
        if self.chart == "infinity":
            return f"inf[{self.sheet}]"
        if self.y is None or self.chart == "finite_branch":
            return f"x={self.x:.6g}"
        return f"(x={self.x:.6g}, y={self.y:.6g})"


def regular_place(curve: BaseCurve, x0, y0=None) -> Place:
    """A finite place; for hyperelliptic curves ``y0`` picks the sheet."""
    x0 = complex(x0)
    if curve.is_rational:
        return Place("finite_regular", x0)
    fx = _pval(curve.fpoly, x0)
    if abs(fx) <= PLACE_TOL * _pscale(curve.fpoly, x0):
        return Place("finite_branch", x0)
    y = np.sqrt(fx)
    if y0 is not None:
        y = y if abs(y - y0) <= abs(y + y0) else -y
    return Place("finite_regular", x0, complex(y))


def places_over(curve: BaseCurve, x0) -> list[Place]:
    x0 = complex(x0)
    if curve.is_rational:
        return [Place("finite_regular", x0)]
    fx = _pval(curve.fpoly, x0)
    if abs(fx) <= PLACE_TOL * _pscale(curve.fpoly, x0):
        return [Place("finite_branch", x0)]
    y = complex(np.sqrt(fx))
    return [Place("finite_regular", x0, y), Place("finite_regular", x0, -y)]


def infinity_places(curve: BaseCurve) -> list[Place]:
    if curve.is_rational or curve.degree % 2 == 1:
        return [Place("infinity", sheet=0)]
    return [Place("infinity", sheet=0), Place("infinity", sheet=1)]


def local_param(curve: BaseCurve, p: Place, n: int):
    """Series (x(w), y(w)) at ``p`` with ``n`` known terms each (y is None on P^1)."""
    n = max(int(n), 4)
    if curve.is_rational:
        if p.chart == "infinity":
            return Series(-1, np.r_[1.0, np.zeros(n - 1)]), None
        return Series(0, np.r_[p.x, 1.0, np.zeros(n - 2)]), None
    f = curve.fpoly
    N = curve.degree
    if p.chart == "finite_regular":
        xs = Series(0, np.r_[p.x, 1.0, np.zeros(n - 2)])
        F = poly_at(f, xs)
        return xs, F.sqrt(root0=p.y)
    if p.chart == "finite_branch":
        # w^2 = f(x0 + t) = c1 t + c2 t^2 + ...
        shifted = _taylor_shift(f, p.x)
        c1 = shifted[1]
        w2 = Series(2, np.r_[1.0, np.zeros(n - 1)])
        t = w2 * (1.0 / c1)
        higher = shifted[2:]
        for _ in range(n // 2 + 3):
            if len(higher):
                g = t * t * poly_at(higher, t)
                t = (w2 - g) * (1.0 / c1)
            t = t.truncate(2 + n)
        xs = t + p.x
        ys = Series(1, np.r_[1.0, np.zeros(n - 1)])
        return xs.truncate(xs.val + n), ys
    # infinity
    if N % 2 == 1:
        xs = Series(-2, np.r_[1.0, np.zeros(n - 1)])
        F = np.zeros(2 * N + n, dtype=complex)
        for k, fk in enumerate(f):
            F[2 * (N - k)] = fk
        s = Series(0, F[:n]).sqrt()
        return xs, Series(s.val - N, s.coef)
    g = curve.genus
    xs = Series(-1, np.r_[1.0, np.zeros(n - 1)])
    F = np.zeros(N + n, dtype=complex)
    for k, fk in enumerate(f):
        F[N - k] = fk
    r0 = np.sqrt(f[-1]) * (1 if p.sheet == 0 else -1)
    s = Series(0, F[:n]).sqrt(root0=r0)
    return xs, Series(s.val - (g + 1), s.coef)


def _taylor_shift(c, x0) -> np.ndarray:
    """Coefficients of c(x0 + t) in t."""
    c = np.asarray(c, dtype=complex)
    out = np.zeros(len(c), dtype=complex)
    cur = c.copy()
    for k in range(len(c)):
        out[k] = _pval(cur, x0) / math.factorial(k)
        cur = P.polyder(cur) if len(cur) > 1 else np.zeros(1)
    return out


def _x_order(curve: BaseCurve, p: Place) -> int:
    """Valuation of (x - x(p)) at p, or of x at infinity."""
    if p.chart == "finite_regular":
        return 1
    if p.chart == "finite_branch":
        return 2
    if curve.is_rational or curve.degree % 2 == 0:
        return -1
    return -2


def _y_order_inf(curve: BaseCurve) -> int:
    if curve.degree % 2 == 1:
        return -curve.degree
    return -(curve.genus + 1)


# ---------------------------------------------------------------------------
# divisors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Divisor:
    support: tuple = ()

    @classmethod
    def from_pairs(cls, pairs, tol: float = PLACE_TOL) -> "Divisor":
        merged: list[list] = []
        for p, m in pairs:
            for item in merged:
                if item[0].same_as(p, tol):
                    item[1] += int(m)
                    break
            else:
                merged.append([p, int(m)])
        return cls(tuple((p, m) for p, m in merged if m != 0))

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.support)

    @property
    def places(self) -> list[Place]:
        return [p for p, _ in self.support]

    def mult(self, p: Place, tol: float = PLACE_TOL) -> int:
        for q, m in self.support:
            if q.same_as(p, tol):
                return m
        return 0

    def __add__(self, other: "Divisor") -> "Divisor":
        return Divisor.from_pairs(list(self.support) + list(other.support))

    def __neg__(self) -> "Divisor":
        return Divisor(tuple((p, -m) for p, m in self.support))

    def __sub__(self, other: "Divisor") -> "Divisor":
        return self + (-other)

    def scaled(self, k: int) -> "Divisor":
        return Divisor.from_pairs([(p, k * m) for p, m in self.support])

    def positive_part(self) -> "Divisor":
        return Divisor(tuple((p, m) for p, m in self.support if m > 0))

    def __len__(self) -> int:
        return len(self.support)

    def to_json(self) -> list:
        return [{"place": p.to_json(), "mult": m} for p, m in self.support]

    @classmethod
    def from_json(cls, items) -> "Divisor":
        return cls.from_pairs([(Place.from_json(d["place"]), d["mult"]) for d in items])


# ---------------------------------------------------------------------------
# function field elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FunctionFieldElement:
    """``(a(x) + y b(x)) / prod (x - r)^m``; construct through :meth:`make`."""

    curve: BaseCurve
    a: np.ndarray
    b: np.ndarray
    den: tuple = ()

    @classmethod
    def make(cls, curve, a, b=None, den=(), tol: float = TOL) -> "FunctionFieldElement":
        a = _trim(a)
        b = np.zeros(1, dtype=complex) if (b is None or curve.is_rational) else _trim(b)
        roots = _merge_roots(den)
        return _canonical(cls(curve, a, b, tuple(roots)), tol)

    @classmethod
    def const(cls, curve, c) -> "FunctionFieldElement":
        return cls.make(curve, [c])

    @classmethod
    def x(cls, curve) -> "FunctionFieldElement":
        return cls.make(curve, [0.0, 1.0])

    @classmethod
    def y(cls, curve) -> "FunctionFieldElement":
        if curve.is_rational:
            raise UnsupportedRegimeError("the rational line has no y coordinate")
        return cls.make(curve, [0.0], [1.0])

    @classmethod
    def poly(cls, curve, coeffs) -> "FunctionFieldElement":
        return cls.make(curve, coeffs)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.a) and not np.any(self.b)

    @property
    def den_poly(self) -> np.ndarray:
        return _from_roots(self.den)

    @property
    def den_degree(self) -> int:
        return sum(m for _, m in self.den)

    @property
    def is_polynomial(self) -> bool:
        return not self.den and not np.any(self.b)

    def normalize(self, tol: float = TOL) -> "FunctionFieldElement":
        return _canonical(self, tol)

    def evaluate(self, p: Place) -> complex:
        if p.chart == "finite_regular":
            num = _pval(self.a, p.x)
            if p.y is not None:
                num = num + p.y * _pval(self.b, p.x)
            d = 1.0 + 0j
            for r, m in self.den:
                d *= (p.x - r) ** m
            if abs(d) > 1e-300:
                v = num / d
                if np.isfinite(v):
                    return complex(v)
        return complex(laurent_series(self, p, 0)[0])

    def __call__(self, x, y=None) -> complex:
        num = _pval(self.a, x)
        if y is not None:
            num = num + y * _pval(self.b, x)
        d = 1.0 + 0j
        for r, m in self.den:
            d *= (x - r) ** m
        return complex(num / d)

    def _coerce(self, other) -> "FunctionFieldElement":
        if isinstance(other, FunctionFieldElement):
            return other
        return FunctionFieldElement.const(self.curve, complex(other))

    def __add__(self, other):
        return ff_arith(self, self._coerce(other), "add")

    __radd__ = __add__

    def __sub__(self, other):
        return ff_arith(self, self._coerce(other), "sub")

    def __rsub__(self, other):
        return ff_arith(self._coerce(other), self, "sub")

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return ff_arith(self, self._coerce(other), "mul")

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(1.0 / complex(other))
        return ff_arith(self, self._coerce(other), "div")

    def __rtruediv__(self, other):
        return ff_arith(self._coerce(other), self, "div")

    def __neg__(self):
        return self.scale(-1.0)

    def __pow__(self, k: int):
        out = FunctionFieldElement.const(self.curve, 1.0)
        for _ in range(k):
            out = out * self
        return out

    def scale(self, c) -> "FunctionFieldElement":
        c = complex(c)
        if c == 0:
            return FunctionFieldElement(self.curve, np.zeros(1, complex), np.zeros(1, complex), ())
        return FunctionFieldElement(self.curve, self.a * c, self.b * c, self.den)

    def almost_equal(self, other, tol: float = 1e-9) -> bool:
        diff = self - other
        scale = max(_coef_norm(self), _coef_norm(other), 1.0)
        return _coef_norm(diff) <= tol * scale

    def __repr__(self) -> str:
        return f"FFE(a={np.round(self.a, 10)}, b={np.round(self.b, 10)}, den={self.den})"

    def to_json(self) -> dict:
        d = {"a": [_cplx(c) for c in self.a], "den": [[_cplx(r), m] for r, m in self.den]}
        if not self.curve.is_rational:
            d["b"] = [_cplx(c) for c in self.b]
        return d

    @classmethod
    def from_json(cls, curve, d: dict) -> "FunctionFieldElement":
        b = d.get("b")
        return cls.make(
            curve,
            [_uncplx(c) for c in d["a"]],
            None if b is None else [_uncplx(c) for c in b],
            [(_uncplx(r), int(m)) for r, m in d.get("den", [])],
        )


def _coef_norm(e: FunctionFieldElement) -> float:
    return float(np.sqrt(np.sum(np.abs(e.a) ** 2) + np.sum(np.abs(e.b) ** 2)))


def _merge_roots(den) -> list[tuple[complex, int]]:
    out: list[list] = []
    for r, m in den:
        r = complex(r)
        for item in out:
            if abs(item[0] - r) <= PLACE_TOL * max(1.0, abs(r)):
                item[1] += int(m)
                break
        else:
            out.append([r, int(m)])
    out = [(r, m) for r, m in out if m > 0]
    out.sort(key=lambda t: (round(t[0].real, 12), round(t[0].imag, 12)))
    return out


def _canonical(e: FunctionFieldElement, tol: float = TOL) -> FunctionFieldElement:
    a = np.asarray(e.a, dtype=complex)
    b = np.asarray(e.b, dtype=complex)
    # coefficients at roundoff level of the joint scale are noise
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
    a = np.where(np.abs(a) <= 1e-15 * scale, 0, a)
    b = np.where(np.abs(b) <= 1e-15 * scale, 0, b)
    a, b = _trim(a), _trim(b)
    if not np.any(a) and not np.any(b):
        z = np.zeros(1, dtype=complex)
        return FunctionFieldElement(e.curve, z, z.copy(), ())
    den = []
    for r, m in e.den:
        keep = m
        while keep > 0:
            va, vb = _pval(a, r), _pval(b, r)
            yr = math.sqrt(abs(_pval(e.curve.fpoly, r))) if not e.curve.is_rational else 0.0
            sc = _pscale(a, r) + _pscale(b, r) * max(yr, 1.0)
            if abs(va) <= tol * sc and abs(vb) * max(yr, 1.0) <= tol * sc:
                a = _trim(_synthetic_div(a, r)) if len(a) > 1 else np.zeros(1, complex)
                b = _trim(_synthetic_div(b, r)) if len(b) > 1 else np.zeros(1, complex)
                keep -= 1
            else:
                break
        if keep:
            den.append((r, keep))
    return FunctionFieldElement(e.curve, a, b, tuple(den))


def _same_curve(a: FunctionFieldElement, b: FunctionFieldElement):
    if a.curve is not b.curve and a.curve != b.curve:
        raise CurveError("operands live on different curves")


def _lift_to(e: FunctionFieldElement, den: list[tuple[complex, int]]):
    """Numerator polynomials of e rewritten over the (larger) denominator."""
    a, b = e.a, e.b
    for r, m in den:
        have = 0
        for r2, m2 in e.den:
            if abs(r2 - r) <= PLACE_TOL * max(1.0, abs(r)):
                have = m2
        for _ in range(m - have):
            a = P.polymul(a, [-r, 1.0])
            b = P.polymul(b, [-r, 1.0])
    return np.asarray(a, complex), np.asarray(b, complex)


def _lcm(d1, d2):
    out = [list(t) for t in d1]
    for r, m in d2:
        for item in out:
            if abs(item[0] - r) <= PLACE_TOL * max(1.0, abs(r)):
                item[1] = max(item[1], m)
                break
        else:
            out.append([r, m])
    return [(r, m) for r, m in out]


def _inverse(e: FunctionFieldElement, tol: float) -> FunctionFieldElement:
    if e.is_zero:
        raise ZeroDivisionError("division by the zero element")
    dpoly = e.den_poly
    if e.curve.is_rational or not np.any(e.b):
        norm = e.a
        num_a, num_b = dpoly, np.zeros(1, complex)
        if not e.curve.is_rational:
            num_a = dpoly
    else:
        norm = P.polysub(P.polymul(e.a, e.a), P.polymul(e.curve.fpoly, P.polymul(e.b, e.b)))
        num_a = P.polymul(dpoly, e.a)
        num_b = -P.polymul(dpoly, e.b)
    norm = _trim(norm, 1e-14)
    lc = norm[-1]
    roots = cluster_roots(norm)
    return FunctionFieldElement.make(e.curve, np.asarray(num_a) / lc, np.asarray(num_b) / lc, roots, tol)


def ff_arith(a: FunctionFieldElement, b: FunctionFieldElement, op: str, tol: float = TOL) -> FunctionFieldElement:
    """Field operations with y^2 reduced through the curve equation."""
    _same_curve(a, b)
    if op in ("add", "sub"):
        den = _lcm(a.den, b.den)
        a1, b1 = _lift_to(a, den)
        a2, b2 = _lift_to(b, den)
        sgn = 1.0 if op == "add" else -1.0
        return FunctionFieldElement.make(
            a.curve, P.polyadd(a1, sgn * a2), P.polyadd(b1, sgn * b2), den, tol
        )
    if op == "mul":
        na = P.polymul(a.a, b.a)
        if not a.curve.is_rational:
            na = P.polyadd(na, P.polymul(a.curve.fpoly, P.polymul(a.b, b.b)))
            nb = P.polyadd(P.polymul(a.a, b.b), P.polymul(a.b, b.a))
        else:
            nb = None
        return FunctionFieldElement.make(a.curve, na, nb, list(a.den) + list(b.den), tol)
    if op == "div":
        return ff_arith(a, _inverse(b, tol), "mul", tol)
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# local expansions
# ---------------------------------------------------------------------------

def pole_bound(e: FunctionFieldElement, p: Place) -> int:
    """An upper bound for the pole order of e at p."""
    curve = e.curve
    if p.chart == "infinity":
        da = len(e.a) - 1 if np.any(e.a) else -10**6
        db = len(e.b) - 1 if np.any(e.b) else -10**6
        xo = -_x_order(curve, p)
        if curve.is_rational:
            top = da
        else:
            top = max(xo * da, xo * db - _y_order_inf(curve))
        return max(top - xo * e.den_degree, 0)
    k = 0
    for r, m in e.den:
        if abs(p.x - r) <= PLACE_TOL * max(1.0, abs(r)):
            k += m * _x_order(curve, p)
    return k


def _den_series(curve, p: Place, xs: Series, den) -> Series:
    out = Series.const(1.0, len(xs.coef))
    for r, m in den:
        fac = xs - r
        if p.chart != "infinity" and abs(p.x - r) <= PLACE_TOL * max(1.0, abs(r)):
            c = fac.coef.copy()
            c[0] = 0.0
            fac = Series(fac.val, c)
        for _ in range(m):
            out = out * fac
    return out


def laurent_series(e: FunctionFieldElement, p: Place, hi: int, extra: int = 6) -> Series:
    """Series of e at p, correct through w^hi."""
    lo = -pole_bound(e, p)
    n = hi - lo + extra + 2 * (e.den_degree + len(e.a) + len(e.b))
    for _ in range(6):
        xs, ys = local_param(e.curve, p, n)
        num = poly_at(e.a, xs)
        if ys is not None and np.any(e.b):
            num = num + ys * poly_at(e.b, xs)
        if e.den:
            den = _den_series(e.curve, p, xs, e.den)
            s = num * den.inverse(tol=0.0)
        else:
            s = num
        if s.prec > hi:
            return s
        n *= 2
    raise InsufficientPrecision("could not reach requested expansion order")


@dataclass(frozen=True)
class LaurentExpansion:
    place: Place
    lo: int
    coef: np.ndarray

    @property
    def hi(self) -> int:
        return self.lo + len(self.coef) - 1

    def __getitem__(self, k: int) -> complex:
        if k < self.lo or k > self.hi:
            raise KeyError(k)
        return complex(self.coef[k - self.lo])

    def as_dict(self, tol: float = 0.0) -> dict[int, complex]:
        return {self.lo + i: complex(c) for i, c in enumerate(self.coef) if abs(c) > tol}


def laurent_expand(e: FunctionFieldElement, p: Place, lo: int, hi: int) -> LaurentExpansion:
    if lo > hi:
        raise ValueError("loOrder must not exceed hiOrder")
    s = laurent_series(e, p, hi)
    return LaurentExpansion(p, lo, s.window(lo, hi))


def differential_expand(e: FunctionFieldElement, p: Place, lo: int, hi: int) -> LaurentExpansion:
    """Coefficients of e * dx/dw at p."""
    s = laurent_series(e, p, hi + 4)
    xs, _ = local_param(e.curve, p, s.prec - s.val + 8)
    ds = s * xs.derivative()
    return LaurentExpansion(p, lo, ds.window(lo, hi))


def residue_at(e: FunctionFieldElement, p: Place) -> complex:
    """Residue of the differential e*dx at p."""
    return differential_expand(e, p, -1, -1)[-1]


def valuation(e: FunctionFieldElement, p: Place, tol: float = 1e-10, window: int = 8) -> int:
    if e.is_zero:
        return 10**9
    lo = -pole_bound(e, p)
    s = laurent_series(e, p, lo + window)
    # rescale w to the convergence radius so the growth of coefficients does
    # not swamp the leading ones
    r = _local_radius(e, p)
    w = s.window(lo, lo + window) * r ** np.arange(window + 1)
    scale = max(np.max(np.abs(w)), 1e-300)
    nz = np.nonzero(np.abs(w) > tol * scale)[0]
    if len(nz) == 0:
        return lo + window + 1
    return lo + int(nz[0])


def _local_radius(e: FunctionFieldElement, p: Place) -> float:
    sing = [r for r, _ in e.den]
    if not e.curve.is_rational:
        sing.extend(e.curve.branch_points())
    if p.chart == "infinity":
        R = max([abs(z) for z in sing] + [1.0])
        r = 0.5 / R
        return math.sqrt(r) if _x_order(e.curve, p) == -2 else r
    d = [abs(z - p.x) for z in sing if abs(z - p.x) > PLACE_TOL * max(1.0, abs(p.x))]
    r = min([0.5 * v for v in d] + [1.0])
    return math.sqrt(r) if p.chart == "finite_branch" else r


def poles_of(e: FunctionFieldElement) -> Divisor:
    cands: list[Place] = []
    for r, _ in e.den:
        cands.extend(places_over(e.curve, r))
    cands.extend(infinity_places(e.curve))
    pairs = []
    for p in cands:
        v = valuation(e, p)
        if v < 0:
            pairs.append((p, -v))
    return Divisor.from_pairs(pairs)


def _sheet_value(e: FunctionFieldElement, x, sign: float):
    f = e.curve.fpoly
    y = sign * np.sqrt(_pval(f, x))
    return _pval(e.a, x) + y * _pval(e.b, x)


def zeros_of(e: FunctionFieldElement, tol: float = 1e-8) -> Divisor:
    """Zero divisor of e (finite places and infinity)."""
    if e.is_zero:
        raise CurveError("the zero element has no divisor")
    curve = e.curve
    if curve.is_rational or not np.any(e.b):
        xs = [r for r, _ in cluster_roots(e.a)]
    else:
        norm = P.polysub(P.polymul(e.a, e.a), P.polymul(curve.fpoly, P.polymul(e.b, e.b)))
        xs = [r for r, _ in cluster_roots(_trim(norm, 1e-14))]
    cands: list[Place] = []
    for x0 in xs:
        # a numerical zero this close to a denominator root is that root
        for r, _ in e.den:
            if abs(x0 - r) <= 1e-6 * max(1.0, abs(r)):
                x0 = r
        for p in places_over(curve, x0):
            if p.chart == "finite_regular" and p.y is not None:
                x1 = _polish_on_sheet(e, p)
                if x1 is None:
                    continue
                p = regular_place(curve, x1, p.y)
            cands.append(p)
    cands.extend(infinity_places(curve))
    pairs = []
    seen: list[Place] = []
    for p in cands:
        if any(q.same_as(p, 1e-6) for q in seen):
            continue
        seen.append(p)
        v = valuation(e, p, tol=tol)
        if v > 0:
            pairs.append((p, v))
    return Divisor.from_pairs(pairs)


def _polish_on_sheet(e: FunctionFieldElement, p: Place):
    """Newton on a + y b along the sheet through p; None if p is no zero."""
    f = e.curve.fpoly
    df = P.polyder(f)
    da, db = P.polyder(e.a) if len(e.a) > 1 else [0], P.polyder(e.b) if len(e.b) > 1 else [0]
    x, y = p.x, p.y
    for _ in range(40):
        y = np.sqrt(_pval(f, x))
        if abs(y - p.y) > abs(y + p.y):
            y = -y
        h = _pval(e.a, x) + y * _pval(e.b, x)
        dy = _pval(df, x) / (2 * y)
        dh = _pval(da, x) + dy * _pval(e.b, x) + y * _pval(db, x)
        if dh == 0:
            break
        step = h / dh
        x = x - step
        if abs(step) < 1e-15 * max(1.0, abs(x)):
            break
    y = np.sqrt(_pval(f, x))
    if abs(y - p.y) > abs(y + p.y):
        y = -y
    scale = _pscale(e.a, x) + abs(y) * _pscale(e.b, x)
    if abs(_pval(e.a, x) + y * _pval(e.b, x)) > 1e-7 * scale:
        return None
    return complex(x)


def residue_sum(e: FunctionFieldElement) -> complex:
    """Sum of residues of e*dx over every place where it can have a pole."""
    cands: list[Place] = []
    for r, _ in e.den:
        cands.extend(places_over(e.curve, r))
    cands.extend(infinity_places(e.curve))
    total = 0j
    for p in cands:
        total += residue_at(e, p)
    return total


def canonical_divisor(curve: BaseCurve) -> Divisor:
    """Divisor of dx/y."""
    if curve.is_rational:
        raise UnsupportedRegimeError(
            "the rational line has no effective canonical divisor; use the tail-support divisor at infinity"
        )
    g = curve.genus
    infs = infinity_places(curve)
    if len(infs) == 1:
        return Divisor.from_pairs([(infs[0], 2 * g - 2)])
    return Divisor.from_pairs([(infs[0], g - 1), (infs[1], g - 1)])


# ---------------------------------------------------------------------------
# Riemann-Roch spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RRSpace:
    """L(D) as the span of {x^i, y x^j}/d with coefficient matrix ``coeffs``."""

    curve: BaseCurve
    divisor: Divisor
    den: tuple
    na: int
    nb: int
    coeffs: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    def element(self, v) -> FunctionFieldElement:
        c = self.coeffs @ np.asarray(v, dtype=complex)
        return FunctionFieldElement.make(self.curve, c[: self.na], c[self.na:] if self.nb else None, self.den)

    @property
    def basis(self) -> list[FunctionFieldElement]:
        return [self.element(np.eye(self.dim)[k]) for k in range(self.dim)]

    def span_expand(self, p: Place, lo: int, hi: int) -> np.ndarray:
        """Expansions of the spanning monomials, shape (nspan, hi - lo + 1)."""
        return _span_expand(self.curve, self.den, self.na, self.nb, p, lo, hi)

    def expand(self, p: Place, lo: int, hi: int) -> np.ndarray:
        """Expansions of the basis elements, shape (dim, hi - lo + 1)."""
        return self.coeffs.T @ self.span_expand(p, lo, hi)


def _span_expand(curve, den, na, nb, p: Place, lo: int, hi: int) -> np.ndarray:
    dd = sum(m for _, m in den)
    xo = _x_order(curve, p)
    if p.chart == "infinity":
        yo = 0 if curve.is_rational else _y_order_inf(curve)
        low = min(xo * (na - 1), xo * max(nb - 1, 0) + yo) + (-xo) * dd if (na or nb) else 0
    else:
        low = -sum(m for r, m in den if abs(p.x - r) <= PLACE_TOL * max(1.0, abs(r))) * xo
    low = min(low, lo)
    n = hi - low + 8 + 2 * (na + nb + dd)
    for _ in range(6):
        xs, ys = local_param(curve, p, n)
        dinv = _den_series(curve, p, xs, den).inverse(tol=0.0) if den else Series.const(1.0, n)
        rows = []
        cur = dinv
        for i in range(na):
            rows.append(cur)
            cur = cur * xs
        if nb:
            cur = ys * dinv
            for j in range(nb):
                rows.append(cur)
                cur = cur * xs
        if all(r.prec > hi for r in rows):
            return np.array([r.window(lo, hi) for r in rows])
        n *= 2
    raise InsufficientPrecision("spanning-set expansion did not converge")


def rr_space(curve: BaseCurve, D: Divisor, rank_tol: float = RANK_TOL) -> RRSpace:
    g = curve.genus
    den_map: list[list] = []
    ninf = 0
    for p, m in D.support:
        if m <= 0:
            continue
        if p.chart == "infinity":
            ninf = max(ninf, m)
            continue
        need = m if p.chart == "finite_regular" else (m + 1) // 2
        for item in den_map:
            if abs(item[0] - p.x) <= PLACE_TOL * max(1.0, abs(p.x)):
                item[1] = max(item[1], need)
                break
        else:
            den_map.append([complex(p.x), need])
    den = tuple((r, m) for r, m in den_map)
    dd = sum(m for _, m in den)
    if curve.is_rational:
        na, nb = ninf + dd + 1, 0
    elif curve.degree % 2 == 1:
        na = (ninf + 2 * dd) // 2 + 1
        nb = max((ninf + 2 * dd - curve.degree) // 2 + 1, 0)
    else:
        na = ninf + dd + 1
        nb = max(ninf + dd - (g + 1) + 1, 0)
    na = max(na, 0)
    nspan = na + nb
    if nspan == 0:
        return RRSpace(curve, D, den, 0, 0, np.zeros((0, 0), complex))

    cond_places: list[Place] = []
    for r, _ in den:
        cond_places.extend(places_over(curve, r))
    cond_places.extend(infinity_places(curve))
    for p, _ in D.support:
        cond_places.append(p)
    uniq: list[Place] = []
    for p in cond_places:
        if not any(q.same_as(p) for q in uniq):
            uniq.append(p)

    rows = []
    for p in uniq:
        need = -D.mult(p)
        xo = _x_order(curve, p)
        if p.chart == "infinity":
            yo = 0 if curve.is_rational else _y_order_inf(curve)
            cand = [xo * (na - 1) - xo * dd]
            if nb:
                cand.append(xo * (nb - 1) + yo - xo * dd)
            low = min(cand)
        else:
            low = -sum(m for r, m in den if abs(p.x - r) <= PLACE_TOL * max(1.0, abs(r))) * xo
        if low >= need:
            continue
        E = _span_expand(curve, den, na, nb, p, low, need - 1)
        rows.extend(E.T)
    if rows:
        A = np.array(rows)
        A = A / np.maximum(np.linalg.norm(A, axis=1, keepdims=True), 1e-300)
        colscale = np.maximum(np.linalg.norm(A, axis=0), 1e-12)
        colscale = np.where(colscale > 1e-12, colscale, 1.0)
        As = A / colscale
        _, s, vh = np.linalg.svd(As)
        smax = s[0] if len(s) else 1.0
        rank = int(np.sum(s > rank_tol * smax))
        null = vh[rank:].conj().T
        coeffs = null / colscale[:, None]
    else:
        coeffs = np.eye(nspan, dtype=complex)
    # column-normalize for conditioning of downstream systems
    coeffs = coeffs / np.maximum(np.linalg.norm(coeffs, axis=0, keepdims=True), 1e-300)
    return RRSpace(curve, D, den, na, nb, coeffs)


def rr_basis(curve: BaseCurve, D: Divisor) -> list[FunctionFieldElement]:
    return rr_space(curve, D).basis


@dataclass(frozen=True)
class LaurentTail:
    """Principal part at ``place``: ``coeffs[k]`` multiplies w^-(k+1)."""

    place: Place
    coeffs: np.ndarray

    @property
    def order(self) -> int:
        nz = np.nonzero(np.abs(self.coeffs) > 0)[0]
        return int(nz[-1]) + 1 if len(nz) else 0

    def get(self, k: int) -> complex:
        i = -k - 1
        return complex(self.coeffs[i]) if 0 <= i < len(self.coeffs) else 0j

    def to_json(self) -> dict:
        return {"place": self.place.to_json(), "coeffs": {str(-(i + 1)): _cplx(c) for i, c in enumerate(self.coeffs)}}
