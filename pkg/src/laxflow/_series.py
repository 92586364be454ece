"""Truncated Laurent series with tracked absolute precision.

A series ``s`` stands for ``sum(s.coef[i] * w**(s.val + i)) + O(w**s.prec)``.
Every operation propagates the truncation order so callers can ask whether
a requested coefficient is actually known.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Series", "InsufficientPrecision"]


class InsufficientPrecision(ArithmeticError):
    pass


class Series:
    __slots__ = ("val", "coef")

    def __init__(self, val: int, coef):
        self.val = int(val)
        self.coef = np.asarray(coef, dtype=complex).ravel()

    @property
    def prec(self) -> int:
        return self.val + len(self.coef)

    @classmethod
    def const(cls, c, prec: int) -> "Series":
        n = max(prec, 1)
        coef = np.zeros(n, dtype=complex)
        coef[0] = c
        return cls(0, coef)

    @classmethod
    def monomial(cls, k: int, prec: int, c=1.0) -> "Series":
        n = max(prec - k, 1)
        coef = np.zeros(n, dtype=complex)
        coef[0] = c
        return cls(k, coef)

    @classmethod
    def zero(cls, prec: int) -> "Series":
        return cls(prec, np.zeros(0, dtype=complex))

    def copy(self) -> "Series":
        return Series(self.val, self.coef.copy())

    def __repr__(self) -> str:
        terms = ", ".join(f"{self.val + i}: {c:.6g}" for i, c in enumerate(self.coef[:6]))
        return f"Series({{{terms}}}, prec={self.prec})"

    # -- coefficient access -------------------------------------------------

    def __getitem__(self, k: int) -> complex:
        if k >= self.prec:
            raise InsufficientPrecision(f"coefficient w^{k} requested, known below w^{self.prec}")
        i = k - self.val
        if i < 0:
            return 0j
        return complex(self.coef[i])

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Coefficients of w^lo .. w^hi (inclusive)."""
        if hi >= self.prec:
            raise InsufficientPrecision(f"coefficients up to w^{hi} requested, known below w^{self.prec}")
        out = np.zeros(hi - lo + 1, dtype=complex)
        for k in range(max(lo, self.val), hi + 1):
            out[k - lo] = self.coef[k - self.val]
        return out

    def truncate(self, prec: int) -> "Series":
        if prec >= self.prec:
            return self
        n = max(prec - self.val, 0)
        return Series(self.val if n else prec, self.coef[:n])

    def valuation(self, tol: float = 1e-11) -> int:
        """Order of the first coefficient that is not negligible.

        Negligibility is relative to the largest stored coefficient. Returns
        ``prec`` when every known coefficient is negligible.
        """
        if not len(self.coef):
            return self.prec
        scale = np.max(np.abs(self.coef))
        if scale == 0:
            return self.prec
        nz = np.nonzero(np.abs(self.coef) > tol * scale)[0]
        return self.val + int(nz[0])

    def strip(self, tol: float = 1e-11) -> "Series":
        v = self.valuation(tol)
        return Series(v, self.coef[v - self.val:])

    # -- arithmetic ---------------------------------------------------------

    def _aligned(self, other: "Series"):
        prec = min(self.prec, other.prec)
        val = min(self.val, other.val, prec)
        n = prec - val
        a = np.zeros(n, dtype=complex)
        b = np.zeros(n, dtype=complex)
        ka = min(len(self.coef), max(prec - self.val, 0))
        kb = min(len(other.coef), max(prec - other.val, 0))
        if ka:
            a[self.val - val:self.val - val + ka] = self.coef[:ka]
        if kb:
            b[other.val - val:other.val - val + kb] = other.coef[:kb]
        return val, a, b

    def __add__(self, other):
        if not isinstance(other, Series):
            other = Series.const(other, self.prec)
        val, a, b = self._aligned(other)
        return Series(val, a + b)

    __radd__ = __add__

    def __neg__(self):
        return Series(self.val, -self.coef)

    def __sub__(self, other):
        if not isinstance(other, Series):
            other = Series.const(other, self.prec)
        val, a, b = self._aligned(other)
        return Series(val, a - b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Series):
            return Series(self.val, self.coef * complex(other))
        n = min(len(self.coef), len(other.coef))
        if n == 0:
            return Series.zero(min(self.val + other.prec, other.val + self.prec))
        c = np.convolve(self.coef[:n], other.coef[:n])[:n]
        return Series(self.val + other.val, c)

    __rmul__ = __mul__

    def inverse(self, tol: float = 1e-11) -> "Series":
        s = self.strip(tol)
        n = len(s.coef)
        if n == 0:
            raise ZeroDivisionError("series is zero to known precision")
        c = s.coef
        inv = np.zeros(n, dtype=complex)
        inv[0] = 1.0 / c[0]
        for k in range(1, n):
            inv[k] = -np.dot(c[1:k + 1], inv[k - 1::-1][:k]) / c[0]
        return Series(-s.val, inv)

    def __truediv__(self, other):
        if not isinstance(other, Series):
            return Series(self.val, self.coef / complex(other))
        return self * other.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = Series.const(1.0, self.prec - self.val) if k == 0 else self
        for _ in range(k - 1):
            out = out * self
        return out

    def derivative(self) -> "Series":
        ks = np.arange(self.val, self.prec)
        c = self.coef * ks
        return Series(self.val - 1, c)

    def sqrt(self, root0=None) -> "Series":
        """Square root for even valuation; ``root0`` picks the leading branch."""
        s = self.strip()
        if s.val % 2:
            raise ValueError("odd valuation has no Laurent square root")
        c = s.coef
        n = len(c)
        r = np.zeros(n, dtype=complex)
        r[0] = np.sqrt(c[0]) if root0 is None else root0
        for k in range(1, n):
            acc = np.dot(r[1:k], r[k - 1:0:-1]) if k > 1 else 0.0
            r[k] = (c[k] - acc) / (2 * r[0])
        return Series(s.val // 2, r)


def poly_at(coeffs, x: Series) -> Series:
    """Evaluate an ascending-coefficient polynomial at a series (Horner)."""
    coeffs = np.asarray(coeffs, dtype=complex)
    n = max(len(x.coef), 1)
    if len(coeffs) == 0:
        return Series.const(0.0, n)
    out = Series.const(coeffs[-1], n)
    for c in coeffs[-2::-1]:
        out = out * x + c
    return out
