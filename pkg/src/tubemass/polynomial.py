"""Polynomials in the real coordinates ``(x_1..x_n, y_1..y_n)`` of C^n.

Real-coefficient polynomials are scalar fields with exact jets.  Complex
coefficients are allowed too; that is how holomorphic polynomials ``f(z)`` are
carried (``z_j = x_j + i y_j`` expanded).
"""
from __future__ import annotations

from functools import cached_property
from itertools import product
from math import factorial

import numpy as np

from .jets import Jet2, ScalarField, as_complex_points, real_to_complex_jet


def to_real(z: np.ndarray) -> np.ndarray:
    """Complex points ``(..., n)`` -> real coordinates ``(..., 2n)`` as (x, y)."""
    z = np.asarray(z, dtype=complex)
    return np.concatenate([z.real, z.imag], axis=-1)


def to_complex(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = x.shape[-1] // 2
    return x[..., :n] + 1j * x[..., n:]


class Polynomial(ScalarField):
    """Sparse polynomial ``sum_t c_t prod_i X_i^{e_ti}`` with X = (x, y).

    Parameters
    ----------
    exponents : array_like of int, shape (T, 2n)
    coeffs : array_like, shape (T,)
        Real or complex coefficients.  Duplicate exponent rows are merged and
        zero terms dropped.
    """

    def __init__(self, exponents, coeffs, n: int | None = None):
        e = np.asarray(exponents, dtype=int)
        c = np.asarray(coeffs, dtype=complex).ravel()
        if e.size == 0:
            if n is None:
                raise ValueError("dimension required for the zero polynomial")
            e = np.zeros((0, 2 * n), dtype=int)
        e = np.atleast_2d(e)
        if e.shape[0] != c.shape[0]:
            raise ValueError("exponents and coeffs disagree in length")
        if e.shape[1] % 2:
            raise ValueError("exponent rows need 2n entries (x then y)")
        if n is not None and e.shape[1] != 2 * n:
            raise ValueError(f"exponent rows have {e.shape[1]} entries, expected {2 * n}")
        if (e < 0).any():
            raise ValueError("negative exponent")
        merged: dict[tuple, complex] = {}
        for row, coef in zip(map(tuple, e), c):
            merged[row] = merged.get(row, 0.0) + coef
        rows = sorted(k for k, v in merged.items() if v != 0)
        self._n = e.shape[1] // 2
        self.exponents = np.array(rows, dtype=int).reshape(-1, 2 * self._n)
        vals = np.array([merged[r] for r in rows], dtype=complex)
        self.is_real = bool(np.all(vals.imag == 0))
        self.coeffs = vals.real.copy() if self.is_real else vals

    # construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, n: int, value) -> "Polynomial":
        return cls(np.zeros((1, 2 * n), dtype=int), [value], n)

    @classmethod
    def coordinate(cls, n: int, index: int) -> "Polynomial":
        e = np.zeros((1, 2 * n), dtype=int)
        e[0, index] = 1
        return cls(e, [1.0], n)

    @classmethod
    def x(cls, n: int, j: int) -> "Polynomial":
        return cls.coordinate(n, j)

    @classmethod
    def y(cls, n: int, j: int) -> "Polynomial":
        return cls.coordinate(n, n + j)

    @classmethod
    def z(cls, n: int, j: int) -> "Polynomial":
        return cls.x(n, j) + 1j * cls.y(n, j)

    @classmethod
    def norm_squared(cls, n: int) -> "Polynomial":
        return cls(2 * np.eye(2 * n, dtype=int), np.ones(2 * n), n)

    @classmethod
    def from_terms(cls, terms, n: int) -> "Polynomial":
        """Build from config terms ``{"exponents": [...2n], "coeff_re": a, "coeff_im": b}``."""
        if not terms:
            return cls(np.zeros((0, 2 * n), dtype=int), [], n)
        e = [t["exponents"] for t in terms]
        c = [complex(t.get("coeff_re", 0.0), t.get("coeff_im", 0.0)) for t in terms]
        return cls(e, c, n)

    def to_terms(self) -> list[dict]:
        out = []
        for row, c in zip(self.exponents, np.asarray(self.coeffs, dtype=complex)):
            term = {"exponents": [int(v) for v in row], "coeff_re": float(c.real)}
            if c.imag:
                term["coeff_im"] = float(c.imag)
            out.append(term)
        return out

    # algebra --------------------------------------------------------------
    @property
    def n(self) -> int:
        return self._n

    @property
    def degree(self) -> int:
        return int(self.exponents.sum(axis=1).max()) if len(self.exponents) else 0

    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.n != self.n:
                raise ValueError("dimension mismatch")
            return other
        if np.isscalar(other):
            return Polynomial.constant(self.n, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return super().__add__(other)
        return Polynomial(np.vstack([self.exponents, other.exponents]),
                          np.concatenate([np.asarray(self.coeffs, complex),
                                          np.asarray(other.coeffs, complex)]), self.n)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.exponents, -np.asarray(self.coeffs), self.n)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other):
            return Polynomial(self.exponents, np.asarray(self.coeffs) * other, self.n)
        other = self._coerce(other)
        if other is NotImplemented:
            return super().__mul__(other)
        if self.is_zero() or other.is_zero():
            return Polynomial(np.zeros((0, 2 * self.n), dtype=int), [], self.n)
        e = (self.exponents[:, None, :] + other.exponents[None, :, :]).reshape(-1, 2 * self.n)
        c = (np.asarray(self.coeffs)[:, None] * np.asarray(other.coeffs)[None, :]).ravel()
        return Polynomial(e, c, self.n)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Polynomial.constant(self.n, 1.0)
        for _ in range(int(k)):
            out = out * self
        return out

    def conj(self) -> "Polynomial":
        return Polynomial(self.exponents, np.conj(self.coeffs), self.n)

    @property
    def real_part(self) -> "Polynomial":
        return Polynomial(self.exponents, np.real(self.coeffs), self.n)

    @property
    def imag_part(self) -> "Polynomial":
        return Polynomial(self.exponents, np.imag(self.coeffs), self.n)

    def derivative(self, index: int) -> "Polynomial":
        e = self.exponents.copy()
        c = np.asarray(self.coeffs) * e[:, index]
        e[:, index] = np.maximum(e[:, index] - 1, 0)
        return Polynomial(e, c, self.n)

    def is_holomorphic(self, tol: float = 0.0) -> bool:
        """``d/dzbar_j = (d/dx_j + i d/dy_j) / 2`` vanishes identically."""
        for j in range(self.n):
            dbar = self.derivative(j) + 1j * self.derivative(self.n + j)
            if len(dbar.coeffs) and np.abs(dbar.coeffs).max() > tol:
                return False
        return True

    # evaluation -----------------------------------------------------------
    def evaluate_real(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1]
        if self.is_zero():
            return np.zeros(shape, dtype=float if self.is_real else complex)
        flat = x.reshape(-1, 2 * self.n)
        top = int(self.exponents.max())
        pw = np.empty((top + 1,) + flat.shape)
        pw[0] = 1.0
        for k in range(1, top + 1):
            pw[k] = pw[k - 1] * flat
        cols = np.arange(2 * self.n)
        mono = np.prod(pw[self.exponents, :, cols], axis=1)   # (T, N)
        out = np.asarray(self.coeffs) @ mono
        return out.reshape(shape)

    def value(self, z):
        return self.evaluate_real(to_real(as_complex_points(z, self.n)))

    @cached_property
    def _first(self) -> list["Polynomial"]:
        return [self.derivative(i) for i in range(2 * self.n)]

    @cached_property
    def _second(self) -> list[list["Polynomial"]]:
        d = self._first
        return [[d[i].derivative(j) for j in range(2 * self.n)] for i in range(2 * self.n)]

    def real_derivs(self, x: np.ndarray):
        """Value, real gradient ``(..., 2n)`` and real Hessian ``(..., 2n, 2n)``."""
        x = np.asarray(x, dtype=float)
        dim = 2 * self.n
        val = self.evaluate_real(x)
        dtype = float if self.is_real else complex
        grad = np.zeros(x.shape[:-1] + (dim,), dtype=dtype)
        hess = np.zeros(x.shape[:-1] + (dim, dim), dtype=dtype)
        for i, p in enumerate(self._first):
            if not p.is_zero():
                grad[..., i] = p.evaluate_real(x)
        for i in range(dim):
            for j in range(i, dim):
                p = self._second[i][j]
                if not p.is_zero():
                    hess[..., i, j] = hess[..., j, i] = p.evaluate_real(x)
        return val, grad, hess

    def jet(self, z) -> Jet2:
        if not self.is_real:
            raise TypeError("jets are defined for real-valued fields only")
        z = as_complex_points(z, self.n)
        return real_to_complex_jet(*self.real_derivs(to_real(z)))

    def holomorphic_gradient(self, z) -> np.ndarray:
        """``df/dz_j`` for holomorphic ``f`` (equal to ``df/dx_j``)."""
        x = to_real(as_complex_points(z, self.n))
        out = np.zeros(x.shape[:-1] + (self.n,), dtype=complex)
        for j in range(self.n):
            p = self._first[j]
            if not p.is_zero():
                out[..., j] = p.evaluate_real(x)
        return out

    # remainder bounds -----------------------------------------------------
    @cached_property
    def _taylor_terms(self) -> list[tuple[np.ndarray, "Polynomial"]]:
        """All nonzero ``(gamma, D^gamma f / gamma!)`` with ``|gamma| >= 1``."""
        if self.is_zero():
            return []
        top = self.exponents.max(axis=0)
        terms = []
        for gamma in product(*(range(t + 1) for t in top)):
            if sum(gamma) == 0:
                continue
            p = self
            for i, g in enumerate(gamma):
                for _ in range(g):
                    p = p.derivative(i)
                if p.is_zero():
                    break
            if p.is_zero():
                continue
            scale = np.prod([factorial(g) for g in gamma])
            terms.append((np.array(gamma), p * (1.0 / scale)))
        return terms

    def taylor_bound(self, centers: np.ndarray, halfwidths: np.ndarray):
        """Rigorous bound on ``|f(c + d) - f(c)|`` over ``|d_i| <= h_i``.

        Returns ``(f(c), bound, per_axis)`` where ``per_axis`` splits the
        bound among coordinates in proportion to each monomial's degree in
        that coordinate (used to pick refinement directions).
        """
        c = np.asarray(centers, dtype=float)
        h = np.asarray(halfwidths, dtype=float)
        h = np.broadcast_to(h, c.shape)
        val = self.evaluate_real(c)
        bound = np.zeros(c.shape[:-1])
        per_axis = np.zeros(c.shape)
        for gamma, p in self._taylor_terms:
            term = np.abs(p.evaluate_real(c)) * np.prod(h ** gamma, axis=-1)
            bound += term
            per_axis += term[..., None] * (gamma / gamma.sum())
        return val, bound, per_axis

    def __repr__(self):
        return f"Polynomial(n={self.n}, terms={len(self.coeffs)})"


def holomorphic(terms, n: int) -> Polynomial:
    """Holomorphic polynomial from ``[(z_exponents, coeff), ...]``."""
    out = Polynomial(np.zeros((0, 2 * n), dtype=int), [], n)
    for exps, coef in terms:
        mono = Polynomial.constant(n, coef)
        for j, k in enumerate(exps):
            mono = mono * Polynomial.z(n, j) ** k
        out = out + mono
    return out
