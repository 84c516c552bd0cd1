"""Second-order jets of real functions on C^n.

Convention: ``d/dz = (d/dx - i d/dy) / 2`` so that the mixed Hessian of
``|z|^2`` is the identity (the Kaehler form).  Every array may carry leading
batch axes; a jet over ``N`` points has ``value (N,)``, ``grad (N, n)`` and
``hess (N, n, n)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class JetDomainError(ValueError):
    """Raised when a composite is evaluated where its outer map is singular."""


@dataclass(frozen=True)
class Jet2:
    value: np.ndarray
    grad: np.ndarray   # df/dz_j
    hess: np.ndarray   # d^2 f / dz_j dzbar_k

    @property
    def n(self) -> int:
        return self.grad.shape[-1]

    @classmethod
    def constant(cls, c, n: int, shape=()) -> "Jet2":
        return cls(np.full(shape, float(c)), np.zeros(shape + (n,), complex),
                   np.zeros(shape + (n, n), complex))

    def __getitem__(self, idx) -> "Jet2":
        return Jet2(self.value[idx], self.grad[idx], self.hess[idx])

    def __add__(self, other):
        if isinstance(other, Jet2):
            return Jet2(self.value + other.value, self.grad + other.grad, self.hess + other.hess)
        return Jet2(self.value + other, self.grad, self.hess)

    def scale(self, c) -> "Jet2":
        c = np.asarray(c)
        return Jet2(self.value * c, self.grad * c[..., None], self.hess * c[..., None, None])


def outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``a b^*`` batched."""
    return a[..., :, None] * np.conj(b)[..., None, :]


def real_to_complex_jet(value, grad, hess) -> Jet2:
    """Convert real derivatives in ``(x, y)`` coordinates to a complex jet."""
    n = grad.shape[-1] // 2
    gx, gy = grad[..., :n], grad[..., n:]
    hxx = hess[..., :n, :n]
    hyy = hess[..., n:, n:]
    hxy = hess[..., :n, n:]
    cgrad = 0.5 * (gx - 1j * gy)
    chess = 0.25 * (hxx + hyy + 1j * (hxy - np.swapaxes(hxy, -1, -2)))
    return Jet2(np.asarray(value, float), cgrad, chess)


def as_complex_points(z, n: int) -> np.ndarray:
    z = np.asarray(z)
    if not np.iscomplexobj(z) and z.shape[-1] == 2 * n and n > 0 and z.shape[-1] != n:
        z = z[..., :n] + 1j * z[..., n:]
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != n:
        raise ValueError(f"points must have {n} complex coordinates, got shape {z.shape}")
    return z


def jet_product(a: Jet2, b: Jet2) -> Jet2:
    if a.n != b.n:
        raise ValueError("jet dimension mismatch")
    value = a.value * b.value
    grad = a.value[..., None] * b.grad + b.value[..., None] * a.grad
    hess = (a.value[..., None, None] * b.hess + b.value[..., None, None] * a.hess
            + outer(a.grad, b.grad) + outer(b.grad, a.grad))
    return Jet2(value, grad, hess)


def jet_chain(g: Callable, dg: Callable, d2g: Callable, inner: Jet2,
              domain: Callable | None = None) -> Jet2:
    """Jet of ``g(inner)``: ``hess = g'(v) H + g''(v) grad grad^*``."""
    v = inner.value
    if domain is not None and not np.all(domain(v)):
        raise JetDomainError("outer function is singular at some inner values")
    g1 = np.asarray(dg(v), float)
    g2 = np.asarray(d2g(v), float)
    return Jet2(np.asarray(g(v), float), g1[..., None] * inner.grad,
                g1[..., None, None] * inner.hess + g2[..., None, None] * outer(inner.grad, inner.grad))


def smooth_max(a: Jet2, b: Jet2, eps: float) -> Jet2:
    """Jet of ``(a + b + sqrt((a - b)^2 + eps^2)) / 2``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    d = a.value - b.value
    s = np.sqrt(d * d + eps * eps)
    fa = 0.5 * (1 + d / s)
    fb = 0.5 * (1 - d / s)
    faa = 0.5 * eps * eps / s ** 3
    value = 0.5 * (a.value + b.value + s)
    grad = fa[..., None] * a.grad + fb[..., None] * b.grad
    cross = outer(a.grad, b.grad) + outer(b.grad, a.grad)
    hess = (fa[..., None, None] * a.hess + fb[..., None, None] * b.hess
            + faa[..., None, None] * (outer(a.grad, a.grad) + outer(b.grad, b.grad) - cross))
    return Jet2(value, grad, hess)


class ScalarField:
    """A real function on C^n that can report exact second-order jets."""

    n: int

    def jet(self, z) -> Jet2:
        raise NotImplementedError

    def value(self, z) -> np.ndarray:
        return self.jet(z).value

    def __call__(self, z):
        return self.value(z)

    def __add__(self, other):
        return LinearCombination([(1.0, self), (1.0, _field(other, self.n))])

    __radd__ = __add__

    def __sub__(self, other):
        return LinearCombination([(1.0, self), (-1.0, _field(other, self.n))])

    def __mul__(self, other):
        if np.isscalar(other):
            return LinearCombination([(float(other), self)])
        return Product(self, _field(other, self.n))

    __rmul__ = __mul__


def jet_eval(field: ScalarField, points) -> Jet2:
    return field.jet(points)


class ConstantField(ScalarField):
    def __init__(self, n: int, c: float):
        self.n, self.c = n, float(c)

    def jet(self, z):
        z = as_complex_points(z, self.n)
        return Jet2.constant(self.c, self.n, z.shape[:-1])


def _field(obj, n) -> ScalarField:
    if isinstance(obj, ScalarField):
        return obj
    if np.isscalar(obj):
        return ConstantField(n, obj)
    raise TypeError(f"cannot use {type(obj).__name__} as a field")


class LinearCombination(ScalarField):
    def __init__(self, terms, const: float = 0.0):
        self.terms = [(float(c), f) for c, f in terms]
        self.n = self.terms[0][1].n
        self.const = const

    def jet(self, z):
        out = None
        for c, f in self.terms:
            j = f.jet(z).scale(c)
            out = j if out is None else out + j
        return out + self.const


class Product(ScalarField):
    def __init__(self, a: ScalarField, b: ScalarField):
        self.a, self.b, self.n = a, b, a.n

    def jet(self, z):
        return jet_product(self.a.jet(z), self.b.jet(z))


class Chain(ScalarField):
    """``g(inner)`` for a scalar ``g`` with known first and second derivatives."""

    def __init__(self, inner: ScalarField, g, dg, d2g, domain=None, name: str = "g"):
        self.inner, self.n = inner, inner.n
        self.g, self.dg, self.d2g, self.domain, self.name = g, dg, d2g, domain, name

    def jet(self, z):
        return jet_chain(self.g, self.dg, self.d2g, self.inner.jet(z), self.domain)

    def value(self, z):
        return np.asarray(self.g(self.inner.value(z)), float)


class SmoothMax(ScalarField):
    def __init__(self, a: ScalarField, b: ScalarField, eps: float):
        self.a, self.b, self.eps, self.n = a, b, float(eps), a.n

    def jet(self, z):
        return smooth_max(self.a.jet(z), self.b.jet(z), self.eps)

    def value(self, z):
        a, b = self.a.value(z), self.b.value(z)
        return 0.5 * (a + b + np.sqrt((a - b) ** 2 + self.eps ** 2))


def sqrt_field(inner: ScalarField) -> Chain:
    return Chain(inner, np.sqrt, lambda v: 0.5 / np.sqrt(v), lambda v: -0.25 * v ** -1.5,
                 domain=lambda v: v > 0, name="sqrt")


def square_field(inner: ScalarField) -> Chain:
    return Chain(inner, np.square, lambda v: 2.0 * v, lambda v: np.full_like(v, 2.0), name="square")


def log_field(inner: ScalarField) -> Chain:
    return Chain(inner, np.log, lambda v: 1.0 / v, lambda v: -1.0 / v ** 2,
                 domain=lambda v: v > 0, name="log")


def positive_part_squared(inner: ScalarField) -> Chain:
    """``max(0, inner)^2``; C^1 and convex in the inner value."""
    return Chain(inner, lambda v: np.maximum(v, 0.0) ** 2, lambda v: 2.0 * np.maximum(v, 0.0),
                 lambda v: 2.0 * (v > 0), name="pos2")
