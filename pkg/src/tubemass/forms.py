"""Constant-coefficient real (1,1)-forms.

A form ``i * sum A[j, k] dz_j ^ dzbar_k`` is stored through its Hermitian
coefficient matrix ``A``.  The identity matrix is the Kaehler form
``beta = i ddbar |z|^2``.  Wedge products of ``n`` such forms are multiples of
``beta^n``; the multiple is a normalised mixed discriminant.

Volume convention: ``beta^n / n! = 2^n`` times Lebesgue measure on R^{2n}.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from math import factorial

import numpy as np

#: beta^n / n! = LEBESGUE_FACTOR ** n * d(lambda)
LEBESGUE_FACTOR = 2.0


@dataclass(frozen=True)
class HermitianForm:
    """Coefficient matrix of ``i sum A_jk dz_j ^ dzbar_k``.

    Hermiticity is enforced on construction by averaging with the adjoint;
    inputs further than 1e-12 (relative) from Hermitian are rejected.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        scale = max(np.abs(a).max(), 1.0)
        if np.abs(a - a.conj().T).max() > 1e-12 * scale:
            raise ValueError("coefficient matrix is not Hermitian")
        object.__setattr__(self, "entries", 0.5 * (a + a.conj().T))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, n: int) -> "HermitianForm":
        return cls(np.eye(n))

    @classmethod
    def diag(cls, values) -> "HermitianForm":
        return cls(np.diag(np.asarray(values, dtype=float)))

    def __add__(self, other):
        return HermitianForm(self.entries + _matrix(other))

    def __mul__(self, c):
        return HermitianForm(self.entries * float(c))

    __rmul__ = __mul__


def _matrix(form) -> np.ndarray:
    if isinstance(form, HermitianForm):
        return form.entries
    return np.asarray(form, dtype=complex)


def principal_minor_sum(b: np.ndarray, k: int) -> np.ndarray:
    """Sum of the principal ``k x k`` minors of ``b`` (batched over leading axes).

    Equals the coefficient of ``s^(n-k)`` in ``det(b + s I)``.
    """
    b = np.asarray(b)
    n = b.shape[-1]
    if k == 0:
        return np.ones(b.shape[:-2], dtype=b.dtype)
    total = np.zeros(b.shape[:-2], dtype=complex)
    for idx in combinations(range(n), k):
        sub = b[..., idx, :][..., :, idx]
        total = total + np.linalg.det(sub)
    return total


def wedge_coefficient(forms, n: int | None = None, *, real: bool = True):
    """Return ``c`` with ``w_{A_1} ^ ... ^ w_{A_k} ^ beta^(n-k) = c beta^n``.

    ``forms`` is a sequence of ``k`` forms (HermitianForm or arrays).  Arrays
    may carry leading batch axes ``(..., n, n)`` that broadcast against each
    other, in which case an array of coefficients is returned.  Matrices need
    not be Hermitian; the coefficient is multilinear in its arguments.

    The mixed term is isolated by inclusion-exclusion over the ``2^k``
    partial sums ``sum_{i in S} A_i``; the power of ``beta`` is the
    ``s^(n-k)`` coefficient of ``det(B + s I)``.
    """
    mats = [_matrix(f) for f in forms]
    k = len(mats)
    if k == 0:
        raise ValueError("at least one form is required")
    dims = {m.shape[-1] for m in mats} | {m.shape[-2] for m in mats}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch among forms: {sorted(dims)}")
    dim = dims.pop()
    if n is not None and n != dim:
        raise ValueError(f"forms have dimension {dim}, expected {n}")
    n = dim
    if k > n:
        raise ValueError(f"cannot wedge {k} (1,1)-forms in dimension {n}")

    total = 0.0
    for size in range(1, k + 1):
        sign = (-1) ** (k - size)
        for subset in combinations(range(k), size):
            b = mats[subset[0]]
            for i in subset[1:]:
                b = b + mats[i]
            total = total + sign * principal_minor_sum(b, k)
    c = total * factorial(n - k) / factorial(n)
    if real:
        c = np.real(c)
    return c if np.ndim(c) else c.item()


def _parity(perm) -> int:
    perm, sign = list(perm), 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def wedge_coefficient_bruteforce(forms, n: int) -> complex:
    """Reference value by expanding the wedge product in the exterior algebra.

    With ``beta`` supplying the missing factors, the coefficient of ``beta^n``
    is ``(1/n!) sum_{s, t} sgn(s) sgn(t) prod_l A_l[s(l), t(l)]``.  Cost is
    ``(n!)^2``; intended for ``n <= 4``.
    """
    mats = [_matrix(f) for f in forms] + [np.eye(n)] * (n - len(forms))
    perms = [(p, _parity(p)) for p in permutations(range(n))]
    total = 0j
    for s, ss in perms:
        for t, st in perms:
            prod = ss * st
            for l in range(n):
                prod = prod * mats[l][s[l], t[l]]
            total += prod
    return total / factorial(n)


def is_positive(form, tolerance: float = 1e-12) -> bool:
    """True iff the smallest eigenvalue is >= -tolerance."""
    a = _matrix(form)
    a = 0.5 * (a + a.conj().T)
    return bool(np.linalg.eigvalsh(a).min() >= -tolerance)


def trace_density(form):
    """``c`` with ``w_A ^ beta^(n-1) = c beta^n``, i.e. ``tr(A) / n``."""
    a = _matrix(form)
    n = a.shape[-1]
    return np.real(np.trace(a, axis1=-2, axis2=-1)) / n


def pairing_matrix(forms, n: int) -> np.ndarray:
    """Hermitian ``G`` such that ``gamma ^ forms ^ beta^(n-1-k) = tr(G gamma) beta^n``.

    ``forms`` holds ``k <= n-1`` (batched) matrices.  Testing an
    ``(n-1, n-1)``-form against the extreme rays ``i a ^ abar`` of the positive
    (1,1) cone reduces to the quadratic form ``a* G a``.
    """
    mats = [_matrix(f) for f in forms]
    batch = np.broadcast_shapes(*(m.shape[:-2] for m in mats)) if mats else ()
    g = np.zeros(batch + (n, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[j, k] = 1.0
            # tr(G E_jk) = G_kj
            g[..., k, j] = wedge_coefficient([e] + mats, n, real=False)
    return 0.5 * (g + np.conj(np.swapaxes(g, -1, -2)))


def positivity_margin(forms, n: int) -> np.ndarray:
    """Largest ``d`` with ``forms ^ beta^(n-1-k) >= d beta^(n-1)`` as forms.

    Computed as ``n * lambda_min(G)``; negative values mean the wedge product
    is not a positive form.  With no forms the margin is 1.
    """
    if len(forms) == 0:
        return np.asarray(1.0)
    g = pairing_matrix(forms, n)
    return n * np.linalg.eigvalsh(g)[..., 0]
