"""Named manifolds and fields used by the bundled scenarios and tests."""
from __future__ import annotations

import numpy as np

from .manifold import Chart, DefiningSystem
from .polynomial import Polynomial


def real_space(n: int, half: float = 1.0, radius: float = 1.0) -> DefiningSystem:
    """``R^n`` in C^n: ``rho_j = y_j``; chart = x-coordinates on ``[-half, half]^n``."""
    basis = np.zeros((2 * n, n))
    basis[:n, :n] = np.eye(n)
    chart = Chart.linear(np.zeros(2 * n), basis, [-half] * n, [half] * n)
    return DefiningSystem([Polynomial.y(n, j) for j in range(n)], radius, chart, name=f"R{n}")


def coordinate_subspace(n: int, zero_coords, half: float = 1.0, radius: float = 1.0,
                        name: str = "") -> DefiningSystem:
    """Linear M cut out by vanishing real coordinates (indices into (x, y))."""
    zero_coords = list(zero_coords)
    free = [i for i in range(2 * n) if i not in zero_coords]
    basis = np.zeros((2 * n, len(free)))
    for a, i in enumerate(free):
        basis[i, a] = 1.0
    chart = Chart.linear(np.zeros(2 * n), basis, [-half] * len(free), [half] * len(free))
    rho = [Polynomial.coordinate(n, i) for i in zero_coords]
    return DefiningSystem(rho, radius, chart, name=name or f"zero{zero_coords}")


def complex_line_c2(half: float = 1.0) -> DefiningSystem:
    """``C x {0}`` in C^2 (``x_2 = y_2 = 0``): not generating."""
    return coordinate_subspace(2, [1, 3], half, name="C x 0")


def counterexample_c3(half: float = 1.0) -> DefiningSystem:
    """``C x R x {0}`` in C^3 (``y_2 = x_3 = y_3 = 0``, m = 3): not generating."""
    return coordinate_subspace(3, [4, 2, 5], half, name="C x R x 0")


def graph_manifold(n: int, dependent: dict, half: float = 1.0, radius: float = 1.0,
                   name: str = "graph") -> DefiningSystem:
    """``{X_i = g_i(X_free)}`` for the dependent coordinate indices ``i``."""
    free = [i for i in range(2 * n) if i not in dependent]
    rho = [Polynomial.coordinate(n, i) - g for i, g in dependent.items()]
    chart = Chart.graph(n, free, dependent, [-half] * len(free), [half] * len(free))
    return DefiningSystem(rho, radius, chart, name=name, kind="graph")


def curved_totally_real() -> DefiningSystem:
    """``{y_1 = x_2^2, y_2 = 0}`` in C^2: a curved generating surface."""
    n = 2
    x2 = Polynomial.x(n, 1)
    return graph_manifold(n, {2: x2 * x2, 3: Polynomial.constant(n, 0.0)}, name="y1=x2^2,y2=0")


def small_graph(c: float = 0.1) -> DefiningSystem:
    """``y = g(x)`` with small quadratic ``g`` in C^2."""
    n = 2
    x1, x2 = Polynomial.x(n, 0), Polynomial.x(n, 1)
    return graph_manifold(n, {2: c * x1 * x2, 3: c * (x1 * x1 - x2 * x2)}, name="graph y=g(x)")


def paraboloid_hypersurface(c: float = 0.2) -> DefiningSystem:
    """``y_1 = c (x_1^2 + x_2^2)`` in C^2 (m = 1)."""
    n = 2
    x1, x2 = Polynomial.x(n, 0), Polynomial.x(n, 1)
    return graph_manifold(n, {2: c * (x1 * x1 + x2 * x2)}, name="hypersurface")


def unit_sphere(n: int = 2, radius: float = 2.0) -> DefiningSystem:
    """``|z|^2 = 1`` without a chart."""
    return DefiningSystem([Polynomial.norm_squared(n) - 1.0], radius, None, name="sphere")


def generating_suite():
    """Six manifolds with the expected answer of the generating test."""
    return [
        (real_space(2), True),
        (complex_line_c2(), False),
        (curved_totally_real(), True),
        (small_graph(), True),
        (counterexample_c3(), False),
        (paraboloid_hypersurface(), True),
    ]
