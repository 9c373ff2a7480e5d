"""Two-sided evaluators for the matrix hypercontractive inequality.

Every function returns both sides so callers can inspect margins; none
returns a bare boolean. All norms are the normalized Schatten norms of
:mod:`matrixhc.matcore`.
"""

from __future__ import annotations

import numpy as np

from .cube import CubeFunction, fourier_transform, subset_sizes
from .matcore import (
    as_matrix,
    batch_singular_values,
    norm_from_singular_values,
    random_density,
    random_ginibre,
)


def _check_p_range(p: float) -> float:
    p = float(p)
    if not 1.0 <= p <= 2.0:
        raise ValueError(f"p must lie in [1, 2], got {p}")
    return p


def _attenuation(p: float, n: int) -> np.ndarray:
    # (p-1)^|S| with 0^0 = 1
    return np.power(p - 1.0, subset_sizes(n)).astype(float)


def bcl_sides(A, B, p: float) -> tuple[float, float]:
    """Both sides of the two-point (Ball-Carlen-Lieb) inequality.

    ``lhs = (||(A+B)/2||_p^2 + (p-1) ||(A-B)/2||_p^2)^(1/2)``,
    ``rhs = ((||A||_p^p + ||B||_p^p)/2)^(1/p)``; ``lhs <= rhs`` for
    ``1 <= p <= 2``.
    """
    p = _check_p_range(p)
    A, B = as_matrix(A), as_matrix(B)
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    s = batch_singular_values(np.stack([(A + B) / 2, (A - B) / 2, A, B]))
    return bcl_sides_from_singular_values(s, p)


def bcl_sides_from_singular_values(s: np.ndarray, p: float) -> tuple[float, float]:
    """:func:`bcl_sides` from precomputed singular values of
    ``(A+B)/2, (A-B)/2, A, B`` stacked in that order."""
    mean, half_diff, a, b = norm_from_singular_values(s, p)
    lhs = np.sqrt(mean**2 + (p - 1.0) * half_diff**2)
    rhs = ((a**p + b**p) / 2.0) ** (1.0 / p)
    return float(lhs), float(rhs)


class HypercontractiveProfile:
    """Singular values of ``f(x)`` and ``fhat(S)``, cached for a p-sweep."""

    def __init__(self, f: CubeFunction):
        self.n = f.n
        self.values = batch_singular_values(f.table)
        self.coefficients = batch_singular_values(fourier_transform(f).table)

    def sides(self, p: float) -> tuple[float, float]:
        p = _check_p_range(p)
        coef_norms = norm_from_singular_values(self.coefficients, p)
        lhs = np.sqrt(np.sum(_attenuation(p, self.n) * coef_norms**2))
        rhs = np.mean(norm_from_singular_values(self.values, p) ** p) ** (1.0 / p)
        return float(lhs), float(rhs)


def hypercontractive_sides(f: CubeFunction, p: float) -> tuple[float, float]:
    """Both sides of the hypercontractive inequality for matrix-valued `f`.

    ``lhs = (sum_S (p-1)^|S| ||fhat(S)||_p^2)^(1/2)`` and
    ``rhs = (2^-n sum_x ||f(x)||_p^p)^(1/p)``. At ``p = 1`` only ``S = {}``
    carries weight; at ``p = 2`` the sides coincide (Parseval).
    """
    return HypercontractiveProfile(f).sides(p)


def _vector_norm(v: np.ndarray, q: float, axis: int) -> np.ndarray:
    v = np.abs(v)
    if np.isinf(q):
        return v.max(axis=axis)
    return np.mean(v**q, axis=axis) ** (1.0 / q)


def minkowski_gap(values, q1: float, q2: float) -> float:
    """Column-then-row minus row-then-column mixed norm of a real matrix.

    Returns ``|| (||v_j||_q2)_j ||_q1 - || (||u_i||_q1)_i ||_q2`` where
    ``v_j`` are the columns, ``u_i`` the rows, and every norm uses the
    normalized counting measure. The gap is non-negative for
    ``1 <= q1 < q2 <= inf``.
    """
    q1, q2 = float(q1), float(q2)
    if not (1.0 <= q1 < q2):
        raise ValueError(f"need 1 <= q1 < q2, got q1={q1}, q2={q2}")
    V = np.asarray(values, dtype=float)
    if V.ndim != 2 or V.size == 0:
        raise ValueError("values must be a non-empty 2-d array")
    column_first = _vector_norm(_vector_norm(V, q2, axis=0), q1, axis=0)
    row_first = _vector_norm(_vector_norm(V, q1, axis=1), q2, axis=0)
    return float(column_first - row_first)


ENSEMBLES = ("ginibre", "density", "pm1-scalar", "rank1")


def random_cube_function(rng: np.random.Generator, n: int, d: int, ensemble: str) -> CubeFunction:
    """Draw a random function for the sidedness sweeps.

    ``ginibre``: i.i.d. complex Gaussian entries. ``density``: random mixed
    states. ``rank1``: outer products ``u v^dag`` of Gaussian vectors.
    ``pm1-scalar``: uniform +1/-1 values (``d`` is ignored and set to 1).
    """
    size = 1 << n
    if ensemble == "ginibre":
        table = random_ginibre(rng, d, size=(size,))
    elif ensemble == "density":
        table = random_density(rng, d, size=(size,))
    elif ensemble == "rank1":
        u = rng.standard_normal((size, d, 1)) + 1j * rng.standard_normal((size, d, 1))
        v = rng.standard_normal((size, 1, d)) + 1j * rng.standard_normal((size, 1, d))
        table = u @ v
    elif ensemble == "pm1-scalar":
        table = rng.choice([-1.0, 1.0], size=size).reshape(size, 1, 1)
    else:
        raise ValueError(f"unknown ensemble {ensemble!r}; expected one of {ENSEMBLES}")
    return CubeFunction(n, table)
