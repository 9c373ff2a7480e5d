"""Closed-form evaluators for the one-way direct-product bounds.

Quantities that can overflow have a ``log_*`` twin returning the natural
logarithm; the plain version is ``exp`` of it unless noted. Values above 1
are returned unclipped; :func:`is_vacuous` flags them.
"""

from __future__ import annotations

import math
from fractions import Fraction

TWO_LN2 = 2.0 * math.log(2.0)


def is_vacuous(value: float) -> bool:
    """True when a probability bound exceeds 1 and therefore says nothing."""
    return value > 1.0


def _check_counts(k: int, n: int, ell: int) -> None:
    if k < 1 or n < 1 or ell < 1:
        raise ValueError(f"need k, n, ell >= 1, got k={k}, n={n}, ell={ell}")
    if ell > k:
        raise ValueError(f"ell={ell} exceeds k={k}")


def block_disjoint_probability_exact(k: int, n: int, ell: int) -> Fraction:
    """Probability that ``ell`` distinct uniform indices of ``[kn]`` hit distinct blocks of size ``n``."""
    _check_counts(k, n, ell)
    prob = Fraction(1)
    for i in range(ell):
        prob *= Fraction(k * n - i * n, k * n - i)
    return prob


def log_block_disjoint_probability(k: int, n: int, ell: int) -> float:
    _check_counts(k, n, ell)
    return sum(math.log(k * n - i * n) - math.log(k * n - i) for i in range(ell))


def block_disjoint_probability(k: int, n: int, ell: int) -> tuple[float, float]:
    """``(prod_{i<ell} (kn - in)/(kn - i), (1 - ell/k)^ell)``; the first is never below the second."""
    exact = float(block_disjoint_probability_exact(k, n, ell))
    lower = (1.0 - ell / k) ** ell
    return exact, lower


def rac_from_protocol_success(sigma: float, k: int, ell: int) -> float:
    """Success of the ``ell``-out-of-``kn`` random access code built from a
    ``k``-fold Disjointness protocol with success `sigma`: ``sigma (1 - ell/k)^ell``."""
    if not 0.0 <= sigma <= 1.0:
        raise ValueError(f"sigma must lie in [0, 1], got {sigma}")
    if k < 1 or ell < 1 or ell > k:
        raise ValueError(f"need 1 <= ell <= k, got ell={ell}, k={k}")
    return sigma * (1.0 - ell / k) ** ell


def binary_entropy(eps: float) -> float:
    """``-e log2 e - (1-e) log2(1-e)`` with ``0 log 0 = 0``."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    if eps in (0.0, 1.0):
        return 0.0
    return -eps * math.log2(eps) - (1.0 - eps) * math.log2(1.0 - eps)


def eps_error_conversion(gamma: float, eps: float) -> float:
    """Exponent ``gamma - H(eps)`` left for ``(1 - eps)``-fraction success.

    A zero-error bound ``2^(-gamma k)`` becomes ``2^(-(gamma - H(eps)) k)``
    when only a ``1 - eps`` fraction of instances must be right.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if not 0.0 <= eps <= 0.5:
        raise ValueError(f"eps must lie in [0, 1/2], got {eps}")
    return gamma - binary_entropy(eps)


def _check_sdpt(c: float, k: int, n: int, eta: float, ell: int, c_eta: float, overhead: float) -> None:
    if not eta > TWO_LN2:
        raise ValueError(f"eta must exceed 2 ln 2 = {TWO_LN2:.6f}, got {eta}")
    if k < 1 or n < 1 or ell < 1:
        raise ValueError("need k, n, ell >= 1")
    if ell >= k:
        raise ValueError(f"need ell < k, got ell={ell}, k={k}")
    if c < 0 or overhead < 0:
        raise ValueError("c and overhead must be non-negative")
    if c_eta <= 0:
        raise ValueError("c_eta must be positive")


def log_oneway_sdpt_bound(c: float, k: int, n: int, eta: float, ell: int, c_eta: float, overhead: float = 0.0) -> float:
    _check_sdpt(c, k, n, eta, ell, c_eta, overhead)
    base = 0.5 + 0.5 * math.sqrt(eta * (c + overhead) / (k * n))
    return math.log(2.0 * c_eta) + ell * (math.log(base) + math.log(k) - math.log(k - ell))


def oneway_sdpt_bound(c: float, k: int, n: int, eta: float, ell: int, c_eta: float, overhead: float = 0.0) -> float:
    """Upper bound on the success of a ``c``-qubit one-way protocol for ``k``-fold Disjointness.

    ``2 c_eta ((1/2 + sqrt(eta (c + overhead) / (k n)) / 2) * k / (k - ell))^ell``.
    `overhead` stands in for the message-length term of order
    ``k + log(kn)`` whose constant is not fixed; `c_eta` likewise.
    """
    return math.exp(log_oneway_sdpt_bound(c, k, n, eta, ell, c_eta, overhead))


def oneway_sdpt_bound_direct(c: float, k: int, n: int, eta: float, ell: int, c_eta: float, overhead: float = 0.0) -> float:
    """Same value as :func:`oneway_sdpt_bound` by straightforward multiplication."""
    _check_sdpt(c, k, n, eta, ell, c_eta, overhead)
    base = 0.5 + 0.5 * math.sqrt(eta * (c + overhead) / (k * n))
    return 2.0 * c_eta * (base * k / (k - ell)) ** ell
