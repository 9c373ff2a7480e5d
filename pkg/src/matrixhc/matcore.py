"""Dense complex linear algebra on square matrices.

Norm conventions follow the normalized counting measure: for a ``d x d``
matrix with singular values ``s_1..s_d``,

.. math::
    \\|A\\|_p = \\Big(\\frac{1}{d}\\sum_i s_i^p\\Big)^{1/p},

which is nondecreasing in ``p``. The trace norm is the unnormalized sum of
singular values, so ``trace_norm(A) == d * schatten_norm(A, 1)``.

Matrices are plain ``numpy.ndarray`` objects; :func:`as_matrix` is the single
validation point. :class:`DensityMatrix` and :class:`Povm` are frozen
wrappers that check their invariants once, at construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, PreconditionError

DEFAULT_TOL = 1e-9
CLAMP_REL = 1e-12
RESIDUAL_REL = 1e-10


def as_matrix(M) -> np.ndarray:
    """Return `M` as a square complex128 array, or raise ``ValueError``."""
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def is_hermitian(M, tol: float = DEFAULT_TOL) -> bool:
    A = np.asarray(M)
    return bool(np.max(np.abs(A - A.conj().T), initial=0.0) <= tol)


def _descending(values: np.ndarray) -> np.ndarray:
    # stable sort on the negated values keeps ties in input order
    order = np.argsort(-values, kind="stable")
    return values[order]


def _eigh(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        w, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Hermitian eigendecomposition did not converge: {exc}") from exc
    residual = np.max(np.abs(A - (V * w) @ V.conj().T))
    if residual > RESIDUAL_REL * (1.0 + np.max(np.abs(A))):
        raise NumericalError(f"eigendecomposition residual {residual:.3e} too large")
    return w, V


def hermitian_eigenvalues(M, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, sorted in descending order.

    Parameters
    ----------
    M : array_like
        Square matrix, Hermitian up to `tol` (max-entry deviation).
    tol : float
        Hermiticity tolerance.

    Returns
    -------
    numpy.ndarray
        ``d`` real eigenvalues, largest first.

    Raises
    ------
    ValueError
        Non-square, non-finite, or non-Hermitian input.
    NumericalError
        LAPACK failed to converge or the reconstruction residual
        exceeds ``1e-10 * (1 + max|M|)``.
    """
    A = as_matrix(M)
    if not is_hermitian(A, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    A = (A + A.conj().T) / 2
    w, _ = _eigh(A)
    return _descending(w)


def singular_values(M) -> np.ndarray:
    """Singular values of `M`, descending.

    Hermitian input is handled through its eigenvalues (``|lambda|``), which
    is both cheaper and more accurate than a general SVD.
    """
    A = as_matrix(M)
    if is_hermitian(A, 0.0):
        w, _ = _eigh(A)
        return _descending(np.abs(w))
    try:
        s = np.linalg.svd(A, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    return _descending(s)


def batch_singular_values(stack: np.ndarray) -> np.ndarray:
    """Singular values for a stack of matrices of shape ``(..., d, d)``.

    Used by the sweep code paths; no per-matrix validation.
    """
    try:
        return np.linalg.svd(stack, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"batched SVD did not converge: {exc}") from exc


def _check_p(p: float) -> float:
    p = float(p)
    if np.isnan(p) or p < 1:
        raise ValueError(f"Schatten norm needs p >= 1, got {p}")
    return p


def norm_from_singular_values(s: np.ndarray, p: float) -> np.ndarray:
    """Normalized ``p``-norm along the last axis of an array of singular values.

    Values below ``1e-12`` times the row maximum are treated as exact zeros.
    """
    p = _check_p(p)
    s = np.asarray(s, dtype=float)
    if np.isinf(p):
        return s.max(axis=-1)
    top = s.max(axis=-1, keepdims=True)
    s = np.where(s < CLAMP_REL * top, 0.0, s)
    return np.mean(s**p, axis=-1) ** (1.0 / p)


def schatten_norm(M, p: float) -> float:
    """Normalized Schatten ``p``-norm, ``((1/d) sum_i s_i^p)^(1/p)``.

    ``p`` may be ``numpy.inf`` (largest singular value). Note the ``1/d``
    factor: the identity has norm 1 for every ``p``.
    """
    p = _check_p(p)
    return float(norm_from_singular_values(singular_values(M), p))


def trace_norm(M) -> float:
    """Sum of singular values."""
    return float(np.sum(singular_values(M)))


def random_ginibre(rng: np.random.Generator, d: int, size: tuple = ()) -> np.ndarray:
    """Matrices with i.i.d. standard complex Gaussian entries."""
    shape = tuple(size) + (d, d)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_density(rng: np.random.Generator, d: int, size: tuple = (), rank: int | None = None) -> np.ndarray:
    """Random density matrices ``G G^dag / Tr(G G^dag)`` with ``G`` Ginibre.

    With ``rank=r`` the factor ``G`` is ``d x r``; ``rank=1`` gives pure states.
    """
    r = d if rank is None else rank
    shape = tuple(size) + (d, r)
    G = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    rho = G @ np.swapaxes(G.conj(), -1, -2)
    tr = np.trace(rho, axis1=-2, axis2=-1).real
    return rho / tr[..., None, None]


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    Q, R = np.linalg.qr(random_ginibre(rng, d))
    phases = np.diag(R) / np.abs(np.diag(R))
    return Q * phases


def inverse_sqrt_psd(A: np.ndarray) -> np.ndarray:
    w, V = _eigh((A + A.conj().T) / 2)
    if np.min(w) <= 0:
        raise NumericalError("matrix is not positive definite")
    return (V / np.sqrt(w)) @ V.conj().T


def random_povm(rng: np.random.Generator, d: int, outcomes: int) -> list[np.ndarray]:
    """Random POVM: ``S^{-1/2} G_z S^{-1/2}`` with ``G_z`` random PSD, ``S = sum G_z``."""
    G = [g * d for g in random_density(rng, d, size=(outcomes,))]
    W = inverse_sqrt_psd(sum(G))
    return [W @ g @ W for g in G]


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    matrix: np.ndarray
    tolerance: float = DEFAULT_TOL

    def __post_init__(self):
        A = as_matrix(self.matrix)
        tol = self.tolerance
        if not is_hermitian(A, tol):
            raise PreconditionError("density matrix is not Hermitian")
        if abs(np.trace(A) - 1) > tol:
            raise PreconditionError(f"density matrix has trace {np.trace(A).real:.12g}, expected 1")
        w, _ = _eigh((A + A.conj().T) / 2)
        if w.min() < -tol:
            raise PreconditionError(f"density matrix has eigenvalue {w.min():.3e} < 0")
        A = A.copy()
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Povm:
    """POVM: PSD outcome operators summing to the identity."""

    outcomes: tuple
    tolerance: float = DEFAULT_TOL
    dim: int = field(init=False)

    def __post_init__(self):
        mats = tuple(as_matrix(E) for E in self.outcomes)
        if not mats:
            raise PreconditionError("POVM has no outcomes")
        d = mats[0].shape[0]
        tol = self.tolerance
        for E in mats:
            if E.shape != (d, d):
                raise PreconditionError("POVM outcomes differ in dimension")
            if not is_hermitian(E, tol):
                raise PreconditionError("POVM outcome is not Hermitian")
            if np.linalg.eigvalsh((E + E.conj().T) / 2).min() < -tol:
                raise PreconditionError("POVM outcome is not positive semidefinite")
        if np.max(np.abs(sum(mats) - np.eye(d))) > tol:
            raise PreconditionError("POVM outcomes do not sum to the identity")
        for E in mats:
            E.setflags(write=False)
        object.__setattr__(self, "outcomes", mats)
        object.__setattr__(self, "dim", d)

    def __len__(self) -> int:
        return len(self.outcomes)

    def probabilities(self, rho) -> np.ndarray:
        R = np.asarray(rho)
        return np.array([np.real(np.trace(E @ R)) for E in self.outcomes])


def _density_array(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else DensityMatrix(rho).matrix


def helstrom_bias(rho0, rho1) -> tuple[float, Povm]:
    """Optimal bias for telling `rho0` from `rho1`, and the measurement achieving it.

    The bias is ``trace_norm(rho0 - rho1) / 2``. The returned POVM is
    ``(E0, E1)`` with ``E0`` the projector onto the non-negative eigenspace
    of ``rho0 - rho1``; guessing "0" on outcome ``E0`` attains the bias.
    """
    R0, R1 = _density_array(rho0), _density_array(rho1)
    if R0.shape != R1.shape:
        raise ValueError(f"dimension mismatch: {R0.shape} vs {R1.shape}")
    D = R0 - R1
    D = (D + D.conj().T) / 2
    w, V = _eigh(D)
    pos = w >= 0
    E0 = V[:, pos] @ V[:, pos].conj().T
    E1 = np.eye(D.shape[0]) - E0
    bias = 0.5 * float(np.sum(np.abs(w)))
    bias = min(max(bias, 0.0), 1.0)
    return bias, Povm((E0, E1))
