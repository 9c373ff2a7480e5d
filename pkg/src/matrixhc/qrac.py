"""k-out-of-n quantum random access codes and their XOR variant.

An encoding is a :class:`~matrixhc.cube.CubeFunction` whose entries are
``2^m x 2^m`` density matrices. For a ``k``-set ``S`` (a bitmask), the
substring ``x_S`` is the ``k``-bit integer whose bit ``t`` is the ``t``-th
smallest coordinate of ``S`` in ``x``; POVM outcome ``z`` of the measurement
for ``S`` is a guess for ``x_S`` in the same encoding.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import cube
from .cube import CubeFunction, bits_of, fourier_transform, popcount
from .errors import FormatError, GuardError, PreconditionError
from .matcore import (
    DEFAULT_TOL,
    Povm,
    batch_singular_values,
    helstrom_bias,
    random_density,
    random_povm,
)

MAX_ENUM_BITS = 20
MAX_EVALUATIONS = 1 << 24
MAX_SEARCH_BITS = 24
TWO_LN2 = 2.0 * math.log(2.0)


def k_subsets(n: int, k: int) -> list[int]:
    """All ``k``-subsets of ``[n]`` as bitmasks, in lexicographic order."""
    return [sum(1 << i for i in combo) for combo in itertools.combinations(range(n), k)]


def substring_index(x, S: int) -> np.ndarray | int:
    """``x_S`` packed as an integer (bit ``t`` = ``t``-th element of ``S``)."""
    out = np.zeros_like(np.asarray(x, dtype=np.int64))
    for t, i in enumerate(bits_of(S)):
        out = out | (((np.asarray(x) >> i) & 1) << t)
    return out if np.ndim(out) else int(out)


def check_density_table(table: np.ndarray, tol: float) -> None:
    """Raise :class:`PreconditionError` unless every matrix is a density matrix."""
    herm = np.max(np.abs(table - np.swapaxes(table.conj(), -1, -2)), initial=0.0)
    if herm > tol:
        raise PreconditionError(f"encoding entry not Hermitian (deviation {herm:.3e})")
    tr = np.trace(table, axis1=-2, axis2=-1)
    bad = np.max(np.abs(tr - 1.0), initial=0.0)
    if bad > tol:
        raise PreconditionError(f"encoding entry trace deviates from 1 by {bad:.3e}")
    H = (table + np.swapaxes(table.conj(), -1, -2)) / 2
    low = np.linalg.eigvalsh(H).min()
    if low < -tol:
        raise PreconditionError(f"encoding entry has eigenvalue {low:.3e} < 0")


def _check_encoding(n: int, m: int, encoding: CubeFunction, tol: float) -> None:
    if encoding.n != n:
        raise PreconditionError(f"encoding has n={encoding.n}, expected {n}")
    if encoding.dim != 1 << m:
        raise PreconditionError(f"encoding has dimension {encoding.dim}, expected 2^{m}")
    check_density_table(encoding.table, tol)


@dataclass(frozen=True)
class XorQrac:
    """An encoding of ``n`` bits into ``m`` qubits, judged by XOR bias on ``k``-sets."""

    n: int
    k: int
    m: int
    encoding: CubeFunction
    tolerance: float = DEFAULT_TOL

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.m < 0:
            raise ValueError("m must be non-negative")
        _check_encoding(self.n, self.m, self.encoding, self.tolerance)


@dataclass(frozen=True)
class Qrac:
    """An encoding plus one ``2^k``-outcome POVM per ``k``-subset."""

    n: int
    k: int
    m: int
    encoding: CubeFunction
    measurements: dict
    tolerance: float = DEFAULT_TOL
    subsets: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        _check_encoding(self.n, self.m, self.encoding, self.tolerance)
        subsets = tuple(k_subsets(self.n, self.k))
        meas = {}
        for S in subsets:
            if S not in self.measurements:
                raise PreconditionError(f"no measurement for subset mask {S:#x}")
            M = self.measurements[S]
            M = M if isinstance(M, Povm) else Povm(tuple(M), self.tolerance)
            if len(M) != 1 << self.k:
                raise PreconditionError(f"measurement for {S:#x} has {len(M)} outcomes, expected 2^{self.k}")
            if M.dim != 1 << self.m:
                raise PreconditionError(f"measurement for {S:#x} acts on dimension {M.dim}")
            meas[S] = M
        extra = set(self.measurements) - set(subsets)
        if extra:
            raise PreconditionError(f"measurements for sets of the wrong size: {sorted(extra)}")
        object.__setattr__(self, "measurements", meas)
        object.__setattr__(self, "subsets", subsets)

    def xor_code(self) -> XorQrac:
        return XorQrac(self.n, self.k, self.m, self.encoding, self.tolerance)


def _guard(n: int, evaluations: int) -> None:
    if n > MAX_ENUM_BITS:
        raise GuardError(f"n={n} exceeds exact-enumeration limit {MAX_ENUM_BITS}")
    if evaluations > MAX_EVALUATIONS:
        raise GuardError(f"{evaluations} evaluations exceed budget {MAX_EVALUATIONS}")


def outcome_probabilities(q: Qrac, S: int) -> np.ndarray:
    """``P[z, x] = Tr(M_{S,z} f(x))`` for all outcomes and inputs."""
    E = np.stack(q.measurements[S].outcomes)
    return np.einsum("zij,xji->zx", E, q.encoding.table).real


def success_probability(q: Qrac) -> float:
    """``E_{x,S} Tr(M_{S, x_S} f(x))`` over uniform ``x`` and uniform ``k``-sets ``S``."""
    _guard(q.n, (1 << q.n) * len(q.subsets))
    xs = np.arange(1 << q.n)
    total = 0.0
    for S in q.subsets:
        P = outcome_probabilities(q, S)
        total += P[substring_index(xs, S), xs].sum()
    return float(total / ((1 << q.n) * len(q.subsets)))


def coefficient_trace_norms(encoding: CubeFunction) -> np.ndarray:
    """``||fhat(S)||_tr`` for every ``S`` in index order."""
    return batch_singular_values(fourier_transform(encoding).table).sum(axis=-1)


def xor_bias(x: XorQrac) -> float:
    """Average of ``||fhat(S)||_tr`` over the ``k``-subsets ``S``."""
    _guard(x.n, 1 << x.n)
    norms = coefficient_trace_norms(x.encoding)
    return float(np.mean(norms[k_subsets(x.n, x.k)]))


def parity_conditioned_states(encoding: CubeFunction, S: int) -> tuple[np.ndarray, np.ndarray]:
    """Average of ``f(x)`` over ``x`` with ``chi_S(x) = +1`` and with ``-1``."""
    xs = np.arange(1 << encoding.n)
    odd = popcount(xs & S) & 1
    table = encoding.table
    rho0 = table[odd == 0].mean(axis=0)
    rho1 = table[odd == 1].mean(axis=0) if np.any(odd) else rho0
    return rho0, rho1


def helstrom_xor_measurement(x: XorQrac, S: int) -> tuple[float, Povm]:
    """Best bias for predicting ``chi_S(x)`` from ``f(x)``, with its measurement.

    Outcome 0 of the returned POVM means "even parity". For ``S = 0`` the
    parity is always even and the trivial measurement has bias 1.
    """
    if not 0 <= S < 1 << x.n:
        raise ValueError(f"subset mask {S} out of range for n={x.n}")
    d = x.encoding.dim
    if S == 0:
        return 1.0, Povm((np.eye(d), np.zeros((d, d))))
    rho0, rho1 = parity_conditioned_states(x.encoding, S)
    return helstrom_bias(rho0, rho1)


def lemma43_sides(x: XorQrac, delta: float) -> tuple[float, float]:
    """``(sum_S delta^|S| ||fhat(S)||_tr^2, 2^(2 delta m))``."""
    delta = float(delta)
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    _guard(x.n, 1 << x.n)
    norms = coefficient_trace_norms(x.encoding)
    weights = np.power(delta, cube.subset_sizes(x.n)).astype(float)
    return float(np.sum(weights * norms**2)), float(2.0 ** (2.0 * delta * x.m))


def log_binomial(n: int, k: int) -> float:
    """Natural log of the exact binomial coefficient."""
    return math.log(math.comb(n, k))


def log_thm44_bound(k: int, n: int, m: int) -> float:
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if m <= 0:
        return -math.inf
    return 0.5 * k * math.log(2.0 * math.e * math.log(2.0) * m / k) - 0.5 * log_binomial(n, k)


def thm44_bound(k: int, n: int, m: int) -> float:
    """XOR-bias ceiling ``((2e ln2) m / k)^(k/2) * C(n,k)^(-1/2)``.

    Evaluated in log space. Values above 1 are returned unclipped; they
    carry no information.
    """
    return math.exp(log_thm44_bound(k, n, m))


def thm44_bound_direct(k: int, n: int, m: int) -> float:
    """Same value as :func:`thm44_bound` by straightforward multiplication."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return (2.0 * math.e * math.log(2.0) * m / k) ** (k / 2.0) / math.sqrt(math.comb(n, k))


def thm2_style_bound(k: int, n: int, m: int, eta: float, c_eta: float) -> float:
    """``c_eta * (1/2 + sqrt(eta m / n)/2)^k``, valid for ``eta > 2 ln 2``.

    The constant ``c_eta`` is not determined by the theory and must be
    supplied.
    """
    if not eta > TWO_LN2:
        raise ValueError(f"eta must exceed 2 ln 2 = {TWO_LN2:.6f}, got {eta}")
    if c_eta <= 0:
        raise ValueError("c_eta must be positive")
    if k < 1 or n < 1 or m < 0:
        raise ValueError("need k >= 1, n >= 1, m >= 0")
    return c_eta * (0.5 + 0.5 * math.sqrt(eta * m / n)) ** k


def set_distribution_weights(n: int, k: int) -> dict[int, Fraction]:
    """Probability of each individual set of size ``j`` under the binomial-then-uniform distribution.

    ``j ~ Binomial(k, 1/2)``, then ``S`` uniform among ``j``-subsets of
    ``[n]``; the weight of a single ``j``-set is ``C(k,j) / 2^k / C(n,j)``.
    """
    return {j: Fraction(math.comb(k, j), (1 << k) * math.comb(n, j)) for j in range(k + 1)}


@dataclass
class ReductionReport:
    """Exact quantities from the QRAC to XOR-QRAC reduction."""

    error_distributions: dict  # T mask -> p_T over w in {0,1}^k
    betas: dict  # S mask (|S| <= k) -> beta_S
    trace_norms: dict  # S mask -> ||fhat(S)||_tr
    lhs_identity: float  # E_{S ~ set distribution}[beta_S]
    rhs_identity: float  # E_T[p_T(0^k)]
    bias_chain: tuple  # (E[beta_S], E[||fhat(S)||_tr]) under the set distribution
    success_probability: float
    max_domination_excess: float  # max_S beta_S - ||fhat(S)||_tr

    def to_json(self) -> dict:
        return {
            "betas": {str(S): v for S, v in sorted(self.betas.items())},
            "trace_norms": {str(S): v for S, v in sorted(self.trace_norms.items())},
            "error_distributions": {str(T): list(map(float, p)) for T, p in sorted(self.error_distributions.items())},
            "lhs_identity": self.lhs_identity,
            "rhs_identity": self.rhs_identity,
            "identity_gap": abs(self.lhs_identity - self.rhs_identity),
            "bias_chain": list(self.bias_chain),
            "success_probability": self.success_probability,
            "max_domination_excess": self.max_domination_excess,
        }


def reduce_qrac_to_xor(q: Qrac) -> ReductionReport:
    """Turn a QRAC into parity predictors and check the averaging identity.

    For every ``k``-set ``T`` the error vector ``w = z xor x_T`` has
    distribution ``p_T``. Predicting ``chi_S`` (``|S| <= k``) by measuring a
    uniform ``T`` containing ``S`` has bias
    ``beta_S = 2^k E_{T >= S}[phat_T(S)]``. Averaging ``beta_S`` over the
    binomial-then-uniform set distribution gives exactly ``E_T[p_T(0)]``,
    and every ``beta_S`` is at most ``||fhat(S)||_tr``.
    """
    n, k = q.n, q.k
    subsets_le_k = [S for j in range(k + 1) for S in k_subsets(n, j)] if k else [0]
    _guard(n, (1 << n) * len(q.subsets) + len(subsets_le_k) * len(q.subsets))
    xs = np.arange(1 << n)
    zs = np.arange(1 << k)

    p_T, phat_T = {}, {}
    for T in q.subsets:
        P = outcome_probabilities(q, T)
        w = zs[:, None] ^ substring_index(xs, T)[None, :]
        dist = np.zeros(1 << k)
        np.add.at(dist, w.ravel(), P.ravel())
        dist /= 1 << n
        p_T[T] = dist
        phat_T[T] = fourier_transform(CubeFunction.scalar(dist)).table[:, 0, 0].real

    norms = coefficient_trace_norms(q.encoding)
    weights = set_distribution_weights(n, k)
    betas, trace_norms = {}, {}
    lhs_float = 0.0
    chain_norm = 0.0
    for S in subsets_le_k:
        containing = [T for T in q.subsets if T & S == S]
        elems = bits_of(S)
        acc = 0.0
        for T in containing:
            pos = bits_of(T)
            local = sum(1 << pos.index(i) for i in elems)
            acc += phat_T[T][local]
        betas[S] = float((1 << k) * acc / len(containing))
        trace_norms[S] = float(norms[S])
        w_S = float(weights[len(elems)])
        lhs_float += w_S * betas[S]
        chain_norm += w_S * trace_norms[S]
    rhs = float(np.mean([p[0] for p in p_T.values()]))
    excess = max(betas[S] - trace_norms[S] for S in subsets_le_k)
    return ReductionReport(
        error_distributions=p_T,
        betas=betas,
        trace_norms=trace_norms,
        lhs_identity=lhs_float,
        rhs_identity=rhs,
        bias_chain=(lhs_float, chain_norm),
        success_probability=success_probability(q),
        max_domination_excess=float(excess),
    )


# --- classical encodings --------------------------------------------------

def classical_encoding(labels, m: int) -> CubeFunction:
    """Deterministic classical encoding ``x -> |E(x)><E(x)|`` on ``m`` qubits."""
    labels = np.asarray(labels, dtype=np.int64)
    n = int(labels.shape[0]).bit_length() - 1
    table = np.zeros((labels.shape[0], 1 << m, 1 << m))
    table[np.arange(labels.shape[0]), labels, labels] = 1.0
    return CubeFunction(n, table)


def plurality_decoder(labels, n: int, k: int, m: int) -> dict[int, np.ndarray]:
    """For each ``k``-set, the most frequent ``x_S`` per message (ties to the smallest)."""
    labels = np.asarray(labels, dtype=np.int64)
    xs = np.arange(1 << n)
    decoders = {}
    for S in k_subsets(n, k):
        counts = np.zeros((1 << m, 1 << k), dtype=np.int64)
        np.add.at(counts, (labels, substring_index(xs, S)), 1)
        decoders[S] = np.argmax(counts, axis=1)  # argmax returns the first maximum
    return decoders


def classical_qrac(labels, n: int, k: int, m: int) -> Qrac:
    """Deterministic encoding with plurality decoding, as a :class:`Qrac`."""
    dim = 1 << m
    meas = {}
    for S, guess in plurality_decoder(labels, n, k, m).items():
        outcomes = []
        for z in range(1 << k):
            E = np.zeros((dim, dim))
            hit = np.flatnonzero(guess == z)
            E[hit, hit] = 1.0
            outcomes.append(E)
        meas[S] = Povm(tuple(outcomes))
    return Qrac(n, k, m, classical_encoding(labels, m), meas)


def best_classical_qrac(n: int, k: int, m: int, chunk: int = 1 << 15) -> tuple[float, np.ndarray]:
    """Exhaustive search over deterministic encodings ``{0,1}^n -> {0,1}^m``.

    Each encoding is scored with its optimal (plurality) decoder. Encoding
    number ``e`` maps ``x`` to message ``(e >> (m x)) & (2^m - 1)``; the
    first encoding attaining the maximum is returned.

    Returns
    -------
    p_star : float
        Best success probability.
    labels : numpy.ndarray
        Message for each ``x`` under an optimal encoding.
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if m < 0:
        raise ValueError("m must be non-negative")
    bits = m * (1 << n)
    if bits > MAX_SEARCH_BITS:
        raise GuardError(f"search space 2^{bits} exceeds 2^{MAX_SEARCH_BITS}")
    xs = np.arange(1 << n)
    keys_per_S = [substring_index(xs, S) for S in k_subsets(n, k)]
    cells = 1 << (m + k)
    total = 1 << bits
    best_score, best_index = -1, 0
    mask = (1 << m) - 1
    for start in range(0, total, chunk):
        e = np.arange(start, min(start + chunk, total), dtype=np.int64)
        labels = (e[:, None] >> (m * xs[None, :])) & mask
        offset = (np.arange(e.size) * cells)[:, None]
        score = np.zeros(e.size, dtype=np.int64)
        for key in keys_per_S:
            flat = offset + labels * (1 << k) + key[None, :]
            counts = np.bincount(flat.ravel(), minlength=e.size * cells)
            counts = counts.reshape(e.size, 1 << m, 1 << k)
            score += counts.max(axis=2).sum(axis=1)
        i = int(np.argmax(score))
        if score[i] > best_score:
            best_score, best_index = int(score[i]), start + i
    labels = (best_index >> (m * xs)) & mask
    p_star = best_score / ((1 << n) * len(keys_per_S))
    return float(p_star), labels


# --- random ensembles -----------------------------------------------------

def random_encoding(rng: np.random.Generator, n: int, m: int, rank: int | None = None) -> CubeFunction:
    """Independent random density matrices for every ``x``."""
    _guard(n, (1 << n) << (2 * m))
    return CubeFunction(n, random_density(rng, 1 << m, size=(1 << n,), rank=rank))


def random_qrac(rng: np.random.Generator, n: int, k: int, m: int, rank: int | None = None) -> Qrac:
    enc = random_encoding(rng, n, m, rank)
    meas = {S: Povm(tuple(random_povm(rng, 1 << m, 1 << k))) for S in k_subsets(n, k)}
    return Qrac(n, k, m, enc, meas)


# --- serialization --------------------------------------------------------

def save_qrac(q, directory) -> None:
    """Write ``manifest.txt``, ``encoding.bin`` and (for :class:`Qrac`) ``measurements.json``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = f"n={q.n}\nk={q.k}\nm={q.m}\ntolerance={q.tolerance!r}\n"
    (directory / "manifest.txt").write_text(manifest)
    cube.save(q.encoding, directory / "encoding.bin")
    if isinstance(q, Qrac):
        meas = {str(S): [cube.matrix_to_json(E) for E in M.outcomes] for S, M in q.measurements.items()}
        (directory / "measurements.json").write_text(json.dumps(meas, sort_keys=True))


def _read_manifest(path: Path) -> dict:
    fields = {}
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise FormatError(f"{path}: malformed manifest line {line!r}")
        fields[key.strip()] = value.strip()
    try:
        return {
            "n": int(fields["n"]),
            "k": int(fields["k"]),
            "m": int(fields["m"]),
            "tolerance": float(fields.get("tolerance", DEFAULT_TOL)),
        }
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: manifest missing or bad field: {exc}") from exc


def load_qrac(directory):
    """Inverse of :func:`save_qrac`. Returns :class:`XorQrac` when no measurements file exists."""
    directory = Path(directory)
    man = _read_manifest(directory / "manifest.txt")
    enc = cube.load(directory / "encoding.bin")
    meas_path = directory / "measurements.json"
    if not meas_path.exists():
        return XorQrac(man["n"], man["k"], man["m"], enc, man["tolerance"])
    try:
        raw = json.loads(meas_path.read_text())
        meas = {int(S): tuple(cube.matrix_from_json(E) for E in mats) for S, mats in raw.items()}
    except (json.JSONDecodeError, ValueError, TypeError) as exc:
        raise FormatError(f"{meas_path}: {exc}") from exc
    return Qrac(man["n"], man["k"], man["m"], enc, meas, man["tolerance"])
