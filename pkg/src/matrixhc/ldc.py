"""Two-query locally decodable codes: decoder normal forms and the length certificate.

Codewords and messages use the +1/-1 convention. Message ``x`` is the
integer whose bit ``i`` encodes ``x_i = (-1)^bit``; codeword position ``j``
of a linear code with generator mask ``g_j`` is ``(-1)^popcount(g_j & x)``.

A decoder for index ``i`` is a finite distribution over query rules. A rule
queries a tuple ``Q`` of positions and outputs a random +1/-1 whose mean,
given the answers ``z``, is ``table[idx(z)]``; bit ``t`` of ``idx(z)`` is set
iff ``z_t = -1``. Deterministic rules have tables of +1/-1.

Pipeline: :func:`smooth_from_ldc` removes heavily queried positions,
:func:`extract_matching` finds disjoint good query tuples,
:func:`parity_extraction` replaces each tuple's output by a signed parity,
and :func:`ldc_certificate` runs the matrix-norm argument on the result.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .cube import CubeFunction, bits_of, fourier_transform, popcount
from .errors import FormatError, GuardError, PreconditionError, ViolationError
from .matcore import norm_from_singular_values

MAX_EXPAND_BITS = 20
MAX_EXACT_BITS = 16
MAX_CERT_LENGTH = 4096
WEIGHT_TOL = 1e-12
FILL_VALUE = +1


# --- codes ----------------------------------------------------------------

@dataclass(frozen=True)
class CodeSpec:
    """A code ``{+1,-1}^n -> {+1,-1}^N``, either as an explicit table or linear.

    ``data`` is the ``(2^n, N)`` table of +1/-1 for ``kind="table"`` and the
    length-``N`` vector of generator bitmasks for ``kind="linear"``.
    """

    n: int
    N: int
    kind: str
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.kind == "table":
            T = np.asarray(self.data)
            if T.shape != (1 << self.n, self.N):
                raise ValueError(f"code table has shape {T.shape}, expected {(1 << self.n, self.N)}")
            if not np.all((T == 1) | (T == -1)):
                raise ValueError("code table entries must be +1 or -1")
            data = T.astype(np.int8)
        elif self.kind == "linear":
            G = np.asarray(self.data, dtype=np.int64)
            if G.shape != (self.N,):
                raise ValueError(f"generator has {G.shape} rows, expected {self.N}")
            if np.any(G < 0) or np.any(G >= 1 << self.n):
                raise ValueError("generator rows must be n-bit masks")
            data = G
        else:
            raise ValueError(f"unknown code kind {self.kind!r}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def linear(cls, n: int, generators) -> "CodeSpec":
        G = np.asarray(generators, dtype=np.int64)
        return cls(n, int(G.shape[0]), "linear", G)

    @classmethod
    def explicit(cls, table) -> "CodeSpec":
        T = np.asarray(table)
        n = int(T.shape[0]).bit_length() - 1
        return cls(n, int(T.shape[1]), "table", T)

    @cached_property
    def table(self) -> np.ndarray:
        """All codewords, shape ``(2^n, N)``, dtype int8."""
        if self.kind == "table":
            return self.data
        if self.n > MAX_EXPAND_BITS:
            raise GuardError(f"n={self.n} exceeds expansion limit {MAX_EXPAND_BITS}")
        xs = np.arange(1 << self.n, dtype=np.int64)
        parity = popcount(xs[:, None] & self.data[None, :]) & 1
        T = (1 - 2 * parity).astype(np.int8)
        T.setflags(write=False)
        return T


def message_signs(n: int) -> np.ndarray:
    """``(2^n, n)`` array of ``x_i`` in +1/-1."""
    xs = np.arange(1 << n)
    return 1 - 2 * ((xs[:, None] >> np.arange(n)[None, :]) & 1)


def hadamard_code(n: int) -> CodeSpec:
    """Hadamard code: position ``a`` holds ``(-1)^(a.x)`` for every ``a`` in ``{0,1}^n``."""
    return CodeSpec.linear(n, np.arange(1 << n))


# --- decoders -------------------------------------------------------------

PARITY2 = np.array([1.0, -1.0, -1.0, 1.0])


def _sort_rule(query, table) -> tuple[tuple, np.ndarray]:
    query = tuple(int(j) for j in query)
    table = np.asarray(table, dtype=float).ravel()
    if len(set(query)) != len(query):
        raise ValueError(f"query {query} repeats a position")
    if table.shape != (1 << len(query),):
        raise ValueError(f"table for query {query} has {table.size} entries, expected {1 << len(query)}")
    if np.any(np.abs(table) > 1 + WEIGHT_TOL):
        raise ValueError("table means must lie in [-1, 1]")
    order = sorted(range(len(query)), key=lambda t: query[t])
    new_table = np.empty_like(table)
    for new_idx in range(table.size):
        old_idx = 0
        for new_t, old_t in enumerate(order):
            if new_idx >> new_t & 1:
                old_idx |= 1 << old_t
        new_table[new_idx] = table[old_idx]
    return tuple(query[t] for t in order), new_table


@dataclass(frozen=True, eq=False)
class QueryRule:
    weight: float
    query: tuple
    table: np.ndarray = field(repr=False)

    def __eq__(self, other):
        if not isinstance(other, QueryRule):
            return NotImplemented
        return self.weight == other.weight and self.query == other.query and np.array_equal(self.table, other.table)

    __hash__ = None

    def to_json(self) -> dict:
        return {"weight": self.weight, "query": list(self.query), "table": [float(v) for v in self.table]}


@dataclass(frozen=True)
class DecoderSpec:
    """A non-adaptive randomized decoder with at most ``q`` queries.

    ``rules[i]`` is the distribution used for message index ``i``. On
    construction queries are sorted ascending, rules with the same query
    are merged (their tables averaged by weight) and rules are ordered by
    query tuple.
    """

    q: int
    N: int
    rules: tuple

    def __post_init__(self):
        canon = []
        for i, rules in enumerate(self.rules):
            merged: dict[tuple, list] = {}
            total = 0.0
            for r in rules:
                w = float(r.weight if isinstance(r, QueryRule) else r[0])
                query = r.query if isinstance(r, QueryRule) else r[1]
                table = r.table if isinstance(r, QueryRule) else r[2]
                if w < 0:
                    raise ValueError(f"index {i}: negative rule weight {w}")
                Q, t = _sort_rule(query, table)
                if len(Q) > self.q:
                    raise ValueError(f"index {i}: query {Q} exceeds q={self.q}")
                if any(j < 0 or j >= self.N for j in Q):
                    raise ValueError(f"index {i}: query {Q} outside [0, {self.N})")
                total += w
                if w == 0:
                    continue
                if Q in merged:
                    merged[Q][0] += w
                    merged[Q][1] = merged[Q][1] + w * t
                else:
                    merged[Q] = [w, w * t]
            if abs(total - 1.0) > WEIGHT_TOL:
                raise ValueError(f"index {i}: rule weights sum to {total!r}, expected 1")
            canon.append(tuple(QueryRule(w, Q, acc / w) for Q, (w, acc) in sorted(merged.items())))
        object.__setattr__(self, "rules", tuple(canon))

    @property
    def n(self) -> int:
        return len(self.rules)

    def to_json(self) -> dict:
        return {"q": self.q, "N": self.N, "indices": [[r.to_json() for r in rules] for rules in self.rules]}


def hadamard_decoder(n: int) -> DecoderSpec:
    """Query a uniform ``a`` and ``a xor e_i``, output the product of the answers."""
    N = 1 << n
    rules = []
    for i in range(n):
        pairs = [(a, a | 1 << i) for a in range(N) if not a >> i & 1]
        rules.append([(2.0 / N, Q, PARITY2) for Q in pairs])
    return DecoderSpec(2, N, tuple(rules))


def query_marginals(dec: DecoderSpec, i: int) -> np.ndarray:
    """``p_i(j)``: probability that the decoder for index ``i`` queries ``j``."""
    p = np.zeros(dec.N)
    for r in dec.rules[i]:
        p[list(r.query)] += r.weight
    return p


def smoothness(dec: DecoderSpec) -> float:
    """Smallest ``c`` with every marginal at most ``c / N``."""
    return float(dec.N * max(query_marginals(dec, i).max() for i in range(dec.n)))


def answer_index(words: np.ndarray, query: tuple) -> np.ndarray:
    """Table index of the answers to `query` for every row of `words`."""
    idx = np.zeros(words.shape[0], dtype=np.int64)
    for t, j in enumerate(query):
        idx |= (words[:, j] < 0).astype(np.int64) << t
    return idx


def output_means(words: np.ndarray, rules) -> np.ndarray:
    """Mean decoder output for every oracle word (row of `words`)."""
    out = np.zeros(words.shape[0])
    for r in rules:
        out += r.weight * r.table[answer_index(words, r.query)]
    return out


def _check_compatible(code: CodeSpec, dec: DecoderSpec) -> None:
    if dec.N != code.N:
        raise ValueError(f"decoder expects N={dec.N}, code has N={code.N}")
    if dec.n != code.n:
        raise ValueError(f"decoder covers {dec.n} indices, code has n={code.n}")


def codeword_success(code: CodeSpec, dec: DecoderSpec, i: int) -> np.ndarray:
    """``Pr[A^{C(x)}(i) = x_i]`` for every message ``x``."""
    xi = message_signs(code.n)[:, i]
    return (1.0 + xi * output_means(code.table, dec.rules[i])) / 2.0


# --- smoothing ------------------------------------------------------------

def _restrict_rule(rule: QueryRule, heavy: set) -> tuple[tuple, np.ndarray]:
    keep = [t for t, j in enumerate(rule.query) if j not in heavy]
    Q = tuple(rule.query[t] for t in keep)
    table = np.empty(1 << len(keep))
    for idx in range(table.size):
        # heavy positions read the fill value +1, i.e. bit 0
        full = sum(1 << keep[s] for s in range(len(keep)) if idx >> s & 1)
        table[idx] = rule.table[full]
    return Q, table


def smooth_from_ldc(code: CodeSpec, dec: DecoderSpec, delta: float, epsilon: float):
    """Convert an LDC decoder into a smooth decoder.

    Positions with ``p_i(j) > q/(delta N)`` are no longer queried; the new
    decoder reads them as the fixed value +1. The result never queries any
    position with probability above ``q/(delta N)``.

    Returns
    -------
    dec2 : DecoderSpec
        The smoothed decoder.
    c : float
        Achieved smoothness ``N * max_{i,j} p'_i(j)``; at most ``q/delta``.
    report : dict
        Per-index heavy sets, marginals and exact codeword success rates of
        both decoders, plus the check that the new decoder on ``C(x)``
        behaves exactly like the old one on ``C(x)`` with the heavy
        positions overwritten.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    _check_compatible(code, dec)
    if code.n > MAX_EXACT_BITS:
        raise GuardError(f"n={code.n} exceeds exact-enumeration limit {MAX_EXACT_BITS}")
    N, q = dec.N, dec.q
    threshold = q / (delta * N)
    words = code.table
    new_rules, per_index = [], []
    for i in range(dec.n):
        p = query_marginals(dec, i)
        heavy = {int(j) for j in np.flatnonzero(p > threshold)}
        rules = [(r.weight, *_restrict_rule(r, heavy)) for r in dec.rules[i]]
        new_rules.append(rules)
        y = np.array(words, copy=True)
        y[:, sorted(heavy)] = FILL_VALUE
        per_index.append({"index": i, "heavy": sorted(heavy), "p": p, "y": y})
    dec2 = DecoderSpec(q, N, tuple(new_rules))

    xi_all = message_signs(code.n)
    indices = []
    for i, info in enumerate(per_index):
        p2 = query_marginals(dec2, i)
        xi = xi_all[:, i]
        original = (1 + xi * output_means(words, dec.rules[i])) / 2
        smoothed = (1 + xi * output_means(words, dec2.rules[i])) / 2
        on_y = (1 + xi * output_means(info["y"], dec.rules[i])) / 2
        indices.append({
            "index": i,
            "heavy_positions": info["heavy"],
            "heavy_count": len(info["heavy"]),
            "heavy_count_ok": bool(len(info["heavy"]) <= delta * N),
            "max_marginal_before": float(info["p"].max()),
            "max_marginal_after": float(p2.max()),
            "min_codeword_success_before": float(original.min()),
            "min_codeword_success_after": float(smoothed.min()),
            "overwritten_oracle_gap": float(np.max(np.abs(smoothed - on_y))),
            "decodes_after": bool(smoothed.min() >= 0.5 + epsilon - 1e-12),
        })
    c = smoothness(dec2)
    report = {
        "q": q,
        "N": N,
        "delta": delta,
        "epsilon": epsilon,
        "threshold": threshold,
        "fill_value": FILL_VALUE,
        "c": c,
        "c_bound": q / delta,
        "smooth_ok": bool(c <= q / delta * (1 + 1e-12)),
        "indices": indices,
    }
    return dec2, c, report


# --- good tuples and matchings --------------------------------------------

def answer_correlations(code: CodeSpec, i: int, query: tuple) -> np.ndarray:
    """``g(z) = E_x[x_i 1{C(x)_Q = z}]`` over answer patterns ``z``."""
    xi = message_signs(code.n)[:, i]
    g = np.zeros(1 << len(query))
    np.add.at(g, answer_index(code.table, query), xi)
    return g / (1 << code.n)


def greedy_matching(tuples) -> list[tuple]:
    """Maximal set of pairwise disjoint tuples, scanning in the given order."""
    used: set = set()
    chosen = []
    for Q in tuples:
        if used.isdisjoint(Q):
            chosen.append(Q)
            used.update(Q)
    return chosen


class GoodTuple(NamedTuple):
    query: tuple
    weight: float
    table: np.ndarray
    correlation: float  # E_x[f_Q(C(x)_Q) x_i] for the decoder's own table
    fixed_table: np.ndarray  # best +1/-1 table for this query
    fixed_correlation: float


@dataclass
class MatchingResult:
    index: int
    epsilon: float
    c: float
    good: list
    matching: list  # list of GoodTuple, pairwise disjoint
    size_bound: float  # epsilon N / (c q)
    good_mass: float  # total weight of good tuples
    precondition_ok: bool  # decoder succeeds with prob >= 1/2 + epsilon on every codeword

    @property
    def bound_ok(self) -> bool:
        return len(self.matching) >= self.size_bound - 1e-12

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "epsilon": self.epsilon,
            "c": self.c,
            "good_count": len(self.good),
            "good_mass": self.good_mass,
            "matching": [
                {"query": list(g.query), "correlation": g.correlation, "fixed_correlation": g.fixed_correlation}
                for g in self.matching
            ],
            "matching_size": len(self.matching),
            "size_bound": self.size_bound,
            "bound_ok": self.bound_ok,
            "precondition_ok": self.precondition_ok,
        }


def extract_matching(code: CodeSpec, dec: DecoderSpec, i: int, epsilon: float, c: float | None = None) -> MatchingResult:
    """Good query tuples for index `i` and a greedy maximal matching among them.

    A tuple is good when ``E_x[f_Q(C(x)_Q) x_i] >= epsilon`` (exact average
    over all ``x``). The matching scans good tuples in canonical order. If
    the decoder is ``c``-smooth and decodes every codeword with probability
    at least ``1/2 + epsilon``, the matching has at least
    ``epsilon N / (c q)`` tuples; a shortfall in that case raises
    :class:`ViolationError`.
    """
    _check_compatible(code, dec)
    if not 0 <= i < dec.n:
        raise ValueError(f"index {i} out of range")
    if code.n > MAX_EXACT_BITS:
        raise GuardError(f"n={code.n} exceeds exact-enumeration limit {MAX_EXACT_BITS}")
    achieved = smoothness(dec)
    if c is None:
        c = achieved
    elif achieved > c * (1 + 1e-12):
        raise PreconditionError(f"decoder is only {achieved:.6g}-smooth, not {c}-smooth")
    good = []
    for r in dec.rules[i]:
        g = answer_correlations(code, i, r.query)
        corr = float(np.dot(g, r.table))
        if corr >= epsilon - 1e-12:
            fixed = np.where(g >= 0, 1.0, -1.0)
            good.append(GoodTuple(r.query, r.weight, r.table, corr, fixed, float(np.abs(g).sum())))
    chosen = set(greedy_matching([gt.query for gt in good]))
    matching = [gt for gt in good if gt.query in chosen]
    precondition_ok = bool(codeword_success(code, dec, i).min() >= 0.5 + epsilon - 1e-12)
    result = MatchingResult(
        index=i,
        epsilon=epsilon,
        c=float(c),
        good=good,
        matching=matching,
        size_bound=epsilon * dec.N / (c * dec.q) if c > 0 else math.inf,
        good_mass=float(sum(gt.weight for gt in good)),
        precondition_ok=precondition_ok,
    )
    if precondition_ok and not result.bound_ok:
        raise ViolationError(f"index {i}: matching size {len(matching)} below {result.size_bound:.6g}")
    return result


# --- parity extraction ----------------------------------------------------

class ParityResult(NamedTuple):
    subset: tuple  # sub-tuple S of Q
    sign: int  # a in {+1, -1}
    correlation: float  # E_x[a x_i prod_{j in S} C(x)_j]


def parity_correlations(code: CodeSpec, i: int, query: tuple) -> np.ndarray:
    """``E_x[x_i chi_S(C(x)_Q)]`` for every ``S`` (bitmask over positions of `query`)."""
    g = answer_correlations(code, i, query)
    return fourier_transform(CubeFunction.scalar(g)).table[:, 0, 0].real * g.size


def parity_extraction(code: CodeSpec, i: int, Q, f_Q, epsilon: float) -> ParityResult:
    """Replace the output function on `Q` by the best signed parity of a sub-tuple.

    Requires ``E_x[f_Q(C(x)_Q) x_i] >= epsilon``. Among all ``S`` within
    ``Q``, returns the one with the largest ``|E_x[x_i chi_S(C(x)_Q)]|``
    (ties: larger ``S``, then smaller bitmask); the value is at least
    ``epsilon / 2^|Q|``.
    """
    Q, table = _sort_rule(Q, f_Q)
    if code.n > MAX_EXACT_BITS:
        raise GuardError(f"n={code.n} exceeds exact-enumeration limit {MAX_EXACT_BITS}")
    g = answer_correlations(code, i, Q)
    base = float(np.dot(g, table))
    if base < epsilon - 1e-12:
        raise PreconditionError(f"E[f_Q x_i] = {base:.6g} is below epsilon = {epsilon}")
    corr = parity_correlations(code, i, Q)
    best = max(range(corr.size), key=lambda S: (round(abs(corr[S]), 12), popcount(S), -S))
    value = float(corr[best])
    sign = 1 if value >= 0 else -1
    if abs(value) < epsilon / (1 << len(Q)) - 1e-12:
        raise ViolationError(f"best parity correlation {abs(value):.6g} below epsilon / 2^|Q|")
    return ParityResult(tuple(Q[t] for t in bits_of(best)), sign, abs(value))


# --- matching families ----------------------------------------------------

class MatchedTuple(NamedTuple):
    query: tuple
    sign: int
    correlation: float


@dataclass(frozen=True)
class MatchingFamily:
    """Per-index disjoint tuples with signs whose signed parity predicts ``x_i``."""

    n: int
    N: int
    entries: tuple  # entries[i] = tuple of MatchedTuple
    threshold: float

    def __post_init__(self):
        entries = tuple(tuple(MatchedTuple(tuple(sorted(t[0])), int(t[1]), float(t[2])) for t in row) for row in self.entries)
        if len(entries) != self.n:
            raise ValueError(f"family lists {len(entries)} indices, expected {self.n}")
        for i, row in enumerate(entries):
            used: set = set()
            for t in row:
                if not used.isdisjoint(t.query):
                    raise ValueError(f"index {i}: tuples are not pairwise disjoint")
                if any(j < 0 or j >= self.N for j in t.query):
                    raise ValueError(f"index {i}: tuple {t.query} outside [0, {self.N})")
                if t.sign not in (1, -1):
                    raise ValueError("signs must be +1 or -1")
                if t.correlation < self.threshold - 1e-12:
                    raise ValueError(f"index {i}: tuple {t.query} correlation {t.correlation} below threshold")
                used.update(t.query)
        object.__setattr__(self, "entries", entries)

    def verify(self, code: CodeSpec) -> float:
        """Largest gap between recorded and recomputed signed correlations."""
        X = message_signs(code.n)
        C = code.table.astype(float)
        worst = 0.0
        for i, row in enumerate(self.entries):
            for t in row:
                parity = np.prod(C[:, list(t.query)], axis=1) if t.query else np.ones(C.shape[0])
                value = float(np.mean(t.sign * X[:, i] * parity))
                worst = max(worst, abs(value - t.correlation))
        return worst

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "N": self.N,
            "threshold": self.threshold,
            "indices": [[{"query": list(t.query), "sign": t.sign, "correlation": t.correlation} for t in row] for row in self.entries],
        }


def build_matching_family(code: CodeSpec, dec: DecoderSpec, epsilon: float, c: float | None = None):
    """Run matching and parity extraction for every index.

    Each matched tuple's decoder output is first fixed to its best +1/-1
    table, then reduced to a signed parity. Returns the family and the
    per-index :class:`MatchingResult` objects.
    """
    results, rows = [], []
    for i in range(dec.n):
        res = extract_matching(code, dec, i, epsilon, c)
        row = []
        for gt in res.matching:
            pr = parity_extraction(code, i, gt.query, gt.fixed_table, epsilon)
            row.append(MatchedTuple(pr.subset, pr.sign, pr.correlation))
        results.append(res)
        rows.append(tuple(row))
    family = MatchingFamily(code.n, code.N, tuple(rows), epsilon / (1 << dec.q))
    return family, results


# --- pinching and the certificate -----------------------------------------

def pinching_steps(A):
    """Yield the matrices obtained by zeroing off-diagonal row/column pairs, last index first.

    Each step is ``A' = (A + D A D) / 2`` with ``D`` the diagonal sign
    matrix that flips one coordinate, so no unitarily invariant norm grows.
    The final matrix is ``diag(A)``.
    """
    A = np.array(A, dtype=np.complex128)
    yield A
    for k in range(A.shape[0] - 1, -1, -1):
        D = np.ones(A.shape[0])
        D[k] = -1.0
        A = (A + D[:, None] * A * D[None, :]) / 2
        yield A


def pinch_diag_gap(A, p: float) -> float:
    """``||A||_p - ||diag(A)||_p`` (normalized Schatten norms); never negative in exact arithmetic."""
    A = np.asarray(A, dtype=np.complex128)
    s = np.linalg.svd(A, compute_uv=False)
    return float(norm_from_singular_values(s, p) - norm_from_singular_values(np.abs(np.diag(A)), p))


def singleton_coefficient(code: CodeSpec, i: int) -> np.ndarray:
    """``2^-n sum_x x_i C(x) C(x)^T``, the Fourier coefficient at ``{i}`` of the rank-1 table."""
    C = code.table.astype(float)
    xi = message_signs(code.n)[:, i].astype(float)
    # integer-valued partial sums below 2^53, so the result is exact
    return (C * xi[:, None]).T @ C / float(1 << code.n)


def _symmetric_norm(F: np.ndarray, p: float) -> float:
    return float(norm_from_singular_values(np.abs(np.linalg.eigvalsh(F)), p))


def ldc_certificate(code: CodeSpec, matchings: MatchingFamily, delta: float, epsilon: float, spot_checks: int = 3) -> dict:
    """Evaluate every step of the two-query length bound on a concrete code.

    With ``p = 1 + 1/log2(N)`` and ``F_i`` the coefficient at ``{i}``:

    * ``||diag(P F_i)||_p <= ||F_i||_p`` where ``P`` swaps each matched pair;
    * ``||F_i||_p >= ((1/N) * matched_positions * (epsilon/4)^p)^(1/p)``;
    * ``n (p-1) (delta epsilon / 2)^(2/p) (epsilon/4)^2 <= N^(2(p-1)/p)``.

    Singletons in a matching are flagged and contribute nothing, since
    ``F_i`` has zero diagonal. Pairs whose ``|F_i[j, k]|`` is below
    ``epsilon / 4`` are reported as precondition failures and excluded from
    the count.
    """
    N, n = code.N, code.n
    if N > MAX_CERT_LENGTH:
        raise GuardError(f"N={N} exceeds certificate limit {MAX_CERT_LENGTH}")
    if N < 2:
        raise ValueError("certificate needs N >= 2")
    if n > MAX_EXACT_BITS:
        raise GuardError(f"n={n} exceeds exact-enumeration limit {MAX_EXACT_BITS}")
    if matchings.n != n or matchings.N != N:
        raise ValueError("matching family does not match the code dimensions")
    p = 1.0 + 1.0 / math.log2(N)
    pair_threshold = epsilon / 4.0
    indices = []
    total_norm_sq = 0.0
    total_lower_sq = 0.0
    for i in range(n):
        F = singleton_coefficient(code, i)
        symmetric = bool(np.array_equal(F, F.T))
        zero_diag = bool(np.all(np.diag(F) == 0.0))
        if not (symmetric and zero_diag):
            raise ViolationError(f"index {i}: F_i is not symmetric with zero diagonal")
        perm = np.arange(N)
        pairs, singletons, weak = [], [], []
        for t in matchings.entries[i]:
            if len(t.query) == 1:
                singletons.append(list(t.query))
            elif len(t.query) == 2:
                j, k = t.query
                if abs(F[j, k]) >= pair_threshold - 1e-12:
                    pairs.append([j, k])
                    perm[j], perm[k] = k, j
                else:
                    weak.append({"pair": [j, k], "entry": float(F[j, k])})
            else:
                raise PreconditionError(f"index {i}: tuple {t.query} is not a pair or singleton")
        PF = F[perm, :]
        diag = np.diag(PF)
        norm_F = _symmetric_norm(F, p)
        norm_diag = float(norm_from_singular_values(np.abs(diag), p))
        matched = 2 * len(pairs)
        lower = (matched * pair_threshold**p / N) ** (1.0 / p)
        total_norm_sq += (p - 1.0) * norm_F**2
        total_lower_sq += (p - 1.0) * lower**2
        indices.append({
            "index": i,
            "symmetric": symmetric,
            "zero_diagonal": zero_diag,
            "pairs": len(pairs),
            "singletons": singletons,
            "weak_pairs": weak,
            "precondition_ok": not weak,
            "pair_count_hypothesis": bool(len(pairs) >= delta * epsilon * N / 4.0),
            "matched_diag_min_abs": float(np.min(np.abs(diag[perm != np.arange(N)]), initial=np.inf)) if pairs else 0.0,
            "norm_F": norm_F,
            "norm_diag_PF": norm_diag,
            "pinch_gap": norm_F - norm_diag,
            "pinch_ok": bool(norm_diag <= norm_F + 1e-10),
            "lower_bound": lower,
            "lower_bound_ok": bool(lower <= norm_diag + 1e-9 and lower <= norm_F + 1e-9),
        })
    rhs = float(N ** (2.0 * (p - 1.0) / p))
    per_index_floor = (p - 1.0) * (delta * epsilon / 2.0) ** (2.0 / p) * (epsilon / 4.0) ** 2
    lhs = n * per_index_floor

    C = code.table.astype(float)
    samples = sorted({int(v) for v in np.linspace(0, (1 << n) - 1, num=max(1, min(spot_checks, 1 << n)))})
    spots = []
    for x in samples:
        fx = np.outer(C[x], C[x])
        spots.append({
            "x": x,
            "norm_p_pow_p": float(norm_from_singular_values(np.abs(np.linalg.eigvalsh(fx)), p) ** p),
            "expected": float(N ** (p - 1.0)),
        })
    return {
        "n": n,
        "N": N,
        "delta": delta,
        "epsilon": epsilon,
        "p": p,
        "log_base": 2,
        "pair_threshold": pair_threshold,
        "indices": indices,
        "chain": {
            "lhs": lhs,
            "rhs": rhs,
            "holds": bool(lhs <= rhs),
            "implied_max_n": rhs / per_index_floor if per_index_floor > 0 else math.inf,
            "sum_norm_sq": total_norm_sq,
            "sum_lower_sq": total_lower_sq,
            "hypercontractive_ok": bool(total_lower_sq <= total_norm_sq + 1e-9 and total_norm_sq <= rhs * (1 + 1e-9)),
        },
        "spot_checks": spots,
        "singleton_policy": "singletons are flagged and contribute no diagonal mass",
    }


# --- file formats ---------------------------------------------------------

def save_code(code: CodeSpec, path) -> None:
    """Linear codes: ``n=<n>`` header then one hex generator mask per line.
    Explicit codes (``.csv``): ``2^n`` rows of ``N`` comma-separated +1/-1."""
    path = Path(path)
    if code.kind == "linear" and path.suffix != ".csv":
        lines = [f"n={code.n}"] + [format(int(g), "x") for g in code.data]
        path.write_text("\n".join(lines) + "\n")
    else:
        rows = [",".join(str(int(v)) for v in row) for row in code.table]
        path.write_text("\n".join(rows) + "\n")


def load_code(path) -> CodeSpec:
    path = Path(path)
    text = path.read_text()
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not lines:
        raise FormatError(f"{path}: empty code file")
    try:
        if path.suffix == ".csv":
            table = np.array([[int(v) for v in ln.split(",")] for ln in lines])
            return CodeSpec.explicit(table)
        key, sep, value = lines[0].partition("=")
        if key.strip() != "n" or not sep:
            raise FormatError(f"{path}: first line must be 'n=<bits>'")
        n = int(value)
        return CodeSpec.linear(n, [int(ln, 16) for ln in lines[1:]])
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def save_decoder(dec: DecoderSpec, path) -> None:
    Path(path).write_text(json.dumps(dec.to_json(), indent=1, sort_keys=True) + "\n")


def load_decoder(path) -> DecoderSpec:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
        rules = tuple(
            tuple((float(r["weight"]), tuple(r["query"]), r["table"]) for r in index_rules)
            for index_rules in obj["indices"]
        )
        return DecoderSpec(int(obj["q"]), int(obj["N"]), rules)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed decoder file: {exc}") from exc
