"""Matrix-valued functions on the Boolean cube and their Fourier transform.

Indexing convention (used by every module in the package): a point
``x in {0,1}^n`` is the integer whose bit ``i`` is coordinate ``x_{i+1}``,
so bit 0 is the first coordinate. A subset ``S`` of ``[n]`` is encoded the
same way, and the character is ``chi_S(x) = (-1)^popcount(S & x)``.

The Fourier coefficient at ``S`` is ``2^-n sum_x f(x) chi_S(x)``, computed
entrywise by an in-place Walsh-Hadamard butterfly over the ``2^n`` axis.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, GuardError

MAX_BITS = 24
MAGIC = b"MHCF"


def popcount(v) -> np.ndarray | int:
    """Number of set bits, elementwise for integer arrays."""
    if isinstance(v, (int, np.integer)):
        return int(v).bit_count()
    v = np.asarray(v, dtype=np.uint64)
    count = np.zeros(v.shape, dtype=np.int64)
    while np.any(v):
        count += (v & np.uint64(1)).astype(np.int64)
        v = v >> np.uint64(1)
    return count


def subset_sizes(n: int) -> np.ndarray:
    """``|S|`` for every ``S`` in index order ``0 .. 2^n - 1``."""
    sizes = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        sizes = np.concatenate([sizes, sizes + 1])
    return sizes


def character(S: int, x) -> np.ndarray | int:
    """``chi_S(x)`` as +1/-1."""
    return 1 - 2 * (popcount(np.bitwise_and(S, x)) & 1)


def bits_of(mask: int) -> list[int]:
    """Positions of the set bits of `mask`, ascending."""
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


@dataclass(frozen=True)
class CubeFunction:
    """A table of ``2^n`` matrices of size ``d x d`` indexed by ``x``.

    The same type holds a function and its Fourier transform (indexed by
    ``S``). The table is stored as one contiguous, read-only complex array
    of shape ``(2^n, d, d)``.
    """

    n: int
    table: np.ndarray

    def __post_init__(self):
        n = int(self.n)
        if n < 0 or n > MAX_BITS:
            raise GuardError(f"n={n} outside supported range 0..{MAX_BITS}")
        T = np.asarray(self.table, dtype=np.complex128)
        if T.ndim == 1:
            T = T.reshape(-1, 1, 1)
        if T.ndim != 3 or T.shape[1] != T.shape[2] or T.shape[1] == 0:
            raise ValueError(f"table must have shape (2^n, d, d), got {T.shape}")
        if T.shape[0] != 1 << n:
            raise ValueError(f"table has {T.shape[0]} entries, expected 2^{n}")
        if not np.all(np.isfinite(T)):
            raise ValueError("table has non-finite entries")
        T = np.ascontiguousarray(T)
        if T is self.table:
            T = T.copy()
        T.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "table", T)

    @property
    def dim(self) -> int:
        return self.table.shape[1]

    def __getitem__(self, x: int) -> np.ndarray:
        return self.table[x]

    def __len__(self) -> int:
        return self.table.shape[0]

    @classmethod
    def from_function(cls, n: int, fn) -> "CubeFunction":
        """Tabulate ``fn(x)`` for ``x = 0 .. 2^n - 1``."""
        return cls(n, np.array([np.atleast_2d(fn(x)) for x in range(1 << n)]))

    @classmethod
    def scalar(cls, values) -> "CubeFunction":
        """A ``d = 1`` function from a length-``2^n`` vector."""
        v = np.asarray(values)
        n = int(v.shape[0]).bit_length() - 1
        return cls(n, v.reshape(-1, 1, 1))


def walsh_hadamard(data: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard butterflies along axis 0 of a copy of `data`.

    Axis 0 must have length ``2^n``; trailing axes are transformed
    independently. Each output scalar comes from the same fixed-order
    chain of additions.
    """
    out = np.array(data, dtype=np.result_type(data, np.complex128), copy=True)
    size = out.shape[0]
    tail = out.shape[1:]
    h = 1
    while h < size:
        view = out.reshape((size // (2 * h), 2, h) + tail)
        lo = view[:, 0].copy()
        hi = view[:, 1]
        view[:, 0] += hi
        view[:, 1] = lo - hi
        h *= 2
    return out


def fourier_transform(f: CubeFunction) -> CubeFunction:
    """``fhat(S) = 2^-n sum_x f(x) chi_S(x)`` for every ``S``."""
    return CubeFunction(f.n, walsh_hadamard(f.table) / float(1 << f.n))


def inverse_fourier(fhat: CubeFunction) -> CubeFunction:
    """``f(x) = sum_S fhat(S) chi_S(x)``."""
    return CubeFunction(fhat.n, walsh_hadamard(fhat.table))


def _sq_norm2(stack: np.ndarray) -> np.ndarray:
    # normalized Schatten 2-norm squared is |A|_F^2 / d
    d = stack.shape[-1]
    return np.sum(np.abs(stack) ** 2, axis=(-2, -1)) / d


def parseval_gap(f: CubeFunction) -> float:
    """``| E_x ||f(x)||_2^2 - sum_S ||fhat(S)||_2^2 |`` (normalized 2-norm)."""
    fhat = fourier_transform(f)
    lhs = float(np.mean(_sq_norm2(f.table)))
    rhs = float(np.sum(_sq_norm2(fhat.table)))
    return abs(lhs - rhs)


def noise_operator(f: CubeFunction, rho: float) -> CubeFunction:
    """Apply ``T_rho``: scale each Fourier coefficient by ``rho^|S|``.

    Equivalently, average ``f`` over ``y`` obtained from ``x`` by flipping
    each bit independently with probability ``(1 - rho)/2``.
    """
    rho = float(rho)
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    weights = np.power(rho, subset_sizes(f.n))  # numpy gives 0.0**0 == 1.0
    fhat = fourier_transform(f)
    return inverse_fourier(CubeFunction(f.n, fhat.table * weights[:, None, None]))


# --- serialization -------------------------------------------------------

def to_bytes(f: CubeFunction) -> bytes:
    """Binary layout: magic, uint32 n, uint32 d (little endian), then
    ``2^n * d * d`` complex128 values, matrices row-major in ``x`` order."""
    header = MAGIC + struct.pack("<II", f.n, f.dim)
    return header + f.table.astype("<c16").tobytes()


def from_bytes(blob: bytes) -> CubeFunction:
    if len(blob) < 12 or blob[:4] != MAGIC:
        raise FormatError("not a cube-function binary file (bad magic)")
    n, d = struct.unpack("<II", blob[4:12])
    if n > MAX_BITS:
        raise GuardError(f"n={n} outside supported range 0..{MAX_BITS}")
    expected = (1 << n) * d * d * 16
    if len(blob) - 12 != expected:
        raise FormatError(f"payload has {len(blob) - 12} bytes, expected {expected}")
    table = np.frombuffer(blob, dtype="<c16", offset=12).reshape((1 << n, d, d))
    return CubeFunction(n, table.astype(np.complex128))


def matrix_to_json(M: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def matrix_from_json(rows) -> np.ndarray:
    try:
        A = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"malformed matrix: {exc}") from exc
    if A.ndim != 3 or A.shape[2] != 2:
        raise FormatError("matrix must be a nested list of [re, im] pairs")
    return A[..., 0] + 1j * A[..., 1]


def to_json(f: CubeFunction) -> dict:
    """JSON form: ``{"n": n, "d": d, "table": [matrix, ...]}`` with each
    matrix a list of rows of ``[re, im]`` pairs."""
    return {"n": f.n, "d": f.dim, "table": [matrix_to_json(M) for M in f.table]}


def from_json(obj: dict) -> CubeFunction:
    try:
        n, d, rows = int(obj["n"]), int(obj["d"]), obj["table"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed cube-function JSON: {exc}") from exc
    table = np.array([matrix_from_json(M) for M in rows]) if rows else np.zeros((0, d, d))
    if table.shape != ((1 << n), d, d):
        raise FormatError(f"table shape {table.shape} does not match n={n}, d={d}")
    return CubeFunction(n, table)


def save(f: CubeFunction, path) -> None:
    """Write `f`; ``.json`` suffix selects the JSON variant, anything else binary."""
    path = Path(path)
    if path.suffix == ".json":
        path.write_text(json.dumps(to_json(f)))
    else:
        path.write_bytes(to_bytes(f))


def load(path) -> CubeFunction:
    path = Path(path)
    if path.suffix == ".json":
        try:
            obj = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON: {exc}") from exc
        return from_json(obj)
    return from_bytes(path.read_bytes())
