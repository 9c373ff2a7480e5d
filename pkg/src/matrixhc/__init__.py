"""Fourier analysis of matrix-valued functions on the Boolean cube.

Submodules
----------
matcore
    Normalized Schatten norms, density matrices, POVMs, Helstrom measurement.
cube
    Cube functions, fast Fourier transform, noise operator, file formats.
hyperineq
    Two-point and hypercontractive inequality evaluators.
qrac
    Quantum random access codes, XOR bias, exhaustive classical search.
ldc
    Two-query locally decodable codes: smoothing, matchings, certificate.
bounds
    Closed-form direct-product bounds.
"""

from . import bounds, cube, hyperineq, ldc, matcore, qrac
from .cube import CubeFunction, fourier_transform, inverse_fourier, noise_operator
from .errors import FormatError, GuardError, MatrixHCError, NumericalError, PreconditionError, ViolationError
from .matcore import DensityMatrix, Povm, helstrom_bias, schatten_norm, trace_norm
from .rng import make_rng

__version__ = "0.1.0"

__all__ = [
    "bounds", "cube", "hyperineq", "ldc", "matcore", "qrac",
    "CubeFunction", "fourier_transform", "inverse_fourier", "noise_operator",
    "FormatError", "GuardError", "MatrixHCError", "NumericalError", "PreconditionError", "ViolationError",
    "DensityMatrix", "Povm", "helstrom_bias", "schatten_norm", "trace_norm", "make_rng",
]
