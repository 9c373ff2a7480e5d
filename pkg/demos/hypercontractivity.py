"""Two-point and cube-level hypercontractivity, checked numerically.

Draws random matrices and matrix-valued functions on the cube, then prints
both sides of each inequality across a grid of p. The margin (rhs - lhs)
should never be negative; at p = 2 the cube inequality is Parseval and the
margin collapses to rounding error.
"""
import numpy as np

from matrixhc import hyperineq
from matrixhc.rng import make_rng

rng = make_rng(2024)
grid = np.linspace(1.0, 2.0, 6)

# Two-point inequality for a pair of 4x4 complex matrices.
A = hyperineq.random_ginibre(rng, 4)
B = hyperineq.random_ginibre(rng, 4)
print("two-point inequality, d=4")
print(f"{'p':>5} {'lhs':>12} {'rhs':>12} {'margin':>12}")
for p in grid:
    lhs, rhs = hyperineq.bcl_sides(A, B, p)
    print(f"{p:5.2f} {lhs:12.6f} {rhs:12.6f} {rhs - lhs:12.3e}")

# Cube inequality for each random ensemble, n=4 and d=3.
print()
print("cube inequality, n=4, d=3")
for ensemble in ("ginibre", "density", "pm1-scalar", "rank1"):
    f = hyperineq.random_cube_function(rng, 4, 3, ensemble)
    margins = []
    for p in grid:
        lhs, rhs = hyperineq.hypercontractive_sides(f, p)
        margins.append(rhs - lhs)
    print(f"{ensemble:>10}: min margin below p=2 {min(margins[:-1]):.3e}, margin at p=2 {margins[-1]:.1e}")
