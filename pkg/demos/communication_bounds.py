"""Communication consequences: block-disjointness and one-way protocols.

Prints the probability that a random block partition is disjoint from a
random k-set, next to its lower bound, and a small grid of one-way bounds.
"""
from matrixhc import bounds

print(f"{'k':>3} {'n':>3} {'ell':>4} {'exact':>10} {'lower':>10}")
for k, n, ell in [(10, 8, 3), (20, 8, 5), (40, 16, 8)]:
    exact, lower = bounds.block_disjoint_probability(k, n, ell)
    print(f"{k:>3} {n:>3} {ell:>4} {exact:10.4f} {lower:10.4f}")

print()
for sigma in (0.6, 0.75, 0.9):
    p = bounds.rac_from_protocol_success(sigma, 30, 3)
    print(f"k=30, ell=3: protocol success {sigma:.2f} -> random access success {p:.4f}")
