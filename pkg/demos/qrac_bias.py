"""Quantum random access codes: measured success against the length bound.

Builds a random QRAC, reports its success probability and the XOR bias
of the same encoding, then runs the exact reduction from the first to the
second. The last table shows how fast the bias bound decays with k when
the number of qubits is a fixed fraction of n.
"""
from matrixhc import qrac
from matrixhc.rng import make_rng

rng = make_rng(11)
q = qrac.random_qrac(rng, n=4, k=2, m=1)
print(f"random QRAC n=4 k=2 m=1: success probability {qrac.success_probability(q):.4f}")

x = qrac.XorQrac(4, 2, 1, q.encoding)
print(f"XOR bias of the same encoding: {qrac.xor_bias(x):.4f}")
print(f"bias bound: {qrac.thm44_bound(2, 4, 1):.4f}")

rep = qrac.reduce_qrac_to_xor(q)
print(f"reduction identity: {rep.lhs_identity:.12f} vs {rep.rhs_identity:.12f}")
print(f"largest beta_S above its trace norm: {rep.max_domination_excess:.2e}")

# Best classical code for three bits in one bit: majority wins 3/4.
p_star, _ = qrac.best_classical_qrac(3, 1, 1)
print(f"best classical n=3 k=1 m=1: {p_star}")

print()
print(f"{'k':>3} {'bias bound (n=64, m=4)':>24}")
for k in range(1, 7):
    b = qrac.thm44_bound(k, 64, 4)
    print(f"{k:>3} {b:24.3e}" + ("  (vacuous)" if b > 1 else ""))
