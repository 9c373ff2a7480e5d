"""The two-query LDC length bound, step by step, on the Hadamard code.

Smooths the natural decoder, extracts a matching of good query pairs for
each message bit, and evaluates the hypercontractive certificate. For a
code this small the chain holds with plenty of room; the point is to see
every intermediate quantity.
"""
from matrixhc import ldc

code = ldc.hadamard_code(4)
dec = ldc.hadamard_decoder(4)
delta, epsilon = 0.1, 0.3

smooth, c, report = ldc.smooth_from_ldc(code, dec, delta, epsilon)
print(f"N={code.N}, smoothness achieved c={c} (allowed {report['c_bound']})")

family, results = ldc.build_matching_family(code, smooth, epsilon, c)
for r in results:
    print(f"bit {r.index}: {len(r.good)} good pairs, matching of size {len(r.matching)}, "
          f"every pair decodes with correlation {min(t.correlation for t in r.matching):.2f}")

cert = ldc.ldc_certificate(code, family, delta, epsilon)
chain = cert["chain"]
print(f"chain at p={cert['p']:.4f}: lhs {chain['lhs']:.3e} <= rhs {chain['rhs']:.4f}: {chain['holds']}")
print(f"message length allowed by the chain: {chain['implied_max_n']:.3e}")
