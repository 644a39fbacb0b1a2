"""
The discrete Gaussian input at low and high entropy
===================================================

For an entropy budget ``h`` the input we want is a discrete Gaussian on the
lattice ``d_h Z``.  Its shape parameter ``lam_h`` is fixed by the entropy,
and its spacing ``d_h`` by the unit-power constraint.  This script solves
for both at several budgets.  Then it looks at the two extremes.
"""

import math

import numpy as np

from entgauss import BITS, DiscreteGaussianSpec, entropy, materialize, moments, solve, threshold_entropy
from entgauss.svgplot import line_plot

###############################################################################
# Solving the tangent equation
# ----------------------------
# ``solve`` takes nats; the CLI and the tables below use bits.

print(f"threshold entropy: {threshold_entropy() / BITS:.6f} bits (lam = pi)")
print(f"{'h [bits]':>10} {'lam_h':>12} {'d_h':>12} regime")
for h_bits in (1e-4, 0.05, 0.48, 0.5, 1.0, 3.0, 6.0):
    res = solve(h_bits * BITS)
    print(f"{h_bits:10g} {res.lambda_h:12.6g} {res.d_h:12.6g} {res.regime}")

###############################################################################
# Low entropy: three atoms
# ------------------------
# At 1e-4 bits nearly all of the mass sits at the origin.  Two small side
# atoms sit hundreds of units out and carry the whole unit power.

res = solve(1e-4 * BITS)
dist = materialize(DiscreteGaussianSpec(res.d_h, res.lambda_h))
top = np.argsort(dist.probs)[-3:]
for k in sorted(top, key=lambda k: dist.atoms[k]):
    print(f"atom {dist.atoms[k]:+10.4f}  prob {dist.probs[k]:.3e}")
print("mass outside the three atoms:", 1.0 - math.fsum(dist.probs[top]))

###############################################################################
# High entropy: a sampled normal density
# --------------------------------------
# At 6 bits the spacing is about 0.064.  The pmf is then the standard normal
# density times the spacing, to plotting accuracy.

res = solve(6 * BITS)
dist = materialize(DiscreteGaussianSpec(res.d_h, res.lambda_h))
envelope = res.d_h * np.exp(-0.5 * dist.atoms**2) / math.sqrt(2 * math.pi)
print(f"d_h = {res.d_h:.6f}, max |pmf - envelope| = {np.max(np.abs(dist.probs - envelope)):.2e}")
print(f"entropy {entropy(dist) / BITS:.10f} bits, second moment {moments(dist)[1]:.12f}")

svg = line_plot([("pmf", dist.atoms.tolist(), dist.probs.tolist()),
                 ("d_h phi(x)", dist.atoms.tolist(), envelope.tolist())],
                title="Discrete Gaussian at 6 bits", xlabel="x", ylabel="probability")
print(f"(svg of {len(svg)} bytes ready; write it anywhere to view)")
