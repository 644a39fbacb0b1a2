"""
Lattice potentials and their tangents
=====================================

``L_a(lam) = log sum_j exp(-lam (j + a)^2)`` is convex and decreasing.  The
tangent with y-intercept ``h`` touches it at ``lam_h``.  Its slope is minus
the variance of the unit-spacing discrete Gaussian with entropy ``h``.
Shifting the lattice by a half step lowers the potential.  The tangent then
gets steeper, which is why the unshifted lattice wins.
"""

import math

import numpy as np

from entgauss import BITS, log_theta, shift_comparison, solve, tangent_lemma_check
from entgauss.extremal import variance_gap

###############################################################################
# The two potentials
# ------------------
# Far below lam = pi the two values agree to many digits.  The modular
# transform is what makes small ``lam`` cheap.

for lam in (0.1, 0.5, 1.0, math.pi, 5.0):
    t0, th = log_theta(lam, 0.0), log_theta(lam, 0.5)
    print(f"lam {lam:7.4f}: L_0 = {t0.L:+.12f}  L_1/2 = {th.L:+.12f}  terms {t0.truncation_terms}")

###############################################################################
# Tangent at half a bit
# ---------------------

h = 0.5 * BITS
res = solve(h)
t = log_theta(res.lambda_h)
print(f"lam_h = {res.lambda_h:.6f}, intercept check {t.L - res.lambda_h * t.dL - h:+.1e}")
print(f"slope {t.dL:.6f}, 1/d_h^2 = {1 / res.d_h**2:.6f}")

###############################################################################
# The half-step shift
# -------------------
# The variance gap shrinks like exp(-pi^2/lam_h).  It falls out of double
# precision before 3 bits, so these comparisons run in extended precision.

for h_bits in (0.05, 1.0, 3.0, 5.0):
    var0, var_half = shift_comparison(h_bits * BITS)
    slope_f, slope_g = tangent_lemma_check(h_bits * BITS)
    gap, rel = variance_gap(h_bits * BITS)
    print(f"h {h_bits:4g} bits: var_0 < var_1/2 is {var0 < var_half}, "
          f"|f'| < |g'| is {slope_f > slope_g}, log10 relative gap {rel:.1f}")

print("sample of L_0 on [0.05, 4.5]:", np.round([log_theta(x).L for x in np.linspace(0.05, 4.5, 5)], 6))
