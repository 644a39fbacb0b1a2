"""
How fast the equivocation vanishes
==================================

Over Gaussian noise at high SNR, ``H(X|Y)`` of a constellation with minimum
distance ``d`` decays like ``exp(-snr d^2 / 8)``.  Here we compute it with
the certified quadrature, check a point against Monte Carlo, and fit the
exponent from a handful of SNRs.
"""

import math

import numpy as np

from entgauss import (
    BITS,
    DiscreteDistribution,
    DiscreteGaussianSpec,
    conditional_entropy,
    conditional_entropy_mc,
    fit_exponent,
    hxy_lower_bound_best,
    hxy_upper_bound,
    materialize,
    solve,
)

###############################################################################
# BPSK first
# ----------
# Two equiprobable points at +-1, so ``d = 2`` and the exponent is -1/2.

bpsk = DiscreteDistribution([-1.0, 1.0], [0.5, 0.5])
ev = conditional_entropy(bpsk, 4.0)
est, se = conditional_entropy_mc(bpsk, 4.0, 10**6, seed=1)
print(f"snr 4: quadrature {ev.H_X_given_Y:.8f} nats (rel err <= {ev.rel_error_bound:.1e})")
print(f"       Monte Carlo {est:.8f} +- {se:.1e}")

fit = fit_exponent(bpsk, [30, 40, 50, 60])
print(f"fitted exponent {fit.fitted_limit:.4f}, predicted {fit.predicted_limit}")

###############################################################################
# The discrete Gaussian at half a bit
# -----------------------------------
# The values drop below 1e-160 on this grid.  The integrals are taken per
# atom in the log domain, so nothing cancels.

res = solve(0.5 * BITS)
dist = materialize(DiscreteGaussianSpec(res.d_h, res.lambda_h))
grid = [100, 150, 200, 250]
fit = fit_exponent(dist, grid)
for snr, hxy in zip(grid, fit.hxy_values):
    print(f"snr {snr:4d}: H(X|Y) = {hxy:.4e} nats")
print(f"fitted {fit.fitted_limit:.5f} vs -d_h^2/8 = {-res.d_h**2 / 8:.5f}")

###############################################################################
# Sandwiching the value
# ---------------------
# Once the noise deviation is below half the minimum distance, simple
# bounds hold on both sides.

for snr in np.geomspace(4.0 / res.d_h**2 * 1.1, 60, 5):
    lo, _ = hxy_lower_bound_best(dist, snr)
    val = conditional_entropy(dist, snr).H_X_given_Y
    hi = hxy_upper_bound(dist, snr)
    print(f"snr {snr:7.3f}: {lo:.3e} <= {val:.3e} <= {hi:.3e}  ({math.log10(hi / lo):.1f} decades apart)")
