"""
Searching for a better constellation
====================================

No distribution with entropy ``h`` and unit power can have minimum distance
above ``d_h``.  We test that claim by brute force: a seeded hill-climb over
small constellations that maximises the minimum gap at fixed entropy and
power.
"""

from entgauss import DiscreteGaussianSpec, aligned_total_variation, dmin_search, materialize, solve

###############################################################################
# Two entropies, eight atoms
# --------------------------
# The ratio never exceeds one beyond rounding.  The winner also looks like
# the discrete Gaussian once both are aligned at the mode.

for h in (0.3, 0.7):
    rep = dmin_search(h, 8, 4096, seed=7)
    res = solve(h)
    ref = materialize(DiscreteGaussianSpec(res.d_h, res.lambda_h))
    tv = aligned_total_variation(rep.best_candidate, ref, res.d_h)
    print(f"h = {h} nats: best d_min {rep.best_dmin_found:.6f}, d_h {rep.d_h_reference:.6f}, "
          f"ratio {rep.ratio:.6f}, TV to discrete Gaussian {tv:.4f}")
    for x, p in zip(rep.best_candidate.atoms, rep.best_candidate.probs):
        if p > 1e-4:
            print(f"    {x:+.5f}  {p:.5f}")
