"""Entropy-constrained Gaussian channel at high SNR.

The capacity-achieving input under a power and an entropy constraint is, as
snr grows, the discrete Gaussian with the largest minimum distance ``d_h``.
This package evaluates the lattice log-theta potential behind it, solves for
``d_h``, computes the conditional entropy ``H(X|Y)`` of discrete inputs over
AWGN deep into the exponentially small regime, and checks the extremal
properties numerically.
"""

__version__ = "0.1.0"

from .channel import (
    ChannelEval,
    ExponentFit,
    conditional_entropy,
    conditional_entropy_mc,
    conditional_entropy_sweep,
    fit_exponent,
    hxy_lower_bound,
    hxy_lower_bound_best,
    hxy_upper_bound,
    optimal_delta,
    output_entropy,
    q_function,
    r_function,
)
from .distributions import (
    DiscreteDistribution,
    DiscreteGaussianSpec,
    entropy,
    load_constellation,
    materialize,
    min_distance,
    moments,
    parse_constellation,
    sample,
    total_variation,
)
from .errors import (
    BracketError,
    ConvergenceError,
    DomainError,
    EntGaussError,
    PrecisionError,
    PreconditionError,
)
from .extremal import (
    SearchReport,
    aligned_total_variation,
    dmin_search,
    duality_check,
    equal_spacing_translate,
    shift_comparison,
    tangent_lemma_check,
    variance_gap,
)
from .solver import (
    BITS,
    SolveResult,
    d_h_approx,
    from_nats,
    gap_exponent,
    gap_exponent_approx,
    lambda_h_approx,
    lambert_w_minus1,
    solve,
    solve_shifted,
    tangent_entropy,
    threshold_entropy,
    to_nats,
)
from .theta import ThetaEval, log_theta, log_theta_mp, theta_sandwich

__all__ = [name for name in dir() if not name.startswith("_")]
