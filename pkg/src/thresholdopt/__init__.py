"""Optimal threshold factors of explicit one-step methods.

Computes the largest step-size coefficients R(m, n) for which a degree-m
stability polynomial matching the exponential to order n stays absolutely
monotonic, together with the unique optimal polynomial, by adaptive
Christoffel transforms of Poisson measures.  The cost depends only on the
order n, never on the degree m, and every returned factor carries an exact
integer defining polynomial with a certified root enclosure.
"""

from . import hp
from .errors import (
    AmbiguityError,
    BracketError,
    BreakdownError,
    CapExceededError,
    CompletenessError,
    ConvergenceError,
    DegeneracyError,
    DomainError,
    InfeasibleConfigurationError,
    ThresholdError,
)
from .exact import (
    IntPoly,
    elementary_symmetric,
    eval_sign,
    isolate_positive_roots,
    polar_h_poly,
    refine_enclosure,
    stirling_first,
    stirling_second,
    touchard,
)
from .optimizer import (
    ThresholdResult,
    build_phi_even,
    compute_alphas,
    compute_threshold,
    configuration_iter,
)
from .oracle import brute_force_threshold
from .orthopoly import (
    Quadrature,
    RecurrenceCoeffs,
    charlier_recurrence,
    christoffel_chain,
    christoffel_pair_chain,
    gauss_quadrature,
    laguerre_smallest_zero,
    tridiag_eigenvalues,
)
from .spectrum import (
    IntegralSpectrum,
    PConfiguration,
    RootEnclosure,
    integral_spectrum,
    optimal_spectrum,
    refine_root,
    spectral_radius,
)
from .validate import (
    MetzlerSystem,
    StabilityPolynomial,
    check_abs_monotonic,
    check_order,
    contractivity_demo,
    farkas_witness,
    poisson_integral,
    positivity_demo,
)

__version__ = "0.1.0"
