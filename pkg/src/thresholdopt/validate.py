"""Post-hoc verification of computed polynomials and step-size demos.

Algebraic checks (order conditions, absolute monotonicity, Poisson-moment
integrals) run at full working precision; the initial-value simulations run
in double precision since they are qualitative.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from gmpy2 import mpfr

from . import hp
from .errors import DomainError
from .exact import IntPoly, falling_factorial, touchard
from .optimizer import ThresholdResult

ORDER_TOLERANCE = mpfr("1e-20")


@dataclass(frozen=True)
class StabilityPolynomial:
    """Non-negative combination of powers of (1 + x/R)."""

    R: mpfr
    terms: tuple  # of (exponent, coefficient)

    @staticmethod
    def from_result(result: ThresholdResult) -> "StabilityPolynomial":
        return StabilityPolynomial(
            result.r_value, tuple(zip(result.exponents, result.alphas))
        )

    @property
    def degree(self) -> int:
        return max(e for e, _ in self.terms)

    def eval_float(self, x: float) -> float:
        r = float(self.R)
        return sum(float(a) * (1 + x / r) ** e for e, a in self.terms)

    def matrix_value(self, ha: np.ndarray) -> np.ndarray:
        """Phi(hA) for a square matrix argument, in double precision."""
        s = ha.shape[0]
        base = np.eye(s) + ha / float(self.R)
        out = np.zeros_like(base)
        powers = {}
        for e, a in self.terms:
            if e not in powers:
                powers[e] = np.linalg.matrix_power(base, e)
            out += float(a) * powers[e]
        return out


@dataclass(frozen=True)
class OrderReport:
    passed: bool
    order: int
    residuals: tuple
    tolerance: str

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "order": self.order,
            "residuals": list(self.residuals),
            "tolerance": self.tolerance,
        }


def check_order(phi: StabilityPolynomial, n: int,
                precision_bits: int = hp.DEFAULT_PRECISION_BITS) -> OrderReport:
    """Check the exponential-matching conditions through order n.

    For each l = 0..n the residual |sum_i alpha_i (m_i)_l / R^l - 1| must
    stay below 1e-20 at >= 100 bits.
    """
    residuals = []
    ok = True
    with hp.precision(max(precision_bits, hp.DEFAULT_PRECISION_BITS)):
        for ell in range(n + 1):
            s = mpfr(0)
            for e, a in phi.terms:
                s += mpfr(a) * falling_factorial(int(e), ell)
            s /= mpfr(phi.R) ** ell
            res = abs(s - 1)
            residuals.append(hp.decimal_str(res, 3))
            if not res < ORDER_TOLERANCE:
                ok = False
    return OrderReport(ok, n, tuple(residuals), "1e-20")


@dataclass(frozen=True)
class MonotonicityReport:
    passed: bool
    offending_exponents: tuple
    max_exponent: int
    degree_bound: int

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "offending_exponents": list(self.offending_exponents),
            "max_exponent": self.max_exponent,
            "degree_bound": self.degree_bound,
        }


def check_abs_monotonic(phi: StabilityPolynomial, m: int) -> MonotonicityReport:
    """All coefficients non-negative and all exponents at most m.

    Sufficient for absolute monotonicity on [-R, 0]: every derivative at -R
    is then a non-negative combination of the surviving terms.
    """
    bad = tuple(int(e) for e, a in phi.terms if a < 0)
    max_e = max(int(e) for e, _ in phi.terms)
    passed = not bad and max_e <= m
    return MonotonicityReport(passed, bad, max_e, m)


# ---------------------------------------------------------------------------
# Poisson-moment (Farkas) integrals
# ---------------------------------------------------------------------------

def poisson_integral(poly: IntPoly, R):
    """Integral of an integer polynomial against the Poisson measure of
    parameter R, via the Touchard moments.  Exact when R is a Fraction."""
    if isinstance(R, Fraction):
        total = Fraction(0)
        for j, c in enumerate(poly.coeffs):
            if c:
                total += c * touchard(j).eval_fraction(R)
        return total
    R = mpfr(R)
    total = mpfr(0)
    for j, c in enumerate(poly.coeffs):
        if c:
            acc = mpfr(0)
            for b in reversed(touchard(j).coeffs):
                acc = acc * R + b
            total += c * acc
    return total


def farkas_witness(exponents, m: int) -> IntPoly:
    """(m - t) * prod (t - m_k): non-negative on {0..m} when the exponents
    below m form consecutive pairs; its Poisson integral turns negative
    exactly when the parameter exceeds the threshold factor."""
    f = IntPoly.from_coeffs([int(m), -1])
    for q in exponents:
        if q == m:
            continue
        f = f * IntPoly.from_coeffs([-int(q), 1])
    return f


def exact_feasibility_certificate(exponents, m: int, n: int, R0: Fraction):
    """Search for an exact non-negative integer-node quadrature at R0.

    Tries the given exponent support plus one extra node in 0..m; the
    coefficient at each node is the Poisson integral of its Lagrange basis
    polynomial, computed in exact rational arithmetic.  A solution with all
    coefficients >= 0 proves the threshold factor for (m, n) is at least R0.
    Returns (nodes, coefficients) or None.
    """
    base = sorted(int(e) for e in exponents)
    if len(base) != n or any(not 0 <= e <= m for e in base):
        raise DomainError("support must be n distinct exponents within 0..m")
    for extra in range(m + 1):
        if extra in base:
            continue
        nodes = sorted(base + [extra])
        alphas = []
        ok = True
        for k, xk in enumerate(nodes):
            num = IntPoly.from_coeffs([1])
            den = 1
            for j, xj in enumerate(nodes):
                if j != k:
                    num = num * IntPoly.from_coeffs([-xj, 1])
                    den *= xk - xj
            val = poisson_integral(num, R0) / den
            if val < 0:
                ok = False
                break
            alphas.append(val)
        if ok:
            return nodes, alphas
    return None


def random_grid_nonneg_poly(rng, m: int, n: int) -> IntPoly:
    """Random integer polynomial of degree <= n with f(j) >= 0 for j = 0..m
    (and typically negative somewhere beyond m)."""
    deg_q = (n - 1) // 2
    q = IntPoly.from_coeffs([rng.randrange(-5, 6) for _ in range(deg_q)] + [rng.randrange(1, 6)])
    if n % 2 == 1:
        # factor c (a - t) with a >= m keeps the grid values non-negative
        a = rng.randrange(m, 2 * m + 3)
        lin = IntPoly.from_coeffs([a, -1])
        f = q * q * lin
    else:
        f = q * q
    assert all(f.eval_int(j) >= 0 for j in range(m + 1))
    return f


# ---------------------------------------------------------------------------
# Positivity / contractivity demos
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetzlerSystem:
    """Linear system generator with non-negative off-diagonal entries."""

    matrix: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError("system matrix must be square")
        off = a - np.diag(np.diag(a))
        if off.min() < 0:
            raise DomainError("off-diagonal entries must be non-negative")
        object.__setattr__(self, "matrix", a)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def alpha(self) -> float:
        """Largest magnitude among non-positive diagonal entries."""
        d = np.diag(self.matrix)
        neg = d[d <= 0]
        return float(-neg.min()) if neg.size else 0.0

    @staticmethod
    def upwind(dimension: int, alpha: float = 1.0) -> "MetzlerSystem":
        a = -alpha * np.eye(dimension)
        for i in range(1, dimension):
            a[i, i - 1] = alpha
        return MetzlerSystem(a)


@dataclass(frozen=True)
class PositivityReport:
    passed: bool
    min_component: float
    steps: int
    trials: int
    step_size: float
    violation_found_above_bound: bool
    counterexample: tuple = ()

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "min_component": self.min_component,
            "steps": self.steps,
            "trials": self.trials,
            "step_size": self.step_size,
            "violation_found_above_bound": self.violation_found_above_bound,
            "counterexample": list(self.counterexample),
        }


def positivity_demo(m: int, n: int, sys: MetzlerSystem, steps: int = 100,
                    trials: int = 50, seed: int = 0,
                    result: ThresholdResult | None = None) -> PositivityReport:
    """Positivity preservation at the certified step size, plus an
    adversarial search just above it.

    The hard leg iterates u <- Phi(hA) u with h = R/alpha from random
    non-negative starts and requires every component to stay above the
    roundoff band -1e-18.  The second leg runs h = 1.05 R/alpha on the
    bidiagonal system with a_ii = -alpha and a_{i,i-1} = alpha and reports
    whether any start produced a negative component; that is evidence about
    the bound being active, not an assertion, since the step bound is a
    supremum over the whole Metzler class.
    """
    if result is None:
        from .optimizer import compute_threshold

        result = compute_threshold(m, n)
    phi = StabilityPolynomial.from_result(result)
    alpha = sys.alpha
    if alpha <= 0:
        raise DomainError("system has no decaying diagonal entry; any h works")
    rng = np.random.default_rng(seed)

    h = float(result.r_value) / alpha
    propagator = phi.matrix_value(h * sys.matrix)
    min_comp = 0.0
    worst = ()
    for _ in range(trials):
        u = rng.random(sys.dimension)
        for _ in range(steps):
            u = propagator @ u
            low = float(u.min())
            if low < min_comp:
                min_comp = low
                worst = tuple(u)
    passed = min_comp >= -1e-18

    adversary = MetzlerSystem.upwind(sys.dimension, alpha)
    h_over = 1.05 * h
    over_prop = phi.matrix_value(h_over * adversary.matrix)
    violation = False
    for _ in range(200):
        u = rng.random(sys.dimension)
        for _ in range(steps):
            u = over_prop @ u
            if u.min() < 0:
                violation = True
                break
        if violation:
            break
    return PositivityReport(
        passed=passed,
        min_component=min_comp,
        steps=steps,
        trials=trials,
        step_size=h,
        violation_found_above_bound=violation,
        counterexample=worst if not passed else (),
    )


@dataclass(frozen=True)
class ContractivityReport:
    passed: bool
    max_amplification: float
    step_size: float
    norm: str = "euclidean"
    restriction: str = "normal matrices only"

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "max_amplification": self.max_amplification,
            "step_size": self.step_size,
            "norm": self.norm,
            "restriction": self.restriction,
        }


def contractivity_demo(m: int, n: int, beta: float = 1.0, samples: int = 400,
                       result: ThresholdResult | None = None) -> ContractivityReport:
    """Euclidean contractivity for normal matrices under the circle
    condition: eigenvalues on the disk boundary segment [-2 beta, 0] give
    ||Phi(hA)|| = max |Phi(h lambda)|, which must stay at most 1 for
    h = R/beta.  Restricted to normal matrices; the general operator-norm
    case is out of scope."""
    if result is None:
        from .optimizer import compute_threshold

        result = compute_threshold(m, n)
    phi = StabilityPolynomial.from_result(result)
    h = float(result.r_value) / beta
    worst = 0.0
    for lam in np.linspace(-2 * beta, 0.0, samples):
        worst = max(worst, abs(phi.eval_float(h * float(lam))))
    return ContractivityReport(bool(worst <= 1 + 1e-12), float(worst), float(h))
