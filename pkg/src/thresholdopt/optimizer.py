"""Top-level computation of optimal threshold factors.

For odd order n = 2p-1 the search walks the finite set of p-configurations:
each candidate yields a stabilized integral spectrum and an R-bracket, the
exact defining polynomial is refined to a certified enclosure, and the
interpolation coefficients are checked for non-negativity.  The first
configuration whose coefficients are all non-negative is the optimum.  Even
orders reduce to the odd case one degree down; order 1 is closed-form.
"""

from __future__ import annotations

import concurrent.futures
import random
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import product

from gmpy2 import mpfr

from . import hp
from .errors import (
    AmbiguityError,
    BracketError,
    BreakdownError,
    CompletenessError,
    ConvergenceError,
    DegeneracyError,
    DomainError,
    InfeasibleConfigurationError,
)
from .exact import IntPoly
from .orthopoly import Quadrature, charlier_recurrence, gauss_quadrature, laguerre_smallest_zero
from .spectrum import (
    IntegralSpectrum,
    PConfiguration,
    RootEnclosure,
    optimal_spectrum,
    refine_root,
)

# Coefficient acceptance bands: values in [-ACCEPT_TOL, 0) are roundoff and
# clamp to zero; values below REJECT_TOL are genuinely negative; the band in
# between is recomputed at doubled precision instead of being trusted.
ACCEPT_TOL = mpfr("1e-25")
REJECT_TOL = mpfr("1e-10")

_CONFIG_FAILURES = (
    BreakdownError,
    DegeneracyError,
    ConvergenceError,
    BracketError,
    AmbiguityError,
    InfeasibleConfigurationError,
)


@dataclass(frozen=True)
class ThresholdResult:
    """Optimal threshold factor with its certified algebraic description."""

    m: int
    n: int
    exponents: tuple
    alphas: tuple
    defining_poly: IntPoly
    enclosure: RootEnclosure
    r_value: mpfr
    configuration: PConfiguration | None
    derivation: str
    precision_bits: int
    flags: tuple = ()

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "exponents": list(self.exponents),
            "alphas": [hp.decimal_str(a) for a in self.alphas],
            "defining_poly": self.defining_poly.to_json(),
            "enclosure": self.enclosure.to_json(),
            "r_value": hp.decimal_str(self.r_value),
            "configuration": list(self.configuration.entries)
            if self.configuration is not None
            else None,
            "derivation": self.derivation,
            "precision_bits": self.precision_bits,
            "flags": list(self.flags),
        }


def configuration_iter(p: int, order: str = "lex", seed=None):
    """All p-configurations, (1,...,1) first.

    The remaining configurations follow in lexicographic order, or in a
    seeded random shuffle when order == "random".
    """
    if p < 1:
        raise DomainError("p must be at least 1")
    first = PConfiguration.ones(p)
    yield first
    ranges = [range(1, p - k + 2) for k in range(1, p)]
    rest = [c for c in product(*ranges) if c != first.entries]
    if order == "random":
        random.Random(seed).shuffle(rest)
    elif order != "lex":
        raise DomainError(f"unknown configuration order {order!r}")
    for entries in rest:
        yield PConfiguration(entries)


def compute_alphas(M: IntegralSpectrum, m: int, R, quad: Quadrature) -> list:
    """Interpolation coefficients of the optimal polynomial candidate.

    With nodes (m_1 < ... < m_{2p-2}, m, m+1) and the p-point Gauss rule
    (lambda_i, omega_i) of the base measure at R,

        alpha_k = sum_i omega_i prod_{j != k} (m_j - lambda_i) / (m_j - m_k),

    for k = 1..2p-1 (the slot at m+1 is the one dropped).  Negative values
    simply mean "reject this configuration".
    """
    ms = list(M.exponents) + [int(m), int(m) + 1]
    alphas = []
    for k in range(len(ms) - 1):
        den = mpfr(1)
        for j, mj in enumerate(ms):
            if j != k:
                den *= mj - ms[k]
        num = mpfr(0)
        for om, lam in zip(quad.weights, quad.nodes):
            term = om
            for j, mj in enumerate(ms):
                if j != k:
                    term *= mj - lam
            num += term
        alphas.append(num / den)
    return alphas


def _alpha_status(alphas) -> str:
    worst = min(alphas)
    if worst >= -ACCEPT_TOL:
        return "accept"
    if worst <= -REJECT_TOL:
        return "reject"
    return "gray"


def _clamped(alphas) -> tuple:
    return tuple(mpfr(0) if a < 0 else a for a in alphas)


def _finish_candidate(M: IntegralSpectrum, m: int, p: int, bracket, prec: int):
    """Refine the root and compute coefficients at precision ``prec``."""
    with hp.precision(prec):
        enc = refine_root(M.exponents + (m,), bracket, prec)
        quad = gauss_quadrature(charlier_recurrence(enc.value, p + 1), p, 1)
        alphas = compute_alphas(M, m, enc.value, quad)
    return enc, alphas


def _try_configuration(cfg: PConfiguration, m: int, p: int, bounds, prec: int):
    """Full pipeline for one configuration; returns a result dict or None
    when the coefficient check rejects it."""
    with hp.precision(prec):
        br = optimal_spectrum(cfg, m, p, r_min=bounds[0], r_max=bounds[1])
        if br.spectrum.pairs and br.spectrum.exponents[-1] >= m:
            raise DegeneracyError(
                f"spectrum {br.spectrum.exponents} reaches the degree {m}"
            )
    flags = set(br.flags)
    work = prec
    while True:
        enc, alphas = _finish_candidate(br.spectrum, m, p, (br.r_lo, br.r_hi), work)
        status = _alpha_status(alphas)
        if status == "gray" and work < hp.MAX_PRECISION_BITS:
            work = min(2 * work, hp.MAX_PRECISION_BITS)
            flags.add("alpha_gray_band_escalation")
            continue
        break
    if status != "accept":
        return None
    return {
        "spectrum": br.spectrum,
        "enclosure": enc,
        "alphas": _clamped(alphas),
        "configuration": cfg,
        "precision_bits": work,
        "flags": tuple(sorted(flags)),
    }


def _search_odd(m: int, p: int, precision_bits: int, config_order: str, seed,
                warm_start, jobs: int):
    with hp.precision(precision_bits):
        lower = laguerre_smallest_zero(p, m - 2 * p + 1)
        upper = laguerre_smallest_zero(p, m - p)
        if warm_start is not None:
            ws = hp.from_fraction(Fraction(warm_start)) if isinstance(warm_start, Fraction) else mpfr(warm_start)
            if ws > lower:
                lower = ws
    bounds = (lower, upper)
    configs = configuration_iter(p, config_order, seed)

    if jobs > 1 and p >= 3:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            it = iter(configs)
            while True:
                batch = []
                for cfg in it:
                    batch.append(cfg)
                    if len(batch) == jobs:
                        break
                if not batch:
                    break
                results = list(
                    pool.map(
                        _attempt_remote,
                        [(cfg, m, p, bounds, precision_bits) for cfg in batch],
                    )
                )
                for out in results:  # deterministic: first success in order
                    if out is not None:
                        return out
        raise CompletenessError(
            f"no configuration accepted for m={m}, n={2 * p - 1}"
        )

    for cfg in configs:
        try:
            out = _try_configuration(cfg, m, p, bounds, precision_bits)
        except _CONFIG_FAILURES:
            continue
        if out is not None:
            return out
    raise CompletenessError(f"no configuration accepted for m={m}, n={2 * p - 1}")


def _attempt_remote(args):
    cfg, m, p, bounds, prec = args
    try:
        return _try_configuration(cfg, m, p, bounds, prec)
    except _CONFIG_FAILURES:
        return None


def compute_threshold(m: int, n: int, precision_bits: int = hp.DEFAULT_PRECISION_BITS,
                      config_order: str = "lex", seed=None, warm_start=None,
                      jobs: int = 1) -> ThresholdResult:
    """Optimal threshold factor R(m, n) and its certified description.

    Order 1 is exact (R = m); even orders reduce to (m-1, n-1) and are
    rebuilt by term-wise integration; odd orders run the configuration
    search.  ``warm_start`` may carry a certified lower bound on the answer
    (e.g. the previous value in an m-sweep).
    """
    if not (isinstance(m, int) and isinstance(n, int)):
        raise DomainError("m and n must be integers")
    if not m >= n >= 1:
        raise DomainError(f"need m >= n >= 1, got m={m}, n={n}")

    if n == 1:
        with hp.precision(precision_bits):
            poly = IntPoly.from_coeffs([-m, 1])
            enc = RootEnclosure(poly, Fraction(m), Fraction(m), mpfr(m))
            return ThresholdResult(
                m=m, n=1,
                exponents=(m,),
                alphas=(mpfr(1),),
                defining_poly=poly,
                enclosure=enc,
                r_value=mpfr(m),
                configuration=PConfiguration(()),
                derivation="closed_form",
                precision_bits=precision_bits,
            )

    if n % 2 == 0:
        odd = compute_threshold(m - 1, n - 1, precision_bits, config_order,
                                seed, warm_start, jobs)
        return build_phi_even(odd)

    p = (n + 1) // 2
    out = _search_odd(m, p, precision_bits, config_order, seed, warm_start, jobs)
    M = out["spectrum"]
    enc = out["enclosure"]
    return ThresholdResult(
        m=m, n=n,
        exponents=M.exponents + (m,),
        alphas=out["alphas"],
        defining_poly=enc.poly,
        enclosure=enc,
        r_value=enc.value,
        configuration=out["configuration"],
        derivation="direct",
        precision_bits=out["precision_bits"],
        flags=out["flags"],
    )


def build_phi_even(result_odd: ThresholdResult) -> ThresholdResult:
    """Lift an odd-order optimum one degree and one order up.

    Term-wise integration sends alpha (1 + x/R)^k to alpha R/(k+1) times
    (1 + x/R)^(k+1), plus the constant that restores the value 1 at x = 0;
    the threshold factor, defining polynomial, and enclosure are unchanged.
    """
    if result_odd.n % 2 != 1:
        raise DomainError("even lift starts from an odd-order result")
    with hp.precision(result_odd.precision_bits):
        R = result_odd.r_value
        shifted = []
        total = mpfr(0)
        for e, a in zip(result_odd.exponents, result_odd.alphas):
            coeff = a * R / (e + 1)
            shifted.append(coeff)
            total += coeff
        alphas = (1 - total,) + tuple(shifted)
    exponents = (0,) + tuple(e + 1 for e in result_odd.exponents)
    return replace(
        result_odd,
        m=result_odd.m + 1,
        n=result_odd.n + 1,
        exponents=exponents,
        alphas=alphas,
        derivation="even_reduced",
    )
