"""Integral spectra, spectral radii, the optimal-spectrum dichotomy, and
certified refinement of the threshold factor from its defining polynomial.

A p-configuration picks one zero of the current orthogonal polynomial at
each Christoffel stage; flooring that zero yields an integer pair (q, q+1)
that is annihilated before the next stage.  The resulting integer pairs form
the integral spectrum, and the mean of the fully transformed measure is the
spectral radius rho.  The threshold factor for degree m solves rho = m, and
is pinned down exactly as a root of an integer polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

from . import hp
from .errors import (
    BreakdownError,
    ConvergenceError,
    DegeneracyError,
    DomainError,
    InfeasibleConfigurationError,
)
from .exact import (
    IntPoly,
    certify_unique_root,
    polar_h_poly,
    refine_enclosure,
    touchard,
)
from .orthopoly import (
    charlier_recurrence,
    christoffel_pair_chain,
    kth_eigenvalue,
    laguerre_smallest_zero,
)

NEAR_INTEGER_GUARD = 1e-8
DICHOTOMY_CAP = 200


@dataclass(frozen=True)
class PConfiguration:
    """Zero-selection indices (n_1, ..., n_{p-1}) with 1 <= n_k <= p-k+1."""

    entries: tuple

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        p = len(entries) + 1
        for k, nk in enumerate(entries, start=1):
            if not 1 <= nk <= p - k + 1:
                raise DomainError(
                    f"configuration entry n_{k}={nk} outside 1..{p - k + 1}"
                )

    @property
    def p(self) -> int:
        return len(self.entries) + 1

    @staticmethod
    def ones(p: int) -> "PConfiguration":
        return PConfiguration((1,) * (p - 1))


@dataclass(frozen=True)
class IntegralSpectrum:
    """Integer exponent pairs (q, q+1), in the order they were produced."""

    pairs: tuple

    def __post_init__(self):
        pairs = tuple((int(a), int(b)) for a, b in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        flat = [x for pair in pairs for x in pair]
        if len(set(flat)) != len(flat):
            raise DegeneracyError(f"colliding exponent pairs: {pairs}")
        for a, b in pairs:
            if b != a + 1 or a < 0:
                raise DomainError(f"invalid exponent pair ({a}, {b})")

    @property
    def exponents(self) -> tuple:
        return tuple(sorted(x for pair in self.pairs for x in pair))

    @property
    def chronological(self) -> tuple:
        return tuple(x for pair in self.pairs for x in pair)

    def __len__(self) -> int:
        return 2 * len(self.pairs)


@dataclass(frozen=True)
class RootEnclosure:
    """Certified enclosure of one real zero of an integer polynomial."""

    poly: IntPoly
    lo: Fraction
    hi: Fraction
    value: mpfr

    def assert_valid(self) -> None:
        if self.lo == self.hi:
            if self.poly.sign_at(self.lo) != 0:
                raise DomainError("degenerate enclosure endpoint is not a root")
        elif self.poly.sign_at(self.lo) * self.poly.sign_at(self.hi) >= 0:
            raise DomainError("enclosure endpoints do not bracket a sign change")
        if not self.lo <= hp.to_fraction(self.value) <= self.hi:
            raise DomainError("enclosure value outside [lo, hi]")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    def guaranteed_decimals(self) -> int:
        """Fractional decimal digits safe to print (large when exact)."""
        if self.exact:
            return 10**6
        w = self.width
        return max(0, -math.ceil(math.log10(w)) - 1)

    def to_json(self) -> dict:
        return {
            "poly": self.poly.to_json(),
            "lo": f"{self.lo.numerator}/{self.lo.denominator}",
            "hi": f"{self.hi.numerator}/{self.hi.denominator}",
            "value": hp.decimal_str(self.value),
        }


class _NearIntegerRetry(Exception):
    """Internal: a stage zero sits inside the near-integer guard band."""


def _floor_with_guard(lam, allow_exact: bool):
    nearest = int(gmpy2.floor(lam + mpfr(1) / 2))
    if abs(lam - nearest) < NEAR_INTEGER_GUARD:
        if not allow_exact:
            raise _NearIntegerRetry
        # Floor of an exact integer is the integer itself.
        return nearest, True
    return int(gmpy2.floor(lam)), False


@dataclass(frozen=True)
class _Probe:
    """One (spectrum, radius) evaluation.  ``valid`` is False when floors
    collided: the pair multiset still defines an admissible annihilator whose
    mean can steer the dichotomy, but it is not an integral spectrum."""

    pairs: tuple
    rho: mpfr
    flags: tuple
    valid: bool

    def matches(self, other: "_Probe") -> bool:
        return self.valid and other.valid and self.pairs == other.pairs


def _spectrum_once(cfg: PConfiguration, R, p: int, allow_exact: bool) -> _Probe:
    """One spectrum/radius evaluation at the current working precision."""
    count = 2 * p + 6
    rc = charlier_recurrence(R, count)
    pairs = []
    used = set()
    flags = []
    valid = True
    for stage, nk in enumerate(cfg.entries, start=1):
        size = p - stage + 1
        lam = kth_eigenvalue(rc, size, nk)
        m1, guarded = _floor_with_guard(lam, allow_exact)
        if m1 < 0:
            raise DegeneracyError(f"negative exponent floor at stage {stage}")
        if m1 in used or m1 + 1 in used:
            valid = False
        if guarded:
            flags.append(f"near_integer_floor:stage{stage}:{m1}")
        used.update((m1, m1 + 1))
        pairs.append((m1, m1 + 1))
        rc = christoffel_pair_chain(
            rc, (m1,), exact_stages={1} if guarded else frozenset()
        )
    return _Probe(tuple(pairs), rc.b[0], tuple(flags), valid)


def _spectrum_eval(cfg: PConfiguration, R, p: int) -> _Probe:
    """Spectrum/radius with the precision-escalation guard: doubles the
    working precision while a stage zero is within 1e-8 of an integer, and
    at the cap treats the zero as that integer (flagged)."""
    prec0 = hp.get_precision()
    cap = max(prec0, hp.MAX_PRECISION_BITS)
    prec = prec0
    while True:
        with hp.precision(prec):
            try:
                return _spectrum_once(cfg, mpfr(R), p, allow_exact=prec >= cap)
            except _NearIntegerRetry:
                prec = min(prec * 2, cap)


def integral_spectrum(cfg: PConfiguration, R, p: int) -> IntegralSpectrum:
    """Integer exponent pairs selected by ``cfg`` at parameter R."""
    _require_p(cfg, p)
    if p == 1:
        return IntegralSpectrum(())
    probe = _spectrum_eval(cfg, R, p)
    if not probe.valid:
        raise DegeneracyError(f"colliding exponent pairs {probe.pairs} at R={R}")
    return IntegralSpectrum(probe.pairs)


def spectral_radius(M: IntegralSpectrum, R) -> mpfr:
    """Mean of the measure with every spectrum pair annihilated: the zero of
    its degree-1 orthogonal polynomial.  Falls back to the exact moment
    ratio if the coefficient chain breaks down."""
    R = mpfr(R)
    if not R > 0:
        raise DomainError(f"parameter must be positive, got {R}")
    if not M.pairs:
        return R
    count = 2 * len(M.pairs) + 4
    try:
        rc = christoffel_pair_chain(
            charlier_recurrence(R, count), tuple(a for a, _ in M.pairs)
        )
        return rc.b[0]
    except BreakdownError:
        with hp.precision(hp.get_precision() * 2):
            return _radius_via_moments(M.exponents, mpfr(R))


def _bell_at(j: int, R) -> mpfr:
    acc = mpfr(0)
    for c in reversed(touchard(j).coeffs):
        acc = acc * R + c
    return acc


def _radius_via_moments(exponents, R) -> mpfr:
    """Exact-moment evaluation of the transformed mean:
    integral of t P / integral of P against the base measure,
    P = prod (t - m_j).  Subject to cancellation, so callers escalate."""
    poly = IntPoly.from_coeffs([1])
    for m_j in exponents:
        poly = poly * IntPoly.from_coeffs([-int(m_j), 1])
    den = mpfr(0)
    num = mpfr(0)
    for j, c in enumerate(poly.coeffs):
        if c:
            den += c * _bell_at(j, R)
            num += c * _bell_at(j + 1, R)
    return num / den


def _require_p(cfg: PConfiguration, p: int) -> None:
    if cfg.p != p:
        raise DomainError(f"configuration has p={cfg.p}, expected {p}")


@dataclass(frozen=True)
class SpectrumBracket:
    """Outcome of the dichotomy: a stabilized spectrum and an R-bracket with
    the degree target m between the endpoint spectral radii."""

    spectrum: IntegralSpectrum
    r_lo: mpfr
    r_hi: mpfr
    flags: tuple = ()


def _probe(cfg, R, p, lo_cap, hi_cap) -> _Probe:
    """Evaluate (M, rho) at R, nudging the probe point slightly inside the
    bracket if an exact qd breakdown makes R itself unusable."""
    step = (mpfr(hi_cap) - mpfr(lo_cap)) * mpfr(2) ** -44
    x = mpfr(R)
    for attempt in range(5):
        try:
            return _spectrum_eval(cfg, x, p)
        except BreakdownError:
            x = x + step if x + step < hi_cap else x - step
    raise BreakdownError(0, 0)


def optimal_spectrum(cfg: PConfiguration, m: int, p: int, r_min=None, r_max=None,
                     cap: int = DICHOTOMY_CAP) -> SpectrumBracket:
    """Bisect on R until the integral spectrum is the same, and collision
    free, at both bracket endpoints while rho(R_lo) <= m <= rho(R_hi).

    Brackets default to the Laguerre smallest-zero bounds for degree m; a
    warm-start lower bound may be passed through ``r_min`` (it must be a
    certified lower bound for the answer).  Probes whose floors collide do
    not define an integral spectrum, but their pair multiset is still an
    admissible annihilator with a strictly increasing mean, so such probes
    steer the bisection and can never terminate it.  Raises ConvergenceError
    at the iteration cap and InfeasibleConfigurationError when the radius
    cannot reach m inside the bracket.
    """
    _require_p(cfg, p)
    if m < 2 * p - 1:
        raise DomainError(f"need m >= 2p-1, got m={m}, p={p}")
    if p == 1:
        return SpectrumBracket(IntegralSpectrum(()), mpfr(m), mpfr(m))

    r_lo = mpfr(r_min) if r_min is not None else laguerre_smallest_zero(p, m - 2 * p + 1)
    r_hi = mpfr(r_max) if r_max is not None else laguerre_smallest_zero(p, m - p)
    flags: set = set()

    probe_lo = _probe(cfg, r_lo, p, r_lo, r_hi)
    probe_hi = _probe(cfg, r_hi, p, r_lo, r_hi)
    flags.update(probe_lo.flags)
    flags.update(probe_hi.flags)

    slack = mpfr(2) ** (-(hp.get_precision() // 2)) * max(1, m)
    if probe_lo.rho > m + slack:
        raise InfeasibleConfigurationError(
            f"radius {probe_lo.rho} already above {m} at the lower bound"
        )
    if probe_hi.rho < m - slack:
        raise InfeasibleConfigurationError(
            f"radius {probe_hi.rho} below {m} at the upper bound"
        )

    iterations = 0
    while not probe_lo.matches(probe_hi):
        if iterations >= cap:
            raise ConvergenceError(
                f"spectrum did not stabilize in {cap} bisection steps",
                bracket=(r_lo, r_hi),
            )
        iterations += 1
        mid = (r_lo + r_hi) / 2
        probe_mid = _probe(cfg, mid, p, r_lo, r_hi)
        flags.update(probe_mid.flags)
        if probe_mid.rho > m:
            r_hi, probe_hi = mid, probe_mid
        else:
            r_lo, probe_lo = mid, probe_mid
    return SpectrumBracket(
        IntegralSpectrum(probe_lo.pairs), r_lo, r_hi, tuple(sorted(flags))
    )


def refine_root(nodes, bracket, prec_bits: int | None = None) -> RootEnclosure:
    """Certified enclosure of the defining-polynomial zero in the bracket.

    ``nodes`` are the 2p-2 spectrum integers plus the degree m; the bracket
    endpoints are converted outward to exact rationals, the root is certified
    unique by a Sturm count, then narrowed by dyadic bisection to width
    2^-prec_bits * max(1, R)."""
    prec = prec_bits if prec_bits is not None else hp.get_precision()
    h = polar_h_poly(tuple(nodes)).sign_normalized()
    lo, hi = bracket
    lo = lo if isinstance(lo, Fraction) else hp.to_fraction(mpfr(lo))
    hi = hi if isinstance(hi, Fraction) else hp.to_fraction(mpfr(hi))
    if lo > hi:
        raise DomainError(f"empty bracket [{lo}, {hi}]")
    scale = max(1, math.ceil(hi))
    if lo < hi:
        pad = Fraction(scale, 2 ** (prec // 2))
        lo = max(Fraction(0), lo - pad)
        hi = hi + pad
    certify_unique_root(h, lo, hi)
    lo, hi = refine_enclosure(h, lo, hi, Fraction(scale, 2**prec))
    # The enclosure width matches the working ulp, so the midpoint needs a
    # few guard bits to stay strictly inside [lo, hi] after rounding.
    with hp.precision(prec + 32):
        value = hp.from_fraction((lo + hi) / 2)
    enc = RootEnclosure(h, lo, hi, value)
    enc.assert_valid()
    return enc
