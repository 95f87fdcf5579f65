"""Brute-force reference computation of optimal threshold factors.

Enumerates every increasing integer node sequence, isolates all positive
real zeros of the node polynomial with exact Sturm chains, keeps the zeros
whose interpolation coefficients are non-negative (signs decided in exact
arithmetic), and returns the maximum.  Cost grows combinatorially; this
exists to validate the fast path on small instances, not to compete.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from gmpy2 import mpfr

from . import hp
from .errors import CapExceededError, DomainError
from .exact import (
    IntPoly,
    count_roots,
    isolate_positive_roots,
    poly_gcd,
    polar_h_poly,
    refine_enclosure,
    square_free_part,
    sturm_chain,
)
from .optimizer import ThresholdResult
from .spectrum import RootEnclosure

BRUTE_FORCE_MAX_M = 14
BRUTE_FORCE_MAX_N = 7


def _exact_sign_at_root(numer: IntPoly, h: IntPoly, lo: Fraction, hi: Fraction):
    """Sign of numer at the unique root of h inside (lo, hi], exactly.

    Returns (sign, lo, hi) where the interval may have been narrowed.  A
    shared factor between numer and h means the value is exactly zero.
    """
    if numer.is_zero:
        return 0, lo, hi
    if lo == hi:
        return numer.sign_at(lo), lo, hi
    shared = poly_gcd(h, numer)
    if shared.degree >= 1:
        chain = sturm_chain(shared)
        if count_roots(chain, lo, hi) > 0:
            return 0, lo, hi
    chain = sturm_chain(numer)
    while count_roots(chain, lo, hi) > 0:
        lo, hi = refine_enclosure(h, lo, hi, (hi - lo) / 4)
        if lo == hi:
            return numer.sign_at(lo), lo, hi
    mid = (lo + hi) / 2
    return numer.sign_at(mid), lo, hi


def _alpha_signs(nodes, m: int, h: IntPoly, lo: Fraction, hi: Fraction):
    """Exact signs of all interpolation coefficients at the root in (lo, hi].

    alpha_k = h(nodes with slot k set to m+1; R) / ((m+1-m_k) prod_{i != k}
    (m_i - m_k)); only signs are needed, and they are decided without any
    floating arithmetic.  Returns (signs, lo, hi) or None when some
    coefficient is negative.
    """
    signs = []
    for k, mk in enumerate(nodes):
        mod = list(nodes)
        mod[k] = m + 1
        numer = polar_h_poly(tuple(mod))
        den = m + 1 - mk
        for i, mi in enumerate(nodes):
            if i != k:
                den *= mi - mk
        s, lo, hi = _exact_sign_at_root(numer, h, lo, hi)
        s *= 1 if den > 0 else -1
        if s < 0:
            return None, lo, hi
        signs.append(s)
    return signs, lo, hi


def _order_candidates(cand, inc):
    """Exactly order two root candidates: +1 when cand's root is larger,
    -1 when smaller, 0 when both enclose the same algebraic number (ties
    happen whenever the optimum has zero coefficients).  Returns the order
    together with both candidates, whose enclosures may have been narrowed.
    """
    tiny = Fraction(1, 2**120)
    lo, hi, nodes, h, hsf, signs = cand
    blo, bhi, bnodes, bh, bhsf, bsigns = inc
    while True:
        if hi < blo:
            order = -1
            break
        if bhi < lo:
            order = 1
            break
        if hi - lo <= tiny and bhi - blo <= tiny:
            order = 0  # separation below any root gap at these degrees
            break
        if hi - lo > tiny:
            lo, hi = refine_enclosure(hsf, lo, hi, (hi - lo) / 4)
        if bhi - blo > tiny:
            blo, bhi = refine_enclosure(bhsf, blo, bhi, (bhi - blo) / 4)
    return order, (lo, hi, nodes, h, hsf, signs), (blo, bhi, bnodes, bh, bhsf, bsigns)


def brute_force_threshold(m: int, n: int, precision_bits: int = hp.DEFAULT_PRECISION_BITS) -> ThresholdResult:
    """Reference value of the optimal threshold factor by full enumeration."""
    if not (isinstance(m, int) and isinstance(n, int)) or not m >= n >= 1:
        raise DomainError(f"need integers m >= n >= 1, got m={m}, n={n}")
    if m > BRUTE_FORCE_MAX_M or n > BRUTE_FORCE_MAX_N:
        raise CapExceededError(
            f"brute force supports m <= {BRUTE_FORCE_MAX_M}, n <= {BRUTE_FORCE_MAX_N}; "
            f"requested (m={m}, n={n})"
        )

    best = None  # (lo, hi, nodes, h, hsf, signs)
    for nodes in combinations(range(m + 1), n):
        h = polar_h_poly(nodes)
        hsf = square_free_part(h)  # bisection needs simple-root sign changes
        for lo, hi in isolate_positive_roots(h):
            lo, hi = refine_enclosure(hsf, lo, hi, Fraction(1, 2**40))
            if best is not None and hi < best[0]:
                continue  # certainly below the incumbent
            signs, lo, hi = _alpha_signs(nodes, m, hsf, lo, hi)
            if signs is None:
                continue
            cand = (lo, hi, nodes, h, hsf, signs)
            if best is None:
                best = cand
                continue
            order, cand, best = _order_candidates(cand, best)
            if order > 0 or (order == 0 and cand[2] < best[2]):
                best = cand  # larger root, or tie broken by smaller sequence

    if best is None:
        raise DomainError(f"no feasible node sequence for (m={m}, n={n})")

    lo, hi, nodes, h, hsf, signs = best
    scale = max(1, m)
    lo, hi = refine_enclosure(hsf, lo, hi, Fraction(scale, 2**precision_bits))
    with hp.precision(precision_bits + 32):
        value = hp.from_fraction((lo + hi) / 2)
    enclosure = RootEnclosure(h.sign_normalized(), lo, hi, value)
    enclosure.assert_valid()

    support = tuple(mk for mk, s in zip(nodes, signs) if s > 0)
    with hp.precision(precision_bits):
        alphas = _alpha_values(nodes, m, value, signs)
    return ThresholdResult(
        m=m,
        n=n,
        exponents=support,
        alphas=tuple(a for a, s in zip(alphas, signs) if s > 0),
        defining_poly=h.sign_normalized(),
        enclosure=enclosure,
        r_value=value,
        configuration=None,
        derivation="brute_force",
        precision_bits=precision_bits,
    )


def _alpha_values(nodes, m: int, R, signs) -> list:
    vals = []
    for k, mk in enumerate(nodes):
        if signs[k] == 0:
            vals.append(mpfr(0))
            continue
        mod = list(nodes)
        mod[k] = m + 1
        numer_poly = polar_h_poly(tuple(mod))
        num = mpfr(0)
        for c in reversed(numer_poly.coeffs):
            num = num * R + c
        den = mpfr(m + 1 - mk)
        for i, mi in enumerate(nodes):
            if i != k:
                den *= mi - mk
        vals.append(num / den)
    return vals
