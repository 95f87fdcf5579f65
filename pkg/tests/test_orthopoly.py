"""Tests for recurrences, Christoffel chains, eigen-solves, quadrature."""

import random
from fractions import Fraction

import gmpy2
import pytest
from gmpy2 import mpfr

from thresholdopt import hp
from thresholdopt.errors import BreakdownError, DomainError
from thresholdopt.exact import touchard
from thresholdopt.orthopoly import (
    RecurrenceCoeffs,
    charlier_recurrence,
    christoffel_chain,
    christoffel_pair_chain,
    gauss_quadrature,
    kth_eigenvalue,
    laguerre_smallest_zero,
    tridiag_eigenvalues,
)


@pytest.fixture(autouse=True)
def _prec100():
    with hp.precision(hp.DEFAULT_PRECISION_BITS):
        yield


def bell_value(j, R):
    """Moment of the Poisson measure: exact Touchard value at R."""
    acc = mpfr(0)
    for c in reversed(touchard(j).coeffs):
        acc = acc * R + c
    return acc


def test_charlier_recurrence_values():
    rc = charlier_recurrence(5, 3)
    assert rc.b == (5, 6, 7)
    assert rc.g == (0, 5, 10)
    assert kth_eigenvalue(rc, 1, 1) == 5  # zero of t - R


def test_charlier_rejects_nonpositive_R():
    with pytest.raises(DomainError):
        charlier_recurrence(0, 3)
    with pytest.raises(DomainError):
        charlier_recurrence(-2, 3)


def test_christoffel_empty_chain_is_identity():
    rc = charlier_recurrence(5, 6)
    out = christoffel_chain(rc, ())
    assert out.b == rc.b and out.g == rc.g


def test_christoffel_degree_one_zero_matches_moment_ratio():
    # Annihilator (t-1)(t-2) at R=5: the transformed measure's mean is
    # (B3 - 3 B2 + 2 B1) / (B2 - 3 B1 + 2) = 125/17.
    rc = charlier_recurrence(5, 8)
    out = christoffel_pair_chain(rc, (1,))
    expected = mpfr(125) / 17
    assert abs(out.b[0] - expected) < mpfr(2) ** -80


def test_christoffel_full_chain_example():
    # Six shifts (1,2,4,5,8,9) at R=5 drive the mean to about 12.4539.
    rc = charlier_recurrence(5, 12)
    out = christoffel_pair_chain(rc, (1, 4, 8))
    assert abs(out.b[0] - mpfr("12.4539")) < 5e-4


def test_christoffel_breakdown_detected():
    # At R=12 the shift 9 is an exact eigenvalue of the leading 2x2 block.
    rc = charlier_recurrence(12, 8)
    with pytest.raises(BreakdownError) as exc:
        christoffel_chain(rc, (9,))
    assert exc.value.stage == 1


def test_christoffel_pair_positivity():
    # After a full (q, q+1) pair the transformed measure is positive again.
    rc = charlier_recurrence(5, 10)
    out = christoffel_chain(rc, (4, 5))
    assert all(g > 0 for g in out.g[1:6])


def test_tridiag_quadratic_closed_form():
    # Degree-2 zeros solve t^2 - (2R+1) t + R^2 = 0.
    for R in (2, 5, mpfr("7.25"), 40):
        rc = charlier_recurrence(R, 4)
        lo, hi = tridiag_eigenvalues(rc, 2)
        R = mpfr(R)
        disc = gmpy2.sqrt(4 * R + 1)
        assert abs(lo - ((2 * R + 1) - disc) / 2) < 1e-25
        assert abs(hi - ((2 * R + 1) + disc) / 2) < 1e-25


def test_tridiag_integer_zero_case():
    # R = m - sqrt(m) with m = 9 gives zeros exactly at 4 and 9.
    rc = charlier_recurrence(6, 4)
    z1, z2 = tridiag_eigenvalues(rc, 2)
    assert abs(z1 - 4) < 1e-25
    assert abs(z2 - 9) < 1e-25


def test_tridiag_rejects_negative_g():
    rc = RecurrenceCoeffs((mpfr(1), mpfr(2)), (mpfr(0), mpfr(-1)))
    with pytest.raises(DomainError):
        tridiag_eigenvalues(rc, 2)


def test_eigenvalue_interlacing():
    rng = random.Random(7)
    for _ in range(10):
        R = mpfr(rng.uniform(1.0, 30.0))
        rc = charlier_recurrence(R, 8)
        for n in range(2, 6):
            inner = tridiag_eigenvalues(rc, n - 1)
            outer = tridiag_eigenvalues(rc, n)
            for k in range(n - 1):
                assert outer[k] < inner[k] < outer[k + 1]


def test_interlacing_survives_christoffel_stage():
    rc = christoffel_chain(charlier_recurrence(9, 12), (2, 3))
    inner = tridiag_eigenvalues(rc, 2)
    outer = tridiag_eigenvalues(rc, 3)
    assert outer[0] < inner[0] < outer[1] < inner[1] < outer[2]


def test_gauss_single_point():
    rc = charlier_recurrence(5, 2)
    q = gauss_quadrature(rc, 1, 1)
    assert abs(q.nodes[0] - 5) < 1e-25
    assert abs(q.weights[0] - 1) < 1e-25


def test_gauss_weights_match_local_structure():
    # At R = 6 (m = 9) the two-point weights are sqrt(m)/(2 sqrt(m) - 1)
    # and (sqrt(m)-1)/(2 sqrt(m) - 1), i.e. 3/5 and 2/5.
    rc = charlier_recurrence(6, 4)
    q = gauss_quadrature(rc, 2, 1)
    assert abs(q.weights[0] - Fraction(3, 5)) < 1e-25
    assert abs(q.weights[1] - Fraction(2, 5)) < 1e-25


def test_gauss_moment_exactness():
    for R, p in ((5, 2), (mpfr("3.75"), 3), (17, 4)):
        rc = charlier_recurrence(R, p + 1)
        q = gauss_quadrature(rc, p, 1)
        for j in range(2 * p):
            s = sum(w * x**j for w, x in zip(q.weights, q.nodes))
            expect = bell_value(j, mpfr(R))
            assert abs(s - expect) < mpfr(2) ** -60 * max(1, abs(expect))


def test_transformed_gauss_integrates_like_moments():
    # Two-node rule of the (t-q)(t-q-1)-transformed measure must integrate
    # cubics the same way the raw moment expansion does.
    rng = random.Random(3)
    for _ in range(6):
        R = mpfr(rng.uniform(2.0, 20.0))
        shift = rng.randrange(0, int(R) + 2)
        om = (shift, shift + 1)
        rc = charlier_recurrence(R, 10)
        chained = christoffel_chain(rc, om)
        # mass = integral of the annihilator against the base measure
        c = [om[0] * om[1], -(om[0] + om[1]), 1]
        mass = sum(cj * bell_value(j, R) for j, cj in enumerate(c))
        quad = gauss_quadrature(chained, 2, mass)
        coeffs = [rng.randrange(-5, 6) for _ in range(4)]
        via_quad = sum(
            w * sum(a * x**i for i, a in enumerate(coeffs))
            for w, x in zip(quad.weights, quad.nodes)
        )
        # same integral through the base moments of P * Omega
        total = mpfr(0)
        for i, a in enumerate(coeffs):
            for j, cj in enumerate(c):
                total += a * cj * bell_value(i + j, R)
        assert abs(via_quad - total) < 1e-3 * max(1, abs(total))


def test_zero_monotonicity_in_R():
    # Zeros of the transformed orthogonal polynomials strictly increase in R.
    rng = random.Random(11)
    for _ in range(8):
        R = mpfr(rng.uniform(2.0, 25.0))
        dR = mpfr(rng.uniform(0.05, 0.5))
        q = rng.randrange(0, 6)
        rc1 = christoffel_chain(charlier_recurrence(R, 10), (q, q + 1))
        rc2 = christoffel_chain(charlier_recurrence(R + dR, 10), (q, q + 1))
        for n in (1, 2, 3):
            z1 = tridiag_eigenvalues(rc1, n)
            z2 = tridiag_eigenvalues(rc2, n)
            assert all(a < b for a, b in zip(z1, z2))


def test_laguerre_degree_one():
    assert abs(laguerre_smallest_zero(1, 15) - 16) < 1e-25
    assert abs(laguerre_smallest_zero(1, mpfr("2.5")) - mpfr("3.5")) < 1e-25


def test_laguerre_table_values():
    assert abs(laguerre_smallest_zero(3, 15) - mpfr("11.0108")) < 5e-4
    assert abs(laguerre_smallest_zero(3, 17) - mpfr("12.6118")) < 5e-4


def test_laguerre_monotone_in_gamma():
    prev = laguerre_smallest_zero(4, 2)
    for gamma in (3, 5, 10, mpfr("10.5"), 20):
        cur = laguerre_smallest_zero(4, gamma)
        assert cur > prev
        prev = cur


def test_laguerre_rejects_gamma_at_most_minus_one():
    with pytest.raises(DomainError):
        laguerre_smallest_zero(2, -1)
