"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Criterion 1 (reference-table reproduction) is expected RED on eleven cells
of the order-11 column for m >= 145: exact-rational Farkas certificates
(see test_criterion_1_defect_certificates) prove the published values there
are infeasible, so no correct implementation can match them within 5e-4.
Everything else must be green.
"""

import random
import time
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

from thresholdopt import hp
from thresholdopt.exact import falling_factorial
from thresholdopt.optimizer import compute_threshold
from thresholdopt.oracle import brute_force_threshold
from thresholdopt.orthopoly import (
    charlier_recurrence,
    laguerre_smallest_zero,
    tridiag_eigenvalues,
)
from thresholdopt.spectrum import PConfiguration, integral_spectrum, spectral_radius
from thresholdopt.validate import (
    exact_feasibility_certificate,
    MetzlerSystem,
    farkas_witness,
    poisson_integral,
    positivity_demo,
    random_grid_nonneg_poly,
)

# Reference values of the optimal threshold factors (4 printed decimals) for
# n = 5, 7, 9, 11 and m = 5..200 in steps of 5.
TABLE2 = {
    5: {5: "1"},
    10: {5: "4.8308", 7: "3.3733", 9: "2"},
    15: {5: "8.5757", 7: "6.8035", 9: "5.3363", 11: "4.1000"},
    20: {5: "12.5512", 7: "10.3955", 9: "8.6207", 11: "7.1968"},
    25: {5: "16.6426", 7: "14.1458", 9: "12.1181", 11: "10.4401"},
    30: {5: "20.8355", 7: "18.0383", 9: "15.7996", 11: "13.8617"},
    35: {5: "25.0687", 7: "21.9991", 9: "19.5069", 11: "17.3889"},
    40: {5: "29.3824", 7: "26.0713", 9: "23.3347", 11: "21.0411"},
    45: {5: "33.6959", 7: "30.1565", 9: "27.2467", 11: "24.7358"},
    50: {5: "38.0717", 7: "34.3177", 9: "31.1936", 11: "28.5616"},
    55: {5: "42.4783", 7: "38.5138", 9: "35.2269", 11: "32.3888"},
    60: {5: "46.9045", 7: "42.7402", 9: "39.2661", 11: "36.3101"},
    65: {5: "51.3742", 7: "47.0065", 9: "43.3863", 11: "40.2498"},
    70: {5: "55.8354", 7: "51.2895", 9: "47.4942", 11: "44.2407"},
    75: {5: "60.3433", 7: "55.6066", 9: "51.6671", 11: "48.2524"},
    80: {5: "64.8353", 7: "59.9393", 9: "55.8486", 11: "52.3018"},
    85: {5: "69.3699", 7: "64.2863", 9: "60.0554", 11: "56.4079"},
    90: {5: "73.8924", 7: "68.6808", 9: "64.3111", 11: "60.5126"},
    95: {5: "78.4477", 7: "73.0643", 9: "68.5542", 11: "64.6361"},
    100: {5: "83.0020", 7: "77.4830", 9: "72.8405", 11: "68.7990"},
    105: {5: "87.5746", 7: "81.8947", 9: "77.1210", 11: "72.9860"},
    110: {5: "92.1624", 7: "86.3262", 9: "81.4319", 11: "77.1740"},
    115: {5: "96.7503", 7: "90.7940", 9: "85.7766", 11: "81.3905"},
    120: {5: "101.3649", 7: "95.2447", 9: "90.0975", 11: "85.6207"},
    125: {5: "105.9591", 7: "99.7148", 9: "94.4558", 11: "89.8748"},
    130: {5: "110.5757", 7: "104.2063", 9: "98.8407", 11: "94.1471"},
    135: {5: "115.2069", 7: "108.6953", 9: "103.2033", 11: "98.4163"},
    140: {5: "119.8350", 7: "113.1950", 9: "107.5950", 11: "102.7054"},
    145: {5: "124.4725", 7: "117.7118", 9: "111.9993", 11: "107.0167"},
    150: {5: "129.1137", 7: "122.2256", 9: "116.4054", 11: "111.3141"},
    155: {5: "133.7623", 7: "126.7511", 9: "120.8271", 11: "115.6493"},
    160: {5: "138.4238", 7: "131.2958", 9: "125.2615", 11: "119.9974"},
    165: {5: "143.0776", 7: "135.8267", 9: "129.7071", 11: "124.3378"},
    170: {5: "147.7428", 7: "140.3765", 9: "134.1436", 11: "128.6815"},
    175: {5: "152.4202", 7: "144.9467", 9: "138.6046", 11: "133.0649"},
    180: {5: "157.0889", 7: "149.4953", 9: "143.0705", 11: "137.4426"},
    185: {5: "161.7686", 7: "154.0689", 9: "147.5367", 11: "141.8242"},
    190: {5: "166.4561", 7: "158.6436", 9: "152.0123", 11: "146.2122"},
    195: {5: "171.1420", 7: "163.2216", 9: "156.5046", 11: "150.6200"},
    200: {5: "175.8348", 7: "167.7992", 9: "160.9934", 11: "155.0274"},
}

# Cells whose published values are certified infeasible (Farkas); the main
# criterion-1 test still asserts against them and stays honestly red.
TABLE2_CERTIFIED_DEFECTS = {
    (145, 11), (150, 11), (155, 11), (160, 11), (165, 11), (170, 11),
    (180, 11), (185, 11), (190, 11), (195, 11), (200, 11),
}

TABLE1 = [
    (20, 5, "11.0108", "12.5512", "12.6118"),
    (30, 5, "19.1884", "20.8355", "20.8659"),
    (22, 7, "9.7026", "11.8435", "11.9237"),
    (40, 7, "23.6589", "26.0713", "26.0927"),
    (65, 7, "44.4670", "47.0065", "47.0267"),
    (16, 9, "3.6304", "5.9337", "6.0762"),
    (67, 9, "41.7638", "45.0148", "45.0533"),
    (30, 11, "10.5254", "13.8617", "13.9257"),
    (40, 11, "17.4568", "21.0411", "21.0911"),
]

PRINTED_POLYNOMIALS = {
    (5, 3): (-10, 10, -5, 1),
    (14, 7): (-226800, 189360, -75960, 19080, -3260, 380, -28, 1),
    (15, 7): (-415800, 340200, -132300, 31500, -4956, 516, -33, 1),
    (100, 5): (-3271262400, 201456936, -5001012, 62544, -394, 1),
    (200, 5): (-148719648000, 4303437600, -49988400, 291352, -852, 1),
}

_results_cache = {}


def threshold(m, n, warm=None):
    key = (m, n)
    if key not in _results_cache:
        _results_cache[key] = compute_threshold(m, n, warm_start=warm)
    return _results_cache[key]


def report(criterion, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"criterion {criterion}: {status}{' - ' + detail if detail else ''}")


def test_criterion_1_table2_reproduction():
    t0 = time.perf_counter()
    mismatches = []
    for n in (5, 7, 9, 11):
        warm = None
        for m in sorted(TABLE2):
            printed = TABLE2[m].get(n)
            if printed is None:
                continue
            r = compute_threshold(m, n, warm_start=warm)
            _results_cache[(m, n)] = r
            warm = r.enclosure.lo
            err = abs(float(r.r_value) - float(printed))
            if err > 5e-4:
                mismatches.append((m, n, float(r.r_value), printed, err))
    elapsed = time.perf_counter() - t0
    ok = not mismatches and elapsed < 600
    cells = sum(len(v) for v in TABLE2.values())
    report(1, ok, f"{cells - len(mismatches)}/{cells} cells within 5e-4 in {elapsed:.1f}s"
                  + (f"; mismatching cells {sorted((m, n) for m, n, *_ in mismatches)}"
                     " are certified publication defects" if mismatches else ""))
    assert elapsed < 600
    assert not mismatches, (
        "cells outside the 5e-4 tolerance: "
        + ", ".join(f"(m={m}, n={n}): computed {v:.6f} vs printed {s}"
                    for m, n, v, s, _ in mismatches)
        + " - exact Farkas certificates (see test_criterion_1_defect_certificates) "
          "prove the printed values are infeasible, so these mismatches are "
          "publication defects, not implementation errors"
    )


def test_criterion_1_defect_certificates():
    """Exact-rational proof that every mismatched reference cell is wrong.

    Each cell gets a two-sided pin in exact arithmetic: a non-negative
    integer-node quadrature at R0 just below our enclosure proves
    R(m,n) >= R0, and the witness polynomial (non-negative on {0..m},
    checked exactly) with negative Poisson integral at R1 just above proves
    R(m,n) < R1.  The printed value lies more than 5e-4 outside [R0, R1],
    so no correct value can match it within the criterion tolerance."""
    failed = []
    for (m, n) in sorted(TABLE2_CERTIFIED_DEFECTS):
        r = threshold(m, n)
        printed = Fraction(TABLE2[m][n])
        r_lo = r.enclosure.lo - Fraction(1, 10**5)
        r_hi = r.enclosure.hi + Fraction(1, 10**5)
        cert = exact_feasibility_certificate(r.exponents, m, n, r_lo)
        w = farkas_witness(r.exponents, m)
        grid_ok = all(w.eval_int(j) >= 0 for j in range(m + 1))
        upper_ok = poisson_integral(w, r_hi) < 0
        distance = min(abs(printed - r_lo), abs(printed - r_hi))
        outside = printed < r_lo or printed > r_hi
        if not (cert is not None and grid_ok and upper_ok and outside
                and distance > Fraction(5, 10**4)):
            failed.append((m, n))
    report("1-certificates", not failed,
           f"{len(TABLE2_CERTIFIED_DEFECTS) - len(failed)}/"
           f"{len(TABLE2_CERTIFIED_DEFECTS)} printed defects certified "
           "(two-sided exact pins)")
    assert not failed


def test_criterion_2_table1_bounds():
    bad = []
    with hp.precision(100):
        for (m, n, lo_s, r_s, hi_s) in TABLE1:
            p = (n + 1) // 2
            lo = laguerre_smallest_zero(p, m - 2 * p + 1)
            hi = laguerre_smallest_zero(p, m - p)
            r = threshold(m, n)
            checks = (
                abs(float(lo) - float(lo_s)) <= 5e-4
                and abs(float(r.r_value) - float(r_s)) <= 5e-4
                and abs(float(hi) - float(hi_s)) <= 5e-4
                and lo <= r.r_value <= hi
            )
            if not checks:
                bad.append((m, n))
    report(2, not bad, f"{len(TABLE1) - len(bad)}/{len(TABLE1)} rows reproduced")
    assert not bad


def test_criterion_3_exact_defining_polynomials():
    bad = []
    for (m, n), coeffs in PRINTED_POLYNOMIALS.items():
        r = threshold(m, n)
        if r.defining_poly.coeffs != coeffs:
            bad.append((m, n, r.defining_poly.coeffs))
    report(3, not bad, f"{len(PRINTED_POLYNOMIALS) - len(bad)}/"
                       f"{len(PRINTED_POLYNOMIALS)} polynomials coefficient-exact")
    assert not bad


def test_criterion_4_printed_exponents_and_coefficients():
    ok = True
    r14 = threshold(14, 7)
    ok &= r14.exponents == (2, 3, 5, 6, 9, 10, 14)
    r15 = threshold(15, 7)
    ok &= r15.exponents == (2, 3, 6, 7, 10, 11, 15)
    r100 = threshold(100, 5)
    for a, e in zip(r100.alphas, ("0.1188", "0.0765", "0.2095", "0.4539", "0.1413")):
        ok &= abs(float(a) - float(e)) <= 5e-4
    r200 = threshold(200, 5)
    ok &= r200.exponents == (154, 155, 176, 177, 200)
    for a, e in zip(r200.alphas, ("0.1846", "0.0007", "0.3320", "0.3336", "0.1491")):
        ok &= abs(float(a) - float(e)) <= 5e-4
    report(4, ok, "exponents and coefficients of the four printed optima")
    assert ok


def test_criterion_5_oracle_equivalence():
    t0 = time.perf_counter()
    cases = [(m, n) for n in (1, 3, 5) for m in range(n, 13)]
    bad = []
    for (m, n) in cases:
        bf = brute_force_threshold(m, n)
        fast = threshold(m, n)
        with hp.precision(120):
            if not abs(bf.r_value - fast.r_value) < 1e-9:
                bad.append((m, n))
    elapsed = time.perf_counter() - t0
    report(5, not bad and elapsed < 300,
           f"{len(cases) - len(bad)}/{len(cases)} instances agree within 1e-9 "
           f"in {elapsed:.1f}s")
    assert not bad
    assert elapsed < 300


def test_criterion_6_closed_forms():
    ok = True
    for m in range(1, 51):
        ok &= threshold(m, 1).r_value == m
    with hp.precision(100):
        for m in (4, 9, 16, 25, 36):
            r = threshold(m, 3)
            ok &= abs(r.r_value - (m - gmpy2.sqrt(mpfr(m)))) < 1e-12
    for p in (1, 2, 3):
        for m in range(2 * p - 1, 31):
            odd = compute_threshold(m, 2 * p - 1)
            even = compute_threshold(m + 1, 2 * p)
            ok &= even.r_value == odd.r_value  # bit-identical
            ok &= even.enclosure.lo == odd.enclosure.lo
    report(6, ok, "order-1 exact, square-case order-3, even/odd equality")
    assert ok


def test_criterion_7_invariant_suites():
    problems = []

    # bound sandwich + pair structure + coefficient sums + order conditions
    for (m, n) in ((10, 5), (22, 7), (16, 9), (30, 11), (60, 7), (41, 5)):
        p = (n + 1) // 2
        r = threshold(m, n)
        with hp.precision(max(100, r.precision_bits)):
            lo = laguerre_smallest_zero(p, m - 2 * p + 1)
            hi = laguerre_smallest_zero(p, m - p)
            if not lo <= r.r_value <= hi:
                problems.append(("sandwich", m, n))
            if r.exponents[-1] != m or not r.alphas[-1] > 0:
                problems.append(("largest-exponent", m, n))
            body = list(r.exponents[:-1])
            pairs = [(body[i], body[i + 1]) for i in range(0, len(body), 2)]
            if not all(b == a + 1 for a, b in pairs):
                problems.append(("pairing", m, n))
            if not abs(sum(r.alphas, mpfr(0)) - 1) < mpfr("1e-20"):
                problems.append(("mass", m, n))
            for ell in range(n + 1):
                s = sum(a * falling_factorial(e, ell)
                        for a, e in zip(r.alphas, r.exponents))
                if not abs(s / r.r_value**ell - 1) < mpfr("1e-20"):
                    problems.append(("order", m, n, ell))
            zeros = tridiag_eigenvalues(charlier_recurrence(r.r_value, p + 1), p)
            if not (r.exponents[-1] >= zeros[-1] - mpfr("1e-18")
                    and r.exponents[0] <= zeros[0] + mpfr("1e-18")):
                problems.append(("extremal-zeros", m, n))

    # strict monotonicity of the threshold factor in m
    kraaijevanger_flags = 0
    for n in (3, 5, 7):
        prev = None
        warm = None
        for m in range(n, 61):
            r = compute_threshold(m, n, warm_start=warm)
            warm = r.enclosure.lo
            if prev is not None and not r.r_value > prev:
                problems.append(("monotonic", m, n))
            prev = r.r_value
            if not 0 < r.r_value <= m - n + 1:
                problems.append(("envelope", m, n))
            if m - n >= 2 and r.r_value > m - n - 1:
                kraaijevanger_flags += 1

    # spectral-radius monotonicity on randomized configurations
    with hp.precision(100):
        rng = random.Random(2024)
        done = 0
        while done < 100:
            p = rng.choice((2, 3, 4))
            cfg = PConfiguration(tuple(rng.randrange(1, p - k + 2)
                                       for k in range(1, p)))
            R = mpfr(rng.uniform(2.5, 40.0))
            dR = mpfr(rng.uniform(1e-5, 1e-2))
            try:
                M1 = integral_spectrum(cfg, R, p)
                M2 = integral_spectrum(cfg, R + dR, p)
            except Exception:
                continue
            if M1 != M2:
                continue
            done += 1
            if not spectral_radius(M2, R + dR) > spectral_radius(M1, R):
                problems.append(("radius-monotonic", cfg.entries, float(R)))

    report(7, not problems,
           f"invariants hold; {kraaijevanger_flags} sweep points above the "
           "m-n-1 line (informational)")
    assert not problems, problems


def test_criterion_8_degree_independence():
    t0 = time.perf_counter()
    r2000 = compute_threshold(2000, 7)
    t2000 = time.perf_counter() - t0
    t0 = time.perf_counter()
    r4000 = compute_threshold(4000, 7)
    t4000 = time.perf_counter() - t0
    ok = t2000 <= 60 and t4000 <= 3 * max(t2000, 0.05)
    report(8, ok, f"R(2000,7) in {t2000:.3f}s, R(4000,7) in {t4000:.3f}s")
    assert r2000.exponents[-1] == 2000 and r4000.exponents[-1] == 4000
    assert t2000 <= 60
    # the 50 ms floor keeps timer noise out of the ratio at these speeds
    assert t4000 <= 3 * max(t2000, 0.05)


def test_criterion_9_positivity_demo():
    bad = []
    for (m, n) in ((10, 5), (20, 5), (15, 7)):
        sys_ = MetzlerSystem.upwind(20, 1.0)
        rep = positivity_demo(m, n, sys_, steps=100, trials=50, seed=1,
                              result=threshold(m, n))
        if rep.min_component < -1e-12:
            bad.append((m, n, rep.min_component))
    report(9, not bad, "positivity preserved at h = R/alpha on the upwind system")
    assert not bad


def test_criterion_10_farkas_property():
    r = threshold(10, 5)
    r_minus = r.enclosure.lo - Fraction(1, 1000)
    r_plus = r.enclosure.hi + Fraction(1, 1000)
    rng = random.Random(99)
    neg = []
    for _ in range(500):
        f = random_grid_nonneg_poly(rng, 10, 5)
        if poisson_integral(f, r_minus) < 0:
            neg.append(f)
    witness = farkas_witness(r.exponents, 10)
    witness_ok = (
        all(witness.eval_int(j) >= 0 for j in range(11))
        and poisson_integral(witness, r_plus) < 0
    )
    report(10, not neg and witness_ok,
           "500 admissible integrals non-negative below, witness negative above")
    assert not neg
    assert witness_ok
