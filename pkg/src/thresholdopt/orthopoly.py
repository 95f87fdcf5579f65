"""Three-term recurrences, Christoffel transform chains, and Gaussian
quadrature for the discrete measures driving the threshold computation.

Recurrence coefficients describe monic orthogonal polynomials

    p_i(t) = (t - b_i) p_{i-1}(t) - g_i p_{i-2}(t),   p_0 = 1, p_-1 = 0,

stored zero-based: ``b[i]`` and ``g[i]`` are the paper-indexed b_{i+1} and
g_{i+1}, with g[0] = 0 by convention.  The zeros of the degree-n polynomial
are the eigenvalues of the symmetric tridiagonal matrix with diagonal
b[0..n-1] and off-diagonal entries sqrt(g[1..n-1]); all eigenvalue work here
uses Sturm-count bisection on that matrix, which stays correct at any MPFR
precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr

from . import hp
from .errors import BreakdownError, DomainError


@dataclass(frozen=True)
class RecurrenceCoeffs:
    """Diagonal / squared off-diagonal coefficients of a Jacobi matrix."""

    b: tuple
    g: tuple

    def __len__(self) -> int:
        return len(self.b)

    def require(self, n: int) -> None:
        if len(self.b) < n:
            raise DomainError(
                f"need {n} recurrence coefficients, have {len(self.b)}"
            )


@dataclass(frozen=True)
class Quadrature:
    """Nodes and positive weights of a Gaussian rule."""

    nodes: tuple
    weights: tuple

    def to_json(self) -> dict:
        return {
            "nodes": [hp.decimal_str(x) for x in self.nodes],
            "weights": [hp.decimal_str(w) for w in self.weights],
        }


def charlier_recurrence(R, count: int) -> RecurrenceCoeffs:
    """Recurrence coefficients of the monic Charlier polynomials for the
    Poisson measure of parameter R: b_i = R+i-1, g_i = (i-1)R."""
    R = mpfr(R)
    if not R > 0:
        raise DomainError(f"Poisson parameter must be positive, got {R}")
    if count < 1:
        raise DomainError("count must be at least 1")
    b = tuple(R + i for i in range(count))
    g = tuple(i * R for i in range(count))
    return RecurrenceCoeffs(b, g)


def laguerre_recurrence(gamma, count: int) -> RecurrenceCoeffs:
    """Monic generalized-Laguerre recurrence: b_i = 2(i-1)+gamma+1,
    g_i = (i-1)(i-1+gamma)."""
    gamma = mpfr(gamma)
    if not gamma > -1:
        raise DomainError(f"Laguerre parameter must exceed -1, got {gamma}")
    b = tuple(2 * i + gamma + 1 for i in range(count))
    g = tuple(i * (i + gamma) for i in range(count))
    return RecurrenceCoeffs(b, g)


def christoffel_chain(base: RecurrenceCoeffs, roots) -> RecurrenceCoeffs:
    """Apply one Christoffel (qd) step per annihilator root, in order.

    Each step maps the coefficients of a measure d(mu) to those of
    (t - z) d(mu) and consumes one index of lookahead:

        Q_j = B_j - E_{j-1} - z,  E_j = G_{j+1} / Q_j,
        B'_j = z + Q_j + E_j,     G'_j = Q_j E_{j-1},   E_0 = 0.

    A zero pivot Q_j means a node of the current measure coincides with the
    shift; that raises BreakdownError carrying (stage, index).
    """
    b = list(base.b)
    g = list(base.g)
    roots = tuple(roots)
    base.require(len(roots) + 1)
    for stage, z in enumerate(roots, start=1):
        z = mpfr(z)
        nb = []
        ng = []
        e_prev = mpfr(0)
        for j in range(len(b) - 1):
            q = b[j] - e_prev - z
            if q == 0:
                raise BreakdownError(stage, j + 1)
            e = g[j + 1] / q
            nb.append(z + q + e)
            ng.append(q * e_prev)
            e_prev = e
        b, g = nb, ng
    return RecurrenceCoeffs(tuple(b), tuple(g))


def christoffel_pair_chain(base: RecurrenceCoeffs, firsts, exact_stages=frozenset()) -> RecurrenceCoeffs:
    """Apply annihilator pairs (q, q+1) for each q in ``firsts``, recovering
    from qd breakdowns without changing the transformed measure.

    A zero pivot for one shift ordering often disappears when the pair is
    applied in the opposite order (same product annihilator).  When stage k
    is listed in ``exact_stages`` the shift q is known to coincide with a
    zero of the current stage polynomial, and the pair (q, q - 1/2) induces
    the identical transformed orthogonal polynomials; it is tried last.
    """
    rc = base
    for stage, q in enumerate(firsts, start=1):
        q = mpfr(q)
        candidates = [(q, q + 1), (q + 1, q)]
        if stage in exact_stages:
            candidates += [(q, q - mpfr(1) / 2), (q - mpfr(1) / 2, q)]
        last = None
        for shifts in candidates:
            try:
                rc = christoffel_chain(rc, shifts)
                break
            except BreakdownError as exc:
                last = exc
        else:
            raise BreakdownError(stage, last.index if last else 0)
    return rc


def _count_below(rc: RecurrenceCoeffs, n: int, x) -> int:
    """Number of eigenvalues of the leading n-by-n Jacobi matrix below x,
    by the sign count of the LDL^T pivots of (J - x I)."""
    tiny = mpfr(2) ** (-(hp.get_precision() * 4)) * (1 + abs(x))
    count = 0
    d = rc.b[0] - x
    if d == 0:
        d = tiny
    if d < 0:
        count += 1
    for i in range(1, n):
        d = rc.b[i] - x - rc.g[i] / d
        if d == 0:
            d = tiny
        if d < 0:
            count += 1
    return count


def _eigen_range(rc: RecurrenceCoeffs, n: int):
    radii = []
    for i in range(n):
        r = mpfr(0)
        if i >= 1:
            r += gmpy2.sqrt(rc.g[i])
        if i + 1 < n:
            r += gmpy2.sqrt(rc.g[i + 1])
        radii.append(r)
    lo = min(rc.b[i] - radii[i] for i in range(n))
    hi = max(rc.b[i] + radii[i] for i in range(n))
    return lo, hi


def default_eigen_tolerance(scale) -> mpfr:
    """Absolute certification width: well below the working precision so
    floor decisions downstream stay trustworthy."""
    return mpfr(2) ** (-(hp.get_precision() - 12)) * max(mpfr(1), abs(mpfr(scale)))


def _check_symmetrizable(rc: RecurrenceCoeffs, n: int) -> None:
    rc.require(n)
    for i in range(1, n):
        if rc.g[i] < 0:
            raise DomainError(
                f"negative off-diagonal square g[{i}] = {rc.g[i]}: "
                "measure is not positive at this stage"
            )


def kth_eigenvalue(rc: RecurrenceCoeffs, n: int, k: int, tol=None) -> mpfr:
    """k-th smallest (1-based) zero of the degree-n orthogonal polynomial,
    certified to the absolute tolerance by Sturm-count bisection."""
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    _check_symmetrizable(rc, n)
    lo, hi = _eigen_range(rc, n)
    if tol is None:
        tol = default_eigen_tolerance(max(abs(lo), abs(hi)))
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if _count_below(rc, n, mid) >= k:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def tridiag_eigenvalues(rc: RecurrenceCoeffs, n: int, tol=None) -> list:
    """All n zeros of the degree-n orthogonal polynomial, increasing."""
    if n < 1:
        raise DomainError("matrix size must be at least 1")
    _check_symmetrizable(rc, n)
    lo, hi = _eigen_range(rc, n)
    if tol is None:
        tol = default_eigen_tolerance(max(abs(lo), abs(hi)))

    eigs = [None] * n
    # Bisect intervals carrying (count_below(lo), count_below(hi)).
    stack = [(lo, hi, 0, n)]
    while stack:
        a, b, ca, cb = stack.pop()
        if cb - ca == 0:
            continue
        if b - a <= tol:
            mid = (a + b) / 2
            for k in range(ca, cb):
                eigs[k] = mid
            continue
        mid = (a + b) / 2
        cm = _count_below(rc, n, mid)
        cm = min(max(cm, ca), cb)
        stack.append((a, mid, ca, cm))
        stack.append((mid, b, cm, cb))
    return eigs


def _monic_values(rc: RecurrenceCoeffs, n: int, x) -> list:
    """Values p_0(x) .. p_{n-1}(x) of the monic orthogonal polynomials."""
    vals = [mpfr(1)]
    if n >= 2:
        vals.append(x - rc.b[0])
    for i in range(2, n):
        vals.append((x - rc.b[i - 1]) * vals[-1] - rc.g[i - 1] * vals[-2])
    return vals


def gauss_quadrature(rc: RecurrenceCoeffs, n: int, total_mass, tol=None) -> Quadrature:
    """n-point Gaussian rule of the measure behind ``rc``.

    Weights come from the reciprocal Christoffel sums of the orthonormal
    polynomial values at each node, w = total_mass / sum_k phat_k(x)^2,
    which reproduces the squared first eigenvector components of the
    Golub-Welsch formulation without forming eigenvectors.
    """
    total_mass = mpfr(total_mass)
    nodes = tridiag_eigenvalues(rc, n, tol)
    norms = [mpfr(1)]
    for i in range(1, n):
        norms.append(norms[-1] * rc.g[i])
    weights = []
    for x in nodes:
        vals = _monic_values(rc, n, x)
        s = mpfr(0)
        for k in range(n):
            s += vals[k] ** 2 / norms[k]
        weights.append(total_mass / s)
    return Quadrature(tuple(nodes), tuple(weights))


def laguerre_smallest_zero(p: int, gamma, tol=None) -> mpfr:
    """Smallest zero of the generalized Laguerre polynomial of degree p."""
    if p < 1:
        raise DomainError("degree must be at least 1")
    rc = laguerre_recurrence(gamma, p)
    return kth_eigenvalue(rc, p, 1, tol)
