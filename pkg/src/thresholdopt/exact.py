"""Exact integer combinatorics and certified root isolation.

Everything in this module is exact: Stirling numbers and Touchard polynomials
over Python integers, integer-coefficient node polynomials in the step-size
variable R, and Sturm-chain root isolation with dyadic-rational bisection.
The floating layers of the package lean on these primitives whenever a sign
or an enclosure has to be trusted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import AmbiguityError, BracketError, DomainError


# ---------------------------------------------------------------------------
# Stirling numbers and Touchard polynomials
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _stirling2_row(n: int) -> tuple:
    if n == 0:
        return (1,)
    prev = _stirling2_row(n - 1)
    row = [0] * (n + 1)
    for k in range(1, n + 1):
        row[k] = (k * prev[k] if k < n else 0) + prev[k - 1]
    return tuple(row)


@lru_cache(maxsize=None)
def _stirling1_row(n: int) -> tuple:
    if n == 0:
        return (1,)
    prev = _stirling1_row(n - 1)
    row = [0] * (n + 1)
    for k in range(0, n + 1):
        s = prev[k - 1] if k >= 1 else 0
        row[k] = s - (n - 1) * prev[k] if k < n else s
    return tuple(row)


def stirling_second(n: int, k: int) -> int:
    """S(n, k): coefficients of x^n = sum_k S(n,k) (x)_k."""
    if n < 0 or k < 0 or k > n:
        raise DomainError(f"stirling_second requires 0 <= k <= n, got n={n}, k={k}")
    return _stirling2_row(n)[k]


def stirling_first(n: int, k: int) -> int:
    """Signed s(n, k): coefficients of (x)_n = sum_k s(n,k) x^k."""
    if n < 0 or k < 0 or k > n:
        raise DomainError(f"stirling_first requires 0 <= k <= n, got n={n}, k={k}")
    return _stirling1_row(n)[k]


def falling_factorial(x: int, k: int) -> int:
    """(x)_k = x (x-1) ... (x-k+1) for non-negative integers; 0 when k > x."""
    return math.perm(x, k)


# ---------------------------------------------------------------------------
# Integer-coefficient polynomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntPoly:
    """Univariate polynomial over the integers, lowest power first.

    The zero polynomial is the empty tuple; otherwise the trailing
    coefficient is nonzero.  Evaluation at any rational point is exact.
    """

    coeffs: tuple

    @staticmethod
    def from_coeffs(coeffs) -> "IntPoly":
        cs = list(coeffs)
        while cs and cs[-1] == 0:
            cs.pop()
        return IntPoly(tuple(int(c) for c in cs))

    @staticmethod
    def zero() -> "IntPoly":
        return IntPoly(())

    @staticmethod
    def constant(c: int) -> "IntPoly":
        return IntPoly.from_coeffs([c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> int:
        if self.is_zero:
            raise DomainError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __add__(self, other: "IntPoly") -> "IntPoly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return IntPoly.from_coeffs(out)

    def __neg__(self) -> "IntPoly":
        return IntPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "IntPoly") -> "IntPoly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            if other == 0:
                return IntPoly.zero()
            return IntPoly(tuple(other * c for c in self.coeffs))
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1) if self.coeffs and other.coeffs else []
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return IntPoly.from_coeffs(out)

    __rmul__ = __mul__

    def deriv(self) -> "IntPoly":
        return IntPoly.from_coeffs([i * c for i, c in enumerate(self.coeffs)][1:])

    def eval_int(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_fraction(self, q: Fraction) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * q + c
        return acc

    def sign_at(self, q: Fraction) -> int:
        """Exact sign of the value at a rational point.

        Uses the homogenization value * den^deg = sum_i c_i num^i den^(deg-i),
        so only integer arithmetic is involved (den > 0)."""
        if self.is_zero:
            return 0
        num, den = q.numerator, q.denominator
        if den == 1:
            acc = self.eval_int(num)
        else:
            acc = 0
            npow = 1
            dpow = den ** self.degree
            for c in self.coeffs:
                acc += c * npow * dpow
                npow *= num
                dpow //= den
        return (acc > 0) - (acc < 0)

    def sign_normalized(self) -> "IntPoly":
        """Flip sign if needed so the leading coefficient is positive."""
        if self.is_zero or self.leading > 0:
            return self
        return -self

    def to_json(self) -> dict:
        return {"coeffs": [str(c) for c in self.coeffs]}

    @staticmethod
    def from_json(obj: dict) -> "IntPoly":
        return IntPoly.from_coeffs(int(c) for c in obj["coeffs"])

    def format(self, var: str = "R") -> str:
        if self.is_zero:
            return "0"
        parts = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mag = abs(c)
            if i == 0:
                term = str(mag)
            elif i == 1:
                term = f"{var}" if mag == 1 else f"{mag}*{var}"
            else:
                term = f"{var}^{i}" if mag == 1 else f"{mag}*{var}^{i}"
            if not parts:
                parts.append(term if c > 0 else f"-{term}")
            else:
                parts.append(f"+ {term}" if c > 0 else f"- {term}")
        return " ".join(parts)


@lru_cache(maxsize=None)
def touchard(n: int) -> IntPoly:
    """Touchard polynomial B_n, via B_{n+1}(x) = x (B_n(x) + B_n'(x))."""
    if n < 0:
        raise DomainError("touchard index must be non-negative")
    if n == 0:
        return IntPoly.from_coeffs([1])
    prev = touchard(n - 1)
    s = prev + prev.deriv()
    return IntPoly.from_coeffs([0] + list(s.coeffs))


def elementary_symmetric(nodes) -> list:
    """All elementary symmetric values e_0..e_n of the given numbers,
    by incremental multiplication of the linear factors (exact)."""
    es = [1]
    for u in nodes:
        es.append(0)
        for k in range(len(es) - 1, 0, -1):
            es[k] = es[k] + u * es[k - 1]
    return es


def polar_h_poly(nodes, n: int | None = None) -> IntPoly:
    """Symmetric multi-affine node polynomial h_n(nodes; .) as an element
    of Z[R].

    With e_k the elementary symmetric values of the n integer nodes,
    h_n = sum_{k=0..n} (-1)^(n-k) e_k B_{n-k}(R); its degree in R is n and
    the leading coefficient is (-1)^n.  A real zero R with non-negative
    interpolation coefficients certifies a positive integer-node quadrature.
    """
    nodes = tuple(int(u) for u in nodes)
    if n is None:
        n = len(nodes)
    if n != len(nodes):
        raise DomainError(f"expected {n} nodes, got {len(nodes)}")
    es = elementary_symmetric(nodes)
    acc = IntPoly.zero()
    for k in range(n + 1):
        sign = -1 if (n - k) % 2 else 1
        acc = acc + (sign * es[k]) * touchard(n - k)
    return acc


def eval_sign(p: IntPoly, r: Fraction) -> int:
    """Exact sign of p(r) in {-1, 0, +1}."""
    return p.sign_at(Fraction(r))


# ---------------------------------------------------------------------------
# Sturm chains and certified isolation of real roots
# ---------------------------------------------------------------------------
#
# Chains are carried as lists of Fraction coefficient lists (lowest power
# first).  Only the square-free part of the input enters the chain, so root
# multiplicities never disturb the counts.

def _fr(p: IntPoly) -> list:
    return [Fraction(c) for c in p.coeffs]


def _fr_strip(cs: list) -> list:
    while cs and cs[-1] == 0:
        cs.pop()
    return cs


def _fr_divmod(a: list, b: list):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    inv = 1 / b[-1]
    for i in range(len(a) - len(b), -1, -1):
        c = a[i + len(b) - 1] * inv
        if c:
            q[i] = c
            for j, bj in enumerate(b):
                a[i + j] -= c * bj
    return _fr_strip(q), _fr_strip(a[: len(b) - 1])


def _fr_gcd(a: list, b: list) -> list:
    a, b = list(a), list(b)
    while b:
        _, r = _fr_divmod(a, b)
        a, b = b, r
    if a:
        inv = 1 / a[-1]
        a = [c * inv for c in a]
    return a


def _fr_deriv(a: list) -> list:
    return [i * c for i, c in enumerate(a)][1:]


def _fr_eval(a: list, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


def _fr_to_intpoly(a: list) -> IntPoly:
    den = math.lcm(*(c.denominator for c in a)) if a else 1
    cs = [int(c * den) for c in a]
    g = math.gcd(*cs) if cs else 1
    if g > 1:
        cs = [c // g for c in cs]
    return IntPoly.from_coeffs(cs)


def square_free_part(p: IntPoly) -> IntPoly:
    """p divided by gcd(p, p'), returned primitive with positive leading
    coefficient; same root set as p, all roots simple."""
    if p.is_zero or p.degree == 0:
        return p
    a = _fr(p)
    g = _fr_gcd(a, _fr_deriv(a))
    if len(g) <= 1:
        return p.sign_normalized()
    q, r = _fr_divmod(a, g)
    assert not r
    return _fr_to_intpoly(q).sign_normalized()


def poly_gcd(p: IntPoly, q: IntPoly) -> IntPoly:
    """Primitive gcd of two integer polynomials."""
    if p.is_zero:
        return q.sign_normalized()
    if q.is_zero:
        return p.sign_normalized()
    return _fr_to_intpoly(_fr_gcd(_fr(p), _fr(q))).sign_normalized()


def sturm_chain(p: IntPoly) -> list:
    """Sturm chain of the square-free part of p (Fraction coefficients)."""
    sf = square_free_part(p)
    chain = [_fr(sf)]
    if sf.degree >= 1:
        chain.append(_fr_deriv(chain[0]))
        while chain[-1]:
            _, r = _fr_divmod(chain[-2], chain[-1])
            if not r:
                break
            chain.append([-c for c in r])
    return chain


def _variations(chain: list, x: Fraction) -> int:
    signs = []
    for cs in chain:
        v = _fr_eval(cs, x)
        if v:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots(chain: list, a: Fraction, b: Fraction) -> int:
    """Number of distinct real roots in the half-open interval (a, b]."""
    if a >= b:
        return 0
    return _variations(chain, a) - _variations(chain, b)


def root_upper_bound(p: IntPoly) -> Fraction:
    """Dyadic Cauchy bound: every real root has magnitude below this."""
    lead = abs(p.leading)
    m = max(abs(c) for c in p.coeffs)
    bound = 1 + Fraction(m, lead)
    return Fraction(2) ** max(1, math.ceil(math.log2(float(bound))) + 1)


def isolate_positive_roots(p: IntPoly) -> list:
    """Disjoint dyadic enclosures (lo, hi] of every positive real root of p.

    An entry with lo == hi marks an exact rational root.  Multiplicities are
    ignored (isolation runs on the square-free part).
    """
    if p.is_zero:
        raise DomainError("cannot isolate roots of the zero polynomial")
    # Strip any root at the origin so the left endpoint has a clean sign.
    cs = list(p.coeffs)
    had_zero_root = bool(cs) and cs[0] == 0
    while cs and cs[0] == 0:
        cs.pop(0)
    p = IntPoly.from_coeffs(cs)
    if p.degree < 1:
        return []
    chain = sturm_chain(p)
    sf = chain[0]
    upper = root_upper_bound(p)
    out = []
    stack = [(Fraction(0), upper, count_roots(chain, Fraction(0), upper))]
    while stack:
        a, b, cnt = stack.pop()
        if cnt == 0:
            continue
        if cnt == 1:
            if _fr_eval(sf, b) == 0:
                out.append((b, b))
            else:
                out.append((a, b))
            continue
        mid = (a + b) / 2
        left = count_roots(chain, a, mid)
        stack.append((a, mid, left))
        stack.append((mid, b, cnt - left))
    out.sort(key=lambda ab: ab[0])
    if had_zero_root and out and out[0][0] == 0:
        # Lift the left endpoint off the stripped origin root so the caller
        # can bisect the original polynomial on the returned interval.
        lo, hi = out[0]
        eps = hi / 2
        while count_roots(chain, lo, eps) != 0:
            eps /= 2
        out[0] = (eps, hi)
    return out


def refine_enclosure(p: IntPoly, lo: Fraction, hi: Fraction, max_width: Fraction):
    """Shrink a sign-changing enclosure by dyadic bisection until its width
    is at most ``max_width``; detects exact rational roots on the way."""
    lo, hi = Fraction(lo), Fraction(hi)
    if lo == hi:
        return lo, hi
    s_lo = p.sign_at(lo)
    s_hi = p.sign_at(hi)
    if s_lo == 0:
        return lo, lo
    if s_hi == 0:
        return hi, hi
    if s_lo == s_hi:
        raise BracketError(f"no sign change over [{lo}, {hi}]")
    scanned = False
    while hi - lo > max_width:
        if not scanned and hi - lo <= 4:
            # Integer roots are the only rational roots of the monic defining
            # polynomials; catch them exactly instead of bisecting forever.
            k = math.floor(lo) + 1
            while k < hi:
                if Fraction(k) > lo and p.sign_at(Fraction(k)) == 0:
                    return Fraction(k), Fraction(k)
                k += 1
            scanned = True
        mid = (lo + hi) / 2
        s = p.sign_at(mid)
        if s == 0:
            return mid, mid
        if s == s_lo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def certify_unique_root(p: IntPoly, lo: Fraction, hi: Fraction) -> None:
    """Raise unless p has exactly one root in [lo, hi]."""
    if lo == hi:
        if p.sign_at(lo) != 0:
            raise BracketError(f"{lo} is not a root")
        return
    chain = sturm_chain(p)
    n = count_roots(chain, lo, hi)
    if _fr_eval(chain[0], lo) == 0:
        n += 1
    if n == 0:
        raise BracketError(f"no root of the defining polynomial in [{lo}, {hi}]")
    if n > 1:
        raise AmbiguityError(f"{n} roots of the defining polynomial in [{lo}, {hi}]")
