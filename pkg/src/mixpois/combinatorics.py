"""Exact integer combinatorics for mixed Poisson moments.

Stirling numbers of the second kind convert factorial moments into raw
moments; the associated Stirling numbers (blocks of size at least two) are
the coefficients of the centered Poisson moment polynomials m_s(x).  Every
count is a Python ``int`` so nothing overflows.

The polynomials m_s(x) can be built three independent ways (recurrence,
associated-Stirling closed form, alternating Touchard sum); they must agree
coefficient by coefficient.  ``enumerate_partitions_min_block`` is a slow
brute-force oracle for the counting functions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb

__all__ = [
    "IntPolynomial",
    "PartitionSizeError",
    "stirling2",
    "assoc_stirling2",
    "assoc_stirling2_product",
    "bell_number",
    "enumerate_partitions_min_block",
    "double_factorial_odd",
    "falling_factorial",
    "touchard_poly",
    "centered_poisson_moment_recurrence",
    "centered_poisson_moment_closed",
    "centered_poisson_moment_touchard",
]

ENUMERATION_LIMIT = 14


class PartitionSizeError(ValueError):
    """Raised when exhaustive enumeration is asked for too large a set."""


@dataclass(frozen=True)
class IntPolynomial:
    """Polynomial in x with exact integer coefficients.

    ``coefficients[k]`` is the coefficient of x**k.  Trailing zeros are
    stripped, so the zero polynomial has an empty coefficient tuple.
    """

    coefficients: tuple[int, ...] = ()

    def __post_init__(self):
        coeffs = [int(c) for c in self.coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @classmethod
    def monomial(cls, k: int, c: int = 1) -> IntPolynomial:
        return cls((0,) * k + (c,))

    @property
    def degree(self) -> int:
        """Degree of the polynomial; -1 for the zero polynomial."""
        return len(self.coefficients) - 1

    @property
    def leading_coefficient(self) -> int:
        return self.coefficients[-1] if self.coefficients else 0

    def is_zero(self) -> bool:
        return not self.coefficients

    def __getitem__(self, k: int) -> int:
        if 0 <= k < len(self.coefficients):
            return self.coefficients[k]
        return 0

    def __call__(self, x):
        # Horner; works for ints (exact), floats and numpy arrays alike
        result = 0
        for c in reversed(self.coefficients):
            result = result * x + c
        return result

    def __add__(self, other: IntPolynomial) -> IntPolynomial:
        n = max(len(self.coefficients), len(other.coefficients))
        return IntPolynomial(tuple(self[k] + other[k] for k in range(n)))

    def __sub__(self, other: IntPolynomial) -> IntPolynomial:
        n = max(len(self.coefficients), len(other.coefficients))
        return IntPolynomial(tuple(self[k] - other[k] for k in range(n)))

    def __mul__(self, other):
        if isinstance(other, int):
            return IntPolynomial(tuple(other * c for c in self.coefficients))
        if not isinstance(other, IntPolynomial):
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return IntPolynomial()
        out = [0] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            for j, b in enumerate(other.coefficients):
                out[i + j] += a * b
        return IntPolynomial(tuple(out))

    __rmul__ = __mul__

    def shift(self, k: int) -> IntPolynomial:
        """Multiply by x**k."""
        if self.is_zero():
            return self
        return IntPolynomial((0,) * k + self.coefficients)

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        terms = []
        for k, c in enumerate(self.coefficients):
            if c == 0:
                continue
            if k == 0:
                body = str(abs(c))
            else:
                mono = "x" if k == 1 else f"x^{k}"
                body = mono if abs(c) == 1 else f"{abs(c)}{mono}"
            if not terms:
                terms.append(body if c > 0 else f"-{body}")
            else:
                terms.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(terms)


@lru_cache(maxsize=None)
def _stirling2_row(s: int) -> tuple[int, ...]:
    if s == 0:
        return (1,)
    prev = _stirling2_row(s - 1)
    row = [0] * (s + 1)
    for j in range(1, s + 1):
        below = prev[j] if j < len(prev) else 0
        row[j] = j * below + prev[j - 1]
    return tuple(row)


def stirling2(s: int, j: int) -> int:
    """Number of partitions of an s-set into j nonempty blocks."""
    if s < 0 or j < 0:
        raise ValueError("stirling2 needs nonnegative arguments")
    if j > s:
        return 0
    for t in range(s):  # fill the cache bottom-up, keeps recursion shallow
        _stirling2_row(t)
    return _stirling2_row(s)[j]


@lru_cache(maxsize=None)
def _assoc_row(s: int) -> tuple[int, ...]:
    # S2(s,k) = k S2(s-1,k) + (s-1) S2(s-2,k-1)
    if s == 0:
        return (1,)
    if s == 1:
        return (0, 0)
    a = _assoc_row(s - 1)
    b = _assoc_row(s - 2)
    row = [0] * (s + 1)
    for k in range(1, s // 2 + 1):
        ak = a[k] if k < len(a) else 0
        bk = b[k - 1] if k - 1 < len(b) else 0
        row[k] = k * ak + (s - 1) * bk
    return tuple(row)


def assoc_stirling2(s: int, k: int) -> int:
    """Partitions of an s-set into k blocks, each block of size >= 2."""
    if s < 0 or k < 0:
        raise ValueError("assoc_stirling2 needs nonnegative arguments")
    if k > s:
        return 0
    for t in range(s):
        _assoc_row(t)
    return _assoc_row(s)[k]


def assoc_stirling2_product(s: int, k: int) -> int:
    """Associated Stirling number via the gapped-chain product formula.

    Sums ``prod_l C(j_{l+1} - 1, j_l)`` over chains
    ``0 = j_1 << j_2 << ... << j_{k+1} = s`` where ``a << b`` means
    ``a < b - 1``.  Independent of the recurrence used by
    :func:`assoc_stirling2`.
    """
    if s < 0 or k < 0:
        raise ValueError("assoc_stirling2_product needs nonnegative arguments")
    if k == 0:
        return 1 if s == 0 else 0
    total = 0
    for interior in itertools.combinations(range(2, s - 1), k - 1):
        chain = (0, *interior, s)
        if any(not chain[i] < chain[i + 1] - 1 for i in range(k)):
            continue
        term = 1
        for i in range(k):
            term *= comb(chain[i + 1] - 1, chain[i])
        total += term
    return total


def bell_number(s: int) -> int:
    return sum(stirling2(s, j) for j in range(s + 1))


def enumerate_partitions_min_block(s: int, k: int, min_size: int) -> int:
    """Count set partitions of {0..s-1} into k blocks of size >= min_size.

    Brute force over restricted growth strings.  Branches that can no
    longer reach k blocks of the required size are cut early, which only
    skips partitions the final filter would reject anyway.
    """
    if s < 0 or k < 0:
        raise ValueError("s and k must be nonnegative")
    if min_size < 1:
        raise ValueError("min_size must be positive")
    if s > ENUMERATION_LIMIT:
        raise PartitionSizeError(
            f"exhaustive enumeration is limited to s <= {ENUMERATION_LIMIT}, got s={s}"
        )
    if s == 0:
        return 1 if k == 0 else 0
    if k == 0 or k * min_size > s:
        return 0

    sizes: list[int] = []

    def walk(i: int) -> int:
        remaining = s - i
        deficit = sum(max(0, min_size - b) for b in sizes)
        missing_blocks = k - len(sizes)
        if deficit + missing_blocks * min_size > remaining:
            return 0
        if i == s:
            return 1 if len(sizes) == k and min(sizes) >= min_size else 0
        count = 0
        for b in range(len(sizes)):
            sizes[b] += 1
            count += walk(i + 1)
            sizes[b] -= 1
        if len(sizes) < k:
            sizes.append(1)
            count += walk(i + 1)
            sizes.pop()
        return count

    return walk(0)


def double_factorial_odd(m: int) -> int:
    """(2m-1)!! = 1*3*5*...*(2m-1); equals 1 for m = 0."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    out = 1
    for t in range(1, 2 * m, 2):
        out *= t
    return out


def falling_factorial(x, s: int):
    """x (x-1) ... (x-s+1), with the empty product 1 at s = 0."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    out = 1
    for i in range(s):
        out = out * (x - i)
    return out


def touchard_poly(s: int) -> IntPolynomial:
    """Touchard polynomial T_s(x) = sum_l stirling2(s, l) x^l."""
    return IntPolynomial(tuple(stirling2(s, j) for j in range(s + 1)))


@lru_cache(maxsize=None)
def _recurrence_table(s: int) -> tuple[IntPolynomial, ...]:
    table = [IntPolynomial((1,)), IntPolynomial()]
    for n in range(2, s + 1):
        acc = IntPolynomial()
        for k in range(n - 1):
            acc = acc + table[k] * comb(n - 1, k)
        table.append(acc.shift(1))
    return tuple(table[: s + 1])


def centered_poisson_moment_recurrence(s: int) -> IntPolynomial:
    """m_s(x) = E(P - x)^s for P ~ Poisson(x), from the moment recurrence.

    m_0 = 1, m_1 = 0 and m_s(x) = x * sum_{k<=s-2} C(s-1, k) m_k(x).
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    return _recurrence_table(max(s, 1))[s]


def centered_poisson_moment_closed(s: int) -> IntPolynomial:
    """m_s(x) = sum_k assoc_stirling2(s, k) x^k."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    return IntPolynomial(tuple(assoc_stirling2(s, k) for k in range(s + 1)))


def centered_poisson_moment_touchard(s: int) -> IntPolynomial:
    """m_s(x) = sum_k C(s, k) (-1)^(s-k) T_k(x) x^(s-k)."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    acc = IntPolynomial()
    for k in range(s + 1):
        sign = -1 if (s - k) % 2 else 1
        acc = acc + touchard_poly(k).shift(s - k) * (sign * comb(s, k))
    return acc
