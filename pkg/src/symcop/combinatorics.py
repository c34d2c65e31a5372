"""Multi-index enumeration and the counting formulas used by the hierarchies.

A multi-index is a plain tuple of nonnegative integers.  Enumerations are
returned in descending lexicographic order, so ``(m, 0, ..., 0)`` comes first
and ``(0, ..., 0, m)`` last.  Graded orders list degree 0 first, then degree
1, and so on, each degree in descending lexicographic order.
"""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from functools import lru_cache
from itertools import combinations_with_replacement

MultiIndex = tuple[int, ...]


@lru_cache(maxsize=None)
def enumerate_eq(d: int, m: int) -> tuple[MultiIndex, ...]:
    """All exponent vectors of length ``d`` with entries summing to ``m``."""
    if d < 1:
        raise ValueError(f"need at least one variable, got d={d}")
    if m < 0:
        raise ValueError(f"degree must be nonnegative, got m={m}")
    out: list[MultiIndex] = []

    def rec(prefix: list[int], left: int, slots: int) -> None:
        if slots == 1:
            out.append(tuple(prefix + [left]))
            return
        for k in range(left, -1, -1):
            rec(prefix + [k], left - k, slots - 1)

    rec([], m, d)
    return tuple(out)


@lru_cache(maxsize=None)
def enumerate_le(d: int, m: int) -> tuple[MultiIndex, ...]:
    """Graded enumeration of all exponent vectors of length ``d`` and degree <= ``m``."""
    out: list[MultiIndex] = []
    for k in range(m + 1):
        out.extend(enumerate_eq(d, k))
    return tuple(out)


def index_map(indices) -> dict[MultiIndex, int]:
    """Position lookup for an enumeration."""
    return {a: i for i, a in enumerate(indices)}


def count_eq(d: int, m: int) -> int:
    """Number of exponent vectors of length ``d`` and degree ``m``."""
    return math.comb(d + m - 1, d - 1)


def count_le(d: int, m: int) -> int:
    return math.comb(d + m, d)


def multi_factorial(alpha: MultiIndex) -> int:
    """Product of the factorials of the entries."""
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out


def multinomial(m: int, alpha: MultiIndex) -> int:
    """Exact multinomial coefficient ``m! / prod(alpha_i!)``."""
    if sum(alpha) != m:
        raise ValueError(f"multi-index {alpha} does not have degree {m}")
    return math.factorial(m) // multi_factorial(alpha)


def canonical_index(alpha: MultiIndex) -> tuple[int, ...]:
    """Sorted index tuple in which variable ``i`` appears ``alpha[i]`` times."""
    return tuple(i for i, a in enumerate(alpha) for _ in range(a))


def from_canonical(idx, d: int) -> MultiIndex:
    """Inverse of :func:`canonical_index`."""
    out = [0] * d
    for i in idx:
        out[i] += 1
    return tuple(out)


def unit(d: int, i: int) -> MultiIndex:
    out = [0] * d
    out[i] = 1
    return tuple(out)


def add(alpha: MultiIndex, beta: MultiIndex) -> MultiIndex:
    return tuple(a + b for a, b in zip(alpha, beta))


def zvp_count(rk: int, m: int) -> int:
    """Integer sequence ``a_0 = 1, a_1 = rk, a_{m+2} = rk a_{m+1} + a_m``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    a, b = 1, rk
    for _ in range(m):
        a, b = b, rk * b + a
    return a


def zvp_count_closed_form(rk: int, m: int) -> float:
    """Binet-type closed form of :func:`zvp_count`.

    Evaluated with 50 significant digits and rounded once, so the float is
    the correctly rounded value of the closed form.
    """
    with localcontext() as ctx:
        ctx.prec = 50
        s = (Decimal(rk * rk + 4)).sqrt()
        p = (rk + s) / 2
        q = (rk - s) / 2
        return float((p ** (m + 1) - q ** (m + 1)) / s)


def zvp_block_schedule(n: int, rk: int, m: int) -> dict[int, int]:
    """Gram block sizes and counts produced by the ZVP recursion at degree ``m``.

    Returns a mapping ``size -> count``.  For even ``m = 2k`` there are
    ``a_{2i}`` blocks of size ``|I_{=k-i}^n|``; for odd ``m = 2k+1`` there are
    ``a_{2i+1}`` blocks of size ``|I_{=k-i}^n|``.
    """
    k, odd = divmod(m, 2)
    out: dict[int, int] = {}
    for i in range(k + 1):
        size = count_eq(n, k - i)
        out[size] = out.get(size, 0) + zvp_count(rk, 2 * i + odd)
    return out


def dp_count(rk: int, r: int) -> int:
    """Number of dP constraints at depth ``r`` before concise reduction."""
    return math.comb(rk + r + 1, rk - 1)


def yildirim_count_bound(rk: int, r: int) -> int:
    """Upper bound ``rk^2 (rk^{r+1} - 1) / (rk - 1)`` on the grid size."""
    return rk * rk * (rk ** (r + 1) - 1) // (rk - 1)


def pairs_upper(d: int):
    """Index pairs ``(i, j)`` with ``i <= j``, row-major."""
    return list(combinations_with_replacement(range(d), 2))
