import itertools
import math

from hypothesis import given
from hypothesis import strategies as st
import pytest

from symcop.combinatorics import (
    canonical_index,
    enumerate_eq,
    enumerate_le,
    from_canonical,
    multinomial,
    zvp_block_schedule,
    zvp_count,
    zvp_count_closed_form,
)


def brute_eq(d, m):
    return sorted(a for a in itertools.product(range(m + 1), repeat=d) if sum(a) == m)


def test_enumerate_examples():
    assert len(enumerate_eq(3, 2)) == 6
    assert enumerate_eq(1, 5) == ((5,),)
    assert sorted(enumerate_eq(4, 3)) == brute_eq(4, 3) and len(enumerate_eq(4, 3)) == 20
    assert set(enumerate_le(2, 1)) == {(0, 0), (1, 0), (0, 1)}
    assert len(enumerate_le(3, 2)) == 10
    le = [a for a in itertools.product(range(4), repeat=5) if sum(a) <= 3]
    assert sorted(enumerate_le(5, 3)) == sorted(le) and len(le) == 56


@given(st.integers(1, 8), st.integers(0, 10))
def test_enumerate_counts_order_and_uniqueness(d, m):
    idx = enumerate_eq(d, m)
    assert len(idx) == math.comb(d + m - 1, d - 1)
    assert len(set(idx)) == len(idx)
    assert list(idx) == sorted(idx, reverse=True) or list(idx) == sorted(idx)
    assert all(sum(a) == m for a in idx)


def test_multinomial_examples():
    assert multinomial(2, (1, 1)) == 2
    assert multinomial(3, (3, 0)) == 1
    assert multinomial(4, (2, 1, 1)) == math.factorial(4) // (2 * 1 * 1) == 12
    with pytest.raises(ValueError):
        multinomial(3, (1, 1))


@given(st.integers(1, 6), st.integers(0, 8))
def test_multinomial_theorem(d, m):
    assert sum(multinomial(m, a) for a in enumerate_eq(d, m)) == d**m


def test_canonical_roundtrip():
    for a in enumerate_eq(4, 3):
        idx = canonical_index(a)
        assert list(idx) == sorted(idx) and len(idx) == 3
        assert from_canonical(idx, 4) == a


def test_zvp_count_examples():
    assert zvp_count(3, 2) == 10
    assert zvp_count(3, 3) == 33
    assert round(zvp_count_closed_form(7, 4)) == zvp_count(7, 4)


@given(st.integers(1, 10), st.integers(0, 12))
def test_zvp_closed_form_within_one_ulp(rk, m):
    exact = zvp_count(rk, m)
    approx = zvp_count_closed_form(rk, m)
    assert abs(approx - exact) <= max(math.ulp(float(exact)), abs(math.ulp(approx)))
    if m >= 2:
        assert zvp_count(rk, m) == rk * zvp_count(rk, m - 1) + zvp_count(rk, m - 2)


def test_schedule_at_degree_two():
    assert zvp_block_schedule(5, 4, 2) == {5: 1, 1: 4 * 4 + 1}
