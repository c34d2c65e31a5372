import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from symcop.combinatorics import enumerate_le
from symcop.jordan import ConeShape
from symcop.lasserre import (
    MomentTable,
    exact_value,
    lasserre_accepts,
    lasserre_constraints,
    lasserre_matrix,
    moment,
    moment_exact,
)
from symcop.model import ConicProblem
from symcop.oracle import mc_moments

L2 = ConeShape(0, 2)


def triangle_moment(a, b):
    """int over {|w| <= t <= 1} of t^a w^b."""
    return 0.0 if b % 2 else 2.0 / ((b + 1) * (a + b + 2))


def test_moment_examples():
    assert moment((0, 0), L2) == pytest.approx(1.0, abs=1e-12)
    assert moment((1, 0), L2) == pytest.approx(2 / 3, abs=1e-12)
    assert moment_exact((1, 0), L2) == (Fraction(2, 3), 0)
    assert moment_exact((0, 0), L2) == (Fraction(1), 0)
    for s, a in [(L2, (2, 1)), (ConeShape(1, 3), (0, 1, 1, 0)), (ConeShape(0, 4), (0, 0, 0, 3))]:
        assert moment(a, s) == 0.0 and moment_exact(a, s)[0] == 0


@pytest.mark.parametrize("a,b", [(a, b) for a in range(5) for b in range(0, 5)])
def test_triangle_closed_form(a, b):
    assert moment((a, b), L2) == pytest.approx(triangle_moment(a, b), rel=1e-13, abs=1e-15)


def test_against_numerical_quadrature():
    s = ConeShape(1, 2)
    for alpha in [(0, 0, 0), (1, 1, 0), (2, 0, 2), (0, 3, 1), (1, 1, 2)]:
        a, b, c = alpha
        # region: x >= 0, |w| <= t, x + t <= 1
        val, _ = integrate.tplquad(
            lambda w, t, x: x**a * t**b * w**c, 0, 1, 0, lambda x: 1 - x, lambda x, t: -t, lambda x, t: t,
            epsabs=1e-13, epsrel=1e-11,
        )
        assert moment(alpha, s) == pytest.approx(val, rel=1e-8, abs=1e-13)
    s = ConeShape(0, 3)
    for alpha in [(0, 0, 0), (1, 2, 0), (0, 2, 2), (2, 0, 4)]:
        a, b, c = alpha
        # polar coordinates in the disc of radius t
        val, _ = integrate.dblquad(
            lambda rho, t: rho * t**a * quad_angle(b, c) * rho ** (b + c), 0, 1, 0, lambda t: t,
            epsabs=1e-13, epsrel=1e-11,
        )
        assert moment(alpha, s) == pytest.approx(val, rel=1e-8)


def quad_angle(b, c):
    return integrate.quad(lambda th: math.cos(th) ** b * math.sin(th) ** c, 0, 2 * math.pi, epsabs=1e-14)[0]


@settings(max_examples=60)
@given(st.integers(0, 3), st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_exact_matches_float(n1, n2, seed):
    s = ConeShape(n1, n2)
    alpha = tuple(int(v) for v in np.random.default_rng(seed).integers(0, 4, size=s.n))
    assert exact_value(moment_exact(alpha, s)) == pytest.approx(moment(alpha, s), rel=1e-12, abs=0)


def test_monte_carlo_agreement_small():
    for s in [L2, ConeShape(1, 3)]:
        alphas = [a for a in enumerate_le(s.n, 3) if all(t % 2 == 0 for t in a[s.n1 + 1:])]
        mc = mc_moments(alphas, s, samples=200_000, seed=3)
        for a in alphas:
            assert abs(mc.values[a] - moment(a, s)) <= 4.5 * mc.stderr[a] + 1e-15


def test_matrix_examples():
    A = np.array([[1.0, 0.0], [0.0, -7.0]])
    M = lasserre_matrix(A, 0, L2)
    tab = MomentTable(L2, 2)
    assert M.shape == (1, 1)
    ee = lambda i, j: tuple(int(k == i) + int(k == j) for k in range(2))  # noqa: E731
    assert M[0, 0] == pytest.approx(sum(A[i, j] * tab[ee(i, j)] for i in range(2) for j in range(2)))
    assert M[0, 0] < 0 and not lasserre_accepts(A, 0, L2)
    assert not lasserre_accepts(-np.eye(2), 0, L2)
    for n1, n2 in [(0, 2), (1, 2), (0, 3), (2, 2), (1, 3)]:
        s = ConeShape(n1, n2)
        for r in range(3):
            assert np.linalg.eigvalsh(lasserre_matrix(np.eye(s.n), r, s))[0] > 0


def test_fragment_sizes_and_linearity():
    s = ConeShape(1, 3)
    assert lasserre_matrix(np.eye(4), 1, s).shape == (5, 5)
    assert lasserre_matrix(np.eye(4), 2, s).shape == (15, 15)
    A = np.random.default_rng(0).standard_normal((4, 4))
    A = A + A.T
    assert np.allclose(lasserre_matrix(3 * A, 2, s), 3 * lasserre_matrix(A, 2, s))
    p = ConicProblem()
    p.add_scalar("y")
    lasserre_constraints(p, A, {"y": -np.ones((4, 4))}, 1, s)
    (cone,) = p.cones
    assert cone.kind == "psd" and cone.dim == 5


def test_outer_nesting_is_principal_submatrix():
    s = ConeShape(1, 2)
    A = np.random.default_rng(1).standard_normal((3, 3))
    A = A + A.T
    table = MomentTable(s, 8)
    for r in range(3):
        small = lasserre_matrix(A, r, s, table)
        big = lasserre_matrix(A, r + 1, s, table)
        pos = {a: k for k, a in enumerate(enumerate_le(s.n, r + 1))}
        idx = [pos[a] for a in enumerate_le(s.n, r)]
        assert np.array_equal(big[np.ix_(idx, idx)], small)


def test_table_invariants_and_json(tmp_path):
    s = ConeShape(1, 3)
    t = MomentTable(s, 4)
    assert t.y0 > 0 and not t.underflow
    for a, v in t.values.items():
        if any(k % 2 for k in a[s.n1 + 1:]):
            assert v == 0.0
        else:
            assert v > 0
    tn = MomentTable(s, 4, normalize=True)
    assert tn[(0, 0, 0, 0)] == pytest.approx(1.0)
    path = tmp_path / "m.json"
    t.save_json(path)
    d = json.loads(path.read_text())
    assert d["underflow"] is False and len(d["moments"]) == len(t.values)


def test_underflow_flag_threshold():
    s = ConeShape(0, 2)
    assert MomentTable(s, 4, threshold=0.1).underflow
    assert not MomentTable(s, 4).underflow
