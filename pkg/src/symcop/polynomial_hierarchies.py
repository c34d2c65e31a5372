"""Polynomial inner hierarchies: NN-type (sum of squares) and ZVP-type.

NN-type, depth ``r``
    ``A`` is accepted when ``(x^T x)^r <A, (x o x) (x o x)^T>`` is a sum of
    squares, where ``o`` is the Jordan product.  Substituting ``x o x`` makes
    the form nonnegative on the whole space exactly when ``A`` is copositive
    on the cone of squares.

ZVP-type, depth ``r``
    ``A`` is accepted when ``(e^T x)^r x^T A x`` lies in the cone
    ``E^{n, r+2}`` generated recursively from the semialgebraic description
    of ``K``: linear forms ``phi_i`` (orthant coordinates, ``x_21`` and
    ``e^T x``) and the quadratic ``phi = x_21^2 - |x_2,2:|^2``.  A degree-``m``
    member is ``sigma + sum_i phi_i psi_i + phi psi`` with ``sigma`` a sum of
    squares (even ``m`` only), ``psi_i`` members of degree ``m - 1`` and
    ``psi`` a member of degree ``m - 2``; degree 0 members are nonnegative
    constants.

Both encode into Gram blocks plus coefficient-matching equations.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .combinatorics import enumerate_eq
from .jordan import ConeShape, structure_constants
from .model import ConicProblem
from .polynomials import GramBlock, SparsePoly, gram_equations, sos_to_psd


def _entries(A):
    """Square matrix as nested Python lists (keeps Fractions exact)."""
    if isinstance(A, np.ndarray):
        return [[float(v) for v in row] for row in A]
    return [list(row) for row in A]


def jordan_square_polys(shape: ConeShape) -> list[SparsePoly]:
    """Coordinates of ``x o x`` as quadratic forms."""
    n = shape.n
    T = structure_constants(shape)
    out = []
    for i in range(n):
        out.append(SparsePoly.quadratic_form(T[i].astype(int).tolist()))
    return out


def nn_substituted_poly(A, r: int, shape: ConeShape) -> SparsePoly:
    """``(x^T x)^r (x o x)^T A (x o x)``, a form of degree ``2(r + 2)``."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    A = _entries(A)
    n = shape.n
    if len(A) != n:
        raise ValueError(f"A must be {n}x{n}")
    sq = jordan_square_polys(shape)
    out = SparsePoly(n, 4)
    for i in range(n):
        for j in range(n):
            if A[i][j] != 0:
                out = out + (sq[i] * sq[j]) * A[i][j]
    if r:
        norm2 = SparsePoly.quadratic_form(np.eye(n, dtype=int).tolist())
        out = out * norm2**r
    return out


def semialgebraic_generators(shape: ConeShape) -> tuple[list[SparsePoly], SparsePoly]:
    """Linear generators ``x_1i, x_21, e^T x`` and the quadratic ``x_21^2 - sum x_2i^2``."""
    shape.require_soc()
    n, n1 = shape.n, shape.n1
    lin = [SparsePoly.variable(n, i) for i in range(n1)]
    lin.append(SparsePoly.variable(n, n1))
    lin.append(SparsePoly.linear([1] * (n1 + 1) + [0] * (shape.n2 - 1)))
    quad = [[0] * n for _ in range(n)]
    quad[n1][n1] = 1
    for i in range(n1 + 1, n):
        quad[i][i] = -1
    return lin, SparsePoly.quadratic_form(quad)


def zvp_target_poly(A, r: int, shape: ConeShape) -> SparsePoly:
    """``(e^T x)^r x^T A x`` with ``e = (1_{n1+1}, 0_{n2-1})``."""
    lin, _ = semialgebraic_generators(shape)
    return SparsePoly.quadratic_form(_entries(A)) * lin[-1] ** r


def zvp_blocks(m: int, shape: ConeShape, prefix: str = "Z") -> list[GramBlock]:
    """Gram blocks of a generic member of ``E^{n, m}``.

    Each block carries the product of generators on its branch as the
    multiplier, so ``sum_b multiplier_b * m_b^T Q_b m_b`` is the member.
    """
    lin, quad = semialgebraic_generators(shape)
    n = shape.n
    out: list[GramBlock] = []

    def rec(deg: int, mult: SparsePoly, path: str):
        if deg < 0:
            return
        if deg % 2 == 0:
            out.append(GramBlock(f"{path}s", enumerate_eq(n, deg // 2), mult))
        for i, g in enumerate(lin):
            rec(deg - 1, mult * g, f"{path}g{i}.")
        rec(deg - 2, mult * quad, f"{path}q.")

    rec(m, SparsePoly.constant(n), f"{prefix}.")
    return out


def add_gram_system(problem: ConicProblem, blocks, target: dict, nvars: int, degree: int) -> None:
    """Add Gram matrices and equations ``Gram part = target``.

    ``target`` maps ``None`` to the constant polynomial and scalar variable
    names to their coefficient polynomials, i.e. the right-hand side is
    ``target[None] + sum_v v * target[v]``.
    """
    for blk in blocks:
        problem.add_matrix(blk.name, blk.size)
    monomials, eqs = gram_equations(blocks, nvars, degree)
    for mono, eq in zip(monomials, eqs):
        coeffs = dict(eq)
        rhs = 0.0
        for var, poly in target.items():
            c = float(poly.coefficient(mono))
            if var is None:
                rhs += c
            elif c != 0:
                coeffs[var] = coeffs.get(var, 0.0) - c
        problem.add_equality(coeffs, rhs, name=f"coef{mono}")


def nn_membership_constraints(A, r: int, shape: ConeShape) -> ConicProblem:
    """Feasibility problem whose solvability means ``A`` is in the NN cone of depth ``r``."""
    target = nn_substituted_poly(A, r, shape)
    p = ConicProblem(name=f"nn-membership r={r}")
    gc = sos_to_psd(target, name="Q")
    add_gram_system(p, gc.blocks, {None: target}, shape.n, target.degree)
    return p


def zvp_membership_constraints(A, r: int, shape: ConeShape) -> ConicProblem:
    """Feasibility problem whose solvability means ``A`` is in the ZVP cone of depth ``r``."""
    target = zvp_target_poly(A, r, shape)
    p = ConicProblem(name=f"zvp-membership r={r}")
    add_gram_system(p, zvp_blocks(r + 2, shape), {None: target}, shape.n, r + 2)
    return p


def sos_problem(target: SparsePoly) -> ConicProblem:
    """Feasibility problem: is ``target`` a sum of squares?"""
    p = ConicProblem(name="sos")
    gc = sos_to_psd(target, name="Q")
    add_gram_system(p, gc.blocks, {None: target}, target.nvars, target.degree)
    return p


def motzkin() -> SparsePoly:
    """The Motzkin form, nonnegative but not a sum of squares."""
    F = Fraction
    return SparsePoly(3, 6, {(4, 2, 0): F(1), (2, 4, 0): F(1), (2, 2, 2): F(-3), (0, 0, 6): F(1)})
