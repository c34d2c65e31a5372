"""Sparse homogeneous polynomials and the Gram-matrix encoding of SOS constraints.

Coefficients are ordinary Python numbers, so a polynomial built from
``Fraction`` data stays exact.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

from .combinatorics import add, enumerate_eq, pairs_upper, unit


class SparsePoly:
    """Homogeneous polynomial ``sum_alpha c_alpha x^alpha`` in ``nvars`` variables."""

    __slots__ = ("nvars", "degree", "terms")

    def __init__(self, nvars: int, degree: int, terms=None):
        self.nvars = nvars
        self.degree = degree
        self.terms: dict[tuple, object] = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(alpha)
            if len(alpha) != nvars or sum(alpha) != degree:
                raise ValueError(f"monomial {alpha} does not fit ({nvars} vars, degree {degree})")
            if c != 0:
                self.terms[alpha] = self.terms.get(alpha, 0) + c
        self.terms = {a: c for a, c in self.terms.items() if c != 0}

    @classmethod
    def constant(cls, nvars: int, c=1) -> "SparsePoly":
        return cls(nvars, 0, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, i: int, c=1) -> "SparsePoly":
        return cls(nvars, 1, {unit(nvars, i): c})

    @classmethod
    def linear(cls, coeffs) -> "SparsePoly":
        n = len(coeffs)
        return cls(n, 1, {unit(n, i): c for i, c in enumerate(coeffs)})

    @classmethod
    def quadratic_form(cls, A) -> "SparsePoly":
        """``x^T A x`` for a square array-like ``A``."""
        n = len(A)
        terms = defaultdict(int)
        for i in range(n):
            for j in range(n):
                terms[add(unit(n, i), unit(n, j))] += A[i][j]
        return cls(n, 2, terms)

    def coefficient(self, alpha):
        return self.terms.get(tuple(alpha), 0)

    def items(self):
        return self.terms.items()

    def __len__(self):
        return len(self.terms)

    def _check(self, other: "SparsePoly"):
        if self.nvars != other.nvars:
            raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")

    def __add__(self, other):
        if not isinstance(other, SparsePoly):
            return NotImplemented
        self._check(other)
        if self.degree != other.degree and self.terms and other.terms:
            raise ValueError("cannot add homogeneous polynomials of different degree")
        deg = self.degree if self.terms else other.degree
        terms = dict(self.terms)
        for a, c in other.terms.items():
            terms[a] = terms.get(a, 0) + c
        return SparsePoly(self.nvars, deg, terms)

    def __neg__(self):
        return SparsePoly(self.nvars, self.degree, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, SparsePoly):
            return poly_mul(self, other)
        return SparsePoly(self.nvars, self.degree, {a: c * other for a, c in self.terms.items()})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = SparsePoly.constant(self.nvars)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms and (
            self.degree == other.degree or not self.terms
        )

    def evaluate(self, x):
        total = 0
        for alpha, c in self.terms.items():
            term = c
            for xi, a in zip(x, alpha):
                if a:
                    term = term * xi**a
            total = total + term
        return total

    def __repr__(self):
        body = " + ".join(f"{c}*x^{a}" for a, c in sorted(self.terms.items(), reverse=True))
        return f"SparsePoly(nvars={self.nvars}, degree={self.degree}: {body or '0'})"


def poly_mul(p: SparsePoly, q: SparsePoly) -> SparsePoly:
    """Product of two homogeneous polynomials."""
    p._check(q)
    terms: dict = defaultdict(int)
    for a, ca in p.terms.items():
        for b, cb in q.terms.items():
            terms[add(a, b)] += ca * cb
    return SparsePoly(p.nvars, p.degree + q.degree, terms)


@dataclass
class GramBlock:
    """A PSD matrix variable ``Q`` over ``basis`` contributing ``multiplier * (m^T Q m)``."""

    name: str
    basis: tuple
    multiplier: SparsePoly

    @property
    def size(self) -> int:
        return len(self.basis)


@dataclass
class GramConstraint:
    """Coefficient-matching equations between Gram blocks and a target polynomial.

    ``equations[k]`` maps matrix-entry references ``(block name, i, j)`` with
    ``i <= j`` to weights; it must equal ``rhs[k]``, the target coefficient of
    ``monomials[k]``.
    """

    blocks: list
    monomials: list
    equations: list
    rhs: list


def gram_equations(blocks, nvars: int, degree: int) -> tuple[list, list]:
    """For each monomial of ``degree`` the linear form in Gram entries giving its coefficient."""
    monomials = list(enumerate_eq(nvars, degree))
    pos = {m: k for k, m in enumerate(monomials)}
    eqs = [defaultdict(float) for _ in monomials]
    for blk in blocks:
        basis = blk.basis
        mult = list(blk.multiplier.items())
        for i, j in pairs_upper(len(basis)):
            w = 1.0 if i == j else 2.0
            base = add(basis[i], basis[j])
            for mu, c in mult:
                eqs[pos[add(base, mu)]][(blk.name, i, j)] += w * float(c)
    return monomials, [dict(e) for e in eqs]


def sos_to_psd(target: SparsePoly, name: str = "Q") -> GramConstraint:
    """Gram encoding of ``target`` being a sum of squares."""
    if target.degree % 2:
        raise ValueError("a sum of squares must have even degree")
    basis = enumerate_eq(target.nvars, target.degree // 2)
    block = GramBlock(name, basis, SparsePoly.constant(target.nvars))
    monomials, eqs = gram_equations([block], target.nvars, target.degree)
    rhs = [target.coefficient(m) for m in monomials]
    return GramConstraint([block], monomials, eqs, rhs)


def gram_value(block: GramBlock, Q) -> SparsePoly:
    """Polynomial ``multiplier * m^T Q m`` for a numeric matrix ``Q``."""
    n = block.multiplier.nvars
    terms = defaultdict(float)
    for i, j in pairs_upper(block.size):
        w = 1.0 if i == j else 2.0
        terms[add(block.basis[i], block.basis[j])] += w * Q[i][j]
    d = 2 * sum(block.basis[0]) if block.basis else 0
    return poly_mul(SparsePoly(n, d, terms), block.multiplier)


def as_fraction_poly(p: SparsePoly) -> SparsePoly:
    return SparsePoly(p.nvars, p.degree, {a: Fraction(c) for a, c in p.items()})
