"""Outer hierarchy from moments of the uniform measure on the truncated cone.

For ``K = R_+^{n1} x L^{n2}`` and ``Delta(K) = {x in K : e^T x <= 1}`` with
``e = (1_{n1+1}, 0_{n2-1})`` the moments ``y_alpha = int x^alpha dx`` have the
closed form

    y_alpha = 2 alpha_1! (S + n2 - 1)! prod_{i>=2} Gamma(beta_i)
              / ((T + n2 - 1) (n + |alpha|)! Gamma(sum_{i>=2} beta_i))

with ``alpha_1!`` the product of factorials of the orthant exponents,
``S`` the sum of all second-order-cone exponents, ``T`` the sum of those
past the first, and ``beta_i = (alpha_2i + 1) / 2``.  Moments with an odd
exponent past the first SOC coordinate vanish.  ``A`` is accepted at depth
``r`` when the matrix ``(sum_ij A_ij y_{a+b+e_i+e_j})_{a,b in I_<=r}`` is PSD.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .combinatorics import add, enumerate_le, unit
from .jordan import ConeShape
from .model import ConicProblem

#: Default absolute magnitude below which a nonzero moment is reported as
#: underflowing; conic solvers commonly discard coefficients this small.
UNDERFLOW_THRESHOLD = 1e-12


def _split(alpha, shape: ConeShape):
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != shape.n:
        raise ValueError(f"multi-index has {len(alpha)} entries, expected {shape.n}")
    if any(a < 0 for a in alpha):
        raise ValueError("multi-index entries must be nonnegative")
    return alpha[: shape.n1], alpha[shape.n1 :]


def log_moment(alpha, shape: ConeShape) -> float:
    """``log y_alpha``; ``-inf`` when the moment vanishes by symmetry."""
    shape.require_soc()
    a1, a2 = _split(alpha, shape)
    tail = a2[1:]
    if any(a % 2 for a in tail):
        return -math.inf
    n2 = shape.n2
    S = sum(a2)
    T = sum(tail)
    betas = [(a + 1) / 2 for a in tail]
    lg = math.lgamma
    return (
        math.log(2.0)
        + sum(lg(a + 1) for a in a1)
        + lg(S + n2)
        + sum(lg(b) for b in betas)
        - math.log(T + n2 - 1)
        - lg(shape.n + sum(alpha) + 1)
        - lg(sum(betas))
    )


def moment(alpha, shape: ConeShape) -> float:
    """Moment ``int_{Delta(K)} x^alpha dx`` evaluated in log-gamma space."""
    lm = log_moment(alpha, shape)
    return 0.0 if lm == -math.inf else math.exp(lm)


def _gamma_half(twice: int) -> tuple[Fraction, int]:
    """``Gamma(twice / 2)`` as ``(q, p)`` meaning ``q * sqrt(pi)^p``."""
    if twice % 2 == 0:
        return Fraction(math.factorial(twice // 2 - 1)), 0
    j = (twice - 1) // 2
    return Fraction(math.factorial(2 * j), 4**j * math.factorial(j)), 1


def moment_exact(alpha, shape: ConeShape) -> tuple[Fraction, int]:
    """Exact moment as ``(q, p)`` with ``y_alpha = q * sqrt(pi)^p``."""
    shape.require_soc()
    a1, a2 = _split(alpha, shape)
    tail = a2[1:]
    if any(a % 2 for a in tail):
        return Fraction(0), 0
    n2 = shape.n2
    S, T = sum(a2), sum(tail)
    q = Fraction(2 * math.prod(math.factorial(a) for a in a1) * math.factorial(S + n2 - 1))
    p = 0
    for a in tail:
        g, k = _gamma_half(a + 1)
        q *= g
        p += k
    g, k = _gamma_half(T + n2 - 1)
    q /= g
    p -= k
    q /= (T + n2 - 1) * math.factorial(shape.n + sum(alpha))
    return q, p


def exact_value(qp: tuple[Fraction, int]) -> float:
    q, p = qp
    return float(q) * math.pi ** (p / 2)


@dataclass
class MomentTable:
    """All moments up to ``max_degree``, optionally divided by ``y_0``.

    ``underflow`` is set when a nonzero moment falls below ``threshold`` in
    the stored (possibly normalized) scale; ``tiny`` lists those indices.
    """

    shape: ConeShape
    max_degree: int
    normalize: bool = False
    threshold: float = UNDERFLOW_THRESHOLD
    values: dict = field(init=False, repr=False)
    y0: float = field(init=False)
    underflow: bool = field(init=False)
    tiny: list = field(init=False, repr=False)

    def __post_init__(self):
        if self.max_degree < 0:
            raise ValueError("max_degree must be nonnegative")
        n = self.shape.n
        self.y0 = moment((0,) * n, self.shape)
        logs = {a: log_moment(a, self.shape) for a in enumerate_le(n, self.max_degree)}
        shift = math.log(self.y0) if self.normalize else 0.0
        self.values = {a: (0.0 if v == -math.inf else math.exp(v - shift)) for a, v in logs.items()}
        self.tiny = [a for a, v in self.values.items() if 0.0 < v < self.threshold or (
            v == 0.0 and logs[a] != -math.inf)]
        self.underflow = bool(self.tiny)

    def __getitem__(self, alpha) -> float:
        return self.values[tuple(alpha)]

    def smallest(self) -> tuple[tuple, float]:
        """Nonzero moment of least magnitude."""
        a = min((a for a, v in self.values.items() if v > 0), key=self.values.__getitem__)
        return a, self.values[a]

    def to_dict(self) -> dict:
        return {
            "n1": self.shape.n1,
            "n2": self.shape.n2,
            "max_degree": self.max_degree,
            "normalized": self.normalize,
            "y0": self.y0,
            "threshold": self.threshold,
            "underflow": self.underflow,
            "moments": [[list(a), v] for a, v in self.values.items()],
        }

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")


def localizing_matrix(A, r: int, shape: ConeShape, table: MomentTable | None = None) -> np.ndarray:
    """``(sum_ij A_ij y_{a+b+e_i+e_j})`` over the basis ``I_<=r``."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    A = np.asarray(A, dtype=float)
    n = shape.n
    if A.shape != (n, n):
        raise ValueError(f"A must be {n}x{n}")
    table = table or MomentTable(shape, 2 * r + 2)
    if table.max_degree < 2 * r + 2:
        raise ValueError("moment table degree too small")
    basis = enumerate_le(n, r)
    pairs = [(i, j) for i in range(n) for j in range(n) if A[i, j] != 0]
    ee = [(add(unit(n, i), unit(n, j)), A[i, j]) for i, j in pairs]
    N = len(basis)
    M = np.zeros((N, N))
    for a in range(N):
        for b in range(a, N):
            ab = add(basis[a], basis[b])
            v = 0.0
            for g, c in ee:
                v += c * table.values[add(ab, g)]
            M[a, b] = M[b, a] = v
    return M


lasserre_matrix = localizing_matrix


def lasserre_accepts(A, r: int, shape: ConeShape, tol: float = 0.0, table: MomentTable | None = None) -> bool:
    """Whether ``A`` passes the depth-``r`` moment test (smallest eigenvalue ``>= -tol``)."""
    M = localizing_matrix(A, r, shape, table)
    return bool(np.linalg.eigvalsh(M)[0] >= -tol)


def lasserre_constraints(
    problem: ConicProblem,
    constant,
    coeffs: dict,
    r: int,
    shape: ConeShape,
    table: MomentTable | None = None,
    name: str = "lasserre",
) -> None:
    """Add ``M_r(A_0 + sum_v v A_v) >= 0`` for an affine matrix expression ``A``.

    The moment matrix is linear in ``A``, so the constraint is one PSD block
    of size ``|I_<=r|``.
    """
    table = table or MomentTable(shape, 2 * r + 2)
    F0 = localizing_matrix(constant, r, shape, table)
    Fv = {v: localizing_matrix(Av, r, shape, table) for v, Av in coeffs.items()}
    problem.add_cone("psd", F0, Fv, name=name)
