"""Frame-based inner (dP-type) and outer (Yildirim-type) hierarchies.

Both hierarchies rest on the fact that a matrix ``A`` is copositive over
``K = R_+^{n1} x L^{n2}`` iff for every unit ``v`` the rank-``rk`` matrix
``[c_i^T A c_j]`` is copositive over the nonnegative orthant, where
``(c_1, ..., c_rk)`` is the Jordan frame at ``v``.  Expanding

    f(x; A, v) = w^T A w,   w = (2 x_1, x_21 + x_22, (x_21 - x_22) v),

(twice the frame point, so the printed block formulas come out integral)
turns each condition into a quadratic form in ``(1, v)`` whose ``n2 x n2``
coefficient matrix must be copositive over the boundary of ``L^{n2}``.  By
the S-lemma this is the semidefinite condition ``exists t: M - t J >= 0``
with ``J = diag(1, -I)``.

The dP-type inner hierarchy requires this for every coefficient of
``(sum x)^r f(x; A, v)``; the Yildirim-type outer hierarchy requires it for
``f`` evaluated at each point of a rational simplex grid.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .combinatorics import enumerate_eq
from .jordan import ConeShape


class ConstraintKind(enum.Enum):
    """How a block condition is emitted as a cone constraint."""

    LIFTED = "psd_lifted"  # exists t: M - t J in PSD(n2)
    REDUCED = "psd_reduced"  # m11 I + m22 in PSD(n2 - 1)
    SOC = "soc"  # (m11, 2 m21) in L^{n2}
    NONNEG = "nonneg"  # m11 >= 0


@dataclass(frozen=True)
class Blocks:
    """Partition of a symmetric ``n x n`` matrix along the cone factors."""

    a11: np.ndarray  # n1 x n1
    a121: np.ndarray  # n1, column of x_21
    a122: np.ndarray  # (n2-1) x n1
    a2121: float
    a2122: np.ndarray  # n2-1
    a2222: np.ndarray  # (n2-1) x (n2-1)


def partition(A, shape: ConeShape) -> Blocks:
    shape.require_soc()
    A = np.asarray(A, dtype=float)
    if A.shape != (shape.n, shape.n):
        raise ValueError(f"A must be {shape.n}x{shape.n}, got {A.shape}")
    k = shape.n1
    return Blocks(
        a11=A[:k, :k],
        a121=A[:k, k],
        a122=A[k + 1 :, :k],
        a2121=float(A[k, k]),
        a2122=A[k + 1 :, k],
        a2222=A[k + 1 :, k + 1 :],
    )


@dataclass(frozen=True)
class QuadBlock:
    """Coefficients of ``(1, v)^T M (1, v)`` split as scalar, linear and quadratic parts."""

    m11: float
    m21: np.ndarray
    m22: np.ndarray
    source: tuple

    @property
    def matrix(self) -> np.ndarray:
        k = self.m21.shape[0] + 1
        M = np.empty((k, k))
        M[0, 0] = self.m11
        M[1:, 0] = self.m21
        M[0, 1:] = self.m21
        M[1:, 1:] = self.m22
        return M

    def value(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return float(self.m11 + 2.0 * self.m21 @ v + v @ self.m22 @ v)


BlockM = QuadBlock
BlockN = QuadBlock


def build_M(A, alpha, shape: ConeShape) -> QuadBlock:
    """Block matrix attached to the coefficient of ``x^alpha`` in ``(sum x)^r f``.

    The returned matrix is scaled by ``alpha! / r!`` relative to that
    coefficient, matching the integral block formulas.
    """
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != shape.rank:
        raise ValueError(f"alpha must have {shape.rank} entries")
    B = partition(A, shape)
    k = shape.n1
    a1 = np.asarray(alpha[:k], dtype=float)
    p, q = alpha[k], alpha[k + 1]
    m11 = (
        4.0 * (a1 @ B.a11 @ a1 - a1 @ np.diag(B.a11))
        + 4.0 * (p + q) * (a1 @ B.a121)
        + (p + q) * (p + q - 1) * B.a2121
    )
    m21 = 2.0 * (p - q) * (B.a122 @ a1) + (p - q) * (p + q - 1) * B.a2122
    m22 = ((p - q) ** 2 - (p + q)) * B.a2222
    return QuadBlock(float(m11), m21, m22.copy(), alpha)


def dp_kind(alpha, shape: ConeShape, concise: bool) -> ConstraintKind | None:
    """Constraint kind for ``alpha``; ``None`` when the concise form drops it."""
    if not concise:
        return ConstraintKind.LIFTED
    p, q = alpha[shape.n1], alpha[shape.n1 + 1]
    if p > q:
        return None
    if p == q:
        return ConstraintKind.NONNEG if p == 0 else ConstraintKind.REDUCED
    # (p, q) = (k(k-1)/2, k(k+1)/2) makes the quadratic part vanish
    kk = q - p
    if p == kk * (kk - 1) // 2:
        return ConstraintKind.SOC
    return ConstraintKind.LIFTED


def dp_indices(r: int, shape: ConeShape, concise: bool = False):
    """``(alpha, kind)`` pairs of the depth-``r`` dP constraints, in enumeration order."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    shape.require_soc()
    out = []
    for alpha in enumerate_eq(shape.rank, r + 2):
        kind = dp_kind(alpha, shape, concise)
        if kind is not None:
            out.append((alpha, kind))
    return out


def dp_constraints(A, r: int, shape: ConeShape, concise: bool = False):
    """List of ``(QuadBlock, ConstraintKind)`` for the dP-type inner hierarchy."""
    return [(build_M(A, alpha, shape), kind) for alpha, kind in dp_indices(r, shape, concise)]


def yildirim_points(r: int, rk: int) -> list[tuple[Fraction, ...]]:
    """Rational grid ``{x in simplex : (k+2) x integral for some 0 <= k <= r}``."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    seen = set()
    out = []
    for k in range(r + 1):
        den = k + 2
        for beta in enumerate_eq(rk, den):
            x = tuple(Fraction(b, den) for b in beta)
            if x not in seen:
                seen.add(x)
                out.append(x)
    return out


def build_N(x, A, shape: ConeShape) -> QuadBlock:
    """Block matrix of ``f(x; A, v)`` viewed as a quadratic form in ``(1, v)``."""
    if len(x) != shape.rank:
        raise ValueError(f"x must have {shape.rank} entries")
    B = partition(A, shape)
    k = shape.n1
    xf = np.array([float(t) for t in x])
    x1 = xf[:k]
    p, q = xf[k], xf[k + 1]
    n11 = 4.0 * (x1 @ B.a11 @ x1) + 4.0 * (p + q) * (x1 @ B.a121) + (p + q) ** 2 * B.a2121
    n21 = 2.0 * (p - q) * (B.a122 @ x1) + (p * p - q * q) * B.a2122
    n22 = (p - q) ** 2 * B.a2222
    return QuadBlock(float(n11), n21, n22.copy(), tuple(x))


def yildirim_kind(x, shape: ConeShape, concise: bool) -> ConstraintKind | None:
    if not concise:
        return ConstraintKind.LIFTED
    p, q = x[shape.n1], x[shape.n1 + 1]
    if p > q:
        return None
    if p == q:
        return ConstraintKind.NONNEG
    return ConstraintKind.LIFTED


def yildirim_indices(r: int, shape: ConeShape, concise: bool = False):
    shape.require_soc()
    out = []
    for x in yildirim_points(r, shape.rank):
        kind = yildirim_kind(x, shape, concise)
        if kind is not None:
            out.append((x, kind))
    return out


def yildirim_constraints(A, r: int, shape: ConeShape, concise: bool = False):
    """List of ``(QuadBlock, ConstraintKind)`` for the Yildirim-type outer hierarchy."""
    return [(build_N(x, A, shape), kind) for x, kind in yildirim_indices(r, shape, concise)]


# -- direct (solver-free) evaluation of block conditions --------------------


def lift_matrix(M: np.ndarray, t: float) -> np.ndarray:
    out = M.copy()
    out[0, 0] -= t
    idx = np.arange(1, M.shape[0])
    out[idx, idx] += t
    return out


def sz_lift_margin(M: np.ndarray) -> tuple[float, float]:
    """``max_t lambda_min(M - t J)`` and its maximizer.

    The function is concave in ``t``; the condition ``exists t: M - t J >= 0``
    holds iff the returned margin is nonnegative.
    """
    M = np.asarray(M, dtype=float)

    def neg(t):
        return -np.linalg.eigvalsh(lift_matrix(M, t))[0]

    scale = 1.0 + np.max(np.abs(M))
    # M - tJ has (0,0) entry M00 - t and trailing diagonal M_ii + t: the optimum
    # lies where both can be nonnegative, a window of width ~ 2 scale.  The
    # objective is concave but has kinks, so golden-section search is used
    # rather than a smooth method.
    lo, hi = -4 * scale, 4 * scale
    g = (math.sqrt(5) - 1) / 2
    a, b = hi - g * (hi - lo), lo + g * (hi - lo)
    fa, fb = neg(a), neg(b)
    while hi - lo > 1e-13 * scale:
        if fa <= fb:
            hi, b, fb = b, a, fa
            a = hi - g * (hi - lo)
            fa = neg(a)
        else:
            lo, a, fa = a, b, fb
            b = lo + g * (hi - lo)
            fb = neg(b)
    t = a if fa <= fb else b
    return -float(min(fa, fb)), float(t)


def sphere_quadratic_min(block: QuadBlock) -> tuple[float, np.ndarray]:
    """Minimize ``(1, v)^T M (1, v)`` over unit vectors ``v``.

    Solves ``min v^T Q v + 2 g^T v + c`` on the unit sphere.  At the global
    minimizer ``(Q - mu I) v = -g`` with ``mu <= lambda_min(Q)``; ``mu`` is found
    from the secular equation ``|v(mu)| = 1`` unless ``g`` is orthogonal to the
    bottom eigenspace and too short (the "hard case").
    """
    Q, g = block.m22, block.m21
    d = g.shape[0]
    if d == 1:
        vals = [block.value([1.0]), block.value([-1.0])]
        i = int(np.argmin(vals))
        return vals[i], np.array([1.0 if i == 0 else -1.0])
    lam, U = np.linalg.eigh(0.5 * (Q + Q.T))
    gt = U.T @ g
    lmin = lam[0]
    scale = 1.0 + np.max(np.abs(lam)) + np.linalg.norm(g)
    bottom = lam - lmin <= 1e-12 * scale
    if np.any(np.abs(gt[bottom]) > 1e-14 * scale):
        active = np.ones(d, dtype=bool)
    else:
        active = ~bottom

    def norm2(mu):
        return float(np.sum((gt[active] / (lam[active] - mu)) ** 2))

    limit = norm2(lmin) if not np.all(active) else np.inf
    if limit > 1.0:
        hi = lmin
        lo = lmin - np.linalg.norm(g) - 1.0
        f = lambda m: norm2(m) - 1.0  # noqa: E731
        if np.all(active):
            # the pole sits at lmin itself; step inside until the sign changes
            step = 1e-3 * (hi - lo)
            hi = lmin - step
            while f(hi) < 0 and step > 1e-300:
                step /= 16
                hi = lmin - step
        mu = brentq(f, lo, hi, xtol=1e-15 * scale, maxiter=500) if f(hi) > 0 else hi
        w = np.where(active, -gt / np.where(active, lam - mu, 1.0), 0.0)
        v = U @ w
    else:
        w = np.where(active, -gt / np.where(active, lam - lmin, 1.0), 0.0)
        rest = max(0.0, 1.0 - float(w @ w))
        v = U @ w + math.sqrt(rest) * U[:, 0]
    v = v / np.linalg.norm(v)
    candidates = [v] + [s * U[:, i] for i in range(d) for s in (1.0, -1.0)]
    vals = [block.value(c) for c in candidates]
    i = int(np.argmin(vals))
    return float(vals[i]), candidates[i]


def block_margin(block: QuadBlock, kind: ConstraintKind) -> float:
    """Nonnegative iff the block condition of the given kind holds."""
    if kind is ConstraintKind.NONNEG:
        return block.m11
    if kind is ConstraintKind.SOC:
        return block.m11 - 2.0 * float(np.linalg.norm(block.m21))
    if kind is ConstraintKind.REDUCED:
        k = block.m22.shape[0]
        return float(np.linalg.eigvalsh(block.m11 * np.eye(k) + block.m22)[0])
    return sz_lift_margin(block.matrix)[0]


def constraints_margin(constraints) -> float:
    """Smallest margin over a constraint list (``inf`` for an empty list)."""
    return min((block_margin(b, k) for b, k in constraints), default=np.inf)


@dataclass(frozen=True)
class YildirimRejection:
    """A grid point and SOC direction at which the outer condition fails."""

    x: tuple
    v: np.ndarray
    value: float


def yildirim_reject(A, r: int, shape: ConeShape) -> YildirimRejection | None:
    """Most violated outer condition at depth ``r`` (``None`` if ``A`` is accepted)."""
    worst = None
    for x in yildirim_points(r, shape.rank):
        val, v = sphere_quadratic_min(build_N(x, A, shape))
        if worst is None or val < worst.value:
            worst = YildirimRejection(x, v, val)
    if worst is not None and worst.value < 0:
        return worst
    return None
