"""Jordan algebra of ``R^{n1} x R^{n2}`` whose cone of squares is ``R_+^{n1} x L^{n2}``.

Vectors are stored as flat arrays of length ``n = n1 + n2``: first the
orthant coordinates ``x_{11}, ..., x_{1 n1}``, then the second-order cone
coordinates ``x_{21}, ..., x_{2 n2}``.  The orthant part multiplies
elementwise; the second-order cone part multiplies as

    (t, w) o (s, u) = (t s + w.u, t u + s w).

The rank of the algebra is ``n1 + 2``.  A shape with ``n2 = 0`` is accepted
as the plain nonnegative orthant (rank ``n1``); it is only used by the
polynomial hierarchies, since frames with a second-order cone factor need
``n2 >= 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class ConeShape:
    """Dimensions of ``K = R_+^{n1} x L^{n2}``."""

    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 0:
            raise ValueError(f"n1 must be nonnegative, got {self.n1}")
        if self.n2 == 1 or self.n2 < 0:
            raise ValueError(f"n2 must be 0 or at least 2, got {self.n2}")
        if self.n < 1:
            raise ValueError("the cone must have at least one coordinate")

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    @property
    def has_soc(self) -> bool:
        return self.n2 >= 2

    @property
    def rank(self) -> int:
        return self.n1 + 2 if self.has_soc else self.n1

    def require_soc(self) -> None:
        if not self.has_soc:
            raise ValueError("this construction needs a second-order cone factor (n2 >= 2)")

    def split(self, x):
        """Return ``(orthant part, soc part)`` views of ``x``."""
        x = np.asarray(x)
        if x.shape[-1] != self.n:
            raise ValueError(f"expected length {self.n}, got {x.shape[-1]}")
        return x[..., : self.n1], x[..., self.n1 :]


@dataclass(frozen=True)
class JordanFrame:
    """Complete system of orthogonal primitive idempotents.

    ``elements`` has shape ``(rk, n)``; row ``i`` is ``c_i``.
    """

    shape: ConeShape
    elements: np.ndarray
    v: np.ndarray

    @property
    def rank(self) -> int:
        return self.elements.shape[0]

    def combine(self, weights) -> np.ndarray:
        """``sum_i weights[i] c_i``."""
        return np.asarray(weights, dtype=float) @ self.elements

    def check(self, tol: float = 1e-12) -> bool:
        e = identity(self.shape)
        c = self.elements
        if np.max(np.abs(c.sum(axis=0) - e)) > tol:
            return False
        for i in range(self.rank):
            for j in range(self.rank):
                p = jordan_product(c[i], c[j], self.shape)
                target = c[i] if i == j else 0.0
                if np.max(np.abs(p - target)) > tol:
                    return False
        return True


def _check_len(x, shape: ConeShape):
    if len(x) != shape.n:
        raise ValueError(f"expected an element of length {shape.n}, got {len(x)}")


def jordan_product(x, y, shape: ConeShape):
    """Jordan product; works with float arrays or sequences of Fractions."""
    _check_len(x, shape)
    _check_len(y, shape)
    n1 = shape.n1
    if isinstance(x, np.ndarray) and isinstance(y, np.ndarray) and x.dtype != object:
        out = np.empty(shape.n, dtype=np.result_type(x, y, float))
        out[:n1] = x[:n1] * y[:n1]
        if shape.has_soc:
            out[n1] = x[n1:] @ y[n1:]
            out[n1 + 1 :] = x[n1] * y[n1 + 1 :] + y[n1] * x[n1 + 1 :]
        return out
    out = [x[i] * y[i] for i in range(n1)]
    if shape.has_soc:
        out.append(sum(x[i] * y[i] for i in range(n1, shape.n)))
        out.extend(x[n1] * y[i] + y[n1] * x[i] for i in range(n1 + 1, shape.n))
    return out


def identity(shape: ConeShape) -> np.ndarray:
    e = np.zeros(shape.n)
    e[: shape.n1] = 1.0
    if shape.has_soc:
        e[shape.n1] = 1.0
    return e


def structure_constants(shape: ConeShape) -> np.ndarray:
    """Tensor ``T[i, j, k] = (e_j o e_k) . e_i`` over the canonical basis."""
    n, n1 = shape.n, shape.n1
    t = np.zeros((n, n, n))
    for i in range(n1):
        t[i, i, i] = 1.0
    if shape.has_soc:
        a = n1
        t[a, a, a] = 1.0
        for j in range(a + 1, n):
            t[j, a, j] = 1.0
            t[j, j, a] = 1.0
            t[a, j, j] = 1.0
    return t


def frame_at(shape: ConeShape, v, tol: float = 1e-12) -> JordanFrame:
    """Frame ``(e_11, ..., e_1n1, (1, v)/2, (1, -v)/2)`` for a unit vector ``v``."""
    shape.require_soc()
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape[0] != shape.n2 - 1:
        raise ValueError(f"v must have length {shape.n2 - 1}")
    if abs(np.linalg.norm(v) - 1.0) > tol:
        raise ValueError(f"v must be a unit vector, |v| = {np.linalg.norm(v)!r}")
    n1 = shape.n1
    c = np.zeros((shape.rank, shape.n))
    c[np.arange(n1), np.arange(n1)] = 1.0
    c[n1, n1] = 0.5
    c[n1, n1 + 1 :] = 0.5 * v
    c[n1 + 1, n1] = 0.5
    c[n1 + 1, n1 + 1 :] = -0.5 * v
    return JordanFrame(shape, c, v)


def frame_at_exact(shape: ConeShape, v) -> list[list[Fraction]]:
    """Rational version of :func:`frame_at`; ``v`` must be exactly unit."""
    shape.require_soc()
    v = [Fraction(t) for t in v]
    if sum(t * t for t in v) != 1:
        raise ValueError("v is not exactly a unit vector")
    n1, n = shape.n1, shape.n
    half = Fraction(1, 2)
    rows = []
    for i in range(n1):
        row = [Fraction(0)] * n
        row[i] = Fraction(1)
        rows.append(row)
    for sign in (1, -1):
        row = [Fraction(0)] * n
        row[n1] = half
        for k, t in enumerate(v):
            row[n1 + 1 + k] = sign * half * t
        rows.append(row)
    return rows


def default_tie_break(shape: ConeShape) -> np.ndarray:
    v = np.zeros(shape.n2 - 1)
    v[0] = 1.0
    return v


def spectral_decompose(x, shape: ConeShape, tie_break_v=None):
    """Eigenvalues and Jordan frame of ``x``.

    The eigenvalues are ordered as the frame: orthant coordinates, then
    ``t + |w|`` and ``t - |w|`` for the second-order cone part ``(t, w)``.
    When ``w = 0`` the frame uses ``tie_break_v`` (default ``(1, 0, ..., 0)``).
    """
    shape.require_soc()
    x = np.asarray(x, dtype=float)
    _check_len(x, shape)
    xo, xs = shape.split(x)
    t, w = xs[0], xs[1:]
    nw = np.linalg.norm(w)
    if nw > 0.0:
        v = w / nw
    else:
        v = default_tie_break(shape) if tie_break_v is None else np.asarray(tie_break_v, float)
    eig = np.concatenate([xo, [t + nw, t - nw]])
    return eig, frame_at(shape, v)


def eigenvalues(x, shape: ConeShape) -> np.ndarray:
    if not shape.has_soc:
        return np.asarray(x, dtype=float).copy()
    return spectral_decompose(x, shape)[0]


def project_to_frame(A, frame: JordanFrame) -> np.ndarray:
    """Matrix ``[c_i^T A c_j]`` of size ``rk``."""
    A = np.asarray(A, dtype=float)
    n = frame.shape.n
    if A.shape != (n, n):
        raise ValueError(f"A must be {n}x{n}, got {A.shape}")
    c = frame.elements
    out = c @ A @ c.T
    return 0.5 * (out + out.T)


def cone_membership(x, shape: ConeShape, tol: float = DEFAULT_TOL) -> bool:
    """Whether ``x`` lies in ``K`` up to an absolute tolerance."""
    x = np.asarray(x, dtype=float)
    _check_len(x, shape)
    xo, xs = shape.split(x)
    if xo.size and xo.min() < -tol:
        return False
    if shape.has_soc and xs[0] < np.linalg.norm(xs[1:]) - tol:
        return False
    return True


def cone_membership_exact(x, shape: ConeShape) -> bool:
    """Exact membership test for rational coordinates."""
    x = [Fraction(t) for t in x]
    _check_len(x, shape)
    n1 = shape.n1
    if any(t < 0 for t in x[:n1]):
        return False
    if shape.has_soc:
        t = x[n1]
        return t >= 0 and t * t >= sum(u * u for u in x[n1 + 1 :])
    return True
