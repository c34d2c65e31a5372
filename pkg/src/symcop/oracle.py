"""Solver-independent ground truth for copositivity over ``K = R_+^{n1} x L^{n2}``.

* :func:`sample_cone_min` minimizes ``x^T A x`` over uniform samples of the
  truncated cone ``Delta(K) = {x in K : e^T x <= 1}``.
* :func:`grid_cone_min` evaluates the frame-space grid: points
  ``sum_i mu_i c_i(v)`` with ``mu`` on a rational simplex grid and ``v`` from
  a sphere net; negative values come with an exact rational witness.
* :func:`dual_moment_check` tests PSD-ness of the moment matrix of a
  symmetric tensor.
* :func:`mc_moments` estimates moments of ``Delta(K)`` by rejection sampling,
  independently of the closed form.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .combinatorics import add, enumerate_eq
from .frame_hierarchies import yildirim_reject
from .jordan import ConeShape, cone_membership_exact, frame_at, frame_at_exact

CHUNK = 1 << 15


# -- uniform sampling of Delta(K) ----------------------------------------------


def sample_truncated_cone(shape: ConeShape, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent uniform points of ``Delta(K)`` (rows).

    The marginal density of ``(x_1, x_21)`` is proportional to
    ``x_21^(n2-1)`` on the simplex, i.e. a Dirichlet law with parameter
    ``n2`` on ``x_21``; given ``x_21`` the tail is uniform in the ball of
    radius ``x_21``.
    """
    n1, n2 = shape.n1, shape.n2
    if not shape.has_soc:
        return rng.dirichlet(np.ones(n1 + 1), size=count)[:, :n1]
    alpha = np.ones(n1 + 2)
    alpha[n1] = n2
    d = rng.dirichlet(alpha, size=count)
    x1, x21 = d[:, :n1], d[:, n1]
    k = n2 - 1
    g = rng.standard_normal((count, k))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    rad = x21 * rng.random(count) ** (1.0 / k)
    return np.hstack([x1, x21[:, None], g * rad[:, None]])


def sample_cone_min(A, shape: ConeShape, samples: int = 100_000, seed=0) -> tuple[float, np.ndarray]:
    """Minimum of ``x^T A x`` over ``samples`` uniform points of ``Delta(K)``.

    Draws are made in fixed-size chunks from one seeded generator, so the
    result depends only on ``(A, shape, samples, seed)``.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    A = np.asarray(A, dtype=float)
    rng = np.random.default_rng(seed)
    best, arg = math.inf, None
    left = samples
    while left > 0:
        m = min(CHUNK, left)
        X = sample_truncated_cone(shape, m, rng)
        vals = np.einsum("ij,jk,ik->i", X, A, X)
        i = int(np.argmin(vals))
        if vals[i] < best:
            best, arg = float(vals[i]), X[i].copy()
        left -= m
    return best, arg


# -- frame grid with exact witnesses --------------------------------------------


def sphere_net(dim: int, k: int) -> np.ndarray:
    """Deterministic unit vectors in ``R^dim``: ``+-1``, ``k`` angles, or Halton points."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        t = 2 * np.pi * np.arange(k) / k
        return np.column_stack([np.cos(t), np.sin(t)])
    axes = np.vstack([np.eye(dim), -np.eye(dim)])
    u = qmc.Halton(d=dim, scramble=False).random(k + 1)[1:]
    g = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return np.vstack([axes, g])


def rational_unit(v, max_den: int = 10**6) -> tuple[Fraction, ...]:
    """Exact rational unit vector near ``v`` (inverse stereographic projection)."""
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    if len(v) == 1:
        return (Fraction(1) if v[0] >= 0 else Fraction(-1),)
    # project from the pole -e_1 so that the region near v is well conditioned
    if v[0] < -0.5:
        w = rational_unit(-v, max_den)
        return tuple(-t for t in w)
    y = [Fraction(float(t) / (1.0 + v[0])).limit_denominator(max_den) for t in v[1:]]
    s = sum(t * t for t in y)
    return tuple([(1 - s) / (1 + s)] + [2 * t / (1 + s) for t in y])


@dataclass
class Witness:
    """Exact point of ``K`` with ``x^T A x < 0``."""

    shape: ConeShape
    x: tuple
    value: Fraction

    def check(self, A) -> bool:
        """Replay: membership in ``K`` and negativity, in exact arithmetic."""
        Af = [[Fraction(float(a)) for a in row] for row in np.asarray(A, dtype=float)]
        val = exact_quadratic(Af, self.x)
        return cone_membership_exact(list(self.x), self.shape) and val < 0

    def to_dict(self) -> dict:
        return {
            "n1": self.shape.n1,
            "n2": self.shape.n2,
            "x": [str(t) for t in self.x],
            "value": str(self.value),
            "value_float": float(self.value),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Witness":
        return cls(ConeShape(d["n1"], d["n2"]), tuple(Fraction(t) for t in d["x"]), Fraction(d["value"]))

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")


def exact_quadratic(A, x) -> Fraction:
    n = len(x)
    return sum(A[i][j] * x[i] * x[j] for i in range(n) for j in range(n) if A[i][j] and x[i] and x[j])


def exact_witness(A, shape: ConeShape, mu, v) -> Witness:
    """Exact point ``sum_i mu_i c_i(v)`` for rational ``mu`` and rationalized ``v``."""
    Af = [[Fraction(float(a)) for a in row] for row in np.asarray(A, dtype=float)]
    mu = [Fraction(m) for m in mu]
    if shape.has_soc:
        frame = frame_at_exact(shape, rational_unit(v))
        n = shape.n
        x = tuple(sum(mu[i] * frame[i][j] for i in range(len(mu))) for j in range(n))
    else:
        x = tuple(mu)
    return Witness(shape, x, exact_quadratic(Af, x))


@dataclass
class GridResult:
    lam: float
    L: float
    mu: tuple
    v: np.ndarray | None
    witness: Witness | None


def grid_cone_min(A, shape: ConeShape, k: int) -> GridResult:
    """Minimum of ``x^T A x`` over the frame grid of resolution ``k``.

    ``lam`` is the grid minimum over ``mu`` in the simplex with denominator
    ``k`` (frame coordinates), ``L`` the largest ``|c_i^T A c_j|`` seen.  A
    negative minimum is confirmed by an exact rational witness in ``K``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    A = np.asarray(A, dtype=float)
    rk = shape.rank
    mus = np.array(enumerate_eq(rk, k), dtype=float) / k
    nets = sphere_net(shape.n2 - 1, k) if shape.has_soc else [None]
    lam, L, arg = math.inf, 0.0, None
    for v in nets:
        if v is None:
            Ab = A
        else:
            c = frame_at(shape, v).elements
            Ab = c @ A @ c.T
        L = max(L, float(np.abs(Ab).max()))
        vals = np.einsum("ij,jk,ik->i", mus, Ab, mus)
        i = int(np.argmin(vals))
        if vals[i] < lam:
            lam, arg = float(vals[i]), (i, v)
    i, v = arg
    mu = tuple(Fraction(int(b), k) for b in enumerate_eq(rk, k)[i])
    wit = None
    if lam < 0:
        w = exact_witness(A, shape, mu, v)
        if w.value < 0:
            wit = w
    return GridResult(lam, L, mu, v, wit)


# -- moment-matrix membership -----------------------------------------------------


def moment_matrix(X: dict, n: int, m: int) -> np.ndarray:
    """``M(X)_{a,b} = X[a + b]`` over ``a, b`` in ``I_=m``."""
    basis = enumerate_eq(n, m)
    N = len(basis)
    M = np.empty((N, N))
    for i in range(N):
        for j in range(i, N):
            M[i, j] = M[j, i] = float(X.get(add(basis[i], basis[j]), 0.0))
    return M


def dual_moment_check(X: dict, n: int, m: int, tol: float = 1e-10) -> tuple[bool, np.ndarray | None]:
    """Whether ``M(X)`` is PSD; otherwise an eigenvector with negative eigenvalue."""
    M = moment_matrix(X, n, m)
    w, V = np.linalg.eigh(M)
    scale = max(1.0, float(np.abs(M).max(initial=0.0)))
    if w[0] >= -tol * scale:
        return True, None
    return False, V[:, 0]


def point_tensor(x, m2: int) -> dict:
    """Coefficients ``x^gamma`` of ``x^{(x) m2}`` for ``|gamma| = m2``."""
    x = np.asarray(x, dtype=float)
    return {g: float(np.prod(x ** np.array(g))) for g in enumerate_eq(len(x), m2)}


def zero_odd(X: dict) -> dict:
    """Copy of ``X`` with entries of multi-indices containing an odd exponent set to 0."""
    return {g: (0.0 if any(a % 2 for a in g) else v) for g, v in X.items()}


# -- Monte Carlo moments -------------------------------------------------------------


@dataclass
class MCMoments:
    values: dict
    stderr: dict
    accepted: int
    proposed: int


def mc_moments(alphas, shape: ConeShape, samples: int = 1_000_000, seed=0) -> MCMoments:
    """Rejection-sampling estimates of ``int_{Delta(K)} x^alpha dx``.

    Proposals: ``(x_1, x_21)`` uniform on the simplex ``{sum <= 1}`` and the
    tail uniform on ``[-1, 1]^{n2-1}``; a proposal is kept when
    ``|tail| <= x_21``.  Sampling continues until ``samples`` are accepted; each
    moment is ``volume(proposal) * mean(indicator * x^alpha)``.
    """
    shape.require_soc()
    n1, n2 = shape.n1, shape.n2
    alphas = [tuple(a) for a in alphas]
    P = np.array(alphas, dtype=float)
    vol = 2.0 ** (n2 - 1) / math.factorial(n1 + 1)
    rng = np.random.default_rng(seed)
    s1 = np.zeros(len(alphas))
    s2 = np.zeros(len(alphas))
    acc = tot = 0
    while acc < samples:
        d = rng.dirichlet(np.ones(n1 + 2), size=CHUNK)[:, : n1 + 1]
        w = rng.uniform(-1.0, 1.0, size=(CHUNK, n2 - 1))
        keep = np.linalg.norm(w, axis=1) <= d[:, n1]
        X = np.hstack([d[keep], w[keep]])
        # x^alpha for every kept point and every alpha
        vals = np.prod(X[:, None, :] ** P[None], axis=2)
        s1 += vals.sum(axis=0)
        s2 += (vals**2).sum(axis=0)
        acc += int(keep.sum())
        tot += CHUNK
    mean = s1 / tot
    var = s2 / tot - mean**2
    est = vol * mean
    err = vol * np.sqrt(np.maximum(var, 0.0) / tot)
    return MCMoments(dict(zip(alphas, est)), dict(zip(alphas, err)), acc, tot)


def refute_with_yildirim(A, r: int, shape: ConeShape) -> Witness | None:
    """Exact witness from the most violated depth-``r`` outer condition, if any.

    The violated condition gives frame weights ``x`` and a direction ``v``;
    the witness is ``sum_i x_i c_i(v)`` with ``v`` rationalized, and is only
    returned when its exact value is negative.
    """
    rej = yildirim_reject(A, r, shape)
    if rej is None:
        return None
    w = exact_witness(A, shape, rej.x, rej.v)
    return w if w.value < 0 else None
