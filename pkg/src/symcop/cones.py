"""Batched symmetric-cone kernels used by the interior-point solver.

A cone vector is a flat array laid out as: nonnegative orthant entries, then
second-order cone blocks, then positive semidefinite blocks in ``svec``
form (upper triangle, row-major, off-diagonal entries scaled by ``sqrt(2)``
so that ``svec(X) . svec(Y) = trace(X Y)``).  Consecutive blocks of equal
size form a group and are processed as one stacked numpy array.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

SQRT2 = np.sqrt(2.0)


@lru_cache(maxsize=None)
def svec_indices(k: int):
    iu, ju = np.triu_indices(k)
    scale = np.where(iu == ju, 1.0, SQRT2)
    return iu, ju, scale


def svec_dim(k: int) -> int:
    return k * (k + 1) // 2


def svec(X: np.ndarray) -> np.ndarray:
    """Stacked ``svec`` over the last two axes."""
    k = X.shape[-1]
    iu, ju, scale = svec_indices(k)
    return X[..., iu, ju] * scale


def smat(v: np.ndarray, k: int) -> np.ndarray:
    """Inverse of :func:`svec` over the last axis."""
    iu, ju, scale = svec_indices(k)
    X = np.zeros(v.shape[:-1] + (k, k))
    vals = v / scale
    X[..., iu, ju] = vals
    X[..., ju, iu] = vals
    return X


@dataclass(frozen=True)
class Group:
    kind: str  # "q" or "s"
    dim: int  # block order (vector length for q, matrix order for s)
    count: int
    start: int  # first row

    @property
    def width(self) -> int:
        return self.dim if self.kind == "q" else svec_dim(self.dim)

    @property
    def stop(self) -> int:
        return self.start + self.count * self.width

    def view(self, v: np.ndarray) -> np.ndarray:
        """Reshape the rows of this group to ``(count, width, ...)``."""
        return v[self.start : self.stop].reshape((self.count, self.width) + v.shape[1:])


@dataclass(frozen=True)
class ConeDims:
    """Cone layout: ``l`` orthant rows, SOC block sizes ``q``, PSD orders ``s``."""

    l: int = 0
    q: tuple[int, ...] = ()
    s: tuple[int, ...] = ()
    groups: tuple[Group, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        groups = []
        start = self.l
        for kind, dims in (("q", self.q), ("s", self.s)):
            i = 0
            while i < len(dims):
                j = i
                while j < len(dims) and dims[j] == dims[i]:
                    j += 1
                g = Group(kind, dims[i], j - i, start)
                groups.append(g)
                start = g.stop
                i = j
        object.__setattr__(self, "groups", tuple(groups))

    @property
    def size(self) -> int:
        return self.l + sum(self.q) + sum(svec_dim(k) for k in self.s)

    @property
    def degree(self) -> int:
        return self.l + len(self.q) + sum(self.s)

    def identity(self) -> np.ndarray:
        e = np.zeros(self.size)
        e[: self.l] = 1.0
        for g in self.groups:
            blk = g.view(e)
            if g.kind == "q":
                blk[:, 0] = 1.0
            else:
                blk[:] = svec(np.eye(g.dim))
        return e

    # -- Jordan algebra on cone vectors ---------------------------------

    def product(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        out = np.empty_like(u)
        out[: self.l] = u[: self.l] * v[: self.l]
        for g in self.groups:
            a, b, o = g.view(u), g.view(v), g.view(out)
            if g.kind == "q":
                o[:, 0] = np.einsum("ij,ij->i", a, b)
                o[:, 1:] = a[:, :1] * b[:, 1:] + b[:, :1] * a[:, 1:]
            else:
                X, Y = smat(a, g.dim), smat(b, g.dim)
                P = X @ Y
                o[:] = svec(0.5 * (P + np.swapaxes(P, -1, -2)))
        return out

    def max_step(self, lam: "ScaledPoint", d: np.ndarray) -> float:
        """Largest ``a >= 0`` with ``lam + a d`` in the cone (inf if unbounded)."""
        best = np.inf
        l = self.l
        if l:
            dl = d[:l]
            neg = dl < 0
            if np.any(neg):
                best = min(best, float(np.min(-lam.vec[:l][neg] / dl[neg])))
        for g in self.groups:
            db = g.view(d)
            if g.kind == "q":
                x = g.view(lam.vec)
                best = min(best, _soc_max_step(x, db))
            else:
                ev = lam.eigs[g]
                scale = 1.0 / np.sqrt(ev)
                D = smat(db, g.dim) * scale[:, :, None] * scale[:, None, :]
                mn = np.linalg.eigvalsh(D)[:, 0]
                worst = -np.min(mn)
                if worst > 0:
                    best = min(best, 1.0 / worst)
        return best

    def in_interior(self, v: np.ndarray) -> bool:
        if self.l and np.min(v[: self.l]) <= 0:
            return False
        for g in self.groups:
            b = g.view(v)
            if g.kind == "q":
                if np.any(b[:, 0] <= np.linalg.norm(b[:, 1:], axis=1)):
                    return False
            else:
                if np.any(np.linalg.eigvalsh(smat(b, g.dim))[:, 0] <= 0):
                    return False
        return True

    def violation(self, v: np.ndarray) -> float:
        """Largest amount by which ``v`` fails to lie in the cone (0 if inside)."""
        worst = 0.0
        if self.l:
            worst = max(worst, float(-np.min(v[: self.l], initial=0.0)))
        for g in self.groups:
            b = g.view(v)
            if g.kind == "q":
                gap = np.linalg.norm(b[:, 1:], axis=1) - b[:, 0]
                worst = max(worst, float(np.max(gap, initial=0.0)))
            else:
                mn = np.linalg.eigvalsh(smat(b, g.dim))[:, 0]
                worst = max(worst, float(-np.min(mn, initial=0.0)))
        return worst

    def nt_scaling(self, s: np.ndarray, z: np.ndarray) -> "Scaling":
        return Scaling(self, s, z)


def _soc_max_step(x: np.ndarray, d: np.ndarray) -> float:
    """Batched max step for interior SOC points ``x`` along ``d``."""
    Jd = d.copy()
    Jd[:, 1:] *= -1
    a = np.einsum("ij,ij->i", d, Jd)
    b = 2.0 * np.einsum("ij,ij->i", x, Jd)
    c = x[:, 0] ** 2 - np.einsum("ij,ij->i", x[:, 1:], x[:, 1:])
    c = np.maximum(c, 0.0)
    steps = np.full(x.shape[0], np.inf)
    disc = b * b - 4 * a * c
    for i in range(x.shape[0]):
        ai, bi, ci = a[i], b[i], c[i]
        if ci == 0.0:
            # on the boundary already: only a step that stays inside is allowed
            steps[i] = 0.0 if (bi < 0 or (bi == 0 and ai < 0)) else np.inf
            continue
        if abs(ai) < 1e-300:
            if bi < 0:
                steps[i] = -ci / bi
            continue
        if disc[i] < 0:
            continue
        sq = np.sqrt(disc[i])
        # numerically stable roots
        qq = -0.5 * (bi + np.copysign(sq, bi))
        r1 = qq / ai
        r2 = ci / qq if qq != 0 else np.inf
        roots = [r for r in (r1, r2) if r > 0]
        if ai < 0:
            steps[i] = max(roots) if roots else 0.0
        elif roots:
            steps[i] = min(roots)
    return float(np.min(steps)) if steps.size else np.inf


class ScaledPoint:
    """The scaled iterate ``lambda``; PSD blocks are diagonal."""

    def __init__(self, dims: ConeDims, vec: np.ndarray, eigs: dict):
        self.dims = dims
        self.vec = vec
        self.eigs = eigs


class Scaling:
    """Nesterov-Todd scaling ``W`` with ``W z = W^{-T} s = lambda``."""

    def __init__(self, dims: ConeDims, s: np.ndarray, z: np.ndarray):
        self.dims = dims
        l = dims.l
        self.d = np.sqrt(s[:l] / z[:l])
        lam = np.empty_like(s)
        lam[:l] = np.sqrt(s[:l] * z[:l])
        eigs = {}
        self.soc = {}
        self.psd = {}
        for g in dims.groups:
            sb, zb = g.view(s), g.view(z)
            if g.kind == "q":
                beta, wbar = _soc_nt(sb, zb)
                self.soc[g] = (beta, wbar)
                g.view(lam)[:] = _soc_apply_h(wbar, zb) * beta[:, None]
            else:
                R, Rinv, ev = _psd_nt(smat(sb, g.dim), smat(zb, g.dim))
                self.psd[g] = (R, Rinv)
                eigs[g] = ev
                g.view(lam)[:] = svec(ev[:, :, None] * np.eye(g.dim))
        self.lam = ScaledPoint(dims, lam, eigs)

    # W is symmetric on the orthant and SOC blocks; PSD blocks use R.

    def apply(self, v: np.ndarray, mode: str) -> np.ndarray:
        """Apply ``W`` ("W"), ``W^T`` ("WT"), ``W^{-1}`` ("Winv") or ``W^{-T}`` ("WinvT").

        ``v`` may be a vector or a matrix whose columns are cone vectors.
        """
        l = self.dims.l
        out = np.empty_like(v, dtype=float)
        d = self.d if v.ndim == 1 else self.d[:, None]
        out[:l] = v[:l] * d if mode in ("W", "WT") else v[:l] / d
        for g in self.dims.groups:
            vb = g.view(v)
            ob = g.view(out)
            if g.kind == "q":
                beta, wbar = self.soc[g]
                if mode in ("W", "WT"):
                    ob[:] = _soc_apply_h(wbar, vb) * _bcast(beta, vb)
                else:
                    ob[:] = _soc_apply_hinv(wbar, vb) / _bcast(beta, vb)
            else:
                R, Rinv = self.psd[g]
                k = g.dim
                if vb.ndim == 2:
                    X = smat(vb, k)
                    Rb = R
                    Rib = Rinv
                else:
                    X = smat(np.swapaxes(vb, 1, 2), k)  # (count, ncols, k, k)
                    Rb = R[:, None]
                    Rib = Rinv[:, None]
                if mode == "W":
                    Y = np.swapaxes(Rb, -1, -2) @ X @ Rb
                elif mode == "WT":
                    Y = Rb @ X @ np.swapaxes(Rb, -1, -2)
                elif mode == "Winv":
                    Y = np.swapaxes(Rib, -1, -2) @ X @ Rib
                else:
                    Y = Rib @ X @ np.swapaxes(Rib, -1, -2)
                res = svec(Y)
                ob[:] = res if vb.ndim == 2 else np.swapaxes(res, 1, 2)
        return out

    def lam_div(self, v: np.ndarray) -> np.ndarray:
        """Solve ``lambda o u = v`` for ``u``."""
        dims = self.dims
        lam = self.lam.vec
        out = np.empty_like(v)
        l = dims.l
        out[:l] = v[:l] / lam[:l]
        for g in dims.groups:
            vb, ob = g.view(v), g.view(out)
            if g.kind == "q":
                x = g.view(lam)
                det = x[:, 0] ** 2 - np.einsum("ij,ij->i", x[:, 1:], x[:, 1:])
                u0 = (x[:, 0] * vb[:, 0] - np.einsum("ij,ij->i", x[:, 1:], vb[:, 1:])) / det
                ob[:, 0] = u0
                ob[:, 1:] = (vb[:, 1:] - u0[:, None] * x[:, 1:]) / x[:, :1]
            else:
                ev = self.lam.eigs[g]
                iu, ju, _ = svec_indices(g.dim)
                ob[:] = vb * (2.0 / (ev[:, iu] + ev[:, ju]))
        return out


def _bcast(beta, vb):
    return beta[:, None] if vb.ndim == 2 else beta[:, None, None]


def _soc_nt(s, z):
    sj = np.sqrt(np.maximum(s[:, 0] ** 2 - np.einsum("ij,ij->i", s[:, 1:], s[:, 1:]), 1e-300))
    zj = np.sqrt(np.maximum(z[:, 0] ** 2 - np.einsum("ij,ij->i", z[:, 1:], z[:, 1:]), 1e-300))
    sb = s / sj[:, None]
    zb = z / zj[:, None]
    gamma = np.sqrt(np.maximum((1.0 + np.einsum("ij,ij->i", sb, zb)) / 2.0, 1e-300))
    Jz = zb.copy()
    Jz[:, 1:] *= -1
    wbar = (sb + Jz) / (2.0 * gamma[:, None])
    beta = np.sqrt(sj / zj)
    return beta, wbar


def _soc_apply_h(w, v):
    """Apply the hyperbolic rotation ``H(w)`` with ``w^T J w = 1`` (batched)."""
    w0 = w[:, 0]
    w1 = w[:, 1:]
    if v.ndim == 2:
        v0, v1 = v[:, 0], v[:, 1:]
        inner = np.einsum("ij,ij->i", w1, v1)
        out = np.empty_like(v)
        out[:, 0] = w0 * v0 + inner
        out[:, 1:] = v1 + (v0 + inner / (1.0 + w0))[:, None] * w1
        return out
    v0, v1 = v[:, 0, :], v[:, 1:, :]
    inner = np.einsum("ij,ijk->ik", w1, v1)
    out = np.empty_like(v)
    out[:, 0, :] = w0[:, None] * v0 + inner
    out[:, 1:, :] = v1 + (v0 + inner / (1.0 + w0)[:, None])[:, None, :] * w1[:, :, None]
    return out


def _soc_apply_hinv(w, v):
    """``H(w)^{-1} = J H(w) J``."""
    Jv = v.copy()
    Jv[:, 1:] *= -1
    out = _soc_apply_h(w, Jv)
    out[:, 1:] *= -1
    return out


def _psd_factor(X):
    try:
        return np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        ev, Q = np.linalg.eigh(X)
        ev = np.maximum(ev, 1e-300)
        # any square root works for the NT construction
        return Q * np.sqrt(ev)[:, None, :]


def _psd_nt(S, Z):
    Ls = _psd_factor(S)
    Lz = _psd_factor(Z)
    U, lam, Vt = np.linalg.svd(np.swapaxes(Lz, -1, -2) @ Ls)
    V = np.swapaxes(Vt, -1, -2)
    isq = 1.0 / np.sqrt(lam)
    R = (Ls @ V) * isq[:, None, :]
    # R^{-1} = Lambda^{1/2} V^T Ls^{-1} = Lambda^{-1/2} U^T Lz^T
    Rinv = (np.swapaxes(U, -1, -2) @ np.swapaxes(Lz, -1, -2)) * isq[:, :, None]
    return R, Rinv, lam
