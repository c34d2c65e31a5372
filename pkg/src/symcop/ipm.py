"""Homogeneous self-dual interior-point method for symmetric-cone programs.

Solves the standard-form pair

    minimize    c^T x                 maximize   -h^T z - b^T y
    subject to  G x + s = h            subject to G^T z + A^T y + c = 0
                A x = b                           z in K
                s in K

by embedding both in a self-dual homogeneous system with the extra scalars
``tau`` and ``kappa``.  Search directions use Nesterov-Todd scaling and a
Mehrotra predictor-corrector; the reduced KKT system is solved by dense
orthogonal factorization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .cones import ConeDims


@dataclass
class StandardForm:
    c: np.ndarray
    G: np.ndarray
    h: np.ndarray
    A: np.ndarray
    b: np.ndarray
    dims: ConeDims

    def __post_init__(self):
        nx = self.c.shape[0]
        if self.G.shape != (self.dims.size, nx):
            raise ValueError(f"G has shape {self.G.shape}, expected {(self.dims.size, nx)}")
        if self.A.shape != (self.b.shape[0], nx):
            raise ValueError(f"A has shape {self.A.shape}, expected {(self.b.shape[0], nx)}")
        if self.h.shape != (self.dims.size,):
            raise ValueError("h does not match the cone dimensions")


@dataclass
class IPMSettings:
    max_iterations: int = 200
    eps_feas: float = 1e-8
    eps_gap: float = 1e-8
    eps_inf: float = 1e-10
    step_fraction: float = 0.99
    verbose: bool = False


@dataclass
class IPMResult:
    status: str
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    z: np.ndarray
    iterations: int
    primal_residual: float = np.nan
    dual_residual: float = np.nan
    gap: float = np.nan
    primal_objective: float = np.nan
    dual_objective: float = np.nan
    history: list = field(default_factory=list)


class _Equalities:
    """Orthogonal factorization ``A^T = [Q N] [R; 0]`` shared by every iteration.

    ``N`` spans the null space of ``A``; ``None`` fields mark a rank-deficient
    ``A``, for which the regularized LU path is used instead.
    """

    def __init__(self, A: np.ndarray):
        nx, p = A.shape[1], A.shape[0]
        self.ok = True
        if p == 0:
            self.Q, self.R, self.N = np.zeros((nx, 0)), np.zeros((0, 0)), np.eye(nx)
            return
        Qf, Rf = scipy.linalg.qr(A.T)
        d = np.abs(np.diag(Rf[:p, :p]))
        self.ok = p <= nx and d.min(initial=np.inf) > 1e-12 * max(1.0, d.max(initial=0.0))
        self.Q, self.R, self.N = Qf[:, :p], Rf[:p, :p], Qf[:, p:]


class _KKT:
    """Solver for the Newton system

        [ 0   A^T   G^T    ] [dx]   [bx]
        [ A   0     0      ] [dy] = [by]
        [ G   0   -W^T W   ] [dz]   [bz]

    With ``Gh = W^{-T} G`` and ``dx = Q R^{-T} by + N u`` the system reduces to
    the least-squares normal equations of ``Gh N``, which are solved through a
    QR factorization of ``Gh N`` rather than by forming ``N^T Gh^T Gh N``; this
    keeps the conditioning at the square root of the normal matrix's.  When
    ``A`` or ``Gh N`` is rank deficient, the regularized dense LU of
    ``[[Gh^T Gh, A^T], [A, 0]]`` is used.  Either way the result is polished
    by iterative refinement on the full system.
    """

    def __init__(self, G: np.ndarray, A: np.ndarray, W, eq: _Equalities | None = None):
        self.G = G
        self.A = A
        self.W = W
        self.Gh = W.apply(G, "WinvT")
        self.nx = self.Gh.shape[1]
        self.eq = eq if eq is not None else _Equalities(A)
        self.qr = None
        if self.eq.ok:
            B = self.Gh @ self.eq.N
            if B.shape[1] == 0:
                self.qr = (np.zeros((B.shape[0], 0)), np.zeros((0, 0)))
            elif B.shape[0] >= B.shape[1]:
                Qb, Rb = scipy.linalg.qr(B, mode="economic")
                d = np.abs(np.diag(Rb))
                if d.min() > 1e-13 * d.max():
                    self.qr = (Qb, Rb)
        if self.qr is None:
            self._factor_lu()

    def _factor_lu(self):
        Gh, A = self.Gh, self.A
        nx, p = self.nx, A.shape[0]
        H = Gh.T @ Gh
        K = np.zeros((nx + p, nx + p))
        K[:nx, :nx] = H
        K[:nx, nx:] = A.T
        K[nx:, :nx] = A
        base = K.copy()
        scale = max(1.0, float(np.max(np.abs(np.diag(H)), initial=0.0)))
        # a tiny static regularization; escalated when the pivots reveal a
        # (near) rank-deficient [G; A], with iterative refinement restoring accuracy
        for rel in (1e-15, 1e-11, 1e-8):
            reg = rel * scale
            K[np.arange(nx), np.arange(nx)] = base[np.arange(nx), np.arange(nx)] + reg
            K[np.arange(nx, nx + p), np.arange(nx, nx + p)] = -reg
            self.lu = scipy.linalg.lu_factor(K, check_finite=False)
            piv = np.abs(np.diag(self.lu[0]))
            if piv.size == 0 or piv.min() > 1e-13 * piv.max():
                break

    def _reduced(self, bx, by, bz):
        bzh = self.W.apply(bz, "WinvT")
        if self.qr is not None:
            eq, (Qb, Rb) = self.eq, self.qr
            xp = eq.Q @ scipy.linalg.solve_triangular(eq.R, by, trans="T")
            r0 = bzh - self.Gh @ xp
            w = scipy.linalg.solve_triangular(Rb, eq.N.T @ bx, trans="T") + Qb.T @ r0
            dx = xp + eq.N @ scipy.linalg.solve_triangular(Rb, w)
            wdz = self.Gh @ dx - bzh
            v = bx - self.Gh.T @ wdz
            dy = scipy.linalg.solve_triangular(eq.R, eq.Q.T @ v)
        else:
            rhs = np.concatenate([bx + self.Gh.T @ bzh, by])
            sol = scipy.linalg.lu_solve(self.lu, rhs, check_finite=False)
            dx, dy = sol[: self.nx], sol[self.nx :]
            wdz = self.Gh @ dx - bzh
        return dx, dy, self.W.apply(wdz, "Winv")

    def solve(self, bx, by, bz, refine: int = 8):
        """Return ``(dx, dy, dz)``."""
        A, G, W = self.A, self.G, self.W
        dx, dy, dz = self._reduced(bx, by, bz)
        scale = 1.0 + max(np.linalg.norm(bx), np.linalg.norm(by), np.linalg.norm(bz))
        for _ in range(refine):
            ex = bx - A.T @ dy - G.T @ dz
            ey = by - A @ dx
            ez = bz - G @ dx + W.apply(W.apply(dz, "W"), "WT")
            err = max(np.linalg.norm(ex), np.linalg.norm(ey), np.linalg.norm(ez))
            if err <= 1e-14 * scale:
                break
            cx, cy, cz = self._reduced(ex, ey, ez)
            dx, dy, dz = dx + cx, dy + cy, dz + cz
        return dx, dy, dz


def solve_standard(sf: StandardForm, settings: IPMSettings | None = None) -> IPMResult:
    """Solve ``sf``; returns Optimal, Infeasible, Unbounded or the best Stalled iterate."""
    # iterates of infeasible or unbounded problems diverge by design; overflow
    # there is caught by the step-failure handling below
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        Z = _row_space(sf)
        if Z is None:
            return _solve(sf, settings or IPMSettings())
        red = StandardForm(sf.c @ Z, sf.G @ Z, sf.h, sf.A @ Z, sf.b, sf.dims)
        res = _solve(red, settings or IPMSettings())
        res.x = Z @ res.x
        return res


def _row_space(sf: StandardForm) -> np.ndarray | None:
    """Orthonormal basis of the row space of ``[G; A]`` when it is a proper subspace.

    Directions invisible to every constraint leave the iterates undetermined
    and make the Newton system singular; when ``c`` is orthogonal to them they
    do not affect either objective and are removed.  Otherwise (a dual
    infeasible problem) ``None`` is returned and the full space is kept.
    """
    M = np.vstack([sf.G, sf.A])
    if M.shape[1] == 0:
        return None
    # only the right factor is needed; it is complete whenever M is tall
    _, sv, Vt = np.linalg.svd(M, full_matrices=M.shape[0] < M.shape[1])
    tol = max(M.shape) * np.finfo(float).eps * (sv[0] if sv.size else 0.0)
    rank = int(np.sum(sv > tol))
    if rank == M.shape[1] or rank == 0:
        return None
    if np.linalg.norm(Vt[rank:] @ sf.c) > 1e-12 * max(1.0, np.linalg.norm(sf.c)):
        return None
    return Vt[:rank].T


def _solve(sf: StandardForm, cfg: IPMSettings) -> IPMResult:
    c, G, h, A, b, dims = sf.c, sf.G, sf.h, sf.A, sf.b, sf.dims
    nx, p, m = c.size, b.size, h.size
    deg = dims.degree

    x = np.zeros(nx)
    y = np.zeros(p)
    e = dims.identity()
    s = e.copy()
    z = e.copy()
    tau, kappa = 1.0, 1.0

    resx0 = max(1.0, np.linalg.norm(c))
    resy0 = max(1.0, np.linalg.norm(b))
    resz0 = max(1.0, np.linalg.norm(h))

    eq = _Equalities(A)
    history = []
    best = None
    status = "Stalled"
    small_steps = 0
    it = 0

    def pack(st):
        return IPMResult(st, x / tau, y / tau, s / tau, z / tau, it, history=history)

    for it in range(cfg.max_iterations + 1):
        rx = A.T @ y + G.T @ z + c * tau
        ry = -(A @ x) + b * tau
        rz = -(G @ x) + h * tau - s
        cx = c @ x
        by_hz = b @ y + h @ z
        rt = -cx - by_hz - kappa
        sz = s @ z
        mu = (sz + tau * kappa) / (deg + 1)

        pres = max(np.linalg.norm(ry) / resy0, np.linalg.norm(rz) / resz0) / tau
        dres = np.linalg.norm(rx) / resx0 / tau
        pcost = cx / tau
        dcost = -by_hz / tau
        gap = sz / tau**2
        # feasible pairs with matching objectives are optimal by weak duality,
        # so the objective gap is the stopping measure; complementarity can lag
        # far behind it on problems without an interior point
        relgap = abs(pcost - dcost) / max(1.0, abs(pcost))
        # certificate residuals, normalized so that the certified inequality is unit
        pinf = (np.linalg.norm(A.T @ y + G.T @ z) / resx0 / -by_hz) if by_hz < 0 else np.inf
        dinf = (
            max(np.linalg.norm(A @ x) / resy0, np.linalg.norm(G @ x + s) / resz0) / -cx
            if cx < 0
            else np.inf
        )
        history.append(
            dict(it=it, pcost=pcost, dcost=dcost, pres=pres, dres=dres, gap=gap, tau=tau, kappa=kappa)
        )
        if cfg.verbose:
            print(
                f"{it:3d} pcost {pcost: .8e} dcost {dcost: .8e} pres {pres:.1e} "
                f"dres {dres:.1e} gap {gap:.1e} tau {tau:.1e} kappa {kappa:.1e}"
            )

        if pres <= cfg.eps_feas and dres <= cfg.eps_feas and relgap <= cfg.eps_gap:
            out = pack("Optimal")
            out.primal_residual, out.dual_residual, out.gap = pres, dres, relgap
            out.primal_objective, out.dual_objective = pcost, dcost
            return out
        if pinf <= cfg.eps_inf:
            t = -by_hz
            return IPMResult("Infeasible", x * 0, y / t, s * 0, z / t, it, pinf, np.nan, np.nan, history=history)
        if dinf <= cfg.eps_inf:
            t = -cx
            return IPMResult("Unbounded", x / t, y * 0, s / t, z * 0, it, np.nan, dinf, np.nan, history=history)

        merit = max(pres, dres, relgap)
        if best is None or merit < best[0]:
            best = (merit, pack("Stalled"), pres, dres, relgap, pcost, dcost)
        if it == cfg.max_iterations or small_steps >= 3:
            break

        try:
            W = dims.nt_scaling(s, z)
            lam = W.lam.vec
            kkt = _KKT(G, A, W, eq)
            dx2, dy2, dz2 = kkt.solve(-c, b, h)
            wdz2 = W.apply(dz2, "W")
            denom = kappa / tau + wdz2 @ wdz2

            def direction(eta, rc, rct):
                u = W.lam_div(rc)
                bz = (1 - eta) * rz - W.apply(u, "WT")
                dx1, dy1, dz1 = kkt.solve(-(1 - eta) * rx, (1 - eta) * ry, bz)
                num = -(1 - eta) * rt + rct / tau + c @ dx1 + b @ dy1 + h @ dz1
                dtau = num / denom
                dx = dx1 + dtau * dx2
                dy = dy1 + dtau * dy2
                dz = dz1 + dtau * dz2
                # the linearized primal equation fixes ds exactly
                ds = (1 - eta) * rz + h * dtau - G @ dx
                dkappa = (rct - kappa * dtau) / tau
                return dx, dy, ds, dz, dtau, dkappa

            def step_len(ds, dz, dtau, dkappa):
                wds = W.apply(ds, "WinvT")
                wdz = W.apply(dz, "W")
                a = min(dims.max_step(W.lam, wds), dims.max_step(W.lam, wdz))
                if dtau < 0:
                    a = min(a, -tau / dtau)
                if dkappa < 0:
                    a = min(a, -kappa / dkappa)
                return a

            lamlam = dims.product(lam, lam)
            aff = direction(0.0, -lamlam, -tau * kappa)
            a_aff = min(1.0, step_len(*aff[2:]))
            sigma = min(1.0, max(0.0, (1.0 - a_aff))) ** 3
            corr = dims.product(W.apply(aff[2], "WinvT"), W.apply(aff[3], "W"))
            rc = -lamlam + sigma * mu * e - corr
            rct = -tau * kappa + sigma * mu - aff[4] * aff[5]
            dx, dy, ds, dz, dtau, dkappa = direction(sigma, rc, rct)
            alpha = min(1.0, cfg.step_fraction * step_len(ds, dz, dtau, dkappa))
        except (np.linalg.LinAlgError, ValueError, FloatingPointError):
            break
        if not np.isfinite(alpha) or alpha <= 0:
            break
        small_steps = small_steps + 1 if alpha < 1e-8 else 0

        x = x + alpha * dx
        y = y + alpha * dy
        s = s + alpha * ds
        z = z + alpha * dz
        tau = tau + alpha * dtau
        kappa = kappa + alpha * dkappa
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z))):
            break

    _, out, pres, dres, relgap, pcost, dcost = best
    out.status = status
    out.primal_residual, out.dual_residual, out.gap = pres, dres, relgap
    out.primal_objective, out.dual_objective = pcost, dcost
    out.iterations = it
    return out
