"""Solve :class:`~symcop.model.ConicProblem` instances with the built-in interior-point method.

The problem is flattened to the standard form used by :mod:`symcop.ipm`:
columns are the scalar variables followed by the upper-triangular entries
of each matrix variable; cone rows are grouped as orthant, second-order
cone blocks (by size) and semidefinite blocks (by size).  Results are
mapped back to variable names, with dual multipliers for every constraint.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .cones import ConeDims, smat, svec, svec_dim
from .ipm import IPMSettings, StandardForm, solve_standard
from .model import ConicProblem, Solution


@dataclass
class SolverConfig:
    max_iterations: int = 200
    eps_feas: float = 1e-8
    eps_gap: float = 1e-8
    eps_inf: float = 1e-10
    verbose: bool = False

    def __post_init__(self):
        for name in ("eps_feas", "eps_gap", "eps_inf"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass
class _Layout:
    columns: dict  # ref -> column
    blocks: list  # (origin, index, kind, dim, row slice)
    sf: StandardForm


def _columns(p: ConicProblem) -> dict:
    cols = {}
    for s in p.scalars:
        cols[s] = len(cols)
    for name, k in p.matrices.items():
        for i in range(k):
            for j in range(i, k):
                cols[(name, i, j)] = len(cols)
    return cols


def to_standard_form(p: ConicProblem) -> _Layout:
    """Flatten ``p`` into ``min c^T x  s.t.  G x + s = h, A x = b, s in K``."""
    p.validate()
    cols = _columns(p)
    nx = len(cols)

    # (origin, index, kind, dim) with origin "cone" or "matrix"
    entries = []
    for k, c in enumerate(p.cones):
        kind = c.kind
        if kind == "psd" and c.dim == 1:
            kind = "nonneg"
        entries.append(("cone", k, kind, c.dim))
    for name, size in p.matrices.items():
        entries.append(("matrix", name, "nonneg" if size == 1 else "psd", size))

    lin = [e for e in entries if e[2] == "nonneg"]
    soc = sorted((e for e in entries if e[2] == "soc"), key=lambda e: e[3])
    psd = sorted((e for e in entries if e[2] == "psd"), key=lambda e: e[3])
    width = {"nonneg": lambda d: d, "soc": lambda d: d, "psd": svec_dim}

    rows = sum(width[e[2]](e[3]) for e in lin + soc + psd)
    G = np.zeros((rows, nx))
    h = np.zeros(rows)
    blocks = []
    r0 = 0
    for origin, idx, kind, dim in lin + soc + psd:
        w = width[kind](dim)
        sl = slice(r0, r0 + w)
        if origin == "cone":
            c = p.cones[idx]
            flat = (lambda X: svec(X)) if kind == "psd" else (lambda X: np.ravel(X))
            h[sl] = flat(c.constant)
            for v, F in c.coeffs.items():
                G[sl, cols[v]] = -flat(F)
        else:
            k = p.matrices[idx]
            off = 0
            for i in range(k):
                for j in range(i, k):
                    G[r0 + off, cols[(idx, i, j)]] = -1.0 if i == j else -np.sqrt(2.0)
                    off += 1
        blocks.append((origin, idx, kind, dim, sl))
        r0 += w

    A = np.zeros((len(p.equalities), nx))
    b = np.zeros(len(p.equalities))
    for k, e in enumerate(p.equalities):
        for ref, v in e.coeffs.items():
            A[k, cols[ref]] += v
        b[k] = e.rhs
    c = np.zeros(nx)
    for ref, v in p.objective.items():
        c[cols[ref]] = -v

    dims = ConeDims(
        l=sum(e[3] for e in lin),
        q=tuple(e[3] for e in soc),
        s=tuple(e[3] for e in psd),
    )
    return _Layout(cols, blocks, StandardForm(c, G, h, A, b, dims))


def _unflatten(layout: _Layout, p: ConicProblem, x, z):
    values = {s: float(x[layout.columns[s]]) for s in p.scalars}
    mats = {}
    for name, k in p.matrices.items():
        Q = np.zeros((k, k))
        for i in range(k):
            for j in range(i, k):
                Q[i, j] = Q[j, i] = x[layout.columns[(name, i, j)]]
        mats[name] = Q
    cone_duals = [None] * len(p.cones)
    mat_duals = {}
    for origin, idx, kind, dim, sl in layout.blocks:
        zb = z[sl]
        if kind == "psd":
            val = smat(zb, dim)
        elif origin == "cone" and p.cones[idx].kind == "psd":
            val = zb.reshape(1, 1)
        else:
            val = zb.copy()
        if origin == "cone":
            cone_duals[idx] = val
        else:
            mat_duals[idx] = np.atleast_2d(val)
    return values, mats, cone_duals, mat_duals


def solve(p: ConicProblem, cfg: SolverConfig | None = None) -> Solution:
    """Solve a conic problem with the internal homogeneous self-dual method."""
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    layout = to_standard_form(p)
    sf = layout.sf
    res = solve_standard(
        sf,
        IPMSettings(
            max_iterations=cfg.max_iterations,
            eps_feas=cfg.eps_feas,
            eps_gap=cfg.eps_gap,
            eps_inf=cfg.eps_inf,
            verbose=cfg.verbose,
        ),
    )
    values, mats, cduals, mduals = _unflatten(layout, p, res.x, res.z)
    sol = Solution(
        status=res.status,
        objective=np.nan,
        values=values,
        matrices=mats,
        primal_residual=res.primal_residual,
        dual_residual=res.dual_residual,
        gap=res.gap,
        cone_duals=cduals,
        equality_duals=res.y.copy(),
        matrix_duals=mduals,
        iterations=res.iterations,
    )
    if res.status == "Infeasible":
        sol.objective = -np.inf
        sol.certificate = {
            "type": "dual_ray",
            "cone_duals": cduals,
            "equality_duals": res.y.copy(),
            "matrix_duals": mduals,
            "residual": res.primal_residual,
        }
    elif res.status == "Unbounded":
        sol.objective = np.inf
        sol.certificate = {
            "type": "primal_ray",
            "values": values,
            "matrices": mats,
            "residual": res.dual_residual,
        }
    else:
        sol.objective = float(-res.primal_objective + p.objective_constant)
    sol.solve_time = time.perf_counter() - t0
    return sol


@dataclass
class KKTReport:
    primal: float
    dual: float
    gap: float
    primal_objective: float
    dual_objective: float

    def within(self, tol: float) -> bool:
        return max(self.primal, self.dual, self.gap) <= tol


def _cone_violation(kind: str, X) -> float:
    X = np.asarray(X, dtype=float)
    if kind == "nonneg":
        return float(max(0.0, -X.min(initial=0.0)))
    if kind == "soc":
        return float(max(0.0, np.linalg.norm(X[1:]) - X[0]))
    return float(max(0.0, -np.linalg.eigvalsh(0.5 * (X + X.T))[0]))


def _entry_weight(ref) -> float:
    return 1.0 if ref[1] == ref[2] else 2.0


def check_kkt(p: ConicProblem, sol: Solution) -> KKTReport:
    """Recompute primal, dual and gap residuals directly from the problem data.

    Residuals are scaled like the solver's: primal violations relative to
    ``max(1, |data|)``, dual stationarity relative to ``max(1, |objective|)``,
    and the gap relative to ``max(1, |primal objective|)``.
    """
    x = sol.values
    mats = sol.matrices

    def val(ref):
        if isinstance(ref, str):
            return x[ref]
        return mats[ref[0]][ref[1], ref[2]]

    # primal
    hnorm = np.sqrt(
        sum(np.sum(np.asarray(c.constant) ** 2) for c in p.cones) + sum(e.rhs**2 for e in p.equalities)
    )
    scale_p = max(1.0, hnorm)
    eq_res = np.array([sum(c * val(r) for r, c in e.coeffs.items()) - e.rhs for e in p.equalities])
    pviol = float(np.linalg.norm(eq_res)) if eq_res.size else 0.0
    for c in p.cones:
        pviol = max(pviol, _cone_violation(c.kind, c.expression(x)))
    for name, Q in mats.items():
        pviol = max(pviol, _cone_violation("psd", Q))
    primal = pviol / scale_p
    pobj = sum(c * val(r) for r, c in p.objective.items()) + p.objective_constant

    # dual: stationarity  sum_e mu_e a_e - sum_c <F_cv, Z_c> - Y = d
    mu = np.asarray(sol.equality_duals, dtype=float)
    grad = {}
    for k, e in enumerate(p.equalities):
        for r, c in e.coeffs.items():
            grad[r] = grad.get(r, 0.0) + mu[k] * c if mu.size else grad.get(r, 0.0)
    dviol = 0.0
    dual_obj = p.objective_constant
    for c, Z in zip(p.cones, sol.cone_duals):
        Z = np.asarray(Z, dtype=float)
        if c.kind == "psd" and Z.ndim == 2:
            inner = lambda F: float(np.sum(F * Z))  # noqa: E731
        else:
            inner = lambda F: float(np.ravel(F) @ np.ravel(Z))  # noqa: E731
        for v, F in c.coeffs.items():
            grad[v] = grad.get(v, 0.0) - inner(F)
        dual_obj += inner(c.constant)
        dviol = max(dviol, _cone_violation(c.kind, Z))
    if mu.size:
        dual_obj += float(sum(mu[k] * e.rhs for k, e in enumerate(p.equalities)))
    stat = []
    for s in p.scalars:
        stat.append(grad.get(s, 0.0) - p.objective.get(s, 0.0))
    for name, k in p.matrices.items():
        Y = np.zeros((k, k))
        for i in range(k):
            for j in range(i, k):
                ref = (name, i, j)
                Y[i, j] = Y[j, i] = (grad.get(ref, 0.0) - p.objective.get(ref, 0.0)) / _entry_weight(ref)
        Yrep = np.asarray(sol.matrix_duals.get(name, Y)).reshape(k, k)
        stat.extend(np.ravel(Y - Yrep))
        dviol = max(dviol, _cone_violation("psd", Y))
    dnorm = np.sqrt(sum(v * v for v in p.objective.values()))
    dual = max(float(np.linalg.norm(stat)) if stat else 0.0, dviol) / max(1.0, dnorm)
    gap = abs(pobj - dual_obj) / max(1.0, abs(pobj))
    return KKTReport(primal, dual, gap, float(pobj), float(dual_obj))
