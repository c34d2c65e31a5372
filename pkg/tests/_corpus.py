"""Random strictly feasible block conic problems and certificate checks."""

import numpy as np

from symcop.model import ConicProblem


def _interior(kind, dim, rng):
    if kind == "nonneg":
        return rng.uniform(0.5, 2.0, dim)
    if kind == "soc":
        w = rng.standard_normal(dim - 1)
        return np.concatenate([[np.linalg.norm(w) + rng.uniform(0.5, 2.0)], w])
    B = rng.standard_normal((dim, dim))
    return B @ B.T / dim + np.eye(dim)


def _random_like(kind, dim, rng):
    if kind == "psd":
        M = rng.standard_normal((dim, dim))
        return M + M.T
    return rng.standard_normal(dim)


def _inner(F, Z):
    return float(np.sum(np.asarray(F) * np.asarray(Z)))


def random_problem(seed, max_size=30) -> ConicProblem:
    """Problem with a strictly feasible primal point and a strictly feasible dual point.

    The constant terms are chosen so a random ``x0`` (and PD matrix variables)
    leaves every cone expression interior; the objective is chosen so that
    interior dual multipliers satisfy stationarity.
    """
    rng = np.random.default_rng(seed)
    p = ConicProblem(name=f"corpus-{seed}")
    nscal = int(rng.integers(1, 6))
    for k in range(nscal):
        p.add_scalar(f"x{k}")
    mats = {}
    for k in range(int(rng.integers(0, 3))):
        size = int(rng.integers(1, 4))
        p.add_matrix(f"X{k}", size)
        B = rng.standard_normal((size, size))
        mats[f"X{k}"] = B @ B.T / size + np.eye(size)
    x0 = {v: float(rng.standard_normal()) for v in p.scalars}
    budget = max_size
    grad = {}
    for _ in range(int(rng.integers(1, 4))):
        kind = ["nonneg", "soc", "psd"][int(rng.integers(0, 3))]
        dim = int(rng.integers(2 if kind == "soc" else 1, 6))
        budget -= dim
        if budget < 0:
            break
        coeffs = {v: _random_like(kind, dim, rng) for v in p.scalars if rng.random() < 0.8}
        s0 = _interior(kind, dim, rng)
        const = s0 - sum(x0[v] * F for v, F in coeffs.items())
        if kind == "psd":
            const = 0.5 * (const + const.T)
        p.add_cone(kind, const, coeffs)
        Z = _interior(kind, dim, rng)
        for v, F in coeffs.items():
            grad[v] = grad.get(v, 0.0) - _inner(F, Z)
    refs = list(p.scalars) + [(n, i, j) for n, k in p.matrices.items() for i in range(k) for j in range(i, k)]
    nvars = len(refs)
    neq = int(rng.integers(0, max(1, nvars - 1)))
    val = {v: x0[v] for v in p.scalars}
    for n, X in mats.items():
        k = X.shape[0]
        for i in range(k):
            for j in range(i, k):
                val[(n, i, j)] = X[i, j]
    for e in range(neq):
        a = {r: float(rng.standard_normal()) for r in refs if rng.random() < 0.7}
        if not a:
            continue
        p.add_equality(a, sum(c * val[r] for r, c in a.items()), name=f"e{e}")
        mu = float(rng.standard_normal())
        for r, c in a.items():
            grad[r] = grad.get(r, 0.0) + mu * c
    # objective d = grad - weight * Y with Y = I for matrix variables
    obj = {}
    for r in refs:
        g = grad.get(r, 0.0)
        if not isinstance(r, str) and r[1] == r[2]:
            g -= 1.0
        obj[r] = g
    p.set_objective(obj)
    return p


def farkas_violation(p: ConicProblem, sol) -> tuple[float, float]:
    """For an infeasibility certificate: (stationarity residual, dual objective).

    The ray ``(Z, mu, Y)`` proves infeasibility when its stationarity residual
    vanishes and ``sum <constant, Z> + mu^T b < 0``; both are normalized by the
    size of the ray.
    """
    cert = sol.certificate
    Zs, mu, Ys = cert["cone_duals"], np.asarray(cert["equality_duals"]), cert["matrix_duals"]
    grad = {}
    obj = 0.0
    for c, Z in zip(p.cones, Zs):
        for v, F in c.coeffs.items():
            grad[v] = grad.get(v, 0.0) - _inner(F, Z)
        obj += _inner(c.constant, Z)
    for k, e in enumerate(p.equalities):
        for r, a in e.coeffs.items():
            grad[r] = grad.get(r, 0.0) + mu[k] * a
        obj += mu[k] * e.rhs
    res = [grad.get(v, 0.0) for v in p.scalars]
    for n, k in p.matrices.items():
        Y = np.asarray(Ys[n]).reshape(k, k)
        for i in range(k):
            for j in range(i, k):
                w = 1.0 if i == j else 2.0
                res.append(grad.get((n, i, j), 0.0) - w * Y[i, j])
    size = max(
        [np.linalg.norm(np.ravel(Z)) for Z in Zs] + [np.linalg.norm(mu) if mu.size else 0.0]
        + [np.linalg.norm(np.ravel(Y)) for Y in Ys.values()] + [1e-300]
    )
    return float(np.linalg.norm(res)) / size, obj / size


def cone_dual_violation(kind, Z) -> float:
    Z = np.asarray(Z, dtype=float)
    if kind == "nonneg":
        return float(max(0.0, -Z.min(initial=0.0)))
    if kind == "soc":
        return float(max(0.0, np.linalg.norm(Z[1:]) - Z[0]))
    return float(max(0.0, -np.linalg.eigvalsh(Z)[0]))
