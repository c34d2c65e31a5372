"""Assembly of the copositive benchmark ``max y  s.t.  C - y E in approx. COP(K)``.

``E`` is the all-ones matrix.  The slack ``S = C - y E`` is substituted
directly, so every hierarchy contributes constraints affine in ``y`` alone
(plus auxiliary multipliers ``t_*`` or Gram matrices).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .frame_hierarchies import (
    ConstraintKind,
    QuadBlock,
    build_M,
    build_N,
    dp_indices,
    yildirim_indices,
)
from .jordan import ConeShape
from .lasserre import MomentTable, lasserre_constraints
from .model import ConicProblem, Solution
from .polynomial_hierarchies import (
    add_gram_system,
    nn_substituted_poly,
    zvp_blocks,
    zvp_target_poly,
)
from .polynomials import sos_to_psd
from .solver import SolverConfig, solve

INNER = ("dp", "zvp", "nn")
OUTER = ("yildirim", "lasserre")
HIERARCHIES = ("dp", "yildirim", "zvp", "nn", "lasserre")


def random_pd_matrix(n: int, seed=None) -> np.ndarray:
    """``B^T B + I`` with standard normal ``B``; symmetric positive definite."""
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n))
    C = B.T @ B + np.eye(n)
    return 0.5 * (C + C.T)


def _tag(source) -> str:
    return "_".join(str(s) for s in source)


def _jmat(k: int) -> np.ndarray:
    J = -np.eye(k)
    J[0, 0] = 1.0
    return J


def emit_block(p: ConicProblem, bc: QuadBlock, be: QuadBlock, kind: ConstraintKind, prefix: str) -> None:
    """Add the condition on ``bc - y be`` in the form selected by ``kind``."""
    tag = f"{prefix}_{_tag(bc.source)}"
    k = be.m21.shape[0]  # n2 - 1
    if kind is ConstraintKind.NONNEG:
        p.add_cone("nonneg", [bc.m11], {"y": [-be.m11]}, name=tag)
    elif kind is ConstraintKind.REDUCED:
        I = np.eye(k)
        p.add_cone("psd", bc.m11 * I + bc.m22, {"y": -(be.m11 * I + be.m22)}, name=tag)
    elif kind is ConstraintKind.SOC:
        if k == 1:
            c = [bc.m11 + 2 * bc.m21[0], bc.m11 - 2 * bc.m21[0]]
            e = [be.m11 + 2 * be.m21[0], be.m11 - 2 * be.m21[0]]
            p.add_cone("nonneg", c, {"y": [-v for v in e]}, name=tag)
        else:
            c = np.concatenate([[bc.m11], 2 * bc.m21])
            e = np.concatenate([[be.m11], 2 * be.m21])
            p.add_cone("soc", c, {"y": -e}, name=tag)
    else:
        t = p.add_scalar(f"t_{tag}")
        p.add_cone("psd", bc.matrix, {"y": -be.matrix, t: -_jmat(k + 1)}, name=tag)


def assemble_copp(
    C,
    hierarchy: str,
    r: int,
    shape: ConeShape,
    concise: bool = False,
    normalize_moments: bool = False,
    moment_table: MomentTable | None = None,
) -> ConicProblem:
    """Benchmark problem for ``hierarchy`` at depth ``r``.

    ``hierarchy`` is one of ``dp``, ``yildirim``, ``zvp``, ``nn`` or
    ``lasserre``; ``concise`` selects the reduced constraint census for the
    frame-based hierarchies.
    """
    if hierarchy not in HIERARCHIES:
        raise ValueError(f"unknown hierarchy {hierarchy!r}; expected one of {HIERARCHIES}")
    if r < 0:
        raise ValueError("r must be nonnegative")
    C = np.asarray(C, dtype=float)
    n = shape.n
    if C.shape != (n, n):
        raise ValueError(f"C must be {n}x{n}, got {C.shape}")
    if not np.allclose(C, C.T, rtol=0, atol=1e-12 * (1 + np.abs(C).max())):
        raise ValueError("C must be symmetric")
    C = 0.5 * (C + C.T)
    E = np.ones((n, n))

    p = ConicProblem(name=f"copp-{hierarchy}-r{r}")
    p.metadata = {
        "hierarchy": hierarchy,
        "r": r,
        "n1": shape.n1,
        "n2": shape.n2,
        "concise": bool(concise),
    }
    p.add_scalar("y")
    p.set_objective({"y": 1.0})

    if hierarchy == "dp":
        for alpha, kind in dp_indices(r, shape, concise):
            emit_block(p, build_M(C, alpha, shape), build_M(E, alpha, shape), kind, "dp")
    elif hierarchy == "yildirim":
        for x, kind in yildirim_indices(r, shape, concise):
            emit_block(p, build_N(x, C, shape), build_N(x, E, shape), kind, "yd")
    elif hierarchy == "zvp":
        pc, pe = zvp_target_poly(C, r, shape), zvp_target_poly(E, r, shape)
        add_gram_system(p, zvp_blocks(r + 2, shape), {None: pc, "y": -pe}, n, r + 2)
    elif hierarchy == "nn":
        pc, pe = nn_substituted_poly(C, r, shape), nn_substituted_poly(E, r, shape)
        add_gram_system(p, sos_to_psd(pc, name="Q").blocks, {None: pc, "y": -pe}, n, pc.degree)
    else:
        table = moment_table or MomentTable(shape, 2 * r + 2, normalize=normalize_moments)
        lasserre_constraints(p, C, {"y": -E}, r, shape, table)
        p.metadata["underflow"] = table.underflow
        p.metadata["normalized"] = table.normalize
    return p


@dataclass
class CoppResult:
    hierarchy: str
    r: int
    status: str
    value: float
    build_time: float
    solve_time: float
    size: dict
    underflow: bool | None = None
    solution: Solution | None = None

    @property
    def total_time(self) -> float:
        return self.build_time + self.solve_time


def solve_copp(
    C,
    hierarchy: str,
    r: int,
    shape: ConeShape,
    concise: bool = False,
    normalize_moments: bool = False,
    cfg: SolverConfig | None = None,
) -> CoppResult:
    """Assemble and solve one benchmark instance, timing both phases."""
    t0 = time.perf_counter()
    p = assemble_copp(C, hierarchy, r, shape, concise, normalize_moments)
    t1 = time.perf_counter()
    sol = solve(p, cfg)
    t2 = time.perf_counter()
    value = sol.values.get("y", np.nan) if sol.status in ("Optimal", "Stalled") else sol.objective
    return CoppResult(
        hierarchy=hierarchy,
        r=r,
        status=sol.status,
        value=float(value),
        build_time=t1 - t0,
        solve_time=t2 - t1,
        size=p.summary(),
        underflow=p.metadata.get("underflow"),
        solution=sol,
    )


@dataclass
class SlaterPoint:
    """Strictly feasible primal/dual pair of the benchmark.

    ``y0 = 0`` with ``S0 = C`` is interior for positive definite ``C``;
    ``X0`` is interior to the completely positive cone with ``<E, X0> = 1``.
    """

    y0: float
    S0: np.ndarray | None
    X0_exact: list
    normalizer: int

    @property
    def X0(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.X0_exact])


def slater_numerator(shape: ConeShape) -> list[list[int]]:
    """Unnormalized dual interior point ``[[E + I, 1, 0], [1^T, 2 n2 + 1, 0], [0, 0, 2 I]]``."""
    shape.require_soc()
    n1, n2, n = shape.n1, shape.n2, shape.n
    X = [[0] * n for _ in range(n)]
    for i in range(n1):
        for j in range(n1):
            X[i][j] = 2 if i == j else 1
        X[i][n1] = X[n1][i] = 1
    X[n1][n1] = 2 * n2 + 1
    for i in range(n1 + 1, n):
        X[i][i] = 2
    return X


def slater_point(shape: ConeShape, C=None) -> SlaterPoint:
    """Interior points ``(y0, S0)`` and ``X0`` of the benchmark and its dual."""
    num = slater_numerator(shape)
    norm = shape.n1**2 + 3 * shape.n1 + 4 * shape.n2 - 1
    X0 = [[Fraction(v, norm) for v in row] for row in num]
    S0 = None if C is None else np.asarray(C, dtype=float).copy()
    return SlaterPoint(0.0, S0, X0, norm)
