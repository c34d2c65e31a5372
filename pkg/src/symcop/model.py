"""Block conic program representation shared by the builders and solvers.

A :class:`ConicProblem` maximizes a linear objective over

* free scalar variables, referenced by name;
* symmetric matrix variables, each implicitly constrained to be positive
  semidefinite; entry ``(i, j)`` with ``i <= j`` is referenced as
  ``(name, i, j)``;
* linear equalities in any variables;
* cone constraints ``F_0 + sum_v y_v F_v in K`` that are affine in the scalar
  variables, with ``K`` one of ``nonneg`` (vector), ``soc`` (vector
  ``(t, w)`` with ``t >= |w|``) or ``psd`` (symmetric matrix).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

CONE_KINDS = ("nonneg", "soc", "psd")
FORMAT_TAG = "symcop-conic/1"


def _ref(ref):
    if isinstance(ref, str):
        return ref
    name, i, j = ref
    i, j = int(i), int(j)
    return (name, min(i, j), max(i, j))


@dataclass
class ConeConstraint:
    kind: str
    dim: int
    constant: np.ndarray
    coeffs: dict
    name: str = ""

    def expression(self, values: dict) -> np.ndarray:
        out = np.array(self.constant, dtype=float, copy=True)
        for v, F in self.coeffs.items():
            out = out + values[v] * F
        return out


@dataclass
class Equality:
    coeffs: dict
    rhs: float
    name: str = ""


@dataclass
class ConicProblem:
    scalars: list = field(default_factory=list)
    matrices: dict = field(default_factory=dict)
    objective: dict = field(default_factory=dict)
    objective_constant: float = 0.0
    equalities: list = field(default_factory=list)
    cones: list = field(default_factory=list)
    name: str = ""
    metadata: dict = field(default_factory=dict)

    # -- construction -------------------------------------------------

    def add_scalar(self, name: str) -> str:
        if name in self.scalars or name in self.matrices:
            raise ValueError(f"variable {name!r} already declared")
        self.scalars.append(name)
        return name

    def add_matrix(self, name: str, size: int) -> str:
        if name in self.scalars or name in self.matrices:
            raise ValueError(f"variable {name!r} already declared")
        if size < 1:
            raise ValueError("matrix variables need size >= 1")
        self.matrices[name] = int(size)
        return name

    def add_equality(self, coeffs: dict, rhs: float, name: str = "") -> None:
        clean = {}
        for ref, c in coeffs.items():
            if c != 0:
                r = _ref(ref)
                clean[r] = clean.get(r, 0.0) + float(c)
        self.equalities.append(Equality(clean, float(rhs), name))

    def add_cone(self, kind: str, constant, coeffs: dict, name: str = "") -> None:
        if kind not in CONE_KINDS:
            raise ValueError(f"unknown cone kind {kind!r}")
        constant = np.array(constant, dtype=float)
        if kind == "psd":
            if constant.ndim != 2 or constant.shape[0] != constant.shape[1]:
                raise ValueError("psd constraints need a square constant matrix")
        elif constant.ndim != 1:
            raise ValueError(f"{kind} constraints need a vector constant")
        dim = constant.shape[0]
        cf = {}
        for v, F in coeffs.items():
            F = np.array(F, dtype=float)
            if F.shape != constant.shape:
                raise ValueError(f"coefficient of {v!r} has shape {F.shape}, expected {constant.shape}")
            if np.any(F != 0):
                cf[v] = F
        self.cones.append(ConeConstraint(kind, dim, constant, cf, name))

    def set_objective(self, coeffs: dict, constant: float = 0.0) -> None:
        self.objective = {_ref(k): float(v) for k, v in coeffs.items() if v != 0}
        self.objective_constant = float(constant)

    # -- inspection ---------------------------------------------------

    def validate(self) -> None:
        scal = set(self.scalars)

        def known(ref):
            if isinstance(ref, str):
                return ref in scal
            name, i, j = ref
            return name in self.matrices and 0 <= i <= j < self.matrices[name]

        for ref in self.objective:
            if not known(ref):
                raise ValueError(f"objective references undeclared variable {ref!r}")
        for k, eq in enumerate(self.equalities):
            for ref in eq.coeffs:
                if not known(ref):
                    raise ValueError(f"equality {k} references undeclared variable {ref!r}")
        for k, cone in enumerate(self.cones):
            for v in cone.coeffs:
                if v not in scal:
                    raise ValueError(f"cone {k} references undeclared scalar {v!r}")
            if cone.kind == "psd" and not np.allclose(cone.constant, cone.constant.T, atol=0):
                raise ValueError(f"cone {k}: constant matrix is not symmetric")

    def summary(self) -> dict:
        kinds = {}
        for c in self.cones:
            key = f"{c.kind}({c.dim})"
            kinds[key] = kinds.get(key, 0) + 1
        return {
            "scalars": len(self.scalars),
            "matrices": dict(self.matrices),
            "equalities": len(self.equalities),
            "cones": kinds,
        }

    # -- JSON ---------------------------------------------------------

    def to_dict(self) -> dict:
        def ref_out(r):
            return r if isinstance(r, str) else list(r)

        cones = []
        for c in self.cones:
            cones.append(
                {
                    "kind": c.kind,
                    "dim": c.dim,
                    "name": c.name,
                    "constant": c.constant.tolist(),
                    "coeffs": {v: F.tolist() for v, F in c.coeffs.items()},
                }
            )
        return {
            "format": FORMAT_TAG,
            "name": self.name,
            "metadata": self.metadata,
            "scalars": list(self.scalars),
            "matrices": dict(self.matrices),
            "objective": {
                "sense": "maximize",
                "terms": [[ref_out(r), c] for r, c in self.objective.items()],
                "constant": self.objective_constant,
            },
            "equalities": [
                {"name": e.name, "terms": [[ref_out(r), c] for r, c in e.coeffs.items()], "rhs": e.rhs}
                for e in self.equalities
            ],
            "cones": cones,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConicProblem":
        if d.get("format") != FORMAT_TAG:
            raise ValueError(f"unrecognized problem format {d.get('format')!r}")

        def ref_in(r):
            return r if isinstance(r, str) else (r[0], int(r[1]), int(r[2]))

        p = cls(name=d.get("name", ""), metadata=d.get("metadata", {}))
        for s in d["scalars"]:
            p.add_scalar(s)
        for name, size in d["matrices"].items():
            p.add_matrix(name, size)
        obj = d["objective"]
        if obj.get("sense", "maximize") != "maximize":
            raise ValueError("only maximization problems are supported")
        p.set_objective({ref_in(r): c for r, c in obj["terms"]}, obj.get("constant", 0.0))
        for e in d["equalities"]:
            p.add_equality({ref_in(r): c for r, c in e["terms"]}, e["rhs"], e.get("name", ""))
        for c in d["cones"]:
            p.add_cone(c["kind"], c["constant"], c["coeffs"], c.get("name", ""))
        p.validate()
        return p

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=False)

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())
            fh.write("\n")

    @classmethod
    def load_json(cls, path) -> "ConicProblem":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class Solution:
    """Solver output in terms of the original problem's variables.

    ``objective`` is ``-inf`` for an infeasible and ``+inf`` for an
    unbounded maximization.  Infeasible and unbounded results carry a
    ``certificate``: dual multipliers proving infeasibility, or a primal
    improving direction.
    """

    status: str
    objective: float
    values: dict = field(default_factory=dict)
    matrices: dict = field(default_factory=dict)
    primal_residual: float = float("nan")
    dual_residual: float = float("nan")
    gap: float = float("nan")
    cone_duals: list = field(default_factory=list)
    equality_duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    matrix_duals: dict = field(default_factory=dict)
    certificate: dict | None = None
    iterations: int = 0
    solve_time: float = 0.0
    solver: str = "internal"

    @property
    def optimal(self) -> bool:
        return self.status == "Optimal"
