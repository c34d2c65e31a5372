"""Command line front end: ``symcop build | solve | reproduce | verify``.

Exit codes: 0 success, 2 invalid input, 3 solver stall, 4 time budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .copp import HIERARCHIES, assemble_copp, random_pd_matrix, solve_copp
from .frame_hierarchies import constraints_margin, dp_constraints
from .jordan import ConeShape
from .model import ConicProblem
from .oracle import grid_cone_min, refute_with_yildirim, sample_cone_min
from .polynomial_hierarchies import nn_membership_constraints, zvp_membership_constraints
from .sdpa import export_sdpa, import_sdpa, solve_external
from .solver import SolverConfig, check_kkt, solve

EXIT_OK, EXIT_INVALID, EXIT_STALL, EXIT_BUDGET = 0, 2, 3, 4

DEFAULTS = {
    "seed": 0,
    "out": ".",
    "solver": "internal",
    "external_cmd": None,
    "tol": 1e-8,
    "max_iterations": 200,
    "trials": 1,
    "budget_seconds": 7200.0,
    "hierarchies": ",".join(HIERARCHIES),
    "workers": 1,
    "samples": 100_000,
    "grid": 8,
}


class InvalidInput(ValueError):
    pass


def _opt(args, cfg: dict, name: str):
    v = getattr(args, name, None)
    if v is not None:
        return v
    return cfg.get(name, DEFAULTS.get(name))


def _shape(n1: int, n2: int) -> ConeShape:
    try:
        return ConeShape(n1, n2)
    except ValueError as e:
        raise InvalidInput(str(e)) from None


def _solver_cfg(args, cfg) -> SolverConfig:
    tol = float(_opt(args, cfg, "tol"))
    try:
        return SolverConfig(
            max_iterations=int(_opt(args, cfg, "max_iterations")), eps_feas=tol, eps_gap=tol
        )
    except ValueError as e:
        raise InvalidInput(str(e)) from None


# -- build ---------------------------------------------------------------------


def cmd_build(args, cfg) -> int:
    if args.hierarchy not in HIERARCHIES:
        raise InvalidInput(f"unknown hierarchy {args.hierarchy!r}")
    if args.r < 0:
        raise InvalidInput("r must be nonnegative")
    shape = _shape(args.n1, args.n2)
    seed = int(_opt(args, cfg, "seed"))
    C = random_pd_matrix(shape.n, seed)
    p = assemble_copp(C, args.hierarchy, args.r, shape, concise=args.concise,
                      normalize_moments=args.normalize_moments)
    p.metadata["seed"] = seed
    p.metadata["C"] = C.tolist()
    out = _opt(args, cfg, "out")
    os.makedirs(out, exist_ok=True)
    stem = f"{args.hierarchy}_r{args.r}_n{args.n1}-{args.n2}_s{seed}" + ("_concise" if args.concise else "")
    jpath = os.path.join(out, stem + ".json")
    spath = os.path.join(out, stem + ".dat-s")
    p.save_json(jpath)
    export_sdpa(p, spath)
    s = p.summary()
    print(f"wrote {jpath}")
    print(f"wrote {spath}")
    print(f"scalars {s['scalars']}  matrices {len(s['matrices'])}  equalities {s['equalities']}  "
          f"cone constraints {sum(s['cones'].values())} {s['cones']}")
    return EXIT_OK


# -- solve ---------------------------------------------------------------------


def _load_problem(path: str) -> ConicProblem:
    if not os.path.exists(path):
        raise InvalidInput(f"no such file: {path}")
    try:
        if path.endswith(".dat-s") or path.endswith(".dat"):
            return import_sdpa(path)
        return ConicProblem.load_json(path)
    except (ValueError, KeyError, json.JSONDecodeError) as e:
        raise InvalidInput(f"{path}: {e}") from None


def cmd_solve(args, cfg) -> int:
    t0 = time.perf_counter()
    p = _load_problem(args.problem)
    prep = time.perf_counter() - t0
    which = _opt(args, cfg, "solver")
    if which == "external":
        sol = solve_external(p, _opt(args, cfg, "external_cmd"))
    elif which == "internal":
        sol = solve(p, _solver_cfg(args, cfg))
    else:
        raise InvalidInput(f"unknown solver {which!r}")
    print(f"status      {sol.status}")
    print(f"objective   {float(sol.objective)!r}")
    if "y" in sol.values and sol.status in ("Optimal", "Stalled"):
        print(f"y           {float(sol.values['y'])!r}")
    if sol.status in ("Optimal", "Stalled") and which == "internal":
        rep = check_kkt(p, sol)
        print(f"residuals   primal {rep.primal:.2e}  dual {rep.dual:.2e}  gap {rep.gap:.2e}")
    print(f"preparetime {prep:.3f} s")
    print(f"solvertime  {sol.solve_time:.3f} s")
    print(f"totaltime   {prep + sol.solve_time:.3f} s")
    return EXIT_STALL if sol.status == "Stalled" else EXIT_OK


# -- reproduce -------------------------------------------------------------------


@dataclass
class Cell:
    hierarchy: str
    r: int
    trial: int
    status: str
    optv: float
    solt: float
    tott: float
    underflow: bool | None
    exceeded: bool


def _run_hierarchy(h, shape, r_max, Cs, budget, concise, scfg) -> list[Cell]:
    cells = []
    for r in range(r_max + 1):
        stop = False
        for t, C in enumerate(Cs):
            res = solve_copp(C, h, r, shape, concise=concise, cfg=scfg)
            over = res.total_time > budget
            cells.append(Cell(h, r, t, res.status, res.value, res.solve_time, res.total_time, res.underflow, over))
            stop = stop or over
        if stop:
            break
    return cells


def _fmt(v: float) -> str:
    if v == float("inf"):
        return "inf"
    if v == float("-inf"):
        return "-inf"
    return f"{v:.6f}"


def render_tables(cells: list[Cell], hierarchies) -> tuple[str, str]:
    """Long-form CSV and a Markdown summary (mean over trials per depth)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["hierarchy", "r", "trial", "status", "optv", "solt", "tott", "underflow", "exceeded"])
    for c in cells:
        w.writerow([c.hierarchy, c.r, c.trial, c.status, repr(c.optv), f"{c.solt:.4f}", f"{c.tott:.4f}",
                    "" if c.underflow is None else int(c.underflow), int(c.exceeded)])
    rs = sorted({c.r for c in cells})
    head = ["r"] + [f"{h} {k}" for h in hierarchies for k in ("optv", "solt", "tott")]
    lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    for r in rs:
        row = [str(r)]
        for h in hierarchies:
            sel = [c for c in cells if c.hierarchy == h and c.r == r]
            if not sel:
                row += ["-", "-", "-"]
                continue
            vals = [c.optv for c in sel]
            optv = _fmt(float(np.mean(vals)))
            if any(c.underflow for c in sel):
                optv += " (underflow)"
            if any(c.exceeded for c in sel):
                optv += " (budget)"
            row += [optv, f"{np.mean([c.solt for c in sel]):.3f}", f"{np.mean([c.tott for c in sel]):.3f}"]
        lines.append("| " + " | ".join(row) + " |")
    return buf.getvalue(), "\n".join(lines) + "\n"


def cmd_reproduce(args, cfg) -> int:
    shape = _shape(args.n1, args.n2)
    if args.r_max < 0:
        raise InvalidInput("r_max must be nonnegative")
    trials = int(_opt(args, cfg, "trials"))
    if trials < 1:
        raise InvalidInput("trials must be at least 1")
    budget = float(_opt(args, cfg, "budget_seconds"))
    hs = [h.strip() for h in str(_opt(args, cfg, "hierarchies")).split(",") if h.strip()]
    for h in hs:
        if h not in HIERARCHIES:
            raise InvalidInput(f"unknown hierarchy {h!r}")
    seed = int(_opt(args, cfg, "seed"))
    Cs = [random_pd_matrix(shape.n, seed + t) for t in range(trials)]
    scfg = _solver_cfg(args, cfg)
    workers = max(1, int(_opt(args, cfg, "workers")))
    with ThreadPoolExecutor(max_workers=workers) as ex:
        futs = [ex.submit(_run_hierarchy, h, shape, args.r_max, Cs, budget, args.concise, scfg) for h in hs]
        cells = [c for f in futs for c in f.result()]
    csv_text, md = render_tables(cells, hs)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(csv_text)
    if args.markdown:
        with open(args.markdown, "w") as fh:
            fh.write(md)
    print(md, end="")
    if any(c.exceeded for c in cells):
        return EXIT_BUDGET
    return EXIT_OK


# -- verify -----------------------------------------------------------------------


@dataclass
class Verdict:
    kind: str  # certified | refuted | undecided
    method: str = ""
    depth: int | None = None
    witness: dict | None = None

    def line(self) -> str:
        if self.kind == "certified":
            return f"certified-copositive({self.method}, r={self.depth})"
        if self.kind == "refuted":
            return f"refuted({self.method}) witness={json.dumps(self.witness)}"
        return "undecided"


def _load_matrix(path: str) -> np.ndarray:
    if not os.path.exists(path):
        raise InvalidInput(f"no such file: {path}")
    try:
        if path.endswith(".json"):
            with open(path) as fh:
                A = np.array(json.load(fh), dtype=float)
        else:
            A = np.atleast_2d(np.loadtxt(path, dtype=float))
    except (ValueError, json.JSONDecodeError) as e:
        raise InvalidInput(f"{path}: {e}") from None
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInput("matrix must be square")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * (1 + np.abs(A).max())):
        raise InvalidInput("matrix must be symmetric")
    return 0.5 * (A + A.T)


def verify_matrix(A, shape: ConeShape, depth: int, grid: int = 8, scfg: SolverConfig | None = None) -> Verdict:
    """Decide copositivity of ``A`` up to ``depth`` by racing certificates against refutations.

    Exact refutations (rational witnesses) are tried first at every depth, so
    a matrix is never reported certified once a witness exists.
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (shape.n, shape.n):
        raise InvalidInput(f"matrix must be {shape.n}x{shape.n} for shape ({shape.n1},{shape.n2})")
    g = grid_cone_min(A, shape, max(1, grid))
    if g.witness is not None:
        return Verdict("refuted", f"grid k={grid}", None, g.witness.to_dict())
    for r in range(depth + 1):
        if shape.has_soc:
            wit = refute_with_yildirim(A, r, shape)
            if wit is not None:
                return Verdict("refuted", "yildirim", r, wit.to_dict())
            if constraints_margin(dp_constraints(A, r, shape, concise=True)) >= 0:
                return Verdict("certified", "dp", r)
        if solve(nn_membership_constraints(A, r, shape), scfg).status == "Optimal":
            return Verdict("certified", "nn", r)
        if shape.has_soc and solve(zvp_membership_constraints(A, r, shape), scfg).status == "Optimal":
            return Verdict("certified", "zvp", r)
    return Verdict("undecided")


def cmd_verify(args, cfg) -> int:
    A = _load_matrix(args.matrix)
    shape = _shape(args.n1, args.n2)
    if args.depth < 0:
        raise InvalidInput("depth must be nonnegative")
    v = verify_matrix(A, shape, args.depth, int(_opt(args, cfg, "grid")), _solver_cfg(args, cfg))
    print(v.line())
    if v.kind == "undecided":
        val, _ = sample_cone_min(A, shape, int(_opt(args, cfg, "samples")), int(_opt(args, cfg, "seed")))
        print(f"sampled minimum over the truncated cone: {val:.6e}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="symcop", description="Copositivity hierarchies over symmetric cones.")
    ap.add_argument("--config", help="JSON file overriding option defaults")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="assemble a benchmark instance and write JSON and SDPA files")
    b.add_argument("hierarchy", help="dp | yildirim | zvp | nn | lasserre")
    b.add_argument("r", type=int)
    b.add_argument("n1", type=int)
    b.add_argument("n2", type=int)
    b.add_argument("--concise", action="store_true")
    b.add_argument("--normalize-moments", action="store_true")
    b.add_argument("--seed", type=int)
    b.add_argument("--out")
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("solve", help="solve a problem file (.json or .dat-s)")
    s.add_argument("problem")
    s.add_argument("--solver", choices=("internal", "external"))
    s.add_argument("--external-cmd", help="SDPA-compatible command, called as CMD in.dat-s out")
    s.add_argument("--tol", type=float)
    s.add_argument("--max-iterations", type=int)
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("reproduce", help="run the hierarchies with increasing depth and tabulate")
    r.add_argument("--n1", type=int, required=True)
    r.add_argument("--n2", type=int, required=True)
    r.add_argument("--r-max", type=int, required=True)
    r.add_argument("--trials", type=int)
    r.add_argument("--budget-seconds", type=float)
    r.add_argument("--hierarchies", help="comma separated subset")
    r.add_argument("--concise", action="store_true")
    r.add_argument("--seed", type=int)
    r.add_argument("--workers", type=int)
    r.add_argument("--tol", type=float)
    r.add_argument("--max-iterations", type=int)
    r.add_argument("--csv")
    r.add_argument("--markdown")
    r.set_defaults(func=cmd_reproduce)

    v = sub.add_parser("verify", help="certify or refute copositivity of a matrix")
    v.add_argument("matrix", help="JSON nested list or whitespace separated text")
    v.add_argument("--n1", type=int, required=True)
    v.add_argument("--n2", type=int, required=True)
    v.add_argument("--depth", type=int, default=2)
    v.add_argument("--grid", type=int)
    v.add_argument("--samples", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--tol", type=float)
    v.add_argument("--max-iterations", type=int)
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_INVALID if e.code else EXIT_OK
    cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            print(f"error: cannot read config: {e}", file=sys.stderr)
            return EXIT_INVALID
        if not isinstance(cfg, dict):
            print("error: config must be a JSON object", file=sys.stderr)
            return EXIT_INVALID
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    try:
        return args.func(args, cfg)
    except InvalidInput as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
