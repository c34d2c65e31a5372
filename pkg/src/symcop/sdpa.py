"""SDPA sparse (``.dat-s``) export/import and an external-solver bridge.

The SDPA primal form is

    minimize  sum_i c_i x_i   s.t.  sum_i F_i x_i - F_0  is PSD (block diagonal)

A :class:`~symcop.model.ConicProblem` maps onto it with one SDPA variable per
solver column (scalars, then upper-triangular matrix entries), ``c = -d`` for
the maximized objective ``d``, ``F_i`` the coefficient of column ``i`` and
``F_0`` minus the constant term.  Block order: cone constraints as declared,
then matrix variables.  Equalities are eliminated beforehand (see
:func:`lower`).  Second-order cone constraints ``(t, w)`` become the arrow
matrix ``[[t, w^T], [w, t I]]``.

A leading ``*`` comment line carries JSON metadata (column names, objective
constant, problem name) so that import restores names.
"""

from __future__ import annotations

import json
import os
import re
import shlex
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from .model import ConicProblem, Solution
from .solver import _columns

META_TAG = "symcop-sdpa/1"


class SdpaFormatError(ValueError):
    """Malformed SDPA input; the message names the offending line and column."""

    def __init__(self, msg: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {msg}")
        self.line = line
        self.column = column


@dataclass
class _Block:
    size: int
    diagonal: bool
    positions: list  # 0-based (i, j) with i <= j
    const: np.ndarray  # F_0 entries at positions
    coef: np.ndarray  # ncols x len(positions): F_i entries


@dataclass
class _Lowered:
    """SDPA view of a problem: columns ``x = offset + basis @ z``."""

    names: list
    c: np.ndarray
    blocks: list
    offset: np.ndarray
    basis: np.ndarray
    objective_constant: float


def _col_name(ref) -> str:
    return ref if isinstance(ref, str) else f"{ref[0]}[{ref[1]},{ref[2]}]"


def _fmt(v: float) -> str:
    return repr(float(v))


def _raw_blocks(p: ConicProblem, cols: dict) -> list[_Block]:
    nc = len(cols)
    blocks = []
    for c in p.cones:
        const = np.asarray(c.constant, dtype=float)
        if c.kind == "nonneg":
            pos = [(i, i) for i in range(c.dim)]

            def flat(F):
                return np.asarray(F, dtype=float)

        elif c.kind == "soc":
            pos = [(0, 0)] + [(0, k) for k in range(1, c.dim)] + [(k, k) for k in range(1, c.dim)]

            def flat(F, d=c.dim):
                F = np.asarray(F, dtype=float)
                return np.concatenate([F, np.full(d - 1, F[0])])

        else:
            pos = [(i, j) for i in range(c.dim) for j in range(i, c.dim)]

            def flat(F, d=c.dim):
                F = np.asarray(F, dtype=float)
                return F[np.triu_indices(d)]

        coef = np.zeros((nc, len(pos)))
        for v, F in c.coeffs.items():
            coef[cols[v]] = flat(F)
        blocks.append(_Block(c.dim, c.kind == "nonneg", pos, -flat(const), coef))
    for name, k in p.matrices.items():
        pos = [(i, j) for i in range(k) for j in range(i, k)]
        coef = np.zeros((nc, len(pos)))
        for t, (i, j) in enumerate(pos):
            coef[cols[(name, i, j)], t] = 1.0
        blocks.append(_Block(k, k == 1, pos, np.zeros(len(pos)), coef))
    return blocks


def _clean(a: np.ndarray) -> np.ndarray:
    scale = np.abs(a).max(initial=0.0)
    a = a.copy()
    a[np.abs(a) <= 1e-14 * scale] = 0.0
    return a


def lower(p: ConicProblem) -> _Lowered:
    """SDPA primal-form data for ``p``.

    Equalities are removed by the substitution ``x = x0 + N z`` with ``x0``
    the least-squares solution and ``N`` an orthonormal null-space basis, so a
    strictly feasible problem stays strictly feasible (paired inequalities
    would destroy the interior that SDPA-type solvers rely on).
    """
    p.validate()
    cols = _columns(p)
    nc = len(cols)
    names = [_col_name(r) for r in cols]
    d = np.zeros(nc)
    for ref, v in p.objective.items():
        d[cols[ref]] = v
    blocks = _raw_blocks(p, cols)
    offset = np.zeros(nc)
    basis = np.eye(nc)
    const = p.objective_constant
    if p.equalities:
        A = np.zeros((len(p.equalities), nc))
        b = np.array([e.rhs for e in p.equalities], dtype=float)
        for k, e in enumerate(p.equalities):
            for ref, v in e.coeffs.items():
                A[k, cols[ref]] += v
        offset = np.linalg.lstsq(A, b, rcond=None)[0]
        if np.linalg.norm(A @ offset - b) > 1e-9 * max(1.0, np.linalg.norm(b)):
            raise ValueError("equality constraints are inconsistent")
        basis = _clean(null_space(A))
        offset = _clean(offset)
        for blk in blocks:
            blk.const = blk.const - offset @ blk.coef
            blk.coef = basis.T @ blk.coef
        const += float(d @ offset)
        d = basis.T @ d
        names = [f"z{k + 1}" for k in range(basis.shape[1])]
    for blk in blocks:
        blk.const = _clean(blk.const)
        blk.coef = _clean(blk.coef)
    return _Lowered(names, -d, blocks, offset, basis, const)


def to_sdpa_text(p: ConicProblem) -> str:
    """SDPA sparse text for ``p``; identical input gives identical text."""
    low = lower(p)
    meta = {
        "format": META_TAG,
        "name": p.name,
        "objective_constant": low.objective_constant,
        "columns": low.names,
    }
    blocks = low.blocks
    lines = ["* " + json.dumps(meta, separators=(",", ":"))]
    lines.append(str(len(low.names)))
    lines.append(str(len(blocks)))
    lines.append(" ".join(str(-b.size if b.diagonal else b.size) for b in blocks))
    lines.append(" ".join(_fmt(v) for v in low.c))
    quint = []
    for bno, b in enumerate(blocks, start=1):
        rows = [(0, b.const)] + [(k + 1, b.coef[k]) for k in range(b.coef.shape[0])]
        for mat, vals in rows:
            for t in np.flatnonzero(vals):
                i, j = b.positions[t]
                quint.append((mat, bno, i + 1, j + 1, vals[t]))
    quint.sort(key=lambda q: q[:4])
    lines.extend(f"{m} {b} {i} {j} {_fmt(v)}" for m, b, i, j, v in quint)
    return "\n".join(lines) + "\n"


def export_sdpa(p: ConicProblem, path) -> None:
    """Write ``p`` as an SDPA sparse file."""
    with open(path, "w") as fh:
        fh.write(to_sdpa_text(p))


_SEP = re.compile(r"[,{}()]")


def _tokens(line: str, lineno: int):
    """Whitespace/punctuation separated tokens with their 1-based columns."""
    clean = _SEP.sub(" ", line)
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", clean)]


def _int(tok, lineno: int) -> int:
    text, col = tok
    try:
        return int(text)
    except ValueError:
        raise SdpaFormatError(f"expected an integer, found {text!r}", lineno, col) from None


def _float(tok, lineno: int) -> float:
    text, col = tok
    try:
        return float(text)
    except ValueError:
        raise SdpaFormatError(f"expected a number, found {text!r}", lineno, col) from None


def parse_sdpa(text: str) -> ConicProblem:
    """Inverse of :func:`to_sdpa_text` on its image; accepts general SDPA sparse files."""
    lines = text.splitlines()
    meta = {}
    k = 0
    while k < len(lines) and (not lines[k].strip() or lines[k].lstrip()[:1] in ("*", '"')):
        body = lines[k].lstrip()[1:].strip()
        if body.startswith("{"):
            try:
                cand = json.loads(body)
                if cand.get("format") == META_TAG:
                    meta = cand
            except json.JSONDecodeError:
                pass
        k += 1

    def take(what: str):
        nonlocal k
        if k >= len(lines):
            raise SdpaFormatError(f"unexpected end of file, expected {what}", k + 1)
        toks = _tokens(lines[k], k + 1)
        k += 1
        return toks, k

    toks, ln = take("number of constraints")
    if not toks:
        raise SdpaFormatError("missing number of constraints", ln)
    m = _int(toks[0], ln)
    toks, ln = take("number of blocks")
    if not toks:
        raise SdpaFormatError("missing number of blocks", ln)
    nb = _int(toks[0], ln)
    if m < 0 or nb < 0:
        raise SdpaFormatError("counts must be nonnegative", ln)
    toks, ln = take("block structure")
    if len(toks) < nb:
        raise SdpaFormatError(f"expected {nb} block sizes, found {len(toks)}", ln)
    sizes = [_int(t, ln) for t in toks[:nb]]
    if any(s == 0 for s in sizes):
        raise SdpaFormatError("block size 0", ln)
    c = []
    while len(c) < m:
        toks, ln = take("objective vector")
        c.extend(_float(t, ln) for t in toks)
    if len(c) > m:
        raise SdpaFormatError(f"objective vector has {len(c)} entries, expected {m}", ln)

    mats = [[{} for _ in range(m + 1)] for _ in range(nb)]
    while k < len(lines):
        toks, ln = take("entry")
        if not toks:
            continue
        if len(toks) != 5:
            raise SdpaFormatError(f"expected 5 fields 'matno blkno i j value', found {len(toks)}", ln,
                                  toks[min(len(toks), 5) - 1][1])
        mat, blk, i, j = (_int(t, ln) for t in toks[:4])
        v = _float(toks[4], ln)
        if not 0 <= mat <= m:
            raise SdpaFormatError(f"matrix number {mat} out of range 0..{m}", ln, toks[0][1])
        if not 1 <= blk <= nb:
            raise SdpaFormatError(f"block number {blk} out of range 1..{nb}", ln, toks[1][1])
        size = abs(sizes[blk - 1])
        if not (1 <= i <= size and 1 <= j <= size):
            raise SdpaFormatError(f"index ({i},{j}) outside block of size {size}", ln, toks[2][1])
        if sizes[blk - 1] < 0 and i != j:
            raise SdpaFormatError("off-diagonal entry in a diagonal block", ln, toks[2][1])
        i, j = min(i, j), max(i, j)
        d = mats[blk - 1][mat]
        d[(i - 1, j - 1)] = d.get((i - 1, j - 1), 0.0) + v

    names = meta.get("columns") or [f"x{i + 1}" for i in range(m)]
    if len(names) != m:
        raise SdpaFormatError("metadata column count does not match the file", 1)
    p = ConicProblem(name=meta.get("name", ""))
    for nm in names:
        p.add_scalar(nm)
    p.set_objective({nm: -cv for nm, cv in zip(names, c)}, meta.get("objective_constant", 0.0))
    for b, size in enumerate(sizes):
        dim = abs(size)

        def dense(d):
            if size < 0:
                out = np.zeros(dim)
                for (i, _), v in d.items():
                    out[i] = v
                return out
            out = np.zeros((dim, dim))
            for (i, j), v in d.items():
                out[i, j] = out[j, i] = v
            return out

        kind = "nonneg" if size < 0 else "psd"
        coeffs = {names[t - 1]: dense(mats[b][t]) for t in range(1, m + 1) if mats[b][t]}
        p.add_cone(kind, -dense(mats[b][0]), coeffs, name=f"block{b + 1}")
    return p


def import_sdpa(path) -> ConicProblem:
    """Read an SDPA sparse file into a :class:`ConicProblem`."""
    with open(path) as fh:
        return parse_sdpa(fh.read())


# -- external solver bridge ---------------------------------------------------

_PHASES = {
    "pdOPT": "Optimal",
    "pINF_dFEAS": "Infeasible",
    "pdINF": "Infeasible",
    "dUNBD": "Infeasible",
    "pFEAS_dINF": "Unbounded",
    "pUNBD": "Unbounded",
}


def default_external_command() -> list[str]:
    """Command of the bundled SDPA-compatible runner (needs ``sdpa-python``)."""
    return [sys.executable, "-m", "symcop.sdpa_runner"]


def parse_sdpa_output(text: str) -> dict:
    """Extract ``phase``, ``objValPrimal``, ``objValDual`` and ``xVec`` from SDPA output."""
    out = {}
    m = re.search(r"phase\.value\s*=\s*(\S+)", text)
    if m:
        out["phase"] = m.group(1)
    for key in ("objValPrimal", "objValDual"):
        m = re.search(key + r"\s*=\s*(\S+)", text)
        if m:
            out[key] = float(m.group(1))
    m = re.search(r"xVec\s*=\s*\{([^}]*)\}", text)
    if m:
        body = m.group(1).strip()
        out["xVec"] = [float(t) for t in body.split(",")] if body else []
    if "phase" not in out or "objValPrimal" not in out:
        raise ValueError("SDPA output lacks phase.value or objValPrimal")
    return out


def solve_external(p: ConicProblem, command=None, workdir=None, timeout: float | None = None) -> Solution:
    """Solve ``p`` by writing ``.dat-s``, running ``command in out`` and parsing ``out``.

    ``command`` is a string or argument list naming any SDPA-compatible
    executable; it defaults to the bundled runner.
    """
    if command is None:
        command = default_external_command()
    elif isinstance(command, str):
        command = shlex.split(command)
    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        src = os.path.join(tmp, "problem.dat-s")
        dst = os.path.join(tmp, "problem.out")
        export_sdpa(p, src)
        proc = subprocess.run(list(command) + [src, dst], capture_output=True, text=True, timeout=timeout)
        if proc.returncode != 0 or not os.path.exists(dst):
            raise RuntimeError(f"external solver failed ({proc.returncode}): {proc.stderr.strip()[-500:]}")
        with open(dst) as fh:
            res = parse_sdpa_output(fh.read())
    low = lower(p)
    cols = list(_columns(p))
    status = _PHASES.get(res["phase"], "Stalled")
    sol = Solution(status=status, objective=np.nan, solver="external")
    z = np.asarray(res.get("xVec", []), dtype=float)
    if z.size == low.basis.shape[1]:
        x = low.offset + low.basis @ z
        sol.values = {r: float(v) for r, v in zip(cols, x) if isinstance(r, str)}
        for name, k in p.matrices.items():
            Q = np.zeros((k, k))
            for r, v in zip(cols, x):
                if not isinstance(r, str) and r[0] == name:
                    Q[r[1], r[2]] = Q[r[2], r[1]] = v
            sol.matrices[name] = Q
    if status == "Infeasible":
        sol.objective = -np.inf
    elif status == "Unbounded":
        sol.objective = np.inf
    else:
        sol.objective = float(-res["objValPrimal"] + low.objective_constant)
        if "objValDual" in res:
            sol.gap = abs(res["objValPrimal"] - res["objValDual"]) / max(1.0, abs(res["objValPrimal"]))
    sol.solve_time = time.perf_counter() - t0
    return sol
