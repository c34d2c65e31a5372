"""Exporting a benchmark instance to SDPA format and solving it externally.

The internal model is written as an SDPA sparse file, read back into an
identical model, and handed to sdpa-python through the bundled runner.
"""

import os
import tempfile

from symcop import ConeShape, assemble_copp, export_sdpa, import_sdpa, random_pd_matrix, solve, solve_external

shape = ConeShape(1, 3)
p = assemble_copp(random_pd_matrix(shape.n, seed=5), "dp", 2, shape, concise=True)
with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "dp.dat-s")
    export_sdpa(p, path)
    with open(path) as fh:
        head = [next(fh) for _ in range(4)]
    print("".join(head), end="...\n")
    q = import_sdpa(path)
internal = solve(p)
print(f"internal solver: {internal.status} {internal.objective:.9f}")
print(f"re-imported:     {solve(q).objective:.9f}")
try:
    ext = solve_external(p)
    print(f"sdpa-python:     {ext.status} {ext.objective:.9f}")
except (ImportError, FileNotFoundError, RuntimeError) as exc:
    print(f"external solve unavailable: {exc}")
