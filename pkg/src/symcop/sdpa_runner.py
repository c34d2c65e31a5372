"""SDPA-compatible command line runner backed by ``sdpa-python``.

Usage: ``python -m symcop.sdpa_runner problem.dat-s result.out``

The result file uses the field names of the SDPA executable's output
(``phase.value``, ``objValPrimal``, ``objValDual``, ``xVec``), so the bridge in
:mod:`symcop.sdpa` can drive either this runner or a native SDPA binary.
"""

from __future__ import annotations

import sys

import numpy as np


def run(src: str, dst: str, eps: float = 1e-8) -> int:
    try:
        import sdpap
    except ImportError:  # pragma: no cover - depends on the optional extra
        print("sdpa-python is not installed; install the 'sdpa' extra", file=sys.stderr)
        return 2
    A, b, c, K, J = sdpap.importsdpa(src)
    opts = {"print": "no", "epsilonStar": eps, "epsilonDash": eps}
    x, y, info, _, _ = sdpap.solve(A, b, c, K, J, opts)
    # sdpa-python reads the file as the SDPA dual in flipped signs: its dual
    # vector is the SDPA primal x and its objectives are negated
    xvec = np.ravel(y.toarray()) if hasattr(y, "toarray") else np.ravel(np.asarray(y, dtype=float))
    phase = info.get("phasevalue", "noINFO")
    with open(dst, "w") as fh:
        fh.write(f"phase.value  = {phase}\n")
        fh.write(f"objValPrimal = {-float(info['dualObj'])!r}\n")
        fh.write(f"objValDual   = {-float(info['primalObj'])!r}\n")
        fh.write("xVec = \n{" + ",".join(repr(float(v)) for v in xvec) + "}\n")
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 2:
        print("usage: python -m symcop.sdpa_runner INPUT.dat-s OUTPUT", file=sys.stderr)
        return 2
    return run(argv[0], argv[1])


if __name__ == "__main__":
    sys.exit(main())
