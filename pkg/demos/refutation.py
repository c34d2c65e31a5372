"""Certifying and refuting copositivity.

Inner hierarchies certify membership; the Yildirim outer hierarchy refutes
it, and its most violated condition is turned into an exact rational point
x of K with x^T A x < 0.  Over the plain orthant, the Horn matrix shows the
NN hierarchy needs level 1.
"""

import numpy as np

from symcop import ConeShape, nn_membership_constraints, sample_cone_min, solve
from symcop.oracle import refute_with_yildirim

shape = ConeShape(1, 3)
u = np.array([0.5, 1.0, 0.3, -0.2])
A = np.eye(4) - 1.5 * np.outer(u, u) / (u @ u)  # negative along u, which lies in K
for r in range(4):
    w = refute_with_yildirim(A, r, shape)
    if w is not None:
        print(f"refuted at depth {r}: x = ({', '.join(str(t) for t in w.x)})")
        print(f"  exact x^T A x = {w.value} ~ {float(w.value):.4f}; exact replay ok: {w.check(A)}")
        break

horn = np.array([[1, -1, 1, 1, -1], [-1, 1, -1, 1, 1], [1, -1, 1, -1, 1],
                 [1, 1, -1, 1, -1], [-1, 1, 1, -1, 1]], dtype=float)
orth = ConeShape(5, 0)
for r in (0, 1):
    print(f"Horn matrix, NN level {r}: {solve(nn_membership_constraints(horn, r, orth)).status}")
print(f"sampled min of x^T H x over the truncated orthant: {sample_cone_min(horn, orth, 200_000)[0]:.2e}")
