"""Inner and outer bounds closing in on the copositive optimum.

For a random positive definite C, the benchmark value
max {y : C - y E copositive over K} is bracketed from below by the dP and
ZVP inner hierarchies and from above by the Yildirim and Lasserre outer
hierarchies.  Deeper levels tighten the bracket.
"""

from symcop import ConeShape, random_pd_matrix, solve_copp

shape = ConeShape(1, 3)
C = random_pd_matrix(shape.n, seed=7)
print(f"K = R_+^{shape.n1} x L^{shape.n2}, rank {shape.rank}\n")
print(f"{'r':>2} {'dP (inner)':>14} {'ZVP (inner)':>14} {'Yildirim (outer)':>18} {'Lasserre (outer)':>18}")
for r in range(4):
    row = [solve_copp(C, "dp", r, shape, concise=True)]
    row.append(solve_copp(C, "zvp", r, shape) if r <= 1 else None)
    row.append(solve_copp(C, "yildirim", r, shape, concise=True))
    row.append(solve_copp(C, "lasserre", r, shape) if r <= 2 else None)
    cells = [f"{res.value:14.6f}" if res else f"{'-':>14}" for res in row]
    print(f"{r:>2} {cells[0]} {cells[1]} {cells[2]:>18} {cells[3]:>18}")
