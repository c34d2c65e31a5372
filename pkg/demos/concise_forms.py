"""Concise constraint forms: fewer and smaller blocks, same optimum.

The frame-based hierarchies are symmetric under swapping the two SOC frame
elements, and many of their blocks simplify.  The concise form drops the
mirrored half and replaces degenerate blocks by nonnegativity, SOC or
smaller PSD constraints.
"""

from symcop import ConeShape, assemble_copp, random_pd_matrix, solve

shape = ConeShape(2, 4)
C = random_pd_matrix(shape.n, seed=3)
for hierarchy in ("dp", "yildirim"):
    for r in (1, 2, 3):
        full = assemble_copp(C, hierarchy, r, shape)
        conc = assemble_copp(C, hierarchy, r, shape, concise=True)
        a, b = solve(full), solve(conc)
        print(f"{hierarchy:9s} r={r}: {len(full.cones):3d} -> {len(conc.cones):3d} cones, "
              f"optimum {a.objective:.9f} vs {b.objective:.9f}")
        print(f"{'':14s}full    {full.summary()['cones']}")
        print(f"{'':14s}concise {conc.summary()['cones']}")
