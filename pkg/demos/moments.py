"""Moments of the truncated cone and their underflow in high dimension.

The closed form for integrals of monomials over {x in K : e^T x <= 1} is
checked against rejection-sampling Monte Carlo.  At (n1, n2) = (5, 25) the
moments fall far below double precision comfort; dividing by the volume y_0
brings them back into range.
"""

from symcop import ConeShape, MomentTable, moment
from symcop.oracle import mc_moments

shape = ConeShape(1, 3)
alphas = [(0, 0, 0, 0), (1, 0, 0, 0), (0, 1, 0, 0), (2, 1, 0, 0), (0, 0, 2, 0), (1, 1, 0, 2)]
mc = mc_moments(alphas, shape, samples=200_000, seed=1)
print("alpha          closed form    Monte Carlo   (stderr)")
for a in alphas:
    print(f"{str(a):14s} {moment(a, shape):.6e}  {mc.values[a]:.6e}  ({mc.stderr[a]:.1e})")

big = ConeShape(5, 25)
raw = MomentTable(big, 4)
norm = MomentTable(big, 4, normalize=True)
print(f"\n(5, 25): y0 = {raw.y0:.3e}")
print(f"  raw table:        underflow {raw.underflow}, smallest {raw.smallest()[1]:.3e}, {len(raw.tiny)} tiny entries")
print(f"  normalized table: underflow {norm.underflow}, smallest {norm.smallest()[1]:.3e}")
