# %% [markdown]
# Short vectors and the graded dimension dim_delta
#
# A lattice is a row basis with covolume one.  We list its short vectors,
# watch dim_delta step up at the breakpoints, and push it around with the
# diagonal group.

# %%
import math

import numpy as np

from wellround import (
    DiagonalElement,
    apply,
    cover_indices,
    dim_delta,
    integer_lattice,
    is_generic_well_rounded,
    is_well_rounded,
    normalize,
    short_vectors,
    wr_transversality_rank,
)

np.set_printoptions(precision=4, suppress=True)

# %%
x = normalize([[1.0, 0.3, 0.0], [0.2, 1.1, 0.4], [0.0, 0.5, 0.9]])
rep = short_vectors(x, 1.0)
print("alpha =", round(rep.alpha, 6))
print("breakpoints:", rep.breakpoints)
for v, r in zip(rep.vectors, rep.ratios):
    print(v, "ratio", round(r, 4))

# %%
# dim_delta is a step function of delta, constant between breakpoints
for delta in np.linspace(0, 1, 11):
    print(f"delta={delta:.1f}  dim={dim_delta(x, delta)}")

# %%
# squeezing one coordinate makes the lattice lopsided; the indices j with
# a in U_j track how many directions stay short
for s in (0.0, 0.5, 1.0, 2.0):
    a = DiagonalElement.from_coords([s, 0.0, -s])
    print(f"s={s}: j in {cover_indices(x, a, 0.04)}")

# %%
# well-rounded examples
hexagonal = normalize([[1, 0], [0.5, math.sqrt(3) / 2]])
print("hexagonal WR:", is_well_rounded(hexagonal), "generic:", is_generic_well_rounded(hexagonal))
for n in range(2, 7):
    z = integer_lattice(n)
    print(f"Z^{n}: generic WR {is_generic_well_rounded(z)}, transversality rank {wr_transversality_rank(z)}")

# %%
skew = apply(DiagonalElement([math.log(2), -math.log(2)]), integer_lattice(2))
print("diag(2, 1/2) Z^2 is well-rounded:", is_well_rounded(skew))
