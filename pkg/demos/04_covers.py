# %% [markdown]
# Covers of a simplex times Euclidean space
#
# Covers are unions of open boxes evaluated on a grid.  The covering theorem
# says that if each piece misses a face of the simplex and the pieces and
# their intersections are nearly affine in the Euclidean factor, some point
# lies in s + t + 1 pieces.  The certificates below check that on examples.

# %%
import numpy as np

from wellround import (
    certify_multiplicity,
    cover_lebesgue,
    cover_mesh,
    cover_order,
    fold_to_cfk,
    kkm_check,
    nerve,
    unfold_cover,
)
from wellround import bundled

# %%
for name, make in bundled.CERTIFY_SUITE.items():
    c, d = make()
    rep = certify_multiplicity(c, d)
    print(f"{name:13s} s={d.s} t={d.t}: order {rep.order} at {rep.witness}, "
          f"hyp i {rep.hyp_i_ok}, hyp ii {rep.hyp_ii_ok} (R={rep.empirical_R:.3f}), violated {rep.violated}")

# %%
c, d = bundled.segment_pair()
print("nerve:", nerve(c, d))
print("Lebesgue number:", cover_lebesgue(c, d))
c, d = bundled.interval_cover()
print("mesh of the interval cover:", cover_mesh(c))

# %%
# products of simplices
c, d = bundled.square_quadrants()
print(kkm_check(c, d, bundled.SQUARE_QUADRANTS_FACE_MISSES))

# %%
# folding R^s onto the CFK simplex and pulling a cover back
print(fold_to_cfk([[1.3], [-0.4], [2.9]]).ravel())
print(fold_to_cfk([0.9, 0.2]))
c, d = bundled.tube_cover(resolution=16)
u = unfold_cover(c, d, window=2.0)
print("unfolded grid", u.domain.shape, "order", cover_order(u)[0], "vs", cover_order(c, d)[0])
