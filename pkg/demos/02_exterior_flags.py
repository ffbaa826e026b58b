# %% [markdown]
# Wedges, characters and flags
#
# A discrete subgroup is recorded by the minors of its basis.  The diagonal
# group scales the minor on columns J by chi_J(a), so the stabilizer of the
# subgroup is cut out by the characters on its support.

# %%
from fractions import Fraction

import numpy as np

from wellround import (
    DiagonalElement,
    Flag,
    chi,
    covolume,
    flag_codim_check,
    nested_multiindices,
    stabilizer_subspace,
    wedge_of_group,
)

# %%
w = wedge_of_group([[1, 0, 0], [1, 2, 0]])
print(w.coeffs)
print("covolume", covolume([[1, 0, 0], [1, 2, 0]]))

# %%
a = DiagonalElement.from_coords([0.3, -0.1, -0.2])
print("chi_(1,3)(a) =", chi((1, 3), a))
print("scaled wedge:", w.act(a).coeffs)

# %%
# the group spanned by e_1 has support {(1)}: the stabilizer keeps t_1 = 0
dim, basis = stabilizer_subspace([(1,)], 3)
print(dim, basis)
print(stabilizer_subspace([(1,), (1, 2)], 3)[0])

# %%
# nested multi-indices of a flag, exactly in rational arithmetic
half = Fraction(1, 2)
flag = Flag(4, [
    [[1, half, 0, 2]],
    [[1, half, 0, 2], [0, 1, 3, -1]],
    [[1, half, 0, 2], [0, 1, 3, -1], [2, 0, 1, 1]],
])
print(nested_multiindices(flag))
print("codim, satisfies:", flag_codim_check(flag))

# %%
# a nearly degenerate float flag fails the float threshold; the same flag
# with exact entries goes through
e = 3e-6
rows = [[1, 0, 0, 0], [1, e, 0, 0], [1, e, e, 0]]
try:
    nested_multiindices(Flag(4, [rows[:1], rows[:2], rows[:3]]))
except Exception as exc:
    print(type(exc).__name__, exc)
e = Fraction(3, 10**6)
rows = [[1, 0, 0, 0], [1, e, 0, 0], [1, e, e, 0]]
print(nested_multiindices(Flag(4, [rows[:1], rows[:2], rows[:3]])))
