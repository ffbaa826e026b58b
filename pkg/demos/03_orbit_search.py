# %% [markdown]
# Searching closed orbits for well-rounded lattices
#
# Z[sqrt(D)] under its two real embeddings has a compact diagonal orbit,
# periodic with period the log of the totally positive fundamental unit.
# Direct sums of such blocks give closed orbits that are not compact.  Each
# one contains a well-rounded lattice, and the search finds it.

# %%
import time

import numpy as np

from wellround import (
    block_sum,
    compact_orbit_from_quadratic,
    fundamental_unit,
    search_well_rounded,
    spread,
    unit_block,
)
from wellround.orbits import search_domain

np.set_printoptions(precision=6, suppress=True)

# %%
for D in (2, 3, 5, 7, 13):
    p, q, norm = fundamental_unit(D)
    print(f"D={D}: unit {p} + {q} sqrt({D}), norm {norm}")

# %%
x, s = compact_orbit_from_quadratic(2)
period = s.t2_stabilizer_gens[0]
for k in np.linspace(0, 1, 9):
    from wellround import DiagonalElement, apply
    print(f"{k:.3f} of a period: spread {spread(apply(DiagonalElement(k * period), x)):.6f}")

# %%
cases = {
    "disc 2": [compact_orbit_from_quadratic(2)],
    "Z + disc 2": [unit_block(), compact_orbit_from_quadratic(2)],
    "disc 2 + disc 3": [compact_orbit_from_quadratic(2), compact_orbit_from_quadratic(3)],
}
for name, parts in cases.items():
    x, s = parts[0] if len(parts) == 1 else block_sum(parts)
    eta, c, rho = search_domain(x, s)
    t0 = time.perf_counter()
    r = search_well_rounded(x, s, budget=100_000, tol=1e-6)
    print(f"{name}: rho={rho:.3f} spread-1={r.spread - 1:.1e} evals={r.evaluations} "
          f"{time.perf_counter() - t0:.1f}s")
    print("   a* =", r.a_star.log_coords)
