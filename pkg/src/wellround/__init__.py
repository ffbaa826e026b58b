"""Well-rounded lattices in closed orbits of the diagonal group.

Shortest-vector geometry, exterior-algebra bookkeeping, orbit search and
grid-scale covering certificates.
"""

from .errors import *  # noqa: F401,F403
from .lattice import (
    DiagonalElement,
    Lattice,
    ShortVectorReport,
    apply,
    compactness_alpha_bound,
    cover_indices,
    cover_membership,
    dim_delta,
    integer_lattice,
    is_generic_well_rounded,
    is_well_rounded,
    lll_reduce,
    minimal_vectors,
    normalize,
    same_lattice,
    short_vectors,
    successive_minima,
    wr_transversality_rank,
)
from .exterior import (
    Flag,
    WedgeClass,
    chi,
    covolume,
    flag_codim_check,
    multi_indices,
    nested_multiindices,
    stabilizer_subspace,
    sublevel_almost_affine_check,
    wedge_of_group,
)
from .orbits import (
    ClosedOrbitStructure,
    SearchResult,
    block_sum,
    compact_orbit_from_quadratic,
    fundamental_unit,
    orbit_from_spec,
    search_well_rounded,
    spread,
    unit_block,
)
from .covering import (
    Cover,
    Element,
    GridCover,
    GridDomain,
    certify_multiplicity,
    cover_lebesgue,
    cover_mesh,
    cover_order,
    fold_to_cfk,
    kkm_check,
    nerve,
    separate_components,
    unfold_cover,
)

__version__ = "0.1.0"
