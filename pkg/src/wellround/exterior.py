"""Exterior powers, supports, diagonal characters and flag stabilizers.

Multi-indices are 1-based strictly increasing tuples, ``(1, 3)`` meaning
e_1 ^ e_3.  Wedge coefficients are listed in lexicographic multi-index order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import null_space

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NumericallySingularMinor,
    RankDeficient,
)
from .lattice import RANK_TOL, numerical_rank

SUPPORT_TOL = 1e-10
MINOR_TOL = 1e-10


def multi_indices(n, d):
    """All J in I^n_d in lexicographic order."""
    return list(itertools.combinations(range(1, n + 1), d))


def check_multi_index(J, n):
    J = tuple(int(i) for i in J)
    if not J:
        raise IndexOutOfRange("empty multi-index")
    if any(b <= a for a, b in zip(J, J[1:])):
        raise IndexOutOfRange(f"multi-index {J} is not strictly increasing")
    if J[0] < 1 or J[-1] > n:
        raise IndexOutOfRange(f"multi-index {J} has entries outside 1..{n}")
    return J


# -- exact rational helpers --------------------------------------------------

def as_fraction_rows(rows):
    """Convert a matrix with int / Fraction / 'p/q' entries to Fractions."""
    return [[Fraction(v) for v in row] for row in rows]


def is_rational_matrix(rows):
    return all(isinstance(v, (int, Fraction, str)) and not isinstance(v, bool)
               for row in rows for v in row)


def _eliminate(rows):
    """Row echelon form over Q; returns (echelon rows, sign of the permutation)."""
    m = [list(r) for r in rows]
    sign = 1
    pivot_row = 0
    ncols = len(m[0]) if m else 0
    for col in range(ncols):
        piv = next((r for r in range(pivot_row, len(m)) if m[r][col] != 0), None)
        if piv is None:
            continue
        if piv != pivot_row:
            m[pivot_row], m[piv] = m[piv], m[pivot_row]
            sign = -sign
        p = m[pivot_row][col]
        for r in range(pivot_row + 1, len(m)):
            f = m[r][col]
            if f:
                f = f / p
                m[r] = [a - f * b for a, b in zip(m[r], m[pivot_row])]
        pivot_row += 1
    return m, sign


def exact_det(rows):
    m, sign = _eliminate(rows)
    det = Fraction(sign)
    for i in range(len(m)):
        det *= m[i][i]
    return det


def exact_rank(rows):
    if not rows:
        return 0
    m, _ = _eliminate(rows)
    return sum(1 for r in m if any(v != 0 for v in r))


def _rank(rows, rational):
    return exact_rank(rows) if rational else numerical_rank(np.array(rows, dtype=float))


# -- wedge classes -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WedgeClass:
    """A d-vector in the exterior power, up to sign.

    The sign is fixed by making the first nonzero coefficient positive.
    """

    n: int
    d: int
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        index = multi_indices(self.n, self.d)
        if v.size != len(index):
            raise DimensionMismatch(f"expected {len(index)} coefficients, got {v.size}")
        scale = np.linalg.norm(v)
        nz = np.flatnonzero(np.abs(v) > SUPPORT_TOL * scale) if scale > 0 else []
        if len(nz) and v[nz[0]] < 0:
            v = -v
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def index(self):
        return multi_indices(self.n, self.d)

    @property
    def coeffs(self):
        return dict(zip(self.index, self.values.tolist()))

    def norm(self):
        return float(np.linalg.norm(self.values))

    def support(self, rel_tol=SUPPORT_TOL):
        cut = rel_tol * self.norm()
        return {J for J, c in zip(self.index, self.values) if abs(c) > cut}

    def act(self, a):
        """Image under the diagonal element ``a``: coefficient J scaled by chi_J(a)."""
        if a.dim != self.n:
            raise DimensionMismatch("dimension mismatch")
        scale = np.array([chi(J, a) for J in self.index])
        return WedgeClass(self.n, self.d, self.values * scale)

    def allclose(self, other, tol=1e-9):
        return (self.n, self.d) == (other.n, other.d) and bool(
            np.all(np.abs(self.values - other.values) <= tol)
        )

    def plucker_residual(self):
        """p12 p34 - p13 p24 + p14 p23; only meaningful for (d, n) = (2, 4)."""
        if (self.d, self.n) != (2, 4):
            raise NotImplementedError("Plucker check implemented for (d, n) = (2, 4) only")
        p = self.coeffs
        return p[1, 2] * p[3, 4] - p[1, 3] * p[2, 4] + p[1, 4] * p[2, 3]

    def to_dict(self):
        return {
            "n": self.n,
            "d": self.d,
            "coeffs": [{"J": list(J), "c": c} for J, c in self.coeffs.items()],
        }

    @classmethod
    def from_dict(cls, data):
        n, d = int(data["n"]), int(data["d"])
        lookup = {tuple(item["J"]): float(item["c"]) for item in data["coeffs"]}
        return cls(n, d, [lookup.get(J, 0.0) for J in multi_indices(n, d)])


def wedge_of_group(vectors):
    """w = v_1 ^ ... ^ v_d for independent rows v_i; coefficient J = det of columns J."""
    v = np.atleast_2d(np.asarray(vectors, dtype=float))
    d, n = v.shape
    if d > n or numerical_rank(v) < d:
        raise RankDeficient(f"{d} vectors in R^{n} are not independent")
    index = multi_indices(n, d)
    cols = np.array(index) - 1
    minors = np.linalg.det(np.stack([v[:, c] for c in cols]))
    return WedgeClass(n, d, minors)


def covolume(vectors):
    """Covolume of the group generated by the rows in their real span."""
    return wedge_of_group(vectors).norm()


def chi(J, a):
    """Character chi_J(a) = det(a restricted to R^J) = exp(sum of t_i, i in J)."""
    J = check_multi_index(J, a.dim)
    return float(np.exp(sum(a.log_coords[i - 1] for i in J)))


def stabilizer_subspace(supports, n):
    """Common kernel of the characters chi_J, J in ``supports``, inside log(A).

    Returns ``(dimension, basis)`` with an orthonormal basis given as rows.
    """
    supports = [check_multi_index(J, n) for J in supports]
    if not supports:
        raise ValueError("support set must be nonempty")
    rows = [np.ones(n)]
    for J in supports:
        r = np.zeros(n)
        r[np.array(J) - 1] = 1.0
        rows.append(r)
    kernel = null_space(np.array(rows), rcond=RANK_TOL)
    return kernel.shape[1], kernel.T.copy()


# -- flags -------------------------------------------------------------------

@dataclass(frozen=True)
class Flag:
    """Nested subspaces L_1 < ... < L_k < R^n given by row bases.

    Entries may be ints, Fractions or 'p/q' strings (exact mode) or floats.
    """

    n: int
    subspaces: tuple

    def __post_init__(self):
        raw = [list(map(list, b)) for b in self.subspaces]
        if not raw:
            raise ValueError("flag needs at least one subspace")
        rational = all(is_rational_matrix(b) for b in raw)
        if rational:
            subs = tuple(tuple(map(tuple, as_fraction_rows(b))) for b in raw)
        else:
            subs = tuple(tuple(tuple(float(v) for v in r) for r in b) for b in raw)
        object.__setattr__(self, "subspaces", subs)
        dims = []
        for b in subs:
            if any(len(r) != self.n for r in b):
                raise DimensionMismatch(f"subspace vectors must have length {self.n}")
            rk = _rank([list(r) for r in b], rational)
            if rk != len(b):
                raise RankDeficient("subspace basis vectors are dependent")
            dims.append(rk)
        if any(b <= a for a, b in zip(dims, dims[1:])) or dims[-1] >= self.n:
            raise ValueError(f"dimensions {dims} must increase strictly and stay below {self.n}")
        for lo, hi in zip(subs, subs[1:]):
            if _rank([list(r) for r in lo + hi], rational) != len(hi):
                raise ValueError("subspaces are not nested")

    @property
    def rational(self):
        return isinstance(self.subspaces[0][0][0], Fraction)

    @property
    def dims(self):
        return [len(b) for b in self.subspaces]

    @property
    def length(self):
        return len(self.subspaces)

    def adapted_basis(self):
        """Vectors v_1..v_n with L_i = span(v_1..v_{d_i}) (completing with e_j)."""
        rational = self.rational
        zero, one = (Fraction(0), Fraction(1)) if rational else (0.0, 1.0)
        chosen = []
        candidates = [list(r) for b in self.subspaces for r in b]
        candidates += [[one if i == j else zero for i in range(self.n)] for j in range(self.n)]
        for v in candidates:
            if _rank(chosen + [v], rational) > len(chosen):
                chosen.append(v)
            if len(chosen) == self.n:
                break
        return chosen

    def subspace_support(self, i):
        """supp(L_i) for the i-th subspace (0-based position in the flag)."""
        b = [list(r) for r in self.subspaces[i]]
        d = len(b)
        if self.rational:
            return {J for J in multi_indices(self.n, d)
                    if exact_det([[r[j - 1] for j in J] for r in b]) != 0}
        return wedge_of_group(b).support()


def nested_multiindices(flag):
    """Nested J_{d_1} < ... < J_{d_k} < J_n with J_d in supp(L_d).

    Built in reverse from J_n = (1..n): J_d is the lexicographically first
    size-d subset of J_{d+1} whose minor of the adapted basis is nonzero.
    Returns the multi-indices at the flag dimensions followed by J_n.
    """
    n = flag.n
    cols = flag.adapted_basis()     # v_1..v_n; S has these as columns
    rational = flag.rational
    if not rational:
        arr = np.array(cols, dtype=float)
        arr /= np.linalg.norm(arr, axis=1)[:, None]
        cols = arr.tolist()

    def minor(J):
        d = len(J)
        m = [[cols[c][r - 1] for c in range(d)] for r in J]
        if rational:
            return exact_det(m) != 0
        return abs(np.linalg.det(np.array(m))) > MINOR_TOL

    chain = {n: tuple(range(1, n + 1))}
    for d in range(n - 1, 0, -1):
        parent = chain[d + 1]
        for J in itertools.combinations(parent, d):
            if minor(J):
                chain[d] = J
                break
        else:
            raise NumericallySingularMinor(
                f"no nonzero {d}x{d} minor inside {parent}; try exact rational input"
            )
    return [chain[d] for d in flag.dims] + [chain[n]]


def flag_codim_check(flag):
    """(codimension of the flag stabilizer in A, codim >= flag length)."""
    supports = set()
    for i in range(flag.length):
        supports |= flag.subspace_support(i)
    dim, _ = stabilizer_subspace(sorted(supports), flag.n)
    codim = (flag.n - 1) - dim
    return codim, codim >= flag.length


# -- sublevel sets ------------------------------------------------------------

@dataclass(frozen=True)
class AlmostAffineReport:
    ok: bool
    max_distance: float
    radius: float
    stabilizer_dim: int
    n_samples: int
    n_sublevel: int
    centroid: tuple

    @property
    def empty(self):
        return self.n_sublevel == 0

    def __bool__(self):
        return self.ok


def _grid_points(grid, k):
    if isinstance(grid, tuple) and len(grid) == 3 and np.isscalar(grid[2]):
        lo, hi, num = grid
        axes = [np.linspace(lo, hi, int(num))] * k
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
    pts = np.atleast_2d(np.asarray(grid, dtype=float))
    if pts.shape[1] != k:
        raise DimensionMismatch(f"grid points need {k} coordinates")
    return pts


def sublevel_almost_affine_check(x, groups, C, t_basis, grid, R):
    """Sampled check that {a in T : |a w_Lambda_i| <= C for all i} stays within
    distance R of a coset b * (intersection of the stabilizers A_Lambda_i).

    ``t_basis`` spans log(T) by rows; ``grid`` is either an array of
    coefficient points or ``(lo, hi, num)`` applied to every axis.  The coset
    offset ``b`` is the centroid of the sampled sublevel set.
    """
    n = x.dim
    t_basis = np.atleast_2d(np.asarray(t_basis, dtype=float))
    if t_basis.shape[1] != n:
        raise DimensionMismatch("T basis has wrong ambient dimension")
    if np.any(np.abs(t_basis.sum(axis=1)) > 1e-9):
        raise ValueError("T basis must lie in the trace-zero hyperplane")
    coeffs = _grid_points(grid, t_basis.shape[0])
    ts = coeffs @ t_basis

    inside = np.ones(len(ts), dtype=bool)
    supports = set()
    for g in groups:
        g = np.atleast_2d(np.asarray(g, dtype=float))
        c = x.coordinates(g)
        if np.max(np.abs(c - np.round(c))) > 1e-7:
            raise ValueError("group generators must be vectors of the lattice")
        w = wedge_of_group(g)
        supports |= w.support()
        indicator = np.zeros((len(w.index), n))
        for row, J in enumerate(w.index):
            indicator[row, np.array(J) - 1] = 1.0
        norms = np.sqrt(((np.exp(ts @ indicator.T) * w.values) ** 2).sum(axis=1))
        inside &= norms <= C
    sub = ts[inside]
    dim, stab = stabilizer_subspace(sorted(supports), n) if supports else (n - 1, None)
    if len(sub) == 0:
        return AlmostAffineReport(True, 0.0, R, dim, len(ts), 0, ())
    centroid = sub.mean(axis=0)
    resid = sub - centroid
    if dim:
        resid = resid - (resid @ stab.T) @ stab
    dist = float(np.max(np.linalg.norm(resid, axis=1)))
    return AlmostAffineReport(dist <= R + 1e-12, dist, R, dim, len(ts), len(sub), tuple(centroid.tolist()))
