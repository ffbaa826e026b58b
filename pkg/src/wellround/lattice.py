"""Unimodular lattices, the diagonal action and shortest-vector geometry.

A lattice is stored by a basis whose *rows* are the basis vectors.  The
diagonal group acts through log coordinates ``t`` (summing to zero), so that
``a = diag(exp(t))`` multiplies column ``j`` of every basis row by
``exp(t[j])``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    EnumerationBudgetExceeded,
    NotGenericWR,
    NotWellRounded,
    SingularBasis,
)

MIN_DIM = 2
MAX_DIM = 8

RANK_TOL = 1e-7         # singular values below RANK_TOL * s_max count as zero
GEOM_TOL = 1e-9         # relative slack when comparing vector lengths
BREAKPOINT_MARGIN = 1e-9
TRACE_TOL = 1e-12
DEFAULT_CANDIDATE_CAP = 10**6


def numerical_rank(vectors, rel_tol=RANK_TOL):
    """Rank of the row span of ``vectors`` via a singular-value threshold."""
    m = np.asarray(vectors, dtype=float)
    if m.size == 0:
        return 0
    m = np.atleast_2d(m)
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def trace_zero_basis(n):
    """Orthonormal basis (as rows) of the hyperplane sum(t) = 0 in R^n."""
    # Helmert-style basis; columns of the null space of the all-ones row.
    q, _ = np.linalg.qr(np.vstack([np.ones(n), np.eye(n)[:-1]]).T)
    return q[:, 1:].T.copy()


@dataclass(frozen=True, eq=False)
class Lattice:
    """A unimodular lattice in R^n, 2 <= n <= 8, given by a row basis."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.array(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise DimensionMismatch(f"basis must be square, got shape {b.shape}")
        n = b.shape[0]
        if not MIN_DIM <= n <= MAX_DIM:
            raise DimensionMismatch(f"dimension {n} outside {MIN_DIM}..{MAX_DIM}")
        det = np.linalg.det(b)
        if abs(det) <= 1e-12:
            raise SingularBasis(f"basis is singular (det={det:.3e})")
        if abs(abs(det) - 1.0) > 1e-9:
            raise ValueError(f"basis is not unimodular (|det|={abs(det):.12g}); use normalize()")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self):
        return self.basis.shape[0]

    def gram(self):
        return self.basis @ self.basis.T

    def coordinates(self, vectors):
        """Coordinates of ``vectors`` (rows) with respect to the basis."""
        return np.linalg.solve(self.basis.T, np.atleast_2d(vectors).T).T

    def __repr__(self):
        return f"Lattice(dim={self.dim}, basis={self.basis.tolist()!r})"


def normalize(raw_basis):
    """Rescale a nonsingular basis to covolume one."""
    b = np.array(raw_basis, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise DimensionMismatch(f"basis must be square, got shape {b.shape}")
    det = np.linalg.det(b)
    if abs(det) <= 1e-12:
        raise SingularBasis(f"basis is singular (det={det:.3e})")
    return Lattice(b / abs(det) ** (1.0 / b.shape[0]))


def integer_lattice(n):
    return Lattice(np.eye(n))


def same_lattice(x, y, tol=1e-8):
    """True when the two bases span the same Z-module (integer change of basis)."""
    if x.dim != y.dim:
        return False
    u = y.basis @ np.linalg.inv(x.basis)
    if np.max(np.abs(u - np.round(u))) > tol:
        return False
    return abs(abs(round(np.linalg.det(np.round(u)))) - 1) == 0


@dataclass(frozen=True, eq=False)
class DiagonalElement:
    """Element diag(exp(t_1), ..., exp(t_n)) of the positive diagonal group."""

    log_coords: np.ndarray

    def __post_init__(self):
        t = np.array(self.log_coords, dtype=float).ravel()
        if t.size < 1:
            raise DimensionMismatch("empty log coordinates")
        if abs(t.sum()) > TRACE_TOL * max(1.0, np.abs(t).max()):
            raise ValueError(f"log coordinates must sum to zero (sum={t.sum():.3e})")
        t.setflags(write=False)
        object.__setattr__(self, "log_coords", t)

    @classmethod
    def identity(cls, n):
        return cls(np.zeros(n))

    @classmethod
    def from_coords(cls, t):
        """Project arbitrary log coordinates onto the trace-zero hyperplane."""
        t = np.asarray(t, dtype=float)
        return cls(t - t.mean())

    @property
    def dim(self):
        return self.log_coords.size

    def matrix(self):
        return np.diag(np.exp(self.log_coords))

    def distance(self, other):
        # invariant metric on A realised as the Euclidean metric in log coordinates
        return float(np.linalg.norm(self.log_coords - other.log_coords))

    def __add__(self, other):
        return DiagonalElement.from_coords(self.log_coords + other.log_coords)

    def __neg__(self):
        return DiagonalElement(-self.log_coords)

    def __sub__(self, other):
        return self + (-other)

    def __repr__(self):
        return f"DiagonalElement({self.log_coords.tolist()!r})"


def apply(a, x):
    """The lattice a.x (column j of every basis row scaled by exp(t_j))."""
    if a.dim != x.dim:
        raise DimensionMismatch(f"element of dimension {a.dim} acting on lattice of dimension {x.dim}")
    return Lattice(x.basis * np.exp(a.log_coords)[None, :])


# -- reduction and enumeration ----------------------------------------------

def _gso(b):
    """Gram-Schmidt data of the rows of ``b``: (mu, squared b* norms)."""
    _, r = np.linalg.qr(b.T)
    d = np.diag(r)
    mu = (r / d[:, None]).T
    return mu, d * d


def lll_reduce(basis, delta=0.99):
    """LLL-reduce the rows of ``basis``.

    Returns ``(reduced, u)`` with ``reduced = u @ basis`` and ``u`` unimodular
    integer.  Used only to precondition enumeration; no quality guarantee is
    relied upon.
    """
    b = np.array(basis, dtype=float)
    n = b.shape[0]
    u = np.eye(n, dtype=np.int64)
    mu, bs = _gso(b)
    k = 1
    guard = 0
    while k < n:
        guard += 1
        if guard > 100000:
            break
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q:
                b[k] -= q * b[j]
                u[k] -= q * u[j]
                mu[k, : j + 1] -= q * mu[j, : j + 1]
        if bs[k] >= (delta - mu[k, k - 1] ** 2) * bs[k - 1]:
            k += 1
        else:
            b[[k - 1, k]] = b[[k, k - 1]]
            u[[k - 1, k]] = u[[k, k - 1]]
            mu, bs = _gso(b)
            k = max(k - 1, 1)
    return b, u


def _enumerate_half(b, radius_sq, cap):
    """Integer vectors y != 0 with |y @ b|^2 <= radius_sq, one per +-pair.

    Depth-first Fincke-Pohst enumeration; the representative kept is the one
    whose last nonzero coordinate is positive.
    """
    n = b.shape[0]
    mu, bs = _gso(b)
    mu = mu.tolist()
    bs = bs.tolist()
    y = [0] * n
    out = []
    count = 0

    def descend(i, partial, zero_above):
        nonlocal count
        c = 0.0
        for j in range(i + 1, n):
            if y[j]:
                c -= y[j] * mu[j][i]
        rem = radius_sq - partial
        if rem < 0:
            return
        w = math.sqrt(rem / bs[i])
        lo = math.ceil(c - w)
        hi = math.floor(c + w)
        if zero_above and lo < 0:
            lo = 0
        for yi in range(lo, hi + 1):
            count += 1
            if count > cap:
                raise EnumerationBudgetExceeded(
                    f"enumeration visited more than {cap} candidates"
                )
            dlt = yi - c
            p = partial + dlt * dlt * bs[i]
            if p > radius_sq:
                continue
            y[i] = yi
            if i == 0:
                if not (zero_above and yi == 0):
                    out.append(tuple(y))
            else:
                descend(i - 1, p, zero_above and yi == 0)
        y[i] = 0

    descend(n - 1, 0.0, True)
    return out


def _shortest_outside(b, k, cap):
    """Shortest y @ b with some y_j != 0 for j >= k (rows 0..k-1 of ``b`` span W).

    Schnorr-Euchner zig-zag enumeration with a shrinking radius.  Returns the
    integer coefficient vector.
    """
    n = b.shape[0]
    mu, bs = _gso(b)
    mu = mu.tolist()
    bs = bs.tolist()
    lengths = (b * b).sum(axis=1)
    j0 = k + int(np.argmin(lengths[k:]))
    best = [float(lengths[j0]) * (1 + 1e-12)]
    best_y = [tuple(1 if j == j0 else 0 for j in range(n))]
    y = [0] * n
    count = 0

    def descend(i, partial, zero_above):
        nonlocal count
        if i < k and zero_above:
            return
        c = 0.0
        for j in range(i + 1, n):
            if y[j]:
                c -= y[j] * mu[j][i]
        if zero_above:
            order = itertools.count(0)
        else:
            c0 = round(c)
            order = _zigzag(c0, c)
        for yi in order:
            count += 1
            if count > cap:
                raise EnumerationBudgetExceeded(
                    f"enumeration visited more than {cap} candidates"
                )
            dlt = yi - c
            p = partial + dlt * dlt * bs[i]
            if p >= best[0]:
                break
            y[i] = yi
            if i == 0:
                if not (zero_above and yi == 0):
                    best[0] = p
                    best_y[0] = tuple(y)
            else:
                descend(i - 1, p, zero_above and yi == 0)
        y[i] = 0

    descend(n - 1, 0.0, True)
    return np.array(best_y[0], dtype=np.int64)


def _zigzag(c0, c):
    """Integers by increasing distance from the real center c (c0 = round(c))."""
    yield c0
    step = 1
    first = 1 if c >= c0 else -1
    while True:
        yield c0 + first * step
        yield c0 - first * step
        step += 1


def _adapted_unimodular(basis, coords):
    """Unimodular U whose first k rows of U @ basis span the same space as coords @ basis."""
    w = coords @ basis
    q, _ = np.linalg.qr(w.T)
    scaled = basis - (1 - 1e-6) * (basis @ q) @ q.T
    _, u = lll_reduce(scaled)
    head = (u[: len(coords)] @ basis)
    off = head - (head @ q) @ q.T
    if np.max(np.linalg.norm(off, axis=1)) > 1e-6 * max(1.0, np.max(np.linalg.norm(head, axis=1))):
        return None
    return u


def successive_minima(x, cap=DEFAULT_CANDIDATE_CAP):
    """Greedy independent minima: shortest vector, then shortest vector outside
    the span of those already found, and so on.

    Returns ``(coords, norms)`` with integer coordinates in the basis of x.
    """
    n = x.dim
    reduced, u = lll_reduce(x.basis)
    picked = np.zeros((0, n), dtype=np.int64)
    for k in range(n):
        if k:
            u = _adapted_unimodular(x.basis, picked)
            if u is None:
                return _successive_minima_by_ball(x, cap)
        y = _shortest_outside(u @ x.basis, k, cap)
        c = _canonical_sign((y @ u)[None, :])
        picked = np.vstack([picked, c])
    norms = np.linalg.norm(picked @ x.basis, axis=1)
    return picked, norms


def _successive_minima_by_ball(x, cap):
    n = x.dim
    reduced, _ = lll_reduce(x.basis)
    radius = float(np.max(np.linalg.norm(reduced, axis=1))) * (1 + 1e-9)
    coords, vectors, norms = lattice_vectors_within(x, radius, cap)
    picked = []
    for c, v in zip(coords, vectors):
        if numerical_rank(np.vstack([v] + [p @ x.basis for p in picked])) > len(picked):
            picked.append(c)
            if len(picked) == n:
                break
    picked = np.array(picked)
    return picked, np.linalg.norm(picked @ x.basis, axis=1)


def _canonical_sign(coords):
    """Flip rows so the first nonzero integer coordinate is positive."""
    c = np.array(coords, dtype=np.int64)
    if c.size == 0:
        return c
    first = c[np.arange(len(c)), np.argmax(c != 0, axis=1)]
    return c * np.where(first < 0, -1, 1)[:, None]


def lattice_vectors_within(x, radius, cap=DEFAULT_CANDIDATE_CAP):
    """All +-pairs of nonzero vectors of ``x`` with norm <= radius.

    Returns ``(coords, vectors, norms)``; coords are integer coordinates in
    the basis of ``x`` with canonical sign, rows sorted by (norm, coords).
    """
    reduced, u = lll_reduce(x.basis)
    ys = _enumerate_half(reduced, radius * radius, cap)
    n = x.dim
    if not ys:
        return np.zeros((0, n), dtype=np.int64), np.zeros((0, n)), np.zeros(0)
    coords = _canonical_sign(np.array(ys, dtype=np.int64) @ u)
    vectors = coords @ x.basis
    norms = np.linalg.norm(vectors, axis=1)
    keep = norms <= radius
    coords, vectors, norms = coords[keep], vectors[keep], norms[keep]
    order = np.lexsort(tuple(coords[:, ::-1].T) + (norms,))
    return coords[order], vectors[order], norms[order]


def shortest_length(x, cap=DEFAULT_CANDIDATE_CAP):
    """alpha(x): the length of a shortest nonzero vector."""
    reduced, _ = lll_reduce(x.basis)
    y = _shortest_outside(reduced, 0, cap)
    return float(np.linalg.norm(y @ reduced))


def _cluster(values, tol):
    """Snap sorted ``values`` so entries within ``tol`` of a cluster start share it."""
    snapped = np.empty_like(values)
    start = None
    for i, v in enumerate(values):
        if start is None or v - start > tol:
            start = v
        snapped[i] = start
    return snapped


@dataclass(frozen=True, eq=False)
class ShortVectorReport:
    """Nonzero vectors shorter than (1 + delta_max) * alpha, one per +-pair.

    ``ratios[i]`` is ``|v_i| / alpha - 1`` (snapped so that ties share one
    value) and ``breakpoints`` are the distinct ratios in ascending order.
    """

    alpha: float
    delta_max: float
    vectors: np.ndarray
    coords: np.ndarray
    norms: np.ndarray
    ratios: np.ndarray
    breakpoints: np.ndarray = field(repr=False)

    def below(self, delta):
        """Vectors with |v| < (1 + delta) * alpha."""
        return self.vectors[self.ratios < delta]

    def dim(self, delta):
        if delta > self.delta_max + GEOM_TOL:
            raise ValueError(f"delta {delta} beyond enumerated range {self.delta_max}")
        return numerical_rank(self.below(delta))

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "delta_max": self.delta_max,
            "vectors": self.vectors.tolist(),
            "coords": self.coords.tolist(),
            "breakpoints": self.breakpoints.tolist(),
        }


def short_vectors(x, delta_max, cap=DEFAULT_CANDIDATE_CAP):
    n = x.dim
    if not 0 <= delta_max <= n + 1:
        raise ValueError(f"delta_max must lie in [0, {n + 1}], got {delta_max}")
    alpha = shortest_length(x, cap)
    coords, vectors, norms = lattice_vectors_within(
        x, (1 + delta_max) * alpha * (1 + GEOM_TOL), cap
    )
    alpha = float(norms.min())
    raw = norms / alpha - 1.0
    ratios = _cluster(raw, GEOM_TOL)
    ratios[ratios <= GEOM_TOL] = 0.0
    keep = (ratios < delta_max) | (ratios == 0.0)
    coords, vectors, norms, ratios = coords[keep], vectors[keep], norms[keep], ratios[keep]
    # tie-break equal snapped lengths by integer coordinates
    order = np.lexsort(tuple(coords[:, ::-1].T) + (ratios,))
    coords, vectors, norms, ratios = coords[order], vectors[order], norms[order], ratios[order]
    return ShortVectorReport(
        alpha=alpha,
        delta_max=float(delta_max),
        vectors=vectors,
        coords=coords,
        norms=norms,
        ratios=ratios,
        breakpoints=np.unique(ratios),
    )


def dim_delta(x, delta, cap=DEFAULT_CANDIDATE_CAP):
    """dim of the span of the vectors shorter than (1 + delta) * alpha(x)."""
    return short_vectors(x, delta, cap).dim(delta)


def cover_indices(x, a, eps, margin=BREAKPOINT_MARGIN, cap=DEFAULT_CANDIDATE_CAP):
    """All j in 1..n with a in U_j: dim_delta(ax) == j for delta near j*eps."""
    n = x.dim
    if not 0 < eps < 1.0 / n:
        raise ValueError(f"eps must lie in (0, 1/{n}), got {eps}")
    rep = short_vectors(apply(a, x), min(n * eps + 10 * margin, n + 1), cap)
    found = []
    for j in range(1, n + 1):
        delta = j * eps
        if np.any(np.abs(rep.breakpoints - delta) <= margin):
            continue
        if rep.dim(delta) == j:
            found.append(j)
    return found


def cover_membership(x, a, eps, margin=BREAKPOINT_MARGIN, cap=DEFAULT_CANDIDATE_CAP):
    """Smallest j with a in U_j, or None when ``a`` sits on a boundary."""
    found = cover_indices(x, a, eps, margin, cap)
    return found[0] if found else None


def minimal_vectors(x, tol=0.0, cap=DEFAULT_CANDIDATE_CAP):
    """+-pairs of vectors with |v| <= (1 + tol) * alpha(x)."""
    rep = short_vectors(x, tol + GEOM_TOL, cap)
    return rep.vectors


def is_well_rounded(x, tol=0.0, cap=DEFAULT_CANDIDATE_CAP):
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return numerical_rank(minimal_vectors(x, tol, cap)) == x.dim


def is_generic_well_rounded(x, tol=0.0, cap=DEFAULT_CANDIDATE_CAP):
    """Exactly n independent +-pairs attain the minimum (within ``tol``)."""
    vs = minimal_vectors(x, tol, cap)
    if numerical_rank(vs) != x.dim:
        raise NotWellRounded("lattice is not well-rounded")
    return len(vs) == x.dim


def wr_transversality_rank(x, tol=0.0):
    """Rank of the differentials of a -> |a v_i|^2 - |a v_n|^2 on the trace-zero algebra.

    The differential of |exp(t) v|^2 at t = 0 is 2 * (v_1^2, ..., v_n^2).
    """
    try:
        generic = is_generic_well_rounded(x, tol)
    except NotWellRounded as exc:
        raise NotGenericWR(str(exc)) from exc
    if not generic:
        raise NotGenericWR("lattice has more than n pairs of minimal vectors")
    sq = minimal_vectors(x, tol) ** 2
    rows = sq[:-1] - sq[-1]
    return numerical_rank(rows @ trace_zero_basis(x.dim).T)


def compactness_alpha_bound(n):
    """Lower bound on alpha(x) whenever x has n independent vectors of length <= (n+1) alpha.

    Hadamard: 1 = covol(x) <= alpha * ((n+1) alpha)^(n-1), so
    alpha >= (n+1)^(-(n-1)/n).
    """
    return (n + 1.0) ** (-(n - 1.0) / n)
