"""Grid-scale analysis of open covers of Delta x R^t.

The simplex factor is realised as the Coxeter-Freudenthal-Kuhn simplex
``{0 <= x_1 <= ... <= x_s <= rho}``; barycentric coordinate j is
``x_j - x_{j-1}`` with the conventions x_0 = 0 and x_{s+1} = rho, so face
F_j = {lambda_j = 0}.  Open sets are finite unions of open axis-aligned boxes
and every topological answer is certified on the grid only.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import (
    DeclarationFalse,
    DimensionMismatch,
    HypothesisViolated,
    NotACover,
    UnboundedElement,
    WindowTooSmall,
)

GRID_CAVEAT = "grid-certified: evaluated on grid points only"


@dataclass(frozen=True)
class GridDomain:
    """Delta^s (x Delta^s2) x [-L, L]^t sampled with ``resolution`` points per unit.

    ``t_bounds`` is a half-width L or one half-width per R^t axis.  The
    optional second simplex factor ``s2`` is used for products of simplices.
    """

    s: int
    t: int
    rho: float = 1.0
    t_bounds: object = 1.0
    resolution: int = 32
    s2: int = 0

    def __post_init__(self):
        if self.s < 0 or self.t < 0 or self.s2 < 0 or self.s + self.s2 + self.t < 1:
            raise ValueError("need s, t >= 0 with s + t >= 1")
        if self.resolution < 4:
            raise ValueError("resolution must be at least 4")
        bounds = self.t_bounds
        bounds = tuple(float(b) for b in bounds) if np.ndim(bounds) else (float(bounds),) * self.t
        if len(bounds) != self.t:
            raise DimensionMismatch(f"need {self.t} half-widths, got {len(bounds)}")
        object.__setattr__(self, "t_bounds", bounds)

    @property
    def step(self):
        return 1.0 / self.resolution

    @property
    def ndim(self):
        return self.s + self.s2 + self.t

    @property
    def simplex_steps(self):
        return int(round(self.rho * self.resolution))

    @property
    def box_steps(self):
        return tuple(int(round(b * self.resolution)) for b in self.t_bounds)

    @property
    def shape(self):
        k = self.simplex_steps + 1
        return (k,) * (self.s + self.s2) + tuple(2 * m + 1 for m in self.box_steps)

    def index_offsets(self):
        return np.array([0] * (self.s + self.s2) + list(self.box_steps))

    def axes(self):
        h = self.step
        k = self.simplex_steps
        axes = [np.arange(k + 1) * h] * (self.s + self.s2)
        axes += [np.arange(-m, m + 1) * h for m in self.box_steps]
        return axes

    def coords(self):
        """Ambient coordinates of every array cell, shape (*shape, ndim)."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def _factor_axes(self, factor):
        return range(0, self.s) if factor == 0 else range(self.s, self.s + self.s2)

    def mask(self):
        """Cells lying in the domain (the simplex ordering constraints)."""
        m = np.ones(self.shape, dtype=bool)
        idx = np.indices(self.shape)
        for factor in (0, 1):
            ax = list(self._factor_axes(factor))
            for a, b in zip(ax, ax[1:]):
                m &= idx[a] <= idx[b]
        return m

    def face_mask(self, j, factor=0):
        """Grid slice of M_j: barycentric coordinate j (1-based) vanishes."""
        ax = list(self._factor_axes(factor))
        dim = len(ax)
        if not 1 <= j <= dim + 1:
            raise ValueError(f"face index {j} outside 1..{dim + 1}")
        if dim == 0:
            return np.zeros(self.shape, dtype=bool)
        idx = np.indices(self.shape)
        if j == 1:
            m = idx[ax[0]] == 0
        elif j == dim + 1:
            m = idx[ax[-1]] == self.simplex_steps
        else:
            m = idx[ax[j - 1]] == idx[ax[j - 2]]
        return m & self.mask()

    def vertices(self):
        """Extreme points of the (convex) domain."""
        def simplex_vertices(dim):
            return [tuple([0.0] * (dim - i) + [self.rho] * i) for i in range(dim + 1)]

        factors = [simplex_vertices(self.s), simplex_vertices(self.s2)]
        factors += [(-b, b) for b in self.t_bounds]
        pts = [tuple(itertools.chain(a, b, c)) for a, b in itertools.product(*factors[:2])
               for c in itertools.product(*factors[2:])]
        return np.array(pts, dtype=float).reshape(len(pts), self.ndim)

    def to_dict(self):
        return {
            "s": self.s,
            "t": self.t,
            "rho": self.rho,
            "t_bounds": list(self.t_bounds),
            "resolution": self.resolution,
            "s2": self.s2,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            s=int(data["s"]),
            t=int(data["t"]),
            rho=float(data.get("rho", 1.0)),
            t_bounds=data.get("t_bounds", 1.0),
            resolution=int(data.get("resolution", 32)),
            s2=int(data.get("s2", 0)),
        )


@dataclass(frozen=True)
class Element:
    """Finite union of open boxes, each box a pair (lo, hi) of corner vectors."""

    boxes: tuple
    label: str = ""

    def __post_init__(self):
        boxes = []
        for lo, hi in self.boxes:
            lo = tuple(-math.inf if v is None else float(v) for v in lo)
            hi = tuple(math.inf if v is None else float(v) for v in hi)
            if len(lo) != len(hi):
                raise DimensionMismatch("box corners differ in length")
            boxes.append((lo, hi))
        object.__setattr__(self, "boxes", tuple(boxes))

    @property
    def ndim(self):
        return len(self.boxes[0][0]) if self.boxes else 0

    def contains(self, points):
        pts = np.asarray(points, dtype=float)
        out = np.zeros(pts.shape[:-1], dtype=bool)
        for lo, hi in self.boxes:
            out |= np.all((pts > np.array(lo)) & (pts < np.array(hi)), axis=-1)
        return out

    def diameter(self):
        """Diameter of the union: the largest corner-to-corner distance over box pairs."""
        lo = np.array([b[0] for b in self.boxes])
        hi = np.array([b[1] for b in self.boxes])
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise UnboundedElement(f"element {self.label!r} is unbounded")
        span = np.maximum(np.abs(hi[:, None, :] - lo[None, :, :]),
                          np.abs(hi[None, :, :] - lo[:, None, :]))
        return float(np.sqrt((span ** 2).sum(axis=-1)).max())


@dataclass(frozen=True)
class Cover:
    elements: tuple

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    @property
    def labels(self):
        return [e.label or str(i) for i, e in enumerate(self.elements)]

    def on(self, domain):
        pts = domain.coords()
        masks = np.array([e.contains(pts) for e in self.elements]) & domain.mask()
        return GridCover(domain, masks, tuple(self.labels))


@dataclass(frozen=True, eq=False)
class GridCover:
    """Cover elements materialised as boolean masks over a domain grid."""

    domain: GridDomain
    masks: np.ndarray = field(repr=False)
    labels: tuple = ()

    def multiplicity(self):
        return self.masks.sum(axis=0)


def as_grid_cover(c, d=None):
    if isinstance(c, GridCover):
        return c
    if d is None:
        raise ValueError("a box cover needs a domain")
    return c.on(d)


def _point(d, flat):
    idx = np.unravel_index(flat, d.shape)
    return tuple(float(a[i]) for a, i in zip(d.axes(), idx))


def _check_coverage(g):
    dm = g.domain.mask()
    bad = dm & (g.multiplicity() == 0)
    if bad.any():
        w = _point(g.domain, int(np.flatnonzero(bad)[0]))
        raise NotACover(f"grid point {w} is not covered", witness=w)


def cover_order(c, d=None):
    """(max multiplicity over grid points, first grid point attaining it)."""
    g = as_grid_cover(c, d)
    _check_coverage(g)
    mult = np.where(g.domain.mask(), g.multiplicity(), -1)
    flat = int(np.argmax(mult))
    return int(mult.flat[flat]), _point(g.domain, flat)


def cover_mesh(c):
    """Largest element diameter of a box cover."""
    return max(e.diameter() for e in c.elements)


def _eccentricity(d):
    pts = d.coords()
    verts = d.vertices()
    diff = pts[..., None, :] - verts
    return np.sqrt((diff ** 2).sum(axis=-1)).max(axis=-1)


def containment_radii(c, d=None):
    """Per element, the radius of the largest induced ball around each grid
    point that stays inside the element (half-step accuracy).

    Radii are capped at the eccentricity of the point in the domain, at
    which the induced ball already is the whole domain.
    """
    g = as_grid_cover(c, d)
    dom = g.domain
    dm = dom.mask()
    h = dom.step
    ecc = _eccentricity(dom)
    radii = []
    for m in g.masks:
        obstacles = dm & ~m
        if not obstacles.any():
            r = np.where(m, ecc, 0.0)
        else:
            dist = ndimage.distance_transform_edt(~obstacles, sampling=h)
            r = np.where(m, np.minimum(np.maximum(dist - h / 2, 0.0), ecc), 0.0)
        radii.append(r)
    return np.array(radii)


def cover_lebesgue(c, d=None):
    """min over grid points of max over elements of the containment radius."""
    g = as_grid_cover(c, d)
    _check_coverage(g)
    best = containment_radii(g).max(axis=0)
    return float(best[g.domain.mask()].min())


def nerve(c, d=None):
    """Faces (sorted index tuples) of sets of elements sharing a grid point."""
    g = as_grid_cover(c, d)
    _check_coverage(g)
    cols = g.masks.reshape(len(g.masks), -1)[:, g.domain.mask().ravel()]
    faces = set()
    for sig in np.unique(cols.T, axis=0):
        members = tuple(np.flatnonzero(sig).tolist())
        for r in range(1, len(members) + 1):
            faces.update(itertools.combinations(members, r))
    return sorted(faces, key=lambda f: (len(f), f))


def _as_mask(obj, d):
    if isinstance(obj, Element):
        return obj.contains(d.coords()) & d.mask()
    m = np.asarray(obj, dtype=bool)
    if m.shape != d.shape:
        raise DimensionMismatch("mask shape differs from the domain grid")
    return m & d.mask()


def separate_components(G, Z, d):
    """Disjoint E_i with G_i minus Z inside E_i inside G_i.

    E_i = {x in G_i : dist(x, F_i) < dist(x, F minus F_i)} where F_i = G_i minus Z and
    F is the union of the F_i; distances are Euclidean to grid points.
    """
    gs = [_as_mask(gi, d) for gi in G]
    z = _as_mask(Z, d)
    for i, j in itertools.combinations(range(len(gs)), 2):
        if np.any(gs[i] & gs[j] & ~z):
            raise HypothesisViolated(f"G_{i} and G_{j} meet outside Z")
    fs = [gi & ~z for gi in gs]
    union = np.any(fs, axis=0) if fs else np.zeros(d.shape, dtype=bool)
    h = d.step

    def dist_to(mask):
        if not mask.any():
            return np.full(d.shape, np.inf)
        return ndimage.distance_transform_edt(~mask, sampling=h)

    out = []
    for gi, fi in zip(gs, fs):
        near = dist_to(fi)
        far = dist_to(union & ~fi)
        out.append(gi & (near < far))
    return out


# -- folding ---------------------------------------------------------------

def triangle_wave(u):
    """The 2-periodic even map u -> min(u mod 2, 2 - u mod 2) onto [0, 1]."""
    m = np.mod(u, 2.0)
    return np.minimum(m, 2.0 - m)


def fold_to_cfk(x):
    """Representative in {0 <= y_1 <= ... <= y_s <= 1} of the reflection orbit of x."""
    return np.sort(triangle_wave(np.asarray(x, dtype=float)), axis=-1)


def cfk_generators(s):
    """Facet reflections of the CFK simplex as callables on points (..., s)."""
    gens = []

    def neg_first(p):
        q = np.array(p, dtype=float)
        q[..., 0] = -q[..., 0]
        return q

    def flip_last(p):
        q = np.array(p, dtype=float)
        q[..., -1] = 2.0 - q[..., -1]
        return q

    gens.append(neg_first)
    for i in range(s - 1):
        def swap(p, i=i):
            q = np.array(p, dtype=float)
            q[..., [i, i + 1]] = q[..., [i + 1, i]]
            return q
        gens.append(swap)
    gens.append(flip_last)
    return gens


def _fold_indices(k, period):
    m = np.mod(k, 2 * period)
    return np.sort(np.minimum(m, 2 * period - m), axis=-1)


def unfold_cover(u, d, window):
    """Pull back a cover of Delta_CFK x R^t along the folding map.

    The result lives on the Euclidean window [-W, W]^s x [-L, L]^t (W = ``window``)
    as a grid cover of R^(s+t).
    """
    if d.s2:
        raise ValueError("unfolding is defined for Delta x R^t domains")
    if d.simplex_steps != d.resolution:
        raise ValueError("unfolding needs the unit CFK simplex (rho = 1)")
    if window < 1.0:
        raise WindowTooSmall("window must contain the unit cube [0, 1]^s")
    g = as_grid_cover(u, d)
    target = GridDomain(0, d.s + d.t, t_bounds=(window,) * d.s + d.t_bounds,
                        resolution=d.resolution)
    idx = np.indices(target.shape)
    offs = target.index_offsets()
    k = np.moveaxis(idx, 0, -1) - offs           # signed integer grid coordinates
    ks = _fold_indices(k[..., : d.s], d.simplex_steps)
    ky = k[..., d.s:] + np.array(d.box_steps, dtype=int)
    src = np.concatenate([ks, ky], axis=-1)
    masks = g.masks[(slice(None),) + tuple(np.moveaxis(src, -1, 0))]
    return GridCover(target, masks, g.labels)


# -- certification -----------------------------------------------------------

_FACE = {}


def _components(mask):
    structure = ndimage.generate_binary_structure(mask.ndim, 1)
    labels, count = ndimage.label(mask, structure=structure)
    return labels, count


@dataclass(frozen=True)
class ComponentFit:
    k: int
    elements: tuple
    fitted_dim: int
    residual: float
    size: int


@dataclass(frozen=True)
class CertificationReport:
    order: int
    witness: tuple
    dim: int
    checked: bool
    hyp_i_ok: bool = True
    hyp_i_failures: tuple = ()
    hyp_ii: tuple = ()
    hyp_ii_ok: bool = True
    empirical_R: float = 0.0
    affine_tol: float = math.inf
    caveat: str = GRID_CAVEAT

    @property
    def target(self):
        return self.dim + 1

    @property
    def violated(self):
        """Order too small although both hypotheses held: contradicts the covering theorem."""
        return self.checked and self.hyp_i_ok and self.hyp_ii_ok and self.order <= self.dim

    def to_dict(self):
        return {
            "order": self.order,
            "witness": list(self.witness),
            "dim": self.dim,
            "target": self.target,
            "checked": self.checked,
            "hyp_i_ok": self.hyp_i_ok,
            "hyp_i_failures": [list(f) for f in self.hyp_i_failures],
            "hyp_ii": [
                {"k": f.k, "elements": list(f.elements), "fitted_dim": f.fitted_dim,
                 "residual": f.residual, "size": f.size}
                for f in self.hyp_ii
            ],
            "hyp_ii_ok": self.hyp_ii_ok,
            "empirical_R": self.empirical_R,
            "affine_tol": self.affine_tol,
            "violated": self.violated,
            "caveat": self.caveat,
        }


def affine_residual(points, k):
    """Max distance of ``points`` to their best k-dimensional affine subspace (centered SVD)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] == 0 or k >= pts.shape[1] or len(pts) <= 1:
        return 0.0
    centered = pts - pts.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    top = vt[:k]
    resid = centered - (centered @ top.T) @ top
    return float(np.linalg.norm(resid, axis=1).max())


def certify_multiplicity(u, d=None, check_hypotheses=True, affine_tol=None):
    """Grid certificate for the covering theorem on Delta^s x R^t.

    Always reports the maximal multiplicity and a witness.  With
    ``check_hypotheses`` it also tests (i) every component of every element
    misses some face slice M_j and (ii) every component of every
    k-intersection projects to R^t within ``affine_tol`` of an
    (s+t-k)-dimensional affine subspace (default: half the smallest R^t
    half-width).
    """
    g = as_grid_cover(u, d)
    dom = g.domain
    if dom.s2:
        raise ValueError("certify_multiplicity expects a Delta x R^t domain")
    order, witness = cover_order(g)
    m = dom.s + dom.t
    if not check_hypotheses:
        return CertificationReport(order, witness, m, False)
    if affine_tol is None:
        affine_tol = min(dom.t_bounds) / 2 if dom.t else math.inf

    faces = [dom.face_mask(j) for j in range(1, dom.s + 2)] if dom.s else []
    failures = []
    for e, mask in enumerate(g.masks):
        labels, count = _components(mask)
        for c in range(1, count + 1):
            comp = labels == c
            if faces and not any(not np.any(comp & f) for f in faces):
                failures.append((e, c))

    coords = dom.coords()
    fits = []
    for face in nerve(g):
        k = len(face)
        if k > m:
            continue
        inter = np.logical_and.reduce(g.masks[list(face)])
        labels, count = _components(inter)
        fitted = m - k
        for c in range(1, count + 1):
            pts = coords[labels == c][:, dom.s:]
            fits.append(ComponentFit(k, face, fitted, affine_residual(pts, fitted), len(pts)))
    emp = max((f.residual for f in fits), default=0.0)
    return CertificationReport(
        order, witness, m, True,
        hyp_i_ok=not failures,
        hyp_i_failures=tuple(failures),
        hyp_ii=tuple(fits),
        hyp_ii_ok=emp <= affine_tol,
        empirical_R=emp,
        affine_tol=float(affine_tol),
    )


@dataclass(frozen=True)
class KKMReport:
    order: int
    witness: tuple
    bound: int

    @property
    def ok(self):
        return self.order >= self.bound

    def to_dict(self):
        return {"order": self.order, "witness": list(self.witness), "bound": self.bound, "ok": self.ok}


def kkm_check(u, d, face_misses):
    """Order bound for covers of a product of simplices whose elements each
    miss a declared face in both factors.

    ``face_misses[e] = (j1, j2)`` gives 1-based face indices per factor;
    ``None`` for a zero-dimensional factor.
    """
    if d.t:
        raise ValueError("kkm_check expects a product of simplices (t = 0)")
    g = as_grid_cover(u, d)
    if len(face_misses) != len(g.masks):
        raise DimensionMismatch("one declaration per element required")
    for e, (mask, decl) in enumerate(zip(g.masks, face_misses)):
        for factor, j in enumerate(decl):
            dim = d.s if factor == 0 else d.s2
            if j is None:
                if dim:
                    raise DeclarationFalse(f"element {e} declares no face for factor {factor}")
                continue
            if np.any(mask & d.face_mask(j, factor)):
                raise DeclarationFalse(f"element {e} meets face {j} of factor {factor}")
    order, witness = cover_order(g)
    return KKMReport(order, witness, d.s + d.s2 + 1)
