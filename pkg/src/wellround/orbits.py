"""Closed diagonal orbits built from real quadratic orders, and the search
for well-rounded lattices along them.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag
from scipy.optimize import minimize

from .errors import BudgetExhausted, DimensionMismatch, NotSquarefree
from .lattice import (
    DEFAULT_CANDIDATE_CAP,
    DiagonalElement,
    Lattice,
    apply,
    lattice_vectors_within,
    lll_reduce,
    normalize,
    same_lattice,
    successive_minima,
    trace_zero_basis,
)

THREADS_ENV = "WELLROUND_THREADS"
GRID_CAP_PER_DIM = 250


# -- quadratic units ---------------------------------------------------------

def is_squarefree(D):
    if D < 2:
        return False
    p = 2
    while p * p <= D:
        if D % (p * p) == 0:
            return False
        p += 1
    return True


def sqrt_continued_fraction(D):
    """(a0, period) of the continued fraction of sqrt(D), D not a square."""
    a0 = math.isqrt(D)
    if a0 * a0 == D:
        raise ValueError(f"{D} is a perfect square")
    m, d, a = 0, 1, a0
    period = []
    while a != 2 * a0:
        m = d * a - m
        d = (D - m * m) // d
        a = (a0 + m) // d
        period.append(a)
    return a0, period


def fundamental_unit(D):
    """Fundamental unit p + q sqrt(D) of Z[sqrt(D)] and its norm (+1 or -1)."""
    a0, period = sqrt_continued_fraction(D)
    p_prev, p = 1, a0
    q_prev, q = 0, 1
    for a in period[:-1]:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    norm = p * p - D * q * q
    assert norm in (1, -1)
    return p, q, norm


def totally_positive_unit(D):
    """Generator p + q sqrt(D) (norm 1, p, q > 0) of the totally positive units."""
    p, q, norm = fundamental_unit(D)
    if norm == -1:
        p, q = p * p + D * q * q, 2 * p * q
    return p, q


def _log_unit(p, q, D):
    return math.log(p) + math.log1p(q * math.sqrt(D) / p)


# -- orbit structures --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ClosedOrbitStructure:
    """Coordinate block decomposition R^n = V_1 + ... + V_d of a closed orbit.

    ``blocks`` are 1-based coordinate sets; ``t2_stabilizer_gens`` (rows, log
    coordinates) generate the stabilizer of x in T_2.
    """

    blocks: tuple
    t2_stabilizer_gens: np.ndarray = field(default=None)

    def __post_init__(self):
        blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
        flat = sorted(i for b in blocks for i in b)
        if not blocks or flat != list(range(1, len(flat) + 1)):
            raise ValueError(f"blocks {blocks} do not partition 1..n")
        n = len(flat)
        gens = self.t2_stabilizer_gens
        gens = np.zeros((0, n)) if gens is None else np.atleast_2d(np.asarray(gens, dtype=float))
        if gens.size == 0:
            gens = np.zeros((0, n))
        if gens.shape[1] != n:
            raise DimensionMismatch("generator length differs from n")
        for g in gens:
            for b in blocks:
                if abs(g[np.array(b) - 1].sum()) > 1e-9:
                    raise ValueError("stabilizer generator is not in T_2")
        gens.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "t2_stabilizer_gens", gens)

    @property
    def n(self):
        return sum(len(b) for b in self.blocks)

    @property
    def d(self):
        return len(self.blocks)

    @property
    def t1_dim(self):
        return self.d - 1

    @property
    def t2_dim(self):
        return self.n - self.d

    def block_indicator(self, i):
        v = np.zeros(self.n)
        v[np.array(self.blocks[i]) - 1] = 1.0
        return v

    def t1_basis(self):
        """Orthonormal rows spanning log(T_1): per-block constants, trace zero."""
        if self.d == 1:
            return np.zeros((0, self.n))
        ind = np.array([self.block_indicator(i) for i in range(self.d)])
        proj = ind - ind.sum(axis=1, keepdims=True) / self.n
        u, _, _ = np.linalg.svd(proj.T, full_matrices=False)
        return u[:, : self.d - 1].T.copy()

    def block_scales(self, t):
        """chi_i(t): the mean log scaling of block V_i (exact on T_1)."""
        t = np.asarray(t, dtype=float)
        return np.array([t[np.array(b) - 1].mean() for b in self.blocks])

    def simplex_vertices(self, rho):
        """Log coordinates of b_1..b_d spanning Delta_rho = {max_i chi_i <= rho}."""
        verts = []
        for i, b in enumerate(self.blocks):
            c = np.full(self.d, float(rho))
            c[i] = -rho * (self.n - len(b)) / len(b)
            verts.append(sum(c[j] * self.block_indicator(j) for j in range(self.d)))
        return np.array(verts)

    def project(self, i, vectors):
        """P_i: the coordinates outside block i set to zero."""
        v = np.array(vectors, dtype=float)
        mask = self.block_indicator(i).astype(bool)
        v[..., ~mask] = 0.0
        return v

    def to_dict(self):
        return {
            "blocks": [list(b) for b in self.blocks],
            "t1_dim": self.t1_dim,
            "t2_dim": self.t2_dim,
            "t2_stabilizer_gens": self.t2_stabilizer_gens.tolist(),
        }


def verify_structure(x, s, tol=1e-8):
    """Every stabilizer generator maps x onto itself.

    A floating point check: units beyond ~1e8 (e.g. D = 61) give change of
    basis entries too large to certify as integers in double precision.
    """
    return all(same_lattice(x, apply(DiagonalElement(g), x), tol) for g in s.t2_stabilizer_gens)


def compact_orbit_from_quadratic(D):
    """The lattice of Z[sqrt(D)] under its two real embeddings, with its stabilizer."""
    if not is_squarefree(D):
        raise NotSquarefree(f"{D} is not a squarefree integer >= 2")
    r = math.sqrt(D)
    x = normalize([[1.0, 1.0], [r, -r]])
    p, q = totally_positive_unit(D)
    g = _log_unit(p, q, D)
    return x, ClosedOrbitStructure(((1, 2),), [[g, -g]])


def unit_block():
    """The rank-one block Z (bare 1x1 basis; Lattice requires n >= 2)."""
    return np.eye(1), ClosedOrbitStructure(((1,),))


def block_sum(parts):
    """Orthogonal direct sum of (basis, structure) parts, one block per part."""
    if not parts:
        raise ValueError("need at least one part")
    bases, blocks, gens = [], [], []
    offset = 0
    total = sum(s.n for _, s in parts)
    for basis, s in parts:
        b = basis.basis if isinstance(basis, Lattice) else np.atleast_2d(np.asarray(basis, float))
        bases.append(b)
        blocks.extend(tuple(i + offset for i in blk) for blk in s.blocks)
        for g in s.t2_stabilizer_gens:
            padded = np.zeros(total)
            padded[offset: offset + s.n] = g
            gens.append(padded)
        offset += s.n
    x = normalize(block_diag(*bases))
    return x, ClosedOrbitStructure(tuple(blocks), np.array(gens) if gens else None)


def orbit_from_spec(spec):
    """Build (x, structure) from {"blocks": [{"type": "unit"} | {"type": "quadratic", "D": 2}]}."""
    parts = []
    for blk in spec["blocks"]:
        kind = blk.get("type")
        if kind == "unit":
            parts.append(unit_block())
        elif kind == "quadratic":
            parts.append(compact_orbit_from_quadratic(int(blk["D"])))
        else:
            raise ValueError(f"unknown block type {kind!r}")
    if len(parts) == 1:
        basis, s = parts[0]
        if isinstance(basis, Lattice):
            return basis, s
    return block_sum(parts)


# -- spread ------------------------------------------------------------------

def spread(x, cap=DEFAULT_CANDIDATE_CAP):
    """lambda_n / lambda_1 of the greedy independent minima; 1 iff well-rounded."""
    _, norms = successive_minima(x, cap)
    return float(norms[-1] / norms[0])


# -- search ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SearchResult:
    a_star: DiagonalElement
    lattice: Lattice
    spread: float
    evaluations: int
    trace: list = field(default=None, repr=False)

    def to_dict(self):
        return {
            "a_star": self.a_star.log_coords.tolist(),
            "basis": self.lattice.basis.tolist(),
            "spread": self.spread,
            "evaluations": self.evaluations,
        }


class _OutOfBudget(Exception):
    pass


class _Objective:
    """Counts spread evaluations and remembers the best point."""

    def __init__(self, x, budget, keep_trace):
        self.x = x
        self.budget = budget
        self.count = 0
        self.best_t = None
        self.best_spread = math.inf
        self.trace = [] if keep_trace else None

    def record(self, t, value):
        self.count += 1
        if self.trace is not None:
            self.trace.append((tuple(t.tolist()), value))
        if value < self.best_spread:
            self.best_spread = value
            self.best_t = np.array(t)

    def __call__(self, t):
        if self.count >= self.budget:
            raise _OutOfBudget
        t = np.asarray(t, dtype=float)
        t = t - t.mean()
        value = spread(apply(DiagonalElement(t), self.x))
        self.record(t, value)
        return value


def _spread_at(args):
    x, t = args
    return spread(apply(DiagonalElement(t), x))


def _workers():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def estimate_eta(x, s, per_axis=8, radius=3.0):
    """Smallest nonzero block projection |P_i(v)| over vectors of norm <= radius,
    sampled over a grid of the T_2 fundamental domain."""
    gens = s.t2_stabilizer_gens
    axes = [np.arange(per_axis) / per_axis] * len(gens)
    us = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(gens)) if len(gens) else np.zeros((1, 0))
    eta = math.inf
    for u in us:
        t = u @ gens if len(gens) else np.zeros(s.n)
        _, vecs, _ = lattice_vectors_within(apply(DiagonalElement.from_coords(t), x), radius)
        for i in range(s.d):
            p = np.linalg.norm(s.project(i, vecs), axis=1)
            p = p[p > 1e-9]
            if p.size:
                eta = min(eta, float(p.min()))
    return eta


def search_domain(x, s):
    """(eta, C, rho) with C = sqrt(n) and rho = log(2 C / eta) + 0.5."""
    eta = estimate_eta(x, s)
    c = math.sqrt(s.n)
    return eta, c, math.log(2 * c / eta) + 0.5


def _simplex_grid(d, g):
    """Barycentric points k / g, k in Z^d_{>=0}, sum k = g (lexicographic)."""
    if d == 1:
        return np.ones((1, 1))
    pts = []

    def rec(prefix, left, slots):
        if slots == 1:
            pts.append(prefix + [left])
            return
        for k in range(left + 1):
            rec(prefix + [k], left - k, slots - 1)

    rec([], g, d)
    return np.array(pts, dtype=float) / g


def _grid_shape(d, t2, grid_budget):
    """Simplex divisions g and torus points per axis h within ``grid_budget``."""
    m = (d - 1) + t2
    if m == 0:
        return 1, 1
    h = max(2, int(grid_budget ** (1.0 / m))) if t2 else 1
    while h > 2 and h ** t2 > grid_budget:
        h -= 1
    g = 1
    while d > 1 and math.comb(g + d, d - 1) * h ** t2 <= grid_budget:
        g += 1
    return g, h


def _newton_equalize(x, t, coords, iters=40):
    """Solve |e^t v_i| = |e^t v_1| for the given lattice vectors by Newton's method."""
    n = x.dim
    v2 = (coords @ x.basis) ** 2
    q = trace_zero_basis(n)
    t = np.array(t, dtype=float)
    for _ in range(iters):
        e = np.exp(2 * t)
        lens = v2 @ e
        f = np.log(lens[1:]) - np.log(lens[0])
        if np.max(np.abs(f)) < 1e-15:
            break
        grad = 2 * v2 * e / lens[:, None]
        jac = (grad[1:] - grad[0]) @ q.T
        step, *_ = np.linalg.lstsq(jac, -f, rcond=None)
        step = step @ q
        if np.max(np.abs(step)) > 1.0:
            step /= np.max(np.abs(step))
        t = t + step
        if not np.all(np.isfinite(t)):
            return None
    return t - t.mean()


def search_well_rounded(x, s, budget=5000, seed=0, tol=1e-6, keep_trace=False, workers=None):
    """Search the orbit A.x for a well-rounded lattice.

    Coarse grid over Delta_rho x (T_2 fundamental parallelepiped), then
    Nelder-Mead on log(spread) from the best cells with seeded restarts,
    each followed by a Newton step equalising the current independent
    minima.  Raises BudgetExhausted (carrying the best result) when
    spread - 1 stays above ``tol``.
    """
    if s.n != x.dim:
        raise DimensionMismatch("structure and lattice dimensions differ")
    if budget < 100:
        raise ValueError("budget must be at least 100")
    n = x.dim
    rng = np.random.default_rng(seed)
    obj = _Objective(x, budget, keep_trace)
    workers = workers or _workers()

    def result():
        t = obj.best_t
        a = DiagonalElement.from_coords(t)
        return SearchResult(a, apply(a, x), obj.best_spread, obj.count, obj.trace)

    def done():
        return obj.best_spread - 1 <= tol

    def polish(t):
        for _ in range(3):
            y = apply(DiagonalElement.from_coords(t), x)
            coords, _ = successive_minima(y)
            t_new = _newton_equalize(x, t, coords)
            if t_new is None:
                return
            before = obj.best_spread
            val = obj(t_new)
            if done() or val >= before:
                return
            t = t_new

    try:
        obj(np.zeros(n))
        if done():
            return result()

        t1 = s.t1_basis()
        gens = s.t2_stabilizer_gens
        param = np.vstack([t1, gens])           # rows span log(A)
        if param.shape[0] != n - 1:
            raise ValueError("stabilizer generators must span T_2 (need cocompact stabilizer)")
        _, _, rho = search_domain(x, s)

        g, h = _grid_shape(s.d, len(gens), max(min(budget // 4, GRID_CAP_PER_DIM * (n - 1) ** 2), 1))
        bary = _simplex_grid(s.d, g)
        simplex_pts = bary @ s.simplex_vertices(rho) if s.d > 1 else np.zeros((1, n))
        if len(gens):
            axes = [np.arange(h) / h] * len(gens)
            us = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(gens))
        else:
            us = np.zeros((1, 0))
        ts = np.array([p + (u @ gens if len(gens) else 0.0) for p in simplex_pts for u in us])
        ts = ts[: max(budget - obj.count - 1, 0)]
        if workers > 1 and len(ts) > 64:
            with ProcessPoolExecutor(workers) as pool:
                values = list(pool.map(_spread_at, [(x, t) for t in ts], chunksize=32))
        else:
            values = [_spread_at((x, t)) for t in ts]
        for t, v in zip(ts, values):
            obj.record(t - t.mean(), v)
        if done():
            return result()

        # Nelder-Mead works in coordinates z with t = z @ param
        pinv = np.linalg.pinv(param)
        step = np.concatenate([
            np.full(len(t1), rho * 2.0 / max(g, 1)),
            np.full(len(gens), 1.0 / max(h, 1)),
        ])
        order = np.lexsort((np.arange(len(values)), values))
        starts = [ts[i] for i in order[:4]] if len(values) else [np.zeros(n)]

        def f(z):
            return math.log(obj(z @ param))

        def run(z0, scale):
            simplex = np.vstack([z0, z0 + np.diag(scale)])
            remaining = budget - obj.count
            res = minimize(f, z0, method="Nelder-Mead", options={
                "initial_simplex": simplex,
                "maxfev": max(min(remaining, 400 * len(z0)), 1),
                "xatol": 1e-12,
                "fatol": 1e-14,
            })
            polish(res.x @ param)

        for t_start in starts:
            run(t_start @ pinv, step)
            if done():
                return result()
        scale = step.copy()
        while not done():
            scale = np.maximum(scale * 0.5, 1e-6)
            z0 = obj.best_t @ pinv + rng.normal(size=len(step)) * scale
            run(z0, scale)
    except _OutOfBudget:
        pass
    res = result()
    if not done():
        raise BudgetExhausted(
            f"spread {res.spread:.6g} after {res.evaluations} evaluations", res
        )
    return res
