import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import apply_generator, brute_multiplicity, corner_diameter, generator_names
from wellround import bundled
from wellround.covering import (
    Cover,
    Element,
    GridDomain,
    affine_residual,
    certify_multiplicity,
    cfk_generators,
    cover_lebesgue,
    cover_mesh,
    cover_order,
    fold_to_cfk,
    kkm_check,
    nerve,
    separate_components,
    triangle_wave,
    unfold_cover,
)
from wellround.errors import (
    DeclarationFalse,
    HypothesisViolated,
    NotACover,
    UnboundedElement,
    WindowTooSmall,
)

INF = math.inf
seeds = st.integers(0, 2**31 - 1)


def interval(lo, hi, label=""):
    return Element([((lo,), (hi,))], label)


def random_box_cover(rng, d, k=5):
    """k random boxes plus one big box so the domain is always covered."""
    lo_amb = [0.0] * (d.s + d.s2) + [-b for b in d.t_bounds]
    hi_amb = [d.rho] * (d.s + d.s2) + list(d.t_bounds)
    elems = []
    for i in range(k):
        a = rng.uniform(np.array(lo_amb) - 0.2, np.array(hi_amb) + 0.2)
        b = rng.uniform(np.array(lo_amb) - 0.2, np.array(hi_amb) + 0.2)
        elems.append(Element([(np.minimum(a, b), np.maximum(a, b))], f"r{i}"))
    elems.append(Element([(np.array(lo_amb) - 1, np.array(hi_amb) + 1)], "all"))
    return Cover(elems)


# -- domain --------------------------------------------------------------------

def test_domain_validation():
    with pytest.raises(ValueError):
        GridDomain(0, 0)
    with pytest.raises(ValueError):
        GridDomain(1, 0, resolution=3)


def test_domain_mask_is_cfk_simplex():
    d = GridDomain(2, 0, resolution=8)
    pts = d.coords()[d.mask()]
    assert np.all(pts[:, 0] <= pts[:, 1]) and np.all(pts >= 0) and np.all(pts <= 1)
    assert len(pts) == 9 * 10 // 2


def test_face_masks():
    d = GridDomain(2, 0, resolution=8)
    pts = d.coords()
    assert np.all(pts[d.face_mask(1)][:, 0] == 0)
    f2 = pts[d.face_mask(2)]
    assert np.all(f2[:, 0] == f2[:, 1])
    assert np.all(pts[d.face_mask(3)][:, 1] == 1)
    assert d.vertices().tolist() == [[0, 0], [0, 1], [1, 1]]


# -- order -----------------------------------------------------------------------

def test_order_examples():
    d = GridDomain(1, 0)
    c = Cover([interval(-1, 0.4), interval(0.3, 0.7), interval(0.6, 2)])
    assert cover_order(c, d)[0] == 2
    assert cover_order(Cover([interval(-1, 2)]), d) == (1, (0.0,))


def test_not_a_cover_witness():
    d = GridDomain(1, 0)
    with pytest.raises(NotACover) as info:
        cover_order(Cover([interval(-1, 0.4), interval(0.6, 2)]), d)
    assert 0.4 <= info.value.witness[0] <= 0.6


@given(seeds)
def test_order_matches_brute_force_at_double_resolution(seed):
    rng = np.random.default_rng(seed)
    s, t = [(1, 0), (2, 0), (1, 1), (0, 2)][int(rng.integers(0, 4))]
    d = GridDomain(s, t, t_bounds=1.0, resolution=8)
    c = random_box_cover(rng, d)
    fine = GridDomain(s, t, t_bounds=1.0, resolution=16)
    pts = fine.coords()[fine.mask()]
    # the coarse grid is the even-index subgrid of the fine one
    on_coarse = np.all(np.isclose((pts * 8) % 1, 0), axis=1)
    ref = brute_multiplicity(c, pts[on_coarse]).max()
    order, witness = cover_order(c, d)
    assert order == ref
    assert brute_multiplicity(c, np.array([witness]))[0] == order


# -- mesh --------------------------------------------------------------------

def test_mesh_examples():
    assert cover_mesh(Cover([Element([((0, 0, 0), (1, 1, 1))])])) == pytest.approx(math.sqrt(3))
    two = Element([((0, 0), (1, 1)), ((3, 0), (4, 1))])
    assert cover_mesh(Cover([two])) == pytest.approx(math.hypot(4, 1))
    with pytest.raises(UnboundedElement):
        cover_mesh(Cover([interval(0, INF)]))


@given(seeds)
def test_mesh_matches_corner_brute_force(seed):
    rng = np.random.default_rng(seed)
    elems = []
    for _ in range(3):
        boxes = []
        for _ in range(int(rng.integers(1, 4))):
            a, b = rng.normal(size=2), rng.normal(size=2)
            boxes.append((np.minimum(a, b), np.maximum(a, b)))
        elems.append(Element(boxes))
    c = Cover(elems)
    ref = max(corner_diameter(e.boxes) for e in c.elements)
    assert cover_mesh(c) == pytest.approx(ref, rel=1e-12)


# -- Lebesgue number ---------------------------------------------------------------

def test_lebesgue_examples():
    c, d = bundled.segment_pair()
    assert abs(cover_lebesgue(c, d) - 0.1) <= 1 / 32
    d = GridDomain(1, 0)
    assert abs(cover_lebesgue(Cover([interval(-INF, INF)]), d) - 0.5) <= d.step


def test_lebesgue_monotone_in_overlap():
    d = GridDomain(1, 0, resolution=64)
    values = [cover_lebesgue(Cover([interval(-1, 0.5 + w), interval(0.5 - w, 2)]), d)
              for w in (0.3, 0.2, 0.1, 0.05)]
    assert all(a >= b for a, b in zip(values, values[1:]))
    assert values[0] > values[-1]


# -- nerve -------------------------------------------------------------------

def test_nerve_examples():
    d = GridDomain(1, 0)
    assert nerve(Cover([interval(-1, 0.6), interval(0.4, 2)]), d) == [(0,), (1,), (0, 1)]
    d = GridDomain(0, 1, t_bounds=1.0)
    c = Cover([interval(-2, 0.01), interval(-0.01, 2), interval(5, 6)])
    assert nerve(c, d) == [(0,), (1,), (0, 1)]
    apart = Cover([interval(-2, 0.01), interval(0.02, 2)])
    assert max(len(f) for f in nerve(apart, d)) == 1


@given(seeds)
def test_nerve_order_matches_cover_order(seed):
    rng = np.random.default_rng(seed)
    d = GridDomain(1, 1, t_bounds=1.0, resolution=8)
    c = random_box_cover(rng, d)
    faces = nerve(c, d)
    assert max(len(f) for f in faces) == cover_order(c, d)[0]
    fs = set(faces)
    for f in faces:
        for i in range(len(f)):
            sub = f[:i] + f[i + 1:]
            assert not sub or sub in fs


# -- separation ------------------------------------------------------------------

def test_separation_two_intervals():
    d = GridDomain(0, 1, t_bounds=2.0)
    G = [interval(-3, 0.5), interval(-0.5, 3)]
    Z = interval(-0.6, 0.6)
    E = separate_components(G, Z, d)
    assert not np.any(E[0] & E[1])
    z = Z.contains(d.coords())
    for e, g in zip(E, G):
        gm = g.contains(d.coords()) & d.mask()
        assert np.all(e <= gm) and np.all((gm & ~z) <= e)


def test_separation_degenerate_and_violation():
    d = GridDomain(0, 1, t_bounds=1.0)
    E = separate_components([interval(-1, 0.5)], interval(-5, 5), d)
    assert not E[0].any()
    with pytest.raises(HypothesisViolated):
        separate_components([interval(-1, 0.5), interval(0, 1)], interval(5, 6), d)


@given(seeds)
def test_separation_random(seed):
    rng = np.random.default_rng(seed)
    d = GridDomain(1, 1, t_bounds=1.0, resolution=8)
    zc = rng.uniform(-0.5, 0.5, size=2)
    Z = Element([(zc - 0.4, zc + 0.4)])
    G = [Element([(np.array([-1, -2]), np.array([zc[0] + 0.3, 2]))]),
         Element([(np.array([zc[0] - 0.3, -2]), np.array([2, 2]))])]
    z = Z.contains(d.coords())
    gms = [g.contains(d.coords()) & d.mask() for g in G]
    if np.any(gms[0] & gms[1] & ~z):
        with pytest.raises(HypothesisViolated):
            separate_components(G, Z, d)
        return
    E = separate_components(G, Z, d)
    assert not np.any(E[0] & E[1])
    for e, gm in zip(E, gms):
        assert np.all(e <= gm) and np.all((gm & ~z) <= e)


# -- folding -------------------------------------------------------------------

def test_fold_examples():
    assert fold_to_cfk([1.3]) == pytest.approx([0.7])
    assert fold_to_cfk([0.9, 0.2]).tolist() == [0.2, 0.9]
    assert triangle_wave(-0.25) == pytest.approx(0.25)


@given(seeds)
def test_fold_generator_invariance_and_idempotence(seed):
    rng = np.random.default_rng(seed)
    s = int(rng.integers(1, 5))
    pts = rng.uniform(-5, 5, size=(50, s))
    base = fold_to_cfk(pts)
    assert np.all(np.diff(base, axis=1) >= 0) and np.all(base >= 0) and np.all(base <= 1)
    assert np.array_equal(fold_to_cfk(base), base)
    for name, lib in zip(generator_names(s), cfk_generators(s)):
        ref = np.array([apply_generator(name, p) for p in pts])
        assert np.allclose(lib(pts), ref, atol=0)
        assert np.max(np.abs(fold_to_cfk(ref) - base)) <= 1e-12


# -- unfolding -------------------------------------------------------------------

def test_unfold_window_checks():
    c, d = bundled.segment_pair()
    with pytest.raises(WindowTooSmall):
        unfold_cover(c, d, 0.5)


def test_unfold_constant_cover_is_periodic():
    d = GridDomain(1, 1, t_bounds=1.0, resolution=8)
    c = Cover([Element([((-INF, -INF), (INF, 0.3))]), Element([((-INF, -0.3), (INF, INF))])])
    u = unfold_cover(c, d, 3.0)
    m = u.masks
    # constant in the simplex direction, hence constant (a fortiori 2-periodic) along x
    assert np.all(m == m[:, :1, :])


def test_unfold_period_and_tile_consistency():
    c, d = bundled.segment_pair(resolution=8)
    u = unfold_cover(c, d, 3.0)
    k = d.resolution
    mid = 3 * k
    m = u.masks
    # 2-periodic
    assert np.array_equal(m[:, mid - 2 * k: mid], m[:, mid: mid + 2 * k])
    # reflection across the tile wall x = 1 and x = 0
    for wall in (mid, mid + k):
        for j in range(1, k):
            assert np.array_equal(m[:, wall - j], m[:, wall + j])


@given(seeds)
def test_unfold_preserves_multiplicity_at_mapped_points(seed):
    rng = np.random.default_rng(seed)
    s, t = [(1, 0), (2, 0), (1, 1)][int(rng.integers(0, 3))]
    d = GridDomain(s, t, t_bounds=1.0, resolution=8)
    c = random_box_cover(rng, d)
    u = unfold_cover(c, d, 2.0)
    pts = u.domain.coords().reshape(-1, s + t)
    mapped = np.concatenate([fold_to_cfk(pts[:, :s]), pts[:, s:]], axis=1)
    assert np.array_equal(u.multiplicity().ravel(), brute_multiplicity(c, mapped))
    assert cover_order(u)[0] == cover_order(c, d)[0]


# -- certification ---------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(bundled.CERTIFY_SUITE))
def test_bundled_never_violated(name):
    c, d = bundled.CERTIFY_SUITE[name]()
    rep = certify_multiplicity(c, d, check_hypotheses=True)
    assert rep.hyp_i_ok and rep.hyp_ii_ok
    assert not rep.violated
    assert rep.order >= d.s + d.t + 1
    assert rep.caveat.startswith("grid-certified")


def test_certify_reports_failed_hypothesis():
    c, d = bundled.whole_segment()
    rep = certify_multiplicity(c, d)
    assert rep.order == 1 and not rep.hyp_i_ok and not rep.violated


def test_certify_unbounded_component_fails_hyp_ii():
    d = GridDomain(0, 1, t_bounds=4.0)
    c = Cover([Element([((-INF,), (INF,))])])
    rep = certify_multiplicity(c, d)
    assert rep.order == 1 and not rep.hyp_ii_ok and not rep.violated


def test_certify_without_hypotheses():
    c, d = bundled.tube_cover()
    rep = certify_multiplicity(c, d, check_hypotheses=False)
    assert rep.order == 3 and not rep.checked and not rep.violated


def test_affine_residual():
    line = np.stack([np.linspace(0, 1, 20), 2 * np.linspace(0, 1, 20)], axis=1)
    assert affine_residual(line, 1) == pytest.approx(0, abs=1e-12)
    assert affine_residual(line, 0) == pytest.approx(math.sqrt(5) / 2)


# -- KKM -----------------------------------------------------------------------

def test_kkm_examples():
    c, d = bundled.segment_pair()
    assert kkm_check(c, d, bundled.SEGMENT_PAIR_FACE_MISSES).order == 2
    c, d = bundled.kkm_triangle()
    rep = kkm_check(c, d, bundled.KKM_TRIANGLE_FACE_MISSES)
    assert rep.order == 3 and rep.ok
    c, d = bundled.square_quadrants()
    rep = kkm_check(c, d, bundled.SQUARE_QUADRANTS_FACE_MISSES)
    assert rep.order >= 3 and rep.ok


def test_kkm_false_declaration():
    c, d = bundled.segment_pair()
    with pytest.raises(DeclarationFalse):
        kkm_check(c, d, [(1, None), (1, None)])
