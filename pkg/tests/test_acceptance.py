"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import random_lattice
from oracles import apply_generator, box_enumeration, gram_det, generator_names
from wellround import bundled
from wellround.cli import main
from wellround.covering import certify_multiplicity, cover_lebesgue, fold_to_cfk
from wellround.exterior import (
    Flag,
    chi,
    exact_det,
    flag_codim_check,
    nested_multiindices,
    wedge_of_group,
)
from wellround.lattice import (
    DiagonalElement,
    cover_membership,
    dim_delta,
    integer_lattice,
    is_generic_well_rounded,
    short_vectors,
    wr_transversality_rank,
)
from wellround.orbits import (
    block_sum,
    compact_orbit_from_quadratic,
    search_well_rounded,
    unit_block,
)


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {k}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return emit


def test_1_compact_orbits(report):
    rows, ok = [], True
    for D in (2, 3, 7):
        x, s = compact_orbit_from_quadratic(D)
        t0 = time.perf_counter()
        r = search_well_rounded(x, s, budget=5000, seed=0, tol=1e-6)
        dt = time.perf_counter() - t0
        good = r.spread - 1 <= 1e-6 and r.evaluations <= 5000 and dt < 5
        ok &= good
        rows.append(f"D={D}: spread-1={r.spread - 1:.2e} evals={r.evaluations} {dt:.2f}s")
    report(1, ok, "; ".join(rows))


def test_2_non_compact_orbits(report):
    cases = {
        "Z+disc2": [unit_block(), compact_orbit_from_quadratic(2)],
        "disc2+disc3": [compact_orbit_from_quadratic(2), compact_orbit_from_quadratic(3)],
    }
    rows, ok = [], True
    for name, parts in cases.items():
        x, s = block_sum(parts)
        t0 = time.perf_counter()
        r = search_well_rounded(x, s, budget=100_000, seed=0, tol=1e-4)
        dt = time.perf_counter() - t0
        good = r.spread - 1 <= 1e-4 and r.evaluations <= 100_000 and dt < 60
        ok &= good
        rows.append(f"{name}: spread-1={r.spread - 1:.2e} evals={r.evaluations} {dt:.1f}s")
    report(2, ok, "; ".join(rows))


def test_3_cover_property(report):
    rng = np.random.default_rng(3)
    misses = nonmono = 0
    deltas = np.linspace(0, 1.5, 31)
    for _ in range(100):
        n = int(rng.integers(2, 9))
        x = random_lattice(rng, n)
        a = DiagonalElement.from_coords(rng.normal(size=n) * 0.7)
        if cover_membership(x, a, 0.04) is None:
            misses += 1
        dims = [dim_delta(x, d) for d in deltas]
        nonmono += any(p > q for p, q in zip(dims, dims[1:]))
    report(3, misses == 0 and nonmono == 0,
           f"100 cases n=2..8, eps=0.04: {misses} without j, {nonmono} non-monotone dim_delta")


def test_4_flags(report):
    rng = np.random.default_rng(4)
    failures = 0
    for _ in range(200):
        n = int(rng.integers(2, 7))
        while True:
            basis = rng.integers(-4, 5, size=(n, n)).tolist()
            if exact_det(basis) != 0:
                break
        rows = [[Fraction(int(v), int(rng.integers(1, 5))) for v in r] for r in basis]
        k = int(rng.integers(1, n))
        dims = sorted(rng.choice(np.arange(1, n), size=k, replace=False).tolist())
        flag = Flag(n, [rows[:d] for d in dims])
        try:
            chain = nested_multiindices(flag)
        except Exception:
            failures += 1
            continue
        strict = all(set(p) < set(q) for p, q in zip(chain, chain[1:]))
        member = all(J in flag.subspace_support(i) for i, J in enumerate(chain[:-1]))
        codim, ok = flag_codim_check(flag)
        failures += not (strict and member and ok and codim >= k)
    report(4, failures == 0, f"200 random rational flags n<=6: {failures} failures")


def test_5_exterior_identities(report):
    rng = np.random.default_rng(5)
    gram_err = chi_err = 0.0
    for _ in range(500):
        n = int(rng.integers(2, 7))
        d = int(rng.integers(1, n + 1))
        v = rng.normal(size=(d, n))
        gram_err = max(gram_err, abs(wedge_of_group(v).norm() ** 2 - gram_det(v)))
        a = DiagonalElement.from_coords(rng.normal(size=n))
        b = DiagonalElement.from_coords(rng.normal(size=n))
        J = tuple(sorted(rng.choice(np.arange(1, n + 1), size=int(rng.integers(1, n + 1)), replace=False).tolist()))
        ab = chi(J, a + b)
        chi_err = max(chi_err, abs(ab - chi(J, a) * chi(J, b)) / max(1.0, ab))
    report(5, gram_err <= 1e-9 and chi_err <= 1e-12,
           f"500 inputs: max |norm^2 - Gram det| = {gram_err:.1e}, max chi error = {chi_err:.1e}")


def test_6_integer_lattice_generic(report):
    ranks = {}
    for n in range(2, 7):
        z = integer_lattice(n)
        ranks[n] = wr_transversality_rank(z) if is_generic_well_rounded(z) else None
    ok = all(ranks[n] == n - 1 for n in ranks)
    report(6, ok, f"transversality ranks {ranks}")


def test_7_covering_certificates(report):
    expected = {"kkm-triangle": 3, "tube": 3, "intervals": 2}
    rows, ok = [], True
    for name, order in expected.items():
        c, d = bundled.CERTIFY_SUITE[name](resolution=32)
        rep = certify_multiplicity(c, d, check_hypotheses=True)
        good = rep.order == order and not rep.violated and rep.hyp_i_ok and rep.hyp_ii_ok
        ok &= good
        rows.append(f"{name}: order {rep.order} violated={rep.violated}")
    c, d = bundled.segment_pair(resolution=32)
    leb = cover_lebesgue(c, d)
    ok &= abs(leb - 0.1) <= 1 / 32
    rows.append(f"Lebesgue number {leb:.4f}")
    report(7, ok, "; ".join(rows))


def test_8_fold_invariance(report):
    rng = np.random.default_rng(8)
    worst, idem = 0.0, True
    for s in range(1, 6):
        pts = rng.uniform(-6, 6, size=(1000, s))
        base = fold_to_cfk(pts)
        idem &= np.array_equal(fold_to_cfk(base), base)
        for name in generator_names(s):
            moved = np.array([apply_generator(name, p) for p in pts])
            worst = max(worst, float(np.max(np.abs(fold_to_cfk(moved) - base))))
    report(8, worst <= 1e-12 and idem, f"1000 points x s=1..5: max generator deviation {worst:.1e}, idempotent={idem}")


def test_9_brute_force_oracle(report):
    rng = np.random.default_rng(9)
    mismatches = 0
    for _ in range(50):
        n = int(rng.integers(2, 4))
        x = random_lattice(rng, n)
        delta = float(rng.uniform(0.1, 1.0))
        rep = short_vectors(x, delta)
        ref = box_enumeration(x.basis, (1 + delta) * rep.alpha)
        got = sorted(map(tuple, rep.coords.tolist()))
        mismatches += got != sorted(c for _, c in ref)
    report(9, mismatches == 0, f"50 random lattices n<=3: {mismatches} mismatches")


def test_10_determinism(report, tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps(bundled.ORBIT_SPECS["unit-disc-2"]))
    lat = tmp_path / "lat.json"
    lat.write_text(json.dumps({"dim": 3, "basis": [[1, 0.3, 0], [0.2, 1, 0.1], [0, 0.4, 1]]}))
    cover = tmp_path / "cover.json"
    main(["cover", "example", "tube", "-o", str(cover)])
    commands = [
        ["orbit", "search", str(spec), "--seed", "5"],
        ["svp", str(lat), "--delta-max", "1.0"],
        ["cover", "certify", str(cover)],
    ]
    same = True
    for cmd in commands:
        outs = []
        for i in range(2):
            d = tmp_path / f"{cmd[0]}{i}"
            main(cmd + ["--output-dir", str(d)])
            outs.append(sorted((p.name, p.read_bytes()) for p in d.iterdir()))
        same &= outs[0] == outs[1]
    capsys.readouterr()
    report(10, same, "orbit search, svp and cover certify reports byte-identical across runs")
