"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines. The
randomized corpus (51 brake-symmetric systems, n in {1,2,3}, positive
definite b22 blocks) is shared across criteria through session-scoped
caches, so later criteria reuse index values computed by earlier ones.
"""

import time

import numpy as np
import pytest

from maslov_lab import ellipsoid as el, indices, iteration, paths
from maslov_lab.galerkin import assemble_L_form

BUDGETS = {
    "three_oracle": 300.0,
    "bott": 900.0,
    "ellipsoid": 300.0,
    "jump": 600.0,
}


def report(name, ok, detail=""):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}" + (f" -- {detail}" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_criterion_01_three_oracle_agreement(acceptance_corpus):
    started = time.time()
    checked = skipped_winding = 0
    for B, cache in acceptance_corpus:
        gal = cache.L_pair("L0")
        cross = indices.index_L_crossings(B, "L0").pair()
        assert gal == cross, f"galerkin {gal} != crossing {cross}"
        if gal[1] == 0:
            wind = indices.index_L_winding(cache.gamma1()).index
            assert wind == gal[0], f"winding {wind} != galerkin {gal[0]}"
        else:
            skipped_winding += 1
        checked += 1
    elapsed = time.time() - started
    report(
        "criterion 1: three-oracle agreement",
        checked == len(acceptance_corpus) and elapsed < BUDGETS["three_oracle"],
        f"{checked} systems, {skipped_winding} degenerate endpoints skip winding, "
        f"{elapsed:.1f}s",
    )


def test_criterion_02_bott_exactness(acceptance_corpus):
    started = time.time()
    rows = 0
    for B, cache in acceptance_corpus:
        led = iteration.iteration_ledger(B, range(1, 7), cache=cache)
        assert led.all_exact(), f"Bott mismatch: {led.rows}"
        rows += len(led.rows)
    elapsed = time.time() - started
    report(
        "criterion 2: Bott exactness k=1..6 (both frames)",
        elapsed < BUDGETS["bott"],
        f"{rows} ledger rows exact, {elapsed:.1f}s",
    )


def test_criterion_03_periodic_identities(acceptance_corpus):
    bad = []
    for i, (B, cache) in enumerate(acceptance_corpus):
        for row in iteration.check_periodic_identities(B, cache=cache):
            if not row["holds"]:
                bad.append((i, row))
    report(
        "criterion 3: four periodic identities exact",
        not bad,
        f"{4 * len(acceptance_corpus)} identity rows" + (f", failures: {bad}" if bad else ""),
    )


def test_criterion_04_precise_iteration_formula(acceptance_corpus):
    flagged = total = 0
    for B, cache in acceptance_corpus:
        for k in range(1, 7):
            v = iteration.precise_iteration_L0(B, k, cache=cache)
            direct = cache.L_pair("L0", fold=k)[0]
            total += 1
            if not v.resolved:
                flagged += 1
                assert direct in v.branches, f"flagged row misses direct value at k={k}"
            else:
                assert v.value == direct, f"formula {v.value} != direct {direct} at k={k}"
    frac = flagged / total
    report(
        "criterion 4: precise iteration formula k=1..6",
        frac < 0.05,
        f"{total} rows, {flagged} flagged near-resonant ({100 * frac:.2f}% < 5%)",
    )


def test_criterion_05_structural_self_test(acceptance_corpus):
    checked = 0
    for B, _cache in acceptance_corpus:
        for theta in (0.0, 0.9, np.pi / 2):
            m = 9 + checked % 4
            _, _, a_eigs = assemble_L_form(B, m, theta)
            nonzero = np.abs(a_eigs)[np.abs(a_eigs) > 1e-12]
            d = 0.25 * float(np.min(nonzero))
            assert int(np.sum(a_eigs <= -d)) == m * B.n
            checked += 1
    report(
        "criterion 5: pure-A truncation count m*n",
        True,
        f"{checked} assemblies (also asserted inside every stabilization sweep)",
    )


def test_criterion_06_bounds_suite(acceptance_corpus):
    violations = []
    applied_mono = 0
    for i, (B, cache) in enumerate(acceptance_corpus):
        rows = iteration.check_inequalities(
            B, k_range=range(1, 7), theta_points=180, cache=cache
        )
        for row in rows:
            if row["status"] == "fail":
                violations.append((i, row["name"]))
            if row["status"] == "pass" and "gamma^{m+1}" in row["name"]:
                applied_mono += 1
    report(
        "criterion 6: bounds suite (Thm 2.3, sandwich at 180 thetas, locality, monotonicity)",
        not violations and applied_mono > 0,
        f"{len(acceptance_corpus)} systems, monotonicity applied on {applied_mono} "
        f"positive-definite systems" + (f", violations: {violations}" if violations else ""),
    )


def test_criterion_07_ellipsoid_reproduction():
    started = time.time()
    for radii in ([1.0, 2.0 ** 0.25], [1.0, 2.0 ** 0.25, 3.0 ** (1.0 / 3.0)]):
        model = el.EllipsoidModel.build(radii)
        n = model.n
        orbits = el.enumerate_brake_orbits(model)
        assert len(orbits) == n, "orbit count"
        bound = el.verify_multiplicity_bound(model, m_max=20)
        assert bound["nondegenerate"], bound
        assert bound["count_ge_half_bound"] and bound["orbit_count"] >= n // 2 + 1
        assert bound["count_ge_nondegenerate_bound"] and bound["orbit_count"] == n
        table = el.orbit_index_table(model, m_max=20)
        for r in table:
            assert (r["i_L0"], r["nu_L0"]) == (r["cf_i_L0"], r["cf_nu_L0"]), r
            assert (r["i_per"], r["nu_per"]) == (r["cf_i_per"], r["cf_nu_per"]), r
            assert r["nu_L0"] == 1
    elapsed = time.time() - started
    report(
        "criterion 7: ellipsoid tables and multiplicity bounds (m <= 20)",
        elapsed < BUDGETS["ellipsoid"],
        f"n=2 and n=3 models, engine == closed form on all rows, {elapsed:.1f}s",
    )


def test_criterion_08_jump_certificates():
    started = time.time()
    B = paths.CoefficientPath.constant((np.pi / 2) * np.eye(2))
    certs = iteration.find_common_index_jump([B], R_max=20, verify="all")
    assert [(c.R, c.m) for c in certs] == [(m, (m,)) for m in range(1, 21)]
    assert all(c.verified for c in certs)
    B2 = paths.CoefficientPath.constant((np.pi / 3) * np.eye(2))
    pair = iteration.find_common_index_jump([B, B2], R_max=100, verify="first")
    assert pair and pair[0].R <= 100 and pair[0].verified
    elapsed = time.time() - started
    report(
        "criterion 8: common index jump certificates",
        elapsed < BUDGETS["jump"],
        f"20 single-system certificates verified, pair certificate R={pair[0].R}, "
        f"{elapsed:.1f}s",
    )


def test_criterion_09_normal_form_roundtrip():
    rng = np.random.default_rng(424242)
    worst = 0.0
    for trial in range(100):
        n = 2 if trial % 2 == 0 else 3
        case = "parallel" if trial % 3 == 0 else "independent"
        M, xi, eta, M_tilde = iteration.reverse_normal_form_instance(n, rng, case=case)
        res = iteration.symmetric_normal_form(M, xi, eta)
        assert res.nu_constant, f"trial {trial}: nu not constant"
        assert res.residual <= 1e-9, f"trial {trial}: residual {res.residual:.2e}"
        assert np.trace(res.M_tilde) == pytest.approx(np.trace(M_tilde), abs=1e-7)
        worst = max(worst, res.residual)
    report(
        "criterion 9: normal-form round-trip (100 instances, n in {2,3})",
        True,
        f"max residual {worst:.2e} <= 1e-9, nu1/nu2 constant along every path",
    )


def test_criterion_10_mean_index_convergence(acceptance_corpus):
    k = 64
    worst = 0.0
    for B, cache in acceptance_corpus:
        res = indices.mean_index_L0(B, k_max=k, profile=cache.profile())
        assert res["gap"] <= 2.0 / k, f"gap {res['gap']:.4f} > {2.0 / k}"
        worst = max(worst, res["gap"])
    for radii in ([1.0, 2.0 ** 0.25], [1.0, 2.0 ** 0.25, 3.0 ** (1.0 / 3.0)]):
        for orbit in el.enumerate_brake_orbits(el.EllipsoidModel.build(radii)):
            res = indices.mean_index_L0(orbit.coefficient, k_max=k)
            assert res["gap"] <= 2.0 / k
            assert res["closed_form"] == pytest.approx(
                el.closed_form_mean_index(el.EllipsoidModel.build(radii), orbit.j), abs=1e-9
            )
            worst = max(worst, res["gap"])
    report(
        "criterion 10: mean-index convergence at k=64",
        True,
        f"max |i_L0(gamma^k)/k - closed form| = {worst:.5f} <= {2.0 / k:.5f}",
    )
