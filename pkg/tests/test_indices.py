import numpy as np
import pytest

from maslov_lab import core, indices, paths


def rotation_system(b, n=1):
    return paths.CoefficientPath.constant(b * np.eye(2 * n))


# ---------------------------------------------------------------------------
# nullities
# ---------------------------------------------------------------------------


def test_nullity_examples():
    g = paths.unit_path(rotation_system(np.pi / 2))
    assert indices.nullity_L(g, "L0") == 0
    g = paths.unit_path(rotation_system(np.pi))
    assert indices.nullity_L(g, "L0") == 1
    const = paths.unit_path(rotation_system(0.0, n=2))
    assert indices.nullity_L(const, "L0") == 2


def test_twisted_nullity_geometric():
    end = core.planar_rotation(np.pi / 3)
    assert indices.twisted_nullity_geometric(end, np.pi / 3) == 1
    assert indices.twisted_nullity_geometric(end, np.pi / 4) == 0


# ---------------------------------------------------------------------------
# galerkin route
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "b,expected",
    [
        (0.0, (-1, 1)),
        (np.pi / 2, (0, 0)),
        (3 * np.pi / 2, (1, 0)),
    ],
)
def test_index_L_galerkin_rotations(b, expected):
    rep = indices.index_L_galerkin(rotation_system(b))
    assert rep.pair() == expected
    assert rep.stabilized and rep.algorithm == "galerkin"


def test_index_L_galerkin_zero_field_n3():
    rep = indices.index_L_galerkin(rotation_system(0.0, n=3))
    assert rep.pair() == (-3, 3)


def test_index_report_serializes():
    rep = indices.index_L_galerkin(rotation_system(2.0))
    d = rep.to_dict()
    assert d["lagrangian"] == "L0" and d["index"] == 0


# ---------------------------------------------------------------------------
# winding route
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("b,expected", [(np.pi / 2, 0), (3 * np.pi / 2, 1), (2.0, 0), (7.0, 2)])
def test_index_L_winding_rotations(b, expected):
    rep = indices.index_L_winding(paths.unit_path(rotation_system(b)))
    assert rep.index == expected


def test_winding_orthogonal_endpoint_frames_agree():
    # endpoint in O(2n) & Sp(2n): the two frame indices coincide
    for b in (2.0, 4.0, 5.5):
        g = paths.unit_path(rotation_system(b))
        assert indices.index_L_winding(g, "L0").index == indices.index_L_winding(g, "L1").index


def test_winding_rejects_degenerate_endpoint():
    g = paths.unit_path(rotation_system(np.pi))
    with pytest.raises(ValueError, match="degenerate"):
        indices.index_L_winding(g)


def test_winding_on_generic_nonorthogonal_endpoint():
    n = 1
    unit = paths.TrigSeries.build(
        n,
        cos_terms=[(0, np.array([[0.9, 0.0], [0.0, 2.4]])), (1, np.diag([0.4, -0.2]))],
        sin_terms=[(1, np.array([[0.0, 0.35], [0.35, 0.0]]))],
    )
    B = paths.CoefficientPath.from_unit(unit)
    g = paths.unit_path(B)
    w = indices.index_L_winding(g)
    gal = indices.index_L_galerkin(B)
    assert w.index == gal.index


def test_connecting_path_stays_in_stratum():
    rng = np.random.default_rng(8)
    for n in (1, 2, 3):
        import scipy.linalg

        H = 0.5 * (lambda X: X + X.T)(rng.normal(size=(2 * n, 2 * n)))
        M = scipy.linalg.expm(core.standard_J(n) @ H)
        if abs(np.linalg.det(core.v_block(M))) < 1e-6:
            continue
        beta = indices.connecting_path_to_stratum_base(M)
        dets = np.linalg.det(beta[:, :n, n:])
        assert np.all(np.abs(dets) > 1e-12)
        assert np.sign(dets[0]) == np.sign(dets[-1])
        target = core.M_plus(n) if dets[0] > 0 else core.M_minus(n)
        assert np.max(np.abs(beta[-1] - target)) < 1e-9
        assert np.max(np.abs(beta[0] - M)) < 1e-12
        for idx in (0, len(beta) // 2, -1):
            assert core.check_symplectic(beta[idx], tol=1e-8)[0]


# ---------------------------------------------------------------------------
# crossing route
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("b,expected", [(2.0, 0), (4.0, 1), (7.0, 2)])
def test_index_L_crossings_rotations(b, expected):
    rep = indices.index_L_crossings(rotation_system(b))
    assert rep.index == expected


def test_crossings_multiplicity_two():
    # n = 2 scalar rotation crosses with a two-dimensional kernel
    rep = indices.index_L_crossings(rotation_system(4.0, n=2))
    assert rep.index == 2


def test_crossings_endpoint_exclusion():
    # zero exactly at the far endpoint is not an interior crossing
    rep = indices.index_L_crossings(rotation_system(np.pi))
    assert rep.pair() == (0, 1)


def test_crossings_precondition():
    B = paths.CoefficientPath.constant(np.diag([1.0, -2.0]))
    with pytest.raises(ValueError, match="positive definite"):
        indices.index_L_crossings(B, "L0")
    with pytest.raises(ValueError, match="positive definite"):
        indices.index_L_crossings(paths.CoefficientPath.constant(np.diag([-1.0, 2.0])), "L1")


def test_crossings_folds():
    B = rotation_system(2 * np.pi / 5)
    # zeros of sin(2 pi s/5): s = 2.5 is the only one below 5, and s = 5 is excluded
    assert indices.index_L_crossings(B, fold=2).index == 0
    assert indices.index_L_crossings(B, fold=3).index == 1
    assert indices.index_L_crossings(B, fold=5).pair() == (1, 1)


# ---------------------------------------------------------------------------
# twisted L0 index
# ---------------------------------------------------------------------------


def test_omega_index_L0_examples():
    assert indices.omega_index_L0(rotation_system(np.pi / 4), np.pi / 2).pair() == (0, 0)
    assert indices.omega_index_L0(rotation_system(3 * np.pi / 4), np.pi / 2).pair() == (1, 0)
    rep = indices.omega_index_L0(rotation_system(np.pi / 3), np.pi / 3)
    assert rep.nullity == 1


def test_omega_index_L0_rejects_boundary_theta():
    B = rotation_system(1.0)
    for theta in (0.0, np.pi, -0.1):
        with pytest.raises(ValueError):
            indices.omega_index_L0(B, theta)


def test_omega_index_L0_closed_form_sweep():
    # for B = b I2 the index counts j with 0 < theta + j pi < b
    b = 5.0
    B = rotation_system(b)
    for theta in (0.4, 1.2, 2.9):
        expected = sum(1 for j in range(-8, 9) if 0 < theta + j * np.pi < b)
        assert indices.omega_index_L0(B, theta).index == expected


# ---------------------------------------------------------------------------
# periodic omega index
# ---------------------------------------------------------------------------


def test_omega_index_periodic_examples():
    B = rotation_system(np.pi / 3)
    assert indices.omega_index_periodic(B, 0.0).pair() == (1, 0)
    assert indices.omega_index_periodic(B, np.pi).pair() == (0, 0)
    B2 = rotation_system(3 * np.pi / 4)
    assert indices.omega_index_periodic(B2, np.pi).pair() == (2, 0)


def test_omega_index_periodic_degenerate():
    B = rotation_system(np.pi)
    rep = indices.omega_index_periodic(B, 0.0)
    assert rep.pair() == (1, 2)  # gamma^2(2) = I


def test_periodic_nullity_matches_floquet():
    B = rotation_system(np.pi / 3)
    g = paths.unit_path(B)
    M = paths.iterate_endpoint(g, 2)
    phi = 2 * np.pi / 3
    rep = indices.omega_index_periodic(B, phi, gamma=g)
    assert rep.nullity == core.kernel_dimension(M - np.exp(1j * phi) * np.eye(2))
    assert rep.nullity == 1


# ---------------------------------------------------------------------------
# splitting numbers and profiles
# ---------------------------------------------------------------------------


def test_splitting_at_one_for_full_rotation():
    sp, sm = indices.splitting_numbers(rotation_system(np.pi), 0.0)
    assert sp == 1  # S+_{I2}(1) = 1
    assert sm == 1


def test_splitting_off_spectrum():
    assert indices.splitting_numbers(rotation_system(np.pi), 1.0) == (0, 0)


def test_splitting_simple_elliptic_pair():
    B = rotation_system(2 * np.pi / 5)
    sp, sm = indices.splitting_numbers(B, 4 * np.pi / 5)
    assert sp + sm == 1
    sp2, sm2 = indices.splitting_numbers(B, 6 * np.pi / 5)
    assert (sp2, sm2) == (sm, sp)  # reflection


def test_splitting_eps_validation():
    B = rotation_system(2 * np.pi / 5)
    with pytest.raises(ValueError, match="eps"):
        indices.splitting_numbers(B, 4 * np.pi / 5, eps=3.0)


def test_spectral_profile_values():
    # full rotation: spectrum {1}, no interior angles
    prof = indices.spectral_profile(rotation_system(np.pi))
    assert prof.arguments == (0.0,)
    assert prof.C == 0
    assert prof.s_plus_at_one() == 1
    # R(4 pi/5): C = 1
    prof2 = indices.spectral_profile(rotation_system(2 * np.pi / 5))
    assert prof2.C == 1
    assert prof2.i1 == 1


def test_profile_diamond_additivity():
    # decoupled planes: C adds blockwise
    B1 = rotation_system(2 * np.pi / 5)
    B2 = rotation_system(2 * np.pi / 7)
    C1 = indices.spectral_profile(B1).C
    C2 = indices.spectral_profile(B2).C
    Bd = paths.CoefficientPath.constant(np.diag([4 * np.pi / 5, 4 * np.pi / 7, 4 * np.pi / 5, 4 * np.pi / 7]) / 2)
    Cd = indices.spectral_profile(Bd).C
    assert Cd == C1 + C2


# ---------------------------------------------------------------------------
# mean index
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("b,expected", [(np.pi / 2, 0.5), (np.pi, 1.0), (0.0, 0.0)])
def test_mean_index_closed_form_values(b, expected):
    res = indices.mean_index_L0(rotation_system(b), k_max=64)
    assert res["closed_form"] == pytest.approx(expected, abs=1e-9)
    assert res["gap"] <= 2.0 / 64


def test_mean_index_requires_k():
    with pytest.raises(ValueError):
        indices.mean_index_L0(rotation_system(1.0), k_max=2)


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------


def test_scan_rotation_steps():
    # i^{L0}_theta of b I2 jumps exactly at theta = b
    b = 2.0
    rows = indices.scan_L_omega_indices(rotation_system(b), grid_points=40)
    assert all(r["stabilized"] for r in rows)
    for r in rows:
        expected = 1 if r["theta"] < b else 0
        if abs(r["theta"] - b) > 1e-6:
            assert r["index"] == expected
    degenerate = [r for r in rows if r["nullity"] > 0]
    assert len(degenerate) == 1 and degenerate[0]["theta"] == pytest.approx(b)


def test_relative_morse_index_public_handle():
    from maslov_lab.galerkin import assemble_L_form

    B = rotation_system(np.pi / 2)
    res = indices.relative_morse_index(
        lambda m: assemble_L_form(B, m, 0.0), B.norm_bound(), 1
    )
    assert res.index == 1  # i_L0 + n
