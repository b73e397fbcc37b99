import numpy as np
import pytest
import scipy.linalg

from maslov_lab import core, paths


def rotation_system(b, n=1, period=2.0):
    return paths.CoefficientPath.constant(b * np.eye(2 * n), period=period)


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------


def test_integrate_rotation_matches_expm():
    b = 1.3
    B = rotation_system(b)
    g = paths.unit_path(B)
    for idx in (len(g.grid) // 3, len(g.grid) - 1):
        t = g.grid[idx]
        exact = scipy.linalg.expm(t * core.standard_J(1) @ (b * np.eye(2)))
        assert np.max(np.abs(g.samples[idx] - exact)) < 1e-10


def test_integrate_zero_field():
    B = paths.CoefficientPath.constant(np.zeros((2, 2)))
    g = paths.unit_path(B)
    assert np.max(np.abs(g.samples - np.eye(2))) == 0.0


def test_integrate_block_diagonal_oracle():
    r1, r2 = 1.0, 2.0 ** 0.25
    B = paths.CoefficientPath.constant(
        np.diag([2 / r1**2, 2 / r2**2, 2 / r1**2, 2 / r2**2]), period=2.0
    )
    g = paths.unit_path(B)
    end = core.rotation_diamond([2 / r1**2, 2 / r2**2])
    assert np.max(np.abs(g.endpoint() - end)) < 1e-10


def test_integrate_time_varying_against_dense_reference():
    n = 1
    unit = paths.TrigSeries.build(
        n,
        cos_terms=[(0, np.diag([0.4, 1.1])), (2, np.diag([0.2, -0.3]))],
        sin_terms=[(1, np.array([[0.0, 0.5], [0.5, 0.0]]))],
    )
    B = paths.CoefficientPath.from_unit(unit)
    g = paths.unit_path(B)
    from scipy.integrate import solve_ivp

    def rhs(t, y):
        return (core.standard_J(n) @ B.unit_extension(t) @ y.reshape(2, 2)).ravel()

    sol = solve_ivp(rhs, (0, 1), np.eye(2).ravel(), rtol=1e-12, atol=1e-13, dense_output=True)
    assert np.max(np.abs(g.endpoint() - sol.y[:, -1].reshape(2, 2))) < 1e-8


def test_integrator_validates_arguments():
    B = rotation_system(1.0)
    with pytest.raises(ValueError):
        paths.integrate_fundamental(B, T=0.0)
    with pytest.raises(ValueError):
        paths.integrate_fundamental(B, T=1.0, steps=0)


def test_path_drift_certified():
    B = rotation_system(3.0)
    g = paths.unit_path(B)
    assert g.max_drift <= 1e-10
    assert np.array_equal(g.samples[0], np.eye(2))


# ---------------------------------------------------------------------------
# brake symmetry
# ---------------------------------------------------------------------------


def test_brake_symmetry_block_diagonal_constant():
    B = paths.CoefficientPath.constant(np.diag([1.0, 2.0, 3.0, 4.0]))
    ok, viol, _ = paths.validate_brake_symmetry(B)
    assert ok and viol < 1e-14


def test_brake_symmetry_offdiagonal_fails():
    M = np.array([[1.0, 0.3], [0.3, 2.0]])
    B = paths.CoefficientPath.constant(M)
    ok, viol, _ = paths.validate_brake_symmetry(B)
    assert not ok and viol == pytest.approx(0.6)
    assert not B.symmetry_certified


def test_brake_symmetry_scalar():
    B = rotation_system(0.7, n=2)
    assert paths.validate_brake_symmetry(B)[0]


def test_brake_symmetry_fourier_structure():
    n = 1
    good = paths.TrigSeries.build(
        n,
        cos_terms=[(0, np.diag([1.0, 2.0]))],
        sin_terms=[(1, np.array([[0, 0.4], [0.4, 0]]))],
    )
    assert good.is_structurally_brake()
    bad = paths.TrigSeries.build(n, sin_terms=[(1, np.diag([1.0, 0.0]))])
    assert not bad.is_structurally_brake()
    B = paths.CoefficientPath.from_unit(bad)
    assert not B.symmetry_certified


# ---------------------------------------------------------------------------
# iteration
# ---------------------------------------------------------------------------


def test_iterate_base_case():
    B = rotation_system(0.9)
    g = paths.unit_path(B)
    assert paths.iterate_path(g, B, 1) is g


def test_iterate_rotation_algebra():
    # N R(t) N = R(-t) makes the reflected segments continue the rotation
    b = 1.1
    B = rotation_system(b)
    g = paths.unit_path(B)
    for k in (2, 3, 4, 7):
        gk = paths.iterate_path(g, B, k)
        assert gk.T == k
        assert np.max(np.abs(gk.endpoint() - core.planar_rotation(k * b))) < 1e-9
        mid = gk.at_time(k / 2)
        assert np.max(np.abs(mid - core.planar_rotation(k * b / 2))) < 1e-9


def test_iterate_nesting():
    B = rotation_system(2.2)
    g = paths.unit_path(B)
    g5 = paths.iterate_path(g, B, 5)
    g4 = paths.iterate_path(g, B, 4)
    m = g.steps_per_unit
    assert np.array_equal(g5.samples[: 4 * m + 1], g4.samples)


def test_iterate_reflection_identity():
    # gamma(1+t) = N gamma(1-t) gamma(1)^{-1} N gamma(1) at sampled t
    n = 1
    unit = paths.TrigSeries.build(
        n,
        cos_terms=[(0, np.diag([0.5, 1.4])), (1, np.diag([0.2, 0.1]))],
        sin_terms=[(1, np.array([[0, 0.3], [0.3, 0]]))],
    )
    B = paths.CoefficientPath.from_unit(unit)
    g = paths.unit_path(B)
    g2 = paths.iterate_path(g, B, 2)
    N = core.standard_N(n)
    g1 = g.endpoint()
    m = g.steps_per_unit
    for frac in (0.25, 0.5, 0.75):
        i = int(frac * m)
        lhs = g2.samples[m + i]
        rhs = N @ g.samples[m - i] @ np.linalg.solve(g1, N @ g1)
        assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_iterate_refuses_uncertified():
    M = np.array([[1.0, 0.3], [0.3, 2.0]])
    B = paths.CoefficientPath.constant(M)
    g = paths.unit_path(B)
    with pytest.raises(ValueError, match="brake symmetry"):
        paths.iterate_path(g, B, 2)
    good = rotation_system(1.0)
    gg = paths.unit_path(good)
    with pytest.raises(ValueError):
        paths.iterate_path(gg, good, 0)


def test_iterate_drift_bounded():
    B = rotation_system(2.0, n=2)
    g = paths.unit_path(B)
    g6 = paths.iterate_path(g, B, 6)
    assert core.symplectic_drift(g6.endpoint()) <= 6 * 1e-10


def test_iterate_endpoint_shortcut():
    B = rotation_system(1.7)
    g = paths.unit_path(B)
    for k in (1, 2, 5, 8):
        full = paths.iterate_path(g, B, k).endpoint()
        assert np.max(np.abs(paths.iterate_endpoint(g, k) - full)) < 1e-12


# ---------------------------------------------------------------------------
# rescaling and conjugation
# ---------------------------------------------------------------------------


def test_rescaled_fold_matches_iterate():
    n = 1
    unit = paths.TrigSeries.build(
        n,
        cos_terms=[(0, np.diag([0.8, 1.6])), (1, np.diag([-0.2, 0.3]))],
        sin_terms=[(1, np.array([[0, 0.25], [0.25, 0]]))],
    )
    B = paths.CoefficientPath.from_unit(unit)
    g = paths.unit_path(B)
    for k in (2, 3):
        gk_end = paths.iterate_endpoint(g, k)
        gk_unit = paths.unit_path(B.rescaled_fold(k))
        assert np.max(np.abs(gk_unit.endpoint() - gk_end)) < 1e-8


def test_l1_conjugation_swaps_blocks():
    M = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 2.0, 0.0, 0.0],
                  [0.0, 0.0, 3.0, 0.0], [0.0, 0.0, 0.0, 4.0]])
    B = paths.CoefficientPath.constant(M)
    Bc = B.l1_conjugated()
    got = Bc.unit(0.0) / (B.period / 2.0)
    assert np.allclose(got, np.diag([3.0, 4.0, 1.0, 2.0]))


def test_conjugation_preserves_symplecticity_and_nullity():
    import scipy.linalg

    rng = np.random.default_rng(21)
    n = 2
    unit = paths.TrigSeries.build(
        n,
        cos_terms=[(0, np.diag([0.5, 1.5, 2.2, 1.1]))],
        sin_terms=[(1, np.kron([[0, 1], [1, 0]], 0.3 * np.eye(2)))],
    )
    B = paths.CoefficientPath.from_unit(unit)
    g = paths.unit_path(B)
    # a random Lagrangian frame: the L0-image under a random symplectic map
    H = 0.5 * (lambda X: X + X.T)(rng.normal(size=(4, 4)))
    S = scipy.linalg.expm(core.standard_J(n) @ H)
    L = core.LagrangianFrame.from_basis(S[:, n:])
    gc = paths.conjugate_path_to_L0(g, L)
    assert core.symplectic_drift(gc.endpoint()) < 1e-9
    # nu_L(gamma) = dim(gamma(1) L & L) equals the conjugated V-block kernel
    geometric = core.subspace_intersection_dim(g.endpoint() @ L.basis, L.basis)
    assert paths.endpoint_L0_nullity(gc.endpoint()) == geometric


def test_conjugate_path_to_L0():
    B = rotation_system(0.8)
    g = paths.unit_path(B)
    assert paths.conjugate_path_to_L0(g, core.LagrangianFrame.L0(1)) is g
    # rotations commute with J, so the conjugated path is unchanged
    gc = paths.conjugate_path_to_L0(g, core.LagrangianFrame.L1(1))
    assert np.max(np.abs(gc.samples - g.samples)) < 1e-12
    # a diagonal endpoint is inverted by J-conjugation
    D = paths.SymplecticPath(
        1,
        np.linspace(0, 1, 3),
        np.array([np.eye(2), np.diag([2.0**0.5, 2.0**-0.5]), np.diag([2.0, 0.5])]),
        None,
        0.0,
    )
    Dc = paths.conjugate_path_to_L0(D, core.LagrangianFrame.L1(1))
    assert np.allclose(Dc.endpoint(), np.diag([0.5, 2.0]))


# ---------------------------------------------------------------------------
# ellipsoid linearization
# ---------------------------------------------------------------------------


def test_ellipsoid_linearization_values():
    B = paths.ellipsoid_linearization([1.0], 1)
    assert B.period == pytest.approx(np.pi)
    assert np.allclose(B.physical_eval(0.0), 2.0 * np.eye(2))
    assert B.symmetry_certified
    r2 = 2.0 ** 0.25
    B2 = paths.ellipsoid_linearization([1.0, r2], 2)
    assert B2.period == pytest.approx(np.pi * np.sqrt(2.0))
    assert np.allclose(
        B2.physical_eval(0.0), np.diag([2.0, np.sqrt(2.0), 2.0, np.sqrt(2.0)])
    )


def test_ellipsoid_linearization_scaling():
    lam = 1.7
    base = paths.ellipsoid_linearization([1.0, 1.3], 1)
    scaled = paths.ellipsoid_linearization([lam, 1.3 * lam], 1)
    assert scaled.period == pytest.approx(lam**2 * base.period)
    assert np.allclose(
        scaled.physical_eval(0.0), base.physical_eval(0.0) / lam**2
    )


def test_ellipsoid_linearization_errors():
    with pytest.raises(ValueError):
        paths.ellipsoid_linearization([1.0, -1.0], 1)
    with pytest.raises(ValueError):
        paths.ellipsoid_linearization([1.0], 2)


# ---------------------------------------------------------------------------
# tabulated coefficients
# ---------------------------------------------------------------------------


def test_tabulated_roundtrip_and_interpolation():
    times = np.linspace(0.0, 2.0, 41)
    vals = np.array([np.diag([1.0 + 0.2 * np.cos(np.pi * t), 2.0]) for t in times])
    B = paths.CoefficientPath.tabulated(times, vals, period=2.0)
    assert B.n == 1
    got = B.physical_eval(times[7])
    assert np.allclose(got, vals[7], atol=1e-12)
    assert B.symmetry_certified  # diagonal blocks reflect evenly


def test_tabulated_grid_validation():
    with pytest.raises(ValueError):
        paths.TabulatedCoefficient.build(1, [0.0, 0.5, 0.5, 1.0], np.zeros((4, 2, 2)))
