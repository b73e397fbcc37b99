"""Brake orbits on ellipsoids: gauge, orbits, index tables, bounds.

The ellipsoid with radii r carries exactly n geometrically distinct
symmetric brake orbits, one per coordinate plane; the linearized
coefficient along each is constant, so every index has a closed-form
crossing count against which the index engine is checked. Resonances
are detected at the frequency level: iterate nullities degenerate when
r_j^2 / r_k^2 is rational, which is not the same as r_j / r_k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import kernel_dimension, standard_J
from .galerkin import DEFAULT_SCHEME, TruncationScheme
from .indices import index_L_crossings, omega_index_periodic
from .iteration import SystemIndexCache, check_inequalities
from .paths import (
    CoefficientPath,
    ellipsoid_linearization,
    iterate_endpoint,
    unit_path,
)

RESONANCE_TOL = 1e-9
RESONANCE_MAX_DEN = 50


@dataclass(frozen=True)
class EllipsoidModel:
    """Radii plus the frequency-level resonance report.

    A pair (j, k) is resonant when r_j^2 / r_k^2 is within tolerance of
    a rational with denominator <= 50; iterate nullities along orbit j
    then exceed 1 at suitable iterates.
    """

    r: tuple[float, ...]
    resonance_report: tuple[dict, ...]

    @classmethod
    def build(
        cls,
        radii,
        tol: float = RESONANCE_TOL,
        max_denominator: int = RESONANCE_MAX_DEN,
    ) -> "EllipsoidModel":
        r = tuple(float(x) for x in radii)
        if any(x <= 0 for x in r):
            raise ValueError("radii must be positive")
        report = []
        for j in range(len(r)):
            for k in range(len(r)):
                if j == k:
                    continue
                ratio = r[j] ** 2 / r[k] ** 2
                frac = Fraction(ratio).limit_denominator(max_denominator)
                err = abs(ratio - float(frac))
                if err <= tol:
                    report.append(
                        {
                            "j": j + 1,
                            "k": k + 1,
                            "p": frac.numerator,
                            "q": frac.denominator,
                            "error": err,
                        }
                    )
        return cls(r, tuple(report))

    @property
    def n(self) -> int:
        return len(self.r)

    @property
    def resonant(self) -> bool:
        return len(self.resonance_report) > 0


def gauge_function(model: EllipsoidModel, x) -> float:
    """j(x) = sqrt(sum (x_k^2 + y_k^2)/r_k^2): 0 at 0, 1 on the surface,
    positively homogeneous of degree one."""
    x = np.asarray(x, dtype=float)
    n = model.n
    r2 = np.asarray(model.r) ** 2
    return float(np.sqrt(np.sum((x[:n] ** 2 + x[n:] ** 2) / r2)))


def quadratic_hamiltonian(model: EllipsoidModel, x) -> float:
    """H(x) = j(x)^2, the 2-homogeneous Hamiltonian of the surface."""
    return gauge_function(model, x) ** 2


@dataclass(frozen=True)
class BrakeOrbitRecord:
    """One planar symmetric brake orbit with its linearization data."""

    j: int
    period: float
    x0: np.ndarray = field(repr=False)
    xdot0: np.ndarray = field(repr=False)
    xi: np.ndarray = field(repr=False)
    eta: np.ndarray = field(repr=False)
    full_xi: np.ndarray = field(repr=False)
    full_eta: np.ndarray = field(repr=False)
    coefficient: CoefficientPath = field(repr=False)

    def trajectory(self, t):
        """x(t) on the orbit plane, brake-symmetric: x(-t) = N x(t)."""
        t = np.asarray(t, dtype=float)
        n = len(self.x0) // 2
        rj = np.sqrt(self.x0[n + self.j - 1] ** 2 + self.x0[self.j - 1] ** 2)
        ang = 2.0 * t / rj**2
        out = np.zeros(t.shape + (2 * n,))
        out[..., self.j - 1] = -rj * np.sin(ang)
        out[..., n + self.j - 1] = rj * np.cos(ang)
        return out


def enumerate_brake_orbits(model: EllipsoidModel) -> list[BrakeOrbitRecord]:
    """The n planar symmetric brake orbits, one per coordinate plane.

    Orbit j starts on the q-axis of its plane (p(0) = 0, the brake
    condition) with <J x(0), xdot(0)> = 2 H(x(0)) = 2.
    """
    n = model.n
    out = []
    for j in range(1, n + 1):
        rj = model.r[j - 1]
        x0 = np.zeros(2 * n)
        x0[n + j - 1] = rj
        xdot0 = np.zeros(2 * n)
        xdot0[j - 1] = -2.0 / rj
        xi = -xdot0[:n] / np.sqrt(2.0)
        eta = x0[n:] / np.sqrt(2.0)
        out.append(
            BrakeOrbitRecord(
                j=j,
                period=np.pi * rj**2,
                x0=x0,
                xdot0=xdot0,
                xi=xi,
                eta=eta,
                full_xi=-xi,
                full_eta=-eta,
                coefficient=ellipsoid_linearization(model.r, j),
            )
        )
    return out


# ---------------------------------------------------------------------------
# closed-form oracles (crossing counts of diamond rotations)
# ---------------------------------------------------------------------------


def closed_form_L_pair(model: EllipsoidModel, j: int, m: int) -> tuple[int, int]:
    """(i_L0, nu_L0) of the m-th iterate of orbit j by counting the
    interior zeros of sin(pi s r_j^2/r_k^2) over s in (0, m)."""
    rj2 = model.r[j - 1] ** 2
    idx = 0
    nul = 0
    for rk in model.r:
        rho = rj2 / rk**2
        x = m * rho
        # count of integers l >= 1 with l < x
        idx += int(np.ceil(x)) - 1 if abs(x - round(x)) > 1e-9 else int(round(x)) - 1
        if abs(x - round(x)) <= 1e-9:
            nul += 1
    return idx, nul


def closed_form_periodic_pair(model: EllipsoidModel, j: int, m: int) -> tuple[int, int]:
    """(i_1, nu_1) of the doubled m-th iterate: per plane the rotation
    angle is 2 pi m r_j^2/r_k^2, contributing 2 floor + 1 (or the
    degenerate 2l - 1 with nullity 2)."""
    rj2 = model.r[j - 1] ** 2
    idx = 0
    nul = 0
    for rk in model.r:
        x = m * rj2 / rk**2  # rotations of angle 2 pi x
        if abs(x - round(x)) <= 1e-9:
            idx += 2 * int(round(x)) - 1
            nul += 2
        else:
            idx += 2 * int(np.floor(x)) + 1
    return idx, nul


def closed_form_mean_index(model: EllipsoidModel, j: int) -> float:
    rj2 = model.r[j - 1] ** 2
    return float(sum(rj2 / rk**2 for rk in model.r))


# ---------------------------------------------------------------------------
# tables and reports
# ---------------------------------------------------------------------------


def orbit_index_table(
    model: EllipsoidModel,
    m_max: int = 10,
    scheme: TruncationScheme = DEFAULT_SCHEME,
    engine: str = "crossing",
) -> list[dict]:
    """Per-orbit, per-iterate index table with closed-form cross-checks.

    Rows carry (i_L0, nu_L0, i_L1, nu_L1, i_per, nu_per, mean); engine
    values come from the crossing route (the constant coefficient is
    positive definite), closed-form values from the rotation-angle
    counts. Resonant rows are flagged.
    """
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    from .corpus import parallel_map

    tasks = [
        (orbit, m) for orbit in enumerate_brake_orbits(model) for m in range(1, m_max + 1)
    ]

    def one_row(task):
        orbit, m = task
        B = orbit.coefficient
        resonant_j = any(rep["j"] == orbit.j for rep in model.resonance_report)
        if engine == "crossing":
            pair_L0 = index_L_crossings(B, "L0", fold=m).pair()
            pair_L1 = index_L_crossings(B, "L1", fold=m).pair()
        else:
            cache = SystemIndexCache(B, scheme)
            pair_L0 = cache.L_pair("L0", fold=m)
            pair_L1 = cache.L_pair("L1", fold=m)
        Bm = B.rescaled_fold(m) if m > 1 else B
        rep_per = omega_index_periodic(Bm, 0.0, scheme)
        cf_L = closed_form_L_pair(model, orbit.j, m)
        cf_per = closed_form_periodic_pair(model, orbit.j, m)
        return {
            "orbit": orbit.j,
            "m": m,
            "i_L0": pair_L0[0],
            "nu_L0": pair_L0[1],
            "i_L1": pair_L1[0],
            "nu_L1": pair_L1[1],
            "i_per": rep_per.index,
            "nu_per": rep_per.nullity,
            "mean_closed_form": closed_form_mean_index(model, orbit.j),
            "cf_i_L0": cf_L[0],
            "cf_nu_L0": cf_L[1],
            "cf_i_per": cf_per[0],
            "cf_nu_per": cf_per[1],
            "resonant": resonant_j,
        }

    return parallel_map(one_row, tasks)


def verify_multiplicity_bound(
    model: EllipsoidModel,
    scheme: TruncationScheme = DEFAULT_SCHEME,
    m_max: int = 20,
) -> dict:
    """Orbit count against the [n/2]+1 and n lower bounds.

    Nondegeneracy (per-iterate nu_L0 = 1 up to m_max) is only asserted
    for non-resonant models; every ellipsoid brake orbit is symmetric,
    so the asymmetric census is 0 and the nondegenerate bound reads n.
    """
    n = model.n
    orbits = enumerate_brake_orbits(model)
    brake_residuals = []
    for orbit in orbits:
        pairing = float((standard_J(n) @ orbit.x0) @ orbit.xdot0)
        brake_residuals.append(
            {
                "orbit": orbit.j,
                "p0_norm": float(np.max(np.abs(orbit.x0[:n]))),
                "energy_pairing": pairing,
                "pairing_residual": abs(pairing - 2.0),
            }
        )
    report = {
        "n": n,
        "radii": list(model.r),
        "orbit_count": len(orbits),
        "bound_half": n // 2 + 1,
        "count_ge_half_bound": len(orbits) >= n // 2 + 1,
        "asymmetric_census": 0,
        "bound_nondegenerate": n,
        "count_ge_nondegenerate_bound": len(orbits) >= n,
        "resonant": model.resonant,
        "resonances": [dict(rep) for rep in model.resonance_report],
        "brake_conditions": brake_residuals,
    }
    if model.resonant:
        report["nondegeneracy"] = "skipped: resonant frequency ratios"
        return report
    worst = 1
    for orbit in orbits:
        g1 = unit_path(orbit.coefficient)
        for m in range(1, m_max + 1):
            end = iterate_endpoint(g1, m)
            nu = kernel_dimension(end[:n, n:])
            worst = max(worst, nu)
            if nu != 1:
                report["nondegeneracy"] = f"violated at orbit {orbit.j}, m={m} (nu={nu})"
                report["nondegenerate"] = False
                return report
    report["nondegenerate"] = True
    report["max_iterate_nullity"] = worst
    return report


def orbit_inequality_report(
    model: EllipsoidModel,
    scheme: TruncationScheme = DEFAULT_SCHEME,
    k_range=range(1, 7),
) -> list[dict]:
    """Inequality suite on each orbit with its symmetric-orbit witnesses."""
    out = []
    for orbit in enumerate_brake_orbits(model):
        rows = check_inequalities(
            orbit.coefficient,
            k_range=k_range,
            scheme=scheme,
            witness=(orbit.xi, orbit.eta),
            full_witness=(orbit.full_xi, orbit.full_eta),
            theta_points=60,
        )
        out.append({"orbit": orbit.j, "rows": rows})
    return out
