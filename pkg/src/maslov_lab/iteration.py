"""Iteration identities for L-indices, verified as exact integer facts.

Bott-type decompositions of i_L(gamma^k) into omega-indices of the
doubled path, the periodic/Lagrangian splitting of i(gamma^2), the
closed-form (precise) iteration formula driven by splitting numbers,
the common-index-jump certificate search, the symmetric normal form
(-I2) diamond Mtilde, and the inequality suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import kernel_dimension, kernel_dimension_balanced, standard_J, t_block, v_block
from .galerkin import DEFAULT_SCHEME, TruncationScheme
from .indices import (
    SpectralProfile,
    index_L_crossings,
    index_L_galerkin,
    mean_index_closed_form,
    omega_index_L0,
    omega_index_periodic,
    scan_L_omega_indices,
    spectral_profile,
    twisted_jump_candidates,
    twisted_nullity_geometric,
)
from .paths import CoefficientPath, SymplecticPath, iterate_endpoint, unit_path

RESONANCE_GUARD = 1e-9


def floor_int(a: float) -> int:
    """[a] = sup{k in Z : k <= a}."""
    return int(math.floor(a))


def ceil_E(a: float) -> int:
    """E(a) = inf{k in Z : k >= a}."""
    return int(math.ceil(a))


def near_integer(a: float, guard: float = RESONANCE_GUARD) -> tuple[bool, int]:
    r = round(a)
    return abs(a - r) < guard, int(r)


# ---------------------------------------------------------------------------
# per-system cache
# ---------------------------------------------------------------------------


class SystemIndexCache:
    """Memoizes the index quantities of one brake-symmetric system.

    Everything the iteration formulas consume is derived from a single
    unit path, its L1-conjugated twin, omega-indices of the doubled
    path, and the spectral profile; all are computed at most once.
    """

    def __init__(self, B: CoefficientPath, scheme: TruncationScheme = DEFAULT_SCHEME):
        self.B = B
        self.scheme = scheme
        self._mem: dict = {}

    def _get(self, key, thunk):
        if key not in self._mem:
            self._mem[key] = thunk()
        return self._mem[key]

    def system(self, frame: str) -> CoefficientPath:
        if frame == "L0":
            return self.B
        return self._get(("system", frame), lambda: self.B.l1_conjugated())

    def gamma1(self, frame: str = "L0") -> SymplecticPath:
        return self._get(("gamma1", frame), lambda: unit_path(self.system(frame)))

    def L_pair(self, frame: str, fold: int = 1) -> tuple[int, int]:
        def compute():
            rep = index_L_galerkin(
                self.B, frame, self.scheme, fold=fold, gamma=self.gamma1(frame)
            )
            if not rep.stabilized:
                raise ArithmeticError(f"unstabilized L-index for fold {fold}")
            return rep.pair()

        return self._get(("L", frame, fold), compute)

    def L_omega(self, frame: str, theta: float) -> tuple[int, int]:
        def compute():
            rep = omega_index_L0(
                self.B,
                theta,
                self.scheme,
                L=frame,
                endpoint=self.gamma1(frame).endpoint(),
            )
            if not rep.stabilized:
                raise ArithmeticError("unstabilized twisted index")
            return rep.pair()

        return self._get(("Lomega", frame, round(theta, 14)), compute)

    def periodic(self, phi: float) -> tuple[int, int]:
        def compute():
            rep = omega_index_periodic(self.B, phi, self.scheme, gamma=self.gamma1())
            if not rep.stabilized:
                raise ArithmeticError("unstabilized periodic index")
            return rep.pair()

        return self._get(("periodic", round(float(np.mod(phi, 2 * np.pi)), 14)), compute)

    def profile(self) -> SpectralProfile:
        return self._get(
            "profile", lambda: spectral_profile(self.B, self.scheme, gamma=self.gamma1())
        )

    def endpoint_nullity(self, frame: str, k: int) -> int:
        def compute():
            end = iterate_endpoint(self.gamma1(), k)
            block = v_block(end) if frame == "L0" else t_block(end)
            return kernel_dimension_balanced(block)

        return self._get(("nu_end", frame, k), compute)

    def s_plus_at_one(self) -> int:
        return self.profile().s_plus_at_one()

    def mean_index(self) -> float:
        return mean_index_closed_form(self.profile())


# ---------------------------------------------------------------------------
# Bott-type formulas
# ---------------------------------------------------------------------------


def _bott_terms(k: int):
    """Angles phi = 2 pi i / k of the doubled-path omega terms."""
    top = (k - 1) // 2 if k % 2 == 1 else k // 2 - 1
    return [2.0 * np.pi * i / k for i in range(1, top + 1)]


def bott_predict(
    B: CoefficientPath,
    k: int,
    frame: str = "L0",
    scheme: TruncationScheme = DEFAULT_SCHEME,
    cache: SystemIndexCache | None = None,
) -> tuple[int, int]:
    """Predicted (i_L(gamma^k), nu_L(gamma^k)) from the Bott decomposition.

    Odd k sums the omega-indices of gamma^2 over the k-th roots
    omega^{2i}; even k adds the sqrt(-1)-twisted pair of gamma^1.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    c = cache if cache is not None else SystemIndexCache(B, scheme)
    i_tot, nu_tot = c.L_pair(frame)
    if k % 2 == 0:
        di, dnu = c.L_omega(frame, np.pi / 2)
        i_tot += di
        nu_tot += dnu
    for phi in _bott_terms(k):
        di, dnu = c.periodic(phi)
        i_tot += di
        nu_tot += dnu
    return i_tot, nu_tot


def bott_predict_L0(B, k, scheme=DEFAULT_SCHEME, cache=None):
    return bott_predict(B, k, "L0", scheme, cache)


def bott_predict_L1(B, k, scheme=DEFAULT_SCHEME, cache=None):
    return bott_predict(B, k, "L1", scheme, cache)


@dataclass(frozen=True)
class IterationLedger:
    """Direct vs predicted index pairs of gamma^k over a k-range."""

    k_range: tuple[int, ...]
    rows: tuple[dict, ...]

    def all_exact(self) -> bool:
        return all(
            r[f"direct_{f}"] == r[f"predicted_{f}"] for r in self.rows for f in ("L0", "L1")
        )


def iteration_ledger(
    B: CoefficientPath,
    k_range,
    scheme: TruncationScheme = DEFAULT_SCHEME,
    cache: SystemIndexCache | None = None,
) -> IterationLedger:
    c = cache if cache is not None else SystemIndexCache(B, scheme)
    rows = []
    for k in k_range:
        row = {"k": int(k)}
        for frame in ("L0", "L1"):
            row[f"direct_{frame}"] = c.L_pair(frame, fold=k)
            row[f"predicted_{frame}"] = bott_predict(B, k, frame, scheme, c)
        rows.append(row)
    return IterationLedger(tuple(int(k) for k in k_range), tuple(rows))


# ---------------------------------------------------------------------------
# periodic decomposition (the four identities of the doubled path)
# ---------------------------------------------------------------------------


def check_periodic_identities(
    B: CoefficientPath,
    scheme: TruncationScheme = DEFAULT_SCHEME,
    cache: SystemIndexCache | None = None,
) -> list[dict]:
    """Both sides of the four gamma^2 identities, computed independently.

    The periodic side comes from the omega-twisted forms on [0, 2]; the
    Lagrangian side from the boundary-value forms of gamma^1 and its
    conjugate.
    """
    c = cache if cache is not None else SystemIndexCache(B, scheme)
    n = B.n
    i1, nu1 = c.periodic(0.0)
    im1, num1 = c.periodic(np.pi)
    iL0, nuL0 = c.L_pair("L0")
    iL1, nuL1 = c.L_pair("L1")
    iwL0, nuwL0 = c.L_omega("L0", np.pi / 2)
    iwL1, nuwL1 = c.L_omega("L1", np.pi / 2)
    rows = [
        {"name": "i(gamma^2) = i_L0 + i_L1 + n", "lhs": i1, "rhs": iL0 + iL1 + n},
        {"name": "nu_1(gamma^2) = nu_L0 + nu_L1", "lhs": nu1, "rhs": nuL0 + nuL1},
        {"name": "i_-1(gamma^2) = i^L0_i + i^L1_i", "lhs": im1, "rhs": iwL0 + iwL1},
        {"name": "nu_-1(gamma^2) = nu^L0_i + nu^L1_i", "lhs": num1, "rhs": nuwL0 + nuwL1},
    ]
    for r in rows:
        r["holds"] = r["lhs"] == r["rhs"]
    return rows


# ---------------------------------------------------------------------------
# precise iteration formula
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PreciseIterationValue:
    k: int
    value: int
    resolved: bool
    branches: tuple[int, ...]

    def matches(self, direct: int) -> bool:
        return direct == self.value if self.resolved else direct in self.branches


def precise_iteration_L0(
    B: CoefficientPath,
    k: int,
    scheme: TruncationScheme = DEFAULT_SCHEME,
    cache: SystemIndexCache | None = None,
) -> PreciseIterationValue:
    """Closed-form i_L0(gamma^k) from the spectral profile of gamma^2(2).

    When k*theta/(2 pi) falls within the resonance guard of an integer
    for a spectral angle theta carrying S- > 0, the ceiling is
    ambiguous in floating point: the value at the snapped integer is
    reported as primary and the record is marked unresolved with both
    branch values.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    c = cache if cache is not None else SystemIndexCache(B, scheme)
    prof = c.profile()
    i2 = prof.i1
    sp1 = prof.s_plus_at_one()
    C = prof.C
    resolved = True
    lo = hi = 0
    for a in prof.arguments:
        if a == 0.0:
            continue
        sm = prof.S_minus[a]
        if sm == 0:
            continue
        x = k * a / (2.0 * np.pi)
        snap, r = near_integer(x)
        if snap:
            resolved = False
            lo += r * sm
            hi += (r + 1) * sm
        else:
            e = ceil_E(x)
            lo += e * sm
            hi += e * sm
    if k % 2 == 1:
        iL0_1, _ = c.L_pair("L0")
        base = iL0_1 + ((k - 1) // 2) * (i2 + sp1 - C) - C
    else:
        iL0_2, _ = c.L_pair("L0", fold=2)
        tail = sum(
            prof.S_minus[a] for a in prof.arguments if np.pi + 1e-12 < a < 2 * np.pi - 1e-12
        )
        base = iL0_2 + (k // 2 - 1) * (i2 + sp1 - C) - C - tail
    branches = tuple(sorted({base + lo, base + hi}))
    return PreciseIterationValue(k=k, value=base + lo, resolved=resolved, branches=branches)


# ---------------------------------------------------------------------------
# common index jump certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JumpCertificate:
    """(R, m_1..m_q) with per-condition lhs/rhs integers for the three
    common-index-jump conditions."""

    R: int
    m: tuple[int, ...]
    conditions: tuple[tuple[dict, ...], ...]
    valid: bool
    verified: bool = False

    def to_dict(self) -> dict:
        return {
            "R": self.R,
            "m": list(self.m),
            "valid": self.valid,
            "verified": self.verified,
            "conditions": [[dict(c) for c in cond] for cond in self.conditions],
        }


class _JumpSystem:
    """Fast iterated-index evaluators for one system of the collection."""

    def __init__(self, B: CoefficientPath, scheme: TruncationScheme):
        self.cache = SystemIndexCache(B, scheme)
        self.n = B.n
        self.iL0, self.nuL0 = self.cache.L_pair("L0")
        self.iL1, self.nuL1 = self.cache.L_pair("L1")
        self.sp1 = self.cache.s_plus_at_one()
        self.mean = self.cache.mean_index()

    def i_L0_odd(self, k: int) -> PreciseIterationValue:
        return precise_iteration_L0(self.cache.B, k, cache=self.cache)

    def nu_L0(self, k: int) -> int:
        return self.cache.endpoint_nullity("L0", k)


def find_common_index_jump(
    systems: list[CoefficientPath],
    R_max: int,
    scheme: TruncationScheme = DEFAULT_SCHEME,
    verify: str = "all",
    m_cap: int = 4000,
) -> list[JumpCertificate]:
    """Certificates (R, m_1..m_q) of the three-condition index jump.

    Candidates are generated from the closed-form odd-iterate values
    (condition (iii) of the first system pins R given m_1); conditions
    are then checked for every system, and each emitted certificate is
    re-verified by direct computation with a fresh larger truncation
    scheme. Requires every mean index to be positive.
    """
    if verify not in ("all", "first", "none"):
        raise ValueError("verify must be all|first|none")
    sys = [_JumpSystem(B, scheme) for B in systems]
    for j, s in enumerate(sys):
        if s.mean <= 0:
            raise ValueError(f"system {j} has nonpositive mean index {s.mean:.4g}")

    def conditions_for(s: _JumpSystem, mj: int, R: int):
        rows = []
        vp = s.i_L0_odd(2 * mj + 1)
        vm = s.i_L0_odd(2 * mj - 1) if mj >= 1 else None
        if not (vp.resolved and (vm is None or vm.resolved)):
            return None
        nup = s.nu_L0(2 * mj + 1)
        num = s.nu_L0(2 * mj - 1)
        rows.append({"name": "(i) nu at 2m+1", "lhs": nup, "rhs": s.nuL0})
        rows.append({"name": "(i) nu at 2m-1", "lhs": num, "rhs": s.nuL0})
        rows.append(
            {
                "name": "(ii)",
                "lhs": vm.value + num,
                "rhs": R - (s.iL1 + s.n + s.sp1 - s.nuL0),
            }
        )
        rows.append({"name": "(iii)", "lhs": vp.value, "rhs": R + s.iL0})
        return rows

    out: list[JumpCertificate] = []
    s0 = sys[0]
    m1_cap = min(m_cap, int(np.ceil((R_max + abs(s0.iL0) + 2 * s0.n + 4) / max(s0.mean, 1e-6))))
    for m1 in range(1, m1_cap + 1):
        v = s0.i_L0_odd(2 * m1 + 1)
        if not v.resolved:
            continue
        R = v.value - s0.iL0
        if R < 1 or R > R_max:
            continue
        ms = [m1]
        conds = []
        okall = True
        for s in sys:
            if s is s0:
                rows = conditions_for(s, m1, R)
            else:
                rows = None
                cap = min(m_cap, int(np.ceil((R + abs(s.iL0) + 2 * s.n + 4) / max(s.mean, 1e-6))))
                for mj in range(1, cap + 1):
                    vv = s.i_L0_odd(2 * mj + 1)
                    if vv.resolved and vv.value == R + s.iL0:
                        trial = conditions_for(s, mj, R)
                        if trial is not None and all(r["lhs"] == r["rhs"] for r in trial):
                            rows = trial
                            ms.append(mj)
                            break
            if rows is None or not all(r["lhs"] == r["rhs"] for r in rows):
                okall = False
                break
            conds.append(tuple(rows))
        if not okall or len(ms) != len(sys):
            continue
        out.append(JumpCertificate(R=R, m=tuple(ms), conditions=tuple(conds), valid=True))
    out.sort(key=lambda cert: (cert.R, cert.m))
    if verify != "none" and out:
        fresh = TruncationScheme(
            m_start=None, m_step=None, m_max=DEFAULT_SCHEME.m_max * 2, stabilization_window=3
        )
        fresh_caches = [SystemIndexCache(B, fresh) for B in systems]
        n_check = len(out) if verify == "all" else 1
        verified = []
        for pos, cert in enumerate(out):
            if pos < n_check:
                _verify_certificate(systems, cert, fresh, fresh_caches)
                cert = JumpCertificate(cert.R, cert.m, cert.conditions, cert.valid, verified=True)
            verified.append(cert)
        out = verified
    return out


def _verify_certificate(systems, cert: JumpCertificate, scheme: TruncationScheme, caches):
    """Direct recomputation of all three conditions (fresh truncations).

    Indices come from the boundary-value forms of the rescaled k-fold
    coefficients; nullities from the Bott sum over doubled-path
    nullities, an independent route to the endpoint kernels used by the
    finder.
    """
    for j, B in enumerate(systems):
        n = B.n
        mj = cert.m[j]
        cache = caches[j]
        iL0, nuL0 = cache.L_pair("L0")
        iL1, _ = cache.L_pair("L1")
        sp1 = cache.s_plus_at_one()
        for side, k in (("-", 2 * mj - 1), ("+", 2 * mj + 1)):
            i_direct, nu_direct = cache.L_pair("L0", fold=k)
            nu_bott = bott_predict(B, k, "L0", scheme, cache)[1]
            if nu_direct != nu_bott:
                raise ArithmeticError(
                    f"certificate R={cert.R}: nullity routes disagree at k={k}"
                )
            if nu_direct != nuL0:
                raise ArithmeticError(f"certificate R={cert.R}: condition (i) fails at k={k}")
            if side == "-":
                lhs = i_direct + nu_direct
                rhs = cert.R - (iL1 + n + sp1 - nuL0)
                if lhs != rhs:
                    raise ArithmeticError(
                        f"certificate R={cert.R}: condition (ii) fails ({lhs} != {rhs})"
                    )
            else:
                if i_direct != cert.R + iL0:
                    raise ArithmeticError(
                        f"certificate R={cert.R}: condition (iii) fails "
                        f"({i_direct} != {cert.R + iL0})"
                    )


# ---------------------------------------------------------------------------
# symmetric normal form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalFormResult:
    """det-positive conjugating family carrying M to (sign*I2) diamond Mtilde."""

    s_grid: np.ndarray = field(repr=False)
    psi_samples: np.ndarray = field(repr=False)
    conjugated: np.ndarray = field(repr=False)
    M_tilde: np.ndarray = field(repr=False)
    nu1_profile: tuple[int, ...]
    nu2_profile: tuple[int, ...]
    residual: float
    case: str

    @property
    def nu_constant(self) -> bool:
        return len(set(self.nu1_profile)) == 1 and len(set(self.nu2_profile)) == 1


def _orth_complement(vectors: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the complement of the given columns."""
    n = vectors.shape[0]
    q, _ = np.linalg.qr(vectors, mode="complete")
    return q[:, vectors.shape[1] :]


def symmetric_normal_form(
    M: np.ndarray,
    xi: np.ndarray,
    eta: np.ndarray,
    sign: int = -1,
    tol: float = 1e-8,
    grid_points: int = 65,
    psi_route: str = "auto",
) -> NormalFormResult:
    """Split off the (sign * I2) plane of a symmetric-orbit end matrix.

    Preconditions (checked): xi^T eta = 1 and, for M = [[A,B],[C,D]],
    B eta = 0, C xi = 0, D eta = sign*eta, A xi = sign*xi. Builds the
    paired frames (xi F), (eta G) with (eta G) = ((xi F)^T)^{-1},
    interpolates psi from I to (xi F) through positive determinants
    (linear path, with a QR reroute if the determinant dips), and
    certifies that nu1, nu2 are constant along the conjugated family.
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be -1 or +1")
    M = np.asarray(M, dtype=float)
    n = M.shape[0] // 2
    xi = np.asarray(xi, dtype=float).reshape(n)
    eta = np.asarray(eta, dtype=float).reshape(n)
    A, Bb = M[:n, :n], M[:n, n:]
    Cb, D = M[n:, :n], M[n:, n:]
    scale = max(1.0, float(np.max(np.abs(M))))
    residuals = {
        "xi^T eta = 1": abs(float(xi @ eta) - 1.0),
        "B eta = 0": float(np.max(np.abs(Bb @ eta))),
        "C xi = 0": float(np.max(np.abs(Cb @ xi))),
        "D eta = sign*eta": float(np.max(np.abs(D @ eta - sign * eta))),
        "A xi = sign*xi": float(np.max(np.abs(A @ xi - sign * xi))),
    }
    bad = {k: v for k, v in residuals.items() if v > tol * scale}
    if bad:
        raise ValueError(f"block preconditions violated: {bad}")

    lam = float(np.linalg.norm(xi))
    e1 = xi / lam
    eta_perp = eta - (eta @ e1) * e1
    parallel = np.linalg.norm(eta_perp) <= tol * max(1.0, np.linalg.norm(eta))
    if n == 1:
        F = np.zeros((1, 0))
        G = np.zeros((1, 0))
        case = "degenerate"
    elif parallel:
        comp = _orth_complement(e1[:, None])
        F = G = comp
        case = "parallel"
    else:
        e2 = eta_perp / np.linalg.norm(eta_perp)
        r = float(eta @ e2)
        rest = _orth_complement(np.column_stack([e1, e2]))
        F = np.column_stack([lam * e1 - (1.0 / r) * e2] + [rest[:, i] for i in range(n - 2)])
        G = np.column_stack([-r * e2] + [rest[:, i] for i in range(n - 2)])
        case = "independent"
    psi1 = np.column_stack([xi, F]) if F.shape[1] else xi[:, None].copy()
    flip_whole = False
    if np.linalg.det(psi1) <= 0:
        if n == 1 or F.shape[1] == 0:
            # conjugation by diag(psi^{-1}, psi^T) is invariant under
            # psi -> -psi, so the overall sign may be flipped
            flip_whole = True
        else:
            F = F.copy()
            G = G.copy()
            F[:, -1] *= -1.0
            G[:, -1] *= -1.0
            psi1 = np.column_stack([xi, F])
    if flip_whole:
        psi1 = -psi1
    if np.linalg.det(psi1) <= 0:
        raise AssertionError("sign repair failed to reach det > 0")

    s_grid = np.linspace(0.0, 1.0, grid_points)
    psis = np.array([(1 - s) * np.eye(n) + s * psi1 for s in s_grid])
    dets = np.linalg.det(psis)
    if np.any(dets <= 1e-12) or psi_route == "qr":
        # reroute: rotation factor along its skew geodesic, triangular
        # factor along an entrywise path with positive diagonal
        from .indices import _skew_generator_SO

        Q, Rtri = np.linalg.qr(psi1)
        signs = np.sign(np.diag(Rtri))
        Q = Q @ np.diag(signs)
        Rtri = np.diag(signs) @ Rtri
        K = _skew_generator_SO(Q)
        psis = np.array(
            [
                scipy.linalg.expm(s * K) @ ((1 - s) * np.eye(n) + s * Rtri)
                for s in s_grid
            ]
        )
        dets = np.linalg.det(psis)
        if np.any(dets <= 0):
            raise AssertionError("determinant-positive reroute failed")

    conj = np.empty((grid_points, 2 * n, 2 * n))
    nu1s, nu2s = [], []
    for i, psi in enumerate(psis):
        inv = np.linalg.inv(psi)
        P = np.block([[inv, np.zeros((n, n))], [np.zeros((n, n)), psi.T]])
        Pinv = np.block([[psi, np.zeros((n, n))], [np.zeros((n, n)), inv.T]])
        conj[i] = P @ M @ Pinv
        nu1s.append(kernel_dimension(v_block(conj[i])))
        nu2s.append(kernel_dimension(t_block(conj[i])))

    if n == 1:
        M_tilde = np.zeros((0, 0))
    else:
        G_full = np.linalg.inv(psi1.T)  # (eta G) recomputed from the pairing
        Gmat = G_full[:, 1:]
        M_tilde = np.block([[Gmat.T @ A @ F, Gmat.T @ Bb @ Gmat], [F.T @ Cb @ F, F.T @ D @ Gmat]])
    target = np.zeros((2 * n, 2 * n))
    target[0, 0] = sign
    target[n, n] = sign
    if n > 1:
        target[1:n, 1:n] = M_tilde[: n - 1, : n - 1]
        target[1:n, n + 1 :] = M_tilde[: n - 1, n - 1 :]
        target[n + 1 :, 1:n] = M_tilde[n - 1 :, : n - 1]
        target[n + 1 :, n + 1 :] = M_tilde[n - 1 :, n - 1 :]
    residual = float(np.max(np.abs(conj[-1] - target)))
    return NormalFormResult(
        s_grid=s_grid,
        psi_samples=psis,
        conjugated=conj,
        M_tilde=M_tilde,
        nu1_profile=tuple(nu1s),
        nu2_profile=tuple(nu2s),
        residual=residual,
        case=case,
    )


def reverse_normal_form_instance(n: int, rng, sign: int = -1, case: str = "independent"):
    """Construct (M, xi, eta) satisfying the block conditions from a
    random Mtilde in Sp(2n-2): the round-trip oracle for the normal form."""
    import scipy.linalg

    if n < 2:
        raise ValueError("reverse construction needs n >= 2")
    # random symplectic Mtilde via the exponential of a Hamiltonian matrix
    k = n - 1
    Jk = standard_J(k)
    H = rng.normal(size=(2 * k, 2 * k))
    H = 0.5 * (H + H.T)
    M_tilde = scipy.linalg.expm(Jk @ H)
    if case == "parallel":
        lam = float(np.exp(rng.normal()))
        eta = rng.normal(size=n)
        eta /= np.linalg.norm(eta) * np.sqrt(lam)
        xi = lam * eta
    else:
        xi = rng.normal(size=n)
        xi /= np.linalg.norm(xi)
        w = rng.normal(size=n)
        w -= (w @ xi) * xi
        w /= np.linalg.norm(w)
        coef = rng.normal() * 1.5
        eta = xi + coef * w  # xi^T eta = 1 by construction below
        eta = eta / float(xi @ eta)
    Fcols = _orth_complement(eta[:, None])
    psi1 = np.column_stack([xi, Fcols])
    if abs(np.linalg.det(psi1)) < 1e-10:
        return reverse_normal_form_instance(n, rng, sign, case)
    big = np.zeros((2 * n, 2 * n))
    big[0, 0] = sign
    big[n, n] = sign
    big[1:n, 1:n] = M_tilde[: n - 1, : n - 1]
    big[1:n, n + 1 :] = M_tilde[: n - 1, n - 1 :]
    big[n + 1 :, 1:n] = M_tilde[n - 1 :, : n - 1]
    big[n + 1 :, n + 1 :] = M_tilde[n - 1 :, n - 1 :]
    P0 = np.block(
        [
            [psi1, np.zeros((n, n))],
            [np.zeros((n, n)), np.linalg.inv(psi1).T],
        ]
    )
    M = P0 @ big @ np.linalg.inv(P0)
    return M, xi, eta, M_tilde


# ---------------------------------------------------------------------------
# inequality suite
# ---------------------------------------------------------------------------


def check_inequalities(
    B: CoefficientPath,
    k_range=range(1, 7),
    scheme: TruncationScheme = DEFAULT_SCHEME,
    witness: tuple[np.ndarray, np.ndarray] | None = None,
    full_witness: tuple[np.ndarray, np.ndarray] | None = None,
    theta_points: int = 180,
    cache: SystemIndexCache | None = None,
) -> list[dict]:
    """Inequality rows with per-row hypothesis gating.

    Rows whose hypotheses cannot be certified are reported as skipped,
    never as passes. The symmetric-orbit rows need the (xi, eta)
    witness of the half-period block conditions (sign -1 at the
    half-period matrix); the doubled-path estimate needs the analogous
    full-period witness (sign +1 at gamma^2(2)).
    """
    c = cache if cache is not None else SystemIndexCache(B, scheme)
    n = B.n
    rows: list[dict] = []
    iL0, nuL0 = c.L_pair("L0")
    iL1, nuL1 = c.L_pair("L1")
    rows.append(
        {"name": "|i_L0 - i_L1| <= n", "lhs": abs(iL0 - iL1), "rhs": n, "status": None}
    )
    rows.append(
        {
            "name": "|(i+nu)_L0 - (i+nu)_L1| <= n",
            "lhs": abs((iL0 + nuL0) - (iL1 + nuL1)),
            "rhs": n,
            "status": None,
        }
    )

    # sandwich and locality of the twisted index over (0, pi)
    end = c.gamma1().endpoint()
    scan = scan_L_omega_indices(B, "L0", grid_points=theta_points, scheme=scheme, endpoint=end)
    scan = [(r["theta"], r["index"], r["nullity"]) for r in scan if r["stabilized"]]
    sandwich_ok = True
    worst = None
    for theta, i_t, _nu_t in scan:
        if not (iL0 <= i_t <= iL0 + n):
            sandwich_ok = False
            worst = (theta, i_t)
    rows.append(
        {
            "name": "i_L0 <= i^L0_theta <= i_L0 + n",
            "lhs": 0 if sandwich_ok else 1,
            "rhs": 0,
            "status": None,
            "detail": {"samples": len(scan), "worst": worst},
        }
    )
    locality_ok = True
    for (t0, i0, nu0), (t1, i1_, nu1_) in zip(scan, scan[1:]):
        if i0 != i1_:
            # a jump needs a degenerate angle in between (or at a probe)
            nu_here = max(nu0, nu1_, twisted_nullity_geometric(end, 0.5 * (t0 + t1)))
            if nu_here == 0 and abs(i1_ - i0) > 0:
                mids = twisted_jump_candidates(end)
                inside = [a for a in mids if t0 - 1e-12 < a < t1 + 1e-12]
                if not inside:
                    locality_ok = False
                else:
                    nu_here = max(twisted_nullity_geometric(end, a) for a in inside)
            if abs(i1_ - i0) > max(nu_here, nu0, nu1_):
                locality_ok = False
    rows.append(
        {
            "name": "twisted index locally constant; jumps bounded by nullity",
            "lhs": 0 if locality_ok else 1,
            "rhs": 0,
            "status": None,
        }
    )

    # strict-convexity monotonicity chain (needs B(t) > 0)
    sgrid = np.linspace(0.0, 1.0, 101)
    min_eig = min(np.linalg.eigvalsh(M)[0] for M in B.unit_extension(sgrid))
    if min_eig > 0:
        chain_ok = True
        prev = None
        for k in k_range:
            rep = index_L_crossings(B, "L0", fold=k)
            if prev is not None and rep.index < prev[0] + prev[1]:
                chain_ok = False
            prev = rep.pair()
        rows.append(
            {
                "name": "i_L0(gamma^{m+1}) >= i_L0(gamma^m) + nu_L0(gamma^m)",
                "lhs": 0 if chain_ok else 1,
                "rhs": 0,
                "status": None,
            }
        )
    else:
        rows.append(
            {
                "name": "i_L0(gamma^{m+1}) >= i_L0(gamma^m) + nu_L0(gamma^m)",
                "status": "skipped: B(t) not positive definite",
            }
        )

    if witness is not None:
        xi, eta = witness
        M_half = c.gamma1().endpoint()
        try:
            nf = symmetric_normal_form(M_half, xi, eta, sign=-1)
            hypothesis_ok = nf.residual <= 1e-7 and nf.nu_constant
        except (ValueError, AssertionError):
            hypothesis_ok = False
        if hypothesis_ok:
            rows.append(
                {
                    "name": "|(i+nu)_L0 - (i+nu)_L1| <= n-1 (symmetric orbit)",
                    "lhs": abs((iL0 + nuL0) - (iL1 + nuL1)),
                    "rhs": n - 1,
                    "status": None,
                }
            )
            sp1 = c.s_plus_at_one()
            rows.append(
                {
                    "name": "i_L1 + S+_M(1) - nu_L0 >= (1-n)/2",
                    "lhs": float(iL1 + sp1 - nuL0),
                    "rhs": (1 - n) / 2.0,
                    "op": ">=",
                    "status": None,
                }
            )
        else:
            for nm in (
                "|(i+nu)_L0 - (i+nu)_L1| <= n-1 (symmetric orbit)",
                "i_L1 + S+_M(1) - nu_L0 >= (1-n)/2",
            ):
                rows.append({"name": nm, "status": "skipped: block conditions not certified"})

    if full_witness is not None:
        # doubled-path estimate under the I2-block hypothesis at the full period
        M_full = iterate_endpoint(c.gamma1(), 2)
        i_full, _ = c.periodic(0.0)
        try:
            nf_full = symmetric_normal_form(M_full, *full_witness, sign=1)
            full_ok = nf_full.residual <= 1e-7
        except (ValueError, AssertionError):
            full_ok = False
        if full_ok and i_full >= n:
            B2 = B.rescaled_fold(2)
            c2 = SystemIndexCache(B2, scheme)
            i4, _ = c2.periodic(0.0)
            nu4 = kernel_dimension(iterate_endpoint(c.gamma1(), 4) - np.eye(2 * n))
            sp_sq = c2.s_plus_at_one()
            rows.append(
                {
                    "name": "i(gamma,2) + 2 S+_{M^2}(1) - nu(gamma,2) >= n+2",
                    "lhs": i4 + 2 * sp_sq - nu4,
                    "rhs": n + 2,
                    "op": ">=",
                    "status": None,
                }
            )
        else:
            rows.append(
                {
                    "name": "i(gamma,2) + 2 S+_{M^2}(1) - nu(gamma,2) >= n+2",
                    "status": "skipped: hypotheses not certified",
                }
            )
    for r in rows:
        if r.get("status") is None:
            op = r.setdefault("op", "<=")
            holds = r["lhs"] <= r["rhs"] if op == "<=" else r["lhs"] >= r["rhs"]
            r["status"] = "pass" if holds else "fail"
    return rows
