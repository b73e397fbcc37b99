"""Index computations for symplectic paths relative to Lagrangian frames.

Three independent algorithms are provided for the L-index of a path:

* galerkin -- stabilized relative Morse index of the boundary-value
  form (the defining route, valid for degenerate endpoints too);
* winding -- phase tracking of det(U + iV) along the path extended by
  a certified in-stratum connecting path (nondegenerate endpoints);
* crossing -- kernel-dimension counting at the interior zeros of the
  relevant block determinant (needs a positive-definite block of B).

On top of these sit the omega-twisted indices of the doubled path, the
two-Lagrangian twisted index, splitting numbers, spectral profiles and
the mean index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import (
    LagrangianFrame,
    kernel_dimension,
    kernel_dimension_balanced,
    lagrangian_conjugator,
    standard_J,
    standard_N,
    subspace_intersection_dim,
    t_block,
    v_block,
)
from .galerkin import (
    DEFAULT_SCHEME,
    RelativeIndexResult,
    TruncationScheme,
    assemble_L_form,
    assemble_periodic_form,
    stabilized_relative_index,
)
from .paths import (
    CoefficientPath,
    SymplecticPath,
    conjugate_path_to_L0,
    iterate_endpoint,
    iterate_path,
    unit_path,
)

SPLITTING_EPS_FLOOR = 1e-4
SPECTRUM_UNIT_TOL = 1e-6


@dataclass(frozen=True)
class IndexReport:
    """An (index, nullity) pair with provenance."""

    index: int
    nullity: int
    lagrangian: str = "L0"
    omega: float | str = "1"
    algorithm: str = "galerkin"
    m_used: int = 0
    d_used: float = 0.0
    stabilized: bool = True

    def pair(self) -> tuple[int, int]:
        return self.index, self.nullity

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "nullity": self.nullity,
            "lagrangian": self.lagrangian,
            "omega": self.omega if isinstance(self.omega, str) else float(self.omega),
            "algorithm": self.algorithm,
            "m_used": self.m_used,
            "d_used": self.d_used,
            "stabilized": self.stabilized,
        }


def _frame(L, n: int) -> LagrangianFrame:
    if isinstance(L, LagrangianFrame):
        return L
    if L == "L0":
        return LagrangianFrame.L0(n)
    if L == "L1":
        return LagrangianFrame.L1(n)
    raise ValueError(f"unknown frame {L!r}")


def _conjugate_system(B: CoefficientPath, frame: LagrangianFrame) -> CoefficientPath:
    if frame.label == "L0":
        return B
    if frame.label == "L1":
        return B.l1_conjugated()
    return B.conjugated(lagrangian_conjugator(frame), kind_suffix="|conj")


# ---------------------------------------------------------------------------
# nullities
# ---------------------------------------------------------------------------


def nullity_L(gamma: SymplecticPath, L="L0", rtol: float = 1e-8) -> int:
    """dim ker of the V-block of the (conjugated) endpoint."""
    frame = _frame(L, gamma.n)
    end = conjugate_path_to_L0(gamma, frame).endpoint() if frame.label != "L0" else gamma.endpoint()
    return kernel_dimension(v_block(end), rtol)


def endpoint_nullity(end: np.ndarray, L: str = "L0", rtol: float = 1e-8) -> int:
    block = v_block(end) if L == "L0" else t_block(end)
    return kernel_dimension(block, rtol)


def twisted_nullity_geometric(end: np.ndarray, theta: float, rtol: float = 1e-8) -> int:
    """dim(gamma(1) L0 & e^{theta J} L0), the geometric route to nu_omega^{L0}."""
    n = end.shape[0] // 2
    U0 = np.vstack([np.zeros((n, n)), np.eye(n)])
    J = standard_J(n)
    rot = scipy.linalg.expm(theta * J)
    return subspace_intersection_dim(end @ U0, rot @ U0, rtol)


# ---------------------------------------------------------------------------
# galerkin routes
# ---------------------------------------------------------------------------


def index_L_galerkin(
    B: CoefficientPath,
    L="L0",
    scheme: TruncationScheme = DEFAULT_SCHEME,
    fold: int = 1,
    gamma: SymplecticPath | None = None,
) -> IndexReport:
    """(i_L, nu_L) of gamma^fold by the relative Morse index.

    I(A, A-B) = i_L(B) + n on the L0 form; general frames are reduced
    to L0 by conjugating the coefficient. The pure-A truncation count
    m*n is asserted on every assembly, and the kernel cluster of the
    truncations is pinned by the exact endpoint nullity (gamma, if
    given, must be the unit path of the conjugated system).
    """
    frame = _frame(L, B.n)
    Bc = _conjugate_system(B, frame)
    n = Bc.n
    g1 = gamma if gamma is not None else unit_path(Bc)
    end = iterate_endpoint(g1, fold) if fold != 1 else g1.endpoint()
    known_null = kernel_dimension_balanced(v_block(end))
    if np.max(np.abs(end)) > 3e7:
        # hyperbolic growth has eaten the elliptic content of the
        # endpoint in float64; the assembled spectrum must decide alone
        known_null = None
    Bf = Bc.rescaled_fold(fold) if fold != 1 else Bc
    assemble = lambda m: assemble_L_form(Bf, m, 0.0)
    res = stabilized_relative_index(
        assemble,
        Bf.norm_bound(),
        n,
        scheme,
        expect_neg_a=lambda m: m * n,
        known_null=known_null,
    )
    return IndexReport(
        index=res.index - n,
        nullity=res.nullity,
        lagrangian=frame.label,
        omega="1",
        algorithm="galerkin",
        m_used=res.m_used,
        d_used=res.d_used,
        stabilized=res.stabilized,
    )


def omega_index_L0(
    B: CoefficientPath,
    theta: float,
    scheme: TruncationScheme = DEFAULT_SCHEME,
    L="L0",
    endpoint: np.ndarray | None = None,
) -> IndexReport:
    """Twisted index pair (i^{L0}_omega, nu^{L0}_omega), theta in (0, pi).

    The nullity equals dim(gamma(1) L0 & e^{theta J} L0); that exact
    value pins the kernel cluster of the truncations, whose separation
    certificate is the cross-check. endpoint, if given, must be
    gamma(1) of the conjugated system.
    """
    if not (0.0 < theta < np.pi):
        raise ValueError("theta must lie strictly inside (0, pi)")
    frame = _frame(L, B.n)
    Bc = _conjugate_system(B, frame)
    n = Bc.n
    end = endpoint if endpoint is not None else unit_path(Bc).endpoint()
    geo = twisted_nullity_geometric(end, theta)
    assemble = lambda m: assemble_L_form(Bc, m, theta)
    res = stabilized_relative_index(
        assemble,
        Bc.norm_bound(),
        n,
        scheme,
        expect_neg_a=lambda m: m * n,
        known_null=geo,
    )
    return IndexReport(
        index=res.index,
        nullity=res.nullity,
        lagrangian=frame.label,
        omega=float(theta),
        algorithm="galerkin",
        m_used=res.m_used,
        d_used=res.d_used,
        stabilized=res.stabilized,
    )


def omega_index_periodic(
    B: CoefficientPath,
    phi: float,
    scheme: TruncationScheme = DEFAULT_SCHEME,
    gamma: SymplecticPath | None = None,
) -> IndexReport:
    """(i_omega, nu_omega) of the doubled path gamma^2, omega = e^{i phi}.

    For omega != 1 the relative index equals i_omega(gamma^2) directly;
    at omega = 1 the periodic form carries the same +n offset as the
    boundary-value form, so i_1 = I(A, A-B) - n. The nullity kernel is
    pinned by dim ker(gamma^2(2) - omega I).
    """
    phi = float(np.mod(phi, 2.0 * np.pi))
    n = B.n
    g = gamma if gamma is not None else unit_path(B)
    M = iterate_endpoint(g, 2)
    known_null = kernel_dimension(M - np.exp(1j * phi) * np.eye(2 * n))
    if np.max(np.abs(M)) > 1e6:
        known_null = None  # endpoint too ill-conditioned to trust as a hint
    assemble = lambda m: assemble_periodic_form(B, m, phi)
    res = stabilized_relative_index(
        assemble, 2.0 * B.norm_bound(), n, scheme, known_null=known_null
    )
    offset = n if phi == 0.0 else 0
    return IndexReport(
        index=res.index - offset,
        nullity=res.nullity,
        lagrangian="periodic",
        omega=float(phi),
        algorithm="galerkin",
        m_used=res.m_used,
        d_used=res.d_used,
        stabilized=res.stabilized,
    )


def relative_morse_index(
    assemble,
    norm_bound: float,
    n: int,
    scheme: TruncationScheme = DEFAULT_SCHEME,
) -> RelativeIndexResult:
    """Stabilized I(A, A-B) for a truncatable form handle.

    assemble(m) must return (Amat, Bmat, a_eigs) for the truncation of
    rank m; see galerkin.stabilized_relative_index.
    """
    return stabilized_relative_index(assemble, norm_bound, n, scheme)


# ---------------------------------------------------------------------------
# winding route
# ---------------------------------------------------------------------------


def _skew_generator_SO(Q: np.ndarray) -> np.ndarray:
    """K skew with expm(K) = Q for Q in SO(n), via the real Schur form."""
    n = Q.shape[0]
    T, Z = scipy.linalg.schur(Q, output="real")
    K = np.zeros((n, n))
    minus_ones = []
    i = 0
    while i < n:
        if i + 1 < n and abs(T[i + 1, i]) > 1e-10:
            theta = np.arctan2(T[i + 1, i], T[i, i])
            K[i, i + 1] = -theta
            K[i + 1, i] = theta
            i += 2
        else:
            if T[i, i] < 0:
                minus_ones.append(i)
            i += 1
    if len(minus_ones) % 2 != 0:
        raise ValueError("matrix is not in SO(n)")
    for a, b in zip(minus_ones[::2], minus_ones[1::2]):
        K[a, b] = -np.pi
        K[b, a] = np.pi
    return Z @ K @ Z.T


def connecting_path_to_stratum_base(Mend: np.ndarray, samples: int = 129) -> np.ndarray:
    """In-stratum path from Mend to M+ or M- (by the sign of det V).

    Uses the factorization M = [[I,0],[W,I]] [[0,V],[-V^{-T},0]]
    [[I,0],[Z,I]] with W = U V^{-1}, Z = V^{-1} S symmetric; scaling W
    and Z to zero leaves the V block untouched, after which V is
    carried to I (or diag(-1,1,..,1)) through invertible matrices by a
    polar path. det V never vanishes along the way.
    """
    n = Mend.shape[0] // 2
    S, V, U = Mend[:n, :n], Mend[:n, n:], Mend[n:, n:]
    detV = np.linalg.det(V)
    if abs(detV) < 1e-12:
        raise ValueError("endpoint is L0-degenerate; no in-stratum connecting path")
    W = 0.5 * ((U @ np.linalg.inv(V)) + (U @ np.linalg.inv(V)).T)
    Z = 0.5 * ((np.linalg.solve(V, S)) + (np.linalg.solve(V, S)).T)

    def middle(Vs):
        out = np.zeros((2 * n, 2 * n))
        out[:n, n:] = Vs
        out[n:, :n] = -np.linalg.inv(Vs).T
        return out

    def shear_lower(X):
        out = np.eye(2 * n)
        out[n:, :n] = X
        return out

    half = samples // 2
    path = []
    for s in np.linspace(0.0, 1.0, half, endpoint=False):
        path.append(shear_lower((1 - s) * W) @ middle(V) @ shear_lower((1 - s) * Z))
    # polar deformation of V itself
    Uv, sv, Vtv = np.linalg.svd(V)
    Qv = Uv @ Vtv
    Pv = Vtv.T @ np.diag(sv) @ Vtv
    Jn = np.eye(n)
    Jn[0, 0] = -1.0
    Qr = Qv if detV > 0 else Qv @ Jn
    K = _skew_generator_SO(Qr)
    for s in np.linspace(0.0, 1.0, samples - half):
        Ps = (1 - s) * Pv + s * np.eye(n)
        Qs = scipy.linalg.expm((1 - s) * K)
        Vs = (Qs if detV > 0 else Qs @ Jn) @ Ps
        path.append(middle(Vs))
    return np.array(path)


def _det_u_plus_iv(samples: np.ndarray) -> np.ndarray:
    n = samples.shape[-1] // 2
    return np.linalg.det(samples[..., n:, n:] + 1j * samples[..., :n, n:])


def _phase_increment(w: np.ndarray, max_step: float = 0.5 * np.pi) -> float:
    dphi = np.angle(w[1:] / w[:-1])
    if len(dphi) and np.max(np.abs(dphi)) >= max_step:
        raise RuntimeError("phase step exceeded pi/2; grid too coarse")
    return float(np.sum(dphi))


def _iterate_phase_increment(gamma: SymplecticPath, k: int) -> float:
    """Winding phase of det(U + iV) along gamma^k, assembled blockwise.

    Avoids materializing the k-fold sample array: each unit block is the
    base (or reflected) segment times a fixed tail, and only its
    determinant track survives. Tails are renormalized by a positive
    scalar (which cannot change any argument) so hyperbolic growth
    never overflows.
    """
    n = gamma.n
    N = standard_N(n)
    base = gamma.samples
    g1 = gamma.endpoint()
    second = N @ base[::-1] @ np.linalg.solve(g1, N @ g1)
    g2 = second[-1]
    total = 0.0
    last = None
    tail = np.eye(2 * n)
    for j in range(k):
        seg = base if j % 2 == 0 else second
        w = _det_u_plus_iv(seg @ tail)
        if last is not None:
            total += float(np.angle(w[0] / last))  # zero up to roundoff
        total += _phase_increment(w)
        last = w[-1]
        if j % 2 == 1:
            tail = tail @ g2
            tail = tail / np.max(np.abs(tail))
    return total


def index_L_winding_folded(
    B: CoefficientPath, k: int, L="L0", gamma: SymplecticPath | None = None
) -> IndexReport:
    """i_L(gamma^k) by winding, without materializing the iterate."""
    frame = _frame(L, B.n)
    Bc = _conjugate_system(B, frame)
    g = gamma if gamma is not None else unit_path(Bc)
    n = g.n
    end = iterate_endpoint(g, k)
    if kernel_dimension_balanced(v_block(end)) != 0:
        raise ValueError("endpoint is degenerate; use the galerkin route")
    J = standard_J(n)
    pre_thetas = np.linspace(0.5 * np.pi, 0.0, max(65, 32 * n + 1))
    prepath = np.array([scipy.linalg.expm(th * J) for th in pre_thetas])
    beta = connecting_path_to_stratum_base(end, samples=max(257, 64 * n + 1))
    total = _phase_increment(_det_u_plus_iv(prepath))
    w_pre_end = _det_u_plus_iv(prepath[-1:])[0]
    total += float(np.angle(_det_u_plus_iv(g.samples[:1])[0] / w_pre_end))
    total += _iterate_phase_increment(g, k)
    w_path_end = _det_u_plus_iv(end[None, :, :])[0]
    total += float(np.angle(_det_u_plus_iv(beta[:1])[0] / w_path_end))
    total += _phase_increment(_det_u_plus_iv(beta))
    raw = -total / np.pi
    index = int(np.round(raw))
    if abs(raw - index) > 0.05:
        raise ArithmeticError(f"winding did not quantize: {raw}")
    return IndexReport(
        index=index,
        nullity=0,
        lagrangian=frame.label,
        omega="1",
        algorithm="winding",
        m_used=0,
        d_used=0.0,
        stabilized=True,
    )


def index_L_winding(gamma: SymplecticPath, L="L0") -> IndexReport:
    """i_L by winding of det(U + iV) along prepath * gamma * beta.

    Requires a nondegenerate endpoint (nu_L = 0). The prepath runs from
    -M+ ( = J) to the identity through exp(theta J); beta is the
    certified in-stratum connecting path to M+ or M-.
    """
    frame = _frame(L, gamma.n)
    g = conjugate_path_to_L0(gamma, frame)
    n = g.n
    if nullity_L(g, "L0") != 0:
        raise ValueError("endpoint is degenerate; use the galerkin route")
    J = standard_J(n)
    pre_thetas = np.linspace(0.5 * np.pi, 0.0, max(65, 32 * n + 1))
    prepath = np.array([scipy.linalg.expm(th * J) for th in pre_thetas])
    beta = connecting_path_to_stratum_base(g.endpoint(), samples=max(257, 64 * n + 1))
    sigma = np.linalg.svd(beta[:, :n, n:], compute_uv=False)
    if np.min(sigma[:, -1]) <= 1e-10 * np.max(sigma):
        raise RuntimeError("connecting path grazed the degenerate stratum")
    total = 0.0
    for piece in (prepath, g.samples, beta):
        for attempt in range(8):
            try:
                total += _phase_increment(_det_u_plus_iv(piece))
                break
            except RuntimeError:
                fine = np.empty((2 * len(piece) - 1,) + piece.shape[1:])
                fine[::2] = piece
                fine[1::2] = 0.5 * (piece[:-1] + piece[1:])  # chordal midpoints
                piece = fine
        else:
            raise RuntimeError("phase step exceeded pi/2 after maximal refinement")
    raw = -total / np.pi
    index = int(np.round(raw))
    if abs(raw - index) > 0.02:
        raise ArithmeticError(f"winding did not quantize: {raw}")
    return IndexReport(
        index=index,
        nullity=0,
        lagrangian=frame.label,
        omega="1",
        algorithm="winding",
        m_used=0,
        d_used=0.0,
        stabilized=True,
    )


# ---------------------------------------------------------------------------
# crossing route
# ---------------------------------------------------------------------------


def _local_flow(B: CoefficientPath, g0: np.ndarray, s0: float, s: float, nsub: int = 24):
    """gamma(s) from a known sample gamma(s0) by short midpoint steps.

    Integrates the brake extension, so s may exceed 1.
    """
    n = B.n
    J = standard_J(n)
    I = np.eye(2 * n)
    h = (s - s0) / nsub
    g = g0
    if h == 0.0:
        return g0
    mids = s0 + (np.arange(nsub) + 0.5) * h
    Bm = B.unit_extension(mids)
    for i in range(nsub):
        X = (0.5 * h) * (J @ Bm[i])
        g = np.linalg.solve(I - X, (I + X) @ g)
    return g


def _refine_crossing(B, g_base, t_base, t_lo, t_hi, block: str, iters: int = 36):
    """Golden-section minimize sigma_min of the block over [t_lo, t_hi].

    g_base is the path sample at t_base (flows run backward too); the
    returned matrix is re-evaluated with a finer local flow so the
    kernel threshold decision is not limited by search-step error.
    """
    n = B.n

    def smin(t):
        g = _local_flow(B, g_base, t_base, t, nsub=12)
        blk = v_block(g) if block == "V" else t_block(g)
        return np.linalg.svd(blk, compute_uv=False)[-1]

    invphi = (np.sqrt(5.0) - 1) / 2
    a, b = t_lo, t_hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = smin(c), smin(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = smin(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = smin(d)
    t_star = 0.5 * (a + b)
    return t_star, _local_flow(B, g_base, t_base, t_star, nsub=48)


def index_L_crossings(
    B: CoefficientPath,
    L="L0",
    fold: int = 1,
    gamma: SymplecticPath | None = None,
    rtol: float = 1e-8,
    endpoint_guard: float = 1e-7,
) -> IndexReport:
    """i_L as the sum of interior crossing nullities (positive-block route).

    Valid when the b22 block (L0) resp. b11 block (L1) of B(t) is
    positive definite; crossings are located as interior minima of the
    smallest singular value of the V (resp. T) block along gamma^fold
    and counted with their kernel dimension. A zero within tolerance of
    either endpoint is excluded (the sum is over the open interval).
    """
    frame = _frame(L, B.n)
    n = B.n
    if frame.label not in ("L0", "L1"):
        raise ValueError("crossing route supports L0 and L1 frames")
    block = "V" if frame.label == "L0" else "T"
    # positivity precondition on a grid
    sgrid = np.linspace(0.0, 1.0, 201)
    vals = B.unit_extension(sgrid)
    sub = vals[:, n:, n:] if block == "V" else vals[:, :n, :n]
    min_eig = min(np.linalg.eigvalsh(s)[0] for s in sub)
    if min_eig <= 0:
        raise ValueError(
            f"crossing route needs a positive definite {'b22' if block == 'V' else 'b11'} "
            f"block (min eigenvalue {min_eig:.3e})"
        )
    if gamma is not None and abs(gamma.T - fold) < 1e-12:
        g = gamma
    else:
        g1 = unit_path(B)
        g = iterate_path(g1, B, fold) if fold != 1 else g1
    blocks = g.samples[:, :n, n:] if block == "V" else g.samples[:, n:, :n]
    sigma = np.linalg.svd(blocks, compute_uv=False)
    smin = sigma[:, -1]
    scale = max(float(np.max(sigma)), 1.0)
    slope = float(np.max(np.abs(np.diff(smin)))) if len(smin) > 1 else 0.0
    thresh = max(4.0 * slope, 1e3 * rtol * scale)
    T = g.T
    total = 0
    for i in range(1, len(smin) - 1):
        if smin[i] < thresh and smin[i] <= smin[i - 1] and smin[i] < smin[i + 1]:
            t_star, g_star = _refine_crossing(
                B, g.samples[i], g.grid[i], g.grid[i - 1], g.grid[i + 1], block
            )
            blk = v_block(g_star) if block == "V" else t_block(g_star)
            sv = np.linalg.svd(blk, compute_uv=False)
            if sv[-1] > rtol * scale:
                continue  # shallow dip, not a crossing
            if t_star <= endpoint_guard * T or t_star >= T * (1.0 - endpoint_guard):
                continue  # boundary zeros are excluded by the strict inequality
            total += int(np.sum(sv <= rtol * scale))
    end_null = kernel_dimension(blocks[-1], rtol)
    return IndexReport(
        index=total,
        nullity=end_null,
        lagrangian=frame.label,
        omega="1",
        algorithm="crossing",
        m_used=0,
        d_used=0.0,
        stabilized=True,
    )


# ---------------------------------------------------------------------------
# spectra, splitting numbers, profiles
# ---------------------------------------------------------------------------


def unit_circle_spectrum(M: np.ndarray, tol: float = SPECTRUM_UNIT_TOL):
    """Sorted (angle, multiplicity) pairs of unit-circle eigenvalues."""
    eigs = np.linalg.eigvals(M)
    on_circle = eigs[np.abs(np.abs(eigs) - 1.0) <= tol]
    angles = np.mod(np.angle(on_circle), 2.0 * np.pi)
    angles[angles > 2.0 * np.pi - 1e-9] = 0.0
    out: list[list[float]] = []
    for a in np.sort(angles):
        if out and abs(a - out[-1][0]) <= 1e-6:
            out[-1][1] += 1
            continue
        out.append([float(a), 1])
    return [(a, int(m)) for a, m in out]


def _circular_gap(theta0: float, angles) -> float:
    """Distance from theta0 to the nearest other spectral angle."""
    best = 2.0 * np.pi
    for a, _ in angles:
        for shift in (-2.0 * np.pi, 0.0, 2.0 * np.pi):
            d = abs(a + shift - theta0)
            if d > 1e-9:
                best = min(best, d)
    return best


def splitting_numbers(
    B: CoefficientPath,
    theta0: float,
    eps: float | None = None,
    scheme: TruncationScheme = DEFAULT_SCHEME,
    gamma: SymplecticPath | None = None,
    index_at: int | None = None,
) -> tuple[int, int]:
    """(S+, S-) of M = gamma^2(2) at omega = e^{i theta0}.

    One-sided limits are evaluated at omega e^{+-i eps} with eps a
    quarter of the circular gap to the nearest other spectral angle
    (floor 1e-4), and re-checked at eps/2.
    """
    g = gamma if gamma is not None else unit_path(B)
    M = iterate_endpoint(g, 2)
    angles = unit_circle_spectrum(M)
    if not any(abs(a - np.mod(theta0, 2 * np.pi)) <= 1e-6 for a, _ in angles):
        return 0, 0  # omega off the spectrum: i_omega locally constant
    gap = _circular_gap(theta0, angles)
    if eps is None:
        eps = 0.25 * gap
        if eps < SPLITTING_EPS_FLOOR:
            raise ValueError(f"spectral gap {gap:.2e} too small for splitting numbers")
    elif eps >= 0.5 * gap:
        raise ValueError("requested eps reaches the neighboring spectral angle")
    i0 = (
        index_at
        if index_at is not None
        else omega_index_periodic(B, theta0, scheme, gamma=g).index
    )
    values = {}
    for e in (eps, 0.5 * eps):
        ip = omega_index_periodic(B, np.mod(theta0 + e, 2 * np.pi), scheme, gamma=g).index
        im = omega_index_periodic(B, np.mod(theta0 - e, 2 * np.pi), scheme, gamma=g).index
        values[e] = (ip - i0, im - i0)
    if values[eps] != values[0.5 * eps]:
        raise ArithmeticError(
            f"splitting numbers unstable between eps={eps:g} and eps/2: "
            f"{values[eps]} vs {values[0.5 * eps]}"
        )
    return values[eps]


@dataclass(frozen=True)
class SpectralProfile:
    """Splitting data of the end matrix M = gamma^2(2)."""

    M: np.ndarray = field(repr=False)
    arguments: tuple[float, ...]
    S_plus: dict
    S_minus: dict
    C: int
    i1: int
    nu1: int

    def splitting(self, theta: float) -> tuple[int, int]:
        for a in self.arguments:
            if abs(a - np.mod(theta, 2 * np.pi)) <= 1e-8:
                return self.S_plus[a], self.S_minus[a]
        return 0, 0

    def s_plus_at_one(self) -> int:
        return self.S_plus.get(0.0, 0)


def spectral_profile(
    B: CoefficientPath,
    scheme: TruncationScheme = DEFAULT_SCHEME,
    gamma: SymplecticPath | None = None,
) -> SpectralProfile:
    """Locate the unit-circle spectrum of gamma^2(2) and compute all
    splitting numbers, C(M), and the periodic index at omega = 1."""
    g = gamma if gamma is not None else unit_path(B)
    M = iterate_endpoint(g, 2)
    angles = unit_circle_spectrum(M)
    rep1 = omega_index_periodic(B, 0.0, scheme, gamma=g)
    s_plus: dict[float, int] = {}
    s_minus: dict[float, int] = {}
    for a, _mult in angles:
        # rep1.index is i_1 with its +n offset already applied, matching
        # the splitting-number definition at omega = 1
        base = rep1.index if a == 0.0 else omega_index_periodic(B, a, scheme, gamma=g).index
        sp, sm = splitting_numbers(B, a, scheme=scheme, gamma=g, index_at=base)
        s_plus[a] = sp
        s_minus[a] = sm
    # reflection identity S+(theta) = S-(2 pi - theta) for interior angles
    for a in s_plus:
        if a == 0.0:
            continue
        mirror = 2.0 * np.pi - a
        match = [b for b in s_plus if abs(b - mirror) <= 1e-8]
        if match and s_plus[a] != s_minus[match[0]]:
            raise ArithmeticError("splitting-number reflection identity violated")
    C = int(sum(s_minus[a] for a in s_minus if a != 0.0))
    return SpectralProfile(
        M=M,
        arguments=tuple(a for a, _ in angles),
        S_plus=s_plus,
        S_minus=s_minus,
        C=C,
        i1=rep1.index,
        nu1=rep1.nullity,
    )


def mean_index_closed_form(profile: SpectralProfile) -> float:
    """(1/2)(i(gamma^2) + S+_M(1) - C(M)) + sum (theta/2pi) S-_M."""
    total = 0.5 * (profile.i1 + profile.s_plus_at_one() - profile.C)
    for a in profile.arguments:
        if a != 0.0:
            total += (a / (2.0 * np.pi)) * profile.S_minus[a]
    return float(total)


def mean_index_L0(
    B: CoefficientPath,
    k_max: int = 64,
    scheme: TruncationScheme = DEFAULT_SCHEME,
    profile: SpectralProfile | None = None,
) -> dict:
    """Mean L0-index: i_{L0}(gamma^k)/k at k = k_max next to the closed form."""
    if k_max < 4:
        raise ValueError("k_max must be >= 4")
    prof = profile if profile is not None else spectral_profile(B, scheme)
    closed = mean_index_closed_form(prof)
    g1 = unit_path(B)
    growth = float(np.max(np.abs(g1.endpoint())))
    if growth**k_max < 1e8:
        # iterate stays representable: the sample-scan route is cheapest
        try:
            rep = index_L_crossings(B, "L0", fold=k_max)
        except ValueError:
            rep = index_L_galerkin(B, "L0", scheme, fold=k_max, gamma=g1)
    else:
        # hyperbolic folds overflow float64 sample tracks; the rescaled
        # boundary-value form is assembled in closed form and never grows
        rep = index_L_galerkin(B, "L0", scheme, fold=k_max, gamma=g1)
    ratio = rep.index / k_max
    return {
        "k_max": k_max,
        "i_L0_at_k": rep.index,
        "ratio": ratio,
        "closed_form": closed,
        "gap": abs(ratio - closed),
    }


# ---------------------------------------------------------------------------
# omega scans (locality and sandwich checks)
# ---------------------------------------------------------------------------


def twisted_jump_candidates(end: np.ndarray) -> list[float]:
    """Angles in (0, pi) where gamma(1) L0 can meet e^{theta J} L0.

    These are half the arguments of the spectrum of the endpoint
    unitary Q = (U - iV)(U + iV)^{-1}.
    """
    n = end.shape[0] // 2
    U, V = end[n:, n:], end[:n, n:]
    Q = (U - 1j * V) @ np.linalg.inv(U + 1j * V)
    out = []
    for lam in np.linalg.eigvals(Q):
        # nu_theta > 0 iff e^{2 i theta} is an eigenvalue of Q
        half = 0.5 * np.mod(np.angle(lam), 2.0 * np.pi)
        if 1e-9 < half < np.pi - 1e-9:
            out.append(float(half))
    return sorted(set(np.round(out, 12)))


def scan_L_omega_indices(
    B: CoefficientPath,
    L="L0",
    grid_points: int = 180,
    scheme: TruncationScheme = DEFAULT_SCHEME,
    refine_eps: float = 1e-4,
    endpoint: np.ndarray | None = None,
) -> list[dict]:
    """i^{L0}_omega over a theta grid plus refinements at jump candidates.

    Grid angles are interior to (0, pi); candidate jump angles from the
    endpoint unitary are added together with two-sided probes. All
    angles are assembled jointly per truncation size and stabilized
    together; the twisted nullity is cross-checked geometrically at
    every stabilized angle.
    """
    from .galerkin import assemble_L_form_batch, batched_window_counts
    from .paths import TrigSeries

    frame = _frame(L, B.n)
    Bc = _conjugate_system(B, frame)
    end = endpoint if endpoint is not None and frame.label == "L0" else unit_path(Bc).endpoint()
    thetas = set(float(t) for t in np.linspace(0.0, np.pi, grid_points + 2)[1:-1])
    cands = twisted_jump_candidates(end)
    # probes land inside the constancy plateaus: an eighth of the gap
    # between degenerate angles, but no tighter than refine_eps
    all_angles = [0.0] + cands + [np.pi]
    min_gap = min(b - a for a, b in zip(all_angles, all_angles[1:])) if cands else np.pi
    eps = max(refine_eps, min(5e-3, min_gap / 8.0))
    for cand in cands:
        for t in (cand - eps, cand, cand + eps):
            if 1e-9 < t < np.pi - 1e-9:
                thetas.add(float(t))
    thetas = np.array(sorted(thetas))
    geos = [twisted_nullity_geometric(end, t) for t in thetas]
    if not isinstance(Bc.unit, TrigSeries):
        reports = [omega_index_L0(Bc, t, scheme, "L0", endpoint=end) for t in thetas]
        results = [(r.index, r.nullity, r.stabilized) for r in reports]
    else:
        from .galerkin import STRONG_GAP_RTOL, ZERO_CLUSTER_RTOL, informed_window_locks

        n = Bc.n
        m0, step, m_max = scheme.resolve(Bc.norm_bound(), n)
        window = scheme.stabilization_window
        give_up = window + 5  # hopeless rows stop burning sweeps early
        histories: list[list[tuple]] = [[] for _ in thetas]
        heuristics: list[list[tuple]] = [[] for _ in thetas]
        done = np.zeros(len(thetas), dtype=bool)
        results = [None] * len(thetas)
        m = m0
        sweeps = 0
        while m <= m_max and not np.all(done):
            active = np.flatnonzero(~done)
            Amats, Bmats, a_eigs = assemble_L_form_batch(Bc, m, thetas[active])
            h_eigs = np.linalg.eigvalsh(Amats - Bmats)
            active_geos = [geos[i] for i in active]
            counts = batched_window_counts(h_eigs, a_eigs, known_nulls=active_geos)
            heur = batched_window_counts(h_eigs, a_eigs, known_nulls=None)
            for pos, i in enumerate(active):
                rel, null, ok, cluster, scale = counts[pos]
                if ok:
                    histories[i].append((rel, null, m, 0.0, cluster, scale))
                rel_h, null_h, ok_h, small_h, scale_h = heur[pos]
                if ok_h:
                    strong = small_h <= ZERO_CLUSTER_RTOL * scale_h or (
                        small_h >= STRONG_GAP_RTOL * scale_h
                    )
                    heuristics[i].append((rel_h, null_h, strong))
                if informed_window_locks(histories[i], window, geos[i]):
                    done[i] = True
                    results[i] = (histories[i][-1][0], histories[i][-1][1], True)
                elif (
                    len(heuristics[i]) >= window
                    and all(s for _, _, s in heuristics[i][-window:])
                    and len({(r, nl) for r, nl, _ in heuristics[i][-window:]}) == 1
                ):
                    done[i] = True
                    results[i] = (heuristics[i][-1][0], heuristics[i][-1][1], True)
                elif sweeps + 1 >= give_up:
                    done[i] = True  # reported unstabilized below
            m += step
            sweeps += 1
        for i in range(len(thetas)):
            if results[i] is None:
                h = histories[i] or [(r, nl, 0, 0.0, 0.0, 1.0) for r, nl, _ in heuristics[i][-1:]]
                results[i] = (h[-1][0], h[-1][1], False) if h else (0, 0, False)
    out = []
    for theta, (idx, null, stab) in zip(thetas, results):
        if stab:
            geo = twisted_nullity_geometric(end, theta)
            if geo != null:
                raise ArithmeticError(
                    f"twisted nullity mismatch at theta={theta:.8g}: {null} vs {geo}"
                )
        out.append(
            {"theta": float(theta), "index": int(idx), "nullity": int(null), "stabilized": stab}
        )
    return out
