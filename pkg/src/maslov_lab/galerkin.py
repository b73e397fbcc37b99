"""Galerkin truncations of the index forms and eigenvalue counting.

Two families of quadratic forms are assembled in orthonormal Fourier
bases:

* the L0 boundary-condition form on [0, 1] (optionally twisted by
  exp(theta*t*J), theta in [0, pi)) with basis exp((theta + j*pi)tJ)
  (0, e_i), |j| <= m -- a real symmetric matrix of size n(2m+1);
* the periodic form over [0, 2] for the doubled path, twisted by a
  unit-circle parameter omega = exp(i*phi), with scalar-exponential
  basis exp(i(phi/2 + j*pi)t) c -- a complex Hermitian matrix of size
  2n(2m+1) built from the brake extension of the coefficient.

The relative Morse index I(A, A-B) is the stabilized difference of
d-window negative counts between the assembled form and the pure-A
truncation, with d chosen under a quarter of the smallest nonzero
eigenvalue magnitude of either operator and re-estimated per m.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import trig
from .core import standard_J
from .paths import CoefficientPath, TabulatedCoefficient, TrigSeries, eval_brake_extension

D_CAP = 0.1
ZERO_CLUSTER_RTOL = 1e-7


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------


def _weights(m: int) -> np.ndarray:
    j = np.arange(-m, m + 1)
    return 1.0 / np.sqrt(1.0 + np.abs(j))


def _gauss_nodes(pieces: int, order: int = 10):
    """Composite Gauss-Legendre nodes/weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, pieces + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _blocks(C: np.ndarray, n: int):
    return C[:n, :n], C[:n, n:], C[n:, :n], C[n:, n:]


def _l_entry_grids(cc, ss, cs, sc, b11, b12, b21, b22):
    """Kron the (j', j) moment grids with the n x n coefficient blocks."""
    return (
        np.kron(ss, b11)
        - np.kron(sc, b12)
        - np.kron(cs, b21)
        + np.kron(cc, b22)
    )


def assemble_L_form(B, m: int, theta: float = 0.0):
    """Truncated (A, B) pair of the L0 form, orthonormal basis.

    B may be a CoefficientPath (its unit coefficient is used), a
    TrigSeries or a TabulatedCoefficient. Returns (Amat, Bmat, a_eigs)
    with the form matrix Amat - Bmat, all real symmetric.
    """
    unit = B.unit if isinstance(B, CoefficientPath) else B
    n = unit.n
    j = np.arange(-m, m + 1)
    alpha = theta + j * np.pi
    w = _weights(m)
    a_diag = np.repeat(alpha / (1.0 + np.abs(j)), n)
    Amat = np.diag(a_diag)

    Bmat = np.zeros((n * (2 * m + 1), n * (2 * m + 1)))
    if isinstance(unit, TrigSeries):
        beta = alpha[:, None]
        al = alpha[None, :]
        for kind, mu, C in unit.terms():
            cc, ss, cs, sc = trig.pair_moments(kind, mu, al, beta)
            b11, b12, b21, b22 = _blocks(C, n)
            Bmat += _l_entry_grids(cc, ss, cs, sc, b11, b12, b21, b22)
    elif isinstance(unit, TabulatedCoefficient):
        pieces = max(len(unit.grid) - 1, m + 4)
        t, wq = _gauss_nodes(pieces)
        vals = unit(t)
        b11, b12 = vals[:, :n, :n], vals[:, :n, n:]
        b21, b22 = vals[:, n:, :n], vals[:, n:, n:]
        ca, sa = np.cos(np.outer(t, alpha)), np.sin(np.outer(t, alpha))
        wc, ws = wq[:, None] * ca, wq[:, None] * sa
        # row index p carries the beta factor, column index q the alpha factor
        SS = np.einsum("tp,tq,tik->piqk", ws, sa, b11)
        SC = np.einsum("tp,tq,tik->piqk", ws, ca, b12)
        CS = np.einsum("tp,tq,tik->piqk", wc, sa, b21)
        CC = np.einsum("tp,tq,tik->piqk", wc, ca, b22)
        total = SS - SC - CS + CC
        Bmat = total.reshape(n * (2 * m + 1), n * (2 * m + 1))
    else:
        raise TypeError(f"unsupported coefficient type {type(unit)!r}")

    scale = np.repeat(w, n)
    Bmat = Bmat * np.outer(scale, scale)
    Bmat = 0.5 * (Bmat + Bmat.T)
    return Amat, Bmat, a_diag


def assemble_L_form_batch(B, m: int, thetas: np.ndarray):
    """Stacked L0-form truncations over an array of twist angles.

    Returns (Amats, Bmats, a_eigs) with leading axis indexing thetas;
    only trig-series coefficients are supported (the batch is used by
    the scan machinery, which the corpus runs on closed forms).
    """
    unit = B.unit if isinstance(B, CoefficientPath) else B
    if not isinstance(unit, TrigSeries):
        raise TypeError("batched assembly needs a trig-series coefficient")
    n = unit.n
    thetas = np.asarray(thetas, dtype=float)
    K = len(thetas)
    j = np.arange(-m, m + 1)
    alpha = thetas[:, None] + j[None, :] * np.pi  # (K, 2m+1)
    w = _weights(m)
    a_eigs = alpha / (1.0 + np.abs(j))[None, :]
    N = n * (2 * m + 1)
    Bmats = np.zeros((K, N, N))
    al = alpha[:, None, :]
    beta = alpha[:, :, None]
    for kind, mu, C in unit.terms():
        cc, ss, cs, sc = trig.pair_moments(kind, mu, al, beta)
        b11, b12, b21, b22 = _blocks(C, n)
        total = (
            np.einsum("tpq,ik->tpiqk", ss, b11)
            - np.einsum("tpq,ik->tpiqk", sc, b12)
            - np.einsum("tpq,ik->tpiqk", cs, b21)
            + np.einsum("tpq,ik->tpiqk", cc, b22)
        )
        Bmats += total.reshape(K, N, N)
    scale = np.repeat(w, n)
    Bmats *= np.outer(scale, scale)[None, :, :]
    Bmats = 0.5 * (Bmats + np.transpose(Bmats, (0, 2, 1)))
    Amats = np.zeros((K, N, N))
    diag = np.repeat(a_eigs, n, axis=1)
    idx = np.arange(N)
    Amats[:, idx, idx] = diag
    return Amats, Bmats, np.repeat(a_eigs, n, axis=1)


def batched_window_counts(
    h_eigs: np.ndarray, a_eigs: np.ndarray, d_cap: float = D_CAP, known_nulls=None
):
    """Per-row (rel, null, ok, cluster, scale) for stacked eigenvalue
    arrays; known_nulls optionally pins each row's kernel."""
    out = []
    for i, (he, ae) in enumerate(zip(h_eigs, a_eigs)):
        k = None if known_nulls is None else known_nulls[i]
        rel, null, d, ok, _, cluster, scale = _window_counts(he, ae, d_cap, k)
        out.append((rel, null, ok, cluster, scale))
    return out


def periodic_fourier_blocks(B: CoefficientPath, kmax: int) -> dict[int, np.ndarray]:
    """F(k) = int_0^2 Bext(t) exp(i k pi t) dt for |k| <= kmax."""
    unit = B.unit
    n = B.n
    out = {k: np.zeros((2 * n, 2 * n), dtype=complex) for k in range(-kmax, kmax + 1)}
    if isinstance(unit, TrigSeries) and unit.is_structurally_brake():
        for l, C in unit.cos_terms:
            if l == 0:
                out[0] += 2.0 * C
            elif l <= kmax:
                out[l] += C
                out[-l] += C
        for l, S in unit.sin_terms:
            if l != 0 and l <= kmax:
                out[l] += 1j * S
                out[-l] += -1j * S
        return out
    # generic route: quadrature of the reflected extension on [0, 2]
    pieces = max(2 * kmax + 8, 16)
    if isinstance(unit, TabulatedCoefficient):
        pieces = max(pieces, 2 * (len(unit.grid) - 1))
    t, w = _gauss_nodes(pieces)
    t = 2.0 * t
    w = 2.0 * w
    vals = eval_brake_extension(unit, t)
    for k in range(-kmax, kmax + 1):
        phases = w * np.exp(1j * k * np.pi * t)
        out[k] = np.einsum("t,tij->ij", phases, vals)
    return out


def assemble_periodic_form(B: CoefficientPath, m: int, phi: float):
    """Truncated (A, B) pair of the omega-twisted periodic form on [0,2].

    omega = exp(i phi), phi in [0, 2 pi). Complex Hermitian matrices of
    size 2n(2m+1); basis functions satisfy u(t + 2) = omega u(t).
    """
    if not B.symmetry_certified:
        raise ValueError("periodic forms need a certified brake-symmetric coefficient")
    n = B.n
    j = np.arange(-m, m + 1)
    w = _weights(m)
    nu = phi / 2.0 + j * np.pi
    J = standard_J(n)
    miJ = -1j * J
    dim = 2 * n * (2 * m + 1)
    Amat = np.zeros((dim, dim), dtype=complex)
    for idx, jj in enumerate(j):
        s = slice(2 * n * idx, 2 * n * (idx + 1))
        Amat[s, s] = (2.0 * nu[idx] / (1.0 + abs(jj))) * miJ
    a_eigs = np.concatenate([
        np.repeat(2.0 * nu / (1.0 + np.abs(j)), n),
        np.repeat(-2.0 * nu / (1.0 + np.abs(j)), n),
    ])

    F = periodic_fourier_blocks(B, 2 * m)
    Bmat = np.zeros((dim, dim), dtype=complex)
    for r, jr in enumerate(j):
        for c, jc in enumerate(j):
            blk = F[jc - jr]
            if np.any(blk):
                Bmat[2 * n * r : 2 * n * (r + 1), 2 * n * c : 2 * n * (c + 1)] = (
                    blk * (w[r] * w[c])
                )
    Bmat = 0.5 * (Bmat + Bmat.conj().T)
    return Amat, Bmat, a_eigs


# ---------------------------------------------------------------------------
# counting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncationScheme:
    """Controls the m-sweep of the Galerkin truncations.

    m_start/m_step default to values scaled by the coefficient norm.
    d_policy is "auto" (quarter of the smallest nonzero eigenvalue
    magnitude of A and A-B, capped) or a fixed positive float.
    """

    m_start: int | None = None
    m_step: int | None = None
    m_max: int = 320
    stabilization_window: int = 3
    d_policy: float | str = "auto"

    def resolve(self, norm_bound: float, n: int) -> tuple[int, int, int]:
        """Effective (m_start, m_step, m_max); m_max is a hard cap."""
        m0 = self.m_start
        if m0 is None:
            m0 = max(8, int(np.ceil(1.3 * norm_bound / np.pi)) + 4, n)
        m0 = min(m0, self.m_max)
        step = self.m_step or max(4, m0 // 3)
        return m0, step, self.m_max


DEFAULT_SCHEME = TruncationScheme()


@dataclass(frozen=True)
class RelativeIndexResult:
    index: int
    nullity: int
    m_used: int
    d_used: float
    stabilized: bool


def _window_counts(h_eigs: np.ndarray, a_eigs: np.ndarray, d_cap: float, known_null=None):
    """(relative negative count, null count, d, ok, neg_a) for one truncation.

    With known_null = k (the exact kernel dimension from the Floquet /
    endpoint route), the k smallest magnitudes are treated as the
    converging kernel cluster and d is set a quarter under the (k+1)-th;
    the certificate is that the cluster sits strictly inside the window.
    Without it, a relative zero-cluster threshold is used.
    """
    scale = max(1.0, float(np.max(np.abs(h_eigs))), float(np.max(np.abs(a_eigs))))
    amags = np.abs(a_eigs)
    a_nonzero = amags[amags > 1e-12 * scale]
    a_gap = float(np.min(a_nonzero)) if len(a_nonzero) else np.inf
    hmags = np.sort(np.abs(h_eigs))
    if known_null is not None:
        k = int(known_null)
        cluster = float(hmags[k - 1]) if k > 0 else 0.0
        rest = hmags[k] if k < len(hmags) else np.inf
        d = min(d_cap, 0.25 * min(rest, a_gap))
        ok = cluster < d
        null = int(np.sum(np.abs(h_eigs) < d))
        ok = ok and null == k
        neg = int(np.sum(h_eigs <= -d))
        neg_a = int(np.sum(a_eigs <= -d))
        return neg - neg_a, null, d, ok, neg_a, cluster, scale
    z0 = ZERO_CLUSTER_RTOL * scale
    nonzero = hmags[hmags > z0]
    gap = min(float(np.min(nonzero)) if len(nonzero) else np.inf, a_gap)
    d = min(d_cap, 0.25 * gap)
    ok = d > 2.0 * z0
    null = int(np.sum(np.abs(h_eigs) < d))
    neg = int(np.sum(h_eigs <= -d))
    neg_a = int(np.sum(a_eigs <= -d))
    return neg - neg_a, null, d, ok, neg_a, float(hmags[0]) if len(hmags) else 0.0, scale


STRONG_GAP_RTOL = 1e-4


def stabilized_relative_index(
    assemble,
    norm_bound: float,
    n: int,
    scheme: TruncationScheme = DEFAULT_SCHEME,
    expect_neg_a=None,
    known_null=None,
) -> RelativeIndexResult:
    """Sweep truncation sizes until the d-window counts stabilize.

    assemble(m) -> (Amat, Bmat, a_eigs). The relative index is
    m_d^-(A-B) - m_d^-(A); the nullity is the d-window count, and a
    window of consecutive agreeing m values is required.

    Two counting channels run side by side. The informed channel pins
    the kernel cluster to known_null (the endpoint/Floquet value) and
    certifies its separation; it wins when its certificate holds, which
    handles truncation kernels that converge slowly. The heuristic
    channel classifies zeros by a relative threshold and may override a
    wrong hint, but only when the spectrum shows a strong gap (an
    ill-conditioned endpoint can misreport a kernel where the exactly
    assembled spectrum has a plainly nonzero eigenvalue).
    """
    m0, step, m_max = scheme.resolve(norm_bound, n)
    d_cap = scheme.d_policy if isinstance(scheme.d_policy, float) else D_CAP
    win = scheme.stabilization_window
    hist_inf: list[tuple[int, int, int, float, float, float]] = []
    hist_heu: list[tuple[int, int, int, float, bool]] = []
    m = m0
    while m <= m_max:
        Amat, Bmat, a_eigs = assemble(m)
        h_eigs = np.linalg.eigvalsh(Amat - Bmat)
        if known_null is not None:
            rel, null, d, ok, neg_a, cluster, scale = _window_counts(
                h_eigs, a_eigs, d_cap, known_null
            )
            if expect_neg_a is not None and ok and neg_a != expect_neg_a(m):
                raise AssertionError(
                    f"pure-A truncation count {neg_a} != {expect_neg_a(m)} at m={m}"
                )
            if ok:
                hist_inf.append((rel, null, m, d, cluster, scale))
        rel_h, null_h, d_h, ok_h, neg_a_h, small_h, scale_h = _window_counts(
            h_eigs, a_eigs, d_cap, None
        )
        if ok_h:
            if expect_neg_a is not None and neg_a_h != expect_neg_a(m):
                raise AssertionError(
                    f"pure-A truncation count {neg_a_h} != {expect_neg_a(m)} at m={m}"
                )
            mags = np.abs(h_eigs)
            nonzero = mags[mags > ZERO_CLUSTER_RTOL * scale_h]
            strong = bool(len(nonzero) == 0 or np.min(nonzero) >= STRONG_GAP_RTOL * scale_h)
            hist_heu.append((rel_h, null_h, m, d_h, strong))
        if informed_window_locks(hist_inf, win, int(known_null or 0)):
            rel, null, m_used, d_used = hist_inf[-1][:4]
            return RelativeIndexResult(rel, null, m_used, d_used, True)
        if (
            len(hist_heu) >= win
            and len({(r, nl) for r, nl, _, _, _ in hist_heu[-win:]}) == 1
            and all(s for _, _, _, _, s in hist_heu[-win:])
        ):
            rel, null, m_used, d_used, _ = hist_heu[-1]
            return RelativeIndexResult(rel, null, m_used, d_used, True)
        m += step
    for hist in (hist_inf, hist_heu):
        if hist:
            rel, null, m_used, d_used = hist[-1][:4]
            return RelativeIndexResult(rel, null, m_used, d_used, False)
    return RelativeIndexResult(0, 0, m0, d_cap, False)


KERNEL_DECAY_FACTOR = 0.75
KERNEL_MACHINE_RTOL = 1e-12


def informed_window_locks(history, win: int, k: int) -> bool:
    """True when the informed channel's window agrees and its kernel
    cluster genuinely converges to zero.

    A true truncated kernel eigenvalue decays with m; a small-but-real
    eigenvalue sits still, and must not be certified as a kernel even
    when an ill-conditioned endpoint hint claims one.
    """
    if len(history) < win:
        return False
    tail = history[-win:]
    if len({(r, nl) for r, nl, _, _, _, _ in tail}) != 1:
        return False
    if k == 0:
        return True
    clusters = [c for _, _, _, _, c, _ in tail]
    scales = [s for _, _, _, _, _, s in tail]
    for prev, cur, sc in zip(clusters, clusters[1:], scales[1:]):
        if cur > KERNEL_MACHINE_RTOL * sc and cur > KERNEL_DECAY_FACTOR * prev:
            return False
    return True


def spectral_flow_crosscheck(assemble, m: int, s_points: int = 33) -> int:
    """-sf(A - sB) on one truncation, by eigenvalue counting along s.

    A genuine tracking pass: negative counts on an s-grid, summed step
    differences. Used as an independent route to the relative index on
    nondegenerate problems.
    """
    Amat, Bmat, a_eigs = assemble(m)
    scale = max(1.0, float(np.max(np.abs(a_eigs))))
    z0 = ZERO_CLUSTER_RTOL * scale
    downward = 0  # telescopes to neg(A) - neg(A-B)
    prev = None
    for s in np.linspace(0.0, 1.0, s_points):
        eigs = np.linalg.eigvalsh(Amat - s * Bmat)
        neg = int(np.sum(eigs < -z0))
        if prev is not None:
            downward += prev - neg
        prev = neg
    return -downward  # = neg(A-B) - neg(A) = I(A, A-B) = -sf
