"""Exact-structure symplectic linear algebra.

Standard matrices, symplecticity checks, block decompositions, the
diamond product, and Lagrangian-frame conjugations. Everything here is
dense real linear algebra at desk scale (2n <= ~12); all functions are
pure and all values immutable once constructed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_SYMPLECTIC_TOL = 1e-10

# Relative singular-value cutoff used everywhere a kernel dimension is read
# off a block of an O(1) matrix.
KERNEL_RTOL = 1e-8


def standard_J(n: int) -> np.ndarray:
    """J = [[0, -I], [I, 0]] of size 2n x 2n."""
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = -np.eye(n)
    J[n:, :n] = np.eye(n)
    return J


def standard_N(n: int) -> np.ndarray:
    """N = diag(-I, I): the brake-symmetry reflection."""
    return np.diag(np.concatenate([-np.ones(n), np.ones(n)]))


def M_plus(n: int) -> np.ndarray:
    """M+ = [[0, I], [-I, 0]], base point of the det V > 0 stratum."""
    return -standard_J(n)


def M_minus(n: int) -> np.ndarray:
    """M- = [[0, Jn], [-Jn, 0]] with Jn = diag(-1, 1, ..., 1)."""
    Jn = np.eye(n)
    Jn[0, 0] = -1.0
    M = np.zeros((2 * n, 2 * n))
    M[:n, n:] = Jn
    M[n:, :n] = -Jn
    return M


def standard_matrices(n: int) -> dict[str, np.ndarray]:
    if n < 1:
        raise ValueError("half-dimension must be >= 1")
    return {
        "J": standard_J(n),
        "N": standard_N(n),
        "M_plus": M_plus(n),
        "M_minus": M_minus(n),
    }


def half_dim(M: np.ndarray) -> int:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2 != 0:
        raise ValueError(f"expected a square even-dimensional matrix, got shape {M.shape}")
    return M.shape[0] // 2


def symplectic_drift(M: np.ndarray) -> float:
    """Max-norm of M^T J M - J (0 exactly on Sp(2n))."""
    n = half_dim(M)
    J = standard_J(n)
    return float(np.max(np.abs(M.T @ J @ M - J)))


def check_symplectic(M: np.ndarray, tol: float = DEFAULT_SYMPLECTIC_TOL) -> tuple[bool, float]:
    """Return (is_symplectic, drift) with drift reported regardless."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    drift = symplectic_drift(M)
    return drift <= tol, drift


def project_symplectic(M: np.ndarray) -> np.ndarray:
    """One Newton-type correction step onto Sp(2n).

    M <- M (I + J*Delta/2) with Delta = M^T J M - J kills the drift to
    first order; Delta is antisymmetric so the correction is exact at
    that order.
    """
    n = half_dim(M)
    J = standard_J(n)
    delta = M.T @ J @ M - J
    return M @ (np.eye(2 * n) + 0.5 * (J @ delta))


@dataclass(frozen=True)
class SymplecticMatrix:
    """A 2n x 2n matrix certified symplectic at construction time."""

    mat: np.ndarray
    drift: float

    @classmethod
    def certify(cls, M: np.ndarray, tol: float = DEFAULT_SYMPLECTIC_TOL) -> "SymplecticMatrix":
        M = np.array(M, dtype=float)
        if not np.all(np.isfinite(M)):
            raise ValueError("matrix has non-finite entries")
        ok, drift = check_symplectic(M, tol)
        if not ok:
            raise ValueError(f"matrix is not symplectic within tol={tol:g} (drift={drift:.3e})")
        M.setflags(write=False)
        return cls(M, drift)

    @property
    def n(self) -> int:
        return self.mat.shape[0] // 2


@dataclass(frozen=True)
class BlockSplit:
    """n x n blocks (S, V, T, U) of a 2n x 2n matrix, in the layout
    [[S, V], [T, U]]."""

    S: np.ndarray
    V: np.ndarray
    T: np.ndarray
    U: np.ndarray

    def reassemble(self) -> np.ndarray:
        return np.block([[self.S, self.V], [self.T, self.U]])


def block_split(M: np.ndarray) -> BlockSplit:
    n = half_dim(M)
    M = np.asarray(M)
    return BlockSplit(M[:n, :n].copy(), M[:n, n:].copy(), M[n:, :n].copy(), M[n:, n:].copy())


def v_block(M: np.ndarray) -> np.ndarray:
    """Upper-right block: the one whose kernel is the L0-nullity."""
    n = half_dim(M)
    return np.asarray(M)[:n, n:]


def t_block(M: np.ndarray) -> np.ndarray:
    """Lower-left block: the one whose kernel is the L1-nullity."""
    n = half_dim(M)
    return np.asarray(M)[n:, :n]


def diamond(M1: np.ndarray, M2: np.ndarray) -> np.ndarray:
    """Diamond product: block-interleaved direct sum.

    For Mi of half-dimension ki the result has half-dimension k1 + k2
    and acts as M1 on the (x1.., y1..) coordinates and M2 on the rest.
    Symplectic factors give a symplectic product.
    """
    k1, k2 = half_dim(M1), half_dim(M2)
    b1, b2 = block_split(M1), block_split(M2)
    k = k1 + k2
    out = np.zeros((2 * k, 2 * k), dtype=np.result_type(M1, M2))
    out[:k1, :k1] = b1.S
    out[k1:k, k1:k] = b2.S
    out[:k1, k : k + k1] = b1.V
    out[k1:k, k + k1 :] = b2.V
    out[k : k + k1, :k1] = b1.T
    out[k + k1 :, k1:k] = b2.T
    out[k : k + k1, k : k + k1] = b1.U
    out[k + k1 :, k + k1 :] = b2.U
    return out


def diamond_many(mats: list[np.ndarray]) -> np.ndarray:
    if not mats:
        raise ValueError("need at least one factor")
    out = mats[0]
    for M in mats[1:]:
        out = diamond(out, M)
    return out


def planar_rotation(theta: float) -> np.ndarray:
    """exp(theta*J) in Sp(2): [[cos, -sin], [sin, cos]]."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotation_diamond(thetas) -> np.ndarray:
    """Diamond product of planar rotations, one per angle."""
    return diamond_many([planar_rotation(th) for th in np.atleast_1d(thetas)])


@dataclass(frozen=True)
class LagrangianFrame:
    """A Lagrangian subspace given by a 2n x n basis matrix.

    label is one of "L0", "L1" or "custom"; the basis columns must span
    an n-dimensional subspace on which the symplectic form vanishes.
    """

    label: str
    basis: np.ndarray = field(repr=False)

    @classmethod
    def L0(cls, n: int) -> "LagrangianFrame":
        basis = np.vstack([np.zeros((n, n)), np.eye(n)])
        basis.setflags(write=False)
        return cls("L0", basis)

    @classmethod
    def L1(cls, n: int) -> "LagrangianFrame":
        basis = np.vstack([np.eye(n), np.zeros((n, n))])
        basis.setflags(write=False)
        return cls("L1", basis)

    @classmethod
    def from_basis(cls, basis: np.ndarray, tol: float = 1e-9) -> "LagrangianFrame":
        basis = np.array(basis, dtype=float)
        if basis.ndim != 2 or basis.shape[0] != 2 * basis.shape[1]:
            raise ValueError(f"basis must be 2n x n, got {basis.shape}")
        n = basis.shape[1]
        sv = np.linalg.svd(basis, compute_uv=False)
        if sv[-1] <= tol * sv[0]:
            raise ValueError("basis is rank deficient")
        J = standard_J(n)
        pairing = basis.T @ J @ basis
        if np.max(np.abs(pairing)) > tol * max(1.0, sv[0] ** 2):
            raise ValueError("basis does not span a Lagrangian subspace")
        basis.setflags(write=False)
        return cls("custom", basis)

    @property
    def n(self) -> int:
        return self.basis.shape[1]


def lagrangian_conjugator(L: LagrangianFrame) -> np.ndarray:
    """Orthogonal-symplectic P with P L0 = L.

    Orthonormalize the frame basis to Q = [X; Y]; then P = [[Y, X],
    [-X, Y]] corresponds to the unitary Y - iX in the U(n)/O(n) model.
    For L = L0 this gives the identity, for L = L1 it gives -J.
    """
    n = L.n
    if L.label == "L0":
        return np.eye(2 * n)
    Q, _ = np.linalg.qr(L.basis)
    X, Y = Q[:n, :], Q[n:, :]
    return np.block([[Y, X], [-X, Y]])


def conjugate_matrix_to_L0(M: np.ndarray, L: LagrangianFrame) -> np.ndarray:
    """P^{-1} M P for the frame conjugator (P orthogonal, so P^T M P)."""
    P = lagrangian_conjugator(L)
    return P.T @ M @ P


def kernel_dimension(A: np.ndarray, rtol: float = KERNEL_RTOL) -> int:
    """dim ker A by singular-value thresholding (relative cutoff)."""
    A = np.atleast_2d(np.asarray(A))
    if A.size == 0:
        return 0
    sv = np.linalg.svd(A, compute_uv=False)
    top = sv[0] if sv[0] > 0 else 1.0
    return int(np.sum(sv <= rtol * max(top, 1.0)))


def kernel_dimension_balanced(A: np.ndarray, rtol: float = KERNEL_RTOL, rounds: int = 2) -> int:
    """Kernel dimension after row/column norm balancing.

    Diagonal scaling leaves the rank unchanged but keeps the relative
    singular-value threshold meaningful when hyperbolic growth makes
    the raw matrix arbitrarily ill-conditioned (e.g. V-blocks of high
    iterates, where O(1) elliptic directions would otherwise drown
    under 1e80-scale entries).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float)).copy()
    if A.size == 0:
        return 0
    for _ in range(rounds):
        r = np.linalg.norm(A, axis=1, keepdims=True)
        r[r == 0] = 1.0
        A /= r
        c = np.linalg.norm(A, axis=0, keepdims=True)
        c[c == 0] = 1.0
        A /= c
    return kernel_dimension(A, rtol)


def subspace_intersection_dim(B1: np.ndarray, B2: np.ndarray, rtol: float = KERNEL_RTOL) -> int:
    """Dimension of span(B1) & span(B2), bases given by columns.

    Columns are normalized first so frames of very different scales
    (an iterated endpoint image against a unit frame) compare fairly.
    """

    def colnorm(M):
        M = np.asarray(M, dtype=float)
        norms = np.linalg.norm(M, axis=0, keepdims=True)
        norms[norms == 0] = 1.0
        return M / norms

    stacked = np.hstack([colnorm(B1), -colnorm(B2)])
    return kernel_dimension(stacked, rtol)
