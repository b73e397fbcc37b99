"""Coefficient paths B(t), fundamental solutions, and brake iteration.

Conventions. A CoefficientPath carries the physical full period tau of
the underlying brake system; the fundamental path gamma^1 lives on the
half period [0, tau/2]. Internally everything is computed in unit time
s = 2t/tau with the normalized coefficient Bu(s) = (tau/2) B(s tau/2),
so gamma^1 is the fundamental solution of Bu on [0, 1] and the brake
identities read Bu(s+2) = Bu(s), Bu(1+s) N = N Bu(1-s). Indices are
invariant under this reparametrization.

The k-fold iterate gamma^k on [0, k] is assembled algebraically from
gamma^1 via gamma(1+s) = N gamma(1-s) gamma(1)^{-1} N gamma(1) and
gamma(s+2) = gamma(s) gamma(2); this is the unique continuous extension
solving the same linear system with the brake-extended coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import (
    DEFAULT_SYMPLECTIC_TOL,
    half_dim,
    project_symplectic,
    standard_J,
    standard_N,
    symplectic_drift,
    v_block,
)

INTEGRATOR_LOCAL_TOL = 1e-10
INTEGRATOR_DRIFT_TOL = 1e-12
PROJECT_EVERY = 64
MIN_STEPS_PER_UNIT = 256
MAX_PHASE_STEP = 0.5 * np.pi


def _sym(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


@dataclass(frozen=True)
class TrigSeries:
    """Bu(s) = sum_l C_l cos(l pi s) + sum_l S_l sin(l pi s), s in [0,1].

    Harmonics are integer multiples of pi so that k-fold time rescaling
    stays inside the class. Coefficients are symmetric 2n x 2n.
    """

    n: int
    cos_terms: tuple[tuple[int, np.ndarray], ...]
    sin_terms: tuple[tuple[int, np.ndarray], ...]

    @classmethod
    def build(cls, n, cos_terms=(), sin_terms=()) -> "TrigSeries":
        def clean(terms):
            out = {}
            for k, C in terms:
                C = _sym(np.array(C, dtype=float))
                if C.shape != (2 * n, 2 * n):
                    raise ValueError(f"coefficient must be {2*n} x {2*n}, got {C.shape}")
                if int(k) in out:
                    out[int(k)] = out[int(k)] + C
                else:
                    out[int(k)] = C
            for C in out.values():
                C.setflags(write=False)
            return tuple(sorted(out.items()))

        return cls(n, clean(cos_terms), clean(sin_terms))

    def terms(self):
        """Yield (kind, frequency, coefficient) with frequency = l*pi."""
        for l, C in self.cos_terms:
            yield "cos", l * np.pi, C
        for l, S in self.sin_terms:
            yield "sin", l * np.pi, S

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape + (2 * self.n, 2 * self.n))
        for l, C in self.cos_terms:
            out += np.cos(l * np.pi * s)[..., None, None] * C
        for l, S in self.sin_terms:
            out += np.sin(l * np.pi * s)[..., None, None] * S
        return out

    def norm_bound(self) -> float:
        """Upper bound on max_s ||Bu(s)||_2."""
        total = 0.0
        for _, _, C in self.terms():
            total += float(np.linalg.norm(C, 2))
        return total

    def is_structurally_brake(self, tol: float = 1e-12) -> bool:
        """cos coefficients commute with N, sin coefficients anticommute.

        Exactly these series coincide with their own brake extension on
        all of R, which is what iteration and the periodic forms need.
        """
        n = self.n
        scale = max(1.0, self.norm_bound())
        for _, C in self.cos_terms:
            if max(np.max(np.abs(C[:n, n:])), np.max(np.abs(C[n:, :n]))) > tol * scale:
                return False
        for _, S in self.sin_terms:
            if max(np.max(np.abs(S[:n, :n])), np.max(np.abs(S[n:, n:]))) > tol * scale:
                return False
        return True

    def structural_projection(self) -> "TrigSeries":
        """Nearest series with the exact brake block structure."""
        n = self.n
        N = np.diag(np.concatenate([-np.ones(n), np.ones(n)]))
        cos_terms = [(l, 0.5 * (C + N @ C @ N)) for l, C in self.cos_terms]
        sin_terms = [(l, 0.5 * (S - N @ S @ N)) for l, S in self.sin_terms]
        return TrigSeries.build(n, cos_terms, sin_terms)

    def rescaled_fold(self, k: int) -> "TrigSeries":
        """Series of k*Bu(k s): the unit coefficient of gamma^k."""
        return TrigSeries(
            self.n,
            tuple((k * l, k * C) for l, C in self.cos_terms),
            tuple((k * l, k * S) for l, S in self.sin_terms),
        )

    def conjugated(self, P: np.ndarray) -> "TrigSeries":
        return TrigSeries.build(
            self.n,
            [(l, P.T @ C @ P) for l, C in self.cos_terms],
            [(l, P.T @ S @ P) for l, S in self.sin_terms],
        )


@dataclass(frozen=True)
class TabulatedCoefficient:
    """Piecewise-linear Bu(s) from samples over [0, 1] or [0, 2].

    Unit time covers the half period per unit; full-period data (grid
    up to 2) is kept so the declared second half can be validated
    against the brake reflection, but evaluation beyond s = 1 always
    goes through the exact reflected extension.
    """

    n: int
    grid: np.ndarray
    values: np.ndarray

    @classmethod
    def build(cls, n, grid, values) -> "TabulatedCoefficient":
        grid = np.array(grid, dtype=float)
        values = np.array(values, dtype=float)
        if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if abs(grid[0]) > 1e-14 or min(abs(grid[-1] - 1.0), abs(grid[-1] - 2.0)) > 1e-12:
            raise ValueError("tabulated grid must end at the half or full period")
        if not np.any(np.abs(grid - 1.0) < 1e-12):
            raise ValueError("tabulated grid must contain the half-period point")
        if values.shape != (len(grid), 2 * n, 2 * n):
            raise ValueError("values must be (len(grid), 2n, 2n)")
        values = 0.5 * (values + np.transpose(values, (0, 2, 1)))
        grid.setflags(write=False)
        values.setflags(write=False)
        return cls(n, grid, values)

    def _interp(self, flat):
        idx = np.clip(np.searchsorted(self.grid, flat, side="right") - 1, 0, len(self.grid) - 2)
        t0, t1 = self.grid[idx], self.grid[idx + 1]
        w = (flat - t0) / (t1 - t0)
        return (1 - w)[:, None, None] * self.values[idx] + w[:, None, None] * self.values[
            idx + 1
        ]

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        flat = np.clip(s.ravel(), 0.0, 1.0)
        out = self._interp(flat)
        return out.reshape(s.shape + (2 * self.n, 2 * self.n))

    def declared_second_half(self, s):
        """Raw user samples on (1, 2], used only for validation."""
        if self.grid[-1] < 1.5:
            return None
        s = np.asarray(s, dtype=float)
        return self._interp(np.clip(s.ravel(), 1.0, 2.0)).reshape(
            s.shape + (2 * self.n, 2 * self.n)
        )

    def norm_bound(self) -> float:
        return float(max(np.linalg.norm(V, 2) for V in self.values))

    def is_structurally_brake(self) -> bool:
        return False

    def rescaled_fold(self, k: int) -> "TabulatedCoefficient":
        base = np.concatenate([self.grid[:-1] / 2.0, 0.5 + self.grid / 2.0])  # one [0,2] copy
        s = np.concatenate([(j + base * 2.0) / k for j in range(0, 2 * k, 2)])
        s = np.unique(np.concatenate([s, [0.0, 1.0]]))
        s = s[(s >= 0.0) & (s <= 1.0)]
        vals = k * eval_brake_extension(self, k * s)
        return TabulatedCoefficient.build(self.n, s, vals)

    def conjugated(self, P: np.ndarray) -> "TabulatedCoefficient":
        vals = np.einsum("ij,tjk,kl->til", P.T, self.values, P)
        return TabulatedCoefficient.build(self.n, self.grid, vals)


def eval_brake_extension(unit, s):
    """Evaluate the brake extension of a unit coefficient at any s.

    Reduces s mod 2 into [0, 2) and applies Bu(s) = N Bu(2-s) N on the
    reflected half. Structural trig series equal their own extension,
    so they are evaluated directly.
    """
    if isinstance(unit, TrigSeries) and unit.is_structurally_brake():
        return unit(s)
    s = np.asarray(s, dtype=float)
    r = np.mod(s, 2.0)
    reflected = r > 1.0
    r = np.where(reflected, 2.0 - r, r)
    vals = unit(r)
    if np.any(reflected):
        N = standard_N(unit.n)
        conj = N @ vals @ N
        vals = np.where(reflected[..., None, None], conj, vals)
    return vals


@dataclass(frozen=True)
class CoefficientPath:
    """Symmetric coefficient of a linear Hamiltonian system with brake
    metadata.

    period is the physical full period tau; unit is the normalized
    coefficient on [0, 1] (see module docstring).
    """

    n: int
    period: float
    kind: str
    unit: TrigSeries | TabulatedCoefficient
    symmetry_certified: bool = False
    symmetry_violation: float = np.inf

    # -- constructors ------------------------------------------------

    @classmethod
    def constant(cls, B: np.ndarray, period: float = 2.0) -> "CoefficientPath":
        B = np.array(B, dtype=float)
        n = half_dim(B)
        unit = TrigSeries.build(n, cos_terms=[(0, (period / 2.0) * B)])
        return cls._finalize(n, period, "constant", unit)

    @classmethod
    def fourier(cls, n: int, period: float, cos_terms=(), sin_terms=()) -> "CoefficientPath":
        """Harmonics of the full period: B(t) = sum C_h cos(2 pi h t/tau) + ...

        In unit time the h-th harmonic becomes cos/sin(h pi s).
        """
        scale = period / 2.0
        unit = TrigSeries.build(
            n,
            cos_terms=[(h, scale * np.asarray(C)) for h, C in cos_terms],
            sin_terms=[(h, scale * np.asarray(S)) for h, S in sin_terms],
        )
        return cls._finalize(n, period, "fourier", unit)

    @classmethod
    def tabulated(cls, times: np.ndarray, values: np.ndarray, period: float) -> "CoefficientPath":
        """Samples of B over [0, tau] (or [0, tau/2]), linearly interpolated."""
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        n = half_dim(values[0])
        unit = TabulatedCoefficient.build(n, 2.0 * times / period, (period / 2.0) * values)
        return cls._finalize(n, period, "tabulated", unit)

    @classmethod
    def from_unit(cls, unit, period: float = 2.0, kind: str = "fourier") -> "CoefficientPath":
        return cls._finalize(unit.n, period, kind, unit)

    @classmethod
    def _finalize(cls, n, period, kind, unit) -> "CoefficientPath":
        if period <= 0:
            raise ValueError("period must be positive")
        path = cls(n, float(period), kind, unit)
        ok, violation, _ = validate_brake_symmetry(path)
        return replace(path, symmetry_certified=ok, symmetry_violation=violation)

    # -- evaluation ---------------------------------------------------

    def unit_eval(self, s):
        return self.unit(s)

    def unit_extension(self, s):
        return eval_brake_extension(self.unit, s)

    def physical_eval(self, t):
        """B(t) at physical time, one period [0, tau]."""
        return self.unit(np.asarray(t) * 2.0 / self.period) / (self.period / 2.0)

    def norm_bound(self) -> float:
        return self.unit.norm_bound()

    # -- derived systems ----------------------------------------------

    def rescaled_fold(self, k: int) -> "CoefficientPath":
        """Coefficient whose unit path equals gamma^k of this system."""
        if k < 1:
            raise ValueError("fold must be >= 1")
        if k == 1:
            return self
        if not self.symmetry_certified:
            raise ValueError("brake symmetry not certified; refusing to iterate")
        unit = self.unit
        if isinstance(unit, TrigSeries) and not unit.is_structurally_brake():
            # certified within tolerance: fold the exact-structure part
            unit = unit.structural_projection()
        out = CoefficientPath._finalize(self.n, k * self.period, self.kind, unit.rescaled_fold(k))
        if not out.symmetry_certified:
            raise ValueError("rescaled coefficient lost brake certification")
        return out

    def conjugated(self, P: np.ndarray, kind_suffix: str = "") -> "CoefficientPath":
        unit = self.unit.conjugated(P)
        return CoefficientPath._finalize(self.n, self.period, self.kind + kind_suffix, unit)

    def l1_conjugated(self) -> "CoefficientPath":
        """Coefficient of J^{-1} gamma J, the L1 <-> L0 swap."""
        J = standard_J(self.n)
        return self.conjugated(-J)


def validate_brake_symmetry(B: CoefficientPath, tol: float = 1e-9, points: int = 257):
    """Check tau-periodicity and the N-reflection identity on a grid.

    Returns (ok, max_violation, worst_unit_time). In unit time the
    identities are Bu(s+2) = Bu(s) and Bu(1+s) N = N Bu(1-s), checked
    against the raw declared coefficient: for trig series the formula
    itself is evaluated on both sides of the reflection point; for
    full-period tabulated data the declared second half is compared to
    the reflection of the first. At the junctions s = 0, 1 the value
    must commute with N (the continuity condition of the extension).
    """
    n = B.n
    N = standard_N(n)
    s = np.linspace(0.0, 1.0, points)
    if isinstance(B.unit, TrigSeries):
        left = B.unit(1.0 + s) @ N  # trig formulas are 2-periodic exactly
        right = N @ B.unit(1.0 - s)
        viol = np.max(np.abs(left - right), axis=(1, 2))
    elif isinstance(B.unit, TabulatedCoefficient):
        declared = B.unit.declared_second_half(1.0 + s)
        if declared is None:
            viol = np.zeros(points)  # half-period data pins the extension
        else:
            right = N @ B.unit(1.0 - s) @ N
            viol = np.max(np.abs(declared - right), axis=(1, 2))
    else:
        raise TypeError(f"unsupported coefficient type {type(B.unit)!r}")
    # continuity of the reflected extension at the junctions
    for sj in (0.0, 1.0):
        Bj = B.unit(sj)
        jump = np.max(np.abs(N @ Bj @ N - Bj))
        viol = np.append(viol, jump)
    worst = int(np.argmax(viol))
    worst_s = s[worst] if worst < points else (0.0 if worst == points else 1.0)
    max_viol = float(viol[worst])
    return max_viol <= tol, max_viol, float(worst_s)


@dataclass(frozen=True)
class SymplecticPath:
    """A time-sampled fundamental solution with symplecticity record.

    grid is uniform unit time over [0, T]; samples[0] = I. time_scale
    converts to physical time (tau/2 per unit).
    """

    n: int
    grid: np.ndarray
    samples: np.ndarray
    source: CoefficientPath | None
    max_drift: float
    time_scale: float = 1.0

    @property
    def T(self) -> float:
        return float(self.grid[-1])

    @property
    def steps_per_unit(self) -> int:
        return int(round(1.0 / (self.grid[1] - self.grid[0])))

    def endpoint(self) -> np.ndarray:
        return self.samples[-1]

    def at_time(self, s: float) -> np.ndarray:
        """Sample nearest to unit time s (grid is dense by contract)."""
        i = int(round(s / (self.grid[1] - self.grid[0])))
        return self.samples[min(max(i, 0), len(self.grid) - 1)]

    def restricted(self, T: float) -> "SymplecticPath":
        m = int(round(T * self.steps_per_unit))
        return replace(self, grid=self.grid[: m + 1], samples=self.samples[: m + 1])

    def conjugated(self, P: np.ndarray, source: CoefficientPath | None = None) -> "SymplecticPath":
        samples = np.einsum("ij,tjk,kl->til", P.T, self.samples, P)
        return replace(self, samples=samples, source=source)


# Yoshida triple-jump coefficients: composing three implicit-midpoint
# (Cayley) substeps with these fractions lifts the order from 2 to 4
# while every substep stays exactly symplectic.
_YOSHIDA_C1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_YOSHIDA_C2 = 1.0 - 2.0 * _YOSHIDA_C1


def _symplectic_sweep(Bfun, T: float, steps: int, n: int) -> np.ndarray:
    """Order-4 composition of Cayley midpoint substeps; symplectic per step."""
    h = T / steps
    fracs = np.array([_YOSHIDA_C1, _YOSHIDA_C2, _YOSHIDA_C1])
    offsets = np.array([0.0, _YOSHIDA_C1, _YOSHIDA_C1 + _YOSHIDA_C2])
    # midpoint times of all substeps, flattened (3 per outer step)
    t0 = np.arange(steps)[:, None] * h
    t_mid = (t0 + (offsets + 0.5 * fracs)[None, :] * h).ravel()
    Bmid = Bfun(t_mid).reshape(steps, 3, 2 * n, 2 * n)
    J = standard_J(n)
    I = np.eye(2 * n)
    out = np.empty((steps + 1, 2 * n, 2 * n))
    out[0] = I
    g = I.copy()
    for i in range(steps):
        for sub in range(3):
            X = (0.5 * fracs[sub] * h) * (J @ Bmid[i, sub])
            g = np.linalg.solve(I - X, (I + X) @ g)
        if (i + 1) % PROJECT_EVERY == 0:
            g = project_symplectic(g)
        out[i + 1] = g
    return out


def _max_phase_step(samples: np.ndarray) -> float:
    n = samples.shape[1] // 2
    U = samples[:, n:, n:]
    V = samples[:, :n, n:]
    w = np.linalg.det(U + 1j * V)
    dphi = np.angle(w[1:] / w[:-1])
    return float(np.max(np.abs(dphi))) if len(dphi) else 0.0


def integrate_fundamental(
    B: CoefficientPath,
    T: float = 1.0,
    steps: int | None = None,
    local_tol: float = INTEGRATOR_LOCAL_TOL,
    drift_tol: float = DEFAULT_SYMPLECTIC_TOL,
    max_doublings: int = 12,
) -> SymplecticPath:
    """Fundamental solution of dx/ds = J Bu(s) x on [0, T], unit time.

    Uniform implicit-midpoint grid, doubled until (a) successive
    refinements agree below local_tol, (b) the winding phase step stays
    under pi/2, and (c) drift passes. Raises if the budget runs out.
    """
    if T <= 0 or (steps is not None and steps < 1):
        raise ValueError("need T > 0 and steps >= 1")
    n = B.n
    Bfun = lambda s: B.unit_extension(s)
    nb = max(1.0, B.norm_bound())
    if steps is None:
        # order-4 scheme: global error ~ (h nb)^4, aim at the tolerance
        h_target = local_tol**0.25 / nb
        steps = max(int(MIN_STEPS_PER_UNIT * max(1.0, np.ceil(T))), int(np.ceil(T / h_target)))
    samples = _symplectic_sweep(Bfun, T, steps, n)
    prev_err = np.inf
    for _ in range(max_doublings):
        finer = _symplectic_sweep(Bfun, T, 2 * steps, n)
        err = float(np.max(np.abs(finer[::2] - samples)))
        scale = max(1.0, float(np.max(np.abs(finer))))
        samples = finer
        steps *= 2
        converged = err <= local_tol * scale
        # a 4th-order method gains ~16x per doubling; stagnation means the
        # roundoff floor has been reached and further refinement only hurts
        stagnated = err > 0.35 * prev_err
        prev_err = err
        if (converged or stagnated) and _max_phase_step(samples) < MAX_PHASE_STEP:
            break
    else:
        raise RuntimeError("integrator failed to meet tolerance within refinement budget")
    drift = max(symplectic_drift(samples[-1]), symplectic_drift(samples[len(samples) // 2]))
    if drift > drift_tol:
        raise RuntimeError(f"symplectic drift {drift:.2e} above tolerance {drift_tol:g}")
    grid = np.linspace(0.0, T, steps + 1)
    return SymplecticPath(n, grid, samples, B, drift, time_scale=B.period / 2.0)


def unit_path(B: CoefficientPath, steps: int | None = None) -> SymplecticPath:
    """gamma^1: the fundamental solution over one unit interval."""
    return integrate_fundamental(B, 1.0, steps)


def iterate_path(gamma: SymplecticPath, B: CoefficientPath, k: int) -> SymplecticPath:
    """The k-fold brake iterate gamma^k on [0, k] (unit time).

    Requires certified brake symmetry of B and gamma = gamma^1 of B.
    Assembled from the reflection identity, one unit interval at a
    time; restricting gamma^k to [0, k-1] reproduces gamma^{k-1}
    sample for sample.
    """
    if k < 1:
        raise ValueError("iteration count must be >= 1")
    if not B.symmetry_certified:
        raise ValueError("brake symmetry not certified; refusing to iterate")
    if gamma.source is not B or abs(gamma.T - 1.0) > 1e-12:
        raise ValueError("gamma must be the unit path of B")
    if k == 1:
        return gamma
    n = gamma.n
    N = standard_N(n)
    g1 = gamma.endpoint()
    g1_inv_part = np.linalg.solve(g1, N @ g1)  # gamma(1)^{-1} N gamma(1)
    m = gamma.steps_per_unit
    base = gamma.samples
    # gamma on [1, 2]: N gamma(1 - s) gamma(1)^{-1} N gamma(1)
    second = N @ base[::-1] @ g1_inv_part
    g2 = second[-1]
    blocks = [base]
    for j in range(1, k):
        # segment over [j, j+1] is base/second composed with gamma(2)^(j//2)
        seg = base if j % 2 == 0 else second
        tail = np.linalg.matrix_power(g2, j // 2)
        blocks.append(seg[1:] @ tail)
    samples = np.concatenate(blocks, axis=0)
    grid = np.linspace(0.0, k, k * m + 1)
    drift = max(symplectic_drift(samples[-1]), gamma.max_drift)
    return SymplecticPath(n, grid, samples, B, drift, time_scale=gamma.time_scale)


def ellipsoid_linearization(r, j: int) -> CoefficientPath:
    """Constant linearization along the j-th planar ellipsoid orbit.

    For radii r the quadratic Hamiltonian has the constant Hessian
    B = diag(2/r_1^2, .., 2/r_n^2, 2/r_1^2, .., 2/r_n^2); the j-th
    planar orbit (1-based) has full period tau_j = pi r_j^2. Scaling
    r -> lam r scales tau_j by lam^2 and B by lam^{-2}.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("radii must be positive")
    if not 1 <= j <= len(r):
        raise ValueError(f"orbit index {j} out of range for n={len(r)}")
    diag = 2.0 / r**2
    B = np.diag(np.concatenate([diag, diag]))
    period = np.pi * r[j - 1] ** 2
    path = CoefficientPath.constant(B, period=period)
    return replace(path, kind="ellipsoid")


def conjugate_path_to_L0(gamma: SymplecticPath, L) -> SymplecticPath:
    """Conjugated path P^{-1} gamma P for an orthogonal-symplectic P
    with P L0 = L; for L = L0 this is gamma itself."""
    from .core import lagrangian_conjugator

    if L.label == "L0":
        return gamma
    P = lagrangian_conjugator(L)
    source = gamma.source.conjugated(P, kind_suffix="|conj") if gamma.source is not None else None
    return gamma.conjugated(P, source)


def endpoint_L0_nullity(gamma_end: np.ndarray, rtol: float = 1e-8) -> int:
    from .core import kernel_dimension

    return kernel_dimension(v_block(gamma_end), rtol)


def iterate_endpoint(gamma: SymplecticPath, k: int) -> np.ndarray:
    """gamma^k(k) without assembling the whole iterate."""
    n = gamma.n
    N = standard_N(n)
    g1 = gamma.endpoint()
    g2 = N @ np.linalg.solve(g1, N @ g1)
    if k % 2 == 0:
        return np.linalg.matrix_power(g2, k // 2)
    return g1 @ np.linalg.matrix_power(g2, (k - 1) // 2)
