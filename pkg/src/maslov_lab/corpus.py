"""Seeded random brake-symmetric systems for self-tests.

Coefficients are trig series in unit time with the structural brake
shape: diagonal blocks on cosine harmonics, off-diagonal blocks on sine
harmonics. The b22 block is kept positive definite so the crossing
route applies, and entries stay well under 5 in magnitude so that
truncation sizes stay small at desk scale.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .paths import CoefficientPath, TrigSeries

DEFAULT_SEED = 180571


def _sym(rng, n: int, scale: float) -> np.ndarray:
    M = rng.normal(size=(n, n)) * scale
    return 0.5 * (M + M.T)


def random_brake_coefficient(
    rng: np.random.Generator,
    n: int,
    amplitude: float = 0.9,
    harmonics: int = 2,
    constant_only: bool = False,
    positive: bool = False,
) -> CoefficientPath:
    """One certified brake-symmetric coefficient with b22 > 0.

    With positive=True the whole B(t) is kept positive definite (the
    strict-convexity setting of the monotonicity estimates).
    """
    two_n = 2 * n
    base = np.zeros((two_n, two_n))
    if positive:
        W = rng.normal(size=(n, n)) * amplitude * 0.5
        base[:n, :n] = W @ W.T + (0.4 + 0.6 * rng.random()) * np.eye(n)
    else:
        base[:n, :n] = _sym(rng, n, amplitude)
    V = rng.normal(size=(n, n)) * amplitude * 0.5
    base[n:, n:] = V @ V.T + (0.5 + 0.8 * rng.random()) * np.eye(n)
    cos_terms = [(0, base)]
    sin_terms = []
    if not constant_only:
        budget = 0.0
        for l in range(1, harmonics + 1):
            C = np.zeros((two_n, two_n))
            C11 = _sym(rng, n, amplitude * 0.3 / l)
            C22 = _sym(rng, n, amplitude * 0.2 / l)
            C[:n, :n] = C11
            C[n:, n:] = C22
            budget += float(np.linalg.norm(C22, 2))
            cos_terms.append((l, C))
            S = np.zeros((two_n, two_n))
            R = rng.normal(size=(n, n)) * amplitude * 0.3 / l
            S[:n, n:] = R
            S[n:, :n] = R.T
            sin_terms.append((l, S))
        # keep b22(s) (resp. all of B) positive definite: lift the constant
        # block over the whole oscillation budget
        full_budget = sum(
            float(np.linalg.norm(C, 2)) for _, C in cos_terms[1:]
        ) + sum(float(np.linalg.norm(S, 2)) for _, S in sin_terms)
        base = base.copy()
        if positive:
            base_min = float(np.linalg.eigvalsh(base)[0])
            if base_min <= full_budget + 0.2:
                base += (full_budget + 0.3 - base_min) * np.eye(two_n)
        else:
            base22_min = float(np.linalg.eigvalsh(base[n:, n:])[0])
            if base22_min <= budget + 0.2:
                base[n:, n:] += (budget + 0.3 - base22_min) * np.eye(n)
        cos_terms[0] = (0, base)
    unit = TrigSeries.build(n, cos_terms=cos_terms, sin_terms=sin_terms)
    B = CoefficientPath.from_unit(unit, period=2.0, kind="fourier")
    assert B.symmetry_certified
    return B


def corpus(
    count: int,
    seed: int = DEFAULT_SEED,
    half_dims=(1, 2, 3),
    constant_fraction: float = 0.25,
) -> list[CoefficientPath]:
    """Deterministic corpus: a mix of constant and oscillating systems
    with amplitudes spread to populate a range of index values."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = int(half_dims[i % len(half_dims)])
        constant = rng.random() < constant_fraction
        # amplitudes capped so that hyperbolic Floquet exponents stay
        # small enough for 64-fold iterates to remain meaningful in
        # float64 (the direct side of the mean-index check)
        amplitude = 0.6 + 1.3 * rng.random()
        out.append(
            random_brake_coefficient(
                rng,
                n,
                amplitude=amplitude,
                constant_only=constant,
                positive=(i % 4 == 2),
            )
        )
    return out


def thread_count() -> int:
    raw = os.environ.get("MASLOV_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Map with deterministic ordering, bounded by MASLOV_LAB_THREADS."""
    workers = thread_count()
    items = list(items)
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
