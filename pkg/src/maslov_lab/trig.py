"""Closed-form trigonometric moments over the unit interval.

The Galerkin forms need integrals of a coefficient harmonic against a
pair of basis harmonics; every such entry reduces via product-to-sum to
the two primitives c1(x) = int_0^1 cos(xt) dt and s1(x) = int_0^1
sin(xt) dt, both evaluated in a cancellation-free way near x = 0.
"""

from __future__ import annotations

import numpy as np

COS, SIN = "cos", "sin"


def c1(x):
    """int_0^1 cos(x t) dt = sin(x)/x, stable at x = 0."""
    return np.sinc(np.asarray(x) / np.pi)


def s1(x):
    """int_0^1 sin(x t) dt = (1 - cos x)/x, stable at x = 0."""
    x = np.asarray(x, dtype=float)
    half = 0.5 * x
    return half * np.sinc(half / np.pi) ** 2


def e1(x):
    """int_0^1 exp(i x t) dt."""
    return c1(x) + 1j * s1(x)


def moment_cos(kind: str, mu, nu):
    """int_0^1 f(mu t) cos(nu t) dt for f = cos or sin."""
    if kind == COS:
        return 0.5 * (c1(mu - nu) + c1(mu + nu))
    if kind == SIN:
        return 0.5 * (s1(mu + nu) + s1(mu - nu))
    raise ValueError(f"unknown harmonic kind {kind!r}")


def moment_sin(kind: str, mu, nu):
    """int_0^1 f(mu t) sin(nu t) dt for f = cos or sin."""
    if kind == COS:
        return 0.5 * (s1(nu + mu) + s1(nu - mu))
    if kind == SIN:
        return 0.5 * (c1(nu - mu) - c1(nu + mu))
    raise ValueError(f"unknown harmonic kind {kind!r}")


def pair_moments(kind: str, mu, alpha, beta):
    """All four int_0^1 f(mu t) trig(beta t) trig(alpha t) dt at once.

    Returns (CC, SS, CS, SC) where the first letter is the beta factor
    and the second the alpha factor, e.g. CS = int f cos(beta t)
    sin(alpha t) dt. alpha and beta broadcast.
    """
    d = np.asarray(alpha) - np.asarray(beta)
    s = np.asarray(alpha) + np.asarray(beta)
    tc_d, tc_s = moment_cos(kind, mu, d), moment_cos(kind, mu, s)
    ts_d, ts_s = moment_sin(kind, mu, d), moment_sin(kind, mu, s)
    cc = 0.5 * (tc_d + tc_s)
    ss = 0.5 * (tc_d - tc_s)
    cs = 0.5 * (ts_s + ts_d)
    sc = 0.5 * (ts_s - ts_d)
    return cc, ss, cs, sc
