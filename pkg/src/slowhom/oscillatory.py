"""Quadrature for oscillatory moments with certified error estimates.

Three regimes, by the frequency-times-width product: adaptive
Gauss-Kronrod while the integrand is mildly oscillatory, composite Filon
panels for genuinely oscillatory ranges, and the integration-by-parts
bound beyond that (always valid, supplied by the caller's norms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

DIRECT_LIMIT = 1.0e3   # |mu| * width below this: plain adaptive quadrature
FILON_LIMIT = 1.0e6    # up to this: Filon panels; beyond: analytic bound only


@dataclass(frozen=True)
class Moment:
    value: float
    error: float
    method: str


def direct_moment(f, mu: float, a: float, b: float, trig=math.cos) -> Moment:
    periods = abs(mu) * (b - a)
    limit = int(max(100, 8 * periods))
    val, err = integrate.quad(lambda x: f(x) * trig(2.0 * math.pi * mu * x),
                              a, b, limit=limit, epsabs=1e-13, epsrel=1e-11)
    return Moment(val, err, "direct")


def _filon_weights(theta: float) -> tuple[float, float, float]:
    """Classical Filon alpha/beta/gamma, series-stabilized near 0."""
    if abs(theta) < 1e-2:
        t2 = theta * theta
        alpha = theta * t2 * (2.0 / 45.0 - t2 * 2.0 / 315.0)
        beta = 2.0 / 3.0 + t2 * (2.0 / 15.0 - t2 * 4.0 / 105.0)
        gamma = 4.0 / 3.0 - t2 * (2.0 / 15.0 - t2 / 210.0)
        return alpha, beta, gamma
    s, c = math.sin(theta), math.cos(theta)
    t3 = theta ** 3
    alpha = (theta * theta + theta * s * c - 2.0 * s * s) / t3
    beta = 2.0 * (theta * (1.0 + c * c) - 2.0 * s * c) / t3
    gamma = 4.0 * (s - theta * c) / t3
    return alpha, beta, gamma


def filon_cos(f, mu: float, a: float, b: float, n_panels: int) -> float:
    """Composite Filon rule for int f(x) cos(2 pi mu x) dx on [a, b]."""
    k = 2.0 * math.pi * mu
    n = 2 * n_panels  # even number of intervals
    x = np.linspace(a, b, n + 1)
    h = (b - a) / n
    theta = k * h
    alpha, beta, gamma = _filon_weights(theta)
    fx = np.asarray([f(v) for v in x], dtype=float) \
        if not _vectorized(f) else np.asarray(f(x), dtype=float)
    s_all = np.sin(k * x)
    c_all = np.cos(k * x)
    c_even = float(fx[0::2] @ c_all[0::2]) - 0.5 * (
        fx[0] * c_all[0] + fx[-1] * c_all[-1])
    c_odd = float(fx[1::2] @ c_all[1::2])
    endpoint = fx[-1] * s_all[-1] - fx[0] * s_all[0]
    return h * (alpha * endpoint + beta * c_even + gamma * c_odd)


def filon_sin(f, mu: float, a: float, b: float, n_panels: int) -> float:
    k = 2.0 * math.pi * mu
    n = 2 * n_panels
    x = np.linspace(a, b, n + 1)
    h = (b - a) / n
    theta = k * h
    alpha, beta, gamma = _filon_weights(theta)
    fx = np.asarray([f(v) for v in x], dtype=float) \
        if not _vectorized(f) else np.asarray(f(x), dtype=float)
    s_all = np.sin(k * x)
    c_all = np.cos(k * x)
    s_even = float(fx[0::2] @ s_all[0::2]) - 0.5 * (
        fx[0] * s_all[0] + fx[-1] * s_all[-1])
    s_odd = float(fx[1::2] @ s_all[1::2])
    endpoint = fx[0] * c_all[0] - fx[-1] * c_all[-1]
    return h * (alpha * endpoint + beta * s_even + gamma * s_odd)


def _vectorized(f) -> bool:
    return getattr(f, "vectorized", False)


def filon_moment(f, mu: float, a: float, b: float, trig="cos") -> Moment:
    periods = max(1.0, abs(mu) * (b - a))
    n = 1 << max(6, math.ceil(math.log2(4.0 * periods)))
    rule = filon_cos if trig == "cos" else filon_sin
    coarse = rule(f, mu, a, b, n)
    fine = rule(f, mu, a, b, 2 * n)
    return Moment(fine, abs(fine - coarse) + 1e-15 * abs(fine), "filon")


def cos_moment(f, mu: float, a: float, b: float) -> Moment | None:
    """int f cos(2 pi mu x) dx with an error estimate, or None when the
    frequency regime only admits the analytic bound."""
    product = abs(mu) * (b - a)
    if product <= DIRECT_LIMIT:
        return direct_moment(f, mu, a, b, math.cos)
    if product <= FILON_LIMIT:
        return filon_moment(f, mu, a, b, "cos")
    return None


def sin_moment(f, mu: float, a: float, b: float) -> Moment | None:
    product = abs(mu) * (b - a)
    if product <= DIRECT_LIMIT:
        return direct_moment(f, mu, a, b, math.sin)
    if product <= FILON_LIMIT:
        return filon_moment(f, mu, a, b, "sin")
    return None


def ibp_bound(grad_l1: float, mu: float, dim: int = 1) -> float:
    """Integration-by-parts bound sqrt(dim) ||grad f||_1 / (2 pi |mu|)."""
    if mu == 0:
        return math.inf
    return math.sqrt(dim) * grad_l1 / (2.0 * math.pi * abs(mu))


def gauss_panels(f, a: float, b: float, n_panels: int, order: int = 10
                 ) -> float:
    """Composite Gauss-Legendre; f must accept numpy arrays."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    pts = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    vals = np.asarray(f(pts), dtype=float).reshape(n_panels, order)
    return float(np.sum(vals @ weights * half))
