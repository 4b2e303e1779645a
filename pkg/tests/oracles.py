"""Independent brute-force oracles used to freeze and cross-check reference values.

Nothing here shares code with the transform fast paths: integrals are
composite Simpson sums on uniform grids, refined once and Richardson
extrapolated (Simpson is fourth order, hence the 16/15 weights).
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate


def simpson_richardson(f, a: float, b: float, n: int) -> complex | np.ndarray:
    """Richardson-extrapolated composite Simpson rule on ``[a, b]``.

    ``f`` maps an array of nodes of shape (m,) to values of shape (m,) or
    (m, d).  ``n`` is the number of intervals of the coarse rule (even).
    """
    n = int(n) + (int(n) % 2)
    coarse_x = np.linspace(a, b, n + 1)
    fine_x = np.linspace(a, b, 2 * n + 1)
    fine = np.asarray(f(fine_x))
    coarse = fine[::2]
    s1 = integrate.simpson(coarse, x=coarse_x, axis=0)
    s2 = integrate.simpson(fine, x=fine_x, axis=0)
    return (16.0 * s2 - s1) / 15.0


def laplace_oracle(phi_eval, lam: complex, bound: float, side: int = 1,
                   tail: float = 1e-11, h: float = 0.01, horizon: float | None = None):
    """``∫₀^∞ e^{-λt} φ(t) dt`` (side +1) or ``-∫₀^∞ e^{λt} φ(-t) dt`` (side -1).

    The horizon is chosen so the exponential tail ``bound·e^{-|Re λ| T}/|Re λ|``
    falls below ``tail``.
    """
    a = abs(lam.real)
    if horizon is None:
        horizon = max(1.0, math.log(max(bound, 1e-300) / (a * tail)) / a)
    n = int(math.ceil(horizon / h))
    if side > 0:
        return simpson_richardson(lambda t: np.exp(-lam * t)[:, None] * phi_eval(t), 0.0, horizon, n)
    return -simpson_richardson(lambda t: np.exp(lam * t)[:, None] * phi_eval(-t), 0.0, horizon, n)


def convolution_oracle(phi_eval, k_eval, t: float, radius: float, h: float = 0.005):
    """``∫_{-R}^{R} φ(t - u) k(u) du`` by Simpson + Richardson."""
    n = int(math.ceil(2 * radius / h))
    return simpson_richardson(lambda u: phi_eval(t - u) * k_eval(u)[:, None], -radius, radius, n)
