"""Panel quadrature primitives.

All integrals in the toolkit are assembled from two building blocks:

* fixed Gauss--Legendre panels (``gl_panels``), used when the integrand is
  smooth on a known scale and many integrals share the same nodes;
* Gauss--Kronrod G7/K15 panels (``gk_panels``), which return an embedded
  error estimate ``|K15 - G7|`` per panel.

Panel sums are always reduced per panel first and then summed along the
last axis in index order, so results do not depend on how a batch of
integrals is split across workers.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import QuadFail

# Kronrod 15-point abscissae (non-negative half) and weights, with the
# embedded 7-point Gauss weights on the odd-indexed abscissae.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])


def _build_k15():
    x = np.concatenate([-_XGK[:-1], _XGK[::-1]])
    wk = np.concatenate([_WGK[:-1], _WGK[::-1]])
    wg_half = np.zeros(8)
    wg_half[1::2] = _WG
    wg = np.concatenate([wg_half[:-1], wg_half[::-1]])
    return x, wk, wg


K15_X, K15_WK, K15_WG = _build_k15()


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss--Legendre nodes and weights on [-1, 1] (cached, read-only)."""
    x, w = np.polynomial.legendre.leggauss(int(n))
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_edges(a: float, b: float, max_len: float) -> np.ndarray:
    """Uniform panel edges covering ``[a, b]`` with panels no longer than ``max_len``."""
    length = b - a
    if length <= 0.0:
        return np.array([a, b], dtype=float)
    n = max(1, int(np.ceil(length / max_len)))
    return np.linspace(a, b, n + 1)


def oscillation_panel_length(freq: float, cap: float = 1.0) -> float:
    """Panel length resolving oscillations of angular frequency ``freq``.

    One panel spans at most half a period, which keeps a K15 panel far
    inside its asymptotic regime.
    """
    if freq <= 0.0:
        return cap
    return min(cap, np.pi / freq)


def gl_panels(edges: np.ndarray, order: int = 10) -> tuple[np.ndarray, np.ndarray]:
    """Flattened Gauss--Legendre nodes/weights on consecutive panels."""
    x, w = gauss_legendre(order)
    edges = np.asarray(edges, dtype=float)
    lo = edges[:-1, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    nodes = lo + half * (x[None, :] + 1.0)
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def gk_panels(edges: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Flattened K15 nodes with Kronrod and embedded Gauss weights."""
    edges = np.asarray(edges, dtype=float)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    nodes = mid + half * K15_X[None, :]
    return nodes.ravel(), (half * K15_WK).ravel(), (half * K15_WG).ravel()


def reduce_panels(values: np.ndarray, wk: np.ndarray, wg: np.ndarray,
                  n_panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Sum K15 panel contributions along the last axis.

    Parameters
    ----------
    values : ndarray, shape (..., n_panels * 15)
    wk, wg : ndarray, shape (n_panels * 15,)
    n_panels : int

    Returns
    -------
    total : ndarray, shape (...)
        Kronrod estimate.
    err : ndarray, shape (...)
        Sum of per-panel ``|K15 - G7|`` magnitudes.
    """
    shape = values.shape[:-1] + (n_panels, 15)
    v = values.reshape(shape)
    k = (v * wk.reshape(n_panels, 15)).sum(axis=-1)
    g = (v * wg.reshape(n_panels, 15)).sum(axis=-1)
    return k.sum(axis=-1), np.abs(k - g).sum(axis=-1)


def adaptive_gk(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                tol: float = 1e-10, initial_len: float = 1.0,
                max_panels: int = 200000) -> tuple[np.ndarray, float]:
    """Adaptive K15 quadrature of a vectorised integrand.

    ``f`` maps an array of nodes of shape (n,) to values of shape (n,) or
    (n, d).  Panels whose local error exceeds their share of ``tol`` are
    bisected until the total estimate meets ``tol``.

    Returns
    -------
    value : ndarray or complex
    err : float
    """
    if b == a:
        return np.zeros(()), 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    edges = panel_edges(a, b, initial_len)
    lo, hi = edges[:-1], edges[1:]
    done_val = []
    done_lo = []
    total_len = b - a
    while True:
        ed = np.stack([lo, hi], axis=1)
        mid = 0.5 * (ed[:, 0] + ed[:, 1])[:, None]
        half = 0.5 * (ed[:, 1] - ed[:, 0])[:, None]
        nodes = (mid + half * K15_X[None, :]).ravel()
        vals = np.asarray(f(nodes))
        extra = vals.shape[1:]
        v = vals.reshape((len(lo), 15) + extra)
        wk = (half * K15_WK).reshape((len(lo), 15) + (1,) * len(extra))
        wg = (half * K15_WG).reshape((len(lo), 15) + (1,) * len(extra))
        k = (v * wk).sum(axis=1)
        g = (v * wg).sum(axis=1)
        e = np.abs(k - g)
        if e.ndim > 1:
            e = e.reshape(len(lo), -1).max(axis=1)
        share = tol * (hi - lo) / total_len
        ok = e <= np.maximum(share, 1e-15 * np.abs(k).reshape(len(lo), -1).max(axis=1))
        for i in np.nonzero(ok)[0]:
            done_val.append((lo[i], k[i], e[i]))
        bad = ~ok
        if not bad.any():
            break
        if len(done_val) + 2 * int(bad.sum()) > max_panels:
            raise QuadFail(f"adaptive quadrature on [{a}, {b}] exceeded {max_panels} panels")
        blo, bhi = lo[bad], hi[bad]
        bmid = 0.5 * (blo + bhi)
        lo = np.concatenate([blo, bmid])
        hi = np.concatenate([bmid, bhi])
        order = np.argsort(lo, kind="stable")
        lo, hi = lo[order], hi[order]
    done_val.sort(key=lambda item: item[0])
    value = np.sum(np.stack([item[1] for item in done_val]), axis=0)
    err = float(sum(item[2] for item in done_val))
    return sign * value, err
