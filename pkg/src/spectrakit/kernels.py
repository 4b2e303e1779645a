"""Integrable filter kernels with compactly supported Fourier transforms.

Fourier convention: ``f^(s) = ∫ exp(-i s t) f(t) dt``; the inverse carries
``1/(2π)``.

The basic object is the bump-squared kernel ``ψ = (φ_bump^)²`` where
``φ_bump(u) = a·exp(1/(u²-1))`` on ``(-1, 1)``.  Since ``φ_bump`` is
supported in ``[-1, 1]``, ``ψ^ = 2π (φ_bump * φ_bump)`` is supported in
``[-2, 2]``; the constant ``a`` is fixed by ``ψ^(0) = ∫ψ = 1``.

Every kernel used by the toolkit is a member of the two-parameter
band-pass family

    b_{ω,ε}(t) = exp(iωt)·(ε/2)·ψ(εt/2),    b^_{ω,ε}(s) = ψ^(2(s-ω)/ε),

which contains ``ψ = b_{0,2}`` and the approximate identity
``f_n = n ψ(n·) = b_{0,2n}``.  The family is closed under modulation,
which keeps convolution simplification inside it.  In addition,
``inverse_filter`` builds a kernel whose transform is ``1/k^`` on a
prescribed compact set.
"""

from __future__ import annotations

import math
import os
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import PrecondError, QuadFail
from .quadrature import adaptive_gk, gauss_legendre, gl_panels

EPS_SUPP = 1e-12
EPS_QUAD = 1e-8

TABLE_VERSION = "bump-ft-v1"
TABLE_STEP = 2.0 ** -8
TABLE_MAX = 256.0

_GL_BUMP_ORDER = 96


def _bump(u: np.ndarray) -> np.ndarray:
    """Unnormalised bump ``exp(1/(u²-1))`` on (-1, 1), zero elsewhere."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    out[inside] = np.exp(1.0 / (ui * ui - 1.0))
    return out


def _bump_deriv(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    d = ui * ui - 1.0
    out[inside] = np.exp(1.0 / d) * (-2.0 * ui / (d * d))
    return out


@lru_cache(maxsize=1)
def bump_constant() -> float:
    """Normalisation ``a`` with ``∫ψ = 2π a² ∫ bump² = 1``."""
    val, _ = adaptive_gk(lambda u: _bump(u) ** 2, -1.0, 1.0, tol=1e-15, initial_len=0.25)
    return 1.0 / math.sqrt(2.0 * math.pi * float(val))


def _bump_ft_direct(t: np.ndarray) -> np.ndarray:
    """``φ_bump^(t) = 2a ∫₀¹ cos(tu) bump(u) du`` by panelled Gauss--Legendre.

    The number of panels grows with ``|t|`` so each panel sees at most a
    fraction of an oscillation.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    a = bump_constant()
    out = np.empty_like(t)
    tmax = float(np.max(np.abs(t))) if t.size else 0.0
    n_panels = max(8, int(math.ceil(tmax / 4.0)))
    nodes, weights = gl_panels(np.linspace(0.0, 1.0, n_panels + 1), order=24)
    wb = weights * _bump(nodes)
    for start in range(0, t.size, 2048):
        tt = t[start:start + 2048]
        out[start:start + 2048] = 2.0 * a * (np.cos(np.outer(tt, nodes)) * wb).sum(axis=1)
    return out


def _compute_table() -> np.ndarray:
    """Tabulate ``φ_bump^`` on ``[0, TABLE_MAX]`` with adaptive Gauss--Kronrod."""
    grid = np.arange(0.0, TABLE_MAX + TABLE_STEP / 2, TABLE_STEP)
    a = bump_constant()
    out = np.empty_like(grid)
    block = 1024
    for start in range(0, grid.size, block):
        tt = grid[start:start + block]
        val, err = adaptive_gk(lambda u: np.cos(np.outer(u, tt)) * _bump(u)[:, None],
                               0.0, 1.0, tol=1e-14, initial_len=1.0 / 64)
        out[start:start + block] = 2.0 * a * np.real(val)
    return out


def kernel_cache_path() -> Path:
    """Location of the bump-transform table (``SPECTRA_KERNEL_CACHE`` overrides)."""
    env = os.environ.get("SPECTRA_KERNEL_CACHE")
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "spectrakit" / f"{TABLE_VERSION}.npz"


_TABLE_LOCK = threading.Lock()
_TABLE: dict[str, object] = {}


def _load_or_build_table() -> np.ndarray:
    path = kernel_cache_path()
    try:
        with np.load(path, allow_pickle=False) as data:
            if (str(data["version"]) == TABLE_VERSION
                    and float(data["step"]) == TABLE_STEP
                    and float(data["max"]) == TABLE_MAX):
                return np.array(data["values"], dtype=float)
    except (OSError, KeyError, ValueError):
        pass
    values = _compute_table()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + f".{os.getpid()}.tmp.npz")
        np.savez(tmp, version=np.array(TABLE_VERSION), step=np.array(TABLE_STEP),
                 max=np.array(TABLE_MAX), values=values)
        os.replace(tmp, path)
    except OSError:
        pass
    return values


def _spline() -> CubicSpline:
    with _TABLE_LOCK:
        sp = _TABLE.get("spline")
        if sp is None:
            values = _load_or_build_table()
            grid = np.arange(values.size) * TABLE_STEP
            sp = CubicSpline(grid, values, bc_type=((1, 0.0), "not-a-knot"))
            _TABLE["spline"] = sp
        return sp


def bump_ft(t) -> np.ndarray:
    """Fourier transform of the normalised bump, ``φ_bump^(t)`` (real, even)."""
    t = np.abs(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    inside = t <= TABLE_MAX
    if inside.any():
        out[inside] = _spline()(t[inside])
    if (~inside).any():
        out[~inside] = _bump_ft_direct(t[~inside])
    return out


def psi_time(t) -> np.ndarray:
    """``ψ(t) = φ_bump^(t)²``, set to zero beyond the table (``|t| > TABLE_MAX``).

    Past the table ``ψ < 3·10⁻¹⁷`` and the discarded mass is below
    ``10⁻¹⁵``, far inside ``ε_supp``; skipping the direct bump transform
    there keeps long primitives and wide convolutions cheap.
    """
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    out = np.zeros(flat.shape)
    inside = np.abs(flat) <= TABLE_MAX
    v = bump_ft(flat[inside])
    out[inside] = v * v
    return out.reshape(t.shape)


_PSI_HAT_STEP = 2.0 ** -13


def psi_hat(s) -> np.ndarray:
    """``ψ^(s) = 2π a² ∫ bump(u) bump(s-u) du``; zero for ``|s| ≥ 2``.

    Evaluated from a cubic spline through :func:`psi_hat_direct` on a grid of
    step ``2⁻¹³`` over ``[0, 2]`` (ψ^ is even); the interpolation error is
    below ``10⁻¹³``.
    """
    s = np.abs(np.atleast_1d(np.asarray(s, dtype=float)))
    out = np.zeros_like(s)
    inside = s < 2.0
    if inside.any():
        out[inside] = _psi_hat_spline()(s[inside])
    return out


@lru_cache(maxsize=1)
def _psi_hat_spline() -> CubicSpline:
    grid = np.linspace(0.0, 2.0, int(round(2.0 / _PSI_HAT_STEP)) + 1)
    return CubicSpline(grid, psi_hat_direct(grid), bc_type=((1, 0.0), (1, 0.0)))


def psi_hat_direct(s) -> np.ndarray:
    """Reference evaluation of ``ψ^`` by Gauss--Legendre on the overlap of the bumps."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.zeros_like(s)
    inside = np.abs(s) < 2.0
    if inside.any():
        si = s[inside]
        lo = np.maximum(-1.0, si - 1.0)
        hi = np.minimum(1.0, si + 1.0)
        x, w = gauss_legendre(_GL_BUMP_ORDER)
        half = 0.5 * (hi - lo)
        u = 0.5 * (hi + lo)[:, None] + half[:, None] * x[None, :]
        vals = _bump(u) * _bump(si[:, None] - u)
        out[inside] = 2.0 * math.pi * bump_constant() ** 2 * half * (vals * w).sum(axis=1)
    return out


def psi_hat_deriv(s) -> np.ndarray:
    """Derivative of ``ψ^``."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.zeros_like(s)
    inside = np.abs(s) < 2.0
    if inside.any():
        si = s[inside]
        lo = np.maximum(-1.0, si - 1.0)
        hi = np.minimum(1.0, si + 1.0)
        x, w = gauss_legendre(_GL_BUMP_ORDER)
        half = 0.5 * (hi - lo)
        u = 0.5 * (hi + lo)[:, None] + half[:, None] * x[None, :]
        vals = _bump(u) * _bump_deriv(si[:, None] - u)
        out[inside] = 2.0 * math.pi * bump_constant() ** 2 * half * (vals * w).sum(axis=1)
    return out


@lru_cache(maxsize=1)
def _psi_profile() -> dict:
    """Scalar facts about ψ used for support and moment bookkeeping."""
    t = np.arange(0.0, TABLE_MAX, 1.0 / 64)
    p = psi_time(t)
    # cumulative tail mass ∫_{|u|>T} ψ, by the trapezoid rule on a fine grid
    seg = 0.5 * (p[1:] + p[:-1]) * (t[1] - t[0])
    tail = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]]) * 2.0
    # running maximum from the right: sup_{|u| ≥ T} ψ
    sup_right = np.maximum.accumulate(p[::-1])[::-1]
    mass = float(2.0 * seg.sum())
    first_moment = float(2.0 * (0.5 * (t[1:] * p[1:] + t[:-1] * p[:-1]) * (t[1] - t[0])).sum())
    return {"t": t, "tail": tail, "sup_right": sup_right, "mass": mass,
            "first_moment": first_moment, "peak": float(p[0])}


def psi_support_radius(level: float) -> float:
    """Smallest ``T`` with ``ψ(u) < level`` for all ``|u| ≥ T``."""
    prof = _psi_profile()
    idx = np.nonzero(prof["sup_right"] >= level)[0]
    if idx.size == 0:
        return 0.0
    return float(prof["t"][min(idx[-1] + 1, prof["t"].size - 1)])


def psi_tail_radius(mass: float) -> float:
    """Smallest ``T`` with ``∫_{|u|>T} ψ < mass``."""
    prof = _psi_profile()
    idx = np.nonzero(prof["tail"] >= mass)[0]
    if idx.size == 0:
        return 0.0
    return float(prof["t"][min(idx[-1] + 1, prof["t"].size - 1)])


def smooth_step(x) -> np.ndarray:
    """C^∞ step: 0 for x ≤ 0, 1 for x ≥ 1."""
    x = np.asarray(x, dtype=float)

    def sig(y):
        out = np.zeros_like(y)
        pos = y > 0
        out[pos] = np.exp(-1.0 / y[pos])
        return out

    a = sig(x)
    b = sig(1.0 - x)
    return a / (a + b)


@dataclass(frozen=True, eq=False)
class Kernel:
    """An integrable filter ``f`` with known transform.

    Attributes
    ----------
    id : str
        Stable identifier, resolvable with :func:`get_kernel`.
    freq_support : tuple of float
        ``[s_lo, s_hi]`` outside which ``f^`` vanishes identically.
    l1_norm : float
        Upper bound for ``∫|f|``.
    effective_time_support : tuple of float
        ``|f(t)| < ε_supp`` outside this interval.
    first_moment : float
        ``∫|t||f(t)| dt``.
    """

    id: str
    freq_support: tuple[float, float]
    l1_norm: float
    effective_time_support: tuple[float, float]
    first_moment: float
    params: dict = field(default_factory=dict)

    def time_eval(self, t) -> np.ndarray:
        raise NotImplementedError

    def freq_eval(self, s) -> np.ndarray:
        raise NotImplementedError

    def freq_deriv(self, s) -> np.ndarray:
        raise NotImplementedError

    def tail_radius(self, mass: float) -> float:
        """Radius ``T`` beyond which the kernel carries less than ``mass`` of L¹ norm."""
        raise NotImplementedError

    def modulated(self, nu: float) -> "Kernel":
        """Kernel ``exp(iνt) f(t)``."""
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, Kernel) and other.id == self.id

    def __hash__(self):
        return hash(self.id)


class BandPassKernel(Kernel):
    """``b(t) = exp(iωt) (ε/2) ψ(εt/2)``, ``b^(s) = ψ^(2(s-ω)/ε)``."""

    def __init__(self, omega: float, eps: float):
        if not (eps > 0.0 and math.isfinite(eps)):
            raise PrecondError(f"band-pass width must be positive, got {eps}")
        omega = float(omega)
        eps = float(eps)
        prof = _psi_profile()
        scale = 2.0 / eps
        # |b(t)| = (ε/2) ψ(εt/2) < ε_supp  <=>  ψ(εt/2) < 2 ε_supp / ε
        radius = scale * psi_support_radius(min(1.0, EPS_SUPP / (0.5 * eps)))
        object.__setattr__(self, "id", kernel_id_for(omega, eps))
        object.__setattr__(self, "freq_support", (omega - eps, omega + eps))
        object.__setattr__(self, "l1_norm", prof["mass"] * (1.0 + 1e-9))
        object.__setattr__(self, "effective_time_support", (-radius, radius))
        object.__setattr__(self, "first_moment", scale * prof["first_moment"])
        object.__setattr__(self, "params", {"omega": omega, "eps": eps})

    @property
    def omega(self) -> float:
        return self.params["omega"]

    @property
    def eps(self) -> float:
        return self.params["eps"]

    @property
    def peak(self) -> float:
        return 0.5 * self.eps * _psi_profile()["peak"]

    def time_eval(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        env = 0.5 * self.eps * psi_time(0.5 * self.eps * t)
        if self.omega == 0.0:
            return env.astype(complex)
        return np.exp(1j * self.omega * t) * env

    def envelope(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return 0.5 * self.eps * psi_time(0.5 * self.eps * t)

    def freq_eval(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return psi_hat(2.0 * (s - self.omega) / self.eps).reshape(s.shape)

    def freq_deriv(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return (2.0 / self.eps) * psi_hat_deriv(2.0 * (s - self.omega) / self.eps).reshape(s.shape)

    def tail_radius(self, mass: float) -> float:
        return (2.0 / self.eps) * psi_tail_radius(mass)

    def modulated(self, nu: float) -> "Kernel":
        return band_pass(self.omega + nu, self.eps)


class InverseFilterKernel(Kernel):
    """Kernel ``g`` with ``g^ = χ / k^`` for a smooth cutoff ``χ``.

    ``χ ≡ 1`` on ``[lo, hi]`` and vanishes outside ``[lo - m, hi + m]``; the
    time-domain values come from the inverse Fourier integral evaluated by
    panelled Gauss--Legendre quadrature.
    """

    def __init__(self, base: Kernel, lo: float, hi: float, margin: float):
        self.base = base
        self.lo, self.hi, self.margin = float(lo), float(hi), float(margin)
        s = np.linspace(lo - margin, hi + margin, 2001)
        khat = np.abs(base.freq_eval(s))
        if khat.min() <= 1e-6:
            raise PrecondError("kernel transform vanishes on the enlarged target set; "
                               "no inverse filter exists there")
        self._nodes, self._weights = gl_panels(
            np.linspace(lo - margin, hi + margin, 65), order=16)
        self._ghat_nodes = self.freq_eval(self._nodes)
        probe = np.linspace(-400.0, 400.0, 8001)
        vals = np.abs(self.time_eval(probe))
        big = probe[vals > EPS_SUPP * max(vals.max(), 1e-300)]
        radius = float(np.max(np.abs(big))) if big.size else 0.0
        l1 = float(np.trapezoid(vals, probe)) * 1.01
        m1 = float(np.trapezoid(np.abs(probe) * vals, probe)) * 1.01
        object.__setattr__(self, "id", f"inverse:{lo!r}:{hi!r}:{margin!r}:{base.id}")
        object.__setattr__(self, "freq_support", (lo - margin, hi + margin))
        object.__setattr__(self, "l1_norm", l1)
        object.__setattr__(self, "effective_time_support", (-radius, radius))
        object.__setattr__(self, "first_moment", m1)
        object.__setattr__(self, "params", {"lo": lo, "hi": hi, "margin": margin})

    def cutoff(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        left = smooth_step((s - (self.lo - self.margin)) / self.margin)
        right = smooth_step(((self.hi + self.margin) - s) / self.margin)
        return left * right

    def freq_eval(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        chi = self.cutoff(s)
        out = np.zeros(s.shape, dtype=complex)
        nz = chi > 0
        out[nz] = chi[nz] / self.base.freq_eval(s[nz])
        return out

    def freq_deriv(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        h = 1e-5
        return (self.freq_eval(s + h) - self.freq_eval(s - h)) / (2 * h)

    def time_eval(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty(t.shape, dtype=complex)
        wg = self._weights * self._ghat_nodes
        for start in range(0, t.size, 1024):
            tt = t[start:start + 1024]
            out[start:start + 1024] = (np.exp(1j * np.outer(tt, self._nodes)) * wg).sum(axis=1)
        return out / (2.0 * math.pi)

    def tail_radius(self, mass: float) -> float:
        return self.effective_time_support[1]

    def modulated(self, nu: float) -> "Kernel":
        raise PrecondError("inverse filters are not closed under modulation")


def kernel_id_for(omega: float, eps: float) -> str:
    """Canonical identifier of ``b_{ω,ε}``."""
    omega = float(omega) + 0.0
    eps = float(eps)
    if omega == 0.0 and eps == 2.0:
        return "psi"
    if omega == 0.0 and (eps / 2.0).is_integer() and eps > 0:
        return f"approx_identity:{int(eps // 2)}"
    return f"band_pass:{omega!r}:{eps!r}"


_REGISTRY: dict[str, Kernel] = {}
_REG_LOCK = threading.Lock()


def band_pass(omega: float, eps: float) -> BandPassKernel:
    """Band-pass kernel centred at ``omega`` with transform supported in ``[ω-ε, ω+ε]``."""
    key = kernel_id_for(omega, eps)
    with _REG_LOCK:
        k = _REGISTRY.get(key)
    if k is None:
        k = BandPassKernel(omega, eps)
        with _REG_LOCK:
            k = _REGISTRY.setdefault(key, k)
    return k


def make_psi() -> BandPassKernel:
    """The bump-squared kernel ψ (``ψ ≥ 0``, ``ψ^ ≥ 0``, ``supp ψ^ = [-2, 2]``, ``ψ^(0) = 1``)."""
    return band_pass(0.0, 2.0)


def approximate_identity(n: int) -> BandPassKernel:
    """``f_n(t) = n ψ(nt)``, with ``f_n^(s) = ψ^(s/n)``."""
    n = int(n)
    if n < 1:
        raise PrecondError("approximate identity index must be a positive integer")
    return band_pass(0.0, 2.0 * n)


def inverse_filter(k: Kernel, lo: float, hi: float, margin: float | None = None) -> InverseFilterKernel:
    """Construct ``g`` with ``k^ g^ = 1`` on ``[lo, hi]``."""
    if margin is None:
        margin = 0.25 * max(hi - lo, 0.2)
    g = InverseFilterKernel(k, lo, hi, margin)
    with _REG_LOCK:
        _REGISTRY.setdefault(g.id, g)
    return g


def get_kernel(kernel_id: str) -> Kernel:
    """Resolve a kernel identifier."""
    if kernel_id == "psi":
        return make_psi()
    parts = kernel_id.split(":")
    try:
        if parts[0] == "approx_identity" and len(parts) == 2:
            return approximate_identity(int(parts[1]))
        if parts[0] == "band_pass" and len(parts) == 3:
            return band_pass(float(parts[1]), float(parts[2]))
    except ValueError as exc:
        raise PrecondError(f"malformed kernel id {kernel_id!r}") from exc
    with _REG_LOCK:
        k = _REGISTRY.get(kernel_id)
    if k is None:
        raise PrecondError(f"unknown kernel id {kernel_id!r}")
    return k


def convolve_character(omega: float, k: Kernel) -> complex:
    """Eigenvalue ``μ`` in ``γ_ω * k = μ γ_ω``; equals ``k^(ω)``."""
    return complex(np.asarray(k.freq_eval(np.array([float(omega)])))[0])


def verify_transform(k: Kernel, s, tol: float = EPS_QUAD) -> float:
    """Max deviation between ``freq_eval`` and quadrature of ``∫ e^{-ist} k(t) dt``.

    The integral runs over ``effective_time_support`` with adaptive K15.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    lo, hi = k.effective_time_support
    val, _ = adaptive_gk(lambda t: np.exp(-1j * np.outer(t, s)) * k.time_eval(t)[:, None],
                         lo, hi, tol=tol * 1e-2, initial_len=0.5)
    return float(np.max(np.abs(val - k.freq_eval(s))))


__all__ = [
    "Kernel", "BandPassKernel", "InverseFilterKernel", "make_psi", "approximate_identity",
    "band_pass", "inverse_filter", "get_kernel", "convolve_character", "psi_time", "psi_hat",
    "psi_hat_direct",
    "psi_hat_deriv", "bump_ft", "bump_constant", "kernel_cache_path", "verify_transform",
    "EPS_SUPP", "EPS_QUAD", "QuadFail",
]
