"""Executable tauberian and ergodic checks.

Each check first establishes its hypothesis, either by running a spectrum
estimator or by accepting an analytic certificate from the caller.  It
then measures the conclusion numerically and returns a
:class:`TauberianReport`.  "Membership in C₀" is tested as a dyadic-window
decay ladder: window suprema must decrease strictly until they fall below
``tau_decay·scale`` and must stay below it afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import func_model as fm
from . import kernels as kn
from . import spectra as sp
from . import transforms as tr
from .errors import HypothesisUnverified, PrecondError

THEOREM_IDS = ("Ingham_2_3_i", "Ingham_2_3_ii", "Primitive_2_3_iv", "Transfer_2_4_i",
               "Inclusion_2_4_ii", "Ergodic_2_4_iii", "Primitive_2_4_iv", "Ergodic_1_5")
VERIFIED = "Verified"
ASSUMED = "AssumedFromClosedForm"
DEFAULT_S_LADDER = (256.0, 512.0, 1024.0, 2048.0, 4096.0)
PROBE_STEP = 0.05


@dataclass
class TauberianReport:
    """Outcome of a tauberian check.

    Attributes
    ----------
    theorem_id : str
        One of :data:`THEOREM_IDS`.
    hypothesis_status : str
        ``"Verified"`` (numerically estimated) or ``"AssumedFromClosedForm"``.
    metrics : dict
        Named conclusion metrics (floats, or lists of floats for ladders).
    passed : bool
    """

    theorem_id: str
    hypothesis_status: str
    metrics: dict = field(default_factory=dict)
    passed: bool = False

    def to_dict(self) -> dict:
        return {"theorem_id": self.theorem_id, "hypothesis_status": self.hypothesis_status,
                "metrics": self.metrics, "pass": self.passed}


def _scale(phi: fm.FunctionDescriptor) -> float:
    b = phi.sup_norm_bound
    return b if math.isfinite(b) and b > 0 else 1.0


def decay_ladder_ok(values, threshold: float) -> bool:
    """Strictly decreasing until the first value below ``threshold``, below it afterwards."""
    v = [float(x) for x in values]
    for k, x in enumerate(v):
        if x < threshold:
            return all(y < threshold for y in v[k:])
        if k > 0 and not x < v[k - 1]:
            return False
    return False


def _probe_grid(omega: float) -> sp.FrequencyGrid:
    return sp.FrequencyGrid(omega - 2 * PROBE_STEP, omega + 2 * PROBE_STEP, PROBE_STEP)


def _convolved(phi: fm.FunctionDescriptor, k: kn.Kernel) -> fm.FunctionDescriptor:
    body = fm.convolve_body(fm.simplify_body(phi.body), k.id)
    return fm.make(body, phi.dim, phi.domain)


def _window_sups(fn, edges, spacing: float, both_tails: bool) -> list:
    sups = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        n = int(math.ceil((hi - lo) / spacing)) + 1
        t = np.linspace(lo, hi, n)
        if both_tails:
            t = np.concatenate([t, -t])
        sups.append(float(np.max(fm.norm(fn(t)))))
    return sups


# ---------------------------------------------------------------------------
# Ingham decay
# ---------------------------------------------------------------------------

def check_ingham_decay(phi: fm.FunctionDescriptor, k, window_ladder=None, *,
                       grid: sp.FrequencyGrid | None = None, assume_empty: bool = False,
                       thresholds: sp.Thresholds | None = None,
                       threads: int | None = None) -> TauberianReport:
    """Decay of ``φ*k`` on ``ℝ`` for ``φ`` with empty weak Laplace spectrum.

    ``φ`` is restricted to ``ℝ₊`` and extended by zero.  The hypothesis is
    estimated with :func:`spectra.weak_laplace_spectrum` on ``grid``, which
    defaults to ``supp k^`` padded by two steps; by the transfer law only that
    band reaches ``φ*k``.

    Parameters
    ----------
    window_ladder : sequence of float, optional
        Dyadic window edges ``T_0 < T_1 < …``; suprema of ``‖(φ*k)(t)‖`` are
        taken over ``T_j ≤ |t| ≤ T_{j+1}``.

    Raises
    ------
    HypothesisUnverified
        If any grid point of the weak-spectrum estimate is not Regular.
    """
    if isinstance(k, str):
        k = kn.get_kernel(k)
    th = thresholds or sp.Thresholds()
    theorem = "Ingham_2_3_i" if isinstance(k, kn.BandPassKernel) else "Ingham_2_3_ii"
    if theorem == "Ingham_2_3_ii" and not phi.bounded:
        raise PrecondError("the L¹-kernel form needs a bounded φ")
    half = fm.restrict_and_extend(phi)
    metrics: dict = {}
    if assume_empty:
        status = ASSUMED
    else:
        status = VERIFIED
        if grid is None:
            lo, hi = k.freq_support
            grid = sp.FrequencyGrid(lo - 2 * PROBE_STEP, hi + 2 * PROBE_STEP, PROBE_STEP)
        est = sp.weak_laplace_spectrum(half, grid, thresholds=thresholds, threads=threads)
        bad = [float(w) for w, c in zip(grid.points, est.classification) if c != sp.REGULAR]
        metrics["hypothesis_nonregular"] = len(bad)
        if bad:
            rep = TauberianReport(theorem, status, {"nonregular_points": bad}, False)
            raise HypothesisUnverified(
                f"weak Laplace spectrum not empty on supp k^: {len(bad)} non-Regular points", rep)
    if window_ladder is None:
        lo, hi = k.freq_support
        eps = 0.5 * (hi - lo)
        t0 = 4.0 + 16.0 / eps
        window_ladder = [t0 * 2.0 ** j for j in range(6)]
    edges = [float(x) for x in window_ladder]
    if len(edges) < 3 or any(b <= a for a, b in zip(edges[:-1], edges[1:])) or edges[0] < 0:
        raise PrecondError("window ladder must be increasing, non-negative, with ≥ 3 edges")
    fmax = max(1.0, max(abs(x) for x in k.freq_support))
    sups = _window_sups(lambda t: tr.convolve(half, k, t), edges, 0.5 / fmax, True)
    tau = th.tau_decay * _scale(phi)
    metrics.update({"window_edges": edges, "window_sup": sups, "final_sup": sups[-1],
                    "tau_decay": tau})
    return TauberianReport(theorem, status, metrics, decay_ladder_ok(sups, tau))


# ---------------------------------------------------------------------------
# bounded primitive
# ---------------------------------------------------------------------------

def _laplace_class(phi: fm.FunctionDescriptor, omega: float, thresholds, threads) -> str:
    est = sp.laplace_spectrum(phi, _probe_grid(omega), thresholds=thresholds, threads=threads)
    return est.classification[2]


def check_bounded_primitive(phi: fm.FunctionDescriptor, omega: float, S_ladder=DEFAULT_S_LADDER, *,
                            assume_regular: bool = False, spectrum_empty: bool | None = None,
                            spectrum_grid: sp.FrequencyGrid | None = None,
                            thresholds: sp.Thresholds | None = None,
                            threads: int | None = None) -> TauberianReport:
    """Behaviour of ``Q(s) = ∫₀^s e^{-iωt}φ(t)dt`` at a Laplace-regular ``ω``.

    Two branches:

    * ``Primitive_2_3_iv`` — the whole Laplace spectrum is empty (estimated
      on ``spectrum_grid`` unless ``spectrum_empty`` is given).  ``Q`` must
      converge: the deviation ladder ``sup_{[S_k,S_{k+1}]}‖Q − L̂‖`` decays
      below ``tau_decay·scale`` and ``L̂ = Q(S_max)`` matches the boundary
      limit ``lim_{a↘0} ℒφ(a+iω)`` within the combined tolerance.
    * ``Primitive_2_4_iv`` — only ``ω`` is known to be regular.  ``Q`` is
      required to stay bounded (log-log slope of window suprema below
      ``slope_bounded``); convergence is reported but not asserted.

    Raises
    ------
    HypothesisUnverified
        If ``ω`` is not classified Regular by :func:`spectra.laplace_spectrum`.
    """
    th = thresholds or sp.Thresholds()
    omega = float(omega)
    if not phi.bounded:
        raise PrecondError("bounded-primitive check needs a bounded φ")
    if assume_regular:
        status = ASSUMED
    else:
        status = VERIFIED
        cls = _laplace_class(phi, omega, thresholds, threads)
        if cls != sp.REGULAR:
            rep = TauberianReport("Primitive_2_4_iv", status, {"classification": cls}, False)
            raise HypothesisUnverified(f"ω = {omega} is {cls} for the Laplace spectrum", rep)
    if spectrum_empty is None:
        g = spectrum_grid or sp.FrequencyGrid(-5.0, 5.0, PROBE_STEP)
        est = sp.laplace_spectrum(phi, g, thresholds=thresholds, threads=threads)
        spectrum_empty = est.count(sp.REGULAR) == g.size
    S = np.asarray(S_ladder, dtype=float)
    if S.size < 3 or np.any(np.diff(S) <= 0) or S[0] <= 0:
        raise PrecondError("S ladder must be increasing and positive with ≥ 3 rungs")
    s = np.arange(S[0], S[-1] + 0.25, 0.5)
    Q = tr.modulated_primitive(phi, omega, s)
    L_hat = Q[-1]
    scale = _scale(phi)
    tau = th.tau_decay * scale
    dev, sup = [], []
    for lo, hi in zip(S[:-1], S[1:]):
        m = (s >= lo) & (s <= hi)
        dev.append(float(np.max(fm.norm(Q[m] - L_hat[None, :]))))
        sup.append(float(np.max(fm.norm(Q[m]))))
    B, B_err = tr.boundary_limit(phi, omega)
    gap = float(np.max(np.abs(L_hat - B)))
    metrics = {"omega": omega, "S_ladder": [float(x) for x in S], "deviation_ladder": dev,
               "sup_ladder": sup, "L_hat": [[float(z.real), float(z.imag)] for z in L_hat],
               "boundary_limit": [[float(z.real), float(z.imag)] for z in np.atleast_1d(B)],
               "limit_gap": gap, "boundary_err": float(B_err), "tau_decay": tau}
    if spectrum_empty:
        ok = decay_ladder_ok(dev, tau) and gap <= tau + float(B_err)
        return TauberianReport("Primitive_2_3_iv", status, metrics, bool(ok))
    mid = 0.5 * (S[:-1] + S[1:])
    slope = float(np.polyfit(np.log(mid), np.log(np.maximum(sup, 1e-300)), 1)[0])
    metrics["sup_slope"] = slope
    metrics["converges"] = bool(decay_ladder_ok(dev, tau))
    return TauberianReport("Primitive_2_4_iv", status, metrics, slope < th.slope_bounded)


# ---------------------------------------------------------------------------
# ergodicity at a regular point
# ---------------------------------------------------------------------------

def check_regular_zero_ergodic(phi: fm.FunctionDescriptor, omega: float = 0.0, *,
                               via: str = "reduced", assume_regular: bool = False,
                               tol: float = tr.TOL_ERGODIC,
                               thresholds: sp.Thresholds | None = None,
                               threads: int | None = None) -> TauberianReport:
    """``γ_{−ω}φ`` is ergodic with mean 0 when ``ω`` is a regular point.

    ``via="reduced"`` takes the hypothesis from
    :func:`spectra.reduced_beurling_c0` (``Ergodic_1_5``); ``via="weak"``
    from :func:`spectra.weak_laplace_spectrum` on ``φ|ℝ₊``
    (``Ergodic_2_4_iii``).

    Raises
    ------
    HypothesisUnverified
        If ``ω`` is not Regular for the chosen estimator.
    """
    if via == "reduced":
        theorem, target = "Ergodic_1_5", phi
    elif via == "weak":
        theorem, target = "Ergodic_2_4_iii", fm.restrict_and_extend(phi)
    else:
        raise PrecondError(f"unknown hypothesis route {via!r}")
    if not phi.bounded:
        raise PrecondError("ergodic check needs a bounded φ")
    omega = float(omega)
    if assume_regular:
        status = ASSUMED
    else:
        status = VERIFIED
        g = _probe_grid(omega)
        if via == "reduced":
            est = sp.reduced_beurling_c0(target, g, thresholds=thresholds, threads=threads)
        else:
            est = sp.weak_laplace_spectrum(target, g, thresholds=thresholds, threads=threads)
        cls = est.classification[2]
        if cls != sp.REGULAR:
            rep = TauberianReport(theorem, status, {"classification": cls}, False)
            raise HypothesisUnverified(f"ω = {omega} is {cls} for {est.kind}", rep)
    shifted = fm.modulate(target, -omega) if omega != 0.0 else target
    rep = tr.ergodic_mean(shifted, tol=tol)
    mean_norm = float(np.max(np.abs(rep.mean))) if rep.verdict != "NotErgodic" else math.inf
    metrics = {"omega": omega, "verdict": rep.verdict, "mean_norm": mean_norm,
               "final_deviation": rep.params["final_deviation"], "tol_ergodic": tol}
    ok = rep.verdict == "Ergodic" and mean_norm <= tol
    return TauberianReport(theorem, status, metrics, bool(ok))


# ---------------------------------------------------------------------------
# transfer and inclusion
# ---------------------------------------------------------------------------

def check_transfer(phi: fm.FunctionDescriptor, k, grid: sp.FrequencyGrid, *,
                   thresholds: sp.Thresholds | None = None,
                   threads: int | None = None) -> TauberianReport:
    """Weak-Singular points of ``φ*k`` lie in ``supp k^ ∩ sp^{wℒ}(φ)``, within one step.

    Undecided points of ``φ`` count as possibly singular; Undecided points
    of ``φ*k`` are exempt.
    """
    if isinstance(k, str):
        k = kn.get_kernel(k)
    base = sp.weak_laplace_spectrum(phi, grid, thresholds=thresholds, threads=threads)
    conv = sp.weak_laplace_spectrum(_convolved(phi, k), grid, thresholds=thresholds,
                                    threads=threads)
    pts = grid.points
    allowed = np.array([c != sp.REGULAR for c in base.classification])
    near = allowed.copy()
    near[1:] |= allowed[:-1]
    near[:-1] |= allowed[1:]
    lo, hi = k.freq_support
    in_band = (pts >= lo - grid.step * (1 + 1e-9)) & (pts <= hi + grid.step * (1 + 1e-9))
    sing = conv.indices(sp.SINGULAR)
    bad = [float(pts[i]) for i in sing if not (near[i] and in_band[i])]
    metrics = {"kernel": k.id, "violations": len(bad), "violation_points": bad,
               "conv_singular": [float(pts[i]) for i in sing]}
    return TauberianReport("Transfer_2_4_i", VERIFIED, metrics, not bad)


def check_inclusion(phi: fm.FunctionDescriptor, grid: sp.FrequencyGrid, *,
                    thresholds: sp.Thresholds | None = None,
                    threads: int | None = None) -> TauberianReport:
    """No grid point is ReducedBeurlingC0-Singular while WeakLaplace-Regular."""
    red = sp.reduced_beurling_c0(phi, grid, thresholds=thresholds, threads=threads)
    weak = sp.weak_laplace_spectrum(fm.restrict_and_extend(phi), grid, thresholds=thresholds,
                                    threads=threads)
    pts = grid.points
    bad = [float(pts[i]) for i in range(grid.size)
           if red.classification[i] == sp.SINGULAR and weak.classification[i] == sp.REGULAR]
    metrics = {"violations": len(bad), "violation_points": bad,
               "reduced_singular": [float(w) for w in red.singular_points],
               "weak_singular": [float(w) for w in weak.singular_points]}
    return TauberianReport("Inclusion_2_4_ii", VERIFIED, metrics, not bad)


__all__ = [
    "TauberianReport", "THEOREM_IDS", "VERIFIED", "ASSUMED", "decay_ladder_ok",
    "check_ingham_decay", "check_bounded_primitive", "check_regular_zero_ergodic",
    "check_transfer", "check_inclusion",
]
