"""Named invariant suites run by ``spectrakit verify``.

Each suite returns a :class:`SuiteResult`: an ordered list of named
assertions, each with a pass flag, the grid points that failed and the
metric values behind the verdict.  Suites never raise on an assertion
failure; the CLI maps ``SuiteResult.passed`` to the exit code.

Comparisons between classification arrays count *flips*: nodes where one
array says ``Regular`` and the other ``Singular``.  ``Undecided`` is exempt
everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import corpus as cp
from . import func_model as fm
from . import kernels as kn
from . import semigroup_lab as sg
from . import spectra as sp
from . import tauberian as tb
from . import transforms as tr
from .errors import HypothesisUnverified, SuiteAssertionError
from .spectra import REGULAR, SINGULAR, FrequencyGrid

SHIFT_OMEGAS = (1.0, -2.5)
TRANSLATIONS = (1.0, 10.0)
MOLLIFIER_H = (0.5, 1.0)
G_ZERO_TOL = 1e-3
CALCULUS_KINDS = ("Laplace", "Carleman", "Beurling")
UNIFORM_PAIRS = (("Laplace", "UniformLaplace"), ("Carleman", "UniformCarleman"))
N_SEEDED_SYSTEMS = 20
ORBIT_TOL = 1e-6
ORBIT_LAMBDAS = (0.5 + 0.5j, 1.0, 0.3 - 2.0j, 2.0 + 1.0j)

DEFAULT_GRIDS = {
    "prop2_1": "-3:3:0.05",
    "eq1_11": "-5:5:0.05",
    "eq1_14": "-3:3:0.05",
    "prop4_2": "-3:3:0.05",
    "cor5_2": "-5:5:0.05",
    "sec3": "-5:5:0.05",
    "thm2_3": "-5:5:0.05",
    "thm2_4": "-3:3:0.05",
    "prop1_5": "-5:5:0.05",
}
SUITES = tuple(DEFAULT_GRIDS)


@dataclass
class Assertion:
    """One named check inside a suite."""

    name: str
    passed: bool
    diagnostics: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"name": self.name, "pass": bool(self.passed), "diagnostics": self.diagnostics,
                "failures": self.failures}


@dataclass
class SuiteResult:
    name: str
    grid: FrequencyGrid
    assertions: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    @property
    def failed(self) -> list:
        return [a for a in self.assertions if not a.passed]

    def add(self, name: str, passed: bool, diagnostics: dict | None = None,
            failures: list | None = None) -> Assertion:
        a = Assertion(name, bool(passed), diagnostics or {}, failures or [])
        self.assertions.append(a)
        return a

    def raise_on_failure(self) -> None:
        if not self.passed:
            raise SuiteAssertionError(f"suite {self.name}: {len(self.failed)} assertion(s) failed",
                                      [a.to_dict() for a in self.failed])

    def to_dict(self) -> dict:
        return {"suite": self.name, "grid": self.grid.to_dict(), "pass": self.passed,
                "n_assertions": len(self.assertions), "n_failed": len(self.failed),
                "assertions": [a.to_dict() for a in self.assertions]}


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def flips(a, b, points) -> list:
    """Nodes where one classification is Regular and the other Singular."""
    out = []
    for w, x, y in zip(points, a, b):
        if {x, y} == {REGULAR, SINGULAR}:
            out.append({"omega": round(float(w), 12), "left": x, "right": y})
    return out


def _applicable(phi: fm.FunctionDescriptor, kind: str) -> bool:
    """Whether ``kind`` is defined for ``phi`` (domain and boundedness)."""
    full = not phi.domain.is_half
    bounded = math.isfinite(phi.sup_norm_bound)
    if kind == "Beurling":
        return full
    if kind in ("Carleman", "UniformCarleman"):
        return full and bounded
    return bounded


def _shifted(grid: FrequencyGrid, omega0: float) -> FrequencyGrid:
    return FrequencyGrid(grid.omega_min + omega0, grid.omega_max + omega0, grid.step)


def _g_abs(z: float) -> float:
    """``|g(iz)|`` for the mollifier symbol ``g(z) = (1 - e^{-z})/z``."""
    return 1.0 if z == 0 else abs(math.sin(0.5 * z) / (0.5 * z))


def mollifier_heights(omega: float) -> list:
    """The ``h``-set for recovery at ``omega``: the defaults, plus ``π/|ω|`` if
    some default ``h`` sits on a zero of ``g(iωh)``."""
    hs = list(MOLLIFIER_H)
    if any(_g_abs(omega * h) < G_ZERO_TOL for h in hs):
        hs.append(math.pi / abs(omega))
    return hs


def _sing_list(est: sp.SpectrumEstimate) -> list:
    return [round(float(w), 12) for w in est.singular_points]


def _entries(names=None) -> list:
    entries = cp.standard_corpus()
    if names is not None:
        entries = [e for e in entries if e.name in names]
    return entries


def _set_check(est: sp.SpectrumEstimate, known: cp.Known, grid: FrequencyGrid) -> list:
    """Failures of ``must ⊆ Singular ⊆ may`` for a known set (one-step slack)."""
    must, may = known.mask(grid, slack=1.0)
    cls = np.array(est.classification)
    pts = grid.points
    out = []
    for i in np.nonzero(must & (cls == REGULAR))[0]:
        out.append({"omega": round(float(pts[i]), 12), "expected": SINGULAR, "got": cls[i]})
    for i in np.nonzero(~may & (cls == SINGULAR))[0]:
        out.append({"omega": round(float(pts[i]), 12), "expected": REGULAR, "got": cls[i]})
    return out


# ---------------------------------------------------------------------------
# spectral calculus
# ---------------------------------------------------------------------------

def suite_prop2_1(grid: FrequencyGrid, threads: int | None = None, entries=None) -> SuiteResult:
    """Shift, translation and mollifier laws over the corpus."""
    res = SuiteResult("prop2_1", grid)
    for e in _entries(entries):
        phi = e.descriptor
        for kind in CALCULUS_KINDS:
            if not _applicable(phi, kind):
                continue
            base = sp.estimate(phi, kind, grid, threads=threads)
            for w0 in SHIFT_OMEGAS:
                g2 = _shifted(grid, w0)
                est = sp.estimate(fm.modulate(phi, w0), kind, g2, threads=threads)
                fl = flips(base.classification, est.classification, grid.points)
                res.add(f"shift:{e.name}:{kind}:{w0:g}", not fl,
                        {"n_flips": len(fl), "singular": _sing_list(est)}, fl)
            for a in TRANSLATIONS:
                if phi.domain.is_half and a < 0:
                    continue
                est = sp.estimate(fm.translate(phi, a), kind, grid, threads=threads)
                fl = flips(base.classification, est.classification, grid.points)
                res.add(f"translate:{e.name}:{kind}:{a:g}", not fl,
                        {"n_flips": len(fl), "singular": _sing_list(est)}, fl)
            if kind == "Beurling":
                continue
            _mollifier_law(res, e.name, phi, kind, base, grid, threads)
    return res


def _mollifier_law(res: SuiteResult, name: str, phi, kind: str, base: sp.SpectrumEstimate,
                   grid: FrequencyGrid, threads) -> None:
    pts = grid.points
    base_cls = np.array(base.classification)
    per_h = {}
    for h in MOLLIFIER_H:
        est = sp.estimate(tr.mollify(phi, h), kind, grid, threads=threads)
        per_h[h] = np.array(est.classification)
        bad = [{"omega": round(float(pts[i]), 12), "mollified": SINGULAR, "original": REGULAR}
               for i in np.nonzero((per_h[h] == SINGULAR) & (base_cls == REGULAR))[0]]
        res.add(f"mollifier_subset:{name}:{kind}:{h:g}", not bad,
                {"n_violations": len(bad), "singular": [round(float(w), 12) for w in est.singular_points]},
                bad)
    missing = []
    extra_h = []
    for i in np.nonzero(base_cls == SINGULAR)[0]:
        w = float(pts[i])
        hit = False
        for h in mollifier_heights(w):
            if h not in per_h:
                extra_h.append(round(h, 12))
                single = FrequencyGrid(w - grid.step, w + grid.step, grid.step)
                est = sp.estimate(tr.mollify(phi, h), kind, single, threads=threads)
                hit = hit or est.classification[single.nearest_index(w)] == SINGULAR
            else:
                hit = hit or per_h[h][i] == SINGULAR
            if hit:
                break
        if not hit:
            missing.append({"omega": round(w, 12), "h_tried": [round(h, 12) for h in mollifier_heights(w)]})
    res.add(f"mollifier_recovery:{name}:{kind}", not missing,
            {"n_singular": int(np.sum(base_cls == SINGULAR)), "extra_h": sorted(set(extra_h))}, missing)


# ---------------------------------------------------------------------------
# inclusion chain and convolution support
# ---------------------------------------------------------------------------

def suite_eq1_11(grid: FrequencyGrid, threads: int | None = None, entries=None) -> SuiteResult:
    """``Singular(Weak) ⊆ Singular ∪ Undecided(Laplace) ⊆ ... (Carleman)``."""
    res = SuiteResult("eq1_11", grid)
    for e in _entries(entries):
        phi = e.descriptor
        if not _applicable(phi, "Laplace"):
            continue
        est = {k: sp.estimate(phi, k, grid, threads=threads)
               for k in ("WeakLaplace", "Laplace", "Carleman") if _applicable(phi, k)}
        chain = [("WeakLaplace", "Laplace")]
        if "Carleman" in est:
            chain.append(("Laplace", "Carleman"))
        for small, big in chain:
            a = np.array(est[small].classification)
            b = np.array(est[big].classification)
            bad = [{"omega": round(float(grid.points[i]), 12), small: SINGULAR, big: REGULAR}
                   for i in np.nonzero((a == SINGULAR) & (b == REGULAR))[0]]
            res.add(f"inclusion:{e.name}:{small}<={big}", not bad,
                    {"n_violations": len(bad), small: _sing_list(est[small]),
                     big: _sing_list(est[big])}, bad)
    return res


CONVOLUTION_ENTRIES = ("gamma_0", "gamma_1", "gamma_-2.5", "trig_1_sqrt2", "chirp", "psi",
                       "chirp_translate_1", "trig_translate_1")


def suite_eq1_14(grid: FrequencyGrid, threads: int | None = None, entries=None) -> SuiteResult:
    """Beurling spectrum of ``φ * f`` lies in ``sp(φ) ∩ supp f̂`` (one-step slack)."""
    res = SuiteResult("eq1_14", grid)
    k = kn.band_pass(1.0, 0.3)
    lo, hi = k.freq_support
    pts = grid.points
    tol = grid.step * (1 + 1e-9)
    for e in _entries(CONVOLUTION_ENTRIES if entries is None else entries):
        phi = e.descriptor
        if not _applicable(phi, "Beurling") or not math.isfinite(phi.sup_norm_bound):
            continue
        base = sp.estimate(phi, "Beurling", grid, threads=threads)
        conv = fm.make(fm.convolve_body(phi.body, k.id), phi.dim, phi.domain)
        est = sp.estimate(conv, "Beurling", grid, threads=threads)
        allowed_pts = pts[np.array(base.classification) != REGULAR]
        bad = []
        for w in est.singular_points:
            near = allowed_pts.size and np.min(np.abs(allowed_pts - w)) <= tol
            if not (near and lo - tol <= w <= hi + tol):
                bad.append({"omega": round(float(w), 12),
                            "in_band": bool(lo - tol <= w <= hi + tol), "near_spectrum": bool(near)})
        res.add(f"convolution_support:{e.name}", not bad,
                {"kernel": k.id, "singular": _sing_list(est), "n_violations": len(bad)}, bad)
    tp = cp.get_entry("trig_1_sqrt2").descriptor
    conv = fm.make(fm.convolve_body(tp.body, k.id), 1, tp.domain)
    est = sp.estimate(conv, "Beurling", grid, threads=threads)
    sing = est.singular_points
    ok = all(abs(w - 1.0) <= 0.5 * grid.step * (1 + 1e-9) for w in sing)
    res.add("convolution_support:trig_1_sqrt2:subset_of_{1}", ok, {"singular": _sing_list(est)},
            [] if ok else [{"omega": round(float(w), 12)} for w in sing if abs(w - 1.0) > 0.5 * grid.step])
    return res


# ---------------------------------------------------------------------------
# uniform spectra and almost periodic equality
# ---------------------------------------------------------------------------

def suite_prop4_2(grid: FrequencyGrid, threads: int | None = None, entries=None,
                  s_grid=sp.DEFAULT_S_GRID) -> SuiteResult:
    """Uniform and ordinary classifications agree pointwise (no flips)."""
    res = SuiteResult("prop4_2", grid)
    for e in _entries(entries):
        phi = e.descriptor
        for ordinary, uniform in UNIFORM_PAIRS:
            if not (_applicable(phi, ordinary) and _applicable(phi, uniform)):
                continue
            a = sp.estimate(phi, ordinary, grid, threads=threads)
            b = sp.estimate(phi, uniform, grid, s_grid=s_grid, threads=threads)
            fl = flips(a.classification, b.classification, grid.points)
            res.add(f"uniform:{e.name}:{ordinary}", not fl,
                    {"n_flips": len(fl), ordinary: _sing_list(a), uniform: _sing_list(b),
                     "s_grid": [float(s) for s in s_grid]}, fl)
    return res


AP_KINDS = ("Laplace", "Carleman", "Beurling", "ReducedBeurlingC0")


def suite_cor5_2(grid: FrequencyGrid, threads: int | None = None, entries=None) -> SuiteResult:
    """Almost periodic entries: Laplace set = Carleman set, all kinds localized."""
    res = SuiteResult("cor5_2", grid)
    for e in _entries(entries):
        if "ap" not in e.tags or e.descriptor.domain.is_half:
            continue
        est = {k: sp.estimate(e.descriptor, k, grid, threads=threads) for k in AP_KINDS}
        for k in AP_KINDS:
            known = e.known_spectra.get(k)
            if known is None:
                continue
            bad = _set_check(est[k], known, grid)
            res.add(f"localization:{e.name}:{k}", not bad,
                    {"singular": _sing_list(est[k]), "expected": known.value}, bad)
        lap, car = _sing_list(est["Laplace"]), _sing_list(est["Carleman"])
        res.add(f"laplace_equals_carleman:{e.name}", lap == car, {"Laplace": lap, "Carleman": car},
                [] if lap == car else [{"Laplace": lap, "Carleman": car}])
    return res


# ---------------------------------------------------------------------------
# semigroups
# ---------------------------------------------------------------------------

def _system_assertions(res: SuiteResult, system: sg.SemigroupSystem, xs: list, grid, threads) -> None:
    resid = max(sg.orbit_laplace_check(system, x, ORBIT_LAMBDAS) for x in xs)
    res.add(f"orbit_laplace:{system.name}", resid <= ORBIT_TOL,
            {"max_residual": resid, "tol": ORBIT_TOL, "dim": system.dim},
            [] if resid <= ORBIT_TOL else [{"max_residual": resid}])
    if not system.bounded:
        res.add(f"spectral_identities:{system.name}", False,
                {"growth_bound": system.growth_bound}, [{"error": "semigroup is not bounded"}])
        return
    rep = sg.verify_spectral_identities(system, xs, grid, threads=threads, strict=False)
    d = rep.to_dict()
    res.add(f"spectral_identities:{system.name}", rep.passed,
            {"group": bool(system.group_flag), "expected": d["expected"], "singular": d["singular"]},
            rep.failures)


def suite_sec3(grid: FrequencyGrid, threads: int | None = None, systems=None,
               n_systems: int = N_SEEDED_SYSTEMS, seed: int = 0) -> SuiteResult:
    """Orbit transforms against the resolvent and orbit spectra against ``σ(A)``.

    ``systems`` is a list of ``(SemigroupSystem, x_set)``; by default
    ``n_systems`` seeded random systems starting from ``seed``.
    """
    res = SuiteResult("sec3", grid)
    if systems is None:
        systems = [sg.random_system(seed + k, grid) for k in range(n_systems)]
    for system, xs in systems:
        _system_assertions(res, system, xs, grid, threads)
    return res


# ---------------------------------------------------------------------------
# tauberian theorems
# ---------------------------------------------------------------------------

def _tauberian(res: SuiteResult, name: str, fn: Callable, expect_refusal: bool = False) -> None:
    try:
        rep = fn()
    except HypothesisUnverified as exc:
        info = {"refused": True, "reason": str(exc)}
        if exc.report is not None:
            info["report"] = exc.report.to_dict()
        res.add(name, expect_refusal, info, [] if expect_refusal else [info])
        return
    d = rep.to_dict()
    ok = rep.passed and not expect_refusal
    res.add(name, ok, {"refused": False, **d}, [] if ok else [d])


def ingham_cases() -> list:
    ch = fm.chirp()
    psi = fm.l1_kernel(kn.make_psi())
    kernels = [kn.make_psi(), kn.band_pass(1.0, 0.5), kn.band_pass(-2.0, 1.0)]
    return [(n, phi, k) for n, phi in (("chirp", ch), ("psi", psi)) for k in kernels]


def primitive_pairs() -> tuple[list, list]:
    """``(regular, singular)`` lists of ``(label, φ, ω)``."""
    ch = fm.chirp()
    psi = fm.l1_kernel(kn.make_psi())
    g1 = fm.character(1.0)
    tp = fm.trig_poly([(1.0, 1.0), (cp.SQRT2, 1.0)])
    gm = fm.character(-2.5)
    g2h = fm.character(2.0, domain=fm.Domain.HALF_LINE)
    regular = [("chirp", ch, 0.0), ("chirp", ch, 1.0), ("chirp", ch, -2.0), ("chirp", ch, 3.5),
               ("psi", psi, 0.0), ("psi", psi, 1.0), ("gamma_1", g1, 0.0), ("gamma_2_half", g2h, 0.0),
               ("trig_1_sqrt2", tp, 0.5), ("gamma_-2.5", gm, 1.0)]
    singular = [("gamma_1", g1, 1.0), ("trig_1_sqrt2", tp, cp.SQRT2), ("gamma_-2.5", gm, -2.5)]
    return regular, singular


def suite_thm2_3(grid: FrequencyGrid, threads: int | None = None) -> SuiteResult:
    """Ingham decay for filtered functions and bounded primitives at regular points."""
    res = SuiteResult("thm2_3", grid)
    for name, phi, k in ingham_cases():
        _tauberian(res, f"ingham:{name}:{k.id}",
                   lambda phi=phi, k=k: tb.check_ingham_decay(phi, k, grid=grid, threads=threads))
    regular, singular = primitive_pairs()
    for name, phi, w in regular:
        _tauberian(res, f"primitive:{name}:{w:g}",
                   lambda phi=phi, w=w: tb.check_bounded_primitive(phi, w, threads=threads))
    for name, phi, w in singular:
        _tauberian(res, f"primitive_refused:{name}:{w:g}",
                   lambda phi=phi, w=w: tb.check_bounded_primitive(phi, w, threads=threads),
                   expect_refusal=True)
    return res


def suite_thm2_4(grid: FrequencyGrid, threads: int | None = None) -> SuiteResult:
    """Transfer, inclusion and weak-regular ergodicity."""
    res = SuiteResult("thm2_4", grid)
    k = kn.band_pass(1.0, 0.3)
    for name in ("trig_1_sqrt2", "chirp", "gamma_1", "psi"):
        phi = cp.get_entry(name).descriptor
        _tauberian(res, f"transfer:{name}:{k.id}",
                   lambda phi=phi: tb.check_transfer(phi, k, grid, threads=threads))
        _tauberian(res, f"inclusion:{name}",
                   lambda phi=phi: tb.check_inclusion(phi, grid, threads=threads))
    for name, refuse in (("gamma_1", False), ("chirp", False), ("gamma_0", True)):
        phi = cp.get_entry(name).descriptor
        _tauberian(res, f"ergodic_weak:{name}",
                   lambda phi=phi: tb.check_regular_zero_ergodic(phi, via="weak", threads=threads),
                   expect_refusal=refuse)
    return res


def suite_prop1_5(grid: FrequencyGrid, threads: int | None = None) -> SuiteResult:
    """Ergodicity from reduced regularity at 0, and the unbounded counterexample ``te^{it}``."""
    res = SuiteResult("prop1_5", grid)
    for name, refuse in (("gamma_1", False), ("chirp", False), ("gamma_0", True)):
        phi = cp.get_entry(name).descriptor
        _tauberian(res, f"ergodic_reduced:{name}",
                   lambda phi=phi: tb.check_regular_zero_ergodic(phi, via="reduced", threads=threads),
                   expect_refusal=refuse)
    te = cp.get_entry("te_it").descriptor
    est = sp.estimate(te, "Beurling", grid, threads=threads)
    sing = _sing_list(est)
    ok = len(sing) == 1 and abs(sing[0] - 1.0) <= 0.5 * grid.step * (1 + 1e-9)
    res.add("beurling:te_it", ok, {"singular": sing, "undecided": est.count("Undecided")},
            [] if ok else [{"singular": sing}])
    erg = tr.ergodic_mean(te)
    res.add("ergodic_mean:te_it", erg.verdict == "NotErgodic",
            {"verdict": erg.verdict, "deviation_ladder": [list(p) for p in erg.sup_deviation_ladder]},
            [] if erg.verdict == "NotErgodic" else [{"verdict": erg.verdict}])
    return res


_RUNNERS = {
    "prop2_1": suite_prop2_1, "eq1_11": suite_eq1_11, "eq1_14": suite_eq1_14,
    "prop4_2": suite_prop4_2, "cor5_2": suite_cor5_2, "sec3": suite_sec3,
    "thm2_3": suite_thm2_3, "thm2_4": suite_thm2_4, "prop1_5": suite_prop1_5,
}


def run_suite(name: str, grid: FrequencyGrid | None = None, threads: int | None = None,
              **kwargs) -> SuiteResult:
    """Run the suite called ``name`` (one of :data:`SUITES`)."""
    if name not in _RUNNERS:
        raise KeyError(f"unknown suite {name!r}; expected one of {', '.join(SUITES)}")
    grid = FrequencyGrid.parse(DEFAULT_GRIDS[name]) if grid is None else grid
    return _RUNNERS[name](grid, threads=threads, **kwargs)


__all__ = ["Assertion", "SuiteResult", "SUITES", "DEFAULT_GRIDS", "flips", "mollifier_heights",
           "run_suite", "ingham_cases", "primitive_pairs"] + [f"suite_{n}" for n in SUITES]
