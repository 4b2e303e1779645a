"""Finite-dimensional semigroup laboratory.

A diagonalizable generator ``A = V diag(μ) V⁻¹`` on ``ℂᵈ`` generates
``T(t) = V diag(e^{tμ}) V⁻¹``.  Orbits ``t ↦ T(t)x`` are exponential sums,
so they plug directly into the descriptor algebra and every spectrum
estimator.  The checks here compare orbit spectra against the eigen-oracle:
the imaginary parts of the eigenvalues whose eigen-coordinate in ``x`` does
not vanish.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import func_model as fm
from . import spectra as sp
from . import transforms as tr
from .errors import NotDiagonalizable, PrecondError, SingularMatrix, SuiteAssertionError

COND_MAX = 1e8
REPRO_TOL = 1e-10
IMAG_TOL = 1e-12
COEFF_TOL = 1e-12
RESOLVENT_GAP = 1e-8


@dataclass(frozen=True)
class SemigroupSystem:
    """A bounded semigroup (or group) ``e^{tA}`` with diagonalizable generator.

    Attributes
    ----------
    A : ndarray, shape (d, d)
    eig : ndarray, shape (d,)
        Eigenvalues; real parts within ``IMAG_TOL`` of zero are snapped to 0.
    V, Vinv : ndarray
        Eigenvector matrix and its inverse.
    group_flag : bool
        True iff every eigenvalue is purely imaginary, so ``e^{tA}`` is a
        bounded group with ``‖e^{tA}‖ ≤ cond(V)`` for all real ``t``.
    name : str
    """

    A: np.ndarray
    eig: np.ndarray
    V: np.ndarray
    Vinv: np.ndarray
    group_flag: bool
    name: str = "system"

    @property
    def dim(self) -> int:
        return int(self.A.shape[0])

    @property
    def bounded(self) -> bool:
        """``sup_{t≥0} ‖e^{tA}‖ < ∞``."""
        return bool(np.all(self.eig.real <= 0.0))

    @property
    def growth_bound(self) -> float:
        """``‖V‖·‖V⁻¹‖``, a bound on ``‖e^{tA}‖`` when the semigroup is bounded."""
        return float(np.linalg.norm(self.V, 2) * np.linalg.norm(self.Vinv, 2))

    def imaginary_frequencies(self) -> np.ndarray:
        """``Im(σ(A) ∩ iℝ)``, sorted and de-duplicated."""
        return _unique(self.eig.imag[self.eig.real == 0.0])

    def propagator(self, t: float) -> np.ndarray:
        """``e^{tA}`` via the eigen-decomposition."""
        return (self.V * np.exp(t * self.eig)[None, :]) @ self.Vinv

    def coordinates(self, x) -> np.ndarray:
        """Eigen-coordinates ``V⁻¹x``."""
        return self.Vinv @ np.asarray(x, dtype=complex)

    def orbit_spectrum(self, x) -> np.ndarray:
        """``σ(A_x)``: eigenvalues whose eigen-coordinate in ``x`` exceeds ``COEFF_TOL``."""
        c = self.coordinates(x)
        return self.eig[np.abs(c) > COEFF_TOL]

    def to_json_obj(self) -> dict:
        return {"name": self.name,
                "A": [[[float(z.real), float(z.imag)] for z in row] for row in self.A]}


def _unique(vals: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    out: list[float] = []
    for v in np.sort(np.asarray(vals, dtype=float)):
        if not out or v - out[-1] > tol:
            out.append(float(v))
    return np.array(out)


def make_system(A, name: str = "system") -> SemigroupSystem:
    """Build a :class:`SemigroupSystem`, rejecting defective generators.

    Raises
    ------
    NotDiagonalizable
        If the eigenvector matrix is numerically singular or the
        decomposition fails to reproduce ``A`` to ``1e-10·‖A‖``.
    """
    A = np.array(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise PrecondError("generator must be a non-empty square matrix")
    if not np.all(np.isfinite(A)):
        raise PrecondError("generator has non-finite entries")
    mu, V = np.linalg.eig(A)
    V = V / np.linalg.norm(V, axis=0)[None, :]
    if np.linalg.cond(V) > COND_MAX:
        raise NotDiagonalizable("eigenvector matrix is numerically singular")
    Vinv = np.linalg.inv(V)
    scale = max(float(np.linalg.norm(A, 2)), 1.0)
    snap = np.abs(mu.real) <= IMAG_TOL * np.maximum(1.0, np.abs(mu))
    mu = np.where(snap, 1j * mu.imag, mu)
    resid = float(np.linalg.norm(A - (V * mu[None, :]) @ Vinv, 2))
    if resid > REPRO_TOL * scale:
        raise NotDiagonalizable(f"eigen-decomposition residual {resid:.3g} too large")
    group = bool(np.all(mu.real == 0.0))
    return SemigroupSystem(A, mu, V, Vinv, group, name)


def resolvent(sys: SemigroupSystem, lam: complex) -> np.ndarray:
    """``(λI − A)⁻¹`` by a linear solve.

    Raises
    ------
    SingularMatrix
        If ``λ`` lies within ``1e-8`` of an eigenvalue.
    """
    lam = complex(lam)
    if float(np.min(np.abs(sys.eig - lam))) < RESOLVENT_GAP:
        raise SingularMatrix(f"λ = {lam} is (numerically) an eigenvalue")
    d = sys.dim
    return np.linalg.solve(lam * np.eye(d) - sys.A, np.eye(d, dtype=complex))


def resolvent_residual(sys: SemigroupSystem, lam: complex) -> float:
    """``‖(λI − A)R(λ) − I‖₂``."""
    R = resolvent(sys, lam)
    d = sys.dim
    return float(np.linalg.norm((complex(lam) * np.eye(d) - sys.A) @ R - np.eye(d), 2))


def orbit(sys: SemigroupSystem, x, domain: fm.Domain | None = None) -> fm.FunctionDescriptor:
    """The orbit ``t ↦ e^{tA}x`` as an exponential-sum descriptor.

    Groups default to the full line; semigroups live on ``ℝ₊``.
    """
    if domain is None:
        domain = fm.Domain.FULL_LINE if sys.group_flag else fm.Domain.HALF_LINE
    if not domain.is_half and not sys.group_flag:
        raise PrecondError("a full-line orbit needs a bounded group")
    x = np.asarray(x, dtype=complex)
    if x.shape != (sys.dim,):
        raise PrecondError(f"orbit vector must have shape ({sys.dim},)")
    c = sys.coordinates(x)
    terms = [(mu, tuple(ck * sys.V[:, k]))
             for k, (mu, ck) in enumerate(zip(sys.eig, c)) if abs(ck) > COEFF_TOL]
    body = fm._expsum(terms) if terms else fm._zero(sys.dim)
    bound = float(np.sum(np.abs(c) * np.max(np.abs(sys.V), axis=0))) if sys.bounded else math.inf
    return fm.make(body, sys.dim, domain, sup_norm_bound=bound)


def orbit_laplace_check(sys: SemigroupSystem, x, lam_set, method: str = "quadrature") -> float:
    """``max_λ ‖ℒ(T(·)x)(λ) − R(λ)x‖`` over ``lam_set``.

    ``method="quadrature"`` integrates the orbit numerically in time (an
    independent check of the resolvent); ``"closed"`` uses the closed-form
    transform of the exponential sum.
    """
    if not sys.bounded:
        raise PrecondError("orbit_laplace_check needs a semigroup bounded on ℝ₊")
    lam = np.asarray(lam_set, dtype=complex).ravel()
    if np.any(lam.real <= 0):
        raise PrecondError("Laplace points need Re λ > 0")
    x = np.asarray(x, dtype=complex)
    phi = orbit(sys, x, fm.Domain.HALF_LINE)
    if method == "closed":
        vals, _, _ = tr.laplace_many(phi, lam)
    elif method == "quadrature":
        vals, _, _ = tr._time_transform(phi.body, lam, sys.dim, +1, phi.sup_norm_bound)
    else:
        raise PrecondError(f"unknown method {method!r}")
    worst = 0.0
    for k, l in enumerate(lam):
        ref = resolvent(sys, l) @ x
        worst = max(worst, float(np.max(np.abs(vals[k] - ref))))
    return worst


def semigroup_law_residual(sys: SemigroupSystem, t: float, s: float) -> float:
    """``‖e^{(t+s)A} − e^{tA}e^{sA}‖₂``."""
    return float(np.linalg.norm(sys.propagator(t + s) - sys.propagator(t) @ sys.propagator(s), 2))


def resolvent_identity_residual(sys: SemigroupSystem, lam: complex, mu: complex) -> float:
    """``‖R(λ) − R(μ) − (μ−λ)R(λ)R(μ)‖₂``."""
    Rl, Rm = resolvent(sys, lam), resolvent(sys, mu)
    return float(np.linalg.norm(Rl - Rm - (mu - lam) * Rl @ Rm, 2))


# ---------------------------------------------------------------------------
# spectral identities
# ---------------------------------------------------------------------------

@dataclass
class SpectralIdentityReport:
    """Outcome of :func:`verify_spectral_identities`.

    Attributes
    ----------
    system : str
    passed : bool
    expected : dict
        ``x_id → sorted expected frequencies`` (eigen-oracle).
    estimates : list
        ``(x_id, SpectrumEstimate)`` in deterministic order.
    failures : list of dict
    """

    system: str
    passed: bool
    expected: dict
    estimates: list
    failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"system": self.system, "pass": self.passed,
                "expected": {k: [float(v) for v in vs] for k, vs in self.expected.items()},
                "singular": [{"x_id": xid, "kind": est.kind,
                              "omega": [float(w) for w in est.singular_points]}
                             for xid, est in self.estimates],
                "failures": self.failures}


def _match(sing: np.ndarray, expected: np.ndarray, grid: sp.FrequencyGrid):
    """Compare singular nodes against expected frequencies at grid resolution.

    A frequency on a node must be hit exactly; one strictly between nodes
    may be reported at either neighbour.
    """
    tol = 0.5 * grid.step * (1 + 1e-9)
    pts = grid.points
    inside = expected[(expected >= pts[0] - tol) & (expected <= pts[-1] + tol)]
    missing = [float(e) for e in inside if not np.any(np.abs(sing - e) <= tol)]
    extra = [float(w) for w in sing if not np.any(np.abs(inside - w) <= tol)]
    return missing, extra


def verify_spectral_identities(sys: SemigroupSystem, x_set, grid: sp.FrequencyGrid,
                               threads: int | None = None, strict: bool = True,
                               x_ids=None) -> SpectralIdentityReport:
    """Check orbit spectra against ``Im(σ(A_x) ∩ iℝ)``.

    (a) the Laplace-Singular set of every orbit equals the eigen-oracle set
    at grid resolution; (b) for groups, the Carleman- and Beurling-Singular
    sets coincide with it; (c) if ``x_set`` spans ``ℂᵈ`` the union of the
    orbit sets covers ``Im(σ(A) ∩ iℝ)``.

    Raises
    ------
    SuiteAssertionError
        When ``strict`` and any check fails; ``failures`` lists the
        offending grid points and diagnostics.
    """
    if not sys.bounded:
        raise PrecondError("spectral identities need a bounded semigroup")
    xs = [np.asarray(x, dtype=complex) for x in x_set]
    ids = list(x_ids) if x_ids is not None else [f"x{k}" for k in range(len(xs))]
    kinds = ("Laplace", "Carleman", "Beurling") if sys.group_flag else ("Laplace",)
    expected: dict = {}
    estimates: list = []
    failures: list = []
    union: list[float] = []
    for xid, x in zip(ids, xs):
        mu = sys.orbit_spectrum(x)
        exp_set = _unique(mu.imag[mu.real == 0.0])
        expected[xid] = exp_set
        phi = orbit(sys, x)
        sets = {}
        for kind in kinds:
            est = sp.estimate(phi, kind, grid, threads=threads)
            estimates.append((xid, est))
            sing = est.singular_points
            sets[kind] = sing
            missing, extra = _match(sing, exp_set, grid)
            if missing or extra:
                diag = {}
                for w in extra:
                    i = grid.nearest_index(w)
                    diag[f"{w:.6g}"] = {k: (None if not np.isfinite(v[i]) else float(v[i]))
                                        for k, v in est.diagnostics.items()}
                failures.append({"x_id": xid, "kind": kind, "missing": missing, "extra": extra,
                                 "diagnostics": diag})
        if sys.group_flag:
            ref = sets["Laplace"]
            for kind in ("Carleman", "Beurling"):
                if ref.shape != sets[kind].shape or not np.allclose(ref, sets[kind]):
                    failures.append({"x_id": xid, "kind": f"Laplace=={kind}",
                                     "laplace": [float(w) for w in ref],
                                     "other": [float(w) for w in sets[kind]]})
        union.extend(float(w) for w in sets["Laplace"])
    if xs and np.linalg.matrix_rank(np.stack(xs, axis=1)) == sys.dim:
        missing, _ = _match(_unique(np.array(union)), sys.imaginary_frequencies(), grid)
        if missing:
            failures.append({"x_id": "union", "kind": "Laplace", "missing": missing})
    report = SpectralIdentityReport(sys.name, not failures, expected, estimates, failures)
    if strict and failures:
        raise SuiteAssertionError(f"spectral identities fail for {sys.name}", failures)
    return report


# ---------------------------------------------------------------------------
# seeded systems and I/O
# ---------------------------------------------------------------------------

def random_system(seed: int, grid: sp.FrequencyGrid, d: int | None = None,
                  group: bool | None = None, name: str | None = None):
    """A seeded diagonalizable system with a spanning ``x_set``.

    Imaginary eigenvalues sit on interior grid nodes at least three steps
    apart; the remaining eigenvalues have real part in ``[−2, −0.2]``.

    Returns
    -------
    (SemigroupSystem, list of ndarray)
        The system and ``x_set`` = standard basis plus one vector with
        randomly dropped eigen-components.
    """
    rng = np.random.default_rng(seed)
    if d is None:
        d = int(rng.integers(2, 7))
    if group is None:
        group = bool(rng.random() < 0.3)
    n_imag = d if group else int(rng.integers(1, d + 1))
    nodes = np.arange(2, grid.size - 2)
    picked: list[int] = []
    while len(picked) < n_imag:
        k = int(rng.choice(nodes))
        if all(abs(k - p) >= 3 for p in picked):
            picked.append(k)
    imag = [complex(0.0, float(grid.points[k])) for k in picked]
    left = [complex(-rng.uniform(0.2, 2.0), rng.uniform(-4.0, 4.0)) for _ in range(d - n_imag)]
    mu = np.array(imag + left)
    while True:
        V = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        V /= np.linalg.norm(V, axis=0)[None, :]
        if np.linalg.cond(V) < 1e3:
            break
    A = (V * mu[None, :]) @ np.linalg.inv(V)
    system = make_system(A, name or f"sys{seed}")
    keep = rng.random(d) < 0.6
    keep[int(rng.integers(d))] = True
    x_extra = V @ (np.where(keep, rng.normal(size=d) + 1j * rng.normal(size=d), 0.0))
    return system, [np.eye(d, dtype=complex)[:, k] for k in range(d)] + [x_extra]


def _entry(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise PrecondError("matrix entries must be numbers or [re, im] pairs")
        return complex(float(v[0]), float(v[1]))
    return complex(float(v))


def system_from_json_obj(obj: dict) -> tuple[SemigroupSystem, list]:
    """Parse ``{"A": [[[re, im], ...], ...], "x_set": [...], "name": ...}``.

    Entries may be plain numbers; ``x_set`` defaults to the standard basis.
    """
    if not isinstance(obj, dict) or "A" not in obj:
        raise PrecondError("matrix JSON needs an 'A' field")
    A = np.array([[_entry(v) for v in row] for row in obj["A"]], dtype=complex)
    system = make_system(A, str(obj.get("name", "system")))
    if "x_set" in obj:
        xs = [np.array([_entry(v) for v in x], dtype=complex) for x in obj["x_set"]]
    else:
        xs = [np.eye(system.dim, dtype=complex)[:, k] for k in range(system.dim)]
    return system, xs


def load_system(path) -> tuple[SemigroupSystem, list]:
    return system_from_json_obj(json.loads(Path(path).read_text()))


__all__ = [
    "SemigroupSystem", "SpectralIdentityReport", "make_system", "resolvent", "resolvent_residual",
    "orbit", "orbit_laplace_check", "semigroup_law_residual", "resolvent_identity_residual",
    "verify_spectral_identities", "random_system", "system_from_json_obj", "load_system",
]
