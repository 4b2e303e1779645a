"""End-to-end acceptance checks, one test class per criterion.

Each test carries a ``criterion`` marker; ``conftest.py`` prints a PASS/FAIL
line per criterion at the end of the run.  Suite runtimes are checked
against the two-minute desk budget (ten minutes for the chirp uniform
Carleman estimate).
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from oracles import laplace_oracle
from spectrakit import cli
from spectrakit import func_model as fm
from spectrakit import kernels as kn
from spectrakit import spectra as sp
from spectrakit import suites as st
from spectrakit import transforms as tr
from spectrakit.corpus import SQRT2, get_entry

pytestmark = pytest.mark.slow

GRID5 = sp.FrequencyGrid(-5.0, 5.0, 0.05)
SUITE_BUDGET = 120.0
UNIFORM_CHIRP_BUDGET = 600.0
# closed-form boundary value of the chirp Laplace transform at 0
CHIRP_CONSTANT = (1 + 1j) * math.sqrt(math.pi) / 2 ** 1.5


def timed_suite(name, **kw):
    t0 = time.perf_counter()
    res = st.run_suite(name, **kw)
    elapsed = time.perf_counter() - t0
    print(f"suite {name}: {len(res.assertions)} assertions, {len(res.failed)} failed, {elapsed:.1f}s")
    return res, elapsed


def failed_names(res):
    return [(a.name, a.failures[:3]) for a in res.failed]


@pytest.mark.criterion(1, "chirp boundary constant (1+i)√π/2^{3/2} to 1e-4")
def test_chirp_constant():
    est, err = tr.boundary_limit(fm.chirp(), 0.0)
    gap = abs(complex(est[0]) - CHIRP_CONSTANT)
    print(f"limit={complex(est[0]):.10f} target={CHIRP_CONSTANT:.10f} gap={gap:.2e}")
    assert gap < 1e-4
    assert abs(CHIRP_CONSTANT - (0.6266571 + 0.6266571j)) < 1e-7


@pytest.mark.criterion(2, "chirp: Laplace spectrum empty, Carleman spectrum full on [-5,5]")
class TestChirpSpectra:
    def test_laplace_empty(self):
        est = sp.estimate(fm.chirp(), "Laplace", GRID5)
        print(f"Singular={est.count(sp.SINGULAR)} Undecided={est.fraction(sp.UNDECIDED):.1%}")
        assert est.count(sp.SINGULAR) == 0
        assert est.fraction(sp.UNDECIDED) <= 0.02

    def test_carleman_full(self):
        est = sp.estimate(fm.chirp(), "Carleman", GRID5)
        assert est.count(sp.SINGULAR) == GRID5.size


LOCALIZATION_KINDS = ("Laplace", "Carleman", "Beurling", "ReducedBeurlingC0")


@pytest.mark.criterion(3, "γ₁ and {1,√2} localize within one step; Laplace = Carleman")
class TestLocalization:
    @pytest.mark.parametrize("kind", LOCALIZATION_KINDS)
    @pytest.mark.parametrize("name,targets", [("gamma_1", [1.0]), ("trig_1_sqrt2", [1.0, SQRT2])])
    def test_within_one_step(self, name, targets, kind):
        s = sp.estimate(get_entry(name).descriptor, kind, GRID5).singular_points
        t = np.array(targets)
        print(f"{name} {kind}: {s.tolist()}")
        assert s.size >= t.size
        assert np.all(np.min(np.abs(s[:, None] - t[None, :]), axis=1) <= GRID5.step * (1 + 1e-9))
        assert np.all(np.min(np.abs(s[:, None] - t[None, :]), axis=0) <= GRID5.step * (1 + 1e-9))

    @pytest.mark.parametrize("name", ["gamma_1", "trig_1_sqrt2", "gamma_-2.5", "gamma_0"])
    def test_laplace_equals_carleman(self, name):
        phi = get_entry(name).descriptor
        a = sp.estimate(phi, "Laplace", GRID5).classification
        b = sp.estimate(phi, "Carleman", GRID5).classification
        assert a == b


@pytest.mark.criterion(4, "te^{it}: Beurling spectrum exactly {1}, ergodic_mean NotErgodic")
class TestLinearChirp:
    def test_beurling(self):
        est = sp.estimate(get_entry("te_it").descriptor, "Beurling", GRID5)
        assert est.singular_points.tolist() == pytest.approx([1.0])
        assert est.count(sp.UNDECIDED) == 0

    def test_not_ergodic(self):
        assert tr.ergodic_mean(get_entry("te_it").descriptor).verdict == "NotErgodic"

    def test_suite(self):
        res, elapsed = timed_suite("prop1_5")
        assert res.passed, failed_names(res)
        assert elapsed <= SUITE_BUDGET


@pytest.mark.criterion(5, "shift/translation/mollifier laws: zero flips; mollifier recovery")
def test_spectral_calculus():
    res, elapsed = timed_suite("prop2_1")
    assert res.passed, failed_names(res)
    kinds = {a.name.split(":")[0] for a in res.assertions}
    assert kinds == {"shift", "translate", "mollifier_subset", "mollifier_recovery"}
    assert elapsed <= SUITE_BUDGET


@pytest.mark.criterion(6, "inclusion chain and convolution support: zero violations")
class TestInclusionAndSupport:
    def test_inclusion_chain(self):
        res, elapsed = timed_suite("eq1_11")
        assert res.passed, failed_names(res)
        assert elapsed <= SUITE_BUDGET

    def test_convolution_support(self):
        res, elapsed = timed_suite("eq1_14")
        assert res.passed, failed_names(res)
        assert elapsed <= SUITE_BUDGET


@pytest.mark.criterion(7, "uniform vs ordinary spectra: no flips with s_grid {0,1,2,5,10}")
class TestUniform:
    def test_suite(self):
        res, elapsed = timed_suite("prop4_2", s_grid=(0.0, 1.0, 2.0, 5.0, 10.0))
        assert res.passed, failed_names(res)
        assert all(a.diagnostics["s_grid"] == [0.0, 1.0, 2.0, 5.0, 10.0] for a in res.assertions)
        assert elapsed <= SUITE_BUDGET

    def test_chirp_uniform_carleman_budget(self):
        t0 = time.perf_counter()
        uni = sp.estimate(fm.chirp(), "UniformCarleman", GRID5, s_grid=(0.0, 1.0, 2.0, 5.0, 10.0))
        elapsed = time.perf_counter() - t0
        print(f"chirp UniformCarleman on [-5,5]: {elapsed:.1f}s")
        base = sp.estimate(fm.chirp(), "Carleman", GRID5)
        assert not st.flips(base.classification, uni.classification, GRID5.points)
        assert elapsed <= UNIFORM_CHIRP_BUDGET


@pytest.mark.criterion(8, "20 seeded semigroups: orbit transforms and spectral identities")
def test_semigroups():
    res, elapsed = timed_suite("sec3")
    assert res.passed, failed_names(res)
    orbit = [a for a in res.assertions if a.name.startswith("orbit_laplace")]
    ident = [a for a in res.assertions if a.name.startswith("spectral_identities")]
    assert len(orbit) == 20 and len(ident) == 20
    assert max(a.diagnostics["max_residual"] for a in orbit) <= 1e-6
    assert elapsed <= SUITE_BUDGET


@pytest.mark.criterion(9, "tauberian checks: Ingham, primitives, ergodic, transfer, inclusion")
class TestTauberian:
    def test_ingham_and_primitives(self):
        res, elapsed = timed_suite("thm2_3")
        assert res.passed, failed_names(res)
        names = [a.name for a in res.assertions]
        assert sum(n.startswith("ingham:") for n in names) == 6
        assert sum(n.startswith("primitive:") for n in names) == 10
        refused = [a for a in res.assertions if a.name.startswith("primitive_refused:")]
        assert len(refused) == 3 and all(a.diagnostics["refused"] for a in refused)
        assert elapsed <= SUITE_BUDGET

    def test_transfer_inclusion_ergodic(self):
        res, elapsed = timed_suite("thm2_4")
        assert res.passed, failed_names(res)
        by = {a.name: a for a in res.assertions}
        assert by["ergodic_weak:gamma_0"].diagnostics["refused"]
        assert not by["ergodic_weak:gamma_1"].diagnostics["refused"]
        assert not by["ergodic_weak:chirp"].diagnostics["refused"]
        for a in res.assertions:
            if a.name.startswith(("transfer:", "inclusion:")):
                assert a.diagnostics["metrics"]["violations"] == 0
        assert elapsed <= SUITE_BUDGET


DETERMINISM_RUNS = [
    ["analyze", "chirp", "Carleman", "-5:5:0.05"],
    ["analyze", "trig_1_sqrt2", "ReducedBeurlingC0", "-2:2:0.05", "--format", "json"],
    ["analyze", "--matrix", "diag(i,-0.5+2i,-2i)", "--spectrum", "Laplace", "--grid", "-3:3:0.05"],
    ["verify", "thm2_4"],
    ["verify", "cor5_2", "--format", "csv"],
]


@pytest.mark.criterion(10, "--threads 1 vs --threads 8: byte-identical reports")
@pytest.mark.parametrize("argv", DETERMINISM_RUNS, ids=lambda a: "-".join(a[:2]))
def test_determinism(tmp_path, argv):
    one, eight = tmp_path / "t1", tmp_path / "t8"
    assert cli.main(argv + ["--threads", "1", "--out", str(one)]) == cli.EXIT_OK
    assert cli.main(argv + ["--threads", "8", "--out", str(eight)]) == cli.EXIT_OK
    assert one.read_bytes() == eight.read_bytes()


# ---------------------------------------------------------------------------
# criterion 11: fast-path transforms against the Simpson+Richardson oracle
# ---------------------------------------------------------------------------
# Each family provides the descriptor, an evaluator written independently of
# the package (closed forms in numpy, Gauss–Legendre for the mollifier), a sup
# bound and the largest local frequency on [0, T], used to pick the oracle step.

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def _mollified_chirp(h):
    def f(t):
        u = t[:, None] + 0.5 * h * (1 + _GL_X[None, :])
        return (np.exp(1j * u * u) @ _GL_W)[:, None] * 0.5
    return f


def _family(rng):
    kind = rng.choice(["character", "trig", "chirp", "chirp_translate", "chirp_modulate",
                       "mollified_chirp", "exp_sum", "band_pass", "psi", "chirp_plus_char",
                       "linear_chirp"])
    w = float(rng.uniform(-4, 4))
    c = complex(rng.normal(), rng.normal())
    if kind == "character":
        return kind, fm.character(w, c), lambda t: (c * np.exp(1j * w * t))[:, None], abs(c), lambda T: abs(w), True
    if kind == "trig":
        ws = rng.uniform(-4, 4, 3)
        cs = rng.normal(size=3) + 1j * rng.normal(size=3)
        phi = fm.trig_poly(list(zip(ws.tolist(), cs.tolist())))
        return (kind, phi, lambda t: (np.exp(1j * np.outer(t, ws)) @ cs)[:, None],
                float(np.abs(cs).sum()), lambda T: float(np.abs(ws).max()), True)
    if kind == "chirp":
        return kind, fm.chirp(c), lambda t: (c * np.exp(1j * t * t))[:, None], abs(c), lambda T: 2 * T, True
    if kind == "chirp_translate":
        s = float(rng.uniform(0, 5))
        return (kind, fm.translate(fm.chirp(), s), lambda t: np.exp(1j * (t + s) ** 2)[:, None], 1.0,
                lambda T: 2 * (T + s), True)
    if kind == "chirp_modulate":
        return (kind, fm.modulate(fm.chirp(), w), lambda t: np.exp(1j * (t * t + w * t))[:, None], 1.0,
                lambda T: 2 * T + abs(w), True)
    if kind == "mollified_chirp":
        h = float(rng.choice([0.25, 0.5, 1.0]))
        return kind, tr.mollify(fm.chirp(), h), _mollified_chirp(h), 1.0, lambda T: 2 * (T + h), True
    if kind == "exp_sum":
        mu = complex(-rng.uniform(0.1, 2), w)
        return (kind, fm.exp_sum([(mu, c)]), lambda t: (c * np.exp(mu * t))[:, None], abs(c),
                lambda T: abs(w), False)
    if kind in ("band_pass", "psi"):
        k = kn.make_psi() if kind == "psi" else kn.band_pass(w, float(rng.uniform(0.2, 1.5)))
        return (kind, fm.l1_kernel(k), lambda t: np.asarray(k.time_eval(t), complex)[:, None],
                float(np.max(np.abs(k.time_eval(np.linspace(-5, 5, 201))))),
                lambda T: max(abs(x) for x in k.freq_support), True)
    if kind == "chirp_plus_char":
        phi = fm.add(fm.chirp(), fm.character(w, c))
        return (kind, phi, lambda t: (np.exp(1j * t * t) + c * np.exp(1j * w * t))[:, None],
                1 + abs(c), lambda T: 2 * T + abs(w), True)
    return (kind, fm.linear_chirp(c), lambda t: (c * t * np.exp(1j * t))[:, None], math.inf,
            lambda T: 1.0, False)


def _oracle(kind, f, bound, fmax, lam, side):
    a = abs(lam.real)
    if kind in ("band_pass", "psi"):
        horizon = 130.0  # both kernels are below 1e-12 beyond |t| = 130
    elif math.isinf(bound):
        # ∫_T^∞ t e^{-at} dt = e^{-aT}(T/a + 1/a²) < 1e-12
        horizon = 1.0
        while math.exp(-a * horizon) * (horizon / a + 1 / a ** 2) > 1e-12:
            horizon *= 1.2
    else:
        horizon = max(1.0, math.log(bound / (a * 1e-12)) / a)
    h = min(0.01, 0.05 / (fmax(horizon) + abs(lam.imag) + 1.0))
    return laplace_oracle(f, lam, bound, side=side, h=h, horizon=horizon)


@pytest.mark.criterion(11, "100 random (descriptor, λ) pairs match the quadrature oracle")
def test_oracle_agreement():
    rng = np.random.default_rng(20240611)
    worst = []
    for _ in range(100):
        kind, phi, f, bound, fmax, full = _family(rng)
        side = -1 if (full and phi.bounded and rng.random() < 0.3) else 1
        a_lo = 0.3 if kind.startswith(("chirp", "mollified")) else 0.1
        lam = complex(side * rng.uniform(a_lo, 2.0), rng.uniform(-5, 5))
        sample = tr.carleman(phi, lam) if side < 0 else tr.laplace(phi, lam)
        ref = _oracle(kind, f, bound, fmax, lam, side)
        gap = float(np.max(np.abs(sample.value - ref)))
        tol = max(1e-6, 10 * sample.err_est)
        worst.append((gap / tol, str(kind), lam, gap, sample.err_est))
    worst.sort(key=lambda r: r[0], reverse=True)
    print("worst gap/tol:", [(f"{r[0]:.2e}", r[1], f"{r[2]:.3f}", f"{r[3]:.1e}") for r in worst[:5]])
    assert worst[0][0] <= 1.0, worst[:5]
