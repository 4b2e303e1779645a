from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectrakit import func_model as fm
from spectrakit import spectra as sp
from spectrakit.corpus import SQRT2, get_entry
from spectrakit.errors import PrecondError, UnboundedError

GRID = sp.FrequencyGrid(-3.0, 3.0, 0.05)
SMALL = sp.FrequencyGrid(-1.0, 1.0, 0.05)


class TestFrequencyGrid:
    def test_parse_and_points(self):
        g = sp.FrequencyGrid.parse("-3:3:0.05")
        assert g.size == 121
        assert g.points[0] == -3.0 and g.points[-1] == pytest.approx(3.0)
        assert g.nearest_index(1.0) == 80

    @pytest.mark.parametrize("spec", ["1:0:0.1", "0:1:0", "0:1:-0.1", "0:1", "a:b:c", "0:inf:1"])
    def test_rejects_bad_grids(self, spec):
        with pytest.raises(ValueError):
            sp.FrequencyGrid.parse(spec)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-10, 10), st.floats(0.1, 10), st.floats(0.01, 1))
    def test_points_stay_inside(self, lo, width, step):
        g = sp.FrequencyGrid(lo, lo + width, step)
        assert g.points[-1] <= lo + width + 1e-9
        assert g.points[-1] + step > lo + width - 1e-9


class TestThresholds:
    def test_override_and_unknown(self):
        th = sp.Thresholds().override(tau_jump=1e-2)
        assert th.tau_jump == 1e-2
        with pytest.raises(KeyError):
            sp.Thresholds().override(nonsense=1)

    def test_widened(self):
        th = sp.Thresholds().widened(10)
        assert th.tau_filter == pytest.approx(1e-3)
        assert th.p_min == sp.Thresholds().p_min


def singular(phi, kind, grid=GRID):
    return sp.estimate(phi, kind, grid).singular_points


class TestCharacters:
    @pytest.mark.parametrize("kind", ["Laplace", "WeakLaplace", "Carleman", "Beurling",
                                      "ReducedBeurlingC0"])
    def test_single_character(self, kind):
        assert np.allclose(singular(fm.character(1.0), kind), [1.0])

    @pytest.mark.parametrize("kind", ["Laplace", "Carleman", "Beurling"])
    def test_trig_poly_within_one_step(self, kind):
        s = singular(fm.trig_poly([(1.0, 1.0), (SQRT2, 1.0)]), kind)
        targets = np.array([1.0, SQRT2])
        # √2 sits between nodes, so either (or both) neighbours may be reported
        assert np.all(np.min(np.abs(s[:, None] - targets[None, :]), axis=1) <= GRID.step)
        assert np.all(np.min(np.abs(s[:, None] - targets[None, :]), axis=0) <= GRID.step)

    def test_constant(self):
        assert np.allclose(singular(fm.character(0.0, 3.0), "Laplace"), [0.0])

    def test_vector_valued(self):
        phi = fm.add(fm.character(1.0, [1.0, 0.0]), fm.character(-2.0, [0.0, 1.0]))
        assert np.allclose(singular(phi, "Carleman"), [-2.0, 1.0])


class TestChirp:
    def test_laplace_empty_carleman_full(self):
        phi = fm.chirp()
        lap = sp.estimate(phi, "Laplace", GRID)
        assert lap.count(sp.SINGULAR) == 0
        assert lap.fraction(sp.UNDECIDED) <= 0.02
        assert sp.estimate(phi, "Carleman", GRID).count(sp.SINGULAR) == GRID.size

    def test_weak_laplace_empty(self):
        assert singular(fm.chirp(), "WeakLaplace").size == 0


class TestIntegrable:
    def test_psi_carleman_is_its_band(self):
        est = sp.estimate(fm.l1_kernel("psi"), "Carleman", GRID)
        must, may = get_entry("psi").known_spectra["Carleman"].mask(GRID)
        sing = np.array(est.classification) == sp.SINGULAR
        assert np.all(sing[must]) and not np.any(sing[~may])
        assert sing.sum() > 50

    def test_psi_laplace_empty(self):
        assert singular(fm.l1_kernel("psi"), "Laplace").size == 0


class TestHalfLine:
    def test_gamma_on_half_line(self):
        phi = get_entry("gamma_2_half").descriptor
        assert np.allclose(singular(phi, "Laplace"), [2.0])

    def test_carleman_refuses_half_line(self):
        with pytest.raises(PrecondError):
            sp.estimate(get_entry("gamma_2_half").descriptor, "Carleman", GRID)

    def test_carleman_refuses_unbounded(self):
        with pytest.raises((PrecondError, UnboundedError)):
            sp.estimate(fm.linear_chirp(), "Carleman", GRID)


class TestLinearChirp:
    def test_beurling_is_one(self):
        assert np.allclose(singular(fm.linear_chirp(), "Beurling"), [1.0])


class TestUniform:
    def test_character_uniform_matches_ordinary(self):
        phi = fm.character(-0.5)
        for kind, base in (("UniformLaplace", "Laplace"), ("UniformCarleman", "Carleman")):
            assert np.allclose(singular(phi, kind, SMALL), singular(phi, base, SMALL))


class TestEstimateApi:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            sp.estimate(fm.character(0.0), "Fourier", GRID)

    def test_diagnostic_columns_present(self):
        est = sp.estimate(fm.character(1.0), "Laplace", SMALL)
        for col in sp.DIAGNOSTIC_COLUMNS:
            assert col in est.diagnostics
            assert len(est.diagnostics[col]) == SMALL.size
        assert len(est.flags) == SMALL.size

    def test_thread_count_does_not_change_results(self):
        phi = fm.trig_poly([(1.0, 1.0), (SQRT2, 0.5j)])
        a = sp.estimate(phi, "Laplace", GRID, threads=1)
        b = sp.estimate(phi, "Laplace", GRID, threads=4)
        assert a.classification == b.classification
        for k in a.diagnostics:
            np.testing.assert_array_equal(a.diagnostics[k], b.diagnostics[k])

    def test_sampled_descriptor_admitted(self):
        t = np.arange(0.0, 400.0, 0.05)
        phi = fm.sampled(0.0, 0.05, np.exp(1j * t), domain=fm.Domain.HALF_LINE)
        s = singular(phi, "Laplace", SMALL)
        assert np.allclose(s, [1.0])


@pytest.mark.parametrize("kind", sp.KINDS)
def test_zero_function_has_empty_spectrum(kind):
    zero = fm.make(fm.TrigPoly(()), 1)
    assert sp.estimate(zero, kind, SMALL).count(sp.REGULAR) == SMALL.size
