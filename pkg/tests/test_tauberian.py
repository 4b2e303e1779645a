from __future__ import annotations

import numpy as np
import pytest

from spectrakit import func_model as fm
from spectrakit import kernels as kn
from spectrakit import spectra as sp
from spectrakit import tauberian as tb
from spectrakit.corpus import SQRT2
from spectrakit.errors import HypothesisUnverified, PrecondError

GRID = sp.FrequencyGrid(-3.0, 3.0, 0.05)


class TestDecayLadder:
    @pytest.mark.parametrize("vals,ok", [
        ([1.0, 0.1, 0.01, 1e-4], True),
        ([1.0, 1.0, 1.0, 1.0], False),
        ([1e-9, 1e-9, 1e-9], True),
        ([1.0, 0.1, 0.5, 0.001], False),
    ])
    def test_ladder(self, vals, ok):
        assert tb.decay_ladder_ok(vals, 1e-3) is ok


class TestIngham:
    def test_chirp_band_pass_decays(self):
        rep = tb.check_ingham_decay(fm.chirp(), kn.band_pass(1.0, 0.5))
        assert rep.theorem_id == "Ingham_2_3_i"
        assert rep.hypothesis_status == tb.VERIFIED
        assert rep.passed
        assert rep.metrics["final_sup"] < rep.metrics["tau_decay"]

    def test_refused_for_character(self):
        with pytest.raises(HypothesisUnverified):
            tb.check_ingham_decay(fm.character(1.0), kn.band_pass(1.0, 0.5))

    def test_assumed_skips_hypothesis(self):
        rep = tb.check_ingham_decay(fm.chirp(), kn.make_psi(), assume_empty=True)
        assert rep.hypothesis_status == tb.ASSUMED

    def test_bad_window_ladder(self):
        with pytest.raises(PrecondError):
            tb.check_ingham_decay(fm.chirp(), kn.make_psi(), window_ladder=[1.0, 0.5, 2.0],
                                  assume_empty=True)


class TestBoundedPrimitive:
    @pytest.mark.parametrize("phi,omega", [
        (fm.chirp(), 1.0),
        (fm.character(1.0), 0.0),
        (fm.trig_poly([(1.0, 1.0), (SQRT2, 1.0)]), 0.5),
    ])
    def test_regular_points(self, phi, omega):
        rep = tb.check_bounded_primitive(phi, omega)
        assert rep.passed
        assert rep.theorem_id in ("Primitive_2_3_iv", "Primitive_2_4_iv")

    def test_singular_point_refused(self):
        with pytest.raises(HypothesisUnverified):
            tb.check_bounded_primitive(fm.character(1.0), 1.0)


class TestErgodic:
    def test_gamma_one_at_zero(self):
        rep = tb.check_regular_zero_ergodic(fm.character(1.0), 0.0, via="weak")
        assert rep.theorem_id == "Ergodic_2_4_iii"
        assert rep.passed

    def test_constant_refused(self):
        with pytest.raises(HypothesisUnverified):
            tb.check_regular_zero_ergodic(fm.character(0.0), 0.0, via="weak")


class TestTransferInclusion:
    def test_transfer_trig(self):
        rep = tb.check_transfer(fm.trig_poly([(1.0, 1.0), (SQRT2, 1.0)]), kn.band_pass(1.0, 0.3), GRID)
        assert rep.passed and rep.metrics["violations"] == 0
        assert np.allclose(rep.metrics["conv_singular"], [1.0])

    def test_inclusion_gamma(self):
        rep = tb.check_inclusion(fm.character(-2.5), GRID)
        assert rep.passed
        assert rep.to_dict()["theorem_id"] == "Inclusion_2_4_ii"


def test_theorem_ids_cover_all_checks():
    assert len(set(tb.THEOREM_IDS)) == 8
