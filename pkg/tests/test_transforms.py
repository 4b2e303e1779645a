from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import convolution_oracle, laplace_oracle
from spectrakit import func_model as fm
from spectrakit import kernels as kn
from spectrakit import transforms as tr
from spectrakit.errors import PrecondError, UnboundedError

# frozen from the Simpson+Richardson oracle, h = 0.005, horizon to tail 1e-13
CHIRP_LAPLACE_AT_1 = 0.5348779745336327 + 0.270513580162054j
CHIRP_LAPLACE_AT_HALF_2I = 1.0153645885465872 - 0.608855872977071j
# closed-form boundary value of the chirp transform at 0
CHIRP_LIMIT = (1 + 1j) * math.sqrt(math.pi) / 2 ** 1.5


class TestLaplace:
    def test_chirp_frozen_values(self):
        assert complex(tr.laplace(fm.chirp(), 1.0).value[0]) == pytest.approx(CHIRP_LAPLACE_AT_1, abs=1e-10)
        s = tr.laplace(fm.chirp(), 0.5 + 2j)
        assert complex(s.value[0]) == pytest.approx(CHIRP_LAPLACE_AT_HALF_2I, abs=1e-10)
        assert s.err_est < 1e-8

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-5, 5), st.floats(0.01, 3), st.floats(-5, 5))
    def test_character_closed_form(self, w, a, b):
        lam = complex(a, b)
        v = complex(tr.laplace(fm.character(w), lam).value[0])
        assert v == pytest.approx(1.0 / (lam - 1j * w), rel=1e-12)

    def test_requires_right_half_plane(self):
        with pytest.raises(PrecondError):
            tr.laplace(fm.character(0.0), -1.0)

    @pytest.mark.parametrize("lam", [1.0, 0.3 + 1.2j, 2.0 - 3.0j])
    def test_kernel_against_oracle(self, lam):
        phi = fm.l1_kernel("psi")
        ref = laplace_oracle(phi, lam, 1.0, horizon=70.0, h=0.02)
        assert np.allclose(tr.laplace(phi, lam).value, ref, atol=1e-9)

    @pytest.mark.parametrize("h", [0.5, 1.0])
    def test_mollified_chirp_against_oracle(self, h):
        phi = tr.mollify(fm.chirp(), h)
        lam = 0.7 + 0.4j
        ref = laplace_oracle(phi, lam, 1.0, h=0.004, tail=1e-12)
        assert np.allclose(tr.laplace(phi, lam).value, ref, atol=1e-8)

    def test_expsum_closed_form(self):
        phi = fm.exp_sum([(-0.5 + 1j, 2.0), (-1.0, 1j)])
        lam = 0.2 + 0.3j
        exact = 2.0 / (lam + 0.5 - 1j) + 1j / (lam + 1.0)
        assert complex(tr.laplace(phi, lam).value[0]) == pytest.approx(exact, rel=1e-12)


class TestCarleman:
    def test_left_branch_of_character(self):
        v = complex(tr.carleman(fm.character(1.0), -0.5 + 2j).value[0])
        assert v == pytest.approx(1.0 / (-0.5 + 2j - 1j), rel=1e-12)

    def test_left_branch_of_chirp_against_oracle(self):
        lam = -0.6 + 0.8j
        ref = laplace_oracle(fm.chirp(), lam, 1.0, side=-1, h=0.004)
        assert np.allclose(tr.carleman(fm.chirp(), lam).value, ref, atol=1e-9)

    def test_rejects_imaginary_axis_and_half_line(self):
        with pytest.raises(PrecondError):
            tr.carleman(fm.character(0.0), 1j)
        with pytest.raises(PrecondError):
            tr.carleman(fm.exp_sum([(-1.0, 1.0)]), 1.0)
        with pytest.raises(PrecondError):
            tr.carleman(fm.linear_chirp(), 1.0)


class TestUniform:
    def test_matches_transform_of_translate(self):
        phi = fm.chirp()
        lam = 0.4 + 1.0j
        got = tr.uniform_transform(phi, lam, [0.0, 1.0, 2.5])
        for s, sample in zip([0.0, 1.0, 2.5], got):
            ref = tr.laplace(fm.translate(phi, s), lam).value
            assert np.allclose(sample.value, ref, atol=1e-9)


class TestConvolution:
    def test_character_eigenfunction(self):
        k = kn.band_pass(1.0, 0.5)
        t = np.array([0.0, 1.3])
        got = tr.convolve(fm.character(1.2), k, t)[:, 0]
        assert np.allclose(got, k.freq_eval(np.array([1.2]))[0] * np.exp(1.2j * t), atol=1e-12)

    @pytest.mark.parametrize("t", [0.0, 2.0, -3.5])
    def test_chirp_against_oracle(self, t):
        k = kn.band_pass(1.0, 0.5)
        lo, hi = k.effective_time_support
        ref = convolution_oracle(fm.chirp(), lambda u: k.time_eval(u), t, max(-lo, hi), h=0.01)
        got = tr.convolve(fm.chirp(), k, np.array([t]))[0]
        assert np.allclose(got, ref, atol=1e-8)

    def test_unbounded_rejected(self):
        with pytest.raises(UnboundedError):
            tr.convolve(fm.linear_chirp(), kn.make_psi(), np.array([0.0]))


class TestPrimitives:
    def test_modulated_primitive_of_character(self):
        s = np.array([0.5, 3.0])
        got = tr.modulated_primitive(fm.character(2.0), 0.5, s)[:, 0]
        assert np.allclose(got, (np.exp(1.5j * s) - 1) / 1.5j, atol=1e-13)

    def test_primitive_of_chirp_is_fresnel(self):
        P = tr.primitive(fm.chirp())
        assert complex(P(3.0)[0]) == pytest.approx(complex(fm.fresnel_primitive(3.0)), abs=1e-12)


class TestErgodic:
    def test_character_is_ergodic_with_zero_mean(self):
        rep = tr.ergodic_mean(fm.character(1.0))
        assert rep.verdict == "Ergodic"
        assert np.allclose(rep.mean, 0.0, atol=1e-3)

    def test_constant_mean(self):
        rep = tr.ergodic_mean(fm.character(0.0, 2.0))
        assert rep.verdict == "Ergodic"
        assert complex(rep.mean[0]) == pytest.approx(2.0)

    def test_linear_chirp_is_not_ergodic(self):
        assert tr.ergodic_mean(fm.linear_chirp()).verdict == "NotErgodic"


class TestBoundaryLimit:
    def test_chirp_limit(self):
        est, err = tr.boundary_limit(fm.chirp(), 0.0)
        assert abs(complex(est[0]) - CHIRP_LIMIT) < 1e-4
        assert err < 1e-4

    def test_closed_form_chirp_transform(self):
        lam = 0.3 + 0.1j
        assert complex(tr.chirp_laplace(lam)) == pytest.approx(
            complex(tr.laplace(fm.chirp(), lam).value[0]), abs=1e-12)
        assert cmath.isfinite(complex(tr.chirp_laplace(1e-9)))
