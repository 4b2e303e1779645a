from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectrakit import kernels as kn
from spectrakit.errors import PrecondError

# frozen from the Simpson+Richardson oracle (tests/oracles.py) on the
# bump e^{1/(u²-1)}, 20000 intervals
BUMP_CONSTANT = 1.0935626847624609
PSI_AT_0 = 0.2357443038374
PSI_AT_3 = 0.04683734454257953


class TestBump:
    def test_normalising_constant(self):
        assert kn.bump_constant() == pytest.approx(BUMP_CONSTANT, rel=1e-12)

    def test_psi_values(self):
        assert float(kn.psi_time(0.0)) == pytest.approx(PSI_AT_0, rel=1e-10)
        assert float(kn.psi_time(3.0)) == pytest.approx(PSI_AT_3, rel=1e-9)

    def test_psi_hat_normalised_at_zero(self):
        assert kn.psi_hat(0.0)[0] == pytest.approx(1.0, abs=1e-13)

    def test_table_matches_direct_transform(self):
        t = np.linspace(0.0, 100.0, 777)
        assert np.max(np.abs(kn.bump_ft(t) - kn._bump_ft_direct(t))) < 1e-10

    def test_psi_hat_table_matches_direct(self):
        s = np.random.default_rng(3).uniform(-2.2, 2.2, 5000)
        assert np.max(np.abs(kn.psi_hat(s) - kn.psi_hat_direct(s))) < 1e-13

    def test_psi_hat_support(self):
        assert np.all(kn.psi_hat(np.array([-2.0, 2.0, 2.5, -7.0])) == 0.0)
        assert np.all(kn.psi_hat(np.linspace(-1.99, 1.99, 50)) > 0.0)

    def test_cache_file_written(self, tmp_path, monkeypatch):
        path = tmp_path / "kc.npz"
        monkeypatch.setenv("SPECTRA_KERNEL_CACHE", str(path))
        assert kn.kernel_cache_path() == path


class TestBandPass:
    def test_support_and_peak(self):
        k = kn.band_pass(1.0, 0.5)
        assert k.freq_support == (0.5, 1.5)
        assert k.freq_eval(np.array([1.0]))[0] == pytest.approx(1.0, abs=1e-13)
        assert k.freq_eval(np.array([0.49, 1.51])).tolist() == [0.0, 0.0]

    def test_psi_is_band_pass_zero_two(self):
        assert kn.make_psi().id == kn.band_pass(0.0, 2.0).id
        assert kn.get_kernel("psi").freq_support == (-2.0, 2.0)

    @pytest.mark.parametrize("omega,eps", [(0.0, 2.0), (1.0, 0.5), (-2.0, 1.0), (3.0, 0.04)])
    def test_transform_matches_quadrature(self, omega, eps):
        k = kn.band_pass(omega, eps)
        s = np.linspace(omega - 1.2 * eps, omega + 1.2 * eps, 9)
        assert kn.verify_transform(k, s) < kn.EPS_QUAD

    def test_effective_support_truncation(self):
        k = kn.band_pass(0.0, 1.0)
        lo, hi = k.effective_time_support
        assert np.max(np.abs(k.time_eval(np.array([lo * 1.01, hi * 1.01])))) < kn.EPS_SUPP

    def test_rejects_non_positive_width(self):
        with pytest.raises(PrecondError):
            kn.band_pass(0.0, 0.0)

    def test_kernel_ids_round_trip(self):
        k = kn.band_pass(-2.5, 0.3)
        assert kn.get_kernel(k.id) is k
        with pytest.raises(PrecondError):
            kn.get_kernel("nonsense")

    def test_modulation_shifts_support(self):
        k = kn.band_pass(1.0, 0.5).modulated(-1.0)
        assert k.freq_support == pytest.approx((-0.5, 0.5))

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-5, 5), st.floats(0.05, 3.0), st.floats(-10, 10))
    def test_transform_vanishes_off_support(self, omega, eps, s):
        k = kn.band_pass(omega, eps)
        val = float(k.freq_eval(np.array([s]))[0])
        if abs(s - omega) >= eps:
            assert val == 0.0
        assert 0.0 <= val <= 1.0 + 1e-12

    def test_character_eigenvalue(self):
        k = kn.band_pass(1.0, 0.5)
        assert kn.convolve_character(1.2, k) == pytest.approx(complex(k.freq_eval(np.array([1.2]))[0]))


class TestApproximateIdentity:
    def test_transform_scaling(self):
        f3 = kn.approximate_identity(3)
        s = np.array([0.0, 1.5, 4.0])
        assert np.allclose(f3.freq_eval(s), kn.psi_hat(s / 3.0), atol=1e-14)

    def test_rejects_bad_index(self):
        with pytest.raises(PrecondError):
            kn.approximate_identity(0)


class TestInverseFilter:
    def test_product_is_one_on_target(self):
        k = kn.band_pass(0.0, 2.0)
        g = kn.inverse_filter(k, -0.5, 0.8)
        s = np.linspace(-0.5, 0.8, 41)
        assert np.max(np.abs(k.freq_eval(s) * g.freq_eval(s) - 1.0)) < kn.EPS_QUAD

    def test_not_closed_under_modulation(self):
        g = kn.inverse_filter(kn.band_pass(0.0, 2.0), -0.5, 0.5)
        with pytest.raises(PrecondError):
            g.modulated(1.0)
