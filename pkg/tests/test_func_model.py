from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectrakit import func_model as fm
from spectrakit.errors import DomainError, PrecondError

freqs = st.floats(-6, 6, allow_nan=False).map(lambda x: round(x, 3))
amps = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)
shifts = st.floats(0, 20, allow_nan=False)


@st.composite
def descriptors(draw):
    kind = draw(st.sampled_from(["char", "trig", "chirp", "kernel", "exp"]))
    if kind == "char":
        phi = fm.character(draw(freqs), draw(amps))
    elif kind == "trig":
        terms = draw(st.lists(st.tuples(freqs, amps), min_size=1, max_size=3))
        phi = fm.trig_poly(terms)
    elif kind == "chirp":
        phi = fm.chirp(draw(amps))
    elif kind == "kernel":
        phi = fm.l1_kernel("psi", draw(amps))
    else:
        mu = complex(-draw(st.floats(0, 2)), draw(freqs))
        phi = fm.exp_sum([(mu, draw(amps))])
    for _ in range(draw(st.integers(0, 2))):
        op = draw(st.sampled_from(["translate", "modulate", "scale"]))
        if op == "translate":
            phi = fm.translate(phi, draw(shifts))
        elif op == "modulate":
            phi = fm.modulate(phi, draw(freqs))
        else:
            phi = fm.scale(phi, draw(amps))
    return phi


class TestConstructors:
    def test_character_values(self):
        phi = fm.character(1.5, 2.0)
        t = np.array([0.0, 1.0, -2.0])
        assert np.allclose(phi(t)[:, 0], 2.0 * np.exp(1.5j * t))
        assert phi.sup_norm_bound == pytest.approx(2.0)

    def test_vector_valued_dimension(self):
        phi = fm.character(1.0, [1.0, 2j])
        assert phi.dim == 2
        assert phi(0.0).shape == (2,)

    def test_chirp_and_linear_chirp(self):
        assert fm.chirp()(2.0)[0] == pytest.approx(np.exp(4j))
        lc = fm.linear_chirp()
        assert not lc.bounded
        assert lc(3.0)[0] == pytest.approx(3.0 * np.exp(3j))

    def test_half_line_rejects_negative_time(self):
        phi = fm.exp_sum([(-1.0, 1.0)])
        with pytest.raises(DomainError):
            phi(-0.5)
        with pytest.raises(DomainError):
            fm.translate(phi, -1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(PrecondError):
            fm.add(fm.character(0.0), fm.character(0.0, [1.0, 1.0]))

    def test_sampled_requires_positive_spacing(self):
        with pytest.raises(PrecondError):
            fm.sampled(0.0, 0.0, [1, 2, 3])

    def test_sampled_is_inexact_and_interpolates(self):
        phi = fm.sampled(0.0, 0.5, [0.0, 1.0, 2.0])
        assert phi.inexact
        assert phi(0.75)[0] == pytest.approx(1.5)

    def test_restrict_and_extend(self):
        phi = fm.restrict_and_extend(fm.character(1.0))
        assert phi.domain is fm.Domain.HALF_LINE


class TestAlgebra:
    def test_translate_character_folds_to_phase(self):
        phi = fm.translate(fm.character(2.0), 0.7)
        assert isinstance(phi.body, fm.Character)
        assert phi(0.0)[0] == pytest.approx(np.exp(1.4j))

    def test_modulate_adds_frequency(self):
        phi = fm.modulate(fm.character(1.0), -2.5)
        assert isinstance(phi.body, fm.Character)
        assert phi.body.omega == pytest.approx(-1.5)

    def test_subtract_self_is_zero(self):
        phi = fm.trig_poly([(1.0, 1.0), (math.sqrt(2), 2.0)])
        z = fm.subtract(phi, phi)
        assert np.allclose(z(np.linspace(-3, 3, 7)), 0.0)

    @settings(max_examples=60, deadline=None)
    @given(descriptors(), shifts, shifts)
    def test_translation_is_additive(self, phi, s1, s2):
        a = fm.translate(fm.translate(phi, s1), s2)
        b = fm.translate(phi, s1 + s2)
        t = np.linspace(0.0, 5.0, 7)
        assert np.allclose(a(t), b(t), atol=1e-9 * (1 + phi.sup_norm_bound))

    @settings(max_examples=60, deadline=None)
    @given(descriptors(), freqs, st.floats(0, 5))
    def test_modulate_matches_pointwise_product(self, phi, w, t):
        lhs = fm.modulate(phi, w)(t)
        rhs = np.exp(1j * w * t) * phi(t)
        assert np.allclose(lhs, rhs, atol=1e-10 * (1 + phi.sup_norm_bound))

    @settings(max_examples=60, deadline=None)
    @given(descriptors())
    def test_sup_norm_bound_is_certified(self, phi):
        t = np.linspace(0.0, 30.0, 301)
        assert np.max(fm.norm(phi(t))) <= phi.sup_norm_bound * (1 + 1e-9) + 1e-12


class TestJson:
    @settings(max_examples=80, deadline=None)
    @given(descriptors())
    def test_round_trip(self, phi):
        back = fm.from_json(fm.to_json(phi))
        assert fm.equivalent(phi, back)
        t = np.linspace(0.0, 4.0, 5)
        assert np.allclose(phi(t), back(t), rtol=1e-12, atol=1e-14)

    def test_unbounded_flag_survives(self):
        back = fm.from_json(fm.to_json(fm.linear_chirp()))
        assert math.isinf(back.sup_norm_bound)

    @pytest.mark.parametrize("text", ["not json", '{"domain": "full_line"}', "[]"])
    def test_malformed_input(self, text):
        with pytest.raises(PrecondError):
            fm.from_json(text)

    def test_dimension_mismatch_rejected(self):
        obj = fm.to_json_obj(fm.character(1.0, [1.0, 2.0]))
        obj["dim"] = 3
        with pytest.raises(PrecondError):
            fm.from_json_obj(obj)


class TestHelpers:
    @settings(max_examples=50, deadline=None)
    @given(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False))
    def test_gfun_matches_definition(self, z):
        g = complex(fm.gfun(z))
        if abs(z) > 1e-3:
            assert g == pytest.approx((np.exp(z) - 1) / z, rel=1e-9, abs=1e-12)
        else:
            assert g == pytest.approx(1 + z / 2, abs=1e-6)

    def test_fresnel_primitive_derivative(self):
        x = np.array([0.3, 1.7, 4.0])
        h = 1e-5
        d = (fm.fresnel_primitive(x + h) - fm.fresnel_primitive(x - h)) / (2 * h)
        assert np.allclose(d, np.exp(1j * x ** 2), atol=1e-7)
