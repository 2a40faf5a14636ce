"""Bounded phase refinement, strength gating and the full phase module."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lumiphase import spectral
from lumiphase.errors import ScoreRangeError, ShapeMismatchError
from lumiphase.phasemod import (
    PhaseModStack,
    antisymmetrize_phase,
    blur_to_strength,
    denormalize_phase,
    modulate_phase,
    normalize_phase,
    self_conjugate_mask,
    symmetrize_phase,
    apply_phase_modulation,
    phase_modulation_forward,
)


class TestPhaseNormalization:
    def test_zero_phase_maps_to_half(self):
        assert normalize_phase(np.array(0.0)) == pytest.approx(0.5)

    def test_pi_maps_to_one(self):
        assert normalize_phase(np.array(np.pi)) == pytest.approx(1.0)

    def test_quarter_turn_down(self):
        assert normalize_phase(np.array(-np.pi / 2)) == pytest.approx(0.25)

    def test_round_trip(self, rng):
        ph = rng.uniform(-np.pi + 1e-9, np.pi, size=(16, 16))
        back = denormalize_phase(normalize_phase(ph))
        assert np.max(np.abs(back - ph)) < 1e-9


class TestModulation:
    def test_zero_steps_identity(self, rng):
        nph = rng.uniform(0, 1, size=(6, 6))
        stack = PhaseModStack(np.zeros((8, 6, 6)), strength=1.0)
        assert np.array_equal(modulate_phase(nph, stack), nph)

    def test_one_is_fixed_point(self):
        nph = np.ones((3, 3))
        stack = PhaseModStack(np.full((4, 3, 3), 0.8), strength=1.0)
        assert np.all(modulate_phase(nph, stack) == 1.0)

    def test_zero_is_fixed_point(self):
        nph = np.zeros((3, 3))
        stack = PhaseModStack(np.full((4, 3, 3), 0.8), strength=1.0)
        assert np.all(modulate_phase(nph, stack) == 0.0)

    def test_single_step_hand_value(self):
        # 0.5 + 1 * 0.5 * 0.5 = 0.75
        out = modulate_phase(np.array([0.5]), PhaseModStack(np.ones((1, 1)), strength=1.0))
        assert out[0] == pytest.approx(0.75)

    @settings(max_examples=50, deadline=None)
    @given(
        nph=arrays(np.float64, (8,), elements=st.floats(0, 1)),
        maps=arrays(np.float64, (8, 8), elements=st.floats(0, 1)),
        s=st.floats(0, 1),
    )
    def test_bounded_refinement_property(self, nph, maps, s):
        m = nph
        for f in maps:
            m = m + (s * f) * m * (1.0 - m)
            assert np.all(m >= 0.0)
            assert np.all(m <= 1.0)
        out = modulate_phase(nph, PhaseModStack(maps, strength=s))
        np.testing.assert_allclose(out, m, rtol=0, atol=1e-12)

    def test_monotone_in_strength(self, rng):
        nph = rng.uniform(0.05, 0.95, size=(8, 8))
        maps = rng.uniform(0.1, 1.0, size=(6, 8, 8))
        previous = None
        for s in np.linspace(0.0, 1.0, 6):
            out = modulate_phase(nph, PhaseModStack(maps, strength=float(s)))
            if previous is not None:
                assert np.all(out >= previous - 1e-15)
            previous = out

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            modulate_phase(np.zeros((4, 4)), PhaseModStack(np.zeros((2, 3, 5))))

    def test_rejects_out_of_range_input(self):
        with pytest.raises(ValueError):
            modulate_phase(np.array([1.5]), PhaseModStack(np.zeros((1, 1))))


class TestStrength:
    def test_sharp_input_disables(self):
        assert blur_to_strength(0.0, 1.0) == 0.0

    def test_full_blur_full_gain(self):
        assert blur_to_strength(1.0, 1.0) == 1.0

    def test_hand_value(self):
        assert blur_to_strength(0.4, 0.5) == pytest.approx(0.2)

    def test_monotone_in_blur(self):
        values = [blur_to_strength(b, 0.8) for b in np.linspace(0, 1, 11)]
        assert all(x <= y for x, y in zip(values, values[1:]))

    def test_range_validation(self):
        with pytest.raises(ScoreRangeError):
            blur_to_strength(1.2, 1.0)
        with pytest.raises(ScoreRangeError):
            blur_to_strength(0.5, 2.0)


class TestAntisymmetrize:
    def test_already_antisymmetric_is_untouched(self, rng):
        ph = spectral.phase(spectral.fft2(rng.uniform(0, 1, size=(8, 8))))
        out = antisymmetrize_phase(ph)
        assert np.max(np.abs(out - ph)) < 1e-12

    def test_output_supports_real_inverse(self, rng):
        ph = rng.uniform(-np.pi + 1e-6, np.pi, size=(8, 8))
        sym = antisymmetrize_phase(ph)
        # unit-magnitude spectrum with symmetrized phase inverts to a real image
        _, residual = spectral.ifft2_with_residual(np.exp(1j * sym))
        assert residual < 1e-12

    def test_defect_is_multiple_of_two_pi(self, rng):
        ph = rng.uniform(-np.pi + 1e-6, np.pi, size=(6, 10))
        sym = antisymmetrize_phase(ph)
        defect = sym + spectral.conjugate_flip(sym)
        wraps = defect / (2 * np.pi)
        assert np.max(np.abs(wraps - np.round(wraps))) < 1e-12

    def test_self_conjugate_mask(self):
        mask = self_conjugate_mask(4, 6)
        assert mask[0, 0] == 1.0
        assert mask[2, 0] == 1.0
        assert mask[0, 3] == 1.0
        assert mask[2, 3] == 1.0
        assert mask.sum() == 4.0
        assert self_conjugate_mask(5, 5).sum() == 1.0

    def test_projection_preserves_dc_phase(self, rng):
        # strong modulation must never flip the global sign of the image
        img = rng.uniform(0, 1, size=(8, 8))
        ph = spectral.phase(spectral.fft2(img))
        shifted = ph + 2.9  # pushes the DC bin far past pi/2
        projected = symmetrize_phase(shifted, ph)
        assert projected[0, 0] == ph[0, 0]
        _, residual = spectral.ifft2_with_residual(np.exp(1j * projected))
        assert residual < 1e-9


class TestFullModule:
    def test_zero_fields_identity(self, rng):
        img = rng.uniform(0, 1, size=(8, 8, 3))
        stack = PhaseModStack(np.zeros((8, 8, 8, 1)), strength=1.0)
        out = apply_phase_modulation(img, stack, b=1.0)
        assert np.max(np.abs(out - img)) < 1e-6

    def test_sharp_score_identity(self, rng):
        img = rng.uniform(0, 1, size=(9, 7, 3))
        stack = PhaseModStack(rng.uniform(0, 1, size=(8, 9, 7, 1)))
        out = apply_phase_modulation(img, stack, b=0.0)
        assert np.max(np.abs(out - img)) < 1e-6

    def test_compositional_oracle_literal_mode(self):
        img = np.zeros((16, 16))
        img[0, 0] = 1.0
        stack = PhaseModStack(np.full((8, 16, 16), 0.1), strength=1.0)
        out = apply_phase_modulation(img, stack, b=1.0, symmetrize=False)

        spec = spectral.fft2(img)
        nph = (spectral.phase(spec) + np.pi) / (2 * np.pi)
        m = nph.copy()
        for _ in range(8):
            m = m + 0.1 * m * (1.0 - m)
        ph_star = 2 * np.pi * m - np.pi
        rebuilt = spectral.recombine(spectral.magnitude(spec, 0.0), ph_star)
        expected = np.clip(np.fft.ifft2(rebuilt).real, 0.0, 1.0)
        assert np.max(np.abs(out - expected)) < 1e-9

    def test_compositional_oracle_symmetrized_mode(self, rng):
        img = rng.uniform(0, 1, size=(16, 16))
        stack = PhaseModStack(np.full((8, 16, 16), 0.1), strength=1.0)
        out = apply_phase_modulation(img, stack, b=1.0)

        spec = spectral.fft2(img)
        ph = spectral.phase(spec)
        nph = (ph + np.pi) / (2 * np.pi)
        m = nph.copy()
        for _ in range(8):
            m = m + 0.1 * m * (1.0 - m)
        ph_star = symmetrize_phase(2 * np.pi * m - np.pi, ph)
        rebuilt = spectral.recombine(spectral.magnitude(spec, 0.0), ph_star)
        expected = np.clip(np.fft.ifft2(rebuilt).real, 0.0, 1.0)
        assert np.max(np.abs(out - expected)) < 1e-9

    def test_magnitude_invariance(self, rng):
        img = rng.uniform(0, 1, size=(12, 12, 3))
        stack = PhaseModStack(rng.uniform(0, 1, size=(8, 12, 12, 1)))
        x_pre, _, _ = phase_modulation_forward(img, stack, b=0.9)
        mag_in = np.abs(spectral.fft2(img))
        mag_out = np.abs(spectral.fft2(x_pre))
        scale = np.max(mag_in)
        assert np.max(np.abs(mag_out - mag_in)) / scale < 1e-9
        mask = mag_in > 1e-6 * scale
        assert np.max(np.abs(mag_out - mag_in)[mask] / mag_in[mask]) < 1e-6

    def test_residual_is_tiny_when_symmetrized(self, rng):
        img = rng.uniform(0, 1, size=(8, 8))
        stack = PhaseModStack(rng.uniform(0, 1, size=(8, 8, 8)))
        _, _, residual = phase_modulation_forward(img, stack, b=1.0, symmetrize=True)
        assert residual < 1e-9

    def test_residual_recorded_in_literal_mode(self, rng):
        img = rng.uniform(0, 1, size=(8, 8))
        stack = PhaseModStack(rng.uniform(0.5, 1.0, size=(8, 8, 8)))
        _, _, residual = phase_modulation_forward(img, stack, b=1.0, symmetrize=False)
        assert residual > 1e-6  # pointwise refinement genuinely breaks symmetry

    def test_output_clamped(self, rng):
        img = rng.uniform(0, 1, size=(8, 8))
        stack = PhaseModStack(rng.uniform(0, 1, size=(8, 8, 8)))
        out = apply_phase_modulation(img, stack, b=1.0)
        assert np.all(out >= 0.0)
        assert np.all(out <= 1.0)

    def test_stack_validation(self):
        with pytest.raises(ValueError):
            PhaseModStack(np.full((2, 2, 2), 1.5))
        with pytest.raises(ValueError):
            PhaseModStack(np.zeros((2, 2, 2)), strength=-0.1)
