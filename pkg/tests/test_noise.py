"""Noise specs, dilations, sampling, and the two-description equivalence."""

import math

import numpy as np
import pytest

from errfilt.errors import NumericalCheckError
from errfilt.hilbert import BasisLabel, LabeledState, partial_trace_env
from errfilt.noise import (InternalNoiseSpec, LengthModel, PhaseNoiseSpec,
                           RandomPhaseSpec, alpha_from_length,
                           apply_internal_noise, apply_phase_noise,
                           monte_carlo_dephased_density, sample_phases)


class TestPhaseNoiseSpec:
    def test_normalization_enforced(self):
        with pytest.raises(NumericalCheckError):
            PhaseNoiseSpec(((0.9, 0.9),))

    def test_uniform_helper(self):
        spec = PhaseNoiseSpec.uniform(3, alpha2=0.8)
        assert spec.channel_count == 3
        assert np.allclose(np.abs(spec.alphas) ** 2, 0.8)

    def test_phase_alignment(self):
        spec = PhaseNoiseSpec.from_alphas([0.9 * np.exp(0.7j), 0.8 * np.exp(-1.1j)])
        aligned = spec.phase_aligned()
        assert np.allclose(aligned.alphas.imag, 0.0)
        assert np.all(aligned.alphas.real >= 0.0)
        assert np.allclose(np.abs(aligned.betas), np.abs(spec.betas))


class TestApplyPhaseNoise:
    def test_noiseless_channels_leave_state_unchanged(self):
        state = LabeledState.from_amplitudes(np.ones(4) / 2.0)
        out = apply_phase_noise(state, PhaseNoiseSpec.uniform(4, alpha2=1.0), "s")
        assert np.allclose(out.no_error_component(), state.amps)
        assert out.norm2() == pytest.approx(1.0, abs=1e-14)

    def test_full_noise_correlates_environment(self):
        state = LabeledState.from_amplitudes([1.0])
        out = apply_phase_noise(state, PhaseNoiseSpec.uniform(1, alpha2=0.0), "s")
        assert out.amplitude(BasisLabel((1,), (("s", 1),))) == pytest.approx(1.0)
        assert out.no_error_norm2() == pytest.approx(0.0)

    def test_partial_trace_off_diagonal(self):
        state = LabeledState.from_amplitudes(np.array([1.0, 1.0]) / math.sqrt(2))
        out = apply_phase_noise(state, PhaseNoiseSpec.uniform(2, alpha2=0.9), "s")
        rho = partial_trace_env(out)
        assert rho.mat[0, 1] == pytest.approx(0.45, abs=1e-14)

    def test_segment_consumed(self):
        state = LabeledState.from_amplitudes([1.0, 0.0])
        spec = PhaseNoiseSpec.uniform(2, alpha2=0.5)
        out = apply_phase_noise(state, spec, "s")
        with pytest.raises(ValueError):
            apply_phase_noise(out, spec, "s")


class TestInternalNoise:
    def test_pure_dephasing_with_sigma_z(self):
        sz = np.array([[1, 0], [0, -1]], dtype=complex)
        a = math.sqrt(0.8)
        spec = InternalNoiseSpec(2, a, ((math.sqrt(0.2), sz),))
        plus = np.array([[1.0, 1.0]]) / math.sqrt(2.0)  # one channel, spin +x
        state = LabeledState(plus, system_axes=2)
        out = apply_internal_noise(state, spec, "s")
        rho = partial_trace_env(out)
        # populations preserved, coherence shrunk by |alpha|^2 - |beta|^2
        assert rho.mat[0, 0] == pytest.approx(0.5, abs=1e-12)
        assert rho.mat[0, 1] == pytest.approx(0.5 * (0.8 - 0.2), abs=1e-12)

    def test_direct_send_error_probability(self):
        spec = InternalNoiseSpec.pauli(math.sqrt(0.7))
        state = LabeledState(np.array([[1.0, 0.0]]), system_axes=2)
        out = apply_internal_noise(state, spec, "s")
        assert out.norm2() == pytest.approx(1.0, abs=1e-12)
        assert 1.0 - out.no_error_norm2() == pytest.approx(0.3, abs=1e-12)
        assert spec.error_probability() == pytest.approx(0.3, abs=1e-12)

    def test_isometry_check_rejects_bad_spec(self):
        sz = np.array([[1, 0], [0, -1]], dtype=complex)
        with pytest.raises(NumericalCheckError):
            InternalNoiseSpec(2, 0.9, ((0.9, sz),))

    def test_completeness_sum(self):
        spec = InternalNoiseSpec.pauli(math.sqrt(0.6))
        m = spec.dilation_matrix()
        gram = m.conj().T @ m
        assert np.max(np.abs(gram - np.eye(2))) <= 1e-12


class TestSampling:
    def test_target_one_gives_zero_phases(self):
        phases = sample_phases(RandomPhaseSpec(1.0), 100, seed=0)
        assert np.all(phases == 0.0)

    def test_target_zero_gives_uniform_phases(self):
        phases = sample_phases(RandomPhaseSpec(0.0), 200_000, seed=1)
        mean = np.exp(1j * phases).mean()
        assert abs(mean) < 3.0 / math.sqrt(200_000) * 1.1

    def test_target_mean_within_variance_bound(self):
        # |mean e^{i phi} - 0.9| < 3 * 0.44 / sqrt(1e5) for the mixture
        n = 100_000
        phases = sample_phases(RandomPhaseSpec(0.9), n, seed=2)
        mean = np.exp(1j * phases).mean()
        assert abs(mean - 0.9) < 3.0 * 0.44 / math.sqrt(n)

    def test_wrapped_gaussian_mean(self):
        n = 200_000
        phases = sample_phases(RandomPhaseSpec(0.8, "wrapped-gaussian"), n, seed=3)
        mean = np.exp(1j * phases).mean()
        assert abs(mean - 0.8) < 3.0 / math.sqrt(n)

    def test_rejects_out_of_range_target(self):
        with pytest.raises(ValueError):
            RandomPhaseSpec(1.5)


class TestLengthModel:
    def test_zero_rate_or_length(self):
        assert alpha_from_length(LengthModel(0.0, 5.0)) == 1.0
        assert alpha_from_length(LengthModel(0.3, 0.0)) == 1.0

    def test_closed_form(self):
        model = LengthModel(1.0, math.log(1.0 / 0.81))
        assert alpha_from_length(model) ** 2 == pytest.approx(0.81, abs=1e-15)

    def test_segment_split(self):
        model = LengthModel(0.7, 2.0)
        assert model.segment_alpha(4) ** 8 == pytest.approx(model.survival(),
                                                            abs=1e-15)


class TestDescriptionEquivalence:
    def test_sampled_matrix_matches_dilation(self):
        # the random-parameter and system-environment descriptions agree
        rng = np.random.default_rng(5)
        vec = rng.normal(size=4) + 1j * rng.normal(size=4)
        vec /= np.linalg.norm(vec)
        alpha = math.sqrt(0.8)
        mc, se = monte_carlo_dephased_density(vec, alpha, 100_000, seed=6)
        state = LabeledState.from_amplitudes(vec)
        out = apply_phase_noise(state, PhaseNoiseSpec.uniform(4, alpha=alpha), "s")
        exact = partial_trace_env(out).mat
        diff = mc - exact
        assert np.all(np.abs(diff.real) <= 3.0 * se.real + 1e-12)
        assert np.all(np.abs(diff.imag) <= 3.0 * se.imag + 1e-12)

    def test_dilation_norm_preserving(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            t = int(rng.integers(1, 9))
            vec = rng.normal(size=t) + 1j * rng.normal(size=t)
            vec /= np.linalg.norm(vec)
            alphas = rng.random(t) * np.exp(1j * rng.uniform(0, 2 * np.pi, t))
            spec = PhaseNoiseSpec.from_alphas(alphas)
            out = apply_phase_noise(LabeledState.from_amplitudes(vec), spec, "s")
            assert abs(out.norm2() - 1.0) <= 1e-12
