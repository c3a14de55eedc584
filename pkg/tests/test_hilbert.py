"""Labeled states, operators, density matrices and their invariants."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errfilt.errors import DimensionCapError, NumericalCheckError
from errfilt.hilbert import (BasisLabel, DenseOperator, DensityMatrix,
                             EnvRegister, LabeledState, apply_operator,
                             channel_extraction, fidelity,
                             keep_channels_projector, partial_trace_env,
                             project, tensor)


def random_state(rng, dim):
    raw = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return raw / np.linalg.norm(raw)


def random_unitary(rng, dim):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim))
                        + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


class TestTensor:
    def test_identity_kron(self):
        out = tensor(DenseOperator.identity(2), DenseOperator.identity(3))
        assert np.allclose(out.mat, np.eye(6))

    def test_basis_states_combine(self):
        a = LabeledState.basis((2,), 2)
        b = LabeledState.basis((3,), 1)
        out = tensor(a, b)
        assert out.system_shape == (2, 3)
        assert out.amplitude(BasisLabel((2, 1))) == 1.0
        assert out.norm2() == pytest.approx(1.0)

    def test_superposition_with_vacuum_register(self):
        # (0.6|0> + 0.8|1>) ox |0> -> amplitudes (0.6, 0, 0.8, 0), by hand
        a = LabeledState.from_amplitudes([0.6, 0.8])
        b = LabeledState.from_amplitudes([1.0, 0.0])
        out = tensor(a, b)
        assert np.allclose(out.amps.reshape(-1), [0.6, 0.0, 0.8, 0.0])

    def test_dimension_cap(self):
        big = LabeledState.from_amplitudes(np.ones(1024) / 32.0)
        with pytest.raises(DimensionCapError):
            tensor(big, big, dim_cap=2**16)

    def test_env_segments_must_differ(self):
        reg = (EnvRegister("s", 2),)
        a = LabeledState(np.array([[1.0, 0.0]]), system_axes=1, env=reg)
        with pytest.raises(ValueError):
            tensor(a, a)


class TestPartialTrace:
    def test_product_state_is_pure(self):
        psi = np.array([0.6, 0.8j])
        state = LabeledState(np.outer(psi, [1.0, 0.0]), system_axes=1,
                             env=(EnvRegister("s", 2),))
        rho = partial_trace_env(state)
        assert np.allclose(rho.mat, np.outer(psi, psi.conj()))

    def test_maximal_dephasing(self):
        # (|1>|0>_E + |2>|1>_E)/sqrt(2) -> diag(1/2, 1/2)
        amps = np.zeros((2, 2), dtype=complex)
        amps[0, 0] = amps[1, 1] = 1.0 / math.sqrt(2.0)
        state = LabeledState(amps, system_axes=1, env=(EnvRegister("s", 2),))
        rho = partial_trace_env(state)
        assert np.allclose(rho.mat, np.diag([0.5, 0.5]))

    def test_partial_dephasing_off_diagonal(self):
        # two channels, |alpha|^2 = 0.9: off-diagonal = |alpha|^2 / 2
        a = math.sqrt(0.9)
        b = math.sqrt(0.1)
        amps = np.zeros((2, 3), dtype=complex)
        amps[0, 0] = a / math.sqrt(2.0)
        amps[0, 1] = b / math.sqrt(2.0)
        amps[1, 0] = a / math.sqrt(2.0)
        amps[1, 2] = b / math.sqrt(2.0)
        rho = partial_trace_env(LabeledState(amps, 1, (EnvRegister("s", 3),)))
        assert rho.mat[0, 1] == pytest.approx(0.45, abs=1e-14)
        assert rho.trace() == pytest.approx(1.0, abs=1e-14)


class TestFidelity:
    def test_pure_state_overlap_is_one(self):
        rng = np.random.default_rng(1)
        psi = random_state(rng, 5)
        rho = DensityMatrix(np.outer(psi, psi.conj()))
        assert fidelity(rho, psi) == pytest.approx(1.0, abs=1e-12)

    def test_maximally_mixed(self):
        rho = DensityMatrix(np.eye(4) / 4.0)
        psi = random_state(np.random.default_rng(2), 4)
        assert fidelity(rho, psi) == pytest.approx(0.25, abs=1e-12)

    def test_noisy_pair_overlap(self):
        # rho = 0.8 P_pair + 0.1 (P_11 + P_22) -> overlap 0.9, built explicitly
        m, p = 2, 0.8
        pair = np.zeros(m * m, dtype=complex)
        pair[0] = pair[3] = 1.0 / math.sqrt(2.0)
        rho = p * np.outer(pair, pair.conj())
        rho[0, 0] += (1 - p) / m
        rho[3, 3] += (1 - p) / m
        assert fidelity(DensityMatrix(rho), pair) == pytest.approx(0.9, abs=1e-14)

    def test_rejects_unnormalized_target(self):
        rho = DensityMatrix(np.eye(2) / 2.0)
        with pytest.raises(ValueError):
            fidelity(rho, np.array([1.0, 1.0]))

    @given(st.integers(0, 10**6))
    @settings(max_examples=25, deadline=None)
    def test_global_phase_invariance(self, seed):
        rng = np.random.default_rng(seed)
        psi = random_state(rng, 6)
        mix = rng.dirichlet(np.ones(6))
        basis = random_unitary(rng, 6)
        rho = DensityMatrix((basis * mix) @ basis.conj().T)
        phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
        assert fidelity(rho, psi) == pytest.approx(fidelity(rho, phase * psi),
                                                   abs=1e-12)


class TestProject:
    def test_projection_probability_matches_expectation(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            dim = int(rng.integers(2, 9))
            psi = random_state(rng, dim)
            keep = sorted(rng.choice(dim, size=int(rng.integers(1, dim + 1)),
                                     replace=False) + 1)
            proj = keep_channels_projector(dim, keep)
            state = LabeledState.from_amplitudes(psi)
            projected, prob = project(state, proj)
            expected = float(np.vdot(psi, proj.mat @ psi).real)
            assert prob == pytest.approx(expected, abs=1e-12)
            assert projected.norm2() == pytest.approx(prob, abs=1e-12)

    def test_rejects_non_idempotent(self):
        state = LabeledState.from_amplitudes([1.0, 0.0])
        with pytest.raises(ValueError):
            project(state, np.array([[0.5, 0.0], [0.0, 1.0]]))


class TestInvariants:
    def test_unitaries_preserve_norm(self):
        # 1000 random states, dims up to 64
        rng = np.random.default_rng(7)
        for _ in range(1000):
            dim = int(rng.integers(2, 65))
            psi = random_state(rng, dim)
            u = random_unitary(rng, dim)
            out = apply_operator(LabeledState.from_amplitudes(psi), u)
            assert abs(out.norm2() - 1.0) <= 1e-12

    def test_traced_state_has_unit_trace_after_unitary(self):
        rng = np.random.default_rng(8)
        amps = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
        amps /= np.linalg.norm(amps)
        state = LabeledState(amps, 1, (EnvRegister("s", 3),))
        u = random_unitary(rng, 4)
        rho = partial_trace_env(apply_operator(state, u))
        assert rho.trace() == pytest.approx(1.0, abs=1e-12)

    def test_extraction_drops_channels(self):
        ext = channel_extraction(4, [1, 3])
        state = LabeledState.from_amplitudes(np.ones(4) / 2.0)
        out = apply_operator(state, ext)
        assert out.system_shape == (2,)
        assert out.norm2() == pytest.approx(0.5)


class TestDensityMatrix:
    def test_rejects_non_hermitian(self):
        with pytest.raises(NumericalCheckError):
            DensityMatrix(np.array([[0.5, 0.1], [0.3, 0.5]]))

    def test_rejects_negative_eigenvalues(self):
        with pytest.raises(NumericalCheckError):
            DensityMatrix(np.diag([1.2, -0.2]))

    def test_clips_roundoff_negatives(self):
        rho = DensityMatrix(np.diag([1.0, -1e-12]))
        assert rho.eigenvalues().min() == 0.0


class TestLabels:
    def test_amplitude_lookup(self):
        state = LabeledState.basis((3,), 2, env=(EnvRegister("s", 4),))
        assert state.amplitude(BasisLabel((2,), (("s", 0),))) == 1.0
        assert state.amplitude(BasisLabel((1,), (("s", 0),))) == 0.0

    def test_label_validation(self):
        state = LabeledState.basis((3,), 2, env=(EnvRegister("s", 4),))
        with pytest.raises(ValueError):
            state.amplitude(BasisLabel((4,), (("s", 0),)))
        with pytest.raises(ValueError):
            state.amplitude(BasisLabel((1,), (("other", 0),)))
        with pytest.raises(ValueError):
            BasisLabel((1,), (("s", 0), ("s", 1)))

    def test_norm_cap(self):
        with pytest.raises(NumericalCheckError):
            LabeledState.from_amplitudes([1.0, 1.0])
