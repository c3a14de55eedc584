"""Channel noise models in two equivalent descriptions.

Dephasing on channel j maps |j>|0> to |j>(alpha_j |0> + beta_j |j>), with the
disturbed environment states orthogonal for different channels.  The same
channel can instead be described by an i.i.d. random phase per channel with
E[e^{i phi}] = alpha; averaging over samples reproduces the dilation-traced
density matrix.  Both forms are implemented and cross-checked in the tests.

For particles with an internal degree of freedom the dilation generalizes to
|j mu>|0> -> alpha |j mu>|0> + sum_{nu,lambda} beta_lambda (E_lambda)_{mu nu}
|j nu>|j lambda>; the supplied (alpha, beta_lambda, E_lambda) must pass a
numerical isometry check and are rejected otherwise, never renormalized.

RNG state is caller-supplied: every Monte-Carlo entry point takes a root seed
and derives one independent child stream per worker/batch, so results are
deterministic for a fixed (seed, worker-count) pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalCheckError
from .hilbert import ATOL, EnvRegister, LabeledState

#: Internal batch count used when a Monte-Carlo caller asks for one worker.
DEFAULT_BATCHES = 16


def seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def batch_rngs(seed, batches: int) -> list[np.random.Generator]:
    """Independent generators for Monte-Carlo workers, derived from one seed."""
    return [np.random.default_rng(s) for s in seed_sequence(seed).spawn(batches)]


def batch_sizes(trials: int, batches: int) -> list[int]:
    base, extra = divmod(trials, batches)
    return [base + (1 if i < extra else 0) for i in range(batches)]


@dataclass(frozen=True)
class PhaseNoiseSpec:
    """Per-channel dephasing amplitudes (alpha_j, beta_j), |a|^2 + |b|^2 = 1."""

    per_channel: tuple[tuple[complex, complex], ...]

    def __post_init__(self):
        for j, (a, b) in enumerate(self.per_channel, start=1):
            dev = abs(abs(a) ** 2 + abs(b) ** 2 - 1.0)
            if dev > ATOL:
                raise NumericalCheckError(
                    f"channel {j}: |alpha|^2 + |beta|^2 deviates from 1 by {dev:.3e}")

    @classmethod
    def uniform(cls, channels: int, alpha=None, *, alpha2: float | None = None
                ) -> "PhaseNoiseSpec":
        """Identical channels from an amplitude ``alpha`` or a probability ``alpha2``."""
        if (alpha is None) == (alpha2 is None):
            raise ValueError("give exactly one of alpha or alpha2")
        if alpha is None:
            if not 0.0 <= alpha2 <= 1.0:
                raise ValueError("alpha2 must lie in [0, 1]")
            alpha = math.sqrt(alpha2)
        a = complex(alpha)
        if abs(a) > 1.0 + ATOL:
            raise ValueError("|alpha| must not exceed 1")
        b = math.sqrt(max(0.0, 1.0 - abs(a) ** 2))
        return cls(((a, b),) * channels)

    @classmethod
    def from_alphas(cls, alphas) -> "PhaseNoiseSpec":
        """One channel per entry; beta_j completes the normalization."""
        pairs = []
        for a in alphas:
            a = complex(a)
            pairs.append((a, math.sqrt(max(0.0, 1.0 - abs(a) ** 2))))
        return cls(tuple(pairs))

    @property
    def channel_count(self) -> int:
        return len(self.per_channel)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([a for a, _ in self.per_channel], dtype=complex)

    @property
    def betas(self) -> np.ndarray:
        return np.array([b for _, b in self.per_channel], dtype=complex)

    def phase_aligned(self) -> "PhaseNoiseSpec":
        """Rotate each channel (a phase shifter) so every alpha_j is real >= 0."""
        pairs = []
        for a, b in self.per_channel:
            rot = np.exp(-1j * np.angle(a)) if a != 0 else 1.0
            pairs.append((complex(a * rot), complex(b * rot)))
        return PhaseNoiseSpec(tuple(pairs))

    def mean_alpha(self) -> complex:
        return complex(self.alphas.mean())


@dataclass(frozen=True)
class InternalNoiseSpec:
    """Error set acting on an internal degree of freedom of dimension I.

    ``errors`` lists (beta_lambda, E_lambda) pairs; E_lambda is an I x I
    matrix.  The assembled single-channel dilation must be an isometry within
    tolerance, which is checked numerically on construction.
    """

    internal_dim: int
    alpha: complex
    errors: tuple[tuple[complex, np.ndarray], ...]

    def __post_init__(self):
        mats = tuple((complex(b), np.asarray(e, dtype=complex)) for b, e in self.errors)
        object.__setattr__(self, "errors", mats)
        for _, e in mats:
            if e.shape != (self.internal_dim, self.internal_dim):
                raise ValueError("error operator has wrong shape")
        m = self.dilation_matrix()
        dev = float(np.max(np.abs(m.conj().T @ m - np.eye(self.internal_dim))))
        if dev > ATOL:
            raise NumericalCheckError(
                f"internal-noise dilation is not an isometry (deviation {dev:.3e})")

    @property
    def error_count(self) -> int:
        return len(self.errors)

    def dilation_matrix(self) -> np.ndarray:
        """Single-channel dilation: internal state -> (outcome, internal state).

        Block 0 is alpha * identity; block lambda sends |mu> to
        sum_nu beta_lambda (E_lambda)_{mu nu} |nu>.
        """
        eye = np.eye(self.internal_dim, dtype=complex)
        blocks = [complex(self.alpha) * eye]
        blocks += [b * e.T for b, e in self.errors]
        return np.vstack(blocks)

    def error_probability(self) -> float:
        """Chance that a directly transmitted state is disturbed."""
        return 1.0 - abs(self.alpha) ** 2

    @classmethod
    def pauli(cls, alpha) -> "InternalNoiseSpec":
        """Equal-weight Pauli x/y/z error set on a two-dimensional internal space."""
        a = complex(alpha)
        b = math.sqrt(max(0.0, (1.0 - abs(a) ** 2) / 3.0))
        sx = np.array([[0, 1], [1, 0]], dtype=complex)
        sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
        sz = np.array([[1, 0], [0, -1]], dtype=complex)
        return cls(2, a, ((b, sx), (b, sy), (b, sz)))


@dataclass(frozen=True)
class RandomPhaseSpec:
    """I.i.d. random phases with E[e^{i phi}] equal to ``target_mean``.

    The default "point-mass-mixture" draws phi = 0 with probability
    target_mean and uniform on [0, 2 pi) otherwise, which hits the target
    mean exactly.  "wrapped-gaussian" uses a centered normal with
    sigma^2 = -2 ln(target_mean).
    """

    target_mean: float
    distribution: str = "point-mass-mixture"

    def __post_init__(self):
        if not 0.0 <= self.target_mean <= 1.0:
            raise ValueError("target_mean must lie in [0, 1]")
        if self.distribution not in ("point-mass-mixture", "wrapped-gaussian"):
            raise ValueError(f"unknown distribution {self.distribution!r}")

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        t = self.target_mean
        if self.distribution == "point-mass-mixture":
            if t >= 1.0:
                return np.zeros(size)
            phases = rng.uniform(0.0, 2.0 * np.pi, size=size)
            keep = rng.random(size=size) < t
            phases[keep] = 0.0
            return phases
        if t >= 1.0:
            return np.zeros(size)
        if t <= 0.0:
            # sigma diverges; the wrapped limit is the uniform distribution
            return rng.uniform(0.0, 2.0 * np.pi, size=size)
        sigma = math.sqrt(-2.0 * math.log(t))
        return rng.normal(0.0, sigma, size=size)


def sample_phases(spec: RandomPhaseSpec, channels: int, seed) -> np.ndarray:
    """Draw one i.i.d. phase per channel."""
    rng = np.random.default_rng(seed_sequence(seed))
    return spec.sample(rng, channels)


def phase_factors(rng: np.random.Generator, targets: np.ndarray, size: int,
                  distribution: str = "point-mass-mixture") -> np.ndarray:
    """(size, channels) array of e^{i phi} draws with per-channel complex means.

    Complex targets are realized by sampling for |target| and rotating by its
    phase, which leaves the per-channel mean exactly equal to the target.
    """
    targets = np.asarray(targets, dtype=complex)
    out = np.empty((size, targets.size), dtype=complex)
    for j, t in enumerate(targets):
        spec = RandomPhaseSpec(abs(t), distribution)
        phi = spec.sample(rng, size)
        out[:, j] = np.exp(1j * phi)
        if t != 0:
            out[:, j] *= t / abs(t)
    return out


@dataclass(frozen=True)
class LengthModel:
    """Exponential no-error law: |alpha|^2 = exp(-gamma * length)."""

    gamma: float
    length: float

    def __post_init__(self):
        if self.gamma < 0 or self.length < 0:
            raise ValueError("gamma and length must be non-negative")

    def survival(self) -> float:
        return math.exp(-self.gamma * self.length)

    def segment_alpha(self, segments: int) -> float:
        """No-error amplitude of one of ``segments`` equal pieces."""
        return math.exp(-self.gamma * self.length / (2.0 * segments))


def alpha_from_length(model: LengthModel) -> float:
    """No-error amplitude over the full channel: exp(-gamma L / 2)."""
    return model.segment_alpha(1)


def apply_phase_noise(state: LabeledState, spec: PhaseNoiseSpec, segment: str,
                      axis: int = 0) -> LabeledState:
    """Entangle the channel index on ``axis`` with a fresh environment register.

    Appends one (T+1)-dimensional register for this segment; outcome 0 keeps
    amplitude alpha_j, outcome j takes beta_j.  Norm is preserved.
    """
    if any(r.segment == segment for r in state.env):
        raise ValueError(f"segment register {segment!r} already consumed")
    t = state.amps.shape[axis]
    if spec.channel_count != t:
        raise ValueError(
            f"noise spec has {spec.channel_count} channels, axis has {t}")
    amps = _dilate_phase(state.amps, axis, spec.alphas, spec.betas)
    out = LabeledState(amps, system_axes=state.system_axes,
                       env=state.env + (EnvRegister(segment, t + 1),))
    drift = abs(out.norm2() - state.norm2())
    if drift > 1e-9:
        raise NumericalCheckError(f"dilation failed to preserve norm ({drift:.3e})")
    return out


def _dilate_phase(amps: np.ndarray, axis: int, alphas: np.ndarray,
                  betas: np.ndarray) -> np.ndarray:
    """Core dephasing dilation; does not validate normalization.

    Used both for physical noise (|a|^2+|b|^2 = 1) and for effective
    post-selected channels where the pair is deliberately sub-normalized.
    """
    t = amps.shape[axis]
    moved = np.moveaxis(amps, axis, 0)
    out = np.zeros(moved.shape + (t + 1,), dtype=complex)
    shape = (t,) + (1,) * (moved.ndim - 1)
    out[..., 0] = np.asarray(alphas).reshape(shape) * moved
    for j in range(t):
        out[j, ..., j + 1] = betas[j] * moved[j]
    return np.moveaxis(out, 0, axis)


def apply_internal_noise(state: LabeledState, spec: InternalNoiseSpec,
                         segment: str, channel_axis: int = 0,
                         internal_axis: int = 1) -> LabeledState:
    """Dilation for internal-degree-of-freedom noise.

    The fresh register has dimension 1 + T*L: outcome 0 is undisturbed,
    outcome 1 + j*L + lambda records error ``lambda`` on channel ``j``
    (0-based).  Each error rotates the internal state by E_lambda.
    """
    if any(r.segment == segment for r in state.env):
        raise ValueError(f"segment register {segment!r} already consumed")
    t = state.amps.shape[channel_axis]
    i_dim = state.amps.shape[internal_axis]
    if i_dim != spec.internal_dim:
        raise ValueError("internal dimension mismatch")
    ell = spec.error_count
    moved = np.moveaxis(state.amps, (channel_axis, internal_axis), (0, 1))
    out = np.zeros(moved.shape + (1 + t * ell,), dtype=complex)
    out[..., 0] = spec.alpha * moved
    for j in range(t):
        for lam, (b, e) in enumerate(spec.errors):
            rotated = np.tensordot(e.T, moved[j], axes=([1], [0]))
            out[j, ..., 1 + j * ell + lam] = b * rotated
    out = np.moveaxis(out, (0, 1), (channel_axis, internal_axis))
    result = LabeledState(out, system_axes=state.system_axes,
                          env=state.env + (EnvRegister(segment, 1 + t * ell),))
    drift = abs(result.norm2() - state.norm2())
    if drift > 1e-9:
        raise NumericalCheckError(f"dilation failed to preserve norm ({drift:.3e})")
    return result


def monte_carlo_dephased_density(amplitudes, target_mean: float, trials: int,
                                 seed, workers: int = 1,
                                 distribution: str = "point-mass-mixture"
                                 ) -> tuple[np.ndarray, np.ndarray]:
    """Random-phase estimate of the dephased density matrix of a pure state.

    Returns (mean matrix, entrywise standard error) where the standard error
    of an entry combines the real and imaginary sample errors as
    se_re + 1j * se_im.  Averaging reproduces the dilation-traced matrix.
    """
    vec = np.asarray(amplitudes, dtype=complex).reshape(-1)
    t = vec.size
    batches = workers if workers > 1 else min(DEFAULT_BATCHES, max(trials, 1))
    rngs = batch_rngs(seed, batches)
    sizes = batch_sizes(trials, batches)
    means = []
    for rng, n in zip(rngs, sizes):
        if n == 0:
            continue
        z = phase_factors(rng, np.full(t, target_mean), n, distribution)
        v = z * vec[None, :]
        rho = np.einsum("nj,nk->jk", v, v.conj()) / n
        means.append(rho)
    stacked = np.array(means)
    mean = stacked.mean(axis=0)
    b = stacked.shape[0]
    if b > 1:
        se_re = stacked.real.std(axis=0, ddof=1) / math.sqrt(b)
        se_im = stacked.imag.std(axis=0, ddof=1) / math.sqrt(b)
    else:
        se_re = np.zeros_like(mean.real)
        se_im = np.zeros_like(mean.imag)
    return mean, se_re + 1j * se_im
