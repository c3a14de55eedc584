"""Multi-excitation and classical-wave error filtration.

A channel multiplies the transmitted amplitude by a random factor
N(xi, A_in); for T-fold multiplexing the useful receiver amplitude becomes
A_R = A * (1/T) sum_j N(xi_j, A/sqrt(T)) with i.i.d. xi_j.  Averages of the
amplitude, intensity, fluctuations and fringe visibility then follow:

* mean amplitude    A * mean(N)                       (T-independent if linear)
* mean intensity    |mean A_R|^2 (1 + D/T)            D = (<|N|^2>-|N..|^2)/|N..|^2
* fluctuation       |mean A_R|^2 * D/T
* visibility        1 / (1 + D/T)

Nonlinear phase noise N = N1 * exp(i phi |A_in|^2) picks up an extra 1/T^2
suppression on top of the 1/T filtering because multiplexing also dilutes
the intensity per channel.  Coherent-state currents obey the same statistics;
the expected useful-port current is evaluated both in closed form and by
sampling the channel phases.

Monte-Carlo entry points shard trials over independent seeded streams and
report batch-mean standard errors, exactly like the filtration module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .noise import RandomPhaseSpec, batch_rngs, batch_sizes, seed_sequence

_NOISE_KINDS = ("linear-phase", "linear-amplitude", "nonlinear-phase")

#: Phase points for fringe sweeps; the visibility is read off a fitted cosine.
SWEEP_POINTS = 16


@dataclass(frozen=True)
class CoherentConfig:
    """Two coherent signals with relative phase phi, each multiplexed T-fold.

    ``alpha`` is the per-channel mean of the random phase factor e^{iB};
    ``lam`` is the source amplitude of the pair.
    """

    lam: complex = 1.0
    phi: float = 0.0
    t: int = 1
    alpha: complex = 1.0

    def __post_init__(self):
        if self.t < 1:
            raise ConfigError("t must be at least 1")
        if abs(self.alpha) > 1.0 + 1e-12:
            raise ConfigError("|alpha| must not exceed 1")


@dataclass(frozen=True)
class NoiseFunction:
    """Random multiplicative channel noise N(xi, A_in).

    linear-phase      N = e^{i phi(xi)}         with E[N] = phase_mean
    linear-amplitude  N = f(xi) real lognormal  ln f ~ Normal(mu, sigma)
    nonlinear-phase   N = N1 * e^{i w |A_in|^2} with w ~ Normal(nl_mean, sqrt(nl_var))
                      and N1 an independent linear phase factor
    """

    kind: str
    phase_mean: complex = 1.0
    phase_distribution: str = "point-mass-mixture"
    amp_log_mu: float = 0.0
    amp_log_sigma: float = 0.0
    nl_mean: float = 0.0
    nl_var: float = 0.0

    def __post_init__(self):
        if self.kind not in _NOISE_KINDS:
            raise ConfigError(f"unknown noise kind {self.kind!r}")
        if abs(self.phase_mean) > 1.0 + 1e-12:
            raise ConfigError("|phase_mean| must not exceed 1")
        if self.nl_var < 0:
            raise ConfigError("nl_var must be non-negative")

    @classmethod
    def linear_phase(cls, mean, distribution: str = "point-mass-mixture"
                     ) -> "NoiseFunction":
        return cls("linear-phase", phase_mean=complex(mean),
                   phase_distribution=distribution)

    @classmethod
    def linear_amplitude(cls, log_mu: float, log_sigma: float) -> "NoiseFunction":
        return cls("linear-amplitude", amp_log_mu=log_mu, amp_log_sigma=log_sigma)

    @classmethod
    def nonlinear_phase(cls, mean, var: float, nl_mean: float = 0.0,
                        distribution: str = "point-mass-mixture"
                        ) -> "NoiseFunction":
        return cls("nonlinear-phase", phase_mean=complex(mean),
                   phase_distribution=distribution, nl_mean=nl_mean, nl_var=var)

    # -- sampling ------------------------------------------------------------

    def _linear_factors(self, rng: np.random.Generator, size) -> np.ndarray:
        t = abs(self.phase_mean)
        spec = RandomPhaseSpec(t, self.phase_distribution)
        z = np.exp(1j * spec.sample(rng, size))
        if self.phase_mean != 0:
            z = z * (self.phase_mean / t)
        return z

    def sample(self, rng: np.random.Generator, size, amp_in: complex) -> np.ndarray:
        if self.kind == "linear-phase":
            return self._linear_factors(rng, size)
        if self.kind == "linear-amplitude":
            return rng.lognormal(self.amp_log_mu, self.amp_log_sigma, size=size) \
                .astype(complex)
        z1 = self._linear_factors(rng, size)
        w = rng.normal(self.nl_mean, math.sqrt(self.nl_var), size=size)
        return z1 * np.exp(1j * w * abs(amp_in) ** 2)

    # -- exact moments ---------------------------------------------------------

    def mean_n(self, amp_in: complex) -> complex:
        """E[N] at the given input amplitude."""
        if self.kind == "linear-phase":
            return self.phase_mean
        if self.kind == "linear-amplitude":
            return complex(math.exp(self.amp_log_mu + self.amp_log_sigma**2 / 2))
        a2 = abs(amp_in) ** 2
        return self.phase_mean * np.exp(1j * self.nl_mean * a2
                                        - self.nl_var * a2**2 / 2.0)

    def mean_abs2_n(self, amp_in: complex) -> float:
        """E[|N|^2] at the given input amplitude."""
        if self.kind == "linear-amplitude":
            return math.exp(2.0 * self.amp_log_mu + 2.0 * self.amp_log_sigma**2)
        return 1.0

    def noise_ratio(self, amp_in: complex) -> float:
        """D = (E[|N|^2] - |E[N]|^2) / |E[N]|^2 at the given input amplitude."""
        m = abs(self.mean_n(amp_in)) ** 2
        if m == 0.0:
            raise ConfigError("mean noise factor vanishes; visibility undefined")
        return (self.mean_abs2_n(amp_in) - m) / m


@dataclass(frozen=True)
class ClassicalOutcome:
    """Moments of the useful receiver amplitude.

    ``fluctuation`` equals ``mean_intensity - |mean_amplitude|^2`` exactly on
    the sample set (it is computed that way, never re-estimated).
    """

    mean_amplitude: complex
    mean_intensity: float
    fluctuation: float
    visibility: float | None = None
    stderr: dict[str, float] = field(default_factory=dict)


# -- coherent currents --------------------------------------------------------


def coherent_current(cfg: CoherentConfig) -> float:
    """Expected useful-port current of two interfering T-multiplexed signals.

    (|lam|^2/2) * ((1 + (T-1)|a|^2)/T) * (1 + T|a|^2 cos(phi) / (1+(T-1)|a|^2)).
    """
    a2 = abs(cfg.alpha) ** 2
    lead = abs(cfg.lam) ** 2 / 2.0
    bulk = (1.0 + (cfg.t - 1) * a2) / cfg.t
    return lead * bulk * (1.0 + cfg.t * a2 * math.cos(cfg.phi)
                          / (1.0 + (cfg.t - 1) * a2))


def coherent_current_mc(cfg: CoherentConfig, trials: int, seed,
                        workers: int = 1) -> tuple[float, float]:
    """Sampled current: draw i.i.d. channel phase factors with mean alpha for
    both signals and average |sum_i (z_i + e^{i phi} ztilde_i)|^2 * |lam|^2/(4T^2).
    Returns (mean, stderr)."""
    nf = NoiseFunction.linear_phase(cfg.alpha)
    batches = workers if workers > 1 else min(16, trials)
    rngs = batch_rngs(seed, batches)
    sizes = batch_sizes(trials, batches)
    lead = abs(cfg.lam) ** 2 / (4.0 * cfg.t**2)
    vals = []
    for rng, n in zip(rngs, sizes):
        if n == 0:
            continue
        z = nf.sample(rng, (n, cfg.t), 0.0).sum(axis=1)
        zt = nf.sample(rng, (n, cfg.t), 0.0).sum(axis=1)
        cur = lead * np.abs(z + np.exp(1j * cfg.phi) * zt) ** 2
        vals.append(cur.mean())
    vals = np.array(vals)
    se = vals.std(ddof=1) / math.sqrt(len(vals)) if len(vals) > 1 else 0.0
    return float(vals.mean()), float(se)


def coherent_visibility_analytic(t: int, alpha) -> float:
    """Fringe visibility of the coherent current: T|a|^2 / (1 + (T-1)|a|^2)."""
    a2 = abs(complex(alpha)) ** 2
    return t * a2 / (1.0 + (t - 1) * a2)


# -- classical wave statistics --------------------------------------------------


def _receiver_samples(amp: complex, t: int, nf: NoiseFunction,
                      rng: np.random.Generator, n: int) -> np.ndarray:
    amp_in = amp / math.sqrt(t)
    factors = nf.sample(rng, (n, t), amp_in)
    return amp * factors.mean(axis=1)


def classical_moments(amp, t: int, nf: NoiseFunction, trials: int, seed,
                      workers: int = 1, sweep: bool = True) -> ClassicalOutcome:
    """Sampled mean amplitude, intensity, fluctuation and fringe visibility."""
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    amp = complex(amp)
    batches = workers if workers > 1 else min(16, trials)
    rngs = batch_rngs(seed, batches)
    sizes = batch_sizes(trials, batches)
    amps, intens, fringes = [], [], []
    phis = np.linspace(0.0, 2.0 * np.pi, SWEEP_POINTS, endpoint=False)
    for rng, n in zip(rngs, sizes):
        if n == 0:
            continue
        a_r = _receiver_samples(amp, t, nf, rng, n)
        amps.append(a_r.mean())
        intens.append(float((np.abs(a_r) ** 2).mean()))
        if sweep:
            # fringe pair: two signals of amplitude A/sqrt(2), each multiplexed
            a1 = _receiver_samples(amp / math.sqrt(2), t, nf, rng, n)
            a2 = _receiver_samples(amp / math.sqrt(2), t, nf, rng, n)
            mixed = (a1[None, :] + np.exp(1j * phis)[:, None] * a2[None, :]) \
                / math.sqrt(2)
            fringes.append((np.abs(mixed) ** 2).mean(axis=1))
    amps = np.array(amps)
    intens = np.array(intens)
    b = len(amps)
    mean_amp = complex(amps.mean())
    mean_int = float(intens.mean())
    fluct = mean_int - abs(mean_amp) ** 2
    stderr = {}
    if b > 1:
        stderr["mean_amplitude"] = float(
            np.hypot(amps.real.std(ddof=1), amps.imag.std(ddof=1)) / math.sqrt(b))
        stderr["mean_intensity"] = float(intens.std(ddof=1) / math.sqrt(b))
        per_batch_fluct = intens - np.abs(amps) ** 2
        stderr["fluctuation"] = float(per_batch_fluct.std(ddof=1) / math.sqrt(b))
    vis = None
    if sweep:
        fringe = np.array(fringes).mean(axis=0)
        vis = _fit_visibility(phis, fringe)
        if b > 1:
            per_batch_vis = np.array([_fit_visibility(phis, f) for f in fringes])
            stderr["visibility"] = float(per_batch_vis.std(ddof=1) / math.sqrt(b))
    return ClassicalOutcome(mean_amplitude=mean_amp, mean_intensity=mean_int,
                            fluctuation=fluct, visibility=vis, stderr=stderr)


def _fit_visibility(phis: np.ndarray, intensities: np.ndarray) -> float:
    """Least-squares cosine fit I(phi) = c0 + c1 cos phi + c2 sin phi."""
    design = np.column_stack([np.ones_like(phis), np.cos(phis), np.sin(phis)])
    coef, *_ = np.linalg.lstsq(design, intensities, rcond=None)
    return float(np.hypot(coef[1], coef[2]) / coef[0])


def classical_mean_amplitude(amp, t: int, nf: NoiseFunction, trials: int,
                             seed, workers: int = 1) -> complex:
    """Sampled mean useful amplitude; equals A * E[N] (T-independent when the
    noise is linear)."""
    out = classical_moments(amp, t, nf, trials, seed, workers, sweep=False)
    return out.mean_amplitude


def classical_mean_intensity(amp, t: int, nf: NoiseFunction, trials: int,
                             seed, workers: int = 1) -> float:
    """Sampled mean useful intensity; decreases to |A E[N]|^2 as T grows."""
    out = classical_moments(amp, t, nf, trials, seed, workers, sweep=False)
    return out.mean_intensity


def amplitude_fluctuation(amp, t: int, nf: NoiseFunction, trials: int,
                          seed, workers: int = 1) -> float:
    """Sampled fluctuation of the useful amplitude; scales as 1/T."""
    out = classical_moments(amp, t, nf, trials, seed, workers, sweep=False)
    return out.fluctuation


def classical_visibility(amp, t: int, nf: NoiseFunction, trials: int,
                         seed, workers: int = 1) -> float:
    """Fringe visibility from a sampled phase sweep; 1 / (1 + D/T)."""
    out = classical_moments(amp, t, nf, trials, seed, workers, sweep=True)
    return out.visibility


def mean_amplitude_analytic(amp, t: int, nf: NoiseFunction) -> complex:
    return complex(amp) * nf.mean_n(complex(amp) / math.sqrt(t))


def mean_intensity_analytic(amp, t: int, nf: NoiseFunction) -> float:
    mean = mean_amplitude_analytic(amp, t, nf)
    d = nf.noise_ratio(complex(amp) / math.sqrt(t))
    return abs(mean) ** 2 * (1.0 + d / t)


def fluctuation_analytic(amp, t: int, nf: NoiseFunction) -> float:
    mean = mean_amplitude_analytic(amp, t, nf)
    return abs(mean) ** 2 * nf.noise_ratio(complex(amp) / math.sqrt(t)) / t


def visibility_analytic_classical(amp, t: int, nf: NoiseFunction) -> float:
    return 1.0 / (1.0 + nf.noise_ratio(complex(amp) / math.sqrt(t)) / t)


@dataclass(frozen=True)
class PortStats:
    port: int
    mean_amplitude: complex
    mean_intensity: float
    stderr_amplitude: float
    stderr_intensity: float


def nonuseful_port_stats(amp, t: int, nf: NoiseFunction, trials: int, seed,
                         workers: int = 1) -> list[PortStats]:
    """Moments of the discard ports k = 1..T-1.

    Mean amplitudes vanish (the ports carry no signal) while the intensities
    stay positive whenever noise is present: the ports hold pure noise.
    """
    amp = complex(amp)
    amp_in = amp / math.sqrt(t)
    batches = workers if workers > 1 else min(16, trials)
    rngs = batch_rngs(seed, batches)
    sizes = batch_sizes(trials, batches)
    phases = np.exp(2j * np.pi * np.outer(np.arange(1, t + 1),
                                          np.arange(1, t)) / t)  # (j, k)
    amps, intens = [], []
    for rng, n in zip(rngs, sizes):
        if n == 0:
            continue
        factors = nf.sample(rng, (n, t), amp_in)
        ports = (amp / t) * np.einsum("nj,jk->nk", factors, phases)
        amps.append(ports.mean(axis=0))
        intens.append((np.abs(ports) ** 2).mean(axis=0))
    amps = np.array(amps)
    intens = np.array(intens)
    b = len(amps)
    out = []
    for k in range(t - 1):
        se_a = float(np.hypot(amps[:, k].real.std(ddof=1),
                              amps[:, k].imag.std(ddof=1)) / math.sqrt(b)) \
            if b > 1 else 0.0
        se_i = float(intens[:, k].std(ddof=1) / math.sqrt(b)) if b > 1 else 0.0
        out.append(PortStats(port=k + 1,
                             mean_amplitude=complex(amps[:, k].mean()),
                             mean_intensity=float(intens[:, k].mean()),
                             stderr_amplitude=se_a, stderr_intensity=se_i))
    return out


# -- nonlinear noise ---------------------------------------------------------


@dataclass(frozen=True)
class NonlinearSplit:
    """Fluctuation factor split into its filtering and nonlinearity parts.

    ``linear_term`` estimates D1/T from the linear factor alone;
    ``nonlinear_term`` is the excess caused by the intensity-dependent phase,
    suppressed by an extra 1/T^2.  ``expansion_valid`` flags whether the
    small-noise expansion regime Var(phi) |A|^4 / T^2 < 0.1 holds.
    """

    linear_term: float
    nonlinear_term: float
    stderr_linear: float
    stderr_nonlinear: float
    expansion_valid: bool


def nonlinear_fluctuation_expansion(amp, t: int, nf: NoiseFunction,
                                    trials: int, seed, workers: int = 1
                                    ) -> NonlinearSplit:
    """Estimate the two contributions to the fluctuation factor D/T.

    The linear and nonlinear factors are independent, so
    D = (1 + D1)/|E[N2]|^2 - 1 splits exactly into D1 plus
    (1 + D1)(1/|E[N2]|^2 - 1); each factor mean is sampled separately, which
    keeps the tiny nonlinear excess resolvable at large T.
    """
    if nf.kind != "nonlinear-phase":
        raise ConfigError("expansion split requires nonlinear-phase noise")
    amp = complex(amp)
    amp_in2 = abs(amp) ** 2 / t
    batches = workers if workers > 1 else min(16, trials)
    rngs = batch_rngs(seed, batches)
    sizes = batch_sizes(trials, batches)
    lin, non = [], []
    for rng, n in zip(rngs, sizes):
        if n == 0:
            continue
        z1 = nf._linear_factors(rng, n)
        w = rng.normal(nf.nl_mean, math.sqrt(nf.nl_var), size=n)
        z2 = np.exp(1j * w * amp_in2)
        m1, q1 = z1.mean(), float((np.abs(z1) ** 2).mean())
        m2 = z2.mean()
        d1 = (q1 - abs(m1) ** 2) / abs(m1) ** 2
        d_full = q1 / (abs(m1) ** 2 * abs(m2) ** 2) - 1.0
        lin.append(d1 / t)
        non.append((d_full - d1) / t)
    lin = np.array(lin)
    non = np.array(non)
    b = len(lin)
    se_l = float(lin.std(ddof=1) / math.sqrt(b)) if b > 1 else 0.0
    se_n = float(non.std(ddof=1) / math.sqrt(b)) if b > 1 else 0.0
    valid = nf.nl_var * abs(amp) ** 4 / t**2 < 0.1
    return NonlinearSplit(linear_term=float(lin.mean()),
                          nonlinear_term=float(non.mean()),
                          stderr_linear=se_l, stderr_nonlinear=se_n,
                          expansion_valid=valid)


def fit_scaling_exponent(ts, values) -> float:
    """Slope of log|value| against log T; -1 for filtering, -3 for the
    nonlinear excess."""
    ts = np.asarray(ts, dtype=float)
    values = np.abs(np.asarray(values, dtype=float))
    if np.any(values <= 0):
        raise ValueError("values must be positive for a log fit")
    slope, _ = np.polyfit(np.log(ts), np.log(values), 1)
    return float(slope)


# -- large-T operator attenuation ------------------------------------------------


@dataclass(frozen=True)
class AttenuationReport:
    """Degree-N moment of the averaged phase factor against alpha^N.

    For T much larger than N the useful-port operator is simply attenuated by
    alpha: the sampled moment approaches alpha^N and the interference pattern
    keeps its noiseless shape, only scaled down.
    """

    degree: int
    t: int
    moment: complex
    reference: complex
    moment_error: float
    moment_stderr: float
    pattern_max_deviation: float
    asymptotic_ok: bool


def large_t_attenuation_check(degree: int, t: int, alpha, trials: int, seed,
                              workers: int = 1) -> AttenuationReport:
    """Sample W = (1/T) sum_j e^{iB_j} and check E[W^N] ~ alpha^N.

    Also sweeps the relative phase of two such averaged signals and compares
    the degree-N intensity pattern against the undistorted cos^{2N}(phi/2)
    shape.  The tolerance is N^2/T plus three standard errors, matching the
    neglected double-appearance terms.
    """
    if degree < 1:
        raise ConfigError("degree must be at least 1")
    alpha = complex(alpha)
    nf = NoiseFunction.linear_phase(alpha)
    batches = workers if workers > 1 else min(16, trials)
    rngs = batch_rngs(seed, batches)
    sizes = batch_sizes(trials, batches)
    phis = np.linspace(0.0, 2.0 * np.pi, 8, endpoint=False)
    moments, patterns = [], []
    for rng, n in zip(rngs, sizes):
        if n == 0:
            continue
        w = nf.sample(rng, (n, t), 0.0).mean(axis=1)
        wt = nf.sample(rng, (n, t), 0.0).mean(axis=1)
        moments.append((w**degree).mean())
        mixed = (w[None, :] + np.exp(1j * phis)[:, None] * wt[None, :]) / 2.0
        patterns.append((np.abs(mixed) ** (2 * degree)).mean(axis=1))
    moments = np.array(moments)
    moment = complex(moments.mean())
    b = len(moments)
    se = float(np.hypot(moments.real.std(ddof=1), moments.imag.std(ddof=1))
               / math.sqrt(b)) if b > 1 else 0.0
    reference = alpha**degree
    pattern = np.array(patterns).mean(axis=0)
    shape = np.cos(phis / 2.0) ** (2 * degree)
    ref_peak = pattern[0]
    deviation = float(np.max(np.abs(pattern / ref_peak - shape))) \
        if ref_peak > 0 else float("inf")
    err = abs(moment - reference)
    tol = degree**2 / t + 3.0 * se
    return AttenuationReport(degree=degree, t=t, moment=moment,
                             reference=reference, moment_error=float(err),
                             moment_stderr=se,
                             pattern_max_deviation=deviation,
                             asymptotic_ok=bool(err <= tol))
