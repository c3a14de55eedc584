"""Formula-verification battery.

Every closed-form prediction the library implements is re-derived here from
an independent route (exact joint-state simulation, explicit density-matrix
construction, or Monte-Carlo sampling) and compared at a pinned tolerance.
The battery backs the ``verify`` CLI command and the acceptance test suite;
each check prints as one pass/fail line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import classical as cl
from . import filtration as fl
from . import purification as pu
from .codec import fourier_codec, hadamard_codec, validate_codec
from .errors import NumericalCheckError
from .noise import (InternalNoiseSpec, LengthModel, PhaseNoiseSpec,
                    monte_carlo_dephased_density)

DEFAULT_SEED = 20260809

ALPHA2_GRID = (0.5, 0.8, 0.9, 0.99)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.detail}"


def check_success_probability() -> CheckResult:
    """Exact pipeline against |a|^2 + |b|^2/T over the standard grid."""
    worst = 0.0
    for t in range(1, 9):
        for a2 in ALPHA2_GRID:
            cfg = fl.FiltrationConfig(codec=fourier_codec(t),
                                      noise=PhaseNoiseSpec.uniform(t, alpha2=a2))
            out = fl.run_exact(cfg)
            worst = max(worst,
                        abs(out.p_success - fl.success_probability_analytic(
                            t, math.sqrt(a2))),
                        abs(out.p_success_no_error - a2),
                        abs(out.p_success_error - (1.0 - a2) / t))
    return CheckResult("success-probability", worst <= 1e-12,
                       f"worst |exact - closed| = {worst:.2e} (tol 1e-12)")


def check_visibility() -> CheckResult:
    """Fringe-sweep visibility against T|a|^2/(T|a|^2+|b|^2); |a|^2 at T=1."""
    worst = 0.0
    for t in (1, 2, 4, 8):
        for a2 in ALPHA2_GRID:
            cfg = fl.FiltrationConfig(codec=fourier_codec(t, sources=2),
                                      noise=PhaseNoiseSpec.uniform(2 * t, alpha2=a2))
            out = fl.run_exact(cfg)
            expect = fl.visibility_analytic(t, math.sqrt(a2))
            worst = max(worst, abs(out.visibility - expect))
            if t == 1:
                worst = max(worst, abs(out.visibility - a2))
    return CheckResult("visibility", worst <= 1e-9,
                       f"worst fringe deviation = {worst:.2e} (tol 1e-9)")


def check_nonuniform(seed=DEFAULT_SEED) -> CheckResult:
    """Non-identical channels: closed forms, exact pipeline and error bound."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    bound_ok = True
    for _ in range(100):
        t = int(rng.integers(2, 9))
        alphas = rng.random(t)  # phase-aligned: real, in [0, 1)
        spec = PhaseNoiseSpec.from_alphas(alphas)
        cfg = fl.FiltrationConfig(codec=fourier_codec(t), noise=spec)
        exact = fl.run_exact(cfg)
        closed = fl.run_nonuniform(cfg)
        p_no = abs(alphas.mean()) ** 2
        p_err = float(np.sum(1.0 - alphas**2)) / t**2
        worst = max(worst,
                    abs(exact.p_success_no_error - p_no),
                    abs(exact.p_success_error - p_err),
                    abs(closed.p_success_no_error - p_no),
                    abs(closed.p_success_error - p_err))
        bound_ok &= p_err <= (1.0 - p_no) / t + 1e-12
    passed = worst <= 1e-12 and bound_ok
    return CheckResult("nonuniform-channels", passed,
                       f"worst deviation = {worst:.2e} (tol 1e-12), "
                       f"bound held = {bound_ok}")


def check_series() -> CheckResult:
    """Multi-segment runs against the closed form, the two-segment special
    case and the many-segment limit."""
    worst_exact = 0.0
    for survival in (0.6561, 0.81, 0.95):
        length = -math.log(survival)
        for q in (1, 2, 3):
            for t in (1, 2, 3, 4):
                cfg = fl.FiltrationConfig(codec=fourier_codec(t),
                                          length_model=LengthModel(1.0, length),
                                          segments=q)
                out = fl.run_exact(cfg)
                closed = fl.series_error_analytic(1.0, length, q, t)
                worst_exact = max(worst_exact, abs(out.p_success_error - closed))
    worst_two = 0.0
    for a in (0.3, 0.81, 0.95):
        for t in (1, 2, 4):
            two = fl.series_two_segment_analytic(a, t)
            via_q = fl.series_error_analytic(1.0, -math.log(a**2), 2, t)
            worst_two = max(worst_two, abs(two - via_q))
    # many-segment limit: Q=64 convergence (error falls off as 1/Q, with a
    # universal constant ~ (ln a2)^2 (1-1/T)/(2 T Q); 1e-4 at Q=64 holds for
    # survival >= 0.8)
    worst_lim = 0.0
    for a2 in (0.8, 0.81, 0.9, 0.99):
        for t in (2, 3, 4):
            lim = fl.series_limit_analytic(math.sqrt(a2), t)
            at64 = fl.series_error_analytic(1.0, -math.log(a2), 64, t)
            worst_lim = max(worst_lim, abs(lim - at64))
    err64 = abs(fl.series_error_analytic(1.0, -math.log(0.5), 64, 2)
                - fl.series_limit_analytic(math.sqrt(0.5), 2))
    err128 = abs(fl.series_error_analytic(1.0, -math.log(0.5), 128, 2)
                 - fl.series_limit_analytic(math.sqrt(0.5), 2))
    rate_ok = abs(err64 / err128 - 2.0) < 0.2
    passed = (worst_exact <= 1e-10 and worst_two <= 1e-12
              and worst_lim <= 1e-4 and rate_ok)
    return CheckResult(
        "series-formula", passed,
        f"exact vs closed {worst_exact:.2e} (1e-10), two-segment "
        f"{worst_two:.2e} (1e-12), Q=64 vs limit {worst_lim:.2e} (1e-4), "
        f"1/Q rate ratio {err64 / err128:.3f}")


def check_purification() -> CheckResult:
    """Constructive rho_f against both closed forms on the full grid, plus the
    orthogonal-window total and the large-n trend of the total success."""
    worst = 0.0
    for n in range(1, 9):
        for m in range(1, n + 1):
            for p in (0.0, 0.3, 0.8, 1.0):
                out = pu.purify(pu.PurifyConfig(n, m, p))
                worst = max(
                    worst,
                    abs(out.fidelity - pu.fidelity_purified(n, m, p)),
                    abs(out.p_success - pu.success_probability(n, m, p)),
                    abs(out.p_success_total
                        - (n // m) * pu.success_probability(n, m, p)))
                rho_c, p_c = pu.rho_filtered_closed_form(n, m, p)
                worst = max(worst,
                            float(np.max(np.abs(rho_c.mat - out.rho_f.mat))),
                            abs(p_c - out.p_success))
    totals = [pu.total_success_probability(n, 2, 0.8) for n in range(2, 65, 2)]
    monotone = all(x >= y - 1e-15 for x, y in zip(totals, totals[1:]))
    approaches = abs(totals[-1] - 0.8) < 0.02
    passed = worst <= 1e-12 and monotone and approaches
    return CheckResult(
        "purification", passed,
        f"worst grid deviation = {worst:.2e} (tol 1e-12), total-success trend "
        f"monotone = {monotone}, n=64 value {totals[-1]:.5f}")


def check_codec_equivalence() -> CheckResult:
    """Fourier and Hadamard pipelines agree entrywise; both pass optimality."""
    worst = 0.0
    optimal = True
    for t in (2, 4, 8):
        for a2 in (0.5, 0.8, 0.99):
            spec = PhaseNoiseSpec.uniform(2 * t, alpha2=a2)
            of = fl.run_exact(fl.FiltrationConfig(
                codec=fourier_codec(t, sources=2), noise=spec))
            oh = fl.run_exact(fl.FiltrationConfig(
                codec=hadamard_codec(t, sources=2), noise=spec))
            worst = max(worst,
                        abs(of.p_success - oh.p_success),
                        abs(of.p_success_error - oh.p_success_error),
                        abs(of.conditional_fidelity - oh.conditional_fidelity),
                        abs(of.visibility - oh.visibility))
        for codec in (fourier_codec(t), hadamard_codec(t)):
            report = validate_codec(codec)
            optimal &= report.faithful and report.optimal
            worst = max(worst, abs(report.reduction_factor - 1.0 / t))
    passed = worst <= 1e-12 and optimal
    return CheckResult("codec-equivalence", passed,
                       f"worst outcome gap = {worst:.2e} (tol 1e-12), "
                       f"optimality = {optimal}")


def check_collective(trials: int = 100_000, seed=DEFAULT_SEED) -> CheckResult:
    """Sphere-averaged fidelity of the 2-into-3 collective codec by sampling
    random inputs, against the closed form; also beats trivial encoding."""
    ok = True
    details = []
    for a2 in ALPHA2_GRID:
        alpha = math.sqrt(a2)
        mean, se = fl.collective_average_fidelity_mc(alpha, trials, seed)
        closed = fl.collective_average_fidelity_s2t3(alpha)
        trivial = fl.trivial_encoding_average_fidelity(alpha)
        gap = abs(mean - closed)
        ok &= gap <= 3.0 * se + 1e-12
        ok &= closed > trivial
        details.append(f"a2={a2}: |mc-closed|={gap:.1e} (3se={3 * se:.1e})")
    return CheckResult("collective-encoding", ok, "; ".join(details))


def check_internal_dof() -> CheckResult:
    """Pauli error set on a spin: filtered error probability (1-|a|^2)/T."""
    worst = 0.0
    for t in (2, 4):
        for a2 in (0.5, 0.8, 0.9):
            spec = InternalNoiseSpec.pauli(math.sqrt(a2))
            cfg = fl.FiltrationConfig(codec=fourier_codec(t), noise=spec)
            out = fl.run_exact(cfg)
            worst = max(worst, abs(out.p_success_error - (1.0 - a2) / t),
                        abs(out.p_success_no_error - a2))
    return CheckResult("internal-dof", worst <= 1e-12,
                       f"worst deviation = {worst:.2e} (tol 1e-12)")


def check_noise_equivalence(trials: int = 100_000, seed=DEFAULT_SEED
                            ) -> CheckResult:
    """Random-phase averaging equals the dilation-traced density matrix."""
    t = 4
    alpha = math.sqrt(0.8)
    vec = np.full(t, 1.0 / math.sqrt(t), dtype=complex)
    mc_mean, mc_se = monte_carlo_dephased_density(vec, alpha, trials, seed)
    from .hilbert import LabeledState, partial_trace_env
    from .noise import apply_phase_noise
    state = LabeledState.from_amplitudes(vec)
    state = apply_phase_noise(state, PhaseNoiseSpec.uniform(t, alpha=alpha), "s")
    exact = partial_trace_env(state).mat
    diff = mc_mean - exact
    ok = bool(np.all(np.abs(diff.real) <= 3.0 * mc_se.real + 1e-12)
              and np.all(np.abs(diff.imag) <= 3.0 * mc_se.imag + 1e-12))
    return CheckResult("noise-equivalence", ok,
                       f"max entry gap = {np.max(np.abs(diff)):.2e}, "
                       f"max 3se = {np.max(3 * np.abs(mc_se)):.2e}")


def check_coherent_classical(trials: int = 100_000, seed=DEFAULT_SEED
                             ) -> CheckResult:
    """Coherent currents and classical moments by sampling, plus the
    nonlinear 1/T^2 suppression via a log-grid exponent fit."""
    ok = True
    notes = []
    for t, a2, phi in ((1, 0.8, 0.0), (4, 0.8, 0.0), (4, 0.5, 1.1), (8, 0.9, 2.2)):
        cfg = cl.CoherentConfig(lam=1.0, phi=phi, t=t, alpha=math.sqrt(a2))
        mc, se = cl.coherent_current_mc(cfg, trials, seed)
        gap = abs(mc - cl.coherent_current(cfg))
        ok &= gap <= 3.0 * se + 1e-12
    nf = cl.NoiseFunction.linear_phase(math.sqrt(0.8))
    for t in (2, 8):
        out = cl.classical_moments(1.0, t, nf, trials, seed)
        gap_v = abs(out.visibility - cl.visibility_analytic_classical(1.0, t, nf))
        gap_i = abs(out.mean_intensity - cl.mean_intensity_analytic(1.0, t, nf))
        ok &= gap_v <= 3.0 * out.stderr["visibility"] + 1e-12
        ok &= gap_i <= 3.0 * out.stderr["mean_intensity"] + 1e-12
        gap_a = abs(out.mean_amplitude - cl.mean_amplitude_analytic(1.0, t, nf))
        ok &= gap_a <= 3.0 * out.stderr["mean_amplitude"] + 1e-12
        notes.append(f"T={t}: vis gap {gap_v:.1e}, amp gap {gap_a:.1e}")
    # coherent and classical visibilities describe the same physics
    ok &= abs(cl.coherent_visibility_analytic(4, math.sqrt(0.8))
              - cl.visibility_analytic_classical(1.0, 4, nf)) <= 1e-12
    nfnl = cl.NoiseFunction.nonlinear_phase(math.sqrt(0.8), var=0.25)
    ts = (2, 4, 8, 16, 32)
    splits = [cl.nonlinear_fluctuation_expansion(1.0, t, nfnl, 10 * trials, seed)
              for t in ts]
    lin_exp = cl.fit_scaling_exponent(ts, [s.linear_term for s in splits])
    non_exp = cl.fit_scaling_exponent(ts, [s.nonlinear_term for s in splits])
    ok &= abs(lin_exp + 1.0) <= 0.2 and abs(non_exp + 3.0) <= 0.2
    notes.append(f"exponents {lin_exp:.2f}/-1, {non_exp:.2f}/-3")
    return CheckResult("coherent-classical", ok, "; ".join(notes))


def check_two_party_protocols() -> CheckResult:
    """Both generalized protocols: constructions equal closed forms on the
    grids, fidelity monotone in the multiplexing resource."""
    worst = 0.0
    for s in range(1, 9):
        for r in range(1, s + 1):
            for p in (0.3, 0.8):
                rep = pu.protocol1_run(s, r, p)
                worst = max(worst, abs(rep.fidelity - pu.protocol1_fidelity(s, r, p)))
                if rep.y_value < r**2 / s - 1e-12 or not rep.condition3_ok:
                    worst = max(worst, 1.0)
    mono1 = all(
        pu.protocol1_fidelity(s + 1, 2, 0.8) >= pu.protocol1_fidelity(s, 2, 0.8)
        - 1e-15 for s in range(2, 8))
    rng = np.random.default_rng(7)
    for s in (2, 4, 8):
        raw = rng.normal(size=s) + 1j * rng.normal(size=s)
        amps = raw / np.linalg.norm(raw)
        for t in range(1, 9):
            for a2 in (0.5, 0.9):
                got = pu.protocol2_run(amps, math.sqrt(a2), t)
                closed = pu.protocol2_fidelity(amps, math.sqrt(a2), t)
                worst = max(worst, abs(got - closed))
    for t in (2, 3):
        amps = np.array([1.0, 1.0]) / math.sqrt(2.0)
        full = pu.protocol2_run_full(amps, math.sqrt(0.8), t)
        worst = max(worst, abs(full - pu.protocol2_fidelity(amps, math.sqrt(0.8), t)))
    mono2 = all(
        pu.protocol2_fidelity([0.6, 0.8], math.sqrt(0.8), t + 1)
        >= pu.protocol2_fidelity([0.6, 0.8], math.sqrt(0.8), t) - 1e-15
        for t in range(1, 8))
    passed = worst <= 1e-12 and mono1 and mono2
    return CheckResult("two-party-protocols", passed,
                       f"worst construction gap = {worst:.2e} (tol 1e-12), "
                       f"monotone = {mono1 and mono2}")


def check_thresholds() -> CheckResult:
    """Boundary probes of the 85% / 50% fidelity cutoffs."""
    probes = (
        (0.86, True, True), (0.70, False, True), (0.50, False, False),
        (0.85, False, True), (0.851, True, True), (0.499, False, False),
        (1.0, True, True), (0.0, False, False),
    )
    ok = True
    for fid, bb84, werner in probes:
        rep = fl.threshold_report(fid)
        ok &= rep.bb84_secure == bb84 and rep.werner_entangled == werner
    return CheckResult("thresholds", ok, f"{len(probes)} boundary probes")


_CHECKS = {
    "success-probability": check_success_probability,
    "visibility": check_visibility,
    "nonuniform-channels": check_nonuniform,
    "series-formula": check_series,
    "purification": check_purification,
    "codec-equivalence": check_codec_equivalence,
    "collective-encoding": check_collective,
    "internal-dof": check_internal_dof,
    "noise-equivalence": check_noise_equivalence,
    "coherent-classical": check_coherent_classical,
    "two-party-protocols": check_two_party_protocols,
    "thresholds": check_thresholds,
}

_MC_CHECKS = {"collective-encoding", "noise-equivalence", "coherent-classical"}


def verify_formulas(subset: str | None = None, trials: int | None = None,
                    seed=DEFAULT_SEED) -> list[CheckResult]:
    """Run the whole battery (or the checks whose name contains ``subset``).

    ``trials`` overrides the sample count of the Monte-Carlo checks; the
    exact/analytic checks ignore it.
    """
    names = [n for n in _CHECKS if subset is None or subset in n]
    if not names:
        raise ValueError(f"no check matches subset {subset!r}")
    results = []
    for name in names:
        fn = _CHECKS[name]
        if name in _MC_CHECKS:
            kwargs = {"seed": seed}
            if trials:
                kwargs["trials"] = trials
            results.append(fn(**kwargs))
        else:
            results.append(fn())
    return results


@dataclass(frozen=True)
class CodecComparison:
    t: int
    rows: tuple[dict, ...]
    max_difference: float
    equal: bool


def compare_codecs(t: int, alpha2s=(0.5, 0.8, 0.9, 0.99)) -> CodecComparison:
    """Run identical noise through the Fourier and Hadamard codecs.

    The outcomes must agree to 1e-12; a mismatch raises
    :class:`NumericalCheckError`.
    """
    rows = []
    worst = 0.0
    for a2 in alpha2s:
        spec = PhaseNoiseSpec.uniform(2 * t, alpha2=a2)
        of = fl.run_exact(fl.FiltrationConfig(codec=fourier_codec(t, sources=2),
                                              noise=spec))
        oh = fl.run_exact(fl.FiltrationConfig(codec=hadamard_codec(t, sources=2),
                                              noise=spec))
        diff = max(abs(of.p_success - oh.p_success),
                   abs(of.p_success_error - oh.p_success_error),
                   abs(of.conditional_fidelity - oh.conditional_fidelity),
                   abs(of.visibility - oh.visibility))
        worst = max(worst, diff)
        rows.append({
            "alpha2": a2,
            "p_success_fourier": of.p_success,
            "p_success_hadamard": oh.p_success,
            "visibility_fourier": of.visibility,
            "visibility_hadamard": oh.visibility,
            "max_abs_diff": diff,
        })
    if worst > 1e-12:
        raise NumericalCheckError(
            f"codec outcomes differ by {worst:.3e} (tolerance 1e-12)")
    return CodecComparison(t=t, rows=tuple(rows), max_difference=worst, equal=True)
