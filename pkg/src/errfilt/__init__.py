"""Error filtration and entanglement purification over noisy channels.

Simulation library and CLI for channel-multiplexed single-particle error
filtration, source-multiplexed entanglement purification, and their
coherent-state / classical-wave counterparts, with exact joint-state,
closed-form and Monte-Carlo evaluation routes that are cross-checked against
each other.
"""

__version__ = "0.1.0"

from .classical import (AttenuationReport, ClassicalOutcome, CoherentConfig,
                        NoiseFunction, NonlinearSplit, amplitude_fluctuation,
                        classical_mean_amplitude, classical_mean_intensity,
                        classical_moments, classical_visibility,
                        coherent_current, coherent_current_mc,
                        coherent_visibility_analytic, fit_scaling_exponent,
                        large_t_attenuation_check,
                        nonlinear_fluctuation_expansion, nonuseful_port_stats)
from .codec import (Codec, CodecReport, collective_fourier_codec,
                    fourier_codec, hadamard_codec, hadamard_matrix,
                    load_codec, validate_codec)
from .errors import (ConfigError, DimensionCapError, ErrfiltError,
                     NumericalCheckError)
from .filtration import (FiltrationConfig, FiltrationOutcome, ThresholdReport,
                         collective_average_fidelity_mc,
                         collective_average_fidelity_s2t3, run_exact,
                         run_monte_carlo, run_nonuniform,
                         series_error_analytic, series_limit_analytic,
                         series_two_segment_analytic,
                         success_probability_analytic, threshold_report,
                         trivial_encoding_average_fidelity,
                         visibility_analytic)
from .hilbert import (BasisLabel, DenseOperator, DensityMatrix, EnvRegister,
                      LabeledState, apply_operator, channel_extraction,
                      fidelity, keep_channels_projector, partial_trace_env,
                      project, tensor)
from .noise import (InternalNoiseSpec, LengthModel, PhaseNoiseSpec,
                    RandomPhaseSpec, alpha_from_length, apply_internal_noise,
                    apply_phase_noise, monte_carlo_dephased_density,
                    sample_phases)
from .purification import (DeferredCheckReport, Protocol1Report,
                           PurificationOutcome, PurifyConfig,
                           deferred_postselection_demo, fidelity_purified,
                           fidelity_unfiltered, maximally_entangled,
                           protocol1_fidelity, protocol1_run,
                           protocol2_fidelity, protocol2_run, purify,
                           purify_blocks, rho_after_noise,
                           rho_after_noise_dilated, rho_filtered_closed_form,
                           success_probability, total_success_probability)
