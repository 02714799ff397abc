"""Monte Carlo simulation of quantized network beamforming in AF relay networks."""

__version__ = "0.1.0"

from .model import (BeamVector, ChannelState, ConfigError, Constellation,
                    NetworkConfig, PowerPoint, builtin_constellation,
                    full_alphabet, network_from_dict, super_alphabet,
                    validate_config)
from .channel import (NoiseDraw, draw_channel, draw_noise, draw_symbols,
                      effective_noise_var, relay_gain, transmit)
from .metrics import (LocalNsnrMatrix, cner_union_bound, local_nsnr_matrix,
                      network_nsnr, pairwise_snr, receiver_nsnr)
from .decode import DecodeOutcome, detect_errors, individual_ml, joint_ml
from .quantize import (FeedbackRecord, QuantizerSpec, apply_quantizer,
                       empirical_optimal_gq, feedback_bits, flq_params,
                       gq_select, lq_decode, lq_encode, scalar_quantize,
                       vlq_params)
from .mc import (SchemeDef, SchemeStats, SlopeFit, StoppingRule, SweepPoint,
                 TrialOutcome, estimate_rate, fit_diversity_slope,
                 measure_ld_rate, run_trial, sweep)
