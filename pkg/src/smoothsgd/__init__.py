"""Desk-scale laboratory for SGD, tail averaging, and noise-smoothed objectives in 1D."""

from ._kernels import backend
from .bounds import BoundReport, averaged_bias_bound, rate_table, sgd_mse_bound
from .certify import (CertifiedConstants, MEnvelope, RegimeReport, certify_c, certify_mu,
                      certify_problem, find_valid_regime, fit_M_envelope, regime_check)
from .dynamics import (DivergenceError, RunConfig, Trajectory, implicit_identity_check,
                       run_sgd, run_trials, stationarity_sum_check, tail_average)
from .harness import (EnsembleReport, ExperimentConfig, SweepReport, compare_to_bound,
                      eta_sweep, fit_loglog_slope, preset, preset_names, run_ensemble)
from .noise import (MomentBounds, NoiseModel, Stream, gaussian_noise, moment_bounds,
                    sample, sample_batch, state_scaled_noise, trial_seed, uniform_noise,
                    zero_noise)
from .objectives import (ConstantsVariant, MollifierConstants, ObjectiveSpec, asym_quad_bump,
                         curvature_range, evaluate, evaluate_arrays, lipschitz_bound,
                         local_minima, mollifier_constants, polynomial, quadratic, sym_bump)
from .smoothing import (QuadratureError, RegimeError, SmoothedView, bias_gap, initial_moments,
                        mc_smoothed_value, minimize_smoothed, phi_derivative, phi_forward,
                        phi_inverse, smoothed_eval, smoothed_eval_grid, taylor_penalty_residual)

__version__ = "0.1.0"
