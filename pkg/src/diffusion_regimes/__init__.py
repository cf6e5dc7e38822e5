"""Dynamical-regime analysis of generative diffusion with the exact empirical score.

Predicts and measures the speciation time (spectral criterion) and the
collapse time (excess-entropy criterion) of the backward generative process,
with full closed-form cross-validation on two-cluster Gaussian mixtures.
"""

__version__ = "0.1.0"

from .collapse import (CollapseReport, EntropyCurve, THatHistogram,
                       collapse_time_from_curve, entropy_mc,
                       excess_entropy_curve, phi_collapse_mc, s_sep,
                       t_hat_histogram)
from .core import (DEFAULT_SCHEDULE, Dataset, DiscreteSchedule, GmSpec,
                   TimeSchedule, alpha_param, center, ddpm_time_map, delta,
                   sample_gaussian_mixture)
from .gm import (RemEvaluation, eps_star, f_eps, g_lambda, gamma,
                 gm_excess_entropy_analytic, lambda_star, landau_tstar,
                 phi_analytic, potential_v, psi_minus, psi_plus,
                 psi_plus_root, rem_brute_force, rem_evaluate, tc_closed_form)
from .rng import RngPolicy
from .score import (LogDensityResult, gm_population_score, log_density_batch,
                    log_density_empirical, log_density_only, score_batch,
                    score_empirical)
from .sde import (BackwardConfig, ClonePair, NearestNeighborTrace, Trajectory,
                  backward_integrate, backward_with_nearest, clone_at,
                  clone_endpoints_batch, default_backward_grid, forward_sample,
                  nearest_indices, reduced_q_integrate, track_nearest)
from .speciation import (NoSpeciationError, PhiCurve, SpectralReport,
                         centroid_classifier, covariance, crossing_time,
                         gm_sign_classifier, landau_instability_time,
                         noised_covariance, phi_speciation_mc,
                         principal_eigenvalue, spectral_report,
                         speciation_time)
