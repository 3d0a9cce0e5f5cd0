"""Local linear regression with curve-valued inputs."""

from .errors import (ConfigError, DegenerateDenominator, DegenerateOperator,
                     DegenerateTruncation, DimensionMismatch, DomainError,
                     EigenNonConvergence, EmptyNeighborhood, FitError, FLLRError, NoRoot,
                     NumericalSingularity, SelectionFailed)
from .estimator import (FitReport, direct_program_solve, gradient_estimate,
                        local_linear_fit, nadaraya_watson_fit)
from .harness import (ExperimentConfig, MseRow, SchemePolicy, bias_slope_experiment,
                      bound_table, cv_select, load_config, rate_slopes, run_mse,
                      solve_hstar, theorem_bound)
from .hilbert import FunctionalSample, axpy, inner, norm, read_dataset_csv, write_dataset_csv
from .jacobi import jacobi_eigh
from .kernels import KernelSpec, by_name, check_a1, from_table, linear_downweight, naive
from .local_operator import LocalFactorization, build_factorization, explicit_gamma
from .regularization import (RegScheme, apply_dagger, conditioning_index, dagger_norm,
                             spectral_filter)
from .small_ball import EmpiricalF, SbpFamily, check_gamma_limit, fit_family, rho
from .synthetic import KLSpec, RegressionSpec, eval_m, gen_dataset, sample_kl

__version__ = "0.1.0"
