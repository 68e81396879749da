"""Simulation and verification toolkit for bivariate nearly-unstable Hawkes
processes and their rough stochastic-Volterra scaling limit."""

from ._core import COMPILED
from .analytics import (Convention, LaplaceSign, LimitParams, correlation_asymptote,
                        covariance_exact, covariance_stationary, criticality_determinant,
                        cross_kernel_constant, decorrelation_constant,
                        laplace_functional_prediction, mean_profile,
                        product_vs_triple_ratio, riccati_volterra_solve, time_reverse)
from .grid import GridFunction, convolve, l1_distance, l2_distance, l2_shift_modulus
from .hawkes import (EventStream, HawkesBase, PreLimitParams, intensity_path,
                     renormalized_paths, scale_parameters, simulate_hawkes)
from .kernels import (CrossExciteKernel, MittagLefflerKernel, MlShapeDensity,
                      ParetoKernel, PreLimitFamily, kernel_convergence_sweep,
                      limit_cross_kernel, renormalized_cross_kernel,
                      renormalized_self_kernel, resolvent)
from .mittag import mittag_leffler
from .stats import EnsembleAccumulator, IncrementAccumulator, correlation_curve, loglog_slope
from .sve import (SvePaths, SveScheme, build_scheme, increment_moment_scaling,
                  kernel_weights, monte_carlo_laplace, run_ensemble, simulate_pair)

__version__ = "0.1.0"
