"""Robust adaptive estimation of bandlimited graph signals.

The half-quadratic (HQC) update and the LMS, NLMS, MCC, GMCC and LOG
baselines, with noise generators, stability analysis and an experiment
harness.
"""

__version__ = "0.1.0"

from .algorithms import (AlgorithmSpec, ChangeSchedule, FilterState, StepSwitch, error_weights,  # noqa: E402
                         filter_step, hqc_cost, hqc_hessian_coeff, log_hessian_coeff, run_filter)
from .analysis import (SteadyStateInputs, critical_step, mean_square_step_bound, mean_step_bound,  # noqa: E402
                       mode_convergence_factors, steady_state_msd, steady_state_weight_factor,
                       taylor_validity_warning, weighted_operator)
from .complexity import complexity_report  # noqa: E402
from .errors import (ConfigError, ConstructionError, DatasetError, DegenerateOperatorError,  # noqa: E402
                     GSPError, InputError, InstabilityError, ParseError, SchemaError)
from .graph import (GeoPoint, Graph, SamplingSet, SpectralBasis, bandlimit_project, build_knn_graph,  # noqa: E402
                    build_sampling_set, gft, haversine_distance, igft, select_frequency_set,
                    spectral_decompose)
from .metrics import msd_db  # noqa: E402
from .noise import (AlphaStable, BernoulliGaussian, Gaussian, Laplace, mixture_abs_moment,  # noqa: E402
                    sample_noise, theta_moment)
