"""Random-walk approximation of subfractional Brownian motion, with verification tools."""

from .errors import (CacheError, CalibrationError, DomainError, EnsembleError, QuadratureError,
                     SubfbmError)
from .kernel import (KernelSpec, QuadratureConfig, calibrate, calibrate_fbm, calibrate_sub,
                     inner_integral, k_fbm, k_sub, load_spec, save_spec)
from .discretize import (KernelMatrix, build_matrix_exact, build_matrix_fbm, build_matrix_floor,
                         build_matrix_step, build_step_kernel, interval_overlap)
from .simulate import (NoiseStream, Path, PathEnsemble, donsker_path, kernel_path, run_ensemble,
                       stepped_path, wiener_discretization_path)
from .stats import (CovarianceTarget, StatReport, check_variance_sandwich, cholesky_oracle,
                    cov_analytic, empirical_cov, fit_rate, gaussianity_test, l2_kernel_distance)

__version__ = "0.1.0"
