"""Marginal-integration additive kernel regression with confidence bands."""

from .config import (ConfigError, RunConfig, parse_config, render_config,
                     validate_config)
from .density import DensityField, EvaluationDomain, Sample, kde_fit, \
    analytic_density, sup_density_error
from .inference import (AdditiveBand, BandCurve, TheoremStatistic,
                        VarianceOracle, additive_band, band_halfwidth,
                        component_band, nuisance_bandwidth, sigma_oracle,
                        theorem_statistic, variance_field)
from .kernels import (KernelSpec, MomentReport, ProductKernel, by_name,
                      density_kernel, epanechnikov, product_kernel,
                      raise_order, scaled_eval, verify_order)
from .marginal import (AdditiveFit, BumpDensity, ComponentCurve,
                       IntegrationDensity, additive_constant, additive_fit,
                       bump_integration_density, component_estimate,
                       true_component)
from .quadrature import (IntegrationError, QuadratureRule, TensorRule,
                         composite_gauss_legendre, gauss_legendre,
                         integrate_1d, integrate_tensor)
from .regression import (BandwidthPlan, RegressionField, bias_bound,
                         fit_oracle, fit_plug_in, fit_single_bandwidth,
                         make_default_plan, validate_plan)
from .reports import write_curve_csv, write_records_csv, write_summary_json
from .simulation import (DESIGNS, MCReport, SimDesign, default_q, generate,
                         reference_design_2d, reference_design_3d, rep_seed,
                         run_coverage, run_dimensionality_bench, run_theorem1,
                         run_theorem2, validate_design)

__version__ = "0.1.0"
