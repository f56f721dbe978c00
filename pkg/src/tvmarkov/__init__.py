"""Simulation and estimation toolkit for Markov chains with slowly varying kernels.

The library covers four connected pieces:

* exact laws and contraction certificates for families {Q_u : u in [0, 1]}
  on finite or truncated state spaces (``kernels``),
* distances between discrete laws, including exact one-dimensional
  Wasserstein values and a small-instance transport oracle (``metrics``),
* reproducible trajectory simulation with counter-addressed noise so that
  coupled chains share variates (``reservoir``, ``simulate``),
* kernel-weighted local estimators with closed-form asymptotic covariances
  and exact/Monte-Carlo mixing coefficients (``estimate``, ``mixing``).

The ``tvmarkov`` command line runs preset experiments; see the README.
"""

from .errors import (BandwidthWindowError, CertificateNotFoundError,
                     ConcaveCostDisagreementError, ConfigValidationError,
                     ModelInvalidError, NonErgodicError, OracleSizeError,
                     RegressionDegenerateError, TruncationError, TvMarkovError)
from .kernels import (CountableKernelFamily, DriftSpec, FiniteKernelFamily,
                      dobrushin_tv, dobrushin_vnorm, doeblin_certificate,
                      finite_dim_law, finite_dim_law_inhom, frozen_laws,
                      holder_invariant_bound,
                      inhomogeneous_product, marginal_law, marginal_laws,
                      mouli_certificate, stationary_distribution,
                      transition_matrix, tv_envelope, verify_f1)
from .measures import DiscreteMeasure, JointLaw
from .metrics import (CostMatrix, Coupling, monotone_coupling_cost, transport_oracle,
                      tv_distance, vnorm_distance, wasserstein_kernel_coefficient,
                      wasserstein_power_metric, wasserstein_real)
from .reservoir import NoiseReservoir, stream_uniforms
from .simulate import (PathSample, simulate_affine, simulate_finite,
                       simulate_inar, simulate_random_walk,
                       simulate_stationary_inar)
from .estimate import (LocalEstimate, SmoothingSpec, estimate_functional,
                       estimate_pi, estimate_Q, estimate_walk_pq, kernel_weights,
                       lls_inar, sigma1, sigma2)
from .mixing import (MixingCurve, beta_bound_doeblin, beta_exact,
                     beta_exact_curve, beta_v_bound, beta_v_exact,
                     beta_v_exact_curve, tau_upper_mc)
from .presets import (PRESET_NAMES, make_finite_affine, make_finite_constant,
                      make_inar1, make_random_walk, make_tv_ar1,
                      make_tv_arch1_squared, preset_summary)
from .config import ScenarioConfig, load_config

__version__ = "0.1.0"
