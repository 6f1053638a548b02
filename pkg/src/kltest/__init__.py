"""Relative-entropy hypothesis tests on finite alphabets, with exact error oracles."""
from ._backend import backend_name
from .divergence import continuity_bound, kl, kl_chi_square_upper, renyi, total_variation
from .errors import EnumerationLimitError, InfiniteExponentError, ValidationError
from .experiment import (ErrorEstimate, ExperimentSpec, ExponentFit, converse_demo, exponent_fit,
                         mc_error_rates, sample_iid)
from .exponent import (ExponentReport, f_star, minimize_sum_kl_numeric, sanov_upper_bound,
                       stein_exponent, two_sample_exponent)
from .oracle import (ExactErrorReport, enumerate_types, exact_one_sample_errors,
                     exact_region_probability, exact_two_sample_errors, type_probability)
from .simplex import (Distribution, EmpiricalDistribution, empirical_from_samples,
                      is_absolutely_continuous, make_distribution, min_positive_prob)
from .testing import (Decision, TestVariant, ThresholdSchedule, hoeffding_threshold,
                      one_sample_decide, two_sample_decide, two_sample_threshold)

__version__ = "0.1.0"
