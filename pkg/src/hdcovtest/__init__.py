"""Equality tests for several high-dimensional covariance matrices.

The modified Box's M statistic replaces determinants with scalar quadratic
forms ``y S_i yᵀ``, which stay positive and cheap to compute when ``p`` is
far larger than the group sample sizes.
"""

__version__ = "0.1.0"

from .exceptions import DataError, DataFormatError, DegenerateDataError, ReplicationError
from .homtest import (
    BlockPartition,
    BlockTestResult,
    TestResult,
    block_tests,
    box_m,
    default_partition,
    dimension_condition,
    explicit_partition,
    lk_from_quadforms,
    lk_test,
    rejection_region,
    rho_factor,
)
from .quadform import quad_form, sample_covariance_oracle, weighted_row_sums
from .statmath import chi2_cdf, chi2_quantile, chi2_sf, ks_distance, ln_gamma

__all__ = [
    "__version__",
    "DataError",
    "DataFormatError",
    "DegenerateDataError",
    "ReplicationError",
    "BlockPartition",
    "BlockTestResult",
    "TestResult",
    "block_tests",
    "box_m",
    "default_partition",
    "dimension_condition",
    "explicit_partition",
    "lk_from_quadforms",
    "lk_test",
    "rejection_region",
    "rho_factor",
    "quad_form",
    "sample_covariance_oracle",
    "weighted_row_sums",
    "chi2_cdf",
    "chi2_quantile",
    "chi2_sf",
    "ks_distance",
    "ln_gamma",
]
