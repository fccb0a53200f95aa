//! Confidence intervals for quantiles of independent, heterogeneously
//! distributed data.
//!
//! Observations come in groups; within a group they share a distribution,
//! across groups distributions may differ arbitrarily. The pooled sample
//! quantile then estimates the quantile of the average distribution, with a
//! variance that can be much smaller than the i.i.d. value `τ(1−τ)`.
//! [`variance_estimator`] estimates that variance from within-group pairs and
//! [`confidence_interval`] inverts the resulting normal approximation through
//! the empirical quantile function.
//!
//! The [`harness`] module contains the Monte Carlo machinery used to check
//! coverage, and [`models`] the data-generating mechanisms it runs on.

pub mod error;
pub mod estimate;
pub mod harness;
pub mod models;
pub mod numerics;
pub mod oracle;
pub mod sample;

pub use error::{Error, Result};
pub use estimate::{
    confidence_interval, confidence_interval_with, empirical_cdf, empirical_quantile,
    half_width, iid_confidence_interval, iid_confidence_interval_with, iid_variance,
    variance_estimator, variance_upper_bound, CiOptions, Ecdf, QuantileCI, VarianceEstimate,
    DEFAULT_LOW_INFORMATION_THRESHOLD,
};
pub use harness::{
    coverage_table, error_samples, rate_check, run_replication, simulate, CoverageReport,
    ErrorSamples, PreparedConfig, RateCheck, ReplicationRecord, Simulation, SimulationConfig,
};
pub use models::{
    make_design, make_dgm, mixture_cdf, mixture_quantile, population_variance,
    sample_heterogeneous, sample_iid_average, ComponentDistribution, DesignKind, Family,
    GroupDesign, MixtureModel,
};
pub use oracle::{
    binomial_product_variance_bruteforce, binomial_product_variance_closed_form,
    oracle_variance_estimator,
};
pub use sample::{GroupedSample, LabeledSample, SingletonPolicy};
