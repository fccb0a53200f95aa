//! Seeded Monte Carlo engine for coverage, error-distribution and rate
//! experiments.
//!
//! Replication `r` of a configuration draws from substream `r` of the
//! configuration's base seed, and results are reduced in replication order,
//! so every output is independent of the number of workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_open_unit, Error, Result};
use crate::estimate::{both_intervals, Ecdf};
use crate::models::{
    make_design, make_dgm, mixture_quantile, population_variance_at, sample_heterogeneous,
    sample_iid_average, DesignKind, Family, MixtureModel,
};
use crate::numerics::derive_stream;
use crate::oracle::oracle_variance_estimator;

pub const DEFAULT_N: usize = 350;
pub const DEFAULT_TAU: f64 = 0.5;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_REPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub family: Family,
    pub gamma: f64,
    pub design: DesignKind,
    pub n: usize,
    pub tau: f64,
    pub alpha: f64,
    pub reps: usize,
    pub base_seed: u64,
}

impl SimulationConfig {
    /// `n = 350`, `τ = 0.5`, `α = 0.05`, 10 000 replications.
    pub fn new(family: Family, gamma: f64, design: DesignKind, base_seed: u64) -> Self {
        Self {
            family,
            gamma,
            design,
            n: DEFAULT_N,
            tau: DEFAULT_TAU,
            alpha: DEFAULT_ALPHA,
            reps: DEFAULT_REPS,
            base_seed,
        }
    }

    /// Every family at `γ ∈ {1, 2, 3, 4}` under both designs, with defaults.
    pub fn full_grid(base_seed: u64) -> Vec<Self> {
        let mut grid = Vec::with_capacity(24);
        for design in DesignKind::ALL {
            for gamma in [1.0, 2.0, 3.0, 4.0] {
                for family in Family::ALL {
                    grid.push(Self::new(family, gamma, design, base_seed));
                }
            }
        }
        grid
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Domain("reps must be at least 1".into()));
        }
        check_open_unit("tau", self.tau)?;
        check_open_unit("alpha", self.alpha)?;
        if !self.gamma.is_finite() {
            return Err(Error::Domain(format!("gamma must be finite, got {}", self.gamma)));
        }
        make_design(self.design, self.n).map(|_| ())
    }

    pub fn model(&self) -> Result<MixtureModel> {
        self.validate()?;
        let design = make_design(self.design, self.n)?;
        make_dgm(self.family, self.gamma, &design)
    }
}

/// A configuration with its model, true quantile and population variance
/// computed once.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedConfig {
    pub config: SimulationConfig,
    pub model: MixtureModel,
    /// `Q̄_n(τ)`.
    pub q_bar: f64,
    /// `V_n(τ)`.
    pub v_n: f64,
}

impl PreparedConfig {
    pub fn new(config: SimulationConfig) -> Result<Self> {
        let model = config.model()?;
        Self::with_model(config, model)
    }

    /// Replaces the configured model, e.g. by a homogeneous one. The model's
    /// size must match `config.n`.
    pub fn with_model(config: SimulationConfig, model: MixtureModel) -> Result<Self> {
        config.validate()?;
        if model.n() != config.n {
            return Err(Error::Domain(format!(
                "model has n = {} but the configuration asks for n = {}",
                model.n(),
                config.n
            )));
        }
        let q_bar = mixture_quantile(&model, config.tau)?;
        let v_n = population_variance_at(&model, q_bar);
        Ok(Self {
            config,
            model,
            q_bar,
            v_n,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub rep_id: u64,
    /// Grouped interval on the heterogeneous sample contains `Q̄_n(τ)`.
    pub covered_het: bool,
    /// i.i.d. baseline interval on the heterogeneous sample contains `Q̄_n(τ)`.
    pub covered_iid: bool,
    /// `F̂(Q̄_n(τ)) − τ` on the heterogeneous sample.
    pub error_het: f64,
    /// `F̂(Q̄_n(τ)) − τ` on an i.i.d. sample from `F̄_n`.
    pub error_iid: f64,
    pub v_hat: f64,
    pub v_tilde: f64,
    pub width_het: f64,
    pub width_iid: f64,
    pub lower_clipped_het: bool,
    pub upper_clipped_het: bool,
}

/// One replication: a heterogeneous draw followed by an i.i.d. draw, both
/// from substream `rep_id`.
pub fn run_replication(prepared: &PreparedConfig, rep_id: u64) -> Result<ReplicationRecord> {
    let cfg = &prepared.config;
    let mut stream = derive_stream(cfg.base_seed, rep_id);
    let het = sample_heterogeneous(&prepared.model, &mut stream);
    let iid = sample_iid_average(&prepared.model, &mut stream);

    let ecdf = Ecdf::new(het.values());
    let (estimate, ci_het, ci_iid) = both_intervals(&het, &ecdf, cfg.tau, cfg.alpha)?;
    let v_tilde = oracle_variance_estimator(&het, prepared.q_bar)?;
    let error_het = ecdf.cdf(prepared.q_bar) - cfg.tau;
    let error_iid = Ecdf::new(iid.values()).cdf(prepared.q_bar) - cfg.tau;
    if !estimate.v_hat.is_finite() || !v_tilde.is_finite() {
        return Err(Error::Numerical(format!(
            "replication {rep_id}: non-finite variance estimate"
        )));
    }

    Ok(ReplicationRecord {
        rep_id,
        covered_het: ci_het.covers(prepared.q_bar),
        covered_iid: ci_iid.covers(prepared.q_bar),
        error_het,
        error_iid,
        v_hat: estimate.v_hat,
        v_tilde,
        width_het: ci_het.width(),
        width_iid: ci_iid.width(),
        lower_clipped_het: ci_het.lower_clipped,
        upper_clipped_het: ci_het.upper_clipped,
    })
}

/// Aggregates of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub family: Family,
    pub gamma: f64,
    pub design: DesignKind,
    pub n: usize,
    pub tau: f64,
    pub alpha: f64,
    pub reps: usize,
    pub seed: u64,
    /// Replications that completed; `reps − failures`.
    pub completed: usize,
    pub failures: usize,
    /// Percentages.
    pub coverage_het: f64,
    pub coverage_iid: f64,
    pub q_bar: f64,
    pub population_variance: f64,
    pub mean_v_hat: f64,
    pub mean_v_tilde: f64,
    /// Means over replications whose interval is finite on both sides.
    pub mean_width_het: f64,
    pub mean_width_iid: f64,
    pub lower_clips_het: usize,
    pub upper_clips_het: usize,
    pub var_error_het: f64,
    pub var_error_iid: f64,
    /// `var_error_het / var_error_iid`.
    pub error_variance_ratio: f64,
    /// `V_n(τ) / (τ(1 − τ))`.
    pub population_ratio: f64,
}

/// A report together with the replications it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub report: CoverageReport,
    pub records: Vec<ReplicationRecord>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

/// Unbiased sample variance, two-pass.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs.iter().copied());
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

fn finite_mean(xs: impl Iterator<Item = f64>) -> f64 {
    mean(xs.filter(|x| x.is_finite()))
}

fn aggregate(prepared: &PreparedConfig, outcomes: Vec<Result<ReplicationRecord>>) -> Simulation {
    let cfg = &prepared.config;
    let failures = outcomes.iter().filter(|o| o.is_err()).count();
    let records: Vec<ReplicationRecord> = outcomes.into_iter().filter_map(Result::ok).collect();
    let completed = records.len();
    let pct = |k: usize| 100.0 * k as f64 / completed as f64;

    let err_het: Vec<f64> = records.iter().map(|r| r.error_het).collect();
    let err_iid: Vec<f64> = records.iter().map(|r| r.error_iid).collect();
    let var_error_het = sample_variance(&err_het);
    let var_error_iid = sample_variance(&err_iid);

    let report = CoverageReport {
        family: cfg.family,
        gamma: cfg.gamma,
        design: cfg.design,
        n: cfg.n,
        tau: cfg.tau,
        alpha: cfg.alpha,
        reps: cfg.reps,
        seed: cfg.base_seed,
        completed,
        failures,
        coverage_het: pct(records.iter().filter(|r| r.covered_het).count()),
        coverage_iid: pct(records.iter().filter(|r| r.covered_iid).count()),
        q_bar: prepared.q_bar,
        population_variance: prepared.v_n,
        mean_v_hat: mean(records.iter().map(|r| r.v_hat)),
        mean_v_tilde: mean(records.iter().map(|r| r.v_tilde)),
        mean_width_het: finite_mean(records.iter().map(|r| r.width_het)),
        mean_width_iid: finite_mean(records.iter().map(|r| r.width_iid)),
        lower_clips_het: records.iter().filter(|r| r.lower_clipped_het).count(),
        upper_clips_het: records.iter().filter(|r| r.upper_clipped_het).count(),
        var_error_het,
        var_error_iid,
        error_variance_ratio: var_error_het / var_error_iid,
        population_ratio: prepared.v_n / (cfg.tau * (1.0 - cfg.tau)),
    };
    Simulation { report, records }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Runtime(e.to_string()))
}

fn simulate_in_pool(prepared: &PreparedConfig) -> Simulation {
    let outcomes: Vec<_> = (0..prepared.config.reps as u64)
        .into_par_iter()
        .map(|r| run_replication(prepared, r))
        .collect();
    aggregate(prepared, outcomes)
}

/// Runs every replication of a prepared configuration on `workers` threads
/// (0 picks the number of CPUs).
pub fn simulate_prepared(prepared: &PreparedConfig, workers: usize) -> Result<Simulation> {
    Ok(pool(workers)?.install(|| simulate_in_pool(prepared)))
}

pub fn simulate(config: &SimulationConfig, workers: usize) -> Result<Simulation> {
    simulate_prepared(&PreparedConfig::new(config.clone())?, workers)
}

/// Coverage reports for a list of configurations, in input order. Each
/// configuration fails or succeeds on its own.
pub fn coverage_table(configs: &[SimulationConfig], workers: usize) -> Result<Vec<Result<CoverageReport>>> {
    let pool = pool(workers)?;
    Ok(pool.install(|| {
        configs
            .par_iter()
            .map(|cfg| {
                let prepared = PreparedConfig::new(cfg.clone())?;
                Ok(simulate_in_pool(&prepared).report)
            })
            .collect()
    }))
}

/// Per-replication estimation errors on both arms and their variance ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSamples {
    pub records: Vec<ReplicationRecord>,
    pub failures: usize,
    pub var_het: f64,
    pub var_iid: f64,
    /// `var_het / var_iid`.
    pub ratio: f64,
    /// `V_n(τ) / (τ(1 − τ))`, what `ratio` estimates.
    pub population_ratio: f64,
}

pub fn error_samples(config: &SimulationConfig, workers: usize) -> Result<ErrorSamples> {
    error_samples_prepared(&PreparedConfig::new(config.clone())?, workers)
}

pub fn error_samples_prepared(prepared: &PreparedConfig, workers: usize) -> Result<ErrorSamples> {
    let sim = simulate_prepared(prepared, workers)?;
    Ok(ErrorSamples {
        failures: sim.report.failures,
        var_het: sim.report.var_error_het,
        var_iid: sim.report.var_error_iid,
        ratio: sim.report.error_variance_ratio,
        population_ratio: sim.report.population_ratio,
        records: sim.records,
    })
}

/// Monte Carlo means of `sup_i |i/n − F̄_n(X_(i))|` at two sample sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCheck {
    pub n_small: usize,
    pub n_large: usize,
    pub reps: usize,
    pub mean_small: f64,
    pub mean_large: f64,
    /// Standard errors of the two means.
    pub se_small: f64,
    pub se_large: f64,
    /// `mean_large / mean_small`; about 0.5 for a `n^{-1/2}` rate.
    pub ratio: f64,
    /// Delta-method standard error of `ratio`.
    pub ratio_se: f64,
}

/// Largest gap between the level `i/n` and `F̄_n` at the `i`-th order statistic.
pub fn quantile_level_sup_error(model: &MixtureModel, sample_values: &[f64]) -> f64 {
    let ecdf = Ecdf::new(sample_values);
    let n = ecdf.n() as f64;
    ecdf.sorted()
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / n - model.cdf(x)).abs())
        .fold(0.0, f64::max)
}

/// Scaling experiment for the uniform `n^{-1/2}` rate of `F̄_n(Q̂(τ))`.
///
/// Replication `r` draws the small sample from substream `2r` and the large
/// one from substream `2r + 1`.
pub fn rate_check<F>(
    model_for: F,
    n_small: usize,
    n_large: usize,
    reps: usize,
    base_seed: u64,
    workers: usize,
) -> Result<RateCheck>
where
    F: Fn(usize) -> Result<MixtureModel> + Sync,
{
    if n_large != 4 * n_small {
        return Err(Error::Domain(format!(
            "rate check needs n_large = 4·n_small, got {n_small} and {n_large}"
        )));
    }
    if reps < 2 {
        return Err(Error::Domain("rate check needs at least 2 replications".into()));
    }
    let small = model_for(n_small)?;
    let large = model_for(n_large)?;
    if small.n() != n_small || large.n() != n_large {
        return Err(Error::Domain("model factory returned the wrong sample size".into()));
    }
    let pairs: Vec<(f64, f64)> = pool(workers)?.install(|| {
        (0..reps as u64)
            .into_par_iter()
            .map(|r| {
                let mut s = derive_stream(base_seed, 2 * r);
                let a = sample_heterogeneous(&small, &mut s);
                let mut s = derive_stream(base_seed, 2 * r + 1);
                let b = sample_heterogeneous(&large, &mut s);
                (
                    quantile_level_sup_error(&small, a.values()),
                    quantile_level_sup_error(&large, b.values()),
                )
            })
            .collect()
    });
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mean_small = mean(xs.iter().copied());
    let mean_large = mean(ys.iter().copied());
    let se_small = (sample_variance(&xs) / reps as f64).sqrt();
    let se_large = (sample_variance(&ys) / reps as f64).sqrt();
    let ratio = mean_large / mean_small;
    let ratio_se = ratio * ((se_small / mean_small).powi(2) + (se_large / mean_large).powi(2)).sqrt();
    Ok(RateCheck {
        n_small,
        n_large,
        reps,
        mean_small,
        mean_large,
        se_small,
        se_large,
        ratio,
        ratio_se,
    })
}
