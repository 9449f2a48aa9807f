//! Censored likelihood and MAP posterior for the funding-round model.
//!
//! A company's funding history is a ladder climb: round `l` happens the first
//! time the latent process gains `delta_level` over the level of round
//! `l - 1`. Each observed inter-round gap therefore contributes a
//! first-passage density, and a company that has not exited by the
//! observation cutoff contributes the probability of not reaching its next
//! level in the remaining window. Reaching level seven is an exit (IPO or
//! acquisition at scale).
//!
//! Per-company coefficients come from features: drift `mu0 = beta_y . x` uses
//! the coefficient vector of the company's founding year `y`, and variance
//! `sigma0_sq = (gamma . x)^2`. Year vectors follow a Gaussian random walk
//! with per-coordinate step scale `delta`, which ties thin cohorts to their
//! neighbours.

mod grad;
mod optimize;
mod transform;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::FeatureMatrix;
use crate::fpt::{fpt_log_pdf, fpt_log_survival, DriftProfile, PassageQuery};
use crate::math::LN_SQRT_2PI;
use crate::{Error, Result};

pub use optimize::fit;
pub use transform::Reparam;

/// Round index whose passage counts as an exit.
pub const EXIT_LEVEL_INDEX: u8 = 7;

/// Floor applied to `(gamma . x)^2` so every company keeps a usable variance;
/// inside the floored region the variance gradient is taken as zero.
pub const SIGMA0_SQ_FLOOR: f64 = 1e-6;

/// One company's observed funding rounds.
///
/// `round_indices[j]` is the ladder level of the j-th observed round and
/// `round_times[j]` the time of that round in years since the first observed
/// round (so `round_times[0] == 0`). Skipped levels show up as index jumps.
/// `t_obs` is the censoring time on the same clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundingHistory {
    pub company_id: String,
    pub founding_year: i32,
    pub round_indices: Vec<u8>,
    pub round_times: Vec<f64>,
    pub t_obs: f64,
}

impl FundingHistory {
    pub fn new(
        company_id: impl Into<String>,
        founding_year: i32,
        round_indices: Vec<u8>,
        round_times: Vec<f64>,
        t_obs: f64,
    ) -> Result<Self> {
        let h = FundingHistory {
            company_id: company_id.into(),
            founding_year,
            round_indices,
            round_times,
            t_obs,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.round_indices.len();
        if n == 0 {
            return Err(Error::invalid(
                "funding history",
                format!("company {}: needs at least one observed round", self.company_id),
            ));
        }
        if self.round_times.len() != n {
            return Err(Error::invalid(
                "funding history",
                format!(
                    "company {}: {} round indices but {} round times",
                    self.company_id,
                    n,
                    self.round_times.len()
                ),
            ));
        }
        if self.round_times[0] != 0.0 {
            return Err(Error::invalid(
                "funding history",
                format!(
                    "company {}: first round time must be 0, got {}",
                    self.company_id, self.round_times[0]
                ),
            ));
        }
        for j in 0..n {
            if !self.round_times[j].is_finite() {
                return Err(Error::invalid(
                    "funding history",
                    format!("company {}: round time {} not finite", self.company_id, j),
                ));
            }
            if self.round_indices[j] > EXIT_LEVEL_INDEX {
                return Err(Error::invalid(
                    "funding history",
                    format!(
                        "company {}: round index {} exceeds the exit level {}",
                        self.company_id, self.round_indices[j], EXIT_LEVEL_INDEX
                    ),
                ));
            }
            if j > 0 {
                if self.round_indices[j] <= self.round_indices[j - 1] {
                    return Err(Error::invalid(
                        "funding history",
                        format!(
                            "company {}: round indices must be strictly increasing",
                            self.company_id
                        ),
                    ));
                }
                if self.round_times[j] <= self.round_times[j - 1] {
                    return Err(Error::invalid(
                        "funding history",
                        format!(
                            "company {}: round times must be strictly increasing",
                            self.company_id
                        ),
                    ));
                }
            }
        }
        if !self.t_obs.is_finite() || self.t_obs < self.round_times[n - 1] {
            return Err(Error::invalid(
                "funding history",
                format!(
                    "company {}: t_obs = {} must be finite and at least the last round time {}",
                    self.company_id,
                    self.t_obs,
                    self.round_times[n - 1]
                ),
            ));
        }
        Ok(())
    }

    /// Whether the company reached the exit level within the observed window.
    pub fn exited(&self) -> bool {
        *self.round_indices.last().expect("validated non-empty") == EXIT_LEVEL_INDEX
    }
}

/// Full parameter set of the funding-round model.
///
/// `beta` maps founding year to its drift coefficient vector; the years
/// present must form a contiguous range. `gamma` sets the variance load,
/// `delta` the per-coordinate random-walk step between consecutive years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: BTreeMap<i32, Vec<f64>>,
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
    pub nu: f64,
    pub tau: f64,
    pub delta_level: f64,
}

impl ModelParams {
    pub fn num_features(&self) -> usize {
        self.gamma.len()
    }

    /// Ascending founding years covered by `beta`.
    pub fn years(&self) -> Vec<i32> {
        self.beta.keys().copied().collect()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.gamma.len();
        if m == 0 {
            return Err(Error::invalid("model params", "gamma is empty"));
        }
        if self.beta.is_empty() {
            return Err(Error::invalid("model params", "beta has no years"));
        }
        if self.delta.len() != m {
            return Err(Error::DimensionMismatch {
                what: "delta",
                expected: m,
                got: self.delta.len(),
            });
        }
        let years: Vec<i32> = self.beta.keys().copied().collect();
        for w in years.windows(2) {
            if w[1] != w[0] + 1 {
                return Err(Error::invalid(
                    "model params",
                    format!("beta years must be contiguous, found gap between {} and {}", w[0], w[1]),
                ));
            }
        }
        for (year, b) in &self.beta {
            if b.len() != m {
                return Err(Error::DimensionMismatch {
                    what: "beta",
                    expected: m,
                    got: b.len(),
                });
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(
                    "model params",
                    format!("beta[{year}] contains a non-finite entry"),
                ));
            }
        }
        if self.gamma.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("model params", "gamma contains a non-finite entry"));
        }
        if self.delta.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return Err(Error::invalid(
                "model params",
                "delta entries must be positive finite numbers",
            ));
        }
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            return Err(Error::invalid("model params", format!("nu must be >= 0, got {}", self.nu)));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::invalid("model params", format!("tau must be > 0, got {}", self.tau)));
        }
        if !(self.delta_level > 0.0) || !self.delta_level.is_finite() {
            return Err(Error::invalid(
                "model params",
                format!("delta_level must be > 0, got {}", self.delta_level),
            ));
        }
        Ok(())
    }
}

/// Hyperparameters of the MAP prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig {
    /// Gaussian sd on the earliest-year beta entries.
    pub beta_sd: f64,
    /// Gaussian sd on the gamma entries.
    pub gamma_sd: f64,
    /// Mean of the exponential prior on each delta entry.
    pub delta_mean: f64,
    /// Uniform support of ln tau.
    pub log_tau_support: (f64, f64),
    /// Uniform support of nu.
    pub nu_support: (f64, f64),
}

impl Default for PriorConfig {
    fn default() -> Self {
        PriorConfig {
            beta_sd: 20.0,
            gamma_sd: 20.0,
            delta_mean: 1.0,
            log_tau_support: (-1e4, 1e4),
            nu_support: (0.0, 100.0),
        }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta_sd > 0.0) || !(self.gamma_sd > 0.0) || !(self.delta_mean > 0.0) {
            return Err(Error::invalid(
                "prior config",
                "beta_sd, gamma_sd and delta_mean must be positive",
            ));
        }
        if !(self.log_tau_support.0 < self.log_tau_support.1) {
            return Err(Error::invalid("prior config", "log_tau_support must be a proper interval"));
        }
        if !(self.nu_support.0 < self.nu_support.1) || !(self.nu_support.0 >= 0.0) {
            return Err(Error::invalid(
                "prior config",
                "nu_support must be a proper interval within [0, inf)",
            ));
        }
        Ok(())
    }
}

/// Multi-start optimiser settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub rng_seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            restarts: 100,
            max_iterations: 500,
            gradient_tolerance: 1e-5,
            rng_seed: 0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::invalid("fit config", "restarts must be at least 1"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("fit config", "max_iterations must be at least 1"));
        }
        if !(self.gradient_tolerance > 0.0) {
            return Err(Error::invalid("fit config", "gradient_tolerance must be positive"));
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Drift profile implied by a company's features and founding year.
pub fn company_drift_profile(
    features: &[f64],
    founding_year: i32,
    params: &ModelParams,
) -> Result<DriftProfile> {
    let m = params.num_features();
    if features.len() != m {
        return Err(Error::DimensionMismatch {
            what: "features",
            expected: m,
            got: features.len(),
        });
    }
    let beta = params
        .beta
        .get(&founding_year)
        .ok_or(Error::MissingYear { year: founding_year })?;
    let mu0 = dot(beta, features);
    let raw = dot(&params.gamma, features);
    let sigma0_sq = (raw * raw).max(SIGMA0_SQ_FLOOR);
    DriftProfile::new(mu0, sigma0_sq, params.nu, params.tau)
}

/// Censored log-likelihood of one funding history under a drift profile.
///
/// Sums the first-passage log-density of each observed inter-round gap; if
/// the company has not exited, adds the log-probability of not gaining one
/// more level between the last round and `t_obs`.
pub fn company_log_likelihood(
    history: &FundingHistory,
    profile: &DriftProfile,
    delta_level: f64,
) -> Result<f64> {
    history.validate()?;
    if !(delta_level > 0.0) || !delta_level.is_finite() {
        return Err(Error::invalid(
            "delta_level",
            format!("must be a positive finite number, got {delta_level}"),
        ));
    }
    let idx = &history.round_indices;
    let t = &history.round_times;
    let mut ll = 0.0;
    for j in 1..idx.len() {
        let gap = delta_level * f64::from(idx[j] - idx[j - 1]);
        let q = PassageQuery::new(t[j - 1], t[j], gap)?;
        ll += fpt_log_pdf(&q, profile);
    }
    if !history.exited() && history.t_obs > *t.last().expect("non-empty") {
        let q = PassageQuery::new(*t.last().unwrap(), history.t_obs, delta_level)?;
        ll += fpt_log_survival(&q, profile);
    }
    Ok(ll)
}

/// Log prior density of a parameter set (all normalisation constants kept).
fn log_prior(params: &ModelParams, priors: &PriorConfig) -> f64 {
    let mut lp = 0.0;
    let first = params.beta.values().next().expect("validated non-empty");
    for b in first {
        let z = b / priors.beta_sd;
        lp += -0.5 * z * z - priors.beta_sd.ln() - LN_SQRT_2PI;
    }
    for g in &params.gamma {
        let z = g / priors.gamma_sd;
        lp += -0.5 * z * z - priors.gamma_sd.ln() - LN_SQRT_2PI;
    }
    for d in &params.delta {
        lp += -d / priors.delta_mean - priors.delta_mean.ln();
    }
    let years: Vec<&Vec<f64>> = params.beta.values().collect();
    for w in years.windows(2) {
        for ((prev, next), sd) in w[0].iter().zip(w[1]).zip(&params.delta) {
            let step = next - prev;
            lp += -0.5 * (step / sd).powi(2) - sd.ln() - LN_SQRT_2PI;
        }
    }
    // Uniform priors on nu and ln tau contribute their densities too.
    lp -= (priors.nu_support.1 - priors.nu_support.0).ln();
    lp -= (priors.log_tau_support.1 - priors.log_tau_support.0).ln();
    lp
}

fn in_support(params: &ModelParams, priors: &PriorConfig) -> bool {
    let (nu_lo, nu_hi) = priors.nu_support;
    let (lt_lo, lt_hi) = priors.log_tau_support;
    let lt = params.tau.ln();
    params.nu >= nu_lo && params.nu <= nu_hi && lt >= lt_lo && lt <= lt_hi
}

/// Check that every history lines up with the feature matrix and the model,
/// returning the feature column index of each history.
fn resolve_columns(
    histories: &[FundingHistory],
    features: &FeatureMatrix,
    params: &ModelParams,
) -> Result<Vec<usize>> {
    if params.num_features() != features.num_features() {
        return Err(Error::DimensionMismatch {
            what: "feature matrix",
            expected: params.num_features(),
            got: features.num_features(),
        });
    }
    if !features.is_complete() {
        return Err(Error::invalid(
            "feature matrix",
            "contains missing entries; impute them before likelihood work",
        ));
    }
    let mut cols = Vec::with_capacity(histories.len());
    for h in histories {
        h.validate()?;
        let col = features
            .column_index(&h.company_id)
            .ok_or_else(|| Error::UnknownCompany {
                company_id: h.company_id.clone(),
                from: "feature matrix",
            })?;
        if !params.beta.contains_key(&h.founding_year) {
            return Err(Error::MissingYear { year: h.founding_year });
        }
        cols.push(col);
    }
    Ok(cols)
}

/// Joint log-posterior of the dataset: censored likelihood plus priors.
///
/// Returns `-inf` when `nu` or `ln tau` falls outside its uniform support.
/// The per-company terms are evaluated in parallel but reduced in input
/// order, so the result does not depend on the thread count.
pub fn dataset_log_posterior(
    histories: &[FundingHistory],
    features: &FeatureMatrix,
    params: &ModelParams,
    priors: &PriorConfig,
) -> Result<f64> {
    params.validate()?;
    priors.validate()?;
    let cols = resolve_columns(histories, features, params)?;
    if !in_support(params, priors) {
        return Ok(f64::NEG_INFINITY);
    }
    let terms: Vec<f64> = histories
        .par_iter()
        .zip(cols.par_iter())
        .map(|(h, &col)| {
            let profile = company_drift_profile(features.column(col), h.founding_year, params)?;
            company_log_likelihood(h, &profile, params.delta_level)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(terms.iter().sum::<f64>() + log_prior(params, priors))
}

/// Gradient of the log-posterior in the unconstrained parameterisation
/// produced by [`Reparam::pack`]: raw `beta` and `gamma`, `ln delta`,
/// logit-rescaled `nu`, `ln tau`.
///
/// Parameters must sit strictly inside the prior supports; a boundary value
/// is reported as an error rather than silently returning a one-sided slope.
pub fn log_posterior_gradient(
    histories: &[FundingHistory],
    features: &FeatureMatrix,
    params: &ModelParams,
    priors: &PriorConfig,
) -> Result<Vec<f64>> {
    params.validate()?;
    priors.validate()?;
    let cols = resolve_columns(histories, features, params)?;
    let reparam = Reparam::for_params(params, priors);
    reparam.pack(params)?; // rejects boundary or out-of-support parameters
    let (_, grad) = grad::posterior_value_grad(histories, &cols, features, params, priors);
    Ok(reparam.chain_to_unconstrained(params, &grad))
}
