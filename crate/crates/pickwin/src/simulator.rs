//! Synthetic funding-history generation.
//!
//! Company value paths are simulated on the integrated-shape clock: over a
//! step `[t, t+h]` the value increment is Gaussian with mean `mu0 * dG` and
//! variance `sigma0^2 * dG`, where `dG` is the closed-form shape integral of
//! the step. Funding rounds fire when the path first sits a further
//! `delta_level` above the last raised level, checked once per step, and
//! everything after the observation horizon is censored.
//!
//! Reproducibility contract: coefficient evolution uses RNG stream 0 of the
//! seed; company `i` (in generation order) uses stream `i + 1`, drawing its
//! features first (in sampler order), then its first-round calendar offset,
//! then one standard normal per path step in time order. Datasets are
//! therefore byte-identical for a fixed config and independent of thread
//! count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::features::FeatureMatrix;
use crate::fpt::DriftProfile;
use crate::likelihood::{company_drift_profile, FundingHistory, ModelParams, EXIT_LEVEL_INDEX};
use crate::{Error, Result};

/// Default path discretisation: daily steps on a yearly clock.
pub const DEFAULT_PATH_STEP: f64 = 1.0 / 365.0;

fn default_path_step() -> f64 {
    DEFAULT_PATH_STEP
}

/// One synthetic feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub dist: FeatureDist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureDist {
    /// A fixed value (use for intercept columns).
    Constant { value: f64 },
    Uniform { lo: f64, hi: f64 },
    Categorical { values: Vec<f64>, probs: Vec<f64> },
}

impl FeatureDist {
    fn validate(&self, name: &str) -> Result<()> {
        match self {
            FeatureDist::Constant { value } => {
                if !value.is_finite() {
                    return Err(Error::invalid(
                        "feature spec",
                        format!("{name}: constant must be finite"),
                    ));
                }
            }
            FeatureDist::Uniform { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                    return Err(Error::invalid(
                        "feature spec",
                        format!("{name}: uniform needs finite lo < hi"),
                    ));
                }
            }
            FeatureDist::Categorical { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(Error::invalid(
                        "feature spec",
                        format!("{name}: values and probs must be nonempty and equal length"),
                    ));
                }
                if values.iter().any(|v| !v.is_finite())
                    || probs.iter().any(|p| !p.is_finite() || *p < 0.0)
                {
                    return Err(Error::invalid(
                        "feature spec",
                        format!("{name}: values must be finite and probs non-negative"),
                    ));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid(
                        "feature spec",
                        format!("{name}: probs sum to {total}, expected 1"),
                    ));
                }
            }
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            FeatureDist::Constant { value } => *value,
            FeatureDist::Uniform { lo, hi } => rng.gen_range(*lo..*hi),
            FeatureDist::Categorical { values, probs } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                *values.last().expect("validated nonempty")
            }
        }
    }
}

/// Full description of a synthetic market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Generating parameters. `beta` must cover a contiguous block of years
    /// starting at the first simulated year; later years are evolved with the
    /// random walk if absent. `delta` entries may be zero (frozen
    /// coefficients).
    pub true_params: ModelParams,
    pub feature_sampler: Vec<FeatureSpec>,
    pub companies_per_year: usize,
    /// Inclusive range of founding years.
    pub years: (i32, i32),
    /// Observation time, as an absolute calendar year (e.g. 2016.0). Every
    /// company's history is censored here.
    pub t_obs: f64,
    pub rng_seed: u64,
    #[serde(default = "default_path_step")]
    pub path_step: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let p = &self.true_params;
        let m = p.gamma.len();
        if m == 0 {
            return Err(Error::invalid("sim config", "true_params.gamma is empty"));
        }
        if self.feature_sampler.len() != m {
            return Err(Error::DimensionMismatch {
                what: "feature_sampler",
                expected: m,
                got: self.feature_sampler.len(),
            });
        }
        {
            let mut seen = std::collections::BTreeSet::new();
            for spec in &self.feature_sampler {
                if spec.name.is_empty() || !seen.insert(spec.name.as_str()) {
                    return Err(Error::invalid(
                        "sim config",
                        format!("feature name {:?} is empty or repeated", spec.name),
                    ));
                }
                spec.dist.validate(&spec.name)?;
            }
        }
        if p.delta.len() != m {
            return Err(Error::DimensionMismatch {
                what: "delta",
                expected: m,
                got: p.delta.len(),
            });
        }
        if p.delta.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::invalid(
                "sim config",
                "delta entries must be non-negative finite numbers",
            ));
        }
        if p.gamma.iter().any(|g| !g.is_finite()) {
            return Err(Error::invalid("sim config", "gamma entries must be finite"));
        }
        if !(p.nu >= 0.0) || !p.nu.is_finite() || !(p.tau > 0.0) || !p.tau.is_finite() {
            return Err(Error::invalid("sim config", "need nu >= 0 and tau > 0"));
        }
        if !(p.delta_level > 0.0) || !p.delta_level.is_finite() {
            return Err(Error::invalid("sim config", "delta_level must be positive"));
        }
        let (y0, y1) = self.years;
        if y0 > y1 {
            return Err(Error::invalid(
                "sim config",
                format!("years range ({y0}, {y1}) is reversed"),
            ));
        }
        if p.beta.is_empty() {
            return Err(Error::invalid("sim config", "true_params.beta is empty"));
        }
        let beta_years: Vec<i32> = p.beta.keys().copied().collect();
        if beta_years[0] != y0 {
            return Err(Error::invalid(
                "sim config",
                format!("beta must start at the first simulated year {y0}, found {}", beta_years[0]),
            ));
        }
        for (offset, year) in beta_years.iter().enumerate() {
            if *year != y0 + offset as i32 {
                return Err(Error::invalid(
                    "sim config",
                    format!("beta years must be contiguous, missing {}", y0 + offset as i32),
                ));
            }
            if *year > y1 {
                return Err(Error::invalid(
                    "sim config",
                    format!("beta year {year} is outside the simulated range"),
                ));
            }
        }
        if p.beta.values().any(|b| b.len() != m || b.iter().any(|v| !v.is_finite())) {
            return Err(Error::invalid(
                "sim config",
                "every beta vector must match the feature count and be finite",
            ));
        }
        if self.companies_per_year == 0 {
            return Err(Error::invalid("sim config", "companies_per_year must be positive"));
        }
        if !(self.t_obs > f64::from(y1) + 1.0) || !self.t_obs.is_finite() {
            return Err(Error::invalid(
                "sim config",
                format!(
                    "t_obs = {} must exceed the last founding year plus one ({})",
                    self.t_obs,
                    f64::from(y1) + 1.0
                ),
            ));
        }
        if !(self.path_step > 0.0) || !self.path_step.is_finite() {
            return Err(Error::invalid("sim config", "path_step must be positive"));
        }
        Ok(())
    }
}

/// A simulated market: histories and features in generation order, the
/// per-company drift profiles, and the generating parameters with every
/// year's coefficients filled in.
#[derive(Debug, Clone)]
pub struct SimulatedDataset {
    pub histories: Vec<FundingHistory>,
    pub features: FeatureMatrix,
    pub profiles: Vec<DriftProfile>,
    pub true_params: ModelParams,
}

/// Per-step Gaussian increment parameters of a value path, precomputed from
/// the closed-form shape integral. Reusable across many path draws on the
/// same profile and horizon.
#[derive(Debug, Clone)]
pub struct PathGrid {
    end_times: Vec<f64>,
    drift: Vec<f64>,
    vol: Vec<f64>,
}

impl PathGrid {
    pub fn new(profile: &DriftProfile, horizon: f64, step: f64) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::invalid("path grid", "horizon must be positive and finite"));
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::invalid("path grid", "step must be positive and finite"));
        }
        let steps = (horizon / step).ceil() as usize;
        let mut grid = PathGrid {
            end_times: Vec::with_capacity(steps),
            drift: Vec::with_capacity(steps),
            vol: Vec::with_capacity(steps),
        };
        let mut t = 0.0;
        while t < horizon {
            let t_next = (t + step).min(horizon);
            let dg = profile.shape_integral(t, t_next);
            grid.end_times.push(t_next);
            grid.drift.push(profile.mu0 * dg);
            grid.vol.push((profile.sigma0_sq * dg).sqrt());
            t = t_next;
        }
        Ok(grid)
    }

    pub fn num_steps(&self) -> usize {
        self.end_times.len()
    }
}

/// Draw one funding history along a precomputed grid. Exactly one standard
/// normal is consumed per step, in step order, and at most one funding round
/// is recorded per step. The walk stops at the exit round or the end of the
/// grid, whichever comes first.
pub fn sample_history_on_grid(
    company_id: &str,
    founding_year: i32,
    grid: &PathGrid,
    delta_level: f64,
    t_obs: f64,
    rng: &mut ChaCha8Rng,
) -> Result<FundingHistory> {
    if let Some(&last) = grid.end_times.last() {
        if t_obs < last {
            return Err(Error::invalid(
                "path sampling",
                format!("t_obs = {t_obs} precedes the grid horizon {last}"),
            ));
        }
    }
    let mut x = 0.0f64;
    let mut level_indices: Vec<u8> = vec![0];
    let mut round_times: Vec<f64> = vec![0.0];
    let mut next_level: u8 = 1;
    for s in 0..grid.num_steps() {
        let z: f64 = rng.sample(StandardNormal);
        x += grid.drift[s] + grid.vol[s] * z;
        if x >= delta_level * f64::from(next_level) {
            level_indices.push(next_level);
            round_times.push(grid.end_times[s]);
            if next_level == EXIT_LEVEL_INDEX {
                break;
            }
            next_level += 1;
        }
    }
    FundingHistory::new(company_id, founding_year, level_indices, round_times, t_obs)
}

/// Draw one funding history from scratch (grid built internally): the level
/// process starts at zero and is observed for `t_obs` years.
pub fn sample_history(
    company_id: &str,
    founding_year: i32,
    profile: &DriftProfile,
    delta_level: f64,
    t_obs: f64,
    path_step: f64,
    rng: &mut ChaCha8Rng,
) -> Result<FundingHistory> {
    if !(delta_level > 0.0) || !delta_level.is_finite() {
        return Err(Error::invalid("path sampling", "delta_level must be positive"));
    }
    let grid = PathGrid::new(profile, t_obs, path_step)?;
    sample_history_on_grid(company_id, founding_year, &grid, delta_level, t_obs, rng)
}

/// Evolve the coefficient random walk over the simulated years. Stream 0 of
/// the seed; one standard normal per (year, feature) in order, drawn whether
/// or not that year was supplied, so provided prefixes do not shift the
/// randomness of later years.
fn evolve_betas(config: &SimConfig) -> ModelParams {
    let mut params = config.true_params.clone();
    let (y0, y1) = config.years;
    let m = params.gamma.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    rng.set_stream(0);
    for year in (y0 + 1)..=y1 {
        let steps: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        if params.beta.contains_key(&year) {
            continue;
        }
        let prev = params.beta[&(year - 1)].clone();
        let next: Vec<f64> = prev
            .iter()
            .zip(&steps)
            .zip(&params.delta)
            .map(|((b, z), d)| b + d * z)
            .collect();
        params.beta.insert(year, next);
    }
    params
}

/// Generate a full synthetic market from the config.
pub fn generate_dataset(config: &SimConfig) -> Result<SimulatedDataset> {
    config.validate()?;
    let params = evolve_betas(config);
    let (y0, y1) = config.years;
    let n_years = (y1 - y0 + 1) as usize;
    let n_total = n_years * config.companies_per_year;

    let feature_names: Vec<String> =
        config.feature_sampler.iter().map(|s| s.name.clone()).collect();
    let mut company_ids = Vec::with_capacity(n_total);
    for year in y0..=y1 {
        for j in 0..config.companies_per_year {
            company_ids.push(format!("c{year}_{j:04}"));
        }
    }
    let mut features = FeatureMatrix::new(feature_names, company_ids.clone())?;
    let mut histories = Vec::with_capacity(n_total);
    let mut profiles = Vec::with_capacity(n_total);

    let mut idx = 0usize;
    for year in y0..=y1 {
        for _ in 0..config.companies_per_year {
            let company_id = &company_ids[idx];
            let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
            rng.set_stream(idx as u64 + 1);

            let x: Vec<f64> = config.feature_sampler.iter().map(|s| s.dist.sample(&mut rng)).collect();
            for (i, v) in x.iter().enumerate() {
                features.set(i, idx, *v);
            }
            // First round lands uniformly within the founding year; the
            // remaining observation window is measured from it.
            let offset: f64 = rng.gen();
            let t_obs_rel = config.t_obs - (f64::from(year) + offset);

            let profile = company_drift_profile(&x, year, &params)?;
            let grid = PathGrid::new(&profile, t_obs_rel, config.path_step)?;
            let history = sample_history_on_grid(
                company_id,
                year,
                &grid,
                params.delta_level,
                t_obs_rel,
                &mut rng,
            )?;
            histories.push(history);
            profiles.push(profile);
            idx += 1;
        }
    }
    debug_assert_eq!(idx, n_total);
    Ok(SimulatedDataset {
        histories,
        features,
        profiles,
        true_params: params,
    })
}
