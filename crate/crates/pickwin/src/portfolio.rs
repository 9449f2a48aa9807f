//! Picking-winners portfolio construction.
//!
//! The objective `U(S)` is the probability that at least one company in the
//! portfolio `S` exits. Under independence it collapses to
//! `1 - prod (1 - p_i)`; dependence induced by the shared prediction-year
//! coefficient draw is handled by averaging that product over Monte Carlo
//! draws of the coefficients. `U` is submodular, so greedy selection carries
//! the classic `1 - 1/e` guarantee; exact brute-force oracles over small
//! finite event spaces back the theory tests. The expected-log-return
//! objective `V(S)` and the closed-form bound on the gap between the two
//! optimisers complete the set.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fpt::{fpt_cdf_limit, DriftProfile};
use crate::likelihood::{ModelParams, EXIT_LEVEL_INDEX, SIGMA0_SQ_FLOOR};
use crate::{Error, Result};

/// Riemann zeta at 3 (Apery's constant).
pub const ZETA_3: f64 = 1.202_056_903_159_594_3;

/// Hard cap on exhaustive subset enumeration.
pub const BRUTE_FORCE_EVENT_CAP: usize = 20;

// ---------------------------------------------------------------------------
// Finite event spaces: exact ground truth for the theory tests.
// ---------------------------------------------------------------------------

/// A finite probability space together with `m` events ("company `i` wins"),
/// each given by the set of outcomes where it occurs.
#[derive(Debug, Clone)]
pub struct FiniteEventSpace {
    outcome_probabilities: Vec<f64>,
    event_membership: Vec<Vec<usize>>,
}

impl FiniteEventSpace {
    pub fn new(outcome_probabilities: Vec<f64>, event_membership: Vec<Vec<usize>>) -> Result<Self> {
        if outcome_probabilities.is_empty() {
            return Err(Error::invalid("event space", "needs at least one outcome"));
        }
        if outcome_probabilities.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::invalid(
                "event space",
                "outcome probabilities must be non-negative finite numbers",
            ));
        }
        let total: f64 = outcome_probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "event space",
                format!("outcome probabilities sum to {total}, expected 1 within 1e-12"),
            ));
        }
        let n = outcome_probabilities.len();
        let mut membership = Vec::with_capacity(event_membership.len());
        for (e, outcomes) in event_membership.into_iter().enumerate() {
            if outcomes.iter().any(|&w| w >= n) {
                return Err(Error::invalid(
                    "event space",
                    format!("event {e} references an outcome index beyond {n}"),
                ));
            }
            let mut sorted = outcomes;
            sorted.sort_unstable();
            sorted.dedup();
            membership.push(sorted);
        }
        Ok(FiniteEventSpace {
            outcome_probabilities,
            event_membership: membership,
        })
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcome_probabilities.len()
    }

    pub fn num_events(&self) -> usize {
        self.event_membership.len()
    }

    pub fn outcome_probabilities(&self) -> &[f64] {
        &self.outcome_probabilities
    }

    fn check_subset(&self, subset: &[usize]) -> Result<()> {
        let m = self.num_events();
        let mut seen = vec![false; m];
        for &i in subset {
            if i >= m {
                return Err(Error::invalid(
                    "subset",
                    format!("event index {i} out of range for {m} events"),
                ));
            }
            if seen[i] {
                return Err(Error::invalid("subset", format!("event index {i} repeated")));
            }
            seen[i] = true;
        }
        Ok(())
    }

    /// Outcome-level coverage indicator of a subset of events.
    pub fn coverage(&self, subset: &[usize]) -> Vec<bool> {
        let mut covered = vec![false; self.num_outcomes()];
        for &i in subset {
            for &w in &self.event_membership[i] {
                covered[w] = true;
            }
        }
        covered
    }

    /// `U(S)`: probability that at least one event in the subset occurs.
    /// Summed over outcomes in index order.
    pub fn union_prob(&self, subset: &[usize]) -> Result<f64> {
        self.check_subset(subset)?;
        let covered = self.coverage(subset);
        Ok(self
            .outcome_probabilities
            .iter()
            .zip(&covered)
            .filter(|(_, c)| **c)
            .map(|(p, _)| *p)
            .sum())
    }

    /// Marginal gain of adding `event` on top of an existing coverage,
    /// accumulated directly over the newly covered outcomes. Because the sum
    /// runs over a superset of outcomes whenever the prior coverage is
    /// smaller, floating-point marginal gains inherit the submodular
    /// ordering exactly.
    pub fn marginal_gain(&self, covered: &[bool], event: usize) -> f64 {
        self.event_membership[event]
            .iter()
            .filter(|&&w| !covered[w])
            .map(|&w| self.outcome_probabilities[w])
            .sum()
    }
}

// ---------------------------------------------------------------------------
// Independent objective and exit probabilities.
// ---------------------------------------------------------------------------

/// `U = 1 - prod(1 - p_i)` for independent win probabilities.
pub fn union_prob_independent(probs: &[f64]) -> Result<f64> {
    for &p in probs {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::invalid(
                "win probability",
                format!("must lie in [0,1], got {p}"),
            ));
        }
    }
    Ok(1.0 - probs.iter().map(|p| 1.0 - p).product::<f64>())
}

/// Exit probability of one company under a coefficient draw: the probability
/// that the latent process ever climbs the full exit distance `7 * delta_level`.
pub fn exit_probability(features: &[f64], model: &ModelParams, beta_draw: &[f64]) -> Result<f64> {
    let m = model.num_features();
    if features.len() != m {
        return Err(Error::DimensionMismatch {
            what: "features",
            expected: m,
            got: features.len(),
        });
    }
    if beta_draw.len() != m {
        return Err(Error::DimensionMismatch {
            what: "beta draw",
            expected: m,
            got: beta_draw.len(),
        });
    }
    let mu0: f64 = beta_draw.iter().zip(features).map(|(b, x)| b * x).sum();
    let raw: f64 = model.gamma.iter().zip(features).map(|(g, x)| g * x).sum();
    let sigma0_sq = (raw * raw).max(SIGMA0_SQ_FLOOR);
    let profile = DriftProfile::new(mu0, sigma0_sq, model.nu, model.tau)?;
    fpt_cdf_limit(&profile, 0.0, f64::from(EXIT_LEVEL_INDEX) * model.delta_level)
}

// ---------------------------------------------------------------------------
// Candidates and Monte Carlo draws.
// ---------------------------------------------------------------------------

/// Companies founded in the prediction year `founding_year`, scored with a
/// model fitted through `founding_year - 1`.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    company_ids: Vec<String>,
    features: Vec<Vec<f64>>,
    founding_year: i32,
    model: ModelParams,
}

impl CandidateSet {
    /// Unlike the estimation-side validation, `delta` entries of zero are
    /// accepted here: a degenerate random walk is a meaningful limit for the
    /// correlated objective (it collapses onto the independent one).
    pub fn new(
        company_ids: Vec<String>,
        features: Vec<Vec<f64>>,
        founding_year: i32,
        model: ModelParams,
    ) -> Result<Self> {
        if company_ids.is_empty() {
            return Err(Error::invalid("candidate set", "no candidates"));
        }
        if company_ids.len() != features.len() {
            return Err(Error::invalid(
                "candidate set",
                format!(
                    "{} company ids but {} feature vectors",
                    company_ids.len(),
                    features.len()
                ),
            ));
        }
        let mut sorted = company_ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != company_ids.len() {
            return Err(Error::invalid("candidate set", "duplicate company ids"));
        }
        let m = model.num_features();
        if m == 0 {
            return Err(Error::invalid("candidate set", "model has no features"));
        }
        for (id, x) in company_ids.iter().zip(&features) {
            if x.len() != m {
                return Err(Error::DimensionMismatch {
                    what: "candidate features",
                    expected: m,
                    got: x.len(),
                });
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(
                    "candidate set",
                    format!("company {id} has a non-finite feature"),
                ));
            }
        }
        if model.delta.len() != m {
            return Err(Error::DimensionMismatch {
                what: "delta",
                expected: m,
                got: model.delta.len(),
            });
        }
        if model.delta.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::invalid(
                "candidate set",
                "delta entries must be non-negative finite numbers",
            ));
        }
        if model.beta.values().any(|b| b.len() != m) {
            return Err(Error::DimensionMismatch {
                what: "beta",
                expected: m,
                got: model.beta.values().map(Vec::len).find(|&l| l != m).unwrap_or(0),
            });
        }
        if !(model.nu >= 0.0) || !(model.tau > 0.0) || !(model.delta_level > 0.0) {
            return Err(Error::invalid(
                "candidate set",
                "model needs nu >= 0, tau > 0 and delta_level > 0",
            ));
        }
        if !model.beta.contains_key(&(founding_year - 1)) {
            return Err(Error::MissingYear {
                year: founding_year - 1,
            });
        }
        Ok(CandidateSet {
            company_ids,
            features,
            founding_year,
            model,
        })
    }

    pub fn len(&self) -> usize {
        self.company_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.company_ids.is_empty()
    }

    pub fn company_ids(&self) -> &[String] {
        &self.company_ids
    }

    pub fn features(&self, i: usize) -> &[f64] {
        &self.features[i]
    }

    pub fn founding_year(&self) -> i32 {
        self.founding_year
    }

    pub fn model(&self) -> &ModelParams {
        &self.model
    }

    /// Coefficient vector of the last trained year, `founding_year - 1`.
    pub fn prior_beta(&self) -> &[f64] {
        &self.model.beta[&(self.founding_year - 1)]
    }

    /// Point-estimate exit probabilities (drift taken at the mean of the
    /// prediction-year coefficients, which is the prior-year vector).
    pub fn point_probs(&self) -> Result<Vec<f64>> {
        let base = self.prior_beta().to_vec();
        (0..self.len())
            .into_par_iter()
            .map(|i| exit_probability(&self.features[i], &self.model, &base))
            .collect()
    }
}

/// Per-candidate exit probabilities under a fixed set of coefficient draws
/// (common random numbers): `probs[candidate][draw]`.
#[derive(Debug, Clone)]
pub struct DrawSet {
    draws: usize,
    probs: Vec<Vec<f64>>,
}

impl DrawSet {
    /// Draw `draws` coefficient vectors `beta ~ N(prior_beta, diag(delta^2))`
    /// from the seeded RNG (draw-major order), then score every candidate
    /// under every draw. Candidate scoring parallelises; the draw matrix is
    /// generated sequentially so results are identical for any thread count.
    pub fn generate(candidates: &CandidateSet, draws: usize, seed: u64) -> Result<Self> {
        if draws == 0 {
            return Err(Error::invalid("mc config", "draws must be at least 1"));
        }
        let m = candidates.model.num_features();
        let base = candidates.prior_beta();
        let delta = &candidates.model.delta;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut betas = vec![0.0f64; draws * m];
        for d in 0..draws {
            for i in 0..m {
                let z: f64 = rng.sample(StandardNormal);
                betas[d * m + i] = base[i] + delta[i] * z;
            }
        }
        let probs: Vec<Vec<f64>> = (0..candidates.len())
            .into_par_iter()
            .map(|c| {
                let x = &candidates.features[c];
                (0..draws)
                    .map(|d| exit_probability(x, &candidates.model, &betas[d * m..(d + 1) * m]))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(DrawSet { draws, probs })
    }

    pub fn draws(&self) -> usize {
        self.draws
    }

    pub fn candidate_probs(&self, i: usize) -> &[f64] {
        &self.probs[i]
    }

    /// Mean exit probability per candidate over the draws.
    pub fn mean_probs(&self) -> Vec<f64> {
        self.probs
            .iter()
            .map(|row| row.iter().sum::<f64>() / self.draws as f64)
            .collect()
    }

    /// `U(subset)` under these draws.
    pub fn union_prob(&self, subset: &[usize]) -> f64 {
        if subset.is_empty() {
            return 0.0;
        }
        let mut acc = 0.0;
        for d in 0..self.draws {
            let mut lose = 1.0;
            for &i in subset {
                lose *= 1.0 - self.probs[i][d];
            }
            acc += lose;
        }
        1.0 - acc / self.draws as f64
    }
}

/// Correlated picking-winners objective: the probability of at least one exit
/// with the prediction-year coefficient integrated out over `draws` Monte
/// Carlo draws.
pub fn union_prob_correlated(
    subset: &[usize],
    candidates: &CandidateSet,
    draws: usize,
    rng_seed: u64,
) -> Result<f64> {
    let n = candidates.len();
    let mut seen = vec![false; n];
    for &i in subset {
        if i >= n {
            return Err(Error::invalid(
                "subset",
                format!("candidate index {i} out of range for {n} candidates"),
            ));
        }
        if seen[i] {
            return Err(Error::invalid("subset", format!("candidate index {i} repeated")));
        }
        seen[i] = true;
    }
    let ds = DrawSet::generate(candidates, draws, rng_seed)?;
    Ok(ds.union_prob(subset))
}

// ---------------------------------------------------------------------------
// Greedy construction.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Independent,
    Correlated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub draws: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            draws: 50_000,
            seed: 0,
        }
    }
}

/// A greedily built portfolio: ids in selection order, the objective value
/// after each addition, and each addition's marginal gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Portfolio {
    pub ordered_ids: Vec<String>,
    pub objective_trace: Vec<f64>,
    pub marginal_gains: Vec<f64>,
}

/// Greedy maximisation of the picking-winners objective.
///
/// Each step adds the candidate with the largest marginal gain; ties break
/// toward the ascending company id. The correlated objective evaluates every
/// candidate against one fixed draw set (common random numbers), so the
/// selection sequence is deterministic given the seed.
pub fn greedy_portfolio(
    candidates: &CandidateSet,
    k: usize,
    objective: ObjectiveKind,
    mc: &McConfig,
) -> Result<Portfolio> {
    let n = candidates.len();
    if k > n {
        return Err(Error::invalid(
            "portfolio size",
            format!("k = {k} exceeds the {n} candidates"),
        ));
    }
    // Scan order for ties: ascending company id.
    let mut id_order: Vec<usize> = (0..n).collect();
    id_order.sort_by(|&a, &b| candidates.company_ids[a].cmp(&candidates.company_ids[b]));

    let mut selected = vec![false; n];
    let mut portfolio = Portfolio {
        ordered_ids: Vec::with_capacity(k),
        objective_trace: Vec::with_capacity(k),
        marginal_gains: Vec::with_capacity(k),
    };

    match objective {
        ObjectiveKind::Independent => {
            let probs = candidates.point_probs()?;
            let mut survive = 1.0f64;
            let mut current = 0.0f64;
            for _ in 0..k {
                let mut best: Option<(usize, f64)> = None;
                for &i in &id_order {
                    if selected[i] {
                        continue;
                    }
                    let gain = survive * probs[i];
                    if best.is_none_or(|(_, bg)| gain > bg) {
                        best = Some((i, gain));
                    }
                }
                let (i, gain) = best.expect("k <= n leaves a candidate");
                selected[i] = true;
                survive *= 1.0 - probs[i];
                current += gain;
                portfolio.ordered_ids.push(candidates.company_ids[i].clone());
                portfolio.objective_trace.push(current);
                portfolio.marginal_gains.push(gain);
            }
        }
        ObjectiveKind::Correlated => {
            let ds = DrawSet::generate(candidates, mc.draws, mc.seed)?;
            let d = ds.draws as f64;
            let mut survive = vec![1.0f64; ds.draws];
            let mut current = 0.0f64;
            for _ in 0..k {
                // Marginal gains for all remaining candidates, evaluated in
                // parallel and reduced in id order.
                let gains: Vec<Option<f64>> = (0..n)
                    .into_par_iter()
                    .map(|i| {
                        if selected[i] {
                            return None;
                        }
                        let row = ds.candidate_probs(i);
                        let s: f64 = survive.iter().zip(row).map(|(sv, p)| sv * p).sum();
                        Some(s / d)
                    })
                    .collect();
                let mut best: Option<(usize, f64)> = None;
                for &i in &id_order {
                    if let Some(gain) = gains[i] {
                        if best.is_none_or(|(_, bg)| gain > bg) {
                            best = Some((i, gain));
                        }
                    }
                }
                let (i, gain) = best.expect("k <= n leaves a candidate");
                selected[i] = true;
                for (sv, p) in survive.iter_mut().zip(ds.candidate_probs(i)) {
                    *sv *= 1.0 - p;
                }
                current += gain;
                portfolio.ordered_ids.push(candidates.company_ids[i].clone());
                portfolio.objective_trace.push(current);
                portfolio.marginal_gains.push(gain);
            }
        }
    }
    Ok(portfolio)
}

// ---------------------------------------------------------------------------
// Exact oracles.
// ---------------------------------------------------------------------------

/// Win model for exhaustive search: independent marginal probabilities or an
/// explicit finite event space.
#[derive(Debug, Clone, Copy)]
pub enum WinModel<'a> {
    Independent(&'a [f64]),
    EventSpace(&'a FiniteEventSpace),
}

impl WinModel<'_> {
    fn num_events(&self) -> usize {
        match self {
            WinModel::Independent(p) => p.len(),
            WinModel::EventSpace(s) => s.num_events(),
        }
    }

    fn union_prob(&self, subset: &[usize]) -> Result<f64> {
        match self {
            WinModel::Independent(p) => {
                let chosen: Vec<f64> = subset.iter().map(|&i| p[i]).collect();
                union_prob_independent(&chosen)
            }
            WinModel::EventSpace(s) => s.union_prob(subset),
        }
    }
}

/// Greedy maximisation of `U(S)` directly on a win model: each step adds the
/// event with the largest marginal gain, ties breaking toward the smallest
/// index. Returns the selection order and the objective of the final set,
/// evaluated through the same route as [`brute_force_portfolio`] so the two
/// are directly comparable.
pub fn greedy_win_model(model: &WinModel, k: usize) -> Result<(Vec<usize>, f64)> {
    let m = model.num_events();
    if k > m {
        return Err(Error::invalid(
            "portfolio size",
            format!("k = {k} exceeds the {m} events"),
        ));
    }
    if let WinModel::Independent(p) = model {
        for &x in *p {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::invalid(
                    "win probability",
                    format!("must lie in [0,1], got {x}"),
                ));
            }
        }
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut selected = vec![false; m];
    // Independent state: survival product. Event-space state: outcome coverage.
    let mut survive = 1.0f64;
    let mut covered = match model {
        WinModel::EventSpace(s) => vec![false; s.num_outcomes()],
        WinModel::Independent(_) => Vec::new(),
    };
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..m {
            if selected[i] {
                continue;
            }
            let gain = match model {
                WinModel::Independent(p) => survive * p[i],
                WinModel::EventSpace(s) => s.marginal_gain(&covered, i),
            };
            if best.is_none_or(|(_, bg)| gain > bg) {
                best = Some((i, gain));
            }
        }
        let (i, _) = best.expect("k <= m leaves an event");
        selected[i] = true;
        match model {
            WinModel::Independent(p) => survive *= 1.0 - p[i],
            WinModel::EventSpace(s) => {
                for (c, now) in covered.iter_mut().zip(s.coverage(&[i])) {
                    *c = *c || now;
                }
            }
        }
        chosen.push(i);
    }
    let value = model.union_prob(&chosen)?;
    Ok((chosen, value))
}

fn for_each_combination<F: FnMut(&[usize])>(n: usize, k: usize, mut f: F) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    if k == 0 {
        f(&idx);
        return;
    }
    loop {
        f(&idx);
        let mut i = k as isize - 1;
        while i >= 0 && idx[i as usize] == n - k + i as usize {
            i -= 1;
        }
        if i < 0 {
            return;
        }
        let i = i as usize;
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn check_brute_force_size(m: usize, k: usize) -> Result<()> {
    if m > BRUTE_FORCE_EVENT_CAP {
        return Err(Error::TooManyEvents {
            limit: BRUTE_FORCE_EVENT_CAP,
            got: m,
        });
    }
    if k > m {
        return Err(Error::invalid(
            "portfolio size",
            format!("k = {k} exceeds the {m} events"),
        ));
    }
    Ok(())
}

/// Exact maximiser of `U(S)` over all `C(m, k)` subsets. The first subset in
/// lexicographic order is kept among exact ties.
pub fn brute_force_portfolio(model: &WinModel, k: usize) -> Result<(Vec<usize>, f64)> {
    let m = model.num_events();
    check_brute_force_size(m, k)?;
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut err = None;
    for_each_combination(m, k, |subset| {
        if err.is_some() {
            return;
        }
        match model.union_prob(subset) {
            Ok(u) => {
                if best.as_ref().is_none_or(|(_, bu)| u > *bu) {
                    best = Some((subset.to_vec(), u));
                }
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(best.expect("k <= m yields at least one subset"))
}

/// Exact maximiser of the expected-log-return objective `V(S)`.
pub fn brute_force_log_optimal(
    space: &FiniteEventSpace,
    k: usize,
    a: f64,
    b: f64,
) -> Result<(Vec<usize>, f64)> {
    let m = space.num_events();
    check_brute_force_size(m, k)?;
    if k == 0 {
        return Err(Error::invalid("portfolio size", "log-return needs a nonempty subset"));
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut err = None;
    for_each_combination(m, k, |subset| {
        if err.is_some() {
            return;
        }
        match log_return_objective(space, subset, a, b) {
            Ok(v) => {
                if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
                    best = Some((subset.to_vec(), v));
                }
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(best.expect("nonempty enumeration"))
}

// ---------------------------------------------------------------------------
// Log-return objective.
// ---------------------------------------------------------------------------

fn check_returns(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0) || !(b > a) || !b.is_finite() {
        return Err(Error::invalid(
            "returns",
            format!("need 0 < a < b finite, got a = {a}, b = {b}"),
        ));
    }
    Ok(())
}

/// Expected log return of an equal-weight portfolio over the subset: each
/// member pays `b` on its event and `a` otherwise.
pub fn log_return_objective(
    space: &FiniteEventSpace,
    subset: &[usize],
    a: f64,
    b: f64,
) -> Result<f64> {
    check_returns(a, b)?;
    space.check_subset(subset)?;
    if subset.is_empty() {
        return Err(Error::invalid("subset", "log-return needs a nonempty subset"));
    }
    let k = subset.len() as f64;
    let mut winners = vec![0usize; space.num_outcomes()];
    for &i in subset {
        for &w in &space.event_membership[i] {
            winners[w] += 1;
        }
    }
    Ok(space
        .outcome_probabilities
        .iter()
        .zip(&winners)
        .map(|(p, &q)| p * ((q as f64 * b + (k - q as f64) * a) / k).ln())
        .sum())
}

/// The same objective expressed through the tail probabilities
/// `P(Y_q) = P(at least q winners)`:
/// `ln a + sum_q P(Y_q) ln(1 + (b - a) / ((q-1) b + (k-q+1) a))`.
/// Kept as an independent route for cross-checking.
pub fn log_return_objective_tail_form(
    space: &FiniteEventSpace,
    subset: &[usize],
    a: f64,
    b: f64,
) -> Result<f64> {
    check_returns(a, b)?;
    space.check_subset(subset)?;
    if subset.is_empty() {
        return Err(Error::invalid("subset", "log-return needs a nonempty subset"));
    }
    let k = subset.len();
    let mut winners = vec![0usize; space.num_outcomes()];
    for &i in subset {
        for &w in &space.event_membership[i] {
            winners[w] += 1;
        }
    }
    let mut v = a.ln();
    for q in 1..=k {
        let tail: f64 = space
            .outcome_probabilities
            .iter()
            .zip(&winners)
            .filter(|(_, &wq)| wq >= q)
            .map(|(p, _)| *p)
            .sum();
        let qf = q as f64;
        let kf = k as f64;
        v += tail * (1.0 + (b - a) / ((qf - 1.0) * b + (kf - qf + 1.0) * a)).ln();
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// The weak-dependence bound.
// ---------------------------------------------------------------------------

/// Closed-form bound on the relative gap between the picking-winners optimum
/// and the log-optimal portfolio under `lambda`-bounded dependence:
/// `2 zeta(3) lambda k p (1-p) / [ln(1 + (b-a)/(k a)) (1-lambda) (1-(1-p)^k)]`.
pub fn theorem5_bound(lambda: f64, k: usize, p: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::invalid(
            "lambda",
            format!("must lie in [0, 1), got {lambda}"),
        ));
    }
    if k == 0 {
        return Err(Error::invalid("portfolio size", "k must be at least 1"));
    }
    let kf = k as f64;
    if !(p > 0.0) || p > 1.0 / kf {
        return Err(Error::invalid(
            "win probability",
            format!("the bound assumes 0 < p <= 1/k = {}, got {p}", 1.0 / kf),
        ));
    }
    check_returns(a, b)?;
    let numerator = 2.0 * ZETA_3 * lambda * kf * p * (1.0 - p);
    let denominator =
        (1.0 + (b - a) / (kf * a)).ln() * (1.0 - lambda) * (1.0 - (1.0 - p).powi(k as i32));
    Ok(numerator / denominator)
}

// ---------------------------------------------------------------------------
// Performance curves.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub size: usize,
    pub exits: usize,
    pub random_baseline: f64,
    pub perfect: usize,
}

/// Portfolio size versus cumulative exits, with the random-selection line
/// (size times the overall exit fraction of the market) and the perfect line
/// (slope one) alongside.
pub fn performance_curve(
    portfolio: &Portfolio,
    outcomes: &BTreeMap<String, bool>,
) -> Result<Vec<CurvePoint>> {
    for id in &portfolio.ordered_ids {
        if !outcomes.contains_key(id) {
            return Err(Error::UnknownCompany {
                company_id: id.clone(),
                from: "outcome labels",
            });
        }
    }
    if outcomes.is_empty() {
        return Err(Error::invalid("outcomes", "no outcome labels"));
    }
    let exit_fraction =
        outcomes.values().filter(|e| **e).count() as f64 / outcomes.len() as f64;
    let mut exits = 0usize;
    let mut curve = Vec::with_capacity(portfolio.ordered_ids.len());
    for (s, id) in portfolio.ordered_ids.iter().enumerate() {
        if outcomes[id] {
            exits += 1;
        }
        let size = s + 1;
        curve.push(CurvePoint {
            size,
            exits,
            random_baseline: size as f64 * exit_fraction,
            perfect: size,
        });
    }
    Ok(curve)
}
