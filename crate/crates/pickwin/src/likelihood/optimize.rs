//! Multi-start quasi-Newton maximisation of the log-posterior.
//!
//! Each restart runs BFGS with a strong-Wolfe line search from a randomised
//! start in the unconstrained coordinates. Restarts use independent seeded
//! RNG streams and are reduced deterministically (best value, ties broken by
//! restart index), so the fitted parameters do not depend on the thread
//! count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::features::FeatureMatrix;
use crate::likelihood::grad::posterior_value_grad;
use crate::likelihood::transform::Reparam;
use crate::likelihood::{
    dataset_log_posterior, FitConfig, FundingHistory, ModelParams, PriorConfig,
};
use crate::{Error, Result};

struct Objective<'a> {
    histories: &'a [FundingHistory],
    cols: Vec<usize>,
    features: &'a FeatureMatrix,
    priors: &'a PriorConfig,
    reparam: Reparam,
}

impl Objective<'_> {
    /// Negated posterior and its gradient. Points outside the `ln tau`
    /// support evaluate to `+inf` so the line search retreats from them
    /// (`nu` stays inside its support by construction).
    fn eval(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let dim = self.reparam.dim();
        let z_tau = z[dim - 1];
        if z.iter().any(|v| !v.is_finite())
            || z_tau <= self.reparam.log_tau_lo
            || z_tau >= self.reparam.log_tau_hi
        {
            return (f64::INFINITY, vec![0.0; dim]);
        }
        let params = self.reparam.unpack(z).expect("dimension is fixed");
        let (value, grad) =
            posterior_value_grad(self.histories, &self.cols, self.features, &params, self.priors);
        if !value.is_finite() {
            return (f64::INFINITY, vec![0.0; dim]);
        }
        let gz = self.reparam.chain_to_unconstrained(&params, &grad);
        (-value, gz.into_iter().map(|v| -v).collect())
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BfgsOutcome {
    pub z: Vec<f64>,
    pub value: f64,
    /// Whether the gradient tolerance was met (multi-start keeps the best
    /// value either way; tests assert on this).
    #[cfg_attr(not(test), allow(dead_code))]
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn identity(h: &mut [f64], n: usize, scale: f64) {
    h.fill(0.0);
    for i in 0..n {
        h[i * n + i] = scale;
    }
}

/// d = -H g
fn neg_mat_vec(h: &[f64], g: &[f64], n: usize) -> Vec<f64> {
    let mut d = vec![0.0; n];
    for i in 0..n {
        let row = &h[i * n..(i + 1) * n];
        d[i] = -dot(row, g);
    }
    d
}

/// Inverse-Hessian BFGS update: H <- (I - r s y')H(I - r y s') + r s s'.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64, n: usize) {
    let rho = 1.0 / sy;
    let mut hy = vec![0.0; n];
    for i in 0..n {
        hy[i] = dot(&h[i * n..(i + 1) * n], y);
    }
    let yhy = dot(y, &hy);
    let c = rho * rho * yhy + rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + c * s[i] * s[j];
        }
    }
}

#[derive(Clone)]
struct LinePoint {
    a: f64,
    f: f64,
    dg: f64,
    x: Vec<f64>,
    g: Vec<f64>,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;

/// Strong-Wolfe line search (bracket then bisection zoom). Non-finite trial
/// values are treated as failed sufficient decrease so the search backs
/// toward the feasible region. Returns a point with both Wolfe conditions,
/// or, as a fallback, the best sufficient-decrease point found.
fn wolfe_search<F>(f: &F, x: &[f64], f0: f64, g0: &[f64], d: &[f64]) -> Option<LinePoint>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let dphi0 = dot(g0, d);
    if !(dphi0 < 0.0) {
        return None;
    }
    let eval = |a: f64| -> LinePoint {
        let xa: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + a * di).collect();
        let (fa, ga) = f(&xa);
        let dg = if fa.is_finite() { dot(&ga, d) } else { f64::INFINITY };
        LinePoint { a, f: fa, dg, x: xa, g: ga }
    };

    let start = LinePoint {
        a: 0.0,
        f: f0,
        dg: dphi0,
        x: x.to_vec(),
        g: g0.to_vec(),
    };
    let mut prev = start;
    let mut a = 1.0;
    for i in 0..30 {
        let p = eval(a);
        if !p.f.is_finite() || p.f > f0 + C1 * a * dphi0 || (i > 0 && p.f >= prev.f) {
            return zoom(&eval, f0, dphi0, prev, p);
        }
        if p.dg.abs() <= -C2 * dphi0 {
            return Some(p);
        }
        if p.dg >= 0.0 {
            return zoom(&eval, f0, dphi0, p, prev);
        }
        a = (2.0 * a).min(1e6);
        if a <= p.a {
            break; // step saturated while still descending
        }
        prev = p;
    }
    None
}

fn zoom<E>(eval: &E, f0: f64, dphi0: f64, mut lo: LinePoint, mut hi: LinePoint) -> Option<LinePoint>
where
    E: Fn(f64) -> LinePoint,
{
    for _ in 0..40 {
        if (hi.a - lo.a).abs() <= 1e-14 * (1.0 + lo.a.abs()) {
            break;
        }
        let a = 0.5 * (lo.a + hi.a);
        let p = eval(a);
        if !p.f.is_finite() || p.f > f0 + C1 * a * dphi0 || p.f >= lo.f {
            hi = p;
        } else {
            if p.dg.abs() <= -C2 * dphi0 {
                return Some(p);
            }
            if p.dg * (hi.a - lo.a) >= 0.0 {
                hi = lo.clone();
            }
            lo = p;
        }
    }
    // Curvature condition unattainable in the bracket; accept plain
    // sufficient decrease rather than discarding the progress.
    if lo.a > 0.0 && lo.f < f0 {
        Some(lo)
    } else {
        None
    }
}

pub(crate) fn bfgs_minimize<F>(f: &F, x0: Vec<f64>, max_iter: usize, grad_tol: f64) -> BfgsOutcome
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    if !fx.is_finite() {
        return BfgsOutcome {
            z: x,
            value: fx,
            converged: false,
        };
    }
    let mut h = vec![0.0; n * n];
    identity(&mut h, n, 1.0);
    let mut scaled = false;
    for _ in 0..max_iter {
        if norm_inf(&g) < grad_tol {
            break;
        }
        let mut d = neg_mat_vec(&h, &g, n);
        let slope = dot(&d, &g);
        if !slope.is_finite() || slope >= 0.0 {
            // Curvature information went bad; restart from steepest descent.
            identity(&mut h, n, 1.0);
            scaled = false;
            for (di, gi) in d.iter_mut().zip(&g) {
                *di = -gi;
            }
        }
        let Some(step) = wolfe_search(f, &x, fx, &g, &d) else {
            break;
        };
        let s: Vec<f64> = step.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = step.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * norm2(&s) * norm2(&y) {
            if !scaled {
                // Rescale before the first update so H starts near the true
                // inverse-Hessian magnitude.
                let yy = dot(&y, &y);
                if yy > 0.0 {
                    identity(&mut h, n, sy / yy);
                }
                scaled = true;
            }
            bfgs_update(&mut h, &s, &y, sy, n);
        }
        x = step.x;
        fx = step.f;
        g = step.g;
    }
    BfgsOutcome {
        z: x,
        value: fx,
        converged: norm_inf(&g) < grad_tol,
    }
}

fn random_start<R: Rng>(reparam: &Reparam, priors: &PriorConfig, rng: &mut R) -> Vec<f64> {
    let m = reparam.num_features;
    let beta_scale = priors.beta_sd / 20.0;
    let gamma_scale = priors.gamma_sd / 20.0;
    let mut z = Vec::with_capacity(reparam.dim());
    for _ in 0..reparam.years.len() * m {
        z.push(rng.gen_range(-1.0..1.0) * beta_scale);
    }
    for _ in 0..m {
        z.push(rng.gen_range(-1.0..1.0) * gamma_scale);
    }
    for _ in 0..m {
        z.push(rng.gen_range(-2.0..2.0));
    }
    let (lo, hi) = (reparam.nu_lo, reparam.nu_hi);
    let margin = 1e-6 * (hi - lo);
    let nu = rng.gen_range(1.0f64..15.0).clamp(lo + margin, hi - margin);
    z.push(crate::math::logit((nu - lo) / (hi - lo)));
    let (tlo, thi) = (reparam.log_tau_lo, reparam.log_tau_hi);
    z.push(rng.gen_range(0.0f64..3.0).clamp(tlo + 1e-6, thi - 1e-6));
    z
}

/// Fit the model by MAP estimation with multi-start BFGS.
///
/// Coefficient vectors are created for the contiguous span of founding years
/// seen in the data. Returns the fitted parameters and the posterior value at
/// them; errors if every restart fails to reach a finite posterior.
pub fn fit(
    histories: &[FundingHistory],
    features: &FeatureMatrix,
    priors: &PriorConfig,
    config: &FitConfig,
    delta_level: f64,
) -> Result<(ModelParams, f64)> {
    config.validate()?;
    priors.validate()?;
    if histories.is_empty() {
        return Err(Error::invalid("dataset", "no funding histories"));
    }
    if !(delta_level > 0.0) || !delta_level.is_finite() {
        return Err(Error::invalid(
            "delta_level",
            format!("must be a positive finite number, got {delta_level}"),
        ));
    }
    if !histories.iter().any(|h| h.round_indices.len() >= 2) {
        return Err(Error::invalid(
            "dataset",
            "no observed inter-round transition anywhere; the likelihood cannot \
             identify the drift",
        ));
    }
    if !features.is_complete() {
        return Err(Error::invalid(
            "feature matrix",
            "contains missing entries; impute them before fitting",
        ));
    }
    let mut cols = Vec::with_capacity(histories.len());
    for h in histories {
        h.validate()?;
        cols.push(features.column_index(&h.company_id).ok_or_else(|| {
            Error::UnknownCompany {
                company_id: h.company_id.clone(),
                from: "feature matrix",
            }
        })?);
    }
    let y_min = histories.iter().map(|h| h.founding_year).min().unwrap();
    let y_max = histories.iter().map(|h| h.founding_year).max().unwrap();
    let years: Vec<i32> = (y_min..=y_max).collect();
    let reparam = Reparam::new(years, features.num_features(), delta_level, priors);
    let objective = Objective {
        histories,
        cols,
        features,
        priors,
        reparam: reparam.clone(),
    };

    let outcomes: Vec<BfgsOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
            rng.set_stream(r as u64 + 1);
            let z0 = random_start(&reparam, priors, &mut rng);
            bfgs_minimize(
                &|z: &[f64]| objective.eval(z),
                z0,
                config.max_iterations,
                config.gradient_tolerance,
            )
        })
        .collect();

    let best = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.value.is_finite())
        .min_by(|(ra, a), (rb, b)| {
            a.value
                .partial_cmp(&b.value)
                .expect("finite values compare")
                .then(ra.cmp(rb))
        });
    let Some((_, best)) = best else {
        return Err(Error::FitFailed {
            restarts: config.restarts,
            best: None,
        });
    };
    let params = reparam.unpack(&best.z)?;
    let value = dataset_log_posterior(histories, features, &params, priors)?;
    Ok((params, value))
}
