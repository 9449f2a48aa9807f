//! Analytic gradient of the log-posterior.
//!
//! Every likelihood term is a function of `(M, S)` with `M = mu0 g`,
//! `S = sigma0_sq g / 2` and `g = G(v0, v)` the integrated shape, so the
//! chain rule needs three pieces per term: the partials in `M` and `S`, the
//! shape-integral partials in `nu` and `tau`, and for density terms the
//! direct `ln f(v)` dependence on `nu` and `tau`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::features::FeatureMatrix;
use crate::fpt::DriftProfile;
use crate::likelihood::{FundingHistory, ModelParams, PriorConfig, EXIT_LEVEL_INDEX, SIGMA0_SQ_FLOOR};
use crate::math::{ln_one_minus_exp, ln_phi, LN_SQRT_2PI};

/// Cap on intermediate exponents in the survival gradient. The ratios grow
/// without bound as survival probability approaches zero; capping keeps the
/// gradient finite (if enormous), which the line search then backs away from.
const EXP_CAP: f64 = 300.0;

/// Gradient of the posterior with respect to the original parameters.
#[derive(Debug, Clone)]
pub(crate) struct ParamGrad {
    pub beta: BTreeMap<i32, Vec<f64>>,
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
    pub nu: f64,
    pub tau: f64,
}

impl ParamGrad {
    fn zeros(params: &ModelParams) -> Self {
        let m = params.num_features();
        ParamGrad {
            beta: params.beta.keys().map(|&y| (y, vec![0.0; m])).collect(),
            gamma: vec![0.0; m],
            delta: vec![0.0; m],
            nu: 0.0,
            tau: 0.0,
        }
    }
}

/// Value and partials of one likelihood term in `(mu0, sigma0_sq, nu, tau)`.
struct TermGrad {
    value: f64,
    d_mu0: f64,
    d_sigma0_sq: f64,
    d_nu: f64,
    d_tau: f64,
}

impl TermGrad {
    fn zero() -> Self {
        TermGrad {
            value: 0.0,
            d_mu0: 0.0,
            d_sigma0_sq: 0.0,
            d_nu: 0.0,
            d_tau: 0.0,
        }
    }
}

/// Partials of `ln pdf(v)` for the passage from `v0` to a barrier `alpha`.
fn log_pdf_grad(v0: f64, v: f64, alpha: f64, p: &DriftProfile) -> TermGrad {
    let (g, dg_nu, dg_tau) = p.shape_integral_partials(v0, v);
    if g <= 0.0 || v <= v0 {
        return TermGrad {
            value: f64::NEG_INFINITY,
            ..TermGrad::zero()
        };
    }
    let m = p.mu0 * g;
    let s = 0.5 * p.sigma0_sq * g;
    let d = alpha - m;
    let value = alpha.ln() + p.sigma0_sq.ln() + p.log_shape(v)
        - crate::fpt::HALF_LN_16PI
        - 1.5 * s.ln()
        - d * d / (4.0 * s);
    let dm = d / (2.0 * s);
    let ds = -1.5 / s + d * d / (4.0 * s * s);
    let d_g = dm * p.mu0 + ds * 0.5 * p.sigma0_sq;
    let (shape_nu, shape_tau) = if v > p.nu {
        (1.0 / p.tau, (v - p.nu) / (p.tau * p.tau))
    } else {
        (0.0, 0.0)
    };
    TermGrad {
        value,
        d_mu0: dm * g,
        d_sigma0_sq: 1.0 / p.sigma0_sq + ds * 0.5 * g,
        d_nu: d_g * dg_nu + shape_nu,
        d_tau: d_g * dg_tau + shape_tau,
    }
}

/// Partials of `ln(1 - CDF(v))` for the same passage problem.
fn log_survival_grad(v0: f64, v: f64, alpha: f64, p: &DriftProfile) -> TermGrad {
    if v <= v0 {
        return TermGrad::zero();
    }
    let (g, dg_nu, dg_tau) = p.shape_integral_partials(v0, v);
    if g <= 0.0 {
        return TermGrad::zero();
    }
    let m = p.mu0 * g;
    let s = 0.5 * p.sigma0_sq * g;
    let rt = (2.0 * s).sqrt();
    let u = (m - alpha) / rt;
    let a = ln_phi(-u);
    let b = m * alpha / s + ln_phi(-(m + alpha) / rt);
    let diff = (b - a).min(-f64::MIN_POSITIVE);
    let ls = a + ln_one_minus_exp(diff);
    // dF/dM = (alpha/S) e^B and
    // dF/dS = alpha phi(u) / (S sqrt(2S)) - (M alpha / S^2) e^B;
    // divide by survival via exponent differences against ls.
    let e_b = (b - ls).min(EXP_CAP).exp();
    let ln_pdf_u = -0.5 * u * u - LN_SQRT_2PI;
    let e_pdf = (ln_pdf_u - ls).min(EXP_CAP).exp();
    let dls_dm = -(alpha / s) * e_b;
    let dls_ds = -(alpha / (s * rt)) * e_pdf + (m * alpha / (s * s)) * e_b;
    let d_g = dls_dm * p.mu0 + dls_ds * 0.5 * p.sigma0_sq;
    TermGrad {
        value: ls,
        d_mu0: dls_dm * g,
        d_sigma0_sq: dls_ds * 0.5 * g,
        d_nu: d_g * dg_nu,
        d_tau: d_g * dg_tau,
    }
}

/// Log-likelihood of one company plus its partials in
/// `(mu0, sigma0_sq, nu, tau)`.
fn company_value_grad(h: &FundingHistory, x: &[f64], params: &ModelParams) -> TermGrad {
    let beta = &params.beta[&h.founding_year];
    let mu0: f64 = beta.iter().zip(x).map(|(b, xi)| b * xi).sum();
    let raw: f64 = params.gamma.iter().zip(x).map(|(g, xi)| g * xi).sum();
    let sigma0_sq = (raw * raw).max(SIGMA0_SQ_FLOOR);
    let p = DriftProfile {
        mu0,
        sigma0_sq,
        nu: params.nu,
        tau: params.tau,
    };
    let mut acc = TermGrad::zero();
    let idx = &h.round_indices;
    let t = &h.round_times;
    for j in 1..idx.len() {
        let gap = params.delta_level * f64::from(idx[j] - idx[j - 1]);
        let term = log_pdf_grad(t[j - 1], t[j], gap, &p);
        acc.value += term.value;
        acc.d_mu0 += term.d_mu0;
        acc.d_sigma0_sq += term.d_sigma0_sq;
        acc.d_nu += term.d_nu;
        acc.d_tau += term.d_tau;
    }
    if *idx.last().expect("validated") < EXIT_LEVEL_INDEX {
        let term = log_survival_grad(*t.last().unwrap(), h.t_obs, params.delta_level, &p);
        acc.value += term.value;
        acc.d_mu0 += term.d_mu0;
        acc.d_sigma0_sq += term.d_sigma0_sq;
        acc.d_nu += term.d_nu;
        acc.d_tau += term.d_tau;
    }
    acc
}

/// Posterior value and gradient in the original parameters.
///
/// Inputs must already be aligned (see `resolve_columns`) and the parameters
/// inside the prior supports. Company terms are computed in parallel and
/// folded in input order.
pub(crate) fn posterior_value_grad(
    histories: &[FundingHistory],
    cols: &[usize],
    features: &FeatureMatrix,
    params: &ModelParams,
    priors: &PriorConfig,
) -> (f64, ParamGrad) {
    let m = params.num_features();
    let per: Vec<TermGrad> = histories
        .par_iter()
        .zip(cols.par_iter())
        .map(|(h, &col)| company_value_grad(h, features.column(col), params))
        .collect();

    let mut value = 0.0;
    let mut grad = ParamGrad::zeros(params);
    for ((h, &col), term) in histories.iter().zip(cols).zip(&per) {
        value += term.value;
        let x = features.column(col);
        let raw: f64 = params.gamma.iter().zip(x).map(|(g, xi)| g * xi).sum();
        let floored = raw * raw < SIGMA0_SQ_FLOOR;
        let beta_g = grad.beta.get_mut(&h.founding_year).expect("year checked");
        for i in 0..m {
            beta_g[i] += term.d_mu0 * x[i];
            if !floored {
                grad.gamma[i] += term.d_sigma0_sq * 2.0 * raw * x[i];
            }
        }
        grad.nu += term.d_nu;
        grad.tau += term.d_tau;
    }

    value += super::log_prior(params, priors);
    add_prior_grad(params, priors, &mut grad);
    (value, grad)
}

fn add_prior_grad(params: &ModelParams, priors: &PriorConfig, grad: &mut ParamGrad) {
    let m = params.num_features();
    let first_year = *params.beta.keys().next().expect("non-empty");
    {
        let first = &params.beta[&first_year];
        let gb = grad.beta.get_mut(&first_year).unwrap();
        for i in 0..m {
            gb[i] -= first[i] / (priors.beta_sd * priors.beta_sd);
        }
    }
    for i in 0..m {
        grad.gamma[i] -= params.gamma[i] / (priors.gamma_sd * priors.gamma_sd);
        grad.delta[i] -= 1.0 / priors.delta_mean;
    }
    let years: Vec<i32> = params.beta.keys().copied().collect();
    for w in years.windows(2) {
        let (y0, y1) = (w[0], w[1]);
        for i in 0..m {
            let step = params.beta[&y1][i] - params.beta[&y0][i];
            let sd = params.delta[i];
            let pull = step / (sd * sd);
            grad.beta.get_mut(&y1).unwrap()[i] -= pull;
            grad.beta.get_mut(&y0).unwrap()[i] += pull;
            grad.delta[i] += step * step / (sd * sd * sd) - 1.0 / sd;
        }
    }
}
