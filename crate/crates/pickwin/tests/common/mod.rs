//! Independent oracles shared by the integration tests: plain quadrature, the
//! classical constant-coefficient passage formulas, a Brownian-bridge
//! corrected Monte Carlo passage simulator, and random event-space builders.
//!
//! None of these reuse the library's closed-form branches, so agreement
//! between the two sides is evidence rather than tautology.

#![allow(dead_code)] // each test binary uses its own subset

use std::f64::consts::FRAC_1_SQRT_2;

use pickwin::portfolio::FiniteEventSpace;
use rand::rngs::StdRng;
use rand::Rng;
use rand_distr::StandardNormal;

/// Standard normal CDF straight from the complementary error function.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Composite Simpson rule over `2 * half_panels` subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, half_panels: usize) -> f64 {
    assert!(b >= a && half_panels > 0);
    if a == b {
        return 0.0;
    }
    let m = 2 * half_panels;
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// The drift/diffusion time profile written straight from its definition.
pub fn shape_direct(nu: f64, tau: f64, t: f64) -> f64 {
    if t <= nu {
        1.0
    } else {
        (-(t - nu) / tau).exp()
    }
}

/// Numerically integrated clock `G(v0, v)`: Simpson on each side of the kink,
/// so the only approximation is quadrature of a smooth exponential.
pub fn clock_quadrature(nu: f64, tau: f64, v0: f64, v: f64, half_panels: usize) -> f64 {
    let f = |t: f64| shape_direct(nu, tau, t);
    if v <= nu || v0 >= nu {
        simpson(f, v0, v, half_panels)
    } else {
        simpson(f, v0, nu, half_panels) + simpson(f, nu, v, half_panels)
    }
}

/// Classical first-passage CDF of a constant-coefficient Brownian motion with
/// drift `mu`, variance `sigma_sq`, and barrier `alpha > 0`, at time `t`.
pub fn constant_passage_cdf(mu: f64, sigma_sq: f64, alpha: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let sd = (sigma_sq * t).sqrt();
    norm_cdf((mu * t - alpha) / sd)
        + (2.0 * mu * alpha / sigma_sq).exp() * norm_cdf((-mu * t - alpha) / sd)
}

/// Inverse-Gaussian CDF in the (mean, shape) parameterisation; for positive
/// drift the passage time above is `IG(alpha / mu, alpha^2 / sigma_sq)`.
pub fn inverse_gaussian_cdf(mean: f64, shape: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let r = (shape / t).sqrt();
    norm_cdf(r * (t / mean - 1.0)) + (2.0 * shape / mean).exp() * norm_cdf(-r * (t / mean + 1.0))
}

pub struct McEstimate {
    pub p_hat: f64,
    pub std_err: f64,
}

impl McEstimate {
    /// |p_hat - reference| measured in standard errors (capped below by a
    /// tiny floor so exact agreement never divides by zero).
    pub fn sigmas_from(&self, reference: f64) -> f64 {
        (self.p_hat - reference).abs() / self.std_err.max(1e-12)
    }
}

/// Monte Carlo estimate of the probability that the profile's process climbs
/// `alpha` between `v0` and `horizon`, with a Brownian-bridge crossing
/// correction inside every step so the discretisation bias is removed rather
/// than merely shrunk.
///
/// Per-step increment moments come from `clock_quadrature`, not from the
/// library's closed-form clock.
#[allow(clippy::too_many_arguments)]
pub fn mc_profile_passage(
    mu0: f64,
    sigma0_sq: f64,
    nu: f64,
    tau: f64,
    v0: f64,
    alpha: f64,
    horizon: f64,
    steps: usize,
    paths: usize,
    rng: &mut StdRng,
) -> McEstimate {
    assert!(horizon > v0 && steps > 0 && paths > 0);
    let dt = (horizon - v0) / steps as f64;
    let mut drift = Vec::with_capacity(steps);
    let mut var = Vec::with_capacity(steps);
    for s in 0..steps {
        let t0 = v0 + dt * s as f64;
        let dg = clock_quadrature(nu, tau, t0, t0 + dt, 8);
        drift.push(mu0 * dg);
        var.push(sigma0_sq * dg);
    }
    let sd: Vec<f64> = var.iter().map(|v| v.sqrt()).collect();
    let mut hits = 0usize;
    for _ in 0..paths {
        let mut x = 0.0f64;
        for s in 0..steps {
            let z: f64 = rng.sample(StandardNormal);
            let x1 = x + drift[s] + sd[s] * z;
            if x1 >= alpha {
                hits += 1;
                break;
            }
            // Conditional on the endpoints the path between them is a
            // Brownian bridge on the same clock; it still crosses the
            // barrier with this probability.
            let p_cross = (-2.0 * (alpha - x) * (alpha - x1) / var[s]).exp();
            if rng.gen::<f64>() < p_cross {
                hits += 1;
                break;
            }
            x = x1;
        }
    }
    let p = hits as f64 / paths as f64;
    McEstimate {
        p_hat: p,
        std_err: (p * (1.0 - p) / paths as f64).sqrt(),
    }
}

/// Same estimator for the constant-coefficient case (no time profile).
pub fn mc_constant_passage(
    mu: f64,
    sigma_sq: f64,
    alpha: f64,
    horizon: f64,
    steps: usize,
    paths: usize,
    rng: &mut StdRng,
) -> McEstimate {
    // A constant profile is the nu -> infinity limit; pass a kink beyond the
    // horizon so the quadrature sees the flat branch only.
    mc_profile_passage(
        mu,
        sigma_sq,
        2.0 * horizon + 1.0,
        1.0,
        0.0,
        alpha,
        horizon,
        steps,
        paths,
        rng,
    )
}

/// Random finite event space: bounded random outcome weights normalised to
/// sum to exactly one, each event covering each outcome independently with
/// probability `density`.
pub fn random_event_space(
    rng: &mut StdRng,
    num_outcomes: usize,
    num_events: usize,
    density: f64,
) -> FiniteEventSpace {
    assert!(num_outcomes >= 1 && num_events >= 1);
    let weights: Vec<f64> = (0..num_outcomes).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let head: f64 = probs[1..].iter().sum();
    probs[0] = 1.0 - head; // exact complement so the sum is exactly one
    let membership: Vec<Vec<usize>> = (0..num_events)
        .map(|_| (0..num_outcomes).filter(|_| rng.gen::<f64>() < density).collect())
        .collect();
    FiniteEventSpace::new(probs, membership).expect("construction is valid by design")
}

/// Joint distribution of `m` binary events as a two-component mixture of
/// independent Bernoulli products, enumerated exactly over all `2^m`
/// outcomes. Outcome index bit `i` set means event `i` occurs. Weak mixing
/// (`w` small, components close) yields nearly independent events.
pub fn mixture_event_space(p_a: &[f64], p_b: &[f64], w: f64) -> FiniteEventSpace {
    let m = p_a.len();
    assert_eq!(m, p_b.len());
    assert!(m <= 16, "outcome enumeration is 2^m");
    assert!((0.0..=1.0).contains(&w));
    let n = 1usize << m;
    let mut probs = Vec::with_capacity(n);
    for idx in 0..n {
        let mut prod_a = 1.0f64;
        let mut prod_b = 1.0f64;
        for i in 0..m {
            if idx >> i & 1 == 1 {
                prod_a *= p_a[i];
                prod_b *= p_b[i];
            } else {
                prod_a *= 1.0 - p_a[i];
                prod_b *= 1.0 - p_b[i];
            }
        }
        probs.push((1.0 - w) * prod_a + w * prod_b);
    }
    let head: f64 = probs[1..].iter().sum();
    probs[0] = 1.0 - head; // the all-lose outcome absorbs rounding
    let membership: Vec<Vec<usize>> = (0..m)
        .map(|i| (0..n).filter(|idx| idx >> i & 1 == 1).collect())
        .collect();
    FiniteEventSpace::new(probs, membership).expect("mixture distribution is valid")
}

/// Probability of each joint win/lose pattern among the events of `subset`
/// (bit `j` of the pattern index set means `subset[j]` occurred).
pub fn pattern_probabilities(space: &FiniteEventSpace, subset: &[usize]) -> Vec<f64> {
    let k = subset.len();
    let mut acc = vec![0.0f64; 1 << k];
    let coverages: Vec<Vec<bool>> = subset.iter().map(|&e| space.coverage(&[e])).collect();
    for (w, &p) in space.outcome_probabilities().iter().enumerate() {
        let mut pattern = 0usize;
        for (j, cov) in coverages.iter().enumerate() {
            if cov[w] {
                pattern |= 1 << j;
            }
        }
        acc[pattern] += p;
    }
    acc
}

/// Smallest dependence level for which the pattern probabilities of every
/// k-subset stay within `(1 ± lambda) p^l (1-p)^(k-l)`.
pub fn measured_lambda(space: &FiniteEventSpace, k: usize, p: f64) -> f64 {
    let m = space.num_events();
    let mut lambda = 0.0f64;
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        let pats = pattern_probabilities(space, &subset);
        for (pattern, &prob) in pats.iter().enumerate() {
            let l = pattern.count_ones() as i32;
            if l == 0 {
                continue; // the bound quantifies over nonempty intersections
            }
            let reference = p.powi(l) * (1.0 - p).powi(k as i32 - l);
            lambda = lambda.max((prob / reference - 1.0).abs());
        }
        // next k-combination in lexicographic order
        let mut i = k as isize - 1;
        while i >= 0 && subset[i as usize] == m - k + i as usize {
            i -= 1;
        }
        if i < 0 {
            return lambda;
        }
        let i = i as usize;
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
}
