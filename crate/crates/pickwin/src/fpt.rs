//! First-passage-time distributions for a Brownian motion whose drift and
//! diffusion share one time-varying shape.
//!
//! The process has drift `mu(t) = mu0 * f(t)` and diffusion
//! `sigma^2(t) = sigma0_sq * f(t)`, where the shape
//!
//! ```text
//! f(t) = 1                      for t <= nu
//! f(t) = exp(-(t - nu) / tau)   for t >  nu
//! ```
//!
//! is flat during an initial growth phase and then decays exponentially.
//! Because drift and variance are proportional, the process is a determinate
//! time change of a constant-coefficient Brownian motion through the clock
//! `G(v0, v) = \int_{v0}^{v} f(s) ds`, and the first time the process climbs
//! a distance `alpha` starting at `v0` has closed-form density and CDF in
//! terms of `M = mu0 * G` and `S = sigma0_sq * G / 2`:
//!
//! ```text
//! pdf(v)  = sigma^2(v) * alpha / sqrt(16 pi S^3) * exp(-(alpha - M)^2 / (4S))
//! CDF(v)  = Phi((M - alpha) / sqrt(2S)) + e^{M alpha / S} Phi(-(M + alpha) / sqrt(2S))
//! ```
//!
//! Letting `v -> inf` turns the CDF into the probability that the barrier is
//! ever reached, which is strictly below one because `G` converges.

use serde::{Deserialize, Serialize};

use crate::math::{ln_one_minus_exp, ln_phi, phi};
use crate::{Error, Result};

/// 0.5 * ln(16 pi)
pub(crate) const HALF_LN_16PI: f64 = 1.958_659_304_044_590_7;

/// Drift/diffusion description of one company:
/// `mu(t) = mu0 * f(t)`, `sigma^2(t) = sigma0_sq * f(t)` with `f` flat up to
/// `nu` and decaying with time constant `tau` afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftProfile {
    /// Base drift; any finite sign.
    pub mu0: f64,
    /// Base variance, strictly positive.
    pub sigma0_sq: f64,
    /// End of the flat growth phase, non-negative.
    pub nu: f64,
    /// Decay time constant, strictly positive.
    pub tau: f64,
}

impl DriftProfile {
    pub fn new(mu0: f64, sigma0_sq: f64, nu: f64, tau: f64) -> Result<Self> {
        if !mu0.is_finite() {
            return Err(Error::invalid("drift profile", format!("mu0 = {mu0} is not finite")));
        }
        if !(sigma0_sq > 0.0) || !sigma0_sq.is_finite() {
            return Err(Error::invalid(
                "drift profile",
                format!("sigma0_sq must be a positive finite number, got {sigma0_sq}"),
            ));
        }
        if !(nu >= 0.0) {
            return Err(Error::invalid(
                "drift profile",
                format!("nu must be non-negative, got {nu}"),
            ));
        }
        if !(tau > 0.0) {
            return Err(Error::invalid(
                "drift profile",
                format!("tau must be positive, got {tau}"),
            ));
        }
        Ok(DriftProfile { mu0, sigma0_sq, nu, tau })
    }

    /// The common shape factor `f(t)`.
    pub fn shape(&self, t: f64) -> f64 {
        if t <= self.nu {
            1.0
        } else {
            (-(t - self.nu) / self.tau).exp()
        }
    }

    /// `ln f(t)`, exact in the decay phase.
    pub fn log_shape(&self, t: f64) -> f64 {
        if t <= self.nu {
            0.0
        } else {
            -(t - self.nu) / self.tau
        }
    }

    /// Integrated shape `G(v0, v)` for `v0 <= v`, in closed form per branch:
    /// both endpoints in the flat phase, straddling the kink, or both in the
    /// decay phase.
    pub fn shape_integral(&self, v0: f64, v: f64) -> f64 {
        debug_assert!(v0 <= v);
        if v <= self.nu {
            v - v0
        } else if v0 <= self.nu {
            (self.nu - v0) - self.tau * (-(v - self.nu) / self.tau).exp_m1()
        } else {
            -self.tau
                * (-(v0 - self.nu) / self.tau).exp()
                * (-(v - v0) / self.tau).exp_m1()
        }
    }

    /// `G(v0, v)` together with its partial derivatives in `nu` and `tau`.
    /// Used by the likelihood gradient.
    pub fn shape_integral_partials(&self, v0: f64, v: f64) -> (f64, f64, f64) {
        debug_assert!(v0 <= v);
        if v <= self.nu {
            (v - v0, 0.0, 0.0)
        } else if v0 <= self.nu {
            let u = (v - self.nu) / self.tau;
            let e = (-u).exp();
            let g = (self.nu - v0) + self.tau * (1.0 - e);
            (g, 1.0 - e, 1.0 - e * (1.0 + u))
        } else {
            let u0 = (v0 - self.nu) / self.tau;
            let u1 = (v - self.nu) / self.tau;
            let e0 = (-u0).exp();
            let e1 = (-u1).exp();
            let g = self.tau * (e0 - e1);
            (g, e0 - e1, e0 * (1.0 + u0) - e1 * (1.0 + u1))
        }
    }

    /// `G(v0, inf)`; infinite when the profile never decays.
    pub fn shape_integral_to_inf(&self, v0: f64) -> f64 {
        if !self.tau.is_finite() || !self.nu.is_finite() {
            return f64::INFINITY;
        }
        if v0 <= self.nu {
            (self.nu - v0) + self.tau
        } else {
            self.tau * (-(v0 - self.nu) / self.tau).exp()
        }
    }
}

/// One first-passage question: starting from time `v0`, when does the process
/// first climb a further distance `alpha`, evaluated at time `v`?
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassageQuery {
    pub v0: f64,
    pub v: f64,
    pub alpha: f64,
}

impl PassageQuery {
    pub fn new(v0: f64, v: f64, alpha: f64) -> Result<Self> {
        if !(v0 >= 0.0) || !v0.is_finite() {
            return Err(Error::invalid(
                "passage query",
                format!("v0 must be finite and non-negative, got {v0}"),
            ));
        }
        if !(v >= v0) || !v.is_finite() {
            return Err(Error::invalid(
                "passage query",
                format!("v must be finite and at least v0 = {v0}, got {v}"),
            ));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::invalid(
                "passage query",
                format!("alpha must be a positive finite distance, got {alpha}"),
            ));
        }
        Ok(PassageQuery { v0, v, alpha })
    }
}

/// Effective mean `M = mu0 * G(v0, v)` and spread `S = sigma0_sq * G / 2`.
pub fn profile_integrals(profile: &DriftProfile, v0: f64, v: f64) -> Result<(f64, f64)> {
    if !(v0 >= 0.0) || !(v >= v0) || !v.is_finite() {
        return Err(Error::invalid(
            "integration window",
            format!("need 0 <= v0 <= v finite, got v0 = {v0}, v = {v}"),
        ));
    }
    let g = profile.shape_integral(v0, v);
    Ok((profile.mu0 * g, 0.5 * profile.sigma0_sq * g))
}

/// Log of the first-passage density. Returns `-inf` at `v = v0`, where the
/// density vanishes.
pub fn fpt_log_pdf(q: &PassageQuery, profile: &DriftProfile) -> f64 {
    if q.v <= q.v0 {
        return f64::NEG_INFINITY;
    }
    let g = profile.shape_integral(q.v0, q.v);
    if g <= 0.0 {
        // Underflows only for gaps of thousands of time constants.
        return f64::NEG_INFINITY;
    }
    let m = profile.mu0 * g;
    let s = 0.5 * profile.sigma0_sq * g;
    let d = q.alpha - m;
    q.alpha.ln() + profile.sigma0_sq.ln() + profile.log_shape(q.v)
        - HALF_LN_16PI
        - 1.5 * s.ln()
        - d * d / (4.0 * s)
}

/// First-passage density of the barrier at distance `alpha`.
pub fn fpt_pdf(q: &PassageQuery, profile: &DriftProfile) -> f64 {
    fpt_log_pdf(q, profile).exp()
}

fn cdf_from_integrals(m: f64, s: f64, alpha: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let rt = (2.0 * s).sqrt();
    let direct = phi((m - alpha) / rt);
    let log_reflected = m * alpha / s + ln_phi(-(m + alpha) / rt);
    (direct + log_reflected.exp()).clamp(0.0, 1.0)
}

/// Probability that the barrier at distance `alpha` is reached by time `v`.
pub fn fpt_cdf(q: &PassageQuery, profile: &DriftProfile) -> f64 {
    if q.v <= q.v0 {
        return 0.0;
    }
    let g = profile.shape_integral(q.v0, q.v);
    cdf_from_integrals(profile.mu0 * g, 0.5 * profile.sigma0_sq * g, q.alpha)
}

/// `ln(1 - CDF)`, stable when the survival probability is tiny.
///
/// Written as a log-space difference of the two CDF terms: with
/// `A = ln Phi((alpha - M)/sqrt(2S))` and
/// `B = M alpha / S + ln Phi(-(M + alpha)/sqrt(2S))`, the survival
/// probability is `e^A - e^B = e^A (1 - e^{B-A})`.
pub fn fpt_log_survival(q: &PassageQuery, profile: &DriftProfile) -> f64 {
    if q.v <= q.v0 {
        return 0.0;
    }
    let g = profile.shape_integral(q.v0, q.v);
    if g <= 0.0 {
        return 0.0;
    }
    let m = profile.mu0 * g;
    let s = 0.5 * profile.sigma0_sq * g;
    let rt = (2.0 * s).sqrt();
    let a = ln_phi((q.alpha - m) / rt);
    let b = m * q.alpha / s + ln_phi(-(m + q.alpha) / rt);
    // Mathematically b < a; rounding can produce b >= a when survival is at
    // the resolution of f64, so nudge the difference strictly negative.
    let d = (b - a).min(-f64::MIN_POSITIVE);
    a + ln_one_minus_exp(d)
}

/// Probability that the barrier at distance `alpha` is ever reached when
/// watching from time `v0` forever.
///
/// Finite `tau` makes the integrated shape converge, so this is strictly
/// below one whenever the barrier is not already hit. A profile that never
/// decays (`tau` or `nu` infinite) reaches any barrier almost surely when
/// `mu0 > 0`; with non-positive drift the limit depends on the approach to
/// infinity, so such profiles are rejected.
pub fn fpt_cdf_limit(profile: &DriftProfile, v0: f64, alpha: f64) -> Result<f64> {
    if !(v0 >= 0.0) || !v0.is_finite() {
        return Err(Error::invalid(
            "passage query",
            format!("v0 must be finite and non-negative, got {v0}"),
        ));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid(
            "passage query",
            format!("alpha must be a positive finite distance, got {alpha}"),
        ));
    }
    let g = profile.shape_integral_to_inf(v0);
    if !g.is_finite() {
        if profile.mu0 > 0.0 {
            return Ok(1.0);
        }
        return Err(Error::invalid(
            "drift profile",
            "profile never decays (nu or tau infinite) and drift is not positive; \
             the infinite-horizon passage probability is undefined here"
                .to_string(),
        ));
    }
    Ok(cdf_from_integrals(
        profile.mu0 * g,
        0.5 * profile.sigma0_sq * g,
        alpha,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn constant_profile(mu0: f64, sigma0_sq: f64) -> DriftProfile {
        // nu far beyond every horizon used in these tests
        DriftProfile::new(mu0, sigma0_sq, 1e9, 1.0).unwrap()
    }

    #[test]
    fn profile_validation_rejects_bad_fields() {
        assert!(DriftProfile::new(1.0, 0.0, 1.0, 1.0).is_err());
        assert!(DriftProfile::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(DriftProfile::new(1.0, 1.0, -0.1, 1.0).is_err());
        assert!(DriftProfile::new(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(DriftProfile::new(f64::NAN, 1.0, 1.0, 1.0).is_err());
        assert!(DriftProfile::new(1.0, 1.0, 1.0, -2.0).is_err());
    }

    #[test]
    fn query_validation() {
        assert!(PassageQuery::new(0.0, 1.0, 1.0).is_ok());
        assert!(PassageQuery::new(-1.0, 1.0, 1.0).is_err());
        assert!(PassageQuery::new(2.0, 1.0, 1.0).is_err());
        assert!(PassageQuery::new(0.0, 1.0, 0.0).is_err());
        assert!(PassageQuery::new(0.0, 1.0, -3.0).is_err());
        assert!(PassageQuery::new(0.0, f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn shape_integral_branches_are_continuous_at_the_kink() {
        let p = DriftProfile::new(1.0, 1.0, 2.0, 3.0).unwrap();
        let eps = 1e-9;
        // v crossing nu
        assert_relative_eq!(
            p.shape_integral(1.0, 2.0 - eps),
            p.shape_integral(1.0, 2.0 + eps),
            epsilon = 1e-8
        );
        // v0 crossing nu
        assert_relative_eq!(
            p.shape_integral(2.0 - eps, 5.0),
            p.shape_integral(2.0 + eps, 5.0),
            epsilon = 1e-8
        );
    }

    #[test]
    fn shape_integral_straddling_example() {
        // nu = 2, tau = 2: G(1, 4) = (2 - 1) + 2 (1 - e^{-1})
        let p = DriftProfile::new(1.0, 4.0, 2.0, 2.0).unwrap();
        let expected = 1.0 + 2.0 * (1.0 - (-1.0f64).exp());
        assert_relative_eq!(p.shape_integral(1.0, 4.0), expected, max_relative = 1e-14);
        let (m, s) = profile_integrals(&p, 1.0, 4.0).unwrap();
        assert_relative_eq!(m, expected, max_relative = 1e-14); // mu0 = 1
        assert_relative_eq!(s, 2.0 * expected, max_relative = 1e-14); // sigma0_sq / 2 = 2
        assert_relative_eq!(m, 2.2642, epsilon = 1e-4);
        assert_relative_eq!(s, 4.5285, epsilon = 1e-4);
    }

    #[test]
    fn shape_integral_decay_only_branch() {
        // both endpoints beyond nu
        let p = DriftProfile::new(1.0, 1.0, 1.0, 2.0).unwrap();
        let g = p.shape_integral(3.0, 7.0);
        let expected = 2.0 * ((-1.0f64).exp() - (-3.0f64).exp());
        assert_relative_eq!(g, expected, max_relative = 1e-14);
    }

    #[test]
    fn shape_integral_to_inf_closed_forms() {
        let p = DriftProfile::new(1.0, 1.0, 6.37, 4.83).unwrap();
        assert_relative_eq!(p.shape_integral_to_inf(0.0), 6.37 + 4.83, max_relative = 1e-14);
        assert_relative_eq!(
            p.shape_integral_to_inf(8.0),
            4.83 * (-(8.0 - 6.37) / 4.83f64).exp(),
            max_relative = 1e-14
        );
        let never_decays = DriftProfile::new(1.0, 1.0, f64::INFINITY, 1.0).unwrap();
        assert!(never_decays.shape_integral_to_inf(0.0).is_infinite());
    }

    #[test]
    fn pdf_constant_coefficients_known_point() {
        // Constant mu = sigma^2 = 1, barrier 1, evaluated at v = 1:
        // M = 1, S = 1/2, so the density is 1/sqrt(2 pi).
        let p = constant_profile(1.0, 1.0);
        let q = PassageQuery::new(0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            fpt_pdf(&q, &p),
            0.398_942_280_401_432_7,
            max_relative = 1e-12
        );
    }

    #[test]
    fn pdf_vanishes_at_window_start() {
        let p = constant_profile(1.0, 1.0);
        let q = PassageQuery::new(2.0, 2.0, 1.0).unwrap();
        assert_eq!(fpt_pdf(&q, &p), 0.0);
        assert_eq!(fpt_log_pdf(&q, &p), f64::NEG_INFINITY);
    }

    #[test]
    fn cdf_constant_coefficients_known_point() {
        // M = alpha = 1, S = 1/2: CDF = Phi(0) + e^2 Phi(-2).
        let p = constant_profile(1.0, 1.0);
        let q = PassageQuery::new(0.0, 1.0, 1.0).unwrap();
        let expected = 0.5 + (2.0f64).exp() * phi(-2.0);
        assert_relative_eq!(fpt_cdf(&q, &p), expected, max_relative = 1e-12);
        assert_relative_eq!(fpt_cdf(&q, &p), 0.6681, epsilon = 1e-4);
    }

    #[test]
    fn cdf_is_zero_at_window_start_and_clamped() {
        let p = constant_profile(5.0, 2.0);
        let q = PassageQuery::new(1.0, 1.0, 3.0).unwrap();
        assert_eq!(fpt_cdf(&q, &p), 0.0);
        // Strong drift, long horizon: must stay within [0, 1].
        let q = PassageQuery::new(0.0, 1e6, 0.5).unwrap();
        let c = fpt_cdf(&q, &p);
        assert!((0.0..=1.0).contains(&c));
        assert_relative_eq!(c, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn log_survival_matches_direct_difference_when_representable() {
        let p = DriftProfile::new(1.5, 3.0, 2.0, 4.0).unwrap();
        for &(v0, v, alpha) in &[(0.0, 1.0, 2.0), (0.5, 4.0, 5.0), (3.0, 9.0, 1.0)] {
            let q = PassageQuery::new(v0, v, alpha).unwrap();
            let direct = (1.0 - fpt_cdf(&q, &p)).ln();
            assert_relative_eq!(fpt_log_survival(&q, &p), direct, max_relative = 1e-10);
        }
    }

    #[test]
    fn log_survival_stays_finite_when_passage_is_near_certain() {
        // Overwhelming drift towards a close barrier: survival underflows the
        // naive 1 - CDF but the log-space route keeps a finite value.
        let p = constant_profile(50.0, 0.5);
        let q = PassageQuery::new(0.0, 40.0, 1.0).unwrap();
        assert_relative_eq!(fpt_cdf(&q, &p), 1.0, epsilon = 1e-15);
        let ls = fpt_log_survival(&q, &p);
        assert!(ls.is_finite());
        assert!(ls < -100.0);
    }

    #[test]
    fn limit_zero_drift_known_point() {
        // mu0 = 0: limit = 2 Phi(-alpha / sqrt(sigma0_sq * G_inf)).
        let p = DriftProfile::new(0.0, 100.0, 6.37, 4.83).unwrap();
        let expected = 2.0 * phi(-70.0 / (100.0f64 * 11.2).sqrt());
        let got = fpt_cdf_limit(&p, 0.0, 70.0).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-12);
        assert_relative_eq!(got, 0.0365, epsilon = 5e-4);
    }

    #[test]
    fn limit_rejects_non_decaying_profiles_without_positive_drift() {
        let p = DriftProfile::new(0.0, 1.0, f64::INFINITY, 1.0).unwrap();
        assert!(fpt_cdf_limit(&p, 0.0, 1.0).is_err());
        let p = DriftProfile::new(-2.0, 1.0, 1.0, f64::INFINITY).unwrap();
        assert!(fpt_cdf_limit(&p, 0.0, 1.0).is_err());
        // Positive drift with no decay reaches every barrier.
        let p = DriftProfile::new(0.3, 1.0, 1.0, f64::INFINITY).unwrap();
        assert_eq!(fpt_cdf_limit(&p, 0.0, 1e6).unwrap(), 1.0);
    }

    #[test]
    fn limit_increases_with_variance_at_zero_drift() {
        let alpha = 30.0;
        let mut prev = 0.0;
        for i in 1..30 {
            let sig = 4.0 * i as f64;
            let p = DriftProfile::new(0.0, sig, 5.0, 3.0).unwrap();
            let f = fpt_cdf_limit(&p, 0.0, alpha).unwrap();
            assert!(f > prev, "limit must grow with sigma0_sq: {f} vs {prev}");
            prev = f;
        }
    }

    #[test]
    fn limit_bounds_every_finite_horizon_cdf() {
        let p = DriftProfile::new(2.0, 9.0, 3.0, 2.0).unwrap();
        let lim = fpt_cdf_limit(&p, 0.5, 12.0).unwrap();
        let mut prev = 0.0;
        for i in 1..60 {
            let v = 0.5 + 0.7 * i as f64;
            let q = PassageQuery::new(0.5, v, 12.0).unwrap();
            let c = fpt_cdf(&q, &p);
            assert!(c <= lim + 1e-12);
            assert!(c + 1e-12 >= prev, "cdf must be non-decreasing in v");
            prev = c;
        }
        // The finite-horizon CDF approaches the limit once the clock has
        // effectively stopped.
        let q = PassageQuery::new(0.5, 200.0, 12.0).unwrap();
        assert_relative_eq!(fpt_cdf(&q, &p), lim, max_relative = 1e-10);
    }
}
