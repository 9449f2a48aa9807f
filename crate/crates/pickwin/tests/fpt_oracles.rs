//! First-passage distributions checked against three independent oracles:
//! Simpson quadrature of the density, the classical constant-coefficient
//! passage formulas, and a Brownian-bridge corrected Monte Carlo simulator.

mod common;

use approx::assert_relative_eq;
use common::{
    constant_passage_cdf, inverse_gaussian_cdf, mc_profile_passage, simpson,
};
use pickwin::fpt::{fpt_cdf, fpt_cdf_limit, fpt_log_pdf, fpt_pdf, DriftProfile, PassageQuery};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_profile(rng: &mut StdRng) -> DriftProfile {
    DriftProfile::new(
        rng.gen_range(-1.0..2.5),
        rng.gen_range(0.5..4.0),
        rng.gen_range(0.5..5.0),
        rng.gen_range(0.5..6.0),
    )
    .unwrap()
}

/// Quadrature of the density over `[v0, v]`, split at the profile kink where
/// the integrand is not smooth.
fn integrate_pdf(profile: &DriftProfile, v0: f64, v: f64, alpha: f64) -> f64 {
    let dens = |t: f64| {
        let q = PassageQuery::new(v0, t, alpha).unwrap();
        fpt_pdf(&q, profile)
    };
    if v0 < profile.nu && profile.nu < v {
        simpson(dens, v0, profile.nu, 2000) + simpson(dens, profile.nu, v, 2000)
    } else {
        simpson(dens, v0, v, 2000)
    }
}

#[test]
fn cdf_equals_quadrature_of_pdf_across_random_profiles() {
    let mut rng = StdRng::seed_from_u64(1);
    for _ in 0..20 {
        let p = random_profile(&mut rng);
        let v0 = rng.gen_range(0.0..p.nu + 1.0);
        let v = v0 + rng.gen_range(0.5..8.0);
        let alpha = rng.gen_range(0.3..4.0);
        let q = PassageQuery::new(v0, v, alpha).unwrap();
        let direct = fpt_cdf(&q, &p);
        let quad = integrate_pdf(&p, v0, v, alpha);
        assert_relative_eq!(quad, direct, max_relative = 5e-7, epsilon = 1e-9);
    }
}

#[test]
fn quadrature_over_the_whole_horizon_reaches_the_limit() {
    let mut rng = StdRng::seed_from_u64(2);
    for _ in 0..10 {
        let p = random_profile(&mut rng);
        let v0 = rng.gen_range(0.0..p.nu);
        let alpha = rng.gen_range(0.5..3.0);
        let limit = fpt_cdf_limit(&p, v0, alpha).unwrap();
        let dens = |t: f64| {
            let q = PassageQuery::new(v0, t, alpha).unwrap();
            fpt_pdf(&q, &p)
        };
        // Flat phase in one piece, then the decay phase in tau-sized
        // segments so the grid keeps resolving the stretching density.
        // Beyond nu + 40 tau the clock has stopped to within 4e-18.
        let mut quad = simpson(dens, v0, p.nu, 2000);
        for seg in 0..40 {
            let a = p.nu + p.tau * seg as f64;
            quad += simpson(dens, a, a + p.tau, 400);
        }
        assert_relative_eq!(quad, limit, max_relative = 1e-6, epsilon = 1e-9);
    }
}

#[test]
fn constant_phase_matches_the_classical_passage_formula() {
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..50 {
        let mu = rng.gen_range(-1.5..2.5);
        let sigma_sq = rng.gen_range(0.3..5.0);
        let alpha = rng.gen_range(0.2..4.0);
        let t = rng.gen_range(0.1..6.0);
        // The kink sits far beyond the horizon, so the profile is constant
        // over the whole window.
        let p = DriftProfile::new(mu, sigma_sq, 1e6, 1.0).unwrap();
        let q = PassageQuery::new(0.0, t, alpha).unwrap();
        let classical = constant_passage_cdf(mu, sigma_sq, alpha, t);
        assert_relative_eq!(fpt_cdf(&q, &p), classical, max_relative = 1e-12, epsilon = 1e-15);
        if mu > 0.05 {
            let ig = inverse_gaussian_cdf(alpha / mu, alpha * alpha / sigma_sq, t);
            assert_relative_eq!(fpt_cdf(&q, &p), ig, max_relative = 1e-11, epsilon = 1e-15);
        }
    }
}

#[test]
fn constant_phase_matches_the_classical_passage_density() {
    let mut rng = StdRng::seed_from_u64(4);
    for _ in 0..50 {
        let mu = rng.gen_range(-1.0..2.0);
        let sigma_sq = rng.gen_range(0.3..4.0);
        let alpha = rng.gen_range(0.2..3.0);
        let t = rng.gen_range(0.1..5.0);
        let p = DriftProfile::new(mu, sigma_sq, 1e6, 1.0).unwrap();
        let q = PassageQuery::new(0.0, t, alpha).unwrap();
        // alpha / sqrt(2 pi sigma^2 t^3) * exp(-(alpha - mu t)^2 / (2 sigma^2 t))
        let classical = alpha / (2.0 * std::f64::consts::PI * sigma_sq * t * t * t).sqrt()
            * (-(alpha - mu * t) * (alpha - mu * t) / (2.0 * sigma_sq * t)).exp();
        assert_relative_eq!(fpt_pdf(&q, &p), classical, max_relative = 1e-12, epsilon = 1e-300);
    }
}

#[test]
fn finite_difference_of_cdf_matches_pdf() {
    let mut rng = StdRng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 30 {
        let p = random_profile(&mut rng);
        let v0 = rng.gen_range(0.0..p.nu + 1.0);
        let v = v0 + rng.gen_range(0.2..6.0);
        let alpha = rng.gen_range(0.3..3.0);
        let q = PassageQuery::new(v0, v, alpha).unwrap();
        let dens = fpt_pdf(&q, &p);
        if dens < 1e-3 {
            // A relative comparison is only meaningful where the density is
            // not vanishing; redraw.
            continue;
        }
        let h = 1e-4 * v.max(1.0);
        let up = fpt_cdf(&PassageQuery::new(v0, v + h, alpha).unwrap(), &p);
        let down = fpt_cdf(&PassageQuery::new(v0, v - h, alpha).unwrap(), &p);
        let fd = (up - down) / (2.0 * h);
        assert_relative_eq!(fd, dens, max_relative = 1e-4);
        checked += 1;
    }
}

#[test]
fn log_density_is_the_log_of_the_density_when_representable() {
    let mut rng = StdRng::seed_from_u64(6);
    for _ in 0..30 {
        let p = random_profile(&mut rng);
        let v0 = rng.gen_range(0.0..p.nu);
        let v = v0 + rng.gen_range(0.3..5.0);
        let alpha = rng.gen_range(0.3..3.0);
        let q = PassageQuery::new(v0, v, alpha).unwrap();
        let dens = fpt_pdf(&q, &p);
        if dens > 1e-290 {
            assert_relative_eq!(fpt_log_pdf(&q, &p), dens.ln(), max_relative = 1e-10);
        }
    }
}

#[test]
fn bridge_corrected_monte_carlo_confirms_the_cdf_on_decaying_profiles() {
    // Profiles that exercise every regime: drift up, drift down, pure noise,
    // kink inside the window, and a window starting beyond the kink.
    let cases = [
        (1.2, 1.0, 1.0, 2.0, 0.0, 2.0, 6.0),
        (-0.5, 2.0, 1e-9, 3.0, 0.5, 1.5, 8.0),
        (0.0, 4.0, 2.0, 1.0, 0.0, 2.5, 5.0),
    ];
    let mut rng = StdRng::seed_from_u64(7);
    for (i, &(mu0, sigma0_sq, nu, tau, v0, alpha, horizon)) in cases.iter().enumerate() {
        let p = DriftProfile::new(mu0, sigma0_sq, nu, tau).unwrap();
        let q = PassageQuery::new(v0, horizon, alpha).unwrap();
        let exact = fpt_cdf(&q, &p);
        let est = mc_profile_passage(
            mu0, sigma0_sq, nu, tau, v0, alpha, horizon, 256, 150_000, &mut rng,
        );
        assert!(
            est.sigmas_from(exact) <= 3.0,
            "case {i}: mc {} vs exact {exact} is {:.2} standard errors apart",
            est.p_hat,
            est.sigmas_from(exact)
        );
    }
}

#[test]
fn infinite_horizon_limit_agrees_with_a_long_horizon_monte_carlo() {
    // Fast decay so that by 40 time constants the passage probability has
    // converged; the MC then measures the same quantity as the limit.
    let (mu0, sigma0_sq, nu, tau) = (0.8, 2.5, 1.0, 1.5);
    let p = DriftProfile::new(mu0, sigma0_sq, nu, tau).unwrap();
    let alpha = 3.0;
    let limit = fpt_cdf_limit(&p, 0.0, alpha).unwrap();
    let mut rng = StdRng::seed_from_u64(8);
    let horizon = nu + 40.0 * tau;
    let est = mc_profile_passage(
        mu0, sigma0_sq, nu, tau, 0.0, alpha, horizon, 512, 120_000, &mut rng,
    );
    assert!(
        est.sigmas_from(limit) <= 3.0,
        "mc {} vs limit {limit} is {:.2} standard errors apart",
        est.p_hat,
        est.sigmas_from(limit)
    );
}
