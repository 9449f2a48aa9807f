//! Scalar numerics shared across modules: stable normal CDF helpers.

use std::f64::consts::FRAC_1_SQRT_2;

/// ln sqrt(2 pi)
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Standard normal CDF.
pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal log-density.
pub fn ln_normal_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// Log of the standard normal CDF, stable arbitrarily far into the left tail.
///
/// For moderate arguments the direct `erfc` route keeps full precision; the
/// complementary function only underflows near -37, so below -36 we switch to
/// the asymptotic expansion of the Mills ratio,
/// `Phi(x) ~ phi(x)/|x| * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8)`,
/// whose truncation error at |x| = 36 is below machine epsilon.
pub fn ln_phi(x: f64) -> f64 {
    if x >= -36.0 {
        (0.5 * libm::erfc(-x * FRAC_1_SQRT_2)).ln()
    } else {
        let r = 1.0 / (x * x);
        let series = 1.0 + r * (-1.0 + r * (3.0 + r * (-15.0 + r * 105.0)));
        -0.5 * x * x - (-x).ln() - LN_SQRT_2PI + series.ln()
    }
}

/// ln(1 - e^d) for d < 0, accurate over the whole range.
///
/// Splits at -ln 2: near zero `exp_m1` preserves the tiny difference, far
/// below `ln_1p` of the small exponential is exact.
pub fn ln_one_minus_exp(d: f64) -> f64 {
    debug_assert!(d < 0.0);
    if d > -std::f64::consts::LN_2 {
        (-d.exp_m1()).ln()
    } else {
        (-d.exp()).ln_1p()
    }
}

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Inverse of [`sigmoid`] on (0, 1).
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn phi_matches_known_values() {
        assert_relative_eq!(phi(0.0), 0.5, max_relative = 1e-15);
        assert_relative_eq!(phi(1.959_963_984_540_054), 0.975, max_relative = 1e-12);
        assert_relative_eq!(phi(-1.0), 0.158_655_253_931_457_05, max_relative = 1e-12);
    }

    #[test]
    fn ln_phi_agrees_with_direct_log_in_overlap() {
        for i in 0..200 {
            let x = -35.9 + 0.3 * i as f64;
            let direct = phi(x).ln();
            assert_relative_eq!(ln_phi(x), direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn ln_phi_branches_join_smoothly() {
        // Both representations are accurate at the switch point, so the
        // erfc route (used at exactly -36) must match the asymptotic series
        // evaluated there by hand.
        let erfc_route = ln_phi(-36.0);
        let x: f64 = -36.0;
        let r = 1.0 / (x * x);
        let series = 1.0 + r * (-1.0 + r * (3.0 + r * (-15.0 + r * 105.0)));
        let asymptotic = -0.5 * x * x - (-x).ln() - LN_SQRT_2PI + series.ln();
        assert_relative_eq!(erfc_route, asymptotic, max_relative = 1e-12);
    }

    #[test]
    fn ln_phi_deep_tail_is_finite_and_monotone() {
        let mut prev = ln_phi(-36.0);
        for i in 1..100 {
            let x = -36.0 - 10.0 * i as f64;
            let v = ln_phi(x);
            assert!(v.is_finite());
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn ln_one_minus_exp_matches_naive_where_safe() {
        for &d in &[-1e-4f64, -0.1, -0.5, -1.0, -5.0, -50.0] {
            let naive = (1.0 - d.exp()).ln();
            assert_relative_eq!(ln_one_minus_exp(d), naive, max_relative = 1e-10);
        }
        // Tiny |d| would round 1 - e^d to zero in the naive form.
        assert!(ln_one_minus_exp(-1e-300).is_finite());
    }

    #[test]
    fn sigmoid_logit_round_trip() {
        for &p in &[1e-12, 0.01, 0.5, 0.99, 1.0 - 1e-12] {
            assert_relative_eq!(sigmoid(logit(p)), p, max_relative = 1e-9);
        }
        assert!(sigmoid(-800.0) >= 0.0);
        assert!(sigmoid(800.0) <= 1.0);
    }
}
