//! Seeded self-checks of the portfolio theory the selection commands rely
//! on, plus the closed-form dependence-bound table. Everything here runs in
//! a few seconds and prints one line per suite.

use pickwin::portfolio::{
    brute_force_log_optimal, brute_force_portfolio, greedy_win_model, theorem5_bound,
    FiniteEventSpace, WinModel,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Random outcome weights normalised to sum to exactly one; each event covers
/// each outcome independently with probability `density`.
fn random_space(rng: &mut StdRng, num_outcomes: usize, num_events: usize, density: f64) -> FiniteEventSpace {
    let weights: Vec<f64> = (0..num_outcomes).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let head: f64 = probs[1..].iter().sum();
    probs[0] = 1.0 - head;
    let membership: Vec<Vec<usize>> = (0..num_events)
        .map(|_| (0..num_outcomes).filter(|_| rng.gen::<f64>() < density).collect())
        .collect();
    FiniteEventSpace::new(probs, membership).expect("valid by construction")
}

/// Joint law of `m` events as a two-component mixture of independent
/// Bernoulli products over all `2^m` outcomes; `w = 0` is exact independence.
fn mixture_space(p_a: &[f64], p_b: &[f64], w: f64) -> FiniteEventSpace {
    let m = p_a.len();
    let n = 1usize << m;
    let mut probs = Vec::with_capacity(n);
    for idx in 0..n {
        let (mut prod_a, mut prod_b) = (1.0f64, 1.0f64);
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
    probs[0] = 1.0 - head;
    let membership: Vec<Vec<usize>> = (0..m)
        .map(|i| (0..n).filter(|idx| idx >> i & 1 == 1).collect())
        .collect();
    FiniteEventSpace::new(probs, membership).expect("valid by construction")
}

/// Largest relative deviation of any k-subset joint win/lose pattern from the
/// exchangeable reference `p^l (1-p)^(k-l)`.
fn max_dependence(space: &FiniteEventSpace, k: usize, p: f64) -> f64 {
    let m = space.num_events();
    let coverages: Vec<Vec<bool>> = (0..m).map(|e| space.coverage(&[e])).collect();
    let mut lambda = 0.0f64;
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        let mut pattern_probs = vec![0.0f64; 1 << k];
        for (w, &prob) in space.outcome_probabilities().iter().enumerate() {
            let mut pattern = 0usize;
            for (j, &e) in subset.iter().enumerate() {
                if coverages[e][w] {
                    pattern |= 1 << j;
                }
            }
            pattern_probs[pattern] += prob;
        }
        for (pattern, &prob) in pattern_probs.iter().enumerate().skip(1) {
            let l = pattern.count_ones() as i32;
            let reference = p.powi(l) * (1.0 - p).powi(k as i32 - l);
            lambda = lambda.max((prob / reference - 1.0).abs());
        }
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

/// Runs the seeded property suites; returns one summary line per suite, or
/// the first violation found.
pub fn run_suites(seed: u64) -> Result<Vec<String>, String> {
    let mut lines = Vec::new();
    let mut rng = StdRng::seed_from_u64(seed);

    // Monotone and submodular, exactly.
    let mut checks = 0usize;
    for s in 0..100 {
        let m = rng.gen_range(1..=8usize);
        let outcomes = rng.gen_range(2..30usize);
        let density = rng.gen_range(0.1..0.6);
        let space = random_space(&mut rng, outcomes, m, density);
        for e in 0..m {
            let t_set: Vec<usize> = (0..m).filter(|&i| i != e && rng.gen::<bool>()).collect();
            let s_set: Vec<usize> = t_set.iter().copied().filter(|_| rng.gen::<bool>()).collect();
            let gain_s = space.marginal_gain(&space.coverage(&s_set), e);
            let gain_t = space.marginal_gain(&space.coverage(&t_set), e);
            if gain_t < 0.0 || gain_s < gain_t {
                return Err(format!(
                    "objective violated diminishing gains on space {s}: {gain_s} < {gain_t}"
                ));
            }
            checks += 2;
        }
    }
    lines.push(format!(
        "coverage objective: monotone with diminishing gains ({checks} exact checks)"
    ));

    // Greedy constant factor.
    let factor = 1.0 - (-1.0f64).exp();
    let mut worst = f64::INFINITY;
    for i in 0..50 {
        let m = rng.gen_range(4..=10usize);
        let k = rng.gen_range(1..=3usize);
        let outcomes = rng.gen_range(4..40usize);
        let density = rng.gen_range(0.08..0.5);
        let space = random_space(&mut rng, outcomes, m, density);
        let model = WinModel::EventSpace(&space);
        let (_, u_greedy) = greedy_win_model(&model, k).map_err(|e| e.to_string())?;
        let (_, u_opt) = brute_force_portfolio(&model, k).map_err(|e| e.to_string())?;
        if u_greedy < factor * u_opt - 1e-12 {
            return Err(format!(
                "greedy fell below the guarantee on instance {i}: {u_greedy} < {factor} * {u_opt}"
            ));
        }
        if u_opt > 0.0 {
            worst = worst.min(u_greedy / u_opt);
        }
    }
    lines.push(format!(
        "greedy selection: within the 1-1/e guarantee on 50 instances (worst ratio {worst:.4})"
    ));

    // Independent events: greedy, brute force and top-k agree exactly.
    for i in 0..50 {
        let m = rng.gen_range(3..=12usize);
        let k = rng.gen_range(1..=4usize.min(m));
        let probs: Vec<f64> = (0..m).map(|_| rng.gen_range(0.001..0.95)).collect();
        let model = WinModel::Independent(&probs);
        let (mut greedy, _) = greedy_win_model(&model, k).map_err(|e| e.to_string())?;
        let (mut brute, _) = brute_force_portfolio(&model, k).map_err(|e| e.to_string())?;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| probs[b].partial_cmp(&probs[a]).unwrap());
        let mut top: Vec<usize> = order[..k].to_vec();
        greedy.sort_unstable();
        brute.sort_unstable();
        top.sort_unstable();
        if greedy != top || brute != top {
            return Err(format!(
                "independent instance {i}: greedy {greedy:?} / brute {brute:?} / top-k {top:?}"
            ));
        }
    }
    lines.push("independent events: greedy = brute force = top-k on 50 instances".to_string());

    // Log-optimal portfolios equal top-k under independence.
    for i in 0..25 {
        let m = rng.gen_range(3..=7usize);
        let k = rng.gen_range(1..=3usize.min(m));
        let probs: Vec<f64> = (0..m).map(|_| rng.gen_range(0.01..0.6)).collect();
        let space = mixture_space(&probs, &probs, 0.0);
        let a = rng.gen_range(0.05..2.0);
        let b = a * rng.gen_range(1.2f64.ln()..1e5f64.ln()).exp();
        let (mut v_set, _) = brute_force_log_optimal(&space, k, a, b).map_err(|e| e.to_string())?;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&x, &y| probs[y].partial_cmp(&probs[x]).unwrap());
        let mut top: Vec<usize> = order[..k].to_vec();
        v_set.sort_unstable();
        top.sort_unstable();
        if v_set != top {
            return Err(format!(
                "log-return instance {i}: optimal {v_set:?} differs from top-k {top:?}"
            ));
        }
    }
    lines.push("log-return objective: optimum = top-k under independence on 25 instances".to_string());

    // The dependence bound dominates the measured gap on mixed markets.
    for round in 0..10 {
        let m = rng.gen_range(5..=7usize);
        let k = rng.gen_range(2..=3usize);
        let base = rng.gen_range(0.15..0.30) * 2.0 / k as f64;
        let p_a: Vec<f64> = (0..m).map(|_| base * rng.gen_range(0.85..1.15)).collect();
        let lift = rng.gen_range(1.5..2.0);
        let mut p_b = p_a.clone();
        for i in 0..2 {
            let j = rng.gen_range(i..m);
            p_b.swap(i, j);
            p_b[i] = (p_b[i] * lift).min(0.9);
        }
        let w = rng.gen_range(0.15..0.30);
        let space = mixture_space(&p_a, &p_b, w);
        let p = (0..m).map(|i| space.union_prob(&[i]).unwrap()).sum::<f64>() / m as f64;
        let lambda = max_dependence(&space, k, p);
        if lambda >= 1.0 {
            return Err(format!("round {round}: dependence level {lambda} out of range"));
        }
        let a = rng.gen_range(0.5..2.0);
        let b = a * rng.gen_range(1.5..5.0);
        let model = WinModel::EventSpace(&space);
        let (_, win_u) = brute_force_portfolio(&model, k).map_err(|e| e.to_string())?;
        let (log_set, _) = brute_force_log_optimal(&space, k, a, b).map_err(|e| e.to_string())?;
        let log_u = space.union_prob(&log_set).map_err(|e| e.to_string())?;
        let gap = (win_u - log_u) / win_u;
        let bound = theorem5_bound(lambda, k, p, a, b).map_err(|e| e.to_string())?;
        if !(-1e-12..=bound + 1e-12).contains(&gap) {
            return Err(format!(
                "round {round}: measured gap {gap} outside [0, {bound}] (lambda {lambda}, p {p})"
            ));
        }
    }
    lines.push(
        "dependence bound: dominates the log-optimal gap on 10 mixed markets".to_string(),
    );
    Ok(lines)
}

/// The closed-form bound over a grid of dependence levels and portfolio
/// sizes, at the reference win probability and return spread.
pub fn bound_table() -> String {
    let p = 0.01;
    let (a, b) = (1.0, 1e9);
    let ks = [2usize, 5, 10, 20];
    let lambdas = [0.1, 0.25, 0.5, 0.75, 0.9];
    let mut out = String::new();
    out.push_str(&format!(
        "relative objective gap bound, p = {p}, a = {a}, b = {b:e}\n"
    ));
    out.push_str(&format!("{:>8}", "lambda"));
    for k in ks {
        out.push_str(&format!("  {:>8}", format!("k={k}")));
    }
    out.push('\n');
    for lambda in lambdas {
        out.push_str(&format!("{lambda:>8.2}"));
        for k in ks {
            let bound = theorem5_bound(lambda, k, p, a, b)
                .map(|v| format!("{v:>8.5}"))
                .unwrap_or_else(|_| format!("{:>8}", "-"));
            out.push_str(&format!("  {bound}"));
        }
        out.push('\n');
    }
    out
}
