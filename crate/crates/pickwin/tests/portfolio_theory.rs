//! The selection-theory guarantees, checked on randomized finite event
//! spaces with exact (tolerance-free) comparisons wherever the claim is
//! exact: diminishing returns, the greedy approximation bound, top-k
//! optimality under independence, the log-return equivalence, and the
//! small-dependence bound on the gap between the two portfolio styles.

mod common;

use std::collections::BTreeMap;

use common::{measured_lambda, mixture_event_space, random_event_space};
use pickwin::likelihood::ModelParams;
use pickwin::portfolio::{
    brute_force_log_optimal, brute_force_portfolio, greedy_portfolio, greedy_win_model,
    log_return_objective, log_return_objective_tail_form, theorem5_bound, union_prob_correlated,
    union_prob_independent, CandidateSet, DrawSet, FiniteEventSpace, McConfig, ObjectiveKind,
    WinModel,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Random subset triple S ⊂ T ⊆ [m] \ {e} plus the extra event e.
fn random_nested_subsets(rng: &mut StdRng, m: usize) -> (Vec<usize>, Vec<usize>, usize) {
    let e = rng.gen_range(0..m);
    let mut small = Vec::new();
    let mut large = Vec::new();
    for i in 0..m {
        if i == e {
            continue;
        }
        match rng.gen_range(0..3) {
            0 => {}
            1 => large.push(i),
            _ => {
                small.push(i);
                large.push(i);
            }
        }
    }
    (small, large, e)
}

#[test]
fn marginal_gains_diminish_exactly_on_random_spaces() {
    let mut rng = StdRng::seed_from_u64(30);
    for _ in 0..200 {
        let m = rng.gen_range(2..=8);
        let outcomes = rng.gen_range(4..=64);
        let density = rng.gen_range(0.1..0.6);
        let space = random_event_space(&mut rng, outcomes, m, density);
        for _ in 0..5 {
            let (small, large, e) = random_nested_subsets(&mut rng, m);
            let gain_small = space.marginal_gain(&space.coverage(&small), e);
            let gain_large = space.marginal_gain(&space.coverage(&large), e);
            // Submodularity: adding to the smaller set gains at least as
            // much. The gain over the smaller set sums a superset of
            // nonnegative terms in the same order, so the inequality holds
            // exactly in floating point, no tolerance.
            assert!(
                gain_small >= gain_large,
                "submodularity violated: {gain_small} < {gain_large}"
            );
            // Monotonicity and nonnegativity, also exact.
            let u_small = space.union_prob(&small).unwrap();
            let u_large = space.union_prob(&large).unwrap();
            assert!(u_small >= 0.0);
            assert!(u_large >= u_small);
            // The dedicated gain accumulator agrees with the objective
            // difference up to ordinary rounding.
            let mut with_e = small.clone();
            with_e.push(e);
            let diff = space.union_prob(&with_e).unwrap() - u_small;
            assert!((gain_small - diff).abs() <= 1e-14);
        }
    }
}

#[test]
fn greedy_meets_the_nemhauser_bound_on_random_spaces() {
    let factor = 1.0 - (-1.0f64).exp();
    let mut rng = StdRng::seed_from_u64(31);
    for _ in 0..100 {
        let m = rng.gen_range(3..=12);
        let outcomes = rng.gen_range(6..=64);
        let density = rng.gen_range(0.05..0.5);
        let space = random_event_space(&mut rng, outcomes, m, density);
        let k = rng.gen_range(1..=4.min(m));
        let model = WinModel::EventSpace(&space);
        let (_, greedy_u) = greedy_win_model(&model, k).unwrap();
        let (_, brute_u) = brute_force_portfolio(&model, k).unwrap();
        assert!(greedy_u <= brute_u, "greedy cannot beat the exact optimum");
        assert!(
            greedy_u >= factor * brute_u,
            "approximation bound violated: {greedy_u} < {factor} * {brute_u}"
        );
    }
}

#[test]
fn independent_case_greedy_equals_top_k_equals_brute_force() {
    let mut rng = StdRng::seed_from_u64(32);
    for _ in 0..100 {
        let m = rng.gen_range(3..=12);
        // Distinct probabilities make the optimal set unique.
        let mut probs: Vec<f64>;
        loop {
            probs = (0..m).map(|_| rng.gen_range(0.01..0.7)).collect();
            let mut sorted = probs.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if sorted.windows(2).all(|w| w[0] != w[1]) {
                break;
            }
        }
        let k = rng.gen_range(1..=m);
        let model = WinModel::Independent(&probs);
        let (mut greedy_set, greedy_u) = greedy_win_model(&model, k).unwrap();
        let (brute_set, brute_u) = brute_force_portfolio(&model, k).unwrap();
        let mut top_k: Vec<usize> = (0..m).collect();
        top_k.sort_by(|&a, &b| probs[b].partial_cmp(&probs[a]).unwrap());
        let mut top_k: Vec<usize> = top_k[..k].to_vec();
        top_k.sort_unstable();
        greedy_set.sort_unstable();
        assert_eq!(greedy_set, top_k, "greedy must pick the k largest probabilities");
        assert_eq!(brute_set, top_k, "exhaustive search must agree");
        assert!((greedy_u - brute_u).abs() <= 1e-15);
    }
}

#[test]
fn log_optimal_portfolio_is_top_k_under_independence() {
    let mut rng = StdRng::seed_from_u64(33);
    for _ in 0..100 {
        let m = rng.gen_range(3..=9);
        let mut probs: Vec<f64>;
        loop {
            probs = (0..m).map(|_| rng.gen_range(0.02..0.5)).collect();
            let mut sorted = probs.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if sorted.windows(2).all(|w| w[0] != w[1]) {
                break;
            }
        }
        // Exact product measure over all 2^m outcomes.
        let space = mixture_event_space(&probs, &probs, 0.0);
        let k = rng.gen_range(1..=m);
        let a = rng.gen_range(0.2..3.0);
        let b = a * rng.gen_range(1.5..1e6);
        let (mut log_set, _) = brute_force_log_optimal(&space, k, a, b).unwrap();
        log_set.sort_unstable();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&x, &y| probs[y].partial_cmp(&probs[x]).unwrap());
        let mut top_k: Vec<usize> = order[..k].to_vec();
        top_k.sort_unstable();
        assert_eq!(
            log_set, top_k,
            "log-return optimum must be the top-k set for any 0 < a < b"
        );
    }
}

#[test]
fn both_log_return_routes_agree_on_random_spaces() {
    let mut rng = StdRng::seed_from_u64(34);
    for _ in 0..50 {
        let m = rng.gen_range(2..=8);
        let outcomes = rng.gen_range(4..=64);
        let density = rng.gen_range(0.1..0.7);
        let space = random_event_space(&mut rng, outcomes, m, density);
        let k = rng.gen_range(1..=m);
        let subset: Vec<usize> = (0..k).collect();
        let a = rng.gen_range(0.2..2.0);
        let b = a * rng.gen_range(1.2..1e5);
        let direct = log_return_objective(&space, &subset, a, b).unwrap();
        let tail = log_return_objective_tail_form(&space, &subset, a, b).unwrap();
        assert!(
            (direct - tail).abs() <= 1e-12 * direct.abs().max(1.0),
            "outcome-sum {direct} and win-count {tail} routes disagree"
        );
    }
}

/// One round of the small-dependence check: build a mixture space, measure
/// (lambda, p), find both optimal portfolios exhaustively, and verify the
/// relative objective gap never exceeds the closed-form bound. Returns
/// whether the two portfolios genuinely differed.
#[allow(clippy::too_many_arguments)]
fn check_dependence_bound_round(
    rng: &mut StdRng,
    round: usize,
    base_range: (f64, f64),
    lift_range: (f64, f64),
    w_range: (f64, f64),
    cluster_size: usize,
    return_ratio_range: (f64, f64),
) -> bool {
    let m = rng.gen_range(5..=7usize);
    let k = rng.gen_range(2..=3usize);
    // Base win probabilities shrink with k so that the measured p stays
    // inside the theorem's (0, 1/k] assumption by construction.
    let base = rng.gen_range(base_range.0..base_range.1) * 2.0 / k as f64;
    let p_a: Vec<f64> = (0..m).map(|_| base * rng.gen_range(0.85..1.15)).collect();
    // The dependence component lifts a small cluster of events that then
    // co-occur more often than independence allows.
    let lift = rng.gen_range(lift_range.0..lift_range.1);
    let mut cluster: Vec<usize> = (0..m).collect();
    for i in 0..cluster_size {
        let j = rng.gen_range(i..m);
        cluster.swap(i, j);
    }
    let cluster = &cluster[..cluster_size];
    let mut p_b = p_a.clone();
    for &i in cluster {
        p_b[i] = (p_a[i] * lift).min(0.9);
    }
    let w = rng.gen_range(w_range.0..w_range.1);
    let space = mixture_event_space(&p_a, &p_b, w);

    // One win probability for the whole family, as the statement asks.
    let marginals: Vec<f64> = (0..m)
        .map(|i| (1.0 - w) * p_a[i] + w * p_b[i])
        .collect();
    let p = marginals.iter().sum::<f64>() / m as f64;
    assert!(p <= 1.0 / k as f64, "round {round}: p = {p} escaped (0, 1/k]");
    let lambda = measured_lambda(&space, k, p);
    assert!(
        lambda < 1.0,
        "round {round}: lambda = {lambda} escaped the theorem's assumption"
    );

    let a = rng.gen_range(0.5..2.0);
    let b = a * rng.gen_range(return_ratio_range.0..return_ratio_range.1);
    let (win_set, win_u) = brute_force_portfolio(&WinModel::EventSpace(&space), k).unwrap();
    let (log_set, _) = brute_force_log_optimal(&space, k, a, b).unwrap();
    let log_u = space.union_prob(&log_set).unwrap();
    let gap = (win_u - log_u) / win_u;
    assert!(gap >= 0.0, "the winners-optimal set maximises U by definition");
    let bound = theorem5_bound(lambda, k, p, a, b).unwrap();
    assert!(
        gap <= bound,
        "round {round}: measured gap {gap} exceeds the bound {bound} \
         (lambda = {lambda}, p = {p}, k = {k})"
    );
    log_set != win_set
}

#[test]
fn dependence_bound_dominates_the_gap_between_portfolio_styles() {
    let mut rng = StdRng::seed_from_u64(35);
    // Startup regime: tiny win probabilities and astronomical winner
    // returns. Here the theorem predicts near-coincidence, and indeed the
    // portfolios agree, making the gap zero.
    for round in 0..25 {
        check_dependence_bound_round(
            &mut rng,
            round,
            (0.04, 0.08),
            (1.2, 1.8),
            (0.02, 0.08),
            2,
            (1e4, 1e9),
        );
    }
    // Stress regime: moderate win probabilities, stronger clustering, and
    // modest returns, where the two styles genuinely part ways and the gap
    // is positive — the bound must still dominate.
    let mut positive_gaps = 0;
    for round in 0..60 {
        if check_dependence_bound_round(
            &mut rng,
            round,
            (0.15, 0.30),
            (1.5, 2.0),
            (0.15, 0.30),
            2,
            (1.5, 5.0),
        ) {
            positive_gaps += 1;
        }
    }
    assert!(
        positive_gaps >= 1,
        "the stress regime never separated the two portfolios, so the check is vacuous"
    );
}

#[test]
fn duplicate_events_are_never_paired_by_the_exact_search() {
    // Events 0 and 2 are identical; keeping both wastes a slot whenever any
    // other event covers new ground.
    let space = FiniteEventSpace::new(
        vec![0.4, 0.35, 0.25],
        vec![vec![0], vec![1], vec![0]],
    )
    .unwrap();
    let (set, u) = brute_force_portfolio(&WinModel::EventSpace(&space), 2).unwrap();
    assert_eq!(set, vec![0, 1]);
    assert!((u - 0.75).abs() <= 1e-15);
}

fn candidate_set(rng: &mut StdRng, n: usize, delta: f64) -> CandidateSet {
    let m = 2;
    let mut beta = BTreeMap::new();
    beta.insert(2009, vec![rng.gen_range(2.0..5.0), rng.gen_range(1.0..3.0)]);
    let model = ModelParams {
        beta,
        gamma: vec![rng.gen_range(2.0..4.0), rng.gen_range(1.0..3.0)],
        delta: vec![delta.max(0.0); m],
        nu: 6.37,
        tau: 4.83,
        delta_level: 10.0,
    };
    let ids: Vec<String> = (0..n).map(|i| format!("c{i:02}")).collect();
    let feats: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5)])
        .collect();
    CandidateSet::new(ids, feats, 2010, model).unwrap()
}

#[test]
fn identical_candidates_make_the_correlated_objective_smaller() {
    // Two candidates with the same feature vector win or lose together, so
    // averaging the survival product over draws can only exceed the product
    // of the averaged survivals. On a shared draw set this is the
    // Cauchy-Schwarz inequality on the empirical measure, hence exact.
    let mut rng = StdRng::seed_from_u64(36);
    for _ in 0..10 {
        let mut cs = candidate_set(&mut rng, 1, 0.5);
        let feats = cs.features(0).to_vec();
        let model = cs.model().clone();
        cs = CandidateSet::new(
            vec!["t0".into(), "t1".into()],
            vec![feats.clone(), feats],
            2010,
            model,
        )
        .unwrap();
        let draws = 20_000;
        let seed = rng.gen();
        let ds = DrawSet::generate(&cs, draws, seed).unwrap();
        let correlated = union_prob_correlated(&[0, 1], &cs, draws, seed).unwrap();
        let independent = union_prob_independent(&ds.mean_probs()).unwrap();
        assert!(
            correlated <= independent + 1e-12,
            "comonotone candidates: correlated {correlated} must not exceed \
             independent {independent}"
        );
    }
}

#[test]
fn zero_coefficient_noise_collapses_correlated_to_independent() {
    let mut rng = StdRng::seed_from_u64(37);
    for _ in 0..5 {
        let cs = candidate_set(&mut rng, 6, 0.0);
        let probs = cs.point_probs().unwrap();
        let subset: Vec<usize> = vec![0, 2, 3, 5];
        let chosen: Vec<f64> = subset.iter().map(|&i| probs[i]).collect();
        let independent = union_prob_independent(&chosen).unwrap();
        let correlated = union_prob_correlated(&subset, &cs, 300, rng.gen()).unwrap();
        assert!(
            (independent - correlated).abs() <= 1e-12,
            "delta = 0 must collapse the draw average: {independent} vs {correlated}"
        );
    }
}

#[test]
fn greedy_trace_under_one_draw_set_has_exactly_diminishing_gains() {
    let mut rng = StdRng::seed_from_u64(38);
    let cs = candidate_set(&mut rng, 8, 0.6);
    let pf = greedy_portfolio(
        &cs,
        8,
        ObjectiveKind::Correlated,
        &McConfig {
            draws: 4000,
            seed: 99,
        },
    )
    .unwrap();
    for w in pf.marginal_gains.windows(2) {
        assert!(w[1] <= w[0], "gains must not grow: {} then {}", w[0], w[1]);
    }
    for w in pf.objective_trace.windows(2) {
        assert!(w[1] >= w[0], "objective must not fall: {} then {}", w[0], w[1]);
    }
    assert_eq!(pf.ordered_ids.len(), 8);
}

#[test]
fn exact_ties_are_broken_toward_the_smaller_company_id() {
    let mut rng = StdRng::seed_from_u64(39);
    let template = candidate_set(&mut rng, 1, 0.4);
    let feats = template.features(0).to_vec();
    let cs = CandidateSet::new(
        vec!["zz".into(), "aa".into(), "mm".into()],
        vec![feats.clone(), feats.clone(), feats],
        2010,
        template.model().clone(),
    )
    .unwrap();
    for objective in [ObjectiveKind::Independent, ObjectiveKind::Correlated] {
        let pf = greedy_portfolio(&cs, 3, objective, &McConfig { draws: 500, seed: 5 }).unwrap();
        assert_eq!(
            pf.ordered_ids,
            vec!["aa".to_string(), "mm".to_string(), "zz".to_string()],
            "identical candidates must be taken in id order"
        );
    }
}
