//! `pickwin`: simulate venture markets, build company features, fit the
//! exit model, and pick portfolios.
//!
//! Every command that produces files takes `--out DIR` and writes a fixed
//! set of artifacts there plus a `manifest.json` recording the command, its
//! inputs, a hash of the run configuration (flag values and input file
//! bytes), and phase timings. Given the same inputs and flags, the data
//! artifacts are byte-identical across runs and thread counts; only the
//! timings in the manifest vary.
//!
//! Exit codes: 0 success, 1 runtime failure (optimisation, writing),
//! 2 usage or input error (bad flags, unreadable or invalid inputs).

mod manifest;
mod svg;
mod theory;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use manifest::{ConfigHash, RunManifest};
use pickwin::features::{build_features, soft_impute_with_trace, FeatureConfig};
use pickwin::io;
use pickwin::likelihood::{fit, FitConfig, PriorConfig};
use pickwin::portfolio::{
    greedy_portfolio, performance_curve, theorem5_bound, CandidateSet, DrawSet, McConfig,
    ObjectiveKind,
};
use pickwin::simulator::generate_dataset;

#[derive(Parser)]
#[command(name = "pickwin", version, about = "Venture portfolio selection toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Objective {
    /// Treat candidate exits as independent given the point probabilities.
    Independent,
    /// Integrate shared year-level noise with common random draws.
    Correlated,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic market from a simulation config.
    ///
    /// Writes histories.csv, features.csv, outcomes.csv, ground_truth.json
    /// and an echo of the config.
    Simulate {
        /// Simulation config JSON.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the company feature matrix from raw investment and personnel
    /// tables. Missing entries are left blank for `impute`.
    Features {
        /// Investment rounds CSV (investor_id, company_id, date).
        #[arg(long)]
        investments: PathBuf,
        /// Company events CSV (company_id, kind, date).
        #[arg(long)]
        events: PathBuf,
        /// People CSV (person_id, company_id, role).
        #[arg(long)]
        people: PathBuf,
        /// Prior affiliations CSV (person_id, value).
        #[arg(long)]
        affiliations: PathBuf,
        /// Schools CSV (person_id, value).
        #[arg(long)]
        schools: PathBuf,
        /// Majors CSV (person_id, value).
        #[arg(long)]
        majors: PathBuf,
        /// Sector labels CSV (company_id, sector).
        #[arg(long)]
        sectors: PathBuf,
        /// Optional feature-build config JSON (defaults otherwise).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Fill missing feature cells by nuclear-norm-regularised matrix
    /// completion; observed cells pass through unchanged.
    Impute {
        /// Feature matrix CSV with missing cells.
        #[arg(long)]
        features: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the exit model to funding histories by maximum a posteriori
    /// estimation with random restarts.
    Fit {
        /// Funding histories CSV.
        #[arg(long)]
        histories: PathBuf,
        /// Complete feature matrix CSV.
        #[arg(long)]
        features: PathBuf,
        /// Optimiser restarts.
        #[arg(long, default_value_t = 100)]
        restarts: usize,
        /// Funding level treated as the exit barrier.
        #[arg(long, default_value_t = 10.0)]
        delta_level: f64,
        /// Restart RNG seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Posterior mean exit probability for every company in a cohort.
    Predict {
        /// Fitted parameters JSON from `fit`.
        #[arg(long)]
        params: PathBuf,
        /// Complete feature matrix CSV for the cohort.
        #[arg(long)]
        features: PathBuf,
        /// Founding year of the cohort.
        #[arg(long)]
        year: i32,
        /// Monte Carlo draws over the shared year-level noise.
        #[arg(long, default_value_t = 50_000)]
        draws: usize,
        /// Draw RNG seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Greedily select a portfolio maximising the probability of at least
    /// one exit.
    Portfolio {
        /// Fitted parameters JSON from `fit`.
        #[arg(long)]
        params: PathBuf,
        /// Complete feature matrix CSV for the cohort.
        #[arg(long)]
        features: PathBuf,
        /// Founding year of the cohort.
        #[arg(long)]
        year: i32,
        /// Portfolio size.
        #[arg(long, default_value_t = 20)]
        k: usize,
        /// Win objective.
        #[arg(long, value_enum, default_value_t = Objective::Correlated)]
        objective: Objective,
        /// Monte Carlo draws for the correlated objective.
        #[arg(long, default_value_t = 50_000)]
        draws: usize,
        /// Draw RNG seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a selected portfolio against realised outcomes, producing the
    /// cumulative-exits curve as CSV and SVG.
    Curve {
        /// Portfolio CSV from `portfolio`.
        #[arg(long)]
        portfolio: PathBuf,
        /// Realised outcomes CSV (company_id, exited).
        #[arg(long)]
        outcomes: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the seeded portfolio-theory self-checks, or evaluate the
    /// closed-form dependence bound at one point.
    ///
    /// With no bound flags, runs the property suites and prints the bound
    /// table. With all of --lambda, --k, --p, --a and --b, prints the bound
    /// at that point instead.
    TheoryCheck {
        /// Dependence level in [0, 1).
        #[arg(long)]
        lambda: Option<f64>,
        /// Portfolio size.
        #[arg(long)]
        k: Option<usize>,
        /// Per-company win probability.
        #[arg(long)]
        p: Option<f64>,
        /// Return multiple of a losing company.
        #[arg(long)]
        a: Option<f64>,
        /// Return multiple of a winning company.
        #[arg(long)]
        b: Option<f64>,
        /// Property-suite RNG seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    /// Bad flags or unreadable/invalid inputs: exit code 2.
    Usage(String),
    /// The computation or an output write failed: exit code 1.
    Runtime(String),
}

type CmdResult = Result<(), Failure>;

fn usage<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Usage(e.to_string()))
}

fn runtime<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Runtime(e.to_string()))
}

/// Feed an input file's bytes into the run hash and return them.
fn hash_input(hash: &mut ConfigHash, path: &Path) -> Result<Vec<u8>, Failure> {
    let bytes = fs::read(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    hash.add_bytes(&bytes);
    Ok(bytes)
}

struct Phases {
    manifest: RunManifest,
    started: Instant,
}

impl Phases {
    fn new(manifest: RunManifest) -> Self {
        Phases {
            manifest,
            started: Instant::now(),
        }
    }

    /// Close the current phase under `name` and start the next one.
    fn mark(&mut self, name: &str) {
        let ms = self.started.elapsed().as_millis() as u64;
        self.manifest.record(name, ms);
        self.started = Instant::now();
    }

    fn finish(mut self, name: &str, out: &Path) -> CmdResult {
        self.mark(name);
        runtime(self.manifest.write(out))
    }
}

fn ensure_out_dir(out: &Path) -> CmdResult {
    runtime(
        fs::create_dir_all(out)
            .map_err(|e| format!("cannot create output directory {}: {e}", out.display())),
    )
}

fn display(paths: &[&Path]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = init_threads().and_then(|_| run(cli.command)) {
        match f {
            Failure::Usage(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            Failure::Runtime(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
        }
    } else {
        ExitCode::SUCCESS
    }
}

/// Size the global worker pool from PICKWIN_THREADS if set. Results do not
/// depend on the pool size; only wall time does.
fn init_threads() -> CmdResult {
    match std::env::var("PICKWIN_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw.parse().map_err(|_| {
                Failure::Usage(format!("PICKWIN_THREADS must be a positive integer, got {raw:?}"))
            })?;
            if n == 0 {
                return Err(Failure::Usage(
                    "PICKWIN_THREADS must be a positive integer, got 0".to_string(),
                ));
            }
            runtime(rayon::ThreadPoolBuilder::new().num_threads(n).build_global())
        }
    }
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::Simulate { config, out } => cmd_simulate(&config, &out),
        Command::Features {
            investments,
            events,
            people,
            affiliations,
            schools,
            majors,
            sectors,
            config,
            out,
        } => cmd_features(
            &investments,
            &events,
            &people,
            &affiliations,
            &schools,
            &majors,
            &sectors,
            config.as_deref(),
            &out,
        ),
        Command::Impute { features, out } => cmd_impute(&features, &out),
        Command::Fit {
            histories,
            features,
            restarts,
            delta_level,
            seed,
            out,
        } => cmd_fit(&histories, &features, restarts, delta_level, seed, &out),
        Command::Predict {
            params,
            features,
            year,
            draws,
            seed,
            out,
        } => cmd_predict(&params, &features, year, draws, seed, &out),
        Command::Portfolio {
            params,
            features,
            year,
            k,
            objective,
            draws,
            seed,
            out,
        } => cmd_portfolio(&params, &features, year, k, objective, draws, seed, &out),
        Command::Curve {
            portfolio,
            outcomes,
            out,
        } => cmd_curve(&portfolio, &outcomes, &out),
        Command::TheoryCheck {
            lambda,
            k,
            p,
            a,
            b,
            seed,
        } => cmd_theory_check(lambda, k, p, a, b, seed),
    }
}

fn cmd_simulate(config_path: &Path, out: &Path) -> CmdResult {
    let mut hash = ConfigHash::new();
    hash.add_str("simulate");
    hash_input(&mut hash, config_path)?;
    let config = usage(io::read_sim_config_json(config_path))?;

    let mut phases = Phases::new(RunManifest::new(
        "simulate",
        display(&[config_path]),
        &hash,
        Some(config.rng_seed),
    ));
    phases.mark("read");

    let data = runtime(generate_dataset(&config))?;
    let outcomes: BTreeMap<String, bool> = data
        .histories
        .iter()
        .map(|h| (h.company_id.clone(), h.exited()))
        .collect();
    let truth = io::GroundTruth {
        params: data.true_params.clone(),
        profiles: data
            .histories
            .iter()
            .map(|h| h.company_id.clone())
            .zip(data.profiles.iter().cloned())
            .collect(),
    };
    phases.mark("simulate");

    ensure_out_dir(out)?;
    runtime(io::write_histories_csv(&out.join("histories.csv"), &data.histories))?;
    runtime(io::write_features_csv(&out.join("features.csv"), &data.features))?;
    runtime(io::write_outcomes_csv(&out.join("outcomes.csv"), &outcomes))?;
    runtime(io::write_ground_truth_json(&out.join("ground_truth.json"), &truth))?;
    runtime(io::write_sim_config_json(&out.join("sim_config.json"), &config))?;

    let exits = outcomes.values().filter(|e| **e).count();
    println!(
        "simulated {} companies founded {}..={} ({} exited) -> {}",
        data.histories.len(),
        config.years.0,
        config.years.1,
        exits,
        out.display()
    );
    phases.finish("write", out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_features(
    investments: &Path,
    events: &Path,
    people: &Path,
    affiliations: &Path,
    schools: &Path,
    majors: &Path,
    sectors: &Path,
    config_path: Option<&Path>,
    out: &Path,
) -> CmdResult {
    let mut hash = ConfigHash::new();
    hash.add_str("features");
    let mut inputs = vec![investments, events, people, affiliations, schools, majors, sectors];
    if let Some(c) = config_path {
        inputs.push(c);
    }
    for path in &inputs {
        hash_input(&mut hash, path)?;
    }

    let network = usage(io::read_network(investments, events))?;
    let personnel = usage(io::read_personnel(people, affiliations, schools, majors))?;
    let sector_labels = usage(io::read_sectors(sectors))?;
    let config = match config_path {
        None => FeatureConfig::default(),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| {
                Failure::Usage(format!(
                    "{}: line {}, column {}: {e}",
                    path.display(),
                    e.line(),
                    e.column()
                ))
            })?
        }
    };

    let mut phases = Phases::new(RunManifest::new("features", display(&inputs), &hash, None));
    phases.mark("read");

    let matrix = runtime(build_features(&network, &personnel, &sector_labels, &config))?;
    phases.mark("build");

    ensure_out_dir(out)?;
    runtime(io::write_features_csv(&out.join("features.csv"), &matrix))?;

    let cells = matrix.num_features() * matrix.num_companies();
    println!(
        "built {} features for {} companies ({} of {} cells observed) -> {}",
        matrix.num_features(),
        matrix.num_companies(),
        matrix.observed_count(),
        cells,
        out.display()
    );
    phases.finish("write", out)
}

fn cmd_impute(features: &Path, out: &Path) -> CmdResult {
    let mut hash = ConfigHash::new();
    hash.add_str("impute");
    hash_input(&mut hash, features)?;
    let matrix = usage(io::read_features_csv(features))?;

    let mut phases = Phases::new(RunManifest::new("impute", display(&[features]), &hash, None));
    phases.mark("read");

    let missing = matrix.num_features() * matrix.num_companies() - matrix.observed_count();
    let (completed, trace) = runtime(soft_impute_with_trace(&matrix))?;
    phases.mark("impute");

    ensure_out_dir(out)?;
    runtime(io::write_features_csv(&out.join("features.csv"), &completed))?;

    println!(
        "imputed {} missing cells in {} iterations -> {}",
        missing,
        trace.len(),
        out.display()
    );
    phases.finish("write", out)
}

fn cmd_fit(
    histories_path: &Path,
    features_path: &Path,
    restarts: usize,
    delta_level: f64,
    seed: u64,
    out: &Path,
) -> CmdResult {
    let mut hash = ConfigHash::new();
    hash.add_str("fit");
    hash_input(&mut hash, histories_path)?;
    hash_input(&mut hash, features_path)?;
    hash.add_str(&format!("restarts={restarts}"));
    hash.add_str(&format!("delta_level={delta_level}"));
    hash.add_str(&format!("seed={seed}"));

    let histories = usage(io::read_histories_csv(histories_path))?;
    let matrix = usage(io::read_features_csv(features_path))?;

    let mut phases = Phases::new(RunManifest::new(
        "fit",
        display(&[histories_path, features_path]),
        &hash,
        Some(seed),
    ));
    phases.mark("read");

    let config = FitConfig {
        restarts,
        rng_seed: seed,
        ..FitConfig::default()
    };
    let (params, log_posterior) = runtime(fit(
        &histories,
        &matrix,
        &PriorConfig::default(),
        &config,
        delta_level,
    ))?;
    phases.mark("fit");

    ensure_out_dir(out)?;
    let output = io::FitOutput {
        params,
        log_posterior,
        feature_names: matrix.feature_names().to_vec(),
        restarts,
        rng_seed: seed,
    };
    runtime(io::write_params_json(&out.join("params.json"), &output))?;

    println!(
        "fitted {} companies, log posterior {:.4} -> {}",
        histories.len(),
        log_posterior,
        out.display()
    );
    phases.finish("write", out)
}

/// Load fitted parameters and a cohort's features and assemble candidates,
/// checking that the two artifacts describe the same feature set.
fn load_candidates(
    params_path: &Path,
    features_path: &Path,
    year: i32,
) -> Result<CandidateSet, Failure> {
    let output = usage(io::read_params_json(params_path))?;
    let matrix = usage(io::read_features_csv(features_path))?;
    if output.feature_names != matrix.feature_names() {
        return Err(Failure::Usage(format!(
            "feature names in {} do not match {}: fitted on [{}], given [{}]",
            features_path.display(),
            params_path.display(),
            output.feature_names.join(", "),
            matrix.feature_names().join(", ")
        )));
    }
    if !matrix.is_complete() {
        return Err(Failure::Usage(format!(
            "{} has missing cells; run `pickwin impute` first",
            features_path.display()
        )));
    }
    let ids = matrix.company_ids().to_vec();
    let columns: Vec<Vec<f64>> = (0..matrix.num_companies())
        .map(|j| matrix.column(j).to_vec())
        .collect();
    usage(CandidateSet::new(ids, columns, year, output.params))
}

fn cmd_predict(
    params_path: &Path,
    features_path: &Path,
    year: i32,
    draws: usize,
    seed: u64,
    out: &Path,
) -> CmdResult {
    let mut hash = ConfigHash::new();
    hash.add_str("predict");
    hash_input(&mut hash, params_path)?;
    hash_input(&mut hash, features_path)?;
    hash.add_str(&format!("year={year}"));
    hash.add_str(&format!("draws={draws}"));
    hash.add_str(&format!("seed={seed}"));

    let candidates = load_candidates(params_path, features_path, year)?;
    if draws == 0 {
        return Err(Failure::Usage("--draws must be at least 1".to_string()));
    }

    let mut phases = Phases::new(RunManifest::new(
        "predict",
        display(&[params_path, features_path]),
        &hash,
        Some(seed),
    ));
    phases.mark("read");

    let draw_set = runtime(DrawSet::generate(&candidates, draws, seed))?;
    let probs = draw_set.mean_probs();
    phases.mark("predict");

    ensure_out_dir(out)?;
    runtime(io::write_predictions_csv(
        &out.join("predictions.csv"),
        candidates.company_ids(),
        &probs,
    ))?;

    let best = probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("probabilities are finite"))
        .expect("candidate set is never empty");
    println!(
        "predicted {} companies founded {}, top {} at {:.4} -> {}",
        candidates.len(),
        year,
        candidates.company_ids()[best.0],
        best.1,
        out.display()
    );
    phases.finish("write", out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_portfolio(
    params_path: &Path,
    features_path: &Path,
    year: i32,
    k: usize,
    objective: Objective,
    draws: usize,
    seed: u64,
    out: &Path,
) -> CmdResult {
    let mut hash = ConfigHash::new();
    hash.add_str("portfolio");
    hash_input(&mut hash, params_path)?;
    hash_input(&mut hash, features_path)?;
    hash.add_str(&format!("year={year}"));
    hash.add_str(&format!("k={k}"));
    hash.add_str(match objective {
        Objective::Independent => "objective=independent",
        Objective::Correlated => "objective=correlated",
    });
    hash.add_str(&format!("draws={draws}"));
    hash.add_str(&format!("seed={seed}"));

    let candidates = load_candidates(params_path, features_path, year)?;
    if k == 0 || k > candidates.len() {
        return Err(Failure::Usage(format!(
            "--k must be between 1 and the {} candidates, got {k}",
            candidates.len()
        )));
    }
    if objective == Objective::Correlated && draws == 0 {
        return Err(Failure::Usage("--draws must be at least 1".to_string()));
    }

    let mut phases = Phases::new(RunManifest::new(
        "portfolio",
        display(&[params_path, features_path]),
        &hash,
        Some(seed),
    ));
    phases.mark("read");

    let kind = match objective {
        Objective::Independent => ObjectiveKind::Independent,
        Objective::Correlated => ObjectiveKind::Correlated,
    };
    let mc = McConfig { draws, seed };
    let selection = runtime(greedy_portfolio(&candidates, k, kind, &mc))?;

    // Per-company exit probabilities under the same model as the objective:
    // the correlated run reuses the seed, so these are the draw-set means the
    // selection itself was scored on.
    let probs = match kind {
        ObjectiveKind::Independent => runtime(candidates.point_probs())?,
        ObjectiveKind::Correlated => {
            runtime(DrawSet::generate(&candidates, draws, seed))?.mean_probs()
        }
    };
    let index: BTreeMap<&str, usize> = candidates
        .company_ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let selected_probs: Vec<f64> = selection
        .ordered_ids
        .iter()
        .map(|id| probs[index[id.as_str()]])
        .collect();
    phases.mark("select");

    ensure_out_dir(out)?;
    runtime(io::write_portfolio_csv(
        &out.join("portfolio.csv"),
        &selection,
        &selected_probs,
    ))?;

    println!(
        "selected {} of {} candidates, P(at least one exit) = {:.4} -> {}",
        selection.ordered_ids.len(),
        candidates.len(),
        selection.objective_trace.last().copied().unwrap_or(0.0),
        out.display()
    );
    phases.finish("write", out)
}

fn cmd_curve(portfolio_path: &Path, outcomes_path: &Path, out: &Path) -> CmdResult {
    let mut hash = ConfigHash::new();
    hash.add_str("curve");
    hash_input(&mut hash, portfolio_path)?;
    hash_input(&mut hash, outcomes_path)?;

    let (selection, _) = usage(io::read_portfolio_csv(portfolio_path))?;
    let outcomes = usage(io::read_outcomes_csv(outcomes_path))?;
    let curve = usage(performance_curve(&selection, &outcomes))?;

    let mut phases = Phases::new(RunManifest::new(
        "curve",
        display(&[portfolio_path, outcomes_path]),
        &hash,
        None,
    ));
    phases.mark("read");

    ensure_out_dir(out)?;
    runtime(io::write_curve_csv(&out.join("curve.csv"), &curve))?;
    runtime(io::atomic_write(
        &out.join("curve.svg"),
        svg::render_curve(&curve).as_bytes(),
    ))?;

    let last = curve.last().expect("portfolio files are never empty");
    println!(
        "portfolio of {} realised {} exits (random baseline {:.2}) -> {}",
        last.size,
        last.exits,
        last.random_baseline,
        out.display()
    );
    phases.finish("write", out)
}

fn cmd_theory_check(
    lambda: Option<f64>,
    k: Option<usize>,
    p: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    seed: u64,
) -> CmdResult {
    let bound_flags = [lambda.is_some(), k.is_some(), p.is_some(), a.is_some(), b.is_some()];
    let given = bound_flags.iter().filter(|s| **s).count();
    if given == 5 {
        let (lambda, k, p, a, b) = (
            lambda.expect("checked"),
            k.expect("checked"),
            p.expect("checked"),
            a.expect("checked"),
            b.expect("checked"),
        );
        let bound = usage(theorem5_bound(lambda, k, p, a, b))?;
        println!(
            "relative objective gap bound: {bound:.5} (lambda={lambda}, k={k}, p={p}, a={a}, b={b})"
        );
        return Ok(());
    }
    if given != 0 {
        return Err(Failure::Usage(
            "--lambda, --k, --p, --a and --b must be given together (or none, to run the suites)"
                .to_string(),
        ));
    }
    let lines = theory::run_suites(seed).map_err(Failure::Runtime)?;
    for line in lines {
        println!("ok: {line}");
    }
    println!();
    print!("{}", theory::bound_table());
    Ok(())
}
