//! `alphashift` — equilibrium analysis and bonus-budget control for
//! query–answer markets.
//!
//! Subcommands: `solve` analyzes a bimatrix game, `invert` reconstructs
//! a bonus model from frequency logs, `shift` applies budget-neutral
//! gain-raising steps, and `verify` checks a profile against a game.
//!
//! Exit codes: 0 on success, 1 for unreadable or malformed input, 2 for
//! parameter and degeneracy failures, 3 when `verify` rejects a profile.

mod report;

use std::fs;
use std::path::{Path, PathBuf};

use alphashift_core::formats::{GameFile, ModelFile, ProfileFile, ShiftStepRecord};
use alphashift_core::game::{MixedStrategy, Player, Profile};
use alphashift_core::ingest::{self, FrequencyTable, TableFormat};
use alphashift_core::{Error, alpha, shift};
use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{
    InvertReport, InvertVerification, MixedReport, PureCell, SolveReport, VerifyReport, sig12,
    sig12_vec, to_json_pretty,
};

#[derive(Parser)]
#[command(
    name = "alphashift",
    version,
    about = "Equilibrium analysis and bonus-budget control for query-answer markets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a bimatrix game: dominance, pure equilibria, and the 2x2 mixed equilibrium
    Solve(SolveArgs),
    /// Reconstruct a bonus model from query and answer frequency logs
    Invert(InvertArgs),
    /// Apply budget-neutral bonus steps that raise the provider gain
    Shift(ShiftArgs),
    /// Check a strategy profile against a game
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SolveArgs {
    /// Game description (JSON)
    #[arg(long)]
    game: PathBuf,
    /// Equilibrium verification tolerance
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Report format (solve supports json only)
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also write the report to this file
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct InvertArgs {
    /// Query frequency log (.csv or .json)
    #[arg(long)]
    queries: PathBuf,
    /// Answer frequency log (.csv or .json)
    #[arg(long)]
    answers: PathBuf,
    /// Total bonus budget to distribute; without it the answer-side
    /// scale is fixed at 1
    #[arg(long)]
    budget: Option<f64>,
    /// Additive smoothing applied to both logs
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Number of strategies to keep per side, bucketing the tail;
    /// defaults to the smaller side's distinct count
    #[arg(long)]
    target_n: Option<usize>,
    /// Round-trip verification tolerance
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the reconstructed model here (JSON, loadable by shift)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ShiftArgs {
    /// Bonus model (JSON)
    #[arg(long)]
    model: PathBuf,
    /// Step size
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Number of steps to attempt
    #[arg(long, default_value_t = 1)]
    steps: usize,
    /// Rescale the model to this budget before stepping; overrides the
    /// budget stored in the model file
    #[arg(long)]
    budget: Option<f64>,
    /// Stop early once a step moves the gain by less than this
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also write the report to this file
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Game description (JSON)
    #[arg(long)]
    game: PathBuf,
    /// Strategy profile to check (JSON)
    #[arg(long)]
    profile: PathBuf,
    /// Largest deviation gain still accepted
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Report format (verify supports json only)
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also write the report to this file
    #[arg(long)]
    output: Option<PathBuf>,
}

/// A failed run: what to print on stderr and the exit code to use.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn at(self, path: &Path) -> Self {
        Self {
            code: self.code,
            message: format!("{}: {}", path.display(), self.message),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            // Malformed or out-of-domain input data.
            Error::Parse { .. } | Error::Shape(_) | Error::Domain(_) => 1,
            // Parameter and degeneracy failures.
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    };
    std::process::exit(code);
}

fn run(cli: &Cli) -> Result<i32, Failure> {
    match &cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Invert(args) => run_invert(args),
        Command::Shift(args) => run_shift(args),
        Command::Verify(args) => run_verify(args),
    }
}

fn run_solve(args: &SolveArgs) -> Result<i32, Failure> {
    require_json(args.format, "solve")?;
    require_tolerance(args.tolerance)?;
    let file = load_game_file(&args.game)?;
    let game = file
        .to_game()
        .map_err(|e| Failure::from(e).at(&args.game))?;

    let mut exit = 0;
    let pure_equilibria = game
        .find_pure_equilibria()
        .into_iter()
        .map(|(row, col)| {
            let profile = Profile::new(
                MixedStrategy::pure(row, game.n_rows())?,
                MixedStrategy::pure(col, game.n_cols())?,
            );
            let check = game.verify_equilibrium(&profile, args.tolerance)?;
            Ok(PureCell {
                row,
                col,
                passed: check.passed,
                worst_violation: sig12(check.worst_violation),
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let mixed = if game.n_rows() == 2 && game.n_cols() == 2 {
        match game.mixed_equilibrium_2x2() {
            Ok(profile) => {
                let check = game
                    .verify_equilibrium(&profile, args.tolerance)
                    .map_err(Failure::from)?;
                MixedReport {
                    status: "found",
                    p: Some(sig12_vec(profile.p().probs())),
                    q: Some(sig12_vec(profile.q().probs())),
                    passed: Some(check.passed),
                    worst_violation: Some(sig12(check.worst_violation)),
                }
            }
            Err(Error::NoInteriorEquilibrium(_)) => MixedReport::absent("no_interior_equilibrium"),
            Err(Error::DegenerateGame(_)) => {
                exit = 2;
                MixedReport::absent("degenerate_game")
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        MixedReport::absent("not_2x2")
    };

    let report = SolveReport {
        command: "solve",
        tolerance: sig12(args.tolerance),
        n_rows: game.n_rows(),
        n_cols: game.n_cols(),
        row_labels: file.row_labels.clone(),
        col_labels: file.col_labels.clone(),
        dominant_a: game.dominant_strategy(Player::A),
        dominant_b: game.dominant_strategy(Player::B),
        pure_equilibria,
        mixed,
    };
    emit(&to_json_pretty(&report), args.output.as_deref())?;
    Ok(exit)
}

fn run_verify(args: &VerifyArgs) -> Result<i32, Failure> {
    require_json(args.format, "verify")?;
    require_tolerance(args.tolerance)?;
    let game = load_game_file(&args.game)?
        .to_game()
        .map_err(|e| Failure::from(e).at(&args.game))?;
    let text = read_input(&args.profile)?;
    let profile = ProfileFile::from_json(&text)
        .and_then(|f| f.to_profile())
        .map_err(|e| Failure::from(e).at(&args.profile))?;
    let check = game
        .verify_equilibrium(&profile, args.tolerance)
        .map_err(Failure::from)?;

    let report = VerifyReport {
        command: "verify",
        tolerance: sig12(args.tolerance),
        passed: check.passed,
        worst_violation: sig12(check.worst_violation),
    };
    emit(&to_json_pretty(&report), args.output.as_deref())?;
    Ok(if check.passed { 0 } else { 3 })
}

fn run_invert(args: &InvertArgs) -> Result<i32, Failure> {
    require_tolerance(args.tolerance)?;
    if !args.alpha.is_finite() || args.alpha < 0.0 {
        return Err(Failure::usage(format!(
            "--alpha must be finite and non-negative, got {}",
            args.alpha
        )));
    }
    if let Some(budget) = args.budget {
        require_positive_budget(budget)?;
    }

    let queries = load_table(&args.queries)?;
    let answers = load_table(&args.answers)?;
    let queries_distinct = queries.len();
    let answers_distinct = answers.len();

    let aligned = ingest::align(&queries, &answers, args.target_n, args.alpha)?;
    let profile = alpha::EquilibriumProfile::new(aligned.p().clone(), aligned.q().clone())
        .map_err(Failure::from)?;
    let model = match args.budget {
        Some(budget) => alpha::invert_with_budget(&profile, budget),
        None => alpha::invert_from_equilibrium(&profile, &alpha::ScaleConstants::default()),
    }
    .map_err(Failure::from)?;

    // Check the round trip: the reconstructed model must reproduce the
    // distributions it came from as its own equilibrium.
    let equilibrium = model.equilibrium();
    let max_p_deviation = max_abs_difference(equilibrium.p().probs(), aligned.p().probs());
    let max_q_deviation = max_abs_difference(equilibrium.q().probs(), aligned.q().probs());
    let passed = max_p_deviation <= args.tolerance && max_q_deviation <= args.tolerance;

    let labels: Vec<String> = aligned.labels().iter().map(|s| s.to_string()).collect();
    let answer_labels: Vec<String> = aligned
        .answer_labels()
        .iter()
        .map(|s| s.to_string())
        .collect();
    let model_file = ModelFile {
        a: sig12_vec(model.a()),
        b: sig12_vec(model.b()),
        budget: model.budget().map(sig12),
        labels: Some(labels.clone()),
    };
    let report = InvertReport {
        command: "invert",
        n: aligned.n(),
        smoothing_alpha: sig12(args.alpha),
        target_n: args.target_n,
        queries_distinct,
        answers_distinct,
        queries_tail_merged: aligned.n() < queries_distinct,
        answers_tail_merged: aligned.n() < answers_distinct,
        labels,
        answer_labels,
        p: sig12_vec(aligned.p().probs()),
        q: sig12_vec(aligned.q().probs()),
        model: model_file.clone(),
        verification: InvertVerification {
            tolerance: sig12(args.tolerance),
            max_p_deviation: sig12(max_p_deviation),
            max_q_deviation: sig12(max_q_deviation),
            passed,
        },
    };

    let text = match args.format {
        Format::Json => to_json_pretty(&report),
        Format::Csv => report::invert_csv(&report).map_err(Failure::usage)?,
    };
    print!("{text}");
    if let Some(path) = &args.output {
        write_output(path, &to_json_pretty(&model_file))?;
    }
    Ok(0)
}

fn run_shift(args: &ShiftArgs) -> Result<i32, Failure> {
    require_tolerance(args.tolerance)?;
    if !args.epsilon.is_finite() || args.epsilon <= 0.0 {
        return Err(Failure::usage(format!(
            "--epsilon must be finite and positive, got {}",
            args.epsilon
        )));
    }
    if args.steps == 0 {
        return Err(Failure::usage("--steps must be at least 1"));
    }
    if let Some(budget) = args.budget {
        require_positive_budget(budget)?;
    }

    let text = read_input(&args.model)?;
    let mut model = ModelFile::from_json(&text)
        .and_then(|f| f.to_model())
        .map_err(|e| Failure::from(e).at(&args.model))?;
    if let Some(budget) = args.budget {
        model = model.normalize_to_budget(budget).map_err(Failure::from)?;
    }

    let trace =
        shift::iterate(&model, args.epsilon, args.steps, args.tolerance).map_err(Failure::from)?;
    if trace.outcomes.is_empty() {
        let message = match trace.stop {
            shift::StopReason::StepTooLarge { max_epsilon } => format!(
                "epsilon {} would push a bonus below its positivity floor; \
                 the largest feasible step for this model is {}",
                args.epsilon, max_epsilon
            ),
            _ => "no steps were applied".to_string(),
        };
        return Err(Failure::usage(message));
    }
    if let Some((index, outcome)) = trace
        .outcomes
        .iter()
        .enumerate()
        .find(|(_, o)| o.actual_delta < 0.0)
    {
        return Err(Failure::usage(format!(
            "step {} lowers the gain from {} to {}; choose a smaller --epsilon",
            index + 1,
            outcome.gain_before,
            outcome.gain_after
        )));
    }

    let records = trace
        .outcomes
        .iter()
        .enumerate()
        .map(|(index, outcome)| {
            let estimate =
                shift::q_weighted_estimate(&outcome.plan, outcome.model_before.equilibrium().q())?;
            Ok(ShiftStepRecord {
                step: index + 1,
                b_before: sig12_vec(outcome.model_before.b()),
                b_after: sig12_vec(outcome.model_after.b()),
                gain_before: sig12(outcome.gain_before),
                gain_after: sig12(outcome.gain_after),
                predicted_delta: sig12(outcome.predicted_delta()),
                actual_delta: sig12(outcome.actual_delta),
                threshold_w: sig12(outcome.plan.threshold),
                q_weighted_estimate: sig12(estimate),
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let text = match args.format {
        Format::Json => to_json_pretty(&records),
        Format::Csv => report::shift_csv(&records),
    };
    emit(&text, args.output.as_deref())?;
    if let shift::StopReason::StepTooLarge { max_epsilon } = trace.stop {
        eprintln!(
            "note: stopped after {} of {} steps; the next step would cross the \
             positivity floor (largest feasible epsilon {})",
            records.len(),
            args.steps,
            max_epsilon
        );
    }
    Ok(0)
}

fn require_json(format: Format, command: &str) -> Result<(), Failure> {
    if format == Format::Csv {
        return Err(Failure::usage(format!(
            "{command} reports are structured; csv is only available for invert and shift"
        )));
    }
    Ok(())
}

fn require_tolerance(tolerance: f64) -> Result<(), Failure> {
    if !tolerance.is_finite() || tolerance < 0.0 {
        return Err(Failure::usage(format!(
            "--tolerance must be finite and non-negative, got {tolerance}"
        )));
    }
    Ok(())
}

fn require_positive_budget(budget: f64) -> Result<(), Failure> {
    if !budget.is_finite() || budget <= 0.0 {
        return Err(Failure::usage(format!(
            "--budget must be finite and positive, got {budget}"
        )));
    }
    Ok(())
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn load_game_file(path: &Path) -> Result<GameFile, Failure> {
    let text = read_input(path)?;
    GameFile::from_json(&text).map_err(|e| Failure::from(e).at(path))
}

fn load_table(path: &Path) -> Result<FrequencyTable, Failure> {
    let format = match path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .as_deref()
    {
        Some("csv") => TableFormat::Csv,
        Some("json") => TableFormat::Json,
        _ => {
            return Err(Failure::input(format!(
                "cannot infer the format of {}: expected a .csv or .json extension",
                path.display()
            )));
        }
    };
    let text = read_input(path)?;
    FrequencyTable::parse(&text, format).map_err(|e| Failure::from(e).at(path))
}

fn max_abs_difference(xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    print!("{text}");
    if let Some(path) = output {
        write_output(path, text)?;
    }
    Ok(())
}
