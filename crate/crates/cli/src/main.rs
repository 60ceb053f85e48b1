//! `qmix`: analyze quantum channels for ergodicity and exponential mixing.
//!
//! Reports go to standard output as JSON, notes to standard error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qmix_core::analysis::{analyze, AnalyzeOptions};
use qmix_core::channels::{
    convex_with_omega, dephasing_group, group_average, mixed_unitary, omega, pauli_group,
    qubit_depolarizing, random_channel, random_unistochastic, unistochastic,
};
use qmix_core::dobrushin::{kappa_analytic, kappa_scalar, ChannelFamily, SearchBudget};
use qmix_core::dynamics::{
    classify, fixed_space, iterate_trajectory, verify_bound, DEFAULT_TOL_SPEC,
};
use qmix_core::{DensityMatrix, Error, KrausChannel, Operator};

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_AMBIGUOUS: u8 = 4;
const EXIT_PRECONDITION: u8 = 5;
const EXIT_NUMERICAL: u8 = 6;

#[derive(Parser)]
#[command(
    name = "qmix",
    version,
    about = "Ergodicity and mixing analysis of quantum channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a channel from a standard family as JSON.
    Zoo(ZooArgs),
    /// Validate, estimate kappa, classify and check the exponential bound.
    Analyze(AnalyzeArgs),
    /// Write the distance of Mⁿ(ρ₀) to a reference state as CSV.
    Iterate(IterateArgs),
    /// Check ‖Mⁿ(ρ) − ρ_*‖ ≤ 2e^{−nθ} on random initial states.
    VerifyBound(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Omega,
    QubitDepolarizing,
    Unistochastic,
    MixedUnitary,
    GroupAverage,
    ConvexWithOmega,
    Identity,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Group {
    Pauli,
    Dephasing,
}

#[derive(Args)]
struct ZooArgs {
    family: Family,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Seed for random unitaries and channels.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Kraus count for random channels.
    #[arg(long, default_value_t = 2)]
    n_kraus: usize,
    /// JSON file with a unitary (unistochastic) or a list of unitaries
    /// (mixed-unitary).
    #[arg(long)]
    unitaries: Option<PathBuf>,
    /// Comma-separated weights for mixed-unitary.
    #[arg(long, value_delimiter = ',')]
    probs: Vec<f64>,
    #[arg(long, value_enum)]
    group: Option<Group>,
    /// Channel file used as the base of convex-with-omega; a random
    /// channel otherwise.
    #[arg(long)]
    base: Option<PathBuf>,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    #[arg(long, default_value_t = 200)]
    iterations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl BudgetArgs {
    fn budget(&self) -> SearchBudget {
        SearchBudget {
            restarts: self.restarts,
            iterations: self.iterations,
            seed: self.seed,
            ..SearchBudget::default()
        }
    }
}

#[derive(Args)]
struct FamilyArgs {
    /// Use the closed-form kappa of this family and check it against the
    /// estimate.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(ChannelFamily::TAGS))]
    analytic: Option<String>,
    /// Family dimension; defaults to the channel's.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
}

impl FamilyArgs {
    fn family(&self, ch: &KrausChannel) -> qmix_core::Result<Option<ChannelFamily>> {
        self.analytic
            .as_deref()
            .map(|tag| ChannelFamily::parse(tag, Some(self.dim.unwrap_or(ch.dim())), self.alpha))
            .transpose()
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Channel JSON file, `-` for standard input.
    channel: PathBuf,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    family: FamilyArgs,
    /// Random initial states for the bound check.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 50)]
    steps: usize,
}

#[derive(Args)]
struct IterateArgs {
    channel: PathBuf,
    /// State JSON file or 0-based basis index.
    #[arg(long)]
    initial: String,
    #[arg(long, default_value_t = 20)]
    steps: usize,
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
    /// Reference state (file or basis index); required when the fixed
    /// state is not unique.
    #[arg(long)]
    reference: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    channel: PathBuf,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 50)]
    steps: usize,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    family: FamilyArgs,
}

/// An error together with the exit code and an optional JSON payload for
/// standard output.
struct Failure {
    code: u8,
    message: String,
    payload: Option<serde_json::Value>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, payload) = match &e {
            Error::NotCptp(report) => (EXIT_INVALID, serde_json::to_value(report).ok()),
            Error::NotMixing(c) => (EXIT_PRECONDITION, serde_json::to_value(c).ok()),
            Error::Eigensolver { .. } => (EXIT_NUMERICAL, None),
            _ => (EXIT_USAGE, None),
        };
        Failure {
            code,
            message: e.to_string(),
            payload,
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: e.to_string(),
            payload: None,
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn read_text(path: &Path) -> io::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path)
            .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Failure {
        code: EXIT_USAGE,
        message: format!("{}: {e}", path.display()),
        payload: None,
    })
}

fn emit<T: Serialize>(value: &T) -> io::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, value)?;
    writeln!(out)
}

fn read_state(arg: &str, dim: usize) -> Result<DensityMatrix, Failure> {
    match arg.parse::<usize>() {
        Ok(k) => Ok(DensityMatrix::basis(dim, k)?),
        Err(_) => {
            let rho: DensityMatrix = read_json(Path::new(arg))?;
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: rho.dim(),
                }
                .into());
            }
            Ok(rho)
        }
    }
}

fn need<T>(value: Option<T>, name: &'static str) -> qmix_core::Result<T> {
    value.ok_or(Error::MissingParameter(name))
}

fn cmd_zoo(args: &ZooArgs) -> CmdResult {
    let ch = match args.family {
        Family::Omega => omega(need(args.dim, "dim")?)?,
        Family::QubitDepolarizing => qubit_depolarizing(need(args.alpha, "alpha")?)?,
        Family::Identity => {
            let dim = need(args.dim, "dim")?;
            if dim == 0 {
                return Err(Error::ZeroDimension.into());
            }
            KrausChannel::identity(dim)
        }
        Family::Unistochastic => match &args.unitaries {
            Some(path) => unistochastic(&read_json::<Operator>(path)?)?,
            None => random_unistochastic(need(args.dim, "dim")?, args.seed)?,
        },
        Family::MixedUnitary => {
            let unitaries: Vec<Operator> = read_json(&need(args.unitaries.clone(), "unitaries")?)?;
            mixed_unitary(&unitaries, &args.probs)?
        }
        Family::GroupAverage => match need(args.group, "group")? {
            Group::Pauli => group_average(&pauli_group())?,
            Group::Dephasing => group_average(&dephasing_group())?,
        },
        Family::ConvexWithOmega => {
            let base = match &args.base {
                Some(path) => read_json::<KrausChannel>(path)?.validated()?,
                None => random_channel(need(args.dim, "dim")?, args.n_kraus, args.seed)?,
            };
            convex_with_omega(&base, need(args.alpha, "alpha")?)?
        }
        Family::Random => random_channel(need(args.dim, "dim")?, args.n_kraus, args.seed)?,
    };
    let ch = ch.validated()?;
    emit(&ch)?;
    Ok(0)
}

fn read_channel(path: &Path) -> Result<KrausChannel, Failure> {
    read_json(path)
}

fn cmd_analyze(args: &AnalyzeArgs) -> CmdResult {
    let ch = read_channel(&args.channel)?;
    let opts = AnalyzeOptions {
        budget: args.budget.budget(),
        analytic: args.family.family(&ch)?,
        tol_spec: DEFAULT_TOL_SPEC,
        trials: args.trials,
        steps: args.steps,
    };
    let report = analyze(&ch, &opts)?;
    for flag in &report.flags {
        eprintln!("note: {flag}");
    }
    emit(&report)?;
    Ok(0)
}

#[derive(Serialize)]
struct IterateSummary<'a> {
    fixed_point: Option<&'a DensityMatrix>,
    reference: &'a DensityMatrix,
    steps: usize,
    final_distance: f64,
    csv: String,
}

fn cmd_iterate(args: &IterateArgs) -> CmdResult {
    let ch = read_channel(&args.channel)?.validated()?;
    let rho0 = read_state(&args.initial, ch.dim())?;
    let space = fixed_space(&ch, DEFAULT_TOL_SPEC)?;
    let unique = (space.dimension == 1 && space.states.len() == 1).then(|| &space.states[0]);
    let reference = match (&args.reference, unique) {
        (Some(arg), _) => read_state(arg, ch.dim())?,
        (None, Some(rho)) => rho.clone(),
        (None, None) => {
            let basis: Vec<&Operator> = space.states.iter().map(|s| s.as_operator()).collect();
            return Err(Failure {
                code: EXIT_AMBIGUOUS,
                message: format!(
                    "fixed space has dimension {}; pass --reference. Fixed-state basis: {}",
                    space.dimension,
                    serde_json::to_string(&basis).unwrap_or_default()
                ),
                payload: None,
            });
        }
    };
    let traj = iterate_trajectory(&ch, &rho0, args.steps, &reference)?;
    fs::write(&args.out, traj.to_csv())
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", args.out.display())))?;
    emit(&IterateSummary {
        fixed_point: unique,
        reference: &reference,
        steps: args.steps,
        final_distance: traj.steps.last().map_or(0.0, |s| s.tv_to_reference),
        csv: args.out.display().to_string(),
    })?;
    Ok(0)
}

fn cmd_verify_bound(args: &VerifyArgs) -> CmdResult {
    let ch = read_channel(&args.channel)?.validated()?;
    let kb = match args.family.family(&ch)? {
        Some(family) => kappa_analytic(&family)?,
        None => kappa_scalar(&ch, &args.budget.budget())?,
    };
    if kb.trace_kappa <= 0.0 {
        let classification = classify(&ch, DEFAULT_TOL_SPEC)?;
        return Err(Failure {
            code: EXIT_PRECONDITION,
            message: format!(
                "trace of kappa is 0 (channel is {}); the bound is trivial",
                classification.verdict.as_str()
            ),
            payload: serde_json::to_value(&classification).ok(),
        });
    }
    let report = verify_bound(&ch, &kb, args.trials, args.steps, args.budget.seed)?;
    emit(&report)?;
    if report.passed {
        Ok(0)
    } else {
        eprintln!("bound violated {} times", report.violations.len());
        Ok(EXIT_VIOLATION)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Zoo(a) => cmd_zoo(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Iterate(a) => cmd_iterate(a),
        Command::VerifyBound(a) => cmd_verify_bound(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            if let Some(payload) = &f.payload {
                let _ = emit(payload);
            }
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
