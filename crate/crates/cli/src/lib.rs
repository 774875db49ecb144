//! Batch front-end: argument parsing, job configuration and report emission.

/// `println!` that ignores a closed stdout (e.g. piped into `head`).
#[macro_export]
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

/// Writes a string to stdout verbatim, ignoring a closed pipe.
#[macro_export]
macro_rules! sayraw {
    ($s:expr) => {{
        use std::io::Write as _;
        let _ = std::io::stdout().lock().write_all($s.as_bytes());
    }};
}

pub mod classify;
pub mod config;
pub mod dioph;
pub mod operator;
pub mod output;
pub mod weights;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use komatsu_spectral::Error;

/// Exit code for success or a consistent verdict.
pub const EXIT_OK: i32 = 0;
/// Exit code for a refuted verdict or a solver failure.
pub const EXIT_REFUTED: i32 = 1;
/// Exit code for an undecided verdict or a failed precondition.
pub const EXIT_UNDECIDED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "komatsu", version, about = "Spectral analysis of vector fields on products of T1 and S3")]
pub struct Cli {
    /// Directory for JSON/CSV reports (nothing is written without it).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Seed for randomized test functions.
    #[arg(long, global = true, value_name = "S")]
    pub seed: Option<u64>,
    /// Convergent index n whose p_n/q_n replaces alpha in float work.
    #[arg(long, global = true, value_name = "n")]
    pub convergent: Option<usize>,
    /// JSON job configuration (schema 1); flags override its fields.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weight-sequence axioms, associated function and inequality checks.
    Weights(weights::WeightsArgs),
    /// Continued fractions, small-divisor scans and condition-2 certificates.
    Dioph(dioph::DiophArgs),
    /// Global hypoellipticity and solvability verdicts for an operator.
    Analyze(operator::AnalyzeArgs),
    /// Solve L u = f on a band-limited grid.
    Solve(operator::SolveArgs),
    /// Built-in examples: description, primitive checks and analysis.
    Example(operator::ExampleArgs),
    /// Komatsu-class membership fitted from coefficient decay.
    Classify(classify::ClassifyArgs),
}

/// Weight selection shared by several subcommands.
#[derive(Debug, Clone, Args)]
pub struct WeightArgs {
    /// Gevrey order s >= 1 (repeatable).
    #[arg(long = "gevrey", value_name = "S")]
    pub gevrey: Vec<f64>,
    /// Custom weight table: JSON array of M_0..M_kmax.
    #[arg(long = "custom", value_name = "FILE")]
    pub custom: Vec<PathBuf>,
}

impl WeightArgs {
    pub fn refs(&self) -> Vec<config::WeightRef> {
        let mut v: Vec<_> = self.gevrey.iter().map(|s| config::WeightRef::Gevrey(*s)).collect();
        v.extend(self.custom.iter().cloned().map(config::WeightRef::Custom));
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuantifierArg {
    Roumieu,
    Beurling,
}

impl From<QuantifierArg> for komatsu_spectral::diophantine::Quantifier {
    fn from(q: QuantifierArg) -> Self {
        match q {
            QuantifierArg::Roumieu => Self::Roumieu,
            QuantifierArg::Beurling => Self::Beurling,
        }
    }
}

/// Global settings after merging flags over the config file.
pub struct Globals {
    pub out: output::Output,
    pub seed: u64,
    pub convergent: usize,
    pub config: Option<config::JobConfig>,
}

/// Exit code for an error: precondition failures are 2, solver failures 1.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence(_) | Error::NotInK { .. } | Error::Shape(_) | Error::Index(_) | Error::Resolution(_) => {
            EXIT_REFUTED
        }
        _ => EXIT_UNDECIDED,
    }
}

fn guidance(e: &Error) -> Option<&'static str> {
    match e {
        Error::PrecisionCap(_) => Some("lower --convergent or the number of requested convergents (cap n <= 6)"),
        Error::GridTooLarge(_) => Some("lower the cutoff or band"),
        Error::NotInJ { .. } => Some("f has mass on resonant modes; project it off or use a perturbed operator. If f is known to be compatible, the mass is truncation of e^{±Q} or e^{irA}: raise --lmax/--band1"),
        Error::MissingPrimitive(_) | Error::NotSolvable { .. } => {
            Some("supply a_primitive/q_primitive in the spec file, or a coefficient with zero-mean oscillation")
        }
        _ => None,
    }
}

fn globals(cli: &Cli) -> komatsu_spectral::Result<Globals> {
    let config = match &cli.config {
        Some(p) => {
            let c = config::JobConfig::from_file(p)?;
            c.validate()?;
            Some(c)
        }
        None => None,
    };
    let out_dir = cli.out.clone().or_else(|| config.as_ref().and_then(|c| c.out.clone()));
    let seed = cli.seed.or(config.as_ref().map(|c| c.seed)).unwrap_or(0);
    let convergent = cli
        .convergent
        .or(config.as_ref().map(|c| c.precision.convergent))
        .unwrap_or(komatsu_spectral::normalform::DEFAULT_CONVERGENT);
    if convergent > komatsu_spectral::diophantine::DEFAULT_CAP {
        return Err(Error::PrecisionCap(format!("convergent {convergent} requested")));
    }
    Ok(Globals { out: output::Output::new(out_dir)?, seed, convergent, config })
}

fn dispatch(cli: &Cli) -> komatsu_spectral::Result<i32> {
    let g = globals(cli)?;
    match &cli.command {
        Command::Weights(a) => weights::run(a, &g),
        Command::Dioph(a) => dioph::run(a, &g),
        Command::Analyze(a) => operator::run_analyze(a, &g),
        Command::Solve(a) => operator::run_solve(a, &g),
        Command::Example(a) => operator::run_example(a, &g),
        Command::Classify(a) => classify::run(a, &g),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_UNDECIDED } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: thread pool already initialized: {e}");
        }
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::NotInJ { modes, .. } | Error::NotInK { modes } | Error::NotSolvable { modes } = &e {
                for m in modes.iter().take(8) {
                    eprintln!("  mode {m}");
                }
                if modes.len() > 8 {
                    eprintln!("  ... {} more", modes.len() - 8);
                }
            }
            if let Some(h) = guidance(&e) {
                eprintln!("hint: {h}");
            }
            error_exit_code(&e)
        }
    }
}
