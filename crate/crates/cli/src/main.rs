//! `staggerlab`: generate instances, solve them, evaluate peaks and run experiments.
//!
//! Exit codes: 0 on success, 2 on invalid input, 3 when a budget or the LP solver gives out.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use staggerlab::{Error, SolverConfig};

mod experiments;
mod report;

#[derive(Parser)]
#[command(name = "staggerlab", version, about = "Peak inventory staggering: solvers, oracles and constructions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find a shift vector with one of the approximation schemes or the exhaustive oracle.
    Solve(SolveArgs),
    /// Evaluate the peak of a given shift vector.
    Peak(PeakArgs),
    /// Report the lower bounds that apply to an instance.
    Bound(BoundArgs),
    /// Write a generated instance.
    Gen(GenArgs),
    /// Run a Monte-Carlo or construction experiment, writing CSV.
    Exp(ExpArgs),
}

#[derive(Args, Clone)]
pub struct Budgets {
    /// Largest cycle length the scan engine may walk.
    #[arg(long, env = "STAGGERLAB_BUDGET_SCAN", default_value_t = SolverConfig::default().scan_budget)]
    pub budget_scan: u64,
    #[arg(long, default_value_t = SolverConfig::default().events_budget)]
    pub budget_events: u64,
    /// Most items the integer-program engine accepts.
    #[arg(long, default_value_t = SolverConfig::default().ip_dimension_budget)]
    pub budget_ip_dim: usize,
    #[arg(long, default_value_t = SolverConfig::default().brute_budget)]
    pub budget_brute: u64,
    #[arg(long, default_value_t = SolverConfig::default().guess_budget)]
    pub budget_guess: u64,
    #[arg(long, default_value_t = SolverConfig::default().sieve_budget)]
    pub budget_sieve: u64,
    /// Grid points per unit time for exhaustive search on continuous instances.
    #[arg(long, default_value_t = SolverConfig::default().brute_grid)]
    pub brute_grid: u64,
    /// Seconds allowed per LP solve.
    #[arg(long, default_value_t = SolverConfig::default().lp_time_limit.as_secs())]
    pub lp_time_limit: u64,
    /// Worker threads for the internal parallel reductions.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

impl Budgets {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            scan_budget: self.budget_scan,
            events_budget: self.budget_events,
            ip_dimension_budget: self.budget_ip_dim,
            brute_budget: self.budget_brute,
            guess_budget: self.budget_guess,
            sieve_budget: self.budget_sieve,
            brute_grid: self.brute_grid,
            lp_time_limit: Duration::from_secs(self.lp_time_limit),
            jobs: self.jobs,
            ..SolverConfig::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Algorithm {
    LpRounding,
    Interval,
    Nested,
    Coprime,
    Brute,
}

#[derive(Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub alg: Algorithm,
    /// Accuracy parameter, as a decimal or `p/q`.
    #[arg(long, default_value = "1/2")]
    pub eps: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent roundings per LP guess.
    #[arg(long, default_value_t = 7)]
    pub repeats: u32,
    /// Keep at most this many heavy items in LP rounding.
    #[arg(long)]
    pub heavy_limit: Option<usize>,
    #[command(flatten)]
    pub budgets: Budgets,
    /// Report file; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum EngineArg {
    Scan,
    Events,
    Ip,
    Auto,
}

#[derive(Args)]
pub struct PeakArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub shifts: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub engine: EngineArg,
    #[command(flatten)]
    pub budgets: Budgets,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Family {
    SampleComplexity,
    Groupsync,
    Random,
    Nested,
    Coprime,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Discrete,
    Continuous,
}

#[derive(Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Number of items (sample-complexity: also the smallest prime).
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "discrete")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 12)]
    pub max_interval: u64,
    #[arg(long, default_value_t = 10)]
    pub max_quantity: u64,
    /// Nested family: intervals are `base^j` for `j <= levels`.
    #[arg(long, default_value_t = 2)]
    pub base: u64,
    #[arg(long, default_value_t = 4)]
    pub levels: u32,
    /// Groupsync: the prime `q`.
    #[arg(long, default_value_t = 11)]
    pub q: u64,
    /// Groupsync: family size, overriding the size the construction calls for.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = SolverConfig::default().sieve_budget)]
    pub budget_sieve: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Experiment {
    Sampling,
    GroupsyncGap,
}

#[derive(Args)]
pub struct ExpArgs {
    #[arg(long, value_enum)]
    pub name: Experiment,
    /// Sampling: number of prime-interval items.
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value = "0.3")]
    pub eps: String,
    /// Sampling: samples per seed.
    #[arg(long = "M", default_value_t = 1000)]
    pub m: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Runs with seeds `seed, seed+1, ...`.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    /// Groupsync: the prime `q`.
    #[arg(long, default_value_t = 11)]
    pub q: u64,
    /// Groupsync: family size.
    #[arg(long, default_value_t = 60)]
    pub count: usize,
    /// Groupsync: number of random probes.
    #[arg(long, default_value_t = 100)]
    pub probes: usize,
    /// Groupsync: items per probe.
    #[arg(long, default_value_t = 2)]
    pub probe_size: usize,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// CSV file; stdout when absent (the summary then goes to stderr).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Failures with their exit code.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Resource(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_resource() {
            CliError::Resource(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_file(path: &PathBuf) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn write_output(path: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Solve(args) => report::cmd_solve(&args),
        Command::Peak(args) => report::cmd_peak(&args),
        Command::Bound(args) => report::cmd_bound(&args),
        Command::Gen(args) => experiments::cmd_gen(&args),
        Command::Exp(args) => experiments::cmd_exp(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Resource(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budgets_map_onto_the_config() {
        let cli = Cli::try_parse_from([
            "staggerlab", "solve", "--input", "x.json", "--alg", "brute", "--budget-scan", "77", "--jobs", "3",
        ])
        .unwrap();
        let Command::Solve(args) = cli.command else { panic!("expected solve") };
        let cfg = args.budgets.config();
        assert_eq!(cfg.scan_budget, 77);
        assert_eq!(cfg.jobs, 3);
        assert_eq!(cfg.brute_budget, SolverConfig::default().brute_budget);
    }

    #[test]
    fn errors_pick_their_exit_class() {
        assert!(matches!(CliError::from(Error::input("x")), CliError::Input(_)));
        assert!(matches!(CliError::from(Error::budget("cycle length", 9, 1)), CliError::Resource(_)));
        assert!(matches!(CliError::from(Error::Solver("x".into())), CliError::Resource(_)));
    }

    #[test]
    fn unknown_algorithm_is_rejected() {
        assert!(Cli::try_parse_from(["staggerlab", "solve", "--input", "x", "--alg", "magic"]).is_err());
    }
}
