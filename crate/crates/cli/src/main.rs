mod cache;
mod commands;
mod render;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cache::Cache;

#[derive(Parser, Debug)]
#[command(name = "weil", version, about = "Exact Weil representations of split orthogonal groups over F_q")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the five Bruhat relations and the group order.
    VerifyPresentation(RunArgs),
    /// Build the Weil datum and representation and verify them.
    BuildRep(RunArgs),
    /// Decompose L^2(M) under the unitary group SL_2(F_q).
    Decompose(RunArgs),
    /// Compare with the Schrödinger model of the dual pair (SL_2, O(2n, 2n)).
    DualPair(RunArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Field size, a prime at least 5.
    #[arg(long)]
    q: u32,
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Twist of the additive character, psi(x) = zeta_q^(lambda x).
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    lambda: i64,
    #[arg(long, value_enum, default_value_t = Backend::Exact)]
    backend: Backend,
    /// Seed for every sampled check.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest group enumerated by breadth-first closure.
    #[arg(long, default_value_t = 10_000_000)]
    budget: usize,
    /// Parameter sets up to this size are checked exhaustively, larger ones are sampled.
    #[arg(long, default_value_t = 500)]
    exhaustive_limit: u128,
    /// Samples drawn from each parameter set that exceeds the exhaustive limit.
    #[arg(long, default_value_t = 64)]
    samples: usize,
    /// Random element pairs for the check rho(g)rho(h) = rho(gh).
    #[arg(long, default_value_t = 1000)]
    pairs: usize,
    #[arg(long, env = "WEIL_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

/// Validated run parameters.
#[derive(Clone, Debug, serde::Serialize)]
pub struct RunConfig {
    pub q: u32,
    pub n: usize,
    pub lambda: i64,
    pub backend: Backend,
    pub seed: u64,
    pub budget: usize,
    pub exhaustive_limit: u128,
    pub samples: usize,
    pub pairs: usize,
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn validate(a: &RunArgs) -> Result<RunConfig, UsageError> {
    if a.q < 5 || weil_core::FieldCtx::new(a.q).is_err() {
        return Err(UsageError(format!("--q must be a prime at least 5, got {}", a.q)));
    }
    if a.n == 0 {
        return Err(UsageError("--n must be at least 1".into()));
    }
    if a.lambda.rem_euclid(a.q as i64) == 0 {
        return Err(UsageError(format!("--lambda must be nonzero mod {}", a.q)));
    }
    if a.samples == 0 {
        return Err(UsageError("--samples must be positive".into()));
    }
    Ok(RunConfig {
        q: a.q,
        n: a.n,
        lambda: a.lambda,
        backend: a.backend,
        seed: a.seed,
        budget: a.budget,
        exhaustive_limit: a.exhaustive_limit,
        samples: a.samples,
        pairs: a.pairs,
    })
}

/// 0 = all checks pass, 1 = a check failed, 2 = usage, 3 = environment or cache.
fn exit_code(err: &anyhow::Error) -> u8 {
    use weil_core::Error as E;
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<E>() {
        Some(E::CheckFailed(_)) => 1,
        Some(E::Unsupported(_) | E::InvalidParameter(_) | E::Dimension(_)) => 2,
        Some(E::Cache(_) | E::Io(_) | E::BudgetExceeded { .. } | E::Overflow) => 3,
        None => 3,
    }
}

fn run(cli: Cli) -> anyhow::Result<(bool, String)> {
    let (args, f): (&RunArgs, fn(&RunConfig, &Cache) -> anyhow::Result<commands::Output>) = match &cli.command {
        Command::VerifyPresentation(a) => (a, commands::verify_presentation),
        Command::BuildRep(a) => (a, commands::build_rep),
        Command::Decompose(a) => (a, commands::decompose),
        Command::DualPair(a) => (a, commands::dual_pair),
    };
    let cfg = validate(args)?;
    let cache = Cache::new(args.cache_dir.clone());
    let out = f(&cfg, &cache)?;
    Ok((out.passed, render::render(&out, args.format)?))
}

/// Parses `args` and runs the command, returning the exit code and the
/// rendered report. Errors are reported on stderr.
fn execute<I, T>(args: I) -> (u8, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return (e.exit_code() as u8, String::new());
        }
    };
    match run(cli) {
        Ok((passed, text)) => (if passed { 0 } else { 1 }, text),
        Err(e) => {
            eprintln!("error: {e:#}");
            (exit_code(&e), String::new())
        }
    }
}

fn main() -> ExitCode {
    let (code, text) = execute(std::env::args_os());
    print!("{text}");
    ExitCode::from(code)
}

#[cfg(test)]
mod tests;
