//! Command-line front end: evaluate eigenvalue-sum lower bounds, verify them
//! against true spectra, solve the profile knee equation, and compare bound
//! families.
//!
//! Exit codes: 0 success/verified, 1 internal error or failed verification,
//! 2 invalid or inapplicable request.

mod commands;
mod krange;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use commands::{CliError, CliResult, Format, Run};
use spectral_bounds::bounds::{BoundId, EpsilonMode, Operator, ProblemSpec};
use spectral_bounds::geometry::Domain;

#[derive(Parser)]
#[command(
    name = "spectral-bounds",
    about = "Lower bounds for Dirichlet eigenvalue sums: evaluation, comparison and verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate inequalities over a k range with per-term breakdowns
    Bounds(CommonArgs),
    /// Check certified bounds against an analytic or finite-difference spectrum
    Verify(CommonArgs),
    /// Solve (t+1)^{n+1} - t^{n+1} = k_star by every applicable method
    Root(RootArgs),
    /// Compare the multi-term bound, the two-term display and the certified profile bound
    Compare(CommonArgs),
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// Domain description: inline JSON or a path to a JSON file
    #[arg(long)]
    domain: Option<String>,
    /// Poly-Laplacian order l >= 1 (mutually exclusive with --a)
    #[arg(long)]
    l: Option<u32>,
    /// Quadratic-operator coefficient a >= 0 (mutually exclusive with --l)
    #[arg(long)]
    a: Option<f64>,
    /// k range: `a..b`, `a..b..step`, or `log:a..b:count`
    #[arg(long)]
    k: Option<String>,
    /// Comma-separated inequality ids (default: every applicable one)
    #[arg(long)]
    which: Option<String>,
    /// Treatment of the (1 - epsilon) factor in the two-term bounds
    #[arg(long, value_enum)]
    epsilon_mode: Option<EpsilonModeArg>,
    /// Finite-difference grids (cells per side), e.g. 96,192
    #[arg(long)]
    grids: Option<String>,
    /// Verification slack (default 0 for analytic, 0.01 for FD oracles)
    #[arg(long)]
    slack: Option<f64>,
    /// Report k times the mean (partial-sum form)
    #[arg(long)]
    times_k: bool,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Output path (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON config file; explicit flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed recorded with the run; env SPECTRAL_BOUNDS_SEED overrides
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Clone, Default)]
struct RootArgs {
    /// Dimension n >= 2
    #[arg(long)]
    n: Option<usize>,
    /// Right-hand side k_star >= 1
    #[arg(long)]
    kstar: Option<f64>,
    /// Terms of the asymptotic expansion (1..=3)
    #[arg(long)]
    terms: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EpsilonModeArg {
    Zero,
    Rigorous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Config-file counterpart of the flags; every field optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    domain: Option<serde_json::Value>,
    l: Option<u32>,
    a: Option<f64>,
    k: Option<String>,
    which: Option<Vec<String>>,
    epsilon_mode: Option<String>,
    grids: Option<Vec<u32>>,
    slack: Option<f64>,
    times_k: Option<bool>,
    format: Option<String>,
    output: Option<PathBuf>,
    seed: Option<u64>,
    n: Option<usize>,
    kstar: Option<f64>,
    terms: Option<usize>,
}

fn load_config(path: Option<&PathBuf>) -> CliResult<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("bad config {}: {e}", p.display())))
        }
    }
}

/// Inline JSON (starts with '{') or a path to a JSON file.
fn resolve_domain_text(text: &str) -> CliResult<String> {
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        Ok(trimmed.to_string())
    } else {
        std::fs::read_to_string(trimmed)
            .map_err(|e| CliError::Usage(format!("cannot read domain file {trimmed}: {e}")))
    }
}

fn seed_from_env(flag: Option<u64>) -> CliResult<u64> {
    match std::env::var("SPECTRAL_BOUNDS_SEED") {
        Ok(v) => v
            .parse::<u64>()
            .map_err(|_| CliError::Usage(format!("bad SPECTRAL_BOUNDS_SEED '{v}'"))),
        Err(_) => Ok(flag.unwrap_or(0)),
    }
}

fn resolve_run(args: &CommonArgs, subcommand: &'static str) -> CliResult<Run> {
    let file = load_config(args.config.as_ref())?;

    let raw_domain = match (&args.domain, &file.domain) {
        (Some(d), _) => resolve_domain_text(d)?,
        (None, Some(serde_json::Value::String(s))) => resolve_domain_text(s)?,
        (None, Some(v)) => v.to_string(),
        (None, None) => return Err(CliError::Usage("missing --domain".into())),
    };
    let domain = Domain::from_json(&raw_domain)?;

    let l = args.l.or(file.l);
    let a = args.a.or(file.a);
    let operator = match (l, a) {
        (Some(l), None) => Operator::PolyLaplacian { order: l },
        (None, Some(a)) => Operator::Quadratic { a },
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("--l and --a are mutually exclusive".into()))
        }
        (None, None) => {
            return Err(CliError::Usage("operator missing: pass --l N or --a X".into()))
        }
    };
    let spec = ProblemSpec::from_domain(&domain, operator)?;

    let k_text = args
        .k
        .clone()
        .or(file.k)
        .ok_or_else(|| CliError::Usage("missing --k range".into()))?;
    let ks = krange::parse_k_range(&k_text).map_err(CliError::Usage)?;
    if ks.is_empty() {
        return Err(CliError::Usage("k range is empty".into()));
    }

    let which_raw: Option<Vec<String>> = args
        .which
        .as_ref()
        .map(|s| s.split(',').map(|x| x.trim().to_string()).collect())
        .or(file.which);
    let which = match which_raw {
        Some(names) => {
            let mut ids = Vec::with_capacity(names.len());
            for name in &names {
                // "rigorous" picks the profile bound matching the operator
                let id = if name == "rigorous" && matches!(operator, Operator::Quadratic { .. }) {
                    BoundId::RigorousQuad
                } else {
                    BoundId::from_str(name).map_err(|e| CliError::Usage(e.to_string()))?
                };
                ids.push(id);
            }
            ids
        }
        None => commands::default_ids(spec.n, &operator),
    };
    if which.is_empty() {
        return Err(CliError::Usage("no inequalities selected".into()));
    }

    let epsilon_mode = match args.epsilon_mode {
        Some(EpsilonModeArg::Zero) => EpsilonMode::Zero,
        Some(EpsilonModeArg::Rigorous) => EpsilonMode::Rigorous,
        None => match file.epsilon_mode.as_deref() {
            Some("zero") | None => EpsilonMode::Zero,
            Some("rigorous") => EpsilonMode::Rigorous,
            Some(other) => {
                return Err(CliError::Usage(format!("bad epsilon_mode '{other}'")))
            }
        },
    };

    let grids = match (&args.grids, &file.grids) {
        (Some(s), _) => s
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<u32>()
                    .map_err(|_| CliError::Usage(format!("bad grid '{x}'")))
            })
            .collect::<CliResult<Vec<u32>>>()?,
        (None, Some(g)) => g.clone(),
        (None, None) => vec![96, 192],
    };

    let format = match args.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => match file.format.as_deref() {
            Some("json") => Format::Json,
            Some("csv") | None => Format::Csv,
            Some(other) => return Err(CliError::Usage(format!("bad format '{other}'"))),
        },
    };

    Ok(Run {
        raw_domain,
        domain,
        spec,
        order: l,
        quad_a: a,
        ks,
        which,
        epsilon_mode,
        grids,
        slack: args.slack.or(file.slack),
        times_k: args.times_k || file.times_k.unwrap_or(false),
        format,
        output: args.output.clone().or(file.output),
        seed: seed_from_env(args.seed.or(file.seed))?,
        subcommand,
    })
}

fn resolve_root(args: &RootArgs) -> CliResult<commands::RootRun> {
    let file = load_config(args.config.as_ref())?;
    let n = args
        .n
        .or(file.n)
        .ok_or_else(|| CliError::Usage("missing --n".into()))?;
    let k_star = args
        .kstar
        .or(file.kstar)
        .ok_or_else(|| CliError::Usage("missing --kstar".into()))?;
    let terms = args.terms.or(file.terms).unwrap_or(3);
    if !(1..=3).contains(&terms) {
        return Err(CliError::Usage("terms must be in 1..=3".into()));
    }
    let format = match args.format {
        Some(FormatArg::Json) => Format::Json,
        Some(FormatArg::Csv) | None => Format::Csv,
    };
    Ok(commands::RootRun {
        n,
        k_star,
        terms,
        format,
        output: args.output.clone().or(file.output),
    })
}

fn dispatch(cli: Cli) -> CliResult<bool> {
    match &cli.command {
        Command::Bounds(args) => {
            commands::cmd_bounds(&resolve_run(args, "bounds")?)?;
            Ok(true)
        }
        Command::Verify(args) => commands::cmd_verify(&resolve_run(args, "verify")?),
        Command::Root(args) => {
            commands::cmd_root(&resolve_root(args)?)?;
            Ok(true)
        }
        Command::Compare(args) => {
            commands::cmd_compare(&resolve_run(args, "compare")?)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification FAILED");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
