use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rindler_entropy::entropy::PathChoice;
use rindler_entropy::FamilyKind;

#[derive(Debug, Parser)]
#[command(
    name = "rindler-entropy",
    version,
    about = "Conditional q-entropy of GHZ/W states with one uniformly accelerated qubit"
)]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads (default: RINDLER_ENTROPY_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One conditional-entropy value with metadata.
    Entropy(EntropyArgs),
    /// Entropy over a (lambda, p, q) grid.
    Sweep(SweepArgs),
    /// Critical mixing parameter along a lambda grid.
    Transition(TransitionArgs),
    /// Fit a transition curve to (p/b)^x + lambda^y = 1.
    Fit(FitArgs),
    /// GHZ/W separability table for N = 2..5.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathArg {
    Auto,
    Analytic,
    Numeric,
}

impl From<PathArg> for PathChoice {
    fn from(p: PathArg) -> Self {
        match p {
            PathArg::Auto => PathChoice::Auto,
            PathArg::Analytic => PathChoice::Analytic,
            PathArg::Numeric => PathChoice::Numeric,
        }
    }
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: FamilyKind,

    /// Number of qubits.
    #[arg(long)]
    pub n: Option<usize>,

    /// Radians, or a token such as `pi/4` or `3*pi/8`.
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta: Option<f64>,

    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi: Option<f64>,

    /// Mixing parameter of the mixed families.
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Debug, Args)]
pub struct NumericArgs {
    /// Fock cutoff for the matrix path.
    #[arg(long, allow_hyphen_values = true)]
    pub n_max: Option<i64>,

    /// Number of terms kept by the closed-form spectra.
    #[arg(long)]
    pub terms: Option<usize>,

    /// Largest accepted trace deficit.
    #[arg(long)]
    pub trace_tol: Option<f64>,

    #[arg(long, value_enum, default_value_t = PathArg::Auto)]
    pub path: PathArg,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub family: FamilyArgs,

    #[arg(long)]
    pub lambda: f64,

    #[arg(long)]
    pub q: f64,

    #[command(flatten)]
    pub numeric: NumericArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub family: FamilyArgs,

    #[arg(long, conflicts_with = "lambda_grid", required_unless_present = "lambda_grid")]
    pub lambda: Option<f64>,

    /// `start:end:count` or a comma-separated list.
    #[arg(long, value_parser = parse_grid)]
    pub lambda_grid: Option<Grid>,

    #[arg(long, value_parser = parse_grid, conflicts_with = "p")]
    pub p_grid: Option<Grid>,

    #[arg(long, conflicts_with = "q_schedule", required_unless_present = "q_schedule")]
    pub q: Option<f64>,

    #[arg(long, value_parser = parse_grid)]
    pub q_schedule: Option<Grid>,

    #[command(flatten)]
    pub numeric: NumericArgs,
}

#[derive(Debug, Args)]
pub struct TransitionArgs {
    #[command(flatten)]
    pub family: FamilyArgs,

    #[arg(long, conflicts_with = "lambda_grid")]
    pub lambda: Option<f64>,

    /// Defaults to 0.05, 0.10, ..., 0.95.
    #[arg(long, value_parser = parse_grid)]
    pub lambda_grid: Option<Grid>,

    /// Defaults to 150.
    #[arg(long, conflicts_with = "q_schedule")]
    pub q: Option<f64>,

    #[arg(long, value_parser = parse_grid)]
    pub q_schedule: Option<Grid>,

    /// Bisection width in p.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Transition CSV (`lambda,q,p_star,bracket_width`) to fit.
    #[arg(long, conflicts_with_all = ["family", "lambda_grid", "q"])]
    pub input: Option<PathBuf>,

    #[arg(long, value_parser = parse_family, required_unless_present = "input")]
    pub family: Option<FamilyKind>,

    #[arg(long)]
    pub n: Option<usize>,

    #[arg(long, value_parser = parse_grid)]
    pub lambda_grid: Option<Grid>,

    #[arg(long)]
    pub q: Option<f64>,

    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long, default_value_t = 150.0)]
    pub q: f64,

    #[arg(long, value_parser = parse_grid)]
    pub lambda_grid: Option<Grid>,
}

/// Parsed list of grid values.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

fn parse_family(s: &str) -> Result<FamilyKind, String> {
    s.parse::<FamilyKind>().map_err(|e| e.to_string())
}

fn parse_number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

/// Radians, or `[k[*]]pi[/m]`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    let Some(at) = t.find("pi") else {
        return parse_number(&t);
    };
    let (head, tail) = (&t[..at], &t[at + 2..]);
    let coef = match head.trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => parse_number(c)?,
    };
    let den = match tail {
        "" => 1.0,
        d => parse_number(d.strip_prefix('/').ok_or_else(|| format!("bad angle token `{s}`"))?)?,
    };
    if den == 0.0 {
        return Err(format!("zero denominator in `{s}`"));
    }
    Ok(coef * PI / den)
}

/// `start:end:count` (inclusive) or `a,b,c`.
pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [start, end, count] => {
            let (a, b) = (parse_number(start)?, parse_number(end)?);
            let n: usize = count
                .trim()
                .parse()
                .map_err(|_| format!("grid count `{count}` is not a positive integer"))?;
            if n == 0 {
                return Err("grid count must be positive".into());
            }
            rindler_entropy::transition::linear_grid(a, b, n)
        }
        [_] => s.split(',').map(parse_number).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(format!("grid `{s}` must be start:end:count or a comma list")),
    };
    if values.is_empty() {
        return Err("empty grid".into());
    }
    Ok(Grid(values))
}
