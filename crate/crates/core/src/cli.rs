//! Command-line front end: tables, verification suites, B estimates,
//! extrapolation and a sieve benchmark.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::bounds::{self, BoundsError, ExtrapolationQuery, MertensConstants};
use crate::identities::IdentityError;
use crate::sieve::{
    validate_points, Sieve, SieveConfig, SieveError, DEFAULT_MAX_BOUND, DEFAULT_SEGMENT_SIZE,
};
use crate::sums::{accumulate_checkpoints, CheckpointRow};
use crate::verify;

/// Environment variable that replaces the default sieve cap.
pub const MAX_SIEVE_ENV: &str = "MERTENS_MAX_SIEVE";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Resource(_) => EXIT_RESOURCE,
        }
    }
}

impl From<SieveError> for CliError {
    fn from(e: SieveError) -> Self {
        if e.is_resource_limit() {
            CliError::Resource(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::Sieve(s) => s.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<IdentityError> for CliError {
    fn from(e: IdentityError) -> Self {
        match e {
            IdentityError::Sieve(s) => s.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

/// Parses a non-negative integer, also accepting `1e9`-style notation.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let t = s.trim().replace('_', "");
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = t.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() || v < 0.0 || v.fract() != 0.0 || v >= 18_446_744_073_709_551_616.0 {
        return Err(format!("`{s}` is not a non-negative integer"));
    }
    Ok(v as u64)
}

fn parse_real(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// 10, 100, … up to the sieve bound.
    Decades,
}

#[derive(Debug, Parser)]
#[command(
    name = "mertens",
    version,
    about = "Prime harmonic sums and the bounds around them"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Sums at checkpoints: x, π(x), S, A, S − ln ln x, ln ln x + B
    Table(CommonArgs),
    /// Run every identity and inequality check up to --n-max
    Verify(CommonArgs),
    /// Estimate B as S(x) − ln ln x
    EstimateB(CommonArgs),
    /// ln ln x + B for x = 10^V
    Extrapolate(ExtrapolateArgs),
    /// Time the sieve and the sums up to --n-max
    Bench(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Write to this file instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Sieve bound
    #[arg(long, value_parser = parse_count)]
    pub n_max: Option<u64>,
    /// Comma separated, strictly ascending checkpoints
    #[arg(long, value_delimiter = ',', value_parser = parse_count, conflicts_with = "preset")]
    pub checkpoints: Option<Vec<u64>>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Integers per sieve segment
    #[arg(long, value_parser = parse_count, default_value_t = DEFAULT_SEGMENT_SIZE as u64)]
    pub segment_size: u64,
    #[arg(long, value_parser = parse_count, default_value_t = 1)]
    pub workers: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ExtrapolateArgs {
    #[arg(long = "log10-x", value_parser = parse_real, allow_negative_numbers = true)]
    pub log10_x: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Table,
    Verify,
    EstimateB,
    Extrapolate,
    Bench,
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub n_max: u64,
    pub checkpoints: Vec<u64>,
    pub segment_size: usize,
    pub workers: usize,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
    pub log10_x: Option<f64>,
    pub max_sieve: u64,
}

impl RunConfig {
    /// Settings for `command` with defaults everywhere else.
    pub fn new(command: Command, n_max: u64) -> Self {
        Self {
            command,
            n_max,
            checkpoints: decades(n_max),
            segment_size: DEFAULT_SEGMENT_SIZE,
            workers: 1,
            output_format: OutputFormat::Text,
            output_path: None,
            log10_x: None,
            max_sieve: DEFAULT_MAX_BOUND,
        }
    }

    /// Resolves parsed arguments; `max_sieve_env` is the raw `MERTENS_MAX_SIEVE` value.
    pub fn from_cli(cli: Cli, max_sieve_env: Option<&str>) -> Result<Self, CliError> {
        let max_sieve = match max_sieve_env {
            Some(v) => {
                parse_count(v).map_err(|e| CliError::Config(format!("{MAX_SIEVE_ENV}: {e}")))?
            }
            None => DEFAULT_MAX_BOUND,
        };
        let (command, common) = match cli.command {
            CommandArgs::Extrapolate(args) => {
                return Ok(Self {
                    command: Command::Extrapolate,
                    n_max: 0,
                    checkpoints: Vec::new(),
                    segment_size: DEFAULT_SEGMENT_SIZE,
                    workers: 1,
                    output_format: args.output.format,
                    output_path: args.output.out,
                    log10_x: Some(args.log10_x),
                    max_sieve,
                })
            }
            CommandArgs::Table(c) => (Command::Table, c),
            CommandArgs::Verify(c) => (Command::Verify, c),
            CommandArgs::EstimateB(c) => (Command::EstimateB, c),
            CommandArgs::Bench(c) => (Command::Bench, c),
        };

        let default_n = if command == Command::Verify {
            100_000
        } else {
            1_000_000
        };
        let n_max = common
            .n_max
            .or_else(|| common.checkpoints.as_ref().and_then(|c| c.last().copied()))
            .unwrap_or(default_n);
        let checkpoints = match (common.checkpoints, common.preset) {
            (Some(c), _) => c,
            (None, Some(Preset::Decades)) => decades(n_max),
            (None, None) => match command {
                Command::EstimateB | Command::Bench | Command::Verify => vec![n_max],
                _ => decades(n_max),
            },
        };
        let segment_size = usize::try_from(common.segment_size)
            .map_err(|_| CliError::Config("segment size too large".into()))?;
        let workers = usize::try_from(common.workers)
            .ok()
            .filter(|&w| w > 0)
            .ok_or_else(|| CliError::Config("--workers must be positive".into()))?;

        let config = Self {
            command,
            n_max,
            checkpoints,
            segment_size,
            workers,
            output_format: common.output.format,
            output_path: common.output.out,
            log10_x: None,
            max_sieve,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.command == Command::Extrapolate {
            return Ok(());
        }
        if self.n_max > self.max_sieve {
            return Err(CliError::Resource(format!(
                "--n-max {} exceeds the sieve cap {} (set {MAX_SIEVE_ENV} to raise it)",
                self.n_max, self.max_sieve
            )));
        }
        validate_points(&self.checkpoints)?;
        let last = *self.checkpoints.last().expect("validated non-empty");
        if last > self.n_max {
            return Err(CliError::Config(format!(
                "checkpoint {last} lies above --n-max {}",
                self.n_max
            )));
        }
        match self.command {
            Command::Table if self.checkpoints[0] < 2 => Err(CliError::Config(
                "table checkpoints must be at least 2".into(),
            )),
            Command::EstimateB if self.checkpoints[0] < MertensConstants::RS_MIN_N => {
                Err(CliError::Config(format!(
                    "B estimates need x >= {}",
                    MertensConstants::RS_MIN_N
                )))
            }
            Command::Verify if self.n_max < MertensConstants::RS_MIN_N => {
                Err(CliError::Config(format!(
                    "verify needs --n-max >= {} for the Rosser–Schoenfeld suite",
                    MertensConstants::RS_MIN_N
                )))
            }
            Command::Bench if self.n_max < 2 => {
                Err(CliError::Config("bench needs --n-max >= 2".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn sieve(&self) -> Result<Sieve, CliError> {
        Ok(Sieve::new(
            SieveConfig::default()
                .with_segment_size(self.segment_size)
                .with_workers(self.workers)
                .with_max_bound(self.max_sieve),
        )?)
    }
}

/// `10, 100, …` up to `n_max`, followed by `n_max` itself when it is not a power of ten.
pub fn decades(n_max: u64) -> Vec<u64> {
    let mut out: Vec<u64> = std::iter::successors(Some(10u64), |&d| d.checked_mul(10))
        .take_while(|&d| d <= n_max)
        .collect();
    if out.last() != Some(&n_max) && n_max >= 2 {
        out.push(n_max);
    }
    out
}

/// Rendered output plus the process exit status it implies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub body: String,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Self {
            body,
            exit_code: EXIT_OK,
        }
    }
}

pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    config.validate()?;
    match config.command {
        Command::Table => run_table(config).map(Outcome::ok),
        Command::Verify => run_verify(config),
        Command::EstimateB => run_estimate_b(config).map(Outcome::ok),
        Command::Extrapolate => run_extrapolate(config).map(Outcome::ok),
        Command::Bench => run_bench(config).map(Outcome::ok),
    }
}

/// Full-precision float: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn extrapolated_at(x: u64) -> f64 {
    (x as f64).ln().ln() + MertensConstants::B
}

pub const CSV_HEADER: &str = "x,pi,s,a,s_minus_lnln,extrapolated";

pub fn run_table(config: &RunConfig) -> Result<String, CliError> {
    let sieve = config.sieve()?;
    let rows = accumulate_checkpoints(&sieve, config.n_max, &config.checkpoints)?;
    Ok(match config.output_format {
        OutputFormat::Text => table_text(&rows),
        OutputFormat::Csv => table_csv(&rows),
        OutputFormat::Json => table_json(config, &rows),
    })
}

fn table_text(rows: &[CheckpointRow]) -> String {
    let mut out = format!(
        "{:>20} {:>16} {:>8} {:>9} {:>8} {:>10}\n",
        "x", "pi(x)", "S(x)", "A(x)", "S-lnln", "lnln+B"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>20} {:>16} {:>8.3} {:>9.3} {:>8.3} {:>10.3}",
            r.x,
            r.pi_x,
            r.s,
            r.a,
            r.s_minus_lnln(),
            extrapolated_at(r.x)
        );
    }
    out
}

fn table_csv(rows: &[CheckpointRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.x,
            r.pi_x,
            fmt_f64(r.s),
            fmt_f64(r.a),
            fmt_f64(r.s_minus_lnln()),
            fmt_f64(extrapolated_at(r.x))
        );
    }
    out
}

fn json_meta(config: &RunConfig) -> String {
    format!(
        "{{\"n_max\":{},\"segment_size\":{},\"workers\":{},\"version\":\"{}\"}}",
        config.n_max,
        config.segment_size,
        config.workers,
        env!("CARGO_PKG_VERSION")
    )
}

fn table_json(config: &RunConfig, rows: &[CheckpointRow]) -> String {
    let rendered: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{{\"x\":{},\"pi\":{},\"s\":{},\"a\":{},\"s_minus_lnln\":{},\"extrapolated\":{}}}",
                r.x,
                r.pi_x,
                fmt_f64(r.s),
                fmt_f64(r.a),
                fmt_f64(r.s_minus_lnln()),
                fmt_f64(extrapolated_at(r.x))
            )
        })
        .collect();
    format!(
        "{{\"meta\":{},\"rows\":[{}]}}\n",
        json_meta(config),
        rendered.join(",")
    )
}

pub fn run_verify(config: &RunConfig) -> Result<Outcome, CliError> {
    let sieve = config.sieve()?;
    let suites = verify::run_all(&sieve, config.n_max)?;
    let failed = suites.iter().any(|s| s.gating && !s.passed);
    let body = match config.output_format {
        OutputFormat::Text => verify::render_text(&suites),
        OutputFormat::Csv => verify::render_csv(&suites),
        OutputFormat::Json => verify::render_json(&json_meta(config), &suites),
    };
    Ok(Outcome {
        body,
        exit_code: if failed { EXIT_VERIFY_FAILED } else { EXIT_OK },
    })
}

pub fn run_estimate_b(config: &RunConfig) -> Result<String, CliError> {
    let sieve = config.sieve()?;
    let rows = accumulate_checkpoints(&sieve, config.n_max, &config.checkpoints)?;
    let mut out = String::new();
    match config.output_format {
        OutputFormat::Text => {
            let _ = writeln!(
                out,
                "{:>20} {:>18} {:>12} {:>12} {:>6}",
                "x", "B estimate", "|diff|", "envelope", "within"
            );
            for r in &rows {
                let est = r.s_minus_lnln();
                let diff = (est - MertensConstants::B).abs();
                let width = bounds::envelope_half_width(r.x as f64);
                let _ = writeln!(
                    out,
                    "{:>20} {:>18.15} {:>12.3e} {:>12.3e} {:>6}",
                    r.x,
                    est,
                    diff,
                    width,
                    if diff <= width { "yes" } else { "no" }
                );
            }
            let _ = writeln!(out, "reference B = {}", MertensConstants::B);
        }
        OutputFormat::Csv => {
            out.push_str("x,b_estimate,abs_diff,envelope\n");
            for r in &rows {
                let est = r.s_minus_lnln();
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    r.x,
                    fmt_f64(est),
                    fmt_f64((est - MertensConstants::B).abs()),
                    fmt_f64(bounds::envelope_half_width(r.x as f64))
                );
            }
        }
        OutputFormat::Json => {
            let rendered: Vec<String> = rows
                .iter()
                .map(|r| {
                    let est = r.s_minus_lnln();
                    format!(
                        "{{\"x\":{},\"b_estimate\":{},\"abs_diff\":{},\"envelope\":{}}}",
                        r.x,
                        fmt_f64(est),
                        fmt_f64((est - MertensConstants::B).abs()),
                        fmt_f64(bounds::envelope_half_width(r.x as f64))
                    )
                })
                .collect();
            let _ = writeln!(
                out,
                "{{\"meta\":{},\"reference\":{},\"rows\":[{}]}}",
                json_meta(config),
                fmt_f64(MertensConstants::B),
                rendered.join(",")
            );
        }
    }
    Ok(out)
}

pub fn run_extrapolate(config: &RunConfig) -> Result<String, CliError> {
    let log10_x = config
        .log10_x
        .ok_or_else(|| CliError::Config("extrapolate needs --log10-x".into()))?;
    let value = bounds::extrapolate_sum(ExtrapolationQuery::new(log10_x)?);
    Ok(match config.output_format {
        OutputFormat::Text => format!("{value:.2}\n"),
        OutputFormat::Csv => format!(
            "log10_x,extrapolated\n{},{}\n",
            fmt_f64(log10_x),
            fmt_f64(value)
        ),
        OutputFormat::Json => format!(
            "{{\"log10_x\":{},\"extrapolated\":{}}}\n",
            fmt_f64(log10_x),
            fmt_f64(value)
        ),
    })
}

pub fn run_bench(config: &RunConfig) -> Result<String, CliError> {
    let sieve = config.sieve()?;
    let start = Instant::now();
    let count = sieve.pi_at(&[config.n_max])?[0].pi_x;
    let sieve_secs = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let row = accumulate_checkpoints(&sieve, config.n_max, &[config.n_max])?[0];
    let sums_secs = start.elapsed().as_secs_f64();
    debug_assert_eq!(row.pi_x, count);

    Ok(match config.output_format {
        OutputFormat::Text => format!(
            "n_max {}  segment {}  workers {}\npi      {}\nsieve   {:.3} s ({:.1} M primes/s)\nsums    {:.3} s  S = {:.6}\n",
            config.n_max,
            config.segment_size,
            config.workers,
            count,
            sieve_secs,
            count as f64 / sieve_secs.max(1e-9) / 1e6,
            sums_secs,
            row.s
        ),
        OutputFormat::Csv => format!(
            "n_max,segment_size,workers,pi,sieve_seconds,sums_seconds,s\n{},{},{},{},{},{},{}\n",
            config.n_max,
            config.segment_size,
            config.workers,
            count,
            fmt_f64(sieve_secs),
            fmt_f64(sums_secs),
            fmt_f64(row.s)
        ),
        OutputFormat::Json => format!(
            "{{\"meta\":{},\"pi\":{},\"sieve_seconds\":{},\"sums_seconds\":{},\"s\":{}}}\n",
            json_meta(config),
            count,
            fmt_f64(sieve_secs),
            fmt_f64(sums_secs),
            fmt_f64(row.s)
        ),
    })
}

/// Parses arguments, runs the command and writes its output. Returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let env_cap = std::env::var(MAX_SIEVE_ENV).ok();
    let result = RunConfig::from_cli(cli, env_cap.as_deref()).and_then(|config| {
        let outcome = run(&config)?;
        match &config.output_path {
            Some(path) => std::fs::write(path, &outcome.body)?,
            None => print!("{}", outcome.body),
        }
        Ok(outcome.exit_code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mertens: {e}");
            e.exit_code()
        }
    }
}
