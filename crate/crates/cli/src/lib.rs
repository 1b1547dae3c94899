//! Experiment runner behind the `lpembed` binary.
//!
//! Every subcommand resolves its parameters (built-in defaults, then flags,
//! then the optional TOML file given by `--config`, which wins), validates
//! them, runs one verification and writes into the output directory:
//!
//! * `report.json`: the resolved config, the verdict and the measured values;
//! * `meta.json`: wall-clock timestamps and the crate version;
//! * one or more plot-ready CSV series.
//!
//! Reports depend only on the resolved config, so identical configs give
//! byte-identical `report.json` files.

mod commands;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read config {path}: {msg}")]
    Config { path: PathBuf, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }
}

/// Core-library errors at this level are precondition failures.
macro_rules! invalid_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Invalid(e.to_string())
            }
        }
    )*};
}

invalid_from!(
    lpembed::SpaceError,
    lpembed::stable::StableError,
    lpembed::embedding::EmbeddingError,
    lpembed::logic::LogicError,
    lpembed::disintegration::DisintegrationError,
    lpembed::complexify::ComplexifyError
);

#[derive(Debug, Parser)]
#[command(name = "lpembed", version, about = "Reproducible numerical checks for stable embeddings into L^p")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Empirical characteristic function and absolute moment of a stable law.
    ///
    /// Defaults: r = 2, sigma = 1, p = 1, N = 100000, field = real, tol = 0.02
    /// (CF error), seed = 0. The moment check is skipped when p >= r < 2.
    StableVerify(Flags),
    /// Isometry of the stable-column embedding of l^r into L^p.
    ///
    /// Defaults: r = 2, p = 1, m = 4, N = 1000000, trials = 20, tol = 0.05,
    /// field = real, seed = 0. Requires p <= r <= 2.
    VerifyEmbedding(Flags),
    /// Builds the tree model of depth n and evaluates every sentence of T_n.
    ///
    /// Defaults: n = 2, mode = exact, r = 2, p = r (exact) or 1 (mc),
    /// max-den = 8, seed = 0. Exact: tol = 1e-12 for every sentence.
    /// MC: N = 100000, m = 2^n, calibrated measure, tol = 0.05 for Psi and
    /// strict-tol = 1e-9 for the other sentences.
    CheckTn(Flags),
    /// Lifts a random tree isomorphism between two dyadic disintegrations.
    ///
    /// Defaults: depth = 3, p = 2, trials = 100 span elements, tol = 1e-10,
    /// seed = 0.
    LiftDemo(Flags),
    /// Checks a candidate complex norm against the abstract complex L^p
    /// conditions, and the theta-grid modulus at K.
    ///
    /// Defaults: p = 2, norm = genuine, trials = 200, K = 64, tol = 1e-10,
    /// seed = 0.
    ComplexCheck(Flags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::StableVerify(_) => "stable-verify",
            Command::VerifyEmbedding(_) => "verify-embedding",
            Command::CheckTn(_) => "check-tn",
            Command::LiftDemo(_) => "lift-demo",
            Command::ComplexCheck(_) => "complex-check",
        }
    }

    fn flags(&self) -> &Flags {
        match self {
            Command::StableVerify(f)
            | Command::VerifyEmbedding(f)
            | Command::CheckTn(f)
            | Command::LiftDemo(f)
            | Command::ComplexCheck(f) => f,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldArg {
    Real,
    Complex,
}

impl From<FieldArg> for lpembed::ScalarField {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Real => lpembed::ScalarField::Real,
            FieldArg::Complex => lpembed::ScalarField::Complex,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormArg {
    /// `|| |re + i im| ||_p`
    Genuine,
    /// `||re||_p + ||im||_p`
    SumOfParts,
    /// `max(||re||_p, ||im||_p)`
    MaxOfParts,
    /// `|| modulus on the K-point theta grid ||_p`
    ThetaGrid,
}

/// Parameters shared by every subcommand. Unset values fall back to the
/// config file and then to the subcommand defaults.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Params {
    /// Stable index / sequence-space exponent r.
    #[arg(long)]
    pub r: Option<f64>,
    /// Lebesgue exponent p.
    #[arg(long)]
    pub p: Option<f64>,
    /// Tree depth of T_n.
    #[arg(long, allow_negative_numbers = true)]
    pub n: Option<i64>,
    /// Number of samples.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub samples: Option<usize>,
    /// Number of embedded basis vectors.
    #[arg(long)]
    pub m: Option<usize>,
    /// Depth of the dyadic disintegration.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Theta-grid size.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Pass/fail tolerance (see the subcommand help).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Tolerance for the sentences that hold exactly in the MC model of T_n.
    #[arg(long)]
    pub strict_tol: Option<f64>,
    #[arg(long, value_enum)]
    pub field: Option<FieldArg>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Candidate norm on the complexification.
    #[arg(long, value_enum)]
    pub norm: Option<NormArg>,
    /// Scale of the stable law.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Random trials.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Largest denominator in the rational grids of T_n.
    #[arg(long)]
    pub max_den: Option<u64>,
    /// Keep the plain empirical measure in the MC model of T_n.
    #[arg(long, default_value_t = false)]
    #[serde(skip)]
    pub no_calibrate: bool,
    /// Reweight the empirical measure in the MC model of T_n (config file only;
    /// the flag form is --no-calibrate).
    #[arg(skip)]
    pub calibrate: Option<bool>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Flags {
    #[command(flatten)]
    pub params: Params,
    /// TOML file whose keys (flag names, e.g. `r = 1.5`, `N = 1000`) override flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Params {
    /// `self` with every unset field taken from `base`.
    fn or(self, base: Params) -> Params {
        Params {
            r: self.r.or(base.r),
            p: self.p.or(base.p),
            n: self.n.or(base.n),
            samples: self.samples.or(base.samples),
            m: self.m.or(base.m),
            depth: self.depth.or(base.depth),
            k: self.k.or(base.k),
            seed: self.seed.or(base.seed),
            tol: self.tol.or(base.tol),
            strict_tol: self.strict_tol.or(base.strict_tol),
            field: self.field.or(base.field),
            mode: self.mode.or(base.mode),
            norm: self.norm.or(base.norm),
            sigma: self.sigma.or(base.sigma),
            trials: self.trials.or(base.trials),
            max_den: self.max_den.or(base.max_den),
            no_calibrate: self.no_calibrate || base.no_calibrate,
            calibrate: self.calibrate.or(base.calibrate),
            out: self.out.or(base.out),
        }
    }
}

/// Flags overlaid with the config file.
pub fn resolve_params(flags: &Flags) -> Result<Params, CliError> {
    let mut params = flags.params.clone();
    if params.no_calibrate {
        params.calibrate = Some(false);
    }
    let Some(path) = &flags.config else {
        return Ok(params);
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Config { path: path.clone(), msg: e.to_string() })?;
    let file: Params =
        toml::from_str(&text).map_err(|e| CliError::Config { path: path.clone(), msg: e.to_string() })?;
    Ok(file.or(params))
}

/// The fully resolved parameters of one run, echoed into its report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub seed: u64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strict_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_den: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibrate: Option<bool>,
    pub out: PathBuf,
}

impl RunConfig {
    fn new(command: &str, params: &Params, tol: f64) -> Self {
        RunConfig {
            command: command.to_string(),
            r: None,
            p: None,
            n: None,
            samples: None,
            m: None,
            depth: None,
            k: None,
            seed: params.seed.unwrap_or(0),
            tol: params.tol.unwrap_or(tol),
            strict_tol: None,
            field: None,
            mode: None,
            norm: None,
            sigma: None,
            trials: None,
            max_den: None,
            calibrate: None,
            out: params.out.clone().unwrap_or_else(|| PathBuf::from("lpembed-out")),
        }
    }
}

/// Verdict plus measured values; `results` is command specific.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub pass: bool,
    /// Names of the checks that failed.
    pub failures: Vec<String>,
    pub results: serde_json::Value,
}

/// A CSV series: file name and contents.
pub struct Series {
    pub file: &'static str,
    pub text: String,
}

pub struct Outcome {
    pub report: Report,
    pub series: Vec<Series>,
    pub summary: String,
}

#[derive(Serialize)]
struct Meta<'a> {
    command: &'a str,
    version: &'a str,
    started_unix_ms: u128,
    finished_unix_ms: u128,
    elapsed_ms: u128,
}

fn unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(bytes).map_err(io)
}

/// Runs the command without touching the file system.
pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    let params = resolve_params(command.flags())?;
    match command {
        Command::StableVerify(_) => commands::stable_verify(&params),
        Command::VerifyEmbedding(_) => commands::verify_embedding(&params),
        Command::CheckTn(_) => commands::check_tn(&params),
        Command::LiftDemo(_) => commands::lift_demo(&params),
        Command::ComplexCheck(_) => commands::complex_check(&params),
    }
}

/// Runs the command and writes its report, metadata and series.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let started = unix_ms();
    let clock = Instant::now();
    let outcome = execute(&cli.command)?;
    let dir = &outcome.report.config.out;
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    let mut json = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
    json.push('\n');
    write_file(&dir.join("report.json"), json.as_bytes())?;
    for s in &outcome.series {
        write_file(&dir.join(s.file), s.text.as_bytes())?;
    }
    let meta = Meta {
        command: cli.command.name(),
        version: env!("CARGO_PKG_VERSION"),
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        elapsed_ms: clock.elapsed().as_millis(),
    };
    let mut json = serde_json::to_string_pretty(&meta).expect("meta serializes");
    json.push('\n');
    write_file(&dir.join("meta.json"), json.as_bytes())?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_win_over_flags() {
        let flags = Params { r: Some(2.0), seed: Some(4), ..Params::default() };
        let file: Params = toml::from_str("r = 1.5\nN = 10\nmax-den = 3").unwrap();
        let merged = file.or(flags);
        assert_eq!(merged.r, Some(1.5));
        assert_eq!(merged.seed, Some(4));
        assert_eq!(merged.samples, Some(10));
        assert_eq!(merged.max_den, Some(3));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Params>("radius = 1").is_err());
        assert!(toml::from_str::<Params>("n = -1").unwrap().n == Some(-1));
    }

    #[test]
    fn config_echo_drops_unused_fields() {
        let cfg = RunConfig::new("lift-demo", &Params::default(), 1e-10);
        let json = serde_json::to_value(&cfg).unwrap();
        assert_eq!(json["seed"], 0);
        assert!(json.get("r").is_none());
    }
}
