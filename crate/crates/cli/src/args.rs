use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use engel_core::classify::Family;
use engel_core::ode::{IntegratorConfig, Method};

/// Crate version plus the version of the JSON/CSV report layout.
const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (report format 1)");

#[derive(Debug, Parser)]
#[command(name = "engel", version = VERSION, about = "Left-invariant sub-Riemannian Engel structures")]
pub struct Cli {
    /// Seed for randomized sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the Jacobi restrictions and list the matching families.
    Classify(ConstantsArgs),
    /// Bracket table of the canonical frame for given invariants.
    Build(ConstantsArgs),
    /// Canonical frame and invariants of an algebra read from JSON.
    Frame(FrameArgs),
    /// Integrate the normal geodesic flow.
    Flow(FlowArgs),
    /// First integrals and the independence witness at one covector.
    Integrals(IntegralsArgs),
    /// Conjugate times along the abnormal geodesic.
    Conjugate(ConjugateArgs),
    /// Local minimality of the abnormal geodesic on [0, tau].
    Verdict(VerdictArgs),
    /// Run flow and conservation checks over a parameter grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ConstantsArgs {
    /// Invariants T1..T6, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "family"
    )]
    pub t: Option<Vec<f64>>,

    /// Family I..V to build the invariants from.
    #[arg(long)]
    pub family: Option<Family>,

    /// Free parameters of the family, e.g. T1=2,T2=1,T3=0.
    #[arg(long, requires = "family", allow_hyphen_values = true, value_parser = parse_params)]
    pub params: Option<BTreeMap<usize, f64>>,
}

impl ConstantsArgs {
    pub fn is_given(&self) -> bool {
        self.t.is_some() || self.family.is_some()
    }
}

#[derive(Debug, Clone, Args)]
pub struct IntegratorArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,

    #[arg(long, value_enum, default_value_t = MethodArg::Rk4)]
    pub method: MethodArg,

    /// Relative tolerance of the adaptive method.
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,

    /// Absolute tolerance of the adaptive method.
    #[arg(long, default_value_t = 1e-12)]
    pub abs_tol: f64,
}

impl IntegratorArgs {
    pub fn config(&self, t_max: f64) -> IntegratorConfig {
        IntegratorConfig {
            method: self.method.into(),
            step: self.step,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            t_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rk4,
    #[value(alias = "rkf45")]
    Rk45,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Rk4 => Method::Rk4,
            MethodArg::Rk45 => Method::Rk45,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct FrameArgs {
    /// Algebra JSON file, `-` for standard input.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FlowArgs {
    #[command(flatten)]
    pub constants: ConstantsArgs,

    /// Initial covector h1,h2,h3,h4.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub h0: Vec<f64>,

    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,

    #[command(flatten)]
    pub integrator: IntegratorArgs,

    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub out: OutputFormat,
}

#[derive(Debug, Clone, Args)]
pub struct IntegralsArgs {
    #[command(flatten)]
    pub constants: ConstantsArgs,

    /// Use the type-I structure with integrals of degrees n+1 and m+1.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["t", "family"])]
    pub type1: Option<Vec<u32>>,

    /// Covector h1,h2,h3,h4.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub constants: ConstantsArgs,

    /// CSV with columns t,T2,T6.
    #[arg(long, conflicts_with_all = ["t", "family"])]
    pub profile: Option<PathBuf>,

    /// The abnormal curve of the profile is strictly abnormal.
    #[arg(long, requires = "profile")]
    pub strict: bool,

    #[command(flatten)]
    pub integrator: IntegratorArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ConjugateArgs {
    #[command(flatten)]
    pub source: ProfileArgs,

    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,

    /// Locate conjugate times by shooting even for constant invariants.
    #[arg(long)]
    pub shoot: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerdictArgs {
    #[command(flatten)]
    pub source: ProfileArgs,

    #[arg(long)]
    pub tau: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Sweep configuration JSON.
    #[arg(long)]
    pub config: PathBuf,
}

fn parse_params(s: &str) -> Result<BTreeMap<usize, f64>, String> {
    let mut out = BTreeMap::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| format!("expected Ti=value, got {item:?}"))?;
        let index = parse_param_key(key)?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("bad number in {item:?}"))?;
        if out.insert(index, value).is_some() {
            return Err(format!("T{index} given twice"));
        }
    }
    Ok(out)
}

/// Accepts `T3`, `t3` or `3`.
pub fn parse_param_key(key: &str) -> Result<usize, String> {
    let key = key.trim();
    let digits = key.strip_prefix(['T', 't']).unwrap_or(key);
    match digits.parse::<usize>() {
        Ok(i @ 1..=6) => Ok(i),
        _ => Err(format!("unknown parameter {key:?}, expected T1..T6")),
    }
}
