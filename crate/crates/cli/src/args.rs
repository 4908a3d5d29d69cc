use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "fewmode", version, about = "Few-mode quantization of tabulated spectral densities")]
pub struct Cli {
    /// Report errors as one JSON object on stderr.
    #[arg(long, global = true)]
    pub json_errors: bool,

    /// Numerical tolerance profile.
    #[arg(long, global = true, value_enum, default_value_t = TolProfile::Default)]
    pub tol_profile: TolProfile,

    /// Worker threads (an integer or `auto`).
    #[arg(long, global = true, default_value = "auto")]
    pub threads: Threads,

    #[arg(long, global = true, value_enum, default_value_t = LogLevel::Warn)]
    pub log_level: LogLevel,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TolProfile {
    Default,
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogLevel {
    Error,
    Warn,
    Info,
    Debug,
    Trace,
}

impl From<LogLevel> for log::LevelFilter {
    fn from(l: LogLevel) -> Self {
        match l {
            LogLevel::Error => log::LevelFilter::Error,
            LogLevel::Warn => log::LevelFilter::Warn,
            LogLevel::Info => log::LevelFilter::Info,
            LogLevel::Debug => log::LevelFilter::Debug,
            LogLevel::Trace => log::LevelFilter::Trace,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threads {
    Auto,
    Count(usize),
}

impl Threads {
    pub fn count(self) -> Option<usize> {
        match self {
            Threads::Auto => None,
            Threads::Count(n) => Some(n),
        }
    }
}

impl FromStr for Threads {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Threads::Count(n)),
            _ => Err(format!("expected a positive integer or 'auto', got '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modes {
    Auto,
    Fixed(usize),
}

impl FromStr for Modes {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Modes::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Modes::Fixed(n)),
            _ => Err(format!("expected a positive integer or 'auto', got '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StageArg {
    NonInteracting,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightArg {
    Uniform,
    Relative,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Resolvent,
    Poles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CouplingArg {
    Full,
    Rwa,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a tabulated spectral density with N interacting lossy modes.
    Fit(FitArgs),
    /// Evaluate J_mod(ω) of a parameter set on a grid.
    Eval(EvalArgs),
    /// Poles and residues of the effective Hamiltonian.
    Poles(PolesArgs),
    /// Emitter and mode populations for spontaneous emission.
    Dynamics(DynamicsArgs),
    /// Field intensity from the emitter correlation and a Green's function table.
    Field(FieldArgs),
    /// Fit, then compare model and exact dynamics.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct FitOptions {
    /// Number of modes, or `auto` to grow N until the target error is met.
    #[arg(long, default_value = "auto")]
    pub n_modes: Modes,
    #[arg(long, value_enum, default_value_t = StageArg::Full)]
    pub stage: StageArg,
    #[arg(long, value_enum, default_value_t = WeightArg::Relative)]
    pub weight: WeightArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Randomized restarts of the interacting stage.
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,
    /// Relative L2 error regarded as a successful fit.
    #[arg(long, default_value_t = 1e-6)]
    pub target_error: f64,
    /// Upper bound on N in auto mode.
    #[arg(long, default_value_t = 24)]
    pub max_modes: usize,
    /// Use a finite-difference Jacobian.
    #[arg(long)]
    pub fd_jacobian: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input spectrum CSV (`omega_eV,J_eV`).
    #[arg(required_unless_present = "demo")]
    pub spectrum: Option<PathBuf>,
    /// Use the built-in synthetic multi-resonance spectrum.
    #[arg(long, conflicts_with = "spectrum")]
    pub demo: bool,
    #[command(flatten)]
    pub fit: FitOptions,
    #[arg(long, default_value = "params.json")]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub params: PathBuf,
    /// Take the frequency grid from this spectrum file.
    #[arg(long, conflicts_with = "grid")]
    pub spectrum: Option<PathBuf>,
    /// Uniform grid `LO:HI:POINTS` in eV.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    /// Also write the Purcell factor for this dipole moment (e·nm).
    #[arg(long)]
    pub purcell_mu: Option<f64>,
    #[arg(long, default_value = "jmod.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PolesArgs {
    #[arg(long)]
    pub params: PathBuf,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TimeArgs {
    /// Emitter transition energy (eV).
    #[arg(long)]
    pub omega_eg: f64,
    /// Propagation time (fs).
    #[arg(long, default_value_t = 500.0)]
    pub tmax: f64,
    /// Output step (fs).
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    #[arg(long, required_unless_present_any = ["spectrum", "demo"])]
    pub params: Option<PathBuf>,
    #[arg(long, conflicts_with = "params", requires = "exact")]
    pub spectrum: Option<PathBuf>,
    /// Solve the continuum problem on the spectrum instead of the few-mode model.
    #[arg(long)]
    pub exact: bool,
    /// Use the built-in demo model (or its spectrum with --exact).
    #[arg(long, conflicts_with_all = ["params", "spectrum"])]
    pub demo: bool,
    #[command(flatten)]
    pub time: TimeArgs,
    /// Append tilde-mode populations.
    #[arg(long, conflicts_with = "exact")]
    pub tilde: bool,
    /// Use the dense master equation with this Fock cutoff per mode.
    #[arg(long, conflicts_with_all = ["exact", "tilde"])]
    pub lindblad_cutoff: Option<usize>,
    #[arg(long, value_enum, default_value_t = CouplingArg::Full, requires = "lindblad_cutoff")]
    pub coupling: CouplingArg,
    #[arg(long, default_value = "traj.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub green: PathBuf,
    /// Transition dipole moment (e·nm).
    #[arg(long)]
    pub mu: f64,
    #[command(flatten)]
    pub time: TimeArgs,
    /// `all` or a comma-separated list of point ids.
    #[arg(long, default_value = "all")]
    pub points: String,
    /// Divide each point's trace by its maximum.
    #[arg(long)]
    pub normalize: bool,
    /// Emit one raster CSV per snapshot time instead of traces.
    #[arg(long, requires = "times")]
    pub map: bool,
    #[arg(long, value_delimiter = ',')]
    pub times: Vec<f64>,
    #[arg(long, default_value = "intensity.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(required_unless_present = "demo")]
    pub spectrum: Option<PathBuf>,
    #[arg(long, conflicts_with = "spectrum")]
    pub demo: bool,
    #[command(flatten)]
    pub fit: FitOptions,
    #[command(flatten)]
    pub time: TimeArgs,
    #[arg(long, default_value = "pipeline_out")]
    pub out_dir: PathBuf,
}
