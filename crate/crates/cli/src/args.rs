use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use floquet_tm::{ChainConfig, EntropyBlock, SiteSet, SweepAxis};
use serde::{Deserialize, Serialize};

use crate::UsageError;

#[derive(Debug, Parser)]
#[command(name = "floquet-tm", version, about = "Floquet dynamics of pulse-driven interacting qubit chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "subcommand")]
pub enum Command {
    /// Stroboscopic trajectory from the all-up state.
    Evolve(EvolveArgs),
    /// Trajectories over a one-parameter grid.
    Sweep(SweepArgs),
    /// Floquet eigenphases, with the closed-form set for two identical qubits.
    Spectrum(SpectrumArgs),
    /// Pulse imperfection at which ξ_k reaches the even integer ℓ.
    PredictTm(PredictArgs),
    /// Long-lived zero-polarization intervals in a trace or grid.
    DetectTm(DetectArgs),
    /// Re-runs the command recorded in a manifest.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Instantaneous,
    Finite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Block {
    First,
    Half,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    Epsilon,
    EpsilonAdd,
    G,
    Delta,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ChainArgs {
    #[arg(long, default_value_t = 2)]
    pub n_qubits: usize,
    /// Exchange coupling.
    #[arg(long, default_value_t = 0.0)]
    pub g: f64,
    /// Pulse imperfection: one value for all qubits or a comma list per qubit.
    #[arg(long, value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
    pub epsilon: Vec<f64>,
    /// Detunings: one value for all qubits or a comma list per qubit.
    #[arg(long, value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
    pub delta: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Mode::Instantaneous)]
    pub mode: Mode,
    /// Pulse duration as a fraction of the period (finite mode only).
    #[arg(long)]
    pub pulse_fraction: Option<f64>,
}

fn per_qubit(name: &str, values: &[f64], n: usize) -> Result<Vec<f64>, UsageError> {
    match values.len() {
        1 => Ok(vec![values[0]; n]),
        len if len == n => Ok(values.to_vec()),
        len => Err(UsageError(format!("--{name} takes 1 or {n} values, got {len}"))),
    }
}

impl ChainArgs {
    pub fn config(&self) -> Result<ChainConfig, UsageError> {
        let n = self.n_qubits;
        if n == 0 || n > floquet_tm::config::MAX_QUBITS {
            return Err(UsageError(format!(
                "--n-qubits must be between 1 and {}, got {n}",
                floquet_tm::config::MAX_QUBITS
            )));
        }
        let mut cfg = ChainConfig::uniform(n, self.g, 0.0)
            .with_pulse_imperfections(per_qubit("epsilon", &self.epsilon, n)?)
            .with_detunings(per_qubit("delta", &self.delta, n)?);
        match (self.mode, self.pulse_fraction) {
            (Mode::Instantaneous, None) => {}
            (Mode::Instantaneous, Some(_)) => {
                return Err(UsageError("--pulse-fraction requires --mode finite".into()));
            }
            (Mode::Finite, None) => return Err(UsageError("--mode finite requires --pulse-fraction".into())),
            (Mode::Finite, Some(r)) => cfg = cfg.with_finite_pulse(r),
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OutputArgs {
    /// Output directory, or `-` to stream the data to standard output.
    /// Defaults to ./out/<run-name>/.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Name of the run directory under ./out.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long, default_value_t = 150)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = Block::First)]
    pub entropy_block: Block,
    /// Record |⟨v_j|Ψ(nT)⟩| over the Floquet eigenvectors.
    #[arg(long)]
    pub overlaps: bool,
    /// Record ⟨σ_z⟩ of every site.
    #[arg(long)]
    pub per_site: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long, value_enum, default_value_t = Axis::Epsilon)]
    pub axis: Axis,
    /// Site (1-based) for `--axis delta`.
    #[arg(long)]
    pub site: Option<usize>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub min: f64,
    #[arg(long, default_value_t = 0.2, allow_hyphen_values = true)]
    pub max: f64,
    #[arg(long, default_value_t = 400)]
    pub points: usize,
    #[arg(long, default_value_t = 150)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = Block::First)]
    pub entropy_block: Block,
    #[arg(long)]
    pub overlaps: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl SweepArgs {
    pub fn axis(&self) -> Result<SweepAxis, UsageError> {
        match (self.axis, self.site) {
            (Axis::Delta, Some(site)) => Ok(SweepAxis::DeltaSite { site }),
            (Axis::Delta, None) => Err(UsageError("--axis delta requires --site".into())),
            (_, Some(_)) => Err(UsageError("--site is only valid with --axis delta".into())),
            (Axis::Epsilon, None) => Ok(SweepAxis::EpsilonUniform),
            (Axis::EpsilonAdd, None) => Ok(SweepAxis::EpsilonAdd),
            (Axis::G, None) => Ok(SweepAxis::Coupling),
        }
    }

    pub fn values(&self) -> Result<Vec<f64>, UsageError> {
        if self.points == 0 {
            return Err(UsageError("--points must be at least 1".into()));
        }
        if self.points > 1 && (self.max.is_nan() || self.min.is_nan() || self.max <= self.min) {
            return Err(UsageError(format!("--max ({}) must exceed --min ({})", self.max, self.min)));
        }
        Ok(floquet_tm::SweepSpec::linspace(self.min, self.max, self.points))
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PredictArgs {
    #[arg(long)]
    pub g: f64,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Even target value of ξ_k.
    #[arg(long)]
    pub ell: u32,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DetectArgs {
    /// Trace or grid file (CSV or JSON). Without it the trajectory described
    /// by the chain flags is computed first.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Steps to evolve when no input is given.
    #[arg(long, default_value_t = 150)]
    pub steps: usize,
    /// Minimum interval length in periods.
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    /// Bound on |⟨σ_z⟩|; defaults to 0.075·N.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Minimum mean entropy; defaults to 0.6.
    #[arg(long)]
    pub entropy_floor: Option<f64>,
    /// Largest k tried when labeling intervals.
    #[arg(long, default_value_t = 3)]
    pub k_max: u32,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Manifest written by a previous run.
    pub manifest: PathBuf,
    /// Output directory; defaults to the directory recorded in the manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Block {
    pub fn sites(self, n_qubits: usize) -> SiteSet {
        match self {
            Block::First => EntropyBlock::First.sites(n_qubits),
            Block::Half => EntropyBlock::Half.sites(n_qubits),
        }
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Evolve(_) => "evolve",
            Command::Sweep(_) => "sweep",
            Command::Spectrum(_) => "spectrum",
            Command::PredictTm(_) => "predict-tm",
            Command::DetectTm(_) => "detect-tm",
            Command::Replay(_) => "replay",
        }
    }

    pub fn output(&self) -> Option<&OutputArgs> {
        match self {
            Command::Evolve(a) => Some(&a.output),
            Command::Sweep(a) => Some(&a.output),
            Command::Spectrum(a) => Some(&a.output),
            Command::PredictTm(a) => Some(&a.output),
            Command::DetectTm(a) => Some(&a.output),
            Command::Replay(_) => None,
        }
    }

    pub fn output_mut(&mut self) -> Option<&mut OutputArgs> {
        match self {
            Command::Evolve(a) => Some(&mut a.output),
            Command::Sweep(a) => Some(&mut a.output),
            Command::Spectrum(a) => Some(&mut a.output),
            Command::PredictTm(a) => Some(&mut a.output),
            Command::DetectTm(a) => Some(&mut a.output),
            Command::Replay(_) => None,
        }
    }
}
