//! One-parameter sweeps: every grid row is an independent trajectory, so
//! rows run data-parallel (feature `parallel`) and are written into
//! preallocated slots by index. Output is identical for any worker count.

use serde::{Deserialize, Serialize};

use crate::config::ChainConfig;
use crate::dynamics::{evolve_with, initial_ferromagnetic_state, EvolveOptions, SiteSet, StroboscopicTrace};
use crate::error::{Error, Result};
use crate::operators::compose_floquet;
use crate::spectrum::quasienergy_spectrum;

/// Environment variable capping the number of sweep workers (0 or unset: all cores).
pub const THREADS_ENV: &str = "FLOQUET_TM_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SweepAxis {
    /// Sets site 1's imperfection to the value and shifts the others by the
    /// same amount, keeping the base configuration's per-site differences.
    EpsilonUniform,
    /// Sets `ε_i = ε_1 + value` on sites 2..N.
    EpsilonAdd,
    /// Sets the coupling `g`.
    Coupling,
    /// Sets the detuning of one site (1-based).
    DeltaSite { site: usize },
}

impl SweepAxis {
    /// Column name used in CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            SweepAxis::EpsilonUniform => "epsilon",
            SweepAxis::EpsilonAdd => "epsilon_add",
            SweepAxis::Coupling => "g",
            SweepAxis::DeltaSite { .. } => "delta",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: ChainConfig,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub n_max: usize,
    pub entropy_block: SiteSet,
    pub record_overlaps: bool,
}

impl SweepSpec {
    /// `points` evenly spaced values on `[min, max]`; a single point sits at `min`.
    pub fn linspace(min: f64, max: f64, points: usize) -> Vec<f64> {
        match points {
            0 => Vec::new(),
            1 => vec![min],
            _ => {
                let step = (max - min) / (points - 1) as f64;
                (0..points).map(|i| if i == points - 1 { max } else { min + step * i as f64 }).collect()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.entropy_block.validate(self.base.n_qubits)?;
        if self.values.is_empty() {
            return Err(Error::param("sweep needs at least one value"));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::param(format!("non-finite sweep value {v}")));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("sweep values must be strictly increasing"));
        }
        if let SweepAxis::DeltaSite { site } = self.axis {
            if site == 0 || site > self.base.n_qubits {
                return Err(Error::param(format!("detuning site {site} out of range")));
            }
        }
        if matches!(self.axis, SweepAxis::EpsilonAdd) && self.base.n_qubits < 2 {
            return Err(Error::param("epsilon_add sweeps need at least two qubits"));
        }
        Ok(())
    }

    /// Base configuration with `value` substituted on the sweep axis.
    pub fn config_for(&self, value: f64) -> ChainConfig {
        let mut cfg = self.base.clone();
        match self.axis {
            SweepAxis::EpsilonUniform => {
                let first = self.base.pulse_imperfections[0];
                for (e, base) in cfg.pulse_imperfections.iter_mut().zip(&self.base.pulse_imperfections) {
                    *e = value + (base - first);
                }
            }
            SweepAxis::EpsilonAdd => {
                let first = cfg.pulse_imperfections[0];
                cfg.pulse_imperfections.iter_mut().skip(1).for_each(|e| *e = first + value);
            }
            SweepAxis::Coupling => cfg.coupling = value,
            SweepAxis::DeltaSite { site } => cfg.detunings[site - 1] = value,
        }
        cfg
    }

    /// SHA-256 of the canonical JSON encoding of this spec.
    pub fn config_hash(&self) -> String {
        crate::io::sha256_hex(&serde_json::to_vec(self).expect("sweep spec serializes"))
    }
}

/// Trajectory of one configuration from the all-up state.
pub fn run_trajectory(
    config: &ChainConfig,
    n_max: usize,
    entropy_block: &SiteSet,
    record_overlaps: bool,
    per_site: bool,
) -> Result<StroboscopicTrace> {
    let floquet = compose_floquet(config)?;
    let psi0 = initial_ferromagnetic_state(config.n_qubits)?;
    let spectrum = if record_overlaps { Some(quasienergy_spectrum(&floquet)?) } else { None };
    let options = EvolveOptions { per_site, overlaps: spectrum.as_ref() };
    evolve_with(&floquet, &psi0, n_max, entropy_block, &options)
}

/// Row `value` of the sweep, identical to what [`run_sweep`] stores.
pub fn row_trace(spec: &SweepSpec, value: f64) -> Result<StroboscopicTrace> {
    run_trajectory(&spec.config_for(value), spec.n_max, &spec.entropy_block, spec.record_overlaps, false)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub library_version: String,
    pub config_hash: String,
    /// Left empty by the library so grid files stay reproducible; run
    /// manifests carry the wall-clock time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub spec: SweepSpec,
    /// `values.len() × (n_max + 1)`.
    pub polarization: Vec<Vec<f64>>,
    pub entropy: Vec<Vec<f64>>,
    /// Per row, per step, `|⟨v_j|Ψ(nT)⟩|` over the row's Floquet eigenvectors.
    pub abs_overlaps: Option<Vec<Vec<Vec<f64>>>>,
    pub metadata: GridMetadata,
}

impl SweepGrid {
    pub fn rows(&self) -> usize {
        self.polarization.len()
    }

    pub fn steps(&self) -> usize {
        self.spec.n_max + 1
    }

    /// Row as a trace (no optional data).
    pub fn row(&self, i: usize) -> StroboscopicTrace {
        StroboscopicTrace {
            n_qubits: self.spec.base.n_qubits,
            entropy_block: self.spec.entropy_block.clone(),
            steps: (0..self.steps()).collect(),
            polarization: self.polarization[i].clone(),
            entropy: self.entropy[i].clone(),
            per_site_polarization: None,
            eigen_overlaps: None,
        }
    }
}

/// How many workers a sweep may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Workers {
    Sequential,
    /// `0` means one per core.
    Threads(usize),
}

impl Workers {
    /// Reads [`THREADS_ENV`]; unset, empty or unparsable means all cores.
    pub fn from_env() -> Self {
        let n = std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(0);
        Workers::Threads(n)
    }
}

/// Runs the sweep with the worker cap from [`THREADS_ENV`].
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepGrid> {
    run_sweep_with(spec, Workers::from_env())
}

pub fn run_sweep_sequential(spec: &SweepSpec) -> Result<SweepGrid> {
    run_sweep_with(spec, Workers::Sequential)
}

pub fn run_sweep_with(spec: &SweepSpec, workers: Workers) -> Result<SweepGrid> {
    spec.validate()?;
    let rows = compute_rows(spec, workers);
    let mut polarization = Vec::with_capacity(rows.len());
    let mut entropy = Vec::with_capacity(rows.len());
    let mut overlaps = spec.record_overlaps.then(|| Vec::with_capacity(rows.len()));
    for (row, &value) in rows.into_iter().zip(&spec.values) {
        let trace = row.map_err(|e| Error::SweepRow { value, source: Box::new(e) })?;
        if let (Some(all), Some(ov)) = (overlaps.as_mut(), trace.eigen_overlaps) {
            all.push(ov.iter().map(|r| r.iter().map(|z| z.norm()).collect()).collect());
        }
        polarization.push(trace.polarization);
        entropy.push(trace.entropy);
    }
    Ok(SweepGrid {
        spec: spec.clone(),
        polarization,
        entropy,
        abs_overlaps: overlaps,
        metadata: GridMetadata {
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: spec.config_hash(),
            timestamp: None,
        },
    })
}

fn compute_rows(spec: &SweepSpec, workers: Workers) -> Vec<Result<StroboscopicTrace>> {
    match workers {
        Workers::Sequential => spec.values.iter().map(|&v| row_trace(spec, v)).collect(),
        Workers::Threads(n) => parallel_rows(spec, n),
    }
}

#[cfg(feature = "parallel")]
fn parallel_rows(spec: &SweepSpec, threads: usize) -> Vec<Result<StroboscopicTrace>> {
    use rayon::prelude::*;

    let run = || spec.values.par_iter().map(|&v| row_trace(spec, v)).collect();
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(run),
        Err(e) => {
            log::warn!("could not build a {threads}-thread pool ({e}); using the global pool");
            run()
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_rows(spec: &SweepSpec, _threads: usize) -> Vec<Result<StroboscopicTrace>> {
    spec.values.iter().map(|&v| row_trace(spec, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(values: Vec<f64>) -> SweepSpec {
        SweepSpec {
            base: ChainConfig::uniform(2, 0.0, 0.0),
            axis: SweepAxis::EpsilonUniform,
            values,
            n_max: 4,
            entropy_block: SiteSet::first(),
            record_overlaps: false,
        }
    }

    #[test]
    fn perfect_pulse_row() {
        let grid = run_sweep_sequential(&spec(vec![0.0])).unwrap();
        assert_eq!(grid.polarization, vec![vec![2.0, -2.0, 2.0, -2.0, 2.0]]);
    }

    #[test]
    fn values_must_increase() {
        assert!(run_sweep_sequential(&spec(vec![0.1, 0.1])).is_err());
        assert!(run_sweep_sequential(&spec(vec![])).is_err());
        assert!(run_sweep_sequential(&spec(vec![f64::NAN])).is_err());
    }

    #[test]
    fn failing_row_reports_value() {
        let mut s = spec(vec![0.0, 0.1]);
        s.axis = SweepAxis::Coupling;
        s.values = vec![-0.5, 0.1];
        match run_sweep_sequential(&s) {
            Err(Error::SweepRow { value, .. }) => assert_eq!(value, -0.5),
            other => panic!("expected row failure, got {other:?}"),
        }
    }

    #[test]
    fn axis_substitution() {
        let base = ChainConfig::uniform(3, 0.05, 0.0).with_pulse_imperfections(vec![0.01, 0.04, 0.01]);
        let mut s = spec(vec![0.1]);
        s.base = base;
        assert_eq!(s.config_for(0.1).pulse_imperfections, vec![0.1, 0.1 + (0.04 - 0.01), 0.1]);
        s.axis = SweepAxis::EpsilonAdd;
        assert_eq!(s.config_for(0.06).pulse_imperfections, vec![0.01, 0.01 + 0.06, 0.01 + 0.06]);
        s.axis = SweepAxis::DeltaSite { site: 2 };
        assert_eq!(s.config_for(0.7).detunings, vec![0.0, 0.7, 0.0]);
        s.axis = SweepAxis::Coupling;
        assert_eq!(s.config_for(0.3).coupling, 0.3);
    }

    #[test]
    fn linspace_endpoints() {
        let v = SweepSpec::linspace(0.0, 0.2, 401);
        assert_eq!(v.len(), 401);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[400], 0.2);
        assert_eq!(SweepSpec::linspace(0.3, 0.5, 1), vec![0.3]);
    }

    #[test]
    fn hash_changes_with_spec() {
        let a = spec(vec![0.0]);
        let mut b = a.clone();
        b.n_max = 5;
        assert_eq!(a.config_hash(), a.clone().config_hash());
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 64);
    }
}
