//! Physical parameterization of one driven chain.
//!
//! All couplings are dimensionless phases accumulated over one drive period,
//! so neither the period nor Planck's constant appears anywhere.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest chain the dense representation is meant for.
pub const MAX_QUBITS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PulseMode {
    /// Zero-duration pulse; the drift is suspended while it acts.
    #[default]
    Instantaneous,
    /// Pulse occupies a fraction `r` of the period with the drift running.
    FinitePulse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_qubits: usize,
    /// XY exchange phase `g` per drift stage.
    pub coupling: f64,
    /// Per-site detuning phases `δ_i`.
    pub detunings: Vec<f64>,
    /// Per-site pulse imperfections `ε_i`; the rotation angle is `π - 2ε_i`.
    pub pulse_imperfections: Vec<f64>,
    /// `t1 / T`, only read in [`PulseMode::FinitePulse`].
    pub pulse_fraction: f64,
    pub mode: PulseMode,
}

impl ChainConfig {
    /// Identical qubits: zero detuning and a common imperfection.
    pub fn uniform(n_qubits: usize, coupling: f64, epsilon: f64) -> Self {
        Self {
            n_qubits,
            coupling,
            detunings: vec![0.0; n_qubits],
            pulse_imperfections: vec![epsilon; n_qubits],
            pulse_fraction: 0.0,
            mode: PulseMode::Instantaneous,
        }
    }

    pub fn with_detunings(mut self, detunings: Vec<f64>) -> Self {
        self.detunings = detunings;
        self
    }

    pub fn with_pulse_imperfections(mut self, eps: Vec<f64>) -> Self {
        self.pulse_imperfections = eps;
        self
    }

    pub fn with_finite_pulse(mut self, pulse_fraction: f64) -> Self {
        self.mode = PulseMode::FinitePulse;
        self.pulse_fraction = pulse_fraction;
        self
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Pulse fraction that actually enters the Floquet operator.
    pub fn effective_pulse_fraction(&self) -> f64 {
        match self.mode {
            PulseMode::Instantaneous => 0.0,
            PulseMode::FinitePulse => self.pulse_fraction,
        }
    }

    /// True when all detunings and all imperfections coincide.
    pub fn is_identical_qubits(&self) -> bool {
        let same = |v: &[f64]| v.windows(2).all(|w| w[0] == w[1]);
        same(&self.detunings) && same(&self.pulse_imperfections)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::param(format!("n_qubits must be in 1..={MAX_QUBITS}, got {}", self.n_qubits)));
        }
        if self.detunings.len() != self.n_qubits {
            return Err(Error::param(format!("expected {} detunings, got {}", self.n_qubits, self.detunings.len())));
        }
        if self.pulse_imperfections.len() != self.n_qubits {
            return Err(Error::param(format!(
                "expected {} pulse imperfections, got {}",
                self.n_qubits,
                self.pulse_imperfections.len()
            )));
        }
        if !self.coupling.is_finite() || self.coupling < 0.0 {
            return Err(Error::param(format!("coupling must be finite and non-negative, got {}", self.coupling)));
        }
        if let Some(d) = self.detunings.iter().find(|d| !d.is_finite()) {
            return Err(Error::param(format!("non-finite detuning {d}")));
        }
        if let Some(e) = self.pulse_imperfections.iter().find(|e| !e.is_finite()) {
            return Err(Error::param(format!("non-finite pulse imperfection {e}")));
        }
        if self.mode == PulseMode::FinitePulse && !(self.pulse_fraction >= 0.0 && self.pulse_fraction < 1.0) {
            return Err(Error::param(format!("pulse fraction must lie in [0, 1), got {}", self.pulse_fraction)));
        }
        Ok(())
    }
}
