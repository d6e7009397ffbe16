//! Time-molecule detection: maximal runs of near-zero total polarization
//! that last at least a window of periods and carry high entanglement.

use serde::{Deserialize, Serialize};

use crate::dynamics::StroboscopicTrace;
use crate::error::{Error, Result};
use crate::spectrum::xi;

/// Largest accepted distance of `ξ_k` from an even integer when labeling.
pub const GROUP_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionParams {
    /// Minimum run length `W` in periods.
    pub window: usize,
    /// Per-step bound `τ` on `|⟨σ_z⟩|`.
    pub threshold: f64,
    /// Minimum mean entropy of an accepted run; 0 disables the check.
    pub entropy_floor: f64,
}

impl DetectionParams {
    /// `W = 10`, `τ = 0.075·N`, entropy floor 0.6.
    pub fn for_chain(n_qubits: usize) -> Self {
        Self { window: 10, threshold: 0.075 * n_qubits as f64, entropy_floor: 0.6 }
    }

    fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::param(format!("detection window must be >= 2, got {}", self.window)));
        }
        if !self.threshold.is_finite() || self.threshold <= 0.0 {
            return Err(Error::param(format!("threshold must be positive, got {}", self.threshold)));
        }
        if !self.entropy_floor.is_finite() {
            return Err(Error::param("entropy floor must be finite"));
        }
        Ok(())
    }
}

impl Default for DetectionParams {
    fn default() -> Self {
        Self::for_chain(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TmLabel {
    pub k: u32,
    pub l: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmInterval {
    pub n_start: usize,
    pub n_end: usize,
    pub duration: usize,
    pub mean_abs_polarization: f64,
    pub mean_entropy: f64,
    pub label: Option<TmLabel>,
}

impl TmInterval {
    pub fn center(&self) -> f64 {
        0.5 * (self.n_start + self.n_end) as f64
    }
}

/// Maximal disjoint runs with `|⟨σ_z⟩| < τ` of length at least `W` whose mean
/// entropy reaches the floor, sorted by start. A trace shorter than `W`
/// yields no intervals.
pub fn detect_flat_regions(trace: &StroboscopicTrace, params: &DetectionParams) -> Result<Vec<TmInterval>> {
    params.validate()?;
    let pol = &trace.polarization;
    let has_entropy = trace.entropy.len() == pol.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < pol.len() {
        if pol[i].abs() >= params.threshold {
            i += 1;
            continue;
        }
        let start = i;
        while i < pol.len() && pol[i].abs() < params.threshold {
            i += 1;
        }
        let len = i - start;
        if len < params.window {
            continue;
        }
        let mean_abs_polarization = pol[start..i].iter().map(|p| p.abs()).sum::<f64>() / len as f64;
        let mean_entropy =
            if has_entropy { trace.entropy[start..i].iter().sum::<f64>() / len as f64 } else { f64::NAN };
        if has_entropy && params.entropy_floor > 0.0 && mean_entropy < params.entropy_floor {
            continue;
        }
        out.push(TmInterval {
            n_start: trace.steps[start],
            n_end: trace.steps[i - 1],
            duration: len,
            mean_abs_polarization,
            mean_entropy,
            label: None,
        });
    }
    Ok(out)
}

/// Distance of `x` to the nearest even integer.
fn even_distance(x: f64) -> f64 {
    (x - 2.0 * (x / 2.0).round()).abs()
}

/// The `k ≤ k_max` whose `ξ_k(ε, g)` is closest to an even integer, with that
/// distance. Ties go to the smaller `k`.
pub fn best_commensurability(g: f64, epsilon: f64, k_max: u32) -> Result<Option<(u32, f64)>> {
    let mut best: Option<(u32, f64)> = None;
    for k in 1..=k_max {
        let d = even_distance(xi(k, epsilon, g)?);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((k, d));
        }
    }
    Ok(best)
}

/// Assigns `(k, l)`: `k` from [`best_commensurability`], `l = 1, 2, …` in
/// time order. Intervals stay unlabeled when no `ξ_k` lies within
/// [`GROUP_RADIUS`] of an even integer.
pub fn label_intervals(intervals: &[TmInterval], g: f64, epsilon: f64, k_max: u32) -> Result<Vec<TmInterval>> {
    if g.is_nan() || g <= 0.0 {
        return Err(Error::domain(format!("labeling needs g > 0, got {g}")));
    }
    let mut out: Vec<TmInterval> = intervals.to_vec();
    out.sort_by_key(|iv| iv.n_start);
    let k = match best_commensurability(g, epsilon, k_max)? {
        Some((k, d)) if d <= GROUP_RADIUS => k,
        _ => {
            out.iter_mut().for_each(|iv| iv.label = None);
            return Ok(out);
        }
    };
    for (idx, iv) in out.iter_mut().enumerate() {
        iv.label = Some(TmLabel { k, l: idx as u32 + 1 });
    }
    Ok(out)
}
