//! Stroboscopic evolution `Ψ(nT) = Fⁿ Ψ(0)` and the observables recorded at
//! every period: total polarization and entanglement entropy.

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{site_bit, CMatrix, UnitaryMatrix};
use crate::spectrum::{eigen_overlaps, QuasienergySpectrum};

/// Per-step norm drift above which evolution aborts.
pub const NORM_DRIFT_LIMIT: f64 = 1e-8;
/// Eigenvalues of a reduced density matrix below this are treated as zero.
pub const EIGEN_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// Accepts a normalized amplitude vector of length `2^N`.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::param(format!("state length {len} is not a power of two >= 2")));
        }
        let amplitudes = DVector::from_vec(amplitudes);
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::param(format!("state is not normalized (norm {norm})")));
        }
        Ok(Self { n_qubits: len.trailing_zeros() as usize, amplitudes })
    }

    /// Normalizes `amplitudes` first. Fails on a zero vector.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::param("cannot normalize a zero or non-finite vector"));
        }
        Self::new(amplitudes.into_iter().map(|z| z / norm).collect())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// All spins up, `|↑↑…↑⟩`.
pub fn initial_ferromagnetic_state(n_qubits: usize) -> Result<StateVector> {
    if n_qubits == 0 {
        return Err(Error::param("n_qubits must be at least 1"));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
    amps[0] = Complex64::new(1.0, 0.0);
    StateVector::new(amps)
}

/// Sorted set of 1-based sites forming one side of a bipartition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteSet(Vec<usize>);

impl SiteSet {
    pub fn new(mut sites: Vec<usize>) -> Self {
        sites.sort_unstable();
        sites.dedup();
        Self(sites)
    }

    /// `{1}`.
    pub fn first() -> Self {
        Self(vec![1])
    }

    /// `{1, …, ⌊N/2⌋}`; falls back to `{1}` for `N < 2`.
    pub fn half_chain(n_qubits: usize) -> Self {
        Self((1..=(n_qubits / 2).max(1)).collect())
    }

    pub fn sites(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn complement(&self, n_qubits: usize) -> Self {
        Self((1..=n_qubits).filter(|s| !self.0.contains(s)).collect())
    }

    /// Checks that the set is a nonempty proper subset of `1..=n_qubits`.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.0.is_empty() || self.0.len() >= n_qubits {
            return Err(Error::param(format!(
                "site subset {:?} is not a nonempty proper subset of 1..={n_qubits}",
                self.0
            )));
        }
        if let Some(s) = self.0.iter().find(|&&s| s == 0 || s > n_qubits) {
            return Err(Error::param(format!("site {s} out of range 1..={n_qubits}")));
        }
        Ok(())
    }
}

/// Which block of the chain entropy is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EntropyBlock {
    #[default]
    First,
    Half,
}

impl EntropyBlock {
    pub fn sites(self, n_qubits: usize) -> SiteSet {
        match self {
            EntropyBlock::First => SiteSet::first(),
            EntropyBlock::Half => SiteSet::half_chain(n_qubits),
        }
    }
}

/// `⟨Ψ| Σ_i σ_z,i |Ψ⟩`, evaluated on the diagonal.
pub fn total_polarization(psi: &StateVector) -> f64 {
    let n = psi.n_qubits as i64;
    psi.amplitudes.iter().enumerate().map(|(b, z)| z.norm_sqr() * (n - 2 * b.count_ones() as i64) as f64).sum()
}

/// `⟨σ_z,i⟩` for every site, site 1 first.
pub fn site_polarizations(psi: &StateVector) -> Vec<f64> {
    let n = psi.n_qubits;
    (1..=n)
        .map(|site| {
            let bit = site_bit(site, n);
            psi.amplitudes
                .iter()
                .enumerate()
                .map(|(b, z)| if b >> bit & 1 == 0 { z.norm_sqr() } else { -z.norm_sqr() })
                .sum()
        })
        .collect()
}

/// Splits basis index `b` into (kept, traced) sub-indices, each with the
/// lowest-numbered site as its most significant bit.
fn split_index(b: usize, keep_bits: &[usize], env_bits: &[usize]) -> (usize, usize) {
    let gather = |bits: &[usize]| bits.iter().fold(0usize, |acc, &bit| (acc << 1) | (b >> bit & 1));
    (gather(keep_bits), gather(env_bits))
}

/// `Tr_env |Ψ⟩⟨Ψ|` on the sites in `keep`.
pub fn reduced_density_matrix(psi: &StateVector, keep: &SiteSet) -> Result<CMatrix> {
    let n = psi.n_qubits;
    keep.validate(n)?;
    let keep_bits: Vec<usize> = keep.sites().iter().map(|&s| site_bit(s, n)).collect();
    let env_bits: Vec<usize> = keep.complement(n).sites().iter().map(|&s| site_bit(s, n)).collect();
    let dk = 1 << keep_bits.len();
    let de = 1 << env_bits.len();
    // Ψ reshaped as a dk × de matrix, then ρ = M M†.
    let mut m = CMatrix::zeros(dk, de);
    for (b, z) in psi.amplitudes.iter().enumerate() {
        let (k, e) = split_index(b, &keep_bits, &env_bits);
        m[(k, e)] = *z;
    }
    Ok(&m * m.adjoint())
}

fn hermitian_eigenvalues(rho: &CMatrix) -> Vec<f64> {
    if rho.nrows() == 2 {
        let a = rho[(0, 0)].re;
        let d = rho[(1, 1)].re;
        let b = rho[(0, 1)];
        let mean = 0.5 * (a + d);
        let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        return vec![mean - half_gap, mean + half_gap];
    }
    SymmetricEigen::new(rho.clone()).eigenvalues.iter().copied().collect()
}

/// Von Neumann entropy (natural log) of the reduced state on `keep`.
pub fn entanglement_entropy(psi: &StateVector, keep: &SiteSet) -> Result<f64> {
    let rho = reduced_density_matrix(psi, keep)?;
    Ok(von_neumann_entropy(&hermitian_eigenvalues(&rho)))
}

pub(crate) fn von_neumann_entropy(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().map(|&l| l.min(1.0)).filter(|&l| l > EIGEN_CLAMP).map(|l| -l * l.ln()).sum::<f64>().max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StroboscopicTrace {
    pub n_qubits: usize,
    pub entropy_block: SiteSet,
    pub steps: Vec<usize>,
    pub polarization: Vec<f64>,
    pub entropy: Vec<f64>,
    /// Row per step, column per site.
    pub per_site_polarization: Option<Vec<Vec<f64>>>,
    /// Row per step: `⟨v_j|Ψ(nT)⟩` over the Floquet eigenvectors.
    pub eigen_overlaps: Option<Vec<Vec<Complex64>>>,
}

impl StroboscopicTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn n_max(&self) -> usize {
        self.steps.last().copied().unwrap_or(0)
    }

    /// `(-1)ⁿ ⟨σ_z⟩(nT)`, which removes the period-2 flip and leaves the envelope.
    pub fn staggered_polarization(&self) -> Vec<f64> {
        self.steps.iter().zip(&self.polarization).map(|(&n, &p)| if n % 2 == 0 { p } else { -p }).collect()
    }
}

/// Optional extras recorded during [`evolve_with`].
#[derive(Debug, Clone, Default)]
pub struct EvolveOptions<'a> {
    pub per_site: bool,
    pub overlaps: Option<&'a QuasienergySpectrum>,
}

/// Applies `floquet` `n_max` times, recording polarization and entropy at every step.
pub fn evolve(
    floquet: &UnitaryMatrix,
    psi0: &StateVector,
    n_max: usize,
    entropy_block: &SiteSet,
) -> Result<StroboscopicTrace> {
    evolve_with(floquet, psi0, n_max, entropy_block, &EvolveOptions::default())
}

pub fn evolve_with(
    floquet: &UnitaryMatrix,
    psi0: &StateVector,
    n_max: usize,
    entropy_block: &SiteSet,
    options: &EvolveOptions<'_>,
) -> Result<StroboscopicTrace> {
    if floquet.dim() != psi0.dim() {
        return Err(Error::param(format!(
            "operator dimension {} does not match state dimension {}",
            floquet.dim(),
            psi0.dim()
        )));
    }
    let n = psi0.n_qubits;
    entropy_block.validate(n)?;
    if let Some(spec) = options.overlaps {
        if spec.dim() != psi0.dim() {
            return Err(Error::param("spectrum dimension does not match state dimension"));
        }
    }

    let len = n_max + 1;
    let mut trace = StroboscopicTrace {
        n_qubits: n,
        entropy_block: entropy_block.clone(),
        steps: (0..len).collect(),
        polarization: Vec::with_capacity(len),
        entropy: Vec::with_capacity(len),
        per_site_polarization: options.per_site.then(|| Vec::with_capacity(len)),
        eigen_overlaps: options.overlaps.map(|_| Vec::with_capacity(len)),
    };

    let f = floquet.matrix();
    let mut psi = psi0.clone();
    let mut next = DVector::zeros(psi.dim());
    for step in 0..len {
        trace.polarization.push(total_polarization(&psi));
        trace.entropy.push(entanglement_entropy(&psi, entropy_block)?);
        if let Some(rows) = trace.per_site_polarization.as_mut() {
            rows.push(site_polarizations(&psi));
        }
        if let (Some(rows), Some(spec)) = (trace.eigen_overlaps.as_mut(), options.overlaps) {
            rows.push(eigen_overlaps(&psi, spec)?);
        }
        if step == n_max {
            break;
        }
        next.gemv(Complex64::new(1.0, 0.0), f, &psi.amplitudes, Complex64::new(0.0, 0.0));
        std::mem::swap(&mut psi.amplitudes, &mut next);
        let drift = (psi.norm() - 1.0).abs();
        if drift > NORM_DRIFT_LIMIT {
            return Err(Error::numerical(format!(
                "norm drift {drift:e} at step {} exceeds {NORM_DRIFT_LIMIT:e}",
                step + 1
            )));
        }
    }
    Ok(trace)
}

/// Evolves and returns only the final state.
pub fn evolve_state(floquet: &UnitaryMatrix, psi0: &StateVector, steps: usize) -> Result<StateVector> {
    if floquet.dim() != psi0.dim() {
        return Err(Error::param("operator and state dimensions differ"));
    }
    let mut psi = psi0.amplitudes.clone();
    for _ in 0..steps {
        psi = floquet.matrix() * psi;
    }
    Ok(StateVector { n_qubits: psi0.n_qubits, amplitudes: psi })
}

/// Linear-interpolated positions where the staggered polarization changes sign.
pub fn envelope_zero_crossings(trace: &StroboscopicTrace) -> Vec<f64> {
    let s = trace.staggered_polarization();
    let mut out = Vec::new();
    for (i, w) in s.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if a == 0.0 && i == 0 {
            out.push(trace.steps[0] as f64);
        } else if (a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0) {
            let n0 = trace.steps[i] as f64;
            out.push(if a == b { n0 } else { n0 + a / (a - b) });
        }
    }
    out.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
    out
}

/// Mean spacing between consecutive zeros of the polarization envelope, the
/// beat period in units of `T`. `None` with fewer than two zeros.
pub fn beat_period(trace: &StroboscopicTrace) -> Option<f64> {
    let z = envelope_zero_crossings(trace);
    (z.len() >= 2).then(|| (z[z.len() - 1] - z[0]) / (z.len() - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

    fn state(re: &[f64]) -> StateVector {
        StateVector::normalized(re.iter().map(|&x| Complex64::new(x, 0.0)).collect()).unwrap()
    }

    #[test]
    fn ferromagnetic_states() {
        assert_eq!(initial_ferromagnetic_state(1).unwrap().amplitudes().as_slice().len(), 2);
        let s = initial_ferromagnetic_state(5).unwrap();
        assert_eq!(s.dim(), 32);
        assert_eq!(s.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert!(s.amplitudes().iter().skip(1).all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn unnormalized_state_rejected() {
        let amps = vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(StateVector::new(amps).is_err());
    }

    #[test]
    fn polarization_examples() {
        assert_eq!(total_polarization(&state(&[1.0, 0.0, 0.0, 0.0])), 2.0);
        assert_abs_diff_eq!(total_polarization(&state(&[1.0, 0.0, 0.0, -1.0])), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(total_polarization(&state(&[0.0, 1.0, 1.0, 0.0])), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn site_polarizations_sum_to_total() {
        let psi = state(&[0.3, -0.2, 0.5, 0.1, 0.7, 0.0, -0.4, 0.2]);
        let total: f64 = site_polarizations(&psi).iter().sum();
        assert_abs_diff_eq!(total, total_polarization(&psi), epsilon = 1e-14);
    }

    #[test]
    fn reduced_density_of_product_and_bell() {
        let rho = reduced_density_matrix(&state(&[1.0, 0.0, 0.0, 0.0]), &SiteSet::first()).unwrap();
        assert_eq!(rho[(0, 0)].re, 1.0);
        assert_eq!(rho[(1, 1)].re, 0.0);

        let rho = reduced_density_matrix(&state(&[1.0, 0.0, 0.0, -1.0]), &SiteSet::first()).unwrap();
        assert_abs_diff_eq!(rho[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho[(1, 1)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho[(0, 1)].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn invalid_subsets() {
        let psi = state(&[1.0, 0.0, 0.0, 0.0]);
        assert!(reduced_density_matrix(&psi, &SiteSet::new(vec![])).is_err());
        assert!(reduced_density_matrix(&psi, &SiteSet::new(vec![1, 2])).is_err());
        assert!(reduced_density_matrix(&psi, &SiteSet::new(vec![3])).is_err());
    }

    #[test]
    fn entropy_examples() {
        let up = initial_ferromagnetic_state(4).unwrap();
        assert_eq!(entanglement_entropy(&up, &SiteSet::half_chain(4)).unwrap(), 0.0);
        let bell = state(&[1.0, 0.0, 0.0, -1.0]);
        assert_abs_diff_eq!(entanglement_entropy(&bell, &SiteSet::first()).unwrap(), LN_2, epsilon = 1e-14);
        let singlet = state(&[0.0, 1.0, -1.0, 0.0]);
        assert_abs_diff_eq!(entanglement_entropy(&singlet, &SiteSet::first()).unwrap(), LN_2, epsilon = 1e-14);
        assert_abs_diff_eq!(FRAC_1_SQRT_2 * FRAC_1_SQRT_2, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let f = UnitaryMatrix::identity(3);
        let psi = initial_ferromagnetic_state(2).unwrap();
        assert!(matches!(evolve(&f, &psi, 3, &SiteSet::first()), Err(Error::Parameter(_))));
    }

    #[test]
    fn zero_steps_records_initial_point() {
        let f = UnitaryMatrix::identity(2);
        let psi = initial_ferromagnetic_state(2).unwrap();
        let tr = evolve(&f, &psi, 0, &SiteSet::first()).unwrap();
        assert_eq!(tr.steps, vec![0]);
        assert_eq!(tr.polarization, vec![2.0]);
    }

    #[test]
    fn half_chain_block() {
        assert_eq!(SiteSet::half_chain(5).sites(), &[1, 2]);
        assert_eq!(SiteSet::half_chain(2).sites(), &[1]);
        assert_eq!(SiteSet::new(vec![2, 1, 2]).sites(), &[1, 2]);
    }

    #[test]
    fn crossings_of_cosine_envelope() {
        // staggered value cos(2 eps n) has zeros every pi / (2 eps)
        let eps = 0.05;
        let pol: Vec<f64> =
            (0..200).map(|n| 2.0 * (2.0 * eps * n as f64).cos() * if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let tr = StroboscopicTrace {
            n_qubits: 2,
            entropy_block: SiteSet::first(),
            steps: (0..200).collect(),
            entropy: vec![0.0; 200],
            polarization: pol,
            per_site_polarization: None,
            eigen_overlaps: None,
        };
        let p = beat_period(&tr).unwrap();
        assert_abs_diff_eq!(p, std::f64::consts::PI / (2.0 * eps), epsilon = 0.05);
    }
}
