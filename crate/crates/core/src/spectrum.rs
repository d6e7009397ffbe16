//! Floquet spectra: numerical eigendecomposition of a one-period unitary, the
//! closed-form two-qubit spectrum, and the commensurability ratio `ξ_k` that
//! predicts where time molecules form.
//!
//! Eigenphases `θ` are defined by `F v = e^{-iθ} v` and live in `(-π, π]`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use nalgebra::{DVector, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::StateVector;
use crate::error::{Error, Result};
use crate::operators::{CMatrix, UnitaryMatrix};

/// Largest accepted eigen-residual `‖F v - e^{-iθ} v‖` for numerical spectra.
pub const RESIDUAL_LIMIT: f64 = 1e-8;
/// Eigenphases closer than this are treated as one degenerate subspace.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Above this, the first-order two-qubit formulas are outside their regime.
pub const ANALYTIC_VALIDITY_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSource {
    Numerical,
    AnalyticTwoQubit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasienergySpectrum {
    /// Ascending, in `(-π, π]`.
    pub eigenphases: Vec<f64>,
    /// Column `j` belongs to `eigenphases[j]`.
    pub eigenvectors: CMatrix,
    pub source: SpectrumSource,
    /// Set when the analytic eigenvectors are limiting forms (ε = 0).
    pub degenerate: bool,
    /// False when the analytic formulas were evaluated outside `ε, g ≤ 0.1`.
    pub within_validity: bool,
}

impl QuasienergySpectrum {
    pub fn dim(&self) -> usize {
        self.eigenvectors.nrows()
    }

    pub fn eigenvector(&self, j: usize) -> DVector<Complex64> {
        self.eigenvectors.column(j).into_owned()
    }

    /// Largest `‖F v_j - e^{-iθ_j} v_j‖` over all pairs.
    pub fn max_residual(&self, floquet: &UnitaryMatrix) -> f64 {
        (0..self.eigenphases.len())
            .map(|j| {
                let v = self.eigenvectors.column(j);
                let lambda = Complex64::from_polar(1.0, -self.eigenphases[j]);
                (floquet.matrix() * v - v * lambda).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Max-abs entry of `V†V - 1`.
    pub fn orthonormality_error(&self) -> f64 {
        let d = self.eigenvectors.ncols();
        (self.eigenvectors.adjoint() * &self.eigenvectors - CMatrix::identity(d, d))
            .iter()
            .fold(0.0, |acc, z| acc.max(z.norm()))
    }
}

/// Maps a phase onto `(-π, π]`.
pub fn wrap_phase(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(TAU);
    if t > PI {
        t -= TAU;
    }
    // values within rounding of -π belong to +π
    if t <= -PI + 1e-12 {
        t += TAU;
    }
    if t == 0.0 {
        0.0
    } else {
        t
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Bottleneck distance between two phase multisets on the circle: the
/// smallest achievable largest deviation over all matchings.
pub fn multiset_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    if a.is_empty() {
        return 0.0;
    }
    let sort = |v: &[f64]| {
        let mut v: Vec<f64> = v.iter().map(|&t| wrap_phase(t)).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let (a, b) = (sort(a), sort(b));
    let n = a.len();
    (0..n)
        .map(|shift| (0..n).map(|i| circular_distance(a[i], b[(i + shift) % n])).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

/// Makes the first component with magnitude above `1e-8` real and positive.
fn fix_phase(v: &mut DVector<Complex64>) {
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-8).copied() {
        let rot = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= rot;
        }
    }
}

/// Canonical orthonormal basis of the span of `cols`: Gram–Schmidt over the
/// projected unit vectors `P e_0, P e_1, …` in index order, so the result
/// depends only on the subspace, not on the basis the solver returned.
fn canonical_basis(cols: &[DVector<Complex64>]) -> Vec<DVector<Complex64>> {
    let k = cols.len();
    if k == 1 {
        let mut v = cols[0].clone();
        fix_phase(&mut v);
        return vec![v];
    }
    let dim = cols[0].len();
    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(k);
    for b in 0..dim {
        if basis.len() == k {
            break;
        }
        // P e_b = Σ_c c · conj(c_b)
        let mut w = DVector::<Complex64>::zeros(dim);
        for c in cols {
            w.axpy(c[b].conj(), c, Complex64::new(1.0, 0.0));
        }
        for q in &basis {
            let proj = q.dotc(&w);
            w.axpy(-proj, q, Complex64::new(1.0, 0.0));
        }
        let norm = w.norm();
        if norm > 1e-6 {
            w.unscale_mut(norm);
            fix_phase(&mut w);
            basis.push(w);
        }
    }
    basis
}

/// Full eigendecomposition of a unitary via its complex Schur form.
///
/// A unitary is normal, so the Schur factor is diagonal up to rounding and
/// the Schur vectors are eigenvectors. Eigenphases are sorted ascending;
/// each (near-)degenerate cluster is replaced by a canonical basis of its
/// subspace, and every vector gets its first significant component real
/// positive.
pub fn quasienergy_spectrum(floquet: &UnitaryMatrix) -> Result<QuasienergySpectrum> {
    let dim = floquet.dim();
    let (q, t) = Schur::new(floquet.matrix().clone()).unpack();
    let mut pairs: Vec<(f64, DVector<Complex64>)> =
        (0..dim).map(|j| (wrap_phase(-t[(j, j)].arg()), q.column(j).into_owned())).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut eigenphases = Vec::with_capacity(dim);
    let mut vectors = Vec::with_capacity(dim);
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && pairs[end].0 - pairs[end - 1].0 < DEGENERACY_TOL {
            end += 1;
        }
        let cluster: Vec<DVector<Complex64>> = pairs[start..end].iter().map(|p| p.1.clone()).collect();
        let basis = canonical_basis(&cluster);
        if basis.len() != cluster.len() {
            return Err(Error::numerical("degenerate eigenspace lost rank during orthonormalization"));
        }
        eigenphases.extend(pairs[start..end].iter().map(|p| p.0));
        vectors.extend(basis);
        start = end;
    }

    let spectrum = QuasienergySpectrum {
        eigenphases,
        eigenvectors: CMatrix::from_columns(&vectors),
        source: SpectrumSource::Numerical,
        degenerate: false,
        within_validity: true,
    };
    let residual = spectrum.max_residual(floquet);
    if residual > RESIDUAL_LIMIT {
        return Err(Error::numerical(format!("eigensolver residual {residual:e} exceeds {RESIDUAL_LIMIT:e}")));
    }
    Ok(spectrum)
}

/// `ε_FL = π - g - √(g² + 4ε²)`.
pub fn epsilon_fl(epsilon: f64, g: f64) -> f64 {
    PI - g - (g * g + 4.0 * epsilon * epsilon).sqrt()
}

/// `β = (g + √(g² + 4ε²)) / 2ε`.
pub fn beta(epsilon: f64, g: f64) -> f64 {
    (g + (g * g + 4.0 * epsilon * epsilon).sqrt()) / (2.0 * epsilon)
}

/// The four first-order quasienergies `{0, 2g, ε_FL, -(ε_FL + 2g)}`, wrapped
/// and sorted.
pub fn analytic_two_qubit_phases(epsilon: f64, g: f64) -> Vec<f64> {
    let efl = epsilon_fl(epsilon, g);
    let mut v: Vec<f64> = [0.0, 2.0 * g, efl, -(efl + 2.0 * g)].into_iter().map(wrap_phase).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Closed-form two-qubit spectrum for identical qubits, valid for `ε, g ≪ 1`.
///
/// The Bell pair `(|↑↑⟩ - |↓↓⟩)/√2` (phase 0) and `(|↑↓⟩ - |↓↑⟩)/√2`
/// (phase 2g) are exact at all parameters. The remaining symmetric pair is
/// first order in `ε, g`; the vector with weight `β` on the single-excitation
/// states carries `ε_FL`, the one with weight `-1/β` carries `-(ε_FL + 2g)`.
/// At `ε = 0` the `β → ∞` limits are returned and `degenerate` is set.
pub fn analytic_two_qubit_spectrum(epsilon: f64, g: f64) -> Result<QuasienergySpectrum> {
    if !(epsilon.is_finite() && g.is_finite()) || epsilon < 0.0 || g < 0.0 {
        return Err(Error::domain(format!(
            "analytic spectrum needs finite ε ≥ 0 and g ≥ 0, got ε = {epsilon}, g = {g}"
        )));
    }
    let within_validity = epsilon <= ANALYTIC_VALIDITY_LIMIT && g <= ANALYTIC_VALIDITY_LIMIT;
    if !within_validity {
        log::warn!("analytic two-qubit spectrum evaluated outside ε, g ≤ 0.1 (ε = {epsilon}, g = {g})");
    }
    let c = |x: f64| Complex64::new(x, 0.0);
    let s = FRAC_1_SQRT_2;
    let efl = epsilon_fl(epsilon, g);
    let psi1 = DVector::from_vec(vec![c(s), c(0.0), c(0.0), c(-s)]);
    let psi2 = DVector::from_vec(vec![c(0.0), c(s), c(-s), c(0.0)]);
    let degenerate = epsilon == 0.0;
    let (psi3, psi4) = if degenerate {
        (DVector::from_vec(vec![c(s), c(0.0), c(0.0), c(s)]), DVector::from_vec(vec![c(0.0), c(s), c(s), c(0.0)]))
    } else {
        let b = beta(epsilon, g);
        let norm = (2.0 * (1.0 + b * b)).sqrt();
        (
            DVector::from_vec(vec![c(b / norm), c(-1.0 / norm), c(-1.0 / norm), c(b / norm)]),
            DVector::from_vec(vec![c(1.0 / norm), c(b / norm), c(b / norm), c(1.0 / norm)]),
        )
    };
    let mut pairs = [
        (wrap_phase(0.0), psi1),
        (wrap_phase(2.0 * g), psi2),
        (wrap_phase(-(efl + 2.0 * g)), psi3),
        (wrap_phase(efl), psi4),
    ];
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let cols: Vec<DVector<Complex64>> = pairs.iter().map(|p| p.1.clone()).collect();
    Ok(QuasienergySpectrum {
        eigenphases: pairs.iter().map(|p| p.0).collect(),
        eigenvectors: CMatrix::from_columns(&cols),
        source: SpectrumSource::AnalyticTwoQubit,
        degenerate,
        within_validity,
    })
}

/// Commensurability ratio `ξ_k = (k+1)(π - ε_FL)/g = (k+1)(g + √(g² + 4ε²))/g`.
pub fn xi(k: u32, epsilon: f64, g: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::domain("commensurability parameter k must be at least 1"));
    }
    if !g.is_finite() || g <= 0.0 {
        return Err(Error::domain(format!("ξ_k is undefined for g = {g}")));
    }
    if !epsilon.is_finite() {
        return Err(Error::domain("ε must be finite"));
    }
    Ok((k + 1) as f64 * (g + (g * g + 4.0 * epsilon * epsilon).sqrt()) / g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmPrediction {
    pub k: u32,
    pub ell: u32,
    pub g: f64,
    pub epsilon: f64,
    pub xi_value: f64,
    /// `ω₁T = π - ε_FL`.
    pub omega1_t: f64,
    /// `ω₂T = 2g`.
    pub omega2_t: f64,
}

/// Pulse imperfection at which `ξ_k = ℓ`:
/// `ε = (g/2) √((ℓ/(k+1) - 1)² - 1)`.
///
/// `ℓ/(k+1) = 2` is the degenerate boundary and returns `ε = 0`; below it
/// there is no solution.
pub fn tm_epsilon_for(k: u32, ell: u32, g: f64) -> Result<TmPrediction> {
    if !ell.is_multiple_of(2) {
        return Err(Error::domain(format!("ℓ must be even, got {ell}")));
    }
    if k < 1 {
        return Err(Error::domain("commensurability parameter k must be at least 1"));
    }
    if !g.is_finite() || g <= 0.0 {
        return Err(Error::domain(format!("TM condition is undefined for g = {g}")));
    }
    let ratio = ell as f64 / (k + 1) as f64;
    if ratio < 2.0 {
        return Err(Error::domain(format!("ξ_{k} = {ell} has no solution: ℓ/(k+1) = {ratio} < 2")));
    }
    let epsilon = 0.5 * g * ((ratio - 1.0).powi(2) - 1.0).max(0.0).sqrt();
    Ok(TmPrediction {
        k,
        ell,
        g,
        epsilon,
        xi_value: xi(k, epsilon, g)?,
        omega1_t: PI - epsilon_fl(epsilon, g),
        omega2_t: 2.0 * g,
    })
}

/// Expansion coefficients `c_j = ⟨v_j|Ψ⟩` in the spectrum's eigenbasis.
pub fn eigen_overlaps(psi: &StateVector, spectrum: &QuasienergySpectrum) -> Result<Vec<Complex64>> {
    if psi.dim() != spectrum.dim() {
        return Err(Error::param(format!(
            "state dimension {} does not match spectrum dimension {}",
            psi.dim(),
            spectrum.dim()
        )));
    }
    Ok((spectrum.eigenvectors.adjoint() * psi.amplitudes()).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ChainConfig;
    use crate::operators::compose_floquet;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_spectrum() {
        let s = quasienergy_spectrum(&UnitaryMatrix::identity(3)).unwrap();
        assert!(s.eigenphases.iter().all(|&t| t == 0.0));
        assert!(s.orthonormality_error() < 1e-12);
        // canonical basis of the full space is the computational basis
        assert!((s.eigenvectors.clone() - CMatrix::identity(8, 8)).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn wrap_phase_branch() {
        assert_eq!(wrap_phase(-PI), PI);
        assert_eq!(wrap_phase(PI), PI);
        assert_abs_diff_eq!(wrap_phase(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_eq!(wrap_phase(-0.0), 0.0);
    }

    #[test]
    fn multiset_distance_ignores_order_and_wraps() {
        assert_eq!(multiset_distance(&[0.1, 0.2], &[0.2, 0.1]), 0.0);
        let d = multiset_distance(&[PI - 0.01], &[-PI + 0.01]);
        assert_abs_diff_eq!(d, 0.02, epsilon = 1e-12);
        assert_eq!(multiset_distance(&[0.0], &[0.0, 1.0]), f64::INFINITY);
    }

    #[test]
    fn epsilon_fl_reference_value() {
        // π - 0.05 - √(0.0025 + 4·0.0436²)
        let v = epsilon_fl(0.0436, 0.05);
        assert_abs_diff_eq!(v, 2.991_074_794_480_081, epsilon = 1e-12);
        assert_abs_diff_eq!(epsilon_fl(0.05, 0.0), PI - 0.1, epsilon = 1e-15);
    }

    #[test]
    fn beta_reference_value() {
        let b = beta(0.0436, 0.05);
        let direct = (0.05 + (0.0025_f64 + 4.0 * 0.0436 * 0.0436).sqrt()) / (2.0 * 0.0436);
        assert_eq!(b, direct);
        assert_abs_diff_eq!(b, 1.726, epsilon = 1e-3);
    }

    #[test]
    fn xi_examples() {
        let g = 0.05;
        assert_abs_diff_eq!(xi(1, g * 3f64.sqrt() / 2.0, g).unwrap(), 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(xi(1, 1e-12, g).unwrap(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(xi(2, 0.0436, g).unwrap(), 9.03, epsilon = 5e-3);
        assert!(matches!(xi(1, 0.01, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn tm_epsilon_examples() {
        let p = tm_epsilon_for(1, 6, 0.05).unwrap();
        assert_abs_diff_eq!(p.epsilon, 0.05 * 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.xi_value, 6.0, epsilon = 1e-9);
        assert_eq!(tm_epsilon_for(1, 4, 0.3).unwrap().epsilon, 0.0);
        let p = tm_epsilon_for(2, 10, 0.05).unwrap();
        assert_abs_diff_eq!(p.epsilon, 0.025 * ((10.0f64 / 3.0 - 1.0).powi(2) - 1.0).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(xi(2, p.epsilon, 0.05).unwrap(), 10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.omega2_t, 0.1, epsilon = 1e-15);
    }

    #[test]
    fn tm_epsilon_domain_errors() {
        assert!(matches!(tm_epsilon_for(1, 2, 0.05), Err(Error::Domain(_))));
        assert!(matches!(tm_epsilon_for(1, 7, 0.05), Err(Error::Domain(_))));
        assert!(matches!(tm_epsilon_for(1, 6, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn analytic_g_zero_limit() {
        let s = analytic_two_qubit_spectrum(0.05, 0.0).unwrap();
        assert_abs_diff_eq!(epsilon_fl(0.05, 0.0), 3.0416, epsilon = 1e-4);
        let expected = [-(PI - 0.1), 0.0, 0.0, PI - 0.1];
        for (a, b) in s.eigenphases.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn analytic_degenerate_at_zero_epsilon() {
        let s = analytic_two_qubit_spectrum(0.0, 0.05).unwrap();
        assert!(s.degenerate);
        let f = compose_floquet(&ChainConfig::uniform(2, 0.05, 0.0)).unwrap();
        assert!(s.max_residual(&f) < 1e-12);
    }

    #[test]
    fn analytic_validity_flag() {
        assert!(analytic_two_qubit_spectrum(0.05, 0.05).unwrap().within_validity);
        assert!(!analytic_two_qubit_spectrum(0.15, 0.05).unwrap().within_validity);
    }

    #[test]
    fn overlaps_of_eigenvector() {
        let f = compose_floquet(&ChainConfig::uniform(2, 0.05, 0.0436)).unwrap();
        let s = quasienergy_spectrum(&f).unwrap();
        let v = StateVector::new(s.eigenvector(0).iter().copied().collect()).unwrap();
        let c = eigen_overlaps(&v, &s).unwrap();
        assert_abs_diff_eq!(c[0].norm(), 1.0, epsilon = 1e-12);
        assert!(c[1..].iter().all(|z| z.norm() < 1e-12));
    }
}
