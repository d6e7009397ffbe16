//! Dense operators on the `2^N` computational basis.
//!
//! Basis convention: site 1 is the most significant bit and bit value 0 is
//! spin up, so index 0 is `|↑↑…↑⟩` and the two-qubit order is
//! `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`.
//!
//! The drift stage propagates as `exp(+iΦ₂)`. This is the sign under which
//! the closed-form two-qubit interaction operator and the quasienergy set
//! `{0, 2g, ε_FL, -(ε_FL + 2g)}` hold. The opposite sign `exp(-iΦ₂)` is
//! mapped onto this one by complex conjugation combined with `σ_z` on every
//! site, which changes neither polarizations nor entanglement and negates
//! every quasienergy.

use std::f64::consts::FRAC_PI_2;
use std::ops::Mul;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::config::ChainConfig;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance used when a matrix handed in from outside is checked.
pub const VALIDATION_TOL: f64 = 1e-10;

/// Bit position of `site` (1-based) in a basis index of an `n`-qubit chain.
#[inline]
pub(crate) fn site_bit(site: usize, n_qubits: usize) -> usize {
    n_qubits - site
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn qubits_for_dim(dim: usize) -> Option<usize> {
    (dim.is_power_of_two() && dim >= 2).then(|| dim.trailing_zeros() as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    fn single(self) -> CMatrix {
        match self {
            PauliAxis::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            PauliAxis::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
            PauliAxis::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        }
    }
}

/// Dense unitary on `n_qubits` sites.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    n_qubits: usize,
    entries: CMatrix,
}

impl UnitaryMatrix {
    /// Wraps `entries` after checking `U†U = 1` to [`VALIDATION_TOL`].
    pub fn new(entries: CMatrix) -> Result<Self> {
        let n_qubits = qubits_for_dim(entries.nrows()).filter(|_| entries.is_square()).ok_or_else(|| {
            Error::param(format!(
                "unitary must be square with power-of-two dimension, got {}x{}",
                entries.nrows(),
                entries.ncols()
            ))
        })?;
        let u = Self { n_qubits, entries };
        let err = u.unitarity_error();
        if err > VALIDATION_TOL {
            return Err(Error::numerical(format!("matrix is not unitary (deviation {err:e})")));
        }
        Ok(u)
    }

    pub(crate) fn from_parts(n_qubits: usize, entries: CMatrix) -> Self {
        debug_assert_eq!(entries.nrows(), 1 << n_qubits);
        Self { n_qubits, entries }
    }

    pub fn identity(n_qubits: usize) -> Self {
        let d = 1 << n_qubits;
        Self::from_parts(n_qubits, CMatrix::identity(d, d))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    /// Max-abs entry of `U†U - 1`.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim();
        max_abs(&(self.entries.adjoint() * &self.entries - CMatrix::identity(d, d)))
    }

    /// Max-abs entry difference to another operator of the same size.
    pub fn max_abs_diff(&self, other: &UnitaryMatrix) -> f64 {
        max_abs(&(&self.entries - &other.entries))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.n_qubits, self.entries.adjoint())
    }
}

impl Mul for &UnitaryMatrix {
    type Output = UnitaryMatrix;

    fn mul(self, rhs: &UnitaryMatrix) -> UnitaryMatrix {
        assert_eq!(self.n_qubits, rhs.n_qubits, "operator size mismatch");
        UnitaryMatrix::from_parts(self.n_qubits, &self.entries * &rhs.entries)
    }
}

/// Hermitian phase generator `Φ`; the corresponding unitary is `exp(-iΦ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianPhaseGenerator {
    n_qubits: usize,
    entries: CMatrix,
}

impl HermitianPhaseGenerator {
    pub fn new(entries: CMatrix) -> Result<Self> {
        let n_qubits = qubits_for_dim(entries.nrows())
            .filter(|_| entries.is_square())
            .ok_or_else(|| Error::param("generator must be square with power-of-two dimension"))?;
        let dev = max_abs(&(&entries - entries.adjoint()));
        if dev > VALIDATION_TOL {
            return Err(Error::param(format!("generator is not Hermitian (deviation {dev:e})")));
        }
        Ok(Self { n_qubits, entries })
    }

    fn from_parts(n_qubits: usize, entries: CMatrix) -> Self {
        Self { n_qubits, entries }
    }

    pub fn zeros(n_qubits: usize) -> Self {
        let d = 1 << n_qubits;
        Self::from_parts(n_qubits, CMatrix::zeros(d, d))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_parts(self.n_qubits, self.entries.map(|z| z * factor))
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.n_qubits, other.n_qubits, "generator size mismatch");
        Self::from_parts(self.n_qubits, &self.entries + &other.entries)
    }
}

/// `σ_axis` acting on `site` (1-based), built from Kronecker products with identities.
pub fn pauli_operator(axis: PauliAxis, site: usize, n_qubits: usize) -> Result<UnitaryMatrix> {
    if n_qubits == 0 || site == 0 || site > n_qubits {
        return Err(Error::param(format!("site {site} out of range 1..={n_qubits}")));
    }
    let id = CMatrix::identity(2, 2);
    let single = axis.single();
    let mut m = CMatrix::identity(1, 1);
    for k in 1..=n_qubits {
        m = m.kronecker(if k == site { &single } else { &id });
    }
    Ok(UnitaryMatrix::from_parts(n_qubits, m))
}

/// Single-qubit pulse `[[sin ε, -i cos ε], [-i cos ε, sin ε]]`, i.e. a rotation
/// by `π - 2ε` about x.
pub fn single_pulse(epsilon: f64) -> CMatrix {
    let (s, c) = epsilon.sin_cos();
    CMatrix::from_row_slice(
        2,
        2,
        &[Complex64::new(s, 0.0), Complex64::new(0.0, -c), Complex64::new(0.0, -c), Complex64::new(s, 0.0)],
    )
}

/// Tensor product of per-qubit pulses, site 1 leftmost.
pub fn build_pulse_unitary(pulse_imperfections: &[f64]) -> Result<UnitaryMatrix> {
    if pulse_imperfections.is_empty() {
        return Err(Error::param("at least one pulse imperfection is required"));
    }
    if let Some(e) = pulse_imperfections.iter().find(|e| !e.is_finite()) {
        return Err(Error::param(format!("non-finite pulse imperfection {e}")));
    }
    let m = pulse_imperfections.iter().fold(CMatrix::identity(1, 1), |acc, &eps| acc.kronecker(&single_pulse(eps)));
    Ok(UnitaryMatrix::from_parts(pulse_imperfections.len(), m))
}

/// `Φ₂ = Σ_i δ_i(σ_z,i + 1) + g Σ_⟨i,i+1⟩ (σ_x σ_x + σ_y σ_y)` on an open chain.
///
/// Built directly in the basis: the detuning part is diagonal and the XY part
/// hops with amplitude `2g` between states related by one adjacent ↑↓ ↔ ↓↑ swap.
pub fn build_drift_generator(config: &ChainConfig) -> Result<HermitianPhaseGenerator> {
    config.validate()?;
    let n = config.n_qubits;
    let dim = config.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for b in 0..dim {
        let diag: f64 = config
            .detunings
            .iter()
            .enumerate()
            .filter(|&(i, _)| b >> site_bit(i + 1, n) & 1 == 0)
            .map(|(_, d)| 2.0 * d)
            .sum();
        m[(b, b)] = Complex64::new(diag, 0.0);
        if config.coupling != 0.0 {
            for site in 1..n {
                let mask = (1 << site_bit(site, n)) | (1 << site_bit(site + 1, n));
                let pair = b & mask;
                if pair != 0 && pair != mask {
                    m[(b ^ mask, b)] += Complex64::new(2.0 * config.coupling, 0.0);
                }
            }
        }
    }
    Ok(HermitianPhaseGenerator::from_parts(n, m))
}

/// `Σ_i (π/2 - ε_i) σ_x,i`, the pulse-stage phase generator (`exp(-i·)` of it is
/// the pulse unitary).
pub fn build_pulse_generator(pulse_imperfections: &[f64]) -> Result<HermitianPhaseGenerator> {
    let n = pulse_imperfections.len();
    if n == 0 {
        return Err(Error::param("at least one pulse imperfection is required"));
    }
    let dim = 1 << n;
    let mut m = CMatrix::zeros(dim, dim);
    for b in 0..dim {
        for (i, eps) in pulse_imperfections.iter().enumerate() {
            m[(b ^ (1 << site_bit(i + 1, n)), b)] += Complex64::new(FRAC_PI_2 - eps, 0.0);
        }
    }
    Ok(HermitianPhaseGenerator::from_parts(n, m))
}

/// `exp(-iH)` through the spectral decomposition of `H`.
pub fn matrix_exp_hermitian(h: &HermitianPhaseGenerator) -> UnitaryMatrix {
    let eig = SymmetricEigen::new(h.entries.clone());
    let mut scaled = eig.eigenvectors.clone();
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -lambda);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    UnitaryMatrix::from_parts(h.n_qubits, scaled * eig.eigenvectors.adjoint())
}

/// Closed-form two-qubit interaction operator: identity on `|↑↑⟩, |↓↓⟩` and
/// `[[cos 2g, i sin 2g], [i sin 2g, cos 2g]]` on the single-excitation block.
pub fn two_qubit_ug(g: f64) -> UnitaryMatrix {
    let (s, c) = (2.0 * g).sin_cos();
    let mut m = CMatrix::identity(4, 4);
    m[(1, 1)] = Complex64::new(c, 0.0);
    m[(2, 2)] = Complex64::new(c, 0.0);
    m[(1, 2)] = Complex64::new(0.0, s);
    m[(2, 1)] = Complex64::new(0.0, s);
    UnitaryMatrix::from_parts(2, m)
}

/// Drift-stage propagator `exp(+iΦ₂)`.
pub fn drift_unitary(config: &ChainConfig) -> Result<UnitaryMatrix> {
    Ok(matrix_exp_hermitian(&build_drift_generator(config)?.scaled(-1.0)))
}

/// One-period Floquet operator.
///
/// Instantaneous mode: `F = exp(+iΦ₂) · U_ε`.
///
/// Finite-pulse mode with fraction `r`: the drift phase accumulated per period
/// stays `Φ₂`, a share `r` of it acting concurrently with the pulse:
/// `F = exp(+i(1-r)Φ₂) · exp(-i[Σ_i (π/2 - ε_i) σ_x,i - rΦ₂])`.
/// With `r = 0` this is the instantaneous operator, bit for bit.
pub fn compose_floquet(config: &ChainConfig) -> Result<UnitaryMatrix> {
    config.validate()?;
    let r = config.effective_pulse_fraction();
    let drift = build_drift_generator(config)?.scaled(-1.0);
    if r == 0.0 {
        let pulse = build_pulse_unitary(&config.pulse_imperfections)?;
        return Ok(&matrix_exp_hermitian(&drift) * &pulse);
    }
    let pulse_gen = build_pulse_generator(&config.pulse_imperfections)?;
    let free = matrix_exp_hermitian(&drift.scaled(1.0 - r));
    let joint = matrix_exp_hermitian(&pulse_gen.plus(&drift.scaled(r)));
    Ok(&free * &joint)
}
