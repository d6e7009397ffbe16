#![allow(dead_code)]

use floquet_tm::operators::CMatrix;
use floquet_tm::{ChainConfig, StateVector};
use num_complex::Complex64;
use proptest::prelude::*;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Dense Kronecker product written out index by index.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    CMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Permutation matrix reversing the site order of an `n`-qubit chain.
pub fn reversal(n: usize) -> CMatrix {
    let dim = 1 << n;
    let rev = |b: usize| (0..n).fold(0, |acc, i| acc | ((b >> i & 1) << (n - 1 - i)));
    CMatrix::from_fn(dim, dim, |i, j| if i == rev(j) { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

pub fn random_state(n: usize, parts: &[(f64, f64)]) -> StateVector {
    let amps = parts.iter().take(1 << n).map(|&(re, im)| c(re, im)).collect();
    StateVector::normalized(amps).unwrap()
}

/// Chain configurations on the parameter ranges the simulator targets.
pub fn arb_config(max_qubits: usize) -> impl Strategy<Value = ChainConfig> {
    (1..=max_qubits).prop_flat_map(|n| {
        (
            0.0..=0.3f64,
            prop::collection::vec(-1.0..=1.0f64, n),
            prop::collection::vec(0.0..=0.2f64, n),
            prop::option::of(0.0..0.5f64),
        )
            .prop_map(move |(g, d, e, r)| {
                let cfg = ChainConfig::uniform(n, g, 0.0).with_detunings(d).with_pulse_imperfections(e);
                match r {
                    Some(r) => cfg.with_finite_pulse(r),
                    None => cfg,
                }
            })
    })
}

pub fn arb_amplitudes(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1 << n)
        .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
}
