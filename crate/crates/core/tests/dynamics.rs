mod common;

use common::*;
use floquet_tm::dynamics::{evolve_state, site_polarizations};
use floquet_tm::operators::CMatrix;
use floquet_tm::{
    compose_floquet, entanglement_entropy, evolve, initial_ferromagnetic_state, reduced_density_matrix,
    total_polarization, ChainConfig, SiteSet, StateVector,
};
use proptest::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

fn arb_block(n: usize) -> impl Strategy<Value = SiteSet> {
    prop::collection::btree_set(1..=n, 1..n).prop_map(|s| SiteSet::new(s.into_iter().collect()))
}

/// `ρ_A[i, i'] = Σ_j ψ(i, j) ψ*(i', j)` with the basis split by hand.
fn rdm_oracle(psi: &StateVector, keep: &[usize]) -> CMatrix {
    let n = psi.n_qubits();
    let env: Vec<usize> = (1..=n).filter(|s| !keep.contains(s)).collect();
    let index = |k: usize, e: usize| {
        let mut b = 0usize;
        for (pos, &site) in keep.iter().enumerate() {
            let bit = k >> (keep.len() - 1 - pos) & 1;
            b |= bit << (n - site);
        }
        for (pos, &site) in env.iter().enumerate() {
            let bit = e >> (env.len() - 1 - pos) & 1;
            b |= bit << (n - site);
        }
        b
    };
    let (dk, de) = (1 << keep.len(), 1 << env.len());
    let a = psi.amplitudes();
    CMatrix::from_fn(dk, dk, |i, ip| (0..de).map(|j| a[index(i, j)] * a[index(ip, j)].conj()).sum())
}

fn bell(pairs: [f64; 4]) -> StateVector {
    StateVector::normalized(pairs.iter().map(|&x| c(x, 0.0)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entropy_is_symmetric_under_complement(
        (n, amps, block) in (2usize..=5).prop_flat_map(|n| (Just(n), arb_amplitudes(n), arb_block(n)))
    ) {
        let psi = random_state(n, &amps);
        let a = entanglement_entropy(&psi, &block).unwrap();
        let b = entanglement_entropy(&psi, &block.complement(n)).unwrap();
        prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        prop_assert!(a >= 0.0 && a <= LN_2 * block.len().min(n - block.len()) as f64 + 1e-12);
    }

    #[test]
    fn reduced_density_matrix_matches_index_sum(
        (n, amps, block) in (2usize..=5).prop_flat_map(|n| (Just(n), arb_amplitudes(n), arb_block(n)))
    ) {
        let psi = random_state(n, &amps);
        let rho = reduced_density_matrix(&psi, &block).unwrap();
        prop_assert!(max_abs(&(rho - rdm_oracle(&psi, block.sites()))) <= 1e-14);
    }

    #[test]
    fn polarization_is_sum_of_site_values((n, amps) in (1usize..=5).prop_flat_map(|n| (Just(n), arb_amplitudes(n)))) {
        let psi = random_state(n, &amps);
        let total = total_polarization(&psi);
        prop_assert!((total - site_polarizations(&psi).iter().sum::<f64>()).abs() <= 1e-12);
        prop_assert!(total.abs() <= n as f64 + 1e-12);
    }

    #[test]
    fn perfect_pulses_return_after_two_periods(
        (n, amps) in (1usize..=5).prop_flat_map(|n| (Just(n), arb_amplitudes(n)))
    ) {
        let psi = random_state(n, &amps);
        let f = compose_floquet(&ChainConfig::uniform(n, 0.0, 0.0)).unwrap();
        let back = evolve_state(&f, &psi, 2).unwrap();
        let overlap = psi.inner(&back).norm();
        prop_assert!((overlap - 1.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn traces_respect_bounds(cfg in arb_config(4)) {
        let n = cfg.n_qubits;
        let f = compose_floquet(&cfg).unwrap();
        let psi0 = initial_ferromagnetic_state(n).unwrap();
        let block = if n > 1 { SiteSet::half_chain(n) } else { SiteSet::first() };
        prop_assume!(n > 1);
        let trace = evolve(&f, &psi0, 300, &block).unwrap();
        prop_assert_eq!(trace.polarization.len(), 301);
        prop_assert_eq!(trace.entropy.len(), 301);
        let cap = LN_2 * block.len().min(n - block.len()) as f64 + 1e-12;
        for (p, s) in trace.polarization.iter().zip(&trace.entropy) {
            prop_assert!(p.abs() <= n as f64 + 1e-12);
            prop_assert!(*s >= 0.0 && *s <= cap);
        }
        let last = evolve_state(&f, &psi0, 1000).unwrap();
        prop_assert!((last.norm() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn singlet_sector_is_never_populated(
        g in 0.0..0.3f64, eps in 0.0..0.2f64, d in -1.0..1.0f64, r in prop::option::of(0.0..0.5f64),
    ) {
        let mut cfg = ChainConfig::uniform(2, g, eps).with_detunings(vec![d, d]);
        if let Some(r) = r {
            cfg = cfg.with_finite_pulse(r);
        }
        let f = compose_floquet(&cfg).unwrap();
        let singlet = bell([0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0]);
        let mut psi = initial_ferromagnetic_state(2).unwrap();
        for _ in 0..1000 {
            psi = evolve_state(&f, &psi, 1).unwrap();
            prop_assert!(singlet.inner(&psi).norm() < 1e-10);
        }
    }
}

#[test]
fn bell_states_are_maximally_entangled() {
    let first = SiteSet::first();
    let s = entanglement_entropy(&bell([FRAC_1_SQRT_2, 0.0, 0.0, -FRAC_1_SQRT_2]), &first).unwrap();
    assert!((s - LN_2).abs() <= 1e-12);
    let s = entanglement_entropy(&bell([0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0]), &first).unwrap();
    assert!((s - LN_2).abs() <= 1e-12);
    let s = entanglement_entropy(&bell([1.0, 0.0, 0.0, 0.0]), &first).unwrap();
    assert_eq!(s, 0.0);
}

#[test]
fn perfect_pulses_alternate_full_polarization() {
    for n in [2, 3, 5] {
        let f = compose_floquet(&ChainConfig::uniform(n, 0.0, 0.0)).unwrap();
        let trace = evolve(&f, &initial_ferromagnetic_state(n).unwrap(), 50, &SiteSet::first()).unwrap();
        for (k, p) in trace.polarization.iter().enumerate() {
            let expected = if k % 2 == 0 { n as f64 } else { -(n as f64) };
            assert!((p - expected).abs() <= 1e-12);
        }
    }
}

#[test]
fn evolve_rejects_bad_blocks() {
    let f = compose_floquet(&ChainConfig::uniform(2, 0.05, 0.01)).unwrap();
    let psi0 = initial_ferromagnetic_state(2).unwrap();
    assert!(evolve(&f, &psi0, 5, &SiteSet::new(vec![3])).is_err());
    assert!(evolve(&f, &psi0, 5, &SiteSet::new(vec![1, 2])).is_err());
    assert!(evolve(&f, &initial_ferromagnetic_state(3).unwrap(), 5, &SiteSet::first()).is_err());
}
