//! Coherent Floquet dynamics of chains of interacting qubits driven by a
//! periodic sequence of imperfect π-pulses.
//!
//! The crate builds the one-period unitary ([`operators`]), evolves
//! stroboscopically while recording total polarization and entanglement
//! entropy ([`dynamics`]), analyses the Floquet spectrum ([`spectrum`]),
//! finds long-lived zero-polarization "time molecule" intervals ([`tm`]) and
//! runs parameter sweeps over many configurations ([`sweep`]). File formats
//! live in [`io`].

pub mod config;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod operators;
pub mod spectrum;
pub mod sweep;
pub mod tm;

pub use config::{ChainConfig, PulseMode};
pub use dynamics::{
    entanglement_entropy, evolve, evolve_with, initial_ferromagnetic_state, reduced_density_matrix, total_polarization,
    EntropyBlock, EvolveOptions, SiteSet, StateVector, StroboscopicTrace,
};
pub use error::{Error, Result};
pub use operators::{
    build_drift_generator, build_pulse_unitary, compose_floquet, matrix_exp_hermitian, pauli_operator, two_qubit_ug,
    HermitianPhaseGenerator, PauliAxis, UnitaryMatrix,
};
pub use spectrum::{
    analytic_two_qubit_spectrum, eigen_overlaps, quasienergy_spectrum, tm_epsilon_for, xi, QuasienergySpectrum,
    TmPrediction,
};
pub use sweep::{run_sweep, SweepAxis, SweepGrid, SweepSpec};
pub use tm::{detect_flat_regions, label_intervals, DetectionParams, TmInterval};
