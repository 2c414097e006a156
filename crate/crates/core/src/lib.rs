//! Consistent-amplitude quantum mechanics on a finite 1-D lattice.
//!
//! Setups of sources, filters and detectors compose with `and` / `or`; their
//! amplitudes multiply and add accordingly. On top of this the crate provides
//! the interpretative rule with the N-replica frequency filter behind the Born
//! rule, array entropies whose conservation singles out unitary evolution, and
//! complex detectors for normal observables.

pub mod amplitude;
pub mod entropy;
pub mod error;
pub mod evolution;
pub mod interpretation;
pub mod lattice;
pub mod observables;
pub mod random;
pub mod setup;

pub use num_complex::Complex64 as C64;

/// Dense complex matrix used for propagators and operators.
pub type CMatrix = nalgebra::DMatrix<C64>;

pub use amplitude::{elementary_amplitude, path_sum_amplitude, setup_amplitude, wave_function_of, Amplitude};
pub use entropy::{continuous_entropy, discrete_entropy, entropy_drift, CurveArray, DiscreteArray, DriftRecord};
pub use error::{Error, Result};
pub use evolution::{evolve, propagator, step_operator, Boundary, Dynamics, Stepper};
pub use interpretation::{
    born_distance_sq, born_probability, filter_effect, verdict, Detection, DetectionVerdict, FrequencyWindow,
};
pub use lattice::{hilbert_distance_sq, inner_product, Measure, WaveFunction};
pub use observables::{apparatus_unitary, build_observable, measure, ComplexDetector};
pub use setup::{and_compose, or_compose, CompositionError, Filter, Setup, SetupPrefix, SpacetimePoint};
