//! The interpretative rule and the Born-rule machinery built on it.
//!
//! A filter whose insertion has negligible effect on a state blocks a
//! property that will not be detected. Applied to the N-replica product state
//! with a frequency filter, this yields `Pr(k) = w_k |A_k|^2`.

mod born;
pub mod tensor;

pub use born::{
    argmin_frequency, born_distance_sq, hoeffding_bound, parse_rational, rational_from_f64, BoundKind, FrequencyWindow,
    Rational, ReplicaDistribution,
};

use crate::error::{check_dim, structural, Result};
use crate::lattice::{Measure, WaveFunction};
use crate::setup::Filter;

/// Default threshold below which a filter's effect counts as negligible.
pub const DEFAULT_TAU: f64 = 1e-9;

/// Tolerance on `<psi|psi> = 1` for operations that require a normalized state.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detection {
    NotDetected,
    Certain,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionVerdict {
    pub effect: f64,
    pub detected: Detection,
}

/// Relative Hilbert distance `||P psi - psi||^2 / ||psi||^2` caused by `filter`.
pub fn filter_effect(psi: &WaveFunction, filter: &Filter, m: &Measure) -> Result<f64> {
    check_dim(m.len(), psi.len())?;
    if filter.max_site() >= psi.len() {
        return Err(structural(format!(
            "filter hole {} outside lattice of size {}",
            filter.max_site(),
            psi.len()
        )));
    }
    let total = psi.norm_sq(m)?;
    if total == 0.0 {
        return Err(structural("filter effect is undefined for the zero state"));
    }
    // P psi - psi is minus the blocked component
    let blocked: f64 = psi
        .coefficients()
        .iter()
        .enumerate()
        .filter(|(i, _)| !filter.is_open(*i))
        .map(|(i, a)| m.weight(i) * a.norm_sqr())
        .sum();
    Ok(blocked / total)
}

/// `w_k |A_k|^2` for a state normalized under `m`.
pub fn born_probability(psi: &WaveFunction, k: usize, m: &Measure) -> Result<f64> {
    check_dim(m.len(), psi.len())?;
    if k >= psi.len() {
        return Err(structural(format!("site {k} outside lattice of size {}", psi.len())));
    }
    let n2 = psi.norm_sq(m)?;
    if (n2 - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(structural(format!("state is not normalized: <psi|psi> = {n2}")));
    }
    Ok(m.weight(k) * psi.amplitude(k).norm_sqr())
}

pub fn verdict(effect: f64, tau: f64) -> DetectionVerdict {
    let detected = if effect <= tau {
        Detection::NotDetected
    } else if effect >= 1.0 - tau {
        Detection::Certain
    } else {
        Detection::Indeterminate
    };
    DetectionVerdict { effect, detected }
}
