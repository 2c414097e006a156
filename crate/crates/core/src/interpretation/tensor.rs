//! Brute-force N-replica product states.
//!
//! Materializes `|Psi_N> = |psi> (x) ... (x) |psi>` over all `L^N` basis
//! strings, applies the frequency projector string by string, and measures the
//! relative distance under the product measure. Exponential in `N`; only meant
//! to certify the binomial reduction for small systems.

use crate::error::{structural, Error, Result};
use crate::lattice::{Measure, WaveFunction};
use crate::C64;

use super::FrequencyWindow;

/// Largest product-state dimension the oracle will build.
pub const MAX_BASIS: u128 = 20_000_000;

/// `psi` tensored with itself `replicas` times; string index is base-`L`, replica 0 slowest.
pub fn product_state(psi: &WaveFunction, replicas: u32) -> Result<Vec<C64>> {
    let len = psi.len();
    let dim = (len as u128).checked_pow(replicas).unwrap_or(u128::MAX);
    if dim > MAX_BASIS {
        return Err(Error::Resource {
            what: "product basis size",
            requested: dim,
            limit: MAX_BASIS,
        });
    }
    let mut state = vec![C64::new(1.0, 0.0)];
    for _ in 0..replicas {
        let mut next = Vec::with_capacity(state.len() * len);
        for a in &state {
            next.extend(psi.coefficients().iter().map(|c| a * c));
        }
        state = next;
    }
    Ok(state)
}

/// `||P Psi_N - Psi_N||^2 / <Psi_N|Psi_N>` where `P` keeps strings whose count at `site` is in the window.
pub fn tensor_distance_sq(
    psi: &WaveFunction,
    m: &Measure,
    site: usize,
    replicas: u32,
    window: &FrequencyWindow,
) -> Result<f64> {
    let len = psi.len();
    if m.len() != len || site >= len {
        return Err(structural("site or measure does not match the state"));
    }
    if replicas == 0 {
        return Err(structural("need at least one replica"));
    }
    let full = product_state(psi, replicas)?;
    let mut total = 0.0;
    let mut removed = 0.0;
    let mut digits = vec![0usize; replicas as usize];
    for amp in &full {
        let weight: f64 = digits.iter().map(|&d| m.weight(d)).product();
        let mass = weight * amp.norm_sqr();
        total += mass;
        let count = digits.iter().filter(|&&d| d == site).count() as u64;
        if !window.contains_count(count, replicas as u64) {
            removed += mass;
        }
        // increment base-L string, last replica fastest
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < len {
                break;
            }
            *d = 0;
        }
    }
    if total == 0.0 {
        return Err(structural("zero product state"));
    }
    Ok(removed / total)
}
