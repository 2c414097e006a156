//! Complex state space over a finite 1-D lattice.
//!
//! Every inner product takes its [`Measure`] explicitly: the same coefficient
//! data can be read under flat weights or under per-site volume weights, and
//! the Born probabilities change accordingly.

use nalgebra::DVector;

use crate::error::{check_dim, structural, Result};
use crate::C64;

/// Lattice size used when none is configured.
pub const DEFAULT_LATTICE_SIZE: usize = 32;

/// Default absolute tolerance for normalization and equality checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Per-site a-priori weights `w_i = <i|i>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    weights: Vec<f64>,
}

impl Measure {
    /// Equal weights, `w_i = 1`.
    pub fn flat(len: usize) -> Self {
        Measure {
            weights: vec![1.0; len],
        }
    }

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(structural("measure must cover at least one site"));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(structural(format!(
                "measure weight at site {i} must be finite and > 0, got {w}"
            )));
        }
        Ok(Measure { weights })
    }

    /// Cell volumes of a curved lattice: `w_i = sqrt(g_i) * dx`.
    pub fn from_volume(sqrt_g: &[f64], dx: f64) -> Result<Self> {
        Measure::new(sqrt_g.iter().map(|g| g * dx).collect())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, site: usize) -> f64 {
        self.weights[site]
    }

    /// True when every weight equals one.
    pub fn is_flat(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }
}

/// Amplitudes `A_i` over the lattice sites at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    coefficients: DVector<C64>,
    time: f64,
}

impl WaveFunction {
    pub fn new(coefficients: Vec<C64>, time: f64) -> Result<Self> {
        Self::from_vector(DVector::from_vec(coefficients), time)
    }

    pub fn from_vector(coefficients: DVector<C64>, time: f64) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(structural("wave function must have at least one site"));
        }
        if let Some(i) = coefficients
            .iter()
            .position(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(structural(format!("non-finite coefficient at site {i}")));
        }
        if !time.is_finite() {
            return Err(structural("time label must be finite"));
        }
        Ok(WaveFunction { coefficients, time })
    }

    /// Coefficients are trusted to be finite.
    pub(crate) fn from_vector_unchecked(coefficients: DVector<C64>, time: f64) -> Self {
        WaveFunction { coefficients, time }
    }

    /// Unit spike `|site>` at time zero.
    pub fn spike(len: usize, site: usize) -> Result<Self> {
        if site >= len {
            return Err(structural(format!("site {site} outside lattice of size {len}")));
        }
        let mut v = DVector::zeros(len);
        v[site] = C64::new(1.0, 0.0);
        Ok(WaveFunction {
            coefficients: v,
            time: 0.0,
        })
    }

    pub fn zeros(len: usize) -> Self {
        WaveFunction {
            coefficients: DVector::zeros(len),
            time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn coefficients(&self) -> &DVector<C64> {
        &self.coefficients
    }

    pub fn into_vector(self) -> DVector<C64> {
        self.coefficients
    }

    pub fn amplitude(&self, site: usize) -> C64 {
        self.coefficients[site]
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn scaled(&self, factor: C64) -> WaveFunction {
        WaveFunction {
            coefficients: self.coefficients.map(|c| c * factor),
            time: self.time,
        }
    }

    /// `a * self + b * other`; keeps `self`'s time label.
    pub fn combine(&self, a: C64, other: &WaveFunction, b: C64) -> Result<WaveFunction> {
        check_dim(self.len(), other.len())?;
        Ok(WaveFunction {
            coefficients: self.coefficients.map(|c| c * a) + other.coefficients.map(|c| c * b),
            time: self.time,
        })
    }

    /// Entrywise difference `self - other`.
    pub fn sub(&self, other: &WaveFunction) -> Result<WaveFunction> {
        check_dim(self.len(), other.len())?;
        Ok(WaveFunction {
            coefficients: &self.coefficients - &other.coefficients,
            time: self.time,
        })
    }

    pub fn norm_sq(&self, m: &Measure) -> Result<f64> {
        Ok(inner_product(self, self, m)?.re)
    }

    /// Rescaled to unit norm under `m`.
    pub fn normalized(&self, m: &Measure) -> Result<WaveFunction> {
        let n2 = self.norm_sq(m)?;
        if n2 == 0.0 {
            return Err(structural("cannot normalize the zero state"));
        }
        Ok(self.scaled(C64::new(1.0 / n2.sqrt(), 0.0)))
    }

    pub fn is_normalized(&self, m: &Measure, tol: f64) -> Result<bool> {
        Ok((self.norm_sq(m)? - 1.0).abs() <= tol)
    }
}

/// `<phi|psi> = sum_i w_i conj(B_i) A_i`; antilinear in `phi`.
pub fn inner_product(phi: &WaveFunction, psi: &WaveFunction, m: &Measure) -> Result<C64> {
    check_dim(m.len(), phi.len())?;
    check_dim(m.len(), psi.len())?;
    let mut acc = C64::new(0.0, 0.0);
    for ((b, a), &w) in phi
        .coefficients
        .iter()
        .zip(psi.coefficients.iter())
        .zip(m.weights.iter())
    {
        acc += b.conj() * a * w;
    }
    Ok(acc)
}

/// `||phi - psi||^2` under `m`.
pub fn hilbert_distance_sq(phi: &WaveFunction, psi: &WaveFunction, m: &Measure) -> Result<f64> {
    check_dim(m.len(), phi.len())?;
    check_dim(m.len(), psi.len())?;
    Ok(phi
        .coefficients
        .iter()
        .zip(psi.coefficients.iter())
        .zip(m.weights.iter())
        .map(|((b, a), &w)| w * (b - a).norm_sqr())
        .sum())
}

pub fn hilbert_distance(phi: &WaveFunction, psi: &WaveFunction, m: &Measure) -> Result<f64> {
    hilbert_distance_sq(phi, psi, m).map(f64::sqrt)
}
