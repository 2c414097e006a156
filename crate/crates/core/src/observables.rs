//! Complex detectors and the normal observables they measure.
//!
//! A detector is a unitary apparatus `W` that carries each member `Phi_n` of an
//! orthonormal analysis basis onto the normalized position spike at `x_n`;
//! the final position measurement then reports `n`. Measurement statistics
//! therefore reduce to position Born probabilities of `W psi`.

use nalgebra::linalg::Schur;

use crate::error::{check_dim, structural, Error, Result};
use crate::interpretation::{born_probability, NORMALIZATION_TOLERANCE};
use crate::lattice::{inner_product, Measure, WaveFunction};
use crate::{CMatrix, C64};

/// Tolerance on `<Phi_m|Phi_n> = delta_mn`.
pub const ORTHONORMALITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ComplexDetector {
    basis: Vec<WaveFunction>,
    targets: Vec<usize>,
    values: Option<Vec<C64>>,
}

impl ComplexDetector {
    /// Checks shapes and that `targets` is a permutation. Orthonormality
    /// depends on the measure and is checked where one is supplied.
    pub fn new(basis: Vec<WaveFunction>, targets: Vec<usize>, values: Option<Vec<C64>>) -> Result<Self> {
        let len = basis.len();
        if len == 0 {
            return Err(structural("detector needs a nonempty basis"));
        }
        for b in &basis {
            check_dim(len, b.len())?;
        }
        check_dim(len, targets.len())?;
        let mut seen = vec![false; len];
        for &t in &targets {
            if t >= len || seen[t] {
                return Err(structural(format!("target sites are not a permutation: {targets:?}")));
            }
            seen[t] = true;
        }
        if let Some(v) = &values {
            check_dim(len, v.len())?;
        }
        Ok(ComplexDetector { basis, targets, values })
    }

    /// Discrete-Fourier basis `Phi_n(x) = exp(2 pi i n x / L) / sqrt(L)`, flat measure.
    pub fn fourier(len: usize, targets: Vec<usize>, values: Option<Vec<C64>>) -> Result<Self> {
        let norm = 1.0 / (len as f64).sqrt();
        let basis = (0..len)
            .map(|n| {
                let coeffs = (0..len)
                    .map(|x| {
                        let phase = 2.0 * std::f64::consts::PI * ((n * x) % len) as f64 / len as f64;
                        C64::from_polar(norm, phase)
                    })
                    .collect();
                WaveFunction::new(coeffs, 0.0)
            })
            .collect::<Result<Vec<_>>>()?;
        ComplexDetector::new(basis, targets, values)
    }

    /// Position basis read out at `targets`.
    pub fn position(targets: Vec<usize>, values: Option<Vec<C64>>) -> Result<Self> {
        let len = targets.len();
        let basis = (0..len)
            .map(|n| WaveFunction::spike(len, n))
            .collect::<Result<Vec<_>>>()?;
        ComplexDetector::new(basis, targets, values)
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[WaveFunction] {
        &self.basis
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn values(&self) -> Option<&[C64]> {
        self.values.as_deref()
    }

    /// `max |<Phi_m|Phi_n> - delta_mn|`.
    pub fn orthonormality_defect(&self, m: &Measure) -> Result<f64> {
        check_dim(m.len(), self.len())?;
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((inner_product(a, b, m)? - C64::new(target, 0.0)).norm());
            }
        }
        Ok(worst)
    }

    fn require_orthonormal(&self, m: &Measure) -> Result<()> {
        let defect = self.orthonormality_defect(m)?;
        if defect > ORTHONORMALITY_TOLERANCE {
            return Err(structural(format!(
                "analysis basis is not orthonormal (defect {defect:e})"
            )));
        }
        Ok(())
    }
}

/// `W = sum_n |x_n> <Phi_n|`, with `|x_n>` the spike normalized under `m`.
pub fn apparatus_unitary(det: &ComplexDetector, m: &Measure) -> Result<CMatrix> {
    det.require_orthonormal(m)?;
    let len = det.len();
    let mut w = CMatrix::zeros(len, len);
    for (phi, &x) in det.basis.iter().zip(&det.targets) {
        let scale = 1.0 / m.weight(x).sqrt();
        for j in 0..len {
            w[(x, j)] = phi.amplitude(j).conj() * (m.weight(j) * scale);
        }
    }
    Ok(w)
}

/// Adjoint with respect to the weighted inner product, `M^-1 A^H M`.
pub fn adjoint_under(a: &CMatrix, m: &Measure) -> CMatrix {
    let mut adj = a.adjoint();
    for i in 0..adj.nrows() {
        for j in 0..adj.ncols() {
            adj[(i, j)] *= m.weight(j) / m.weight(i);
        }
    }
    adj
}

fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// `max |W^dag W - I|` under `m`.
pub fn unitarity_defect_under(w: &CMatrix, m: &Measure) -> f64 {
    let n = w.nrows();
    max_abs(&(adjoint_under(w, m) * w - CMatrix::identity(n, n)))
}

/// `Q = sum_n f_n |Phi_n><Phi_n|`.
pub fn build_observable(det: &ComplexDetector, m: &Measure) -> Result<CMatrix> {
    let values = det
        .values
        .as_ref()
        .ok_or_else(|| structural("detector has no outcome values f_n"))?;
    det.require_orthonormal(m)?;
    let len = det.len();
    let mut q = CMatrix::zeros(len, len);
    for (phi, &f) in det.basis.iter().zip(values) {
        for i in 0..len {
            for j in 0..len {
                q[(i, j)] += f * phi.amplitude(i) * phi.amplitude(j).conj() * m.weight(j);
            }
        }
    }
    Ok(q)
}

/// `max |[Q, Q^dag]|` under `m`.
pub fn normality_defect(q: &CMatrix, m: &Measure) -> f64 {
    let adj = adjoint_under(q, m);
    max_abs(&(q * &adj - &adj * q))
}

/// `max |Q - Q^dag|` under `m`.
pub fn hermiticity_gap(q: &CMatrix, m: &Measure) -> f64 {
    max_abs(&(q - adjoint_under(q, m)))
}

/// Eigenvalues from the diagonal of the complex Schur form.
pub fn eigenvalues(q: &CMatrix) -> Result<Vec<C64>> {
    let schur = Schur::try_new(q.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

/// Route B: `|<Phi_n|psi>|^2`.
pub fn direct_probabilities(psi: &WaveFunction, det: &ComplexDetector, m: &Measure) -> Result<Vec<f64>> {
    det.basis
        .iter()
        .map(|phi| Ok(inner_product(phi, psi, m)?.norm_sqr()))
        .collect()
}

/// `Pr(n)`: apply the apparatus, then the position Born rule at `x_n`.
///
/// The direct overlaps `|<Phi_n|psi>|^2` are computed alongside and must agree.
pub fn measure(psi: &WaveFunction, det: &ComplexDetector, m: &Measure) -> Result<Vec<f64>> {
    check_dim(det.len(), psi.len())?;
    let n2 = psi.norm_sq(m)?;
    if (n2 - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(structural(format!("state is not normalized: <psi|psi> = {n2}")));
    }
    let w = apparatus_unitary(det, m)?;
    let after = WaveFunction::from_vector(&w * psi.coefficients(), psi.time())?;
    let probs = det
        .targets
        .iter()
        .map(|&x| born_probability(&after, x, m))
        .collect::<Result<Vec<_>>>()?;
    let direct = direct_probabilities(psi, det, m)?;
    let gap = probs
        .iter()
        .zip(&direct)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if gap > 1e-10 {
        return Err(Error::Numerical(format!(
            "apparatus and overlap routes disagree by {gap:e}"
        )));
    }
    Ok(probs)
}
