//! Array entropy of uncertain preparation procedures.
//!
//! A discrete array is a probability-weighted set of states; a curve array is
//! a probability density along a sampled curve in Hilbert space. For curves
//! the entropy uses the Hilbert arc-length density `l(alpha)` as its measure,
//! `S = -int p ln(p / l) d alpha`, which makes it independent of how the curve
//! is parametrized. Evolving the states while holding `p` fixed conserves `S`
//! exactly when every segment length is conserved.

use std::f64::consts::FRAC_PI_2;

use crate::error::{check_dim, structural, Error, Result};
use crate::evolution::Stepper;
use crate::lattice::{hilbert_distance, Measure, WaveFunction};
use crate::{CMatrix, C64};

/// Tolerance on the total probability of an array.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// Tolerance on the trapezoid integral of a curve density.
pub const DENSITY_TOLERANCE: f64 = 1e-6;

fn plogp(p: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * p.ln()
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteArray {
    members: Vec<(f64, WaveFunction)>,
    measure: Measure,
}

impl DiscreteArray {
    pub fn new(members: Vec<(f64, WaveFunction)>, measure: Measure) -> Result<Self> {
        if members.is_empty() {
            return Err(structural("array needs at least one member"));
        }
        for (p, s) in &members {
            if !(p.is_finite() && *p >= 0.0) {
                return Err(structural(format!("invalid probability {p}")));
            }
            check_dim(measure.len(), s.len())?;
        }
        let total: f64 = members.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(structural(format!("probabilities sum to {total}, not 1")));
        }
        Ok(DiscreteArray { members, measure })
    }

    pub fn members(&self) -> &[(f64, WaveFunction)] {
        &self.members
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    /// Moves every state; the probabilities are untouched.
    pub fn evolve(&self, stepper: &Stepper, steps: u64) -> Result<DiscreteArray> {
        let members = self
            .members
            .iter()
            .map(|(p, s)| Ok((*p, stepper.evolve(s, steps)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(DiscreteArray {
            members,
            measure: self.measure.clone(),
        })
    }
}

/// `-sum p ln p`, with `0 ln 0 = 0`.
pub fn discrete_entropy(a: &DiscreteArray) -> f64 {
    -a.members.iter().map(|(p, _)| plogp(*p)).sum::<f64>()
}

/// Probability density sampled along a curve of states.
#[derive(Debug, Clone)]
pub struct CurveArray {
    alphas: Vec<f64>,
    densities: Vec<f64>,
    states: Vec<WaveFunction>,
    measure: Measure,
}

impl CurveArray {
    pub fn new(alphas: Vec<f64>, densities: Vec<f64>, states: Vec<WaveFunction>, measure: Measure) -> Result<Self> {
        let curve = CurveArray::unvalidated(alphas, densities, states, measure)?;
        let total = curve.total_probability();
        if (total - 1.0).abs() > DENSITY_TOLERANCE {
            return Err(structural(format!("density integrates to {total}, not 1")));
        }
        Ok(curve)
    }

    /// Like [`CurveArray::new`] but rescales the densities to integrate to one.
    pub fn normalized(
        alphas: Vec<f64>,
        densities: Vec<f64>,
        states: Vec<WaveFunction>,
        measure: Measure,
    ) -> Result<Self> {
        let mut curve = CurveArray::unvalidated(alphas, densities, states, measure)?;
        let total = curve.total_probability();
        if total.is_nan() || total <= 0.0 {
            return Err(structural("density has zero mass"));
        }
        curve.densities.iter_mut().for_each(|p| *p /= total);
        Ok(curve)
    }

    fn unvalidated(alphas: Vec<f64>, densities: Vec<f64>, states: Vec<WaveFunction>, measure: Measure) -> Result<Self> {
        if alphas.len() < 2 {
            return Err(structural("curve needs at least two samples"));
        }
        check_dim(alphas.len(), densities.len())?;
        check_dim(alphas.len(), states.len())?;
        if alphas.iter().any(|a| !a.is_finite()) || alphas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(structural("curve parameters must be finite and strictly increasing"));
        }
        if densities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(structural("densities must be finite and >= 0"));
        }
        for s in &states {
            check_dim(measure.len(), s.len())?;
        }
        let curve = CurveArray {
            alphas,
            densities,
            states,
            measure,
        };
        for j in 0..curve.segments() {
            curve.segment_length(j)?;
        }
        Ok(curve)
    }

    /// Uniform density over `cos(a)|a_site> + sin(a)|b_site>`, `a in [0, pi/2]`.
    pub fn great_circle(len: usize, a_site: usize, b_site: usize, samples: usize) -> Result<Self> {
        if a_site == b_site {
            return Err(structural("great circle needs two distinct sites"));
        }
        if samples < 2 {
            return Err(structural("curve needs at least two samples"));
        }
        let ea = WaveFunction::spike(len, a_site)?;
        let eb = WaveFunction::spike(len, b_site)?;
        let h = FRAC_PI_2 / (samples - 1) as f64;
        let alphas: Vec<f64> = (0..samples).map(|j| j as f64 * h).collect();
        let states = alphas
            .iter()
            .map(|&a| ea.combine(C64::new(a.cos(), 0.0), &eb, C64::new(a.sin(), 0.0)))
            .collect::<Result<Vec<_>>>()?;
        CurveArray::new(alphas, vec![1.0 / FRAC_PI_2; samples], states, Measure::flat(len))
    }

    pub fn samples(&self) -> usize {
        self.alphas.len()
    }

    pub fn segments(&self) -> usize {
        self.alphas.len() - 1
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn states(&self) -> &[WaveFunction] {
        &self.states
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    /// Trapezoid integral of the density.
    pub fn total_probability(&self) -> f64 {
        (0..self.segments())
            .map(|j| self.spacing(j) * self.midpoint_density(j))
            .sum()
    }

    pub fn spacing(&self, j: usize) -> f64 {
        self.alphas[j + 1] - self.alphas[j]
    }

    fn midpoint_density(&self, j: usize) -> f64 {
        0.5 * (self.densities[j] + self.densities[j + 1])
    }

    /// `||Psi_{j+1} - Psi_j|| / d alpha`.
    pub fn segment_length(&self, j: usize) -> Result<f64> {
        if j + 1 >= self.samples() {
            return Err(structural(format!(
                "segment {j} out of range for {} samples",
                self.samples()
            )));
        }
        let d = hilbert_distance(&self.states[j + 1], &self.states[j], &self.measure)?;
        if d == 0.0 {
            return Err(Error::DegenerateCurve { segment: j });
        }
        Ok(d / self.spacing(j))
    }

    pub fn segment_lengths(&self) -> Result<Vec<f64>> {
        (0..self.segments()).map(|j| self.segment_length(j)).collect()
    }

    /// Entropy evaluated with externally supplied segment lengths.
    fn entropy_with(&self, lengths: &[f64]) -> f64 {
        -(0..self.segments())
            .map(|j| {
                let p = self.midpoint_density(j);
                if p == 0.0 {
                    0.0
                } else {
                    self.spacing(j) * p * (p / lengths[j]).ln()
                }
            })
            .sum::<f64>()
    }

    /// Same densities and parameters, every state moved forward by `steps`.
    pub fn evolve(&self, stepper: &Stepper, steps: u64) -> Result<CurveArray> {
        let states = self
            .states
            .iter()
            .map(|s| stepper.evolve(s, steps))
            .collect::<Result<Vec<_>>>()?;
        Ok(CurveArray { states, ..self.clone() })
    }

    fn state_matrix(&self) -> CMatrix {
        let cols: Vec<_> = self.states.iter().map(|s| s.coefficients().clone()).collect();
        CMatrix::from_columns(&cols)
    }
}

/// `-sum_j d alpha_j p_j ln(p_j / l_j)` with the midpoint density on each segment.
pub fn continuous_entropy(a: &CurveArray) -> Result<f64> {
    Ok(a.entropy_with(&a.segment_lengths()?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftRecord {
    pub step: u64,
    pub time: f64,
    pub entropy: f64,
    /// `max_j |l_j(t) - l_j(0)|`.
    pub max_length_drift: f64,
    /// `max_j |l_j(t) - l_j(t - 1)|`.
    pub max_step_drift: f64,
}

/// Evolves every sample state and records the entropy after each step.
///
/// The returned series starts with the initial configuration at step 0.
pub fn entropy_drift(a: &CurveArray, stepper: &Stepper, steps: u64) -> Result<Vec<DriftRecord>> {
    check_dim(stepper.len(), a.measure.len())?;
    let initial = a.segment_lengths()?;
    let mut states = a.state_matrix();
    let mut out = Vec::with_capacity(steps as usize + 1);
    out.push(DriftRecord {
        step: 0,
        time: 0.0,
        entropy: a.entropy_with(&initial),
        max_length_drift: 0.0,
        max_step_drift: 0.0,
    });
    let weights: Vec<f64> = a.measure.weights().to_vec();
    let mut prev = initial.clone();
    let mut lengths = vec![0.0; initial.len()];
    for step in 1..=steps {
        stepper.advance_columns(&mut states, 1);
        for (j, l) in lengths.iter_mut().enumerate() {
            let d2: f64 = states
                .column(j + 1)
                .iter()
                .zip(states.column(j).iter())
                .zip(&weights)
                .map(|((x, y), w)| w * (x - y).norm_sqr())
                .sum();
            if d2 == 0.0 {
                return Err(Error::DegenerateCurve { segment: j });
            }
            *l = d2.sqrt() / a.spacing(j);
        }
        let max_diff = |other: &[f64]| {
            lengths
                .iter()
                .zip(other)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        out.push(DriftRecord {
            step,
            time: step as f64 * stepper.dynamics().dt,
            entropy: a.entropy_with(&lengths),
            max_length_drift: max_diff(&initial),
            max_step_drift: max_diff(&prev),
        });
        prev.copy_from_slice(&lengths);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::Dynamics;
    use std::f64::consts::PI;

    fn spike(len: usize, site: usize) -> WaveFunction {
        WaveFunction::spike(len, site).unwrap()
    }

    #[test]
    fn discrete_entropy_cases() {
        let m = Measure::flat(3);
        let one = DiscreteArray::new(vec![(1.0, spike(3, 0))], m.clone()).unwrap();
        assert_eq!(discrete_entropy(&one), 0.0);
        let uniform = DiscreteArray::new((0..3).map(|i| (1.0 / 3.0, spike(3, i))).collect(), m.clone()).unwrap();
        assert!((discrete_entropy(&uniform) - 3f64.ln()).abs() < 1e-15);
        let pair = DiscreteArray::new(vec![(0.3, spike(3, 0)), (0.7, spike(3, 1))], m.clone()).unwrap();
        let expected = -0.3 * 0.3f64.ln() - 0.7 * 0.7f64.ln();
        assert!((discrete_entropy(&pair) - expected).abs() < 1e-15);
        let with_zero = DiscreteArray::new(vec![(0.0, spike(3, 0)), (1.0, spike(3, 1))], m.clone()).unwrap();
        assert_eq!(discrete_entropy(&with_zero), 0.0);
        assert!(DiscreteArray::new(vec![(0.5, spike(3, 0))], m).is_err());
    }

    #[test]
    fn discrete_entropy_is_untouched_by_any_evolution() {
        let m = Measure::flat(6);
        let arr = DiscreteArray::new(vec![(0.2, spike(6, 0)), (0.5, spike(6, 2)), (0.3, spike(6, 5))], m).unwrap();
        let before = discrete_entropy(&arr);
        for gamma in [0.0, 0.3] {
            let s = Stepper::new(Dynamics::free(6, 1.0, 0.1).with_absorber(gamma, vec![1.0; 6])).unwrap();
            let after = discrete_entropy(&arr.evolve(&s, 50).unwrap());
            assert_eq!(after.to_bits(), before.to_bits());
        }
    }

    #[test]
    fn coincident_states_are_degenerate() {
        let m = Measure::flat(2);
        let err = CurveArray::new(vec![0.0, 1.0], vec![1.0, 1.0], vec![spike(2, 0), spike(2, 0)], m).unwrap_err();
        assert_eq!(err, Error::DegenerateCurve { segment: 0 });
    }

    #[test]
    fn great_circle_has_unit_speed() {
        let mut prev_err = f64::INFINITY;
        for samples in [11, 101, 1001] {
            let c = CurveArray::great_circle(4, 0, 1, samples).unwrap();
            // finite-difference speed at every segment tends to |dPsi/da| = 1
            let err = c
                .segment_lengths()
                .unwrap()
                .iter()
                .map(|l| (l - 1.0).abs())
                .fold(0.0, f64::max);
            assert!(err < prev_err);
            prev_err = err;
        }
        assert!(prev_err < 1e-6);
    }

    #[test]
    fn scaling_states_scales_lengths() {
        let base = CurveArray::great_circle(3, 0, 2, 50).unwrap();
        let c = C64::new(0.6, -0.8) * 2.5;
        let scaled = CurveArray::new(
            base.alphas().to_vec(),
            base.densities().to_vec(),
            base.states().iter().map(|s| s.scaled(c)).collect(),
            base.measure().clone(),
        )
        .unwrap();
        for j in 0..base.segments() {
            let ratio = scaled.segment_length(j).unwrap() / base.segment_length(j).unwrap();
            assert!((ratio - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn arc_length_density_gives_log_length() {
        // p = l / Lambda with Lambda the discrete length; the log is constant.
        let base = CurveArray::great_circle(3, 0, 1, 200).unwrap();
        let lengths = base.segment_lengths().unwrap();
        let lambda: f64 = (0..base.segments()).map(|j| lengths[j] * base.spacing(j)).sum();
        let p = vec![lengths[0] / lambda; base.samples()];
        let c = CurveArray::new(
            base.alphas().to_vec(),
            p,
            base.states().to_vec(),
            base.measure().clone(),
        )
        .unwrap();
        assert!((continuous_entropy(&c).unwrap() - lambda.ln()).abs() < 1e-12);
    }

    #[test]
    fn uniform_great_circle_entropy() {
        // p = 2/pi, l = 1 on [0, pi/2]: S = -int (2/pi) ln(2/pi) = ln(pi/2)
        let c = CurveArray::great_circle(5, 1, 3, 1000).unwrap();
        assert!((continuous_entropy(&c).unwrap() - (PI / 2.0).ln()).abs() < 1e-6);
    }

    #[test]
    fn unnormalized_curves_are_accepted() {
        let base = CurveArray::great_circle(3, 0, 1, 300).unwrap();
        let c = CurveArray::new(
            base.alphas().to_vec(),
            base.densities().to_vec(),
            base.states().iter().map(|s| s.scaled(C64::new(3.0, 0.0))).collect(),
            base.measure().clone(),
        )
        .unwrap();
        let ds = continuous_entropy(&c).unwrap() - continuous_entropy(&base).unwrap();
        assert!((ds - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_steps_is_zero_drift() {
        let c = CurveArray::great_circle(6, 0, 1, 20).unwrap();
        let s = Stepper::new(Dynamics::free(6, 1.0, 0.1)).unwrap();
        let series = entropy_drift(&c, &s, 0).unwrap();
        assert_eq!(series.len(), 1);
        assert_eq!(series[0].max_length_drift, 0.0);
        assert_eq!(series[0].entropy, continuous_entropy(&c).unwrap());
    }

    #[test]
    fn drift_matrix_path_matches_per_state_evolution() {
        let c = CurveArray::great_circle(8, 2, 3, 40).unwrap();
        let s = Stepper::new(Dynamics::free(8, 1.0, 0.2).with_absorber(0.2, (0..8).map(|i| i as f64 / 7.0).collect()))
            .unwrap();
        let series = entropy_drift(&c, &s, 12).unwrap();
        let direct = continuous_entropy(&c.evolve(&s, 12).unwrap()).unwrap();
        assert!((series[12].entropy - direct).abs() < 1e-12);
    }

    #[test]
    fn absorber_changes_segment_lengths_at_first_order() {
        let len = 16;
        let c = CurveArray::great_circle(len, 7, 8, 100).unwrap();
        let ramp: Vec<f64> = (0..len).map(|i| i as f64 / (len - 1) as f64).collect();
        let s = Stepper::new(Dynamics::free(len, 1.0, 0.05).with_absorber(0.1, ramp)).unwrap();
        let series = entropy_drift(&c, &s, 10).unwrap();
        let slope = series[10].max_length_drift / series[10].time;
        assert!(slope > 1e-6, "slope {slope}");
    }

    #[test]
    fn mixture_decomposes() {
        // Two curves on disjoint supports with densities vanishing at their ends,
        // glued into one array with weights (q, 1 - q).
        let len = 4;
        let samples = 801;
        let h = FRAC_PI_2 / (samples - 1) as f64;
        let shape = |a: f64| (4.0 / PI) * (2.0 * a).sin().powi(2);
        let arc = |sa: usize, sb: usize, a: f64| {
            spike(len, sa)
                .combine(C64::new(a.cos(), 0.0), &spike(len, sb), C64::new(a.sin(), 0.0))
                .unwrap()
        };
        let m = Measure::flat(len);
        let alphas: Vec<f64> = (0..samples).map(|j| j as f64 * h).collect();
        let half = |sa, sb| {
            CurveArray::normalized(
                alphas.clone(),
                alphas.iter().map(|&a| shape(a)).collect(),
                alphas.iter().map(|&a| arc(sa, sb, a)).collect(),
                m.clone(),
            )
            .unwrap()
        };
        let (c1, c2) = (half(0, 1), half(2, 3));
        let (s1, s2) = (continuous_entropy(&c1).unwrap(), continuous_entropy(&c2).unwrap());

        let q = 0.3;
        let offset = FRAC_PI_2 + 1.0;
        let mut all_alpha = alphas.clone();
        all_alpha.extend(alphas.iter().map(|a| a + offset));
        let mut dens: Vec<f64> = c1.densities().iter().map(|p| q * p).collect();
        dens.extend(c2.densities().iter().map(|p| (1.0 - q) * p));
        let mut states = c1.states().to_vec();
        states.extend(c2.states().iter().cloned());
        let joined = CurveArray::new(all_alpha, dens, states, m).unwrap();
        let mix = -(q * q.ln() + (1.0 - q) * (1.0 - q).ln());
        let expected = q * s1 + (1.0 - q) * s2 + mix;
        assert!((continuous_entropy(&joined).unwrap() - expected).abs() < 1e-9);
    }
}
