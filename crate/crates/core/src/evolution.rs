//! Lattice propagators.
//!
//! The one-step operator is the Cayley (Crank–Nicolson) form
//! `U = (I + i H dt/2)^-1 (I - i H dt/2)`, unitary to rounding whenever `H`
//! is Hermitian. Setting `gamma > 0` replaces `H` by `H - i gamma diag(V)`,
//! which contracts norms and serves as the non-unitary foil.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, structural, Error, Result};
use crate::lattice::WaveFunction;
use crate::setup::Step;
use crate::{CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

/// Parameters of a time-independent lattice Hamiltonian.
///
/// `H = -hopping * (nearest-neighbour adjacency) + diag(potential)`. With
/// periodic boundaries and `len <= 2` the wrap-around bond coincides with the
/// ordinary one and is counted once.
#[derive(Debug, Clone, PartialEq)]
pub struct Dynamics {
    pub len: usize,
    pub hopping: f64,
    pub potential: Vec<f64>,
    pub gamma: f64,
    pub absorber: Vec<f64>,
    pub dt: f64,
    pub boundary: Boundary,
}

impl Dynamics {
    /// Free particle: zero potential, no absorber, periodic boundary.
    pub fn free(len: usize, hopping: f64, dt: f64) -> Self {
        Dynamics {
            len,
            hopping,
            potential: vec![0.0; len],
            gamma: 0.0,
            absorber: vec![0.0; len],
            dt,
            boundary: Boundary::Periodic,
        }
    }

    pub fn with_potential(mut self, potential: Vec<f64>) -> Self {
        self.potential = potential;
        self
    }

    pub fn with_absorber(mut self, gamma: f64, absorber: Vec<f64>) -> Self {
        self.gamma = gamma;
        self.absorber = absorber;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn is_hermitian(&self) -> bool {
        self.gamma == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.len == 0 {
            return Err(structural("lattice size must be positive"));
        }
        check_dim(self.len, self.potential.len())?;
        check_dim(self.len, self.absorber.len())?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(structural(format!("dt must be finite and > 0, got {}", self.dt)));
        }
        if !self.hopping.is_finite() || self.potential.iter().any(|v| !v.is_finite()) {
            return Err(structural("hopping and potential must be finite"));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(structural(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if self.absorber.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(structural("absorber entries must be finite and >= 0"));
        }
        Ok(())
    }

    /// Generator including the anti-Hermitian part `-i gamma V`.
    pub fn hamiltonian(&self) -> CMatrix {
        let n = self.len;
        let mut h = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for i in 0..n {
            h[(i, i)] = C64::new(self.potential[i], -self.gamma * self.absorber[i]);
        }
        let bonds = match self.boundary {
            Boundary::Open => n.saturating_sub(1),
            Boundary::Periodic if n > 2 => n,
            Boundary::Periodic => n.saturating_sub(1),
        };
        for i in 0..bonds {
            let j = (i + 1) % n;
            h[(i, j)] -= C64::new(self.hopping, 0.0);
            h[(j, i)] -= C64::new(self.hopping, 0.0);
        }
        h
    }
}

/// One-step Cayley propagator.
pub fn step_operator(d: &Dynamics) -> Result<CMatrix> {
    d.validate()?;
    let n = d.len;
    let half = C64::new(0.0, d.dt / 2.0);
    let h = d.hamiltonian();
    let id = CMatrix::identity(n, n);
    let denom = &id + &h * half;
    let numer = &id - &h * half;
    let lu = denom.lu();
    if !lu.is_invertible() {
        return Err(Error::Numerical("Cayley denominator is singular".into()));
    }
    lu.solve(&numer)
        .ok_or_else(|| Error::Numerical("Cayley denominator is singular".into()))
}

/// A [`Dynamics`] with its step operator precomputed.
#[derive(Debug, Clone)]
pub struct Stepper {
    dynamics: Dynamics,
    step: CMatrix,
}

impl Stepper {
    pub fn new(dynamics: Dynamics) -> Result<Self> {
        let step = step_operator(&dynamics)?;
        Ok(Stepper { dynamics, step })
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    pub fn len(&self) -> usize {
        self.dynamics.len
    }

    pub fn is_empty(&self) -> bool {
        self.dynamics.len == 0
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.step
    }

    /// `U^(t1 - t0)`.
    pub fn propagator(&self, t0: Step, t1: Step) -> Result<CMatrix> {
        if t1 < t0 {
            return Err(structural(format!("no backward propagation: t1={t1} < t0={t0}")));
        }
        Ok(matrix_power(&self.step, (t1 - t0) as u64))
    }

    /// Applies `U` in place `steps` times.
    pub fn advance(&self, v: &mut DVector<C64>, steps: u64) {
        let mut scratch = DVector::zeros(v.len());
        for _ in 0..steps {
            self.step.mul_to(v, &mut scratch);
            std::mem::swap(v, &mut scratch);
        }
    }

    /// Applies `U` to every column of `states` in place.
    pub fn advance_columns(&self, states: &mut CMatrix, steps: u64) {
        let mut scratch = CMatrix::zeros(states.nrows(), states.ncols());
        for _ in 0..steps {
            self.step.mul_to(states, &mut scratch);
            std::mem::swap(states, &mut scratch);
        }
    }

    pub fn evolve(&self, psi: &WaveFunction, steps: u64) -> Result<WaveFunction> {
        check_dim(self.len(), psi.len())?;
        let mut v = psi.coefficients().clone();
        self.advance(&mut v, steps);
        let t = psi.time() + steps as f64 * self.dynamics.dt;
        Ok(WaveFunction::from_vector_unchecked(v, t))
    }
}

/// `step_operator(d)^(t1 - t0)`; the identity when `t1 == t0`.
pub fn propagator(d: &Dynamics, t0: Step, t1: Step) -> Result<CMatrix> {
    Stepper::new(d.clone())?.propagator(t0, t1)
}

/// Applies the one-step operator `steps` times; the time label advances by `steps * dt`.
pub fn evolve(psi: &WaveFunction, d: &Dynamics, steps: u64) -> Result<WaveFunction> {
    Stepper::new(d.clone())?.evolve(psi, steps)
}

/// Binary exponentiation.
pub fn matrix_power(m: &CMatrix, mut exp: u64) -> CMatrix {
    let n = m.nrows();
    let mut result = CMatrix::identity(n, n);
    let mut base = m.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            result = &result * &base;
        }
        exp >>= 1;
        if exp > 0 {
            base = &base * &base;
        }
    }
    result
}

/// `max |U^H U - I|` entrywise.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let g = u.adjoint() * u - CMatrix::identity(n, n);
    g.iter().map(|c| c.norm()).fold(0.0, f64::max)
}
