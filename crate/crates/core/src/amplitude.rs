//! Amplitudes of setups.
//!
//! [`setup_amplitude`] is the production path: a spike at the source is
//! propagated, projected by each filter and read out at the detector.
//! [`path_sum_amplitude`] enumerates every hole path explicitly and multiplies
//! elementary amplitudes along it. The two must agree.

use std::collections::HashMap;
use std::ops::{Add, Mul};

use crate::error::{structural, Error, Result};
use crate::evolution::Stepper;
use crate::lattice::WaveFunction;
use crate::setup::{Filter, Setup, SetupPrefix, SpacetimePoint, Step};
use crate::{CMatrix, C64};

/// Hard limit on the number of enumerated paths.
pub const PATH_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitude(pub C64);

impl Amplitude {
    pub fn value(self) -> C64 {
        self.0
    }

    pub fn abs_diff(self, other: Amplitude) -> f64 {
        (self.0 - other.0).norm()
    }
}

impl Mul for Amplitude {
    type Output = Amplitude;
    fn mul(self, rhs: Amplitude) -> Amplitude {
        Amplitude(self.0 * rhs.0)
    }
}

impl Add for Amplitude {
    type Output = Amplitude;
    fn add(self, rhs: Amplitude) -> Amplitude {
        Amplitude(self.0 + rhs.0)
    }
}

fn check_site(site: usize, len: usize, what: &str) -> Result<()> {
    if site >= len {
        Err(structural(format!("{what} site {site} outside lattice of size {len}")))
    } else {
        Ok(())
    }
}

fn check_filters(filters: &[Filter], len: usize) -> Result<()> {
    for f in filters {
        check_site(f.max_site(), len, &format!("filter t={} hole", f.time()))?;
    }
    Ok(())
}

fn check_setup(a: &Setup, len: usize) -> Result<()> {
    check_site(a.source().site, len, "source")?;
    check_site(a.detector().site, len, "detector")?;
    check_filters(a.filters(), len)
}

/// Zeroes every component outside the filter's holes.
pub fn apply_filter(v: &mut nalgebra::DVector<C64>, filter: &Filter) {
    for (i, c) in v.iter_mut().enumerate() {
        if !filter.is_open(i) {
            *c = C64::new(0.0, 0.0);
        }
    }
}

/// `<xf.site| U(xf.time, xi.time) |xi.site>`.
pub fn elementary_amplitude(xf: SpacetimePoint, xi: SpacetimePoint, stepper: &Stepper) -> Result<Amplitude> {
    check_site(xf.site, stepper.len(), "detector")?;
    check_site(xi.site, stepper.len(), "source")?;
    let u = stepper.propagator(xi.time, xf.time)?;
    Ok(Amplitude(u[(xf.site, xi.site)]))
}

fn propagate_prefix(
    source: SpacetimePoint,
    filters: &[Filter],
    stepper: &Stepper,
) -> Result<(nalgebra::DVector<C64>, Step)> {
    let mut v = WaveFunction::spike(stepper.len(), source.site)?.into_vector();
    let mut t = source.time;
    for f in filters {
        stepper.advance(&mut v, (f.time() - t) as u64);
        apply_filter(&mut v, f);
        t = f.time();
    }
    Ok((v, t))
}

/// `<x_f| U P_N U ... P_1 U |x_i>`.
pub fn setup_amplitude(a: &Setup, stepper: &Stepper) -> Result<Amplitude> {
    check_setup(a, stepper.len())?;
    let (mut v, t) = propagate_prefix(a.source(), a.filters(), stepper)?;
    stepper.advance(&mut v, (a.detector().time - t) as u64);
    Ok(Amplitude(v[a.detector().site]))
}

/// Brute-force sum over hole paths, one hole per filter.
pub fn path_sum_amplitude(a: &Setup, stepper: &Stepper) -> Result<Amplitude> {
    check_setup(a, stepper.len())?;
    let paths = a.path_count();
    if paths > PATH_LIMIT {
        return Err(Error::Resource {
            what: "path count",
            requested: paths,
            limit: PATH_LIMIT,
        });
    }

    let filters = a.filters();
    let mut times: Vec<Step> = Vec::with_capacity(filters.len() + 2);
    times.push(a.source().time);
    times.extend(filters.iter().map(Filter::time));
    times.push(a.detector().time);

    let mut cache: HashMap<Step, CMatrix> = HashMap::new();
    let mut gaps = Vec::with_capacity(times.len() - 1);
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        if let std::collections::hash_map::Entry::Vacant(e) = cache.entry(dt) {
            e.insert(stepper.propagator(w[0], w[1])?);
        }
        gaps.push(dt);
    }

    let holes: Vec<Vec<usize>> = filters.iter().map(|f| f.holes().iter().copied().collect()).collect();
    let mut choice = vec![0usize; holes.len()];
    let mut terms = Vec::with_capacity(paths as usize);
    loop {
        let mut amp = C64::new(1.0, 0.0);
        let mut from = a.source().site;
        for (k, &dt) in gaps.iter().enumerate() {
            let to = if k < holes.len() {
                holes[k][choice[k]]
            } else {
                a.detector().site
            };
            amp *= cache[&dt][(to, from)];
            from = to;
        }
        terms.push(amp);

        // odometer over hole choices
        let mut k = 0;
        loop {
            if k == choice.len() {
                return Ok(Amplitude(pairwise_sum(&terms)));
            }
            choice[k] += 1;
            if choice[k] < holes[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Tree reduction; the result depends only on the term order.
pub(crate) fn pairwise_sum(terms: &[C64]) -> C64 {
    match terms.len() {
        0 => C64::new(0.0, 0.0),
        1 => terms[0],
        n if n <= 8 => terms.iter().sum(),
        n => {
            let (l, r) = terms.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

/// Amplitudes from the source through every filter to each site at time `t`.
pub fn wave_function_of(prefix: &SetupPrefix, stepper: &Stepper, t: Step) -> Result<WaveFunction> {
    check_site(prefix.source().site, stepper.len(), "source")?;
    check_filters(prefix.filters(), stepper.len())?;
    let last = prefix.last_time();
    let inside = if prefix.filters().is_empty() {
        t < last
    } else {
        t <= last
    };
    if inside {
        return Err(structural(format!(
            "t={t} is not after the prefix, which ends at t={last}"
        )));
    }
    let (mut v, start) = propagate_prefix(prefix.source(), prefix.filters(), stepper)?;
    stepper.advance(&mut v, (t - start) as u64);
    Ok(WaveFunction::from_vector_unchecked(v, t as f64 * stepper.dynamics().dt))
}
