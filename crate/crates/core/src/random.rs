//! Seeded generators for states and valid setups.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;

use crate::lattice::WaveFunction;
use crate::setup::{Filter, Setup, SpacetimePoint, Step};
use crate::C64;

/// Independent uniform real and imaginary parts in `[-1, 1)`.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, len: usize) -> WaveFunction {
    let coeffs = (0..len)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    // finite by construction
    WaveFunction::new(coeffs, 0.0).unwrap()
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_holes<R: Rng + ?Sized>(rng: &mut R, len: usize, max_holes: usize) -> BTreeSet<usize> {
    let count = rng.random_range(1..=max_holes.min(len));
    sample(rng, len, count).into_iter().collect()
}

/// Bounds for [`random_setup`].
#[derive(Debug, Clone, Copy)]
pub struct SetupShape {
    pub len: usize,
    pub max_filters: usize,
    pub max_holes: usize,
    /// Largest gap between consecutive times.
    pub max_gap: Step,
}

impl Default for SetupShape {
    fn default() -> Self {
        SetupShape {
            len: 8,
            max_filters: 3,
            max_holes: 4,
            max_gap: 3,
        }
    }
}

fn gap<R: Rng + ?Sized>(rng: &mut R, shape: &SetupShape) -> Step {
    rng.random_range(1..=shape.max_gap.max(1))
}

/// A valid setup starting at `source`.
pub fn random_setup_from<R: Rng + ?Sized>(rng: &mut R, shape: &SetupShape, source: SpacetimePoint) -> Setup {
    let n_filters = rng.random_range(0..=shape.max_filters);
    let mut t = source.time;
    let mut filters = Vec::with_capacity(n_filters);
    for _ in 0..n_filters {
        t += gap(rng, shape);
        filters.push(Filter::new(t, random_holes(rng, shape.len, shape.max_holes)).unwrap());
    }
    t += gap(rng, shape);
    let detector = SpacetimePoint::new(rng.random_range(0..shape.len), t);
    // times strictly increase and hole sets are nonempty
    Setup::new(source, filters, detector).unwrap()
}

pub fn random_setup<R: Rng + ?Sized>(rng: &mut R, shape: &SetupShape) -> Setup {
    let source = SpacetimePoint::new(rng.random_range(0..shape.len), 0);
    random_setup_from(rng, shape, source)
}

/// Splits the hole set of filter `idx` of `base` into `parts` nonempty disjoint pieces.
///
/// Returns `None` when that filter has fewer than `parts` holes.
pub fn split_at_filter<R: Rng + ?Sized>(rng: &mut R, base: &Setup, idx: usize, parts: usize) -> Option<Vec<Setup>> {
    let filter = base.filters().get(idx)?;
    let holes: Vec<usize> = filter.holes().iter().copied().collect();
    if holes.len() < parts || parts == 0 {
        return None;
    }
    // first `parts` holes seed the pieces, the rest land anywhere
    let order = sample(rng, holes.len(), holes.len()).into_vec();
    let mut buckets = vec![BTreeSet::new(); parts];
    for (rank, &i) in order.iter().enumerate() {
        let b = if rank < parts { rank } else { rng.random_range(0..parts) };
        buckets[b].insert(holes[i]);
    }
    Some(
        buckets
            .into_iter()
            .map(|h| {
                let mut filters = base.filters().to_vec();
                filters[idx] = Filter::new(filter.time(), h).unwrap();
                Setup::new(base.source(), filters, base.detector()).unwrap()
            })
            .collect(),
    )
}
