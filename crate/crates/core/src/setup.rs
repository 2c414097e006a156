//! Experimental setups and the `and` / `or` composition relations.
//!
//! A setup `[x_f, s_N, ..., s_1, x_i]` is a source point, a strictly
//! time-ordered list of filters and a detector point. `and` places two setups
//! in immediate succession and `or` merges the disjoint hole sets of the single
//! filter where two otherwise identical setups differ. Both are partial: an
//! invalid combination is a [`CompositionError`], never a malformed setup.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Lattice site index.
pub type Site = usize;

/// Integer time-step index.
pub type Step = i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpacetimePoint {
    pub site: Site,
    pub time: Step,
}

impl SpacetimePoint {
    pub const fn new(site: Site, time: Step) -> Self {
        SpacetimePoint { site, time }
    }
}

impl fmt::Display for SpacetimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.site, self.time)
    }
}

/// A screen existing at one instant, opaque except at its holes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Filter {
    time: Step,
    holes: BTreeSet<Site>,
}

impl Filter {
    pub fn new(time: Step, holes: impl IntoIterator<Item = Site>) -> Result<Self, CompositionError> {
        let holes: BTreeSet<Site> = holes.into_iter().collect();
        if holes.is_empty() {
            return Err(CompositionError::EmptyFilter { time });
        }
        Ok(Filter { time, holes })
    }

    /// Single-hole filter.
    pub fn elementary(point: SpacetimePoint) -> Self {
        Filter {
            time: point.time,
            holes: BTreeSet::from([point.site]),
        }
    }

    /// Filter open at every site of a lattice of size `len`.
    pub fn full(time: Step, len: usize) -> Self {
        Filter {
            time,
            holes: (0..len).collect(),
        }
    }

    pub fn time(&self) -> Step {
        self.time
    }

    pub fn holes(&self) -> &BTreeSet<Site> {
        &self.holes
    }

    pub fn is_open(&self, site: Site) -> bool {
        self.holes.contains(&site)
    }

    pub fn is_trivial(&self, len: usize) -> bool {
        self.holes.len() == len && self.holes.iter().all(|&h| h < len)
    }

    pub fn max_site(&self) -> Site {
        // holes is nonempty by construction
        *self.holes.iter().next_back().unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompositionError {
    #[error("filter at t={time} has no holes")]
    EmptyFilter { time: Step },

    #[error("times must increase strictly from source to detector: {detail}")]
    NonMonotoneTimes { detail: String },

    #[error("and: earlier setup ends at {earlier_detector} but later setup starts at {later_source}")]
    EndpointMismatch {
        earlier_detector: SpacetimePoint,
        later_source: SpacetimePoint,
    },

    #[error("or: setups must share source, detector and filter times ({detail})")]
    ShapeMismatch { detail: String },

    #[error("or: setups must differ on exactly one filter, found {count} differing filters")]
    DifferingFilterCount { count: usize },

    #[error("or: holes overlap at filter t={time}: {overlap:?}")]
    OverlappingHoles { time: Step, overlap: Vec<Site> },
}

/// The part of a setup before its detector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetupPrefix {
    source: SpacetimePoint,
    filters: Vec<Filter>,
}

impl SetupPrefix {
    pub fn new(source: SpacetimePoint, filters: Vec<Filter>) -> Result<Self, CompositionError> {
        check_order(source, &filters, None)?;
        Ok(SetupPrefix { source, filters })
    }

    pub fn source(&self) -> SpacetimePoint {
        self.source
    }

    pub fn filters(&self) -> &[Filter] {
        &self.filters
    }

    /// Time after which the prefix leaves the state unconstrained.
    pub fn last_time(&self) -> Step {
        self.filters.last().map_or(self.source.time, Filter::time)
    }

    pub fn with_detector(self, detector: SpacetimePoint) -> Result<Setup, CompositionError> {
        Setup::new(self.source, self.filters, detector)
    }
}

/// `[x_f, s_N, ..., s_1, x_i]`. Equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Setup {
    source: SpacetimePoint,
    filters: Vec<Filter>,
    detector: SpacetimePoint,
}

impl Setup {
    pub fn new(
        source: SpacetimePoint,
        filters: Vec<Filter>,
        detector: SpacetimePoint,
    ) -> Result<Self, CompositionError> {
        check_order(source, &filters, Some(detector))?;
        Ok(Setup {
            source,
            filters,
            detector,
        })
    }

    /// `[x_f, x_i]`.
    pub fn elementary(source: SpacetimePoint, detector: SpacetimePoint) -> Result<Self, CompositionError> {
        Setup::new(source, Vec::new(), detector)
    }

    pub fn source(&self) -> SpacetimePoint {
        self.source
    }

    pub fn detector(&self) -> SpacetimePoint {
        self.detector
    }

    pub fn filters(&self) -> &[Filter] {
        &self.filters
    }

    pub fn prefix(&self) -> SetupPrefix {
        SetupPrefix {
            source: self.source,
            filters: self.filters.clone(),
        }
    }

    /// Largest site index referenced anywhere in the setup.
    pub fn max_site(&self) -> Site {
        self.filters
            .iter()
            .map(Filter::max_site)
            .chain([self.source.site, self.detector.site])
            .max()
            .unwrap_or(0)
    }

    /// Number of hole paths through the filters, saturating.
    pub fn path_count(&self) -> u128 {
        self.filters
            .iter()
            .fold(1u128, |acc, f| acc.saturating_mul(f.holes.len() as u128))
    }
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}", self.detector)?;
        for filter in self.filters.iter().rev() {
            write!(f, ", (")?;
            for (i, h) in filter.holes.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{h}")?;
            }
            write!(f, ")@{}", filter.time)?;
        }
        write!(f, ", {}]", self.source)
    }
}

fn check_order(
    source: SpacetimePoint,
    filters: &[Filter],
    detector: Option<SpacetimePoint>,
) -> Result<(), CompositionError> {
    let mut prev = source.time;
    let mut prev_name = String::from("source");
    for f in filters {
        if f.holes.is_empty() {
            return Err(CompositionError::EmptyFilter { time: f.time });
        }
        if f.time <= prev {
            return Err(CompositionError::NonMonotoneTimes {
                detail: format!("filter at t={} is not after {prev_name} at t={prev}", f.time),
            });
        }
        prev = f.time;
        prev_name = format!("filter at t={}", f.time);
    }
    if let Some(d) = detector {
        if d.time <= prev {
            return Err(CompositionError::NonMonotoneTimes {
                detail: format!("detector at t={} is not after {prev_name} at t={prev}", d.time),
            });
        }
    }
    Ok(())
}

/// `and`: `earlier` followed immediately by `later`.
///
/// The junction point becomes an explicit single-hole filter, so the
/// amplitude of the result factorizes into the two amplitudes.
pub fn and_compose(earlier: &Setup, later: &Setup) -> Result<Setup, CompositionError> {
    if earlier.detector != later.source {
        return Err(CompositionError::EndpointMismatch {
            earlier_detector: earlier.detector,
            later_source: later.source,
        });
    }
    let mut filters = Vec::with_capacity(earlier.filters.len() + later.filters.len() + 1);
    filters.extend(earlier.filters.iter().cloned());
    filters.push(Filter::elementary(earlier.detector));
    filters.extend(later.filters.iter().cloned());
    Setup::new(earlier.source, filters, later.detector)
}

/// `or`: merge the holes of the one filter where `a` and `b` differ.
pub fn or_compose(a: &Setup, b: &Setup) -> Result<Setup, CompositionError> {
    if a.source != b.source || a.detector != b.detector {
        return Err(CompositionError::ShapeMismatch {
            detail: format!(
                "endpoints {} -> {} vs {} -> {}",
                a.source, a.detector, b.source, b.detector
            ),
        });
    }
    if a.filters.len() != b.filters.len() {
        return Err(CompositionError::ShapeMismatch {
            detail: format!("{} filters vs {}", a.filters.len(), b.filters.len()),
        });
    }
    let mut differing = None;
    let mut count = 0usize;
    for (i, (fa, fb)) in a.filters.iter().zip(&b.filters).enumerate() {
        if fa.time != fb.time {
            return Err(CompositionError::ShapeMismatch {
                detail: format!("filter {i} at t={} vs t={}", fa.time, fb.time),
            });
        }
        if fa.holes != fb.holes {
            count += 1;
            differing = Some(i);
        }
    }
    let idx = match (count, differing) {
        (1, Some(i)) => i,
        _ => return Err(CompositionError::DifferingFilterCount { count }),
    };
    let (fa, fb) = (&a.filters[idx], &b.filters[idx]);
    let overlap: Vec<Site> = fa.holes.intersection(&fb.holes).copied().collect();
    if !overlap.is_empty() {
        return Err(CompositionError::OverlappingHoles { time: fa.time, overlap });
    }
    let mut filters = a.filters.clone();
    filters[idx].holes = fa.holes.union(&fb.holes).copied().collect();
    Ok(Setup {
        source: a.source,
        filters,
        detector: a.detector,
    })
}
