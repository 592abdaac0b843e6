//! Metric-space models, closed and open subsets, and distance primitives.
//!
//! All models are immutable once built. The two continuum models are
//! segments of the real line whose metric is `|w(x) - w(y)|` for an
//! increasing warp `w`; nearest-point queries on them (and on the discrete
//! models with the label metric) are answered by binary search.

mod model;
mod sets;

pub use model::{FinitePointSet, GapSequence, Line, MetricSpace, Warp};
pub(crate) use sets::distance_to_sorted;
pub use sets::{complement_in_carrier, generalized_ball, ClosedSet, OpenSet, Segment, Span};

use crate::error::Result;

/// `d(x, S)` for a closed set. Errors on an empty set.
pub fn distance_to_set(space: &MetricSpace, x: f64, set: &ClosedSet) -> Result<f64> {
    set.distance(space, x)
}
