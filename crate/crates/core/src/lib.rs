//! Centered Takagi-van der Waerden functions on metric spaces.
//!
//! The crate builds the functions `f(x) = Σ b^n d(x, T_n)` centered on a
//! closed set `A`, evaluates them with a certified truncation bound, and
//! estimates the big, little and local Lipschitz derivatives of arbitrary
//! functions together with the hermeticity of the underlying space.
//!
//! It is `no_std` and only needs `alloc`. File formats, configuration and
//! the command-line interface live in the `twlip` crate.

#![no_std]
// `!(x > 0.0)` rejects NaN along with the non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod hermeticity;
pub mod lip;
pub mod metric_space;
pub mod nets;
pub mod tw;

pub use error::{Error, Result};
pub use metric_space::{ClosedSet, MetricSpace, OpenSet, Segment, Span, Warp};
pub use nets::SeparatedNet;
pub use tw::{build_chain, NetChain, TwParams};
