//! Online sum-of-radii clustering workbench.
//!
//! Demands arrive one at a time in a metric space and must be covered
//! irrevocably by clusters `C(p, r)` costing `f + r`. The crate provides the
//! online algorithms (primal-dual, randomized, fractional), the model
//! adapters, lower-bound adversaries, the parking-permit reductions, and
//! exact offline optima used as competitive-ratio denominators.

pub mod adversary;
pub mod error;
pub mod experiment;
pub mod fractional;
pub mod generate;
pub mod metric;
pub mod model;
pub mod offline;
pub mod online;
pub mod par;
pub mod reductions;
pub mod verify;

pub use error::{Error, Result};
pub use metric::MetricSpace;
pub use model::{Center, Cluster, Instance, Solution};

/// Absolute/relative slack used for every floating distance comparison.
pub const EPS: f64 = 1e-9;

/// `a <= b` up to [`EPS`], scaled by the magnitude of `b`.
#[inline]
pub fn approx_le(a: f64, b: f64) -> bool {
    a <= b + EPS * b.abs().max(1.0)
}
