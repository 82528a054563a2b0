//! Shared measure and function representations.
//!
//! Every type validates its invariants at construction and is immutable
//! afterwards, so values can be shared freely across threads.

mod density;
mod discrete;
mod function;
mod gaussian_params;
mod grid;
mod law;
mod plan;
mod report;

pub use density::GridDensity;
pub use discrete::DiscreteMeasure;
pub use function::{ConvexPotential, GridFunction, DEFAULT_CONVEX_TOL};
pub use gaussian_params::GaussianParams;
pub use grid::{fmt17, Grid};
pub use law::Law;
pub use plan::TransportPlan;
pub use report::{GapReport, Verdict};

pub(crate) use density::norm;
pub(crate) use function::{derivative_1d, second_derivative_1d};
