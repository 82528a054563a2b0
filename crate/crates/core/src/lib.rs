//! Numerical laboratory for the symmetrized Gaussian transport-entropy
//! inequality
//!
//! ```text
//! W2(mu, nu)^2 <= 2 Ent_gamma(mu) + 2 Ent_gamma(nu),   mu centered,
//! ```
//!
//! and the results around it: the functional Santaló inequality and its
//! equivalence with the transport form, moment maps and the Monge–Ampère
//! equation in one dimension, the reverse log-Sobolev inequality, the
//! Klartag–Milman reverse Santaló bound, and Gaussian concentration for
//! centered sets.
//!
//! Closed forms are used wherever they exist (Gaussians, error functions);
//! everything else runs on regular grids or finitely supported measures and
//! reports a discretization error estimate next to each verdict.

pub mod calculus;
pub mod concentration;
pub mod error;
pub mod gaussian;
pub mod inequality;
pub mod measures;
pub mod moment_map;
pub mod transport;

pub use error::{LabError, Result};
pub use measures::{
    ConvexPotential, DiscreteMeasure, GapReport, GaussianParams, Grid, GridDensity, GridFunction,
    Law, TransportPlan, Verdict,
};
