//! Gaussian concentration for centered sets,
//!
//! ```text
//! 1 - gamma(A_r) <= gamma(A)^{-1} e^{-r^2/2},   int_A x dgamma = 0,
//! ```
//!
//! checked with error functions on the line and by seeded Monte Carlo in
//! higher dimensions, plus the transport argument that produces it.

mod check;
mod marton;
mod sets;

pub use check::{
    concentration_check, to_csv, EnlargementResult, McConfig, ANALYTIC_TOL, CHUNK, CSV_HEADER,
    MC_SIGMAS, MIN_CHUNKS,
};
pub use marton::{marton_demo, marton_demo_with, ConditionalEntropy, MartonChain, MARTON_POINTS};
pub use sets::{
    centered_pair_of_intervals, complement, corpus_1d, gaussian_interval_mass, gaussian_pdf,
    half_mass_endpoint, CenteredSet, SetKind, CENTERING_TOL,
};
