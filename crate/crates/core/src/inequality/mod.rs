//! Checkers for the transport-entropy inequality and the functional
//! inequalities tied to it. Each returns [`GapReport`](crate::GapReport)s.

mod duality;
pub mod families;
mod reverse;
mod santalo;
mod talagrand;
mod ulc;

pub use duality::{duality_backward, duality_forward, BackwardChain, ForwardChain};
pub use reverse::{
    is_unconditional_potential, km_product, reverse_gap, KmReport, ReverseReport, UNCONDITIONAL_TOL,
};
pub use santalo::{
    exp_density, santalo_check, santalo_optimal_partner, SantaloPair, Side, ADMISSIBILITY_TOL,
    PAIR_CENTERING_TOL,
};
pub use talagrand::{centering_tol, talagrand_gap, CLOSED_FORM_CENTERING_TOL, GRID_CENTERING_TOL};
pub use ulc::{ulc_gap_1d, UlcReport, CURVATURE_TOL, LIPSCHITZ_TOL, SYMMETRY_TOL};
