//! Discrete Legendre transforms, entropies of grid densities, and the
//! log-Laplace functional with the recentering construction.

mod entropy;
mod laplace;
mod legendre;

pub use entropy::{
    differential_entropy, law_rel_entropy, lebesgue_entropy, log_mass, rel_entropy_gaussian,
    subsampled,
};
pub use laplace::{
    log_laplace, recenter, shift_partner, tilt, LogLaplace, Recentering, DECAY_MARGIN, RECENTER_TOL,
};
pub use legendre::{
    conjugate_1d, convex_envelope_1d, default_conjugate_grid, hull_slopes, legendre,
    legendre_discrete, legendre_discrete_axis1_first, lower_hull,
};
