//! One-dimensional moment maps: convex `phi` with `(phi')#(e^{-phi} dx) = mu`
//! for centered `mu`, and the identities checked on them.
//!
//! Two solvers are provided. The damped fixed point iterates
//! `phi' = F_mu^-1 o F_rho` with `rho ∝ e^{-phi}`; the variational solver
//! minimizes `Ent_gamma(rho) - W2(mu, rho)^2 / 2` directly. Both run on the
//! same grid so their outputs can be compared cell by cell.

mod checks;
mod solver;

pub use checks::{
    density_l1, entropy_identity_gap, lsi_deficit, monge_ampere_residual, random_moment_target,
    reverse_lsi_gap, x_dot_grad_phi_check, MaResidual,
};
pub use solver::{
    santambrogio_functional, solve_fixed_point, solve_moment_map_1d, solve_moment_map_with,
    solve_variational, MomentMapConfig, MomentMapSolution, MomentMethod, SIGNIFICANCE,
};
