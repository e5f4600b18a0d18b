pub(crate) mod phase;
mod roots;
pub(crate) mod solver;
mod spectrum;

pub use phase::{
    b0_critical, b0_of_eps, eps_of_b0, gibbs, localized_walk, phase_point, phase_point_given, return_density, rho_of_b0, LocalizedWalk,
    PhasePoint, Regime,
};
pub use roots::{roots, roots_eps, AsymptoticRoots};
pub use solver::{minimal_solution, minimal_solution_eps, minimal_solution_with, MinimalSolution, SolverConfig};
pub use spectrum::truncated_spectrum;

#[cfg(test)]
mod tests;
