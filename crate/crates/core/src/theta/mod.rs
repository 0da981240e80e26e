//! Graph-side bounds: Lovász ϑ, the degree-ρ family ϑ(ρ) interpolating
//! between the cutoff rate (ρ = 1) and ϑ (ρ → ∞), and the umbrella bounds
//! built from them.

mod graph;
mod gram;
mod probe;
mod umbrella;
mod value;

pub use graph::{classical_confusability_graph, confusability_graph, ConfusabilityGraph};
pub use gram::{degree_bounds, lovasz_theta, theta_rho, theta_with_bounds, Representation, RANK_TOL};
pub use probe::{theta_sp_probe, ProbeOutcome};
pub use umbrella::{
    log_grid, sp_umbrella_curve, sp_umbrella_from_profile, umbrella_curve, umbrella_from_profile, Coefficient,
    ThetaProfile, PLATEAU_TOL,
};
pub use value::{
    quadratic_min_and_handle, representation_handle, representation_value, QuadraticHandle, RepresentationValue,
};
