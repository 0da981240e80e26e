//! Numerical engines: simplex minimization, eigenvalue programs and a small
//! interior-point SDP solver.

pub mod lambda;
pub mod lp;
pub mod quadratic;
pub mod scalar;
pub mod sdp;
pub mod simplex;

pub use lambda::{minimize_lambda_max, LambdaMax};
pub use quadratic::{minimize_psd_form, quadratic_extremum, QuadraticOptimum, Sense};
pub use sdp::{solve_sdp, Constraint, Relation, SdpProgram, SdpSolution};
pub use simplex::{simplex_minimize, SimplexOptions, SimplexResult, Starts};
