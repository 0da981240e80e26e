//! Reliability bounds for classical and classical-quantum channels.
//!
//! The crate computes statistical distances between density operators,
//! error exponents (sphere packing, random coding, expurgated), information
//! radii, the Lovász theta function and its degree-ρ interpolation, umbrella
//! bounds, and binary hypothesis-testing bounds. All rates are in nats.

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod divergence;
pub mod error;
pub mod exponents;
pub mod hypotest;
pub mod infinite;
pub mod linalg;
pub mod optim;
pub mod random;
pub mod theta;

#[cfg(test)]
mod test_support;

pub use channel::{
    classical_embed, fractional_power, ns_mapping, pure_state_lift, support_projector, validate_density, CQChannel,
    Channel, ClassicalChannel, ClassicalPair, DensityOperator, ProbabilityVector,
};
pub use error::{Error, Result};
pub use exponents::{BoundCurve, ExponentReport};
pub use optim::SimplexResult;
