//! Error exponents and rate functionals.
//!
//! E₀(ρ, P) = −log Tr (Σ P(x) S_x^{1/(1+ρ)})^{1+ρ} is the workhorse: the
//! sphere-packing and random-coding exponents are its Legendre-type
//! transforms, R_ρ = E₀(ρ)/ρ is an information radius, and R_∞ is the rate
//! below which the sphere-packing exponent is infinite. The expurgated
//! exponent and the zero-rate exponent use the pairwise affinities
//! Tr √S_x √S_x' instead.

mod curve;
mod expurgated;
mod gallager;
mod radius;
mod rates;

use serde::{Deserialize, Serialize};

use crate::channel::ProbabilityVector;
use crate::error::Result;
use crate::linalg::MatrixJson;
use crate::optim::scalar::grid_then_golden;

pub use curve::{BoundCurve, CurvePoint};
pub use expurgated::{eex, ex, ex_max, zero_rate, Expurgated};
pub use gallager::{e0, e0_max, er, esp, r_rho, Gallager};
pub use radius::{radius_certificate, RadiusCertificate, CERTIFICATE_TOL};
pub use rates::{cutoff_rate, esp_at_rinfty_check, r_infinity, r_infinity_classical, EspCheck};

/// Largest ρ examined by the sphere-packing and expurgated searches.
pub const RHO_CAP: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    None,
    /// Relative KKT residual of the inner maximization over P.
    Kkt { residual: f64 },
    /// Density operator F certifying an eigenvalue program, with the gap
    /// between the primal value and the bound F certifies (in nats).
    Handle { handle: MatrixJson, gap: f64 },
    /// `exhaustive` is false when the search only covered small supports.
    Search { exhaustive: bool },
}

/// A value together with the optimizers that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    #[serde(with = "crate::infinite")]
    pub value: f64,
    pub optimizer_p: ProbabilityVector,
    /// ρ or s at the optimum; ∞ when the supremum diverges.
    #[serde(with = "crate::infinite")]
    pub parameter: f64,
    pub certificate: Certificate,
}

impl ExponentReport {
    pub fn infinite(inputs: usize) -> Self {
        ExponentReport {
            value: f64::INFINITY,
            optimizer_p: ProbabilityVector::uniform(inputs),
            parameter: f64::INFINITY,
            certificate: Certificate::None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

/// Maximizes `f` over a sorted grid and refines by golden section between the
/// neighbors of the best point. Returns the argmax and the value.
pub(crate) fn sup_over_grid(grid: &[f64], f: impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let mut failure = None;
    let mut neg = |u: f64| match f(u) {
        Ok(v) => -v,
        Err(e) => {
            failure.get_or_insert(e);
            f64::INFINITY
        }
    };
    let (u, v) = grid_then_golden(&mut neg, grid, 1e-7);
    match failure {
        Some(e) => Err(e),
        None => Ok((u, -v)),
    }
}
