use serde::Serialize;

use super::gallager::Gallager;
use crate::channel::{validate_density, CQChannel, DensityOperator, ProbabilityVector};
use crate::error::{Error, Result};
use crate::linalg::{self, log_sum_exp, CMatrix, Spectrum};

/// Largest accepted |max_x D_α(S_x‖F) − R_ρ|.
pub const CERTIFICATE_TOL: f64 = 1e-5;

/// R_ρ as a min-max Rényi radius, witnessed by the center F.
#[derive(Clone, Debug, Serialize)]
pub struct RadiusCertificate {
    pub rho: f64,
    pub r_rho: f64,
    pub p: ProbabilityVector,
    pub handle: DensityOperator,
    /// D_α(S_x‖F) for every input, α = 1/(1+ρ).
    #[serde(with = "crate::infinite::vec")]
    pub divergences: Vec<f64>,
    pub max_divergence: f64,
    pub residual: f64,
}

/// Builds A = Σ P(x) S_x^α at the maximizing P, the center F = A^{1+ρ}/Tr A^{1+ρ},
/// and checks max_x D_α(S_x‖F) = E₀(ρ)/ρ.
pub fn radius_certificate(channel: &CQChannel, rho: f64) -> Result<RadiusCertificate> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidArgument(format!("rho = {rho} must be positive and finite")));
    }
    let g = Gallager::new(channel);
    let best = g.e0_max(rho)?;
    let r_rho = best.value / rho;
    let p = best.optimizer_p;
    let alpha = 1.0 / (1.0 + rho);
    let s = rho / (1.0 + rho);

    let powers: Vec<CMatrix> = channel.states().iter().map(|st| st.power(alpha)).collect::<Result<_>>()?;
    let d = channel.dim();
    let a = powers
        .iter()
        .zip(p.as_slice())
        .fold(CMatrix::zeros(d, d), |acc, (m, &px)| acc + m.scale(px));
    let spec = Spectrum::of(&a);
    let lmax = spec.max();
    let log_t = log_sum_exp(
        spec.values
            .iter()
            .map(|&v| if v > 0.0 { (1.0 + rho) * v.ln() } else { f64::NEG_INFINITY }),
    );
    // F = Σ λ^{1+ρ}/T v v†, F^s = Σ (λ/λmax)^ρ v v† · λmax^ρ / T^s
    let f = spec.map(|v| if v > 0.0 { ((1.0 + rho) * v.ln() - log_t).exp() } else { 0.0 });
    let handle = validate_density(&linalg::hermitian_part(&f).unscale(linalg::trace_re(&f)))?;
    let f_s_scaled = spec.map(|v| if v > 0.0 { (v / lmax).powf(rho) } else { 0.0 });
    let log_scale = rho * lmax.ln() - s * log_t;

    let divergences: Vec<f64> = powers
        .iter()
        .map(|sa| {
            let tr = linalg::trace_product_re(sa, &f_s_scaled);
            if tr <= 0.0 {
                f64::INFINITY
            } else {
                (tr.ln() + log_scale) / (alpha - 1.0)
            }
        })
        .collect();
    let max_divergence = divergences.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let residual = (max_divergence - r_rho).abs();
    if !(residual <= CERTIFICATE_TOL) {
        return Err(Error::CertificateFailure { residual });
    }
    Ok(RadiusCertificate { rho, r_rho, p, handle, divergences, max_divergence, residual })
}
