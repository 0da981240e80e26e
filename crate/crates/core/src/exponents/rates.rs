use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::gallager::Gallager;
use super::{Certificate, ExponentReport};
use crate::channel::{CQChannel, ClassicalChannel, ProbabilityVector};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, MatrixJson};
use crate::optim::lp::maximize_packing;
use crate::optim::{minimize_lambda_max, minimize_psd_form};

/// −log min over P of λ_max(Σ P(x) S_x⁰), S_x⁰ the support projectors.
///
/// The value is re-evaluable at the returned P; the handle F certifies it
/// from below with the reported gap.
pub fn r_infinity(channel: &CQChannel) -> Result<ExponentReport> {
    let ops: Vec<CMatrix> = channel.states().iter().map(|s| s.support_projector()).collect();
    let lm = minimize_lambda_max(&ops)?;
    let value = -lm.result.value.ln();
    let gap = (lm.result.value / lm.lower_bound).ln().max(0.0);
    Ok(ExponentReport {
        value: value.max(0.0),
        optimizer_p: lm.result.p_star,
        parameter: f64::INFINITY,
        certificate: Certificate::Handle { handle: MatrixJson::from(&lm.handle), gap },
    })
}

/// max over P of −log max_y Σ_{x: W_x(y) > 0} P(x), by linear programming.
///
/// With q = P/τ the program becomes max Σq s.t. Σ_{x: W_x(y)>0} q(x) ≤ 1, so
/// R_∞ is the log of a fractional packing number.
pub fn r_infinity_classical(w: &ClassicalChannel) -> ExponentReport {
    let (nx, ny) = (w.inputs(), w.outputs());
    let b = DMatrix::from_fn(ny, nx, |y, x| if w.prob(x, y) > 0.0 { 1.0 } else { 0.0 });
    let lp = maximize_packing(&vec![1.0; nx], &b, &vec![1.0; ny]).expect("every input reaches some output");
    ExponentReport {
        value: lp.value.ln().max(0.0),
        optimizer_p: ProbabilityVector::normalized(lp.x),
        parameter: f64::INFINITY,
        certificate: Certificate::None,
    }
}

/// −log min over P of Σ P(x)P(x') Σ_y √(W_x(y) W_x'(y)).
pub fn cutoff_rate(w: &ClassicalChannel) -> Result<ExponentReport> {
    let n = w.inputs();
    let k = DMatrix::from_fn(n, n, |a, b| {
        (0..w.outputs()).map(|y| (w.prob(a, y) * w.prob(b, y)).sqrt()).sum::<f64>()
    });
    let r = minimize_psd_form(&k)?;
    Ok(ExponentReport {
        value: (-r.value.ln()).max(0.0),
        optimizer_p: r.p_star,
        parameter: 1.0,
        certificate: Certificate::Kkt { residual: r.kkt_residual },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EspCheck {
    /// E_sp(R_∞ + ε) extrapolated linearly to ε = 0.
    #[serde(with = "crate::infinite")]
    pub esp_limit: f64,
    pub r_inf: f64,
    pub ok: bool,
    /// (ε, E_sp(R_∞ + ε)) for the descending ε grid.
    pub samples: Vec<(f64, f64)>,
}

/// Checks E_sp(R_∞) ≤ R_∞ for a pure-state channel.
pub fn esp_at_rinfty_check(channel: &CQChannel) -> Result<EspCheck> {
    if !channel.is_pure() {
        return Err(Error::InvalidArgument("the sphere-packing limit check needs a pure-state channel".into()));
    }
    let g = Gallager::new(channel);
    let r_inf = g.r_infinity()?;
    let mut samples = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        samples.push((eps, g.esp(r_inf + eps)?.value));
    }
    let (e2, v2) = samples[1];
    let (e3, v3) = samples[2];
    let esp_limit = if v3.is_finite() { v3 + (v3 - v2) * e3 / (e2 - e3) } else { f64::INFINITY };
    Ok(EspCheck { esp_limit, r_inf, ok: esp_limit <= r_inf + 1e-4, samples })
}
