use nalgebra::DMatrix;
use serde::Serialize;

use super::gram::{dot, Representation};
use crate::channel::ProbabilityVector;
use crate::error::{Error, Result};
use crate::optim::minimize_psd_form;

/// Sign patterns are enumerated up to this many vectors.
pub const SIGN_ENUMERATION_LIMIT: usize = 12;

/// Optimal handle for fixed vectors.
#[derive(Clone, Debug, Serialize)]
pub struct RepresentationValue {
    pub value: f64,
    pub handle: Vec<f64>,
    /// Weights of the min-norm point of the signed vectors.
    pub weights: Vec<f64>,
    /// Sign flip applied to each vector at the optimum.
    pub signs: Vec<i8>,
    /// False when only the all-plus pattern was examined.
    pub exhaustive: bool,
}

/// min over unit f of max_x −log |⟨ψ̃_x|f⟩|².
///
/// For a fixed sign pattern σ, max_f min_x σ_x⟨ψ̃_x|f⟩ is the norm of the
/// min-norm point of conv{σ_x ψ̃_x}, i.e. min_P Pᵀ(K∘σσᵀ)P under a square root.
pub fn representation_value(rep: &Representation) -> f64 {
    representation_handle(rep).map(|v| v.value).unwrap_or(f64::INFINITY)
}

pub fn representation_handle(rep: &Representation) -> Result<RepresentationValue> {
    let n = rep.len();
    let k = rep.gram();
    let exhaustive = n <= SIGN_ENUMERATION_LIMIT;
    let patterns: u64 = if exhaustive { 1 << (n - 1) } else { 1 };
    let mut best: Option<(f64, Vec<f64>, Vec<i8>)> = None;
    for mask in 0..patterns {
        // σ_0 = + fixes the global sign
        let signs: Vec<i8> = (0..n).map(|x| if x > 0 && mask & (1 << (x - 1)) != 0 { -1 } else { 1 }).collect();
        let ks = DMatrix::from_fn(n, n, |a, b| k[(a, b)] * f64::from(signs[a] * signs[b]));
        let r = minimize_psd_form(&ks)?;
        if best.as_ref().is_none_or(|(v, _, _)| r.value > *v) {
            best = Some((r.value, r.p_star.into_inner(), signs));
        }
    }
    let (sq, weights, signs) = best.expect("at least one pattern");
    let dim = rep.dim();
    let mut f = vec![0.0; dim];
    for (x, v) in rep.vectors.iter().enumerate() {
        for (fi, vi) in f.iter_mut().zip(v) {
            *fi += weights[x] * f64::from(signs[x]) * vi;
        }
    }
    let norm = dot(&f, &f).sqrt();
    if !(sq > 0.0) || norm == 0.0 {
        // 0 is in every signed hull: no handle overlaps all vectors
        return Ok(RepresentationValue { value: f64::INFINITY, handle: rep.handle.clone(), weights, signs, exhaustive });
    }
    f.iter_mut().for_each(|v| *v /= norm);
    Ok(RepresentationValue { value: rep.value_at(&f).min(-sq.ln()), handle: f, weights, signs, exhaustive })
}

/// R_∞ of a pure-state channel with nonnegative inner products, with its optimal handle.
#[derive(Clone, Debug, Serialize)]
pub struct QuadraticHandle {
    pub r_infinity: f64,
    pub p_star: ProbabilityVector,
    pub handle: Vec<f64>,
}

/// R_∞ = −log min_P Σ P(x)P(x')⟨ψ̃_x|ψ̃_x'⟩ and f = Σ P*(x)ψ̃_x normalized.
pub fn quadratic_min_and_handle(rep: &Representation) -> Result<QuadraticHandle> {
    let k = rep.gram();
    let n = rep.len();
    for a in 0..n {
        for b in a + 1..n {
            if k[(a, b)] < -1e-10 {
                return Err(Error::NonNegativityViolated { a, b, value: k[(a, b)] });
            }
        }
    }
    let r = minimize_psd_form(&k)?;
    let r_inf = -r.value.ln();
    let mut f = vec![0.0; rep.dim()];
    for (x, v) in rep.vectors.iter().enumerate() {
        for (fi, vi) in f.iter_mut().zip(v) {
            *fi += r.p_star[x] * vi;
        }
    }
    let norm = dot(&f, &f).sqrt();
    f.iter_mut().for_each(|v| *v /= norm);
    let floor = (-r_inf).exp() - 1e-8;
    if let Some(x) = rep.vectors.iter().position(|v| dot(v, &f).powi(2) < floor) {
        return Err(Error::CertificateFailure { residual: floor - dot(&rep.vectors[x], &f).powi(2) });
    }
    Ok(QuadraticHandle { r_infinity: r_inf.max(0.0), p_star: r.p_star, handle: f })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{pure_state_lift, ClassicalChannel};
    use crate::exponents::r_infinity;
    use crate::theta::{lovasz_theta, ConfusabilityGraph};

    fn basis(n: usize) -> Representation {
        let vectors = (0..n).map(|x| (0..n).map(|y| if x == y { 1.0 } else { 0.0 }).collect()).collect();
        let handle = vec![1.0 / (n as f64).sqrt(); n];
        Representation::new(vectors, handle, f64::INFINITY).unwrap()
    }

    #[test]
    fn orthonormal_basis() {
        let rep = basis(4);
        assert!((representation_value(&rep) - 4f64.ln()).abs() < 1e-9);
        let q = quadratic_min_and_handle(&rep).unwrap();
        assert!((q.r_infinity - 4f64.ln()).abs() < 1e-9);
        assert!(q.p_star.as_slice().iter().all(|&p| (p - 0.25).abs() < 1e-6));
    }

    #[test]
    fn single_and_repeated_vectors() {
        let one = Representation::new(vec![vec![0.6, 0.8]], vec![1.0, 0.0], 1.0).unwrap();
        assert!(representation_value(&one).abs() < 1e-12);
        let two = Representation::new(vec![vec![0.6, 0.8], vec![0.6, 0.8]], vec![1.0, 0.0], 1.0).unwrap();
        assert!(quadratic_min_and_handle(&two).unwrap().r_infinity.abs() < 1e-12);
    }

    #[test]
    fn pentagon_umbrella() {
        let (theta, rep) = lovasz_theta(&ConfusabilityGraph::cycle(5)).unwrap();
        let v = representation_handle(&rep).unwrap();
        assert!((v.value - 0.5 * 5f64.ln()).abs() < 1e-6);
        assert!((v.value - theta).abs() < 1e-6);
        let q = quadratic_min_and_handle(&rep).unwrap();
        assert!((q.r_infinity - theta).abs() < 1e-6);
        let ch = rep.to_channel().unwrap();
        assert!((r_infinity(&ch).unwrap().value - theta).abs() < 1e-6);
    }

    #[test]
    fn bsc_lift_is_cutoff_rate() {
        let w = ClassicalChannel::bsc(0.1);
        let vectors: Vec<Vec<f64>> = w.rows().iter().map(|r| r.iter().map(|p| p.sqrt()).collect()).collect();
        let rep = Representation::new(vectors, vec![1.0, 0.0], 1.0).unwrap();
        let q = quadratic_min_and_handle(&rep).unwrap();
        assert!((q.r_infinity - 0.2231435513).abs() < 1e-8);
        let lift = pure_state_lift(&w);
        assert!((r_infinity(&lift).unwrap().value - q.r_infinity).abs() < 1e-6);
    }

    /// Two vectors at an obtuse angle: flipping one sign beats any handle for the raw pair.
    #[test]
    fn negative_overlap_uses_sign_flip() {
        let c = -0.8f64;
        let rep = Representation::new(vec![vec![1.0, 0.0], vec![c, (1.0 - c * c).sqrt()]], vec![1.0, 0.0], 1.0)
            .unwrap();
        let v = representation_handle(&rep).unwrap();
        assert_eq!(v.signs, vec![1, -1]);
        assert!((v.value + ((1.0 + c.abs()) / 2.0).ln()).abs() < 1e-9);
        assert!(matches!(quadratic_min_and_handle(&rep), Err(Error::NonNegativityViolated { .. })));
    }
}
