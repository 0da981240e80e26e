use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{sup_over_grid, Certificate, ExponentReport, RHO_CAP};
use crate::channel::{CQChannel, ProbabilityVector};
use crate::divergence::affinity_matrix;
use crate::error::{Error, Result};
use crate::optim::quadratic::{form, quadratic_extremum, Sense};
use crate::optim::scalar::linspace;

/// g^{1/ρ} entrywise, with 0^{1/ρ} = 0.
fn hadamard_root(g: &DMatrix<f64>, rho: f64) -> DMatrix<f64> {
    g.map(|v| if v > 0.0 { v.powf(1.0 / rho) } else { 0.0 })
}

/// E_x(ρ, P) = −ρ log Σ P(x)P(x') g(x,x')^{1/ρ} over the affinities g.
pub struct Expurgated {
    g: DMatrix<f64>,
    memo: Mutex<HashMap<u64, ExponentReport>>,
}

impl Expurgated {
    pub fn new(channel: &CQChannel) -> Self {
        Self::from_affinities(affinity_matrix(channel))
    }

    pub fn from_affinities(g: DMatrix<f64>) -> Self {
        Expurgated { g, memo: Mutex::new(HashMap::new()) }
    }

    pub fn affinities(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn ex(&self, rho: f64, p: &[f64]) -> f64 {
        (-rho * form(&hadamard_root(&self.g, rho), p).ln()).max(0.0)
    }

    /// max over P of E_x(ρ, P); the quadratic form is indefinite in general,
    /// so the search enumerates faces of the simplex.
    pub fn ex_max(&self, rho: f64) -> Result<ExponentReport> {
        if !(rho >= 1.0) {
            return Err(Error::InvalidArgument(format!("rho = {rho} must be at least 1")));
        }
        let key = rho.to_bits();
        if let Some(r) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(r.clone());
        }
        let q = quadratic_extremum(&hadamard_root(&self.g, rho), Sense::Minimize);
        let report = ExponentReport {
            value: (-rho * q.value.ln()).max(0.0),
            optimizer_p: q.p,
            parameter: rho,
            certificate: Certificate::Search { exhaustive: q.exhaustive },
        };
        self.memo.lock().expect("memo lock").insert(key, report.clone());
        Ok(report)
    }

    /// Rate below which E_x(ρ) − ρR grows without bound: −log min PᵀKP for
    /// the confusability indicator K = [g > 0].
    pub fn divergence_rate(&self) -> f64 {
        let k = self.g.map(|v| if v > 0.0 { 1.0 } else { 0.0 });
        -quadratic_extremum(&k, Sense::Minimize).value.ln()
    }

    /// sup over ρ ≥ 1 of E_x(ρ) − ρR.
    pub fn eex(&self, r: f64) -> Result<ExponentReport> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("rate {r} must be positive and finite")));
        }
        if r < self.divergence_rate() - 1e-12 {
            return Ok(ExponentReport::infinite(self.g.nrows()));
        }
        let grid = linspace(0.0, RHO_CAP.ln(), 48);
        grid.par_iter().map(|&v| self.ex_max(v.exp()).map(|_| ())).collect::<Result<()>>()?;
        let (v, _) = sup_over_grid(&grid, |v| Ok(self.ex_max(v.exp())?.value - v.exp() * r))?;
        let rho = v.exp();
        let at = self.ex_max(rho)?;
        Ok(ExponentReport { value: (at.value - rho * r).max(0.0), parameter: rho, ..at })
    }

    /// max over P of −Σ P(x)P(x') log g(x,x'); infinite when two states are orthogonal.
    pub fn zero_rate(&self) -> ExponentReport {
        let n = self.g.nrows();
        if let Some((x, y)) = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).find(|&(x, y)| self.g[(x, y)] <= 0.0) {
            let mut p = vec![0.0; n];
            p[x] = 0.5;
            p[y] = 0.5;
            return ExponentReport {
                value: f64::INFINITY,
                optimizer_p: ProbabilityVector::normalized(p),
                parameter: f64::INFINITY,
                certificate: Certificate::Search { exhaustive: true },
            };
        }
        let d = self.g.map(|v| -v.ln());
        let q = quadratic_extremum(&d, Sense::Maximize);
        ExponentReport {
            value: q.value.max(0.0),
            optimizer_p: q.p,
            parameter: f64::INFINITY,
            certificate: Certificate::Search { exhaustive: q.exhaustive },
        }
    }
}

pub fn ex(channel: &CQChannel, rho: f64, p: &ProbabilityVector) -> f64 {
    Expurgated::new(channel).ex(rho, p.as_slice())
}

pub fn ex_max(channel: &CQChannel, rho: f64) -> Result<ExponentReport> {
    Expurgated::new(channel).ex_max(rho)
}

pub fn eex(channel: &CQChannel, r: f64) -> Result<ExponentReport> {
    Expurgated::new(channel).eex(r)
}

pub fn zero_rate(channel: &CQChannel) -> ExponentReport {
    Expurgated::new(channel).zero_rate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{classical_embed, ClassicalChannel, DensityOperator};
    use crate::exponents::{cutoff_rate, Gallager};
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

    /// max over q ∈ [0,1] of 2q(1−q)·d on a fine grid.
    fn two_point_oracle(d: f64) -> f64 {
        (0..=100_000)
            .map(|i| {
                let q = i as f64 / 100_000.0;
                2.0 * q * (1.0 - q) * d
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn zero_rate_examples() {
        let same = CQChannel::new(vec![DensityOperator::diagonal(&[0.3, 0.7]).unwrap(); 3]).unwrap();
        assert!(zero_rate(&same).value.abs() < 1e-14);

        let bsc = classical_embed(&ClassicalChannel::bsc(0.1));
        let z = zero_rate(&bsc);
        assert!((z.value - two_point_oracle(-0.6f64.ln())).abs() < 1e-12);
        assert!((z.value - 0.5 * -0.6f64.ln()).abs() < 1e-12);
        assert!((z.optimizer_p[0] - 0.5).abs() < 1e-12);

        let quarter = CQChannel::from_real_vectors(&[vec![1.0, 0.0], vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2]]).unwrap();
        assert!((zero_rate(&quarter).value - 0.5 * LN_2).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_states_have_infinite_zero_rate() {
        let ch = classical_embed(&ClassicalChannel::noiseless(2));
        assert!(zero_rate(&ch).is_infinite());
    }

    #[test]
    fn ex_at_one_is_cutoff_rate() {
        let w = ClassicalChannel::new(vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.1, 0.8], vec![0.3, 0.4, 0.3]]).unwrap();
        let a = ex_max(&classical_embed(&w), 1.0).unwrap().value;
        let b = cutoff_rate(&w).unwrap().value;
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn orthogonal_inputs_diverge_below_log_two() {
        let ch = classical_embed(&ClassicalChannel::noiseless(2));
        assert!(eex(&ch, 0.5).unwrap().is_infinite());
        assert!(eex(&ch, 0.8).unwrap().value.is_finite());
    }

    #[test]
    fn small_rate_approaches_zero_rate() {
        let ch = classical_embed(&ClassicalChannel::bsc(0.1));
        let e = Expurgated::new(&ch);
        let z = e.zero_rate().value;
        let v = e.eex(1e-6).unwrap().value;
        assert!((v - z).abs() < 1e-3, "{v} vs {z}");
        assert!(v <= z + 1e-9);
    }

    #[test]
    fn expurgated_dominates_random_coding_at_low_rate() {
        let ch = classical_embed(&ClassicalChannel::bsc(0.1));
        let g = Gallager::new(&ch);
        let e = Expurgated::new(&ch);
        for r in [0.01, 0.03, 0.05] {
            assert!(e.eex(r).unwrap().value >= g.er(r).unwrap().value - 1e-8);
        }
    }

    #[test]
    fn ex_is_reevaluable() {
        let ch = classical_embed(&ClassicalChannel::bsc(0.2));
        let e = Expurgated::new(&ch);
        let r = e.ex_max(3.0).unwrap();
        assert!((e.ex(3.0, r.optimizer_p.as_slice()) - r.value).abs() < 1e-12);
    }
}
