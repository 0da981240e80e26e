use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::graph::ConfusabilityGraph;
use crate::channel::CQChannel;
use crate::divergence::affinity_matrix;
use crate::error::{Error, Result};
use crate::optim::sdp::{solve_sdp, Constraint, Relation, SdpProgram};

/// Eigenvalues of the optimal Gram matrix at or below this are dropped.
pub const RANK_TOL: f64 = 1e-9;
/// Bounds at or above 1 − this impose nothing on unit vectors.
const VACUOUS: f64 = 1e-12;

/// Real unit vectors ψ̃_x with a unit handle f.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Representation {
    pub vectors: Vec<Vec<f64>>,
    pub handle: Vec<f64>,
    /// ρ of the admissibility constraints; ∞ for Lovász representations.
    #[serde(with = "crate::infinite")]
    pub degree: f64,
    /// max over x of −log |⟨ψ̃_x|f⟩|² at the stored handle.
    pub value: f64,
    /// Sign pattern of the solution: true when all ⟨ψ̃_x|ψ̃_x'⟩ ≥ −1e-10.
    pub nonnegative_inner_products: bool,
}

impl Representation {
    pub fn new(vectors: Vec<Vec<f64>>, handle: Vec<f64>, degree: f64) -> Result<Self> {
        let dim = handle.len();
        if vectors.is_empty() {
            return Err(Error::Empty { what: "representation" });
        }
        let unit = |v: &[f64]| (v.iter().map(|a| a * a).sum::<f64>().sqrt() - 1.0).abs() <= 1e-10;
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch { what: "representation vector", expected: dim, found: v.len() });
        }
        if !unit(&handle) || !vectors.iter().all(|v| unit(v)) {
            return Err(Error::InvalidArgument("representation vectors must have unit norm".into()));
        }
        let mut rep = Representation { vectors, handle, degree, value: 0.0, nonnegative_inner_products: true };
        rep.value = rep.value_at(&rep.handle.clone());
        let g = rep.gram();
        rep.nonnegative_inner_products = g.iter().all(|&v| v >= -1e-10);
        Ok(rep)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.handle.len()
    }

    pub fn gram(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |a, b| dot(&self.vectors[a], &self.vectors[b]))
    }

    /// max over x of −log |⟨ψ̃_x|f⟩|² for a unit vector f.
    pub fn value_at(&self, f: &[f64]) -> f64 {
        self.vectors
            .iter()
            .map(|v| -(dot(v, f).powi(2)).ln())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest excess of |⟨ψ̃_x|ψ̃_x'⟩| over the admissibility bound c(x,x').
    pub fn max_violation(&self, bounds: &DMatrix<f64>) -> f64 {
        let g = self.gram();
        let n = self.len();
        (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .map(|(a, b)| g[(a, b)].abs() - bounds[(a, b)])
            .fold(0.0, f64::max)
    }

    /// The pure-state channel with states |ψ̃_x⟩⟨ψ̃_x|.
    pub fn to_channel(&self) -> Result<CQChannel> {
        CQChannel::from_real_vectors(&self.vectors)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Entrywise g^{1/ρ} with 0 kept at 0; ρ = ∞ gives the support indicator.
pub fn degree_bounds(g: &DMatrix<f64>, rho: f64) -> DMatrix<f64> {
    g.map(|v| {
        if v <= 0.0 {
            0.0
        } else if rho.is_infinite() {
            1.0
        } else {
            v.powf(1.0 / rho)
        }
    })
}

/// max t subject to G ⪰ 0 of order n+1 with unit diagonal, G(x, h) ≥ t for the
/// handle index h = n, |G(x,x')| ≤ c(x,x'), and G(x,x') = 0 where c = 0.
fn gram_program(c: &DMatrix<f64>) -> SdpProgram {
    let n = c.nrows();
    let h = n;
    let mut prog = SdpProgram::new(n + 1, 1);
    prog.objective_scalars.push((0, 1.0));
    for i in 0..=n {
        prog.push(Constraint::entry(i, i, Relation::Eq, 1.0));
    }
    for x in 0..n {
        prog.push(Constraint { matrix: vec![(x, h, 1.0)], scalars: vec![(0, -1.0)], relation: Relation::Ge, rhs: 0.0 });
    }
    for x in 0..n {
        for y in x + 1..n {
            let b = c[(x, y)];
            if b <= 0.0 {
                prog.push(Constraint::entry(x, y, Relation::Eq, 0.0));
            } else if b < 1.0 - VACUOUS {
                prog.push(Constraint::entry(x, y, Relation::Le, b));
                prog.push(Constraint::entry(x, y, Relation::Ge, -b));
            }
        }
    }
    prog
}

/// Factorizes G = V Λ Vᵀ into unit row vectors of the numerical rank.
fn factorize(g: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let eig = g.clone().symmetric_eigen();
    let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > RANK_TOL).collect();
    (0..g.nrows())
        .map(|r| {
            let v: Vec<f64> = keep.iter().map(|&k| eig.eigenvectors[(r, k)] * eig.eigenvalues[k].sqrt()).collect();
            let norm = DVector::from_column_slice(&v).norm();
            v.into_iter().map(|a| a / norm).collect()
        })
        .collect()
}

/// Optimal value (nats) and representation for the degree-ρ program with bounds `c`.
pub fn theta_with_bounds(c: &DMatrix<f64>, degree: f64) -> Result<(f64, Representation)> {
    let n = c.nrows();
    if n == 0 {
        return Err(Error::Empty { what: "bound matrix" });
    }
    if n == 1 {
        return Ok((0.0, Representation::new(vec![vec![1.0]], vec![1.0], degree)?));
    }
    let sol = solve_sdp(&gram_program(c))?;
    let t = sol.scalars[0];
    let mut rows = factorize(&sol.x);
    let handle = rows.pop().expect("handle row");
    let rep = Representation::new(rows, handle, degree)?;
    Ok((-2.0 * t.ln(), rep))
}

/// Lovász ϑ in nats: non-adjacent vertices get orthogonal vectors.
pub fn lovasz_theta(graph: &ConfusabilityGraph) -> Result<(f64, Representation)> {
    theta_with_bounds(&graph.indicator(), f64::INFINITY)
}

/// ϑ(ρ) for affinities g(x,x') = Tr √S_x √S_x'; ρ = ∞ gives Lovász ϑ of the confusability graph.
pub fn theta_rho(channel: &CQChannel, rho: f64) -> Result<(f64, Representation)> {
    if !(rho >= 1.0) {
        return Err(Error::InvalidArgument(format!("rho = {rho} must be at least 1")));
    }
    theta_with_bounds(&degree_bounds(&affinity_matrix(channel), rho), rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{classical_embed, pure_state_lift, ClassicalChannel};
    use crate::exponents::cutoff_rate;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn pentagon() {
        let (v, rep) = lovasz_theta(&ConfusabilityGraph::cycle(5)).unwrap();
        assert!((v - 0.5 * 5f64.ln()).abs() < 1e-7);
        assert!((rep.value - v).abs() < 1e-7);
        assert!(rep.max_violation(&ConfusabilityGraph::cycle(5).indicator()) < 1e-8);
    }

    #[test]
    fn complete_and_empty_graphs() {
        let (v, _) = lovasz_theta(&ConfusabilityGraph::complete(4)).unwrap();
        assert!(v.abs() < 1e-7);
        let (v, rep) = lovasz_theta(&ConfusabilityGraph::empty(4)).unwrap();
        assert!((v - 4f64.ln()).abs() < 1e-7);
        assert_eq!(rep.dim(), 4);
    }

    /// ϑ(ρ) for two inputs: the handle bisects two unit vectors at
    /// inner product c, so t² = (1 + c)/2.
    #[test]
    fn two_inputs_closed_form() {
        let g = 0.6f64;
        let ch = CQChannel::from_real_vectors(&[vec![1.0, 0.0], vec![g.sqrt(), (1.0 - g).sqrt()]]).unwrap();
        // affinity of pure states is |⟨ψ|ψ'⟩|² = g
        for rho in [1.0, 2.0, 7.5] {
            let (v, _) = theta_rho(&ch, rho).unwrap();
            let expected = -((1.0 + g.powf(1.0 / rho)) / 2.0).ln();
            assert!((v - expected).abs() < 1e-7, "rho={rho}: {v} vs {expected}");
        }
    }

    #[test]
    fn degree_one_is_cutoff_rate() {
        let w = ClassicalChannel::bsc(0.1);
        let (v, _) = theta_rho(&classical_embed(&w), 1.0).unwrap();
        assert!((v - cutoff_rate(&w).unwrap().value).abs() < 1e-6);
        assert!((v - 0.2231435513).abs() < 1e-6);
    }

    #[test]
    fn typewriter_lift_plateau() {
        let ch = pure_state_lift(&ClassicalChannel::noisy_typewriter(5, 0.5));
        let plateau = 0.5 * 5f64.ln();
        let (v3, rep) = theta_rho(&ch, 3.0).unwrap();
        assert!((v3 - plateau).abs() < 1e-6);
        assert!(rep.max_violation(&degree_bounds(&affinity_matrix(&ch), 3.0)) < 1e-8);
        let (v2, _) = theta_rho(&ch, 2.0).unwrap();
        let expected = (5.0 / (1.0 + 2.0 * 0.25f64.powf(0.5))).ln();
        assert!((v2 - expected).abs() < 1e-6, "{v2} vs {expected}");
    }

    #[test]
    fn representation_checks_unit_norm() {
        assert!(Representation::new(vec![vec![1.0, 1.0]], vec![1.0, 0.0], 1.0).is_err());
        let r = Representation::new(vec![vec![1.0, 0.0], vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2]], vec![1.0, 0.0], 1.0)
            .unwrap();
        assert!(r.nonnegative_inner_products);
        assert!((r.value - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_small_degree() {
        let ch = classical_embed(&ClassicalChannel::bsc(0.1));
        assert!(theta_rho(&ch, 0.5).is_err());
    }
}
