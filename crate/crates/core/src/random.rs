//! Seeded generators for random channels and states.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::channel::{validate_density, CQChannel, ClassicalChannel, DensityOperator};
use crate::linalg::CMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-random unit vector in ℂ^d.
pub fn unit_vector<R: Rng>(d: usize, rng: &mut R) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..d)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Density operator G G† / Tr for a d × d complex Gaussian G.
pub fn density<R: Rng>(d: usize, rng: &mut R) -> DensityOperator {
    let g = CMatrix::from_fn(d, d, |_, _| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)));
    let m = &g * g.adjoint();
    let tr: f64 = (0..d).map(|i| m[(i, i)].re).sum();
    validate_density(&m.unscale(tr)).expect("Wishart matrices are valid after normalization")
}

/// Flat Dirichlet sample.
pub fn distribution<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| v / total).collect()
}

/// Rows drawn from a flat Dirichlet law, with each entry zeroed with
/// probability `sparsity` (keeping at least one positive entry per row).
pub fn classical_channel<R: Rng>(inputs: usize, outputs: usize, sparsity: f64, rng: &mut R) -> ClassicalChannel {
    let rows = (0..inputs)
        .map(|_| {
            let mut row = distribution(outputs, rng);
            let keep = rng.random_range(0..outputs);
            for (y, v) in row.iter_mut().enumerate() {
                if y != keep && rng.random::<f64>() < sparsity {
                    *v = 0.0;
                }
            }
            let total: f64 = row.iter().sum();
            row.into_iter().map(|v| v / total).collect()
        })
        .collect();
    ClassicalChannel::new(rows).expect("normalized rows")
}

pub fn cq_channel<R: Rng>(inputs: usize, d: usize, rng: &mut R) -> CQChannel {
    CQChannel::new((0..inputs).map(|_| density(d, rng)).collect()).expect("common dimension")
}

pub fn pure_channel<R: Rng>(inputs: usize, d: usize, rng: &mut R) -> CQChannel {
    let vectors: Vec<Vec<Complex64>> = (0..inputs).map(|_| unit_vector(d, rng)).collect();
    CQChannel::from_pure_vectors(&vectors).expect("unit vectors")
}
