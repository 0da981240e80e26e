use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::graph::ConfusabilityGraph;
use super::gram::lovasz_theta;
use crate::channel::{validate_density, CQChannel};
use crate::error::Result;
use crate::exponents::r_infinity;
use crate::linalg::CMatrix;
use crate::random::rng;

/// Largest block given to one clique.
const MAX_BLOCK: usize = 3;

#[derive(Clone, Debug, Serialize)]
pub struct ProbeOutcome {
    /// Smallest R_∞ over all sampled representations.
    pub min_r_infinity: f64,
    pub lovasz: f64,
    pub trials: usize,
    /// Trial achieving the minimum; trial 0 is the Lovász representation.
    pub argmin: usize,
}

/// Random projector representations U_x with U_x U_x' = 0 on non-edges, fed
/// to R_∞ as the states U_x / rank U_x.
///
/// Trial 0 is the optimal Lovász representation. Each further trial covers
/// the vertices by random cliques, gives every clique its own orthogonal
/// block, lets each member span a random subspace of the block (a vertex in
/// several cliques takes the direct sum), then applies a random unitary.
pub fn theta_sp_probe(graph: &ConfusabilityGraph, trials: usize, seed: u64) -> Result<ProbeOutcome> {
    let (lovasz, rep) = lovasz_theta(graph)?;
    let mut best = (r_infinity(&rep.to_channel()?)?.value, 0);
    let mut rng = rng(seed);
    for trial in 1..trials {
        let projectors = random_projector_representation(graph, &mut rng);
        let states = projectors
            .iter()
            .map(|u| {
                let rank = u.trace().re.round();
                validate_density(&u.unscale(rank))
            })
            .collect::<Result<Vec<_>>>()?;
        let v = r_infinity(&CQChannel::new(states)?)?.value;
        if v < best.0 {
            best = (v, trial);
        }
    }
    Ok(ProbeOutcome { min_r_infinity: best.0, lovasz, trials: trials.max(1), argmin: best.1 })
}

/// Random cliques covering every vertex.
fn random_clique_cover<R: Rng>(graph: &ConfusabilityGraph, rng: &mut R) -> Vec<Vec<usize>> {
    let n = graph.n();
    let mut covered = vec![false; n];
    let mut cliques = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    while covered.iter().any(|c| !c) {
        order.shuffle(rng);
        let seed = *order.iter().find(|&&x| !covered[x]).expect("uncovered vertex");
        let mut clique = vec![seed];
        for &x in &order {
            if x != seed && clique.iter().all(|&y| graph.has_edge(x, y)) && rng.random::<f64>() < 0.7 {
                clique.push(x);
            }
        }
        for &x in &clique {
            covered[x] = true;
        }
        cliques.push(clique);
    }
    cliques
}

fn random_projector_representation<R: Rng>(graph: &ConfusabilityGraph, rng: &mut R) -> Vec<CMatrix> {
    let cliques = random_clique_cover(graph, rng);
    let blocks: Vec<usize> = cliques.iter().map(|_| rng.random_range(1..=MAX_BLOCK)).collect();
    let d: usize = blocks.iter().sum();
    let mut columns: Vec<Vec<CMatrix>> = vec![Vec::new(); graph.n()];
    let mut offset = 0;
    for (clique, &k) in cliques.iter().zip(&blocks) {
        for &x in clique {
            // orthonormal basis of a random subspace of the block
            let rank = rng.random_range(1..=k);
            let q = random_unitary(k, rng);
            let mut basis = CMatrix::zeros(d, rank);
            for c in 0..rank {
                for r in 0..k {
                    basis[(offset + r, c)] = q[(r, c)];
                }
            }
            columns[x].push(basis);
        }
        offset += k;
    }
    let u = random_unitary(d, rng);
    columns
        .into_iter()
        .map(|parts| {
            let cols: usize = parts.iter().map(|b| b.ncols()).sum();
            let mut basis = CMatrix::zeros(d, cols);
            let mut c0 = 0;
            for b in parts {
                basis.columns_mut(c0, b.ncols()).copy_from(&b);
                c0 += b.ncols();
            }
            let rotated = &u * basis;
            &rotated * rotated.adjoint()
        })
        .collect()
}

/// Unitary from the QR factorization of a complex Gaussian matrix.
fn random_unitary<R: Rng>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)));
    g.qr().q()
}
