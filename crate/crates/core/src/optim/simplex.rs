//! Exponentiated-gradient minimization over the probability simplex.

use serde::Serialize;

use crate::channel::ProbabilityVector;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplexResult {
    pub p_star: ProbabilityVector,
    pub value: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Starts {
    /// Uniform start only.
    Single,
    /// Uniform start plus one start near each vertex.
    Multi,
}

#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub starts: Starts,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions { tol: 1e-7, max_iter: 50_000, starts: Starts::Multi }
    }
}

impl SimplexOptions {
    pub fn single() -> Self {
        SimplexOptions { starts: Starts::Single, ..Self::default() }
    }
}

/// First-order optimality residual on the simplex, relative to max(1, |λ|)
/// where λ = Σ p g is the multiplier of the simplex constraint.
pub fn kkt_residual(p: &[f64], g: &[f64]) -> f64 {
    let lambda: f64 = p.iter().zip(g).map(|(a, b)| a * b).sum();
    let worst = p
        .iter()
        .zip(g)
        .map(|(&px, &gx)| (px * (gx - lambda).abs()).max(lambda - gx))
        .fold(0.0, f64::max);
    worst / lambda.abs().max(1.0)
}

/// Minimizes a convex function given as a value-and-gradient oracle.
pub fn simplex_minimize<F>(f: F, dim: usize, opts: SimplexOptions) -> Result<SimplexResult>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    if dim == 0 {
        return Err(Error::Empty { what: "simplex" });
    }
    let uniform = vec![1.0 / dim as f64; dim];
    let mut starts = vec![uniform.clone()];
    if opts.starts == Starts::Multi && dim > 1 {
        for k in 0..dim {
            let mut p: Vec<f64> = uniform.iter().map(|u| 0.5 * u).collect();
            p[k] += 0.5;
            starts.push(p);
        }
    }

    let mut best: Option<SimplexResult> = None;
    let mut failure: Option<Error> = None;
    for start in starts {
        match descend(&f, start, &opts) {
            Ok(r) => {
                let better = match &best {
                    None => true,
                    Some(b) => r.value < b.value - 1e-10 * (1.0 + b.value.abs()),
                };
                if better {
                    best = Some(r);
                }
            }
            Err(e) => {
                let replace = match (&failure, &e) {
                    (Some(Error::NoConvergence { value: old, .. }), Error::NoConvergence { value, .. }) => value < old,
                    (None, _) => true,
                    _ => false,
                };
                if replace {
                    failure = Some(e);
                }
            }
        }
    }
    match (best, failure) {
        (Some(b), _) => Ok(b),
        (None, Some(e)) => Err(e),
        (None, None) => unreachable!("at least one start runs"),
    }
}

fn descend<F>(f: &F, mut p: Vec<f64>, opts: &SimplexOptions) -> Result<SimplexResult>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let (mut value, mut grad) = f(&p);
    let scale = grad.iter().map(|g| g.abs()).fold(0.0, f64::max);
    let mut eta = 1.0 / scale.max(1e-12);
    let mut residual = kkt_residual(&p, &grad);
    let mut iterations = 0;

    while residual > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence { iterations, residual, value, best: p });
        }
        iterations += 1;
        let gmin = grad.iter().copied().fold(f64::INFINITY, f64::min);
        let mut accepted = false;
        for _ in 0..80 {
            let q = mirror_step(&p, &grad, gmin, eta);
            let (vq, gq) = f(&q);
            let linear: f64 = grad.iter().zip(q.iter().zip(&p)).map(|(g, (a, b))| g * (a - b)).sum();
            let bound = value + linear + kl(&q, &p) / eta + 1e-14 * (1.0 + value.abs());
            if vq.is_finite() && vq <= bound {
                p = q;
                value = vq;
                grad = gq;
                eta *= 2.0;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            // step size collapsed; the iterate is as good as floating point allows
            break;
        }
        residual = kkt_residual(&p, &grad);
    }
    if residual > opts.tol.max(1e-6) {
        return Err(Error::NoConvergence { iterations, residual, value, best: p });
    }
    Ok(SimplexResult {
        p_star: ProbabilityVector::normalized(p),
        value,
        kkt_residual: residual,
        iterations,
    })
}

fn mirror_step(p: &[f64], g: &[f64], gmin: f64, eta: f64) -> Vec<f64> {
    let mut q: Vec<f64> = p
        .iter()
        .zip(g)
        .map(|(&px, &gx)| if px > 0.0 { (px * (-(eta * (gx - gmin))).exp()).max(1e-300) } else { 0.0 })
        .collect();
    let total: f64 = q.iter().sum();
    q.iter_mut().for_each(|v| *v /= total);
    q
}

fn kl(q: &[f64], p: &[f64]) -> f64 {
    q.iter()
        .zip(p)
        .filter(|(a, _)| **a > 0.0)
        .map(|(a, b)| a * (a / b).ln())
        .sum::<f64>()
        .max(0.0)
}
