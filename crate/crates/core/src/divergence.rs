//! Statistical distances between density operators.
//!
//! Values are in nats. Infinite distances (orthogonal supports) are returned
//! as `f64::INFINITY`, never as errors, except for [`mu`] and
//! [`mu_derivatives`] whose value would be −∞.

use nalgebra::DMatrix;

use crate::channel::{ns_mapping, CQChannel, DensityOperator};
use crate::error::{Error, Result};
use crate::linalg::{self, log_sum_exp};
use crate::optim::scalar::{grid_then_golden, linspace};

/// μ(s) and its derivatives on the common support of the Nussbaum–Szkoła pair.
///
/// Stores log Q0 and log Q1 restricted to indices where both are positive, so
/// μ(s) = log Σ exp((1−s) log Q0 + s log Q1) holds on all of `[0, 1]`
/// including the endpoint limits.
#[derive(Clone, Debug)]
pub struct LogLikelihood {
    log_q0: Vec<f64>,
    log_q1: Vec<f64>,
}

impl LogLikelihood {
    pub fn new(a: &DensityOperator, b: &DensityOperator) -> Result<Self> {
        let pair = ns_mapping(a, b)?;
        Self::from_distributions(&pair.q0, &pair.q1)
    }

    pub fn from_distributions(q0: &[f64], q1: &[f64]) -> Result<Self> {
        let (log_q0, log_q1): (Vec<f64>, Vec<f64>) = q0
            .iter()
            .zip(q1)
            .filter(|(x, y)| **x > 0.0 && **y > 0.0)
            .map(|(x, y)| (x.ln(), y.ln()))
            .unzip();
        if log_q0.is_empty() {
            return Err(Error::DisjointSupports);
        }
        Ok(LogLikelihood { log_q0, log_q1 })
    }

    pub fn mu(&self, s: f64) -> f64 {
        log_sum_exp(self.log_q0.iter().zip(&self.log_q1).map(|(a, b)| (1.0 - s) * a + s * b))
    }

    /// (μ′(s), μ″(s)) as mean and variance of log(Q1/Q0) under the tilted law.
    pub fn derivatives(&self, s: f64) -> (f64, f64) {
        let exps: Vec<f64> = self
            .log_q0
            .iter()
            .zip(&self.log_q1)
            .map(|(a, b)| (1.0 - s) * a + s * b)
            .collect();
        let norm = log_sum_exp(exps.iter().copied());
        let mut mean = 0.0;
        let mut second = 0.0;
        let mut weights = Vec::with_capacity(exps.len());
        for (k, e) in exps.iter().enumerate() {
            let w = (e - norm).exp();
            let l = self.log_q1[k] - self.log_q0[k];
            mean += w * l;
            weights.push((w, l));
        }
        for (w, l) in weights {
            second += w * (l - mean).powi(2);
        }
        (mean, second)
    }
}

/// log Tr A^{1−s} B^s, computed from matrix powers for interior `s`.
pub fn mu(a: &DensityOperator, b: &DensityOperator, s: f64) -> Result<f64> {
    let ll = LogLikelihood::new(a, b)?;
    if s <= 0.0 || s >= 1.0 {
        return Ok(ll.mu(s.clamp(0.0, 1.0)));
    }
    let pa = a.power(1.0 - s)?;
    let pb = b.power(s)?;
    Ok(linalg::trace_product_re(&pa, &pb).ln())
}

pub fn mu_derivatives(a: &DensityOperator, b: &DensityOperator, s: f64) -> Result<(f64, f64)> {
    Ok(LogLikelihood::new(a, b)?.derivatives(s))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MuProfile {
    pub s_grid: Vec<f64>,
    pub mu: Vec<f64>,
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
}

pub fn mu_profile(a: &DensityOperator, b: &DensityOperator, s_grid: &[f64]) -> Result<MuProfile> {
    let ll = LogLikelihood::new(a, b)?;
    let (mut mu, mut mu1, mut mu2) = (Vec::new(), Vec::new(), Vec::new());
    for &s in s_grid {
        mu.push(ll.mu(s));
        let (d1, d2) = ll.derivatives(s);
        mu1.push(d1);
        mu2.push(d2);
    }
    Ok(MuProfile { s_grid: s_grid.to_vec(), mu, mu1, mu2 })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chernoff {
    pub distance: f64,
    pub s_star: f64,
}

/// −min over `[0,1]` of a convex function: grid on `[0.01, 0.99]` plus the
/// endpoints, then golden-section refinement. Flat profiles report s* = 1/2.
pub(crate) fn chernoff_of(mut mu: impl FnMut(f64) -> f64) -> Chernoff {
    let mut grid = vec![0.0];
    grid.extend(linspace(0.01, 0.99, 99));
    grid.push(1.0);
    let values: Vec<f64> = grid.iter().map(|&s| mu(s)).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 1e-12 * (1.0 + lo.abs()) {
        return Chernoff { distance: -mu(0.5), s_star: 0.5 };
    }
    let (s, v) = grid_then_golden(&mut mu, &grid, 1e-8);
    Chernoff { distance: -v, s_star: s }
}

pub fn chernoff_distance(a: &DensityOperator, b: &DensityOperator) -> Chernoff {
    match LogLikelihood::new(a, b) {
        Ok(ll) => chernoff_of(|s| ll.mu(s)),
        Err(_) => Chernoff { distance: f64::INFINITY, s_star: 0.5 },
    }
}

/// −log Tr √A √B.
pub fn bhattacharyya_distance(a: &DensityOperator, b: &DensityOperator) -> f64 {
    match LogLikelihood::new(a, b) {
        Ok(ll) => -ll.mu(0.5),
        Err(_) => f64::INFINITY,
    }
}

/// Tr √A √B, the affinity whose negative log is the Bhattacharyya distance.
pub fn affinity(a: &DensityOperator, b: &DensityOperator) -> f64 {
    (-bhattacharyya_distance(a, b)).exp()
}

/// Symmetric matrix of affinities Tr √S_x √S_x' with unit diagonal.
pub fn affinity_matrix(channel: &CQChannel) -> DMatrix<f64> {
    let n = channel.inputs();
    let mut g = DMatrix::identity(n, n);
    for x in 0..n {
        for y in x + 1..n {
            let v = affinity(channel.state(x), channel.state(y)).min(1.0);
            g[(x, y)] = v;
            g[(y, x)] = v;
        }
    }
    g
}

/// −log Tr √(√A B √A).
pub fn fidelity_distance(a: &DensityOperator, b: &DensityOperator) -> f64 {
    if LogLikelihood::new(a, b).is_err() {
        return f64::INFINITY;
    }
    let ra = a.sqrt();
    let m = &ra * b.matrix() * &ra;
    let spec = linalg::Spectrum::of(&m);
    let f: f64 = spec.values.iter().map(|&v| v.max(0.0).sqrt()).sum();
    -f.ln()
}

/// (1/(α−1)) log Tr A^α B^{1−α}; the relative entropy when α = 1.
pub fn renyi_divergence(a: &DensityOperator, b: &DensityOperator, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("Renyi order {alpha} must be positive")));
    }
    let pair = ns_mapping(a, b)?;
    // supp A ⊄ supp B
    let escapes = pair.q0.iter().zip(&pair.q1).any(|(x, y)| *x > 0.0 && *y == 0.0);
    if (alpha - 1.0).abs() < 1e-12 {
        if escapes {
            return Ok(f64::INFINITY);
        }
        let kl = pair
            .q0
            .iter()
            .zip(&pair.q1)
            .filter(|(x, _)| **x > 0.0)
            .map(|(x, y)| x * (x / y).ln())
            .sum::<f64>();
        return Ok(kl.max(0.0));
    }
    if alpha > 1.0 && escapes {
        return Ok(f64::INFINITY);
    }
    match LogLikelihood::from_distributions(&pair.q0, &pair.q1) {
        Ok(ll) => Ok((ll.mu(1.0 - alpha) / (alpha - 1.0)).max(0.0)),
        Err(_) => Ok(f64::INFINITY),
    }
}

/// True when every non-orthogonal pair of states has equal Chernoff and
/// Bhattacharyya distances, i.e. μ is minimized at s = 1/2.
pub fn pairwise_reversible(channel: &CQChannel) -> bool {
    let n = channel.inputs();
    for x in 0..n {
        for y in x + 1..n {
            let (a, b) = (channel.state(x), channel.state(y));
            let ll = match LogLikelihood::new(a, b) {
                Ok(ll) => ll,
                Err(_) => continue,
            };
            let dc = chernoff_of(|s| ll.mu(s)).distance;
            let db = -ll.mu(0.5);
            if dc - db > 1e-9 * (1.0 + dc) {
                return false;
            }
        }
    }
    true
}
