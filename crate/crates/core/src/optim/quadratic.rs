//! Quadratic forms PᵀKP over the probability simplex.

use nalgebra::{DMatrix, DVector};

use super::simplex::{kkt_residual, simplex_minimize, SimplexOptions, SimplexResult};
use crate::channel::ProbabilityVector;
use crate::error::Result;

/// Largest alphabet for which every face of the simplex is enumerated.
pub const EXHAUSTIVE_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticOptimum {
    pub p: ProbabilityVector,
    pub value: f64,
    /// False when only small supports and local searches were examined.
    pub exhaustive: bool,
}

pub fn form(k: &DMatrix<f64>, p: &[f64]) -> f64 {
    let v = DVector::from_column_slice(p);
    (v.transpose() * k * &v)[(0, 0)]
}

fn oracle(k: &DMatrix<f64>, sign: f64) -> impl Fn(&[f64]) -> (f64, Vec<f64>) + '_ {
    move |p: &[f64]| {
        let v = DVector::from_column_slice(p);
        let kp = k * &v;
        let value = sign * kp.dot(&v);
        (value, kp.iter().map(|x| 2.0 * sign * x).collect())
    }
}

/// Stationary point of PᵀKP on the affine hull of the face `support`.
fn face_stationary(k: &DMatrix<f64>, support: &[usize]) -> Option<Vec<f64>> {
    let m = support.len();
    let mut a = DMatrix::zeros(m + 1, m + 1);
    for (i, &x) in support.iter().enumerate() {
        for (j, &y) in support.iter().enumerate() {
            a[(i, j)] = k[(x, y)];
        }
        a[(i, m)] = 1.0;
        a[(m, i)] = 1.0;
    }
    let mut rhs = DVector::zeros(m + 1);
    rhs[m] = 1.0;
    let lu = a.clone().lu();
    let sol = lu.solve(&rhs)?;
    let scale = k.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    let residual = (&a * &sol - &rhs).amax();
    if !sol.iter().all(|v| v.is_finite()) || residual > 1e-10 * scale {
        return None;
    }
    let mut p = vec![0.0; k.nrows()];
    for (i, &x) in support.iter().enumerate() {
        if sol[i] < -1e-12 {
            return None;
        }
        p[x] = sol[i].max(0.0);
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    Some(p)
}

/// Minimizes PᵀKP for a positive semidefinite K: exponentiated gradient
/// followed by an exact solve on the detected support.
pub fn minimize_psd_form(k: &DMatrix<f64>) -> Result<SimplexResult> {
    let n = k.nrows();
    let mut r = simplex_minimize(oracle(k, 1.0), n, SimplexOptions::default())?;
    let support: Vec<usize> = (0..n).filter(|&x| r.p_star[x] > 1e-9).collect();
    if let Some(p) = face_stationary(k, &support) {
        let v = DVector::from_column_slice(&p);
        let g: Vec<f64> = (k * &v).iter().map(|x| 2.0 * x).collect();
        let value = form(k, &p);
        let res = kkt_residual(&p, &g);
        if value <= r.value + 1e-12 * (1.0 + r.value.abs()) && res <= r.kkt_residual.max(1e-13) {
            r.p_star = ProbabilityVector::normalized(p);
            r.value = value;
            r.kkt_residual = res;
        }
    }
    Ok(r)
}

/// Global extremum of an arbitrary (possibly indefinite) quadratic form.
///
/// Exact for alphabets up to [`EXHAUSTIVE_LIMIT`]: the extremum sits at a
/// stationary point relative to some face, and all faces are visited.
/// Larger alphabets examine supports of size ≤ 3 plus multi-start local
/// search and report `exhaustive = false`.
pub fn quadratic_extremum(k: &DMatrix<f64>, sense: Sense) -> QuadraticOptimum {
    let n = k.nrows();
    let sign = match sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut best_p = vec![0.0; n];
    best_p[0] = 1.0;
    let mut best = sign * k[(0, 0)];
    let consider = |p: Vec<f64>, best: &mut f64, best_p: &mut Vec<f64>| {
        let v = sign * form(k, &p);
        if v < *best - 1e-14 * (1.0 + best.abs()) {
            *best = v;
            *best_p = p;
        }
    };
    let exhaustive = n <= EXHAUSTIVE_LIMIT;
    if exhaustive {
        for mask in 1u32..(1u32 << n) {
            let support: Vec<usize> = (0..n).filter(|&x| mask & (1 << x) != 0).collect();
            if let Some(p) = face_stationary(k, &support) {
                consider(p, &mut best, &mut best_p);
            }
        }
    } else {
        for a in 0..n {
            for b in a..n {
                for c in b..n {
                    let mut support = vec![a, b, c];
                    support.dedup();
                    if let Some(p) = face_stationary(k, &support) {
                        consider(p, &mut best, &mut best_p);
                    }
                }
            }
        }
        let f = oracle(k, sign);
        if let Ok(r) = simplex_minimize(&f, n, SimplexOptions::default()) {
            consider(r.p_star.into_inner(), &mut best, &mut best_p);
        }
    }
    QuadraticOptimum {
        value: form(k, &best_p),
        p: ProbabilityVector::normalized(best_p),
        exhaustive,
    }
}
