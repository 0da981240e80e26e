//! Dense tableau simplex method for packing-type linear programs.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub pivots: usize,
}

/// Maximizes cᵀx subject to Ax ≤ b, x ≥ 0, for b ≥ 0 (the origin is feasible).
///
/// Bland's rule guarantees termination; an unbounded direction is reported as
/// `InvalidArgument`.
pub fn maximize_packing(c: &[f64], a: &DMatrix<f64>, b: &[f64]) -> Result<LpSolution> {
    let (m, n) = a.shape();
    if c.len() != n || b.len() != m {
        return Err(Error::DimensionMismatch { what: "linear program shape", expected: n, found: c.len() });
    }
    if let Some(v) = b.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::InvalidArgument(format!("packing right-hand side {v} is negative")));
    }
    // columns: n structural, m slack, then rhs
    let width = n + m + 1;
    let mut t = DMatrix::zeros(m + 1, width);
    for i in 0..m {
        for j in 0..n {
            t[(i, j)] = a[(i, j)];
        }
        t[(i, n + i)] = 1.0;
        t[(i, width - 1)] = b[i];
    }
    for j in 0..n {
        t[(m, j)] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut pivots = 0;
    while let Some(col) = (0..n + m).find(|&j| t[(m, j)] < -PIVOT_TOL) {
        let mut row: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if t[(i, col)] > PIVOT_TOL {
                let ratio = t[(i, width - 1)] / t[(i, col)];
                let better = match row {
                    None => true,
                    Some(r) => ratio < best - PIVOT_TOL || (ratio <= best + PIVOT_TOL && basis[i] < basis[r]),
                };
                if better {
                    best = ratio;
                    row = Some(i);
                }
            }
        }
        let row = row.ok_or_else(|| Error::InvalidArgument("linear program is unbounded".into()))?;
        let p = t[(row, col)];
        for j in 0..width {
            t[(row, j)] /= p;
        }
        for i in 0..=m {
            if i != row {
                let f = t[(i, col)];
                if f != 0.0 {
                    for j in 0..width {
                        t[(i, j)] -= f * t[(row, j)];
                    }
                }
            }
        }
        basis[row] = col;
        pivots += 1;
    }
    let mut x = vec![0.0; n];
    for (i, &v) in basis.iter().enumerate() {
        if v < n {
            x[v] = t[(i, width - 1)].max(0.0);
        }
    }
    let value = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    Ok(LpSolution { x, value, pivots })
}
