use nalgebra::DMatrix;
use num_complex::Complex64;

use super::sdp::{solve_sdp, Constraint, Relation, SdpProgram};
use super::simplex::SimplexResult;
use crate::channel::ProbabilityVector;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Spectrum};

/// Solution of min over P of λ_max(Σ P(x) H_x).
#[derive(Clone, Debug)]
pub struct LambdaMax {
    /// `value` is λ_max at `p_star`; `kkt_residual` is the certified gap
    /// `value − lower_bound`.
    pub result: SimplexResult,
    /// min_x Tr(H_x F) at the returned handle, a lower bound on the minimum.
    pub lower_bound: f64,
    /// Density operator F maximizing min_x Tr(H_x F).
    pub handle: CMatrix,
}

pub fn lambda_max(m: &CMatrix) -> f64 {
    Spectrum::of(m).max()
}

pub fn mixture(ops: &[CMatrix], p: &[f64]) -> CMatrix {
    let d = ops[0].nrows();
    ops.iter()
        .zip(p)
        .fold(CMatrix::zeros(d, d), |acc, (h, &w)| acc + h.scale(w))
}

/// Entry coefficients (i ≤ j) of the linear functional X ↦ ⟨A, X⟩.
fn entry_coefficients(a: &DMatrix<f64>, scale: f64) -> Vec<(usize, usize, f64)> {
    let n = a.nrows();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            let v = if i == j { a[(i, i)] } else { a[(i, j)] + a[(j, i)] };
            if v != 0.0 {
                out.push((i, j, scale * v));
            }
        }
    }
    out
}

/// Solves the eigenvalue program as the semidefinite program
/// max τ s.t. Tr(H_x F) ≥ τ, Tr F = 1, F ⪰ 0, whose multipliers are P.
/// Complex operators are handled through their real symmetric embedding.
pub fn minimize_lambda_max(ops: &[CMatrix]) -> Result<LambdaMax> {
    let first = ops.first().ok_or(Error::Empty { what: "operator list" })?;
    let d = first.nrows();
    if let Some(h) = ops.iter().find(|h| h.nrows() != d || h.ncols() != d) {
        return Err(Error::DimensionMismatch { what: "operator dimension", expected: d, found: h.nrows() });
    }
    // identical operators share one constraint and split its weight evenly
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (x, h) in ops.iter().enumerate() {
        match classes.iter_mut().find(|c| linalg::max_abs_diff(&ops[c[0]], h) <= 1e-15) {
            Some(c) => c.push(x),
            None => classes.push(vec![x]),
        }
    }
    let n = ops.len();
    let unique: Vec<&CMatrix> = classes.iter().map(|c| &ops[c[0]]).collect();
    let real = ops.iter().all(|h| linalg::is_real(h, 1e-15));
    let (order, scale, mats): (usize, f64, Vec<DMatrix<f64>>) = if real {
        (d, 1.0, unique.iter().map(|h| h.map(|z| z.re)).collect())
    } else {
        (2 * d, 0.5, unique.iter().map(|h| linalg::real_embedding(h)).collect())
    };

    let mut prog = SdpProgram::new(order, 1);
    prog.objective_scalars.push((0, 1.0));
    for h in &mats {
        prog.push(Constraint {
            matrix: entry_coefficients(h, scale),
            scalars: vec![(0, -1.0)],
            relation: Relation::Ge,
            rhs: 0.0,
        });
    }
    prog.push(Constraint {
        matrix: (0..order).map(|i| (i, i, scale)).collect(),
        scalars: vec![],
        relation: Relation::Eq,
        rhs: 1.0,
    });
    let sol = solve_sdp(&prog)?;

    let mut weights = vec![0.0; n];
    for (c, dual) in classes.iter().zip(&sol.duals) {
        for &x in c {
            weights[x] = dual.max(0.0) / c.len() as f64;
        }
    }
    let p = if weights.iter().sum::<f64>() > 0.0 {
        ProbabilityVector::normalized(weights)
    } else {
        ProbabilityVector::uniform(n)
    };
    let value = lambda_max(&mixture(ops, p.as_slice()));

    let handle = if real {
        sol.x.map(|v| Complex64::new(v, 0.0))
    } else {
        linalg::from_real_embedding(&sol.x)
    };
    let handle = linalg::hermitian_part(&handle);
    let tr = linalg::trace_re(&handle);
    let handle = handle.unscale(tr);
    let lower_bound = ops
        .iter()
        .map(|h| linalg::trace_product_re(h, &handle))
        .fold(f64::INFINITY, f64::min)
        .min(value);
    Ok(LambdaMax {
        result: SimplexResult {
            p_star: p,
            value,
            kkt_residual: (value - lower_bound).max(0.0),
            iterations: sol.iterations,
        },
        lower_bound,
        handle,
    })
}
