//! Dense primal-dual interior-point solver for small semidefinite programs.
//!
//! Programs are stated as
//!
//! ```text
//! maximize   Σ c_ij G_ij + Σ d_k t_k
//! subject to Σ a_ij G_ij + Σ e_k t_k  (= | ≤ | ≥)  b     for each constraint
//!            G ⪰ 0,  t ≥ 0
//! ```
//!
//! where coefficients address entries of the symmetric matrix G (i ≤ j).
//! Internally the program is put in standard form over the cone
//! S₊ⁿ × ℝ₊ˡ (inequalities get slack columns) and solved with the HKM search
//! direction and a Mehrotra predictor-corrector.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_ORDER_CAP: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    /// Coefficients on entries G_ij, i ≤ j.
    pub matrix: Vec<(usize, usize, f64)>,
    /// Coefficients on the nonnegative scalars.
    pub scalars: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn entry(i: usize, j: usize, relation: Relation, rhs: f64) -> Self {
        Constraint { matrix: vec![(i.min(j), i.max(j), 1.0)], scalars: vec![], relation, rhs }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpProgram {
    pub n: usize,
    pub scalars: usize,
    pub objective_matrix: Vec<(usize, usize, f64)>,
    pub objective_scalars: Vec<(usize, f64)>,
    pub constraints: Vec<Constraint>,
    pub order_cap: usize,
}

impl SdpProgram {
    pub fn new(n: usize, scalars: usize) -> Self {
        SdpProgram {
            n,
            scalars,
            objective_matrix: vec![],
            objective_scalars: vec![],
            constraints: vec![],
            order_cap: DEFAULT_ORDER_CAP,
        }
    }

    pub fn push(&mut self, c: Constraint) {
        self.constraints.push(c);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SdpSolution {
    #[serde(skip)]
    pub x: DMatrix<f64>,
    pub scalars: Vec<f64>,
    /// Constraint multipliers; nonnegative for `Ge` rows, nonpositive for `Le` rows.
    pub duals: Vec<f64>,
    pub value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub complementarity: f64,
    pub iterations: usize,
}

/// Standard form: min ⟨C,X⟩ + c·x s.t. ⟨A_i,X⟩ + a_i·x = b_i.
struct Standard {
    n: usize,
    l: usize,
    c: DMatrix<f64>,
    c_lp: DVector<f64>,
    a_dense: Vec<DMatrix<f64>>,
    a_sparse: Vec<Vec<(usize, usize, f64)>>,
    a_lp: DMatrix<f64>,
    b: DVector<f64>,
}

fn add_entry(m: &mut DMatrix<f64>, i: usize, j: usize, v: f64) {
    if i == j {
        m[(i, i)] += v;
    } else {
        m[(i, j)] += 0.5 * v;
        m[(j, i)] += 0.5 * v;
    }
}

fn sparse_of(m: &DMatrix<f64>) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)] != 0.0 {
                out.push((i, j, m[(i, j)]));
            }
        }
    }
    out
}

impl Standard {
    fn build(prog: &SdpProgram) -> Result<Self> {
        let n = prog.n;
        let check = |i: usize, j: usize| -> Result<()> {
            if i >= n || j >= n {
                Err(Error::InvalidArgument(format!("entry ({i},{j}) outside order {n}")))
            } else {
                Ok(())
            }
        };
        let slacks = prog.constraints.iter().filter(|c| c.relation != Relation::Eq).count();
        let l = prog.scalars + slacks;
        let m = prog.constraints.len();
        let mut c = DMatrix::zeros(n, n);
        for &(i, j, v) in &prog.objective_matrix {
            check(i, j)?;
            add_entry(&mut c, i, j, -v);
        }
        let mut c_lp = DVector::zeros(l);
        for &(k, v) in &prog.objective_scalars {
            c_lp[k] -= v;
        }
        let mut a_dense = Vec::with_capacity(m);
        let mut a_lp = DMatrix::zeros(m, l);
        let mut b = DVector::zeros(m);
        let mut slack = prog.scalars;
        for (row, con) in prog.constraints.iter().enumerate() {
            let mut a = DMatrix::zeros(n, n);
            for &(i, j, v) in &con.matrix {
                check(i, j)?;
                add_entry(&mut a, i, j, v);
            }
            for &(k, v) in &con.scalars {
                if k >= prog.scalars {
                    return Err(Error::InvalidArgument(format!("scalar {k} out of range")));
                }
                a_lp[(row, k)] += v;
            }
            match con.relation {
                Relation::Eq => {}
                Relation::Le => {
                    a_lp[(row, slack)] = 1.0;
                    slack += 1;
                }
                Relation::Ge => {
                    a_lp[(row, slack)] = -1.0;
                    slack += 1;
                }
            }
            b[row] = con.rhs;
            a_dense.push(a);
        }
        let a_sparse = a_dense.iter().map(sparse_of).collect();
        Ok(Standard { n, l, c, c_lp, a_dense, a_sparse, a_lp, b })
    }

    fn apply(&self, x: &DMatrix<f64>, xl: &DVector<f64>) -> DVector<f64> {
        let mut out = &self.a_lp * xl;
        for (i, a) in self.a_sparse.iter().enumerate() {
            out[i] += a.iter().map(|&(p, q, v)| v * x[(p, q)]).sum::<f64>();
        }
        out
    }

    fn apply_psd(&self, x: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.a_sparse.len(),
            self.a_sparse.iter().map(|a| a.iter().map(|&(p, q, v)| v * x[(p, q)]).sum::<f64>()),
        )
    }

    fn adjoint(&self, y: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>) {
        let mut s = DMatrix::zeros(self.n, self.n);
        for (i, a) in self.a_sparse.iter().enumerate() {
            for &(p, q, v) in a {
                s[(p, q)] += y[i] * v;
            }
        }
        (s, self.a_lp.transpose() * y)
    }
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Largest α with M + α·D ⪰ 0 (∞ when D ⪰ 0), given the Cholesky factor of M.
fn max_step_psd(chol: &Cholesky<f64, nalgebra::Dyn>, d: &DMatrix<f64>) -> f64 {
    if d.nrows() == 0 {
        return f64::INFINITY;
    }
    let l = chol.l();
    let linv = l.clone().try_inverse().unwrap_or_else(|| DMatrix::identity(l.nrows(), l.ncols()));
    let s = sym(&linv * d * linv.transpose());
    let lmin = s.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn max_step_lp(x: &DVector<f64>, d: &DVector<f64>) -> f64 {
    x.iter()
        .zip(d.iter())
        .filter(|(_, dv)| **dv < 0.0)
        .map(|(xv, dv)| -xv / dv)
        .fold(f64::INFINITY, f64::min)
}

struct Direction {
    dx: DMatrix<f64>,
    dxl: DVector<f64>,
    dy: DVector<f64>,
    dz: DMatrix<f64>,
    dzl: DVector<f64>,
}

pub fn solve_sdp(prog: &SdpProgram) -> Result<SdpSolution> {
    if prog.n > prog.order_cap {
        return Err(Error::TooLargeProgram { order: prog.n, cap: prog.order_cap });
    }
    let sf = Standard::build(prog)?;
    let (n, l, m) = (sf.n, sf.l, sf.b.len());
    let dim = (n + l) as f64;

    let norm_a = |i: usize| sf.a_dense[i].norm() + sf.a_lp.row(i).norm();
    let mut xi = 10f64.max((n as f64).sqrt());
    let mut eta = 10f64.max((n as f64).sqrt()).max(sf.c.norm() + sf.c_lp.norm());
    for i in 0..m {
        xi = xi.max((1.0 + sf.b[i].abs()) / (1.0 + norm_a(i)));
        eta = eta.max(norm_a(i));
    }
    let mut x = DMatrix::identity(n, n) * xi;
    let mut xl = DVector::from_element(l, xi);
    let mut z = DMatrix::identity(n, n) * eta;
    let mut zl = DVector::from_element(l, eta);
    let mut y = DVector::zeros(m);

    let b_scale = 1.0 + sf.b.norm();
    let c_scale = 1.0 + sf.c.norm() + sf.c_lp.norm();
    let mut last = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut acceptable: Option<SdpSolution> = None;
    let mut failure: Option<&'static str> = None;

    for iteration in 0..=120 {
        let rp = &sf.b - sf.apply(&x, &xl);
        let (aty, aty_lp) = sf.adjoint(&y);
        let rd = sym(&sf.c - &aty - &z);
        let rd_lp = &sf.c_lp - &aty_lp - &zl;
        let comp = inner(&x, &z) + xl.dot(&zl);
        let mu = comp / dim;
        let pobj = inner(&sf.c, &x) + sf.c_lp.dot(&xl);
        let dobj = sf.b.dot(&y);
        let gap = (pobj - dobj).abs();
        let pinf = rp.norm() / b_scale;
        let dinf = (rd.norm() + rd_lp.norm()) / c_scale;
        let rel_gap = gap / (1.0 + pobj.abs() + dobj.abs());
        last = (gap, pinf, dinf);

        if rel_gap <= 1e-8 && pinf <= 1e-8 && dinf <= 1e-8 {
            let sol = finish(prog, &x, &xl, &y, pobj, dobj, comp, pinf, dinf, iteration);
            if rel_gap <= 1e-11 && pinf <= 1e-11 && dinf <= 1e-11 {
                return Ok(sol);
            }
            acceptable = Some(sol);
        }
        if iteration == 120 {
            break;
        }
        if x.norm() > 1e13 || y.norm() > 1e13 {
            return Err(Error::Infeasible);
        }

        let Some(zchol) = Cholesky::new(z.clone()) else {
            failure = Some("dual iterate lost definiteness");
            break;
        };
        let zi = zchol.inverse();
        let xz_ratio = DVector::from_iterator(l, xl.iter().zip(zl.iter()).map(|(a, b)| a / b));

        // Schur complement M_ij = Tr(A_i Z⁻¹ A_j X) + Σ_k a_ik a_jk x_k / z_k
        let mut schur = DMatrix::zeros(m, m);
        for j in 0..m {
            let w = &zi * &sf.a_dense[j] * &x;
            for i in 0..m {
                schur[(i, j)] = sf.a_sparse[i].iter().map(|&(p, q, v)| v * w[(q, p)]).sum::<f64>();
            }
        }
        let scaled_lp = DMatrix::from_fn(m, l, |i, k| sf.a_lp[(i, k)] * xz_ratio[k]);
        schur += &scaled_lp * sf.a_lp.transpose();
        let schur = sym(schur);
        let solver = SchurSolver::new(schur);

        let a_zi = sf.apply_psd(&zi);
        let a_lp_zinv = &sf.a_lp * DVector::from_iterator(l, zl.iter().map(|v| 1.0 / v));
        let zi_rd_x = &zi * &rd * &x;
        let base = sf.apply_psd(&zi_rd_x) + &sf.a_lp * rd_lp.component_mul(&xz_ratio);

        let direction = |sigma_mu: f64, corr: Option<(&DMatrix<f64>, &DVector<f64>)>| -> Option<Direction> {
            let mut rhs = &sf.b - (&a_zi + &a_lp_zinv) * sigma_mu + &base;
            if let Some((cm, cl)) = corr {
                rhs += sf.apply_psd(cm) + &sf.a_lp * cl;
            }
            let dy = solver.solve(&rhs)?;
            let (atdy, atdy_lp) = sf.adjoint(&dy);
            let dz = sym(&rd - atdy);
            let dzl = &rd_lp - atdy_lp;
            let mut dx = -&x + &zi * sigma_mu - &zi * &dz * &x;
            let mut dxl = DVector::from_iterator(
                l,
                (0..l).map(|k| -xl[k] + sigma_mu / zl[k] - xz_ratio[k] * dzl[k]),
            );
            if let Some((cm, cl)) = corr {
                dx -= cm;
                dxl -= cl;
            }
            Some(Direction { dx: sym(dx), dxl, dy, dz, dzl })
        };

        let Some(xchol) = Cholesky::new(x.clone()) else {
            failure = Some("primal iterate lost definiteness");
            break;
        };
        let steps = |d: &Direction| -> (f64, f64) {
            let ap = max_step_psd(&xchol, &d.dx).min(max_step_lp(&xl, &d.dxl));
            let ad = max_step_psd(&zchol, &d.dz).min(max_step_lp(&zl, &d.dzl));
            (ap, ad)
        };

        let Some(pred) = direction(0.0, None) else {
            failure = Some("singular Schur complement");
            break;
        };
        let (ap, ad) = steps(&pred);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mu_aff = (inner(&(&x + &pred.dx * ap), &(&z + &pred.dz * ad))
            + (&xl + &pred.dxl * ap).dot(&(&zl + &pred.dzl * ad)))
            / dim;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        let corr_m = &zi * &pred.dz * &pred.dx;
        let corr_l = DVector::from_iterator(l, (0..l).map(|k| pred.dzl[k] * pred.dxl[k] / zl[k]));
        let Some(dir) = direction(sigma * mu, Some((&corr_m, &corr_l))) else {
            failure = Some("singular Schur complement");
            break;
        };
        let (ap, ad) = steps(&dir);
        let tau = if mu < 1e-6 { 0.99 } else { 0.95 };
        let ap = (tau * ap).min(1.0);
        let ad = (tau * ad).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            break;
        }
        x = sym(&x + &dir.dx * ap);
        xl += &dir.dxl * ap;
        y += &dir.dy * ad;
        z = sym(&z + &dir.dz * ad);
        zl += &dir.dzl * ad;
    }
    if let Some(sol) = acceptable {
        return Ok(sol);
    }
    let (gap, pinf, dinf) = last;
    let reason = failure.unwrap_or(if pinf > 1e-6 { "primal infeasibility did not close" } else if dinf > 1e-6 { "dual infeasibility did not close" } else { "duality gap did not close" });
    Err(Error::NumericalFailure { reason, gap: gap.max(pinf).max(dinf) })
}

struct SchurSolver {
    chol: Option<Cholesky<f64, nalgebra::Dyn>>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl SchurSolver {
    fn new(m: DMatrix<f64>) -> Self {
        let mut chol = Cholesky::new(m.clone());
        if chol.is_none() {
            let shift = 1e-14 * m.diagonal().amax().max(1e-300);
            chol = Cholesky::new(&m + DMatrix::identity(m.nrows(), m.ncols()) * shift);
        }
        SchurSolver { chol, lu: m.lu() }
    }

    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        let sol = match &self.chol {
            Some(ch) => ch.solve(rhs),
            None => self.lu.solve(rhs)?,
        };
        sol.iter().all(|v| v.is_finite()).then_some(sol)
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    prog: &SdpProgram,
    x: &DMatrix<f64>,
    xl: &DVector<f64>,
    y: &DVector<f64>,
    pobj: f64,
    dobj: f64,
    complementarity: f64,
    pinf: f64,
    dinf: f64,
    iterations: usize,
) -> SdpSolution {
    SdpSolution {
        x: x.clone(),
        scalars: xl.iter().take(prog.scalars).copied().collect(),
        duals: y.iter().copied().collect(),
        value: -pobj,
        dual_value: -dobj,
        gap: (pobj - dobj).abs(),
        primal_infeasibility: pinf,
        dual_infeasibility: dinf,
        complementarity,
        iterations,
    }
}
