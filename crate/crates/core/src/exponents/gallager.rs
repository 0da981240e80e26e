use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;

use super::rates::r_infinity;
use super::{sup_over_grid, Certificate, ExponentReport, RHO_CAP};
use crate::channel::{CQChannel, ProbabilityVector};
use crate::error::{Error, Result};
use crate::linalg::{log_sum_exp, CMatrix, Spectrum};
use crate::optim::scalar::linspace;
use crate::optim::simplex::{simplex_minimize, SimplexOptions};

/// Powers S_x^{1/(1+ρ)} for one ρ. Diagonal channels keep only the diagonals.
enum Kernel {
    Diagonal(Vec<Vec<f64>>),
    Operators(Vec<CMatrix>),
}

/// log Tr A^{1+ρ} with A = Σ P(x) S_x^{1/(1+ρ)}, as a function of P.
pub(crate) struct LogTrace {
    rho: f64,
    kernel: Kernel,
}

/// Diagonals of the states when every state is exactly diagonal.
pub(crate) fn diagonals(channel: &CQChannel) -> Option<Vec<Vec<f64>>> {
    let d = channel.dim();
    let diagonal = channel.states().iter().all(|s| {
        let m = s.matrix();
        (0..d).all(|r| (0..d).all(|c| r == c || m[(r, c)].norm() == 0.0))
    });
    diagonal.then(|| {
        channel
            .states()
            .iter()
            .map(|s| (0..d).map(|i| s.matrix()[(i, i)].re.max(0.0)).collect())
            .collect()
    })
}

impl LogTrace {
    pub(crate) fn new(channel: &CQChannel, diag: Option<&[Vec<f64>]>, rho: f64) -> Self {
        let alpha = 1.0 / (1.0 + rho);
        let kernel = match diag {
            Some(rows) => Kernel::Diagonal(
                rows.iter()
                    .map(|w| w.iter().map(|&v| if v > 0.0 { v.powf(alpha) } else { 0.0 }).collect())
                    .collect(),
            ),
            None => Kernel::Operators(
                channel
                    .states()
                    .iter()
                    .map(|s| s.power(alpha).expect("positive exponent"))
                    .collect(),
            ),
        };
        LogTrace { rho, kernel }
    }

    pub(crate) fn is_diagonal(&self) -> bool {
        matches!(self.kernel, Kernel::Diagonal(_))
    }

    pub(crate) fn value(&self, p: &[f64]) -> f64 {
        self.evaluate(p, false).0
    }

    /// Value and gradient; ∂/∂P(x) = (1+ρ) Tr(S_x^α A^ρ) / Tr A^{1+ρ}.
    pub(crate) fn evaluate(&self, p: &[f64], gradient: bool) -> (f64, Vec<f64>) {
        let q = 1.0 + self.rho;
        match &self.kernel {
            Kernel::Diagonal(rows) => {
                let dim = rows[0].len();
                let a: Vec<f64> = (0..dim).map(|y| rows.iter().zip(p).map(|(w, px)| px * w[y]).sum()).collect();
                let logs: Vec<f64> = a.iter().map(|&v| if v > 0.0 { q * v.ln() } else { f64::NEG_INFINITY }).collect();
                let lt = log_sum_exp(logs.iter().copied());
                if !gradient {
                    return (lt, Vec::new());
                }
                // w_y / a_y with w = softmax(q log a)
                let scale: Vec<f64> = logs
                    .iter()
                    .zip(&a)
                    .map(|(&l, &v)| if v > 0.0 { (l - lt).exp() / v } else { 0.0 })
                    .collect();
                let g = rows.iter().map(|w| q * w.iter().zip(&scale).map(|(a, b)| a * b).sum::<f64>()).collect();
                (lt, g)
            }
            Kernel::Operators(ops) => {
                let d = ops[0].nrows();
                let a = ops
                    .iter()
                    .zip(p)
                    .fold(CMatrix::zeros(d, d), |acc, (s, &px)| if px > 0.0 { acc + s.scale(px) } else { acc });
                let spec = Spectrum::of(&a);
                let logs: Vec<f64> = spec
                    .values
                    .iter()
                    .map(|&v| if v > 0.0 { q * v.ln() } else { f64::NEG_INFINITY })
                    .collect();
                let lt = log_sum_exp(logs.iter().copied());
                if !gradient {
                    return (lt, Vec::new());
                }
                let weights: Vec<f64> = logs
                    .iter()
                    .zip(&spec.values)
                    .map(|(&l, &v)| if v > 0.0 { (l - lt).exp() / v } else { 0.0 })
                    .collect();
                let b = spec.map_values(&weights);
                let g = ops.iter().map(|s| q * crate::linalg::trace_product_re(s, &b)).collect();
                (lt, g)
            }
        }
    }
}

/// E₀(ρ, P) and its maximizations for one channel, with memoized E₀(ρ).
pub struct Gallager<'a> {
    channel: &'a CQChannel,
    diag: Option<Vec<Vec<f64>>>,
    memo: Mutex<HashMap<u64, ExponentReport>>,
    r_inf: OnceLock<Result<f64>>,
}

impl<'a> Gallager<'a> {
    pub fn new(channel: &'a CQChannel) -> Self {
        Gallager { channel, diag: diagonals(channel), memo: Mutex::new(HashMap::new()), r_inf: OnceLock::new() }
    }

    pub fn channel(&self) -> &CQChannel {
        self.channel
    }

    fn log_trace(&self, rho: f64) -> LogTrace {
        LogTrace::new(self.channel, self.diag.as_deref(), rho)
    }

    /// −log Tr (Σ P(x) S_x^{1/(1+ρ)})^{1+ρ}.
    pub fn e0(&self, rho: f64, p: &[f64]) -> f64 {
        if rho == 0.0 {
            return 0.0;
        }
        (-self.log_trace(rho).value(p)).max(0.0)
    }

    /// max over P of E₀(ρ, P), certified by the relative KKT residual of
    /// Tr(S_x^α A^ρ) ≥ Tr A^{1+ρ}.
    pub fn e0_max(&self, rho: f64) -> Result<ExponentReport> {
        if !(rho >= 0.0) {
            return Err(Error::InvalidArgument(format!("rho = {rho} must be nonnegative")));
        }
        let key = rho.to_bits();
        if let Some(r) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(r.clone());
        }
        let n = self.channel.inputs();
        let report = if rho == 0.0 {
            ExponentReport {
                value: 0.0,
                optimizer_p: ProbabilityVector::uniform(n),
                parameter: 0.0,
                certificate: Certificate::Kkt { residual: 0.0 },
            }
        } else {
            let lt = self.log_trace(rho);
            // quasi-convex objective; commuting channels need one start
            let opts = if lt.is_diagonal() { SimplexOptions::single() } else { SimplexOptions::default() };
            let r = simplex_minimize(|p: &[f64]| lt.evaluate(p, true), n, opts)?;
            ExponentReport {
                value: (-r.value).max(0.0),
                optimizer_p: r.p_star,
                parameter: rho,
                certificate: Certificate::Kkt { residual: r.kkt_residual },
            }
        };
        self.memo.lock().expect("memo lock").insert(key, report.clone());
        Ok(report)
    }

    pub fn r_infinity(&self) -> Result<f64> {
        self.r_inf
            .get_or_init(|| r_infinity(self.channel).map(|r| r.value))
            .clone()
    }

    /// E₀(ρ)/ρ.
    pub fn r_rho(&self, rho: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::InvalidArgument(format!("rho = {rho} must be positive")));
        }
        Ok(self.e0_max(rho)?.value / rho)
    }

    /// sup over ρ ≥ 0 of E₀(ρ) − ρR; infinite below R_∞.
    pub fn esp(&self, r: f64) -> Result<ExponentReport> {
        check_rate(r)?;
        let r_inf = self.r_infinity()?;
        if r < r_inf - 1e-10 {
            return Ok(ExponentReport::infinite(self.channel.inputs()));
        }
        // search in u = log(1 + ρ)
        let grid = linspace(0.0, RHO_CAP.ln_1p(), ESP_GRID);
        self.sup(&grid, |u: f64| u.exp_m1(), r)
    }

    /// max over ρ ∈ [0, 1] of E₀(ρ) − ρR.
    pub fn er(&self, r: f64) -> Result<ExponentReport> {
        check_rate(r)?;
        self.sup(&linspace(0.0, 1.0, 21), |rho: f64| rho, r)
    }

    fn sup(&self, grid: &[f64], to_rho: impl Fn(f64) -> f64 + Sync, r: f64) -> Result<ExponentReport> {
        grid.par_iter().map(|&u| self.e0_max(to_rho(u)).map(|_| ())).collect::<Result<()>>()?;
        let (u, _) = sup_over_grid(grid, |u| Ok(self.e0_max(to_rho(u))?.value - to_rho(u) * r))?;
        let rho = to_rho(u);
        let at = self.e0_max(rho)?;
        Ok(ExponentReport { value: (at.value - rho * r).max(0.0), parameter: rho, ..at })
    }

    /// Evaluates E₀(ρ) on the union of the sphere-packing and random-coding grids.
    pub fn warm(&self) -> Result<()> {
        let mut rhos: Vec<f64> = linspace(0.0, RHO_CAP.ln_1p(), ESP_GRID).into_iter().map(f64::exp_m1).collect();
        rhos.extend(linspace(0.0, 1.0, 21));
        rhos.par_iter().map(|&rho| self.e0_max(rho).map(|_| ())).collect()
    }
}

const ESP_GRID: usize = 48;

fn check_rate(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("rate {r} must be positive and finite")))
    }
}

pub fn e0(channel: &CQChannel, rho: f64, p: &ProbabilityVector) -> f64 {
    Gallager::new(channel).e0(rho, p.as_slice())
}

pub fn e0_max(channel: &CQChannel, rho: f64) -> Result<ExponentReport> {
    Gallager::new(channel).e0_max(rho)
}

pub fn esp(channel: &CQChannel, r: f64) -> Result<ExponentReport> {
    Gallager::new(channel).esp(r)
}

pub fn er(channel: &CQChannel, r: f64) -> Result<ExponentReport> {
    Gallager::new(channel).er(r)
}

pub fn r_rho(channel: &CQChannel, rho: f64) -> Result<f64> {
    Gallager::new(channel).r_rho(rho)
}
