//! Binary hypothesis testing: sphere-packing-style threshold pairs from the
//! μ-profile, the Hoeffding exponent, codeword Chernoff distances and a
//! brute-force Neyman–Pearson oracle for classical pairs.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{CQChannel, DensityOperator};
use crate::divergence::{chernoff_of, LogLikelihood};
use crate::error::{Error, Result};
use crate::optim::scalar::{grid_then_golden, linspace};

/// Largest product alphabet the oracle will enumerate.
pub const PRODUCT_CAP: usize = 1_000_000;
const HOEFFDING_GRID: usize = 199;
const HOEFFDING_S_MAX: f64 = 0.995;

/// Lower bounds of which at least one error probability must exceed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SgbThresholds {
    pub bound_a: f64,
    pub bound_b: f64,
    pub s: f64,
}

/// Either P_e|A > bound_a or P_e|B > bound_b, for
/// bound_a = ⅛ exp[μ − sμ′ − s√(2μ″)], bound_b = ⅛ exp[μ + (1−s)μ′ − (1−s)√(2μ″)].
pub fn sgb_thresholds(a: &DensityOperator, b: &DensityOperator, s: f64) -> Result<SgbThresholds> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidArgument(format!("s = {s} must lie in (0, 1)")));
    }
    Ok(thresholds_of(&LogLikelihood::new(a, b)?, s))
}

fn thresholds_of(ll: &LogLikelihood, s: f64) -> SgbThresholds {
    let mu = ll.mu(s);
    let (d1, d2) = ll.derivatives(s);
    let root = (2.0 * d2).sqrt();
    SgbThresholds {
        bound_a: 0.125 * (mu - s * d1 - s * root).exp(),
        bound_b: 0.125 * (mu + (1.0 - s) * d1 - (1.0 - s) * root).exp(),
        s,
    }
}

/// The s in `s_grid` maximizing the smaller threshold. No optimality claim
/// beyond the grid.
pub fn best_sgb_thresholds(a: &DensityOperator, b: &DensityOperator, s_grid: &[f64]) -> Result<SgbThresholds> {
    if s_grid.iter().any(|&s| !(s > 0.0 && s < 1.0)) {
        return Err(Error::InvalidArgument("s-grid must lie in (0, 1)".into()));
    }
    let ll = LogLikelihood::new(a, b)?;
    s_grid
        .iter()
        .map(|&s| thresholds_of(&ll, s))
        .max_by(|x, y| x.bound_a.min(x.bound_b).total_cmp(&y.bound_a.min(y.bound_b)))
        .ok_or(Error::Empty { what: "s-grid" })
}

/// e(r) = sup over 0 ≤ s < 1 of (−sr − μ(s))/(1−s) for r ≥ −log ξ with
/// ξ = Tr B A⁰; ∞ below −log ξ or when the supports are orthogonal.
pub fn hoeffding_exponent(a: &DensityOperator, b: &DensityOperator, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::InvalidArgument(format!("r = {r} must be nonnegative")));
    }
    let ll = match LogLikelihood::new(a, b) {
        Ok(ll) => ll,
        Err(Error::DisjointSupports) => return Ok(f64::INFINITY),
        Err(e) => return Err(e),
    };
    Ok(hoeffding_of(&ll, r))
}

fn hoeffding_of(ll: &LogLikelihood, r: f64) -> f64 {
    // μ(1) = log ξ on the common support
    let floor = -ll.mu(1.0);
    if r < floor - 1e-12 {
        return f64::INFINITY;
    }
    let f = |s: f64| (-s * r - ll.mu(s)) / (1.0 - s);
    let grid = linspace(0.0, HOEFFDING_S_MAX, HOEFFDING_GRID);
    let (_, v) = grid_then_golden(&mut |s| -f(s), &grid, 1e-10);
    (-v).max(0.0)
}

/// Pair frequencies P_{m,m'}(x, x') of two codewords.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointComposition {
    #[serde(skip)]
    pub pmm: DMatrix<f64>,
    pub n: usize,
}

impl JointComposition {
    pub fn new(pmm: DMatrix<f64>, n: usize) -> Result<Self> {
        if pmm.nrows() != pmm.ncols() {
            return Err(Error::NotSquare { rows: pmm.nrows(), cols: pmm.ncols() });
        }
        for row in 0..pmm.nrows() {
            for col in 0..pmm.ncols() {
                let value = pmm[(row, col)];
                if !(value >= 0.0) {
                    return Err(Error::NegativeEntry { row, col, value });
                }
            }
        }
        let residual = pmm.sum() - 1.0;
        if residual.abs() > 1e-12 {
            return Err(Error::NotDistribution { residual });
        }
        if n == 0 {
            return Err(Error::InvalidArgument("block length must be positive".into()));
        }
        Ok(JointComposition { pmm, n })
    }

    pub fn from_codewords(xm: &[usize], xm2: &[usize], alphabet: usize) -> Result<Self> {
        if xm.len() != xm2.len() {
            return Err(Error::DimensionMismatch { what: "codeword length", expected: xm.len(), found: xm2.len() });
        }
        if xm.is_empty() {
            return Err(Error::Empty { what: "codeword" });
        }
        if let Some(&x) = xm.iter().chain(xm2).find(|&&x| x >= alphabet) {
            return Err(Error::InvalidArgument(format!("symbol {x} outside alphabet of {alphabet}")));
        }
        let n = xm.len();
        let mut pmm = DMatrix::<f64>::zeros(alphabet, alphabet);
        for (&x, &y) in xm.iter().zip(xm2) {
            pmm[(x, y)] += 1.0 / n as f64;
        }
        // renormalize away summation rounding
        let total = pmm.sum();
        Self::new(pmm / total, n)
    }

    pub fn alphabet(&self) -> usize {
        self.pmm.nrows()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CodewordChernoff {
    /// Per-symbol distance; ∞ when some weighted pair has orthogonal states.
    pub distance: f64,
    pub s_star: f64,
}

/// −min over s ∈ [0,1] of Σ P(x,x') μ_{x,x'}(s), one s shared by all pairs.
pub fn codeword_chernoff(channel: &CQChannel, comp: &JointComposition) -> Result<CodewordChernoff> {
    if comp.alphabet() != channel.inputs() {
        return Err(Error::DimensionMismatch { what: "composition alphabet", expected: channel.inputs(), found: comp.alphabet() });
    }
    let mut terms: Vec<(f64, LogLikelihood)> = Vec::new();
    for x in 0..comp.alphabet() {
        for y in 0..comp.alphabet() {
            let w = comp.pmm[(x, y)];
            if w == 0.0 || x == y {
                continue;
            }
            match LogLikelihood::new(channel.state(x), channel.state(y)) {
                Ok(ll) => terms.push((w, ll)),
                Err(Error::DisjointSupports) => return Ok(CodewordChernoff { distance: f64::INFINITY, s_star: 0.5 }),
                Err(e) => return Err(e),
            }
        }
    }
    if terms.is_empty() {
        return Ok(CodewordChernoff { distance: 0.0, s_star: 0.5 });
    }
    let c = chernoff_of(|s| terms.iter().map(|(w, ll)| w * ll.mu(s)).sum());
    Ok(CodewordChernoff { distance: c.distance.max(0.0), s_star: c.s_star })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairwiseBound {
    pub bound_m: f64,
    pub bound_m_prime: f64,
    pub chernoff: CodewordChernoff,
    pub lambda_min: f64,
}

/// Either P_e|m or P_e|m' exceeds ⅛ exp[−n(d_C + √(2/n) log λ_min⁻¹)], with
/// λ_min the smallest nonzero eigenvalue over all channel states.
pub fn pairwise_bound(channel: &CQChannel, comp: &JointComposition) -> Result<PairwiseBound> {
    let chernoff = codeword_chernoff(channel, comp)?;
    let lambda_min = channel.smallest_nonzero_eigenvalue();
    let n = comp.n as f64;
    let bound = 0.125 * (-n * (chernoff.distance + (2.0 / n).sqrt() * (1.0 / lambda_min).ln())).exp();
    Ok(PairwiseBound { bound_m: bound, bound_m_prime: bound, chernoff, lambda_min })
}

fn check_pair(u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch { what: "outcome alphabet", expected: u.len(), found: v.len() });
    }
    for (x, q) in [u, v].iter().enumerate() {
        if let Some(k) = q.iter().position(|p| !(*p >= 0.0)) {
            return Err(Error::NegativeEntry { row: x, col: k, value: q[k] });
        }
        let residual = q.iter().sum::<f64>() - 1.0;
        if residual.abs() > 1e-9 {
            return Err(Error::NotDistribution { residual });
        }
    }
    Ok(())
}

/// (P_e|U, P_e|V) for the likelihood-ratio tests that decide V on the k
/// outcomes of largest V/U, k = 0..=|support|.
pub fn np_frontier(u: &[f64], v: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_pair(u, v)?;
    let mut support: Vec<usize> = (0..u.len()).filter(|&k| u[k] > 0.0 || v[k] > 0.0).collect();
    // V/U descending; outcomes impossible under U come first
    let ratio = |k: usize| if u[k] > 0.0 { v[k] / u[k] } else { f64::INFINITY };
    support.sort_by(|&a, &b| ratio(b).total_cmp(&ratio(a)));
    let mut points = Vec::with_capacity(support.len() + 1);
    let (mut pe_u, mut hit_v) = (0.0, 0.0);
    points.push((0.0, 1.0));
    for &k in &support {
        pe_u += u[k];
        hit_v += v[k];
        points.push((pe_u.min(1.0), (1.0 - hit_v).max(0.0)));
    }
    Ok(points)
}

/// min over deterministic tests of η₀ P_e|U + η₁ P_e|V.
pub fn np_oracle(u: &[f64], v: &[f64], eta0: f64, eta1: f64) -> Result<f64> {
    if !(eta0 > 0.0 && eta1 > 0.0) {
        return Err(Error::InvalidArgument("weights must be positive".into()));
    }
    Ok(np_frontier(u, v)?
        .into_iter()
        .map(|(a, b)| eta0 * a + eta1 * b)
        .fold(f64::INFINITY, f64::min))
}

/// Lower convex envelope of the frontier evaluated at P_e|U = x: the least
/// P_e|V reachable with randomized tests.
pub fn frontier_envelope(points: &[(f64, f64)], x: f64) -> f64 {
    // frontier is convex and non-increasing already: LR ordering
    let x = x.clamp(0.0, 1.0);
    for w in points.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x <= x1 {
            if x1 - x0 <= 0.0 {
                return y1;
            }
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
    }
    points.last().map_or(1.0, |p| p.1)
}

/// Distribution of n i.i.d. draws, outcomes in lexicographic order.
pub fn product_distribution(q: &[f64], n: usize) -> Result<Vec<f64>> {
    let outcomes = (q.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if outcomes > PRODUCT_CAP as u128 {
        return Err(Error::TooLarge { outcomes, cap: PRODUCT_CAP });
    }
    let mut out = vec![1.0];
    for _ in 0..n {
        out = out.par_iter().flat_map_iter(|&p| q.iter().map(move |&x| p * x)).collect();
    }
    Ok(out)
}
