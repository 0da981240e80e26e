//! Channel and operator data model.
//!
//! A classical channel is a row-stochastic matrix; a classical-quantum channel
//! is a list of density operators on a common space. Density operators carry
//! their eigendecomposition, with eigenvalues at or below `SUPPORT_TOL * λ_max`
//! clamped to exactly zero so that supports are well defined.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Spectrum, SUPPORT_TOL};

const HERMITIAN_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const STOCHASTIC_TOL: f64 = 1e-12;
/// Squared overlaps below this are treated as exact orthogonality.
pub(crate) const OVERLAP_FLOOR: f64 = 1e-20;

/// A point of the probability simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Empty { what: "probability vector" });
        }
        if let Some((i, &v)) = p.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::NegativeEntry { row: 0, col: i, value: v });
        }
        let residual = p.iter().sum::<f64>() - 1.0;
        if residual.abs() > STOCHASTIC_TOL {
            return Err(Error::NotDistribution { residual });
        }
        Ok(ProbabilityVector(p))
    }

    pub fn uniform(n: usize) -> Self {
        ProbabilityVector(vec![1.0 / n as f64; n])
    }

    pub fn vertex(n: usize, k: usize) -> Self {
        let mut p = vec![0.0; n];
        p[k] = 1.0;
        ProbabilityVector(p)
    }

    /// Clamps negatives to zero and rescales. Panics on an all-zero input.
    pub fn normalized(mut p: Vec<f64>) -> Self {
        for v in p.iter_mut() {
            if !(*v > 0.0) {
                *v = 0.0;
            }
        }
        let total: f64 = p.iter().sum();
        assert!(total > 0.0, "cannot normalize a zero vector");
        p.iter_mut().for_each(|v| *v /= total);
        ProbabilityVector(p)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for ProbabilityVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ProbabilityVector::new(v)
    }
}

impl From<ProbabilityVector> for Vec<f64> {
    fn from(p: ProbabilityVector) -> Vec<f64> {
        p.0
    }
}

/// Row-stochastic transition matrix `W[x][y]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalChannel {
    w: DMatrix<f64>,
}

impl ClassicalChannel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty { what: "channel" });
        }
        let cols = rows[0].len();
        if cols == 0 {
            return Err(Error::Empty { what: "output alphabet" });
        }
        for (x, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    what: "row length",
                    expected: cols,
                    found: row.len(),
                });
            }
            if let Some((y, &v)) = row.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
                return Err(Error::NegativeEntry { row: x, col: y, value: v });
            }
            let residual = row.iter().sum::<f64>() - 1.0;
            if residual.abs() > STOCHASTIC_TOL {
                return Err(Error::RowNotStochastic { row: x, residual });
            }
        }
        let w = DMatrix::from_fn(rows.len(), cols, |x, y| rows[x][y]);
        Ok(ClassicalChannel { w })
    }

    pub fn bsc(p: f64) -> Self {
        ClassicalChannel::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]]).expect("valid BSC")
    }

    pub fn noiseless(n: usize) -> Self {
        let rows = (0..n)
            .map(|x| (0..n).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
            .collect();
        ClassicalChannel::new(rows).expect("valid identity channel")
    }

    /// Input x reaches outputs x and x+1 (mod n), with probabilities 1−ε and ε.
    pub fn noisy_typewriter(n: usize, eps: f64) -> Self {
        let rows = (0..n)
            .map(|x| {
                let mut row = vec![0.0; n];
                row[x] += 1.0 - eps;
                row[(x + 1) % n] += eps;
                row
            })
            .collect();
        ClassicalChannel::new(rows).expect("valid typewriter channel")
    }

    pub fn inputs(&self) -> usize {
        self.w.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.w.ncols()
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.w[(x, y)]
    }

    pub fn row(&self, x: usize) -> Vec<f64> {
        self.w.row(x).iter().copied().collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.inputs()).map(|x| self.row(x)).collect()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }
}

/// A validated density operator with its cached, support-clamped spectrum.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    matrix: CMatrix,
    spectrum: Spectrum,
}

impl Serialize for DensityOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        linalg::MatrixJson::from(&self.matrix).serialize(s)
    }
}

impl PartialEq for DensityOperator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

/// Checks the density-operator invariants and returns the symmetrized operator.
pub fn validate_density(m: &CMatrix) -> Result<DensityOperator> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.nrows() == 0 {
        return Err(Error::Empty { what: "density operator" });
    }
    let residual = linalg::hermitian_defect(m);
    if !(residual <= HERMITIAN_TOL) {
        return Err(Error::NotHermitian { residual });
    }
    let h = linalg::hermitian_part(m);
    let spectrum = Spectrum::of(&h);
    let min_eigenvalue = spectrum.values[0];
    if min_eigenvalue < -PSD_TOL {
        return Err(Error::NotPsd { min_eigenvalue });
    }
    let residual = linalg::trace_re(&h) - 1.0;
    if residual.abs() > TRACE_TOL {
        return Err(Error::TraceNotOne { residual: residual.abs() });
    }
    Ok(DensityOperator::from_parts(h, spectrum))
}

impl DensityOperator {
    fn from_parts(matrix: CMatrix, mut spectrum: Spectrum) -> Self {
        let cut = SUPPORT_TOL * spectrum.max();
        for v in spectrum.values.iter_mut() {
            if *v <= cut {
                *v = 0.0;
            }
        }
        DensityOperator { matrix, spectrum }
    }

    /// Builds from a matrix already known to be a density operator.
    pub(crate) fn trusted(matrix: CMatrix) -> Self {
        let h = linalg::hermitian_part(&matrix);
        let spectrum = Spectrum::of(&h);
        DensityOperator::from_parts(h, spectrum)
    }

    pub fn diagonal(p: &[f64]) -> Result<Self> {
        let n = p.len();
        let m = CMatrix::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(p[r], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        validate_density(&m)
    }

    /// |ψ⟩⟨ψ| for the normalized input vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::Empty { what: "state vector" });
        }
        let v = DVector::from_iterator(psi.len(), psi.iter().map(|z| z / norm));
        Ok(DensityOperator::trusted(&v * v.adjoint()))
    }

    pub fn pure_real(psi: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = psi.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        DensityOperator::pure(&c)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// Eigenvalues ascending, with sub-threshold values set to zero.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.values
    }

    pub fn rank(&self) -> usize {
        self.spectrum.values.iter().filter(|&&v| v > 0.0).count()
    }

    pub fn is_pure(&self) -> bool {
        self.rank() == 1
    }

    pub fn smallest_nonzero_eigenvalue(&self) -> f64 {
        self.spectrum
            .values
            .iter()
            .copied()
            .find(|&v| v > 0.0)
            .unwrap_or(0.0)
    }

    pub fn support_projector(&self) -> CMatrix {
        self.spectrum.map(|v| if v > 0.0 { 1.0 } else { 0.0 })
    }

    /// S^a with 0^a := 0 on the kernel for every a ≥ 0.
    pub fn power(&self, a: f64) -> Result<CMatrix> {
        if a < 0.0 && self.rank() < self.dim() {
            return Err(Error::NegativePowerOfSingular { exponent: a });
        }
        Ok(self.spectrum.map(|v| if v > 0.0 { v.powf(a) } else { 0.0 }))
    }

    pub fn sqrt(&self) -> CMatrix {
        self.spectrum.map(|v| if v > 0.0 { v.sqrt() } else { 0.0 })
    }

    pub fn commutes_with(&self, other: &DensityOperator, tol: f64) -> bool {
        let ab = &self.matrix * &other.matrix;
        let ba = &other.matrix * &self.matrix;
        linalg::max_abs_diff(&ab, &ba) <= tol
    }
}

pub fn support_projector(s: &DensityOperator) -> CMatrix {
    s.support_projector()
}

pub fn fractional_power(s: &DensityOperator, a: f64) -> Result<CMatrix> {
    s.power(a)
}

/// Input states of a classical-quantum channel.
#[derive(Clone, Debug, PartialEq)]
pub struct CQChannel {
    states: Vec<DensityOperator>,
    pure: bool,
    commuting: bool,
}

impl CQChannel {
    pub fn new(states: Vec<DensityOperator>) -> Result<Self> {
        let first = states.first().ok_or(Error::Empty { what: "channel" })?;
        let d = first.dim();
        for s in &states {
            if s.dim() != d {
                return Err(Error::DimensionMismatch {
                    what: "state dimension",
                    expected: d,
                    found: s.dim(),
                });
            }
        }
        let pure = states.iter().all(DensityOperator::is_pure);
        let commuting = states
            .iter()
            .enumerate()
            .all(|(i, a)| states[i + 1..].iter().all(|b| a.commutes_with(b, 1e-12)));
        Ok(CQChannel { states, pure, commuting })
    }

    pub fn from_pure_vectors(vectors: &[Vec<Complex64>]) -> Result<Self> {
        let states = vectors
            .iter()
            .map(|v| DensityOperator::pure(v))
            .collect::<Result<Vec<_>>>()?;
        CQChannel::new(states)
    }

    pub fn from_real_vectors(vectors: &[Vec<f64>]) -> Result<Self> {
        let states = vectors
            .iter()
            .map(|v| DensityOperator::pure_real(v))
            .collect::<Result<Vec<_>>>()?;
        CQChannel::new(states)
    }

    pub fn inputs(&self) -> usize {
        self.states.len()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn state(&self, x: usize) -> &DensityOperator {
        &self.states[x]
    }

    pub fn is_pure(&self) -> bool {
        self.pure
    }

    /// True when all states pairwise commute, i.e. the channel is classical.
    pub fn is_commuting(&self) -> bool {
        self.commuting
    }

    /// Smallest nonzero eigenvalue over all states.
    pub fn smallest_nonzero_eigenvalue(&self) -> f64 {
        self.states
            .iter()
            .map(DensityOperator::smallest_nonzero_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }
}

/// The pure-state channel with amplitudes √W_x(y).
pub fn pure_state_lift(w: &ClassicalChannel) -> CQChannel {
    let vectors: Vec<Vec<f64>> = (0..w.inputs())
        .map(|x| w.row(x).iter().map(|p| p.sqrt()).collect())
        .collect();
    CQChannel::from_real_vectors(&vectors).expect("rows of a stochastic matrix are nonzero")
}

/// The commuting channel with S_x = diag(W_x).
pub fn classical_embed(w: &ClassicalChannel) -> CQChannel {
    let states = (0..w.inputs())
        .map(|x| {
            let row = w.row(x);
            let d = row.len();
            DensityOperator::trusted(CMatrix::from_fn(d, d, |r, c| {
                Complex64::new(if r == c { row[r] } else { 0.0 }, 0.0)
            }))
        })
        .collect();
    CQChannel::new(states).expect("embedded states share a dimension")
}

/// Two distributions over index pairs (i, j), flattened as `i * d + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalPair {
    pub q0: Vec<f64>,
    pub q1: Vec<f64>,
}

impl ClassicalPair {
    /// Indices where both distributions are positive.
    pub fn common_support(&self) -> Vec<usize> {
        (0..self.q0.len())
            .filter(|&k| self.q0[k] > 0.0 && self.q1[k] > 0.0)
            .collect()
    }
}

/// Q0(i,j) = α_i |⟨a_i|b_j⟩|², Q1(i,j) = β_j |⟨a_i|b_j⟩|².
pub fn ns_mapping(a: &DensityOperator, b: &DensityOperator) -> Result<ClassicalPair> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            what: "operator dimension",
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let d = a.dim();
    let sa = a.spectrum();
    let sb = b.spectrum();
    let overlaps = sa.vectors.adjoint() * &sb.vectors;
    let mut q0 = vec![0.0; d * d];
    let mut q1 = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let o = overlaps[(i, j)].norm_sqr();
            if o <= OVERLAP_FLOOR {
                continue;
            }
            q0[i * d + j] = sa.values[i] * o;
            q1[i * d + j] = sb.values[j] * o;
        }
    }
    Ok(ClassicalPair { q0, q1 })
}

/// Serialized form of a channel file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum ChannelFile {
    Classical {
        #[serde(rename = "W")]
        w: Vec<Vec<f64>>,
    },
    Cq {
        dim: usize,
        states: Vec<StateFile>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct StateFile {
    re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Vec<Vec<f64>>>,
}

/// Either kind of channel, as read from or written to the JSON channel format.
#[derive(Clone, Debug, PartialEq)]
pub enum Channel {
    Classical(ClassicalChannel),
    Quantum(CQChannel),
}

impl Channel {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ChannelFile =
            serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
        match file {
            ChannelFile::Classical { w } => Ok(Channel::Classical(ClassicalChannel::new(w)?)),
            ChannelFile::Cq { dim, states } => {
                let mut ops = Vec::with_capacity(states.len());
                for (index, st) in states.iter().enumerate() {
                    let m = state_matrix(st, dim)
                        .and_then(|m| validate_density(&m))
                        .map_err(|e| Error::InState { index, source: Box::new(e) })?;
                    ops.push(m);
                }
                Ok(Channel::Quantum(CQChannel::new(ops)?))
            }
        }
    }

    pub fn to_json(&self) -> String {
        let file = match self {
            Channel::Classical(w) => ChannelFile::Classical { w: w.rows() },
            Channel::Quantum(ch) => ChannelFile::Cq {
                dim: ch.dim(),
                states: ch
                    .states()
                    .iter()
                    .map(|s| {
                        let m = s.matrix();
                        let d = m.nrows();
                        let grid = |f: &dyn Fn(Complex64) -> f64| {
                            (0..d).map(|r| (0..d).map(|c| f(m[(r, c)])).collect()).collect()
                        };
                        let im: Vec<Vec<f64>> = grid(&|z| z.im);
                        let any_im = im.iter().flatten().any(|&v| v != 0.0);
                        StateFile { re: grid(&|z| z.re), im: any_im.then_some(im) }
                    })
                    .collect(),
            },
        };
        serde_json::to_string_pretty(&file).expect("channel serializes")
    }

    /// The classical-quantum view; classical channels are embedded diagonally.
    pub fn to_cq(&self) -> CQChannel {
        match self {
            Channel::Classical(w) => classical_embed(w),
            Channel::Quantum(ch) => ch.clone(),
        }
    }

    pub fn inputs(&self) -> usize {
        match self {
            Channel::Classical(w) => w.inputs(),
            Channel::Quantum(ch) => ch.inputs(),
        }
    }
}

fn state_matrix(st: &StateFile, dim: usize) -> Result<CMatrix> {
    let check = |rows: &Vec<Vec<f64>>| -> Result<()> {
        if rows.len() != dim {
            return Err(Error::DimensionMismatch { what: "row count", expected: dim, found: rows.len() });
        }
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch { what: "row length", expected: dim, found: r.len() });
            }
        }
        Ok(())
    };
    check(&st.re)?;
    if let Some(im) = &st.im {
        check(im)?;
    }
    Ok(CMatrix::from_fn(dim, dim, |r, c| {
        Complex64::new(st.re[r][c], st.im.as_ref().map_or(0.0, |im| im[r][c]))
    }))
}
