//! Dense matrices, vectors, and the spectral quantities entering rate bounds.
//!
//! Storage is plain row-major `f64`, sized for desk-scale experiments
//! (up to roughly 1000×1000). Row and column squared norms are cached eagerly
//! at construction: every sampling distribution used by the solvers is built
//! from one of the two caches, so they are always available.
//!
//! Singular values and symmetric eigenvalues are computed through full
//! decompositions (backed by `nalgebra`); iterative large-scale eigensolvers
//! and sparse storage are out of scope.

use std::ops::{Index, IndexMut};

use nalgebra::{DMatrix, DVector as NaVector};
use thiserror::Error;

/// Absolute entrywise tolerance below which a square matrix counts as
/// symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix has no nonzero entries")]
    ZeroMatrix,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix has no eigenvalue above the rank cutoff")]
    NoNonzeroEigenvalue,
    #[error("non-finite entry at flat index {0}")]
    NonFinite(usize),
    #[error("matrix dimensions must be positive (got {rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },
}

fn dim_mismatch<T>(msg: impl Into<String>) -> Result<T, LinalgError> {
    Err(LinalgError::DimensionMismatch(msg.into()))
}

// ---------------------------------------------------------------------------
// Vectors
// ---------------------------------------------------------------------------

/// A dense vector of finite reals.
///
/// Finiteness is checked in [`DenseVector::new`]; vectors produced internally
/// by arithmetic are not re-validated.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector {
    entries: Vec<f64>,
}

impl DenseVector {
    pub fn new(entries: Vec<f64>) -> Result<Self, LinalgError> {
        if let Some(k) = entries.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite(k));
        }
        Ok(Self { entries })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            entries: vec![0.0; n],
        }
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<f64>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.entries.iter()
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        assert_eq!(self.len(), other.len(), "dot: length mismatch");
        dot(&self.entries, &other.entries)
    }

    pub fn sqnorm(&self) -> f64 {
        dot(&self.entries, &self.entries)
    }

    pub fn norm(&self) -> f64 {
        self.sqnorm().sqrt()
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: f64, other: &DenseVector) {
        assert_eq!(self.len(), other.len(), "add_scaled: length mismatch");
        for (s, o) in self.entries.iter_mut().zip(other.entries.iter()) {
            *s += alpha * o;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for s in self.entries.iter_mut() {
            *s *= alpha;
        }
    }

    pub fn sub(&self, other: &DenseVector) -> DenseVector {
        assert_eq!(self.len(), other.len(), "sub: length mismatch");
        DenseVector::from_vec_unchecked(
            self.entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn add(&self, other: &DenseVector) -> DenseVector {
        assert_eq!(self.len(), other.len(), "add: length mismatch");
        DenseVector::from_vec_unchecked(
            self.entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub(crate) fn to_na(&self) -> NaVector<f64> {
        NaVector::from_column_slice(&self.entries)
    }

    pub(crate) fn from_na(v: &NaVector<f64>) -> Self {
        Self {
            entries: v.iter().copied().collect(),
        }
    }
}

impl Index<usize> for DenseVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

impl IndexMut<usize> for DenseVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.entries[i]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

/// A dense row-major matrix with eagerly cached row and column squared norms.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    row_sqnorms: Vec<f64>,
    col_sqnorms: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_row_major(
        rows: usize,
        cols: usize,
        entries: Vec<f64>,
    ) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::EmptyMatrix { rows, cols });
        }
        if entries.len() != rows * cols {
            return dim_mismatch(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                entries.len()
            ));
        }
        if let Some(k) = entries.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite(k));
        }
        let mut row_sqnorms = vec![0.0; rows];
        for (i, sq) in row_sqnorms.iter_mut().enumerate() {
            *sq = dot(&entries[i * cols..(i + 1) * cols], &entries[i * cols..(i + 1) * cols]);
        }
        // Column accumulation runs over row index ascending; the diagonal of
        // `gram()` reproduces these sums bit for bit.
        let mut col_sqnorms = vec![0.0; cols];
        for (j, sq) in col_sqnorms.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..rows {
                let v = entries[i * cols + j];
                acc += v * v;
            }
            *sq = acc;
        }
        Ok(Self {
            rows,
            cols,
            entries,
            row_sqnorms,
            col_sqnorms,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        if rows.is_empty() {
            return Err(LinalgError::EmptyMatrix { rows: 0, cols: 0 });
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return dim_mismatch("rows have unequal lengths");
        }
        let entries = rows.iter().flatten().copied().collect();
        Self::from_row_major(rows.len(), cols, entries)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self::from_row_major(n, n, entries).expect("identity is valid")
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut entries = vec![0.0; n * n];
        for (i, v) in d.iter().enumerate() {
            entries[i * n + i] = *v;
        }
        Self::from_row_major(n, n, entries).expect("diagonal is valid")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    /// Row `i` as a contiguous slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row_sqnorm(&self, i: usize) -> f64 {
        self.row_sqnorms[i]
    }

    pub fn col_sqnorm(&self, j: usize) -> f64 {
        self.col_sqnorms[j]
    }

    pub fn row_sqnorms(&self) -> &[f64] {
        &self.row_sqnorms
    }

    pub fn col_sqnorms(&self) -> &[f64] {
        &self.col_sqnorms
    }

    pub fn diag(&self) -> Vec<f64> {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self.get(i, i)).collect()
    }

    /// Trace; defined for square matrices only.
    pub fn trace(&self) -> Result<f64, LinalgError> {
        if self.rows != self.cols {
            return dim_mismatch("trace requires a square matrix");
        }
        Ok((0..self.rows).map(|i| self.get(i, i)).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|v| *v == 0.0)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut entries = vec![0.0; self.rows * self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                entries[j * self.rows + i] = self.get(i, j);
            }
        }
        DenseMatrix::from_row_major(self.cols, self.rows, entries).expect("transpose is valid")
    }

    /// The Gram matrix `AᵀA`. Inner sums run over the row index ascending, so
    /// the diagonal equals the cached column squared norms bit for bit.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.cols;
        let mut entries = vec![0.0; n * n];
        for k in 0..n {
            for l in 0..n {
                let mut acc = 0.0;
                for i in 0..self.rows {
                    acc += self.entries[i * n + k] * self.entries[i * n + l];
                }
                entries[k * n + l] = acc;
            }
        }
        DenseMatrix::from_row_major(n, n, entries).expect("gram is valid")
    }

    /// `A x`
    pub fn matvec(&self, x: &DenseVector) -> Result<DenseVector, LinalgError> {
        if x.len() != self.cols {
            return dim_mismatch(format!(
                "matvec: matrix is {}x{}, vector has length {}",
                self.rows,
                self.cols,
                x.len()
            ));
        }
        let out = (0..self.rows)
            .map(|i| dot(self.row(i), x.as_slice()))
            .collect();
        Ok(DenseVector::from_vec_unchecked(out))
    }

    /// `Aᵀ y`
    pub fn matvec_transpose(&self, y: &DenseVector) -> Result<DenseVector, LinalgError> {
        if y.len() != self.rows {
            return dim_mismatch(format!(
                "matvec_transpose: matrix is {}x{}, vector has length {}",
                self.rows,
                self.cols,
                y.len()
            ));
        }
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let yi = y[i];
            let row = self.row(i);
            for (o, a) in out.iter_mut().zip(row.iter()) {
                *o += yi * a;
            }
        }
        Ok(DenseVector::from_vec_unchecked(out))
    }

    pub(crate) fn to_na(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }
}

// ---------------------------------------------------------------------------
// Spectral quantities
// ---------------------------------------------------------------------------

/// Norms, extreme singular values and condition numbers of one matrix.
///
/// `rel_cond` is `‖A‖₂/σ_min` and `scaled_cond` is `‖A‖_F/σ_min`; both are
/// `+∞` unless the matrix has full column rank. `min_nonzero_eig` and `trace`
/// are populated for square symmetric input only.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    pub frob_norm: f64,
    pub spec_norm: f64,
    /// Smallest singular value above the rank cutoff
    /// `max(rows, cols) · ε · σ_max`.
    pub sigma_min_nonzero: f64,
    pub min_nonzero_eig: Option<f64>,
    pub trace: Option<f64>,
    pub rel_cond: f64,
    pub scaled_cond: f64,
    /// Number of singular values above the rank cutoff.
    pub rank: usize,
    pub full_column_rank: bool,
}

/// `√(Σ_ij a_ij²)`
pub fn frobenius_norm(a: &DenseMatrix) -> f64 {
    dot(a.entries(), a.entries()).sqrt()
}

/// Singular values, sorted descending.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    let svd = a.to_na().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).expect("singular values are finite"));
    sv
}

/// Numerical-rank cutoff: `max(rows, cols) · ε · σ_max`.
pub fn rank_cutoff(a: &DenseMatrix, sigma_max: f64) -> f64 {
    a.rows().max(a.cols()) as f64 * f64::EPSILON * sigma_max
}

/// Full spectral summary via a singular value decomposition.
pub fn spectral_summary(a: &DenseMatrix) -> Result<SpectralSummary, LinalgError> {
    if a.is_zero() {
        return Err(LinalgError::ZeroMatrix);
    }
    let sv = singular_values(a);
    let sigma_max = sv[0];
    let cutoff = rank_cutoff(a, sigma_max);
    let rank = sv.iter().filter(|s| **s > cutoff).count();
    let sigma_min_nonzero = sv
        .iter()
        .rev()
        .find(|s| **s > cutoff)
        .copied()
        .expect("a nonzero matrix has a nonzero singular value");
    let full_column_rank = rank == a.cols() && a.rows() >= a.cols();
    let (rel_cond, scaled_cond) = if full_column_rank {
        (
            sigma_max / sigma_min_nonzero,
            frobenius_norm(a) / sigma_min_nonzero,
        )
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    let square = a.rows() == a.cols();
    let trace = if square { Some(a.trace()?) } else { None };
    let min_nonzero_eig = if square && a.is_symmetric(SYMMETRY_TOL) {
        min_nonzero_eigenvalue(a).ok()
    } else {
        None
    };
    Ok(SpectralSummary {
        frob_norm: frobenius_norm(a),
        spec_norm: sigma_max,
        sigma_min_nonzero,
        min_nonzero_eig,
        trace,
        rel_cond,
        scaled_cond,
        rank,
        full_column_rank,
    })
}

/// Smallest eigenvalue above the rank cutoff of a square symmetric matrix.
///
/// For positive-semidefinite input this is the smallest nonzero eigenvalue.
pub fn min_nonzero_eigenvalue(a: &DenseMatrix) -> Result<f64, LinalgError> {
    if a.rows() != a.cols() || !a.is_symmetric(SYMMETRY_TOL) {
        return Err(LinalgError::NotSymmetric);
    }
    if a.is_zero() {
        return Err(LinalgError::ZeroMatrix);
    }
    let eig = a.to_na().symmetric_eigen();
    let max_abs = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = a.rows() as f64 * f64::EPSILON * max_abs;
    eig.eigenvalues
        .iter()
        .filter(|l| **l > cutoff)
        .fold(None, |m: Option<f64>, l| Some(m.map_or(*l, |x| x.min(*l))))
        .ok_or(LinalgError::NoNonzeroEigenvalue)
}

/// All eigenvalues of a square symmetric matrix, sorted ascending.
pub fn symmetric_eigenvalues(a: &DenseMatrix) -> Result<Vec<f64>, LinalgError> {
    if a.rows() != a.cols() || !a.is_symmetric(SYMMETRY_TOL) {
        return Err(LinalgError::NotSymmetric);
    }
    let eig = a.to_na().symmetric_eigen();
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    Ok(ev)
}

/// The energy inner product `xᵀAx` for square `A`.
pub fn energy_sqnorm(a: &DenseMatrix, x: &DenseVector) -> Result<f64, LinalgError> {
    if a.rows() != a.cols() {
        return dim_mismatch("energy_sqnorm requires a square matrix");
    }
    let ax = a.matvec(x)?;
    Ok(x.dot(&ax))
}

/// The residual `b − Ax`.
pub fn residual(
    a: &DenseMatrix,
    x: &DenseVector,
    b: &DenseVector,
) -> Result<DenseVector, LinalgError> {
    if b.len() != a.rows() {
        return dim_mismatch(format!(
            "residual: matrix is {}x{}, rhs has length {}",
            a.rows(),
            a.cols(),
            b.len()
        ));
    }
    let ax = a.matvec(x)?;
    Ok(b.sub(&ax))
}

/// Minimum-norm least-squares solution `A⁺b` via SVD, together with the
/// optimal objective value `½‖Ax̂−b‖²`. Used as the reference oracle by the
/// experiment harness.
pub fn pseudoinverse_solve(
    a: &DenseMatrix,
    b: &DenseVector,
) -> Result<(DenseVector, f64), LinalgError> {
    if b.len() != a.rows() {
        return dim_mismatch("pseudoinverse_solve: rhs length must equal row count");
    }
    if a.is_zero() {
        return Err(LinalgError::ZeroMatrix);
    }
    let svd = a.to_na().svd(true, true);
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, v| m.max(*v));
    let cutoff = rank_cutoff(a, sigma_max);
    let x = svd
        .solve(&b.to_na(), cutoff)
        .map_err(|e| LinalgError::DimensionMismatch(e.to_string()))?;
    let xhat = DenseVector::from_na(&x);
    let r = residual(a, &xhat, b)?;
    Ok((xhat, 0.5 * r.sqnorm()))
}
