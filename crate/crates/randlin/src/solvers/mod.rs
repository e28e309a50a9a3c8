//! Randomized solvers for linear systems, least squares, and linear
//! inequalities.
//!
//! Four algorithms, each emitting a per-iteration trace of exactly the
//! quantity its convergence theory contracts:
//!
//! * [`cd_psd`] — coordinate descent on a symmetric positive-semidefinite
//!   system `Ax = b`, coordinates drawn with probability `a_ii / tr A`;
//!   traces the objective gap of `f(x) = ½xᵀAx − bᵀx`.
//! * [`cd_lsq`] — coordinate descent on the least-squares objective
//!   `½‖Ax−b‖²` for a general rectangular system, columns drawn with
//!   probability `‖A_k‖²/‖A‖_F²`; maintains the residual explicitly so one
//!   iteration costs `O(m + n)`.
//! * [`kaczmarz`] — randomized row projection: each iterate is the orthogonal
//!   projection of the previous one onto the hyperplane of one equation, rows
//!   drawn with probability `‖a_k‖²/‖A‖_F²`.
//! * [`proj_inequalities`] — the same row projection scheme on a mixed
//!   system of inequalities and equations; inequality rows move the iterate
//!   only while violated.
//!
//! Stopping rules (checked every `trace_every` iterations, since the residual
//! norms cost `O(mn)`): `cd_psd` and `kaczmarz` stop on `‖Ax−b‖ ≤ tol`,
//! `cd_lsq` on the least-squares stationarity residual `‖Aᵀr‖ ≤ tol`, and
//! `proj_inequalities` on `‖e(Ax−b)‖ ≤ tol`.

mod coord;
mod project;

pub use coord::{cd_lsq, cd_psd, CdLsq, CdPsd};
pub use project::{kaczmarz, proj_inequalities, residual_map, Kaczmarz, ProjIneq};

use std::io::{self, Write};

use thiserror::Error;

use crate::linalg::{DenseMatrix, DenseVector, LinalgError};
use crate::sampling::SamplingError;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not positive semidefinite (min eigenvalue {0})")]
    NotPsd(f64),
    #[error("every diagonal entry is zero; no coordinate can be sampled")]
    ZeroDiagonal,
    #[error("matrix has no nonzero entries")]
    ZeroMatrix,
    #[error("row {0} is zero")]
    ZeroRow(usize),
    #[error("objective increased at iteration {iter}; system is likely inconsistent or indefinite")]
    Diverging { iter: usize },
    #[error("invalid solver configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

/// Constraint sense of one row of an [`InequalitySystem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Eq,
}

/// A linear system `Ax = b` (or, for rectangular `A`, the least-squares
/// problem `min ½‖Ax−b‖²`).
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub a: DenseMatrix,
    pub b: DenseVector,
}

impl LinearSystem {
    pub fn new(a: DenseMatrix, b: DenseVector) -> Result<Self, SolverError> {
        if b.len() != a.rows() {
            return Err(LinalgError::DimensionMismatch(format!(
                "rhs has length {}, matrix has {} rows",
                b.len(),
                a.rows()
            ))
            .into());
        }
        Ok(Self { a, b })
    }
}

/// A mixed system `a_iᵀx ≤ b_i (i ∈ I_≤)`, `a_iᵀx = b_i (i ∈ I_=)`.
///
/// Zero rows are rejected at construction: every row must define a genuine
/// hyperplane or halfspace.
#[derive(Debug, Clone)]
pub struct InequalitySystem {
    pub a: DenseMatrix,
    pub b: DenseVector,
    pub row_kinds: Vec<RowKind>,
}

impl InequalitySystem {
    pub fn new(
        a: DenseMatrix,
        b: DenseVector,
        row_kinds: Vec<RowKind>,
    ) -> Result<Self, SolverError> {
        if b.len() != a.rows() || row_kinds.len() != a.rows() {
            return Err(LinalgError::DimensionMismatch(format!(
                "matrix has {} rows, rhs {}, kinds {}",
                a.rows(),
                b.len(),
                row_kinds.len()
            ))
            .into());
        }
        if let Some(i) = (0..a.rows()).find(|i| a.row_sqnorm(*i) == 0.0) {
            return Err(SolverError::ZeroRow(i));
        }
        Ok(Self { a, b, row_kinds })
    }

    /// All-equality view of a linear system.
    pub fn all_equalities(sys: &LinearSystem) -> Result<Self, SolverError> {
        Self::new(
            sys.a.clone(),
            sys.b.clone(),
            vec![RowKind::Eq; sys.a.rows()],
        )
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn dimension(&self) -> usize {
        self.a.cols()
    }
}

/// Seed, iteration budget, stopping tolerance and trace cadence for one run.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub seed: u64,
    pub max_iters: usize,
    /// Stopping threshold on the traced residual; must be positive.
    pub tol: f64,
    /// Residuals are evaluated and recorded every this many iterations.
    pub trace_every: usize,
}

impl SolverConfig {
    pub fn new(seed: u64, max_iters: usize, tol: f64, trace_every: usize) -> Self {
        Self {
            seed,
            max_iters,
            tol,
            trace_every,
        }
    }

    pub(crate) fn validate(&self) -> Result<(), SolverError> {
        if !(self.tol > 0.0) {
            return Err(SolverError::BadConfig("tol must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(SolverError::BadConfig("max_iters must be at least 1".into()));
        }
        if self.trace_every == 0 {
            return Err(SolverError::BadConfig("trace_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// One recorded point of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    /// Index drawn for the step that produced this iterate; `None` for the
    /// initial record and for deterministic (averaged) schedules.
    pub chosen_index: Option<usize>,
    /// Objective gap δ(x) when a reference optimum is available, otherwise
    /// the raw objective value (solver-dependent; see the solver docs).
    pub objective_gap: Option<f64>,
    pub residual_norm: f64,
    /// Squared distance to a supplied witness/solution, when available.
    pub dist_sq_estimate: Option<f64>,
}

/// Iteration trace: records at the configured cadence, always including the
/// initial point and the final iterate.
#[derive(Debug, Clone, Default)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
    pub iters_run: usize,
    pub converged: bool,
}

impl IterationTrace {
    pub(crate) fn push(
        &mut self,
        iter: usize,
        chosen_index: Option<usize>,
        objective_gap: Option<f64>,
        residual_norm: f64,
        dist_sq_estimate: Option<f64>,
    ) {
        debug_assert!(
            self.records.last().is_none_or(|r| r.iter < iter),
            "trace iterations must increase strictly"
        );
        self.records.push(TraceRecord {
            iter,
            chosen_index,
            objective_gap,
            residual_norm,
            dist_sq_estimate,
        });
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }
}

/// Writes the CSV header `algorithm,trial,iter,chosen_index,metric_name,metric_value`.
pub fn write_trace_csv_header<W: Write>(w: &mut W) -> io::Result<()> {
    writeln!(w, "algorithm,trial,iter,chosen_index,metric_name,metric_value")
}

/// Appends one row per populated metric per trace record. Missing indices are
/// written as `-1`.
pub fn append_trace_csv<W: Write>(
    w: &mut W,
    algorithm: &str,
    trial: u64,
    trace: &IterationTrace,
) -> io::Result<()> {
    for rec in &trace.records {
        let idx: i64 = rec.chosen_index.map_or(-1, |i| i as i64);
        if let Some(g) = rec.objective_gap {
            writeln!(w, "{algorithm},{trial},{},{idx},objective_gap,{g}", rec.iter)?;
        }
        writeln!(
            w,
            "{algorithm},{trial},{},{idx},residual_norm,{}",
            rec.iter, rec.residual_norm
        )?;
        if let Some(d) = rec.dist_sq_estimate {
            writeln!(w, "{algorithm},{trial},{},{idx},dist_sq,{d}", rec.iter)?;
        }
    }
    Ok(())
}
