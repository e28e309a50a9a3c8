//! Every constant that appears in a convergence-rate bound: condition
//! numbers, Hoffman error-bound constants, the distance-to-infeasibility
//! rate, and metric-regularity rates, packaged as [`RateReport`]s.
//!
//! A report carries the theoretical per-iteration contraction factor of one
//! theorem together with the constants that produced it. Vacuous bounds
//! (factor outside `[0, 1)` before clamping, or infinite constants) are
//! flagged explicitly rather than silently clamped; factors computed from a
//! lower bound on the Hoffman constant are flagged `optimistic`.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{polyhedral_distance_oracle, ConvexSet, GeometryError, SetCollection};
use crate::linalg::{
    frobenius_norm, min_nonzero_eigenvalue, spectral_summary, symmetric_eigenvalues, DenseMatrix,
    DenseVector, LinalgError, SpectralSummary, SYMMETRY_TOL,
};
use crate::sampling::Rng64;
use crate::solvers::{residual_map, InequalitySystem, RowKind, SolverError};

/// Additive accuracy requested from the Dykstra distance oracle when sampling
/// Hoffman ratios.
const ORACLE_EPS: f64 = 1e-9;

/// Desk-scale cap for the sampled Hoffman bound.
const SAMPLED_MAX_DIM: usize = 50;

#[derive(Debug, Error)]
pub enum ConditioningError {
    #[error("matrix is not positive semidefinite")]
    NotPsd,
    #[error("matrix has no nonzero entries")]
    ZeroMatrix,
    #[error("matrix does not have full column rank")]
    RankDeficient,
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("distance oracle did not converge")]
    OracleNotConverged,
    #[error("distance to infeasibility must be positive")]
    NonpositiveMu,
    #[error("gamma_bar must be positive and finite")]
    InvalidGammaBar,
    #[error("bad flavor: {0}")]
    BadFlavor(String),
    #[error("supplied witness is not feasible")]
    InfeasibleWitness,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

impl From<GeometryError> for ConditioningError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::NotConverged => ConditioningError::OracleNotConverged,
            GeometryError::Linalg(l) => ConditioningError::Linalg(l),
            other => ConditioningError::ModeMismatch(other.to_string()),
        }
    }
}

/// Which convergence theorem a report belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TheoremTag {
    #[serde(rename = "LC1")]
    Lc1,
    #[serde(rename = "CDMN2")]
    Cdmn2,
    #[serde(rename = "AP")]
    Ap,
    #[serde(rename = "APHoff")]
    ApHoff,
    #[serde(rename = "RENEGAR")]
    Renegar,
    #[serde(rename = "MRAP")]
    Mrap,
    #[serde(rename = "MRAP2SET")]
    Mrap2Set,
    #[serde(rename = "MRAPNOREPEAT")]
    MrapNoRepeat,
}

impl fmt::Display for TheoremTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TheoremTag::Lc1 => "LC1",
            TheoremTag::Cdmn2 => "CDMN2",
            TheoremTag::Ap => "AP",
            TheoremTag::ApHoff => "APHoff",
            TheoremTag::Renegar => "RENEGAR",
            TheoremTag::Mrap => "MRAP",
            TheoremTag::Mrap2Set => "MRAP2SET",
            TheoremTag::MrapNoRepeat => "MRAPNOREPEAT",
        };
        f.write_str(s)
    }
}

/// A theoretical per-iteration contraction factor with its ingredients.
#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub theorem: TheoremTag,
    /// Contraction factor in `[0, 1]`; 1 with `vacuous` set when the formula
    /// yields nothing usable.
    pub theoretical_factor: f64,
    /// Named constants entering the formula (trace, lambda_min_nonzero,
    /// kappa, hoffman_L, frob_sq, mu, norm_b, m, gamma_bar, ...).
    pub constants: BTreeMap<String, f64>,
    /// Empirically observed contraction, when a run was compared.
    pub observed_factor: Option<f64>,
    pub trials: usize,
    /// The formula produced a factor outside [0, 1) (or an infinite
    /// constant); the stated factor is clamped and guarantees nothing.
    pub vacuous: bool,
    /// The factor was computed from a lower bound on the Hoffman constant,
    /// so the true guaranteed factor may be larger (slower).
    pub optimistic: bool,
    /// The underlying regularity hypothesis is local; the factor is only
    /// meaningful near the intersection.
    pub local_only: bool,
}

impl RateReport {
    fn new(theorem: TheoremTag, raw_factor: f64, constants: BTreeMap<String, f64>) -> Self {
        let mut constants = constants;
        let (factor, vacuous) = if raw_factor.is_nan() || raw_factor >= 1.0 {
            (1.0, true)
        } else if raw_factor < 0.0 {
            (0.0, true)
        } else {
            (raw_factor, false)
        };
        if vacuous && raw_factor.is_finite() {
            constants.insert("raw_factor".into(), raw_factor);
        }
        Self {
            theorem,
            theoretical_factor: factor,
            constants,
            observed_factor: None,
            trials: 0,
            vacuous,
            optimistic: false,
            local_only: false,
        }
    }

    pub fn with_observed(mut self, factor: f64, trials: usize) -> Self {
        self.observed_factor = Some(factor);
        self.trials = trials;
        self
    }

    pub fn mark_local_only(mut self) -> Self {
        self.local_only = true;
        self
    }

    /// `key=value` lines, one per field, constants prefixed `constant.`.
    pub fn key_value_lines(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("theorem={}\n", self.theorem));
        out.push_str(&format!("theoretical_factor={}\n", self.theoretical_factor));
        out.push_str(&format!("vacuous={}\n", self.vacuous));
        out.push_str(&format!("optimistic={}\n", self.optimistic));
        out.push_str(&format!("local_only={}\n", self.local_only));
        if let Some(obs) = self.observed_factor {
            out.push_str(&format!("observed_factor={obs}\n"));
            out.push_str(&format!("trials={}\n", self.trials));
        }
        for (k, v) in &self.constants {
            out.push_str(&format!("constant.{k}={v}\n"));
        }
        out
    }
}

fn constants(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect()
}

// ---------------------------------------------------------------------------
// Coordinate descent rates
// ---------------------------------------------------------------------------

/// Contraction factor `1 − λ̲(A)/tr A` for diagonal-weighted coordinate
/// descent on a symmetric positive-semidefinite system. For positive-definite
/// input the report also carries the condition-number chain
/// `1 − 1/(√n·κ) ≤ 1 − 1/(n·k)`.
pub fn rate_lc1(a: &DenseMatrix) -> Result<RateReport, ConditioningError> {
    if a.rows() != a.cols() || !a.is_symmetric(SYMMETRY_TOL) {
        return Err(ConditioningError::NotPsd);
    }
    if a.is_zero() {
        return Err(ConditioningError::ZeroMatrix);
    }
    let eigs = symmetric_eigenvalues(a)?;
    let spec = eigs.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    if eigs[0] < -1e-10 * spec {
        return Err(ConditioningError::NotPsd);
    }
    let lam = min_nonzero_eigenvalue(a)?;
    let tr = a.trace()?;
    let n = a.rows() as f64;
    let raw = 1.0 - lam / tr;
    let mut c = constants(&[
        ("trace", tr),
        ("lambda_min_nonzero", lam),
        ("n", n),
    ]);
    let cutoff = a.rows() as f64 * f64::EPSILON * spec;
    if eigs[0] > cutoff {
        // Positive definite: λ̲ = λ_min = 1/‖A⁻¹‖₂ and the singular values
        // are the eigenvalues.
        let inv_norm = 1.0 / eigs[0];
        let frob = frobenius_norm(a);
        let kappa = frob * inv_norm;
        let k_rel = spec * inv_norm;
        c.insert("spec_norm_inv".into(), inv_norm);
        c.insert("factor_pd_form".into(), 1.0 - 1.0 / (inv_norm * tr));
        c.insert("kappa".into(), kappa);
        c.insert("k".into(), k_rel);
        c.insert("bound_sqrt_n_kappa".into(), 1.0 - 1.0 / (n.sqrt() * kappa));
        c.insert("bound_n_k".into(), 1.0 - 1.0 / (n * k_rel));
    }
    Ok(RateReport::new(TheoremTag::Lc1, raw, c))
}

/// Contraction factor `1 − λ̲(AᵀA)/‖A‖_F² = 1 − σ_min²/‖A‖_F²` for
/// column-norm-weighted least-squares coordinate descent, computed from a
/// precomputed spectral summary.
pub fn rate_cdmn2_from_summary(s: &SpectralSummary) -> RateReport {
    let frob_sq = s.frob_norm * s.frob_norm;
    let sig = s.sigma_min_nonzero;
    let raw = 1.0 - sig * sig / frob_sq;
    let mut c = constants(&[
        ("frob_sq", frob_sq),
        ("sigma_min_nonzero", sig),
        ("lambda_min_nonzero", sig * sig),
    ]);
    if s.full_column_rank {
        c.insert("kappa".into(), s.scaled_cond);
    }
    RateReport::new(TheoremTag::Cdmn2, raw, c)
}

/// See [`rate_cdmn2_from_summary`]; runs the SVD itself.
pub fn rate_cdmn2(a: &DenseMatrix) -> Result<RateReport, ConditioningError> {
    if a.is_zero() {
        return Err(ConditioningError::ZeroMatrix);
    }
    Ok(rate_cdmn2_from_summary(&spectral_summary(a)?))
}

/// Contraction factor `1 − 1/κ(A)²` for randomized Kaczmarz; requires full
/// column rank.
pub fn rate_ap(a: &DenseMatrix) -> Result<RateReport, ConditioningError> {
    if a.is_zero() {
        return Err(ConditioningError::ZeroMatrix);
    }
    let s = spectral_summary(a)?;
    if !s.full_column_rank {
        return Err(ConditioningError::RankDeficient);
    }
    let frob_sq = s.frob_norm * s.frob_norm;
    let sig = s.sigma_min_nonzero;
    let raw = 1.0 - sig * sig / frob_sq;
    let c = constants(&[
        ("frob_sq", frob_sq),
        ("sigma_min_nonzero", sig),
        ("kappa", s.scaled_cond),
    ]);
    Ok(RateReport::new(TheoremTag::Ap, raw, c))
}

// ---------------------------------------------------------------------------
// Hoffman constants
// ---------------------------------------------------------------------------

/// How a Hoffman-constant value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HoffmanCertificate {
    /// Exact: equality-only system, `L = 1/σ_min_nonzero(A)`.
    Exact,
    /// A certified lower bound (sampling or grid search); the true constant
    /// may be larger.
    LowerBound,
}

/// An estimate of the Hoffman error-bound constant `L` of a system:
/// `d(x, S) ≤ L·‖e(Ax−b)‖` for all `x` (with `S` nonempty).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HoffmanEstimate {
    pub value: f64,
    pub certificate: HoffmanCertificate,
}

/// Computation mode for [`hoffman_constant`].
pub enum HoffmanMode<'a> {
    /// Equality-only systems: `L = 1/σ_min_nonzero(A)`, exact.
    ExactEquality,
    /// Maximizes `d(x,S)/‖e(Ax−b)‖` over random points around a known
    /// feasible witness; returns a certified lower bound. Desk-scale only
    /// (`m, n ≤ 50`).
    SampledLowerBound {
        witness: &'a DenseVector,
        samples: usize,
        seed: u64,
    },
}

pub fn hoffman_constant(
    sys: &InequalitySystem,
    mode: HoffmanMode,
) -> Result<HoffmanEstimate, ConditioningError> {
    match mode {
        HoffmanMode::ExactEquality => hoffman_exact_equality(sys),
        HoffmanMode::SampledLowerBound {
            witness,
            samples,
            seed,
        } => hoffman_sampled_lower_bound(sys, witness, samples, seed),
    }
}

fn hoffman_exact_equality(sys: &InequalitySystem) -> Result<HoffmanEstimate, ConditioningError> {
    if sys.row_kinds.contains(&RowKind::Le) {
        return Err(ConditioningError::ModeMismatch(
            "exact mode requires an equality-only system".into(),
        ));
    }
    let s = spectral_summary(&sys.a)?;
    Ok(HoffmanEstimate {
        value: 1.0 / s.sigma_min_nonzero,
        certificate: HoffmanCertificate::Exact,
    })
}

fn hoffman_sampled_lower_bound(
    sys: &InequalitySystem,
    witness: &DenseVector,
    samples: usize,
    seed: u64,
) -> Result<HoffmanEstimate, ConditioningError> {
    if sys.rows() > SAMPLED_MAX_DIM || sys.dimension() > SAMPLED_MAX_DIM {
        return Err(ConditioningError::ModeMismatch(format!(
            "sampled mode is desk-scale only (m, n <= {SAMPLED_MAX_DIM})"
        )));
    }
    let w_resid = residual_map(sys, witness)?.norm();
    if w_resid > 1e-8 * (1.0 + sys.b.norm()) {
        return Err(ConditioningError::InfeasibleWitness);
    }
    let n = sys.dimension();
    let mut rng = Rng64::new(seed);
    let scales = [0.5, 1.0, 2.0, 4.0];
    let base = 1.0 + witness.norm();
    let mut best = 0.0f64;
    for s in 0..samples {
        let radius = scales[s % scales.len()] * base;
        let mut x = witness.clone();
        for k in 0..n {
            x[k] += radius * rng.standard_normal();
        }
        let e_norm = residual_map(sys, &x)?.norm();
        if e_norm <= 1e-12 {
            continue; // feasible sample: the ratio is undefined
        }
        let d = polyhedral_distance_oracle(sys, &x, ORACLE_EPS)?;
        let ratio = (d - ORACLE_EPS).max(0.0) / e_norm;
        best = best.max(ratio);
    }
    Ok(HoffmanEstimate {
        value: best,
        certificate: HoffmanCertificate::LowerBound,
    })
}

/// Grid-search lower bound on the Hoffman constant for systems in dimension
/// one or two: maximizes `d(x,S)/‖e(Ax−b)‖` over a regular grid on
/// `[lo, hi]`, with `d` computed exactly through facet/vertex enumeration.
pub fn hoffman_grid_oracle(
    sys: &InequalitySystem,
    lo: &DenseVector,
    hi: &DenseVector,
    resolution: f64,
) -> Result<HoffmanEstimate, ConditioningError> {
    let n = sys.dimension();
    if n > 2 {
        return Err(ConditioningError::ModeMismatch(
            "grid oracle supports dimensions 1 and 2 only".into(),
        ));
    }
    if lo.len() != n || hi.len() != n || !(resolution > 0.0) {
        return Err(ConditioningError::ModeMismatch(
            "bad grid bounds or resolution".into(),
        ));
    }
    let rows = GridRows::new(sys);
    let steps = |k: usize| ((hi[k] - lo[k]) / resolution).floor() as usize + 1;
    let mut best = 0.0f64;
    let mut consider = |p: [f64; 2]| {
        let esq = rows.residual_sq(p);
        if esq <= 1e-18 {
            return;
        }
        if let Some(d) = rows.exact_distance(p) {
            best = best.max(d / esq.sqrt());
        }
    };
    match n {
        1 => {
            for i in 0..steps(0) {
                consider([lo[0] + i as f64 * resolution, 0.0]);
            }
        }
        _ => {
            for i in 0..steps(0) {
                let x = lo[0] + i as f64 * resolution;
                for j in 0..steps(1) {
                    consider([x, lo[1] + j as f64 * resolution]);
                }
            }
        }
    }
    Ok(HoffmanEstimate {
        value: best,
        certificate: HoffmanCertificate::LowerBound,
    })
}

/// Row data unpacked for the dimension ≤ 2 grid hot loop.
struct GridRows {
    kind: Vec<RowKind>,
    a: Vec<[f64; 2]>,
    b: Vec<f64>,
    sqnorm: Vec<f64>,
    norm: Vec<f64>,
    dim: usize,
}

impl GridRows {
    fn new(sys: &InequalitySystem) -> Self {
        let dim = sys.dimension();
        let m = sys.rows();
        let mut a = Vec::with_capacity(m);
        for i in 0..m {
            let r = sys.a.row(i);
            a.push([r[0], if dim > 1 { r[1] } else { 0.0 }]);
        }
        Self {
            kind: sys.row_kinds.clone(),
            a,
            b: sys.b.iter().copied().collect(),
            sqnorm: (0..m).map(|i| sys.a.row_sqnorm(i)).collect(),
            norm: (0..m).map(|i| sys.a.row_sqnorm(i).sqrt()).collect(),
            dim,
        }
    }

    fn residual_sq(&self, p: [f64; 2]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.a.len() {
            let v = self.a[i][0] * p[0] + self.a[i][1] * p[1] - self.b[i];
            let e = match self.kind[i] {
                RowKind::Le => v.max(0.0),
                RowKind::Eq => v,
            };
            acc += e * e;
        }
        acc
    }

    fn is_feasible(&self, p: [f64; 2], tol: f64) -> bool {
        for i in 0..self.a.len() {
            let v = self.a[i][0] * p[0] + self.a[i][1] * p[1] - self.b[i];
            let viol = match self.kind[i] {
                RowKind::Le => v.max(0.0),
                RowKind::Eq => v.abs(),
            };
            if viol > tol * self.norm[i] {
                return false;
            }
        }
        true
    }

    /// Exact distance to the feasible region: the nearest point is the point
    /// itself, the projection onto one row's hyperplane, or (in 2-d) the
    /// intersection of two hyperplanes. Returns `None` only if rounding
    /// rejects every candidate.
    fn exact_distance(&self, p: [f64; 2]) -> Option<f64> {
        let feas_tol = 1e-9 * (1.0 + p[0].abs() + p[1].abs());
        if self.is_feasible(p, feas_tol) {
            return Some(0.0);
        }
        let m = self.a.len();
        let mut best: Option<f64> = None;
        let mut push = |cand: [f64; 2], rows: &Self| {
            if rows.is_feasible(cand, feas_tol) {
                let d = ((cand[0] - p[0]).powi(2) + (cand[1] - p[1]).powi(2)).sqrt();
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
        };
        for i in 0..m {
            let shift = (self.a[i][0] * p[0] + self.a[i][1] * p[1] - self.b[i]) / self.sqnorm[i];
            let q = [p[0] - shift * self.a[i][0], p[1] - shift * self.a[i][1]];
            push(q, self);
        }
        if self.dim == 2 {
            for i in 0..m {
                for j in (i + 1)..m {
                    let det = self.a[i][0] * self.a[j][1] - self.a[i][1] * self.a[j][0];
                    let scale = self.norm[i] * self.norm[j];
                    if det.abs() <= 1e-12 * scale {
                        continue;
                    }
                    let v = [
                        (self.b[i] * self.a[j][1] - self.a[i][1] * self.b[j]) / det,
                        (self.a[i][0] * self.b[j] - self.b[i] * self.a[j][0]) / det,
                    ];
                    push(v, self);
                }
            }
        }
        best
    }
}

// ---------------------------------------------------------------------------
// Rates built on error bounds
// ---------------------------------------------------------------------------

/// Contraction factor `1 − 1/(L²‖A‖_F²)` for randomized projection on a
/// mixed inequality/equality system, given a Hoffman constant estimate.
/// Lower-bound estimates yield an `optimistic` report.
pub fn rate_aphoff(sys: &InequalitySystem, l: &HoffmanEstimate) -> RateReport {
    let frob = frobenius_norm(&sys.a);
    let frob_sq = frob * frob;
    let raw = 1.0 - 1.0 / (l.value * l.value * frob_sq);
    let c = constants(&[("hoffman_L", l.value), ("frob_sq", frob_sq)]);
    let mut report = RateReport::new(TheoremTag::ApHoff, raw, c);
    report.optimistic = l.certificate == HoffmanCertificate::LowerBound;
    report
}

/// Contraction factor `1 − 1/(‖A‖_F² · max{1/μ, 2‖b‖/μ²}²)` in terms of the
/// distance to infeasibility `μ` of `Ax ≤ b`.
///
/// Valid only for runs started at `x₀ = 0`: the derivation bounds the iterate
/// norms by `2‖b‖/μ` along the whole run, which needs that starting point.
/// The hypothesis is recorded in the constants as `x0_norm = 0`.
pub fn renegar_rate(
    frob_sq: f64,
    mu: f64,
    norm_b: f64,
) -> Result<RateReport, ConditioningError> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(ConditioningError::NonpositiveMu);
    }
    if !(frob_sq > 0.0) {
        return Err(ConditioningError::ZeroMatrix);
    }
    let max_term = (1.0 / mu).max(2.0 * norm_b / (mu * mu));
    let raw = 1.0 - 1.0 / (frob_sq * max_term * max_term);
    let c = constants(&[
        ("frob_sq", frob_sq),
        ("mu", mu),
        ("norm_b", norm_b),
        ("max_term", max_term),
        ("x0_norm", 0.0),
    ]);
    Ok(RateReport::new(TheoremTag::Renegar, raw, c))
}

/// Schedule flavor for metric-regularity rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MrapFlavor {
    /// Uniform random set choice: `1 − 1/(m·γ̄²)`.
    Uniform,
    /// Uniform choice excluding the previous set: `1 − 1/((m−1)·γ̄²)`;
    /// needs `m ≥ 2`.
    NoRepeat,
    /// Deterministic 2-set alternation: `1 − 1/γ̄²`; needs `m = 2`.
    TwoSet,
}

/// Local contraction factor of iterated projections under metric regularity
/// with modulus bound `γ̄`.
pub fn rate_mrap(
    m: usize,
    gamma_bar: f64,
    flavor: MrapFlavor,
) -> Result<RateReport, ConditioningError> {
    if !(gamma_bar > 0.0) || !gamma_bar.is_finite() {
        return Err(ConditioningError::InvalidGammaBar);
    }
    if m == 0 {
        return Err(ConditioningError::BadFlavor("m must be at least 1".into()));
    }
    let g2 = gamma_bar * gamma_bar;
    let (tag, raw) = match flavor {
        MrapFlavor::Uniform => (TheoremTag::Mrap, 1.0 - 1.0 / (m as f64 * g2)),
        MrapFlavor::NoRepeat => {
            if m < 2 {
                return Err(ConditioningError::BadFlavor(
                    "no-repeat schedule needs m >= 2".into(),
                ));
            }
            (TheoremTag::MrapNoRepeat, 1.0 - 1.0 / ((m - 1) as f64 * g2))
        }
        MrapFlavor::TwoSet => {
            if m != 2 {
                return Err(ConditioningError::BadFlavor(
                    "two-set alternation needs m = 2".into(),
                ));
            }
            (TheoremTag::Mrap2Set, 1.0 - 1.0 / g2)
        }
    };
    let c = constants(&[("m", m as f64), ("gamma_bar", gamma_bar)]);
    Ok(RateReport::new(tag, raw, c))
}

/// A global bound on the regularity modulus for collections consisting only
/// of halfspaces and hyperplanes: the Hoffman constant of the row-normalized
/// stacked system. With unit rows, `‖e(Ax−b)‖² = Σ_i d(x,S_i)²`, so
/// `d(x, ∩S_i) ≤ L̂·√(Σ_i d(x,S_i)²)` is exactly the regularity bound with
/// `γ = L̂`.
///
/// Exact for hyperplane-only collections; needs a feasible witness for the
/// sampled lower bound otherwise.
pub fn polyhedral_gamma_surrogate(
    collection: &SetCollection,
    witness: Option<&DenseVector>,
    samples: usize,
    seed: u64,
) -> Result<HoffmanEstimate, ConditioningError> {
    let n = collection.dimension();
    let mut rows: Vec<f64> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut kinds: Vec<RowKind> = Vec::new();
    let mut all_hyperplanes = true;
    for s in collection.sets() {
        match s {
            ConvexSet::Hyperplane { normal, offset } => {
                let norm = normal.sqnorm().sqrt();
                rows.extend(normal.iter().map(|v| v / norm));
                rhs.push(offset / norm);
                kinds.push(RowKind::Eq);
            }
            ConvexSet::Halfspace { normal, offset } => {
                let norm = normal.sqnorm().sqrt();
                rows.extend(normal.iter().map(|v| v / norm));
                rhs.push(offset / norm);
                kinds.push(RowKind::Le);
                all_hyperplanes = false;
            }
            _ => {
                return Err(ConditioningError::ModeMismatch(
                    "gamma surrogate needs a halfspace/hyperplane collection".into(),
                ))
            }
        }
    }
    let a = DenseMatrix::from_row_major(kinds.len(), n, rows)?;
    let b = DenseVector::new(rhs)?;
    let sys = InequalitySystem::new(a, b, kinds)?;
    if all_hyperplanes {
        hoffman_exact_equality(&sys)
    } else {
        let w = witness.ok_or_else(|| {
            ConditioningError::ModeMismatch(
                "halfspace collections need a feasible witness for the sampled bound".into(),
            )
        })?;
        hoffman_sampled_lower_bound(&sys, w, samples, seed)
    }
}
