//! Dykstra's alternating projection algorithm as a distance oracle for
//! polyhedra.
//!
//! Unlike plain cyclic projections, Dykstra's correction vectors make the
//! iterate converge to the *nearest* feasible point, so `‖x − y‖` at
//! convergence approximates `d(x, S)` for the polyhedron `S` cut out by the
//! rows of an inequality system. Desk-scale only: intended for the small
//! instances used by tests and bound verification.

use crate::linalg::DenseVector;
use crate::solvers::{InequalitySystem, RowKind};

use super::GeometryError;

/// Sweep budget before giving up.
const MAX_SWEEPS: usize = 1_000_000;

/// Distance from `x` to the feasible region of `sys`, to additive accuracy
/// `eps`: sweeps stop once the iterate is `eps/2`-feasible (in geometric row
/// violation) and the last sweep moved it by less than `eps/2`.
///
/// The feasible region must be nonempty (the caller certifies this, e.g. via
/// a known feasible point); on an infeasible system the sweep budget is
/// exhausted and `NotConverged` is returned.
pub fn polyhedral_distance_oracle(
    sys: &InequalitySystem,
    x: &DenseVector,
    eps: f64,
) -> Result<f64, GeometryError> {
    if !(eps > 0.0) {
        return Err(GeometryError::InvalidTolerance);
    }
    if x.len() != sys.dimension() {
        return Err(GeometryError::DimensionMismatch(format!(
            "point has dimension {}, system has {}",
            x.len(),
            sys.dimension()
        )));
    }
    let m = sys.rows();
    let mut y = x.clone();
    // Each Dykstra correction stays parallel to its row, so one scalar
    // coefficient per row describes it completely: p_i = c_i · a_i.
    let mut coeff = vec![0.0f64; m];

    for _sweep in 0..MAX_SWEEPS {
        let sweep_start = y.clone();
        for (i, c) in coeff.iter_mut().enumerate() {
            let row = sys.a.row(i);
            let asq = sys.a.row_sqnorm(i);
            // z = y + c_i a_i; project z onto row i's halfspace/hyperplane.
            let viol = dot(row, y.as_slice()) + *c * asq - sys.b[i];
            let beta = match sys.row_kinds[i] {
                RowKind::Le => viol.max(0.0),
                RowKind::Eq => viol,
            };
            let scale = beta / asq;
            let delta = *c - scale; // y_new = z − scale·a_i = y + delta·a_i
            if delta != 0.0 {
                for (yk, ak) in y.as_mut_slice().iter_mut().zip(row.iter()) {
                    *yk += delta * ak;
                }
            }
            *c = scale;
        }
        let movement = y.sub(&sweep_start).norm();
        if movement < eps / 2.0 && geometric_violation(sys, &y) <= eps / 2.0 {
            return Ok(x.sub(&y).norm());
        }
    }
    Err(GeometryError::NotConverged)
}

/// Worst per-row geometric violation: `e_i(Ay − b)/‖a_i‖`, maximized over
/// rows. Zero exactly on the feasible set.
pub(crate) fn geometric_violation(sys: &InequalitySystem, y: &DenseVector) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..sys.rows() {
        let v = dot(sys.a.row(i), y.as_slice()) - sys.b[i];
        let e = match sys.row_kinds[i] {
            RowKind::Le => v.max(0.0),
            RowKind::Eq => v.abs(),
        };
        worst = worst.max(e / sys.a.row_sqnorm(i).sqrt());
    }
    worst
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}
