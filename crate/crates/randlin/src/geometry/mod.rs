//! Convex feasibility machinery: closed-form projectable sets, projection
//! schedules (randomized, no-repeat, averaged, alternating), the product
//! space formulation, and a Dykstra-based distance oracle for polyhedra.

mod dykstra;
mod product;
mod schedules;

pub use dykstra::polyhedral_distance_oracle;
pub use product::{blockwise_project, diagonal_project, product_inner, product_space_lift};
pub use schedules::{
    averaged_step, run_alternating_projections, run_averaged_projections,
    run_norepeat_projections, run_randomized_projections, DistanceOracle,
};

use thiserror::Error;

use crate::linalg::{DenseMatrix, DenseVector, LinalgError};
use crate::sampling::SamplingError;
use crate::solvers::{InequalitySystem, RowKind, SolverError};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid set: {0}")]
    InvalidSet(String),
    #[error("set collection is empty")]
    EmptyCollection,
    #[error("schedule needs at least two sets")]
    SingleSet,
    #[error("distance oracle did not converge within the sweep budget")]
    NotConverged,
    #[error("tolerance must be positive")]
    InvalidTolerance,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

fn dim_err<T>(msg: impl Into<String>) -> Result<T, GeometryError> {
    Err(GeometryError::DimensionMismatch(msg.into()))
}

/// A closed convex set with a closed-form nearest-point projection.
#[derive(Debug, Clone)]
pub enum ConvexSet {
    /// `{ x : aᵀx = b }` with `a ≠ 0`.
    Hyperplane { normal: DenseVector, offset: f64 },
    /// `{ x : aᵀx ≤ b }` with `a ≠ 0`.
    Halfspace { normal: DenseVector, offset: f64 },
    /// `{ x : lo ≤ x ≤ hi }` componentwise.
    Box { lo: DenseVector, hi: DenseVector },
    /// `{ x : ‖x − center‖ ≤ radius }` with `radius > 0`.
    Ball { center: DenseVector, radius: f64 },
    /// `{ offset + Bt : t }` with orthonormal basis columns (orthonormalized
    /// at construction).
    AffineSubspace {
        basis: DenseMatrix,
        offset: DenseVector,
    },
}

impl ConvexSet {
    pub fn hyperplane(normal: DenseVector, offset: f64) -> Result<Self, GeometryError> {
        if normal.sqnorm() == 0.0 {
            return Err(GeometryError::InvalidSet("hyperplane normal is zero".into()));
        }
        Ok(ConvexSet::Hyperplane { normal, offset })
    }

    pub fn halfspace(normal: DenseVector, offset: f64) -> Result<Self, GeometryError> {
        if normal.sqnorm() == 0.0 {
            return Err(GeometryError::InvalidSet("halfspace normal is zero".into()));
        }
        Ok(ConvexSet::Halfspace { normal, offset })
    }

    pub fn axis_box(lo: DenseVector, hi: DenseVector) -> Result<Self, GeometryError> {
        if lo.len() != hi.len() {
            return dim_err("box bounds have different lengths");
        }
        if lo.iter().zip(hi.iter()).any(|(l, h)| l > h) {
            return Err(GeometryError::InvalidSet("box has lo > hi".into()));
        }
        Ok(ConvexSet::Box { lo, hi })
    }

    pub fn ball(center: DenseVector, radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0) {
            return Err(GeometryError::InvalidSet(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(ConvexSet::Ball { center, radius })
    }

    /// Builds an affine subspace, orthonormalizing the basis columns by
    /// modified Gram–Schmidt (two passes). Dependent columns are dropped; a
    /// basis of numerical rank zero is rejected.
    pub fn affine_subspace(
        basis: DenseMatrix,
        offset: DenseVector,
    ) -> Result<Self, GeometryError> {
        if basis.rows() != offset.len() {
            return dim_err("affine basis rows must match offset length");
        }
        let dim = basis.rows();
        let mut cols: Vec<Vec<f64>> = Vec::new();
        for j in 0..basis.cols() {
            let mut v: Vec<f64> = (0..dim).map(|i| basis.get(i, j)).collect();
            for _pass in 0..2 {
                for q in &cols {
                    let proj: f64 = q.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                    for (vk, qk) in v.iter_mut().zip(q.iter()) {
                        *vk -= proj * qk;
                    }
                }
            }
            let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > 1e-12 {
                for vk in v.iter_mut() {
                    *vk /= norm;
                }
                cols.push(v);
            }
        }
        if cols.is_empty() {
            return Err(GeometryError::InvalidSet(
                "affine basis has numerical rank zero".into(),
            ));
        }
        let mut entries = vec![0.0; dim * cols.len()];
        for (j, q) in cols.iter().enumerate() {
            for i in 0..dim {
                entries[i * cols.len() + j] = q[i];
            }
        }
        let basis = DenseMatrix::from_row_major(dim, cols.len(), entries)?;
        Ok(ConvexSet::AffineSubspace { basis, offset })
    }

    /// Ambient dimension.
    pub fn dimension(&self) -> usize {
        match self {
            ConvexSet::Hyperplane { normal, .. } | ConvexSet::Halfspace { normal, .. } => {
                normal.len()
            }
            ConvexSet::Box { lo, .. } => lo.len(),
            ConvexSet::Ball { center, .. } => center.len(),
            ConvexSet::AffineSubspace { offset, .. } => offset.len(),
        }
    }

    /// Nearest point of the set to `x`.
    pub fn project(&self, x: &DenseVector) -> Result<DenseVector, GeometryError> {
        if x.len() != self.dimension() {
            return dim_err(format!(
                "point has dimension {}, set has {}",
                x.len(),
                self.dimension()
            ));
        }
        Ok(match self {
            ConvexSet::Hyperplane { normal, offset } => {
                let shift = (normal.dot(x) - offset) / normal.sqnorm();
                let mut p = x.clone();
                p.add_scaled(-shift, normal);
                p
            }
            ConvexSet::Halfspace { normal, offset } => {
                let viol = normal.dot(x) - offset;
                if viol <= 0.0 {
                    x.clone()
                } else {
                    let mut p = x.clone();
                    p.add_scaled(-viol / normal.sqnorm(), normal);
                    p
                }
            }
            ConvexSet::Box { lo, hi } => DenseVector::new(
                x.iter()
                    .zip(lo.iter().zip(hi.iter()))
                    .map(|(v, (l, h))| v.max(*l).min(*h))
                    .collect(),
            )?,
            ConvexSet::Ball { center, radius } => {
                let d = x.sub(center);
                let dist = d.norm();
                if dist <= *radius {
                    x.clone()
                } else {
                    let mut p = center.clone();
                    p.add_scaled(radius / dist, &d);
                    p
                }
            }
            ConvexSet::AffineSubspace { basis, offset } => {
                let shifted = x.sub(offset);
                let coords = basis.matvec_transpose(&shifted)?;
                let mut p = offset.clone();
                let back = basis.matvec(&coords)?;
                p.add_scaled(1.0, &back);
                p
            }
        })
    }

    /// `d(x, S) = ‖x − P_S(x)‖`.
    pub fn distance(&self, x: &DenseVector) -> Result<f64, GeometryError> {
        Ok(self.project(x)?.sub(x).norm())
    }
}

/// A family of convex sets in a common ambient space, with an optional
/// regularity-modulus bound `γ̄` used when attaching theoretical contraction
/// factors to projection runs.
#[derive(Debug, Clone)]
pub struct SetCollection {
    sets: Vec<ConvexSet>,
    gamma_bar: Option<f64>,
}

impl SetCollection {
    pub fn new(sets: Vec<ConvexSet>, gamma_bar: Option<f64>) -> Result<Self, GeometryError> {
        if sets.is_empty() {
            return Err(GeometryError::EmptyCollection);
        }
        let dim = sets[0].dimension();
        if sets.iter().any(|s| s.dimension() != dim) {
            return dim_err("sets have different ambient dimensions");
        }
        if let Some(g) = gamma_bar {
            if !(g > 0.0) {
                return Err(GeometryError::InvalidSet(
                    "gamma_bar must be positive".into(),
                ));
            }
        }
        Ok(Self { sets, gamma_bar })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.sets[0].dimension()
    }

    pub fn sets(&self) -> &[ConvexSet] {
        &self.sets
    }

    pub fn gamma_bar(&self) -> Option<f64> {
        self.gamma_bar
    }

    pub fn with_gamma_bar(mut self, gamma_bar: f64) -> Result<Self, GeometryError> {
        if !(gamma_bar > 0.0) {
            return Err(GeometryError::InvalidSet(
                "gamma_bar must be positive".into(),
            ));
        }
        self.gamma_bar = Some(gamma_bar);
        Ok(self)
    }

    /// `Σ_i d(x, S_i)²` — the squared feasibility residual in the product
    /// space norm.
    pub fn sum_dist_sq(&self, x: &DenseVector) -> Result<f64, GeometryError> {
        let mut acc = 0.0;
        for s in &self.sets {
            let d = s.distance(x)?;
            acc += d * d;
        }
        Ok(acc)
    }

    /// Rewrites a collection of halfspaces, hyperplanes and boxes as one
    /// inequality system (boxes expand to two rows per coordinate). Returns
    /// `None` if any set has no such representation.
    pub fn to_inequality_system(&self) -> Option<InequalitySystem> {
        let n = self.dimension();
        let mut rows: Vec<f64> = Vec::new();
        let mut rhs: Vec<f64> = Vec::new();
        let mut kinds: Vec<RowKind> = Vec::new();
        for s in &self.sets {
            match s {
                ConvexSet::Halfspace { normal, offset } => {
                    rows.extend_from_slice(normal.as_slice());
                    rhs.push(*offset);
                    kinds.push(RowKind::Le);
                }
                ConvexSet::Hyperplane { normal, offset } => {
                    rows.extend_from_slice(normal.as_slice());
                    rhs.push(*offset);
                    kinds.push(RowKind::Eq);
                }
                ConvexSet::Box { lo, hi } => {
                    for k in 0..n {
                        let mut e = vec![0.0; n];
                        e[k] = 1.0;
                        rows.extend_from_slice(&e);
                        rhs.push(hi[k]);
                        kinds.push(RowKind::Le);
                        e[k] = -1.0;
                        rows.extend_from_slice(&e);
                        rhs.push(-lo[k]);
                        kinds.push(RowKind::Le);
                    }
                }
                _ => return None,
            }
        }
        let m = kinds.len();
        let a = DenseMatrix::from_row_major(m, n, rows).ok()?;
        let b = DenseVector::new(rhs).ok()?;
        InequalitySystem::new(a, b, kinds).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Rng64;
    use approx::assert_relative_eq;

    fn vec2(a: f64, b: f64) -> DenseVector {
        DenseVector::new(vec![a, b]).unwrap()
    }

    #[test]
    fn halfspace_projection() {
        let s = ConvexSet::halfspace(vec2(0.0, 1.0), 0.0).unwrap(); // x2 <= 0
        let p = s.project(&vec2(2.0, 3.0)).unwrap();
        assert_eq!(p.as_slice(), &[2.0, 0.0]);
        let q = s.project(&vec2(2.0, -1.0)).unwrap();
        assert_eq!(q.as_slice(), &[2.0, -1.0]);
    }

    #[test]
    fn ball_projection() {
        let s = ConvexSet::ball(DenseVector::zeros(2), 1.0).unwrap();
        let p = s.project(&vec2(3.0, 4.0)).unwrap();
        assert_relative_eq!(p[0], 0.6, max_relative = 1e-15);
        assert_relative_eq!(p[1], 0.8, max_relative = 1e-15);
    }

    #[test]
    fn hyperplane_projection() {
        let s = ConvexSet::hyperplane(vec2(1.0, 1.0), 0.0).unwrap();
        let p = s.project(&vec2(1.0, 0.0)).unwrap();
        assert_relative_eq!(p[0], 0.5, max_relative = 1e-15);
        assert_relative_eq!(p[1], -0.5, max_relative = 1e-15);
    }

    #[test]
    fn box_projection() {
        let s = ConvexSet::axis_box(vec2(0.0, 0.0), vec2(1.0, 1.0)).unwrap();
        let p = s.project(&vec2(2.0, -0.5)).unwrap();
        assert_eq!(p.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn affine_subspace_projection() {
        // Line through the origin spanned by (1,1); basis given unnormalized.
        let basis = DenseMatrix::from_row_major(2, 1, vec![1.0, 1.0]).unwrap();
        let s = ConvexSet::affine_subspace(basis, DenseVector::zeros(2)).unwrap();
        let p = s.project(&vec2(1.0, 0.0)).unwrap();
        assert_relative_eq!(p[0], 0.5, max_relative = 1e-12);
        assert_relative_eq!(p[1], 0.5, max_relative = 1e-12);
    }

    #[test]
    fn affine_subspace_drops_dependent_columns() {
        let basis =
            DenseMatrix::from_row_major(2, 2, vec![1.0, 2.0, 1.0, 2.0]).unwrap();
        let s = ConvexSet::affine_subspace(basis, DenseVector::zeros(2)).unwrap();
        match &s {
            ConvexSet::AffineSubspace { basis, .. } => assert_eq!(basis.cols(), 1),
            _ => unreachable!(),
        }
    }

    #[test]
    fn invalid_sets_rejected() {
        assert!(ConvexSet::hyperplane(DenseVector::zeros(2), 1.0).is_err());
        assert!(ConvexSet::ball(DenseVector::zeros(2), 0.0).is_err());
        assert!(ConvexSet::axis_box(vec2(1.0, 0.0), vec2(0.0, 1.0)).is_err());
        assert!(SetCollection::new(vec![], None).is_err());
        let a = ConvexSet::ball(DenseVector::zeros(2), 1.0).unwrap();
        let b = ConvexSet::ball(DenseVector::zeros(3), 1.0).unwrap();
        assert!(SetCollection::new(vec![a, b], None).is_err());
    }

    fn random_point(rng: &mut Rng64, n: usize) -> DenseVector {
        DenseVector::new((0..n).map(|_| rng.standard_normal()).collect()).unwrap()
    }

    fn random_set(rng: &mut Rng64, n: usize) -> ConvexSet {
        match rng.next_u64() % 5 {
            0 => ConvexSet::hyperplane(random_point(rng, n), rng.standard_normal()).unwrap(),
            1 => ConvexSet::halfspace(random_point(rng, n), rng.standard_normal()).unwrap(),
            2 => {
                let a = random_point(rng, n);
                let b = random_point(rng, n);
                let lo: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x.min(*y)).collect();
                let hi: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x.max(*y)).collect();
                ConvexSet::axis_box(
                    DenseVector::new(lo).unwrap(),
                    DenseVector::new(hi).unwrap(),
                )
                .unwrap()
            }
            3 => ConvexSet::ball(random_point(rng, n), 0.1 + rng.uniform() * 2.0).unwrap(),
            _ => {
                let k = 1 + (rng.next_u64() % n as u64) as usize;
                let entries = (0..n * k).map(|_| rng.standard_normal()).collect();
                let basis = DenseMatrix::from_row_major(n, k, entries).unwrap();
                ConvexSet::affine_subspace(basis, random_point(rng, n)).unwrap()
            }
        }
    }

    #[test]
    fn projection_idempotent_and_nonexpansive() {
        let mut rng = Rng64::new(61);
        for _ in 0..400 {
            let n = 1 + (rng.next_u64() % 5) as usize;
            let s = random_set(&mut rng, n);
            let x = random_point(&mut rng, n);
            let y = random_point(&mut rng, n);
            let px = s.project(&x).unwrap();
            let ppx = s.project(&px).unwrap();
            assert!(ppx.sub(&px).norm() <= 1e-12, "idempotence failed");
            let py = s.project(&y).unwrap();
            assert!(
                px.sub(&py).norm() <= x.sub(&y).norm() + 1e-12,
                "nonexpansiveness failed"
            );
        }
    }

    #[test]
    fn projection_pythagoras_against_members() {
        // ‖y−x‖² − ‖P(y)−x‖² ≥ ‖y−P(y)‖² for any member x of the set.
        let mut rng = Rng64::new(67);
        for _ in 0..400 {
            let n = 2 + (rng.next_u64() % 4) as usize;
            let s = random_set(&mut rng, n);
            let y = random_point(&mut rng, n);
            // A member: project a random point.
            let member = s.project(&random_point(&mut rng, n)).unwrap();
            let py = s.project(&y).unwrap();
            let lhs = y.sub(&member).sqnorm() - py.sub(&member).sqnorm();
            let rhs = y.sub(&py).sqnorm();
            assert!(lhs >= rhs - 1e-9, "pythagoras failed: {lhs} < {rhs}");
        }
    }

    #[test]
    fn inequality_system_view() {
        let sets = vec![
            ConvexSet::halfspace(vec2(1.0, 0.0), 1.0).unwrap(),
            ConvexSet::hyperplane(vec2(0.0, 1.0), 0.5).unwrap(),
            ConvexSet::axis_box(vec2(0.0, 0.0), vec2(1.0, 1.0)).unwrap(),
        ];
        let c = SetCollection::new(sets, None).unwrap();
        let sys = c.to_inequality_system().unwrap();
        assert_eq!(sys.rows(), 2 + 4);
        assert_eq!(sys.row_kinds[0], RowKind::Le);
        assert_eq!(sys.row_kinds[1], RowKind::Eq);

        let with_ball = SetCollection::new(
            vec![ConvexSet::ball(DenseVector::zeros(2), 1.0).unwrap()],
            None,
        )
        .unwrap();
        assert!(with_ball.to_inequality_system().is_none());
    }
}
