//! Seeded Gaussian instance generators for the experiment runner.
//!
//! All entries come from one [`Rng64`] stream per instance in a fixed order
//! (matrix row-major, then auxiliary vectors), so an instance is a pure
//! function of `(rows, cols, seed)`.

use nalgebra::Cholesky;

use crate::linalg::{DenseMatrix, DenseVector};
use crate::sampling::{derive_seed, Rng64};
use crate::solvers::{InequalitySystem, LinearSystem, RowKind};

fn gaussian_matrix(rng: &mut Rng64, rows: usize, cols: usize) -> DenseMatrix {
    let entries = (0..rows * cols).map(|_| rng.standard_normal()).collect();
    DenseMatrix::from_row_major(rows, cols, entries).expect("gaussian entries are finite")
}

fn gaussian_vector(rng: &mut Rng64, n: usize) -> DenseVector {
    DenseVector::new((0..n).map(|_| rng.standard_normal()).collect())
        .expect("gaussian entries are finite")
}

/// Numerical full-column-rank check: the Gram matrix of a full-rank matrix is
/// positive definite, so its Cholesky factorization succeeds exactly when
/// the smallest singular value is positive.
fn has_full_column_rank(a: &DenseMatrix) -> bool {
    Cholesky::new(a.gram().to_na()).is_some()
}

/// A `rows × cols` system with independent standard normal entries in both
/// `A` and `b`. Redraws from a derived seed in the (probability zero, but
/// checked) event of column-rank deficiency.
pub fn gen_gaussian_lsq(rows: usize, cols: usize, seed: u64) -> LinearSystem {
    assert!(rows >= cols && cols >= 1, "need rows >= cols >= 1");
    let mut attempt_seed = seed;
    loop {
        let mut rng = Rng64::new(attempt_seed);
        let a = gaussian_matrix(&mut rng, rows, cols);
        let b = gaussian_vector(&mut rng, rows);
        if has_full_column_rank(&a) {
            return LinearSystem::new(a, b).expect("dimensions agree by construction");
        }
        attempt_seed = derive_seed(attempt_seed, 0x5EED, 1);
    }
}

/// A consistent Gaussian system: `A` standard normal with full column rank,
/// `x*` standard normal, `b = Ax*`. Returns the planted solution.
pub fn gen_gaussian_consistent(
    rows: usize,
    cols: usize,
    seed: u64,
) -> (LinearSystem, DenseVector) {
    assert!(rows >= cols && cols >= 1, "need rows >= cols >= 1");
    let mut attempt_seed = seed;
    loop {
        let mut rng = Rng64::new(attempt_seed);
        let a = gaussian_matrix(&mut rng, rows, cols);
        let x_star = gaussian_vector(&mut rng, cols);
        if has_full_column_rank(&a) {
            let b = a.matvec(&x_star).expect("dimensions agree");
            let sys = LinearSystem::new(a, b).expect("dimensions agree");
            return (sys, x_star);
        }
        attempt_seed = derive_seed(attempt_seed, 0x5EED, 2);
    }
}

/// A Gaussian inequality system `Ax ≤ b` with a strictly interior witness:
/// `A` standard normal, `x̃` standard normal, `b = Ax̃ + u` with `u`
/// componentwise uniform on `[0.1, 1.1]`. Every row then has slack at least
/// `0.1` at `x̃`. Returns the witness with the instance.
pub fn gen_gaussian_ineq(rows: usize, cols: usize, seed: u64) -> (InequalitySystem, DenseVector) {
    assert!(rows >= 1 && cols >= 1);
    let mut rng = Rng64::new(seed);
    let a = gaussian_matrix(&mut rng, rows, cols);
    let witness = gaussian_vector(&mut rng, cols);
    let ax = a.matvec(&witness).expect("dimensions agree");
    let b = DenseVector::new(
        (0..rows)
            .map(|i| ax[i] + rng.uniform_in(0.1, 1.1))
            .collect(),
    )
    .expect("finite");
    let sys = InequalitySystem::new(a, b, vec![RowKind::Le; rows])
        .expect("gaussian rows are nonzero almost surely");
    (sys, witness)
}
