//! The product space formulation of multi-set feasibility.
//!
//! Finding a point in `∩_i S_i ⊂ E` is equivalent to finding a point in
//! `T ∩ L ⊂ Eᵐ`, where `T = S_1 × … × S_m` and `L` is the diagonal subspace
//! of constant block vectors. Projecting onto `T` is blockwise projection;
//! projecting onto `L` replaces every block by the block average. One
//! averaged-projection step in `E` equals `P_L ∘ P_T` applied to the lifted
//! point.

use crate::linalg::DenseVector;

use super::{GeometryError, SetCollection};

/// Lifts `x` to the diagonal element `(x, x, …, x)` of the product space.
pub fn product_space_lift(
    collection: &SetCollection,
    x: &DenseVector,
) -> Result<Vec<DenseVector>, GeometryError> {
    if x.len() != collection.dimension() {
        return Err(GeometryError::DimensionMismatch(format!(
            "point has dimension {}, sets have {}",
            x.len(),
            collection.dimension()
        )));
    }
    Ok(vec![x.clone(); collection.len()])
}

/// Projects a product vector onto the diagonal subspace and returns the base
/// point: the average of the blocks. (The lifted projection is `m` copies of
/// this average.)
pub fn diagonal_project(blocks: &[DenseVector]) -> Result<DenseVector, GeometryError> {
    let first = blocks.first().ok_or(GeometryError::EmptyCollection)?;
    if blocks.iter().any(|b| b.len() != first.len()) {
        return Err(GeometryError::DimensionMismatch(
            "product blocks have unequal lengths".into(),
        ));
    }
    let mut avg = DenseVector::zeros(first.len());
    for b in blocks {
        avg.add_scaled(1.0, b);
    }
    avg.scale(1.0 / blocks.len() as f64);
    Ok(avg)
}

/// Projects a product vector onto `T = S_1 × … × S_m`, block by block.
pub fn blockwise_project(
    collection: &SetCollection,
    blocks: &[DenseVector],
) -> Result<Vec<DenseVector>, GeometryError> {
    if blocks.len() != collection.len() {
        return Err(GeometryError::DimensionMismatch(format!(
            "{} blocks for {} sets",
            blocks.len(),
            collection.len()
        )));
    }
    collection
        .sets()
        .iter()
        .zip(blocks.iter())
        .map(|(s, b)| s.project(b))
        .collect()
}

/// The product-space inner product `Σ_i ⟨u_i, v_i⟩`.
pub fn product_inner(u: &[DenseVector], v: &[DenseVector]) -> f64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.dot(b)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{averaged_step, ConvexSet};
    use crate::sampling::Rng64;

    fn random_collection(rng: &mut Rng64, n: usize, m: usize) -> SetCollection {
        let sets = (0..m)
            .map(|_| {
                let normal =
                    DenseVector::new((0..n).map(|_| 0.2 + rng.uniform()).collect()).unwrap();
                ConvexSet::halfspace(normal, rng.standard_normal()).unwrap()
            })
            .collect();
        SetCollection::new(sets, None).unwrap()
    }

    #[test]
    fn lift_then_diagonal_is_identity() {
        let mut rng = Rng64::new(3);
        let c = random_collection(&mut rng, 3, 4);
        let x = DenseVector::new(vec![1.0, -2.0, 0.5]).unwrap();
        let lifted = product_space_lift(&c, &x).unwrap();
        let back = diagonal_project(&lifted).unwrap();
        for k in 0..3 {
            assert!((back[k] - x[k]).abs() <= 1e-15);
        }
    }

    #[test]
    fn averaged_step_is_diagonal_of_blockwise_of_lift() {
        let mut rng = Rng64::new(5);
        for _ in 0..50 {
            let n = 2 + (rng.next_u64() % 3) as usize;
            let m = 1 + (rng.next_u64() % 4) as usize;
            let c = random_collection(&mut rng, n, m);
            let x = DenseVector::new((0..n).map(|_| rng.standard_normal()).collect()).unwrap();
            let direct = averaged_step(&c, &x).unwrap();
            let via_product =
                diagonal_project(&blockwise_project(&c, &product_space_lift(&c, &x).unwrap()).unwrap())
                    .unwrap();
            let diff = direct.sub(&via_product).norm();
            assert!(diff <= 1e-12, "pierra equivalence violated: {diff}");
        }
    }

    #[test]
    fn lifted_inner_product_scales_by_m() {
        let mut rng = Rng64::new(7);
        let c = random_collection(&mut rng, 3, 5);
        let x = DenseVector::new(vec![1.0, 2.0, 3.0]).unwrap();
        let y = DenseVector::new(vec![-1.0, 0.5, 2.0]).unwrap();
        let lx = product_space_lift(&c, &x).unwrap();
        let ly = product_space_lift(&c, &y).unwrap();
        let got = product_inner(&lx, &ly);
        assert!((got - 5.0 * x.dot(&y)).abs() <= 1e-12);
    }
}
