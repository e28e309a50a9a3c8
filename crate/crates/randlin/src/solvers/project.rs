//! Randomized row projection: the Kaczmarz iteration for equations and its
//! extension to mixed inequality/equality systems.

use crate::linalg::{DenseVector, LinalgError};
use crate::sampling::WeightedSampler;

use super::{InequalitySystem, IterationTrace, LinearSystem, RowKind, SolverConfig, SolverError};

// ---------------------------------------------------------------------------
// kaczmarz
// ---------------------------------------------------------------------------

/// Kaczmarz state: each step orthogonally projects the iterate onto the
/// hyperplane `{x : a_iᵀx = b_i}` of one row.
pub struct Kaczmarz<'a> {
    sys: &'a LinearSystem,
    x: DenseVector,
    x_star: Option<&'a DenseVector>,
}

impl<'a> Kaczmarz<'a> {
    pub fn new(
        sys: &'a LinearSystem,
        x0: &DenseVector,
        x_star: Option<&'a DenseVector>,
    ) -> Result<Self, SolverError> {
        if x0.len() != sys.a.cols() {
            return Err(LinalgError::DimensionMismatch(format!(
                "x0 has length {}, matrix has {} columns",
                x0.len(),
                sys.a.cols()
            ))
            .into());
        }
        if let Some(i) = (0..sys.a.rows()).find(|i| sys.a.row_sqnorm(*i) == 0.0) {
            return Err(SolverError::ZeroRow(i));
        }
        if let Some(s) = x_star {
            if s.len() != sys.a.cols() {
                return Err(LinalgError::DimensionMismatch(
                    "reference solution has wrong length".into(),
                )
                .into());
            }
        }
        Ok(Self {
            sys,
            x: x0.clone(),
            x_star,
        })
    }

    /// Sampling weights: cached row squared norms, so
    /// `P{i = k} = ‖a_k‖²/‖A‖_F²`.
    pub fn sampling_weights(&self) -> Vec<f64> {
        self.sys.a.row_sqnorms().to_vec()
    }

    /// Projects the iterate onto the hyperplane of row `i`:
    /// `x ← x − (a_iᵀx − b_i)/‖a_i‖² · a_i`.
    pub fn step(&mut self, i: usize) {
        let row = self.sys.a.row(i);
        let viol = dot(row, self.x.as_slice()) - self.sys.b[i];
        let scale = viol / self.sys.a.row_sqnorm(i);
        for (xk, ak) in self.x.as_mut_slice().iter_mut().zip(row.iter()) {
            *xk -= scale * ak;
        }
    }

    pub fn x(&self) -> &DenseVector {
        &self.x
    }

    /// `‖Ax − b‖`, evaluated exactly (`O(mn)`).
    pub fn residual_norm(&self) -> f64 {
        crate::linalg::residual(&self.sys.a, &self.x, &self.sys.b)
            .expect("dimensions checked")
            .norm()
    }

    /// `‖x − x*‖²` when a reference solution was supplied.
    pub fn dist_sq(&self) -> Option<f64> {
        self.x_star.map(|s| self.x.sub(s).sqnorm())
    }
}

/// Runs the randomized Kaczmarz iteration on `Ax = b`.
///
/// Consistency of the system is not checked: the convergence guarantee
/// assumes a solution exists. The trace records `‖x − x*‖²` when `x_star`
/// is supplied (in `dist_sq_estimate`) and always records `‖Ax − b‖`
/// (evaluated every `trace_every` iterations, which is also when the
/// stopping rule `‖Ax−b‖ ≤ tol` is applied).
pub fn kaczmarz(
    sys: &LinearSystem,
    x0: &DenseVector,
    cfg: &SolverConfig,
    x_star: Option<&DenseVector>,
) -> Result<(DenseVector, IterationTrace), SolverError> {
    cfg.validate()?;
    let mut state = Kaczmarz::new(sys, x0, x_star)?;
    let mut sampler = WeightedSampler::new(state.sampling_weights(), cfg.seed)?;
    let mut trace = IterationTrace::default();

    let r0 = state.residual_norm();
    trace.push(0, None, None, r0, state.dist_sq());
    if r0 <= cfg.tol {
        trace.converged = true;
        return Ok((state.x.clone(), trace));
    }

    for j in 0..cfg.max_iters {
        let i = sampler.draw();
        state.step(i);
        let last = j + 1 == cfg.max_iters;
        if (j + 1) % cfg.trace_every == 0 || last {
            let rnorm = state.residual_norm();
            trace.push(j + 1, Some(i), None, rnorm, state.dist_sq());
            trace.iters_run = j + 1;
            if rnorm <= cfg.tol {
                trace.converged = true;
                break;
            }
        }
    }
    Ok((state.x.clone(), trace))
}

// ---------------------------------------------------------------------------
// proj_inequalities
// ---------------------------------------------------------------------------

/// Row projection state for a mixed inequality/equality system. Equality rows
/// behave exactly like Kaczmarz; inequality rows move the iterate only while
/// violated.
pub struct ProjIneq<'a> {
    sys: &'a InequalitySystem,
    x: DenseVector,
    witness: Option<&'a DenseVector>,
}

impl<'a> ProjIneq<'a> {
    pub fn new(
        sys: &'a InequalitySystem,
        x0: &DenseVector,
        witness: Option<&'a DenseVector>,
    ) -> Result<Self, SolverError> {
        if x0.len() != sys.a.cols() {
            return Err(LinalgError::DimensionMismatch(format!(
                "x0 has length {}, matrix has {} columns",
                x0.len(),
                sys.a.cols()
            ))
            .into());
        }
        // Zero rows are already rejected by InequalitySystem::new; re-check
        // defensively since `sys` fields are public.
        if let Some(i) = (0..sys.a.rows()).find(|i| sys.a.row_sqnorm(*i) == 0.0) {
            return Err(SolverError::ZeroRow(i));
        }
        Ok(Self {
            sys,
            x: x0.clone(),
            witness,
        })
    }

    pub fn sampling_weights(&self) -> Vec<f64> {
        self.sys.a.row_sqnorms().to_vec()
    }

    /// One projection step on row `i`: `β = (a_iᵀx − b_i)⁺` for `≤` rows,
    /// `β = a_iᵀx − b_i` for `=` rows, then `x ← x − β/‖a_i‖² · a_i`.
    pub fn step(&mut self, i: usize) {
        let row = self.sys.a.row(i);
        let v = dot(row, self.x.as_slice()) - self.sys.b[i];
        let beta = match self.sys.row_kinds[i] {
            RowKind::Le => v.max(0.0),
            RowKind::Eq => v,
        };
        if beta == 0.0 {
            return;
        }
        let scale = beta / self.sys.a.row_sqnorm(i);
        for (xk, ak) in self.x.as_mut_slice().iter_mut().zip(row.iter()) {
            *xk -= scale * ak;
        }
    }

    pub fn x(&self) -> &DenseVector {
        &self.x
    }

    /// `‖e(Ax − b)‖`, the residual of the mixed system (`O(mn)`).
    pub fn residual_norm(&self) -> f64 {
        residual_map(self.sys, &self.x)
            .expect("dimensions checked")
            .norm()
    }

    pub fn dist_sq(&self) -> Option<f64> {
        self.witness.map(|w| self.x.sub(w).sqnorm())
    }
}

/// Runs randomized row projection on a mixed inequality/equality system.
///
/// The trace records `‖e(Ax − b)‖` and, when a feasible witness is supplied,
/// `‖x − witness‖²`. Stops when `‖e(Ax−b)‖ ≤ tol`, evaluated every
/// `trace_every` iterations. A nonempty feasible region is assumed for the
/// rate guarantee, not checked.
pub fn proj_inequalities(
    sys: &InequalitySystem,
    x0: &DenseVector,
    cfg: &SolverConfig,
    witness: Option<&DenseVector>,
) -> Result<(DenseVector, IterationTrace), SolverError> {
    cfg.validate()?;
    let mut state = ProjIneq::new(sys, x0, witness)?;
    let mut sampler = WeightedSampler::new(state.sampling_weights(), cfg.seed)?;
    let mut trace = IterationTrace::default();

    let r0 = state.residual_norm();
    trace.push(0, None, None, r0, state.dist_sq());
    if r0 <= cfg.tol {
        trace.converged = true;
        return Ok((state.x.clone(), trace));
    }

    for j in 0..cfg.max_iters {
        let i = sampler.draw();
        state.step(i);
        let last = j + 1 == cfg.max_iters;
        if (j + 1) % cfg.trace_every == 0 || last {
            let rnorm = state.residual_norm();
            trace.push(j + 1, Some(i), None, rnorm, state.dist_sq());
            trace.iters_run = j + 1;
            if rnorm <= cfg.tol {
                trace.converged = true;
                break;
            }
        }
    }
    Ok((state.x.clone(), trace))
}

/// The residual map `e(Ax − b)`: positive part on `≤` rows, identity on `=`
/// rows. Zero exactly on the feasible set.
pub fn residual_map(sys: &InequalitySystem, x: &DenseVector) -> Result<DenseVector, SolverError> {
    let ax = sys.a.matvec(x)?;
    let entries = (0..sys.rows())
        .map(|i| {
            let v = ax[i] - sys.b[i];
            match sys.row_kinds[i] {
                RowKind::Le => v.max(0.0),
                RowKind::Eq => v,
            }
        })
        .collect();
    Ok(DenseVector::new(entries)?)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::sampling::Rng64;
    use approx::assert_relative_eq;

    fn system(a: DenseMatrix, b: Vec<f64>) -> LinearSystem {
        LinearSystem::new(a, DenseVector::new(b).unwrap()).unwrap()
    }

    #[test]
    fn kaczmarz_single_row_one_step() {
        let a = DenseMatrix::from_row_major(1, 2, vec![1.0, 0.0]).unwrap();
        let sys = system(a, vec![1.0]);
        let cfg = SolverConfig::new(0, 10, 1e-12, 1);
        let (x, trace) = kaczmarz(&sys, &DenseVector::zeros(2), &cfg, None).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 0.0]);
        assert!(trace.converged);
        assert_eq!(trace.iters_run, 1);
    }

    #[test]
    fn kaczmarz_orthonormal_rows_exact_after_coverage() {
        // Orthogonal rows: projections commute, so once every row has been
        // drawn the iterate is exact.
        let sys = system(DenseMatrix::identity(3), vec![1.0, -2.0, 0.5]);
        let x0 = DenseVector::zeros(3);
        let mut state = Kaczmarz::new(&sys, &x0, None).unwrap();
        for i in [2usize, 0, 1] {
            state.step(i);
        }
        assert_eq!(state.x().as_slice(), &[1.0, -2.0, 0.5]);
    }

    #[test]
    fn kaczmarz_hand_projection() {
        let a = DenseMatrix::from_row_major(2, 2, vec![1.0, 0.0, 1.0, 1.0]).unwrap();
        let sys = system(a, vec![0.0, 0.0]);
        let x0 = DenseVector::new(vec![0.0, 1.0]).unwrap();
        let mut state = Kaczmarz::new(&sys, &x0, None).unwrap();
        state.step(1);
        assert_relative_eq!(state.x()[0], -0.5, max_relative = 1e-15);
        assert_relative_eq!(state.x()[1], 0.5, max_relative = 1e-15);
        assert!(state.x().sqnorm() <= x0.sqnorm());
    }

    #[test]
    fn kaczmarz_iterate_lands_on_hyperplane() {
        let mut rng = Rng64::new(33);
        let entries: Vec<f64> = (0..5 * 3).map(|_| rng.standard_normal()).collect();
        let a = DenseMatrix::from_row_major(5, 3, entries).unwrap();
        let b = DenseVector::new((0..5).map(|_| rng.standard_normal()).collect()).unwrap();
        let sys = LinearSystem::new(a.clone(), b.clone()).unwrap();
        let mut state = Kaczmarz::new(&sys, &DenseVector::zeros(3), None).unwrap();
        let mut sampler = WeightedSampler::new(state.sampling_weights(), 1).unwrap();
        for _ in 0..100 {
            let i = sampler.draw();
            state.step(i);
            let got: f64 = a
                .row(i)
                .iter()
                .zip(state.x().iter())
                .map(|(p, q)| p * q)
                .sum();
            assert_relative_eq!(got, b[i], max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn kaczmarz_rejects_zero_row() {
        let a = DenseMatrix::from_row_major(2, 2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let sys = system(a, vec![1.0, 0.0]);
        assert!(matches!(
            Kaczmarz::new(&sys, &DenseVector::zeros(2), None),
            Err(SolverError::ZeroRow(1))
        ));
    }

    #[test]
    fn proj_halfspace_scalar_fixed_point() {
        // x <= 0 from x0 = 1: one step lands on 0, then beta stays 0.
        let a = DenseMatrix::from_row_major(1, 1, vec![1.0]).unwrap();
        let sys =
            InequalitySystem::new(a, DenseVector::zeros(1), vec![RowKind::Le]).unwrap();
        let x0 = DenseVector::new(vec![1.0]).unwrap();
        let mut state = ProjIneq::new(&sys, &x0, None).unwrap();
        state.step(0);
        assert_eq!(state.x()[0], 0.0);
        for _ in 0..5 {
            state.step(0);
            assert_eq!(state.x()[0], 0.0);
        }
    }

    #[test]
    fn proj_feasible_start_never_moves() {
        let a = DenseMatrix::from_row_major(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let b = DenseVector::new(vec![1.0, 1.0]).unwrap();
        let sys = InequalitySystem::new(a, b, vec![RowKind::Le, RowKind::Le]).unwrap();
        let x0 = DenseVector::new(vec![0.25, -3.0]).unwrap();
        let cfg = SolverConfig::new(8, 50, 1e-15, 1);
        let (x, trace) = proj_inequalities(&sys, &x0, &cfg, None).unwrap();
        assert_eq!(x.as_slice(), x0.as_slice());
        assert!(trace.converged);
    }

    #[test]
    fn proj_mixed_rows_hand_example() {
        // rows: x1 <= 0 (LE), x1 + x2 = 0 (EQ), from x0 = (2, 0).
        let a = DenseMatrix::from_row_major(2, 2, vec![1.0, 0.0, 1.0, 1.0]).unwrap();
        let sys = InequalitySystem::new(
            a,
            DenseVector::zeros(2),
            vec![RowKind::Le, RowKind::Eq],
        )
        .unwrap();
        let x0 = DenseVector::new(vec![2.0, 0.0]).unwrap();

        let mut le_first = ProjIneq::new(&sys, &x0, None).unwrap();
        le_first.step(0);
        assert_eq!(le_first.x().as_slice(), &[0.0, 0.0]);
        assert_eq!(le_first.residual_norm(), 0.0);

        let mut eq_first = ProjIneq::new(&sys, &x0, None).unwrap();
        eq_first.step(1);
        assert_eq!(eq_first.x().as_slice(), &[1.0, -1.0]);
        let e = residual_map(&sys, eq_first.x()).unwrap();
        assert_eq!(e.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn residual_map_examples() {
        // Feasible point maps to zero.
        let a = DenseMatrix::from_row_major(1, 1, vec![1.0]).unwrap();
        let sys = InequalitySystem::new(
            a,
            DenseVector::new(vec![1.0]).unwrap(),
            vec![RowKind::Le],
        )
        .unwrap();
        let e = residual_map(&sys, &DenseVector::new(vec![3.0]).unwrap()).unwrap();
        assert_eq!(e.as_slice(), &[2.0]);
        let e = residual_map(&sys, &DenseVector::zeros(1)).unwrap();
        assert_eq!(e.as_slice(), &[0.0]);

        // All-EQ system reduces to Ax − b.
        let a = DenseMatrix::diagonal(&[2.0, 3.0]);
        let sys = InequalitySystem::new(
            a,
            DenseVector::new(vec![1.0, 1.0]).unwrap(),
            vec![RowKind::Eq, RowKind::Eq],
        )
        .unwrap();
        let x = DenseVector::new(vec![1.0, 1.0]).unwrap();
        let e = residual_map(&sys, &x).unwrap();
        assert_eq!(e.as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn kaczmarz_one_step_expected_contraction() {
        // Enumerating all m row choices with weights ‖a_k‖²/‖A‖_F², the
        // weighted average of ‖x₊ − x*‖² contracts by at least 1 − 1/κ².
        let mut rng = Rng64::new(88);
        for t in 0..20 {
            let n = 2 + (rng.next_u64() % 4) as usize;
            let m = n + 1 + (rng.next_u64() % (20 - n as u64)) as usize; // m <= 20
            let entries: Vec<f64> = (0..m * n).map(|_| rng.standard_normal()).collect();
            let a = DenseMatrix::from_row_major(m, n, entries).unwrap();
            let summary = match crate::linalg::spectral_summary(&a) {
                Ok(s) if s.full_column_rank => s,
                _ => continue,
            };
            let x_star =
                DenseVector::new((0..n).map(|_| rng.standard_normal()).collect()).unwrap();
            let b = a.matvec(&x_star).unwrap();
            let sys = LinearSystem::new(a.clone(), b).unwrap();
            let x = DenseVector::new((0..n).map(|_| rng.standard_normal()).collect()).unwrap();
            let d_sq = x.sub(&x_star).sqnorm();

            let frob_sq: f64 = (0..m).map(|i| a.row_sqnorm(i)).sum();
            let mut expected = 0.0;
            for i in 0..m {
                let mut state = Kaczmarz::new(&sys, &x, None).unwrap();
                state.step(i);
                expected += a.row_sqnorm(i) / frob_sq * state.x().sub(&x_star).sqnorm();
            }
            let kappa_sq = summary.scaled_cond * summary.scaled_cond;
            let bound = (1.0 - 1.0 / kappa_sq) * d_sq;
            assert!(
                expected <= bound + 1e-10 * d_sq,
                "trial {t}: E‖x₊−x*‖² = {expected} > {bound}"
            );
        }
    }

    #[test]
    fn proj_fejer_monotone_for_five_witnesses() {
        // Distance to any feasible point never increases along a run.
        let mut rng = Rng64::new(55);
        let m = 8;
        let n = 3;
        let entries: Vec<f64> = (0..m * n).map(|_| rng.standard_normal()).collect();
        let a = DenseMatrix::from_row_major(m, n, entries).unwrap();
        let center = DenseVector::new((0..n).map(|_| rng.standard_normal()).collect()).unwrap();
        let ax = a.matvec(&center).unwrap();
        let b = DenseVector::new((0..m).map(|i| ax[i] + 0.5).collect()).unwrap();
        let sys = InequalitySystem::new(a, b, vec![RowKind::Le; m]).unwrap();

        // Five feasible witnesses: small perturbations of the slack-0.5
        // center, kept only if they stay feasible.
        let mut witnesses = vec![center.clone()];
        while witnesses.len() < 5 {
            let mut w = center.clone();
            for k in 0..n {
                w[k] += 0.2 * rng.standard_normal();
            }
            if residual_map(&sys, &w).unwrap().norm() == 0.0 {
                witnesses.push(w);
            }
        }

        let mut x0 = center.clone();
        for k in 0..n {
            x0[k] += 3.0 * rng.standard_normal();
        }
        let mut state = ProjIneq::new(&sys, &x0, None).unwrap();
        let mut sampler = WeightedSampler::new(state.sampling_weights(), 5).unwrap();
        let mut dists: Vec<f64> = witnesses.iter().map(|w| state.x().sub(w).norm()).collect();
        for _ in 0..400 {
            state.step(sampler.draw());
            for (k, w) in witnesses.iter().enumerate() {
                let d = state.x().sub(w).norm();
                assert!(d <= dists[k] + 1e-10, "fejer violated: {d} > {}", dists[k]);
                dists[k] = d;
            }
        }
    }

    #[test]
    fn fejer_monotonicity_underdetermined_kaczmarz() {
        // 3x6 consistent system: distance to any solution never increases.
        let mut rng = Rng64::new(44);
        let entries: Vec<f64> = (0..3 * 6).map(|_| rng.standard_normal()).collect();
        let a = DenseMatrix::from_row_major(3, 6, entries).unwrap();
        let xsol = DenseVector::new((0..6).map(|_| rng.standard_normal()).collect()).unwrap();
        let b = a.matvec(&xsol).unwrap();
        let sys = LinearSystem::new(a.clone(), b.clone()).unwrap();

        // Five feasible witnesses: xsol plus null-space perturbations found
        // through the pseudoinverse (x + v with Av = 0).
        let mut witnesses = vec![xsol.clone()];
        for _ in 0..4 {
            let z = DenseVector::new((0..6).map(|_| rng.standard_normal()).collect()).unwrap();
            let az = a.matvec(&z).unwrap();
            let (corr, _) = crate::linalg::pseudoinverse_solve(&a, &az).unwrap();
            let v = z.sub(&corr); // A v = 0 up to rounding
            witnesses.push(xsol.add(&v));
        }
        for w in &witnesses {
            assert!(crate::linalg::residual(&a, w, &b).unwrap().norm() < 1e-8);
        }

        let x0 = DenseVector::new((0..6).map(|_| rng.standard_normal()).collect()).unwrap();
        let mut state = Kaczmarz::new(&sys, &x0, None).unwrap();
        let mut sampler = WeightedSampler::new(state.sampling_weights(), 7).unwrap();
        let mut dists: Vec<f64> = witnesses.iter().map(|w| state.x().sub(w).norm()).collect();
        for _ in 0..300 {
            state.step(sampler.draw());
            for (k, w) in witnesses.iter().enumerate() {
                let d = state.x().sub(w).norm();
                assert!(d <= dists[k] + 1e-10, "fejer violated: {d} > {}", dists[k]);
                dists[k] = d;
            }
        }
    }
}
