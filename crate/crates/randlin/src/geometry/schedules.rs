//! Projection schedules over a set collection.
//!
//! Every runner traces `√(Σ_i d(x, S_i)²)` — the feasibility residual, equal
//! to the product-space distance `d(0, Φ(x))` — as `residual_norm`, and the
//! squared distance to the intersection as `dist_sq_estimate` whenever a
//! distance oracle is supplied. Runs stop when the feasibility residual drops
//! to `tol` or the iteration budget is exhausted.

use crate::linalg::DenseVector;
use crate::sampling::WeightedSampler;
use crate::solvers::{IterationTrace, SolverConfig};

use super::{GeometryError, SetCollection};

/// Distance to the intersection `∩_i S_i`, supplied by the caller (for tests
/// and demos; exact intersections are rarely available in closed form).
pub type DistanceOracle<'a> = dyn Fn(&DenseVector) -> f64 + 'a;

struct ScheduleRun<'a> {
    collection: &'a SetCollection,
    cfg: &'a SolverConfig,
    oracle: Option<&'a DistanceOracle<'a>>,
    trace: IterationTrace,
}

impl<'a> ScheduleRun<'a> {
    fn new(
        collection: &'a SetCollection,
        x0: &DenseVector,
        cfg: &'a SolverConfig,
        oracle: Option<&'a DistanceOracle<'a>>,
    ) -> Result<Self, GeometryError> {
        cfg.validate()?;
        if x0.len() != collection.dimension() {
            return Err(GeometryError::DimensionMismatch(format!(
                "x0 has dimension {}, sets have {}",
                x0.len(),
                collection.dimension()
            )));
        }
        Ok(Self {
            collection,
            cfg,
            oracle,
            trace: IterationTrace::default(),
        })
    }

    /// Records the current point; returns true when the feasibility residual
    /// is within tolerance.
    fn record(
        &mut self,
        iter: usize,
        idx: Option<usize>,
        x: &DenseVector,
    ) -> Result<bool, GeometryError> {
        let resid = self.collection.sum_dist_sq(x)?.sqrt();
        let dist_sq = self.oracle.map(|f| {
            let d = f(x);
            d * d
        });
        self.trace.push(iter, idx, None, resid, dist_sq);
        if iter > 0 {
            self.trace.iters_run = iter;
        }
        Ok(resid <= self.cfg.tol)
    }

    fn should_record(&self, j: usize) -> bool {
        (j + 1).is_multiple_of(self.cfg.trace_every) || j + 1 == self.cfg.max_iters
    }

    fn finish(mut self, x: DenseVector) -> (DenseVector, IterationTrace) {
        self.trace.converged = self
            .trace
            .records
            .last()
            .is_some_and(|r| r.residual_norm <= self.cfg.tol);
        (x, self.trace)
    }
}

/// Projects onto one set drawn uniformly at random per iteration.
pub fn run_randomized_projections(
    collection: &SetCollection,
    x0: &DenseVector,
    cfg: &SolverConfig,
    oracle: Option<&DistanceOracle>,
) -> Result<(DenseVector, IterationTrace), GeometryError> {
    let mut run = ScheduleRun::new(collection, x0, cfg, oracle)?;
    let mut sampler = WeightedSampler::uniform(collection.len(), cfg.seed)?;
    let mut x = x0.clone();
    if run.record(0, None, &x)? {
        return Ok(run.finish(x));
    }
    for j in 0..cfg.max_iters {
        let i = sampler.draw();
        x = collection.sets()[i].project(&x)?;
        if run.should_record(j) && run.record(j + 1, Some(i), &x)? {
            break;
        }
    }
    Ok(run.finish(x))
}

/// Projects onto one set per iteration, drawn uniformly from all sets except
/// the one used in the previous iteration. Needs at least two sets.
pub fn run_norepeat_projections(
    collection: &SetCollection,
    x0: &DenseVector,
    cfg: &SolverConfig,
    oracle: Option<&DistanceOracle>,
) -> Result<(DenseVector, IterationTrace), GeometryError> {
    if collection.len() < 2 {
        return Err(GeometryError::SingleSet);
    }
    let mut run = ScheduleRun::new(collection, x0, cfg, oracle)?;
    let mut sampler = WeightedSampler::uniform(collection.len(), cfg.seed)?;
    let mut x = x0.clone();
    if run.record(0, None, &x)? {
        return Ok(run.finish(x));
    }
    let mut prev: Option<usize> = None;
    for j in 0..cfg.max_iters {
        let i = match prev {
            None => sampler.draw(),
            Some(p) => sampler.draw_excluding(p)?,
        };
        prev = Some(i);
        x = collection.sets()[i].project(&x)?;
        if run.should_record(j) && run.record(j + 1, Some(i), &x)? {
            break;
        }
    }
    Ok(run.finish(x))
}

/// One averaged-projection step: the mean of all set projections of `x`.
pub fn averaged_step(
    collection: &SetCollection,
    x: &DenseVector,
) -> Result<DenseVector, GeometryError> {
    let mut acc = DenseVector::zeros(x.len());
    for s in collection.sets() {
        acc.add_scaled(1.0, &s.project(x)?);
    }
    acc.scale(1.0 / collection.len() as f64);
    Ok(acc)
}

/// Deterministic averaged projections: `x ← (1/m) Σ_i P_{S_i}(x)`.
pub fn run_averaged_projections(
    collection: &SetCollection,
    x0: &DenseVector,
    cfg: &SolverConfig,
    oracle: Option<&DistanceOracle>,
) -> Result<(DenseVector, IterationTrace), GeometryError> {
    let mut run = ScheduleRun::new(collection, x0, cfg, oracle)?;
    let mut x = x0.clone();
    if run.record(0, None, &x)? {
        return Ok(run.finish(x));
    }
    for j in 0..cfg.max_iters {
        x = averaged_step(collection, &x)?;
        if run.should_record(j) && run.record(j + 1, None, &x)? {
            break;
        }
    }
    Ok(run.finish(x))
}

/// Deterministic cyclic alternation: set `j mod m` at iteration `j`.
pub fn run_alternating_projections(
    collection: &SetCollection,
    x0: &DenseVector,
    cfg: &SolverConfig,
    oracle: Option<&DistanceOracle>,
) -> Result<(DenseVector, IterationTrace), GeometryError> {
    let mut run = ScheduleRun::new(collection, x0, cfg, oracle)?;
    let mut x = x0.clone();
    if run.record(0, None, &x)? {
        return Ok(run.finish(x));
    }
    for j in 0..cfg.max_iters {
        let i = j % collection.len();
        x = collection.sets()[i].project(&x)?;
        if run.should_record(j) && run.record(j + 1, Some(i), &x)? {
            break;
        }
    }
    Ok(run.finish(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexSet;
    use approx::assert_relative_eq;

    fn vec2(a: f64, b: f64) -> DenseVector {
        DenseVector::new(vec![a, b]).unwrap()
    }

    /// The two coordinate axes of the plane, intersecting only at the origin.
    fn orthogonal_lines() -> SetCollection {
        SetCollection::new(
            vec![
                ConvexSet::hyperplane(vec2(0.0, 1.0), 0.0).unwrap(), // y = 0
                ConvexSet::hyperplane(vec2(1.0, 0.0), 0.0).unwrap(), // x = 0
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn single_set_converges_in_one_iteration() {
        let c = SetCollection::new(
            vec![ConvexSet::hyperplane(vec2(0.0, 1.0), 2.0).unwrap()],
            None,
        )
        .unwrap();
        let cfg = SolverConfig::new(5, 10, 1e-12, 1);
        let (x, trace) = run_randomized_projections(&c, &vec2(3.0, 7.0), &cfg, None).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.iters_run, 1);
        assert_eq!(x.as_slice(), &[3.0, 2.0]);
    }

    #[test]
    fn orthogonal_lines_exact_after_both_seen() {
        let c = orthogonal_lines();
        let cfg = SolverConfig::new(2, 100, 1e-15, 1);
        let (x, trace) = run_norepeat_projections(&c, &vec2(1.0, 1.0), &cfg, None).unwrap();
        assert!(trace.converged);
        assert!(trace.iters_run <= 2);
        assert_eq!(x.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn norepeat_two_sets_alternates_deterministically() {
        let sets = vec![
            ConvexSet::hyperplane(vec2(0.0, 1.0), 0.0).unwrap(), // y = 0
            ConvexSet::hyperplane(vec2(1.0, 2.0), 1.0).unwrap(), // x + 2y = 1
        ];
        let c = SetCollection::new(sets, None).unwrap();
        let cfg = SolverConfig::new(3, 8, 1e-300, 1);
        let (_, trace) = run_norepeat_projections(&c, &vec2(0.0, 1.0), &cfg, None).unwrap();
        let idx: Vec<usize> = trace
            .records
            .iter()
            .filter_map(|r| r.chosen_index)
            .collect();
        assert_eq!(idx.len(), 8);
        for w in idx.windows(2) {
            assert_ne!(w[0], w[1]);
        }
    }

    #[test]
    fn norepeat_never_repeats_long_run() {
        // Three lines with no common point, so the run never terminates early.
        let sets = vec![
            ConvexSet::hyperplane(vec2(0.0, 1.0), 0.0).unwrap(),
            ConvexSet::hyperplane(vec2(1.0, 0.0), 0.0).unwrap(),
            ConvexSet::hyperplane(vec2(1.0, 1.0), 1.0).unwrap(),
        ];
        let c = SetCollection::new(sets, None).unwrap();
        let cfg = SolverConfig::new(17, 100_000, 1e-300, 1);
        let (_, trace) = run_norepeat_projections(&c, &vec2(5.0, 5.0), &cfg, None).unwrap();
        let idx: Vec<usize> = trace
            .records
            .iter()
            .filter_map(|r| r.chosen_index)
            .collect();
        assert!(idx.len() >= 100_000 - 1);
        for w in idx.windows(2) {
            assert_ne!(w[0], w[1], "consecutive repeat in no-repeat schedule");
        }
    }

    #[test]
    fn norepeat_rejects_single_set() {
        let c = SetCollection::new(
            vec![ConvexSet::hyperplane(vec2(0.0, 1.0), 0.0).unwrap()],
            None,
        )
        .unwrap();
        let cfg = SolverConfig::new(0, 10, 1e-12, 1);
        assert!(matches!(
            run_norepeat_projections(&c, &vec2(1.0, 1.0), &cfg, None),
            Err(GeometryError::SingleSet)
        ));
    }

    #[test]
    fn averaged_halves_on_orthogonal_lines() {
        let c = orthogonal_lines();
        let x1 = averaged_step(&c, &vec2(2.0, 2.0)).unwrap();
        assert_eq!(x1.as_slice(), &[1.0, 1.0]);
        let cfg = SolverConfig::new(0, 30, 1e-12, 1);
        let oracle = |x: &DenseVector| x.norm(); // intersection is the origin
        let (x, trace) =
            run_averaged_projections(&c, &vec2(2.0, 2.0), &cfg, Some(&oracle)).unwrap();
        assert!(x.norm() < 1e-8);
        // Squared distance to the intersection drops by 4 each iteration.
        let d: Vec<f64> = trace
            .records
            .iter()
            .map(|r| r.dist_sq_estimate.unwrap())
            .collect();
        for w in d.windows(2) {
            if w[1] > 0.0 {
                assert_relative_eq!(w[0] / w[1], 4.0, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn averaged_fixed_point_at_intersection_member() {
        let c = orthogonal_lines();
        let x0 = DenseVector::zeros(2);
        let x1 = averaged_step(&c, &x0).unwrap();
        assert_eq!(x1.as_slice(), x0.as_slice());
    }

    #[test]
    fn mrap_one_step_identity_on_polyhedra() {
        use crate::geometry::polyhedral_distance_oracle;
        use crate::sampling::Rng64;

        // Random halfspace collections with a common interior point. The
        // expected one-step contraction of the uniform schedule obeys
        //   (1/m) Σ_i d(P_i x, S)²  ≤  d(x,S)² − (1/m) Σ_i d(x,S_i)²,
        // and the averaged step is dominated through Jensen's inequality:
        //   d(averaged step, S) ≤ (1/m) Σ_i d(P_i x, S).
        let mut rng = Rng64::new(0x3E);
        let eps = 1e-10;
        for t in 0..15 {
            let n = 1 + (t % 3); // <= 3
            let m = 2 + (t % 3); // <= 4
            let witness =
                DenseVector::new((0..n).map(|_| rng.standard_normal()).collect()).unwrap();
            let sets: Vec<ConvexSet> = (0..m)
                .map(|_| {
                    let normal = DenseVector::new(
                        (0..n).map(|_| rng.standard_normal()).collect(),
                    )
                    .unwrap();
                    let offset = normal.dot(&witness) + 0.2 + rng.uniform();
                    ConvexSet::halfspace(normal, offset).unwrap()
                })
                .collect();
            let c = SetCollection::new(sets, None).unwrap();
            let sys = c.to_inequality_system().unwrap();
            let dist = |x: &DenseVector| polyhedral_distance_oracle(&sys, x, eps).unwrap();

            let mut x = witness.clone();
            for k in 0..n {
                x[k] += 3.0 * rng.standard_normal();
            }
            if c.sum_dist_sq(&x).unwrap() < 1e-6 {
                continue; // sampled a feasible point; nothing to contract
            }
            let d0 = dist(&x);
            let mut avg_d_sq = 0.0;
            let mut avg_d = 0.0;
            for s in c.sets() {
                let p = s.project(&x).unwrap();
                let dp = dist(&p);
                avg_d_sq += dp * dp / m as f64;
                avg_d += dp / m as f64;
            }
            let identity_rhs = d0 * d0 - c.sum_dist_sq(&x).unwrap() / m as f64;
            assert!(
                avg_d_sq <= identity_rhs + 1e-8,
                "trial {t}: avg d² {avg_d_sq} > {identity_rhs}"
            );
            let averaged = averaged_step(&c, &x).unwrap();
            let d_avg = dist(&averaged);
            assert!(
                d_avg <= avg_d + 1e-8,
                "trial {t}: Jensen violated: {d_avg} > {avg_d}"
            );
        }
    }

    #[test]
    fn alternating_cycles_in_order() {
        // Two non-orthogonal lines: convergence is geometric, never exact,
        // so all four iterations run.
        let sets = vec![
            ConvexSet::hyperplane(vec2(0.0, 1.0), 0.0).unwrap(), // y = 0
            ConvexSet::hyperplane(vec2(1.0, 2.0), 1.0).unwrap(), // x + 2y = 1
        ];
        let c = SetCollection::new(sets, None).unwrap();
        let cfg = SolverConfig::new(0, 4, 1e-300, 1);
        let (_, trace) = run_alternating_projections(&c, &vec2(0.0, 1.0), &cfg, None).unwrap();
        let idx: Vec<usize> = trace
            .records
            .iter()
            .filter_map(|r| r.chosen_index)
            .collect();
        assert_eq!(idx, vec![0, 1, 0, 1]);
    }
}
