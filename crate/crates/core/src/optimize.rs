//! Grid searches over two-user allocations.
//!
//! The oracle scans the whole unit square `(f11, f12)`; the reduced method
//! scans only the two edges picked by the comparative-advantage criterion.
//! Grid points are `k / (n - 1)`, so an edge grid whose interval count is a
//! multiple of the square's contains every boundary point of the square
//! bit for bit, and a method that found the oracle's optimum reports exactly
//! the same value.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::advantage::{edge_subspace_two_user, order_users_by_advantage, EdgeSubspace};
use crate::error::{Error, Result};
use crate::model::{
    independent_sinr, target_independent, AllocationMatrix, ChannelGains, DecodingOrder,
    NormalizedPowers, Objective, TwoUserKernel, Weights,
};
use crate::scalar::Scalar;

/// Half-width, in local steps, of the optional refinement grid around a grid argmin.
const REFINE_HALF_STEPS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Points per axis of the full-square oracle grid.
    pub grid_points_2d: usize,
    /// Points per edge for the reduced search.
    pub grid_points_edge: usize,
    /// Zoom into the cell around the grid argmin with a finer local grid.
    pub refine: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            grid_points_2d: 201,
            grid_points_edge: 1001,
            refine: false,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points_2d < 2 || self.grid_points_edge < 2 {
            return Err(Error::InvalidConfig(
                "grid point counts must be at least 2".into(),
            ));
        }
        Ok(())
    }

    /// Whether the edge grid contains every boundary point of the 2D grid.
    pub fn is_nested(&self) -> bool {
        (self.grid_points_edge - 1).is_multiple_of(self.grid_points_2d - 1)
    }

    pub fn oracle_evaluations(&self) -> usize {
        self.grid_points_2d * self.grid_points_2d * 3
    }

    pub fn edge_evaluations(&self) -> usize {
        2 * self.grid_points_edge * 3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult<T> {
    pub f_opt: AllocationMatrix<T>,
    pub f11: T,
    pub f12: T,
    pub value: T,
    pub order: DecodingOrder,
    /// The argmin lies on one of the four sides of the unit square.
    pub on_edge: bool,
    /// Grid points visited times decoding orders, infeasible points included.
    pub evaluations: usize,
}

/// Grid candidate ordered lexicographically by `(value, f11, f12)`, which makes
/// the argmin independent of scan or reduction order.
#[derive(Debug, Clone, Copy)]
struct Candidate<T> {
    value: T,
    f11: T,
    f12: T,
    order: usize,
}

impl<T: Scalar> Candidate<T> {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.value
            .partial_cmp(&other.value)
            .unwrap_or(Ordering::Equal)
            .then(self.f11.partial_cmp(&other.f11).unwrap_or(Ordering::Equal))
            .then(self.f12.partial_cmp(&other.f12).unwrap_or(Ordering::Equal))
    }

    fn better(a: Option<Self>, b: Option<Self>) -> Option<Self> {
        match (a, b) {
            (Some(x), Some(y)) => Some(if y.key_cmp(&x) == Ordering::Less {
                y
            } else {
                x
            }),
            (x, None) => x,
            (None, y) => y,
        }
    }
}

fn grid_coord<T: Scalar>(k: usize, n: usize) -> T {
    T::from_count(k) / T::from_count(n - 1)
}

fn evaluate<T: Scalar>(kernel: &TwoUserKernel<T>, f11: T, f12: T) -> Option<Candidate<T>> {
    kernel.best_at(f11, f12).map(|(value, order)| Candidate {
        value,
        f11,
        f12,
        order,
    })
}

fn is_boundary<T: Scalar>(v: T) -> bool {
    v == T::zero() || v == T::one()
}

fn finish<T: Scalar>(
    best: Option<Candidate<T>>,
    evaluations: usize,
) -> Result<OptimizationResult<T>> {
    let c = best.ok_or(Error::NoFeasibleAllocation)?;
    Ok(OptimizationResult {
        f_opt: AllocationMatrix::two_user(c.f11, c.f12)?,
        f11: c.f11,
        f12: c.f12,
        value: c.value,
        order: DecodingOrder::two_user_orders()[c.order].clone(),
        on_edge: is_boundary(c.f11) || is_boundary(c.f12),
        evaluations,
    })
}

/// Local grid of `2 * REFINE_HALF_STEPS + 1` points covering `[center - step, center + step]`
/// clipped to `[0, 1]`.
fn refine_axis<T: Scalar>(center: T, step: T) -> Vec<T> {
    let lo = (center - step).max(T::zero());
    let hi = (center + step).min(T::one());
    let n = 2 * REFINE_HALF_STEPS + 1;
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                lo + (hi - lo) * grid_coord::<T>(k, n)
            }
        })
        .collect()
}

/// Brute-force minimum of the best-over-orders target on the full unit square.
pub fn grid_oracle_two_user<T: Scalar>(
    gains: &ChannelGains<T>,
    powers: &NormalizedPowers<T>,
    w: &Weights<T>,
    spec: &GridSpec,
    objective: Objective<T>,
) -> Result<OptimizationResult<T>> {
    spec.validate()?;
    let kernel = TwoUserKernel::new(gains, powers, w, objective)?;
    let n = spec.grid_points_2d;
    let axis: Vec<T> = (0..n).map(|k| grid_coord(k, n)).collect();
    let mut best = None;
    for &f11 in &axis {
        for &f12 in &axis {
            best = Candidate::better(best, evaluate(&kernel, f11, f12));
        }
    }
    let mut evaluations = spec.oracle_evaluations();
    if spec.refine {
        if let Some(c) = best {
            let step = grid_coord::<T>(1, n);
            let (xs, ys) = (refine_axis(c.f11, step), refine_axis(c.f12, step));
            for &f11 in &xs {
                for &f12 in &ys {
                    best = Candidate::better(best, evaluate(&kernel, f11, f12));
                }
            }
            evaluations += xs.len() * ys.len() * 3;
        }
    }
    finish(best, evaluations)
}

/// The reduced method: scan both selected edges at `grid_points_edge` points each.
pub fn edge_search_two_user<T: Scalar>(
    gains: &ChannelGains<T>,
    powers: &NormalizedPowers<T>,
    w: &Weights<T>,
    spec: &GridSpec,
    objective: Objective<T>,
) -> Result<OptimizationResult<T>> {
    let subspace = edge_subspace_two_user(gains)?;
    edge_search_in(&subspace, gains, powers, w, spec, objective)
}

/// Edge scan over a given subspace.
pub fn edge_search_in<T: Scalar>(
    subspace: &EdgeSubspace,
    gains: &ChannelGains<T>,
    powers: &NormalizedPowers<T>,
    w: &Weights<T>,
    spec: &GridSpec,
    objective: Objective<T>,
) -> Result<OptimizationResult<T>> {
    spec.validate()?;
    let kernel = TwoUserKernel::new(gains, powers, w, objective)?;
    let n = spec.grid_points_edge;
    let mut best = None;
    for edge in &subspace.edges {
        for k in 0..n {
            let (f11, f12) = edge.point(grid_coord::<T>(k, n));
            best = Candidate::better(best, evaluate(&kernel, f11, f12));
        }
    }
    let mut evaluations = spec.edge_evaluations();
    if spec.refine {
        if let Some(c) = best {
            let step = grid_coord::<T>(1, n);
            for edge in subspace.edges.iter().filter(|e| e.contains(c.f11, c.f12)) {
                let free = match edge.pinned {
                    crate::advantage::Coordinate::F11 => c.f12,
                    crate::advantage::Coordinate::F12 => c.f11,
                };
                let pts = refine_axis(free, step);
                for &t in &pts {
                    let (f11, f12) = edge.point(t);
                    best = Candidate::better(best, evaluate(&kernel, f11, f12));
                }
                evaluations += pts.len() * 3;
            }
        }
    }
    finish(best, evaluations)
}

/// Minimizer of the independent-reception target over a simplex grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependentOptimum<T> {
    pub f: AllocationMatrix<T>,
    pub value: T,
    /// Simplex grid step, `1 / steps`.
    pub step: T,
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Exhaustive search of `max_i w_i / log2(1 + x_i)` over allocations whose
/// columns are multiples of `1 / steps` summing to one. Small `N` only: the
/// grid has `C(steps + N - 1, N - 1)^M` points.
pub fn brute_force_independent<T: Scalar>(
    gains: &ChannelGains<T>,
    powers: &NormalizedPowers<T>,
    w: &Weights<T>,
    steps: usize,
) -> Result<IndependentOptimum<T>> {
    let (n, m) = (gains.n_users(), gains.n_bs());
    if n > 4 || m > 2 || steps == 0 {
        return Err(Error::InvalidConfig(format!(
            "brute force supports up to 4 users, 2 BSs and a positive step count (got {n}x{m}, {steps})"
        )));
    }
    let columns = compositions(steps, n);
    let denom = T::from_count(steps);
    let mut best: Option<(T, AllocationMatrix<T>)> = None;
    let mut idx = vec![0usize; m];
    loop {
        let rows: Vec<Vec<T>> = (0..n)
            .map(|i| {
                (0..m)
                    .map(|j| T::from_count(columns[idx[j]][i]) / denom)
                    .collect()
            })
            .collect();
        let f = AllocationMatrix::new(rows)?;
        let x = independent_sinr(&f, gains, powers)?;
        if let Ok(v) = target_independent(&x, w) {
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, f));
            }
        }
        // Odometer over the per-column compositions.
        let mut j = 0;
        while j < m {
            idx[j] += 1;
            if idx[j] < columns.len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == m {
            break;
        }
    }
    let (value, f) = best.ok_or(Error::NoFeasibleAllocation)?;
    Ok(IndependentOptimum {
        f,
        value,
        step: denom.recip(),
    })
}

/// Largest `f[i1][BS 2] * f[i2][BS 1]` over pairs `i1` ranked before `i2` by
/// comparative advantage; zero when the split structure holds exactly.
pub fn split_violation<T: Scalar>(gains: &ChannelGains<T>, f: &AllocationMatrix<T>) -> Result<T> {
    let order = order_users_by_advantage(gains)?;
    let mut worst = T::zero();
    for (a, &i1) in order.iter().enumerate() {
        for &i2 in &order[a + 1..] {
            worst = worst.max(f.get(i1, 1) * f.get(i2, 0));
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchOutcome {
    pub is_global: bool,
    pub rel_gap: f64,
}

pub const DEFAULT_MATCH_REL_TOL: f64 = 1e-9;

/// Relative gap of the method's value over the oracle's, clamped at zero.
pub fn compare_results<T: Scalar>(
    method: &OptimizationResult<T>,
    oracle: &OptimizationResult<T>,
    match_rel_tol: f64,
) -> Result<MatchOutcome> {
    let oracle_value = oracle.value.to_f64_lossy();
    if !(oracle_value > 0.0) {
        return Err(Error::NonPositiveOracle(oracle_value));
    }
    let rel_gap = ((method.value - oracle.value) / oracle.value)
        .to_f64_lossy()
        .max(0.0);
    Ok(MatchOutcome {
        is_global: rel_gap <= match_rel_tol,
        rel_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{best_over_sic_orders, TargetKind};

    fn instance() -> (ChannelGains<f64>, NormalizedPowers<f64>) {
        (
            ChannelGains::two_by_two([[3e-10, 4e-11], [2e-11, 1e-10]]).unwrap(),
            NormalizedPowers::new(vec![2e11, 2e11]).unwrap(),
        )
    }

    fn small_spec() -> GridSpec {
        GridSpec {
            grid_points_2d: 41,
            grid_points_edge: 201,
            refine: false,
        }
    }

    #[test]
    fn nested_grids_share_boundary_points_exactly() {
        for k in 0..=200 {
            assert_eq!(grid_coord::<f64>(k, 201), grid_coord::<f64>(5 * k, 1001));
        }
        assert!(GridSpec::default().is_nested());
        assert!(!GridSpec {
            grid_points_2d: 7,
            grid_points_edge: 10,
            refine: false
        }
        .is_nested());
    }

    #[test]
    fn oracle_value_reevaluates_exactly() {
        let (g, p) = instance();
        let w = Weights::equal(2);
        let obj = Objective::new(TargetKind::Static);
        let r = grid_oracle_two_user(&g, &p, &w, &small_spec(), obj).unwrap();
        let (v, order) = best_over_sic_orders(&r.f_opt, &g, &p, &w, TargetKind::Static).unwrap();
        assert_eq!(v, r.value);
        assert_eq!(order, r.order);
        assert_eq!(r.evaluations, 41 * 41 * 3);
        assert_eq!(r.on_edge, is_boundary(r.f11) || is_boundary(r.f12));
    }

    #[test]
    fn edge_search_counts_and_dominance() {
        let (g, p) = instance();
        let w = Weights::new(vec![2.0, 1.0]).unwrap();
        let obj = Objective::new(TargetKind::Static);
        let spec = small_spec();
        let oracle = grid_oracle_two_user(&g, &p, &w, &spec, obj).unwrap();
        let method = edge_search_two_user(&g, &p, &w, &spec, obj).unwrap();
        assert_eq!(method.evaluations, 2 * 201 * 3);
        assert!(method.on_edge);
        let sub = edge_subspace_two_user(&g).unwrap();
        assert!(sub.contains(method.f11, method.f12));
        let m = compare_results(&method, &oracle, DEFAULT_MATCH_REL_TOL).unwrap();
        assert!(m.rel_gap >= 0.0);
    }

    #[test]
    fn finer_nested_grid_never_increases_minimum() {
        let (g, p) = instance();
        let w = Weights::equal(2);
        let obj = Objective::new(TargetKind::Static);
        let coarse = grid_oracle_two_user(
            &g,
            &p,
            &w,
            &GridSpec {
                grid_points_2d: 21,
                ..small_spec()
            },
            obj,
        )
        .unwrap();
        let fine = grid_oracle_two_user(
            &g,
            &p,
            &w,
            &GridSpec {
                grid_points_2d: 81,
                ..small_spec()
            },
            obj,
        )
        .unwrap();
        assert!(fine.value <= coarse.value);
    }

    #[test]
    fn refinement_never_worsens() {
        let (g, p) = instance();
        let w = Weights::equal(2);
        let obj = Objective::new(TargetKind::Static);
        let plain = grid_oracle_two_user(&g, &p, &w, &small_spec(), obj).unwrap();
        let refined = grid_oracle_two_user(
            &g,
            &p,
            &w,
            &GridSpec {
                refine: true,
                ..small_spec()
            },
            obj,
        )
        .unwrap();
        assert!(refined.value <= plain.value);
        assert!(refined.evaluations > plain.evaluations);
        let e_plain = edge_search_two_user(&g, &p, &w, &small_spec(), obj).unwrap();
        let e_ref = edge_search_two_user(
            &g,
            &p,
            &w,
            &GridSpec {
                refine: true,
                ..small_spec()
            },
            obj,
        )
        .unwrap();
        assert!(e_ref.value <= e_plain.value);
    }

    #[test]
    fn corner_optimum_is_found_by_both() {
        // User 1 hears only BS 1 well, user 2 only BS 2: the corner (1, 0) is optimal.
        let g = ChannelGains::two_by_two([[1e-9, 1e-15], [1e-15, 1e-9]]).unwrap();
        let p = NormalizedPowers::new(vec![1e10, 1e10]).unwrap();
        let w = Weights::equal(2);
        let obj = Objective::new(TargetKind::Static);
        let spec = small_spec();
        let oracle = grid_oracle_two_user(&g, &p, &w, &spec, obj).unwrap();
        let method = edge_search_two_user(&g, &p, &w, &spec, obj).unwrap();
        assert_eq!((oracle.f11, oracle.f12), (1.0, 0.0));
        assert_eq!(method.value, oracle.value);
        let m = compare_results(&method, &oracle, DEFAULT_MATCH_REL_TOL).unwrap();
        assert!(m.is_global);
        assert_eq!(m.rel_gap, 0.0);
    }

    fn fake(value: f64) -> OptimizationResult<f64> {
        OptimizationResult {
            f_opt: AllocationMatrix::two_user(0.5, 0.5).unwrap(),
            f11: 0.5,
            f12: 0.5,
            value,
            order: DecodingOrder::NoSic,
            on_edge: false,
            evaluations: 0,
        }
    }

    #[test]
    fn compare_results_rules() {
        let m = compare_results(&fake(2.0), &fake(2.0), DEFAULT_MATCH_REL_TOL).unwrap();
        assert!(m.is_global && m.rel_gap == 0.0);
        let m = compare_results(&fake(1.9), &fake(2.0), DEFAULT_MATCH_REL_TOL).unwrap();
        assert!(m.is_global && m.rel_gap == 0.0);
        let m = compare_results(&fake(1.0004), &fake(1.0), DEFAULT_MATCH_REL_TOL).unwrap();
        assert!(!m.is_global);
        assert!((m.rel_gap - 4e-4).abs() < 1e-15);
        assert!(matches!(
            compare_results(&fake(1.0), &fake(0.0), 1e-9),
            Err(Error::NonPositiveOracle(_))
        ));
    }

    #[test]
    fn brute_force_single_user_takes_everything() {
        let g = ChannelGains::new(vec![vec![1.0, 2.0]]).unwrap();
        let p = NormalizedPowers::new(vec![1.0, 1.0]).unwrap();
        let r = brute_force_independent(&g, &p, &Weights::equal(1), 10).unwrap();
        assert_eq!(r.f.rows(), vec![vec![1.0, 1.0]]);
    }

    #[test]
    fn brute_force_pushes_power_to_weak_user() {
        let g = ChannelGains::new(vec![vec![1.0, 1.0], vec![1e-3, 1e-3]]).unwrap();
        let p = NormalizedPowers::new(vec![100.0, 100.0]).unwrap();
        let r = brute_force_independent(&g, &p, &Weights::equal(2), 20).unwrap();
        let weak_share = r.f.get(1, 0) + r.f.get(1, 1);
        assert!(weak_share > 1.5, "weak user gets {weak_share} of 2");
    }

    #[test]
    fn brute_force_symmetric_instance_has_symmetric_minimizer() {
        let g = ChannelGains::new(vec![vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let p = NormalizedPowers::new(vec![5.0, 5.0]).unwrap();
        let w = Weights::equal(2);
        let r = brute_force_independent(&g, &p, &w, 20).unwrap();
        let mirrored = AllocationMatrix::new(vec![
            vec![r.f.get(1, 1), r.f.get(1, 0)],
            vec![r.f.get(0, 1), r.f.get(0, 0)],
        ])
        .unwrap();
        let v = target_independent(&independent_sinr(&mirrored, &g, &p).unwrap(), &w).unwrap();
        assert_eq!(v, r.value);
    }

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(20, 3).len(), 231);
        assert!(compositions(5, 2)
            .iter()
            .all(|c| c.iter().sum::<usize>() == 5));
    }
}
