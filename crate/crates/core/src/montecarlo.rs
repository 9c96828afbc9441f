//! Monte Carlo comparison of the reduced edge search against the full grid oracle.
//!
//! Every instance index owns a random stream derived from the base seed, so
//! user positions are identical at every noise level (a paired sweep) and the
//! summary does not depend on scheduling or worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::advantage::{edge_subspace_two_user, normalized_advantage, EdgeBranch};
use crate::channel::{generate_instance, instance_rng, Position, ScenarioConfig, ScenarioInstance};
use crate::error::{Error, Result};
use crate::model::{DecodingOrder, Objective, TargetKind, Weights};
use crate::optimize::{
    compare_results, edge_search_in, grid_oracle_two_user, GridSpec, OptimizationResult,
    DEFAULT_MATCH_REL_TOL,
};
use crate::stats::{binomial_se, mean, sample_std, spearman, wilson_interval, Z_95};

/// Minimum class size for the alpha separation comparison.
pub const MIN_CLASS_SAMPLES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightsCase {
    #[default]
    Equal,
    /// `w1 = 2 w2`.
    TwoToOne,
}

impl WeightsCase {
    pub fn weights(self) -> Weights<f64> {
        match self {
            WeightsCase::Equal => Weights::equal(2),
            WeightsCase::TwoToOne => Weights::new(vec![2.0, 1.0]).expect("positive weights"),
        }
    }
}

/// Nine log-spaced levels from 5e-12 W to 5e-8 W, two per decade.
pub fn default_noise_levels() -> Vec<f64> {
    let decades: [f64; 5] = [5e-12, 5e-11, 5e-10, 5e-9, 5e-8];
    let mut out = Vec::with_capacity(9);
    for pair in decades.windows(2) {
        out.push(pair[0]);
        out.push((pair[0] * pair[1]).sqrt());
    }
    out.push(decades[4]);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_instances: usize,
    pub base_seed: u64,
    pub weights_case: WeightsCase,
    /// Receiver noise powers to sweep; these override `scenario.radio.noise_power_w`.
    pub noise_levels_w: Vec<f64>,
    pub target_kind: TargetKind,
    pub log_base: f64,
    pub match_rel_tol: f64,
    /// Level whose oracle argmins are exported as the allocation scatter.
    pub scatter_noise_w: f64,
    pub alpha_threshold: f64,
    /// Level at which the "alpha above threshold predicts a global match" rule is scored.
    pub alpha_rule_noise_w: f64,
    pub scenario: ScenarioConfig,
    pub grid: GridSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_instances: 10_000,
            base_seed: 20_250_101,
            weights_case: WeightsCase::Equal,
            noise_levels_w: default_noise_levels(),
            target_kind: TargetKind::Static,
            log_base: 2.0,
            match_rel_tol: DEFAULT_MATCH_REL_TOL,
            scatter_noise_w: 5e-11,
            alpha_threshold: 0.7,
            alpha_rule_noise_w: 5e-9,
            scenario: ScenarioConfig::default(),
            grid: GridSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_instances == 0 {
            return bad("n_instances must be at least 1".into());
        }
        if self.noise_levels_w.is_empty() {
            return bad("noise_levels_w must not be empty".into());
        }
        if self
            .noise_levels_w
            .iter()
            .any(|v| !(*v > 0.0 && v.is_finite()))
        {
            return bad("noise levels must be positive and finite".into());
        }
        if self.noise_levels_w.windows(2).any(|w| w[1] <= w[0]) {
            return bad("noise levels must be strictly ascending".into());
        }
        if !(self.log_base > 0.0 && self.log_base != 1.0 && self.log_base.is_finite()) {
            return bad(format!(
                "log_base {} is not a valid logarithm base",
                self.log_base
            ));
        }
        if !(self.match_rel_tol >= 0.0) {
            return bad("match_rel_tol must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.alpha_threshold) {
            return bad("alpha_threshold must lie in [0, 1]".into());
        }
        self.scenario.validate()?;
        if self.scenario.n_users != 2 || self.scenario.geometry.bs_positions.len() != 2 {
            return bad("experiments run two users and two base stations".into());
        }
        self.grid.validate()?;
        if !self.grid.is_nested() {
            return bad(format!(
                "grid_points_edge - 1 ({}) must be a multiple of grid_points_2d - 1 ({}) for exact matching",
                self.grid.grid_points_edge - 1,
                self.grid.grid_points_2d - 1
            ));
        }
        Ok(())
    }

    pub fn objective(&self) -> Objective<f64> {
        Objective::with_log_base(self.target_kind, self.log_base)
    }
}

/// One optimizer outcome as stored in records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub f11: f64,
    pub f12: f64,
    pub value: f64,
    pub order: DecodingOrder,
    pub on_edge: bool,
    pub evaluations: usize,
}

impl From<&OptimizationResult<f64>> for ResultRecord {
    fn from(r: &OptimizationResult<f64>) -> Self {
        Self {
            f11: r.f11,
            f12: r.f12,
            value: r.value,
            order: r.order.clone(),
            on_edge: r.on_edge,
            evaluations: r.evaluations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub base_seed: u64,
    pub index: u64,
    pub noise_w: f64,
    pub user_positions: Vec<Position>,
    pub gains: [[f64; 2]; 2],
    pub powers: [f64; 2],
    pub alpha: f64,
    pub branch: EdgeBranch,
    pub oracle: ResultRecord,
    pub method: ResultRecord,
    pub rel_gap: f64,
    pub is_global: bool,
}

/// Oracle, reduced search, alpha and match outcome for one instance at one noise level.
pub fn run_instance(config: &ExperimentConfig, index: u64, noise_w: f64) -> Result<InstanceRecord> {
    let wrap = |e: Error| Error::Instance {
        seed: config.base_seed,
        index,
        noise_w,
        source: Box::new(e),
    };
    let scenario = config.scenario.with_noise(noise_w);
    let mut rng = instance_rng(config.base_seed, index);
    let inst = generate_instance(&mut rng, &scenario, config.base_seed).map_err(wrap)?;
    evaluate_instance(config, &inst, index, noise_w).map_err(wrap)
}

/// Runs oracle and method on an already drawn (or hand-made) instance.
pub fn evaluate_instance(
    config: &ExperimentConfig,
    inst: &ScenarioInstance,
    index: u64,
    noise_w: f64,
) -> Result<InstanceRecord> {
    let weights = config.weights_case.weights();
    let objective = config.objective();
    let subspace = edge_subspace_two_user(&inst.gains)?;
    let alpha = normalized_advantage(&inst.gains)?.0;
    let oracle =
        grid_oracle_two_user(&inst.gains, &inst.powers, &weights, &config.grid, objective)?;
    let method = edge_search_in(
        &subspace,
        &inst.gains,
        &inst.powers,
        &weights,
        &config.grid,
        objective,
    )?;
    let outcome = compare_results(&method, &oracle, config.match_rel_tol)?;
    let g = &inst.gains;
    Ok(InstanceRecord {
        base_seed: inst.seed_record,
        index,
        noise_w,
        user_positions: inst.user_positions.clone(),
        gains: [[g.get(0, 0), g.get(0, 1)], [g.get(1, 0), g.get(1, 1)]],
        powers: [inst.powers.get(0), inst.powers.get(1)],
        alpha,
        branch: subspace.branch,
        oracle: (&oracle).into(),
        method: (&method).into(),
        rel_gap: outcome.rel_gap,
        is_global: outcome.is_global,
    })
}

/// Records for every noise level (outer) and instance (inner, by index).
///
/// `workers` sizes a dedicated thread pool; `None` uses the global pool.
pub fn run_records(
    config: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<Vec<Vec<InstanceRecord>>> {
    config.validate()?;
    let job = || -> Vec<Result<Vec<InstanceRecord>>> {
        (0..config.n_instances as u64)
            .into_par_iter()
            .map(|index| {
                config
                    .noise_levels_w
                    .iter()
                    .map(|&noise| run_instance(config, index, noise))
                    .collect::<Result<Vec<_>>>()
            })
            .collect()
    };
    let per_instance = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(job),
        None => job(),
    };
    // Collected in index order; report the lowest failing index.
    let per_instance = per_instance.into_iter().collect::<Result<Vec<_>>>()?;
    let n_levels = config.noise_levels_w.len();
    let mut by_level: Vec<Vec<InstanceRecord>> = (0..n_levels)
        .map(|_| Vec::with_capacity(config.n_instances))
        .collect();
    for records in per_instance {
        for (level, rec) in records.into_iter().enumerate() {
            by_level[level].push(rec);
        }
    }
    Ok(by_level)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub count: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

impl ClassStats {
    fn of(xs: &[f64]) -> Self {
        let finite = |v: f64| v.is_finite().then_some(v);
        Self {
            count: xs.len(),
            mean: finite(mean(xs)),
            std: finite(sample_std(xs)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevelSummary {
    pub noise_w: f64,
    pub n_instances: usize,
    pub n_global: usize,
    pub pct_global: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Instances whose oracle argmin lies on a side of the unit square.
    pub n_edge_instances: usize,
    pub n_edge_global: usize,
    pub pct_edge_conditional: Option<f64>,
    pub mean_degradation_pct: f64,
    pub max_degradation_pct: f64,
    pub alpha_global: ClassStats,
    pub alpha_subopt: ClassStats,
}

impl NoiseLevelSummary {
    pub fn from_records(noise_w: f64, records: &[InstanceRecord]) -> Self {
        let n = records.len();
        let n_global = records.iter().filter(|r| r.is_global).count();
        let (ci_low, ci_high) = wilson_interval(n_global, n, Z_95);
        let edge: Vec<&InstanceRecord> = records.iter().filter(|r| r.oracle.on_edge).collect();
        let n_edge_global = edge.iter().filter(|r| r.is_global).count();
        let gaps: Vec<f64> = records.iter().map(|r| 100.0 * r.rel_gap).collect();
        let alphas = |global: bool| -> Vec<f64> {
            records
                .iter()
                .filter(|r| r.is_global == global)
                .map(|r| r.alpha)
                .collect()
        };
        Self {
            noise_w,
            n_instances: n,
            n_global,
            pct_global: n_global as f64 / n as f64,
            ci_low,
            ci_high,
            n_edge_instances: edge.len(),
            n_edge_global,
            pct_edge_conditional: (!edge.is_empty())
                .then(|| n_edge_global as f64 / edge.len() as f64),
            mean_degradation_pct: mean(&gaps),
            max_degradation_pct: gaps.iter().copied().fold(0.0, f64::max),
            alpha_global: ClassStats::of(&alphas(true)),
            alpha_subopt: ClassStats::of(&alphas(false)),
        }
    }

    /// Mean alpha of globally matched instances exceeds that of sub-optimal ones.
    /// `None` when either class has fewer than [`MIN_CLASS_SAMPLES`] samples.
    pub fn alpha_separated(&self) -> Option<bool> {
        if self.alpha_global.count < MIN_CLASS_SAMPLES
            || self.alpha_subopt.count < MIN_CLASS_SAMPLES
        {
            return None;
        }
        Some(self.alpha_global.mean? > self.alpha_subopt.mean?)
    }
}

/// One point of the oracle-argmin scatter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub instance_index: u64,
    pub f11_opt: f64,
    pub f12_opt: f64,
    pub on_edge: bool,
    pub is_global: bool,
    pub alpha: f64,
}

/// Accuracy of "predict a global match iff alpha > threshold" at one noise level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaRuleReport {
    pub noise_w: f64,
    pub threshold: f64,
    pub n: usize,
    pub accuracy: f64,
    /// Accuracy of always predicting the more frequent class.
    pub majority_baseline: f64,
    /// Fraction of global matches among instances with alpha above the threshold.
    pub precision: Option<f64>,
    /// Fraction of global matches among all instances.
    pub base_rate: f64,
}

impl AlphaRuleReport {
    pub fn from_records(noise_w: f64, threshold: f64, records: &[InstanceRecord]) -> Self {
        let n = records.len();
        let correct = records
            .iter()
            .filter(|r| (r.alpha > threshold) == r.is_global)
            .count();
        let n_global = records.iter().filter(|r| r.is_global).count();
        let above: Vec<&InstanceRecord> = records.iter().filter(|r| r.alpha > threshold).collect();
        let base_rate = n_global as f64 / n as f64;
        Self {
            noise_w,
            threshold,
            n,
            accuracy: correct as f64 / n as f64,
            majority_baseline: base_rate.max(1.0 - base_rate),
            precision: (!above.is_empty())
                .then(|| above.iter().filter(|r| r.is_global).count() as f64 / above.len() as f64),
            base_rate,
        }
    }

    pub fn beats_baseline(&self) -> bool {
        self.accuracy > self.majority_baseline
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub levels: Vec<NoiseLevelSummary>,
    pub scatter_noise_w: f64,
    pub scatter: Vec<ScatterPoint>,
    pub alpha_rule: Option<AlphaRuleReport>,
}

impl ExperimentSummary {
    pub fn level(&self, noise_w: f64) -> Option<&NoiseLevelSummary> {
        find_level(&self.config.noise_levels_w, noise_w).map(|i| &self.levels[i])
    }
}

/// Index of the level equal to `noise_w` up to a relative 1e-9.
pub fn find_level(levels: &[f64], noise_w: f64) -> Option<usize> {
    levels
        .iter()
        .position(|&l| ((l - noise_w) / noise_w).abs() <= 1e-9)
}

fn nearest_level(levels: &[f64], noise_w: f64) -> usize {
    let dist = |l: f64| (l.ln() - noise_w.ln()).abs();
    (0..levels.len())
        .min_by(|&a, &b| dist(levels[a]).total_cmp(&dist(levels[b])))
        .expect("at least one level")
}

/// Aggregates records produced by [`run_records`] for `config`.
pub fn summarize(config: &ExperimentConfig, records: &[Vec<InstanceRecord>]) -> ExperimentSummary {
    let levels = config
        .noise_levels_w
        .iter()
        .zip(records)
        .map(|(&noise, recs)| NoiseLevelSummary::from_records(noise, recs))
        .collect();
    let scatter_level = nearest_level(&config.noise_levels_w, config.scatter_noise_w);
    let scatter = records[scatter_level]
        .iter()
        .map(|r| ScatterPoint {
            instance_index: r.index,
            f11_opt: r.oracle.f11,
            f12_opt: r.oracle.f12,
            on_edge: r.oracle.on_edge,
            is_global: r.is_global,
            alpha: r.alpha,
        })
        .collect();
    let alpha_rule = find_level(&config.noise_levels_w, config.alpha_rule_noise_w).map(|i| {
        AlphaRuleReport::from_records(
            config.noise_levels_w[i],
            config.alpha_threshold,
            &records[i],
        )
    });
    ExperimentSummary {
        config: config.clone(),
        levels,
        scatter_noise_w: config.noise_levels_w[scatter_level],
        scatter,
        alpha_rule,
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    run_experiment_with_workers(config, None)
}

pub fn run_experiment_with_workers(
    config: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<ExperimentSummary> {
    let records = run_records(config, workers)?;
    Ok(summarize(config, &records))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendDirection {
    Increasing,
    Decreasing,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    /// Spearman correlation between noise level and global-match rate.
    pub rank_correlation: f64,
    /// No level's 95% interval lies entirely below its predecessor's.
    pub non_decreasing_within_ci: bool,
    pub direction: TrendDirection,
    /// Match rate at the noisiest level minus the rate at the quietest.
    pub endpoint_gain: f64,
    /// Standard error of `endpoint_gain` from the two binomial estimates.
    pub endpoint_se: f64,
}

pub fn trend_statistics(summary: &ExperimentSummary) -> Result<TrendReport> {
    let levels = &summary.levels;
    if levels.len() < 3 {
        return Err(Error::TooFewNoiseLevels(levels.len()));
    }
    let noise: Vec<f64> = levels.iter().map(|l| l.noise_w).collect();
    let pct: Vec<f64> = levels.iter().map(|l| l.pct_global).collect();
    let rank_correlation = spearman(&noise, &pct);
    let non_decreasing_within_ci = levels.windows(2).all(|w| w[1].ci_high >= w[0].ci_low);
    let direction = if rank_correlation > 0.0 {
        TrendDirection::Increasing
    } else if rank_correlation < 0.0 {
        TrendDirection::Decreasing
    } else {
        TrendDirection::Inconclusive
    };
    let (first, last) = (&levels[0], &levels[levels.len() - 1]);
    let endpoint_se = binomial_se(first.pct_global, first.n_instances)
        .hypot(binomial_se(last.pct_global, last.n_instances));
    Ok(TrendReport {
        rank_correlation,
        non_decreasing_within_ci,
        direction,
        endpoint_gain: last.pct_global - first.pct_global,
        endpoint_se,
    })
}
