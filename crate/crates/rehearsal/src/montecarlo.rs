//! Repeated-trial estimates of forgetting, generalization error and the full
//! error table, with standard errors, parameter sweeps, and random-matrix
//! identity checks.
//!
//! Trial `k` draws from the ChaCha streams of `(seed, k)`, so results do not
//! depend on the worker count. Within a trial every strategy trains on the same
//! curriculum.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{draw_curriculum, draw_reduced_curriculum, generate_ground_truth, GroundTruthKind, GroundTruthSet, ProblemConfig};
use crate::rng::{stream, RngStreams};
use crate::solver::pinv_apply;
use crate::theory::{predict_recursive, Geometry, MemoryModel, Prediction, Rehearsal};
use crate::trainers::{train_on, Partition, SequentialOrder, StrategyKind, StrategySpec, TrainTrace};

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub mean: f64,
    /// Sample standard deviation over `√trials`.
    pub std_error: f64,
    pub trials: usize,
}

impl EstimateWithError {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::TooFewTrials(n));
        }
        let mean = compensated_sum(samples.iter().copied()) / n as f64;
        let ss = compensated_sum(samples.iter().map(|x| (x - mean) * (x - mean)));
        let var = ss / (n - 1) as f64;
        Ok(EstimateWithError { mean, std_error: (var / n as f64).sqrt(), trials: n })
    }

    /// `(mean − target)/SE`; zero for an exact match with vanishing SE.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = self.mean - target;
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d.abs() <= 1e-12 * target.abs().max(self.mean.abs()).max(1e-300) {
            0.0
        } else {
            d.signum() * f64::INFINITY
        }
    }

    pub fn within(&self, target: f64, k: f64) -> bool {
        self.z_score(target).abs() <= k
    }
}

/// How feature matrices are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// Full `p`-dimensional Gaussian features.
    Dense,
    /// Exact-in-law reduced representation of dimension `rank + samples`.
    Reduced,
    /// Dense up to [`AUTO_DENSE_LIMIT`], reduced beyond.
    #[default]
    Auto,
}

pub const AUTO_DENSE_LIMIT: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub trials: usize,
    pub seed: u64,
    /// Worker threads; `None` uses one per available core.
    pub workers: Option<usize>,
    pub sampler: Sampler,
    /// Exploratory mode: draw a fresh ground-truth set of this kind every trial.
    pub redraw_ground_truth: Option<GroundTruthKind>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { trials: 1000, seed: 0, workers: None, sampler: Sampler::Auto, redraw_ground_truth: None }
    }
}

impl RunOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        RunOptions { trials, seed, ..Default::default() }
    }

    fn resolve_sampler(&self, cfg: &ProblemConfig) -> Sampler {
        match self.sampler {
            Sampler::Auto if cfg.p > AUTO_DENSE_LIMIT && cfg.p >= cfg.tasks + cfg.total_samples() => Sampler::Reduced,
            Sampler::Auto => Sampler::Dense,
            s => s,
        }
    }
}

/// Aggregated results of one strategy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategySummary {
    pub strategy: String,
    pub spec: StrategySpec,
    pub forgetting: Option<EstimateWithError>,
    pub generalization: EstimateWithError,
    /// `errors[i − 1][t − 1]` estimates `E‖w_t − w*_i‖²`.
    pub errors: Vec<Vec<EstimateWithError>>,
    /// Realized hybrid partitions with multiplicities.
    pub partitions: Vec<(Partition, usize)>,
    #[serde(skip)]
    pub forgetting_samples: Vec<f64>,
    #[serde(skip)]
    pub generalization_samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub cfg: ProblemConfig,
    pub options: RunOptions,
    pub sampler_used: Sampler,
    pub strategies: Vec<StrategySummary>,
    pub successful_trials: usize,
    pub failed_trials: usize,
}

/// Paired difference `a − b` of two strategies on common data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedDifference {
    pub forgetting: Option<EstimateWithError>,
    pub generalization: EstimateWithError,
    /// `√(SE_a² + SE_b²)` for the forgetting difference.
    pub combined_se_forgetting: Option<f64>,
    pub combined_se_generalization: f64,
}

impl RunReport {
    pub fn strategy(&self, name: &str) -> Option<&StrategySummary> {
        self.strategies.iter().find(|s| s.strategy == name)
    }

    pub fn paired_difference(&self, a: usize, b: usize) -> Result<PairedDifference> {
        let (sa, sb) = (&self.strategies[a], &self.strategies[b]);
        let diff = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p - q).collect::<Vec<_>>();
        let forgetting = if sa.forgetting_samples.is_empty() {
            None
        } else {
            Some(EstimateWithError::from_samples(&diff(&sa.forgetting_samples, &sb.forgetting_samples))?)
        };
        let generalization = EstimateWithError::from_samples(&diff(&sa.generalization_samples, &sb.generalization_samples))?;
        let comb = |x: &EstimateWithError, y: &EstimateWithError| x.std_error.hypot(y.std_error);
        Ok(PairedDifference {
            forgetting,
            generalization,
            combined_se_forgetting: sa.forgetting.as_ref().zip(sb.forgetting.as_ref()).map(|(x, y)| comb(x, y)),
            combined_se_generalization: comb(&sa.generalization, &sb.generalization),
        })
    }
}

fn degenerate(e: &Error) -> bool {
    matches!(e, Error::SingularGram { .. } | Error::FitTolerance { .. })
}

struct TrialRecord {
    errors: Vec<DMatrix<f64>>,
    partitions: Vec<Option<Partition>>,
}

fn trial_gt_seed(master: u64, k: u64) -> u64 {
    master ^ (k + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn one_trial(
    cfg: &ProblemConfig,
    gt: &GroundTruthSet,
    specs: &[StrategySpec],
    opts: &RunOptions,
    sampler: Sampler,
    k: u64,
) -> Result<Option<TrialRecord>> {
    let mut streams = RngStreams::for_trial(opts.seed, k);
    let fresh;
    let gt = match &opts.redraw_ground_truth {
        Some(kind) => {
            fresh = generate_ground_truth(kind, cfg.tasks, cfg.p, trial_gt_seed(opts.seed, k))?;
            &fresh
        }
        None => gt,
    };
    let (train_gt, cur) = match sampler {
        Sampler::Reduced => draw_reduced_curriculum(cfg, gt, &mut streams)?,
        _ => (gt.clone(), draw_curriculum(cfg, gt, &mut streams)?),
    };
    let mut rec = TrialRecord { errors: Vec::with_capacity(specs.len()), partitions: Vec::with_capacity(specs.len()) };
    for spec in specs {
        let tr: TrainTrace = match train_on(cfg, &train_gt, &cur, spec) {
            Ok(t) => t,
            Err(e) if degenerate(&e) => return Ok(None),
            Err(e) => return Err(e),
        };
        rec.errors.push(tr.errors);
        rec.partitions.push(tr.partition);
    }
    Ok(Some(rec))
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::ConfigInvalid("workers must be at least 1".into()));
        }
        b = b.num_threads(w);
    }
    let pool = b.build().map_err(|e| Error::ConfigInvalid(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs every strategy on the same data in each trial.
pub fn run_paired(cfg: &ProblemConfig, gt: &GroundTruthSet, specs: &[StrategySpec], opts: &RunOptions) -> Result<RunReport> {
    cfg.validate()?;
    if opts.trials < 2 {
        return Err(Error::TooFewTrials(opts.trials));
    }
    if specs.is_empty() {
        return Err(Error::ConfigInvalid("no strategies to run".into()));
    }
    for s in specs {
        s.validate(cfg.tasks)?;
    }
    let sampler = opts.resolve_sampler(cfg);
    let results: Vec<Result<Option<TrialRecord>>> = with_pool(opts.workers, || {
        (0..opts.trials as u64).into_par_iter().map(|k| one_trial(cfg, gt, specs, opts, sampler, k)).collect()
    })?;

    let tt = cfg.tasks;
    let mut failed = 0usize;
    let mut tables: Vec<Vec<DMatrix<f64>>> = vec![Vec::with_capacity(opts.trials); specs.len()];
    let mut parts: Vec<BTreeMap<String, (Partition, usize)>> = vec![BTreeMap::new(); specs.len()];
    for r in results {
        match r? {
            None => failed += 1,
            Some(rec) => {
                for (s, (e, p)) in rec.errors.into_iter().zip(rec.partitions).enumerate() {
                    tables[s].push(e);
                    if let Some(p) = p {
                        let key = format!("{:?}", p.similar);
                        parts[s].entry(key).or_insert((p, 0)).1 += 1;
                    }
                }
            }
        }
    }
    if failed * 100 > opts.trials {
        return Err(Error::TooManyDegenerateDraws { failed, trials: opts.trials });
    }
    let ok = opts.trials - failed;
    if ok < 2 {
        return Err(Error::TooFewTrials(ok));
    }

    let mut strategies = Vec::with_capacity(specs.len());
    for (s, spec) in specs.iter().enumerate() {
        let tab = &tables[s];
        let metrics: Vec<Prediction> = tab.iter().map(|e| Prediction::from_expected(e.clone())).collect();
        let f_samples: Vec<f64> = metrics.iter().filter_map(|m| m.forgetting).collect();
        let g_samples: Vec<f64> = metrics.iter().map(|m| m.generalization).collect();
        let mut errors = Vec::with_capacity(tt);
        for i in 0..tt {
            let mut row = Vec::with_capacity(tt);
            for t in 0..tt {
                let v: Vec<f64> = tab.iter().map(|e| e[(i, t)]).collect();
                row.push(EstimateWithError::from_samples(&v)?);
            }
            errors.push(row);
        }
        strategies.push(StrategySummary {
            strategy: spec.kind.name().to_string(),
            spec: spec.clone(),
            forgetting: if f_samples.is_empty() { None } else { Some(EstimateWithError::from_samples(&f_samples)?) },
            generalization: EstimateWithError::from_samples(&g_samples)?,
            errors,
            partitions: std::mem::take(&mut parts[s]).into_values().collect(),
            forgetting_samples: f_samples,
            generalization_samples: g_samples,
        });
    }
    Ok(RunReport { cfg: *cfg, options: opts.clone(), sampler_used: sampler, strategies, successful_trials: ok, failed_trials: failed })
}

/// Single-strategy estimate.
pub fn run_trials(cfg: &ProblemConfig, gt: &GroundTruthSet, spec: &StrategySpec, opts: &RunOptions) -> Result<StrategySummary> {
    let mut rep = run_paired(cfg, gt, std::slice::from_ref(spec), opts)?;
    Ok(rep.strategies.remove(0))
}

/// Theory for a simulated strategy: `None` when the revisit order is not the
/// default one. Hybrid predictions average over the realized partitions.
pub fn theory_for(cfg: &ProblemConfig, geom: &Geometry, summary: &StrategySummary) -> Result<Option<Prediction>> {
    let spec = &summary.spec;
    match spec.kind {
        StrategyKind::Concurrent => predict_recursive(cfg, geom, &Rehearsal::Concurrent, MemoryModel::Exact).map(Some),
        StrategyKind::Sequential => {
            if spec.order != SequentialOrder::OldestFirst {
                return Ok(None);
            }
            predict_recursive(cfg, geom, &Rehearsal::Sequential, MemoryModel::Exact).map(Some)
        }
        StrategyKind::Hybrid => {
            let total: usize = summary.partitions.iter().map(|p| p.1).sum();
            if total == 0 {
                return Ok(None);
            }
            let mut acc = DMatrix::zeros(cfg.tasks, cfg.tasks);
            for (part, count) in &summary.partitions {
                let pr = predict_recursive(cfg, geom, &Rehearsal::Hybrid(part.clone()), MemoryModel::Exact)?;
                acc += pr.expected * (*count as f64 / total as f64);
            }
            Ok(Some(Prediction::from_expected(acc)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    GapSq,
    #[serde(rename = "M")]
    Memory,
    P,
    Sigma,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::GapSq => "gap_sq",
            SweepAxis::Memory => "M",
            SweepAxis::P => "p",
            SweepAxis::Sigma => "sigma",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub base: ProblemConfig,
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub strategies: Vec<StrategySpec>,
    /// Ground truths for every axis but `gap_sq`, which always uses equal gaps.
    pub ground_truth: GroundTruthKind,
    pub gt_seed: u64,
    pub options: RunOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointEstimate {
    pub strategy: String,
    pub forgetting: Option<EstimateWithError>,
    pub generalization: EstimateWithError,
    pub theory_forgetting: Option<f64>,
    pub theory_generalization: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub cfg: ProblemConfig,
    pub estimates: Vec<PointEstimate>,
    /// First strategy minus second, paired.
    pub difference: Option<PairedDifference>,
    pub failed_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedPoint {
    pub value: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossovers {
    pub empirical_forgetting: Option<f64>,
    pub empirical_generalization: Option<f64>,
    pub theory_forgetting: Option<f64>,
    pub theory_generalization: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
    pub skipped: Vec<SkippedPoint>,
    pub crossovers: Crossovers,
    pub plan: SweepPlan,
}

/// One CSV row: `axis_value, strategy, metric, empirical_mean, std_error, theory_value, trials`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub strategy: String,
    pub metric: &'static str,
    pub empirical_mean: f64,
    pub std_error: f64,
    pub theory_value: Option<f64>,
    pub trials: usize,
}

impl SweepResult {
    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn rows(&self) -> Vec<SweepRow> {
        let mut rows = Vec::new();
        for pt in &self.points {
            for e in &pt.estimates {
                if let Some(f) = &e.forgetting {
                    rows.push(SweepRow {
                        axis_value: pt.value,
                        strategy: e.strategy.clone(),
                        metric: "forgetting",
                        empirical_mean: f.mean,
                        std_error: f.std_error,
                        theory_value: e.theory_forgetting,
                        trials: f.trials,
                    });
                }
                rows.push(SweepRow {
                    axis_value: pt.value,
                    strategy: e.strategy.clone(),
                    metric: "generalization",
                    empirical_mean: e.generalization.mean,
                    std_error: e.generalization.std_error,
                    theory_value: e.theory_generalization,
                    trials: e.generalization.trials,
                });
            }
        }
        rows
    }
}

/// First sign change of `d` along `x`, linearly interpolated.
pub fn crossover(x: &[f64], d: &[f64]) -> Option<f64> {
    for w in 0..x.len().saturating_sub(1) {
        let (d0, d1) = (d[w], d[w + 1]);
        if d0 == 0.0 {
            return Some(x[w]);
        }
        if d0.signum() != d1.signum() {
            return Some(x[w] + (x[w + 1] - x[w]) * d0 / (d0 - d1));
        }
    }
    match (x.last(), d.last()) {
        (Some(&xl), Some(0.0)) => Some(xl),
        _ => None,
    }
}

fn point_config(plan: &SweepPlan, value: f64) -> std::result::Result<(ProblemConfig, GroundTruthKind), String> {
    let mut cfg = plan.base;
    let mut kind = plan.ground_truth.clone();
    let as_count = |v: f64| -> std::result::Result<usize, String> {
        if v >= 0.0 && v.fract() == 0.0 && v < 1e15 {
            Ok(v as usize)
        } else {
            Err(format!("{v} is not a non-negative integer"))
        }
    };
    match plan.axis {
        SweepAxis::GapSq => kind = GroundTruthKind::EqualGap { gap_sq: value },
        SweepAxis::Memory => cfg.memory = as_count(value)?,
        SweepAxis::P => cfg.p = as_count(value)?,
        SweepAxis::Sigma => cfg.sigma = value,
    }
    cfg.validate().map_err(|e| e.to_string())?;
    if cfg.p <= cfg.n + cfg.memory + 1 {
        return Err(format!("p = {} must exceed n + M + 1 = {}", cfg.p, cfg.n + cfg.memory + 1));
    }
    Ok((cfg, kind))
}

pub fn sweep(plan: &SweepPlan) -> Result<SweepResult> {
    if plan.grid.is_empty() {
        return Err(Error::ConfigInvalid("sweep grid is empty".into()));
    }
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for &value in &plan.grid {
        let (cfg, kind) = match point_config(plan, value) {
            Ok(x) => x,
            Err(reason) => {
                skipped.push(SkippedPoint { value, reason });
                continue;
            }
        };
        let gt = match generate_ground_truth(&kind, cfg.tasks, cfg.p, plan.gt_seed) {
            Ok(g) => g,
            Err(e @ (Error::InfeasibleGap { .. } | Error::DimensionTooSmall { .. })) => {
                skipped.push(SkippedPoint { value, reason: e.to_string() });
                continue;
            }
            Err(e) => return Err(e),
        };
        let geom = Geometry::from_ground_truth(&gt);
        let rep = run_paired(&cfg, &gt, &plan.strategies, &plan.options)?;
        let mut estimates = Vec::new();
        for s in &rep.strategies {
            let th = theory_for(&cfg, &geom, s)?;
            estimates.push(PointEstimate {
                strategy: s.strategy.clone(),
                forgetting: s.forgetting,
                generalization: s.generalization,
                theory_forgetting: th.as_ref().and_then(|p| p.forgetting),
                theory_generalization: th.as_ref().map(|p| p.generalization),
            });
        }
        let difference = if rep.strategies.len() >= 2 { Some(rep.paired_difference(0, 1)?) } else { None };
        points.push(SweepPoint { value, cfg, estimates, difference, failed_trials: rep.failed_trials });
    }

    let xs: Vec<f64> = points.iter().map(|p| p.value).collect();
    let series = |f: &dyn Fn(&SweepPoint) -> Option<f64>| -> Option<f64> {
        let d: Option<Vec<f64>> = points.iter().map(f).collect();
        d.and_then(|d| crossover(&xs, &d))
    };
    let two = plan.strategies.len() >= 2;
    let crossovers = if two {
        Crossovers {
            empirical_forgetting: series(&|p| p.difference.and_then(|d| d.forgetting).map(|e| e.mean)),
            empirical_generalization: series(&|p| p.difference.map(|d| d.generalization.mean)),
            theory_forgetting: series(&|p| Some(p.estimates[0].theory_forgetting? - p.estimates[1].theory_forgetting?)),
            theory_generalization: series(&|p| Some(p.estimates[0].theory_generalization? - p.estimates[1].theory_generalization?)),
        }
    } else {
        Crossovers { empirical_forgetting: None, empirical_generalization: None, theory_forgetting: None, theory_generalization: None }
    };
    Ok(SweepResult { axis: plan.axis, points, skipped, crossovers, plan: plan.clone() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub m: usize,
    pub detail: String,
    pub empirical: EstimateWithError,
    pub analytic: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub p: usize,
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub const Z_LIMIT: f64 = 4.0;

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.z.abs() < Self::Z_LIMIT)
    }
}

fn gaussian(rng: &mut impl Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

fn unit(rng: &mut impl Rng, p: usize) -> DVector<f64> {
    let v = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let n = v.norm();
    v / n
}

fn inv_gram_apply(v: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let g = v.tr_mul(v);
    let ch = g.cholesky().ok_or(Error::SingularGram { cond: f64::INFINITY })?;
    Ok(ch.solve(b))
}

/// Monte Carlo checks of the Gaussian projection, noise, zero-block and
/// block inner-product expectations at dimension `p`.
pub fn verify_identities(p: usize, m_list: &[usize], trials: usize, seed: u64, workers: Option<usize>) -> Result<IdentityReport> {
    if trials < 2 {
        return Err(Error::TooFewTrials(trials));
    }
    let pf = p as f64;
    let mut checks = Vec::new();
    for (mi, &m) in m_list.iter().enumerate() {
        if m < 2 || 3 * m / 2 + 1 >= p {
            return Err(Error::ConfigInvalid(format!("identity checks need 2 <= m and 3m/2 + 1 < p, got m={m}, p={p}")));
        }
        let m1 = m / 2;
        let m2 = m - m1;
        let m3 = m / 2;
        let mf = m as f64;
        let mut frng = stream(seed, 1_000 + mi as u64);
        let v = unit(&mut frng, p);
        let v1 = unit(&mut frng, p);
        let v2 = unit(&mut frng, p) * 1.5;
        let e1 = DVector::from_fn(p, |i, _| if i == 0 { 1.0 } else { 0.0 });

        let samples: Vec<Result<[f64; 5]>> = with_pool(workers, || {
            (0..trials as u64)
                .into_par_iter()
                .map(|k| {
                    let mut rng = stream(seed, 1_000_000 + (mi as u64) * (trials as u64) + k);
                    let x = gaussian(&mut rng, p, m);
                    let proj = pinv_apply(&x, &x.tr_mul(&e1))?.norm_squared();
                    let z = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
                    let noise = pinv_apply(&x, &z)?.norm_squared();
                    let x1 = x.columns(0, m1).into_owned();
                    let x2 = x.columns(m1, m2).into_owned();
                    let mut rhs = DVector::zeros(m);
                    rhs.rows_mut(0, m1).copy_from(&x1.tr_mul(&v));
                    let zero_block = pinv_apply(&x, &rhs)?.norm_squared();
                    let mut b = DVector::zeros(m);
                    b.rows_mut(m1, m2).copy_from(&x2.tr_mul(&v));
                    let a = inv_gram_apply(&x, &b)?;
                    let inner_same = x1.tr_mul(&v).dot(&a.rows(0, m1));
                    let x3 = gaussian(&mut rng, p, m3);
                    let big = DMatrix::from_fn(p, m + m3, |i, c| if c < m { x[(i, c)] } else { x3[(i, c - m)] });
                    let mut b = DVector::zeros(m + m3);
                    b.rows_mut(m1, m2).copy_from(&x2.tr_mul(&v2));
                    let a = inv_gram_apply(&big, &b)?;
                    let inner_generic = x1.tr_mul(&v1).dot(&a.rows(0, m1));
                    Ok([proj, noise, zero_block, inner_same, inner_generic])
                })
                .collect()
        })?;
        let samples: Vec<[f64; 5]> = samples.into_iter().collect::<Result<_>>()?;
        let col = |c: usize| samples.iter().map(|s| s[c]).collect::<Vec<f64>>();
        let (m1f, m2f, m3f) = (m1 as f64, m2 as f64, m3 as f64);
        let analytic = [
            mf / pf,
            mf / (pf - mf - 1.0),
            m1f / pf * (1.0 + m2f / (pf - m1f - m2f - 1.0)),
            -m1f * m2f / (pf * (pf - m1f - m2f - 1.0)),
            m1f * m2f * ((&v1 - &v2).norm_squared() - v1.norm_squared() - v2.norm_squared())
                / (2.0 * pf * (pf - m1f - m2f - m3f - 1.0)),
        ];
        let meta: [(&'static str, String); 5] = [
            ("projection", "v = e1".to_string()),
            ("noise", "sigma = 1".to_string()),
            ("zero_block", format!("m1 = {m1}, m2 = {m2}, unit v")),
            ("inner_product", format!("m1 = {m1}, m2 = {m2}, m3 = 0, v1 = v2 unit")),
            ("inner_product", format!("m1 = {m1}, m2 = {m2}, m3 = {m3}, generic v1, v2")),
        ];
        for (c, (name, detail)) in meta.into_iter().enumerate() {
            let est = EstimateWithError::from_samples(&col(c))?;
            checks.push(IdentityCheck { name, m, detail, z: est.z_score(analytic[c]), empirical: est, analytic: analytic[c] });
        }
    }
    Ok(IdentityReport { p, trials, seed, checks })
}
