//! Full continual-learning runs under concurrent, sequential and hybrid rehearsal.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{draw_curriculum, Curriculum, GroundTruthSet, MemoryBuffer, ProblemConfig, TaskDataset};
use crate::rng::RngStreams;
use crate::solver::min_norm_fit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Concurrent,
    Sequential,
    Hybrid,
}

impl StrategyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Concurrent => "concurrent",
            StrategyKind::Sequential => "sequential",
            StrategyKind::Hybrid => "hybrid",
        }
    }
}

/// Revisit order of memory chunks in sequential rehearsal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequentialOrder {
    OldestFirst,
    NewestFirst,
    /// `perms[t − 2]` is a permutation of `1..=t−1`, for `t = 2..=T`.
    Explicit(Vec<Vec<usize>>),
}

/// Similar/dissimilar split of the buffer for every task.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    /// `similar[t − 1][h − 1]` tells whether task `h` is replayed jointly at task `t`.
    pub similar: Vec<Vec<bool>>,
}

impl Partition {
    pub fn uniform(tasks: usize, similar: bool) -> Self {
        Partition { similar: (0..tasks).map(|t| vec![similar; t]).collect() }
    }

    pub fn all_similar(tasks: usize) -> Self {
        Self::uniform(tasks, true)
    }

    pub fn all_dissimilar(tasks: usize) -> Self {
        Self::uniform(tasks, false)
    }

    /// From explicit 1-based sets; `sim[t − 2]` and `dis[t − 2]` belong to task `t`.
    pub fn from_sets(tasks: usize, sim: &[Vec<usize>], dis: &[Vec<usize>]) -> Result<Self> {
        if sim.len() != tasks.saturating_sub(1) || dis.len() != tasks.saturating_sub(1) {
            return Err(Error::PartitionInvalid(format!("need {} sets per side", tasks.saturating_sub(1))));
        }
        let mut similar = vec![Vec::new()];
        for t in 2..=tasks {
            let mut seen = vec![0u8; t - 1];
            let mut flags = vec![false; t - 1];
            for (set, is_sim) in [(&sim[t - 2], true), (&dis[t - 2], false)] {
                for &h in set {
                    if h < 1 || h >= t {
                        return Err(Error::PartitionInvalid(format!("task {h} is not a previous task of {t}")));
                    }
                    seen[h - 1] += 1;
                    flags[h - 1] = is_sim;
                }
            }
            if let Some(h) = seen.iter().position(|&c| c != 1) {
                return Err(Error::PartitionInvalid(format!(
                    "task {} appears {} times at t={t}",
                    h + 1,
                    seen[h]
                )));
            }
            similar.push(flags);
        }
        Ok(Partition { similar })
    }

    pub fn validate(&self, tasks: usize) -> Result<()> {
        if self.similar.len() != tasks {
            return Err(Error::PartitionInvalid(format!("{} entries for T={tasks}", self.similar.len())));
        }
        for (t0, flags) in self.similar.iter().enumerate() {
            if flags.len() != t0 {
                return Err(Error::PartitionInvalid(format!("task {} has {} flags", t0 + 1, flags.len())));
            }
        }
        Ok(())
    }

    pub fn sim(&self, t: usize) -> Vec<usize> {
        (1..t).filter(|&h| self.similar[t - 1][h - 1]).collect()
    }

    /// Dissimilar tasks in revisit order (ascending).
    pub fn dis(&self, t: usize) -> Vec<usize> {
        (1..t).filter(|&h| !self.similar[t - 1][h - 1]).collect()
    }
}

/// How the hybrid trainer splits its buffer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PartitionRule {
    ExplicitSets { partition: Partition },
    /// Dissimilar iff `‖w*_h − w*_t‖² > gap_tau`.
    GapThreshold { gap_tau: f64 },
    /// Dissimilar iff the gradient cosine is below `tau`.
    GradientCosine { tau: f64 },
}

impl Default for PartitionRule {
    fn default() -> Self {
        PartitionRule::GradientCosine { tau: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    pub order: SequentialOrder,
    pub partition: PartitionRule,
}

impl StrategySpec {
    pub fn concurrent() -> Self {
        StrategySpec { kind: StrategyKind::Concurrent, order: SequentialOrder::OldestFirst, partition: PartitionRule::default() }
    }

    pub fn sequential() -> Self {
        StrategySpec { kind: StrategyKind::Sequential, order: SequentialOrder::OldestFirst, partition: PartitionRule::default() }
    }

    pub fn hybrid(partition: PartitionRule) -> Self {
        StrategySpec { kind: StrategyKind::Hybrid, order: SequentialOrder::OldestFirst, partition }
    }

    pub fn validate(&self, tasks: usize) -> Result<()> {
        if let SequentialOrder::Explicit(perms) = &self.order {
            if perms.len() != tasks.saturating_sub(1) {
                return Err(Error::PermutationInvalid(format!("{} orders for T={tasks}", perms.len())));
            }
            for (idx, perm) in perms.iter().enumerate() {
                let t = idx + 2;
                let mut sorted = perm.clone();
                sorted.sort_unstable();
                if sorted != (1..t).collect::<Vec<_>>() {
                    return Err(Error::PermutationInvalid(format!("{perm:?} is not a permutation of 1..={}", t - 1)));
                }
            }
        }
        if let PartitionRule::ExplicitSets { partition } = &self.partition {
            if self.kind == StrategyKind::Hybrid {
                partition.validate(tasks)?;
            }
        }
        Ok(())
    }

    fn revisit_order(&self, t: usize) -> Vec<usize> {
        match &self.order {
            SequentialOrder::OldestFirst => (1..t).collect(),
            SequentialOrder::NewestFirst => (1..t).rev().collect(),
            SequentialOrder::Explicit(perms) => perms[t - 2].clone(),
        }
    }
}

/// Parameters after every task and the matrix of model errors.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    /// `w_1..w_T`.
    pub params: Vec<DVector<f64>>,
    /// `errors[(i − 1, t − 1)] = ‖w_t − w*_i‖²`.
    pub errors: DMatrix<f64>,
    pub cfg: ProblemConfig,
    pub strategy: StrategySpec,
    pub seed: Option<u64>,
    /// Similar/dissimilar sets the hybrid trainer actually used.
    pub partition: Option<Partition>,
}

impl TrainTrace {
    pub fn tasks(&self) -> usize {
        self.params.len()
    }

    /// `L_i(w_t)`, both 1-based.
    pub fn error(&self, i: usize, t: usize) -> f64 {
        self.errors[(i - 1, t - 1)]
    }

    pub fn to_json(&self, include_params: bool) -> serde_json::Value {
        let t = self.tasks();
        let errors: Vec<Vec<f64>> = (0..t).map(|i| (0..t).map(|s| self.errors[(i, s)]).collect()).collect();
        let mut v = serde_json::json!({
            "config": self.cfg,
            "strategy": self.strategy,
            "seed": self.seed,
            "partition": self.partition,
            "per_step_errors": errors,
        });
        if include_params {
            let params: Vec<Vec<f64>> = self.params.iter().map(|w| w.iter().cloned().collect()).collect();
            v["params"] = serde_json::json!(params);
        }
        v
    }
}

/// Outcome of [`divide_buffer`].
#[derive(Debug, Clone, PartialEq)]
pub struct Division {
    /// `similar[h − 1]` for `h ∈ [t − 1]`.
    pub similar: Vec<bool>,
    /// Tasks whose gradient vanished; they default to similar.
    pub zero_gradient: Vec<usize>,
}

fn mse_gradient(d: &TaskDataset, w: &DVector<f64>) -> DVector<f64> {
    let r = d.x.tr_mul(w) - &d.y;
    &d.x * r * (2.0 / d.m as f64)
}

/// Splits the buffer of task `t` into similar and dissimilar tasks.
pub fn divide_buffer(
    current: &TaskDataset,
    memory: &MemoryBuffer,
    w_prev: &DVector<f64>,
    rule: &PartitionRule,
    gt: &GroundTruthSet,
    t: usize,
) -> Result<Division> {
    let k = memory.per_task.len();
    match rule {
        PartitionRule::ExplicitSets { partition } => {
            let flags = partition
                .similar
                .get(t - 1)
                .filter(|f| f.len() == k)
                .ok_or_else(|| Error::PartitionInvalid(format!("no sets for task {t}")))?;
            Ok(Division { similar: flags.clone(), zero_gradient: Vec::new() })
        }
        PartitionRule::GapThreshold { gap_tau } => Ok(Division {
            similar: (1..=k).map(|h| gt.gap_matrix[(h - 1, t - 1)] <= *gap_tau).collect(),
            zero_gradient: Vec::new(),
        }),
        PartitionRule::GradientCosine { tau } => {
            let g_cur = mse_gradient(current, w_prev);
            let mut similar = Vec::with_capacity(k);
            let mut zero_gradient = Vec::new();
            for (h0, chunk) in memory.per_task.iter().enumerate() {
                if chunk.m == 0 {
                    zero_gradient.push(h0 + 1);
                    similar.push(true);
                    continue;
                }
                let g_h = mse_gradient(chunk, w_prev);
                let (a, b) = (g_cur.norm(), g_h.norm());
                if a < 1e-14 || b < 1e-14 {
                    zero_gradient.push(h0 + 1);
                    similar.push(true);
                    continue;
                }
                let cos = (g_cur.dot(&g_h) / (a * b)).clamp(-1.0, 1.0);
                similar.push(cos >= *tau);
            }
            Ok(Division { similar, zero_gradient })
        }
    }
}

fn stack(blocks: &[&TaskDataset]) -> (DMatrix<f64>, DVector<f64>) {
    let p = blocks[0].x.nrows();
    let m: usize = blocks.iter().map(|b| b.m).sum();
    let mut x = DMatrix::zeros(p, m);
    let mut y = DVector::zeros(m);
    let mut c = 0;
    for b in blocks {
        x.columns_mut(c, b.m).copy_from(&b.x);
        y.rows_mut(c, b.m).copy_from(&b.y);
        c += b.m;
    }
    (x, y)
}

fn fit_blocks(blocks: &[&TaskDataset], w: &DVector<f64>) -> Result<DVector<f64>> {
    let blocks: Vec<&TaskDataset> = blocks.iter().copied().filter(|b| b.m > 0).collect();
    if blocks.is_empty() {
        return Ok(w.clone());
    }
    let (x, y) = stack(&blocks);
    Ok(min_norm_fit(&x, &y, w)?.w)
}

fn error_matrix(params: &[DVector<f64>], gt: &GroundTruthSet) -> DMatrix<f64> {
    let t = params.len();
    DMatrix::from_fn(t, t, |i, s| (&params[s] - gt.vector(i + 1)).norm_squared())
}

/// Trains on a pre-drawn curriculum. Strategies given the same curriculum see
/// identical data.
pub fn train_on(cfg: &ProblemConfig, gt: &GroundTruthSet, cur: &Curriculum, spec: &StrategySpec) -> Result<TrainTrace> {
    cfg.validate()?;
    spec.validate(cfg.tasks)?;
    if cur.steps.len() != cfg.tasks || gt.tasks() != cfg.tasks {
        return Err(Error::ShapeMismatch(format!("curriculum of {} steps for T={}", cur.steps.len(), cfg.tasks)));
    }
    let dim = gt.dim();
    let mut w = DVector::zeros(dim);
    let mut params = Vec::with_capacity(cfg.tasks);
    let mut realized = (spec.kind == StrategyKind::Hybrid).then(|| Partition { similar: vec![Vec::new()] });
    for (t0, step) in cur.steps.iter().enumerate() {
        let t = t0 + 1;
        let chunks = &step.memory.per_task;
        match spec.kind {
            StrategyKind::Concurrent => {
                let mut blocks = vec![&step.current];
                blocks.extend(chunks.iter());
                w = fit_blocks(&blocks, &w)?;
            }
            StrategyKind::Sequential => {
                w = fit_blocks(&[&step.current], &w)?;
                if t >= 2 {
                    for h in spec.revisit_order(t) {
                        w = fit_blocks(&[&chunks[h - 1]], &w)?;
                    }
                }
            }
            StrategyKind::Hybrid => {
                let division = if t >= 2 {
                    divide_buffer(&step.current, &step.memory, &w, &spec.partition, gt, t)?
                } else {
                    Division { similar: Vec::new(), zero_gradient: Vec::new() }
                };
                let mut blocks = vec![&step.current];
                blocks.extend(chunks.iter().zip(&division.similar).filter(|(_, &s)| s).map(|(c, _)| c));
                w = fit_blocks(&blocks, &w)?;
                for (c, _) in chunks.iter().zip(&division.similar).filter(|(_, &s)| !s) {
                    w = fit_blocks(&[c], &w)?;
                }
                if t >= 2 {
                    if let Some(part) = realized.as_mut() {
                        part.similar.push(division.similar);
                    }
                }
            }
        }
        params.push(w.clone());
    }
    let errors = error_matrix(&params, gt);
    Ok(TrainTrace { params, errors, cfg: *cfg, strategy: spec.clone(), seed: None, partition: realized })
}

fn train_fresh(cfg: &ProblemConfig, gt: &GroundTruthSet, spec: &StrategySpec, streams: &mut RngStreams) -> Result<TrainTrace> {
    cfg.validate()?;
    let cur = draw_curriculum(cfg, gt, streams)?;
    train_on(cfg, gt, &cur, spec)
}

/// One joint fit of current data and the whole buffer per task.
pub fn train_concurrent(cfg: &ProblemConfig, gt: &GroundTruthSet, streams: &mut RngStreams) -> Result<TrainTrace> {
    train_fresh(cfg, gt, &StrategySpec::concurrent(), streams)
}

/// Current data first, then each memory chunk in `spec.order`.
pub fn train_sequential(cfg: &ProblemConfig, gt: &GroundTruthSet, spec: &StrategySpec, streams: &mut RngStreams) -> Result<TrainTrace> {
    let spec = StrategySpec { kind: StrategyKind::Sequential, ..spec.clone() };
    train_fresh(cfg, gt, &spec, streams)
}

/// Joint fit of current data with similar chunks, then dissimilar chunks one by one.
pub fn train_hybrid(cfg: &ProblemConfig, gt: &GroundTruthSet, spec: &StrategySpec, streams: &mut RngStreams) -> Result<TrainTrace> {
    let spec = StrategySpec { kind: StrategyKind::Hybrid, ..spec.clone() };
    train_fresh(cfg, gt, &spec, streams)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{generate_ground_truth, sample_task_dataset, GroundTruthKind};
    use crate::solver::tol_fit;

    fn setup(tasks: usize, p: usize, n: usize, memory: usize, gap: f64) -> (ProblemConfig, GroundTruthSet) {
        let cfg = ProblemConfig::new(p, n, memory, tasks, 0.0);
        let gt = generate_ground_truth(&GroundTruthKind::EqualGap { gap_sq: gap }, tasks, p, 5).unwrap();
        (cfg, gt)
    }

    #[test]
    fn single_task_is_plain_fit() {
        let (cfg, gt) = setup(1, 30, 6, 4, 0.5);
        let tr = train_concurrent(&cfg, &gt, &mut RngStreams::new(1)).unwrap();
        let mut s = RngStreams::new(1);
        let d = sample_task_dataset(&gt, 1, 6, 0.0, &mut s).unwrap();
        let w = min_norm_fit(&d.x, &d.y, &DVector::zeros(30)).unwrap().w;
        assert_eq!(tr.params[0], w);
    }

    #[test]
    fn memoryless_strategies_coincide() {
        let (cfg, gt) = setup(3, 40, 5, 0, 1.0);
        let a = train_concurrent(&cfg, &gt, &mut RngStreams::new(8)).unwrap();
        let b = train_sequential(&cfg, &gt, &StrategySpec::sequential(), &mut RngStreams::new(8)).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.errors, b.errors);
    }

    #[test]
    fn zero_gap_memory_lowers_first_task_error() {
        let (cfg, gt) = setup(2, 60, 8, 8, 0.0);
        let mut diff = 0.0;
        for k in 0..200 {
            let tr = train_concurrent(&cfg, &gt, &mut RngStreams::for_trial(3, k)).unwrap();
            diff += tr.error(1, 2) - tr.error(1, 1);
        }
        assert!(diff < 0.0);
    }

    #[test]
    fn last_memory_fit_interpolates() {
        let (cfg, gt) = setup(3, 50, 6, 6, 1.2);
        let mut s = RngStreams::new(2);
        let cur = draw_curriculum(&cfg, &gt, &mut s).unwrap();
        let tr = train_on(&cfg, &gt, &cur, &StrategySpec::sequential()).unwrap();
        for t in 2..=3 {
            let last = cur.steps[t - 1].memory.per_task.last().unwrap();
            let r = last.x.tr_mul(&tr.params[t - 1]) - &last.y;
            assert!(r.amax() <= tol_fit(&last.y));
        }
        let tr = train_on(&cfg, &gt, &cur, &StrategySpec::concurrent()).unwrap();
        for t in 1..=3 {
            let step = &cur.steps[t - 1];
            let r = step.current.x.tr_mul(&tr.params[t - 1]) - &step.current.y;
            assert!(r.amax() <= tol_fit(&step.current.y));
            for c in &step.memory.per_task {
                assert!((c.x.tr_mul(&tr.params[t - 1]) - &c.y).amax() <= tol_fit(&c.y));
            }
        }
    }

    #[test]
    fn hybrid_reductions_exact() {
        let (cfg, gt) = setup(4, 60, 5, 6, 0.9);
        let cur = draw_curriculum(&cfg, &gt, &mut RngStreams::new(4)).unwrap();
        let conc = train_on(&cfg, &gt, &cur, &StrategySpec::concurrent()).unwrap();
        let seq = train_on(&cfg, &gt, &cur, &StrategySpec::sequential()).unwrap();
        let all_sim = StrategySpec::hybrid(PartitionRule::ExplicitSets { partition: Partition::all_similar(4) });
        let all_dis = StrategySpec::hybrid(PartitionRule::ExplicitSets { partition: Partition::all_dissimilar(4) });
        assert_eq!(train_on(&cfg, &gt, &cur, &all_sim).unwrap().params, conc.params);
        assert_eq!(train_on(&cfg, &gt, &cur, &all_dis).unwrap().params, seq.params);
    }

    #[test]
    fn gap_threshold_sweep() {
        let (cfg, gt) = setup(4, 60, 5, 6, 0.9);
        let cur = draw_curriculum(&cfg, &gt, &mut RngStreams::new(4)).unwrap();
        let w = DVector::zeros(60);
        let step = &cur.steps[3];
        let low = divide_buffer(&step.current, &step.memory, &w, &PartitionRule::GapThreshold { gap_tau: 0.5 }, &gt, 4).unwrap();
        assert_eq!(low.similar, vec![false; 3]);
        let high = divide_buffer(&step.current, &step.memory, &w, &PartitionRule::GapThreshold { gap_tau: 1.5 }, &gt, 4).unwrap();
        assert_eq!(high.similar, vec![true; 3]);
    }

    #[test]
    fn explicit_sets_pass_through() {
        let part = Partition::from_sets(3, &[vec![1], vec![2]], &[vec![], vec![1]]).unwrap();
        let (cfg, gt) = setup(3, 40, 4, 4, 1.0);
        let cur = draw_curriculum(&cfg, &gt, &mut RngStreams::new(1)).unwrap();
        let step = &cur.steps[2];
        let d = divide_buffer(&step.current, &step.memory, &DVector::zeros(40), &PartitionRule::ExplicitSets { partition: part.clone() }, &gt, 3)
            .unwrap();
        assert_eq!(d.similar, vec![false, true]);
        assert_eq!(part.sim(3), vec![2]);
        assert_eq!(part.dis(3), vec![1]);
    }

    #[test]
    fn partition_sets_validated() {
        assert!(Partition::from_sets(3, &[vec![1], vec![1]], &[vec![], vec![1, 2]]).is_err());
        assert!(Partition::from_sets(3, &[vec![1], vec![]], &[vec![], vec![1]]).is_err());
        assert!(Partition::from_sets(3, &[vec![2], vec![1]], &[vec![], vec![2]]).is_err());
    }

    #[test]
    fn same_truth_gradients_align() {
        let gt = generate_ground_truth(&GroundTruthKind::EqualGap { gap_sq: 0.0 }, 2, 40, 1).unwrap();
        let mut hits = 0;
        for k in 0..200 {
            let mut s = RngStreams::for_trial(6, k);
            let cur = sample_task_dataset(&gt, 2, 2000, 0.0, &mut s).unwrap();
            let mem = crate::problem::draw_memory(&gt, &[2000], 0.0, &mut s).unwrap();
            let d = divide_buffer(&cur, &mem, &DVector::zeros(40), &PartitionRule::GradientCosine { tau: 0.89 }, &gt, 2).unwrap();
            hits += usize::from(d.similar[0]);
        }
        assert!(hits >= 190, "{hits}");
    }

    #[test]
    fn tau_floor_gives_no_dissimilar() {
        let (cfg, gt) = setup(4, 60, 5, 6, 1.9);
        let cur = draw_curriculum(&cfg, &gt, &mut RngStreams::new(4)).unwrap();
        let w = DVector::from_element(60, 0.3);
        let step = &cur.steps[3];
        let d = divide_buffer(&step.current, &step.memory, &w, &PartitionRule::GradientCosine { tau: -1.0 }, &gt, 4).unwrap();
        assert!(d.similar.iter().all(|&s| s));
    }

    #[test]
    fn zero_gradient_defaults_similar() {
        let gt = generate_ground_truth(&GroundTruthKind::EqualGap { gap_sq: 0.0 }, 2, 20, 1).unwrap();
        let mut s = RngStreams::new(1);
        let cur = sample_task_dataset(&gt, 2, 4, 0.0, &mut s).unwrap();
        let mem = crate::problem::draw_memory(&gt, &[4], 0.0, &mut s).unwrap();
        let d = divide_buffer(&cur, &mem, gt.vector(1), &PartitionRule::GradientCosine { tau: 0.99 }, &gt, 2).unwrap();
        assert_eq!(d.zero_gradient, vec![1]);
        assert_eq!(d.similar, vec![true]);
    }

    #[test]
    fn orders_validated() {
        let mut spec = StrategySpec::sequential();
        spec.order = SequentialOrder::Explicit(vec![vec![1], vec![1, 1]]);
        assert!(matches!(spec.validate(3), Err(Error::PermutationInvalid(_))));
        spec.order = SequentialOrder::Explicit(vec![vec![1], vec![2, 1]]);
        assert!(spec.validate(3).is_ok());
    }

    #[test]
    fn newest_first_matches_reversed_explicit() {
        let (cfg, gt) = setup(3, 50, 5, 4, 1.0);
        let cur = draw_curriculum(&cfg, &gt, &mut RngStreams::new(9)).unwrap();
        let mut a = StrategySpec::sequential();
        a.order = SequentialOrder::NewestFirst;
        let mut b = StrategySpec::sequential();
        b.order = SequentialOrder::Explicit(vec![vec![1], vec![2, 1]]);
        assert_eq!(train_on(&cfg, &gt, &cur, &a).unwrap().params, train_on(&cfg, &gt, &cur, &b).unwrap().params);
    }

    #[test]
    fn trace_errors_recompute_and_serialize() {
        let (cfg, gt) = setup(3, 40, 5, 4, 1.0);
        let tr = train_concurrent(&cfg, &gt, &mut RngStreams::new(2)).unwrap();
        for i in 1..=3 {
            for t in 1..=3 {
                let e = (&tr.params[t - 1] - gt.vector(i)).norm_squared();
                assert!((e - tr.error(i, t)).abs() <= 1e-12 * e.max(1e-300));
            }
        }
        let js = tr.to_json(false);
        assert!(js.get("params").is_none());
        assert_eq!(js["per_step_errors"].as_array().unwrap().len(), 3);
        assert!(tr.to_json(true).get("params").is_some());
    }

    #[test]
    fn invalid_config_rejected() {
        let (mut cfg, gt) = setup(2, 40, 5, 4, 1.0);
        cfg.p = 9;
        assert!(matches!(train_concurrent(&cfg, &gt, &mut RngStreams::new(1)), Err(Error::ConfigInvalid(_))));
    }
}
