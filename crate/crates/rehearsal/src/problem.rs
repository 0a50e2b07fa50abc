//! Problem data: regime, ground truths, task datasets and rehearsal memory.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::rng::{rotation_stream, RngStreams};

/// Scalar regime of a continual-learning problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    /// Ambient dimension.
    pub p: usize,
    /// Samples per task.
    pub n: usize,
    /// Total memory size `M`.
    pub memory: usize,
    /// Number of tasks `T`.
    pub tasks: usize,
    /// Noise standard deviation.
    pub sigma: f64,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig { p: 500, n: 24, memory: 24, tasks: 5, sigma: 0.0 }
    }
}

impl ProblemConfig {
    pub fn new(p: usize, n: usize, memory: usize, tasks: usize, sigma: f64) -> Self {
        ProblemConfig { p, n, memory, tasks, sigma }
    }

    /// Checks `p > n + M`, `T ≥ 1`, `n ≥ 1` and `σ ≥ 0`.
    pub fn validate(&self) -> Result<()> {
        if self.tasks < 1 {
            return Err(Error::ConfigInvalid("tasks: T must be at least 1".into()));
        }
        if self.n < 1 {
            return Err(Error::ConfigInvalid("n: at least one sample per task".into()));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::ConfigInvalid(format!("sigma: must be finite and >= 0, got {}", self.sigma)));
        }
        if self.p <= self.n + self.memory {
            return Err(Error::ConfigInvalid(format!(
                "p: overparameterization requires p > n + M ({} <= {} + {})",
                self.p, self.n, self.memory
            )));
        }
        Ok(())
    }

    /// Whether every closed-form denominator `p − n − M − 1` is positive.
    pub fn closed_form_ok(&self) -> bool {
        self.p > self.n + self.memory + 1
    }

    /// Total feature columns drawn in one run: `nT + M(T−1)`.
    pub fn total_samples(&self) -> usize {
        self.n * self.tasks + self.memory * self.tasks.saturating_sub(1)
    }
}

/// Geometry requested from [`generate_ground_truth`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroundTruthKind {
    /// Unit vectors with identical pairwise squared distance.
    EqualGap { gap_sq: f64 },
    /// Orthonormal vectors (pairwise squared distance 2).
    Orthonormal,
    /// Caller-supplied vectors.
    Explicit { vectors: Vec<Vec<f64>> },
}

/// The `T` true parameter vectors and their squared-distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthSet {
    pub vectors: Vec<DVector<f64>>,
    pub gap_matrix: DMatrix<f64>,
    pub seed: Option<u64>,
}

impl GroundTruthSet {
    pub fn from_vectors(vectors: Vec<DVector<f64>>) -> Result<Self> {
        if let Some(first) = vectors.first() {
            for v in &vectors {
                if v.len() != first.len() {
                    return Err(Error::DimensionMismatch { left: first.len(), right: v.len() });
                }
            }
        }
        let t = vectors.len();
        let gap_matrix = DMatrix::from_fn(t, t, |j, k| {
            if j == k {
                0.0
            } else {
                (&vectors[j] - &vectors[k]).norm_squared()
            }
        });
        Ok(GroundTruthSet { vectors, gap_matrix, seed: None })
    }

    pub fn tasks(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, |v| v.len())
    }

    pub fn norms_sq(&self) -> Vec<f64> {
        self.vectors.iter().map(|v| v.norm_squared()).collect()
    }

    /// 1-based access to `w*_task`.
    pub fn vector(&self, task: usize) -> &DVector<f64> {
        &self.vectors[task - 1]
    }

    /// Row-major CSV dump: a header naming the dimensions, then one row per task.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        let _ = writeln!(out, "# tasks={} p={} seed={}", self.tasks(), self.dim(), seed);
        let header: Vec<String> = (0..self.dim()).map(|c| format!("x{c}")).collect();
        let _ = writeln!(out, "task,{}", header.join(","));
        for (i, v) in self.vectors.iter().enumerate() {
            let row: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
            let _ = writeln!(out, "{},{}", i + 1, row.join(","));
        }
        out
    }
}

/// Largest feasible squared gap (exclusive) for `T` equal-gap unit vectors.
pub fn equal_gap_limit(tasks: usize) -> f64 {
    if tasks <= 1 {
        f64::INFINITY
    } else {
        2.0 * tasks as f64 / (tasks as f64 - 1.0)
    }
}

const GAP_EPS: f64 = 1e-12;

fn random_frame(p: usize, r: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rotation_stream(seed);
    let g = DMatrix::from_fn(p, r, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let rr = qr.r();
    // sign-corrected QR, Haar distributed
    for k in 0..r {
        if rr[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    q
}

/// Builds `T` ground truths in `R^p`.
///
/// Equal-gap vectors come from the Gram matrix with unit diagonal and
/// `1 − gap_sq/2` off the diagonal, embedded through a seeded random frame.
pub fn generate_ground_truth(kind: &GroundTruthKind, tasks: usize, p: usize, seed: u64) -> Result<GroundTruthSet> {
    let mut gt = match kind {
        GroundTruthKind::Explicit { vectors } => {
            if vectors.len() != tasks {
                return Err(Error::ShapeMismatch(format!("{} vectors for T={tasks}", vectors.len())));
            }
            GroundTruthSet::from_vectors(vectors.iter().map(|v| DVector::from_vec(v.clone())).collect())?
        }
        GroundTruthKind::Orthonormal => {
            if p < tasks {
                return Err(Error::DimensionTooSmall { p, needed: tasks });
            }
            let q = random_frame(p, tasks, seed);
            GroundTruthSet::from_vectors((0..tasks).map(|k| q.column(k).into_owned()).collect())?
        }
        GroundTruthKind::EqualGap { gap_sq } => {
            let limit = equal_gap_limit(tasks);
            if !gap_sq.is_finite() || *gap_sq < 0.0 || *gap_sq >= limit - GAP_EPS {
                return Err(Error::InfeasibleGap { gap_sq: *gap_sq, limit, tasks });
            }
            let c = 1.0 - gap_sq / 2.0;
            let gram = DMatrix::from_fn(tasks, tasks, |j, k| if j == k { 1.0 } else { c });
            let eig = SymmetricEigen::new(gram);
            let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
            let keep: Vec<usize> = (0..tasks).filter(|&k| eig.eigenvalues[k] > 1e-12 * top).collect();
            let r = keep.len();
            if p < r {
                return Err(Error::DimensionTooSmall { p, needed: r });
            }
            let coords = DMatrix::from_fn(tasks, r, |i, k| {
                let idx = keep[k];
                eig.eigenvectors[(i, idx)] * eig.eigenvalues[idx].sqrt()
            });
            let q = random_frame(p, r, seed);
            let w = q * coords.transpose();
            GroundTruthSet::from_vectors((0..tasks).map(|i| w.column(i).into_owned()).collect())?
        }
    };
    gt.seed = Some(seed);
    Ok(gt)
}

/// Samples stacked column-wise with their outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskDataset {
    /// `p × m` features.
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    /// 1-based index of the generating ground truth.
    pub source_task: usize,
    pub m: usize,
}

impl TaskDataset {
    pub fn empty(p: usize, source_task: usize) -> Self {
        TaskDataset { x: DMatrix::zeros(p, 0), y: DVector::zeros(0), source_task, m: 0 }
    }

    /// Row-major CSV dump of `[Xᵀ | Y]`, one sample per row.
    pub fn to_csv(&self, seed: Option<u64>) -> String {
        let mut out = String::new();
        let seed = seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        let _ = writeln!(out, "# m={} p={} source_task={} seed={}", self.m, self.x.nrows(), self.source_task, seed);
        let header: Vec<String> = (0..self.x.nrows()).map(|c| format!("x{c}")).collect();
        let _ = writeln!(out, "{},y", header.join(","));
        for s in 0..self.m {
            let row: Vec<String> = self.x.column(s).iter().map(|x| format!("{x:.16e}")).collect();
            let _ = writeln!(out, "{},{:.16e}", row.join(","), self.y[s]);
        }
        out
    }
}

fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn outputs(x: &DMatrix<f64>, w_star: &DVector<f64>, sigma: f64, streams: &mut RngStreams) -> DVector<f64> {
    let mut y = x.tr_mul(w_star);
    if sigma > 0.0 {
        for v in y.iter_mut() {
            *v += sigma * streams.noise.sample::<f64, _>(StandardNormal);
        }
    }
    y
}

/// Draws `m` fresh samples of task `task` (1-based): `Y = Xᵀw* + z`.
pub fn sample_task_dataset(
    gt: &GroundTruthSet,
    task: usize,
    m: usize,
    sigma: f64,
    streams: &mut RngStreams,
) -> Result<TaskDataset> {
    if task < 1 || task > gt.tasks() {
        return Err(Error::ConfigInvalid(format!("task {task} outside 1..={}", gt.tasks())));
    }
    let x = gaussian_matrix(&mut streams.features, gt.dim(), m);
    let y = outputs(&x, gt.vector(task), sigma, streams);
    Ok(TaskDataset { x, y, source_task: task, m })
}

/// Equal-as-possible split of `M` over the `t − 1` previous tasks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub counts: Vec<usize>,
    /// Set when `(t − 1)` does not divide `M`.
    pub non_integer: bool,
}

/// Memory counts for task `t`; the remainder goes to the oldest tasks.
pub fn allocate_memory(memory: usize, t: usize) -> Allocation {
    if t < 2 {
        return Allocation { counts: Vec::new(), non_integer: false };
    }
    let k = t - 1;
    let base = memory / k;
    let rem = memory % k;
    Allocation { counts: (0..k).map(|h| base + usize::from(h < rem)).collect(), non_integer: rem != 0 }
}

/// Fresh memory samples, one dataset per previous task.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryBuffer {
    pub per_task: Vec<TaskDataset>,
    pub counts: Vec<usize>,
}

impl MemoryBuffer {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }
}

pub fn draw_memory(gt: &GroundTruthSet, counts: &[usize], sigma: f64, streams: &mut RngStreams) -> Result<MemoryBuffer> {
    let mut per_task = Vec::with_capacity(counts.len());
    for (h, &c) in counts.iter().enumerate() {
        per_task.push(sample_task_dataset(gt, h + 1, c, sigma, streams)?);
    }
    Ok(MemoryBuffer { per_task, counts: counts.to_vec() })
}

/// Data seen at task `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub current: TaskDataset,
    pub memory: MemoryBuffer,
}

/// Every dataset of one run, drawn up front and shared by all strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct Curriculum {
    pub steps: Vec<Step>,
}

pub fn draw_curriculum(cfg: &ProblemConfig, gt: &GroundTruthSet, streams: &mut RngStreams) -> Result<Curriculum> {
    if gt.tasks() != cfg.tasks {
        return Err(Error::ShapeMismatch(format!("{} ground truths for T={}", gt.tasks(), cfg.tasks)));
    }
    if gt.dim() != cfg.p {
        return Err(Error::DimensionMismatch { left: gt.dim(), right: cfg.p });
    }
    let mut steps = Vec::with_capacity(cfg.tasks);
    for t in 1..=cfg.tasks {
        let current = sample_task_dataset(gt, t, cfg.n, cfg.sigma, streams)?;
        let counts = allocate_memory(cfg.memory, t).counts;
        let memory = draw_memory(gt, &counts, cfg.sigma, streams)?;
        steps.push(Step { current, memory });
    }
    Ok(Curriculum { steps })
}

/// Orthonormal basis of the span of the ground truths and their coordinates.
fn span_basis(gt: &GroundTruthSet) -> (DMatrix<f64>, DMatrix<f64>) {
    let t = gt.tasks();
    let p = gt.dim();
    let w = DMatrix::from_fn(p, t, |i, k| gt.vectors[k][i]);
    let gram = w.tr_mul(&w);
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..t).filter(|&k| top > 0.0 && eig.eigenvalues[k] > 1e-12 * top).collect();
    let mut q = DMatrix::zeros(p, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        let v = &w * eig.eigenvectors.column(k) / eig.eigenvalues[k].sqrt();
        q.set_column(c, &v);
    }
    let coords = q.tr_mul(&w);
    (q, coords)
}

/// A curriculum in reduced dimension `r + K` whose losses have exactly the
/// same joint law as the full `p`-dimensional problem.
///
/// `r` is the rank of the ground truths and `K` the number of feature columns
/// in the run. Feature components inside the span of the ground truths are
/// drawn directly. The orthogonal complement only enters through the Gram
/// matrix of the columns, which is represented by its Bartlett factor.
pub fn draw_reduced_curriculum(
    cfg: &ProblemConfig,
    gt: &GroundTruthSet,
    streams: &mut RngStreams,
) -> Result<(GroundTruthSet, Curriculum)> {
    if gt.tasks() != cfg.tasks {
        return Err(Error::ShapeMismatch(format!("{} ground truths for T={}", gt.tasks(), cfg.tasks)));
    }
    let (_, coords) = span_basis(gt);
    let r = coords.nrows();
    let k_total = cfg.total_samples();
    if cfg.p < r + k_total {
        return Err(Error::DimensionTooSmall { p: cfg.p, needed: r + k_total });
    }
    let dim = r + k_total;
    let reduced: Vec<DVector<f64>> = (0..cfg.tasks)
        .map(|i| {
            let mut v = DVector::zeros(dim);
            v.rows_mut(0, r).copy_from(&coords.column(i));
            v
        })
        .collect();
    let mut rgt = GroundTruthSet::from_vectors(reduced)?;
    rgt.seed = gt.seed;

    let complement = (cfg.p - r) as f64;
    let mut col = 0usize;
    let mut column_block = |m: usize, streams: &mut RngStreams| -> Result<DMatrix<f64>> {
        let mut x = DMatrix::zeros(dim, m);
        for c in 0..m {
            let g = col + c;
            for i in 0..r {
                x[(i, c)] = streams.features.sample::<f64, _>(StandardNormal);
            }
            for i in 0..g {
                x[(r + i, c)] = streams.features.sample::<f64, _>(StandardNormal);
            }
            let chi = ChiSquared::new(complement - g as f64)
                .map_err(|e| Error::ConfigInvalid(format!("chi-square degrees of freedom: {e}")))?;
            x[(r + g, c)] = chi.sample(&mut streams.features).sqrt();
        }
        col += m;
        Ok(x)
    };

    let mut steps = Vec::with_capacity(cfg.tasks);
    for t in 1..=cfg.tasks {
        let x = column_block(cfg.n, streams)?;
        let y = outputs(&x, rgt.vector(t), cfg.sigma, streams);
        let current = TaskDataset { x, y, source_task: t, m: cfg.n };
        let counts = allocate_memory(cfg.memory, t).counts;
        let mut per_task = Vec::with_capacity(counts.len());
        for (h, &c) in counts.iter().enumerate() {
            let x = column_block(c, streams)?;
            let y = outputs(&x, rgt.vector(h + 1), cfg.sigma, streams);
            per_task.push(TaskDataset { x, y, source_task: h + 1, m: c });
        }
        steps.push(Step { current, memory: MemoryBuffer { per_task, counts } });
    }
    Ok((rgt, Curriculum { steps }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_gap_error(gt: &GroundTruthSet, target: f64) -> f64 {
        let t = gt.tasks();
        let mut worst: f64 = 0.0;
        for j in 0..t {
            for k in 0..t {
                if j != k {
                    let d = (gt.vector(j + 1) - gt.vector(k + 1)).norm_squared();
                    worst = worst.max((d - target).abs());
                }
            }
        }
        worst
    }

    #[test]
    fn orthonormal_pairwise_gap_two() {
        let gt = generate_ground_truth(&GroundTruthKind::Orthonormal, 3, 10, 1).unwrap();
        assert!(max_gap_error(&gt, 2.0) < 1e-12);
        for v in &gt.vectors {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn orthonormal_needs_room() {
        let err = generate_ground_truth(&GroundTruthKind::Orthonormal, 5, 4, 1).unwrap_err();
        assert_eq!(err, Error::DimensionTooSmall { p: 4, needed: 5 });
    }

    #[test]
    fn zero_gap_gives_identical_unit_vectors() {
        let gt = generate_ground_truth(&GroundTruthKind::EqualGap { gap_sq: 0.0 }, 5, 500, 3).unwrap();
        for v in &gt.vectors {
            assert!((v.norm() - 1.0).abs() < 1e-12);
            assert!((v - gt.vector(1)).norm() < 1e-12);
        }
    }

    #[test]
    fn equal_gap_point_eight() {
        let gt = generate_ground_truth(&GroundTruthKind::EqualGap { gap_sq: 0.8 }, 5, 500, 11).unwrap();
        assert!(max_gap_error(&gt, 0.8) <= 1e-10);
        for j in 0..5 {
            for k in 0..5 {
                if j != k {
                    assert!((gt.gap_matrix[(j, k)] - 0.8).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn feasibility_boundary_rejected() {
        let limit = equal_gap_limit(5);
        assert_eq!(limit, 2.5);
        let err = generate_ground_truth(&GroundTruthKind::EqualGap { gap_sq: limit }, 5, 50, 0).unwrap_err();
        assert!(matches!(err, Error::InfeasibleGap { .. }));
        assert!(generate_ground_truth(&GroundTruthKind::EqualGap { gap_sq: -0.1 }, 5, 50, 0).is_err());
        let near = generate_ground_truth(&GroundTruthKind::EqualGap { gap_sq: limit - 1e-6 }, 5, 50, 0).unwrap();
        for v in &near.vectors {
            assert!((v.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ground_truth_reproducible() {
        let kind = GroundTruthKind::EqualGap { gap_sq: 1.3 };
        let a = generate_ground_truth(&kind, 4, 40, 77).unwrap();
        let b = generate_ground_truth(&kind, 4, 40, 77).unwrap();
        assert_eq!(a, b);
        let c = generate_ground_truth(&kind, 4, 40, 78).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noiseless_outputs_exact() {
        let gt = generate_ground_truth(&GroundTruthKind::Orthonormal, 2, 8, 2).unwrap();
        let mut s = RngStreams::new(4);
        let d = sample_task_dataset(&gt, 2, 3, 0.0, &mut s).unwrap();
        assert_eq!(d.y, d.x.tr_mul(gt.vector(2)));
        assert_eq!(d.m, 3);
        assert_eq!(d.source_task, 2);
    }

    #[test]
    fn pure_noise_variance_near_one() {
        let gt = GroundTruthSet::from_vectors(vec![DVector::zeros(6)]).unwrap();
        let mut s = RngStreams::new(21);
        let mut vals = Vec::new();
        for _ in 0..2000 {
            let d = sample_task_dataset(&gt, 1, 5, 1.0, &mut s).unwrap();
            vals.extend(d.y.iter().cloned());
        }
        let n = vals.len() as f64;
        let sq: Vec<f64> = vals.iter().map(|v| v * v).collect();
        let mean = sq.iter().sum::<f64>() / n;
        let var = sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        assert!((mean - 1.0).abs() < 4.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn fixed_seed_bit_identical_dataset() {
        let gt = generate_ground_truth(&GroundTruthKind::Orthonormal, 2, 8, 2).unwrap();
        let a = sample_task_dataset(&gt, 1, 4, 0.5, &mut RngStreams::new(10)).unwrap();
        let b = sample_task_dataset(&gt, 1, 4, 0.5, &mut RngStreams::new(10)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn allocation_examples() {
        assert_eq!(allocate_memory(24, 5), Allocation { counts: vec![6, 6, 6, 6], non_integer: false });
        assert_eq!(allocate_memory(0, 3), Allocation { counts: vec![0, 0], non_integer: false });
        assert_eq!(allocate_memory(7, 4), Allocation { counts: vec![3, 2, 2], non_integer: true });
    }

    #[test]
    fn empty_memory_buffer() {
        let gt = generate_ground_truth(&GroundTruthKind::Orthonormal, 3, 8, 2).unwrap();
        let buf = draw_memory(&gt, &[0, 0], 0.0, &mut RngStreams::new(1)).unwrap();
        assert!(buf.is_empty());
        assert_eq!(buf.per_task.len(), 2);
    }

    #[test]
    fn noiseless_memory_interpolates_own_truth() {
        let gt = generate_ground_truth(&GroundTruthKind::EqualGap { gap_sq: 1.0 }, 5, 60, 2).unwrap();
        let buf = draw_memory(&gt, &[6, 6, 6, 6], 0.0, &mut RngStreams::new(1)).unwrap();
        for (h, d) in buf.per_task.iter().enumerate() {
            assert_eq!(d.source_task, h + 1);
            let r = &d.y - d.x.tr_mul(gt.vector(h + 1));
            assert!(r.amax() == 0.0);
        }
    }

    #[test]
    fn distinct_streams_uncorrelated_buffers() {
        let gt = generate_ground_truth(&GroundTruthKind::Orthonormal, 2, 50, 2).unwrap();
        let a = draw_memory(&gt, &[100, 100], 0.0, &mut RngStreams::for_trial(5, 0)).unwrap();
        let b = draw_memory(&gt, &[100, 100], 0.0, &mut RngStreams::for_trial(5, 1)).unwrap();
        let xa: Vec<f64> = a.per_task.iter().flat_map(|d| d.x.iter().cloned()).take(10_000).collect();
        let xb: Vec<f64> = b.per_task.iter().flat_map(|d| d.x.iter().cloned()).take(10_000).collect();
        let n = xa.len() as f64;
        let ma = xa.iter().sum::<f64>() / n;
        let mb = xb.iter().sum::<f64>() / n;
        let cov: f64 = xa.iter().zip(&xb).map(|(a, b)| (a - ma) * (b - mb)).sum();
        let va: f64 = xa.iter().map(|a| (a - ma).powi(2)).sum();
        let vb: f64 = xb.iter().map(|b| (b - mb).powi(2)).sum();
        let corr = cov / (va * vb).sqrt();
        assert!(corr.abs() < 4.0 / n.sqrt(), "corr {corr}");
    }

    #[test]
    fn reduced_curriculum_shapes() {
        let cfg = ProblemConfig::new(200, 5, 4, 3, 0.0);
        let gt = generate_ground_truth(&GroundTruthKind::Orthonormal, 3, 200, 2).unwrap();
        let (rgt, cur) = draw_reduced_curriculum(&cfg, &gt, &mut RngStreams::new(3)).unwrap();
        let dim = 3 + cfg.total_samples();
        assert_eq!(rgt.dim(), dim);
        assert!((rgt.gap_matrix[(0, 1)] - 2.0).abs() < 1e-12);
        assert_eq!(cur.steps.len(), 3);
        assert_eq!(cur.steps[2].memory.counts, vec![2, 2]);
        assert_eq!(cur.steps[0].current.x.nrows(), dim);
    }

    #[test]
    fn csv_dump_has_header_and_seed() {
        let gt = generate_ground_truth(&GroundTruthKind::Orthonormal, 2, 3, 9).unwrap();
        let csv = gt.to_csv();
        assert!(csv.starts_with("# tasks=2 p=3 seed=9\ntask,x0,x1,x2\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
