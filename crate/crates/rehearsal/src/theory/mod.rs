//! Expected forgetting and generalization error in closed form.
//!
//! Two independent evaluations are provided: [`predict_recursive`] iterates the
//! exact one-fit expectation update, while [`predict_coefficients`] builds the
//! explicit coefficient table from products of per-step factors and
//! [`assemble_from_coefficients`] plugs in norms and gaps.

mod coefficients;
mod orderings;
mod recursion;
mod three_task;
mod two_task;

pub use coefficients::{assemble_from_coefficients, predict_coefficients, Assembled, CoefficientTable, Helpers};
pub use orderings::{coefficient_orderings, Ordering, OrderingEntry, OrderingReport, Precondition};
pub use recursion::{predict_recursive, Prediction};
pub use three_task::{three_task, ThreeTask};
pub use two_task::{
    forgetting_threshold, generalization_threshold, two_task, two_task_roots, TwoTask, TwoTaskCoefficients, TwoTaskConstants,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{allocate_memory, GroundTruthSet, ProblemConfig};
use crate::trainers::{Partition, StrategyKind};

/// Squared norms `‖w*_i‖²` and squared gaps `‖w*_j − w*_k‖²`, all the theory needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub norms_sq: Vec<f64>,
    pub gaps: DMatrix<f64>,
}

impl Geometry {
    pub fn new(norms_sq: Vec<f64>, gaps: DMatrix<f64>) -> Result<Self> {
        let t = norms_sq.len();
        if gaps.nrows() != t || gaps.ncols() != t {
            return Err(Error::ShapeMismatch(format!("{}x{} gaps for {t} norms", gaps.nrows(), gaps.ncols())));
        }
        Ok(Geometry { norms_sq, gaps })
    }

    pub fn from_ground_truth(gt: &GroundTruthSet) -> Self {
        Geometry { norms_sq: gt.norms_sq(), gaps: gt.gap_matrix.clone() }
    }

    pub fn equal_gap(tasks: usize, gap_sq: f64) -> Self {
        Geometry {
            norms_sq: vec![1.0; tasks],
            gaps: DMatrix::from_fn(tasks, tasks, |j, k| if j == k { 0.0 } else { gap_sq }),
        }
    }

    pub fn orthonormal(tasks: usize) -> Self {
        Self::equal_gap(tasks, 2.0)
    }

    pub fn tasks(&self) -> usize {
        self.norms_sq.len()
    }

    /// Gap between 1-based tasks.
    pub fn gap(&self, j: usize, k: usize) -> f64 {
        self.gaps[(j - 1, k - 1)]
    }
}

/// Rehearsal method evaluated by the theory (revisits are oldest first).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rehearsal {
    Concurrent,
    Sequential,
    Hybrid(Partition),
}

impl Rehearsal {
    pub fn name(&self) -> &'static str {
        match self {
            Rehearsal::Concurrent => "concurrent",
            Rehearsal::Sequential => "sequential",
            Rehearsal::Hybrid(_) => "hybrid",
        }
    }

    pub fn kind(&self) -> StrategyKind {
        match self {
            Rehearsal::Concurrent => StrategyKind::Concurrent,
            Rehearsal::Sequential => StrategyKind::Sequential,
            Rehearsal::Hybrid(_) => StrategyKind::Hybrid,
        }
    }

    fn check(&self, tasks: usize) -> Result<()> {
        if let Rehearsal::Hybrid(p) = self {
            p.validate(tasks)?;
        }
        Ok(())
    }
}

/// How per-task memory sizes enter the formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryModel {
    /// `M/(t−1)` per task; fails unless it is an integer.
    Strict,
    /// `M/(t−1)` per task as a real number.
    Fractional,
    /// The integer counts of [`allocate_memory`]; recursion only.
    Exact,
}

/// Per-task memory sizes at task `t ≥ 2`.
pub(crate) fn memory_sizes(cfg: &ProblemConfig, t: usize, model: MemoryModel) -> Result<Vec<f64>> {
    let k = t - 1;
    match model {
        MemoryModel::Strict => {
            if !cfg.memory.is_multiple_of(k) {
                return Err(Error::NonIntegerAllocation { memory: cfg.memory, divisor: k });
            }
            Ok(vec![(cfg.memory / k) as f64; k])
        }
        MemoryModel::Fractional => Ok(vec![cfg.memory as f64 / k as f64; k]),
        MemoryModel::Exact => Ok(allocate_memory(cfg.memory, t).counts.into_iter().map(|c| c as f64).collect()),
    }
}

/// `Λ_a = a/(p − a − 1)`, the noise factor per unit `σ²`.
pub(crate) fn lambda(p: f64, a: f64) -> Result<f64> {
    if a == 0.0 {
        return Ok(0.0);
    }
    let den = p - a - 1.0;
    if den <= 0.0 {
        return Err(Error::DenominatorDomain(format!("p - {a} - 1 = {den} <= 0")));
    }
    Ok(a / den)
}

/// Concrete large-`p` regime used for the orthonormal example: `2T⁴(n+M)²·max(M,1)`.
pub fn large_p_schedule(tasks: usize, n: usize, memory: usize) -> usize {
    2 * tasks.pow(4) * (n + memory).pow(2) * memory.max(1)
}

pub(crate) fn check_cfg(cfg: &ProblemConfig, geom: Option<&Geometry>) -> Result<()> {
    cfg.validate()?;
    if let Some(g) = geom {
        if g.tasks() != cfg.tasks {
            return Err(Error::ShapeMismatch(format!("geometry of {} tasks for T={}", g.tasks(), cfg.tasks)));
        }
    }
    Ok(())
}

/// Relative difference `|a − b| / max(|a|, |b|, floor)`.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(1e-300);
    (a - b).abs() / scale
}
