//! Forgetting and generalization error of a trace.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trainers::TrainTrace;

/// `‖w − w*‖²`.
pub fn model_error(w: &DVector<f64>, w_star: &DVector<f64>) -> Result<f64> {
    if w.len() != w_star.len() {
        return Err(Error::DimensionMismatch { left: w.len(), right: w_star.len() });
    }
    Ok((w - w_star).norm_squared())
}

/// `F_T = mean over i < T of L_i(w_T) − L_i(w_i)`; negative values mean backward transfer.
pub fn forgetting(trace: &TrainTrace) -> Result<f64> {
    let t = trace.tasks();
    if t < 2 {
        return Err(Error::TooFewTasks);
    }
    let sum: f64 = (1..t).map(|i| trace.error(i, t) - trace.error(i, i)).sum();
    Ok(sum / (t - 1) as f64)
}

/// `G_T = mean over i ≤ T of L_i(w_T)`.
pub fn generalization(trace: &TrainTrace) -> f64 {
    let t = trace.tasks();
    (1..=t).map(|i| trace.error(i, t)).sum::<f64>() / t as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// `None` for a single task.
    pub forgetting: Option<f64>,
    pub generalization: f64,
    pub per_task_forgetting: Vec<f64>,
    pub per_task_generalization: Vec<f64>,
}

impl MetricReport {
    pub fn from_trace(trace: &TrainTrace) -> Self {
        let t = trace.tasks();
        MetricReport {
            forgetting: forgetting(trace).ok(),
            generalization: generalization(trace),
            per_task_forgetting: (1..t).map(|i| trace.error(i, t) - trace.error(i, i)).collect(),
            per_task_generalization: (1..=t).map(|i| trace.error(i, t)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemConfig;
    use crate::trainers::StrategySpec;
    use nalgebra::DMatrix;

    fn trace(errors: DMatrix<f64>) -> TrainTrace {
        let t = errors.nrows();
        TrainTrace {
            params: vec![DVector::zeros(2); t],
            errors,
            cfg: ProblemConfig::new(10, 2, 2, t, 0.0),
            strategy: StrategySpec::concurrent(),
            seed: None,
            partition: None,
        }
    }

    #[test]
    fn model_error_examples() {
        let v = DVector::from_vec(vec![0.3, -1.0]);
        assert_eq!(model_error(&v, &v).unwrap(), 0.0);
        let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert_eq!(model_error(&DVector::zeros(3), &e1).unwrap(), 1.0);
        let a = DVector::from_vec(vec![1.0, 2.0]);
        let b = DVector::from_vec(vec![4.0, 6.0]);
        assert_eq!(model_error(&a, &b).unwrap(), 25.0);
        assert!(matches!(model_error(&a, &e1), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn forgetting_examples() {
        assert_eq!(forgetting(&trace(DMatrix::from_element(3, 3, 0.7))).unwrap(), 0.0);
        let tr = trace(DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 0.0, 0.0]));
        assert_eq!(forgetting(&tr).unwrap(), 2.0);
        assert_eq!(forgetting(&trace(DMatrix::from_element(1, 1, 1.0))), Err(Error::TooFewTasks));
    }

    #[test]
    fn generalization_examples() {
        assert_eq!(generalization(&trace(DMatrix::zeros(3, 3))), 0.0);
        assert_eq!(generalization(&trace(DMatrix::from_element(1, 1, 4.5))), 4.5);
        let tr = trace(DMatrix::from_row_slice(2, 2, &[9.0, 1.0, 9.0, 3.0]));
        assert_eq!(generalization(&tr), 2.0);
    }

    #[test]
    fn report_means_match() {
        let tr = trace(DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 4.0, 0.0, 1.0, 3.0, 5.0, 5.0, 2.0]));
        let r = MetricReport::from_trace(&tr);
        assert_eq!(r.per_task_forgetting, vec![3.0, 2.0]);
        assert_eq!(r.forgetting, Some(2.5));
        assert_eq!(r.per_task_generalization, vec![4.0, 3.0, 2.0]);
        assert_eq!(r.generalization, 3.0);
    }
}
