use nalgebra::DMatrix;
use serde::Serialize;

use super::{check_cfg, lambda, memory_sizes, Geometry, MemoryModel, Rehearsal};
use crate::error::{Error, Result};
use crate::problem::ProblemConfig;

/// Expected model errors for every `(i, t)` plus the two metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    /// `None` when `T = 1`.
    pub forgetting: Option<f64>,
    pub generalization: f64,
    /// `expected[(i − 1, t − 1)] = E‖w_t − w*_i‖²`.
    pub expected: DMatrix<f64>,
}

impl Prediction {
    pub(crate) fn from_expected(expected: DMatrix<f64>) -> Self {
        let t = expected.ncols();
        let forgetting = (t >= 2).then(|| (0..t - 1).map(|i| expected[(i, t - 1)] - expected[(i, i)]).sum::<f64>() / (t - 1) as f64);
        let generalization = (0..t).map(|i| expected[(i, t - 1)]).sum::<f64>() / t as f64;
        Prediction { forgetting, generalization, expected }
    }
}

type Block = (usize, f64);

/// The fits performed at task `t`, each a list of `(task, size)` blocks.
fn fits_at(cfg: &ProblemConfig, rehearsal: &Rehearsal, model: MemoryModel, t: usize) -> Result<Vec<Vec<Block>>> {
    let current = (t, cfg.n as f64);
    if t == 1 {
        return Ok(vec![vec![current]]);
    }
    let mu = memory_sizes(cfg, t, model)?;
    let chunk = |h: usize| (h, mu[h - 1]);
    Ok(match rehearsal {
        Rehearsal::Concurrent => {
            let mut joint = vec![current];
            joint.extend((1..t).map(chunk));
            vec![joint]
        }
        Rehearsal::Sequential => {
            let mut fits = vec![vec![current]];
            fits.extend((1..t).map(|h| vec![chunk(h)]));
            fits
        }
        Rehearsal::Hybrid(part) => {
            let mut joint = vec![current];
            joint.extend(part.sim(t).into_iter().map(chunk));
            let mut fits = vec![joint];
            fits.extend(part.dis(t).into_iter().map(|h| vec![chunk(h)]));
            fits
        }
    })
}

/// Iterates the one-fit expectation update.
///
/// For a fit of blocks `(j, m_j)` with `m = Σ m_j` from a start independent of
/// the new features,
/// `E L_i ← (1 − m/p) E L_i + Σ_j (m_j/p) g(j,i) + Σ_{j<k} m_j m_k/(p(p−m−1)) g(j,k) + m σ²/(p−m−1)`.
pub fn predict_recursive(cfg: &ProblemConfig, geom: &Geometry, rehearsal: &Rehearsal, model: MemoryModel) -> Result<Prediction> {
    check_cfg(cfg, Some(geom))?;
    rehearsal.check(cfg.tasks)?;
    let tasks = cfg.tasks;
    let p = cfg.p as f64;
    let s2 = cfg.sigma * cfg.sigma;
    let mut e: Vec<f64> = geom.norms_sq.clone();
    let mut expected = DMatrix::zeros(tasks, tasks);
    for t in 1..=tasks {
        for fit in fits_at(cfg, rehearsal, model, t)? {
            let blocks: Vec<Block> = fit.into_iter().filter(|b| b.1 > 0.0).collect();
            let m: f64 = blocks.iter().map(|b| b.1).sum();
            if m == 0.0 {
                continue;
            }
            let q = p - m - 1.0;
            if q <= 0.0 {
                return Err(Error::DenominatorDomain(format!("p - m - 1 = {q} <= 0 for a fit of {m} samples")));
            }
            let mut pair_term = 0.0;
            for a in 0..blocks.len() {
                for b in a + 1..blocks.len() {
                    let (j, mj) = blocks[a];
                    let (k, mk) = blocks[b];
                    pair_term += mj * mk / (p * q) * geom.gap(j, k);
                }
            }
            let noise = s2 * lambda(p, m)?;
            for (i0, ei) in e.iter_mut().enumerate() {
                let pull: f64 = blocks.iter().map(|&(j, mj)| mj / p * geom.gap(j, i0 + 1)).sum();
                *ei = (1.0 - m / p) * *ei + pull + pair_term + noise;
            }
        }
        for i in 0..tasks {
            expected[(i, t - 1)] = e[i];
        }
    }
    Ok(Prediction::from_expected(expected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainers::Partition;

    fn cfg(p: usize, n: usize, m: usize, t: usize, sigma: f64) -> ProblemConfig {
        ProblemConfig::new(p, n, m, t, sigma)
    }

    #[test]
    fn memoryless_strategies_identical() {
        let c = cfg(80, 6, 0, 4, 0.4);
        let g = Geometry::equal_gap(4, 0.7);
        let a = predict_recursive(&c, &g, &Rehearsal::Concurrent, MemoryModel::Strict).unwrap();
        let b = predict_recursive(&c, &g, &Rehearsal::Sequential, MemoryModel::Strict).unwrap();
        for (x, y) in a.expected.iter().zip(b.expected.iter()) {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300));
        }
    }

    #[test]
    fn first_task_zero_gap_no_noise() {
        let c = cfg(500, 24, 24, 5, 0.0);
        let g = Geometry::equal_gap(5, 0.0);
        for r in [Rehearsal::Concurrent, Rehearsal::Sequential, Rehearsal::Hybrid(Partition::all_similar(5))] {
            let pr = predict_recursive(&c, &g, &r, MemoryModel::Strict).unwrap();
            for i in 0..5 {
                assert!((pr.expected[(i, 0)] - (1.0 - 24.0 / 500.0)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn crossover_in_both_metrics() {
        let c = cfg(500, 24, 24, 5, 0.0);
        let diff = |gap: f64| {
            let g = Geometry::equal_gap(5, gap);
            let a = predict_recursive(&c, &g, &Rehearsal::Concurrent, MemoryModel::Strict).unwrap();
            let b = predict_recursive(&c, &g, &Rehearsal::Sequential, MemoryModel::Strict).unwrap();
            (a.forgetting.unwrap() - b.forgetting.unwrap(), a.generalization - b.generalization)
        };
        let (f0, g0) = diff(0.1);
        let (f1, g1) = diff(1.9);
        assert!(f0 < 0.0 && g0 < 0.0);
        assert!(f1 > 0.0 && g1 > 0.0);
    }

    #[test]
    fn strict_rejects_uneven_memory() {
        let c = cfg(100, 5, 7, 4, 0.0);
        let g = Geometry::equal_gap(4, 1.0);
        let err = predict_recursive(&c, &g, &Rehearsal::Concurrent, MemoryModel::Strict).unwrap_err();
        assert_eq!(err, Error::NonIntegerAllocation { memory: 7, divisor: 2 });
        assert!(predict_recursive(&c, &g, &Rehearsal::Concurrent, MemoryModel::Exact).is_ok());
        assert!(predict_recursive(&c, &g, &Rehearsal::Concurrent, MemoryModel::Fractional).is_ok());
    }

    #[test]
    fn denominator_domain() {
        let c = cfg(31, 20, 10, 2, 0.0);
        let g = Geometry::equal_gap(2, 1.0);
        assert!(matches!(
            predict_recursive(&c, &g, &Rehearsal::Concurrent, MemoryModel::Strict),
            Err(Error::DenominatorDomain(_))
        ));
        assert!(predict_recursive(&c, &g, &Rehearsal::Sequential, MemoryModel::Strict).is_ok());
    }

    #[test]
    fn pure_noise_specialization() {
        let c = cfg(120, 8, 6, 4, 0.9);
        let g = Geometry::new(vec![0.0; 4], DMatrix::zeros(4, 4)).unwrap();
        let pr = predict_recursive(&c, &g, &Rehearsal::Sequential, MemoryModel::Fractional).unwrap();
        let noise: Vec<f64> = (0..4).map(|t| pr.expected[(0, t)]).collect();
        let f = noise[3] - noise[..3].iter().sum::<f64>() / 3.0;
        assert!((pr.forgetting.unwrap() - f).abs() < 1e-14);
        assert!((pr.generalization - noise[3]).abs() < 1e-14);
    }
}
