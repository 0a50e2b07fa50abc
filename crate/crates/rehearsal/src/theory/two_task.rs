use serde::Serialize;

use super::{check_cfg, predict_recursive, Geometry, MemoryModel, Rehearsal};
use crate::error::{Error, Result};
use crate::problem::ProblemConfig;

/// `F_2 = ĉ₁‖w₁*‖² + ĉ₂ g + σ² ν_F`, `G_2 = d̂₁(‖w₁*‖² + ‖w₂*‖²) + d̂₂ g + σ² ν_G`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoTaskCoefficients {
    pub c_hat1: f64,
    pub c_hat2: f64,
    pub d_hat1: f64,
    pub d_hat2: f64,
    /// Per unit `σ²`.
    pub noise_hat_f: f64,
    pub noise_hat_g: f64,
}

impl TwoTaskCoefficients {
    pub fn forgetting(&self, geom: &Geometry, sigma: f64) -> f64 {
        self.c_hat1 * geom.norms_sq[0] + self.c_hat2 * geom.gap(1, 2) + sigma * sigma * self.noise_hat_f
    }

    pub fn generalization(&self, geom: &Geometry, sigma: f64) -> f64 {
        self.d_hat1 * (geom.norms_sq[0] + geom.norms_sq[1]) + self.d_hat2 * geom.gap(1, 2) + sigma * sigma * self.noise_hat_g
    }
}

/// Constants of the two-task comparison.
///
/// `F^conc − F^seq = (nM/p²)(1 − n/p)·(ξ₁ g + ξ₂ σ² − ‖w₁*‖²)` and
/// `G^conc − G^seq = ½(nM/p²)(1 − n/p)·(μ₁ g + μ₂ σ² − ‖w₁*‖² − ‖w₂*‖²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoTaskConstants {
    pub xi1: f64,
    pub xi2: f64,
    pub mu1: f64,
    pub mu2: f64,
}

impl TwoTaskConstants {
    /// `F^conc > F^seq`.
    pub fn concurrent_forgets_more(&self, geom: &Geometry, sigma: f64) -> bool {
        (self.xi1 * geom.gap(1, 2) + self.xi2 * sigma * sigma) / geom.norms_sq[0] > 1.0
    }

    /// `G^conc > G^seq`.
    pub fn concurrent_generalizes_worse(&self, geom: &Geometry, sigma: f64) -> bool {
        (self.mu1 * geom.gap(1, 2) + self.mu2 * sigma * sigma) / (geom.norms_sq[0] + geom.norms_sq[1]) > 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoTask {
    /// `None` when `M = 0` (the strategies coincide and the ratios are undefined).
    pub constants: Option<TwoTaskConstants>,
    pub concurrent: TwoTaskCoefficients,
    pub sequential: TwoTaskCoefficients,
    pub f_concurrent: f64,
    pub f_sequential: f64,
    pub g_concurrent: f64,
    pub g_sequential: f64,
}

pub fn two_task(cfg: &ProblemConfig, geom: &Geometry) -> Result<TwoTask> {
    check_cfg(cfg, Some(geom))?;
    if cfg.tasks != 2 {
        return Err(Error::ConfigInvalid(format!("two_task needs T=2, got {}", cfg.tasks)));
    }
    let p = cfg.p as f64;
    let n = cfg.n as f64;
    let m = cfg.memory as f64;
    let q = p - n - m - 1.0;
    if q <= 0.0 {
        return Err(Error::DenominatorDomain(format!("p - n - M - 1 = {q} <= 0")));
    }
    let lam = |a: f64| if a == 0.0 { 0.0 } else { a / (p - a - 1.0) };
    let r0 = 1.0 - n / p;

    let concurrent = TwoTaskCoefficients {
        c_hat1: -(n + m) / p * r0,
        c_hat2: n / p * (1.0 + m / q),
        d_hat1: 0.5 * (1.0 - (n + m) / p) * r0,
        d_hat2: 0.5 * ((2.0 * n + m) / p + 2.0 * n * m / (p * q) - n * (n + m) / (p * p)),
        noise_hat_f: lam(n + m) - (n + m) / p * lam(n),
        noise_hat_g: lam(n + m) + (1.0 - (n + m) / p) * lam(n),
    };
    let sequential = TwoTaskCoefficients {
        c_hat1: (-(n + m) / p + n * m / (p * p)) * r0,
        c_hat2: (1.0 - m / p) * n / p,
        d_hat1: 0.5 * (1.0 - m / p) * r0 * r0,
        d_hat2: 0.5 * ((2.0 * n + m) / p - n * (n + 2.0 * m) / (p * p) + n * n * m / (p * p * p)),
        noise_hat_f: (1.0 - (n + 2.0 * m) / p + n * m / (p * p)) * lam(n) + lam(m),
        noise_hat_g: (1.0 - m / p) * (2.0 - n / p) * lam(n) + lam(m),
    };

    let constants = (cfg.memory > 0).then(|| {
        let scale = n * m / (p * p) * r0;
        let xi1 = n * m / p * (1.0 / q + 1.0 / p) / scale;
        let xi2 = ((n + m) / q - (1.0 - m / p + n * m / (p * p)) * n / (p - n - 1.0) - m / (p - m - 1.0)) / scale;
        let mu1 = n * m / p * (2.0 / q + 1.0 / p - n / (p * p)) / scale;
        TwoTaskConstants { xi1, xi2, mu1, mu2: 2.0 * xi2 }
    });

    Ok(TwoTask {
        constants,
        f_concurrent: concurrent.forgetting(geom, cfg.sigma),
        f_sequential: sequential.forgetting(geom, cfg.sigma),
        g_concurrent: concurrent.generalization(geom, cfg.sigma),
        g_sequential: sequential.generalization(geom, cfg.sigma),
        concurrent,
        sequential,
    })
}

/// σ=0 gap at which both strategies forget equally.
pub fn forgetting_threshold(cfg: &ProblemConfig, norm1_sq: f64) -> f64 {
    let p = cfg.p as f64;
    let n = cfg.n as f64;
    let q = p - n - cfg.memory as f64 - 1.0;
    (p - n) * q / (p * p + p * q) * norm1_sq
}

/// σ=0 gap at which both strategies generalize equally.
pub fn generalization_threshold(cfg: &ProblemConfig, norm_sum_sq: f64) -> f64 {
    let p = cfg.p as f64;
    let n = cfg.n as f64;
    let q = p - n - cfg.memory as f64 - 1.0;
    (p - n) * q / (2.0 * p * p + (p - n) * q) * norm_sum_sq
}

/// Roots in the gap of `F^conc − F^seq` and `G^conc − G^seq` at σ=0, from the recursion.
///
/// Both differences are affine in the gap; the root is found from two evaluations.
pub fn two_task_roots(cfg: &ProblemConfig, norms_sq: [f64; 2]) -> Result<(f64, f64)> {
    let quiet = ProblemConfig { sigma: 0.0, ..*cfg };
    let diff = |gap: f64| -> Result<(f64, f64)> {
        let geom = Geometry::new(norms_sq.to_vec(), nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, gap, gap, 0.0]))?;
        let c = predict_recursive(&quiet, &geom, &Rehearsal::Concurrent, MemoryModel::Fractional)?;
        let s = predict_recursive(&quiet, &geom, &Rehearsal::Sequential, MemoryModel::Fractional)?;
        Ok((c.forgetting.unwrap_or(0.0) - s.forgetting.unwrap_or(0.0), c.generalization - s.generalization))
    };
    let (f0, g0) = diff(0.0)?;
    let (f1, g1) = diff(1.0)?;
    Ok((-f0 / (f1 - f0), -g0 / (g1 - g0)))
}
