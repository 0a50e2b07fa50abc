use serde::Serialize;

use super::{check_cfg, Geometry};
use crate::error::{Error, Result};
use crate::problem::ProblemConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeTask {
    pub f_concurrent: f64,
    pub f_sequential: f64,
    pub g_concurrent: f64,
    pub g_sequential: f64,
}

/// Explicit noiseless `T = 3` polynomials with `M/2` per task at the third step.
pub fn three_task(cfg: &ProblemConfig, geom: &Geometry) -> Result<ThreeTask> {
    check_cfg(cfg, Some(geom))?;
    if cfg.tasks != 3 {
        return Err(Error::ConfigInvalid(format!("three_task needs T=3, got {}", cfg.tasks)));
    }
    if cfg.sigma != 0.0 {
        return Err(Error::NonzeroSigma(cfg.sigma));
    }
    let p = cfg.p as f64;
    let n = cfg.n as f64;
    let m = cfg.memory as f64;
    let q = p - n - m - 1.0;
    if q <= 0.0 {
        return Err(Error::DenominatorDomain(format!("p - n - M - 1 = {q} <= 0")));
    }
    let a = n + m;
    let r0 = 1.0 - n / p;
    let ra = 1.0 - a / p;
    let nsum: f64 = geom.norms_sq.iter().sum();
    let [n1, n2] = [geom.norms_sq[0], geom.norms_sq[1]];
    let (g12, g13, g23) = (geom.gap(1, 2), geom.gap(1, 3), geom.gap(2, 3));
    let nmq = n * m / (p * q);
    let mmq = m * m / (p * q);

    let f_concurrent = 0.5 * (-2.0 * a / p + a * a / (p * p)) * r0 * n1
        + 0.5 * (-a / p) * ra * r0 * n2
        + 0.5 * ((1.0 - 2.0 * a / p) * nmq + mmq / 2.0 + a / p * r0 * ra) * g12
        + 0.5 * (n / p + nmq) * g13
        + 0.5 * (n / p + nmq) * g23;
    let g_concurrent = ra * ra * r0 * nsum / 3.0
        + ((3.0 - 3.0 * a / p) * nmq + 0.75 * mmq + a / p * (2.0 - 3.0 * n / p - m / p + n * a / (p * p))) * g12 / 3.0
        + (n / p * (2.0 - 2.0 * a / p + a * a / (p * p)) + m / p * ra + m / (2.0 * p) + 1.5 * nmq) * g13 / 3.0
        + (n / p * (2.0 - a / p) + m / (2.0 * p) + 1.5 * nmq) * g23 / 3.0;

    let rm = 1.0 - m / p;
    let h = (1.0 - m / (2.0 * p)).powi(2);
    let all = r0.powi(3) * rm * h;
    let f_sequential = 0.5 * (all - r0) * n1
        + 0.5 * (all - r0 * r0 * rm) * n2
        + 0.5 * (r0 * rm * n / p * (h * (2.0 - n / p) - 1.0) + h * r0 * m / p - m * m / (4.0 * p * p)) * g12
        + 0.5 * h * n / p * g13
        + 0.5 * h * n / p * g23;
    let g_sequential = all * nsum / 3.0
        + (r0 * h * (rm * (2.0 - n / p) * n / p + m / p) + m / p - m * m / (4.0 * p * p)) * g12 / 3.0
        + (h * n / p + h * r0 * m / p + r0 * r0 * rm * h * n / p + (1.0 - m / (2.0 * p)) * m / (2.0 * p)) * g13 / 3.0
        + (h * n / p * (rm * r0 + 1.0) + m / (2.0 * p)) * g23 / 3.0;

    Ok(ThreeTask { f_concurrent, f_sequential, g_concurrent, g_sequential })
}

#[cfg(test)]
mod tests {
    use super::super::{predict_recursive, MemoryModel, Rehearsal};
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_geom(seed: u64) -> Geometry {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<DVector<f64>> = (0..3).map(|_| DVector::from_fn(30, |_, _| rng.sample(StandardNormal))).collect();
        Geometry::new(w.iter().map(|v| v.norm_squared()).collect(), DMatrix::from_fn(3, 3, |j, k| (&w[j] - &w[k]).norm_squared())).unwrap()
    }

    #[test]
    fn matches_recursion() {
        let cfg = ProblemConfig::new(400, 16, 12, 3, 0.0);
        let g = random_geom(9);
        let t3 = three_task(&cfg, &g).unwrap();
        let c = predict_recursive(&cfg, &g, &Rehearsal::Concurrent, MemoryModel::Fractional).unwrap();
        let s = predict_recursive(&cfg, &g, &Rehearsal::Sequential, MemoryModel::Fractional).unwrap();
        for (a, b) in [
            (t3.f_concurrent, c.forgetting.unwrap()),
            (t3.f_sequential, s.forgetting.unwrap()),
            (t3.g_concurrent, c.generalization),
            (t3.g_sequential, s.generalization),
        ] {
            assert!((a - b).abs() <= 1e-10 * b.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn orthonormal_large_p_favours_sequential() {
        let cfg = ProblemConfig::new(super::super::large_p_schedule(3, 4, 2), 4, 2, 3, 0.0);
        let t3 = three_task(&cfg, &Geometry::orthonormal(3)).unwrap();
        assert!(t3.f_concurrent > t3.f_sequential);
        assert!(t3.g_concurrent > t3.g_sequential);
    }

    #[test]
    fn zero_gaps_leave_norm_terms() {
        let cfg = ProblemConfig::new(200, 10, 6, 3, 0.0);
        let g = Geometry::new(vec![1.0, 2.0, 3.0], DMatrix::zeros(3, 3)).unwrap();
        let t3 = three_task(&cfg, &g).unwrap();
        let (p, n, m) = (200.0, 10.0, 6.0);
        let a = n + m;
        let r0 = 1.0 - n / p;
        let expect = 0.5 * (-2.0 * a / p + a * a / (p * p)) * r0 * 1.0 + 0.5 * (-a / p) * (1.0 - a / p) * r0 * 2.0;
        assert!((t3.f_concurrent - expect).abs() < 1e-15);
    }

    #[test]
    fn rejects_noise() {
        let cfg = ProblemConfig::new(200, 10, 6, 3, 0.1);
        assert_eq!(three_task(&cfg, &Geometry::orthonormal(3)), Err(Error::NonzeroSigma(0.1)));
    }
}
