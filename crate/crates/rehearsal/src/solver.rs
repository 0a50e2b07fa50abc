//! Minimum-norm interpolation: `w = w_s + X(XᵀX)⁻¹(Y − Xᵀw_s)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Above this condition estimate the QR path replaces Cholesky.
pub const COND_FALLBACK: f64 = 1e8;
/// Above this condition estimate the draw is rejected.
pub const COND_MAX: f64 = 1e12;

pub fn tol_fit(y: &DVector<f64>) -> f64 {
    1e-8 * (1.0 + y.amax())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub w: DVector<f64>,
    pub residual_norm: f64,
    pub conditioning: f64,
}

fn condition(gram: &DMatrix<f64>) -> f64 {
    let ev = SymmetricEigen::new(gram.clone()).eigenvalues;
    let hi = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Coefficients `s` of the minimum-norm step `d = Xs` with `Xᵀd = r`.
fn step(x: &DMatrix<f64>, r: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let gram = x.tr_mul(x);
    let cond = condition(&gram);
    if !(cond <= COND_MAX) {
        return Err(Error::SingularGram { cond });
    }
    if cond <= COND_FALLBACK {
        if let Some(ch) = gram.cholesky() {
            return Ok((x * ch.solve(r), cond));
        }
    }
    // Xᵀ = RᵀQᵀ, so d = Q R⁻ᵀ r
    let qr = x.clone().qr();
    let u = qr
        .r()
        .transpose()
        .solve_lower_triangular(r)
        .ok_or(Error::SingularGram { cond })?;
    Ok((qr.q() * u, cond))
}

/// Closest point to `w_start` on `{w : Xᵀw = Y}`.
pub fn min_norm_fit(x: &DMatrix<f64>, y: &DVector<f64>, w_start: &DVector<f64>) -> Result<FitResult> {
    if x.nrows() != w_start.len() {
        return Err(Error::DimensionMismatch { left: x.nrows(), right: w_start.len() });
    }
    if x.ncols() != y.len() {
        return Err(Error::DimensionMismatch { left: x.ncols(), right: y.len() });
    }
    if x.ncols() == 0 {
        return Ok(FitResult { w: w_start.clone(), residual_norm: 0.0, conditioning: 1.0 });
    }
    if x.ncols() >= x.nrows() {
        return Err(Error::ConfigInvalid(format!("fit needs m < p, got m={} p={}", x.ncols(), x.nrows())));
    }
    let r = y - x.tr_mul(w_start);
    let (d, cond) = step(x, &r)?;
    let w = w_start + d;
    let res = x.tr_mul(&w) - y;
    let tol = tol_fit(y);
    if res.amax() > tol {
        return Err(Error::FitTolerance { residual: res.amax(), tol });
    }
    Ok(FitResult { w, residual_norm: res.norm(), conditioning: cond })
}

/// `P_X v`, the orthogonal projection onto the column space of `X`.
pub fn project(x: &DMatrix<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    if x.nrows() != v.len() {
        return Err(Error::DimensionMismatch { left: x.nrows(), right: v.len() });
    }
    if x.ncols() == 0 {
        return Ok(DVector::zeros(v.len()));
    }
    Ok(step(x, &x.tr_mul(v))?.0)
}

/// `X†z = X(XᵀX)⁻¹z`.
pub fn pinv_apply(x: &DMatrix<f64>, z: &DVector<f64>) -> Result<DVector<f64>> {
    if x.ncols() != z.len() {
        return Err(Error::DimensionMismatch { left: x.ncols(), right: z.len() });
    }
    if x.ncols() == 0 {
        return Ok(DVector::zeros(x.nrows()));
    }
    Ok(step(x, z)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gauss(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
    }

    #[test]
    fn single_axis_projection() {
        let x = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let y = DVector::from_vec(vec![1.0]);
        let f = min_norm_fit(&x, &y, &DVector::zeros(2)).unwrap();
        assert_eq!(f.w, DVector::from_vec(vec![1.0, 0.0]));
        let f = min_norm_fit(&x, &y, &DVector::from_vec(vec![0.0, 5.0])).unwrap();
        assert_eq!(f.w, DVector::from_vec(vec![1.0, 5.0]));
    }

    #[test]
    fn feasible_perturbations_are_farther() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = gauss(&mut rng, 50, 10);
        let y = gauss(&mut rng, 10, 1).column(0).into_owned();
        let ws = gauss(&mut rng, 50, 1).column(0).into_owned();
        let f = min_norm_fit(&x, &y, &ws).unwrap();
        let base = (&f.w - &ws).norm();
        for _ in 0..100 {
            let u = gauss(&mut rng, 50, 1).column(0).into_owned();
            let alt = &f.w + (&u - project(&x, &u).unwrap());
            assert!((x.tr_mul(&alt) - &y).amax() < 1e-8);
            assert!(base <= (&alt - &ws).norm() + 1e-12);
        }
    }

    #[test]
    fn projection_examples() {
        let x = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let v = DVector::from_vec(vec![2.0, -3.0, 0.0]);
        assert!((project(&x, &v).unwrap() - &v).amax() < 1e-14);
        let perp = DVector::from_vec(vec![0.0, 0.0, 4.0]);
        assert!(project(&x, &perp).unwrap().amax() < 1e-10);
    }

    #[test]
    fn pythagoras_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = gauss(&mut rng, 30, 5);
        let v = gauss(&mut rng, 30, 1).column(0).into_owned();
        let pv = project(&x, &v).unwrap();
        let rest = &v - &pv;
        assert!((pv.norm_squared() + rest.norm_squared() - v.norm_squared()).abs() < 1e-10);
        assert!((project(&x, &pv).unwrap() - &pv).amax() < 1e-10);
        assert!(pv.dot(&rest).abs() < 1e-10);
    }

    #[test]
    fn singular_gram_detected() {
        let col = [1.0, 2.0, 3.0, 4.0];
        let x = DMatrix::from_columns(&[DVector::from_column_slice(&col), DVector::from_column_slice(&col)]);
        let y = DVector::from_vec(vec![1.0, 1.0]);
        let err = min_norm_fit(&x, &y, &DVector::zeros(4)).unwrap_err();
        assert!(matches!(err, Error::SingularGram { .. }));
    }

    #[test]
    fn ill_conditioned_uses_qr_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut x = gauss(&mut rng, 40, 3);
        let c0 = x.column(0).into_owned();
        let nudge = gauss(&mut rng, 40, 1).column(0).into_owned() * 1e-5;
        x.set_column(1, &(&c0 + nudge));
        let y = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let f = min_norm_fit(&x, &y, &DVector::zeros(40)).unwrap();
        assert!(f.conditioning > COND_FALLBACK);
        assert!((x.tr_mul(&f.w) - &y).amax() < tol_fit(&y));
    }

    #[test]
    fn empty_system_is_identity() {
        let ws = DVector::from_vec(vec![1.0, 2.0]);
        let f = min_norm_fit(&DMatrix::zeros(2, 0), &DVector::zeros(0), &ws).unwrap();
        assert_eq!(f.w, ws);
    }

    #[test]
    fn dimension_mismatch() {
        let x = DMatrix::zeros(3, 1);
        assert!(matches!(
            min_norm_fit(&x, &DVector::zeros(1), &DVector::zeros(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
