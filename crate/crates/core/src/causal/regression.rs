use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernels::{gram_sym, KernelSpec};
use crate::sample::ComponentSample;

pub const DEFAULT_RIDGE: f64 = 1e-3;

/// Kernel ridge regression residuals of a scalar `y` on `x`.
///
/// `y` is centred first, then `r = ỹ − K(K + nλI)⁻¹ỹ = nλ (K + nλI)⁻¹ ỹ`
/// with `K` the Gaussian Gram of `x` under `spec`. Without regressors
/// (`x = None`) the residual is `y − ȳ`. If every row of `x` is identical
/// the regression is skipped with a warning and `y − ȳ` is returned.
///
/// Centring first makes the residuals exactly invariant to shifting `y`.
pub fn krr_residuals(y: &ComponentSample, x: Option<&ComponentSample>, ridge: f64, spec: &KernelSpec) -> Result<Vec<f64>> {
    if y.d() != 1 {
        return Err(Error::invalid(format!("response must be scalar, got d = {}", y.d())));
    }
    if !(ridge > 0.0 && ridge.is_finite()) {
        return Err(Error::invalid(format!("ridge must be positive and finite, got {ridge}")));
    }
    let n = y.n();
    let mean = y.values().iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = y.values().iter().map(|v| v - mean).collect();
    let Some(x) = x else {
        return Ok(centred);
    };
    if x.n() != n {
        return Err(Error::invalid(format!("response has {n} rows, regressors {}", x.n())));
    }
    if (1..n).all(|i| x.row(i) == x.row(0)) {
        log::warn!("all regressor rows are identical; using mean-centred residuals");
        return Ok(centred);
    }
    let kernel = spec.resolve(x)?;
    let shift = n as f64 * ridge;
    let mut a: DMatrix<f64> = gram_sym(&kernel, x).into_matrix();
    for i in 0..n {
        a[(i, i)] += shift;
    }
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::DegenerateSample("ridge system is not positive definite".into()))?;
    let sol = chol.solve(&DVector::from_vec(centred));
    Ok(sol.iter().map(|v| v * shift).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_parents_centre() {
        let y = ComponentSample::from_column(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(krr_residuals(&y, None, 1e-3, &KernelSpec::default()).unwrap(), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn smooth_function_is_interpolated() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64 * 6.0 / 99.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let x = ComponentSample::from_column(&xs).unwrap();
        let y = ComponentSample::from_column(&ys).unwrap();
        let r = krr_residuals(&y, Some(&x), 1e-4, &KernelSpec::default()).unwrap();
        let mean = ys.iter().sum::<f64>() / 100.0;
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        let yn = ys.iter().map(|v| (v - mean).powi(2)).sum::<f64>().sqrt();
        assert!(rn / yn <= 0.1, "{}", rn / yn);
    }

    #[test]
    fn heavy_ridge_fits_nothing() {
        let xs: Vec<f64> = (0..50).map(|i| (i as f64).sqrt()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.cos() - 0.2).collect();
        let x = ComponentSample::from_column(&xs).unwrap();
        let y = ComponentSample::from_column(&ys).unwrap();
        let r = krr_residuals(&y, Some(&x), 1e6, &KernelSpec::default()).unwrap();
        let mean = ys.iter().sum::<f64>() / 50.0;
        let fit: f64 = ys.iter().zip(&r).map(|(y, r)| (y - mean - r).powi(2)).sum::<f64>().sqrt();
        let yn = ys.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(fit <= 1e-3 * yn);
    }

    #[test]
    fn constant_regressor_falls_back() {
        let x = ComponentSample::from_column(&[2.0, 2.0, 2.0]).unwrap();
        let y = ComponentSample::from_column(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(krr_residuals(&y, Some(&x), 1e-3, &KernelSpec::default()).unwrap(), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let y = ComponentSample::from_column(&[1.0, 2.0, 3.0]).unwrap();
        let x = ComponentSample::from_column(&[1.0, 2.0]).unwrap();
        assert!(krr_residuals(&y, None, 0.0, &KernelSpec::default()).is_err());
        assert!(krr_residuals(&y, Some(&x), 1e-3, &KernelSpec::default()).is_err());
    }
}
