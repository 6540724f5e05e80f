//! Dense symmetric/rectangular matrices and the handful of operations the
//! estimators need: an eigen-filtered pseudoinverse for PSD Gram matrices,
//! Hadamard products and bilinear forms.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative asymmetry tolerated by [`SymMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Square symmetric matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

/// Rectangular matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct RectMatrix(DMatrix<f64>);

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid("matrix has non-finite entries"))
    }
}

impl SymMatrix {
    /// Validates squareness, finiteness and symmetry (up to [`SYMMETRY_TOL`]
    /// relative to the largest entry). The stored matrix is exactly symmetric.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::invalid(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        check_finite(&m)?;
        let scale = max_abs(&m);
        let n = m.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::invalid(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let mut m = m;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = m[(i, j)];
                m[(j, i)] = v;
            }
        }
        Ok(SymMatrix(m))
    }

    /// Builds a matrix by evaluating `f(i, j)` on the upper triangle only.
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(order, order);
        for j in 0..order {
            for i in 0..=j {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix(m)
    }

    pub fn identity(order: usize) -> Self {
        SymMatrix(DMatrix::identity(order, order))
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("rows must all have length equal to their count"));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.order() {
            return Err(Error::invalid(format!(
                "vector of length {} does not match matrix order {}",
                v.len(),
                self.order()
            )));
        }
        Ok((&self.0 * DVector::from_column_slice(v)).as_slice().to_vec())
    }

    /// Rows/columns `idx` of `self`, in that order (indices may repeat).
    pub fn select(&self, idx: &[usize]) -> SymMatrix {
        SymMatrix::from_fn(idx.len(), |i, j| self.0[(idx[i], idx[j])])
    }
}

impl RectMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_finite(&m)?;
        Ok(RectMatrix(m))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        RectMatrix(DMatrix::from_fn(rows, cols, f))
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::invalid("ragged rows"));
        }
        Self::new(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn transpose(&self) -> RectMatrix {
        RectMatrix(self.0.transpose())
    }

    /// `A 1`.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows()).map(|i| self.0.row(i).sum()).collect()
    }

    /// Columns `idx` of `self`, as a square matrix when `idx.len() == rows`.
    pub fn select_cols(&self, idx: &[usize]) -> RectMatrix {
        RectMatrix(DMatrix::from_fn(self.rows(), idx.len(), |i, j| self.0[(i, idx[j])]))
    }
}

impl From<SymMatrix> for RectMatrix {
    fn from(s: SymMatrix) -> Self {
        RectMatrix(s.0)
    }
}

/// Shared access for element-wise operations on either matrix kind.
pub trait DenseMatrix: Sized {
    fn dense(&self) -> &DMatrix<f64>;
    #[doc(hidden)]
    fn wrap(m: DMatrix<f64>) -> Self;
}

impl DenseMatrix for SymMatrix {
    fn dense(&self) -> &DMatrix<f64> {
        &self.0
    }
    fn wrap(m: DMatrix<f64>) -> Self {
        SymMatrix(m)
    }
}

impl DenseMatrix for RectMatrix {
    fn dense(&self) -> &DMatrix<f64> {
        &self.0
    }
    fn wrap(m: DMatrix<f64>) -> Self {
        RectMatrix(m)
    }
}

/// Element-wise product of equally shaped matrices, folded left to right.
pub fn hadamard<T: DenseMatrix>(mats: &[T]) -> Result<T> {
    let (first, rest) = mats
        .split_first()
        .ok_or_else(|| Error::invalid("hadamard of an empty list"))?;
    let shape = first.dense().shape();
    let mut acc = first.dense().clone();
    for m in rest {
        if m.dense().shape() != shape {
            return Err(Error::invalid(format!(
                "hadamard shape mismatch: {:?} vs {:?}",
                shape,
                m.dense().shape()
            )));
        }
        acc.component_mul_assign(m.dense());
    }
    Ok(T::wrap(acc))
}

/// `alphaᵀ K beta`.
pub fn quad_form(alpha: &[f64], k: &SymMatrix, beta: &[f64]) -> Result<f64> {
    let n = k.order();
    if alpha.len() != n || beta.len() != n {
        return Err(Error::invalid(format!(
            "quad_form dimensions: alpha {}, K {}x{}, beta {}",
            alpha.len(),
            n,
            n,
            beta.len()
        )));
    }
    let m = k.as_matrix();
    let mut total = 0.0;
    for (j, &b) in beta.iter().enumerate() {
        if b == 0.0 {
            continue;
        }
        let dot: f64 = alpha.iter().zip(m.column(j).iter()).map(|(a, c)| a * c).sum();
        total += dot * b;
    }
    Ok(total)
}

/// `order · ε`, the default eigenvalue cut-off relative to the largest eigenvalue.
pub fn default_rel_tol(order: usize) -> f64 {
    order as f64 * f64::EPSILON
}

/// Symmetric eigendecomposition with small and negative eigenvalues filtered.
///
/// Eigenvalues are clamped at zero, then every `λ ≤ rel_tol · max(λ_max, 0)`
/// is treated as zero. The remaining ones are the "kept" directions.
#[derive(Clone, Debug)]
pub struct FilteredEigen {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    kept: Vec<bool>,
}

impl FilteredEigen {
    pub fn new(k: &SymMatrix, rel_tol: f64) -> Result<Self> {
        if rel_tol.is_nan() || rel_tol < 0.0 {
            return Err(Error::invalid("rel_tol must be non-negative"));
        }
        let eig = SymmetricEigen::new(k.as_matrix().clone());
        let values: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        let lmax = values.iter().cloned().fold(0.0_f64, f64::max);
        let cut = rel_tol * lmax;
        let kept = values.iter().map(|&l| l > cut && l > 0.0).collect();
        Ok(FilteredEigen {
            values,
            vectors: eig.eigenvectors,
            kept,
        })
    }

    pub fn order(&self) -> usize {
        self.values.len()
    }

    pub fn rank(&self) -> usize {
        self.kept.iter().filter(|&&k| k).count()
    }

    pub fn dropped(&self) -> usize {
        self.order() - self.rank()
    }

    /// `V f(Λ) Vᵀ` over the kept directions.
    fn spectral(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.order();
        let mut scaled = self.vectors.clone();
        for (c, (&l, &keep)) in self.values.iter().zip(&self.kept).enumerate() {
            let s = if keep { f(l) } else { 0.0 };
            scaled.column_mut(c).scale_mut(s);
        }
        let full = &scaled * self.vectors.transpose();
        SymMatrix::from_fn(n, |i, j| 0.5 * (full[(i, j)] + full[(j, i)]))
    }

    pub fn pinv(&self) -> SymMatrix {
        self.spectral(|l| 1.0 / l)
    }

    /// Pseudo-inverse square root `K^{-1/2}` on the kept directions.
    pub fn inv_sqrt(&self) -> SymMatrix {
        self.spectral(|l| 1.0 / l.sqrt())
    }

    /// `V_k Λ_k^{-1/2}` over the kept directions (`order × rank`).
    ///
    /// `F Fᵀ = K⁻`, and unlike the symmetric root it never mixes the large
    /// reciprocals of small eigenvalues back through `Vᵀ`.
    pub fn inv_sqrt_factor(&self) -> DMatrix<f64> {
        let cols: Vec<_> = (0..self.order())
            .filter(|&c| self.kept[c])
            .map(|c| self.vectors.column(c) / self.values[c].sqrt())
            .collect();
        if cols.is_empty() {
            DMatrix::zeros(self.order(), 0)
        } else {
            DMatrix::from_columns(&cols)
        }
    }

    /// `K⁻ v` without materialising `K⁻`.
    pub fn apply_pinv(&self, v: &[f64]) -> Vec<f64> {
        let n = self.order();
        let mut out = vec![0.0; n];
        for c in 0..n {
            if !self.kept[c] {
                continue;
            }
            let col = self.vectors.column(c);
            let coef: f64 = col.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / self.values[c];
            for (o, a) in out.iter_mut().zip(col.iter()) {
                *o += coef * a;
            }
        }
        out
    }
}

/// Moore–Penrose inverse of a symmetric PSD matrix via its filtered
/// eigendecomposition.
pub fn pinv_psd(k: &SymMatrix, rel_tol: f64) -> Result<SymMatrix> {
    Ok(FilteredEigen::new(k, rel_tol)?.pinv())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn frob(m: &DMatrix<f64>) -> f64 {
        m.norm()
    }

    #[test]
    fn pinv_identity_and_zero() {
        let i3 = SymMatrix::identity(3);
        let p = pinv_psd(&i3, 1e-12).unwrap();
        assert_abs_diff_eq!(frob(&(p.as_matrix() - i3.as_matrix())), 0.0, epsilon = 1e-14);

        let z = SymMatrix::new(DMatrix::zeros(2, 2)).unwrap();
        let p = pinv_psd(&z, default_rel_tol(2)).unwrap();
        assert_eq!(p.as_matrix(), &DMatrix::<f64>::zeros(2, 2));
    }

    #[test]
    fn pinv_rank_one_diagonal() {
        let k = SymMatrix::from_rows(&[&[2.0, 0.0], &[0.0, 0.0]]).unwrap();
        let p = pinv_psd(&k, default_rel_tol(2)).unwrap();
        assert_abs_diff_eq!(p.get(0, 0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.get(0, 1), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.get(1, 1), 0.0, epsilon = 1e-15);
        let kpk = k.as_matrix() * p.as_matrix() * k.as_matrix();
        assert_abs_diff_eq!(frob(&(kpk - k.as_matrix())), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_asymmetric_and_nan() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.1, 1.0]);
        assert!(matches!(SymMatrix::new(a), Err(Error::InvalidInput(_))));
        let b = DMatrix::from_row_slice(2, 2, &[1.0, f64::NAN, f64::NAN, 1.0]);
        assert!(matches!(SymMatrix::new(b), Err(Error::InvalidInput(_))));
        let c = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        assert!(SymMatrix::new(c).is_err());
    }

    #[test]
    fn negative_rel_tol_rejected() {
        assert!(pinv_psd(&SymMatrix::identity(2), -1.0).is_err());
    }

    #[test]
    fn hadamard_examples() {
        let a = SymMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        let b = SymMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let single = hadamard(std::slice::from_ref(&a)).unwrap();
        assert_eq!(single, a);
        let ab = hadamard(&[a.clone(), b]).unwrap();
        assert_eq!(ab, SymMatrix::from_rows(&[&[0.0, 2.0], &[2.0, 0.0]]).unwrap());
        let ones = SymMatrix::new(DMatrix::from_element(2, 2, 1.0)).unwrap();
        assert_eq!(hadamard(&[a.clone(), ones]).unwrap(), a);
    }

    #[test]
    fn hadamard_shape_mismatch() {
        let a = RectMatrix::from_fn(2, 3, |i, j| (i + j) as f64);
        let b = RectMatrix::from_fn(3, 2, |i, j| (i + j) as f64);
        assert!(hadamard(&[a, b]).is_err());
        assert!(hadamard::<RectMatrix>(&[]).is_err());
    }

    #[test]
    fn quad_form_examples() {
        let i2 = SymMatrix::identity(2);
        assert_eq!(quad_form(&[1.0, 0.0], &i2, &[1.0, 0.0]).unwrap(), 1.0);
        let k = SymMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        assert_eq!(quad_form(&[1.0, 1.0], &k, &[1.0, 1.0]).unwrap(), 6.0);
        assert_eq!(quad_form(&[0.0, 0.0], &k, &[3.0, -1.0]).unwrap(), 0.0);
        assert!(quad_form(&[1.0], &k, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn inv_sqrt_squares_to_pinv() {
        let k = SymMatrix::from_rows(&[&[4.0, 1.0, 0.0], &[1.0, 3.0, 0.5], &[0.0, 0.5, 2.0]]).unwrap();
        let e = FilteredEigen::new(&k, default_rel_tol(3)).unwrap();
        let r = e.inv_sqrt();
        let sq = r.as_matrix() * r.as_matrix();
        assert_abs_diff_eq!(frob(&(sq - e.pinv().as_matrix())), 0.0, epsilon = 1e-12);
        let f = e.inv_sqrt_factor();
        assert_abs_diff_eq!(frob(&(&f * f.transpose() - e.pinv().as_matrix())), 0.0, epsilon = 1e-12);
        let singular = FilteredEigen::new(&SymMatrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap(), 1e-12).unwrap();
        assert_eq!(singular.inv_sqrt_factor().shape(), (2, 1));
        let v = [1.0, -2.0, 0.5];
        let direct = e.pinv().mul_vec(&v).unwrap();
        for (a, b) in e.apply_pinv(&v).iter().zip(&direct) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }
}
