//! Two-component Nyström HSIC baseline that plugs low-rank Gram
//! approximations `K^nys = K_{nn′} K_{n′n′}⁻¹ K_{n′n}` into the trace form.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::GaussianKernel;
use crate::linalg::{default_rel_tol, FilteredEigen, SymMatrix};
use crate::sample::{ComponentSample, MultiSample};

use super::{check_kernels, HsicValue};

/// Baseline statistic plus how many landmark directions were discarded by
/// the eigenvalue filter (summed over both components).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaselineHsic {
    pub value: HsicValue,
    pub dropped_directions: usize,
}

impl BaselineHsic {
    /// True when a landmark Gram was singular and the inverse square root
    /// fell back to its pseudo-inverse form.
    pub fn singular_fallback(&self) -> bool {
        self.dropped_directions > 0
    }
}

/// Nyström features `φ = K_{nn′} V Λ^{-1/2}` (`n × rank`), so that
/// `φ φᵀ = K_{nn′} K_{n′n′}⁻ K_{n′n}`.
fn features(kernel: &GaussianKernel, comp: &ComponentSample, idx: &[usize]) -> Result<(DMatrix<f64>, usize)> {
    let np = idx.len();
    let sub = SymMatrix::from_fn(np, |a, b| {
        if idx[a] == idx[b] {
            1.0
        } else {
            kernel.eval_unchecked(comp.row(idx[a]), comp.row(idx[b]))
        }
    });
    let eig = FilteredEigen::new(&sub, default_rel_tol(np))?;
    let root = eig.inv_sqrt_factor();
    let cross = DMatrix::from_fn(comp.n(), np, |j, l| {
        if j == idx[l] {
            1.0
        } else {
            kernel.eval_unchecked(comp.row(j), comp.row(idx[l]))
        }
    });
    Ok((cross * root, eig.dropped()))
}

fn check_pair(sample: &MultiSample, kernels: &[GaussianKernel], idx: &[usize]) -> Result<()> {
    if sample.num_components() != 2 {
        return Err(Error::invalid(format!(
            "the two-component Nyström baseline needs M = 2, got M = {}",
            sample.num_components()
        )));
    }
    check_kernels(sample, kernels)?;
    if idx.is_empty() || idx.len() > sample.n() || idx.iter().any(|&i| i >= sample.n()) {
        return Err(Error::invalid("landmark indices must be nonempty, at most n, and in range"));
    }
    Ok(())
}

/// `(1/n²) ‖(Hφ₁)ᵀ Hφ₂‖²_F`, costing `O(n′³ + n n′²)`.
pub fn n_hsic0(sample: &MultiSample, kernels: &[GaussianKernel], landmarks: &[usize]) -> Result<BaselineHsic> {
    check_pair(sample, kernels, landmarks)?;
    let (mut f1, d1) = features(&kernels[0], sample.component(0), landmarks)?;
    let (mut f2, d2) = features(&kernels[1], sample.component(1), landmarks)?;
    for f in [&mut f1, &mut f2] {
        for mut col in f.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
    }
    let cross = f1.transpose() * f2;
    let n = sample.n() as f64;
    Ok(BaselineHsic {
        value: HsicValue::from_squared(cross.norm_squared() / (n * n)),
        dropped_directions: d1 + d2,
    })
}

/// The `n × n` low-rank Gram `φ φᵀ` of one component.
pub fn nystrom_gram(kernel: &GaussianKernel, comp: &ComponentSample, landmarks: &[usize]) -> Result<SymMatrix> {
    if landmarks.is_empty() || landmarks.iter().any(|&i| i >= comp.n()) {
        return Err(Error::invalid("landmark indices must be nonempty and in range"));
    }
    let (f, _) = features(kernel, comp, landmarks)?;
    let g = &f * f.transpose();
    Ok(SymMatrix::from_fn(comp.n(), |i, j| 0.5 * (g[(i, j)] + g[(j, i)])))
}

/// The baseline with the two low-rank Grams expanded into the three
/// V-statistic sums: `(1/n²)1ᵀ(K₁∘K₂)1 + (1/n⁴)Π 1ᵀK_m1 − (2/n³)1ᵀ(K₁1∘K₂1)`.
/// Quadratic in `n`; used as a cross-check of [`n_hsic0`].
pub fn n_hsic0_expanded(sample: &MultiSample, kernels: &[GaussianKernel], landmarks: &[usize]) -> Result<HsicValue> {
    check_pair(sample, kernels, landmarks)?;
    let k1 = nystrom_gram(&kernels[0], sample.component(0), landmarks)?;
    let k2 = nystrom_gram(&kernels[1], sample.component(1), landmarks)?;
    let (a, b) = (k1.as_matrix(), k2.as_matrix());
    let n = sample.n();
    let nf = n as f64;
    let r1: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    let r2: Vec<f64> = (0..n).map(|i| b.row(i).sum()).collect();
    let first = a.component_mul(b).sum() / (nf * nf);
    let second = (r1.iter().sum::<f64>() / (nf * nf)) * (r2.iter().sum::<f64>() / (nf * nf));
    let third = 2.0 * r1.iter().zip(&r2).map(|(x, y)| x * y).sum::<f64>() / (nf * nf * nf);
    Ok(HsicValue::from_squared(first + second - third))
}
