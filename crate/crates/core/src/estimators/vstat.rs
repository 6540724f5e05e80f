use crate::error::{Error, Result};
use crate::kernels::{gram_sym, GaussianKernel};
use crate::linalg::SymMatrix;
use crate::sample::MultiSample;

use super::{check_kernels, HsicValue};

/// Row sums of the component Grams and of their Hadamard product, excluding
/// the diagonal. Gaussian Grams have a unit diagonal, which callers add back.
///
/// Filled from the upper triangle in one pass, holding `O(Mn)` memory, so the
/// full `n × n` matrices are never stored.
pub(crate) struct OffDiagonalSums {
    pub n: usize,
    /// `[m][i] = Σ_{j≠i} K_m[i, j]`
    pub rows: Vec<Vec<f64>>,
    /// `[i] = Σ_{j≠i} Π_m K_m[i, j]`
    pub joint_rows: Vec<f64>,
}

impl OffDiagonalSums {
    pub fn compute(sample: &MultiSample, kernels: &[GaussianKernel]) -> Self {
        let n = sample.n();
        let m = sample.num_components();
        let mut rows = vec![vec![0.0; n]; m];
        let mut joint_rows = vec![0.0; n];
        let comps = sample.components();
        let mut vals = vec![0.0; n];
        let mut prod = vec![0.0; n];
        for i in 0..n {
            let len = n - i - 1;
            if len == 0 {
                break;
            }
            let prod = &mut prod[..len];
            prod.fill(1.0);
            for (c, (comp, k)) in comps.iter().zip(kernels).enumerate() {
                let vals = &mut vals[..len];
                k.eval_against(comp.row(i), comp, i + 1, vals);
                let row = &mut rows[c];
                row[i] += vals.iter().sum::<f64>();
                for ((r, &v), p) in row[i + 1..].iter_mut().zip(vals.iter()).zip(prod.iter_mut()) {
                    *r += v;
                    *p *= v;
                }
            }
            joint_rows[i] += prod.iter().sum::<f64>();
            for (r, &p) in joint_rows[i + 1..].iter_mut().zip(prod.iter()) {
                *r += p;
            }
        }
        OffDiagonalSums { n, rows, joint_rows }
    }
}

/// V-statistic HSIC² for `M >= 2` components, evaluated in `O(M n²)` time
/// and `O(M n)` memory:
///
/// `(1/n²) 1ᵀ(∘K_m)1 + Π_m (1ᵀK_m1 / n²) − (2/n) Σ_i Π_m ((K_m1)_i / n)`.
pub fn v_hsic(sample: &MultiSample, kernels: &[GaussianKernel]) -> Result<HsicValue> {
    sample.require_multi()?;
    check_kernels(sample, kernels)?;
    let sums = OffDiagonalSums::compute(sample, kernels);
    Ok(HsicValue::from_squared(v_hsic_from_sums(&sums)))
}

pub(crate) fn v_hsic_from_sums(s: &OffDiagonalSums) -> f64 {
    let n = s.n as f64;
    let joint_total: f64 = s.joint_rows.iter().map(|r| r + 1.0).sum();
    let first = joint_total / (n * n);
    let second: f64 = s
        .rows
        .iter()
        .map(|r| r.iter().map(|v| v + 1.0).sum::<f64>() / (n * n))
        .product();
    let third: f64 = (0..s.n)
        .map(|i| s.rows.iter().map(|r| (r[i] + 1.0) / n).product::<f64>())
        .sum::<f64>()
        * 2.0
        / n;
    first + second - third
}

/// `trace(H A H B)` through the element-wise identity `trace(XᵀY) = Σ X_ij Y_ij`.
pub fn centered_trace(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    let n = a.order();
    if b.order() != n {
        return Err(Error::invalid("centered_trace: matrices differ in order"));
    }
    let am = a.as_matrix();
    let bm = b.as_matrix();
    let nf = n as f64;
    let rows: Vec<f64> = (0..n).map(|i| am.row(i).sum() / nf).collect();
    let total: f64 = rows.iter().sum::<f64>() / nf;
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            let centered = am[(i, j)] - rows[i] - rows[j] + total;
            acc += centered * bm[(i, j)];
        }
    }
    Ok(acc)
}

/// Two-component HSIC² as `(1/n²) trace(H K₁ H K₂)`.
pub fn v_hsic_trace2(sample: &MultiSample, kernels: &[GaussianKernel]) -> Result<HsicValue> {
    if sample.num_components() != 2 {
        return Err(Error::invalid(format!(
            "trace form needs exactly 2 components, got {}",
            sample.num_components()
        )));
    }
    check_kernels(sample, kernels)?;
    let k1 = gram_sym(&kernels[0], sample.component(0));
    let k2 = gram_sym(&kernels[1], sample.component(1));
    let n = sample.n() as f64;
    Ok(HsicValue::from_squared(centered_trace(&k1, &k2)? / (n * n)))
}
