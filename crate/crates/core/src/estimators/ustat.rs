use crate::error::{Error, Result};
use crate::kernels::{gram_sym, GaussianKernel};
use crate::linalg::SymMatrix;
use crate::sample::MultiSample;

use super::check_kernels;
use super::vstat::OffDiagonalSums;

/// Largest number of ordered index tuples the `M > 2` enumeration will visit.
pub const MAX_ENUMERATED_TUPLES: f64 = 2e7;

/// Unbiased (U-statistic) estimate of HSIC², `A' + B' − 2C'`, where each
/// term averages its kernel product over ordered tuples of distinct indices
/// (2 for `A'`, `M + 1` for `C'`, `2M` for `B'`). Needs `n >= 2M`; the value
/// can be negative.
///
/// For `M = 2` this is the closed-form `O(n²)` expression with zero-diagonal
/// Grams `K̃, L̃`:
/// `[tr(K̃L̃) + 1ᵀK̃1·1ᵀL̃1/((n−1)(n−2)) − 2/(n−2)·1ᵀK̃L̃1] / (n(n−3))`.
/// For `M > 2` the terms are summed by exact enumeration, which is only
/// feasible for very small `n` (bounded by [`MAX_ENUMERATED_TUPLES`]).
pub fn u_hsic(sample: &MultiSample, kernels: &[GaussianKernel]) -> Result<f64> {
    sample.require_multi()?;
    check_kernels(sample, kernels)?;
    let n = sample.n();
    let m = sample.num_components();
    if n < 2 * m {
        return Err(Error::invalid(format!(
            "U-statistic needs n >= 2M = {}, got n = {n}",
            2 * m
        )));
    }
    if m == 2 {
        Ok(u_hsic_two(sample, kernels))
    } else {
        u_hsic_enumerated(sample, kernels)
    }
}

fn u_hsic_two(sample: &MultiSample, kernels: &[GaussianKernel]) -> f64 {
    let s = OffDiagonalSums::compute(sample, kernels);
    let nf = s.n as f64;
    let trace: f64 = s.joint_rows.iter().sum();
    let (r1, r2) = (&s.rows[0], &s.rows[1]);
    let s1: f64 = r1.iter().sum();
    let s2: f64 = r2.iter().sum();
    let cross: f64 = r1.iter().zip(r2).map(|(a, b)| a * b).sum();
    (trace + s1 * s2 / ((nf - 1.0) * (nf - 2.0)) - 2.0 * cross / (nf - 2.0)) / (nf * (nf - 3.0))
}

fn falling(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

struct Enumerator<'a> {
    grams: &'a [SymMatrix],
    used: Vec<bool>,
}

impl Enumerator<'_> {
    fn n(&self) -> usize {
        self.used.len()
    }

    /// Σ over distinct `(i_m, j_m)` for `m >= c` (all distinct from `used`)
    /// of `Π_m K_m[i_m, j_m]`.
    fn pairs(&mut self, c: usize) -> f64 {
        if c == self.grams.len() {
            return 1.0;
        }
        let n = self.n();
        let mut total = 0.0;
        for i in 0..n {
            if self.used[i] {
                continue;
            }
            self.used[i] = true;
            for j in 0..n {
                if self.used[j] {
                    continue;
                }
                self.used[j] = true;
                let k = self.grams[c].get(i, j);
                if k != 0.0 {
                    total += k * self.pairs(c + 1);
                }
                self.used[j] = false;
            }
            self.used[i] = false;
        }
        total
    }

    /// Σ over distinct `j_m` (`m >= c`, distinct from `used`) of `Π_m K_m[i, j_m]`.
    fn star(&mut self, i: usize, c: usize) -> f64 {
        if c == self.grams.len() {
            return 1.0;
        }
        let n = self.n();
        let mut total = 0.0;
        for j in 0..n {
            if self.used[j] {
                continue;
            }
            self.used[j] = true;
            let k = self.grams[c].get(i, j);
            if k != 0.0 {
                total += k * self.star(i, c + 1);
            }
            self.used[j] = false;
        }
        total
    }
}

fn u_hsic_enumerated(sample: &MultiSample, kernels: &[GaussianKernel]) -> Result<f64> {
    let n = sample.n();
    let m = sample.num_components();
    if falling(n, 2 * m) > MAX_ENUMERATED_TUPLES {
        return Err(Error::Unsupported(format!(
            "U-statistic with M = {m} > 2 is computed by enumeration; n = {n} is too large"
        )));
    }
    let grams: Vec<SymMatrix> = sample
        .components()
        .iter()
        .zip(kernels)
        .map(|(c, k)| gram_sym(k, c))
        .collect();

    let mut a = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                a += grams.iter().map(|g| g.get(i, j)).product::<f64>();
            }
        }
    }
    let a = a / falling(n, 2);

    let mut e = Enumerator {
        grams: &grams,
        used: vec![false; n],
    };
    let mut c = 0.0;
    for i in 0..n {
        e.used[i] = true;
        c += e.star(i, 0);
        e.used[i] = false;
    }
    let c = c / falling(n, m + 1);
    let b = e.pairs(0) / falling(n, 2 * m);
    Ok(a + b - 2.0 * c)
}
