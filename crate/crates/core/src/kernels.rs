//! Gaussian kernels, median-heuristic bandwidths and Gram matrices.

use rand::seq::index::sample as sample_indices;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{RectMatrix, SymMatrix};
use crate::rng::rng_from_seed;
use crate::sample::{ComponentSample, MultiSample};

/// Above this many points the median heuristic runs on a seeded subsample.
pub const MEDIAN_MAX_POINTS: usize = 5000;
const MEDIAN_SUBSAMPLE_SEED: u64 = 0x6d65_6469_616e;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// `γ` in `exp(-γ ‖x - y‖²)`.
    Fixed(f64),
    MedianHeuristic,
}

/// Kernel family plus bandwidth policy for one component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSpec {
    Gaussian(Bandwidth),
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::Gaussian(Bandwidth::MedianHeuristic)
    }
}

impl KernelSpec {
    pub fn gaussian_fixed(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid(format!("gamma must be positive and finite, got {gamma}")));
        }
        Ok(KernelSpec::Gaussian(Bandwidth::Fixed(gamma)))
    }

    /// Fixes the bandwidth, running the median heuristic on `sample` if asked.
    pub fn resolve(&self, sample: &ComponentSample) -> Result<GaussianKernel> {
        match *self {
            KernelSpec::Gaussian(Bandwidth::Fixed(gamma)) => GaussianKernel::new(gamma),
            KernelSpec::Gaussian(Bandwidth::MedianHeuristic) => {
                GaussianKernel::new(median_heuristic(sample)?)
            }
        }
    }
}

/// Resolves one spec per component. A single spec is broadcast to all.
pub fn resolve_all(specs: &[KernelSpec], sample: &MultiSample) -> Result<Vec<GaussianKernel>> {
    let m = sample.num_components();
    match specs.len() {
        1 => sample.components().iter().map(|c| specs[0].resolve(c)).collect(),
        k if k == m => specs
            .iter()
            .zip(sample.components())
            .map(|(s, c)| s.resolve(c))
            .collect(),
        k => Err(Error::invalid(format!("{k} kernel specs for {m} components"))),
    }
}

/// `k(x, y) = exp(-γ ‖x - y‖²)` with a resolved `γ > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianKernel {
    pub gamma: f64,
}

#[inline]
pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

impl GaussianKernel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid(format!("gamma must be positive and finite, got {gamma}")));
        }
        Ok(GaussianKernel { gamma })
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        (-self.gamma * sq_dist(x, y)).exp()
    }

    /// `out[t] = k(x, comp.row(start + t))` for `t < out.len()`.
    pub(crate) fn eval_against(&self, x: &[f64], comp: &ComponentSample, start: usize, out: &mut [f64]) {
        let g = self.gamma;
        if comp.d() == 1 {
            let x0 = x[0];
            let ys = &comp.values()[start..start + out.len()];
            for (o, &y) in out.iter_mut().zip(ys) {
                let diff = x0 - y;
                *o = (-g * diff * diff).exp();
            }
        } else {
            for (t, o) in out.iter_mut().enumerate() {
                *o = (-g * sq_dist(x, comp.row(start + t))).exp();
            }
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::invalid(format!(
                "kernel arguments differ in dimension ({} vs {})",
                x.len(),
                y.len()
            )));
        }
        Ok(self.eval_unchecked(x, y))
    }
}

pub fn kernel_eval(kernel: &GaussianKernel, x: &[f64], y: &[f64]) -> Result<f64> {
    kernel.eval(x, y)
}

/// Median of the squared distances over all pairs `i < j`.
fn median_sq_distance(sample: &ComponentSample) -> f64 {
    let n = sample.n();
    let mut d = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            d.push(sq_dist(sample.row(i), sample.row(j)));
        }
    }
    let len = d.len();
    let mid = len / 2;
    let (_, upper, _) = d.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    let upper = *upper;
    if len % 2 == 1 {
        upper
    } else {
        let lower = d[..mid].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// `γ = 1 / (2 σ²)` with `σ²` the median squared pairwise distance.
///
/// Samples larger than [`MEDIAN_MAX_POINTS`] are thinned to that many points
/// with a fixed-seed uniform draw first.
pub fn median_heuristic(sample: &ComponentSample) -> Result<f64> {
    if sample.n() < 2 {
        return Err(Error::invalid("median heuristic needs at least 2 points"));
    }
    let sigma2 = if sample.n() > MEDIAN_MAX_POINTS {
        let mut rng = rng_from_seed(MEDIAN_SUBSAMPLE_SEED);
        let mut idx = sample_indices(&mut rng, sample.n(), MEDIAN_MAX_POINTS).into_vec();
        idx.sort_unstable();
        median_sq_distance(&sample.select_rows(&idx))
    } else {
        median_sq_distance(sample)
    };
    if sigma2 <= 0.0 {
        return Err(Error::DegenerateSample(
            "median pairwise distance is zero; cannot pick a bandwidth".into(),
        ));
    }
    Ok(1.0 / (2.0 * sigma2))
}

fn check_dims(rows: &ComponentSample, cols: &ComponentSample) -> Result<()> {
    if rows.d() != cols.d() {
        return Err(Error::invalid(format!(
            "gram: dimension mismatch ({} vs {})",
            rows.d(),
            cols.d()
        )));
    }
    Ok(())
}

/// `[k(rows_i, cols_j)]`.
pub fn gram(kernel: &GaussianKernel, rows: &ComponentSample, cols: &ComponentSample) -> Result<RectMatrix> {
    check_dims(rows, cols)?;
    Ok(RectMatrix::from_fn(rows.n(), cols.n(), |i, j| {
        kernel.eval_unchecked(rows.row(i), cols.row(j))
    }))
}

/// Square Gram of a sample with itself; symmetric with unit diagonal.
pub fn gram_sym(kernel: &GaussianKernel, sample: &ComponentSample) -> SymMatrix {
    SymMatrix::from_fn(sample.n(), |i, j| {
        if i == j {
            1.0
        } else {
            kernel.eval_unchecked(sample.row(i), sample.row(j))
        }
    })
}
