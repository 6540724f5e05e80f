#![allow(dead_code)]

use mhsic::kernels::GaussianKernel;
use mhsic::linalg::{pinv_psd, SymMatrix};
use mhsic::rng::rng_from_seed;
use mhsic::sample::{ComponentSample, MultiSample};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Random sample with `m` components of dimension `d`, entries `N(0, 1)`.
pub fn random_sample(n: usize, m: usize, d: usize, seed: u64) -> MultiSample {
    let mut rng = rng_from_seed(seed);
    let comps = (0..m)
        .map(|_| {
            let v: Vec<f64> = (0..n * d).map(|_| StandardNormal.sample(&mut rng)).collect();
            ComponentSample::new(n, d, v).unwrap()
        })
        .collect();
    MultiSample::new(comps).unwrap()
}

/// Kernels with bandwidths drawn from `[0.2, 2]`.
pub fn random_kernels(m: usize, seed: u64) -> Vec<GaussianKernel> {
    let mut rng = rng_from_seed(seed ^ 0x5eed);
    (0..m).map(|_| GaussianKernel::new(rng.random_range(0.2..2.0)).unwrap()).collect()
}

pub fn k(kernel: &GaussianKernel, s: &MultiSample, m: usize, i: usize, j: usize) -> f64 {
    kernel.eval(s.component(m).row(i), s.component(m).row(j)).unwrap()
}

/// Full Gram of component `m` as a dense matrix.
pub fn dense_gram(kernel: &GaussianKernel, s: &MultiSample, m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(s.n(), s.n(), |i, j| k(kernel, s, m, i, j))
}

/// Calls `f` on every tuple in `{0..n}^len`.
pub fn for_each_tuple(n: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let mut t = vec![0; len];
    loop {
        f(&t);
        let mut pos = len;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            t[pos] += 1;
            if t[pos] < n {
                break;
            }
            t[pos] = 0;
        }
    }
}

fn all_distinct(t: &[usize]) -> bool {
    (0..t.len()).all(|a| (a + 1..t.len()).all(|b| t[a] != t[b]))
}

/// The V-statistic as literal sums over index tuples:
/// `n⁻² Σ_{i,j} Π k_m(i,j) + n^{-2M} Σ_{i₁..i_{2M}} Π k_m(i_{2m−1}, i_{2m})
///  − 2 n^{-(M+1)} Σ_{i, j₁..j_M} Π k_m(i, j_m)`.
pub fn brute_force_v(s: &MultiSample, ks: &[GaussianKernel]) -> f64 {
    let n = s.n();
    let m = s.num_components();
    let nf = n as f64;
    let mut first = 0.0;
    for_each_tuple(n, 2, |t| first += (0..m).map(|c| k(&ks[c], s, c, t[0], t[1])).product::<f64>());
    let mut second = 0.0;
    for_each_tuple(n, 2 * m, |t| {
        second += (0..m).map(|c| k(&ks[c], s, c, t[2 * c], t[2 * c + 1])).product::<f64>()
    });
    let mut third = 0.0;
    for_each_tuple(n, m + 1, |t| third += (0..m).map(|c| k(&ks[c], s, c, t[0], t[c + 1])).product::<f64>());
    first / nf.powi(2) + second / nf.powi(2 * m as i32) - 2.0 * third / nf.powi(m as i32 + 1)
}

/// The U-statistic as averages over ordered tuples of distinct indices.
pub fn brute_force_u(s: &MultiSample, ks: &[GaussianKernel]) -> f64 {
    let n = s.n();
    let m = s.num_components();
    let avg = |len: usize, core: &dyn Fn(&[usize]) -> f64| {
        let (mut sum, mut count) = (0.0, 0usize);
        for_each_tuple(n, len, |t| {
            if all_distinct(t) {
                sum += core(t);
                count += 1;
            }
        });
        sum / count as f64
    };
    let a = avg(2, &|t| (0..m).map(|c| k(&ks[c], s, c, t[0], t[1])).product());
    let b = avg(2 * m, &|t| (0..m).map(|c| k(&ks[c], s, c, t[2 * c], t[2 * c + 1])).product());
    let cc = avg(m + 1, &|t| (0..m).map(|c| k(&ks[c], s, c, t[0], t[c + 1])).product());
    a + b - 2.0 * cc
}

/// `(1/n) pinv(K_sub) K_cross 1` from the full dense joint Gram, sliced
/// after the Hadamard product.
pub fn dense_joint_weights(s: &MultiSample, ks: &[GaussianKernel], idx: &[usize]) -> Vec<f64> {
    let n = s.n();
    let mut joint = DMatrix::from_element(n, n, 1.0);
    for (c, kern) in ks.iter().enumerate() {
        joint.component_mul_assign(&dense_gram(kern, s, c));
    }
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |a, b| joint[(idx[a], idx[b])]);
    let cross = DMatrix::from_fn(idx.len(), n, |a, j| joint[(idx[a], j)]);
    let pinv = pinv_psd(&SymMatrix::new(sub).unwrap(), idx.len() as f64 * f64::EPSILON).unwrap();
    let w = pinv.as_matrix() * (cross * DVector::from_element(n, 1.0 / n as f64));
    w.iter().copied().collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn ln_choose(n: u64, k: u64) -> f64 {
    (1..=k).map(|i| ((n - k + i) as f64).ln() - (i as f64).ln()).sum()
}

fn binom_pmf(n: u64, k: u64, p: f64) -> f64 {
    (ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
}

/// Central acceptance region `[lo, hi]` for the count of a `Binomial(n, p)`
/// holding at least `level` probability, each tail at most `(1−level)/2`.
pub fn binomial_interval(n: u64, p: f64, level: f64) -> (u64, u64) {
    let tail = (1.0 - level) / 2.0;
    let mut lo = 0;
    let mut acc = 0.0;
    while acc + binom_pmf(n, lo, p) <= tail {
        acc += binom_pmf(n, lo, p);
        lo += 1;
    }
    let mut hi = n;
    let mut acc = 0.0;
    while acc + binom_pmf(n, hi, p) <= tail {
        acc += binom_pmf(n, hi, p);
        hi -= 1;
    }
    (lo, hi)
}
