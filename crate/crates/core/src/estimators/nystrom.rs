//! Nyström mean embeddings and the Nyström M-HSIC estimator.
//!
//! The joint embedding and each of the `M` marginal embeddings are replaced
//! by weighted combinations of `n′` landmark points, drawn uniformly with
//! replacement from the joint sample. The same landmark rows serve every
//! marginal. Weights are the minimum-norm least-squares fit of the empirical
//! embedding, `α = (1/n) K_{n′n′}⁻ K_{n′n} 1`.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::GaussianKernel;
use crate::linalg::{default_rel_tol, hadamard, quad_form, FilteredEigen, RectMatrix, SymMatrix};
use crate::rng::rng_from_seed;
use crate::sample::MultiSample;

use super::{check_kernels, HsicValue};

/// `α = (1/n) K_sub⁻ K_cross 1` for an `n′ × n′` landmark Gram and the
/// `n′ × n` landmark-to-sample Gram.
pub fn nystrom_weights(k_sub: &SymMatrix, k_cross: &RectMatrix) -> Result<Vec<f64>> {
    if k_cross.rows() != k_sub.order() {
        return Err(Error::invalid(format!(
            "nystrom_weights: K_sub is {0}x{0} but K_cross has {1} rows",
            k_sub.order(),
            k_cross.rows()
        )));
    }
    weights_from_row_sums(k_sub, &k_cross.row_sums(), k_cross.cols())
}

fn weights_from_row_sums(k_sub: &SymMatrix, row_sums: &[f64], n: usize) -> Result<Vec<f64>> {
    let eig = FilteredEigen::new(k_sub, default_rel_tol(k_sub.order()))?;
    let inv_n = 1.0 / n as f64;
    Ok(eig.apply_pinv(row_sums).into_iter().map(|a| a * inv_n).collect())
}

/// Landmark rows together with the joint and marginal weight vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NystromPlan {
    n: usize,
    indices: Vec<usize>,
    alpha_joint: Vec<f64>,
    alpha_marginals: Vec<Vec<f64>>,
}

impl NystromPlan {
    /// `α = (1/n) 1` for every embedding, with the whole sample as landmarks.
    /// With this plan the Nyström estimator reproduces the V-statistic.
    pub fn uniform(n: usize, num_components: usize) -> Self {
        let w = vec![1.0 / n as f64; n];
        NystromPlan {
            n,
            indices: (0..n).collect(),
            alpha_joint: w.clone(),
            alpha_marginals: vec![w; num_components],
        }
    }

    /// Assembles a plan from explicit parts; weights must be finite and sized
    /// like `indices`.
    pub fn from_parts(
        n: usize,
        indices: Vec<usize>,
        alpha_joint: Vec<f64>,
        alpha_marginals: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let np = indices.len();
        if np == 0 || np > n || indices.iter().any(|&i| i >= n) {
            return Err(Error::invalid("plan indices must be nonempty, at most n, and in range"));
        }
        let sized = alpha_joint.len() == np && alpha_marginals.iter().all(|a| a.len() == np);
        let finite = alpha_joint
            .iter()
            .chain(alpha_marginals.iter().flatten())
            .all(|v| v.is_finite());
        if !sized || !finite {
            return Err(Error::invalid("plan weights must be finite with one entry per landmark"));
        }
        Ok(NystromPlan {
            n,
            indices,
            alpha_joint,
            alpha_marginals,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_prime(&self) -> usize {
        self.indices.len()
    }

    pub fn num_components(&self) -> usize {
        self.alpha_marginals.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn alpha_joint(&self) -> &[f64] {
        &self.alpha_joint
    }

    pub fn alpha_marginals(&self) -> &[Vec<f64>] {
        &self.alpha_marginals
    }
}

/// `n′` row indices drawn uniformly with replacement.
pub fn draw_landmarks(n: usize, n_prime: usize, seed: u64) -> Result<Vec<usize>> {
    if n_prime == 0 || n_prime > n {
        return Err(Error::invalid(format!(
            "number of Nyström points must satisfy 1 <= n' <= n (n' = {n_prime}, n = {n})"
        )));
    }
    let mut rng = rng_from_seed(seed);
    Ok((0..n_prime).map(|_| rng.random_range(0..n)).collect())
}

/// Draws `n_prime` landmarks with the seeded RNG and solves for all weights.
pub fn build_plan(
    sample: &MultiSample,
    kernels: &[GaussianKernel],
    n_prime: usize,
    seed: u64,
) -> Result<NystromPlan> {
    let indices = draw_landmarks(sample.n(), n_prime, seed)?;
    build_plan_with_indices(sample, kernels, indices)
}

/// Landmark Grams `K_{m,n′n′}` for every component.
pub(crate) fn landmark_grams(sample: &MultiSample, kernels: &[GaussianKernel], idx: &[usize]) -> Vec<SymMatrix> {
    sample
        .components()
        .iter()
        .zip(kernels)
        .map(|(comp, k)| {
            SymMatrix::from_fn(idx.len(), |a, b| {
                if idx[a] == idx[b] {
                    1.0
                } else {
                    k.eval_unchecked(comp.row(idx[a]), comp.row(idx[b]))
                }
            })
        })
        .collect()
}

/// Solves for the weights given landmark row indices (which may repeat).
///
/// Cost is `O(M n′ n)` kernel evaluations for the cross sums plus `M + 1`
/// eigendecompositions of `n′ × n′` matrices. The `n′ × n` cross Grams are
/// reduced to their row sums on the fly and never stored.
pub fn build_plan_with_indices(
    sample: &MultiSample,
    kernels: &[GaussianKernel],
    indices: Vec<usize>,
) -> Result<NystromPlan> {
    sample.require_multi()?;
    check_kernels(sample, kernels)?;
    let n = sample.n();
    let np = indices.len();
    if np == 0 || np > n {
        return Err(Error::invalid(format!(
            "number of Nyström points must satisfy 1 <= n' <= n (n' = {np}, n = {n})"
        )));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
        return Err(Error::invalid(format!("landmark index {bad} out of range for n = {n}")));
    }
    let m = sample.num_components();
    let comps = sample.components();

    let mut marginal_sums = vec![vec![0.0; np]; m];
    let mut joint_sums = vec![0.0; np];
    let mut vals = vec![0.0; n];
    let mut prod = vec![0.0; n];
    for (l, &li) in indices.iter().enumerate() {
        prod.fill(1.0);
        for (c, (comp, k)) in comps.iter().zip(kernels).enumerate() {
            k.eval_against(comp.row(li), comp, 0, &mut vals);
            marginal_sums[c][l] = vals.iter().sum();
            prod.iter_mut().zip(&vals).for_each(|(p, v)| *p *= v);
        }
        joint_sums[l] = prod.iter().sum();
    }

    let subs = landmark_grams(sample, kernels, &indices);
    let joint_sub = hadamard(&subs)?;
    let alpha_joint = weights_from_row_sums(&joint_sub, &joint_sums, n)?;
    let alpha_marginals = subs
        .iter()
        .zip(&marginal_sums)
        .map(|(s, b)| weights_from_row_sums(s, b, n))
        .collect::<Result<Vec<_>>>()?;

    Ok(NystromPlan {
        n,
        indices,
        alpha_joint,
        alpha_marginals,
    })
}

/// The three inner products making up the Nyström HSIC²:
/// `A = ‖μ̃_k‖²`, `B = ‖⊗μ̃_{k_m}‖²`, `C = ⟨μ̃_k, ⊗μ̃_{k_m}⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NystromTerms {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl NystromTerms {
    pub fn squared(&self) -> f64 {
        self.a + self.b - 2.0 * self.c
    }
}

/// `A`, `B`, `C` for a plan; `O(M n′²)` once the plan exists.
pub fn n_mhsic_terms(sample: &MultiSample, kernels: &[GaussianKernel], plan: &NystromPlan) -> Result<NystromTerms> {
    sample.require_multi()?;
    check_kernels(sample, kernels)?;
    if plan.n != sample.n() || plan.num_components() != sample.num_components() {
        return Err(Error::invalid(format!(
            "plan was built for n = {}, M = {} but the sample has n = {}, M = {}",
            plan.n,
            plan.num_components(),
            sample.n(),
            sample.num_components()
        )));
    }
    let subs = landmark_grams(sample, kernels, &plan.indices);
    let joint = hadamard(&subs)?;

    let a = quad_form(&plan.alpha_joint, &joint, &plan.alpha_joint)?;
    let mut b = 1.0;
    let mut u = vec![1.0; plan.n_prime()];
    for (sub, alpha) in subs.iter().zip(&plan.alpha_marginals) {
        let k_alpha = sub.mul_vec(alpha)?;
        b *= alpha.iter().zip(&k_alpha).map(|(x, y)| x * y).sum::<f64>();
        u.iter_mut().zip(&k_alpha).for_each(|(acc, v)| *acc *= v);
    }
    let c = plan.alpha_joint.iter().zip(&u).map(|(x, y)| x * y).sum();
    Ok(NystromTerms { a, b, c })
}

/// Nyström M-HSIC: `A + B − 2C` from [`n_mhsic_terms`].
pub fn n_mhsic(sample: &MultiSample, kernels: &[GaussianKernel], plan: &NystromPlan) -> Result<HsicValue> {
    Ok(HsicValue::from_squared(n_mhsic_terms(sample, kernels, plan)?.squared()))
}
