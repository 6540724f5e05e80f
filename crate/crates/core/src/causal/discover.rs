use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::sample::{ComponentSample, MultiSample};
use crate::testing::{permutation_test, TestConfig};

use super::dag::Dag;
use super::regression::{krr_residuals, DEFAULT_RIDGE};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryConfig {
    pub test: TestConfig,
    /// Kernel used both by the regressions and by the residual test.
    pub kernel: KernelSpec,
    pub ridge: f64,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        DiscoveryConfig {
            test: TestConfig::default(),
            kernel: KernelSpec::default(),
            ridge: DEFAULT_RIDGE,
        }
    }
}

impl DiscoveryConfig {
    pub fn new(test: TestConfig) -> Self {
        DiscoveryConfig {
            test,
            ..DiscoveryConfig::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DagScore {
    /// Position of the DAG in the candidate list.
    pub candidate: usize,
    pub dag: Dag,
    pub p_value: f64,
    /// HSIC² of the residuals (0 for a single node).
    pub residual_statistic: f64,
}

type ResidualCache = HashMap<(usize, Vec<usize>), Vec<f64>>;

fn node_residuals(sample: &MultiSample, node: usize, parents: &[usize], config: &DiscoveryConfig) -> Result<Vec<f64>> {
    let y = sample.component(node);
    if y.d() != 1 {
        return Err(Error::invalid(format!(
            "causal discovery needs scalar nodes, component {} has d = {}",
            node + 1,
            y.d()
        )));
    }
    let x = if parents.is_empty() {
        None
    } else {
        let parts: Vec<&ComponentSample> = parents.iter().map(|&p| sample.component(p)).collect();
        Some(ComponentSample::hstack(&parts)?)
    };
    krr_residuals(y, x.as_ref(), config.ridge, &config.kernel)
}

fn check_dag(sample: &MultiSample, dag: &Dag) -> Result<()> {
    if dag.num_nodes() != sample.num_components() {
        return Err(Error::invalid(format!(
            "DAG has {} nodes but the sample has {} components",
            dag.num_nodes(),
            sample.num_components()
        )));
    }
    Ok(())
}

fn score_with(sample: &MultiSample, dag: &Dag, residuals: &ResidualCache, config: &DiscoveryConfig) -> Result<(f64, f64)> {
    if dag.num_nodes() == 1 {
        return Ok((1.0, 0.0));
    }
    let cols: Vec<Vec<f64>> = (0..dag.num_nodes())
        .map(|v| residuals[&(v, dag.parents(v).to_vec())].clone())
        .collect();
    let res = MultiSample::from_columns(&cols)?;
    debug_assert_eq!(res.n(), sample.n());
    let out = permutation_test(&res, &[config.kernel], &config.test)?;
    Ok((out.p_value, out.statistic))
}

/// Regresses every node on its parents in `dag` and tests the residuals for
/// joint independence. A single-node graph scores `p = 1`.
pub fn score_dag(sample: &MultiSample, dag: &Dag, config: &DiscoveryConfig) -> Result<DagScore> {
    check_dag(sample, dag)?;
    let mut cache = ResidualCache::new();
    for v in 0..dag.num_nodes() {
        let key = (v, dag.parents(v).to_vec());
        let r = node_residuals(sample, v, &key.1, config)?;
        cache.insert(key, r);
    }
    let (p_value, residual_statistic) = score_with(sample, dag, &cache, config)?;
    Ok(DagScore {
        candidate: 0,
        dag: dag.clone(),
        p_value,
        residual_statistic,
    })
}

/// Scores every candidate with the same test seed and ranks them by
/// descending p-value. Ties go to fewer edges, then to the earlier candidate.
///
/// Each (node, parent set) regression runs once and is shared across
/// candidates. Candidates are scored in parallel; the ranking does not
/// depend on the thread count.
pub fn discover(sample: &MultiSample, candidates: &[Dag], config: &DiscoveryConfig) -> Result<Vec<DagScore>> {
    if candidates.is_empty() {
        return Err(Error::invalid("discovery needs at least one candidate DAG"));
    }
    for dag in candidates {
        check_dag(sample, dag)?;
    }
    let mut keys: Vec<(usize, Vec<usize>)> = candidates
        .iter()
        .flat_map(|d| (0..d.num_nodes()).map(move |v| (v, d.parents(v).to_vec())))
        .collect();
    keys.sort();
    keys.dedup();
    let cache: ResidualCache = keys
        .into_par_iter()
        .map(|(v, ps)| node_residuals(sample, v, &ps, config).map(|r| ((v, ps), r)))
        .collect::<Result<_>>()?;

    let mut scores = candidates
        .par_iter()
        .enumerate()
        .map(|(i, dag)| {
            score_with(sample, dag, &cache, config).map(|(p_value, residual_statistic)| DagScore {
                candidate: i,
                dag: dag.clone(),
                p_value,
                residual_statistic,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    scores.sort_by(|a, b| {
        b.p_value
            .total_cmp(&a.p_value)
            .then(a.dag.num_edges().cmp(&b.dag.num_edges()))
            .then(a.candidate.cmp(&b.candidate))
    });
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::{enumerate_dags, AnmModel};

    #[test]
    fn single_node_scores_one() {
        let s = MultiSample::from_columns(&[vec![0.3, 1.0, -2.0]]).unwrap();
        let ranked = discover(&s, &enumerate_dags(1).unwrap(), &DiscoveryConfig::default()).unwrap();
        assert_eq!(ranked.len(), 1);
        assert_eq!(ranked[0].p_value, 1.0);
    }

    #[test]
    fn mismatched_nodes_rejected() {
        let s = MultiSample::from_columns(&[vec![0.3, 1.0, -2.0], vec![1.0, 2.0, 0.0]]).unwrap();
        assert!(score_dag(&s, &Dag::empty(3).unwrap(), &DiscoveryConfig::default()).is_err());
        assert!(discover(&s, &[], &DiscoveryConfig::default()).is_err());
    }

    #[test]
    fn ranking_is_sorted_and_matches_individual_scores() {
        let dag = Dag::from_edges(2, &[(0, 1)]).unwrap();
        let s = AnmModel::random(dag, 4).unwrap().sample(80, 5).unwrap();
        let cfg = DiscoveryConfig::new(TestConfig::default().with_permutations(40).with_seed(9));
        let cands = enumerate_dags(2).unwrap();
        let ranked = discover(&s, &cands, &cfg).unwrap();
        assert!(ranked.windows(2).all(|w| w[0].p_value >= w[1].p_value));
        for sc in &ranked {
            let alone = score_dag(&s, &cands[sc.candidate], &cfg).unwrap();
            assert_eq!(alone.p_value, sc.p_value);
            assert_eq!(alone.residual_statistic, sc.residual_statistic);
        }
        assert_eq!(ranked, discover(&s, &cands, &cfg).unwrap());
    }
}
