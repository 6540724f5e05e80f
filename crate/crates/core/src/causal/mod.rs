//! Causal discovery under an additive noise model: a candidate DAG is kept
//! when the residuals of regressing every node on its parents are jointly
//! independent. Regression is Gaussian kernel ridge regression.

mod dag;
mod discover;
mod regression;

pub use dag::{
    enumerate_dags, enumerate_full_dags, AnmModel, Dag, EdgeFunction, MAX_ENUMERATED_NODES, MAX_FULL_DAG_NODES,
};
pub use discover::{discover, score_dag, DagScore, DiscoveryConfig};
pub use regression::{krr_residuals, DEFAULT_RIDGE};
