use std::fmt;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::normals;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::sample::MultiSample;

/// Directed acyclic graph over nodes `0..num_nodes`.
///
/// Parent lists are kept sorted and duplicate-free, so two `Dag`s compare
/// equal exactly when they have the same edge set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "DagRepr", into = "DagRepr")]
pub struct Dag {
    num_nodes: usize,
    parents: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct DagRepr {
    num_nodes: usize,
    parents: Vec<Vec<usize>>,
}

impl TryFrom<DagRepr> for Dag {
    type Error = Error;
    fn try_from(r: DagRepr) -> Result<Dag> {
        Dag::new(r.num_nodes, r.parents)
    }
}

impl From<Dag> for DagRepr {
    fn from(d: Dag) -> DagRepr {
        DagRepr {
            num_nodes: d.num_nodes,
            parents: d.parents,
        }
    }
}

impl Dag {
    pub fn new(num_nodes: usize, mut parents: Vec<Vec<usize>>) -> Result<Dag> {
        if num_nodes == 0 {
            return Err(Error::invalid("a DAG needs at least one node"));
        }
        if parents.len() != num_nodes {
            return Err(Error::invalid(format!(
                "{} parent sets given for {num_nodes} nodes",
                parents.len()
            )));
        }
        for (i, ps) in parents.iter_mut().enumerate() {
            ps.sort_unstable();
            ps.dedup();
            if let Some(&bad) = ps.iter().find(|&&p| p == i || p >= num_nodes) {
                return Err(Error::invalid(format!("node {i} cannot have parent {bad}")));
            }
        }
        let dag = Dag { num_nodes, parents };
        if dag.topological_order().is_none() {
            return Err(Error::invalid(format!("graph {dag} has a cycle")));
        }
        Ok(dag)
    }

    pub fn empty(num_nodes: usize) -> Result<Dag> {
        Dag::new(num_nodes, vec![Vec::new(); num_nodes])
    }

    /// Builds a graph from `(parent, child)` pairs.
    pub fn from_edges(num_nodes: usize, edges: &[(usize, usize)]) -> Result<Dag> {
        let mut parents = vec![Vec::new(); num_nodes];
        for &(from, to) in edges {
            if to >= num_nodes {
                return Err(Error::invalid(format!("edge target {to} out of range")));
            }
            parents[to].push(from);
        }
        Dag::new(num_nodes, parents)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn num_edges(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// `(parent, child)` pairs ordered by child, then parent.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parents
            .iter()
            .enumerate()
            .flat_map(|(c, ps)| ps.iter().map(move |&p| (p, c)))
            .collect()
    }

    /// Kahn's algorithm, always taking the smallest ready node.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let m = self.num_nodes;
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut done = vec![false; m];
        let mut order = Vec::with_capacity(m);
        while order.len() < m {
            let next = (0..m).find(|&v| !done[v] && indegree[v] == 0)?;
            done[next] = true;
            order.push(next);
            for (c, ps) in self.parents.iter().enumerate() {
                if ps.contains(&next) {
                    indegree[c] -= 1;
                }
            }
        }
        Some(order)
    }

    /// Bit `i·(M−1) + j′` is set for each edge `i → j`, where `j′` is `j`
    /// with the diagonal skipped.
    pub fn adjacency_mask(&self) -> u64 {
        let m = self.num_nodes;
        self.edges()
            .into_iter()
            .fold(0, |acc, (i, j)| acc | 1 << edge_bit(m, i, j))
    }
}

fn edge_bit(m: usize, from: usize, to: usize) -> usize {
    from * (m - 1) + if to < from { to } else { to - 1 }
}

impl fmt::Display for Dag {
    /// One-based edge list such as `1->2, 1->3`, or `empty`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges = self.edges();
        if edges.is_empty() {
            return f.write_str("empty");
        }
        let parts: Vec<String> = edges.iter().map(|(p, c)| format!("{}->{}", p + 1, c + 1)).collect();
        f.write_str(&parts.join(", "))
    }
}

pub const MAX_ENUMERATED_NODES: usize = 4;
pub const MAX_FULL_DAG_NODES: usize = 6;

/// Every labeled DAG on `num_nodes` nodes, ordered by ascending adjacency
/// mask. There are 1, 3, 25 and 543 of them for one to four nodes.
pub fn enumerate_dags(num_nodes: usize) -> Result<Vec<Dag>> {
    if num_nodes == 0 {
        return Err(Error::invalid("a DAG needs at least one node"));
    }
    if num_nodes > MAX_ENUMERATED_NODES {
        return Err(Error::Unsupported(format!(
            "enumerating all DAGs is limited to {MAX_ENUMERATED_NODES} nodes, got {num_nodes}"
        )));
    }
    let m = num_nodes;
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u64..(1 << pairs.len()) {
        let mut parents = vec![Vec::new(); m];
        let mut two_cycle = false;
        for &(i, j) in &pairs {
            if mask >> edge_bit(m, i, j) & 1 == 1 {
                if mask >> edge_bit(m, j, i) & 1 == 1 {
                    two_cycle = true;
                    break;
                }
                parents[j].push(i);
            }
        }
        if two_cycle {
            continue;
        }
        let dag = Dag { num_nodes: m, parents };
        if dag.topological_order().is_some() {
            out.push(dag);
        }
    }
    Ok(out)
}

/// One complete DAG per ordering of the nodes (earlier nodes parent every
/// later node), in lexicographic order of the orderings.
pub fn enumerate_full_dags(num_nodes: usize) -> Result<Vec<Dag>> {
    if num_nodes == 0 {
        return Err(Error::invalid("a DAG needs at least one node"));
    }
    if num_nodes > MAX_FULL_DAG_NODES {
        return Err(Error::Unsupported(format!(
            "full DAG enumeration is limited to {MAX_FULL_DAG_NODES} nodes, got {num_nodes}"
        )));
    }
    let mut perm: Vec<usize> = (0..num_nodes).collect();
    let mut out = Vec::new();
    loop {
        let mut parents = vec![Vec::new(); num_nodes];
        for (pos, &child) in perm.iter().enumerate() {
            parents[child] = perm[..pos].to_vec();
        }
        out.push(Dag::new(num_nodes, parents)?);
        if !next_permutation(&mut perm) {
            return Ok(out);
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("a larger suffix element exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// One structural term `f(x) = a·tanh(b·x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeFunction {
    pub a: f64,
    pub b: f64,
}

impl EdgeFunction {
    pub fn eval(&self, x: f64) -> f64 {
        self.a * (self.b * x).tanh()
    }
}

/// Additive noise model `X_i = Σ_{j ∈ PA_i} f_ij(X_j) + ε_i` with
/// independent Gaussian noises.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnmModel {
    pub dag: Dag,
    /// `functions[i][k]` acts on `dag.parents(i)[k]`.
    pub functions: Vec<Vec<EdgeFunction>>,
    pub noise_variances: Vec<f64>,
}

impl AnmModel {
    /// Draws `a ~ U(−2, 2)` and `b ~ U(0.5, 2)` for each edge and a noise
    /// variance `~ U(1, √2)` for each node, all from `f_seed`.
    pub fn random(dag: Dag, f_seed: u64) -> Result<AnmModel> {
        let mut rng = rng_from_seed(f_seed);
        let mut functions = Vec::with_capacity(dag.num_nodes());
        let mut noise_variances = Vec::with_capacity(dag.num_nodes());
        for i in 0..dag.num_nodes() {
            noise_variances.push(rng.random_range(1.0..std::f64::consts::SQRT_2));
            functions.push(
                dag.parents(i)
                    .iter()
                    .map(|_| EdgeFunction {
                        a: rng.random_range(-2.0..2.0),
                        b: rng.random_range(0.5..2.0),
                    })
                    .collect(),
            );
        }
        Ok(AnmModel {
            dag,
            functions,
            noise_variances,
        })
    }

    /// `n` joint draws, one scalar component per node.
    pub fn sample(&self, n: usize, seed: u64) -> Result<MultiSample> {
        if n == 0 {
            return Err(Error::invalid("ANM sampling needs n >= 1"));
        }
        let m = self.dag.num_nodes();
        let mut rng = rng_from_seed(seed);
        let mut cols: Vec<Vec<f64>> = self
            .noise_variances
            .iter()
            .map(|v| normals(&mut rng, n).into_iter().map(|e| e * v.sqrt()).collect())
            .collect();
        let order = self.dag.topological_order().expect("Dag is acyclic");
        for node in order {
            for (k, &p) in self.dag.parents(node).iter().enumerate() {
                let f = self.functions[node][k];
                let contribution: Vec<f64> = cols[p].iter().map(|&x| f.eval(x)).collect();
                for (c, v) in cols[node].iter_mut().zip(contribution) {
                    *c += v;
                }
            }
        }
        debug_assert_eq!(cols.len(), m);
        MultiSample::from_columns(&cols)
    }
}
