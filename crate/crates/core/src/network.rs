//! Contraction of networks of labeled tensors with a greedy pairwise order.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{check_cap, contract, CTensor};

/// A tensor whose axes carry integer labels; shared labels are summed over.
#[derive(Clone, Debug)]
pub struct Node {
    pub tensor: CTensor,
    pub labels: Vec<usize>,
}

impl Node {
    pub fn new(tensor: CTensor, labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() && tensor.len() == 1 {
            return Ok(Self { tensor, labels });
        }
        if tensor.rank() != labels.len() {
            return Err(Error::Shape(format!(
                "{} labels for a rank-{} tensor",
                labels.len(),
                tensor.rank()
            )));
        }
        Ok(Self { tensor, labels })
    }

    fn dims(&self) -> HashMap<usize, usize> {
        self.labels.iter().copied().zip(self.tensor.shape().iter().copied()).collect()
    }
}

fn pair_cost(a: &Node, b: &Node) -> (bool, u128) {
    let shared = a.labels.iter().any(|l| b.labels.contains(l));
    let da = a.dims();
    let db = b.dims();
    let size = da
        .iter()
        .filter(|(l, _)| !db.contains_key(l))
        .chain(db.iter().filter(|(l, _)| !da.contains_key(l)))
        .fold(1u128, |acc, (_, &d)| acc.saturating_mul(d as u128));
    (shared, size)
}

fn contract_pair(a: Node, b: Node) -> Result<Node> {
    // Fully contracted tensors are stored with shape [1] and no labels.
    if a.labels.is_empty() {
        return Ok(Node { tensor: b.tensor.scale(a.tensor.data()[0]), labels: b.labels });
    }
    if b.labels.is_empty() {
        return Ok(Node { tensor: a.tensor.scale(b.tensor.data()[0]), labels: a.labels });
    }
    let pairs: Vec<(usize, usize)> = a
        .labels
        .iter()
        .enumerate()
        .filter_map(|(i, l)| b.labels.iter().position(|m| m == l).map(|j| (i, j)))
        .collect();
    let mut labels: Vec<usize> = a
        .labels
        .iter()
        .copied()
        .filter(|l| !b.labels.contains(l))
        .collect();
    labels.extend(b.labels.iter().copied().filter(|l| !a.labels.contains(l)));
    let tensor = contract(&a.tensor, &b.tensor, &pairs)?;
    if labels.is_empty() {
        return Ok(Node { tensor, labels });
    }
    Node::new(tensor, labels)
}

/// Contracts every shared label and returns the tensor with axes in the order of `open`.
/// Each label must appear on exactly two axes, or on one axis and in `open`.
pub fn contract_network(nodes: Vec<Node>, open: &[usize]) -> Result<CTensor> {
    let mut count: HashMap<usize, usize> = HashMap::new();
    for n in &nodes {
        for &l in &n.labels {
            *count.entry(l).or_default() += 1;
        }
    }
    for (&l, &c) in &count {
        let is_open = open.contains(&l);
        if c > 2 || (c == 2 && is_open) || (c == 1 && !is_open) {
            return Err(Error::Shape(format!("label {l} appears {c} times (open: {is_open})")));
        }
    }
    if let Some(l) = open.iter().find(|l| !count.contains_key(l)) {
        return Err(Error::Shape(format!("open label {l} not present in the network")));
    }
    let mut nodes = nodes;
    if nodes.is_empty() {
        return Err(Error::Shape("empty network".into()));
    }
    while nodes.len() > 1 {
        let mut best: Option<(bool, u128, usize, usize)> = None;
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                let (shared, size) = pair_cost(&nodes[i], &nodes[j]);
                let better = match best {
                    None => true,
                    Some((bs, bsize, _, _)) => (shared && !bs) || (shared == bs && size < bsize),
                };
                if better {
                    best = Some((shared, size, i, j));
                }
            }
        }
        let (_, size, i, j) = best.expect("at least two nodes");
        check_cap(size, "network intermediate")?;
        let b = nodes.swap_remove(j);
        let a = nodes.swap_remove(i);
        nodes.push(contract_pair(a, b)?);
    }
    let last = nodes.pop().expect("one node left");
    let perm: Vec<usize> = open
        .iter()
        .map(|l| last.labels.iter().position(|m| m == l).expect("checked above"))
        .collect();
    if perm.is_empty() {
        return Ok(last.tensor);
    }
    last.tensor.permute(&perm)
}
