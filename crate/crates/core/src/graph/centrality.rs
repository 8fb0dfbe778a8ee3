use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::MultivariateNetwork;
use crate::error::{Error, Result};

const EIGEN_TOL: f64 = 1e-13;
const EIGEN_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CentralityKind {
    Degree,
    Eigenvector,
    Betweenness,
}

impl CentralityKind {
    pub fn name(self) -> &'static str {
        match self {
            CentralityKind::Degree => "degree",
            CentralityKind::Eigenvector => "eigenvector",
            CentralityKind::Betweenness => "betweenness",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityVector {
    pub kind: CentralityKind,
    /// Aligned with the network's node order.
    pub values: Vec<f64>,
}

pub fn compute_centrality(net: &MultivariateNetwork, kind: CentralityKind) -> Result<CentralityVector> {
    if net.node_count() == 0 {
        return Err(Error::EmptyNetwork);
    }
    let values = match kind {
        CentralityKind::Degree => (0..net.node_count()).map(|v| net.degree(v) as f64).collect(),
        CentralityKind::Eigenvector => eigenvector(net)?,
        CentralityKind::Betweenness => betweenness(net),
    };
    Ok(CentralityVector { kind, values })
}

/// Power iteration on `A + I` from the all-ones vector.
///
/// The shift keeps the iteration from oscillating on bipartite graphs
/// (where `-λ` is also an eigenvalue) without changing the eigenvectors.
/// Components that do not carry the dominant eigenvalue decay towards zero.
fn eigenvector(net: &MultivariateNetwork) -> Result<Vec<f64>> {
    if net.link_count() == 0 {
        return Err(Error::DegenerateSpectrum);
    }
    let n = net.node_count();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut next = vec![0.0; n];
    for _ in 0..EIGEN_MAX_ITER {
        for (i, out) in next.iter_mut().enumerate() {
            *out = v[i] + net.neighbors(i).iter().map(|&j| v[j]).sum::<f64>();
        }
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        next.iter_mut().for_each(|x| *x /= norm);
        let delta = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        std::mem::swap(&mut v, &mut next);
        if delta < EIGEN_TOL {
            return Ok(v);
        }
    }
    Err(Error::NoConvergence(EIGEN_MAX_ITER))
}

/// Brandes' algorithm for unweighted undirected graphs. Each unordered
/// endpoint pair contributes once, so the directed accumulation is halved.
fn betweenness(net: &MultivariateNetwork) -> Vec<f64> {
    let n = net.node_count();
    let mut bc = vec![0.0; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![-1i64; n];
    let mut delta = vec![0.0; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut stack = Vec::with_capacity(n);
    let mut queue = VecDeque::with_capacity(n);

    for s in 0..n {
        stack.clear();
        for v in 0..n {
            preds[v].clear();
            sigma[v] = 0.0;
            dist[v] = -1;
            delta[v] = 0.0;
        }
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in net.neighbors(v) {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    bc.iter_mut().for_each(|x| *x /= 2.0);
    bc
}
