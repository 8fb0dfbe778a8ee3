//! Network data model, dataset ingestion and structural centralities.

mod centrality;
mod network;

pub use centrality::{compute_centrality, CentralityKind, CentralityVector};
pub use network::{AttrType, AttrValue, MultivariateNetwork};

/// Small attribute-free graphs for tests and examples.
pub mod test_graphs {
    use std::collections::BTreeMap;

    use super::MultivariateNetwork;

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> MultivariateNetwork {
        let ids: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
        let links = edges
            .iter()
            .map(|&(a, b)| (ids[a].clone(), ids[b].clone()))
            .collect::<Vec<_>>();
        MultivariateNetwork::new(ids, links, BTreeMap::new(), BTreeMap::new())
            .expect("valid test graph")
    }

    pub fn path(n: usize) -> MultivariateNetwork {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        from_edges(n, &edges)
    }

    /// One center (node 0) and `leaves` leaves.
    pub fn star(leaves: usize) -> MultivariateNetwork {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        from_edges(leaves + 1, &edges)
    }

    pub fn complete(n: usize) -> MultivariateNetwork {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        from_edges(n, &edges)
    }
}
