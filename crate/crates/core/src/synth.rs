//! Synthetic networks with a known attribute-to-target association, used
//! for recovery experiments and examples.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{AttrType, AttrValue, MultivariateNetwork};

/// Name of the generated output attribute.
pub const TARGET: &str = "target";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlantedConfig {
    pub nodes: usize,
    /// Number of standard-normal attributes, named `a`, `b`, `c`, …
    pub attributes: usize,
    /// Expected degree of the Erdős–Rényi link structure.
    pub mean_degree: f64,
    /// Standard deviation of the noise term ε.
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        Self {
            nodes: 500,
            attributes: 10,
            mean_degree: 6.0,
            noise_sd: 1.0,
            seed: 0,
        }
    }
}

pub fn attribute_name(j: usize) -> String {
    let mut name = String::new();
    let mut k = j;
    loop {
        name.insert(0, (b'a' + (k % 26) as u8) as char);
        if k < 26 {
            break;
        }
        k = k / 26 - 1;
    }
    name
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Random network whose `target = σ(2a − 3b + ε)`; every other attribute is
/// independent noise. Requires at least two attributes.
pub fn planted_network(cfg: &PlantedConfig) -> Result<MultivariateNetwork> {
    if cfg.attributes < 2 {
        return Err(crate::Error::InvalidArgument("planted network needs at least attributes a and b".into()));
    }
    let n = cfg.nodes;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ids: Vec<String> = (0..n).map(|i| format!("v{i:04}")).collect();

    let mut columns = BTreeMap::new();
    let mut schema = BTreeMap::new();
    let mut numeric = Vec::with_capacity(cfg.attributes);
    for _ in 0..cfg.attributes {
        let values: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        numeric.push(values);
    }
    let noise = Normal::new(0.0, cfg.noise_sd).map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
    let target: Vec<f64> = (0..n)
        .map(|i| sigmoid(2.0 * numeric[0][i] - 3.0 * numeric[1][i] + noise.sample(&mut rng)))
        .collect();
    for (j, values) in numeric.into_iter().enumerate() {
        let name = attribute_name(j);
        schema.insert(name.clone(), AttrType::Numeric);
        columns.insert(name, values.into_iter().map(AttrValue::Numeric).collect());
    }
    schema.insert(TARGET.to_string(), AttrType::Numeric);
    columns.insert(TARGET.to_string(), target.into_iter().map(AttrValue::Numeric).collect());

    let p = if n > 1 { (cfg.mean_degree / (n - 1) as f64).clamp(0.0, 1.0) } else { 0.0 };
    let mut links = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if rng.random::<f64>() < p {
                links.push((ids[a].clone(), ids[b].clone()));
            }
        }
    }
    MultivariateNetwork::new(ids, links, schema, columns)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names() {
        assert_eq!(attribute_name(0), "a");
        assert_eq!(attribute_name(9), "j");
        assert_eq!(attribute_name(26), "aa");
    }

    #[test]
    fn shape_and_determinism() {
        let cfg = PlantedConfig {
            nodes: 60,
            ..PlantedConfig::default()
        };
        let a = planted_network(&cfg).unwrap();
        let b = planted_network(&cfg).unwrap();
        assert_eq!(a.node_count(), 60);
        assert_eq!(a.schema().len(), 11);
        assert_eq!(a.to_json_string(), b.to_json_string());
    }

    #[test]
    fn target_tracks_planted_combination() {
        let net = planted_network(&PlantedConfig::default()).unwrap();
        let col = |name: &str| -> Vec<f64> { net.attribute(name).unwrap().iter().map(|v| v.as_f64().unwrap()).collect() };
        let (a, b, t) = (col("a"), col("b"), col("target"));
        let z: Vec<f64> = a.iter().zip(&b).map(|(a, b)| 2.0 * a - 3.0 * b).collect();
        assert!(crate::stats::spearman(&z, &t).unwrap() > 0.9);
        assert!(crate::stats::pearson(&col("c"), &t).unwrap().abs() < 0.15);
    }
}
