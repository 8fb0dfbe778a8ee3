//! Input attribute construction: base attributes and centralities, neighbor
//! aggregation (relational functions), and redundancy pruning.
//!
//! Relational functions follow the DeepGL recipe restricted to the
//! total-neighbor set of an undirected graph. A two-hop feature is the
//! composition of two one-hop functions, e.g. `max_1hop(mean_1hop(degree))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{compute_centrality, AttrType, AttrValue, CentralityKind, MultivariateNetwork};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregator {
    Mean,
    Sum,
    Max,
    Min,
    Variance,
}

impl Aggregator {
    pub const ALL: [Aggregator; 5] = [
        Aggregator::Mean,
        Aggregator::Sum,
        Aggregator::Max,
        Aggregator::Min,
        Aggregator::Variance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Aggregator::Mean => "mean",
            Aggregator::Sum => "sum",
            Aggregator::Max => "max",
            Aggregator::Min => "min",
            Aggregator::Variance => "variance",
        }
    }

    /// Aggregates a non-empty neighbor sample.
    fn apply(self, values: impl Iterator<Item = f64> + Clone) -> f64 {
        match self {
            Aggregator::Mean => {
                let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
                s / n as f64
            }
            Aggregator::Sum => values.sum(),
            Aggregator::Max => values.fold(f64::NEG_INFINITY, f64::max),
            Aggregator::Min => values.fold(f64::INFINITY, f64::min),
            Aggregator::Variance => {
                let v: Vec<f64> = values.collect();
                stats::variance(&v)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    BaseAttribute { attribute: String },
    Centrality { centrality: CentralityKind },
    /// `input` is the name of the column the aggregator was applied to.
    Relational {
        aggregator: Aggregator,
        hops: u8,
        input: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureColumn {
    pub name: String,
    pub provenance: Provenance,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub node_ids: Vec<String>,
    pub columns: Vec<FeatureColumn>,
    pub normalized: bool,
}

impl FeatureMatrix {
    pub fn new(node_ids: Vec<String>, columns: Vec<FeatureColumn>) -> Result<Self> {
        let mut names = std::collections::HashSet::new();
        for c in &columns {
            if c.values.len() != node_ids.len() {
                return Err(Error::DimensionMismatch {
                    expected: node_ids.len(),
                    actual: c.values.len(),
                    context: "feature column length",
                });
            }
            if !names.insert(c.name.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate feature name {:?}", c.name)));
            }
        }
        Ok(Self {
            node_ids,
            columns,
            normalized: false,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.node_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn column(&self, name: &str) -> Option<&FeatureColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c.values[i]).collect()
    }

    /// Row-major copy of the given rows.
    pub fn rows(&self, indices: &[usize]) -> Vec<Vec<f64>> {
        indices.iter().map(|&i| self.row(i)).collect()
    }
}

/// Value at node `v` is `aggregator` over the base values of `v`'s
/// neighbors; isolated nodes get 0.
pub fn apply_relational_function(
    net: &MultivariateNetwork,
    base: &FeatureColumn,
    aggregator: Aggregator,
) -> Result<FeatureColumn> {
    if base.values.len() != net.node_count() {
        return Err(Error::DimensionMismatch {
            expected: net.node_count(),
            actual: base.values.len(),
            context: "relational function base column",
        });
    }
    let values = (0..net.node_count())
        .map(|v| {
            let nbrs = net.neighbors(v);
            if nbrs.is_empty() {
                0.0
            } else {
                aggregator.apply(nbrs.iter().map(|&u| base.values[u]))
            }
        })
        .collect();
    let hops = match &base.provenance {
        Provenance::Relational { hops, .. } => hops + 1,
        _ => 1,
    };
    Ok(FeatureColumn {
        name: format!("{}_1hop({})", aggregator.name(), base.name),
        provenance: Provenance::Relational {
            aggregator,
            hops,
            input: base.name.clone(),
        },
        values,
    })
}

/// Appends every aggregator applied to every column of the previous hop
/// level. With `B` bases and `A` aggregators the output has
/// `B + A·B` columns for one hop and `B + A·B + A²·B` for two.
pub fn expand_features(
    net: &MultivariateNetwork,
    bases: &FeatureMatrix,
    aggregators: &[Aggregator],
    hops: u8,
) -> Result<FeatureMatrix> {
    if !(1..=2).contains(&hops) {
        return Err(Error::InvalidArgument(format!("hops must be 1 or 2, got {hops}")));
    }
    let mut columns = bases.columns.clone();
    let mut frontier: Vec<FeatureColumn> = bases.columns.clone();
    for _ in 0..hops {
        let mut next = Vec::with_capacity(frontier.len() * aggregators.len());
        for col in &frontier {
            for &agg in aggregators {
                next.push(apply_relational_function(net, col, agg)?);
            }
        }
        columns.extend(next.iter().cloned());
        frontier = next;
    }
    FeatureMatrix::new(bases.node_ids.clone(), columns)
}

/// Redundancy pruning in column order. Constant columns are always dropped;
/// a column is dropped when its absolute Pearson correlation with any
/// earlier non-constant column (retained or not) reaches
/// `similarity_threshold`. Judging against every earlier column makes the
/// retained set shrink monotonically as the threshold decreases.
pub fn prune_features(fm: &FeatureMatrix, similarity_threshold: f64) -> Result<FeatureMatrix> {
    if !(similarity_threshold > 0.0 && similarity_threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "similarity threshold must lie in (0, 1], got {similarity_threshold}"
        )));
    }
    let mut earlier: Vec<&FeatureColumn> = Vec::new();
    let mut kept: Vec<&FeatureColumn> = Vec::new();
    for col in &fm.columns {
        if is_constant(&col.values) {
            continue;
        }
        let redundant = earlier.iter().any(|k| {
            stats::pearson(&k.values, &col.values)
                .map(|r| r.abs() >= similarity_threshold)
                .unwrap_or(false)
        });
        earlier.push(col);
        if !redundant {
            kept.push(col);
        }
    }
    Ok(FeatureMatrix {
        node_ids: fm.node_ids.clone(),
        columns: kept.into_iter().cloned().collect(),
        normalized: fm.normalized,
    })
}

fn is_constant(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] == w[1])
}

/// What goes into the input attribute set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureConfig {
    /// Dataset attributes used as base features. Categorical attributes are
    /// one-hot encoded.
    pub attributes: Vec<String>,
    #[serde(default)]
    pub centralities: Vec<CentralityKind>,
    /// Relational functions; empty disables neighbor expansion.
    #[serde(default)]
    pub aggregators: Vec<Aggregator>,
    #[serde(default = "default_hops")]
    pub hops: u8,
    #[serde(default = "default_prune_threshold")]
    pub prune_threshold: f64,
}

fn default_hops() -> u8 {
    1
}

fn default_prune_threshold() -> f64 {
    0.95
}

/// Base columns: the requested attributes (missing values imputed by the
/// attribute mean; categorical attributes one-hot encoded as `attr=label`)
/// followed by the requested centralities.
pub fn base_features(
    net: &MultivariateNetwork,
    attributes: &[String],
    centralities: &[CentralityKind],
) -> Result<FeatureMatrix> {
    let mut columns = Vec::new();
    for name in attributes {
        let ty = *net
            .schema()
            .get(name)
            .ok_or_else(|| Error::UnknownAttribute(name.clone()))?;
        let raw = net.attribute(name).expect("schema attribute has a column");
        match ty {
            AttrType::Numeric => columns.push(FeatureColumn {
                name: name.clone(),
                provenance: Provenance::BaseAttribute {
                    attribute: name.clone(),
                },
                values: impute_mean(raw.iter().map(AttrValue::as_f64)),
            }),
            AttrType::Categorical => {
                let mut labels: Vec<&str> = raw.iter().filter_map(AttrValue::as_label).collect();
                labels.sort_unstable();
                labels.dedup();
                for label in labels {
                    let values = impute_mean(raw.iter().map(|v| match v {
                        AttrValue::Missing => None,
                        other => Some(if other.as_label() == Some(label) { 1.0 } else { 0.0 }),
                    }));
                    columns.push(FeatureColumn {
                        name: format!("{name}={label}"),
                        provenance: Provenance::BaseAttribute {
                            attribute: name.clone(),
                        },
                        values,
                    });
                }
            }
        }
    }
    for &kind in centralities {
        columns.push(FeatureColumn {
            name: kind.name().to_string(),
            provenance: Provenance::Centrality { centrality: kind },
            values: compute_centrality(net, kind)?.values,
        });
    }
    FeatureMatrix::new(net.node_ids().to_vec(), columns)
}

fn impute_mean(values: impl Iterator<Item = Option<f64>> + Clone) -> Vec<f64> {
    let present: Vec<f64> = values.clone().flatten().collect();
    let fill = stats::mean(&present);
    values.map(|v| v.unwrap_or(fill)).collect()
}

/// Full extraction: base columns, relational expansion, pruning.
pub fn extract_features(net: &MultivariateNetwork, cfg: &FeatureConfig) -> Result<FeatureMatrix> {
    let bases = base_features(net, &cfg.attributes, &cfg.centralities)?;
    let expanded = if cfg.aggregators.is_empty() {
        bases
    } else {
        expand_features(net, &bases, &cfg.aggregators, cfg.hops)?
    };
    if expanded.n_cols() == 0 {
        return Err(Error::InvalidArgument("feature configuration yields no columns".into()));
    }
    prune_features(&expanded, cfg.prune_threshold)
}
