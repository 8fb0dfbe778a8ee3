use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Declared type of a node attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttrType {
    Numeric,
    Categorical,
}

/// A single stored attribute value. `Missing` is kept verbatim; imputation
/// happens when a feature matrix is built.
#[derive(Debug, Clone, PartialEq)]
pub enum AttrValue {
    Numeric(f64),
    Categorical(String),
    Missing,
}

impl AttrValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            AttrValue::Numeric(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_label(&self) -> Option<&str> {
        match self {
            AttrValue::Categorical(s) => Some(s),
            _ => None,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            AttrValue::Numeric(v) => Value::from(*v),
            AttrValue::Categorical(s) => Value::from(s.as_str()),
            AttrValue::Missing => Value::Null,
        }
    }
}

/// Simple undirected graph whose nodes carry a typed attribute table.
///
/// Immutable after construction: every constructor validates the invariants
/// (known link endpoints, no duplicate links, a value or explicit missing
/// marker for each schema attribute on each node).
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateNetwork {
    node_ids: Vec<String>,
    index: HashMap<String, usize>,
    links: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    schema: BTreeMap<String, AttrType>,
    columns: BTreeMap<String, Vec<AttrValue>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    nodes: Vec<RawNode>,
    links: Vec<(String, String)>,
    schema: BTreeMap<String, AttrType>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: String,
    #[serde(default)]
    attributes: serde_json::Map<String, Value>,
}

impl MultivariateNetwork {
    /// Builds a network from parts. `columns` must contain one entry per
    /// schema attribute, each aligned with `node_ids`.
    pub fn new(
        node_ids: Vec<String>,
        links: impl IntoIterator<Item = (String, String)>,
        schema: BTreeMap<String, AttrType>,
        columns: BTreeMap<String, Vec<AttrValue>>,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(node_ids.len());
        for (i, id) in node_ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateNode(id.clone()));
            }
        }

        let mut seen = HashSet::new();
        let mut edge_list = Vec::new();
        let mut neighbors = vec![Vec::new(); node_ids.len()];
        for (a, b) in links {
            let ia = *index.get(&a).ok_or_else(|| Error::DanglingEndpoint {
                from: a.clone(),
                to: b.clone(),
                missing: a.clone(),
            })?;
            let ib = *index.get(&b).ok_or_else(|| Error::DanglingEndpoint {
                from: a.clone(),
                to: b.clone(),
                missing: b.clone(),
            })?;
            if ia == ib {
                return Err(Error::SelfLoop(a));
            }
            let key = (ia.min(ib), ia.max(ib));
            if seen.insert(key) {
                edge_list.push(key);
                neighbors[ia].push(ib);
                neighbors[ib].push(ia);
            }
        }
        for adj in &mut neighbors {
            adj.sort_unstable();
        }

        for (name, ty) in &schema {
            let col = columns.get(name).ok_or_else(|| Error::AttributeType {
                node: node_ids.first().cloned().unwrap_or_default(),
                attribute: name.clone(),
                reason: "has no value column".into(),
            })?;
            if col.len() != node_ids.len() {
                return Err(Error::DimensionMismatch {
                    expected: node_ids.len(),
                    actual: col.len(),
                    context: "attribute column length",
                });
            }
            for (i, v) in col.iter().enumerate() {
                let ok = matches!(
                    (ty, v),
                    (_, AttrValue::Missing)
                        | (AttrType::Numeric, AttrValue::Numeric(_))
                        | (AttrType::Categorical, AttrValue::Categorical(_))
                );
                if !ok {
                    return Err(Error::AttributeType {
                        node: node_ids[i].clone(),
                        attribute: name.clone(),
                        reason: format!("does not match declared type {ty:?}"),
                    });
                }
                if let AttrValue::Numeric(x) = v {
                    if !x.is_finite() {
                        return Err(Error::AttributeType {
                            node: node_ids[i].clone(),
                            attribute: name.clone(),
                            reason: "is not finite".into(),
                        });
                    }
                }
            }
        }
        if let Some(extra) = columns.keys().find(|k| !schema.contains_key(*k)) {
            return Err(Error::UnknownAttribute(extra.clone()));
        }

        Ok(Self {
            node_ids,
            index,
            links: edge_list,
            neighbors,
            schema,
            columns,
        })
    }

    /// Parses a dataset document (`nodes`, `links`, `schema`).
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawDocument =
            serde_json::from_str(text).map_err(|e| Error::MalformedDocument(e.to_string()))?;
        let mut columns: BTreeMap<String, Vec<AttrValue>> = raw
            .schema
            .keys()
            .map(|k| (k.clone(), Vec::with_capacity(raw.nodes.len())))
            .collect();
        let mut node_ids = Vec::with_capacity(raw.nodes.len());
        for node in raw.nodes {
            if let Some(unknown) = node.attributes.keys().find(|k| !raw.schema.contains_key(*k)) {
                return Err(Error::AttributeType {
                    node: node.id,
                    attribute: unknown.clone(),
                    reason: "is not declared in the schema".into(),
                });
            }
            for (name, ty) in &raw.schema {
                let value = match node.attributes.get(name) {
                    None => {
                        return Err(Error::AttributeType {
                            node: node.id,
                            attribute: name.clone(),
                            reason: "is absent (use null to mark a missing value)".into(),
                        })
                    }
                    Some(Value::Null) => AttrValue::Missing,
                    Some(Value::Number(n)) if *ty == AttrType::Numeric => {
                        AttrValue::Numeric(n.as_f64().unwrap_or(f64::NAN))
                    }
                    Some(Value::String(s)) if *ty == AttrType::Categorical => {
                        AttrValue::Categorical(s.clone())
                    }
                    Some(other) => {
                        return Err(Error::AttributeType {
                            node: node.id,
                            attribute: name.clone(),
                            reason: format!("value {other} does not match declared type {ty:?}"),
                        })
                    }
                };
                columns.get_mut(name).expect("schema column").push(value);
            }
            node_ids.push(node.id);
        }
        Self::new(node_ids, raw.links, raw.schema, columns)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    /// Serializes back into the dataset document format.
    pub fn to_json_value(&self) -> Value {
        let nodes: Vec<Value> = self
            .node_ids
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let attrs: serde_json::Map<String, Value> = self
                    .columns
                    .iter()
                    .map(|(name, col)| (name.clone(), col[i].to_json()))
                    .collect();
                serde_json::json!({ "id": id, "attributes": attrs })
            })
            .collect();
        let links: Vec<Value> = self
            .links
            .iter()
            .map(|&(a, b)| serde_json::json!([self.node_ids[a], self.node_ids[b]]))
            .collect();
        serde_json::json!({ "nodes": nodes, "links": links, "schema": self.schema })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("network serializes")
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Links as index pairs `(i, j)` with `i < j`, in first-seen order.
    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    pub fn schema(&self) -> &BTreeMap<String, AttrType> {
        &self.schema
    }

    pub fn attribute(&self, name: &str) -> Option<&[AttrValue]> {
        self.columns.get(name).map(Vec::as_slice)
    }
}
