use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::AttrValue;
use crate::stats;

/// How the two classes are carved out of the output attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LabelDefinition {
    /// Class 0: value ≤ `low_q` quantile. Class 1: value ≥ `high_q` quantile.
    QuantileEnds { low_q: f64, high_q: f64 },
    /// Exact matches of two categorical labels.
    Categorical { label0: String, label1: String },
}

impl Default for LabelDefinition {
    fn default() -> Self {
        LabelDefinition::QuantileEnds {
            low_q: 0.25,
            high_q: 0.75,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Class {
    Zero,
    One,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassLabeling {
    pub definition: LabelDefinition,
    pub class0_ids: Vec<String>,
    pub class1_ids: Vec<String>,
    pub excluded_ids: Vec<String>,
}

impl ClassLabeling {
    /// Labeled ids in the order class 0 then class 1, with targets.
    pub fn labeled(&self) -> impl Iterator<Item = (&str, Class)> {
        self.class0_ids
            .iter()
            .map(|id| (id.as_str(), Class::Zero))
            .chain(self.class1_ids.iter().map(|id| (id.as_str(), Class::One)))
    }

    pub fn class_of(&self, id: &str) -> Option<Class> {
        if self.class0_ids.iter().any(|x| x == id) {
            Some(Class::Zero)
        } else if self.class1_ids.iter().any(|x| x == id) {
            Some(Class::One)
        } else {
            None
        }
    }

    pub fn n_labeled(&self) -> usize {
        self.class0_ids.len() + self.class1_ids.len()
    }
}

/// Splits `ids` into the two end classes of `values` under `definition`.
///
/// Quantiles use the inclusive linear-interpolation convention and boundary
/// ties are included. Missing values are always excluded; an instance that
/// would qualify for both ends (only possible when the quantiles coincide)
/// is excluded too.
pub fn make_class_labels(
    ids: &[String],
    values: &[AttrValue],
    definition: &LabelDefinition,
) -> Result<ClassLabeling> {
    if ids.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: ids.len(),
            actual: values.len(),
            context: "label values",
        });
    }
    let mut class0 = Vec::new();
    let mut class1 = Vec::new();
    let mut excluded = Vec::new();

    match definition {
        LabelDefinition::QuantileEnds { low_q, high_q } => {
            let (lq, hq) = (*low_q, *high_q);
            if !(0.0..=1.0).contains(&lq) || !(0.0..=1.0).contains(&hq) || lq + (1.0 - hq) > 1.0 {
                return Err(Error::InvalidLabeling(format!(
                    "quantiles must satisfy 0 <= low_q <= high_q <= 1 (got {lq}, {hq})"
                )));
            }
            let present: Vec<f64> = values
                .iter()
                .map(|v| match v {
                    AttrValue::Numeric(x) => Ok(Some(*x)),
                    AttrValue::Missing => Ok(None),
                    AttrValue::Categorical(_) => Err(Error::InvalidLabeling(
                        "quantile ends require a numeric output attribute".into(),
                    )),
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .collect();
            if present.is_empty() {
                return Err(Error::EmptyClass("output attribute has no values".into()));
            }
            let lo = stats::quantile(&present, lq);
            let hi = stats::quantile(&present, hq);
            for (id, v) in ids.iter().zip(values) {
                match v.as_f64() {
                    Some(x) if x <= lo && x >= hi => excluded.push(id.clone()),
                    Some(x) if x <= lo => class0.push(id.clone()),
                    Some(x) if x >= hi => class1.push(id.clone()),
                    _ => excluded.push(id.clone()),
                }
            }
            if class0.is_empty() {
                return Err(Error::EmptyClass(format!("no instance at or below the {lq} quantile")));
            }
            if class1.is_empty() {
                return Err(Error::EmptyClass(format!("no instance at or above the {hq} quantile")));
            }
        }
        LabelDefinition::Categorical { label0, label1 } => {
            if label0 == label1 {
                return Err(Error::InvalidLabeling("the two labels must differ".into()));
            }
            for (id, v) in ids.iter().zip(values) {
                match v {
                    AttrValue::Categorical(s) if s == label0 => class0.push(id.clone()),
                    AttrValue::Categorical(s) if s == label1 => class1.push(id.clone()),
                    AttrValue::Numeric(_) => {
                        return Err(Error::InvalidLabeling(
                            "categorical labeling requires a categorical output attribute".into(),
                        ))
                    }
                    _ => excluded.push(id.clone()),
                }
            }
            if class0.is_empty() {
                return Err(Error::EmptyClass(format!("no instance labeled {label0:?}")));
            }
            if class1.is_empty() {
                return Err(Error::EmptyClass(format!("no instance labeled {label1:?}")));
            }
        }
    }

    Ok(ClassLabeling {
        definition: definition.clone(),
        class0_ids: class0,
        class1_ids: class1,
        excluded_ids: excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn quartile_ends_of_one_to_eight() {
        let values: Vec<AttrValue> = (1..=8).map(|i| AttrValue::Numeric(i as f64)).collect();
        let l = make_class_labels(&ids(8), &values, &LabelDefinition::default()).unwrap();
        assert_eq!(l.class0_ids, vec!["1", "2"]);
        assert_eq!(l.class1_ids, vec!["7", "8"]);
        assert_eq!(l.excluded_ids.len(), 4);
    }

    #[test]
    fn categorical_groups() {
        let values: Vec<AttrValue> = ["b", "e", "b", "x", "e", "b"]
            .iter()
            .map(|s| AttrValue::Categorical(s.to_string()))
            .collect();
        let def = LabelDefinition::Categorical {
            label0: "b".into(),
            label1: "e".into(),
        };
        let l = make_class_labels(&ids(6), &values, &def).unwrap();
        assert_eq!((l.class0_ids.len(), l.class1_ids.len()), (3, 2));
        assert_eq!(l.excluded_ids, vec!["4"]);
    }

    #[test]
    fn identical_values_give_empty_class() {
        let values = vec![AttrValue::Numeric(3.0); 5];
        assert!(matches!(
            make_class_labels(&ids(5), &values, &LabelDefinition::default()),
            Err(Error::EmptyClass(msg)) if msg.contains("0.25")
        ));
    }

    #[test]
    fn boundary_ties_included() {
        let values: Vec<AttrValue> = [1.0, 1.0, 1.0, 2.0, 3.0, 3.0, 3.0]
            .iter()
            .map(|&x| AttrValue::Numeric(x))
            .collect();
        let l = make_class_labels(&ids(7), &values, &LabelDefinition::default()).unwrap();
        assert_eq!(l.class0_ids.len(), 3);
        assert_eq!(l.class1_ids.len(), 3);
    }

    #[test]
    fn crossing_quantiles_rejected() {
        let values = vec![AttrValue::Numeric(1.0), AttrValue::Numeric(2.0)];
        let def = LabelDefinition::QuantileEnds { low_q: 0.8, high_q: 0.3 };
        assert!(matches!(
            make_class_labels(&ids(2), &values, &def),
            Err(Error::InvalidLabeling(_))
        ));
    }
}
