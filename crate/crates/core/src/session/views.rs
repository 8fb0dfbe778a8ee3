//! Payloads for each linked view, built from a finished session.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::analysis::{AnalysisSession, CompositeEntry, Metrics};
use crate::attribution::RankedAttribute;
use crate::composite::{Measure, Strength};
use crate::error::{Error, Result};
use crate::learn::Class;
use crate::viz::{
    kde2d, render_two_class, swarm_coordinates, Bandwidth, DensityField, DoubleHistogram, KdeOptions, RatioMode,
};

/// Class tag used by every view: labeled classes plus `other` for
/// unlabeled instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassTag {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "other")]
    Other,
}

impl ClassTag {
    pub fn color(self) -> &'static str {
        match self {
            ClassTag::Zero => "red",
            ClassTag::One => "blue",
            ClassTag::Other => "gray",
        }
    }
}

impl From<Option<Class>> for ClassTag {
    fn from(c: Option<Class>) -> Self {
        match c {
            Some(Class::Zero) => ClassTag::Zero,
            Some(Class::One) => ClassTag::One,
            None => ClassTag::Other,
        }
    }
}

/// A view request: `{"view": "<name>", ...view parameters}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "view", rename_all = "snake_case", deny_unknown_fields)]
pub enum ViewRequest {
    Summary,
    Representation {
        #[serde(default)]
        lane_height: Option<f64>,
    },
    Shap {
        /// Attach a density raster to every attribute group.
        #[serde(default)]
        density: bool,
        #[serde(default = "small_grid")]
        grid: usize,
    },
    Layout,
    Composites,
    Density(DensityRequest),
    Histograms {
        #[serde(default = "default_bins")]
        bins: usize,
    },
}

fn small_grid() -> usize {
    96
}

pub fn default_bins() -> usize {
    20
}

/// Axis sources are `representation`, `attribute:<name>`, `shap:<name>` or
/// `composite:<index>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityRequest {
    #[serde(default = "representation_axis")]
    pub x: String,
    pub y: String,
    #[serde(default)]
    pub width: Option<usize>,
    #[serde(default)]
    pub height: Option<usize>,
    #[serde(default)]
    pub mode: Option<RatioMode>,
    #[serde(default)]
    pub bandwidth: Option<[f64; 2]>,
}

fn representation_axis() -> String {
    "representation".into()
}

impl DensityRequest {
    pub fn new(x: impl Into<String>, y: impl Into<String>) -> Self {
        Self {
            x: x.into(),
            y: y.into(),
            width: None,
            height: None,
            mode: None,
            bandwidth: None,
        }
    }

    pub fn options(&self) -> KdeOptions {
        let d = KdeOptions::default();
        KdeOptions {
            width: self.width.unwrap_or(d.width),
            height: self.height.unwrap_or(d.height),
            bandwidth: match self.bandwidth {
                Some([x, y]) => Bandwidth::Fixed { x, y },
                None => Bandwidth::Scott,
            },
            mode: self.mode.unwrap_or(d.mode),
            ..d
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryView {
    pub name: String,
    pub nodes: usize,
    pub links: usize,
    pub features: Vec<String>,
    pub class0: usize,
    pub class1: usize,
    pub excluded: usize,
    pub train: usize,
    pub holdout: usize,
    pub metrics: Metrics,
    pub ranking: Vec<RankedAttribute>,
    pub composites: usize,
    pub selection: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmPoint {
    pub id: String,
    pub value: f64,
    pub x: f64,
    pub y: f64,
    pub class: ClassTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationView {
    pub lane_height: f64,
    pub points: Vec<SwarmPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapPoint {
    pub id: String,
    pub phi: f64,
    /// Raw attribute value.
    pub value: f64,
    pub class: ClassTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapGroup {
    pub attribute: String,
    pub mean_abs_shap: f64,
    pub points: Vec<ShapPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapView {
    pub base_value: f64,
    /// In ranking order.
    pub groups: Vec<ShapGroup>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutNode {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub class: ClassTag,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutView {
    pub nodes: Vec<LayoutNode>,
    /// Index pairs into `nodes`.
    pub links: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub class: ClassTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeView {
    pub index: usize,
    pub formula: String,
    pub attribute_names: Vec<String>,
    pub weights: Vec<f64>,
    pub display_weights: Vec<f64>,
    pub measure: Measure,
    pub achieved_dependence: f64,
    pub strength: Strength,
    /// x = 1D representation, y = composite value (labeled instances).
    pub points: Vec<ScatterPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositesView {
    pub composites: Vec<CompositeView>,
}

/// Density raster payload; PNG images are base64 encoded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityView {
    pub x: String,
    pub y: String,
    pub width: usize,
    pub height: usize,
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub bandwidth: [f64; 2],
    pub mode: RatioMode,
    pub n0: usize,
    pub n1: usize,
    pub image_png: String,
    pub legend_png: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonMode {
    /// Class 0 (group a) against class 1 (group b).
    Classes,
    /// Selected (group a) against the other labeled instances (group b).
    Selection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramsView {
    pub mode: ComparisonMode,
    pub group_a: usize,
    pub group_b: usize,
    pub histograms: Vec<DoubleHistogram>,
}

/// Field document written by field export: grid metadata plus row-major
/// arrays (row 0 at the lowest `y`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDocument {
    pub x: String,
    pub y: String,
    pub field: DensityField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ViewPayload {
    Summary(SummaryView),
    Representation(RepresentationView),
    Shap(ShapView),
    Layout(LayoutView),
    Composites(CompositesView),
    Density(DensityView),
    Histograms(HistogramsView),
}

pub fn summary(s: &AnalysisSession) -> SummaryView {
    SummaryView {
        name: s.name().to_string(),
        nodes: s.network.node_count(),
        links: s.network.link_count(),
        features: s.features.names(),
        class0: s.labeling.class0_ids.len(),
        class1: s.labeling.class1_ids.len(),
        excluded: s.labeling.excluded_ids.len(),
        train: s.split.train_ids.len(),
        holdout: s.split.holdout_ids.len(),
        metrics: s.metrics.clone(),
        ranking: s.ranking.as_ref().map(|r| r.entries.clone()).unwrap_or_default(),
        composites: s.composites.len(),
        selection: s.selection.clone(),
    }
}

pub fn representation_view(s: &AnalysisSession, lane_height: Option<f64>) -> Result<RepresentationView> {
    let rep = s.representation()?;
    let lane_height = match lane_height {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(Error::InvalidArgument(format!("lane_height must be positive, got {h}"))),
        None => {
            let lo = rep.values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = rep.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                (hi - lo) / 100.0
            } else {
                1.0
            }
        }
    };
    let coords = swarm_coordinates(&rep.instance_ids, &rep.values, lane_height);
    let points = rep
        .instance_ids
        .iter()
        .zip(&rep.values)
        .zip(coords)
        .zip(&rep.class_of)
        .map(|(((id, &value), (x, y)), c)| SwarmPoint {
            id: id.clone(),
            value,
            x,
            y,
            class: (*c).into(),
        })
        .collect();
    Ok(RepresentationView { lane_height, points })
}

pub fn shap_view(s: &AnalysisSession, density: bool, grid: usize) -> Result<ShapView> {
    let shap = s.shap()?;
    let ranking = s.ranking()?;
    let mut groups = Vec::with_capacity(ranking.entries.len());
    for entry in &ranking.entries {
        let j = shap
            .attribute_names
            .iter()
            .position(|n| *n == entry.name)
            .ok_or_else(|| Error::UnknownAttribute(entry.name.clone()))?;
        let raw = &s.raw_features.columns[j].values;
        let points = shap
            .instance_ids
            .iter()
            .zip(&shap.values)
            .map(|(id, phi)| {
                let i = s.network.index_of(id).ok_or_else(|| Error::UnknownNodes(vec![id.clone()]))?;
                Ok(ShapPoint {
                    id: id.clone(),
                    phi: phi[j],
                    value: raw[i],
                    class: s.labeling.class_of(id).into(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let density = if density {
            let mut req = DensityRequest::new(format!("shap:{}", entry.name), format!("attribute:{}", entry.name));
            req.width = Some(grid);
            req.height = Some(grid);
            Some(density_view(s, &req)?)
        } else {
            None
        };
        groups.push(ShapGroup {
            attribute: entry.name.clone(),
            mean_abs_shap: entry.mean_abs_shap,
            points,
            density,
        });
    }
    Ok(ShapView {
        base_value: shap.base_value,
        groups,
    })
}

pub fn layout_view(s: &AnalysisSession) -> Result<LayoutView> {
    let layout = s.layout()?;
    let nodes = layout
        .node_ids
        .iter()
        .zip(&layout.positions)
        .map(|(id, p)| {
            let class: ClassTag = s.labeling.class_of(id).into();
            LayoutNode {
                id: id.clone(),
                x: p[0],
                y: p[1],
                class,
                color: class.color().to_string(),
            }
        })
        .collect();
    Ok(LayoutView {
        nodes,
        links: s.network.links().iter().map(|&(a, b)| [a, b]).collect(),
    })
}

fn labeled_tags(s: &AnalysisSession) -> Result<(Vec<String>, Vec<Class>)> {
    let rep = s.representation()?;
    let mut ids = Vec::new();
    let mut classes = Vec::new();
    for (id, c) in rep.instance_ids.iter().zip(&rep.class_of) {
        if let Some(c) = c {
            ids.push(id.clone());
            classes.push(*c);
        }
    }
    Ok((ids, classes))
}

pub fn composite_view(s: &AnalysisSession, index: usize, entry: &CompositeEntry) -> Result<CompositeView> {
    let v = &entry.variable;
    let (columns, target) = s.composite_inputs(&v.attribute_names)?;
    let values = v.apply(&columns);
    let (ids, classes) = labeled_tags(s)?;
    let points = ids
        .into_iter()
        .zip(classes)
        .zip(target.iter().zip(&values))
        .map(|((id, c), (&x, &y))| ScatterPoint {
            id,
            x,
            y,
            class: Some(c).into(),
        })
        .collect();
    Ok(CompositeView {
        index,
        formula: v.formula(),
        attribute_names: v.attribute_names.clone(),
        weights: v.weights.clone(),
        display_weights: v.display_weights.clone(),
        measure: v.measure,
        achieved_dependence: v.achieved_dependence,
        strength: entry.strength,
        points,
    })
}

pub fn composites_view(s: &AnalysisSession) -> Result<CompositesView> {
    let composites = s
        .composites
        .iter()
        .enumerate()
        .map(|(i, e)| composite_view(s, i, e))
        .collect::<Result<_>>()?;
    Ok(CompositesView { composites })
}

/// Values of an axis source over the labeled instances (node order).
pub fn axis_values(s: &AnalysisSession, source: &str) -> Result<Vec<f64>> {
    let (ids, _) = labeled_tags(s)?;
    let rows: Vec<usize> = ids.iter().map(|id| s.network.index_of(id).expect("labeled ids are nodes")).collect();
    if source == "representation" {
        let rep = s.representation()?;
        return Ok(rows.iter().map(|&i| rep.values[i]).collect());
    }
    let (kind, arg) = source
        .split_once(':')
        .ok_or_else(|| Error::InvalidArgument(format!("unknown axis source {source:?}")))?;
    match kind {
        "attribute" => {
            let col = s
                .raw_features
                .column(arg)
                .ok_or_else(|| Error::UnknownAttribute(arg.to_string()))?;
            Ok(rows.iter().map(|&i| col.values[i]).collect())
        }
        "shap" => {
            let shap = s.shap()?;
            let j = shap
                .attribute_names
                .iter()
                .position(|n| n == arg)
                .ok_or_else(|| Error::UnknownAttribute(arg.to_string()))?;
            // SHAP rows are the labeled instances in node order
            Ok(shap.values.iter().map(|r| r[j]).collect())
        }
        "composite" => {
            let index: usize = arg
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("composite index {arg:?} is not a number")))?;
            let entry = s.composites.get(index).ok_or_else(|| {
                Error::InvalidArgument(format!("composite index {index} out of range ({} composites)", s.composites.len()))
            })?;
            let (columns, _) = s.composite_inputs(&entry.variable.attribute_names)?;
            Ok(entry.variable.apply(&columns))
        }
        _ => Err(Error::InvalidArgument(format!("unknown axis source {source:?}"))),
    }
}

/// Two-class density field of labeled instances for the requested axes.
pub fn density_field(s: &AnalysisSession, req: &DensityRequest) -> Result<DensityField> {
    let (_, classes) = labeled_tags(s)?;
    let xs = axis_values(s, &req.x)?;
    let ys = axis_values(s, &req.y)?;
    let points: Vec<[f64; 2]> = xs.into_iter().zip(ys).map(|(x, y)| [x, y]).collect();
    kde2d(&points, &classes, &req.options())
}

pub fn density_view(s: &AnalysisSession, req: &DensityRequest) -> Result<DensityView> {
    let field = density_field(s, req)?;
    let raster = render_two_class(&field);
    Ok(DensityView {
        x: req.x.clone(),
        y: req.y.clone(),
        width: field.width,
        height: field.height,
        x_range: field.x_range,
        y_range: field.y_range,
        bandwidth: field.bandwidth,
        mode: field.mode,
        n0: field.n0,
        n1: field.n1,
        image_png: STANDARD.encode(raster.image.to_png()?),
        legend_png: STANDARD.encode(raster.legend.to_png()?),
    })
}

pub fn histograms_view(s: &AnalysisSession, bins: usize) -> Result<HistogramsView> {
    let (a, b) = s.comparison_groups();
    Ok(HistogramsView {
        mode: if s.selection.is_empty() {
            ComparisonMode::Classes
        } else {
            ComparisonMode::Selection
        },
        group_a: a.len(),
        group_b: b.len(),
        histograms: s.histograms(bins)?,
    })
}

pub fn get_view_data(s: &AnalysisSession, req: &ViewRequest) -> Result<ViewPayload> {
    Ok(match req {
        ViewRequest::Summary => ViewPayload::Summary(summary(s)),
        ViewRequest::Representation { lane_height } => ViewPayload::Representation(representation_view(s, *lane_height)?),
        ViewRequest::Shap { density, grid } => ViewPayload::Shap(shap_view(s, *density, *grid)?),
        ViewRequest::Layout => ViewPayload::Layout(layout_view(s)?),
        ViewRequest::Composites => ViewPayload::Composites(composites_view(s)?),
        ViewRequest::Density(d) => ViewPayload::Density(density_view(s, d)?),
        ViewRequest::Histograms { bins } => ViewPayload::Histograms(histograms_view(s, *bins)?),
    })
}
