//! File exports of view data: PNG rasters and JSON documents.

use std::path::Path;

use super::analysis::AnalysisSession;
use super::views::{self, DensityRequest, FieldDocument, ViewRequest};
use crate::error::{Error, Result};
use crate::viz::render_two_class;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Png,
    Json,
}

impl ExportFormat {
    /// Chosen from the output file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("png") => Ok(ExportFormat::Png),
            Some("json") => Ok(ExportFormat::Json),
            _ => Err(Error::InvalidArgument(format!(
                "{}: output must end in .png or .json",
                path.display()
            ))),
        }
    }
}

/// Renders `view` into bytes. Density views export as a PNG raster or as a
/// field document; `legend` exports the polar legend PNG; every other view
/// exports its JSON payload.
pub fn export_view(
    s: &AnalysisSession,
    view: &str,
    density: Option<&DensityRequest>,
    format: ExportFormat,
) -> Result<Vec<u8>> {
    match (view, format) {
        ("density", fmt) => {
            let req = density.ok_or_else(|| Error::InvalidArgument("density export needs axis sources".into()))?;
            let field = views::density_field(s, req)?;
            match fmt {
                ExportFormat::Png => render_two_class(&field).image.to_png(),
                ExportFormat::Json => Ok(serde_json::to_vec_pretty(&FieldDocument {
                    x: req.x.clone(),
                    y: req.y.clone(),
                    field,
                })?),
            }
        }
        ("legend", ExportFormat::Png) => crate::viz::polar_legend(crate::viz::LEGEND_SIZE).to_png(),
        (_, ExportFormat::Png) => Err(Error::InvalidArgument(format!(
            "view {view:?} has no raster form; export it as .json"
        ))),
        (name, ExportFormat::Json) => {
            let req: ViewRequest = serde_json::from_value(serde_json::json!({ "view": name }))
                .map_err(|_| Error::InvalidArgument(format!("unknown view {name:?}")))?;
            Ok(serde_json::to_vec_pretty(&views::get_view_data(s, &req)?)?)
        }
    }
}

/// Default density axes: the 1D representation against the first
/// composite if there is one, else against the top-ranked attribute.
pub fn default_density_request(s: &AnalysisSession) -> Result<DensityRequest> {
    if !s.composites.is_empty() {
        return Ok(DensityRequest::new("representation", "composite:0"));
    }
    let top = s
        .ranking()?
        .entries
        .first()
        .ok_or_else(|| Error::InvalidArgument("session has no attributes".into()))?;
    Ok(DensityRequest::new("representation", format!("attribute:{}", top.name)))
}
