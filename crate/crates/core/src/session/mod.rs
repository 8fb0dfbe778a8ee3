//! Orchestration of the analysis steps, persistence, view payloads, and
//! the message protocol used by the interactive front end.

mod analysis;
mod config;
mod export;
mod protocol;
mod store;
mod views;

pub use analysis::{run_pipeline, step, AnalysisSession, CompositeEntry, Metrics, Split};
pub use config::{EvaluationConfig, OutputConfig, SessionConfig};
pub use export::{default_density_request, export_view, ExportFormat};
pub use protocol::{
    Connection, ErrorBody, Registry, Request, Response, Service, ServiceError, Status, OPS, PROTOCOL_VERSION,
};
pub use store::{
    artifact_digest, artifact_documents, load_session, save_session, session_digest, Manifest, ARTIFACT_FILES,
    CONFIG_FILE, FORMAT_VERSION, MANIFEST_FILE,
};
pub use views::{
    axis_values, composite_view, composites_view, density_field, density_view, get_view_data, histograms_view,
    layout_view, representation_view, shap_view, summary, ClassTag, ComparisonMode, CompositeView, CompositesView,
    DensityRequest, DensityView, FieldDocument, HistogramsView, LayoutNode, LayoutView, RepresentationView,
    ScatterPoint, ShapGroup, ShapPoint, ShapView, SummaryView, SwarmPoint, ViewPayload, ViewRequest,
};
