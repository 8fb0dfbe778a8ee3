use std::path::PathBuf;

/// Errors produced anywhere in the analysis pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed dataset document: {0}")]
    MalformedDocument(String),

    #[error("link ({from:?}, {to:?}) references undeclared node {missing:?}")]
    DanglingEndpoint {
        from: String,
        to: String,
        missing: String,
    },

    #[error("duplicate node id {0:?}")]
    DuplicateNode(String),

    #[error("self-loop on node {0:?}")]
    SelfLoop(String),

    #[error("node {node:?}: attribute {attribute:?} {reason}")]
    AttributeType {
        node: String,
        attribute: String,
        reason: String,
    },

    #[error("network has no nodes")]
    EmptyNetwork,

    #[error("eigenvector centrality is undefined on a graph without links")]
    DegenerateSpectrum,

    #[error("power iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),

    #[error("unknown node id(s): {0:?}")]
    UnknownNodes(Vec<String>),

    #[error("empty class: {0}")]
    EmptyClass(String),

    #[error("invalid labeling: {0}")]
    InvalidLabeling(String),

    #[error("training diverged at epoch {epoch} (loss is not finite); try a smaller learning rate")]
    Diverged { epoch: usize },

    #[error("within-class scatter is singular; use a regularization strength gamma > 0")]
    SingularScatter,

    #[error("class means coincide in the hidden representation; no discriminant direction exists")]
    CoincidentMeans,

    #[error("coalition design is rank deficient ({0})")]
    RankDeficient(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("selected columns are collinear: {dependent:?} is a linear combination of {basis:?}")]
    Collinear {
        dependent: String,
        basis: Vec<String>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{step} has not been completed for this session")]
    MissingArtifact { step: &'static str },

    #[error("step {step} failed: {source}")]
    Step {
        step: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("session {0:?} not found")]
    SessionNotFound(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("png encoding: {0}")]
    Png(#[from] png::EncodingError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_step(step: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Step {
            step,
            source: Box::new(source),
        }
    }
}
