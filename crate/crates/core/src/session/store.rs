//! On-disk session layout: one directory per session holding the config
//! copy, the dataset copy, and one JSON document per artifact.
//!
//! Floats are written with round-trip precision, so loading a saved session
//! reproduces every numeric artifact bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::analysis::{step, AnalysisSession, CompositeEntry, Metrics, Split};
use super::config::SessionConfig;
use crate::attribution::{AttributeRanking, ShapMatrix};
use crate::composite::{SpearmanOptions, StrengthBands};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::MultivariateNetwork;
use crate::learn::{ClassLabeling, Normalizer};
use crate::simplify::{PipelineModel, Representation1D};
use crate::viz::Layout;

pub const FORMAT_VERSION: u32 = 1;

/// Artifact files covered by the digest, in digest order.
pub const ARTIFACT_FILES: [&str; 9] = [
    "network.json",
    "features.json",
    "labels.json",
    "model.json",
    "representation.json",
    "shap.json",
    "ranking.json",
    "layout.json",
    "metrics.json",
];

pub const CONFIG_FILE: &str = "config.json";
pub const COMPOSITES_FILE: &str = "composites.json";
pub const SELECTION_FILE: &str = "selection.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub name: String,
    /// SHA-256 over all artifact files (see [`artifact_digest`]).
    pub digest: String,
}

#[derive(Serialize, Deserialize)]
struct FeaturesDoc {
    raw: FeatureMatrix,
    normalizer: Normalizer,
}

#[derive(Serialize, Deserialize)]
struct LabelsDoc {
    labeling: ClassLabeling,
    split: Split,
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    pipeline: PipelineModel,
    losses: Vec<f64>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 over `(file name, length, bytes)` of each artifact in
/// [`ARTIFACT_FILES`] order.
pub fn artifact_digest(files: &[(&str, Vec<u8>)]) -> String {
    let mut h = Sha256::new();
    for (name, bytes) in files {
        h.update(name.as_bytes());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    hex(&h.finalize())
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    Ok(serde_json::to_vec(value)?)
}

/// Serialized artifact documents, in [`ARTIFACT_FILES`] order. Fails with
/// the first missing step when the session is incomplete.
pub fn artifact_documents(s: &AnalysisSession) -> Result<Vec<(&'static str, Vec<u8>)>> {
    let model = s.model.as_ref().ok_or(Error::MissingArtifact {
        step: step::SIMPLIFICATION,
    })?;
    let docs = vec![
        ("network.json", s.network.to_json_string().into_bytes()),
        (
            "features.json",
            to_json(&FeaturesDoc {
                raw: s.raw_features.clone(),
                normalizer: s.normalizer.clone(),
            })?,
        ),
        (
            "labels.json",
            to_json(&LabelsDoc {
                labeling: s.labeling.clone(),
                split: s.split.clone(),
            })?,
        ),
        (
            "model.json",
            to_json(&ModelDoc {
                pipeline: model.clone(),
                losses: s.losses.clone(),
            })?,
        ),
        ("representation.json", to_json(s.representation()?)?),
        ("shap.json", to_json(s.shap()?)?),
        ("ranking.json", to_json(s.ranking()?)?),
        ("layout.json", to_json(s.layout()?)?),
        ("metrics.json", to_json(&s.metrics)?),
    ];
    debug_assert!(docs.iter().map(|d| d.0).eq(ARTIFACT_FILES));
    Ok(docs)
}

/// Digest of a complete session's artifacts.
pub fn session_digest(s: &AnalysisSession) -> Result<String> {
    Ok(artifact_digest(&artifact_documents(s)?))
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes the session into `dir` (created or replaced). Everything is
/// first written to a sibling temporary directory and moved into place, so
/// an interrupted save leaves no partial session behind.
pub fn save_session(s: &AnalysisSession, dir: impl AsRef<Path>) -> Result<Manifest> {
    let dir = dir.as_ref();
    let docs = artifact_documents(s)?;
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        name: s.name().to_string(),
        digest: artifact_digest(&docs),
    };

    let parent = dir.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    let file_name = dir
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("{} is not a directory path", dir.display())))?;
    let tmp: PathBuf = parent.join(format!(".{}.tmp-{}", file_name.to_string_lossy(), std::process::id()));
    if tmp.exists() {
        fs::remove_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
    }
    fs::create_dir(&tmp).map_err(|e| Error::io(&tmp, e))?;

    let result = (|| {
        for (name, bytes) in &docs {
            write(&tmp, name, bytes)?;
        }
        write(&tmp, CONFIG_FILE, &serde_json::to_vec_pretty(&s.config)?)?;
        write(&tmp, COMPOSITES_FILE, &to_json(&s.composites)?)?;
        write(&tmp, SELECTION_FILE, &to_json(&s.selection)?)?;
        write(&tmp, MANIFEST_FILE, &serde_json::to_vec_pretty(&manifest)?)?;
        if dir.exists() {
            fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::rename(&tmp, dir).map_err(|e| Error::io(dir, e))
    })();
    if result.is_err() {
        let _ = fs::remove_dir_all(&tmp);
    }
    result.map(|_| manifest)
}

fn read(dir: &Path, name: &str) -> Result<Vec<u8>> {
    let path = dir.join(name);
    fs::read(&path).map_err(|e| Error::io(path, e))
}

fn parse<T: DeserializeOwned>(name: &str, bytes: &[u8]) -> Result<T> {
    serde_json::from_slice(bytes).map_err(|e| Error::MalformedDocument(format!("{name}: {e}")))
}

/// Loads a saved session and checks its artifacts against the manifest
/// digest.
pub fn load_session(dir: impl AsRef<Path>) -> Result<AnalysisSession> {
    let dir = dir.as_ref();
    let manifest: Manifest = parse(MANIFEST_FILE, &read(dir, MANIFEST_FILE)?)?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::MalformedDocument(format!(
            "unsupported session format version {}",
            manifest.format_version
        )));
    }
    let mut docs = Vec::with_capacity(ARTIFACT_FILES.len());
    for name in ARTIFACT_FILES {
        docs.push((name, read(dir, name)?));
    }
    let digest = artifact_digest(&docs);
    if digest != manifest.digest {
        return Err(Error::MalformedDocument(format!(
            "{}: artifacts do not match the manifest digest",
            dir.display()
        )));
    }
    let doc = |name: &str| &docs.iter().find(|d| d.0 == name).expect("artifact listed").1;

    let network = MultivariateNetwork::from_json_str(
        std::str::from_utf8(doc("network.json")).map_err(|e| Error::MalformedDocument(e.to_string()))?,
    )?;
    let features: FeaturesDoc = parse("features.json", doc("features.json"))?;
    let labels: LabelsDoc = parse("labels.json", doc("labels.json"))?;
    let model: ModelDoc = parse("model.json", doc("model.json"))?;
    let representation: Representation1D = parse("representation.json", doc("representation.json"))?;
    let shap: ShapMatrix = parse("shap.json", doc("shap.json"))?;
    let ranking: AttributeRanking = parse("ranking.json", doc("ranking.json"))?;
    let layout: Layout = parse("layout.json", doc("layout.json"))?;
    let metrics: Metrics = parse("metrics.json", doc("metrics.json"))?;
    let config: SessionConfig = parse(CONFIG_FILE, &read(dir, CONFIG_FILE)?)?;
    let composites: Vec<CompositeEntry> = parse(COMPOSITES_FILE, &read(dir, COMPOSITES_FILE)?)?;
    let selection: Vec<String> = parse(SELECTION_FILE, &read(dir, SELECTION_FILE)?)?;

    let normalized = features.normalizer.transform(&features.raw)?;
    Ok(AnalysisSession {
        config,
        network,
        raw_features: features.raw,
        normalizer: features.normalizer,
        features: normalized,
        labeling: labels.labeling,
        split: labels.split,
        metrics,
        losses: model.losses,
        model: Some(model.pipeline),
        representation: Some(representation),
        shap: Some(shap),
        ranking: Some(ranking),
        layout: Some(layout),
        composites,
        selection,
        strength_bands: StrengthBands::default(),
        spearman: SpearmanOptions::default(),
    })
}
