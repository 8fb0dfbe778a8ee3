//! Class labeling of the output attribute's two ends and the classifier
//! whose last hidden layer becomes the learned representation.

mod labels;
mod mlp;
mod normalize;

use nalgebra::DMatrix;

pub use labels::{make_class_labels, Class, ClassLabeling, LabelDefinition};
pub use mlp::{
    leaky_relu, rows_to_matrix, train_mlp, DenseLayer, Gradients, MlpCheckpoint, MlpConfig, MlpModel,
    TrainReport,
};
pub use normalize::{zscore_normalize, Normalizer};

use crate::error::Result;

/// Last-hidden-layer activations for a set of instances.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenRepresentation {
    pub instance_ids: Vec<String>,
    /// instances × last hidden width
    pub matrix: DMatrix<f64>,
}

pub fn extract_hidden(model: &MlpModel, ids: Vec<String>, x: &DMatrix<f64>) -> Result<HiddenRepresentation> {
    let matrix = model.hidden(x)?;
    Ok(HiddenRepresentation {
        instance_ids: ids,
        matrix,
    })
}

/// Argmax classification accuracy against class targets.
pub fn accuracy(model: &MlpModel, x: &DMatrix<f64>, y: &[Class]) -> Result<f64> {
    let targets: Vec<usize> = y.iter().map(|c| class_index(*c)).collect();
    model.accuracy(x, &targets)
}

pub fn class_index(c: Class) -> usize {
    match c {
        Class::Zero => 0,
        Class::One => 1,
    }
}
