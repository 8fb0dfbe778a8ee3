use std::collections::HashSet;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::SessionConfig;
use crate::attribution::{background_indices, explain_rows_against, rank_attributes, AttributeRanking, ShapMatrix};
use crate::composite::{construct, label_correlation_strength, CompositeVariable, Measure, SpearmanOptions, StrengthBands, Strength};
use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureMatrix};
use crate::graph::MultivariateNetwork;
use crate::learn::{class_index, extract_hidden, make_class_labels, train_mlp, Class, ClassLabeling, Normalizer};
use crate::simplify::{fit_regularized_lda, midpoint_accuracy, project_1d, PipelineModel, Representation1D};
use crate::viz::{force_layout, ordered_histograms, DoubleHistogram, Layout};

/// Step names used in error messages and missing-artifact reports.
pub mod step {
    pub const VALIDATION: &str = "validation";
    pub const FEATURES: &str = "feature extraction";
    pub const LABELING: &str = "labeling";
    pub const TRAINING: &str = "training";
    pub const SIMPLIFICATION: &str = "simplification";
    pub const ATTRIBUTION: &str = "attribution";
    pub const LAYOUT: &str = "layout";
}

/// Labeled instances split into training and held-out ids (node order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub train_ids: Vec<String>,
    pub holdout_ids: Vec<String>,
}

/// Accuracies reported after Steps 2 and 3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Metrics {
    pub final_loss: Option<f64>,
    /// MLP accuracy on the training instances.
    pub step2_accuracy: Option<f64>,
    /// Midpoint-threshold accuracy of the 1D representation on the
    /// training instances.
    pub step3_accuracy: Option<f64>,
    pub step2_holdout_accuracy: Option<f64>,
    pub step3_holdout_accuracy: Option<f64>,
}

/// A composite together with its qualitative strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeEntry {
    pub variable: CompositeVariable,
    pub strength: Strength,
}

/// State of one analysis: Step 1–4 artifacts plus the interactive state
/// (composites and selection). Artifacts of steps that have not run are
/// `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSession {
    pub config: SessionConfig,
    pub network: MultivariateNetwork,
    /// Extracted, pruned, unnormalized features for every node.
    pub raw_features: FeatureMatrix,
    pub normalizer: Normalizer,
    /// `raw_features` after z-scoring.
    pub features: FeatureMatrix,
    pub labeling: ClassLabeling,
    pub split: Split,
    pub metrics: Metrics,
    pub losses: Vec<f64>,
    pub model: Option<PipelineModel>,
    pub representation: Option<Representation1D>,
    pub shap: Option<ShapMatrix>,
    pub ranking: Option<AttributeRanking>,
    pub layout: Option<Layout>,
    pub composites: Vec<CompositeEntry>,
    pub selection: Vec<String>,
    pub strength_bands: StrengthBands,
    pub spearman: SpearmanOptions,
}

fn split_labeled(net: &MultivariateNetwork, labeling: &ClassLabeling, frac: f64, seed: u64) -> Split {
    let mut holdout = HashSet::new();
    if frac > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for ids in [&labeling.class0_ids, &labeling.class1_ids] {
            let mut shuffled: Vec<&String> = ids.iter().collect();
            shuffled.shuffle(&mut rng);
            let k = ((frac * ids.len() as f64).round() as usize).min(ids.len().saturating_sub(1));
            holdout.extend(shuffled.into_iter().take(k).cloned());
        }
    }
    let mut split = Split {
        train_ids: Vec::new(),
        holdout_ids: Vec::new(),
    };
    for id in net.node_ids() {
        if labeling.class_of(id).is_some() {
            if holdout.contains(id) {
                split.holdout_ids.push(id.clone());
            } else {
                split.train_ids.push(id.clone());
            }
        }
    }
    split
}

impl AnalysisSession {
    /// Step 1 plus labeling: validates the config, extracts and normalizes
    /// features, and labels the two classes.
    pub fn prepare(config: SessionConfig, network: MultivariateNetwork) -> Result<Self> {
        config.validate(&network).map_err(Error::in_step(step::VALIDATION))?;
        let raw_features = extract_features(&network, &config.features).map_err(Error::in_step(step::FEATURES))?;
        let normalizer = Normalizer::fit(&raw_features);
        let features = normalizer.transform(&raw_features)?;
        let output = network
            .attribute(&config.output.attribute)
            .ok_or_else(|| Error::UnknownAttribute(config.output.attribute.clone()))?;
        let labeling = make_class_labels(network.node_ids(), output, &config.output.labeling)
            .map_err(Error::in_step(step::LABELING))?;
        let split = split_labeled(
            &network,
            &labeling,
            config.evaluation.holdout_fraction,
            config.evaluation.seed,
        );
        Ok(Self {
            config,
            network,
            raw_features,
            normalizer,
            features,
            labeling,
            split,
            metrics: Metrics::default(),
            losses: Vec::new(),
            model: None,
            representation: None,
            shap: None,
            ranking: None,
            layout: None,
            composites: Vec::new(),
            selection: Vec::new(),
            strength_bands: StrengthBands::default(),
            spearman: SpearmanOptions::default(),
        })
    }

    /// Normalized feature rows and classes for the given labeled ids.
    pub fn labeled_rows(&self, ids: &[String]) -> Result<(DMatrix<f64>, Vec<Class>)> {
        let mut x = DMatrix::zeros(ids.len(), self.features.n_cols());
        let mut y = Vec::with_capacity(ids.len());
        for (r, id) in ids.iter().enumerate() {
            let i = self
                .network
                .index_of(id)
                .ok_or_else(|| Error::UnknownNodes(vec![id.clone()]))?;
            for (c, col) in self.features.columns.iter().enumerate() {
                x[(r, c)] = col.values[i];
            }
            y.push(
                self.labeling
                    .class_of(id)
                    .ok_or_else(|| Error::InvalidLabeling(format!("{id} is not labeled")))?,
            );
        }
        Ok((x, y))
    }

    pub fn all_rows(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.features.n_rows(), self.features.n_cols(), |r, c| {
            self.features.columns[c].values[r]
        })
    }

    /// Labeled ids in node order.
    pub fn labeled_ids(&self) -> Vec<String> {
        self.network
            .node_ids()
            .iter()
            .filter(|id| self.labeling.class_of(id).is_some())
            .cloned()
            .collect()
    }

    /// Step 2: trains the classifier on the training split. The composed
    /// model is completed by [`simplify`](Self::simplify).
    pub fn train(&mut self) -> Result<crate::learn::MlpModel> {
        let (x, y) = self.labeled_rows(&self.split.train_ids)?;
        let targets: Vec<usize> = y.iter().map(|c| class_index(*c)).collect();
        let report = train_mlp(&x, &targets, &self.config.mlp).map_err(Error::in_step(step::TRAINING))?;
        self.metrics.final_loss = report.losses.last().copied();
        self.metrics.step2_accuracy = Some(report.accuracy);
        if !self.split.holdout_ids.is_empty() {
            let (xh, yh) = self.labeled_rows(&self.split.holdout_ids)?;
            self.metrics.step2_holdout_accuracy = Some(crate::learn::accuracy(&report.model, &xh, &yh)?);
        }
        self.losses = report.losses;
        Ok(report.model)
    }

    /// Step 3: fits the discriminant on training hidden activations and
    /// projects every node.
    pub fn simplify(&mut self, mlp: crate::learn::MlpModel) -> Result<()> {
        let (x, y) = self.labeled_rows(&self.split.train_ids)?;
        let hidden = extract_hidden(&mlp, self.split.train_ids.clone(), &x)?;
        let lda = fit_regularized_lda(&hidden, &y, self.config.gamma).map_err(Error::in_step(step::SIMPLIFICATION))?;
        let train_values = lda.project_matrix(&hidden.matrix)?;
        self.metrics.step3_accuracy = Some(midpoint_accuracy((&train_values, &y), &train_values, &y));
        if !self.split.holdout_ids.is_empty() {
            let (xh, yh) = self.labeled_rows(&self.split.holdout_ids)?;
            let values = lda.project_matrix(&mlp.hidden(&xh)?)?;
            self.metrics.step3_holdout_accuracy = Some(midpoint_accuracy((&train_values, &y), &values, &yh));
        }
        let all = extract_hidden(&mlp, self.network.node_ids().to_vec(), &self.all_rows())?;
        let class_of = self
            .network
            .node_ids()
            .iter()
            .map(|id| self.labeling.class_of(id))
            .collect();
        self.representation = Some(project_1d(&lda, &all, class_of)?);
        self.model = Some(PipelineModel {
            normalizer: self.normalizer.clone(),
            mlp,
            lda,
        });
        Ok(())
    }

    /// Step 4: explains the 1D representation of every labeled instance
    /// against a background drawn from the training instances.
    pub fn explain(&mut self) -> Result<()> {
        let model = self.model.as_ref().ok_or(Error::MissingArtifact {
            step: step::SIMPLIFICATION,
        })?;
        let ids = self.labeled_ids();
        let (x, _) = self.labeled_rows(&ids)?;
        let (train, _) = self.labeled_rows(&self.split.train_ids)?;
        let cfg = &self.config.shap;
        let bg = train.select_rows(&background_indices(train.nrows(), cfg.background_cap.max(1), cfg.seed));
        let shap = explain_rows_against(model, &ids, &self.features.names(), &x, &bg, cfg)
            .map_err(Error::in_step(step::ATTRIBUTION))?;
        self.ranking = Some(rank_attributes(&shap));
        self.shap = Some(shap);
        Ok(())
    }

    pub fn compute_layout(&mut self) {
        self.layout = Some(force_layout(&self.network, &self.config.layout));
    }

    /// Steps 1–4 and the layout.
    pub fn run(config: SessionConfig, network: MultivariateNetwork) -> Result<Self> {
        let mut s = Self::prepare(config, network)?;
        let mlp = s.train()?;
        s.simplify(mlp)?;
        s.explain()?;
        s.compute_layout();
        Ok(s)
    }

    pub fn name(&self) -> &str {
        &self.config.name
    }

    pub fn representation(&self) -> Result<&Representation1D> {
        self.representation.as_ref().ok_or(Error::MissingArtifact {
            step: step::SIMPLIFICATION,
        })
    }

    pub fn shap(&self) -> Result<&ShapMatrix> {
        self.shap.as_ref().ok_or(Error::MissingArtifact { step: step::ATTRIBUTION })
    }

    pub fn ranking(&self) -> Result<&AttributeRanking> {
        self.ranking.as_ref().ok_or(Error::MissingArtifact { step: step::ATTRIBUTION })
    }

    pub fn layout(&self) -> Result<&Layout> {
        self.layout.as_ref().ok_or(Error::MissingArtifact { step: step::LAYOUT })
    }

    /// Normalized feature values of `names` and the 1D representation,
    /// both restricted to labeled instances (node order).
    pub fn composite_inputs(&self, names: &[String]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let rep = self.representation()?;
        let rows: Vec<usize> = (0..rep.instance_ids.len()).filter(|&i| rep.class_of[i].is_some()).collect();
        let mut columns = Vec::with_capacity(names.len());
        for name in names {
            let col = self
                .features
                .column(name)
                .ok_or_else(|| Error::UnknownAttribute(name.clone()))?;
            columns.push(rows.iter().map(|&i| col.values[i]).collect());
        }
        Ok((columns, rows.iter().map(|&i| rep.values[i]).collect()))
    }

    /// Step 5: builds a composite of `names` resembling the 1D
    /// representation and appends it to the session.
    pub fn construct_composite(&mut self, names: &[String], measure: Measure) -> Result<&CompositeEntry> {
        if names.is_empty() {
            return Err(Error::InvalidArgument("select at least one attribute".into()));
        }
        let (columns, target) = self.composite_inputs(names)?;
        let variable = construct(names, &columns, &target, measure, &self.spearman)?;
        let strength = label_correlation_strength(variable.achieved_dependence, &self.strength_bands)?;
        self.composites.push(CompositeEntry { variable, strength });
        Ok(self.composites.last().expect("just pushed"))
    }

    pub fn discard_composite(&mut self, index: usize) -> Result<CompositeEntry> {
        if index >= self.composites.len() {
            return Err(Error::InvalidArgument(format!(
                "composite index {index} out of range ({} composites)",
                self.composites.len()
            )));
        }
        Ok(self.composites.remove(index))
    }

    /// Step 6: stores the selection and compares it against the remaining
    /// labeled instances. An empty selection compares class 0 with class 1.
    pub fn set_selection(&mut self, ids: Vec<String>, bins: usize) -> Result<Vec<DoubleHistogram>> {
        let unknown: Vec<String> = ids.iter().filter(|id| self.network.index_of(id).is_none()).cloned().collect();
        if !unknown.is_empty() {
            return Err(Error::UnknownNodes(unknown));
        }
        let mut seen = HashSet::new();
        let previous = std::mem::replace(
            &mut self.selection,
            ids.into_iter().filter(|id| seen.insert(id.clone())).collect(),
        );
        let result = self.histograms(bins);
        if result.is_err() {
            self.selection = previous;
        }
        result
    }

    /// Histograms for the current selection (see [`set_selection`](Self::set_selection)).
    pub fn histograms(&self, bins: usize) -> Result<Vec<DoubleHistogram>> {
        let (a, b) = self.comparison_groups();
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidArgument(
                "selection leaves one comparison group empty".into(),
            ));
        }
        ordered_histograms(&self.raw_features, &a, &b, bins)
    }

    /// Row indices of the two histogram groups.
    pub fn comparison_groups(&self) -> (Vec<usize>, Vec<usize>) {
        let ids = self.network.node_ids();
        if self.selection.is_empty() {
            let of = |c: Class| {
                (0..ids.len())
                    .filter(|&i| self.labeling.class_of(&ids[i]) == Some(c))
                    .collect::<Vec<_>>()
            };
            return (of(Class::Zero), of(Class::One));
        }
        let selected: HashSet<&str> = self.selection.iter().map(String::as_str).collect();
        let a = (0..ids.len()).filter(|&i| selected.contains(ids[i].as_str())).collect();
        let b = (0..ids.len())
            .filter(|&i| !selected.contains(ids[i].as_str()) && self.labeling.class_of(&ids[i]).is_some())
            .collect();
        (a, b)
    }
}

/// Loads the dataset named by `config` and runs Steps 1–4.
pub fn run_pipeline(config: SessionConfig) -> Result<AnalysisSession> {
    let network = MultivariateNetwork::load(&config.dataset).map_err(Error::in_step("loading dataset"))?;
    AnalysisSession::run(config, network)
}
