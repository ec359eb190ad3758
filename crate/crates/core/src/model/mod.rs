//! Log-linear ranking over the candidates of one question, trained by L2-penalized
//! conditional maximum likelihood.

mod io;
pub mod lbfgs;
mod objective;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::annotate::CommonWords;
use crate::candidates::{Candidate, IdfTable};
use crate::error::Result;
use crate::features::{FeatureConfig, FeatureIndex, FeatureVector, SparseVector, TfidfBins};

pub use io::MODEL_VERSION;
pub use lbfgs::{LbfgsResult, LbfgsSettings};
pub use objective::{
    dot, example_loss_and_gradient, loss_and_gradient, objective, softmax, FeaturizedExample,
};

pub const DEFAULT_LAMBDA: f64 = 1e-3;

/// Frozen artifacts needed to featurize new questions the way training did.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelResources {
    pub common: CommonWords,
    pub bins: TfidfBins,
    pub idf: IdfTable,
    pub config: FeatureConfig,
    /// Candidates kept per question.
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub weights: Vec<f64>,
    pub lambda: f64,
    pub index: FeatureIndex,
    pub resources: ModelResources,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub candidate: Candidate,
    pub score: f64,
    pub probability: f64,
}

/// Descending score, then ascending text.
pub fn score_order(a: &ScoredCandidate, b: &ScoredCandidate) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.candidate.text.cmp(&b.candidate.text))
}

/// Scores and normalizes one question's candidates; output is best first.
pub fn score_sparse(
    weights: &[f64],
    items: Vec<(Candidate, SparseVector)>,
) -> Vec<ScoredCandidate> {
    let scores: Vec<f64> = items.iter().map(|(_, x)| dot(x, weights)).collect();
    let probs = softmax(&scores);
    let mut out: Vec<ScoredCandidate> = items
        .into_iter()
        .zip(scores.into_iter().zip(probs))
        .map(|((candidate, _), (score, probability))| ScoredCandidate {
            candidate,
            score,
            probability,
        })
        .collect();
    out.sort_by(score_order);
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSettings {
    pub lambda: f64,
    pub optimizer: LbfgsSettings,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            lambda: DEFAULT_LAMBDA,
            optimizer: LbfgsSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub weights: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

/// Maximizes the penalized log-likelihood from `theta = 0`.
pub fn train_weights(
    examples: &[FeaturizedExample],
    dimension: usize,
    settings: &TrainSettings,
) -> Result<TrainOutcome> {
    let r = lbfgs::maximize(
        |w| objective(w, settings.lambda, examples),
        vec![0.0; dimension],
        settings.optimizer,
    )?;
    Ok(TrainOutcome {
        weights: r.x,
        objective: r.value,
        iterations: r.iterations,
        converged: r.converged,
        trace: r.trace,
    })
}

impl Model {
    /// Trains weights over a frozen index and bundles them with the resources.
    pub fn train(
        examples: &[FeaturizedExample],
        index: FeatureIndex,
        resources: ModelResources,
        settings: &TrainSettings,
    ) -> Result<(Model, TrainOutcome)> {
        let outcome = train_weights(examples, index.len(), settings)?;
        let model = Model {
            weights: outcome.weights.clone(),
            lambda: settings.lambda,
            index,
            resources,
        };
        Ok((model, outcome))
    }

    /// Scores named feature vectors; names outside the index are ignored.
    pub fn score(&self, items: Vec<(Candidate, FeatureVector)>) -> Vec<ScoredCandidate> {
        let items = items
            .into_iter()
            .map(|(c, v)| {
                let x = self.index.lookup_vector(&v);
                (c, x)
            })
            .collect();
        score_sparse(&self.weights, items)
    }

    pub fn weight(&self, name: &str) -> Option<f64> {
        self.index.get(name).map(|i| self.weights[i as usize])
    }
}
