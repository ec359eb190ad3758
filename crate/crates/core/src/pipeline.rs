//! End-to-end composition: annotate, extract, featurize, train, predict.

use rayon::prelude::*;
use serde::Serialize;

use crate::annotate::{
    compute_common_words, Annotation, Annotator, CommonWords, EmbeddingTable, Segment, StopList,
    TextKey,
};
use crate::candidates::{
    build_idf, extract_ngrams, filter_question_overlap, score_and_truncate, AnnotatedSnippet,
    Candidate, IdfTable, DEFAULT_K,
};
use crate::corpus::Example;
use crate::error::Result;
use crate::eval::{evaluate, make_splits, EvalOptions, Metrics, Normalizer, SplitSpec};
use crate::features::{
    remap_vector, FeatureConfig, FeatureIndex, Featurizer, Resources, TfidfBins,
};
use crate::model::{FeaturizedExample, LbfgsSettings, Model, ModelResources, TrainSettings};
use crate::predict::{predict_set, PredictionRecord};

/// Examples featurized in parallel per batch before being indexed in order.
const BATCH: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedExample {
    pub example: Example,
    pub question: Annotation,
    /// Ascending rank.
    pub snippets: Vec<AnnotatedSnippet>,
}

pub fn annotate_example(example: &Example, provider: &dyn Annotator) -> Result<AnnotatedExample> {
    let id = example.id.as_str();
    let question = provider.annotate(
        &TextKey {
            example_id: id,
            segment: Segment::Question,
            rank: None,
        },
        &example.question,
    )?;
    let snippets = example
        .result_set
        .snippets()
        .iter()
        .map(|s| {
            let key = |segment| TextKey {
                example_id: id,
                segment,
                rank: Some(s.rank),
            };
            Ok(AnnotatedSnippet {
                rank: s.rank,
                title: provider.annotate(&key(Segment::Title), &s.title)?,
                body: provider.annotate(&key(Segment::Body), &s.body)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(AnnotatedExample {
        example: example.clone(),
        question,
        snippets,
    })
}

/// Annotates in parallel; output order matches input order.
pub fn annotate_all(
    examples: &[Example],
    provider: &dyn Annotator,
) -> Result<Vec<AnnotatedExample>> {
    examples
        .par_iter()
        .map(|e| annotate_example(e, provider))
        .collect()
}

/// Document frequencies with every snippet title+body as one document.
pub fn idf_from_snippets(examples: &[AnnotatedExample]) -> Result<IdfTable> {
    build_idf(examples.iter().flat_map(|e| {
        e.snippets.iter().map(|s| {
            s.title
                .tokens
                .iter()
                .chain(&s.body.tokens)
                .filter(|t| !t.punct)
                .map(|t| t.lower.as_str())
        })
    }))
}

/// Extract, filter against the question, score and keep the top `k`.
pub fn extract_candidates(example: &AnnotatedExample, idf: &IdfTable, k: usize) -> Vec<Candidate> {
    let all = extract_ngrams(&example.snippets);
    let filtered = filter_question_overlap(all, &example.question);
    score_and_truncate(filtered, idf, k)
}

pub fn has_gold(example: &Example, candidates: &[Candidate]) -> bool {
    let gold = example.gold_keys();
    candidates.iter().any(|c| gold.contains(&c.text))
}

/// Fraction of examples with a gold answer among their top-`k` candidates.
pub fn candidate_recall(examples: &[AnnotatedExample], idf: &IdfTable, k: usize) -> f64 {
    if examples.is_empty() {
        return 0.0;
    }
    let hits = examples
        .par_iter()
        .filter(|e| has_gold(&e.example, &extract_candidates(e, idf, k)))
        .count();
    hits as f64 / examples.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub k: usize,
    pub features: FeatureConfig,
    pub lambda: f64,
    pub optimizer: LbfgsSettings,
    pub common_words: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            k: DEFAULT_K,
            features: FeatureConfig::default(),
            lambda: crate::model::DEFAULT_LAMBDA,
            optimizer: LbfgsSettings::default(),
            common_words: CommonWords::DEFAULT_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    pub examples: usize,
    pub kept: usize,
    pub dropped: usize,
    pub features: usize,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn resources<'a>(
    common: &'a CommonWords,
    embeddings: &'a EmbeddingTable,
    config: &'a FeatureConfig,
    bins: &'a TfidfBins,
) -> Resources<'a> {
    Resources {
        common,
        embeddings,
        stop: StopList::english(),
        config,
        bins,
    }
}

/// Trains on examples with at least one gold answer among their candidates.
pub fn train(
    examples: &[AnnotatedExample],
    idf: &IdfTable,
    embeddings: &EmbeddingTable,
    config: &PipelineConfig,
) -> Result<(Model, TrainReport)> {
    config.features.validate()?;
    let candidates: Vec<Vec<Candidate>> = examples
        .par_iter()
        .map(|e| extract_candidates(e, idf, config.k))
        .collect();
    let kept: Vec<(&AnnotatedExample, Vec<Candidate>)> = examples
        .iter()
        .zip(candidates)
        .filter(|(e, c)| has_gold(&e.example, c))
        .collect();
    log::info!(
        "{} of {} training examples kept",
        kept.len(),
        examples.len()
    );
    let questions: Vec<&str> = examples
        .iter()
        .map(|e| e.example.question.as_str())
        .collect();
    let common = compute_common_words(&questions, StopList::english(), config.common_words);
    let bins = TfidfBins::fit(kept.iter().flat_map(|(_, c)| c), config.features.tfidf_bins);
    let res = resources(&common, embeddings, &config.features, &bins);

    let mut index = FeatureIndex::new();
    let mut featurized = Vec::with_capacity(kept.len());
    for batch in kept.chunks(BATCH) {
        let vectors = batch
            .par_iter()
            .map(|(e, cands)| {
                let mut f = Featurizer::new(&e.question, &e.snippets, res);
                cands
                    .iter()
                    .map(|c| f.featurize(c))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for ((e, cands), vs) in batch.iter().zip(vectors) {
            let gold = e.example.gold_keys();
            featurized.push(FeaturizedExample {
                id: e.example.id.clone(),
                features: vs.iter().map(|v| index.vectorize(v)).collect(),
                gold: cands.iter().map(|c| gold.contains(&c.text)).collect(),
            });
        }
    }
    let remap = index.sort_and_freeze();
    for ex in &mut featurized {
        for x in &mut ex.features {
            remap_vector(x, &remap);
        }
    }

    let resources = ModelResources {
        common,
        bins,
        idf: idf.clone(),
        config: config.features.clone(),
        k: config.k,
    };
    let settings = TrainSettings {
        lambda: config.lambda,
        optimizer: config.optimizer,
    };
    let (model, outcome) = Model::train(&featurized, index, resources, &settings)?;
    let report = TrainReport {
        examples: examples.len(),
        kept: featurized.len(),
        dropped: examples.len() - featurized.len(),
        features: model.index.len(),
        objective: outcome.objective,
        iterations: outcome.iterations,
        converged: outcome.converged,
    };
    Ok((model, report))
}

/// Predicts an answer set per example; examples without candidates get empty records.
pub fn predict(
    model: &Model,
    examples: &[AnnotatedExample],
    embeddings: &EmbeddingTable,
    margin: f64,
) -> Result<Vec<PredictionRecord>> {
    let r = &model.resources;
    let res = resources(&r.common, embeddings, &r.config, &r.bins);
    examples
        .par_iter()
        .map(|e| {
            let cands = extract_candidates(e, &r.idf, r.k);
            if cands.is_empty() {
                return Ok(PredictionRecord::empty(e.example.id.clone()));
            }
            let mut f = Featurizer::new(&e.question, &e.snippets, res);
            let items = cands
                .into_iter()
                .map(|c| f.featurize(&c).map(|v| (c, v)))
                .collect::<Result<Vec<_>>>()?;
            let scored = model.score(items);
            Ok(PredictionRecord::new(
                e.example.id.clone(),
                &predict_set(&scored, margin)?,
            ))
        })
        .collect()
}

/// Every lowercased token in the examples, for loading only the embeddings needed.
pub fn vocabulary(examples: &[AnnotatedExample]) -> std::collections::HashSet<String> {
    let mut vocab = std::collections::HashSet::new();
    for e in examples {
        let texts =
            std::iter::once(&e.question).chain(e.snippets.iter().flat_map(|s| [&s.title, &s.body]));
        for a in texts {
            vocab.extend(
                a.tokens
                    .iter()
                    .filter(|t| !t.punct)
                    .map(|t| t.lower.clone()),
            );
        }
    }
    vocab
}

/// Dev metrics of one train/dev split under both conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitRun {
    pub all: Metrics,
    pub subset: Metrics,
    pub train: TrainReport,
}

/// Trains on each split's train part and evaluates on its dev part.
pub fn run_splits(
    examples: &[AnnotatedExample],
    idf: &IdfTable,
    embeddings: &EmbeddingTable,
    config: &PipelineConfig,
    margin: f64,
    spec: &SplitSpec,
    normalizer: Option<&Normalizer>,
) -> Result<Vec<SplitRun>> {
    let refs: Vec<&AnnotatedExample> = examples.iter().collect();
    make_splits(&refs, spec)?
        .into_iter()
        .enumerate()
        .map(|(i, split)| {
            let train_set: Vec<AnnotatedExample> = split.train.into_iter().cloned().collect();
            let dev: Vec<AnnotatedExample> = split.dev.into_iter().cloned().collect();
            let (model, report) = train(&train_set, idf, embeddings, config)?;
            let preds = predict(&model, &dev, embeddings, margin)?;
            let gold: Vec<Example> = dev.into_iter().map(|e| e.example).collect();
            let all = evaluate(
                &preds,
                &gold,
                EvalOptions {
                    subset_only: false,
                    normalizer,
                },
            )?;
            let subset = evaluate(
                &preds,
                &gold,
                EvalOptions {
                    subset_only: true,
                    normalizer,
                },
            )?;
            log::info!(
                "split {}: dev F1 {:.4} (subset {:.4})",
                i + 1,
                all.avg_f1,
                subset.avg_f1
            );
            Ok(SplitRun {
                all,
                subset,
                train: report,
            })
        })
        .collect()
}
