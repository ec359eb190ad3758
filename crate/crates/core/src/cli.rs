//! Command-line front end: `train`, `predict`, `eval`, `ablate`, `analyze` and `scrape`.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::annotate::{Annotator, EmbeddingTable, HeuristicAnnotator, SidecarAnnotator};
use crate::candidates::{IdfTable, DEFAULT_K};
use crate::corpus::{load_dataset, store_dataset, write_atomic, Example};
use crate::error::Error;
use crate::eval::{
    ablation_table, average_metrics, compositionality_report, compositionality_table, evaluate,
    metrics_report, run_ablations, EvalOptions, Metrics, Normalizer, SplitSpec,
};
use crate::features::{FeatureConfig, Template};
use crate::model::{Model, DEFAULT_LAMBDA};
use crate::pipeline::{
    annotate_all, idf_from_snippets, predict, run_splits, train, vocabulary, AnnotatedExample,
    PipelineConfig,
};
use crate::predict::{read_predictions, write_predictions, PredictionRecord, DEFAULT_MARGIN};
use crate::websearch::{build_dataset, load_questions, HttpBackend, SearchConfig, SystemClock};

/// Templates reported by default in ablation runs.
pub const DEFAULT_ABLATIONS: [&str; 5] =
    ["max_ne", "ne_common", "google_rank", "in_quest", "tfidf"];

#[derive(Debug, Parser)]
#[command(
    name = "webqa",
    version,
    about = "Answer questions from web search snippets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and write it to --out.
    Train(TrainArgs),
    /// Predict answer sets with a trained model.
    Predict(PredictArgs),
    /// Report avg F1, p@1 and MRR.
    Eval(EvalArgs),
    /// Retrain with feature templates removed.
    Ablate(AblateArgs),
    /// Break F1 down by compositionality type.
    Analyze(AnalyzeArgs),
    /// Build a dataset by querying a search API.
    Scrape(ScrapeArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Line-delimited JSON dataset.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Precomputed token/POS/NE annotations; the built-in tagger is used otherwise.
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Word vectors, one word and its floats per line.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainingArgs {
    /// Document-frequency table; built from the dataset snippets when absent.
    #[arg(long)]
    pub idf: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// TOML feature configuration.
    #[arg(long)]
    pub feature_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub training: TrainingArgs,
    /// Disable a feature template (repeatable).
    #[arg(long)]
    pub ablate: Vec<String>,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    pub margin: f64,
    /// Predictions file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Predictions to score.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Predict with this model, then score.
    #[arg(long, conflicts_with = "predictions")]
    pub model: Option<PathBuf>,
    /// Train and score on N seeded 70/30 splits of the dataset.
    #[arg(long, num_args = 0..=1, default_missing_value = "5", conflicts_with_all = ["predictions", "model"])]
    pub splits: Option<usize>,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    pub margin: f64,
    /// Report only the subset whose gold answer is among the candidates.
    #[arg(long)]
    pub subset_only: bool,
    /// Normalize answers, optionally with a `surface<TAB>canonical` alias file.
    #[arg(long, num_args = 0..=1)]
    pub normalize: Option<Option<PathBuf>>,
    /// Metrics file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub training: TrainingArgs,
    /// Template to remove (repeatable); defaults to the five headline templates.
    #[arg(long)]
    pub ablate: Vec<String>,
    #[arg(long, default_value_t = 5)]
    pub splits: usize,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    pub margin: f64,
    #[arg(long, num_args = 0..=1)]
    pub normalize: Option<Option<PathBuf>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    #[arg(long, conflicts_with = "predictions")]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    pub margin: f64,
    #[arg(long, num_args = 0..=1)]
    pub normalize: Option<Option<PathBuf>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScrapeArgs {
    /// Line-delimited JSON of {id, question, answers, tags?}.
    #[arg(long)]
    pub questions: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// TOML search configuration; the API key is read from WEBQA_SEARCH_API_KEY.
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Run(#[from] Error),
}

impl CliError {
    /// 2 for bad invocations or unreadable inputs, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(e) => match e {
                Error::Io { .. }
                | Error::Record { .. }
                | Error::DuplicateId(_)
                | Error::MissingAnnotation(_)
                | Error::DimensionMismatch { .. }
                | Error::EmptyCorpus
                | Error::UnknownTemplate { .. }
                | Error::Version { .. }
                | Error::Format { .. }
                | Error::IdMismatch { .. }
                | Error::Config(_) => 2,
                Error::Search(crate::websearch::SearchError::MissingKey) => 2,
                _ => 1,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn require(flag: &str, path: &Path) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "{flag}: {} does not exist",
            path.display()
        )))
    }
}

fn require_opt(flag: &str, path: Option<&PathBuf>) -> CliResult<()> {
    path.map_or(Ok(()), |p| require(flag, p))
}

fn check_data(d: &DataArgs) -> CliResult<()> {
    require("--dataset", &d.dataset)?;
    require_opt("--annotations", d.annotations.as_ref())?;
    require_opt("--embeddings", d.embeddings.as_ref())
}

fn check_training(t: &TrainingArgs) -> CliResult<()> {
    require_opt("--idf", t.idf.as_ref())?;
    require_opt("--feature-config", t.feature_config.as_ref())?;
    if !(t.lambda.is_finite() && t.lambda >= 0.0) {
        return Err(CliError::Usage(format!(
            "--lambda must be >= 0, got {}",
            t.lambda
        )));
    }
    if t.k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    Ok(())
}

fn check_margin(margin: f64) -> CliResult<()> {
    if margin.is_finite() && margin >= 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--margin must be >= 0, got {margin}"
        )))
    }
}

fn check_normalize(n: &Option<Option<PathBuf>>) -> CliResult<()> {
    require_opt("--normalize", n.as_ref().and_then(|p| p.as_ref()))
}

fn check_ablations(names: &[String]) -> CliResult<()> {
    for n in names {
        n.parse::<Template>()?;
    }
    Ok(())
}

struct Loaded {
    examples: Vec<AnnotatedExample>,
    embeddings: EmbeddingTable,
}

fn load_data(d: &DataArgs) -> CliResult<Loaded> {
    let raw = load_dataset(&d.dataset)?;
    log::info!("loaded {} examples from {}", raw.len(), d.dataset.display());
    let examples = match &d.annotations {
        Some(p) => annotate_all(&raw, &SidecarAnnotator::load(p)?)?,
        None => annotate_all(&raw, &HeuristicAnnotator::default() as &dyn Annotator)?,
    };
    let embeddings = match &d.embeddings {
        Some(p) => EmbeddingTable::load(p, Some(&vocabulary(&examples)))?,
        None => {
            log::warn!("no --embeddings given; similarity features will be zero");
            EmbeddingTable::default()
        }
    };
    Ok(Loaded {
        examples,
        embeddings,
    })
}

fn pipeline_config(t: &TrainingArgs, ablate: &[String]) -> CliResult<PipelineConfig> {
    let mut features = match &t.feature_config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Io {
                path: p.clone(),
                source: e,
            })?;
            toml::from_str::<FeatureConfig>(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => FeatureConfig::default(),
    };
    for name in ablate {
        features = crate::features::ablate(&features, name)?;
    }
    features.validate()?;
    Ok(PipelineConfig {
        k: t.k,
        features,
        lambda: t.lambda,
        ..PipelineConfig::default()
    })
}

fn load_idf(t: &TrainingArgs, examples: &[AnnotatedExample]) -> CliResult<IdfTable> {
    Ok(match &t.idf {
        Some(p) => IdfTable::load(p)?,
        None => idf_from_snippets(examples)?,
    })
}

fn load_normalizer(n: &Option<Option<PathBuf>>) -> CliResult<Option<Normalizer>> {
    Ok(match n {
        None => None,
        Some(None) => Some(Normalizer::default()),
        Some(Some(p)) => Some(Normalizer::load(p)?),
    })
}

fn emit(out: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write_atomic(p, |w| w.write_all(text.as_bytes()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::Io {
                    path: "<stdout>".into(),
                    source: e,
                })?;
        }
    }
    Ok(())
}

fn golds(examples: &[AnnotatedExample]) -> Vec<Example> {
    examples.iter().map(|e| e.example.clone()).collect()
}

fn cmd_train(a: &TrainArgs) -> CliResult<()> {
    check_data(&a.data)?;
    check_training(&a.training)?;
    check_ablations(&a.ablate)?;
    let config = pipeline_config(&a.training, &a.ablate)?;
    let data = load_data(&a.data)?;
    let idf = load_idf(&a.training, &data.examples)?;
    let (model, report) = train(&data.examples, &idf, &data.embeddings, &config)?;
    model.save(&a.out)?;
    log::info!("wrote {}", a.out.display());
    emit(
        None,
        &(serde_json::to_string(&report).expect("report serializes") + "\n"),
    )
}

fn predictions_for(
    model_path: &Path,
    data: &Loaded,
    margin: f64,
) -> CliResult<Vec<PredictionRecord>> {
    let model = Model::load(model_path)?;
    Ok(predict(&model, &data.examples, &data.embeddings, margin)?)
}

fn cmd_predict(a: &PredictArgs) -> CliResult<()> {
    check_data(&a.data)?;
    require("--model", &a.model)?;
    check_margin(a.margin)?;
    let data = load_data(&a.data)?;
    let preds = predictions_for(&a.model, &data, a.margin)?;
    write_predictions(&a.out, &preds)?;
    log::info!("wrote {} predictions to {}", preds.len(), a.out.display());
    Ok(())
}

fn cmd_eval(a: &EvalArgs) -> CliResult<()> {
    if a.predictions.is_none() && a.model.is_none() && a.splits.is_none() {
        return Err(CliError::Usage(
            "eval needs --predictions <file> (or --model <file>, or --splits)".into(),
        ));
    }
    check_data(&a.data)?;
    require_opt("--predictions", a.predictions.as_ref())?;
    require_opt("--model", a.model.as_ref())?;
    check_training(&a.training)?;
    check_margin(a.margin)?;
    check_normalize(&a.normalize)?;
    let normalizer = load_normalizer(&a.normalize)?;
    let wanted = |all: Metrics, subset: Metrics| -> Vec<Metrics> {
        if a.subset_only {
            vec![subset]
        } else {
            vec![all, subset]
        }
    };
    let metrics = if let Some(n) = a.splits {
        if n == 0 {
            return Err(CliError::Usage("--splits must be at least 1".into()));
        }
        let config = pipeline_config(&a.training, &[])?;
        let data = load_data(&a.data)?;
        let idf = load_idf(&a.training, &data.examples)?;
        let spec = SplitSpec {
            seed: a.training.seed,
            n_splits: n,
            ..SplitSpec::default()
        };
        let runs = run_splits(
            &data.examples,
            &idf,
            &data.embeddings,
            &config,
            a.margin,
            &spec,
            normalizer.as_ref(),
        )?;
        let all: Vec<Metrics> = runs.iter().map(|r| r.all.clone()).collect();
        let subset: Vec<Metrics> = runs.iter().map(|r| r.subset.clone()).collect();
        wanted(
            average_metrics(&all).expect("n >= 1"),
            average_metrics(&subset).expect("n >= 1"),
        )
    } else {
        let (preds, examples) = match (&a.predictions, &a.model) {
            (Some(p), _) => (read_predictions(p)?, load_dataset(&a.data.dataset)?),
            (None, Some(m)) => {
                let data = load_data(&a.data)?;
                (predictions_for(m, &data, a.margin)?, golds(&data.examples))
            }
            (None, None) => unreachable!("checked above"),
        };
        let opts = |subset_only| EvalOptions {
            subset_only,
            normalizer: normalizer.as_ref(),
        };
        wanted(
            evaluate(&preds, &examples, opts(false))?,
            evaluate(&preds, &examples, opts(true))?,
        )
    };
    emit(a.out.as_ref(), &metrics_report(&metrics))
}

fn cmd_ablate(a: &AblateArgs) -> CliResult<()> {
    check_data(&a.data)?;
    check_training(&a.training)?;
    check_margin(a.margin)?;
    check_normalize(&a.normalize)?;
    let templates: Vec<String> = if a.ablate.is_empty() {
        DEFAULT_ABLATIONS.iter().map(|s| s.to_string()).collect()
    } else {
        a.ablate.clone()
    };
    check_ablations(&templates)?;
    if a.splits == 0 {
        return Err(CliError::Usage("--splits must be at least 1".into()));
    }
    let base = pipeline_config(&a.training, &[])?;
    let normalizer = load_normalizer(&a.normalize)?;
    let data = load_data(&a.data)?;
    let idf = load_idf(&a.training, &data.examples)?;
    let spec = SplitSpec {
        seed: a.training.seed,
        n_splits: a.splits,
        ..SplitSpec::default()
    };
    let (base_f1, rows) = run_ablations(&base.features, &templates, |features| {
        let config = PipelineConfig {
            features: features.clone(),
            ..base.clone()
        };
        let runs = run_splits(
            &data.examples,
            &idf,
            &data.embeddings,
            &config,
            a.margin,
            &spec,
            normalizer.as_ref(),
        )?;
        let subset: Vec<Metrics> = runs.into_iter().map(|r| r.subset).collect();
        Ok(average_metrics(&subset).map_or(0.0, |m| m.avg_f1))
    })?;
    emit(a.out.as_ref(), &ablation_table(base_f1, &rows))
}

fn cmd_analyze(a: &AnalyzeArgs) -> CliResult<()> {
    check_data(&a.data)?;
    check_margin(a.margin)?;
    check_normalize(&a.normalize)?;
    let (preds, examples) = match (&a.predictions, &a.model) {
        (Some(p), _) => {
            require("--predictions", p)?;
            (read_predictions(p)?, load_dataset(&a.data.dataset)?)
        }
        (None, Some(m)) => {
            require("--model", m)?;
            let data = load_data(&a.data)?;
            (predictions_for(m, &data, a.margin)?, golds(&data.examples))
        }
        (None, None) => {
            return Err(CliError::Usage(
                "analyze needs --predictions <file> or --model <file>".into(),
            ))
        }
    };
    let normalizer = load_normalizer(&a.normalize)?;
    let rows = compositionality_report(&preds, &examples, normalizer.as_ref())?;
    emit(a.out.as_ref(), &compositionality_table(&rows))
}

fn cmd_scrape(a: &ScrapeArgs) -> CliResult<()> {
    require("--questions", &a.questions)?;
    require("--config", &a.config)?;
    let config = SearchConfig::load(&a.config)?;
    let questions = load_questions(&a.questions)?;
    let backend = HttpBackend::new(&config).map_err(Error::from)?;
    let report = build_dataset(&questions, &backend, &config, &SystemClock::default())?;
    store_dataset(&a.out, &report.examples)?;
    log::info!(
        "{} records ({} fetched, {} cached), {} failures",
        report.examples.len(),
        report.network_fetches,
        report.cache_hits,
        report.failures.len()
    );
    for (id, err) in &report.failures {
        log::warn!("{id}: {err}");
    }
    Ok(())
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Ablate(a) => cmd_ablate(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Scrape(a) => cmd_scrape(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_parse() {
        let cli =
            Cli::try_parse_from(["webqa", "eval", "--dataset", "d", "--splits", "--normalize"])
                .unwrap();
        let Command::Eval(a) = cli.command else {
            panic!()
        };
        assert_eq!(a.splits, Some(5));
        assert_eq!(a.normalize, Some(None));
        assert_eq!(a.training.k, 140);
        assert_eq!(a.margin, 0.5);
        assert!(Cli::try_parse_from([
            "webqa",
            "eval",
            "--dataset",
            "d",
            "--predictions",
            "p",
            "--model",
            "m"
        ])
        .is_err());
    }

    #[test]
    fn default_ablations_are_templates() {
        assert!(check_ablations(&DEFAULT_ABLATIONS.map(String::from)).is_ok());
        assert!(matches!(
            check_ablations(&["bogus".into()]),
            Err(CliError::Run(Error::UnknownTemplate { .. }))
        ));
    }
}
