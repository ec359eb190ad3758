//! Average F1, precision@1 and MRR over predicted answer sets, plus the development-split,
//! ablation and compositionality reports built on them.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotate::match_key;
use crate::corpus::{CompositionalityTag, Example};
use crate::error::{Error, Result};
use crate::features::{ablate, FeatureConfig};
use crate::predict::PredictionRecord;

/// Answer normalization: lowercase, drop a leading article, collapse whitespace, strip
/// terminal punctuation, then map through an optional alias table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Normalizer {
    aliases: HashMap<String, String>,
}

const ARTICLES: [&str; 3] = ["a ", "an ", "the "];

fn normalize_surface(text: &str) -> String {
    let mut s = text
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ");
    loop {
        let before = s.len();
        while s.ends_with(['.', ',', '!', '?', ';', ':']) {
            s.pop();
        }
        s = s.trim_end().to_string();
        for a in ARTICLES {
            if let Some(rest) = s.strip_prefix(a) {
                s = rest.trim_start().to_string();
            }
        }
        if s.len() == before {
            return s;
        }
    }
}

impl Normalizer {
    /// Builds an alias table; keys and targets are normalized and chains are resolved.
    pub fn new<I, K, V>(aliases: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let raw: HashMap<String, String> = aliases
            .into_iter()
            .map(|(k, v)| (normalize_surface(k.as_ref()), normalize_surface(v.as_ref())))
            .filter(|(k, v)| k != v)
            .collect();
        let mut resolved = HashMap::new();
        for k in raw.keys() {
            let mut target = &raw[k];
            let mut seen = HashSet::from([k]);
            while let Some(next) = raw.get(target) {
                if !seen.insert(target) {
                    break;
                }
                target = next;
            }
            resolved.insert(k.clone(), target.clone());
        }
        Normalizer { aliases: resolved }
    }

    /// Reads `surface<TAB>canonical` lines.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('\t').ok_or_else(|| {
                Error::format(
                    "alias table",
                    format!("line {}: expected surface<TAB>canonical", i + 1),
                )
            })?;
            pairs.push((k.to_string(), v.to_string()));
        }
        Ok(Normalizer::new(pairs))
    }

    pub fn normalize(&self, text: &str) -> String {
        let s = normalize_surface(text);
        match self.aliases.get(&s) {
            Some(canonical) => canonical.clone(),
            None => s,
        }
    }
}

/// Normalizes one answer string without aliases.
pub fn normalize_answer(text: &str) -> String {
    normalize_surface(text)
}

fn answer_key(text: &str, normalizer: Option<&Normalizer>) -> String {
    match normalizer {
        Some(n) => match_key(&n.normalize(text)),
        None => match_key(text),
    }
}

/// Set F1 between predicted and gold answers under lowercased exact match.
pub fn f1_for_example<P, G>(predicted: &[P], gold: &[G], normalizer: Option<&Normalizer>) -> f64
where
    P: AsRef<str>,
    G: AsRef<str>,
{
    let pred: HashSet<String> = predicted
        .iter()
        .map(|p| answer_key(p.as_ref(), normalizer))
        .collect();
    let gold: HashSet<String> = gold
        .iter()
        .map(|g| answer_key(g.as_ref(), normalizer))
        .collect();
    if pred.is_empty() || gold.is_empty() {
        return 0.0;
    }
    let hit = pred.intersection(&gold).count() as f64;
    if hit == 0.0 {
        return 0.0;
    }
    let p = hit / pred.len() as f64;
    let r = hit / gold.len() as f64;
    2.0 * p * r / (p + r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    All,
    Subset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub condition: Condition,
    pub avg_f1: f64,
    pub p_at_1: f64,
    pub mrr: f64,
    #[serde(rename = "n")]
    pub n_examples: usize,
    pub candidate_recall: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EvalOptions<'a> {
    /// Restrict to examples whose gold answer is among the ranked candidates.
    pub subset_only: bool,
    pub normalizer: Option<&'a Normalizer>,
}

/// Per-example scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleScore {
    pub id: String,
    pub f1: f64,
    pub hit_at_1: bool,
    pub reciprocal_rank: f64,
    /// Some gold answer appears among the ranked candidates.
    pub passed: bool,
}

pub fn score_example(
    prediction: &PredictionRecord,
    example: &Example,
    normalizer: Option<&Normalizer>,
) -> ExampleScore {
    let gold: HashSet<String> = example
        .gold_answers
        .iter()
        .map(|g| answer_key(g, normalizer))
        .collect();
    let ranking = if prediction.ranking.is_empty() {
        &prediction.answers
    } else {
        &prediction.ranking
    };
    let first = ranking
        .iter()
        .position(|c| gold.contains(&answer_key(c, normalizer)));
    ExampleScore {
        id: example.id.clone(),
        f1: f1_for_example(&prediction.answers, &example.gold_answers, normalizer),
        hit_at_1: first == Some(0),
        reciprocal_rank: first.map_or(0.0, |r| 1.0 / (r + 1) as f64),
        passed: first.is_some(),
    }
}

/// Pairs each example with its prediction by id.
pub fn align<'a>(
    predictions: &'a [PredictionRecord],
    examples: &'a [Example],
) -> Result<Vec<(&'a PredictionRecord, &'a Example)>> {
    let by_id: HashMap<&str, &PredictionRecord> =
        predictions.iter().map(|p| (p.id.as_str(), p)).collect();
    let mut out = Vec::with_capacity(examples.len());
    for e in examples {
        let p = by_id.get(e.id.as_str()).ok_or_else(|| Error::IdMismatch {
            prediction: "<missing>".into(),
            example: e.id.clone(),
        })?;
        out.push((*p, e));
    }
    if predictions.len() != examples.len() {
        let ids: HashSet<&str> = examples.iter().map(|e| e.id.as_str()).collect();
        if let Some(extra) = predictions.iter().find(|p| !ids.contains(p.id.as_str())) {
            return Err(Error::IdMismatch {
                prediction: extra.id.clone(),
                example: "<missing>".into(),
            });
        }
    }
    Ok(out)
}

pub fn evaluate(
    predictions: &[PredictionRecord],
    examples: &[Example],
    options: EvalOptions<'_>,
) -> Result<Metrics> {
    let scores: Vec<ExampleScore> = align(predictions, examples)?
        .into_iter()
        .map(|(p, e)| score_example(p, e, options.normalizer))
        .collect();
    let recall = mean(scores.iter().map(|s| f64::from(u8::from(s.passed))));
    let kept: Vec<&ExampleScore> = scores
        .iter()
        .filter(|s| !options.subset_only || s.passed)
        .collect();
    Ok(Metrics {
        condition: if options.subset_only {
            Condition::Subset
        } else {
            Condition::All
        },
        avg_f1: mean(kept.iter().map(|s| s.f1)),
        p_at_1: mean(kept.iter().map(|s| f64::from(u8::from(s.hit_at_1)))),
        mrr: mean(kept.iter().map(|s| s.reciprocal_rank)),
        n_examples: kept.len(),
        candidate_recall: recall,
    })
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Averages several metric reports field by field.
pub fn average_metrics(runs: &[Metrics]) -> Option<Metrics> {
    let first = runs.first()?;
    let m = |f: fn(&Metrics) -> f64| mean(runs.iter().map(f));
    Some(Metrics {
        condition: first.condition,
        avg_f1: m(|r| r.avg_f1),
        p_at_1: m(|r| r.p_at_1),
        mrr: m(|r| r.mrr),
        n_examples: (mean(runs.iter().map(|r| r.n_examples as f64))).round() as usize,
        candidate_recall: m(|r| r.candidate_recall),
    })
}

/// One metrics record per line.
pub fn metrics_report(metrics: &[Metrics]) -> String {
    metrics
        .iter()
        .map(|m| serde_json::to_string(m).expect("metrics serialize") + "\n")
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub seed: u64,
    pub n_splits: usize,
    pub train_fraction: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            seed: 0,
            n_splits: 5,
            train_fraction: 0.7,
        }
    }
}

impl SplitSpec {
    pub fn train_size(&self, n: usize) -> usize {
        ((self.train_fraction * n as f64) + 1e-9).floor() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split<T> {
    pub train: Vec<T>,
    pub dev: Vec<T>,
}

/// `n_splits` seeded shuffles, each cut into train and dev parts.
pub fn make_splits<T: Clone>(items: &[T], spec: &SplitSpec) -> Result<Vec<Split<T>>> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::Config("train_fraction must lie in (0, 1)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let cut = spec.train_size(items.len());
    Ok((0..spec.n_splits)
        .map(|_| {
            let mut order: Vec<usize> = (0..items.len()).collect();
            order.shuffle(&mut rng);
            let pick = |ix: &[usize]| ix.iter().map(|&i| items[i].clone()).collect();
            Split {
                train: pick(&order[..cut]),
                dev: pick(&order[cut..]),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub template: String,
    pub f1: f64,
    pub delta: f64,
}

/// Retrains with each template removed and reports F1 against the full configuration,
/// largest drop first. `score` trains and evaluates under a configuration.
pub fn run_ablations<F>(
    base: &FeatureConfig,
    templates: &[String],
    mut score: F,
) -> Result<(f64, Vec<AblationRow>)>
where
    F: FnMut(&FeatureConfig) -> Result<f64>,
{
    let configs = templates
        .iter()
        .map(|t| ablate(base, t).map(|c| (t.clone(), c)))
        .collect::<Result<Vec<_>>>()?;
    let base_f1 = score(base)?;
    let mut rows = Vec::with_capacity(configs.len());
    for (template, config) in configs {
        let f1 = score(&config)?;
        rows.push(AblationRow {
            template,
            f1,
            delta: f1 - base_f1,
        });
    }
    rows.sort_by(|a, b| {
        a.delta
            .total_cmp(&b.delta)
            .then_with(|| a.template.cmp(&b.template))
    });
    Ok((base_f1, rows))
}

pub fn ablation_table(base_f1: f64, rows: &[AblationRow]) -> String {
    let mut s = format!("template\tf1\tdelta\nfull\t{:.4}\t\n", base_f1);
    for r in rows {
        let _ = writeln!(s, "{}\t{:.4}\t{:+.4}", r.template, r.f1, r.delta);
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeRow {
    pub tag: CompositionalityTag,
    pub count_passed: usize,
    pub count_failed: usize,
    /// Mean F1 over the examples of this type that passed candidate extraction.
    pub avg_f1: Option<f64>,
}

/// Per-type passed/failed counts and F1. Multi-tagged examples count once per tag;
/// untagged examples are skipped with a warning.
pub fn compositionality_report(
    predictions: &[PredictionRecord],
    examples: &[Example],
    normalizer: Option<&Normalizer>,
) -> Result<Vec<TypeRow>> {
    let mut acc: BTreeMap<CompositionalityTag, (usize, usize, f64)> = BTreeMap::new();
    let mut untagged = 0;
    for (p, e) in align(predictions, examples)? {
        let Some(tags) = e.tags.as_ref().filter(|t| !t.is_empty()) else {
            untagged += 1;
            continue;
        };
        let s = score_example(p, e, normalizer);
        for &t in tags {
            let row = acc.entry(t).or_default();
            if s.passed {
                row.0 += 1;
                row.2 += s.f1;
            } else {
                row.1 += 1;
            }
        }
    }
    if untagged > 0 {
        log::warn!("{untagged} examples carry no compositionality tags and were excluded");
    }
    Ok(CompositionalityTag::ALL
        .iter()
        .filter_map(|t| {
            acc.get(t).map(|&(passed, failed, f1)| TypeRow {
                tag: *t,
                count_passed: passed,
                count_failed: failed,
                avg_f1: (passed > 0).then(|| f1 / passed as f64),
            })
        })
        .collect())
}

pub fn compositionality_table(rows: &[TypeRow]) -> String {
    let mut s = String::from("type\tpassed\tfailed\tavg_f1\n");
    for r in rows {
        let f1 = r
            .avg_f1
            .map_or_else(|| "-".to_string(), |f| format!("{f:.4}"));
        let _ = writeln!(s, "{}\t{}\t{}\t{f1}", r.tag, r.count_passed, r.count_failed);
    }
    s
}
