//! Acceptance suite. Criteria 1–7 run on synthetic fixtures; 8–12 need the released dataset
//! under `WEBQA_DATA_DIR` (`train.jsonl`, `test.jsonl`, and optionally `annotations.jsonl`,
//! `embeddings.txt`, `idf.tsv`) and are skipped otherwise.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use webqa::annotate::Segment;
use webqa::annotate::{Annotator, EmbeddingTable, HeuristicAnnotator, SidecarAnnotator};
use webqa::candidates::{score_and_truncate, Candidate, IdfTable, Mention};
use webqa::corpus::{load_dataset, Example, ResultSet};
use webqa::eval::{average_metrics, evaluate, run_ablations, EvalOptions, SplitSpec};
use webqa::features::FeatureConfig;
use webqa::model::{objective, score_sparse, softmax, FeaturizedExample, Model};
use webqa::pipeline::{
    annotate_all, candidate_recall, extract_candidates, idf_from_snippets, predict, run_splits,
    train, vocabulary, AnnotatedExample, PipelineConfig,
};
use webqa::predict::{predict_set, PredictionRecord};

enum Outcome {
    Pass(String),
    Fail(String),
    Skipped(String),
}

type Check = Result<String, String>;
type Row<'a> = (&'a str, &'a [&'a str], &'a [&'a str], &'a [&'a str]);
type SyntheticCheck = (&'static str, fn() -> Check);
type DataCheck = (&'static str, fn(&Dataset) -> Check);

fn toy_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/toy.jsonl")
}

fn softmax_sums() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=200);
        let spread = [1.0, 50.0, 1e3][rng.random_range(0..3)];
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(-spread..spread)).collect();
        let p = softmax(&scores);
        if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err("probability outside [0, 1]".into());
        }
        worst = worst.max((p.iter().sum::<f64>() - 1.0).abs());
        let items = scores
            .iter()
            .enumerate()
            .map(|(i, s)| (candidate(&format!("c{i}"), 1, 1), vec![(0u32, *s)]))
            .collect();
        let scored = score_sparse(&[1.0], items);
        worst = worst.max((scored.iter().map(|s| s.probability).sum::<f64>() - 1.0).abs());
    }
    if worst <= 1e-9 {
        Ok(format!("max |sum - 1| = {worst:.1e} over 1000 sets"))
    } else {
        Err(format!("max |sum - 1| = {worst:.1e}"))
    }
}

fn random_instance(rng: &mut ChaCha8Rng) -> (FeaturizedExample, Vec<f64>, f64) {
    let dim = rng.random_range(1..=20);
    let n = rng.random_range(1..=10);
    let features = (0..n)
        .map(|_| {
            let mut idx: Vec<u32> = (0..dim as u32).filter(|_| rng.random_bool(0.4)).collect();
            idx.dedup();
            idx.into_iter()
                .map(|i| (i, rng.random_range(-2.0..2.0)))
                .collect()
        })
        .collect();
    let mut gold: Vec<bool> = (0..n).map(|_| rng.random_bool(0.3)).collect();
    let g = rng.random_range(0..n);
    gold[g] = true;
    let w = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let lambda = [0.0, 1e-3, 0.1][rng.random_range(0..3)];
    (
        FeaturizedExample {
            id: "x".into(),
            features,
            gold,
        },
        w,
        lambda,
    )
}

fn gradients_match() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (ex, w, lambda) = random_instance(&mut rng);
        let ex = [ex];
        let (_, grad) = objective(&w, lambda, &ex).map_err(|e| e.to_string())?;
        for j in 0..w.len() {
            let mut plus = w.clone();
            let mut minus = w.clone();
            plus[j] += h;
            minus[j] -= h;
            let fp = objective(&plus, lambda, &ex).map_err(|e| e.to_string())?.0;
            let fm = objective(&minus, lambda, &ex).map_err(|e| e.to_string())?.0;
            let numeric = (fp - fm) / (2.0 * h);
            let rel = (grad[j] - numeric).abs() / grad[j].abs().max(numeric.abs()).max(1.0);
            worst = worst.max(rel);
        }
    }
    if worst <= 1e-6 {
        Ok(format!("max relative error {worst:.1e} over 100 instances"))
    } else {
        Err(format!("max relative error {worst:.1e}"))
    }
}

fn candidate(text: &str, n: usize, tf: usize) -> Candidate {
    Candidate {
        text: text.into(),
        n,
        tf,
        tfidf: 0.0,
        mentions: (0..tf)
            .map(|i| Mention {
                snippet_rank: 1,
                segment: Segment::Body,
                start: i,
                end: i + n,
            })
            .collect(),
    }
}

fn top_k_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let vocab: Vec<String> = (0..30).map(|i| format!("w{i}")).collect();
    for pool in 0..50 {
        let docs = rng.random_range(1..200usize);
        let mut df: HashMap<String, usize> = HashMap::new();
        for w in &vocab {
            if rng.random_bool(0.8) {
                df.insert(w.clone(), rng.random_range(1..=docs));
            }
        }
        let idf = IdfTable::from_counts(docs, df.clone()).map_err(|e| e.to_string())?;
        let mut seen = BTreeSet::new();
        let mut cands = Vec::new();
        for _ in 0..rng.random_range(0..300) {
            let n = rng.random_range(1..=4);
            let text = (0..n)
                .map(|_| vocab.choose(&mut rng).unwrap().as_str())
                .collect::<Vec<_>>()
                .join(" ");
            if seen.insert(text.clone()) {
                cands.push(candidate(&text, n, rng.random_range(1..4)));
            }
        }
        let k = rng.random_range(1..=200);
        let oracle_idf =
            |w: &str| ((1.0 + docs as f64) / (1.0 + *df.get(w).unwrap_or(&0) as f64)).ln() + 1.0;
        let mut expected: Vec<(String, f64, usize)> = cands
            .iter()
            .map(|c| {
                let words: Vec<&str> = c.text.split(' ').collect();
                let mean = words.iter().map(|w| oracle_idf(w)).sum::<f64>() / words.len() as f64;
                (c.text.clone(), c.tf as f64 * mean, c.n)
            })
            .collect();
        expected.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap()
                .then(b.2.cmp(&a.2))
                .then(a.0.cmp(&b.0))
        });
        expected.truncate(k);
        let got = score_and_truncate(cands, &idf, k);
        if got.len() != expected.len() {
            return Err(format!(
                "pool {pool}: {} kept, oracle keeps {}",
                got.len(),
                expected.len()
            ));
        }
        for (g, e) in got.iter().zip(&expected) {
            if g.text != e.0 || (g.tfidf - e.1).abs() > 1e-12 {
                return Err(format!(
                    "pool {pool}: got {} ({}), oracle {} ({})",
                    g.text, g.tfidf, e.0, e.1
                ));
            }
        }
    }
    Ok("50 pools match the full-sort oracle".into())
}

fn example(id: &str, gold: &[&str]) -> Example {
    Example {
        id: id.into(),
        question: "q".into(),
        gold_answers: gold.iter().map(|s| s.to_string()).collect(),
        result_set: ResultSet::default(),
        tags: None,
    }
}

fn record(id: &str, answers: &[&str], ranking: &[&str]) -> PredictionRecord {
    PredictionRecord {
        id: id.into(),
        answers: answers.iter().map(|s| s.to_string()).collect(),
        scores: vec![0.0; answers.len()],
        ranking: ranking.iter().map(|s| s.to_string()).collect(),
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

fn metric_fixture() -> Check {
    let rows: [Row; 10] = [
        ("1", &["a"], &["a"], &["a", "b", "c"]),
        ("2", &["a"], &["b"], &["b", "a"]),
        ("3", &["a", "b"], &["a"], &["a", "c", "b"]),
        ("4", &["x"], &["a", "b"], &["a", "b", "c", "x"]),
        ("5", &["a"], &["a", "b"], &["a", "b"]),
        ("6", &["z"], &[], &[]),
        ("7", &["c"], &["a"], &["a", "b", "c"]),
        ("8", &["The Beatles"], &["the beatles"], &["the beatles"]),
        ("9", &["a", "b"], &["a", "b"], &["b", "a"]),
        ("10", &["q"], &["r"], &["r", "s", "t", "u", "q"]),
    ];
    let examples: Vec<Example> = rows.iter().map(|r| example(r.0, r.1)).collect();
    let preds: Vec<PredictionRecord> = rows.iter().map(|r| record(r.0, r.2, r.3)).collect();
    let all = evaluate(&preds, &examples, EvalOptions::default()).map_err(|e| e.to_string())?;
    let rr_sum = 1.0 + 0.5 + 1.0 + 0.25 + 1.0 + 0.0 + 1.0 / 3.0 + 1.0 + 1.0 + 0.2;
    let f1_sum = 1.0 + 0.0 + 2.0 / 3.0 + 0.0 + 2.0 / 3.0 + 0.0 + 0.0 + 1.0 + 1.0 + 0.0;
    if !(close(all.avg_f1, f1_sum / 10.0)
        && close(all.p_at_1, 0.5)
        && close(all.mrr, rr_sum / 10.0))
    {
        return Err(format!("all: {all:?}"));
    }
    let sub = evaluate(
        &preds,
        &examples,
        EvalOptions {
            subset_only: true,
            normalizer: None,
        },
    )
    .map_err(|e| e.to_string())?;
    if !(sub.n_examples == 9
        && close(sub.avg_f1, f1_sum / 9.0)
        && close(sub.p_at_1, 5.0 / 9.0)
        && close(sub.mrr, rr_sum / 9.0)
        && close(sub.candidate_recall, 0.9))
    {
        return Err(format!("subset: {sub:?}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for run in 0..200 {
        let n = rng.random_range(1..30);
        let mut ex = Vec::new();
        let mut pr = Vec::new();
        for i in 0..n {
            let id = i.to_string();
            let mut ranking: Vec<String> = (0..rng.random_range(0..8))
                .map(|j| format!("c{j}"))
                .collect();
            if !ranking.is_empty() && rng.random_bool(0.6) {
                let pos = rng.random_range(0..ranking.len());
                ranking[pos] = "gold".into();
            }
            let cut = rng.random_range(0..=ranking.len());
            ex.push(example(&id, &["gold"]));
            pr.push(PredictionRecord {
                id,
                answers: ranking[..cut].to_vec(),
                scores: vec![0.0; cut],
                ranking,
            });
        }
        for subset_only in [false, true] {
            let m = evaluate(
                &pr,
                &ex,
                EvalOptions {
                    subset_only,
                    normalizer: None,
                },
            )
            .map_err(|e| e.to_string())?;
            if m.mrr < m.p_at_1 {
                return Err(format!("run {run}: MRR {} < p@1 {}", m.mrr, m.p_at_1));
            }
        }
    }
    Ok(format!(
        "F1 {:.4} p@1 {:.4} MRR {:.4} match hand values; MRR >= p@1 on 400 runs",
        all.avg_f1, all.p_at_1, all.mrr
    ))
}

fn margin_monotone() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for run in 0..2000 {
        let n = rng.random_range(1..40);
        let items = (0..n)
            .map(|i| {
                let s = if rng.random_bool(0.2) {
                    1.0
                } else {
                    rng.random_range(-3.0..3.0)
                };
                (candidate(&format!("c{i}"), 1, 1), vec![(0u32, s)])
            })
            .collect();
        let scored = score_sparse(&[1.0], items);
        let mut margins: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..4.0)).collect();
        margins.push(0.0);
        margins.sort_by(f64::total_cmp);
        let sets: Vec<BTreeSet<String>> = margins
            .iter()
            .map(|&m| predict_set(&scored, m).map(|p| p.answers.into_iter().collect()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for w in sets.windows(2) {
            if !w[0].is_subset(&w[1]) {
                return Err(format!("run {run}: answer set shrank as the margin grew"));
            }
        }
    }
    Ok("2000 score vectors, 6 margins each".into())
}

fn toy_annotated() -> Result<Vec<AnnotatedExample>, String> {
    let raw = load_dataset(toy_path()).map_err(|e| e.to_string())?;
    annotate_all(&raw, &HeuristicAnnotator::default()).map_err(|e| e.to_string())
}

fn determinism() -> Check {
    let data = toy_annotated()?;
    let idf = idf_from_snippets(&data).map_err(|e| e.to_string())?;
    let emb = EmbeddingTable::default();
    let run = |threads: usize| -> Result<(Vec<u8>, Vec<PredictionRecord>), String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())?;
        pool.install(|| {
            let (model, _) =
                train(&data, &idf, &emb, &PipelineConfig::default()).map_err(|e| e.to_string())?;
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let path = dir.path().join("model.json");
            model.save(&path).map_err(|e| e.to_string())?;
            let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
            let reloaded = Model::load(&path).map_err(|e| e.to_string())?;
            let preds = predict(&reloaded, &data, &emb, 0.5).map_err(|e| e.to_string())?;
            Ok((bytes, preds))
        })
    };
    let a = run(1)?;
    let b = run(4)?;
    let c = run(4)?;
    if a.0 != b.0 || b.0 != c.0 {
        return Err("model files differ between runs".into());
    }
    let bits = |p: &[PredictionRecord]| -> Vec<(String, Vec<String>, Vec<u64>)> {
        p.iter()
            .map(|r| {
                (
                    r.id.clone(),
                    r.answers.clone(),
                    r.scores.iter().map(|s| s.to_bits()).collect(),
                )
            })
            .collect()
    };
    if bits(&a.1) != bits(&b.1) || bits(&b.1) != bits(&c.1) {
        return Err("predictions differ between runs".into());
    }
    Ok(format!(
        "3 runs (1 and 4 threads), {} model bytes identical",
        a.0.len()
    ))
}

fn synthetic_examples(rng: &mut ChaCha8Rng, n: usize) -> Vec<Example> {
    let words = [
        "the", "film", "actor", "Paris", "river", "who", "played", "in", "of", "Smith", "won",
        "2010", "St.", "-", "(", ")", "?", "New", "York", "a",
    ];
    let sentence = |rng: &mut ChaCha8Rng, lens: std::ops::Range<usize>| -> String {
        let len = rng.random_range(lens);
        (0..len)
            .map(|_| *words.choose(rng).unwrap())
            .collect::<Vec<_>>()
            .join(" ")
    };
    (0..n)
        .map(|i| {
            let snippets: Vec<(String, String)> = (0..rng.random_range(1..8))
                .map(|_| (sentence(rng, 0..6), sentence(rng, 0..25)))
                .collect();
            Example {
                id: format!("s{i}"),
                question: sentence(rng, 1..10),
                gold_answers: vec!["smith".into()],
                result_set: ResultSet::from_pairs(snippets).unwrap(),
                tags: None,
            }
        })
        .collect()
}

fn candidate_contract() -> Check {
    let mut data = toy_annotated()?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let synthetic = synthetic_examples(&mut rng, 200);
    data.extend(
        annotate_all(&synthetic, &HeuristicAnnotator::default()).map_err(|e| e.to_string())?,
    );
    let idf = idf_from_snippets(&data).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for e in &data {
        let q: Vec<String> = e
            .question
            .tokens
            .iter()
            .map(|t| t.text.to_lowercase())
            .collect();
        for c in extract_candidates(e, &idf, usize::MAX) {
            let toks: Vec<&str> = c.text.split(' ').collect();
            if !(1..=4).contains(&toks.len()) || toks.len() != c.n {
                return Err(format!("{}: bad length for `{}`", e.example.id, c.text));
            }
            if q.windows(toks.len())
                .any(|w| w.iter().map(String::as_str).eq(toks.iter().copied()))
            {
                return Err(format!(
                    "{}: `{}` appears in the question",
                    e.example.id, c.text
                ));
            }
            if c.mentions.len() != c.tf {
                return Err(format!(
                    "{}: `{}` has tf {} but {} mentions",
                    e.example.id,
                    c.text,
                    c.tf,
                    c.mentions.len()
                ));
            }
            for m in &c.mentions {
                let s = e
                    .snippets
                    .iter()
                    .find(|s| s.rank == m.snippet_rank)
                    .ok_or("mention of unknown snippet")?;
                let seg = if m.segment == Segment::Title {
                    &s.title
                } else {
                    &s.body
                };
                let text: Vec<String> = seg.tokens[m.start..m.end]
                    .iter()
                    .map(|t| t.text.to_lowercase())
                    .collect();
                if text.join(" ") != c.text {
                    return Err(format!(
                        "{}: mention text `{}` != `{}`",
                        e.example.id,
                        text.join(" "),
                        c.text
                    ));
                }
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} candidates over {} examples", data.len()))
}

struct Dataset {
    train: Vec<AnnotatedExample>,
    test: Vec<AnnotatedExample>,
    idf: IdfTable,
    embeddings: EmbeddingTable,
}

fn load_released() -> Result<Dataset, String> {
    let dir = PathBuf::from(
        std::env::var("WEBQA_DATA_DIR").map_err(|_| "WEBQA_DATA_DIR is not set".to_string())?,
    );
    let (train_path, test_path) = (dir.join("train.jsonl"), dir.join("test.jsonl"));
    for p in [&train_path, &test_path] {
        if !p.exists() {
            return Err(format!("{} not found", p.display()));
        }
    }
    let train_raw = load_dataset(&train_path).map_err(|e| e.to_string())?;
    let test_raw = load_dataset(&test_path).map_err(|e| e.to_string())?;
    let sidecar = dir.join("annotations.jsonl");
    let annotator: Box<dyn Annotator> = if sidecar.exists() {
        Box::new(SidecarAnnotator::load(&sidecar).map_err(|e| e.to_string())?)
    } else {
        Box::new(HeuristicAnnotator::default())
    };
    let train = annotate_all(&train_raw, annotator.as_ref()).map_err(|e| e.to_string())?;
    let test = annotate_all(&test_raw, annotator.as_ref()).map_err(|e| e.to_string())?;
    let idf_path = dir.join("idf.tsv");
    let idf = if idf_path.exists() {
        IdfTable::load(&idf_path).map_err(|e| e.to_string())?
    } else {
        idf_from_snippets(&train).map_err(|e| e.to_string())?
    };
    let emb_path = dir.join("embeddings.txt");
    let embeddings = if emb_path.exists() {
        let mut vocab = vocabulary(&train);
        vocab.extend(vocabulary(&test));
        EmbeddingTable::load(&emb_path, Some(&vocab)).map_err(|e| e.to_string())?
    } else {
        EmbeddingTable::default()
    };
    Ok(Dataset {
        train,
        test,
        idf,
        embeddings,
    })
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn dev_parts(data: &Dataset) -> Result<Vec<Vec<AnnotatedExample>>, String> {
    let refs: Vec<&AnnotatedExample> = data.train.iter().collect();
    Ok(webqa::eval::make_splits(&refs, &SplitSpec::default())
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|s| s.dev.into_iter().cloned().collect())
        .collect())
}

fn recall_check(data: &Dataset) -> Check {
    let config = PipelineConfig::default();
    let devs = dev_parts(data)?;
    let dev = 100.0
        * devs
            .iter()
            .map(|d| candidate_recall(d, &data.idf, config.k))
            .sum::<f64>()
        / devs.len() as f64;
    let test = 100.0 * candidate_recall(&data.test, &data.idf, config.k);
    let msg = format!("dev {dev:.1}% (65.9 ± 3), test {test:.1}% (62.7 ± 3)");
    if within(dev, 65.9, 3.0) && within(test, 62.7, 3.0) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn filter_check(data: &Dataset) -> Check {
    let config = PipelineConfig::default();
    let kept = data
        .train
        .iter()
        .filter(|e| {
            webqa::pipeline::has_gold(&e.example, &extract_candidates(e, &data.idf, config.k))
        })
        .count();
    let msg = format!("{kept} of {} kept (856 ± 25)", data.train.len());
    if (831..=881).contains(&kept) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn dev_subset_f1(data: &Dataset, features: &FeatureConfig) -> Result<f64, String> {
    let config = PipelineConfig {
        features: features.clone(),
        ..PipelineConfig::default()
    };
    let runs = run_splits(
        &data.train,
        &data.idf,
        &data.embeddings,
        &config,
        0.5,
        &SplitSpec::default(),
        None,
    )
    .map_err(|e| e.to_string())?;
    let subset: Vec<_> = runs.into_iter().map(|r| r.subset).collect();
    Ok(100.0 * average_metrics(&subset).map_or(0.0, |m| m.avg_f1))
}

fn dev_f1_check(data: &Dataset) -> Check {
    let start = Instant::now();
    let f1 = dev_subset_f1(data, &FeatureConfig::default())?;
    let msg = format!(
        "subset dev F1 {f1:.1} (53.6 ± 5) in {:.0}s",
        start.elapsed().as_secs_f64()
    );
    if within(f1, 53.6, 5.0) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn ablation_check(data: &Dataset) -> Check {
    let templates: Vec<String> = ["max_ne", "ne_common", "google_rank", "in_quest", "tfidf"]
        .map(String::from)
        .to_vec();
    let (base, rows) = run_ablations(&FeatureConfig::default(), &templates, |c| {
        dev_subset_f1(data, c).map_err(webqa::Error::Config)
    })
    .map_err(|e| e.to_string())?;
    let worst = &rows[0];
    let msg = format!(
        "base {base:.1}; largest drop {} {:+.1}",
        worst.template, worst.delta
    );
    if worst.template == "tfidf" && worst.delta < -6.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn test_metrics_check(data: &Dataset) -> Check {
    let (model, _) = train(
        &data.train,
        &data.idf,
        &data.embeddings,
        &PipelineConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let preds = predict(&model, &data.test, &data.embeddings, 0.5).map_err(|e| e.to_string())?;
    let gold: Vec<Example> = data.test.iter().map(|e| e.example.clone()).collect();
    let m = evaluate(&preds, &gold, EvalOptions::default()).map_err(|e| e.to_string())?;
    let (f1, p1, mrr) = (100.0 * m.avg_f1, 100.0 * m.p_at_1, 100.0 * m.mrr);
    let msg = format!("F1 {f1:.1} (32.6), p@1 {p1:.1} (33.5), MRR {mrr:.1} (42.4), ± 5");
    if within(f1, 32.6, 5.0) && within(p1, 33.5, 5.0) && within(mrr, 42.4, 5.0) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn outcome(check: Check) -> Outcome {
    match check {
        Ok(m) => Outcome::Pass(m),
        Err(m) => Outcome::Fail(m),
    }
}

fn main() {
    let start = Instant::now();
    let synthetic: [SyntheticCheck; 7] = [
        ("softmax normalization", softmax_sums),
        ("gradient correctness", gradients_match),
        ("tf-idf top-K oracle", top_k_oracle),
        ("metric oracles", metric_fixture),
        ("margin-rule monotonicity", margin_monotone),
        ("determinism", determinism),
        ("candidate contract", candidate_contract),
    ];
    let mut results: Vec<(usize, &str, Outcome)> = synthetic
        .iter()
        .enumerate()
        .map(|(i, (name, f))| (i + 1, *name, outcome(f())))
        .collect();

    let data_checks: [DataCheck; 5] = [
        ("candidate-extraction recall", recall_check),
        ("training-set filtering", filter_check),
        ("subset dev F1", dev_f1_check),
        ("ablation direction", ablation_check),
        ("test-set metrics", test_metrics_check),
    ];
    let data = load_released();
    for (i, (name, f)) in data_checks.iter().enumerate() {
        let o = match &data {
            Ok(d) => outcome(f(d)),
            Err(reason) => Outcome::Skipped(format!("released dataset unavailable: {reason}")),
        };
        results.push((i + 8, *name, o));
    }

    let mut failed = 0;
    for (n, name, o) in &results {
        let (status, detail) = match o {
            Outcome::Pass(m) => ("PASS", m),
            Outcome::Fail(m) => {
                failed += 1;
                ("FAIL", m)
            }
            Outcome::Skipped(m) => ("SKIPPED", m),
        };
        println!("criterion {n:>2} [{status}] {name}: {detail}");
    }
    println!(
        "acceptance finished in {:.1}s",
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
