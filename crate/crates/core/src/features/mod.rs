//! Sparse named features for a candidate, averaged over its mentions.

mod config;
mod index;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::annotate::{is_year, wh_word, Annotation, CommonWords, EmbeddingTable, StopList};
use crate::candidates::{AnnotatedSnippet, Candidate, Mention};
use crate::error::{Error, Result};

pub use config::{ablate, FeatureConfig, RankBin, Template};
pub use index::{build_index, remap_vector, FeatureIndex, SparseVector};

/// Named feature values. Zero entries are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector {
    entries: BTreeMap<String, f64>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> f64 {
        self.entries.get(name).copied().unwrap_or(0.0)
    }

    /// Sets a value, dropping it if zero. Panics on non-finite values.
    pub fn set(&mut self, name: impl Into<String>, value: f64) {
        assert!(value.is_finite(), "feature values must be finite");
        let name = name.into();
        if value == 0.0 {
            self.entries.remove(&name);
        } else {
            self.entries.insert(name, value);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<(String, f64)> for FeatureVector {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        let mut v = FeatureVector::new();
        for (k, x) in iter {
            v.set(k, x);
        }
        v
    }
}

/// Equal-frequency tf-idf bin boundaries per span length, fit on training candidates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TfidfBins {
    /// `boundaries[n - 1]` holds the interior boundaries for span length `n`.
    pub boundaries: Vec<Vec<f64>>,
}

impl TfidfBins {
    /// Fits `bins` quantile bins for each span length 1..=4.
    pub fn fit<'a>(candidates: impl IntoIterator<Item = &'a Candidate>, bins: usize) -> Self {
        let mut by_n: Vec<Vec<f64>> = vec![Vec::new(); crate::candidates::MAX_NGRAM];
        for c in candidates {
            if (1..=by_n.len()).contains(&c.n) {
                by_n[c.n - 1].push(c.tfidf);
            }
        }
        let boundaries = by_n
            .into_iter()
            .map(|mut v| {
                if v.is_empty() {
                    return Vec::new();
                }
                v.sort_by(f64::total_cmp);
                (1..bins).map(|j| v[j * v.len() / bins]).collect()
            })
            .collect();
        TfidfBins { boundaries }
    }

    /// Bin index in `0..bins`: the number of boundaries not above `value`.
    pub fn bin(&self, n: usize, value: f64) -> usize {
        match self.boundaries.get(n.wrapping_sub(1)) {
            Some(b) => b.partition_point(|&x| x <= value),
            None => 0,
        }
    }
}

/// Everything besides the example itself that featurization reads.
#[derive(Debug, Clone, Copy)]
pub struct Resources<'a> {
    pub common: &'a CommonWords,
    pub embeddings: &'a EmbeddingTable,
    pub stop: &'a StopList,
    pub config: &'a FeatureConfig,
    pub bins: &'a TfidfBins,
}

struct QuestionContext {
    lowers: BTreeSet<String>,
    /// Distinct non-stop, non-punctuation words, in question order.
    content: Vec<String>,
    wh: &'static str,
    ne_labels: BTreeSet<String>,
    ne_phrases: Vec<Vec<String>>,
    common_present: Vec<String>,
}

impl QuestionContext {
    fn new(q: &Annotation, res: &Resources<'_>) -> Self {
        let lowers: BTreeSet<String> = q
            .tokens
            .iter()
            .filter(|t| !t.punct)
            .map(|t| t.lower.clone())
            .collect();
        let mut content = Vec::new();
        for t in &q.tokens {
            if !t.punct && !res.stop.contains(&t.lower) && !content.contains(&t.lower) {
                content.push(t.lower.clone());
            }
        }
        let common_present = res
            .common
            .words()
            .iter()
            .filter(|w| lowers.contains(*w))
            .cloned()
            .collect();
        QuestionContext {
            lowers,
            content,
            wh: wh_word(q).unwrap_or("none"),
            ne_labels: q.ne_spans.iter().map(|s| s.label.clone()).collect(),
            ne_phrases: q
                .ne_spans
                .iter()
                .map(|s| {
                    q.tokens[s.start..s.end]
                        .iter()
                        .map(|t| t.lower.clone())
                        .collect()
                })
                .collect(),
            common_present,
        }
    }
}

/// Featurizes the candidates of one example, caching word similarities to question words.
pub struct Featurizer<'a> {
    res: Resources<'a>,
    q: QuestionContext,
    snippets: &'a [AnnotatedSnippet],
    sims: HashMap<String, Vec<f64>>,
}

impl<'a> Featurizer<'a> {
    /// `snippets` must be sorted by ascending rank.
    pub fn new(
        question: &Annotation,
        snippets: &'a [AnnotatedSnippet],
        res: Resources<'a>,
    ) -> Self {
        Featurizer {
            q: QuestionContext::new(question, &res),
            res,
            snippets,
            sims: HashMap::new(),
        }
    }

    /// Cosine of `word` with each question content word.
    fn sims(&mut self, word: &str) -> &[f64] {
        if !self.sims.contains_key(word) {
            let row = self
                .q
                .content
                .iter()
                .map(|q| self.res.embeddings.similarity(q, word))
                .collect();
            self.sims.insert(word.to_string(), row);
        }
        &self.sims[word]
    }

    fn segment_of(&self, m: &Mention) -> Result<&'a Annotation> {
        let oob = |len| Error::MentionOutOfBounds {
            mention: format!("{:?}[{}, {})", m.segment, m.start, m.end),
            len,
            rank: m.snippet_rank,
        };
        let snippets: &'a [AnnotatedSnippet] = self.snippets;
        let s = snippets
            .binary_search_by_key(&m.snippet_rank, |s| s.rank)
            .map(|i| &snippets[i])
            .map_err(|_| oob(0))?;
        let ann = s.segment(m.segment).ok_or_else(|| oob(0))?;
        if m.start >= m.end || m.end > ann.len() {
            return Err(oob(ann.len()));
        }
        Ok(ann)
    }

    /// Mean of the per-mention feature vectors.
    pub fn featurize(&mut self, c: &Candidate) -> Result<FeatureVector> {
        let mut sum: BTreeMap<String, f64> = BTreeMap::new();
        if c.mentions.is_empty() {
            return Ok(FeatureVector::new());
        }
        let cfg = self.res.config;
        let toks: Vec<&str> = c.tokens().collect();

        let mut anns = Vec::with_capacity(c.mentions.len());
        for m in &c.mentions {
            anns.push(self.segment_of(m)?);
        }

        // Candidate-level templates take the same value for every mention.
        let mut whole: Vec<(String, f64)> = Vec::new();
        if cfg.enabled(Template::SpanLength) {
            whole.push((format!("span_length:{}", c.n), 1.0));
        }
        if cfg.enabled(Template::Tfidf) {
            whole.push((format!("tfidf:raw:n{}", c.n), c.tfidf));
            let b = self.res.bins.bin(c.n, c.tfidf);
            whole.push((format!("tfidf:bin:n{}:b{}", c.n, b), 1.0));
        }
        if cfg.enabled(Template::Capitalized) {
            let caps = c
                .mentions
                .iter()
                .zip(&anns)
                .filter(|(m, a)| {
                    a.tokens[m.start..m.end]
                        .iter()
                        .filter(|t| !t.punct)
                        .all(|t| t.is_capitalized())
                })
                .count();
            let majority = 2 * caps >= c.mentions.len();
            whole.push(("capitalized".into(), f64::from(u8::from(majority))));
        }
        let frac = |pred: &dyn Fn(&str) -> bool| {
            toks.iter().filter(|t| pred(t)).count() as f64 / toks.len() as f64
        };
        if cfg.enabled(Template::StopWord) {
            whole.push(("stop_word".into(), frac(&|t| self.res.stop.contains(t))));
        }
        let in_quest = frac(&|t| self.q.lowers.contains(t));
        if cfg.enabled(Template::InQuest) {
            whole.push(("in_quest".into(), in_quest));
        }
        if cfg.enabled(Template::InQuestCommon) {
            for w in &self.q.common_present {
                whole.push((format!("in_quest_common:{w}"), in_quest));
            }
        }
        if cfg.enabled(Template::InQuestDist) && !self.q.content.is_empty() {
            let mut max = f64::NEG_INFINITY;
            let (mut total, mut count) = (0.0, 0usize);
            for t in toks.iter().filter(|t| t.chars().any(char::is_alphanumeric)) {
                for &s in self.sims(t) {
                    max = max.max(s);
                    total += s;
                    count += 1;
                }
            }
            if count > 0 {
                whole.push(("in_quest_dist:max".into(), max));
                whole.push(("in_quest_dist:avg".into(), total / count as f64));
            }
        }
        if cfg.enabled(Template::Year) && c.n == 1 && is_year(&c.text) {
            let y: u32 = c.text.parse().expect("years are numeric");
            whole.push((format!("year:{}", cfg.year_bin(y)), 1.0));
        }

        for (m, ann) in c.mentions.iter().zip(&anns) {
            for (k, v) in self.mention_features(m, ann) {
                *sum.entry(k).or_default() += v;
            }
        }
        let n = c.mentions.len() as f64;
        let mut out: FeatureVector = sum.into_iter().map(|(k, v)| (k, v / n)).collect();
        for (k, v) in whole {
            out.set(k, v);
        }
        Ok(out)
    }

    fn mention_features(&mut self, m: &Mention, ann: &Annotation) -> Vec<(String, f64)> {
        let cfg = self.res.config;
        let mut f = Vec::new();

        let covering = ann
            .ne_spans
            .iter()
            .filter(|s| s.contains(m.start, m.end))
            .min_by_key(|s| s.end - s.start)
            .map(|s| s.label.as_str())
            .unwrap_or("O");
        let overlapping: BTreeSet<&str> = ann
            .ne_spans
            .iter()
            .filter(|s| s.overlaps(m.start, m.end))
            .map(|s| s.label.as_str())
            .collect();

        if cfg.enabled(Template::WhNe) {
            f.push((format!("wh_ne:{}|{covering}", self.q.wh), 1.0));
        }
        if cfg.enabled(Template::WhPos) {
            let tags = ann.pos_tags[m.start..m.end].join("_");
            f.push((format!("wh_pos:{}|{tags}", self.q.wh), 1.0));
        }
        if cfg.enabled(Template::NeNe) {
            for ql in &self.q.ne_labels {
                for ml in &overlapping {
                    f.push((format!("ne_ne:{ql}|{ml}"), 1.0));
                }
            }
        }
        if cfg.enabled(Template::NeCommon) {
            for ml in &overlapping {
                for w in &self.q.common_present {
                    f.push((format!("ne_common:{ml}|{w}"), 1.0));
                }
            }
        }
        if cfg.enabled(Template::MaxNe)
            && ann
                .ne_spans
                .iter()
                .any(|s| s.maximal && s.start == m.start && s.end == m.end)
        {
            f.push(("max_ne".into(), 1.0));
        }
        if cfg.enabled(Template::InTitle) && m.segment == crate::annotate::Segment::Title {
            f.push(("in_title".into(), 1.0));
        }
        if cfg.enabled(Template::GoogleRank) {
            if let Some(b) = cfg.rank_bin(m.snippet_rank) {
                f.push((format!("google_rank:{}", b.label()), 1.0));
            }
        }

        let want_match = cfg.enabled(Template::CtxtMatch);
        let want_sim = cfg.enabled(Template::CtxtSimilarity);
        if (want_match || want_sim) && !self.q.content.is_empty() {
            let w = cfg.context_window;
            let left = m.start.saturating_sub(w)..m.start;
            let right = m.end..(m.end + w).min(ann.len());
            let context: Vec<(usize, usize)> = left
                .map(|i| (i, m.start - i))
                .chain(right.map(|i| (i, i - m.end + 1)))
                .filter(|&(i, _)| !ann.tokens[i].punct)
                .collect();
            let nq = self.q.content.len();
            let mut best_match = vec![0.0f64; nq];
            let mut best_sim = vec![f64::NEG_INFINITY; nq];
            for &(i, dist) in &context {
                let weight = cfg.weight(dist);
                let word = &ann.tokens[i].lower;
                if want_match {
                    for (j, q) in self.q.content.iter().enumerate() {
                        if q == word {
                            best_match[j] = best_match[j].max(weight);
                        }
                    }
                }
                if want_sim {
                    let row = self.sims(word).to_vec();
                    for (j, s) in row.into_iter().enumerate() {
                        best_sim[j] = best_sim[j].max(s * weight);
                    }
                }
            }
            if want_match {
                push_max_avg(&mut f, "ctxt_match", &best_match);
            }
            if want_sim && !context.is_empty() {
                push_max_avg(&mut f, "ctxt_similarity", &best_sim);
            }
        }

        if cfg.enabled(Template::CtxtEntity) && self.ctxt_entity(m, ann) {
            f.push(("ctxt_entity".into(), 1.0));
        }
        f
    }

    /// A common word sits strictly between the mention and an occurrence of a question NE.
    fn ctxt_entity(&self, m: &Mention, ann: &Annotation) -> bool {
        let lowers: Vec<&str> = ann.lowers().collect();
        let common = |range: std::ops::Range<usize>| {
            lowers[range].iter().any(|w| self.res.common.contains(w))
        };
        self.q.ne_phrases.iter().any(|phrase| {
            let len = phrase.len();
            if len == 0 || len > lowers.len() {
                return false;
            }
            (0..=lowers.len() - len).any(|s| {
                let e = s + len;
                let hit = lowers[s..e].iter().zip(phrase).all(|(a, b)| *a == b);
                hit && ((e <= m.start && common(e..m.start)) || (s >= m.end && common(m.end..s)))
            })
        })
    }
}

fn push_max_avg(f: &mut Vec<(String, f64)>, name: &str, values: &[f64]) {
    if values.is_empty() {
        return;
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let avg = values.iter().sum::<f64>() / values.len() as f64;
    f.push((format!("{name}:max"), max));
    f.push((format!("{name}:avg"), avg));
}

/// Featurizes a single candidate. Prefer [`Featurizer`] for many candidates of one example.
pub fn featurize(
    question: &Annotation,
    candidate: &Candidate,
    snippets: &[AnnotatedSnippet],
    res: Resources<'_>,
) -> Result<FeatureVector> {
    Featurizer::new(question, snippets, res).featurize(candidate)
}
