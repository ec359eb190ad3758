//! Token-level annotations consumed by the feature templates: tokens, POS tags, named
//! entity spans, stop words, wh-words, common question words and word embeddings.

mod embeddings;
pub mod heuristic;
mod tokenize;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use embeddings::{cosine, EmbeddingTable};
pub use tokenize::{is_year, match_key, tokenize, Segment, Token};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeSpan {
    pub start: usize,
    pub end: usize,
    pub label: String,
    /// Not strictly contained in another span of the same annotation.
    #[serde(default)]
    pub maximal: bool,
}

impl NeSpan {
    pub fn new(start: usize, end: usize, label: impl Into<String>) -> Self {
        NeSpan {
            start,
            end,
            label: label.into(),
            maximal: false,
        }
    }

    pub fn contains(&self, start: usize, end: usize) -> bool {
        self.start <= start && end <= self.end
    }

    pub fn overlaps(&self, start: usize, end: usize) -> bool {
        self.start < end && start < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Annotation {
    pub tokens: Vec<Token>,
    pub pos_tags: Vec<String>,
    pub ne_spans: Vec<NeSpan>,
}

impl Annotation {
    /// Builds an annotation and recomputes the maximal-span flags.
    ///
    /// Panics if the POS tags are not aligned with the tokens or a span is out of bounds.
    pub fn new(tokens: Vec<Token>, pos_tags: Vec<String>, mut ne_spans: Vec<NeSpan>) -> Self {
        assert_eq!(
            tokens.len(),
            pos_tags.len(),
            "POS tags must align with tokens"
        );
        for s in &ne_spans {
            assert!(
                s.start < s.end && s.end <= tokens.len(),
                "NE span out of bounds"
            );
        }
        mark_maximal(&mut ne_spans);
        Annotation {
            tokens,
            pos_tags,
            ne_spans,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Lowercased tokens in `[start, end)` joined by spaces.
    pub fn span_text(&self, start: usize, end: usize) -> String {
        self.tokens[start..end]
            .iter()
            .map(|t| t.lower.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn lowers(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.lower.as_str())
    }
}

fn mark_maximal(spans: &mut [NeSpan]) {
    let bounds: Vec<(usize, usize)> = spans.iter().map(|s| (s.start, s.end)).collect();
    for s in spans.iter_mut() {
        s.maximal = !bounds
            .iter()
            .any(|&(a, b)| a <= s.start && s.end <= b && (a, b) != (s.start, s.end));
    }
}

/// Identifies one annotated piece of text: the question, or a snippet title/body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TextKey<'a> {
    pub example_id: &'a str,
    pub segment: Segment,
    /// Snippet rank; `None` for the question.
    pub rank: Option<u32>,
}

impl fmt::Display for TextKey<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let seg = match self.segment {
            Segment::Title => "title",
            Segment::Body => "body",
            Segment::Question => "question",
        };
        match self.rank {
            Some(r) => write!(f, "{}/{seg}/{r}", self.example_id),
            None => write!(f, "{}/{seg}", self.example_id),
        }
    }
}

pub trait Annotator: Send + Sync {
    fn annotate(&self, key: &TextKey<'_>, text: &str) -> Result<Annotation>;
}

/// Annotates `text` with the given provider.
pub fn annotate(key: &TextKey<'_>, text: &str, provider: &dyn Annotator) -> Result<Annotation> {
    provider.annotate(key, text)
}

/// Rule-based tagger, see [`heuristic`].
#[derive(Debug, Clone, Copy)]
pub struct HeuristicAnnotator<'a> {
    stop: &'a StopList,
}

impl<'a> HeuristicAnnotator<'a> {
    pub fn new(stop: &'a StopList) -> Self {
        HeuristicAnnotator { stop }
    }
}

impl Default for HeuristicAnnotator<'static> {
    fn default() -> Self {
        HeuristicAnnotator::new(StopList::english())
    }
}

impl Annotator for HeuristicAnnotator<'_> {
    fn annotate(&self, key: &TextKey<'_>, text: &str) -> Result<Annotation> {
        Ok(heuristic::annotate_text(text, key.segment, self.stop))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SidecarRecord {
    id: String,
    segment: Segment,
    #[serde(default)]
    rank: Option<u32>,
    tokens: Vec<String>,
    pos: Vec<String>,
    #[serde(default)]
    ne: Vec<SidecarSpan>,
}

#[derive(Deserialize)]
struct SidecarSpan {
    start: usize,
    end: usize,
    label: String,
}

/// Precomputed annotations loaded from a line-delimited file keyed by
/// (example id, segment, snippet rank). Text passed to [`Annotator::annotate`] is ignored.
#[derive(Debug, Default)]
pub struct SidecarAnnotator {
    entries: HashMap<(String, Segment, Option<u32>), Annotation>,
}

impl SidecarAnnotator {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut entries = HashMap::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: SidecarRecord = serde_json::from_str(&line).map_err(|e| Error::Record {
                line: i + 1,
                field: "<sidecar>".into(),
                message: e.to_string(),
            })?;
            let annotation = Self::build(&rec).map_err(|message| Error::Record {
                line: i + 1,
                field: "<sidecar>".into(),
                message,
            })?;
            let rank = if rec.segment == Segment::Question {
                None
            } else {
                rec.rank
            };
            entries.insert((rec.id, rec.segment, rank), annotation);
        }
        Ok(SidecarAnnotator { entries })
    }

    fn build(rec: &SidecarRecord) -> std::result::Result<Annotation, String> {
        if rec.tokens.len() != rec.pos.len() {
            return Err(format!(
                "{} tokens but {} POS tags",
                rec.tokens.len(),
                rec.pos.len()
            ));
        }
        if let Some(s) = rec
            .ne
            .iter()
            .find(|s| s.start >= s.end || s.end > rec.tokens.len())
        {
            return Err(format!("NE span [{}, {}) out of bounds", s.start, s.end));
        }
        let tokens = rec
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| Token::new(t.clone(), i, rec.segment))
            .collect();
        let spans = rec
            .ne
            .iter()
            .map(|s| NeSpan::new(s.start, s.end, s.label.clone()))
            .collect();
        Ok(Annotation::new(tokens, rec.pos.clone(), spans))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Annotator for SidecarAnnotator {
    fn annotate(&self, key: &TextKey<'_>, _text: &str) -> Result<Annotation> {
        self.entries
            .get(&(key.example_id.to_string(), key.segment, key.rank))
            .cloned()
            .ok_or_else(|| Error::MissingAnnotation(key.to_string()))
    }
}

/// Fixed English stop-word list shipped with the crate.
#[derive(Debug, Clone, Default)]
pub struct StopList {
    words: HashSet<String>,
}

impl StopList {
    pub const VERSION: u32 = 1;

    pub fn english() -> &'static StopList {
        static LIST: OnceLock<StopList> = OnceLock::new();
        LIST.get_or_init(|| {
            StopList::from_words(
                include_str!("../../resources/stopwords.txt")
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#')),
            )
        })
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopList {
            words: words
                .into_iter()
                .map(|w| w.as_ref().to_lowercase())
                .collect(),
        }
    }

    pub fn contains(&self, lower: &str) -> bool {
        self.words.contains(lower)
    }
}

/// The most frequent non-stop question words, frozen at training time.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CommonWords {
    words: Vec<String>,
}

impl CommonWords {
    pub const DEFAULT_LIMIT: usize = 50;

    pub fn new(words: Vec<String>) -> Self {
        CommonWords { words }
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, lower: &str) -> bool {
        self.words.iter().any(|w| w == lower)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Counts lowercased, non-stop, non-punctuation question tokens and keeps the `limit` most
/// frequent; ties go to the lexicographically smaller word.
pub fn compute_common_words<S: AsRef<str>>(
    questions: &[S],
    stop: &StopList,
    limit: usize,
) -> CommonWords {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for q in questions {
        for t in tokenize(q.as_ref(), Segment::Question) {
            if !t.punct && !stop.contains(&t.lower) {
                *counts.entry(t.lower).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    CommonWords::new(ranked.into_iter().take(limit).map(|(w, _)| w).collect())
}

pub const WH_WORDS: [&str; 9] = [
    "who", "what", "where", "when", "which", "why", "how", "whom", "whose",
];

/// First wh-word of the question, if any.
pub fn wh_word(question: &Annotation) -> Option<&'static str> {
    question
        .tokens
        .iter()
        .find_map(|t| WH_WORDS.iter().find(|w| **w == t.lower).copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn heuristic(text: &str) -> Annotation {
        heuristic::annotate_text(text, Segment::Question, StopList::english())
    }

    #[test]
    fn common_words_by_frequency_then_lexicographic() {
        let stop = StopList::from_words(["who"]);
        let cw = compute_common_words(&["who played x", "who played y"], &stop, 50);
        assert_eq!(cw.words(), ["played", "x", "y"]);
    }

    #[test]
    fn common_words_all_stop() {
        let cw = compute_common_words(&["who is the", "what of"], StopList::english(), 50);
        assert!(cw.is_empty());
    }

    #[test]
    fn common_words_limit() {
        let qs: Vec<String> = (0..80).map(|i| format!("word{i} thing")).collect();
        let cw = compute_common_words(&qs, StopList::english(), 50);
        assert_eq!(cw.len(), 50);
        assert_eq!(cw.words()[0], "thing");
    }

    #[test]
    fn wh_words() {
        assert_eq!(
            wh_word(&heuristic("who played juni in spy kids 4?")),
            Some("who")
        );
        assert_eq!(wh_word(&heuristic("name the capital")), None);
        assert_eq!(wh_word(&heuristic("in what year did it end")), Some("what"));
    }

    #[test]
    fn maximal_flags() {
        let tokens = tokenize("a b c d", Segment::Body);
        let pos = vec!["NN".to_string(); 4];
        let a = Annotation::new(
            tokens,
            pos,
            vec![
                NeSpan::new(0, 3, "ORG"),
                NeSpan::new(1, 2, "PERSON"),
                NeSpan::new(3, 4, "X"),
            ],
        );
        let flags: Vec<bool> = a.ne_spans.iter().map(|s| s.maximal).collect();
        assert_eq!(flags, [true, false, true]);
    }

    #[test]
    fn sidecar_pass_through_and_missing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ann.jsonl");
        let mut f = fs::File::create(&p).unwrap();
        writeln!(
            f,
            r#"{{"id":"e1","segment":"title","rank":2,"tokens":["Frank","Vincent","-","Wikipedia"],"pos":["NNP","NNP",":","NNP"],"ne":[{{"start":0,"end":2,"label":"PERSON"}}]}}"#
        )
        .unwrap();
        writeln!(
            f,
            r#"{{"id":"e1","segment":"question","tokens":["who"],"pos":["WP"]}}"#
        )
        .unwrap();
        drop(f);
        let side = SidecarAnnotator::load(&p).unwrap();
        let key = TextKey {
            example_id: "e1",
            segment: Segment::Title,
            rank: Some(2),
        };
        let a = annotate(&key, "ignored", &side).unwrap();
        assert_eq!(a.pos_tags, ["NNP", "NNP", ":", "NNP"]);
        assert_eq!(
            a.ne_spans,
            vec![NeSpan {
                start: 0,
                end: 2,
                label: "PERSON".into(),
                maximal: true
            }]
        );
        let q = TextKey {
            example_id: "e1",
            segment: Segment::Question,
            rank: None,
        };
        assert_eq!(side.annotate(&q, "").unwrap().tokens[0].lower, "who");
        let missing = TextKey {
            example_id: "e2",
            segment: Segment::Body,
            rank: Some(1),
        };
        let err = side.annotate(&missing, "").unwrap_err();
        assert!(err.to_string().contains("e2/body/1"), "{err}");
    }
}
