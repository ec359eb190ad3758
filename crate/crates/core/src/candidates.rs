//! Answer candidates: every 1- to 4-gram of the result set, minus those already in the
//! question, ranked by tf-idf and cut to the top K.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::annotate::{Annotation, Segment};
use crate::corpus::write_atomic;
use crate::error::{Error, Result};

pub const MAX_NGRAM: usize = 4;
pub const DEFAULT_K: usize = 140;

/// Annotated title and body of one snippet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedSnippet {
    pub rank: u32,
    pub title: Annotation,
    pub body: Annotation,
}

impl AnnotatedSnippet {
    pub fn segment(&self, segment: Segment) -> Option<&Annotation> {
        match segment {
            Segment::Title => Some(&self.title),
            Segment::Body => Some(&self.body),
            Segment::Question => None,
        }
    }
}

/// One occurrence of a candidate: token range `[start, end)` of a snippet segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mention {
    pub snippet_rank: u32,
    pub segment: Segment,
    pub start: usize,
    pub end: usize,
}

impl Mention {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// Lowercased tokens joined by single spaces.
    pub text: String,
    pub n: usize,
    pub tf: usize,
    pub tfidf: f64,
    pub mentions: Vec<Mention>,
}

impl Candidate {
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.text.split(' ')
    }
}

/// Enumerates every distinct lowercased n-gram (n in 1..=4) within each title and body.
/// N-grams never cross the title/body boundary and never begin or end on punctuation.
/// Output is sorted by text; mentions are in (rank, title-before-body, start) order.
pub fn extract_ngrams(snippets: &[AnnotatedSnippet]) -> Vec<Candidate> {
    let mut by_text: HashMap<String, Candidate> = HashMap::new();
    for s in snippets {
        for (segment, ann) in [(Segment::Title, &s.title), (Segment::Body, &s.body)] {
            let toks = &ann.tokens;
            for start in 0..toks.len() {
                if toks[start].punct {
                    continue;
                }
                let mut text = String::new();
                for end in start + 1..=(start + MAX_NGRAM).min(toks.len()) {
                    if end > start + 1 {
                        text.push(' ');
                    }
                    text.push_str(&toks[end - 1].lower);
                    if toks[end - 1].punct {
                        continue;
                    }
                    let mention = Mention {
                        snippet_rank: s.rank,
                        segment,
                        start,
                        end,
                    };
                    let c = by_text.entry(text.clone()).or_insert_with(|| Candidate {
                        text: text.clone(),
                        n: end - start,
                        tf: 0,
                        tfidf: 0.0,
                        mentions: Vec::new(),
                    });
                    c.tf += 1;
                    c.mentions.push(mention);
                }
            }
        }
    }
    let mut out: Vec<Candidate> = by_text.into_values().collect();
    for c in &mut out {
        c.mentions
            .sort_by_key(|m| (m.snippet_rank, m.segment, m.start, m.end));
    }
    out.sort_by(|a, b| a.text.cmp(&b.text));
    out
}

/// True when `needle` occurs as a contiguous run inside `haystack`.
pub fn contains_run<S: AsRef<str>>(haystack: &[S], needle: &[&str]) -> bool {
    if needle.is_empty() || needle.len() > haystack.len() {
        return needle.is_empty();
    }
    haystack
        .windows(needle.len())
        .any(|w| w.iter().zip(needle).all(|(a, b)| a.as_ref() == *b))
}

/// Drops candidates whose tokens appear contiguously in the question.
pub fn filter_question_overlap(
    candidates: Vec<Candidate>,
    question: &Annotation,
) -> Vec<Candidate> {
    let q: Vec<&str> = question.lowers().collect();
    candidates
        .into_iter()
        .filter(|c| {
            let toks: Vec<&str> = c.tokens().collect();
            !contains_run(&q, &toks)
        })
        .collect()
}

/// Document frequencies over a reference corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdfTable {
    doc_count: usize,
    df: HashMap<String, usize>,
}

impl IdfTable {
    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn df(&self, word: &str) -> usize {
        self.df.get(word).copied().unwrap_or(0)
    }

    /// Builds a table from raw counts, checking every df lies in `[1, doc_count]`.
    pub fn from_counts(doc_count: usize, df: HashMap<String, usize>) -> Result<Self> {
        if let Some((w, n)) = df.iter().find(|(_, &n)| n == 0 || n > doc_count) {
            return Err(Error::format(
                "idf table",
                format!("df({w}) = {n} outside [1, {doc_count}]"),
            ));
        }
        Ok(IdfTable { doc_count, df })
    }

    pub fn counts(&self) -> &HashMap<String, usize> {
        &self.df
    }

    pub fn vocabulary_size(&self) -> usize {
        self.df.len()
    }

    /// `ln((1 + N) / (1 + df)) + 1`; unseen words have df 0.
    pub fn idf(&self, word: &str) -> f64 {
        let n = self.doc_count as f64;
        ((1.0 + n) / (1.0 + self.df(word) as f64)).ln() + 1.0
    }

    /// Mean token idf of a space-joined n-gram.
    pub fn ngram_idf(&self, text: &str) -> f64 {
        let (sum, count) = text
            .split(' ')
            .fold((0.0, 0usize), |(s, c), w| (s + self.idf(w), c + 1));
        sum / count as f64
    }

    /// Header `doc_count<TAB>N`, then `word<TAB>df` sorted by word.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), |w| self.write_to(w))
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "doc_count\t{}", self.doc_count)?;
        let mut words: Vec<(&String, &usize)> = self.df.iter().collect();
        words.sort();
        for (word, df) in words {
            writeln!(w, "{word}\t{df}")?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let lines = BufReader::new(file)
            .lines()
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(|e| Error::io(path, e))?;
        Self::parse(lines.iter().map(String::as_str))
    }

    pub fn parse<'a>(mut lines: impl Iterator<Item = &'a str>) -> Result<Self> {
        let bad = |m: String| Error::format("idf table", m);
        let header = lines.next().ok_or_else(|| bad("missing header".into()))?;
        let doc_count = header
            .strip_prefix("doc_count\t")
            .and_then(|n| n.trim().parse::<usize>().ok())
            .ok_or_else(|| bad(format!("bad header `{header}`")))?;
        let mut df = HashMap::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| bad(format!("line {}: expected word<TAB>df", i + 2)))?;
            let count: usize = count
                .trim()
                .parse()
                .map_err(|e| bad(format!("line {}: {e}", i + 2)))?;
            if count == 0 || count > doc_count {
                return Err(bad(format!(
                    "line {}: df {count} outside [1, {doc_count}]",
                    i + 2
                )));
            }
            df.insert(word.to_string(), count);
        }
        Ok(IdfTable { doc_count, df })
    }
}

/// Counts, for each lowercased word, how many documents contain it.
pub fn build_idf<D, I, S>(corpus: D) -> Result<IdfTable>
where
    D: IntoIterator<Item = I>,
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut df: HashMap<String, usize> = HashMap::new();
    let mut doc_count = 0;
    for doc in corpus {
        doc_count += 1;
        let words: HashSet<String> = doc.into_iter().map(|w| w.as_ref().to_lowercase()).collect();
        for w in words {
            *df.entry(w).or_default() += 1;
        }
    }
    if doc_count == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(IdfTable { doc_count, df })
}

/// Total order used for top-K: tf-idf descending, then longer n-grams, then text.
pub fn rank_order(a: &Candidate, b: &Candidate) -> Ordering {
    b.tfidf
        .total_cmp(&a.tfidf)
        .then_with(|| b.n.cmp(&a.n))
        .then_with(|| a.text.cmp(&b.text))
}

/// Scores each candidate as `tf * mean token idf` and keeps the best `k`, best first.
pub fn score_and_truncate(
    mut candidates: Vec<Candidate>,
    idf: &IdfTable,
    k: usize,
) -> Vec<Candidate> {
    for c in &mut candidates {
        c.tfidf = c.tf as f64 * idf.ngram_idf(&c.text);
    }
    if candidates.len() > k {
        candidates.select_nth_unstable_by(k, rank_order);
        candidates.truncate(k);
    }
    candidates.sort_by(rank_order);
    candidates
}
