//! Dataset records: a question, its web result set and the gold answers.
//!
//! Files are line-delimited JSON, one example per line:
//!
//! ```text
//! {"id": "...", "question": "...", "answers": ["..."],
//!  "snippets": [{"title": "...", "body": "...", "rank": 1}, ...], "tags": ["N-ary"]}
//! ```

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::annotate::match_key;
use crate::error::{Error, Result};

/// Result sets hold at most this many snippets.
pub const MAX_SNIPPETS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snippet {
    pub title: String,
    pub body: String,
    pub rank: u32,
}

/// Ranked snippets returned for one question.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResultSet {
    snippets: Vec<Snippet>,
}

impl ResultSet {
    /// Builds a result set, checking rank bounds, order and uniqueness.
    pub fn new(snippets: Vec<Snippet>) -> std::result::Result<Self, String> {
        if snippets.len() > MAX_SNIPPETS {
            return Err(format!(
                "{} snippets exceed the limit of {MAX_SNIPPETS}",
                snippets.len()
            ));
        }
        let mut prev = 0;
        for s in &snippets {
            if !(1..=MAX_SNIPPETS as u32).contains(&s.rank) {
                return Err(format!("rank {} outside [1, {MAX_SNIPPETS}]", s.rank));
            }
            if s.rank <= prev {
                return Err(format!(
                    "ranks must be unique and ascending ({} after {prev})",
                    s.rank
                ));
            }
            prev = s.rank;
        }
        Ok(Self { snippets })
    }

    /// Assigns ranks 1..=n to (title, body) pairs in order.
    pub fn from_pairs<I, T, B>(pairs: I) -> std::result::Result<Self, String>
    where
        I: IntoIterator<Item = (T, B)>,
        T: Into<String>,
        B: Into<String>,
    {
        let snippets = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (title, body))| Snippet {
                title: title.into(),
                body: body.into(),
                rank: i as u32 + 1,
            })
            .collect();
        Self::new(snippets)
    }

    pub fn snippets(&self) -> &[Snippet] {
        &self.snippets
    }

    pub fn len(&self) -> usize {
        self.snippets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snippets.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CompositionalityTag {
    Simple,
    Filter,
    Nary,
    Conjunction,
    Composition,
    Superlative,
    Other,
}

impl CompositionalityTag {
    pub const ALL: [CompositionalityTag; 7] = [
        CompositionalityTag::Simple,
        CompositionalityTag::Filter,
        CompositionalityTag::Nary,
        CompositionalityTag::Conjunction,
        CompositionalityTag::Composition,
        CompositionalityTag::Superlative,
        CompositionalityTag::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CompositionalityTag::Simple => "Simple",
            CompositionalityTag::Filter => "Filter",
            CompositionalityTag::Nary => "N-ary",
            CompositionalityTag::Conjunction => "Conjunction",
            CompositionalityTag::Composition => "Composition",
            CompositionalityTag::Superlative => "Superlative",
            CompositionalityTag::Other => "Other",
        }
    }
}

impl fmt::Display for CompositionalityTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CompositionalityTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match key.as_str() {
            "simple" => CompositionalityTag::Simple,
            "filter" => CompositionalityTag::Filter,
            "nary" => CompositionalityTag::Nary,
            "conjunction" | "conj" => CompositionalityTag::Conjunction,
            "composition" | "compos" => CompositionalityTag::Composition,
            "superlative" | "superl" => CompositionalityTag::Superlative,
            "other" => CompositionalityTag::Other,
            _ => return Err(format!("unknown compositionality tag `{s}`")),
        })
    }
}

impl Serialize for CompositionalityTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CompositionalityTag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One (question, result set, gold answers) triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub id: String,
    pub question: String,
    /// Verbatim gold answers, original casing.
    pub gold_answers: Vec<String>,
    pub result_set: ResultSet,
    pub tags: Option<BTreeSet<CompositionalityTag>>,
}

impl Example {
    /// Lowercased, token-normalized gold answers used for every match.
    pub fn gold_keys(&self) -> HashSet<String> {
        self.gold_answers.iter().map(|a| match_key(a)).collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: String,
    question: String,
    answers: Vec<String>,
    snippets: Vec<Snippet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tags: Option<Vec<CompositionalityTag>>,
}

impl Record {
    fn into_example(self, line: usize) -> Result<Example> {
        let invalid = |field: &str, message: String| Error::Record {
            line,
            field: field.to_string(),
            message,
        };
        if self.id.trim().is_empty() {
            return Err(invalid("id", "must be non-empty".into()));
        }
        if self.answers.is_empty() {
            return Err(invalid(
                "answers",
                "at least one gold answer is required".into(),
            ));
        }
        if let Some(i) = self.answers.iter().position(|a| match_key(a).is_empty()) {
            return Err(invalid(
                &format!("answers[{i}]"),
                "gold answer has no tokens".into(),
            ));
        }
        let result_set = ResultSet::new(self.snippets).map_err(|m| invalid("snippets", m))?;
        Ok(Example {
            id: self.id,
            question: self.question,
            gold_answers: self.answers,
            result_set,
            tags: self.tags.map(|t| t.into_iter().collect()),
        })
    }

    fn from_example(e: &Example) -> Self {
        Record {
            id: e.id.clone(),
            question: e.question.clone(),
            answers: e.gold_answers.clone(),
            snippets: e.result_set.snippets().to_vec(),
            tags: e.tags.as_ref().map(|t| t.iter().copied().collect()),
        }
    }
}

/// Parses one dataset line. `line` is 1-based and only used in errors.
pub fn parse_record(text: &str, line: usize) -> Result<Example> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let record: Record = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        Error::Record {
            line,
            field: if field == "." {
                "<record>".into()
            } else {
                field
            },
            message: e.into_inner().to_string(),
        }
    })?;
    record.into_example(line)
}

/// Serializes an example as a single dataset line (no trailing newline).
pub fn to_record_line(example: &Example) -> String {
    serde_json::to_string(&Record::from_example(example)).expect("records always serialize")
}

/// Loads a line-delimited dataset. Blank lines are skipped.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<Example>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let example = parse_record(&line, i + 1)?;
        if !seen.insert(example.id.clone()) {
            return Err(Error::DuplicateId(example.id));
        }
        out.push(example);
    }
    Ok(out)
}

/// Writes examples atomically (temp file then rename).
pub fn store_dataset(path: impl AsRef<Path>, examples: &[Example]) -> Result<()> {
    write_atomic(path.as_ref(), |w| {
        for e in examples {
            writeln!(w, "{}", to_record_line(e))?;
        }
        Ok(())
    })
}

/// Splits examples into those whose gold answer survives candidate extraction and those
/// where it does not. `extractor` returns the top-K candidate texts for an example.
pub fn filter_trainable<F, I, S>(
    examples: Vec<Example>,
    extractor: F,
) -> (Vec<Example>, Vec<Example>)
where
    F: Fn(&Example) -> I,
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    examples.into_iter().partition(|e| {
        let gold = e.gold_keys();
        extractor(e).into_iter().any(|c| gold.contains(c.as_ref()))
    })
}

/// Creates `path` by writing a sibling temp file and renaming it into place, so a failed
/// write never leaves a partial file behind.
pub fn write_atomic<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut std::io::BufWriter<&mut tempfile::NamedTempFile>) -> std::io::Result<()>,
{
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut w = std::io::BufWriter::new(&mut tmp);
        write(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
