use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feature templates. Every emitted feature name starts with its template's name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Template {
    SpanLength,
    Tfidf,
    Capitalized,
    StopWord,
    InQuest,
    InQuestCommon,
    InQuestDist,
    WhNe,
    WhPos,
    NeNe,
    NeCommon,
    MaxNe,
    Year,
    CtxtMatch,
    CtxtSimilarity,
    InTitle,
    CtxtEntity,
    GoogleRank,
}

impl Template {
    pub const ALL: [Template; 18] = [
        Template::SpanLength,
        Template::Tfidf,
        Template::Capitalized,
        Template::StopWord,
        Template::InQuest,
        Template::InQuestCommon,
        Template::InQuestDist,
        Template::WhNe,
        Template::WhPos,
        Template::NeNe,
        Template::NeCommon,
        Template::MaxNe,
        Template::Year,
        Template::CtxtMatch,
        Template::CtxtSimilarity,
        Template::InTitle,
        Template::CtxtEntity,
        Template::GoogleRank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Template::SpanLength => "span_length",
            Template::Tfidf => "tfidf",
            Template::Capitalized => "capitalized",
            Template::StopWord => "stop_word",
            Template::InQuest => "in_quest",
            Template::InQuestCommon => "in_quest_common",
            Template::InQuestDist => "in_quest_dist",
            Template::WhNe => "wh_ne",
            Template::WhPos => "wh_pos",
            Template::NeNe => "ne_ne",
            Template::NeCommon => "ne_common",
            Template::MaxNe => "max_ne",
            Template::Year => "year",
            Template::CtxtMatch => "ctxt_match",
            Template::CtxtSimilarity => "ctxt_similarity",
            Template::InTitle => "in_title",
            Template::CtxtEntity => "ctxt_entity",
            Template::GoogleRank => "google_rank",
        }
    }

    /// Template owning a feature name (the part before the first `:`).
    pub fn of_feature(name: &str) -> Option<Template> {
        let head = name.split(':').next().unwrap_or(name);
        Template::ALL.into_iter().find(|t| t.name() == head)
    }

    pub fn valid_names() -> String {
        Template::ALL.map(Template::name).join(", ")
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Template {
    type Err = Error;

    /// Accepts the snake_case names as well as spellings such as `TF-IDF`, `Max-NE`,
    /// `Ne+Common` or `Google Rank`.
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(char::is_ascii_alphanumeric)
            .collect::<String>()
            .to_ascii_lowercase();
        let alias = match key.as_str() {
            "stopfrac" => Some(Template::StopWord),
            "inquestiondist" => Some(Template::InQuestDist),
            "year" | "yearbin" => Some(Template::Year),
            "ctxtsim" => Some(Template::CtxtSimilarity),
            _ => None,
        };
        alias
            .or_else(|| {
                Template::ALL
                    .into_iter()
                    .find(|t| t.name().replace('_', "") == key)
            })
            .ok_or_else(|| Error::UnknownTemplate {
                name: s.to_string(),
                valid: Template::valid_names(),
            })
    }
}

impl From<Template> for String {
    fn from(t: Template) -> String {
        t.name().to_string()
    }
}

impl TryFrom<String> for Template {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Inclusive snippet-rank interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankBin {
    pub lo: u32,
    pub hi: u32,
}

impl RankBin {
    pub fn label(&self) -> String {
        if self.lo == self.hi {
            self.lo.to_string()
        } else {
            format!("{}-{}", self.lo, self.hi)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Tokens on each side of a mention that count as its context.
    pub context_window: usize,
    /// Context weight at token distance `d` is `decay_base^d`.
    pub decay_base: f64,
    pub rank_bins: Vec<RankBin>,
    /// Quantile bins per span length for the binned tf-idf features.
    pub tfidf_bins: usize,
    /// Ascending era boundaries; `[1900, 1950]` yields `<1900`, `1900-1949`, `>=1950`.
    pub year_bins: Vec<u32>,
    #[serde(default)]
    pub disabled: BTreeSet<Template>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            context_window: 6,
            decay_base: 0.5,
            rank_bins: [(1, 1), (2, 5), (6, 10), (11, 20), (21, 50), (51, 100)]
                .map(|(lo, hi)| RankBin { lo, hi })
                .to_vec(),
            tfidf_bins: 10,
            year_bins: vec![1900, 1950, 1980, 2000, 2010],
            disabled: BTreeSet::new(),
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.context_window < 1 {
            return bad("context_window must be at least 1");
        }
        if !(self.decay_base > 0.0 && self.decay_base < 1.0) {
            return bad("decay_base must lie in (0, 1)");
        }
        if self.tfidf_bins < 1 {
            return bad("tfidf_bins must be at least 1");
        }
        let mut next = 1;
        for b in &self.rank_bins {
            if b.lo != next || b.hi < b.lo {
                return bad("rank_bins must tile 1..=100 in order without overlap");
            }
            next = b.hi + 1;
        }
        if next != 101 {
            return bad("rank_bins must tile 1..=100 in order without overlap");
        }
        if self.year_bins.windows(2).any(|w| w[0] >= w[1]) {
            return bad("year_bins must be strictly ascending");
        }
        Ok(())
    }

    pub fn enabled(&self, t: Template) -> bool {
        !self.disabled.contains(&t)
    }

    /// `decay_base^distance` for distances within the window, else 0.
    pub fn weight(&self, distance: usize) -> f64 {
        if distance == 0 || distance > self.context_window {
            0.0
        } else {
            self.decay_base.powi(distance as i32)
        }
    }

    pub fn rank_bin(&self, rank: u32) -> Option<&RankBin> {
        self.rank_bins.iter().find(|b| b.lo <= rank && rank <= b.hi)
    }

    pub fn year_bin(&self, year: u32) -> String {
        let i = self.year_bins.partition_point(|&b| b <= year);
        match (i, self.year_bins.len()) {
            (_, 0) => "all".into(),
            (0, _) => format!("<{}", self.year_bins[0]),
            (i, n) if i == n => format!(">={}", self.year_bins[n - 1]),
            (i, _) => format!("{}-{}", self.year_bins[i - 1], self.year_bins[i] - 1),
        }
    }
}

/// Returns `config` with one more template switched off.
pub fn ablate(config: &FeatureConfig, template_name: &str) -> Result<FeatureConfig> {
    let t: Template = template_name.parse()?;
    let mut out = config.clone();
    out.disabled.insert(t);
    Ok(out)
}
