//! Answer sets from ranked candidates: the best candidate plus everything scoring within
//! a margin of it.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::write_atomic;
use crate::error::{Error, Result};
use crate::model::{score_order, ScoredCandidate};

pub const DEFAULT_MARGIN: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Best first.
    pub answers: Vec<String>,
    pub scores: Vec<f64>,
    pub full_ranking: Vec<ScoredCandidate>,
}

/// Returns every top-scoring candidate plus any candidate whose raw score is strictly
/// less than `margin` below the best.
pub fn predict_set(scored: &[ScoredCandidate], margin: f64) -> Result<Prediction> {
    let mut ranking = scored.to_vec();
    ranking.sort_by(score_order);
    let best = ranking.first().ok_or(Error::NoCandidates)?.score;
    let (answers, scores) = ranking
        .iter()
        .take_while(|s| s.score == best || best - s.score < margin)
        .map(|s| (s.candidate.text.clone(), s.score))
        .unzip();
    Ok(Prediction {
        answers,
        scores,
        full_ranking: ranking,
    })
}

/// One line of a predictions file. `ranking` is the full candidate order, used for MRR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub answers: Vec<String>,
    pub scores: Vec<f64>,
    #[serde(default)]
    pub ranking: Vec<String>,
}

impl PredictionRecord {
    pub fn new(id: impl Into<String>, p: &Prediction) -> Self {
        PredictionRecord {
            id: id.into(),
            answers: p.answers.clone(),
            scores: p.scores.clone(),
            ranking: p
                .full_ranking
                .iter()
                .map(|s| s.candidate.text.clone())
                .collect(),
        }
    }

    /// Record for a question with no candidates.
    pub fn empty(id: impl Into<String>) -> Self {
        PredictionRecord {
            id: id.into(),
            answers: vec![],
            scores: vec![],
            ranking: vec![],
        }
    }
}

pub fn write_predictions(path: impl AsRef<Path>, records: &[PredictionRecord]) -> Result<()> {
    write_atomic(path.as_ref(), |w| {
        for r in records {
            serde_json::to_writer(&mut *w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<PredictionRecord>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Record {
            line: i + 1,
            field: "<prediction>".into(),
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::Candidate;
    use proptest::prelude::*;

    fn scored(scores: &[f64]) -> Vec<ScoredCandidate> {
        scores
            .iter()
            .enumerate()
            .map(|(i, &score)| ScoredCandidate {
                candidate: Candidate {
                    text: format!("c{i:02}"),
                    n: 1,
                    tf: 1,
                    tfidf: 0.0,
                    mentions: vec![],
                },
                score,
                probability: 0.0,
            })
            .collect()
    }

    #[test]
    fn margin_arithmetic() {
        let p = predict_set(&scored(&[2.0, 1.6, 1.4]), 0.5).unwrap();
        assert_eq!(p.answers, ["c00", "c01"]);
        assert_eq!(p.scores, [2.0, 1.6]);
        assert_eq!(p.full_ranking.len(), 3);
    }

    #[test]
    fn exact_margin_excluded() {
        let p = predict_set(&scored(&[1.0, 0.5]), 0.5).unwrap();
        assert_eq!(p.answers, ["c00"]);
    }

    #[test]
    fn equal_scores_all_returned() {
        let p = predict_set(&scored(&[0.3; 4]), 0.5).unwrap();
        assert_eq!(p.answers.len(), 4);
    }

    #[test]
    fn zero_margin_keeps_ties() {
        let p = predict_set(&scored(&[1.0, 2.0, 2.0, 0.0]), 0.0).unwrap();
        assert_eq!(p.answers, ["c01", "c02"]);
    }

    #[test]
    fn empty_is_error() {
        assert!(matches!(predict_set(&[], 0.5), Err(Error::NoCandidates)));
    }

    #[test]
    fn records_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        let p = predict_set(&scored(&[2.0, 1.6, 1.4]), 0.5).unwrap();
        let recs = vec![
            PredictionRecord::new("q1", &p),
            PredictionRecord::empty("q2"),
        ];
        write_predictions(&path, &recs).unwrap();
        assert_eq!(read_predictions(&path).unwrap(), recs);
    }

    proptest! {
        #[test]
        fn monotone_in_margin(
            scores in prop::collection::vec(-5.0f64..5.0, 1..20),
            m1 in 0.0f64..3.0,
            dm in 0.0f64..3.0,
        ) {
            let s = scored(&scores);
            let small = predict_set(&s, m1).unwrap();
            let large = predict_set(&s, m1 + dm).unwrap();
            prop_assert!(small.answers.len() <= large.answers.len());
            for a in &small.answers {
                prop_assert!(large.answers.contains(a));
            }
            // best is always in; the set is downward closed in score
            prop_assert_eq!(&small.answers[0], &small.full_ranking[0].candidate.text);
            let worst_in = small.scores.iter().copied().fold(f64::INFINITY, f64::min);
            for r in &small.full_ranking[small.answers.len()..] {
                prop_assert!(r.score <= worst_in);
            }
        }

        #[test]
        fn shift_invariant(scores in prop::collection::vec(-5.0f64..5.0, 1..20), c in -3.0f64..3.0) {
            let a = predict_set(&scored(&scores), 0.5).unwrap();
            let shifted: Vec<f64> = scores.iter().map(|s| s + c).collect();
            let b = predict_set(&scored(&shifted), 0.5).unwrap();
            // shifting can move a gap across the boundary by rounding only
            let near_boundary = scores.iter().any(|s| {
                let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                ((best - s) - 0.5).abs() < 1e-9
            });
            prop_assume!(!near_boundary);
            prop_assert_eq!(a.answers, b.answers);
        }
    }
}
