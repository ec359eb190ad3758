use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

/// `dot(u, v) / (|u| |v|)`, defined as 0 when either norm is zero.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

/// Word vectors keyed by lowercased word. Vectors are stored unit-normalized, so
/// [`EmbeddingTable::similarity`] is a plain dot product. Out-of-vocabulary words behave as
/// the zero vector.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: HashMap<String, Vec<f32>>,
}

impl EmbeddingTable {
    pub fn new(dimension: usize) -> Self {
        EmbeddingTable {
            dimension,
            vectors: HashMap::new(),
        }
    }

    /// Adds a vector; the first vector for a lowercased word wins.
    pub fn insert(&mut self, word: &str, vector: &[f64]) -> Result<()> {
        if vector.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                left: self.dimension,
                right: vector.len(),
            });
        }
        let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        let unit = vector
            .iter()
            .map(|x| if norm > 0.0 { (x / norm) as f32 } else { 0.0 })
            .collect();
        self.vectors.entry(word.to_lowercase()).or_insert(unit);
        Ok(())
    }

    /// Reads the usual text format: `word v1 v2 ... vd` per line. When `vocab` is given,
    /// only those (lowercased) words are kept.
    pub fn load(path: impl AsRef<Path>, vocab: Option<&HashSet<String>>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut table: Option<EmbeddingTable> = None;
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let mut parts = line.split_whitespace();
            let Some(word) = parts.next() else { continue };
            let bad = |message: String| Error::Record {
                line: i + 1,
                field: "vector".into(),
                message,
            };
            let values: Vec<f64> = parts
                .map(|p| p.parse::<f64>().map_err(|e| bad(format!("`{p}`: {e}"))))
                .collect::<Result<_>>()?;
            let t = table.get_or_insert_with(|| EmbeddingTable::new(values.len()));
            if values.len() != t.dimension {
                return Err(bad(format!(
                    "expected {} values, found {}",
                    t.dimension,
                    values.len()
                )));
            }
            if vocab.is_some_and(|v| !v.contains(&word.to_lowercase())) {
                continue;
            }
            t.insert(word, &values)?;
        }
        Ok(table.unwrap_or_default())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn unit_vector(&self, lower: &str) -> Option<&[f32]> {
        self.vectors.get(lower).map(Vec::as_slice)
    }

    /// Cosine similarity between two lowercased words; 0 if either is unknown.
    pub fn similarity(&self, a: &str, b: &str) -> f64 {
        match (self.unit_vector(a), self.unit_vector(b)) {
            (Some(u), Some(v)) => dot(u, v),
            _ => 0.0,
        }
    }
}

pub(crate) fn dot(u: &[f32], v: &[f32]) -> f64 {
    let s: f64 = u
        .iter()
        .zip(v)
        .map(|(a, b)| f64::from(*a) * f64::from(*b))
        .sum();
    s.clamp(-1.0, 1.0)
}
