//! Model files: pretty-printed JSON with a format tag and version.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Model, ModelResources};
use crate::annotate::{CommonWords, StopList};
use crate::candidates::IdfTable;
use crate::corpus::write_atomic;
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, FeatureIndex, TfidfBins};

pub const MODEL_VERSION: u32 = 1;
const FORMAT: &str = "webqa-model";

#[derive(Serialize, Deserialize)]
struct Weighted {
    name: String,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct IdfSection {
    doc_count: usize,
    df: BTreeMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    version: u32,
    lambda: f64,
    k: usize,
    stoplist_version: u32,
    feature_config: FeatureConfig,
    common_words: CommonWords,
    tfidf_bins: TfidfBins,
    features: Vec<Weighted>,
    idf: IdfSection,
}

impl Model {
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format: FORMAT.into(),
            version: MODEL_VERSION,
            lambda: self.lambda,
            k: self.resources.k,
            stoplist_version: StopList::VERSION,
            feature_config: self.resources.config.clone(),
            common_words: self.resources.common.clone(),
            tfidf_bins: self.resources.bins.clone(),
            features: self
                .index
                .names()
                .iter()
                .zip(&self.weights)
                .map(|(name, &weight)| Weighted {
                    name: name.clone(),
                    weight,
                })
                .collect(),
            idf: IdfSection {
                doc_count: self.resources.idf.doc_count(),
                df: self
                    .resources
                    .idf
                    .counts()
                    .iter()
                    .map(|(k, v)| (k.clone(), *v))
                    .collect(),
            },
        };
        let mut s = serde_json::to_string_pretty(&file).expect("models always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Model> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::format("model file", e))?;
        let version = value.get("version").and_then(|v| v.as_u64());
        match version {
            Some(v) if v == u64::from(MODEL_VERSION) => {}
            Some(v) => {
                return Err(Error::Version {
                    found: v as u32,
                    expected: MODEL_VERSION,
                })
            }
            None => return Err(Error::format("model file", "missing version")),
        }
        let file: ModelFile =
            serde_json::from_value(value).map_err(|e| Error::format("model file", e))?;
        if file.format != FORMAT {
            return Err(Error::format(
                "model file",
                format!("unknown format `{}`", file.format),
            ));
        }
        if file.stoplist_version != StopList::VERSION {
            return Err(Error::format(
                "model file",
                format!("trained with stop list v{}", file.stoplist_version),
            ));
        }
        file.feature_config.validate()?;
        if let Some(w) = file.features.iter().find(|w| !w.weight.is_finite()) {
            return Err(Error::format(
                "model file",
                format!("non-finite weight for `{}`", w.name),
            ));
        }
        let n = file.features.len();
        let index = FeatureIndex::from_names(file.features.iter().map(|w| w.name.clone()));
        if index.len() != n {
            return Err(Error::format("model file", "duplicate feature names"));
        }
        let weights = file.features.into_iter().map(|w| w.weight).collect();
        let idf = IdfTable::from_counts(
            file.idf.doc_count,
            file.idf.df.into_iter().collect::<HashMap<_, _>>(),
        )?;
        Ok(Model {
            weights,
            lambda: file.lambda,
            index,
            resources: ModelResources {
                common: file.common_words,
                bins: file.tfidf_bins,
                idf,
                config: file.feature_config,
                k: file.k,
            },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let json = self.to_json();
        write_atomic(path.as_ref(), |w| {
            std::io::Write::write_all(w, json.as_bytes())
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Model> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Model::from_json(&text)
    }
}
