//! Question answering over web search snippets.
//!
//! Candidates are the 1–4-grams of a question's result set, pruned by tf-idf and ranked by a
//! log-linear model over lexical, positional, named-entity and embedding features.

pub mod annotate;
pub mod candidates;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod model;
pub mod pipeline;
pub mod predict;
pub mod websearch;

pub use error::{Error, Result};
