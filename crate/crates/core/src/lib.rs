//! Unsupervised cross-corpus mining of suicide-risk-factor mentions:
//! lexicon-driven filtering and expansion, retrofitted word embeddings,
//! per-user cross-community semantic relatedness, OPTICS clustering with
//! SRF centroid labeling, and Krippendorff agreement over annotations.

pub mod agreement;
pub mod clustering;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod labeling;
pub mod lexicon;
pub mod relatedness;
pub mod text;

pub use error::{Error, Result};
