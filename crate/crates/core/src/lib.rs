//! Argument-based features for classifying helpful product reviews.
//!
//! The crate covers the whole pipeline: reading clause-annotated reviews,
//! aggregating annotator labels, the four baseline feature families
//! (structural, unigram, emotion lexicon, semantic lexicon), the four
//! argument-feature granularities (component, token, letter, position),
//! information-gain feature selection, an SMO-trained SVM, and a
//! stratified cross-validation harness that produces the per-configuration
//! metric table and the selected-feature breakdown.
//!
//! The `argfeat` binary (feature `cli`) drives the same code from the
//! command line; see [`cli`] for the library side of each subcommand.

pub mod argument;
pub mod baseline;
pub mod classifier;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod evaluation;
pub mod features;
pub mod selection;
pub mod synth;
pub mod textproc;

mod error;

pub use error::{Error, Result};

pub use argument::{extract_all, ArgumentProfile, ComponentSubset};
pub use corpus::{AnnotatedReview, ArgumentComponent, ComponentType, Helpfulness};
pub use features::{FeatureFamily, FeatureVector};

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}
