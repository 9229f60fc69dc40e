use thiserror::Error;

use crate::argument::ArgumentError;
use crate::baseline::{LexiconError, VocabularyError};
use crate::classifier::SvmError;
use crate::config::ConfigError;
use crate::corpus::CorpusError;
use crate::evaluation::EvalError;
use crate::features::MatrixFormatError;
use crate::selection::SelectionError;
use crate::synth::SynthError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-level error; every module error converts into it.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Vocabulary(#[from] VocabularyError),
    #[error(transparent)]
    Argument(#[from] ArgumentError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Matrix(#[from] MatrixFormatError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for errors caused by malformed input files rather than runtime failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Corpus(_) | Error::Lexicon(_) | Error::Vocabulary(_) | Error::Config(_) | Error::Matrix(_)
        )
    }
}
