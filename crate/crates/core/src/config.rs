//! Declarative pipeline configuration, read from TOML and overridable from
//! the command line. The resolved configuration is written next to every
//! experiment's outputs.
//!
//! ```toml
//! corpus = "reviews.jsonl"
//! folds = 10
//! seed = 7
//! configurations = ["AF", "STR", "STR+AF"]
//!
//! [svm]
//! kernel = "rbf"
//! c = 1.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::Lexicon;
use crate::classifier::{KernelSpec, SolverOptions, SvmParams, DEFAULT_TOLERANCE};
use crate::evaluation::{Averaging, ExperimentOptions, FeatureConfig, FitScope, Resources, TABLE_CONFIGURATIONS};
use crate::selection::DEFAULT_FILTER_THRESHOLD;
use crate::textproc::Stopwords;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {message}")]
    Resource { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    #[default]
    Rbf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmSection {
    pub kernel: KernelKind,
    pub c: f64,
    /// RBF width; 1 / dimensions when absent.
    pub gamma: Option<f64>,
    pub tol: f64,
}

impl Default for SvmSection {
    fn default() -> Self {
        SvmSection { kernel: KernelKind::Rbf, c: 1.0, gamma: None, tol: DEFAULT_TOLERANCE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    /// Stopword list; the bundled English list when absent.
    pub stopwords: Option<PathBuf>,
    /// Emotion lexicon; the bundled stub when absent.
    pub galc_lexicon: Option<PathBuf>,
    /// Semantic-tag lexicon; the bundled stub when absent.
    pub inquirer_lexicon: Option<PathBuf>,
    /// Feature configurations to evaluate, e.g. `"UGR+AF"`.
    pub configurations: Vec<String>,
    pub folds: usize,
    pub seed: u64,
    pub merge_clauses: bool,
    pub averaging: Averaging,
    /// Families with more dimensions than this are filtered by positive IG.
    pub filter_threshold: usize,
    pub svm: SvmSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: None,
            stopwords: None,
            galc_lexicon: None,
            inquirer_lexicon: None,
            configurations: TABLE_CONFIGURATIONS.iter().map(|s| s.to_string()).collect(),
            folds: 10,
            seed: 0,
            merge_clauses: false,
            averaging: Averaging::Weighted,
            filter_threshold: DEFAULT_FILTER_THRESHOLD,
            svm: SvmSection::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub corpus: Option<PathBuf>,
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub kernel: Option<KernelKind>,
    pub c: Option<f64>,
    pub gamma: Option<f64>,
    pub merge_clauses: Option<bool>,
    pub averaging: Option<Averaging>,
    pub configurations: Option<Vec<String>>,
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError::Resource {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: origin.to_string(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&read(path)?, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.corpus {
            self.corpus = Some(v.clone());
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.folds {
            self.folds = v;
        }
        if let Some(v) = o.kernel {
            self.svm.kernel = v;
        }
        if let Some(v) = o.c {
            self.svm.c = v;
        }
        if let Some(v) = o.gamma {
            self.svm.gamma = Some(v);
        }
        if let Some(v) = o.merge_clauses {
            self.merge_clauses = v;
        }
        if let Some(v) = o.averaging {
            self.averaging = v;
        }
        if let Some(v) = &o.configurations {
            self.configurations = v.clone();
        }
    }

    /// Checks value ranges and that every referenced file exists.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.folds < 2 {
            return Err(ConfigError::Invalid(format!("folds must be at least 2, got {}", self.folds)));
        }
        if !(self.svm.c > 0.0 && self.svm.c.is_finite()) {
            return Err(ConfigError::Invalid(format!("svm c must be positive, got {}", self.svm.c)));
        }
        if let Some(g) = self.svm.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(ConfigError::Invalid(format!("svm gamma must be positive, got {g}")));
            }
        }
        if !(self.svm.tol > 0.0) {
            return Err(ConfigError::Invalid(format!("svm tol must be positive, got {}", self.svm.tol)));
        }
        self.feature_configs()?;
        let files = [&self.corpus, &self.stopwords, &self.galc_lexicon, &self.inquirer_lexicon];
        for path in files.into_iter().flatten() {
            if !path.is_file() {
                return Err(ConfigError::Resource {
                    path: path.display().to_string(),
                    message: "file not found".to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn feature_configs(&self) -> Result<Vec<FeatureConfig>, ConfigError> {
        if self.configurations.is_empty() {
            return Err(ConfigError::Invalid("no feature configurations".to_string()));
        }
        self.configurations
            .iter()
            .map(|s| s.parse().map_err(|e: crate::evaluation::EvalError| ConfigError::Invalid(e.to_string())))
            .collect()
    }

    pub fn svm_params(&self) -> SvmParams {
        let kernel = match (self.svm.kernel, self.svm.gamma) {
            (KernelKind::Linear, _) => Some(KernelSpec::Linear),
            (KernelKind::Rbf, Some(gamma)) => Some(KernelSpec::Rbf { gamma }),
            (KernelKind::Rbf, None) => None,
        };
        SvmParams {
            kernel,
            c: self.svm.c,
            solver: SolverOptions { tol: self.svm.tol, ..SolverOptions::default() },
        }
    }

    pub fn experiment_options(&self) -> ExperimentOptions {
        ExperimentOptions {
            merge_clauses: self.merge_clauses,
            svm: self.svm_params(),
            averaging: self.averaging,
            filter_threshold: self.filter_threshold,
            scope: FitScope::PerFold,
        }
    }

    /// Loads the stopword list and lexicons, falling back to bundled data.
    pub fn resources(&self) -> Result<Resources, ConfigError> {
        let lexicon = |path: &Option<PathBuf>, fallback: fn() -> Lexicon| match path {
            None => Ok(fallback()),
            Some(p) => Lexicon::parse(&read(p)?).map_err(|e| ConfigError::Resource {
                path: p.display().to_string(),
                message: e.to_string(),
            }),
        };
        Ok(Resources {
            stopwords: match &self.stopwords {
                None => Stopwords::english(),
                Some(p) => Stopwords::parse(&read(p)?),
            },
            galc: lexicon(&self.galc_lexicon, Lexicon::galc_stub)?,
            inquirer: lexicon(&self.inquirer_lexicon, Lexicon::inquirer_stub)?,
        })
    }
}
