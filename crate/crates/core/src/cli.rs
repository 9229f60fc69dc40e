//! Library side of the `argfeat` subcommands. Each function does the work
//! and returns its report; the binary only parses flags and prints.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::PipelineConfig;
use crate::corpus::{corpus_statistics, parse_corpus, validate_corpus, write_corpus, CorpusError, CorpusStatistics};
use crate::evaluation::{analysis_report, run_experiments, stratified_folds, AnalysisReport, ExperimentReport};
use crate::selection::{parse_manifest, write_manifest, ManifestEntry};
use crate::synth::{generate, SyntheticSpec};
use crate::{Error, Result};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Outcome of validating a corpus file.
#[derive(Debug)]
pub struct ValidationReport {
    pub errors: Vec<CorpusError>,
    /// Present when the file has no errors.
    pub statistics: Option<CorpusStatistics>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        match &self.statistics {
            Some(s) => write!(f, "{s}"),
            None => write!(f, "{} error(s)", self.errors.len()),
        }
    }
}

pub fn cmd_validate(corpus: &Path, merge_clauses: bool) -> Result<ValidationReport> {
    let document = read(corpus)?;
    let errors = validate_corpus(&document);
    let statistics = if errors.is_empty() {
        Some(corpus_statistics(&parse_corpus(&document)?, merge_clauses))
    } else {
        None
    };
    Ok(ValidationReport { errors, statistics })
}

/// Generates a synthetic corpus and writes it to `out`; returns the review count.
pub fn cmd_synth(spec: &SyntheticSpec, out: &Path) -> Result<usize> {
    let reviews = generate(spec)?;
    write(out, &write_corpus(&reviews))?;
    Ok(reviews.len())
}

fn manifest_dir(out_dir: &Path) -> PathBuf {
    out_dir.join("manifests")
}

/// Runs every configured feature set and writes into `out_dir`:
/// `report.txt`, `report.csv`, `config.toml` (the resolved configuration),
/// `manifests/<CONFIG>.fold<NN>.tsv`, and `analysis.txt` when an argument
/// configuration selected anything.
pub fn cmd_experiment(config: &PipelineConfig, out_dir: &Path) -> Result<ExperimentReport> {
    config.validate()?;
    let corpus_path = config
        .corpus
        .as_ref()
        .ok_or_else(|| crate::config::ConfigError::Invalid("no corpus given".to_string()))?;
    let corpus = parse_corpus(&read(corpus_path)?)?;
    let resources = config.resources()?;
    let configs = config.feature_configs()?;
    let labels: Vec<bool> = corpus.iter().map(|r| r.label.is_helpful()).collect();
    let plan = stratified_folds(&labels, config.folds, config.seed)?;
    log::info!("{} reviews, {} configurations, {} folds", corpus.len(), configs.len(), config.folds);
    let report = run_experiments(&corpus, &configs, &plan, &config.experiment_options(), &resources)?;

    let manifests = manifest_dir(out_dir);
    fs::create_dir_all(&manifests).map_err(|e| Error::io(&manifests, e))?;
    write(&out_dir.join("config.toml"), &config.to_toml())?;
    write(&out_dir.join("report.txt"), &report.to_table())?;
    write(&out_dir.join("report.csv"), &report.to_csv())?;
    for result in &report.results {
        for (fold, entries) in &result.manifests {
            write(&manifests.join(format!("{}.fold{fold:02}.tsv", result.config.name)), &write_manifest(entries))?;
        }
    }
    if let Some(af) = report.results.iter().find(|r| r.config.uses_argument_features()) {
        let per_fold: Vec<Vec<ManifestEntry>> = af.manifests.iter().map(|(_, m)| m.clone()).collect();
        if let Ok(analysis) = analysis_report(&per_fold) {
            write(&out_dir.join("analysis.txt"), &format!("configuration {}\n{analysis}", af.config.name))?;
        }
    }
    Ok(report)
}

/// Pools manifest files into the argument-feature breakdown. A directory
/// argument contributes every `.tsv` file inside it, in name order.
pub fn cmd_analyze(paths: &[PathBuf]) -> Result<AnalysisReport> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut inner: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "tsv"))
                .collect();
            inner.sort();
            files.extend(inner);
        } else {
            files.push(p.clone());
        }
    }
    let manifests = files
        .iter()
        .map(|f| Ok(parse_manifest(&read(f)?)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(analysis_report(&manifests)?)
}
