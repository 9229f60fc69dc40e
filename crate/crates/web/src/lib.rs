//! Browser bindings for the argfeat pipeline. Each export takes plain
//! strings or numbers and returns a JSON string; errors surface as
//! JavaScript exceptions carrying the message.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use argfeat::argument::{ArgumentProfile, ComponentStats};
use argfeat::corpus::{assemble_components, fleiss_kappa, AnnotatedReview, ClauseAnnotation, ComponentType, Helpfulness};
use argfeat::evaluation::{analysis_report, run_experiments, stratified_folds, ExperimentOptions, FeatureConfig, Resources};
use argfeat::synth::{generate, SyntheticSpec};
use argfeat::textproc::{letter_count, token_count};

/// Reviews generated for the in-browser experiment; small enough to finish
/// in a few seconds.
pub const DEMO_REVIEWS: usize = 120;
pub const DEMO_FOLDS: usize = 5;

#[derive(Serialize)]
struct ComponentView {
    component_type: ComponentType,
    first_clause: usize,
    last_clause: usize,
    tokens: usize,
    letters: usize,
    position: f64,
}

#[derive(Serialize)]
struct ReviewAnalysis {
    clauses: usize,
    components: Vec<ComponentView>,
    types: Vec<ComponentStats>,
}

/// Parses `Label: clause text` lines into a single-annotator review.
fn parse_labelled_clauses(input: &str) -> Result<AnnotatedReview, String> {
    let mut clauses = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (label, text) = line
            .split_once(':')
            .ok_or_else(|| format!("line {}: expected `Label: clause text`", i + 1))?;
        let label: ComponentType = label.trim().parse().map_err(|e| format!("line {}: {e}", i + 1))?;
        clauses.push(ClauseAnnotation {
            text: text.trim().to_string(),
            annotator_labels: vec![label],
            final_label: label,
        });
    }
    if clauses.is_empty() {
        return Err("no clauses given".to_string());
    }
    let text = clauses.iter().map(|c| c.text.as_str()).collect::<Vec<_>>().join(" ");
    Ok(AnnotatedReview {
        id: "input".to_string(),
        text,
        clauses,
        helpful_votes: 1,
        total_votes: 1,
        label: Helpfulness::Helpful,
    })
}

pub fn analyze_review_json(input: &str, merge_adjacent: bool) -> Result<String, String> {
    let review = parse_labelled_clauses(input)?;
    let components = assemble_components(&review, merge_adjacent);
    let profile = ArgumentProfile::from_review(&review, merge_adjacent);
    let analysis = ReviewAnalysis {
        clauses: review.clauses.len(),
        components: components
            .iter()
            .map(|c| ComponentView {
                component_type: c.component_type,
                first_clause: c.first_clause,
                last_clause: c.last_clause,
                tokens: c.token_count,
                letters: c.letter_count,
                position: c.position,
            })
            .collect(),
        types: ComponentType::ALL.iter().map(|&t| profile.stats(t)).filter(|s| s.count > 0).collect(),
    };
    serde_json::to_string(&analysis).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct KappaResult {
    items: usize,
    raters: u64,
    /// `None` when every rating falls in one category.
    kappa: Option<f64>,
}

/// Rows of per-category counts, separated by whitespace or commas.
pub fn kappa_json(table: &str) -> Result<String, String> {
    let rows = table
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<u64>().map_err(|_| format!("row {}: `{s}` is not a count", i + 1)))
                .collect::<Result<Vec<u64>, String>>()
        })
        .collect::<Result<Vec<_>, String>>()?;
    let kappa = fleiss_kappa(&rows).map_err(|e| e.to_string())?;
    let result = KappaResult {
        items: rows.len(),
        raters: rows[0].iter().sum(),
        kappa: (!kappa.is_nan()).then_some(kappa),
    };
    serde_json::to_string(&result).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct ConfigScore {
    name: String,
    accuracy: f64,
    f1: f64,
    auc: f64,
}

#[derive(Serialize)]
struct FamilyScore {
    family: &'static str,
    share: f64,
}

#[derive(Serialize)]
struct ExperimentResult {
    reviews: usize,
    folds: usize,
    configurations: Vec<ConfigScore>,
    /// Shares of the selected argument dimensions per granularity.
    selected: Vec<FamilyScore>,
}

/// Cross-validates STR, AF and STR+AF on a small synthetic corpus.
pub fn synthetic_experiment_json(signal_strength: f64, seed: u64) -> Result<String, String> {
    let spec = SyntheticSpec { seed, reviews: DEMO_REVIEWS, signal_strength, ..SyntheticSpec::default() };
    let corpus = generate(&spec).map_err(|e| e.to_string())?;
    let labels: Vec<bool> = corpus.iter().map(|r| r.label.is_helpful()).collect();
    let plan = stratified_folds(&labels, DEMO_FOLDS, seed).map_err(|e| e.to_string())?;
    let configs = ["STR", "AF", "STR+AF"]
        .iter()
        .map(|s| s.parse::<FeatureConfig>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    let report = run_experiments(&corpus, &configs, &plan, &ExperimentOptions::default(), &Resources::default())
        .map_err(|e| e.to_string())?;
    let af = report.get("AF").ok_or("AF result missing")?;
    let manifests: Vec<_> = af.manifests.iter().map(|(_, m)| m.clone()).collect();
    let selected = analysis_report(&manifests)
        .ok()
        .and_then(|a| a.breakdown)
        .map(|b| b.families.iter().map(|f| FamilyScore { family: f.family.tag(), share: f.share }).collect())
        .unwrap_or_default();
    let result = ExperimentResult {
        reviews: corpus.len(),
        folds: DEMO_FOLDS,
        configurations: report
            .results
            .iter()
            .map(|r| ConfigScore {
                name: r.config.name.clone(),
                accuracy: r.metrics.accuracy,
                f1: r.metrics.f1,
                auc: r.metrics.auc,
            })
            .collect(),
        selected,
    };
    serde_json::to_string(&result).map_err(|e| e.to_string())
}

/// Token and letter counts as the feature extractor sees them.
pub fn clause_counts(text: &str) -> (usize, usize) {
    (token_count(text), letter_count(text))
}

#[wasm_bindgen(js_name = analyzeReview)]
pub fn analyze_review(input: &str, merge_adjacent: bool) -> Result<String, JsError> {
    analyze_review_json(input, merge_adjacent).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = fleissKappa)]
pub fn kappa(table: &str) -> Result<String, JsError> {
    kappa_json(table).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = syntheticExperiment)]
pub fn synthetic_experiment(signal_strength: f64, seed: u32) -> Result<String, JsError> {
    synthetic_experiment_json(signal_strength, u64::from(seed)).map_err(|e| JsError::new(&e))
}
