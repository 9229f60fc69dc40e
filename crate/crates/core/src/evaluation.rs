//! Stratified cross-validation, the five table metrics, and the experiment
//! runner that evaluates feature configurations fold by fold.
//!
//! Within one experiment every fold fits its own vocabulary, feature
//! selection and scaling on the training split. Work that does not depend on
//! the configuration (selection, scaled columns, per-family Gram matrices) is
//! done once per fold and shared by all configurations that use the family.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::argument::{self, ArgumentProfile};
use crate::baseline::{self, Lexicon, Vocabulary};
use crate::classifier::{self, KernelMatrix, SvmParams};
use crate::corpus::AnnotatedReview;
use crate::features::{FeatureFamily, FeatureVector};
use crate::selection::{
    self, family_breakdown, ColumnSource, FamilyBreakdown, ManifestEntry, Selection, SparseColumns,
    DEFAULT_FILTER_THRESHOLD,
};
use crate::textproc::{token_surfaces, Stopwords};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{left} labels but {right} predictions or scores")]
    LengthMismatch { left: usize, right: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("cannot build {k} folds over {n} reviews")]
    InvalidFolds { k: usize, n: usize },
    #[error("every class needs at least one review")]
    EmptyClass,
    #[error("configuration `{0}` has no feature families")]
    NoFeatures(String),
    #[error("unknown feature configuration `{0}`")]
    UnknownConfiguration(String),
    #[error("configuration `{0}`: every fold had a single-class training split")]
    NoUsableFolds(String),
    #[error("no argument-feature selection data")]
    NoSelectionData,
}

/// How per-class precision, recall and F1 are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// Weighted by class support.
    #[default]
    Weighted,
    /// Unweighted mean over the two classes.
    Macro,
}

impl FromStr for Averaging {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "weighted" => Ok(Averaging::Weighted),
            "macro" => Ok(Averaging::Macro),
            _ => Err(format!("unknown averaging mode `{s}` (expected weighted or macro)")),
        }
    }
}

/// Which rows fit the vocabulary, selection and scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitScope {
    /// Training split of each fold only.
    #[default]
    PerFold,
    /// All reviews, test splits included. Leaks test labels into feature
    /// selection; exists so tests can demonstrate the leak.
    AllData,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Confusion counts with helpful as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    /// Helpful first, then not helpful.
    pub per_class: [ClassMetrics; 2],
    pub confusion: Confusion,
}

impl MetricsReport {
    /// Unweighted mean of the fold reports; confusion counts are summed.
    pub fn mean(reports: &[MetricsReport]) -> Result<MetricsReport, EvalError> {
        if reports.is_empty() {
            return Err(EvalError::Empty);
        }
        let k = reports.len() as f64;
        let avg = |f: &dyn Fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / k;
        let class = |c: usize| ClassMetrics {
            precision: avg(&|r| r.per_class[c].precision),
            recall: avg(&|r| r.per_class[c].recall),
            f1: avg(&|r| r.per_class[c].f1),
            support: reports.iter().map(|r| r.per_class[c].support).sum(),
        };
        let mut confusion = Confusion::default();
        for r in reports {
            confusion.tp += r.confusion.tp;
            confusion.fp += r.confusion.fp;
            confusion.tn += r.confusion.tn;
            confusion.fn_ += r.confusion.fn_;
        }
        Ok(MetricsReport {
            accuracy: avg(&|r| r.accuracy),
            precision: avg(&|r| r.precision),
            recall: avg(&|r| r.recall),
            f1: avg(&|r| r.f1),
            auc: avg(&|r| r.auc),
            per_class: [class(0), class(1)],
            confusion,
        })
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn class_metrics(tp: usize, predicted: usize, support: usize) -> ClassMetrics {
    let precision = ratio(tp, predicted);
    let recall = ratio(tp, support);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    ClassMetrics { precision, recall, f1, support }
}

/// Accuracy, averaged precision/recall/F1 and AUC of one set of predictions.
/// `scores` are decision values, larger meaning more likely helpful.
pub fn compute_metrics(
    y_true: &[bool],
    y_pred: &[bool],
    scores: &[f64],
    averaging: Averaging,
) -> Result<MetricsReport, EvalError> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch { left: y_true.len(), right: y_pred.len() });
    }
    if y_true.len() != scores.len() {
        return Err(EvalError::LengthMismatch { left: y_true.len(), right: scores.len() });
    }
    if y_true.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut c = Confusion::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fn_ += 1,
        }
    }
    let n = y_true.len();
    let per_class = [
        class_metrics(c.tp, c.tp + c.fp, c.tp + c.fn_),
        class_metrics(c.tn, c.tn + c.fn_, c.tn + c.fp),
    ];
    let combine = |f: fn(&ClassMetrics) -> f64| match averaging {
        Averaging::Weighted => per_class.iter().map(|m| f(m) * m.support as f64).sum::<f64>() / n as f64,
        Averaging::Macro => per_class.iter().map(f).sum::<f64>() / 2.0,
    };
    Ok(MetricsReport {
        accuracy: ratio(c.tp + c.tn, n),
        precision: combine(|m| m.precision),
        recall: combine(|m| m.recall),
        f1: combine(|m| m.f1),
        auc: auc(y_true, scores),
        per_class,
        confusion: c,
    })
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half. 0.5 when only one class is present.
pub fn auc(y_true: &[bool], scores: &[f64]) -> f64 {
    let positives = y_true.iter().filter(|&&t| t).count();
    let negatives = y_true.len() - positives;
    if positives == 0 || negatives == 0 {
        return 0.5;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Sum of midranks of the positives (ranks start at 1).
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let midrank = (start + end + 1) as f64 / 2.0;
        rank_sum += midrank * order[start..end].iter().filter(|&&i| y_true[i]).count() as f64;
        start = end;
    }
    let p = positives as f64;
    (rank_sum - p * (p + 1.0) / 2.0) / (p * negatives as f64)
}

/// Assignment of every review to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] != fold).collect()
    }

    pub fn train_mask(&self, fold: usize) -> Vec<bool> {
        self.assignments.iter().map(|&a| a != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

/// Shuffles each class with a seeded generator and deals the reviews into
/// `k` folds round-robin; the dealing counter continues from one class to
/// the next (helpful first).
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    let n = labels.len();
    if k < 2 || k > n {
        return Err(EvalError::InvalidFolds { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0; n];
    let mut counter = 0;
    for class in [true, false] {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        if members.is_empty() {
            return Err(EvalError::EmptyClass);
        }
        members.shuffle(&mut rng);
        for i in members {
            assignments[i] = counter % k;
            counter += 1;
        }
    }
    Ok(FoldPlan { k, seed, assignments })
}

/// A named union of feature families, e.g. `STR+AF`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureConfig {
    pub name: String,
    pub families: Vec<FeatureFamily>,
}

/// Row order of the result table.
pub const TABLE_CONFIGURATIONS: [&str; 9] =
    ["AF", "STR", "STR+AF", "UGR", "UGR+AF", "GALC", "GALC+AF", "INQUIRER", "INQUIRER+AF"];

impl FeatureConfig {
    pub fn new(families: Vec<FeatureFamily>) -> Result<Self, EvalError> {
        let name = families.iter().map(|f| f.tag()).collect::<Vec<_>>().join("+");
        if families.is_empty() {
            return Err(EvalError::NoFeatures(name));
        }
        Ok(FeatureConfig { name, families })
    }

    pub fn table() -> Vec<FeatureConfig> {
        TABLE_CONFIGURATIONS.iter().map(|s| s.parse().expect("built-in configuration")).collect()
    }

    /// Families with the argument feature set split into its four
    /// granularities, deduplicated in layout order.
    pub fn blocks(&self) -> Vec<FeatureFamily> {
        let mut out = BTreeSet::new();
        for &f in &self.families {
            if f == FeatureFamily::Af {
                out.extend(FeatureFamily::ARGUMENT);
            } else {
                out.insert(f);
            }
        }
        out.into_iter().collect()
    }

    pub fn uses_argument_features(&self) -> bool {
        self.families.iter().any(|f| *f == FeatureFamily::Af || f.is_argument())
    }
}

impl FromStr for FeatureConfig {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let families = s
            .split('+')
            .map(|t| t.trim().parse::<FeatureFamily>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| EvalError::UnknownConfiguration(s.to_string()))?;
        FeatureConfig::new(families)
    }
}

impl fmt::Display for FeatureConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Stopwords and lexicons used by the baseline families.
#[derive(Debug, Clone)]
pub struct Resources {
    pub stopwords: Stopwords,
    pub galc: Lexicon,
    pub inquirer: Lexicon,
}

impl Default for Resources {
    fn default() -> Self {
        Resources {
            stopwords: Stopwords::english(),
            galc: Lexicon::galc_stub(),
            inquirer: Lexicon::inquirer_stub(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentOptions {
    pub merge_clauses: bool,
    pub svm: SvmParams,
    pub averaging: Averaging,
    pub filter_threshold: usize,
    pub scope: FitScope,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            merge_clauses: false,
            svm: SvmParams::default(),
            averaging: Averaging::Weighted,
            filter_threshold: DEFAULT_FILTER_THRESHOLD,
            scope: FitScope::PerFold,
        }
    }
}

/// Column view of one argument granularity over per-review profiles.
pub struct ProfileColumns<'a> {
    family: FeatureFamily,
    profiles: &'a [ArgumentProfile],
}

impl<'a> ProfileColumns<'a> {
    /// # Panics
    /// If `family` is not an argument family.
    pub fn new(family: FeatureFamily, profiles: &'a [ArgumentProfile]) -> Self {
        assert!(argument::family_dimension(family).is_some(), "{family} is not an argument family");
        ProfileColumns { family, profiles }
    }
}

impl ColumnSource for ProfileColumns<'_> {
    fn family(&self) -> FeatureFamily {
        self.family
    }

    fn dimension(&self) -> usize {
        argument::family_dimension(self.family).expect("checked in new")
    }

    fn samples(&self) -> usize {
        self.profiles.len()
    }

    fn fill_column(&self, dim: usize, out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(self.profiles) {
            *o = p.value(self.family, dim);
        }
    }

    fn dimension_name(&self, dim: usize) -> String {
        argument::dimension_name(self.family, dim).unwrap_or_else(|| format!("dim{dim}"))
    }
}

/// Result of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigResult {
    pub config: FeatureConfig,
    /// Mean over the evaluated folds.
    pub metrics: MetricsReport,
    pub fold_metrics: Vec<(usize, MetricsReport)>,
    /// Folds skipped because their training split held a single class.
    pub skipped_folds: Vec<usize>,
    /// Selected dimensions per evaluated fold.
    pub manifests: Vec<(usize, Vec<ManifestEntry>)>,
}

impl ConfigResult {
    /// Selected argument dimensions of every evaluated fold.
    pub fn argument_manifest(&self) -> Vec<ManifestEntry> {
        self.manifests
            .iter()
            .flat_map(|(_, m)| m.iter().filter(|e| e.family.is_argument()).cloned())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub k: usize,
    pub seed: u64,
    pub averaging: Averaging,
    pub results: Vec<ConfigResult>,
}

impl ExperimentReport {
    pub fn get(&self, name: &str) -> Option<&ConfigResult> {
        self.results.iter().find(|r| r.config.name == name)
    }

    /// Aligned text table, one row per configuration.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:<14} {:>9} {:>9} {:>9} {:>9} {:>9}",
            "Features", "Accuracy", "Precision", "Recall", "F1-score", "AUC"
        )
        .unwrap();
        for r in &self.results {
            let m = &r.metrics;
            writeln!(
                out,
                "{:<14} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
                r.config.name, m.accuracy, m.precision, m.recall, m.f1, m.auc
            )
            .unwrap();
        }
        write!(out, "{}-fold cross-validation, seed {}, {:?} averaging", self.k, self.seed, self.averaging).unwrap();
        for r in self.results.iter().filter(|r| !r.skipped_folds.is_empty()) {
            write!(out, "\n{}: skipped folds {:?} (single-class training split)", r.config.name, r.skipped_folds)
                .unwrap();
        }
        out.push('\n');
        out
    }

    /// Comma-separated form of the table.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("Features,Accuracy,Precision,Recall,F1-score,AUC\n");
        for r in &self.results {
            let m = &r.metrics;
            writeln!(
                out,
                "{},{:.6},{:.6},{:.6},{:.6},{:.6}",
                r.config.name, m.accuracy, m.precision, m.recall, m.f1, m.auc
            )
            .unwrap();
        }
        out
    }
}

/// Per-review inputs that do not depend on the fold.
struct Prepared<'a> {
    labels: Vec<bool>,
    tokens: Vec<Vec<String>>,
    fixed: HashMap<FeatureFamily, Vec<FeatureVector>>,
    profiles: Vec<ArgumentProfile>,
    resources: &'a Resources,
}

impl<'a> Prepared<'a> {
    fn new(corpus: &[AnnotatedReview], blocks: &BTreeSet<FeatureFamily>, merge: bool, resources: &'a Resources) -> Self {
        let labels = corpus.iter().map(|r| r.label.is_helpful()).collect();
        let tokens: Vec<Vec<String>> = corpus.iter().map(|r| token_surfaces(&r.text).collect()).collect();
        let mut fixed = HashMap::new();
        for &family in blocks {
            let vectors: Vec<FeatureVector> = match family {
                FeatureFamily::Str => corpus.iter().map(baseline::str_features).collect(),
                FeatureFamily::Galc => tokens.iter().map(|t| baseline::galc_from_tokens(t, &resources.galc)).collect(),
                FeatureFamily::Inquirer => {
                    tokens.iter().map(|t| baseline::inquirer_from_tokens(t, &resources.inquirer)).collect()
                }
                _ => continue,
            };
            fixed.insert(family, vectors);
        }
        let profiles = if blocks.iter().any(|f| f.is_argument()) {
            crate::par_map(corpus, |r| ArgumentProfile::from_review(r, merge))
        } else {
            Vec::new()
        };
        Prepared { labels, tokens, fixed, profiles, resources }
    }

    fn ugr_vectors(&self, fit_rows: &[usize]) -> crate::Result<Vec<FeatureVector>> {
        let docs: Vec<&[String]> = fit_rows.iter().map(|&i| self.tokens[i].as_slice()).collect();
        let vocab = Vocabulary::from_token_lists(&docs, &self.resources.stopwords)?;
        Ok(self.tokens.iter().map(|t| baseline::ugr_from_tokens(t, &vocab)).collect())
    }
}

/// Accumulates `Σ x xᵀ` over scaled columns.
struct GramBuilder {
    n: usize,
    columns: Vec<Vec<f64>>,
}

impl GramBuilder {
    fn new(n: usize) -> Self {
        GramBuilder { n, columns: Vec::new() }
    }

    fn add(&mut self, scaled: Vec<f64>) {
        if scaled.iter().any(|&v| v != 0.0) {
            self.columns.push(scaled);
        }
    }

    /// Adds `sign · Σ x xᵀ` onto the symmetric `gram`.
    fn accumulate(&self, gram: &mut [f64], sign: f64) {
        let (n, u) = (self.n, self.columns.len());
        if u == 0 {
            return;
        }
        // Column chunks small enough to stay in cache while every pair of
        // rows is visited.
        const CHUNK: usize = 64;
        let mut rows = vec![0.0; n * CHUNK];
        let mut weighted = vec![0.0; n * CHUNK];
        let mut upper = vec![0.0; n * n];
        let mut start = 0;
        while start < u {
            let w = CHUNK.min(u - start);
            for (c, col) in self.columns[start..start + w].iter().enumerate() {
                for i in 0..n {
                    rows[i * w + c] = col[i];
                    weighted[i * w + c] = col[i] * sign;
                }
            }
            for i in 0..n {
                let wi = &weighted[i * w..(i + 1) * w];
                let out = &mut upper[i * n..(i + 1) * n];
                let mut j = i;
                while j + 4 <= n {
                    let d = dot_x4(wi, &rows[j * w..(j + 4) * w], w);
                    for l in 0..4 {
                        out[j + l] += d[l];
                    }
                    j += 4;
                }
                for j in j..n {
                    out[j] += wi.iter().zip(&rows[j * w..(j + 1) * w]).map(|(a, b)| a * b).sum::<f64>();
                }
            }
            start += w;
        }
        for i in 0..n {
            for j in i..n {
                let v = upper[i * n + j];
                gram[i * n + j] += v;
                if j != i {
                    gram[j * n + i] += v;
                }
            }
        }
    }
}

/// Dot products of `a` with four consecutive rows of width `w`.
fn dot_x4(a: &[f64], rows: &[f64], w: usize) -> [f64; 4] {
    let (r0, rest) = rows.split_at(w);
    let (r1, rest) = rest.split_at(w);
    let (r2, r3) = rest.split_at(w);
    let mut acc = [0.0; 4];
    for c in 0..w {
        let x = a[c];
        acc[0] += x * r0[c];
        acc[1] += x * r1[c];
        acc[2] += x * r2[c];
        acc[3] += x * r3[c];
    }
    acc
}

/// Selected, min-max scaled columns of one family on one fit scope, reduced
/// to a Gram matrix over all reviews.
struct Block {
    dims: usize,
    gram: Vec<f64>,
    manifest: Vec<ManifestEntry>,
}

/// One block per fit scope. `selections[s]` and `fit_rows[s]` describe
/// scope `s`. A reference Gram matrix holds every column kept anywhere,
/// scaled on the union of the fit rows; each scope then removes the columns
/// it does not keep or scales differently and adds its own versions.
fn scope_blocks(source: &dyn ColumnSource, selections: &[Selection], fit_rows: &[Vec<usize>]) -> Vec<Block> {
    let n = source.samples();
    let scopes = selections.len();
    let mut kept_in: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (s, sel) in selections.iter().enumerate() {
        for d in sel.dimensions() {
            kept_in.entry(d).or_default().push(s);
        }
    }
    let mut union_rows: Vec<usize> = fit_rows.iter().flatten().copied().collect();
    union_rows.sort_unstable();
    union_rows.dedup();
    let range = |column: &[f64], rows: &[usize]| {
        rows.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| (lo.min(column[i]), hi.max(column[i])))
    };
    let scale = |column: &[f64], (lo, hi): (f64, f64)| {
        let scaler = classifier::MinMaxScaler { min: vec![lo], max: vec![hi] };
        column.iter().map(|&v| scaler.scale(0, v)).collect::<Vec<f64>>()
    };
    let mut reference = GramBuilder::new(n);
    let mut removed: Vec<GramBuilder> = (0..scopes).map(|_| GramBuilder::new(n)).collect();
    let mut added: Vec<GramBuilder> = (0..scopes).map(|_| GramBuilder::new(n)).collect();
    let mut column = vec![0.0; n];
    for (d, in_scopes) in kept_in {
        source.fill_column(d, &mut column);
        let global = range(&column, &union_rows);
        let shared = scale(&column, global);
        let mut kept = in_scopes.iter().peekable();
        for s in 0..scopes {
            if kept.next_if_eq(&&s).is_none() {
                removed[s].add(shared.clone());
                continue;
            }
            let r = range(&column, &fit_rows[s]);
            if r != global {
                removed[s].add(shared.clone());
                added[s].add(scale(&column, r));
            }
        }
        reference.add(shared);
    }
    log::debug!(
        "{}: {} reference columns, {} rescaled",
        source.family(),
        reference.columns.len(),
        added.iter().map(|b| b.columns.len()).sum::<usize>()
    );
    let mut base = vec![0.0; n * n];
    reference.accumulate(&mut base, 1.0);
    removed
        .into_iter()
        .zip(added)
        .zip(selections)
        .map(|((minus, plus), sel)| {
            let mut gram = base.clone();
            minus.accumulate(&mut gram, -1.0);
            plus.accumulate(&mut gram, 1.0);
            Block { dims: sel.kept.len(), gram, manifest: sel.manifest(source) }
        })
        .collect()
}

enum FoldOutcome {
    Evaluated(MetricsReport, Vec<ManifestEntry>),
    Skipped,
}

/// Runs one configuration; see [`run_experiments`].
pub fn run_experiment(
    corpus: &[AnnotatedReview],
    config: &FeatureConfig,
    plan: &FoldPlan,
    options: &ExperimentOptions,
    resources: &Resources,
) -> crate::Result<ConfigResult> {
    let mut report = run_experiments(corpus, std::slice::from_ref(config), plan, options, resources)?;
    Ok(report.results.remove(0))
}

/// Cross-validates every configuration on the same folds.
pub fn run_experiments(
    corpus: &[AnnotatedReview],
    configs: &[FeatureConfig],
    plan: &FoldPlan,
    options: &ExperimentOptions,
    resources: &Resources,
) -> crate::Result<ExperimentReport> {
    if corpus.len() != plan.assignments.len() {
        return Err(EvalError::LengthMismatch { left: corpus.len(), right: plan.assignments.len() }.into());
    }
    if let Some(c) = configs.iter().find(|c| c.families.is_empty()) {
        return Err(EvalError::NoFeatures(c.name.clone()).into());
    }
    let families: BTreeSet<FeatureFamily> = configs.iter().flat_map(|c| c.blocks()).collect();
    let prepared = Prepared::new(corpus, &families, options.merge_clauses, resources);
    let n = corpus.len();
    let (fit_masks, fit_rows): (Vec<Vec<bool>>, Vec<Vec<usize>>) = match options.scope {
        FitScope::PerFold => (0..plan.k).map(|f| (plan.train_mask(f), plan.train_indices(f))).unzip(),
        FitScope::AllData => (vec![vec![true; n]], vec![(0..n).collect()]),
    };
    // Families whose values do not depend on the fold: every column is
    // sorted once for selection and scaled columns are shared across folds.
    let mut fixed_blocks: HashMap<FeatureFamily, Vec<Block>> = HashMap::new();
    for &family in families.iter().filter(|&&f| f != FeatureFamily::Ugr) {
        log::info!("selecting {family} dimensions");
        let profile_source;
        let sparse_source;
        let source: &dyn ColumnSource = if family.is_argument() {
            profile_source = ProfileColumns::new(family, &prepared.profiles);
            &profile_source
        } else {
            sparse_source = SparseColumns::new(&prepared.fixed[&family]);
            &sparse_source
        };
        let selections =
            selection::select_positive_folds(source, &prepared.labels, &fit_masks, options.filter_threshold)?;
        fixed_blocks.insert(family, scope_blocks(source, &selections, &fit_rows));
    }
    let folds: Vec<usize> = (0..plan.k).collect();
    let outcomes = crate::par_map(&folds, |&fold| {
        let scope = match options.scope {
            FitScope::PerFold => fold,
            FitScope::AllData => 0,
        };
        run_fold(&prepared, plan, fold, configs, &fixed_blocks, (&fit_masks[scope], &fit_rows[scope], scope), options)
    });
    let mut per_config: Vec<ConfigResult> = configs
        .iter()
        .map(|c| ConfigResult {
            config: c.clone(),
            metrics: empty_report(),
            fold_metrics: Vec::new(),
            skipped_folds: Vec::new(),
            manifests: Vec::new(),
        })
        .collect();
    for (fold, outcome) in outcomes.into_iter().enumerate() {
        for (result, o) in per_config.iter_mut().zip(outcome?) {
            match o {
                FoldOutcome::Evaluated(m, manifest) => {
                    result.fold_metrics.push((fold, m));
                    result.manifests.push((fold, manifest));
                }
                FoldOutcome::Skipped => result.skipped_folds.push(fold),
            }
        }
    }
    for result in &mut per_config {
        let reports: Vec<MetricsReport> = result.fold_metrics.iter().map(|(_, m)| m.clone()).collect();
        result.metrics =
            MetricsReport::mean(&reports).map_err(|_| EvalError::NoUsableFolds(result.config.name.clone()))?;
    }
    Ok(ExperimentReport { k: plan.k, seed: plan.seed, averaging: options.averaging, results: per_config })
}

fn empty_report() -> MetricsReport {
    MetricsReport {
        accuracy: 0.0,
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
        auc: 0.0,
        per_class: [ClassMetrics::default(); 2],
        confusion: Confusion::default(),
    }
}

fn run_fold(
    prepared: &Prepared<'_>,
    plan: &FoldPlan,
    fold: usize,
    configs: &[FeatureConfig],
    fixed_blocks: &HashMap<FeatureFamily, Vec<Block>>,
    (fit_mask, fit_rows, scope): (&[bool], &[usize], usize),
    options: &ExperimentOptions,
) -> crate::Result<Vec<FoldOutcome>> {
    let labels = &prepared.labels;
    let n = labels.len();
    let train = plan.train_indices(fold);
    let test = plan.test_indices(fold);
    let train_labels: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
    if train_labels.iter().all(|&l| l) || !train_labels.iter().any(|&l| l) {
        log::warn!("fold {fold}: training split holds a single class, skipped");
        return Ok(configs.iter().map(|_| FoldOutcome::Skipped).collect());
    }
    let ugr = if configs.iter().any(|c| c.blocks().contains(&FeatureFamily::Ugr)) {
        let vectors = prepared.ugr_vectors(fit_rows)?;
        let source = SparseColumns::new(&vectors);
        let sel = selection::select_positive_folds(
            &source,
            labels,
            std::slice::from_ref(&fit_mask.to_vec()),
            options.filter_threshold,
        )?;
        scope_blocks(&source, &sel, &[fit_rows.to_vec()]).pop()
    } else {
        None
    };
    let block = |f: FeatureFamily| match f {
        FeatureFamily::Ugr => ugr.as_ref().expect("unigram block built above"),
        _ => &fixed_blocks[&f][scope],
    };
    let y: Vec<f64> = train_labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let test_labels: Vec<bool> = test.iter().map(|&i| labels[i]).collect();
    let mut outcomes = Vec::with_capacity(configs.len());
    for config in configs {
        let parts: Vec<&Block> = config.blocks().into_iter().map(block).collect();
        let dims: usize = parts.iter().map(|b| b.dims).sum();
        let mut gram = vec![0.0; n * n];
        for b in &parts {
            for (g, v) in gram.iter_mut().zip(&b.gram) {
                *g += v;
            }
        }
        let kernel = options.svm.resolve_kernel(dims)?;
        let k = |i: usize, j: usize| kernel.from_gram(gram[i * n + j], gram[i * n + i], gram[j * n + j]);
        let mut values = Vec::with_capacity(train.len() * train.len());
        for &i in &train {
            values.extend(train.iter().map(|&j| k(i, j)));
        }
        let mut matrix = KernelMatrix::new(train.len(), values);
        let solution = classifier::solve_dual(&mut matrix, &y, options.svm.c, options.svm.solver)?;
        let scores: Vec<f64> = test
            .iter()
            .map(|&t| {
                train
                    .iter()
                    .zip(&solution.alpha)
                    .zip(&y)
                    .filter(|((_, a), _)| **a > 0.0)
                    .map(|((&i, a), yi)| a * yi * k(i, t))
                    .sum::<f64>()
                    - solution.rho
            })
            .collect();
        let predictions: Vec<bool> = scores.iter().map(|&s| classifier::label_of(s)).collect();
        let metrics = compute_metrics(&test_labels, &predictions, &scores, options.averaging)?;
        log::debug!("fold {fold} {}: f1 {:.3} auc {:.3}", config.name, metrics.f1, metrics.auc);
        let manifest = parts.iter().flat_map(|b| b.manifest.iter().cloned()).collect();
        outcomes.push(FoldOutcome::Evaluated(metrics, manifest));
    }
    Ok(outcomes)
}

/// Breakdown of the selected argument dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    /// Number of manifests (one per fold) that were pooled.
    pub manifests: usize,
    /// `None` when no argument dimension was selected in any manifest.
    pub breakdown: Option<FamilyBreakdown>,
}

impl AnalysisReport {
    /// Share of one construction kind within one argument family.
    pub fn kind_share(&self, family: FeatureFamily, kind: selection::DimensionKind) -> f64 {
        self.breakdown
            .as_ref()
            .and_then(|b| b.families.iter().find(|f| f.family == family))
            .and_then(|f| f.kinds.iter().find(|(k, _, _)| *k == kind))
            .map_or(0.0, |(_, _, s)| *s)
    }
}

/// Pools the selection manifests of several folds and reports how the
/// selected argument dimensions spread over granularities and kinds.
pub fn analysis_report(manifests: &[Vec<ManifestEntry>]) -> Result<AnalysisReport, EvalError> {
    if manifests.is_empty() {
        return Err(EvalError::NoSelectionData);
    }
    let pooled: Vec<ManifestEntry> = manifests.iter().flatten().cloned().collect();
    let breakdown = family_breakdown(&pooled).ok();
    Ok(AnalysisReport { manifests: manifests.len(), breakdown })
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use selection::DimensionKind;
        writeln!(f, "manifests pooled: {}", self.manifests)?;
        let Some(b) = &self.breakdown else {
            return writeln!(f, "no AF features selected");
        };
        writeln!(f, "{b}")?;
        let pct = |v: f64| 100.0 * v;
        writeln!(
            f,
            "token level: sum ratios {:.1}%, mean ratios {:.1}%",
            pct(self.kind_share(FeatureFamily::AfToken, DimensionKind::SumRatio)),
            pct(self.kind_share(FeatureFamily::AfToken, DimensionKind::MeanRatio))
        )?;
        let letter_ratio = self.kind_share(FeatureFamily::AfLetter, DimensionKind::SumRatio)
            + self.kind_share(FeatureFamily::AfLetter, DimensionKind::MeanRatio);
        writeln!(f, "letter level: ratio features {:.1}%", pct(letter_ratio))?;
        for family in [FeatureFamily::AfPosition, FeatureFamily::AfComponent] {
            writeln!(f, "{} share: {:.1}%", family.tag(), pct(b.share(family)))?;
        }
        Ok(())
    }
}
