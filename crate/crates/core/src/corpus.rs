//! Annotated review corpus: data model, file format, label derivation,
//! annotation aggregation, agreement and component assembly.
//!
//! # File format
//!
//! A corpus file holds one JSON object per line (blank lines are ignored):
//!
//! ```text
//! {"id":"r1","text":"Nice room, great view.","helpful":3,"total":4,
//!  "clauses":[{"text":"Nice room","labels":"Claim,Claim,Premise"},
//!             {"text":"great view","labels":"Claim,Claim,Claim"}]}
//! ```
//!
//! * `helpful` (X) and `total` (Y) are vote counts with `0 <= X <= Y`, `Y > 0`.
//! * `labels` lists one component type per annotator, comma separated, using
//!   exactly the names `MajorClaim|Claim|Premise|PSIC|Background|Recommendation|NonArgumentative`.
//!   Every clause of a record must carry the same number of labels.
//! * Clauses, concatenated in order, must reproduce the alphanumeric content
//!   of `text`; only whitespace and punctuation may fall between them.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textproc::{letter_count, token_count};

/// The seven argument component types, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ComponentType {
    MajorClaim,
    Claim,
    Premise,
    #[serde(rename = "PSIC")]
    Psic,
    Background,
    Recommendation,
    NonArgumentative,
}

impl ComponentType {
    pub const COUNT: usize = 7;

    pub const ALL: [ComponentType; 7] = [
        ComponentType::MajorClaim,
        ComponentType::Claim,
        ComponentType::Premise,
        ComponentType::Psic,
        ComponentType::Background,
        ComponentType::Recommendation,
        ComponentType::NonArgumentative,
    ];

    /// Position in the canonical order; also the bit used in subset masks.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ComponentType::MajorClaim => "MajorClaim",
            ComponentType::Claim => "Claim",
            ComponentType::Premise => "Premise",
            ComponentType::Psic => "PSIC",
            ComponentType::Background => "Background",
            ComponentType::Recommendation => "Recommendation",
            ComponentType::NonArgumentative => "NonArgumentative",
        }
    }
}

impl fmt::Display for ComponentType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown component type `{0}`")]
pub struct UnknownComponentType(pub String);

impl FromStr for ComponentType {
    type Err = UnknownComponentType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| UnknownComponentType(s.to_string()))
    }
}

/// Binary helpfulness label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Helpfulness {
    Helpful,
    NotHelpful,
}

impl Helpfulness {
    pub fn is_helpful(self) -> bool {
        self == Helpfulness::Helpful
    }

    /// +1 for helpful, -1 otherwise.
    pub fn sign(self) -> f64 {
        if self.is_helpful() {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClauseAnnotation {
    pub text: String,
    pub annotator_labels: Vec<ComponentType>,
    pub final_label: ComponentType,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedReview {
    pub id: String,
    pub text: String,
    pub clauses: Vec<ClauseAnnotation>,
    /// X: readers who found the review helpful.
    pub helpful_votes: u64,
    /// Y: readers who voted.
    pub total_votes: u64,
    pub label: Helpfulness,
}

/// A typed span of one or more consecutive clauses.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgumentComponent {
    pub component_type: ComponentType,
    /// First clause of the span, 0-based.
    pub first_clause: usize,
    /// Last clause of the span (inclusive), 0-based.
    pub last_clause: usize,
    pub token_count: usize,
    pub letter_count: usize,
    /// (1-based index of the first clause) / (clauses in the review).
    pub position: f64,
}

impl ArgumentComponent {
    pub fn clause_span(&self) -> std::ops::RangeInclusive<usize> {
        self.first_clause..=self.last_clause
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unknown component type `{token}`")]
    UnknownLabel { line: usize, token: String },
    #[error("line {line}: record `{id}` has helpful votes {helpful} > total votes {total}")]
    VotesExceedTotal { line: usize, id: String, helpful: u64, total: u64 },
    #[error("line {line}: record `{id}` has total votes 0, label undefined")]
    UndefinedLabel { line: usize, id: String },
    #[error("line {line}: record `{id}` clause {clause} has no annotator labels")]
    NoLabels { line: usize, id: String, clause: usize },
    #[error("line {line}: record `{id}` clause {clause} has {found} labels, expected {expected}")]
    RaterCountMismatch { line: usize, id: String, clause: usize, expected: usize, found: usize },
    #[error("line {line}: record `{id}` clauses do not cover the review text")]
    ClauseCoverage { line: usize, id: String },
    #[error("line {line}: duplicate record id `{id}`")]
    DuplicateId { line: usize, id: String },
}

impl CorpusError {
    pub fn line(&self) -> usize {
        match self {
            CorpusError::Malformed { line, .. }
            | CorpusError::UnknownLabel { line, .. }
            | CorpusError::VotesExceedTotal { line, .. }
            | CorpusError::UndefinedLabel { line, .. }
            | CorpusError::NoLabels { line, .. }
            | CorpusError::RaterCountMismatch { line, .. }
            | CorpusError::ClauseCoverage { line, .. }
            | CorpusError::DuplicateId { line, .. } => *line,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("total votes is 0; helpfulness label undefined")]
pub struct UndefinedLabel;

/// Helpful iff `x / y >= 0.75`, compared exactly as `4x >= 3y`.
pub fn derive_label(x: u64, y: u64) -> Result<Helpfulness, UndefinedLabel> {
    if y == 0 {
        return Err(UndefinedLabel);
    }
    if 4 * u128::from(x) >= 3 * u128::from(y) {
        Ok(Helpfulness::Helpful)
    } else {
        Ok(Helpfulness::NotHelpful)
    }
}

/// Most frequent label; ties go to the earliest type in canonical order.
///
/// # Panics
/// If `labels` is empty.
pub fn majority_vote(labels: &[ComponentType]) -> ComponentType {
    assert!(!labels.is_empty(), "majority_vote needs at least one label");
    let mut counts = [0usize; ComponentType::COUNT];
    for l in labels {
        counts[l.index()] += 1;
    }
    let mut best = 0;
    for i in 1..ComponentType::COUNT {
        if counts[i] > counts[best] {
            best = i;
        }
    }
    ComponentType::ALL[best]
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KappaError {
    #[error("agreement table has no rows")]
    Empty,
    #[error("row {row} sums to {found}, expected {expected} raters")]
    InconsistentRow { row: usize, expected: u64, found: u64 },
    #[error("at least two raters per item are required, found {0}")]
    TooFewRaters(u64),
}

/// Fleiss' kappa over an item × category count table.
///
/// Each row holds, per category, how many raters chose it for that item;
/// all rows must sum to the same rater count `n >= 2`. When every rating
/// falls into a single category the chance agreement is 1 and kappa is
/// undefined; this returns `NaN` in that case.
pub fn fleiss_kappa<R: AsRef<[u64]>>(table: &[R]) -> Result<f64, KappaError> {
    let first = table.first().ok_or(KappaError::Empty)?;
    let raters: u64 = first.as_ref().iter().sum();
    if raters < 2 {
        return Err(KappaError::TooFewRaters(raters));
    }
    let categories = table.iter().map(|r| r.as_ref().len()).max().unwrap_or(0);
    let mut column_totals = vec![0u64; categories];
    let mut agreement_sum = 0.0;
    for (i, row) in table.iter().enumerate() {
        let row = row.as_ref();
        let sum: u64 = row.iter().sum();
        if sum != raters {
            return Err(KappaError::InconsistentRow { row: i, expected: raters, found: sum });
        }
        let pairs: u64 = row.iter().map(|&c| c * c).sum::<u64>() - raters;
        agreement_sum += pairs as f64 / (raters * (raters - 1)) as f64;
        for (j, &c) in row.iter().enumerate() {
            column_totals[j] += c;
        }
    }
    let items = table.len() as f64;
    let total_ratings = items * raters as f64;
    if column_totals.iter().filter(|&&c| c > 0).count() <= 1 {
        return Ok(f64::NAN);
    }
    let p_bar = agreement_sum / items;
    let p_e: f64 = column_totals
        .iter()
        .map(|&c| {
            let p = c as f64 / total_ratings;
            p * p
        })
        .sum();
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Groups a review's clauses into argument components.
///
/// With `merge_adjacent`, each maximal run of consecutive clauses sharing a
/// final label becomes one component; otherwise every clause is its own.
pub fn assemble_components(review: &AnnotatedReview, merge_adjacent: bool) -> Vec<ArgumentComponent> {
    let total = review.clauses.len();
    let mut components: Vec<ArgumentComponent> = Vec::new();
    for (i, clause) in review.clauses.iter().enumerate() {
        let tokens = token_count(&clause.text);
        let letters = letter_count(&clause.text);
        match components.last_mut() {
            Some(last) if merge_adjacent && last.component_type == clause.final_label => {
                last.last_clause = i;
                last.token_count += tokens;
                last.letter_count += letters;
            }
            _ => components.push(ArgumentComponent {
                component_type: clause.final_label,
                first_clause: i,
                last_clause: i,
                token_count: tokens,
                letter_count: letters,
                position: (i + 1) as f64 / total as f64,
            }),
        }
    }
    components
}

/// One row of the corpus statistics table.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeStatistics {
    pub component_type: ComponentType,
    pub count: usize,
    /// One-vs-rest Fleiss' kappa; `None` when undefined (type never used,
    /// or clauses with differing rater counts).
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStatistics {
    pub reviews: usize,
    pub clauses: usize,
    pub merged: bool,
    pub rows: Vec<TypeStatistics>,
    /// Seven-category kappa over all clauses.
    pub overall_kappa: Option<f64>,
}

/// Component counts and per-type agreement for each component type.
pub fn corpus_statistics(reviews: &[AnnotatedReview], merge_adjacent: bool) -> CorpusStatistics {
    let mut counts = [0usize; ComponentType::COUNT];
    for review in reviews {
        for c in assemble_components(review, merge_adjacent) {
            counts[c.component_type.index()] += 1;
        }
    }
    let clause_rows: Vec<[u64; ComponentType::COUNT]> = reviews
        .iter()
        .flat_map(|r| r.clauses.iter())
        .map(|c| {
            let mut row = [0u64; ComponentType::COUNT];
            for l in &c.annotator_labels {
                row[l.index()] += 1;
            }
            row
        })
        .collect();
    let defined = |k: Result<f64, KappaError>| k.ok().filter(|v| !v.is_nan());
    let rows = ComponentType::ALL
        .iter()
        .map(|&t| {
            let binary: Vec<[u64; 2]> = clause_rows
                .iter()
                .map(|row| {
                    let n: u64 = row.iter().sum();
                    [row[t.index()], n - row[t.index()]]
                })
                .collect();
            TypeStatistics {
                component_type: t,
                count: counts[t.index()],
                kappa: defined(fleiss_kappa(&binary)),
            }
        })
        .collect();
    CorpusStatistics {
        reviews: reviews.len(),
        clauses: clause_rows.len(),
        merged: merge_adjacent,
        rows,
        overall_kappa: defined(fleiss_kappa(&clause_rows)),
    }
}

impl fmt::Display for CorpusStatistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} reviews, {} clauses, {}",
            self.reviews,
            self.clauses,
            if self.merged { "adjacent same-type clauses merged" } else { "one component per clause" }
        )?;
        writeln!(f, "{:<18} {:>8} {:>8}", "Component Type", "Number", "Kappa")?;
        for row in &self.rows {
            let kappa = row.kappa.map_or_else(|| "n/a".to_string(), |k| format!("{k:.2}"));
            writeln!(f, "{:<18} {:>8} {:>8}", row.component_type.name(), row.count, kappa)?;
        }
        let overall = self.overall_kappa.map_or_else(|| "n/a".to_string(), |k| format!("{k:.2}"));
        write!(f, "{:<18} {:>8} {:>8}", "All types", "", overall)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClause {
    text: String,
    labels: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    id: String,
    text: String,
    helpful: u64,
    total: u64,
    clauses: Vec<RawClause>,
}

fn alphanumerics(s: &str) -> impl Iterator<Item = char> + '_ {
    s.chars().filter(|c| c.is_alphanumeric())
}

fn parse_record(line_no: usize, line: &str) -> Result<AnnotatedReview, CorpusError> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| CorpusError::Malformed {
        line: line_no,
        message: e.to_string(),
    })?;
    if raw.helpful > raw.total {
        return Err(CorpusError::VotesExceedTotal {
            line: line_no,
            id: raw.id,
            helpful: raw.helpful,
            total: raw.total,
        });
    }
    let label = derive_label(raw.helpful, raw.total).map_err(|_| CorpusError::UndefinedLabel {
        line: line_no,
        id: raw.id.clone(),
    })?;
    let mut clauses = Vec::with_capacity(raw.clauses.len());
    let mut raters = None;
    for (ci, clause) in raw.clauses.into_iter().enumerate() {
        let labels = clause
            .labels
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<ComponentType>().map_err(|e| CorpusError::UnknownLabel {
                    line: line_no,
                    token: e.0,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if labels.is_empty() {
            return Err(CorpusError::NoLabels { line: line_no, id: raw.id, clause: ci });
        }
        match raters {
            None => raters = Some(labels.len()),
            Some(expected) if expected != labels.len() => {
                return Err(CorpusError::RaterCountMismatch {
                    line: line_no,
                    id: raw.id,
                    clause: ci,
                    expected,
                    found: labels.len(),
                })
            }
            _ => {}
        }
        clauses.push(ClauseAnnotation {
            final_label: majority_vote(&labels),
            text: clause.text,
            annotator_labels: labels,
        });
    }
    let covered = alphanumerics(&raw.text).eq(clauses.iter().flat_map(|c| alphanumerics(&c.text)));
    if !covered {
        return Err(CorpusError::ClauseCoverage { line: line_no, id: raw.id });
    }
    Ok(AnnotatedReview {
        id: raw.id,
        text: raw.text,
        clauses,
        helpful_votes: raw.helpful,
        total_votes: raw.total,
        label,
    })
}

fn records(document: &str) -> impl Iterator<Item = (usize, &str)> {
    document
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses a corpus document, stopping at the first invalid record.
pub fn parse_corpus(document: &str) -> Result<Vec<AnnotatedReview>, CorpusError> {
    let mut seen = HashSet::new();
    let mut reviews = Vec::new();
    for (line_no, line) in records(document) {
        let review = parse_record(line_no, line)?;
        if !seen.insert(review.id.clone()) {
            return Err(CorpusError::DuplicateId { line: line_no, id: review.id });
        }
        reviews.push(review);
    }
    Ok(reviews)
}

/// Checks every record and reports all problems found, in line order.
pub fn validate_corpus(document: &str) -> Vec<CorpusError> {
    let mut seen = HashSet::new();
    let mut errors = Vec::new();
    for (line_no, line) in records(document) {
        match parse_record(line_no, line) {
            Ok(review) => {
                if !seen.insert(review.id.clone()) {
                    errors.push(CorpusError::DuplicateId { line: line_no, id: review.id });
                }
            }
            Err(e) => errors.push(e),
        }
    }
    errors
}

/// Serializes reviews in the corpus file format, one record per line.
pub fn write_corpus(reviews: &[AnnotatedReview]) -> String {
    let mut out = String::new();
    for r in reviews {
        let raw = RawRecord {
            id: r.id.clone(),
            text: r.text.clone(),
            helpful: r.helpful_votes,
            total: r.total_votes,
            clauses: r
                .clauses
                .iter()
                .map(|c| RawClause {
                    text: c.text.clone(),
                    labels: c
                        .annotator_labels
                        .iter()
                        .map(|l| l.name())
                        .collect::<Vec<_>>()
                        .join(","),
                })
                .collect(),
        };
        out.push_str(&serde_json::to_string(&raw).expect("corpus records always serialize"));
        out.push('\n');
    }
    out
}
