//! Information-gain scoring with a single MDL-accepted binary split, the
//! positive-IG filter for high-dimensional families, and the breakdown of
//! selected argument features by granularity.
//!
//! A column is binarized at the midpoint threshold that minimizes the
//! weighted conditional entropy of the labels. The split is kept only if it
//! passes the Fayyad–Irani MDL test
//!
//! ```text
//! gain > (log2(N − 1) + log2(3^k − 2) − [k·H(S) − k1·H(S1) − k2·H(S2)]) / N
//! ```
//!
//! where `k`, `k1`, `k2` count the classes present in the whole sample and
//! the two sides. Otherwise the information gain is 0. Entropies are in bits.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::argument::AfDimension;
use crate::features::{FeatureFamily, FeatureVector};

/// Families with more dimensions than this are filtered to positive-IG dimensions.
pub const DEFAULT_FILTER_THRESHOLD: usize = 10_000;

/// Ties between candidate splits closer than this keep the lower threshold.
const TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectionError {
    #[error("column has {values} values but there are {labels} labels")]
    LengthMismatch { values: usize, labels: usize },
    #[error("information gain needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("training fold is empty")]
    EmptyTrainingFold,
    #[error("no argument features were selected")]
    EmptySelection,
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
}

/// Best accepted binary split of a column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    /// Information gain in bits; 0 when no split passes the MDL test.
    pub ig: f64,
    /// Values `<= threshold` go left. `None` when `ig == 0`.
    pub threshold: Option<f64>,
}

impl Split {
    const NONE: Split = Split { ig: 0.0, threshold: None };
}

/// Information-gain score of one dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IgScore {
    pub dimension: usize,
    pub ig: f64,
    pub threshold: Option<f64>,
}

/// `k·log2(k)` for every count up to a sample size.
struct EntropyTable {
    xlogx: Vec<f64>,
}

impl EntropyTable {
    fn new(max: usize) -> Self {
        let xlogx = (0..=max)
            .map(|k| if k == 0 { 0.0 } else { k as f64 * (k as f64).log2() })
            .collect();
        EntropyTable { xlogx }
    }

    /// `n · H` of a node with `pos` positives among `n`.
    fn scaled_entropy(&self, pos: usize, n: usize) -> f64 {
        self.xlogx[n] - self.xlogx[pos] - self.xlogx[n - pos]
    }
}

fn classes_present(pos: usize, n: usize) -> f64 {
    f64::from(u8::from(pos > 0) + u8::from(pos < n))
}

/// Finds the MDL-accepted best split over values sorted ascending with
/// their labels. Candidate thresholds sit between consecutive distinct values.
fn best_split<I>(items: I, table: &EntropyTable) -> Split
where
    I: Iterator<Item = (f64, bool)> + Clone,
{
    let (n, pos) = items.clone().fold((0usize, 0usize), |(n, p), (_, l)| (n + 1, p + usize::from(l)));
    if n < 2 || pos == 0 || pos == n {
        return Split::NONE;
    }
    let whole = table.scaled_entropy(pos, n);
    // (conditional entropy · n, left size, left positives, threshold)
    let mut best: Option<(f64, usize, usize, f64)> = None;
    let (mut left_n, mut left_pos) = (0, 0);
    let mut iter = items.peekable();
    while let Some((value, label)) = iter.next() {
        left_n += 1;
        left_pos += usize::from(label);
        let Some(&(next, _)) = iter.peek() else { break };
        if value == next {
            continue;
        }
        let cond = table.scaled_entropy(left_pos, left_n) + table.scaled_entropy(pos - left_pos, n - left_n);
        if best.is_none_or(|(b, ..)| cond < b - TIE_EPSILON) {
            best = Some((cond, left_n, left_pos, (value + next) / 2.0));
        }
    }
    let Some((cond, left_n, left_pos, threshold)) = best else {
        return Split::NONE;
    };
    let nf = n as f64;
    let gain = (whole - cond) / nf;
    let right_n = n - left_n;
    let right_pos = pos - left_pos;
    let h = whole / nf;
    let h1 = table.scaled_entropy(left_pos, left_n) / left_n as f64;
    let h2 = table.scaled_entropy(right_pos, right_n) / right_n as f64;
    let k = classes_present(pos, n);
    let k1 = classes_present(left_pos, left_n);
    let k2 = classes_present(right_pos, right_n);
    let delta = (3f64.powf(k) - 2.0).log2() - (k * h - k1 * h1 - k2 * h2);
    let bound = ((nf - 1.0).log2() + delta) / nf;
    if gain > bound {
        Split { ig: gain, threshold: Some(threshold) }
    } else {
        Split::NONE
    }
}

/// Information gain of a real column against binary labels.
pub fn information_gain(column: &[f64], labels: &[bool]) -> Result<Split, SelectionError> {
    if column.len() != labels.len() {
        return Err(SelectionError::LengthMismatch { values: column.len(), labels: labels.len() });
    }
    if column.len() < 2 {
        return Err(SelectionError::TooFewSamples(column.len()));
    }
    let mut sorted: Vec<(f64, bool)> = column.iter().copied().zip(labels.iter().copied()).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(best_split(sorted.iter().copied(), &EntropyTable::new(column.len())))
}

/// Column-wise access to a feature family over a fixed set of samples.
pub trait ColumnSource: Sync {
    fn family(&self) -> FeatureFamily;
    fn dimension(&self) -> usize;
    fn samples(&self) -> usize;
    /// Writes the values of dimension `dim` for every sample into `out`.
    fn fill_column(&self, dim: usize, out: &mut [f64]);
    fn dimension_name(&self, dim: usize) -> String;
}

/// Column view over sparse row vectors of one family.
pub struct SparseColumns<'a> {
    family: FeatureFamily,
    dimension: usize,
    rows: usize,
    columns: Vec<Vec<(usize, f64)>>,
    names: Option<&'a FeatureVector>,
}

impl<'a> SparseColumns<'a> {
    /// # Panics
    /// If the vectors disagree on family or dimension.
    pub fn new(vectors: &'a [FeatureVector]) -> Self {
        let (family, dimension) = vectors
            .first()
            .map_or((FeatureFamily::Str, 0), |v| (v.family(), v.dimension()));
        let mut columns = vec![Vec::new(); dimension];
        for (r, v) in vectors.iter().enumerate() {
            assert!(v.family() == family && v.dimension() == dimension, "mixed feature layouts");
            for &(i, x) in v.entries() {
                columns[i].push((r, x));
            }
        }
        SparseColumns {
            family,
            dimension,
            rows: vectors.len(),
            columns,
            names: vectors.first(),
        }
    }
}

impl ColumnSource for SparseColumns<'_> {
    fn family(&self) -> FeatureFamily {
        self.family
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn samples(&self) -> usize {
        self.rows
    }

    fn fill_column(&self, dim: usize, out: &mut [f64]) {
        out.fill(0.0);
        for &(r, x) in &self.columns[dim] {
            out[r] = x;
        }
    }

    fn dimension_name(&self, dim: usize) -> String {
        self.names
            .and_then(|v| v.dimension_name(dim))
            .unwrap_or_else(|| format!("dim{dim}"))
    }
}

/// Dimensions kept for one family on one training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub family: FeatureFamily,
    pub dimension: usize,
    /// Whether the positive-IG filter was applied.
    pub filtered: bool,
    /// Kept dimensions, ascending. Without filtering every dimension is kept
    /// with `ig` 0 and no threshold.
    pub kept: Vec<IgScore>,
}

impl Selection {
    pub fn dimensions(&self) -> impl Iterator<Item = usize> + '_ {
        self.kept.iter().map(|s| s.dimension)
    }

    fn passthrough(family: FeatureFamily, dimension: usize) -> Self {
        Selection {
            family,
            dimension,
            filtered: false,
            kept: (0..dimension).map(|d| IgScore { dimension: d, ig: 0.0, threshold: None }).collect(),
        }
    }

    pub fn manifest(&self, source: &dyn ColumnSource) -> Vec<ManifestEntry> {
        self.kept
            .iter()
            .map(|s| ManifestEntry {
                family: self.family,
                name: source.dimension_name(s.dimension),
                ig: s.ig,
                threshold: s.threshold,
            })
            .collect()
    }
}

/// Positive-IG selection for several training subsets of the same samples.
///
/// `train_masks[f][i]` marks sample `i` as part of training set `f`. Each
/// column is sorted once and then scanned per training set. Families whose
/// dimensionality does not exceed `filter_threshold` pass through whole.
pub fn select_positive_folds(
    source: &dyn ColumnSource,
    labels: &[bool],
    train_masks: &[Vec<bool>],
    filter_threshold: usize,
) -> Result<Vec<Selection>, SelectionError> {
    let n = source.samples();
    if labels.len() != n {
        return Err(SelectionError::LengthMismatch { values: n, labels: labels.len() });
    }
    for mask in train_masks {
        if mask.len() != n {
            return Err(SelectionError::LengthMismatch { values: n, labels: mask.len() });
        }
        if !mask.iter().any(|&m| m) {
            return Err(SelectionError::EmptyTrainingFold);
        }
    }
    let (family, dim) = (source.family(), source.dimension());
    if dim <= filter_threshold {
        return Ok(train_masks.iter().map(|_| Selection::passthrough(family, dim)).collect());
    }
    let table = EntropyTable::new(n);
    const CHUNK: usize = 512;
    let chunks: Vec<usize> = (0..dim).step_by(CHUNK).collect();
    let scored: Vec<Vec<Vec<IgScore>>> = crate::par_map(&chunks, |&start| {
        let mut per_fold = vec![Vec::new(); train_masks.len()];
        let mut column = vec![0.0; n];
        let mut sorted: Vec<(f64, u32)> = Vec::with_capacity(n);
        for d in start..(start + CHUNK).min(dim) {
            source.fill_column(d, &mut column);
            let first = column[0];
            if column.iter().all(|&v| v == first) {
                continue;
            }
            sorted.clear();
            sorted.extend(column.iter().enumerate().map(|(i, &v)| (v, i as u32)));
            sorted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for (f, mask) in train_masks.iter().enumerate() {
                let items = sorted
                    .iter()
                    .filter(|e| mask[e.1 as usize])
                    .map(|e| (e.0, labels[e.1 as usize]));
                let split = best_split(items, &table);
                if split.ig > 0.0 {
                    per_fold[f].push(IgScore { dimension: d, ig: split.ig, threshold: split.threshold });
                }
            }
        }
        per_fold
    });
    let mut selections: Vec<Selection> = train_masks
        .iter()
        .map(|_| Selection { family, dimension: dim, filtered: true, kept: Vec::new() })
        .collect();
    for chunk in scored {
        for (sel, part) in selections.iter_mut().zip(chunk) {
            sel.kept.extend(part);
        }
    }
    Ok(selections)
}

/// Positive-IG selection on one training matrix of a single family.
pub fn select_positive(
    vectors: &[FeatureVector],
    labels: &[bool],
    filter_threshold: usize,
) -> Result<Selection, SelectionError> {
    if vectors.is_empty() {
        return Err(SelectionError::EmptyTrainingFold);
    }
    let source = SparseColumns::new(vectors);
    let mask = vec![true; vectors.len()];
    Ok(select_positive_folds(&source, labels, &[mask], filter_threshold)?.remove(0))
}

/// One selected dimension as written to a manifest file.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub family: FeatureFamily,
    pub name: String,
    pub ig: f64,
    pub threshold: Option<f64>,
}

/// `family<TAB>dimension-name<TAB>ig<TAB>threshold` lines; `-` marks a
/// missing threshold.
pub fn write_manifest(entries: &[ManifestEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let threshold = e.threshold.map_or_else(|| "-".to_string(), |t| t.to_string());
        out.push_str(&format!("{}\t{}\t{}\t{}\n", e.family.tag(), e.name, e.ig, threshold));
    }
    out
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>, SelectionError> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| SelectionError::Manifest { line: i + 1, message };
        let fields: Vec<&str> = line.split('\t').collect();
        let [family, name, ig, threshold] = fields[..] else {
            return Err(bad(format!("expected 4 tab-separated fields, found {}", fields.len())));
        };
        entries.push(ManifestEntry {
            family: family.parse().map_err(|e: crate::features::UnknownFamily| bad(e.to_string()))?,
            name: name.to_string(),
            ig: ig.parse().map_err(|_| bad(format!("bad ig `{ig}`")))?,
            threshold: match threshold {
                "-" => None,
                t => Some(t.parse().map_err(|_| bad(format!("bad threshold `{t}`")))?),
            },
        });
    }
    Ok(entries)
}

/// How an argument dimension is constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DimensionKind {
    /// Per-type statistic (one of the 35 leading dimensions).
    TypeStatistic,
    CountRatio,
    SumRatio,
    MeanRatio,
}

impl DimensionKind {
    pub fn of(dim: AfDimension) -> Self {
        match dim {
            AfDimension::CountRatio(..) => DimensionKind::CountRatio,
            AfDimension::TypeStat { .. } => DimensionKind::TypeStatistic,
            AfDimension::SumRatio(..) => DimensionKind::SumRatio,
            AfDimension::MeanRatio(..) => DimensionKind::MeanRatio,
        }
    }

    /// Recovers the kind from a dimension name as written in manifests.
    pub fn from_name(name: &str) -> Self {
        if name.contains(".count_ratio[") {
            DimensionKind::CountRatio
        } else if name.contains(".sum_ratio[") {
            DimensionKind::SumRatio
        } else if name.contains(".mean_ratio[") {
            DimensionKind::MeanRatio
        } else {
            DimensionKind::TypeStatistic
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DimensionKind::TypeStatistic => "per-type statistics",
            DimensionKind::CountRatio => "count ratios",
            DimensionKind::SumRatio => "sum ratios",
            DimensionKind::MeanRatio => "mean ratios",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyShare {
    pub family: FeatureFamily,
    pub count: usize,
    /// Share of all selected argument dimensions, in [0, 1].
    pub share: f64,
    /// Counts and within-family shares per construction kind.
    pub kinds: Vec<(DimensionKind, usize, f64)>,
}

/// Distribution of selected argument dimensions over the four granularities.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyBreakdown {
    pub total: usize,
    pub families: Vec<FamilyShare>,
}

impl FamilyBreakdown {
    /// The granularity holding the largest share (first in layout order on ties).
    pub fn argmax(&self) -> FeatureFamily {
        self.families
            .iter()
            .fold(None::<&FamilyShare>, |best, f| match best {
                Some(b) if b.count >= f.count => Some(b),
                _ => Some(f),
            })
            .map(|f| f.family)
            .expect("breakdown covers four families")
    }

    pub fn share(&self, family: FeatureFamily) -> f64 {
        self.families.iter().find(|f| f.family == family).map_or(0.0, |f| f.share)
    }
}

/// Shares of the four argument granularities among selected dimensions.
/// Entries of other families are ignored.
pub fn family_breakdown(selected: &[ManifestEntry]) -> Result<FamilyBreakdown, SelectionError> {
    let mut counts: BTreeMap<FeatureFamily, BTreeMap<DimensionKind, usize>> = BTreeMap::new();
    let mut total = 0;
    for e in selected.iter().filter(|e| FeatureFamily::ARGUMENT.contains(&e.family)) {
        *counts.entry(e.family).or_default().entry(DimensionKind::from_name(&e.name)).or_default() += 1;
        total += 1;
    }
    if total == 0 {
        return Err(SelectionError::EmptySelection);
    }
    let families = FeatureFamily::ARGUMENT
        .iter()
        .map(|&family| {
            let kinds = counts.remove(&family).unwrap_or_default();
            let count: usize = kinds.values().sum();
            FamilyShare {
                family,
                count,
                share: count as f64 / total as f64,
                kinds: kinds
                    .into_iter()
                    .map(|(k, c)| (k, c, c as f64 / count as f64))
                    .collect(),
            }
        })
        .collect();
    Ok(FamilyBreakdown { total, families })
}

impl fmt::Display for FamilyBreakdown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "selected argument features: {}", self.total)?;
        writeln!(f, "{:<14} {:>8} {:>8}", "family", "count", "share")?;
        for fam in &self.families {
            writeln!(f, "{:<14} {:>8} {:>7.1}%", fam.family.tag(), fam.count, 100.0 * fam.share)?;
            for (kind, count, share) in &fam.kinds {
                writeln!(f, "  {:<20} {:>6} {:>7.1}%", kind.label(), count, 100.0 * share)?;
            }
        }
        write!(f, "largest share: {}", self.argmax().tag())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::DimensionNames;

    #[test]
    fn perfect_split() {
        let s = information_gain(&[0.0, 0.0, 1.0, 1.0], &[false, false, true, true]).unwrap();
        assert!((s.ig - 1.0).abs() < 1e-12);
        assert_eq!(s.threshold, Some(0.5));
        // Swapped labels give the same gain.
        let s = information_gain(&[0.0, 0.0, 1.0, 1.0], &[true, true, false, false]).unwrap();
        assert!((s.ig - 1.0).abs() < 1e-12);
        let col = [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
        let labels = [false, false, false, false, true, true, true, true];
        let s = information_gain(&col, &labels).unwrap();
        assert!((s.ig - 1.0).abs() < 1e-12);
        assert_eq!(s.threshold, Some(0.5));
    }

    #[test]
    fn degenerate_columns() {
        assert_eq!(information_gain(&[3.0; 6], &[true, false, true, false, true, false]).unwrap().ig, 0.0);
        assert_eq!(information_gain(&[1.0, 2.0], &[true, true]).unwrap().ig, 0.0);
        assert_eq!(
            information_gain(&[1.0], &[true]),
            Err(SelectionError::TooFewSamples(1))
        );
        assert!(matches!(
            information_gain(&[1.0, 2.0], &[true]),
            Err(SelectionError::LengthMismatch { .. })
        ));
        let alternating = information_gain(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &[false, true, false, true, false, true]);
        assert_eq!(alternating.unwrap().ig, 0.0);
    }

    fn vectors(columns: &[Vec<f64>], family: FeatureFamily) -> Vec<FeatureVector> {
        let rows = columns[0].len();
        (0..rows)
            .map(|r| {
                let dense: Vec<f64> = columns.iter().map(|c| c[r]).collect();
                FeatureVector::from_dense(family, &dense, DimensionNames::Computed(family))
            })
            .collect()
    }

    #[test]
    fn positive_selection() {
        let labels: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
        let planted: Vec<f64> = labels.iter().map(|&l| f64::from(u8::from(l))).collect();
        let zeros = vec![0.0; 20];
        let noise: Vec<f64> = (0..20).map(|i| ((i * 7) % 5) as f64).collect();
        let vs = vectors(&[zeros, planted, noise], FeatureFamily::AfToken);
        let sel = select_positive(&vs, &labels, 2).unwrap();
        assert!(sel.filtered);
        assert_eq!(sel.dimensions().collect::<Vec<_>>(), vec![1]);
        assert!((sel.kept[0].ig - 1.0).abs() < 1e-12);

        let str_rows = vectors(&vec![vec![0.0; 20]; 5], FeatureFamily::Str);
        let sel = select_positive(&str_rows, &labels, DEFAULT_FILTER_THRESHOLD).unwrap();
        assert!(!sel.filtered);
        assert_eq!(sel.kept.len(), 5);
        assert_eq!(select_positive(&[], &[], 2), Err(SelectionError::EmptyTrainingFold));
    }

    #[test]
    fn folds_match_single_runs() {
        let labels: Vec<bool> = (0..30).map(|i| (i * 13) % 3 == 0).collect();
        let cols: Vec<Vec<f64>> = (0..6)
            .map(|d| (0..30).map(|i| (((i * (d + 3)) % 11) as f64) + f64::from(u8::from(labels[i])) * d as f64).collect())
            .collect();
        let vs = vectors(&cols, FeatureFamily::AfLetter);
        let source = SparseColumns::new(&vs);
        let masks: Vec<Vec<bool>> = (0..3).map(|f| (0..30).map(|i| i % 3 != f).collect()).collect();
        let multi = select_positive_folds(&source, &labels, &masks, 0).unwrap();
        for (mask, sel) in masks.iter().zip(&multi) {
            let rows: Vec<FeatureVector> = vs.iter().zip(mask).filter(|(_, &m)| m).map(|(v, _)| v.clone()).collect();
            let lab: Vec<bool> = labels.iter().zip(mask).filter(|(_, &m)| m).map(|(l, _)| *l).collect();
            assert_eq!(&select_positive(&rows, &lab, 0).unwrap(), sel);
        }
    }

    fn entry(family: FeatureFamily, name: &str) -> ManifestEntry {
        ManifestEntry { family, name: name.into(), ig: 0.1, threshold: Some(0.5) }
    }

    #[test]
    fn breakdown_shares() {
        let one_family = [entry(FeatureFamily::AfToken, "token.sum_ratio[Claim|Premise]")];
        let b = family_breakdown(&one_family).unwrap();
        assert_eq!(b.share(FeatureFamily::AfToken), 1.0);
        assert_eq!(b.share(FeatureFamily::AfLetter), 0.0);
        assert_eq!(b.argmax(), FeatureFamily::AfToken);

        let each = [
            entry(FeatureFamily::AfComponent, "component.count_ratio[Claim|Premise]"),
            entry(FeatureFamily::AfToken, "token.mean_ratio[Claim|Premise]"),
            entry(FeatureFamily::AfLetter, "letter.total[Claim]"),
            entry(FeatureFamily::AfPosition, "position.sum_ratio[Claim|Premise]"),
            entry(FeatureFamily::Ugr, "pool"),
        ];
        let b = family_breakdown(&each).unwrap();
        assert_eq!(b.total, 4);
        assert!(b.families.iter().all(|f| f.share == 0.25));
        assert_eq!(b.families[2].kinds, vec![(DimensionKind::TypeStatistic, 1, 1.0)]);
        assert!(b.to_string().contains("AF-position"));
        assert_eq!(family_breakdown(&[]), Err(SelectionError::EmptySelection));
    }

    #[test]
    fn manifest_round_trip() {
        let entries = vec![
            entry(FeatureFamily::AfToken, "token.sum_ratio[Claim|Premise]"),
            ManifestEntry { family: FeatureFamily::Str, name: "tokens".into(), ig: 0.0, threshold: None },
        ];
        assert_eq!(parse_manifest(&write_manifest(&entries)).unwrap(), entries);
        assert!(parse_manifest("AF-token\tx\t0.1\n").is_err());
        assert!(parse_manifest("NOPE\tx\t0.1\t-\n").is_err());
    }
}
