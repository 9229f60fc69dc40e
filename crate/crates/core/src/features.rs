//! Sparse feature vectors, family tags, dimension naming and the sparse
//! matrix text format.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::argument;

/// Feature family tags. The four `Af*` families are the argument
/// granularities; [`FeatureFamily::Af`] is their concatenation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureFamily {
    Str,
    Ugr,
    Galc,
    Inquirer,
    AfComponent,
    AfToken,
    AfLetter,
    AfPosition,
    Af,
}

impl FeatureFamily {
    pub const ARGUMENT: [FeatureFamily; 4] = [
        FeatureFamily::AfComponent,
        FeatureFamily::AfToken,
        FeatureFamily::AfLetter,
        FeatureFamily::AfPosition,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            FeatureFamily::Str => "STR",
            FeatureFamily::Ugr => "UGR",
            FeatureFamily::Galc => "GALC",
            FeatureFamily::Inquirer => "INQUIRER",
            FeatureFamily::AfComponent => "AF-component",
            FeatureFamily::AfToken => "AF-token",
            FeatureFamily::AfLetter => "AF-letter",
            FeatureFamily::AfPosition => "AF-position",
            FeatureFamily::Af => "AF",
        }
    }

    pub fn is_argument(self) -> bool {
        matches!(
            self,
            FeatureFamily::AfComponent
                | FeatureFamily::AfToken
                | FeatureFamily::AfLetter
                | FeatureFamily::AfPosition
                | FeatureFamily::Af
        )
    }
}

impl fmt::Display for FeatureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown feature family `{0}`")]
pub struct UnknownFamily(pub String);

impl FromStr for FeatureFamily {
    type Err = UnknownFamily;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        use FeatureFamily::*;
        [Str, Ugr, Galc, Inquirer, AfComponent, AfToken, AfLetter, AfPosition, Af]
            .into_iter()
            .find(|f| f.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownFamily(s.to_string()))
    }
}

/// Resolves a dimension index to a readable name.
#[derive(Debug, Clone)]
pub enum DimensionNames {
    /// Names are computed from the index (structural and argument families).
    Computed(FeatureFamily),
    /// Names listed explicitly (vocabulary terms, lexicon categories).
    Listed(Arc<[String]>),
}

impl DimensionNames {
    pub fn name(&self, index: usize) -> Option<String> {
        match self {
            DimensionNames::Listed(names) => names.get(index).cloned(),
            DimensionNames::Computed(FeatureFamily::Str) => {
                crate::baseline::STR_NAMES.get(index).map(|s| s.to_string())
            }
            DimensionNames::Computed(family) => argument::dimension_name(*family, index),
        }
    }
}

/// A sparse real vector belonging to one feature family.
///
/// Entries are sorted by index, unique, and never zero.
#[derive(Debug, Clone)]
pub struct FeatureVector {
    family: FeatureFamily,
    dimension: usize,
    entries: Vec<(usize, f64)>,
    names: DimensionNames,
}

impl PartialEq for FeatureVector {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family && self.dimension == other.dimension && self.entries == other.entries
    }
}

impl FeatureVector {
    /// Builds a vector from a dense slice, dropping zeros.
    pub fn from_dense(family: FeatureFamily, values: &[f64], names: DimensionNames) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .collect();
        FeatureVector {
            family,
            dimension: values.len(),
            entries,
            names,
        }
    }

    /// Builds a vector from `(index, value)` pairs. Zeros are dropped and
    /// duplicate indices are summed.
    ///
    /// # Panics
    /// If an index is outside `dimension`.
    pub fn from_entries(
        family: FeatureFamily,
        dimension: usize,
        mut entries: Vec<(usize, f64)>,
        names: DimensionNames,
    ) -> Self {
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            assert!(i < dimension, "index {i} outside dimension {dimension}");
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        FeatureVector {
            family,
            dimension,
            entries: merged,
            names,
        }
    }

    pub fn family(&self) -> FeatureFamily {
        self.family
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |e| e.0)
            .map_or(0.0, |pos| self.entries[pos].1)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.dimension];
        for &(i, v) in &self.entries {
            dense[i] = v;
        }
        dense
    }

    pub fn names(&self) -> &DimensionNames {
        &self.names
    }

    pub fn dimension_name(&self, index: usize) -> Option<String> {
        if index >= self.dimension {
            return None;
        }
        self.names.name(index)
    }

    /// The entries in `[start, start + len)`, re-based to a vector of
    /// dimension `len` tagged `family`.
    pub fn slice(&self, family: FeatureFamily, start: usize, len: usize) -> FeatureVector {
        let lo = self.entries.partition_point(|e| e.0 < start);
        let hi = self.entries.partition_point(|e| e.0 < start + len);
        FeatureVector {
            family,
            dimension: len,
            entries: self.entries[lo..hi].iter().map(|&(i, v)| (i - start, v)).collect(),
            names: DimensionNames::Computed(family),
        }
    }
}

/// Version of the dimension layout written into persisted matrices.
pub const REGISTRY_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("sparse matrix line {line}: {message}")]
pub struct MatrixFormatError {
    pub line: usize,
    pub message: String,
}

/// Rows of sparse values over a concatenation of feature families.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub families: Vec<(FeatureFamily, usize)>,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn dimension(&self) -> usize {
        self.families.iter().map(|f| f.1).sum()
    }

    /// Stacks vectors as rows. Every vector must share the family layout
    /// given by the first one.
    pub fn from_vectors(vectors: &[FeatureVector]) -> Self {
        let families = vectors
            .first()
            .map(|v| vec![(v.family(), v.dimension())])
            .unwrap_or_default();
        SparseMatrix {
            families,
            rows: vectors.iter().map(|v| v.entries().to_vec()).collect(),
        }
    }

    /// Text form: a header with the registry version and family
    /// dimensionalities, then one line of ascending `dim:value` pairs per row.
    pub fn to_text(&self) -> String {
        let mut out = format!("# argfeat sparse matrix\nregistry {REGISTRY_VERSION}\nfamilies");
        for (family, dim) in &self.families {
            out.push_str(&format!(" {}:{}", family.tag(), dim));
        }
        out.push_str(&format!("\nrows {}\n", self.rows.len()));
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|(i, v)| format!("{i}:{v}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, MatrixFormatError> {
        let err = |line: usize, message: String| MatrixFormatError { line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut header = lines.by_ref().filter(|(_, l)| !l.starts_with('#'));
        let (ln, registry) = header.next().ok_or_else(|| err(1, "missing registry line".into()))?;
        match registry.strip_prefix("registry ").map(str::trim) {
            Some(v) if v == REGISTRY_VERSION.to_string() => {}
            _ => return Err(err(ln, format!("unsupported registry line `{registry}`"))),
        }
        let (ln, fam_line) = header.next().ok_or_else(|| err(ln + 1, "missing families line".into()))?;
        let fam_rest = fam_line
            .strip_prefix("families")
            .ok_or_else(|| err(ln, "expected `families`".into()))?;
        let mut families = Vec::new();
        for item in fam_rest.split_whitespace() {
            let (tag, dim) = item
                .rsplit_once(':')
                .ok_or_else(|| err(ln, format!("bad family entry `{item}`")))?;
            let family = tag.parse().map_err(|e: UnknownFamily| err(ln, e.to_string()))?;
            let dim = dim.parse().map_err(|_| err(ln, format!("bad dimension `{dim}`")))?;
            families.push((family, dim));
        }
        let (ln, rows_line) = header.next().ok_or_else(|| err(ln + 1, "missing rows line".into()))?;
        let count: usize = rows_line
            .strip_prefix("rows ")
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| err(ln, "expected `rows <count>`".into()))?;
        let dimension: usize = families.iter().map(|f| f.1).sum();
        let mut rows = Vec::with_capacity(count);
        for (ln, line) in lines.take(count) {
            let mut row = Vec::new();
            for pair in line.split_whitespace() {
                let (i, v) = pair
                    .split_once(':')
                    .ok_or_else(|| err(ln, format!("bad pair `{pair}`")))?;
                let i: usize = i.parse().map_err(|_| err(ln, format!("bad index `{i}`")))?;
                let v: f64 = v.parse().map_err(|_| err(ln, format!("bad value `{v}`")))?;
                if i >= dimension {
                    return Err(err(ln, format!("index {i} outside dimension {dimension}")));
                }
                if row.last().is_some_and(|&(prev, _)| prev >= i) {
                    return Err(err(ln, "indices must be strictly ascending".into()));
                }
                row.push((i, v));
            }
            rows.push(row);
        }
        if rows.len() != count {
            return Err(err(0, format!("expected {count} rows, found {}", rows.len())));
        }
        Ok(SparseMatrix { families, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vector_invariants() {
        let v = FeatureVector::from_entries(
            FeatureFamily::Str,
            5,
            vec![(3, 1.0), (0, 0.0), (3, 1.5), (1, -2.0)],
            DimensionNames::Computed(FeatureFamily::Str),
        );
        assert_eq!(v.entries(), &[(1, -2.0), (3, 2.5)]);
        assert_eq!(v.get(3), 2.5);
        assert_eq!(v.get(0), 0.0);
        assert_eq!(v.to_dense(), vec![0.0, -2.0, 0.0, 2.5, 0.0]);
        assert_eq!(v.dimension_name(0).as_deref(), Some("tokens"));
        assert_eq!(v.dimension_name(5), None);
    }

    #[test]
    fn family_tags_round_trip() {
        for f in [FeatureFamily::Str, FeatureFamily::AfLetter, FeatureFamily::Inquirer] {
            assert_eq!(f.tag().parse::<FeatureFamily>().unwrap(), f);
        }
        assert!("XYZ".parse::<FeatureFamily>().is_err());
    }

    #[test]
    fn matrix_parse_errors() {
        assert!(SparseMatrix::parse("registry 9\n").is_err());
        let bad = "registry 1\nfamilies STR:5\nrows 1\n7:1\n";
        assert!(SparseMatrix::parse(bad).unwrap_err().message.contains("outside"));
        let unsorted = "registry 1\nfamilies STR:5\nrows 1\n3:1 1:2\n";
        assert!(SparseMatrix::parse(unsorted).is_err());
        let short = "registry 1\nfamilies STR:5\nrows 2\n1:1\n";
        assert!(SparseMatrix::parse(short).is_err());
    }

    proptest! {
        #[test]
        fn matrix_text_round_trip(rows in proptest::collection::vec(
            proptest::collection::btree_map(0usize..40, -1e6f64..1e6, 0..8), 0..6)) {
            let matrix = SparseMatrix {
                families: vec![(FeatureFamily::Str, 5), (FeatureFamily::AfToken, 35)],
                rows: rows.into_iter().map(|m| m.into_iter().collect()).collect(),
            };
            prop_assert_eq!(SparseMatrix::parse(&matrix.to_text()).unwrap(), matrix);
        }
    }
}
