//! Argument-based features at four granularities.
//!
//! Every feature is defined over the 127 non-empty subsets of the seven
//! component types. A subset is a 7-bit mask whose bit `b` is set iff
//! `ComponentType::ALL[b]` belongs to it; subsets are enumerated by mask
//! value, and ordered pairs of distinct subsets `(A, B)` are enumerated
//! A-major, B-minor, skipping `A == B` (127 × 126 = 16002 pairs).
//!
//! | granularity | layout                                                        | dims  |
//! |-------------|---------------------------------------------------------------|-------|
//! | component   | count(A) / count(B) per pair                                  | 16002 |
//! | token       | 7 types × (total, min, max, mean, variance), then sum ratios for all pairs, then mean ratios | 32039 |
//! | letter      | as token, over letter counts                                   | 32039 |
//! | position    | 7 types × (min, max, mean, variance, sum), then sum ratios, then mean ratios | 32039 |
//!
//! Division by zero yields 0. Variances are population variances.
//!
//! Every value is the correctly rounded quotient of two exact integers
//! (positions are kept as 1-based clause indices over the clause count), so
//! results do not depend on summation order.

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{assemble_components, AnnotatedReview, ArgumentComponent, ComponentType};
use crate::features::{DimensionNames, FeatureFamily, FeatureVector};

pub const SUBSET_COUNT: usize = 127;
pub const PAIR_COUNT: usize = SUBSET_COUNT * (SUBSET_COUNT - 1);
pub const STATS_PER_TYPE: usize = 5;
pub const TYPE_STAT_DIMS: usize = ComponentType::COUNT * STATS_PER_TYPE;
pub const COMPONENT_DIM: usize = PAIR_COUNT;
pub const GRANULAR_DIM: usize = TYPE_STAT_DIMS + 2 * PAIR_COUNT;
pub const AF_DIM: usize = COMPONENT_DIM + 3 * GRANULAR_DIM;

/// Offset and dimensionality of each granularity inside the concatenated vector.
pub const AF_LAYOUT: [(FeatureFamily, usize, usize); 4] = [
    (FeatureFamily::AfComponent, 0, COMPONENT_DIM),
    (FeatureFamily::AfToken, COMPONENT_DIM, GRANULAR_DIM),
    (FeatureFamily::AfLetter, COMPONENT_DIM + GRANULAR_DIM, GRANULAR_DIM),
    (FeatureFamily::AfPosition, COMPONENT_DIM + 2 * GRANULAR_DIM, GRANULAR_DIM),
];

/// Dimensionality of an argument family.
pub fn family_dimension(family: FeatureFamily) -> Option<usize> {
    match family {
        FeatureFamily::AfComponent => Some(COMPONENT_DIM),
        FeatureFamily::AfToken | FeatureFamily::AfLetter | FeatureFamily::AfPosition => Some(GRANULAR_DIM),
        FeatureFamily::Af => Some(AF_DIM),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArgumentError {
    #[error("position features need at least one clause")]
    NoClauses,
    #[error("component span ends at clause {last} but the review has {total} clauses")]
    SpanOutOfRange { last: usize, total: usize },
}

/// A non-empty set of component types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComponentSubset(u8);

impl ComponentSubset {
    /// `None` for 0 or masks with bits beyond the seventh.
    pub fn from_mask(mask: u8) -> Option<Self> {
        (mask != 0 && (mask as usize) <= SUBSET_COUNT).then_some(ComponentSubset(mask))
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    /// Position in the canonical enumeration, 1..=127 (equal to the mask).
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn contains(self, t: ComponentType) -> bool {
        self.0 & (1 << t.index()) != 0
    }

    pub fn types(self) -> impl Iterator<Item = ComponentType> {
        ComponentType::ALL.into_iter().filter(move |t| self.contains(*t))
    }

    /// Type names joined with `+`.
    pub fn label(self) -> String {
        self.types().map(|t| t.name()).collect::<Vec<_>>().join("+")
    }
}

/// All 127 non-empty subsets in canonical order.
pub fn enumerate_subsets() -> Vec<ComponentSubset> {
    (1..=SUBSET_COUNT as u8).map(ComponentSubset).collect()
}

/// The `index`-th ordered pair of distinct subsets.
pub fn subset_pair(index: usize) -> (ComponentSubset, ComponentSubset) {
    debug_assert!(index < PAIR_COUNT);
    let a = index / (SUBSET_COUNT - 1) + 1;
    let mut b = index % (SUBSET_COUNT - 1) + 1;
    if b >= a {
        b += 1;
    }
    (ComponentSubset(a as u8), ComponentSubset(b as u8))
}

/// Inverse of [`subset_pair`]; `None` when `a == b`.
pub fn pair_index(a: ComponentSubset, b: ComponentSubset) -> Option<usize> {
    let (a, b) = (a.index(), b.index());
    if a == b {
        return None;
    }
    let b_rank = if b > a { b - 2 } else { b - 1 };
    Some((a - 1) * (SUBSET_COUNT - 1) + b_rank)
}

/// `numerator / denominator`, or 0 when the denominator is 0.
pub fn safe_ratio(numerator: f64, denominator: f64) -> f64 {
    if denominator == 0.0 {
        0.0
    } else {
        numerator / denominator
    }
}

fn exact_ratio(numerator: u128, denominator: u128) -> f64 {
    if denominator == 0 || numerator == 0 {
        0.0
    } else {
        numerator as f64 / denominator as f64
    }
}

/// What a per-component count measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Measure {
    Tokens,
    Letters,
    Positions,
}

impl Measure {
    fn prefix(self) -> &'static str {
        match self {
            Measure::Tokens => "token",
            Measure::Letters => "letter",
            Measure::Positions => "position",
        }
    }

    fn family(self) -> FeatureFamily {
        match self {
            Measure::Tokens => FeatureFamily::AfToken,
            Measure::Letters => FeatureFamily::AfLetter,
            Measure::Positions => FeatureFamily::AfPosition,
        }
    }

    /// Names of the five per-type statistics, in layout order.
    pub fn stat_names(self) -> [&'static str; STATS_PER_TYPE] {
        match self {
            Measure::Positions => ["min", "max", "mean", "variance", "sum"],
            _ => ["total", "min", "max", "mean", "variance"],
        }
    }
}

/// Decoded meaning of one argument-feature dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AfDimension {
    CountRatio(ComponentSubset, ComponentSubset),
    TypeStat { measure: Measure, component_type: ComponentType, stat: usize },
    SumRatio(Measure, ComponentSubset, ComponentSubset),
    MeanRatio(Measure, ComponentSubset, ComponentSubset),
}

impl AfDimension {
    /// Decodes a local index within one granularity family.
    pub fn decode(family: FeatureFamily, index: usize) -> Option<Self> {
        let measure = match family {
            FeatureFamily::AfComponent => {
                return (index < COMPONENT_DIM).then(|| {
                    let (a, b) = subset_pair(index);
                    AfDimension::CountRatio(a, b)
                })
            }
            FeatureFamily::AfToken => Measure::Tokens,
            FeatureFamily::AfLetter => Measure::Letters,
            FeatureFamily::AfPosition => Measure::Positions,
            FeatureFamily::Af => {
                let (fam, offset, _) = locate(index)?;
                return Self::decode(fam, index - offset);
            }
            _ => return None,
        };
        if index < TYPE_STAT_DIMS {
            Some(AfDimension::TypeStat {
                measure,
                component_type: ComponentType::ALL[index / STATS_PER_TYPE],
                stat: index % STATS_PER_TYPE,
            })
        } else if index < TYPE_STAT_DIMS + PAIR_COUNT {
            let (a, b) = subset_pair(index - TYPE_STAT_DIMS);
            Some(AfDimension::SumRatio(measure, a, b))
        } else if index < GRANULAR_DIM {
            let (a, b) = subset_pair(index - TYPE_STAT_DIMS - PAIR_COUNT);
            Some(AfDimension::MeanRatio(measure, a, b))
        } else {
            None
        }
    }

    /// The granularity family this dimension belongs to.
    pub fn family(self) -> FeatureFamily {
        match self {
            AfDimension::CountRatio(..) => FeatureFamily::AfComponent,
            AfDimension::TypeStat { measure, .. }
            | AfDimension::SumRatio(measure, ..)
            | AfDimension::MeanRatio(measure, ..) => measure.family(),
        }
    }

    pub fn name(self) -> String {
        match self {
            AfDimension::CountRatio(a, b) => format!("component.count_ratio[{}|{}]", a.label(), b.label()),
            AfDimension::TypeStat { measure, component_type, stat } => {
                format!("{}.{}[{}]", measure.prefix(), measure.stat_names()[stat], component_type.name())
            }
            AfDimension::SumRatio(m, a, b) => format!("{}.sum_ratio[{}|{}]", m.prefix(), a.label(), b.label()),
            AfDimension::MeanRatio(m, a, b) => format!("{}.mean_ratio[{}|{}]", m.prefix(), a.label(), b.label()),
        }
    }
}

/// The granularity an index of the concatenated vector falls into, with
/// that granularity's offset and dimensionality.
pub fn locate(af_index: usize) -> Option<(FeatureFamily, usize, usize)> {
    AF_LAYOUT
        .iter()
        .copied()
        .find(|&(_, offset, dim)| af_index >= offset && af_index < offset + dim)
}

pub fn dimension_name(family: FeatureFamily, index: usize) -> Option<String> {
    AfDimension::decode(family, index).map(AfDimension::name)
}

/// Five-number summary of one measure over the components of one type.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MeasureStats {
    pub total: f64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Per-type statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComponentStats {
    pub component_type: ComponentType,
    pub count: usize,
    pub tokens: MeasureStats,
    pub letters: MeasureStats,
    /// `total` holds the sum of positions.
    pub positions: MeasureStats,
}

#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    sum: u128,
    sum_sq: u128,
    min: u64,
    max: u64,
}

impl Accumulator {
    fn add(&mut self, count_before: u64, v: u64) {
        if count_before == 0 {
            self.min = v;
            self.max = v;
        } else {
            self.min = self.min.min(v);
            self.max = self.max.max(v);
        }
        self.sum += u128::from(v);
        self.sum_sq += u128::from(v) * u128::from(v);
    }

    /// Population variance numerator `count·Σx² − (Σx)²`.
    fn spread(&self, count: u128) -> u128 {
        count * self.sum_sq - self.sum * self.sum
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct TypeAccumulators {
    count: u64,
    tokens: Accumulator,
    letters: Accumulator,
    /// Over 1-based first-clause indices.
    positions: Accumulator,
}

/// Sufficient statistics of a review's components for every argument
/// feature; any dimension can be evaluated in constant time.
#[derive(Debug, Clone)]
pub struct ArgumentProfile {
    clauses: u64,
    per_type: [TypeAccumulators; ComponentType::COUNT],
    subset_count: [u64; SUBSET_COUNT + 1],
    subset_tokens: [u64; SUBSET_COUNT + 1],
    subset_letters: [u64; SUBSET_COUNT + 1],
    subset_positions: [u64; SUBSET_COUNT + 1],
}

impl ArgumentProfile {
    /// `total_clauses` is the clause count of the review the components
    /// came from; positions are relative to it.
    pub fn new(components: &[ArgumentComponent], total_clauses: usize) -> Result<Self, ArgumentError> {
        let mut per_type = [TypeAccumulators::default(); ComponentType::COUNT];
        for c in components {
            if c.last_clause >= total_clauses {
                return Err(ArgumentError::SpanOutOfRange { last: c.last_clause, total: total_clauses });
            }
            let acc = &mut per_type[c.component_type.index()];
            let before = acc.count;
            acc.tokens.add(before, c.token_count as u64);
            acc.letters.add(before, c.letter_count as u64);
            acc.positions.add(before, c.first_clause as u64 + 1);
            acc.count += 1;
        }
        let mut profile = ArgumentProfile {
            clauses: total_clauses as u64,
            per_type,
            subset_count: [0; SUBSET_COUNT + 1],
            subset_tokens: [0; SUBSET_COUNT + 1],
            subset_letters: [0; SUBSET_COUNT + 1],
            subset_positions: [0; SUBSET_COUNT + 1],
        };
        for mask in 1..=SUBSET_COUNT {
            // Extend the aggregate of the mask without its lowest bit.
            let low = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            let t = &profile.per_type[low];
            profile.subset_count[mask] = profile.subset_count[rest] + t.count;
            profile.subset_tokens[mask] = profile.subset_tokens[rest] + t.tokens.sum as u64;
            profile.subset_letters[mask] = profile.subset_letters[rest] + t.letters.sum as u64;
            profile.subset_positions[mask] = profile.subset_positions[rest] + t.positions.sum as u64;
        }
        Ok(profile)
    }

    /// Profile of a review's components, assembled with or without merging.
    pub fn from_review(review: &AnnotatedReview, merge_adjacent: bool) -> Self {
        let components = assemble_components(review, merge_adjacent);
        Self::new(&components, review.clauses.len()).expect("assembled spans lie within the review")
    }

    pub fn total_clauses(&self) -> usize {
        self.clauses as usize
    }

    pub fn component_count(&self) -> usize {
        self.subset_count[SUBSET_COUNT] as usize
    }

    fn subset_sums(&self, measure: Measure) -> &[u64; SUBSET_COUNT + 1] {
        match measure {
            Measure::Tokens => &self.subset_tokens,
            Measure::Letters => &self.subset_letters,
            Measure::Positions => &self.subset_positions,
        }
    }

    fn type_stat(&self, measure: Measure, t: ComponentType, stat: usize) -> f64 {
        let acc = &self.per_type[t.index()];
        let count = u128::from(acc.count);
        if count == 0 {
            return 0.0;
        }
        match measure {
            Measure::Tokens | Measure::Letters => {
                let a = if measure == Measure::Tokens { &acc.tokens } else { &acc.letters };
                match stat {
                    0 => a.sum as f64,
                    1 => a.min as f64,
                    2 => a.max as f64,
                    3 => exact_ratio(a.sum, count),
                    _ => exact_ratio(a.spread(count), count * count),
                }
            }
            Measure::Positions => {
                let a = &acc.positions;
                let n = u128::from(self.clauses);
                match stat {
                    0 => exact_ratio(u128::from(a.min), n),
                    1 => exact_ratio(u128::from(a.max), n),
                    2 => exact_ratio(a.sum, n * count),
                    3 => exact_ratio(a.spread(count), count * count * n * n),
                    _ => exact_ratio(a.sum, n),
                }
            }
        }
    }

    /// Value of a decoded dimension.
    pub fn evaluate(&self, dim: AfDimension) -> f64 {
        match dim {
            AfDimension::CountRatio(a, b) => exact_ratio(
                u128::from(self.subset_count[a.index()]),
                u128::from(self.subset_count[b.index()]),
            ),
            AfDimension::TypeStat { measure, component_type, stat } => self.type_stat(measure, component_type, stat),
            AfDimension::SumRatio(m, a, b) => {
                let sums = self.subset_sums(m);
                exact_ratio(u128::from(sums[a.index()]), u128::from(sums[b.index()]))
            }
            AfDimension::MeanRatio(m, a, b) => {
                let sums = self.subset_sums(m);
                let (ca, cb) = (self.subset_count[a.index()], self.subset_count[b.index()]);
                if ca == 0 || cb == 0 {
                    return 0.0;
                }
                exact_ratio(
                    u128::from(sums[a.index()]) * u128::from(cb),
                    u128::from(sums[b.index()]) * u128::from(ca),
                )
            }
        }
    }

    /// Value of `index` within `family` (a granularity or the concatenation).
    ///
    /// # Panics
    /// If the index is out of range for the family.
    pub fn value(&self, family: FeatureFamily, index: usize) -> f64 {
        let dim = AfDimension::decode(family, index)
            .unwrap_or_else(|| panic!("index {index} outside {family} features"));
        self.evaluate(dim)
    }

    pub fn stats(&self, t: ComponentType) -> ComponentStats {
        let summary = |m: Measure| {
            let v: Vec<f64> = (0..STATS_PER_TYPE).map(|s| self.type_stat(m, t, s)).collect();
            if m == Measure::Positions {
                MeasureStats { total: v[4], min: v[0], max: v[1], mean: v[2], variance: v[3] }
            } else {
                MeasureStats { total: v[0], min: v[1], max: v[2], mean: v[3], variance: v[4] }
            }
        };
        ComponentStats {
            component_type: t,
            count: self.per_type[t.index()].count as usize,
            tokens: summary(Measure::Tokens),
            letters: summary(Measure::Letters),
            positions: summary(Measure::Positions),
        }
    }

    /// Sparse vector for one granularity family, or the concatenation.
    pub fn vector(&self, family: FeatureFamily) -> FeatureVector {
        let mut entries = Vec::new();
        if family == FeatureFamily::Af {
            for (fam, offset, dim) in AF_LAYOUT {
                self.push_family(fam, dim, offset, &mut entries);
            }
        } else {
            let dim = family_dimension(family).expect("argument family");
            self.push_family(family, dim, 0, &mut entries);
        }
        FeatureVector::from_entries(
            family,
            family_dimension(family).expect("argument family"),
            entries,
            DimensionNames::Computed(family),
        )
    }

    fn push_family(&self, family: FeatureFamily, dim: usize, offset: usize, out: &mut Vec<(usize, f64)>) {
        if self.component_count() == 0 {
            return;
        }
        for i in 0..dim {
            let v = self.value(family, i);
            if v != 0.0 {
                out.push((offset + i, v));
            }
        }
    }
}

fn profile_ignoring_positions(components: &[ArgumentComponent]) -> ArgumentProfile {
    let clauses = components.iter().map(|c| c.last_clause + 1).max().unwrap_or(0);
    ArgumentProfile::new(components, clauses).expect("clause count covers every span")
}

/// Ratios of component counts between every ordered pair of distinct subsets.
pub fn component_level(components: &[ArgumentComponent]) -> FeatureVector {
    profile_ignoring_positions(components).vector(FeatureFamily::AfComponent)
}

/// Per-type token statistics plus sum and mean token ratios over subset pairs.
pub fn token_level(components: &[ArgumentComponent]) -> FeatureVector {
    profile_ignoring_positions(components).vector(FeatureFamily::AfToken)
}

/// As [`token_level`], over letter counts.
pub fn letter_level(components: &[ArgumentComponent]) -> FeatureVector {
    profile_ignoring_positions(components).vector(FeatureFamily::AfLetter)
}

/// Per-type position statistics plus sum and mean position ratios.
pub fn position_level(components: &[ArgumentComponent], total_clauses: usize) -> Result<FeatureVector, ArgumentError> {
    if total_clauses == 0 {
        return Err(ArgumentError::NoClauses);
    }
    Ok(ArgumentProfile::new(components, total_clauses)?.vector(FeatureFamily::AfPosition))
}

/// All four granularities concatenated (component | token | letter | position),
/// 112119 dimensions, tagged [`FeatureFamily::Af`].
pub fn extract_all(review: &AnnotatedReview, merge_adjacent: bool) -> FeatureVector {
    ArgumentProfile::from_review(review, merge_adjacent).vector(FeatureFamily::Af)
}
