//! Seeded generator of clause-annotated reviews with a planted helpfulness
//! signal, for end-to-end runs without a real annotated corpus.
//!
//! Each review draws a latent helpfulness label. With probability equal to
//! the signal strength the review is "planted": in helpful reviews premise
//! clauses use many short words and claim clauses few long ones, and in
//! unhelpful reviews the other way round. Letter counts per clause stay
//! roughly constant either way, so the signal lives in token counts. Other
//! clauses, and every clause of an unplanted review, use mid-length words.
//! Vote counts are drawn to agree with the latent label.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{majority_vote, AnnotatedReview, ClauseAnnotation, ComponentType, Helpfulness};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
}

/// Parameters of a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub reviews: usize,
    pub min_clauses: usize,
    pub max_clauses: usize,
    /// Clause label distribution in `ComponentType::ALL` order.
    pub type_probabilities: [f64; 7],
    /// Probability in [0, 1] that a review carries the planted signal.
    pub signal_strength: f64,
    /// Probability in [0, 1] that an annotator replaces the true label with
    /// a different, uniformly chosen one.
    pub annotator_noise: f64,
    /// Share of helpful reviews.
    pub helpful_rate: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            seed: 0,
            reviews: 400,
            min_clauses: 4,
            max_clauses: 10,
            type_probabilities: [0.10, 0.25, 0.35, 0.05, 0.10, 0.05, 0.10],
            signal_strength: 0.8,
            annotator_noise: 0.1,
            helpful_rate: 0.5,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidSpec(m.to_string()));
        if self.reviews == 0 {
            return bad("review count must be positive");
        }
        if self.min_clauses == 0 || self.min_clauses > self.max_clauses {
            return bad("clause range must satisfy 1 <= min <= max");
        }
        if self.type_probabilities.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return bad("label probabilities must be non-negative");
        }
        if (self.type_probabilities.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("label probabilities must sum to 1");
        }
        for (name, v) in [("signal strength", self.signal_strength), ("annotator noise", self.annotator_noise)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SynthError::InvalidSpec(format!("{name} must lie in [0, 1]")));
            }
        }
        if !(self.helpful_rate > 0.0 && self.helpful_rate < 1.0) {
            return bad("helpful rate must lie strictly between 0 and 1");
        }
        Ok(())
    }
}

const SHORT: &[&str] = &[
    "bed", "tv", "nice", "good", "room", "view", "food", "bar", "pool", "spa", "desk", "lamp", "sink", "door", "wifi",
    "tea", "menu", "quiet", "glad", "rug", "hall", "park", "cafe", "fan", "mat", "lift", "clean", "cozy", "key", "sofa",
];
const MID: &[&str] = &[
    "hotel", "staff", "street", "window", "shower", "towels", "friendly", "noisy", "dirty", "great", "coffee",
    "garden", "lobby", "pillow", "corner", "museum", "relaxing", "bakery", "helpful", "market", "station", "sunny",
    "terrace", "parking", "central", "modern", "simple", "enjoy", "amazing", "happy",
];
const LONG: &[&str] = &[
    "reception", "breakfast", "spacious", "comfortable", "restaurant", "apartment", "furniture", "wonderful",
    "neighborhood", "recommended", "disappointing", "professional", "convenient", "downstairs", "renovated",
    "attractive", "absolutely", "transportation", "complimentary", "housekeeping", "reasonable", "surprisingly",
];

#[derive(Clone, Copy)]
enum Style {
    ManyShort,
    FewLong,
    Neutral,
}

fn clause_words(rng: &mut ChaCha8Rng, style: Style) -> Vec<&'static str> {
    let (pool, count) = match style {
        Style::ManyShort => (SHORT, rng.random_range(7..=9)),
        Style::FewLong => (LONG, rng.random_range(2..=4)),
        Style::Neutral => (MID, rng.random_range(4..=6)),
    };
    (0..count).map(|_| pool[rng.random_range(0..pool.len())]).collect()
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn noisy_label(rng: &mut ChaCha8Rng, truth: ComponentType, noise: f64) -> ComponentType {
    if rng.random::<f64>() < noise {
        let mut other = rng.random_range(0..ComponentType::COUNT - 1);
        if other >= truth.index() {
            other += 1;
        }
        ComponentType::ALL[other]
    } else {
        truth
    }
}

/// Draws `(X, Y)` with Y in 5..=50 and X/Y on the side of 0.75 given by `helpful`.
fn votes(rng: &mut ChaCha8Rng, helpful: bool) -> (u64, u64) {
    let total = rng.random_range(5..=50u64);
    let cut = (3 * total).div_ceil(4);
    let x = if helpful { rng.random_range(cut..=total) } else { rng.random_range(0..cut) };
    (x, total)
}

/// Generates the corpus described by `spec`.
pub fn generate(spec: &SyntheticSpec) -> Result<Vec<AnnotatedReview>, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let types = WeightedIndex::new(spec.type_probabilities).map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
    let mut reviews = Vec::with_capacity(spec.reviews);
    for r in 0..spec.reviews {
        let helpful = rng.random::<f64>() < spec.helpful_rate;
        let planted = rng.random::<f64>() < spec.signal_strength;
        let n_clauses = rng.random_range(spec.min_clauses..=spec.max_clauses);
        let mut clauses = Vec::with_capacity(n_clauses);
        for _ in 0..n_clauses {
            let truth = ComponentType::ALL[types.sample(&mut rng)];
            let style = match (planted, truth, helpful) {
                (true, ComponentType::Premise, true) | (true, ComponentType::Claim, false) => Style::ManyShort,
                (true, ComponentType::Claim, true) | (true, ComponentType::Premise, false) => Style::FewLong,
                _ => Style::Neutral,
            };
            let text = clause_words(&mut rng, style).join(" ");
            let annotator_labels: Vec<ComponentType> =
                (0..3).map(|_| noisy_label(&mut rng, truth, spec.annotator_noise)).collect();
            clauses.push(ClauseAnnotation {
                final_label: majority_vote(&annotator_labels),
                text,
                annotator_labels,
            });
        }
        let mut sentences = Vec::new();
        let mut start = 0;
        while start < clauses.len() {
            let len = rng.random_range(1..=3).min(clauses.len() - start);
            clauses[start].text = capitalize(&clauses[start].text);
            let body: Vec<&str> = clauses[start..start + len].iter().map(|c| c.text.as_str()).collect();
            let end = ['.', '.', '.', '!', '?'][rng.random_range(0..5)];
            sentences.push(format!("{}{end}", body.join(", ")));
            start += len;
        }
        let (x, y) = votes(&mut rng, helpful);
        reviews.push(AnnotatedReview {
            id: format!("synth-{}-{r:04}", spec.seed),
            text: sentences.join(" "),
            clauses,
            helpful_votes: x,
            total_votes: y,
            label: if helpful { Helpfulness::Helpful } else { Helpfulness::NotHelpful },
        });
    }
    Ok(reviews)
}
