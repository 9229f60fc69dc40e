//! Baseline feature families: structural (STR), unigram tf-idf (UGR),
//! emotion lexicon (GALC) and semantic lexicon (INQUIRER).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use thiserror::Error;

use crate::corpus::AnnotatedReview;
use crate::features::{DimensionNames, FeatureFamily, FeatureVector};
use crate::textproc::{segment_sentences, token_surfaces, Stopwords};

pub const STR_NAMES: [&str; 5] = [
    "tokens",
    "sentences",
    "avg_sentence_length",
    "exclamation_marks",
    "question_sentence_ratio",
];

/// Terms whose corpus-wide frequency is below this are dropped.
pub const MIN_TERM_FREQUENCY: u64 = 3;

const GALC_STUB: &str = include_str!("../data/galc_stub.tsv");
const INQUIRER_STUB: &str = include_str!("../data/inquirer_stub.tsv");

/// Token count, sentence count, average sentence length in tokens,
/// exclamation mark count, and share of sentences ending in a question.
pub fn str_features(review: &AnnotatedReview) -> FeatureVector {
    str_features_text(&review.text)
}

pub fn str_features_text(text: &str) -> FeatureVector {
    let tokens = token_surfaces(text).count() as f64;
    let sentences = segment_sentences(text);
    let n = sentences.len() as f64;
    let questions = sentences
        .iter()
        .filter(|s| s.trim_end_matches(['.', '!']).ends_with('?') || s.ends_with('?'))
        .count() as f64;
    let exclamations = text.chars().filter(|&c| c == '!').count() as f64;
    let (avg, question_ratio) = if sentences.is_empty() {
        (0.0, 0.0)
    } else {
        (tokens / n, questions / n)
    };
    FeatureVector::from_dense(
        FeatureFamily::Str,
        &[tokens, n, avg, exclamations, question_ratio],
        DimensionNames::Computed(FeatureFamily::Str),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VocabularyError {
    #[error("cannot build a vocabulary from an empty training set")]
    EmptyTrainingSet,
    #[error("vocabulary line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Unigram vocabulary fit on a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Arc<[String]>,
    document_frequencies: Vec<u64>,
    corpus_size: u64,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds the vocabulary from already tokenized documents: terms with
    /// corpus-wide frequency ≥ 3 that are not stopwords, sorted.
    pub fn from_token_lists<S: AsRef<str>>(
        documents: &[&[S]],
        stopwords: &Stopwords,
    ) -> Result<Self, VocabularyError> {
        if documents.is_empty() {
            return Err(VocabularyError::EmptyTrainingSet);
        }
        let mut counts: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
        for doc in documents {
            let mut seen = HashSet::new();
            for tok in doc.iter().map(AsRef::as_ref) {
                if stopwords.contains(tok) {
                    continue;
                }
                let entry = counts.entry(tok).or_default();
                entry.0 += 1;
                if seen.insert(tok) {
                    entry.1 += 1;
                }
            }
        }
        let (terms, dfs): (Vec<String>, Vec<u64>) = counts
            .into_iter()
            .filter(|(_, (tf, _))| *tf >= MIN_TERM_FREQUENCY)
            .map(|(t, (_, df))| (t.to_string(), df))
            .unzip();
        Ok(Self::from_parts(terms, dfs, documents.len() as u64))
    }

    fn from_parts(terms: Vec<String>, document_frequencies: Vec<u64>, corpus_size: u64) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary {
            terms: terms.into(),
            document_frequencies,
            corpus_size,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn corpus_size(&self) -> u64 {
        self.corpus_size
    }

    pub fn document_frequency(&self, term: &str) -> Option<u64> {
        self.index.get(term).map(|&i| self.document_frequencies[i])
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Smoothed inverse document frequency `ln(N / (1 + df)) + 1`.
    pub fn idf(&self, index: usize) -> f64 {
        idf(self.corpus_size, self.document_frequencies[index])
    }

    /// Text form: `# corpus_size N` header, then `term<TAB>df` per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("# corpus_size {}\n", self.corpus_size);
        for (t, df) in self.terms.iter().zip(&self.document_frequencies) {
            out.push_str(&format!("{t}\t{df}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, VocabularyError> {
        let mut corpus_size = None;
        let mut terms = Vec::new();
        let mut dfs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let malformed = |message: String| VocabularyError::Malformed { line: i + 1, message };
            if let Some(rest) = line.strip_prefix("# corpus_size ") {
                corpus_size = Some(rest.trim().parse().map_err(|_| malformed("bad corpus size".into()))?);
                continue;
            }
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (term, df) = line
                .split_once('\t')
                .ok_or_else(|| malformed("expected `term<TAB>df`".into()))?;
            if terms.last().is_some_and(|prev: &String| prev.as_str() >= term) {
                return Err(malformed("terms must be sorted and unique".into()));
            }
            terms.push(term.to_string());
            dfs.push(df.trim().parse().map_err(|_| malformed(format!("bad df `{df}`")))?);
        }
        let corpus_size = corpus_size.ok_or(VocabularyError::Malformed {
            line: 1,
            message: "missing `# corpus_size` header".into(),
        })?;
        Ok(Self::from_parts(terms, dfs, corpus_size))
    }
}

/// Builds the vocabulary from training reviews.
pub fn build_vocabulary(
    training_reviews: &[AnnotatedReview],
    stopwords: &Stopwords,
) -> Result<Vocabulary, VocabularyError> {
    let tokens: Vec<Vec<String>> = training_reviews.iter().map(|r| token_surfaces(&r.text).collect()).collect();
    let docs: Vec<&[String]> = tokens.iter().map(Vec::as_slice).collect();
    Vocabulary::from_token_lists(&docs, stopwords)
}

pub fn idf(corpus_size: u64, document_frequency: u64) -> f64 {
    (corpus_size as f64 / (1.0 + document_frequency as f64)).ln() + 1.0
}

/// tf-idf weights of the vocabulary terms occurring in the review.
pub fn ugr_features(review: &AnnotatedReview, vocab: &Vocabulary) -> FeatureVector {
    let tokens: Vec<String> = token_surfaces(&review.text).collect();
    ugr_from_tokens(&tokens, vocab)
}

pub fn ugr_from_tokens<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> FeatureVector {
    let mut tf: BTreeMap<usize, u64> = BTreeMap::new();
    for t in tokens {
        if let Some(i) = vocab.index_of(t.as_ref()) {
            *tf.entry(i).or_default() += 1;
        }
    }
    let entries = tf.into_iter().map(|(i, n)| (i, n as f64 * vocab.idf(i))).collect();
    FeatureVector::from_entries(
        FeatureFamily::Ugr,
        vocab.len(),
        entries,
        DimensionNames::Listed(vocab.terms.clone()),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("lexicon line {line}: expected `CATEGORY<TAB>word1,word2,...`")]
    Malformed { line: usize },
    #[error("lexicon line {line}: duplicate category `{category}`")]
    DuplicateCategory { line: usize, category: String },
}

/// Word → category mapping loaded from a lexicon file.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    categories: Arc<[String]>,
    words: HashMap<String, Vec<usize>>,
}

impl Lexicon {
    /// Parses `CATEGORY<TAB>word1,word2,...` lines; categories keep file
    /// order. Blank lines and `#` comment lines are skipped.
    pub fn parse(document: &str) -> Result<Self, LexiconError> {
        let mut categories: Vec<String> = Vec::new();
        let mut words: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, line) in document.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (category, list) = line.split_once('\t').ok_or(LexiconError::Malformed { line: line_no })?;
            let category = category.trim();
            if category.is_empty() {
                return Err(LexiconError::Malformed { line: line_no });
            }
            if categories.iter().any(|c| c == category) {
                return Err(LexiconError::DuplicateCategory {
                    line: line_no,
                    category: category.to_string(),
                });
            }
            let idx = categories.len();
            categories.push(category.to_string());
            for w in list.split(',').map(str::trim).filter(|w| !w.is_empty()) {
                let cats = words.entry(w.to_lowercase()).or_default();
                if !cats.contains(&idx) {
                    cats.push(idx);
                }
            }
        }
        Ok(Lexicon {
            categories: categories.into(),
            words,
        })
    }

    /// Small emotion lexicon with 36 categories, for tests and demos.
    pub fn galc_stub() -> Self {
        Self::parse(GALC_STUB).expect("bundled lexicon parses")
    }

    /// Small semantic-tag lexicon, for tests and demos.
    pub fn inquirer_stub() -> Self {
        Self::parse(INQUIRER_STUB).expect("bundled lexicon parses")
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn categories_of(&self, word: &str) -> &[usize] {
        self.words.get(word).map_or(&[], Vec::as_slice)
    }
}

pub fn load_lexicon(document: &str) -> Result<Lexicon, LexiconError> {
    Lexicon::parse(document)
}

/// Per-category token counts plus a final dimension counting tokens that
/// match no category.
pub fn galc_features(review: &AnnotatedReview, lexicon: &Lexicon) -> FeatureVector {
    let tokens: Vec<String> = token_surfaces(&review.text).collect();
    galc_from_tokens(&tokens, lexicon)
}

pub fn galc_from_tokens<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> FeatureVector {
    let k = lexicon.categories.len();
    let mut counts = vec![0.0; k + 1];
    for t in tokens {
        let cats = lexicon.categories_of(t.as_ref());
        if cats.is_empty() {
            counts[k] += 1.0;
        }
        for &c in cats {
            counts[c] += 1.0;
        }
    }
    let mut names: Vec<String> = lexicon.categories.to_vec();
    names.push("non_emotional".to_string());
    FeatureVector::from_dense(FeatureFamily::Galc, &counts, DimensionNames::Listed(names.into()))
}

/// Per-tag token counts.
pub fn inquirer_features(review: &AnnotatedReview, lexicon: &Lexicon) -> FeatureVector {
    let tokens: Vec<String> = token_surfaces(&review.text).collect();
    inquirer_from_tokens(&tokens, lexicon)
}

pub fn inquirer_from_tokens<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> FeatureVector {
    let mut counts = vec![0.0; lexicon.categories.len()];
    for t in tokens {
        for &c in lexicon.categories_of(t.as_ref()) {
            counts[c] += 1.0;
        }
    }
    FeatureVector::from_dense(
        FeatureFamily::Inquirer,
        &counts,
        DimensionNames::Listed(lexicon.categories.clone()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Helpfulness;
    use proptest::prelude::*;

    fn review(text: &str) -> AnnotatedReview {
        AnnotatedReview {
            id: "r".into(),
            text: text.into(),
            clauses: vec![],
            helpful_votes: 0,
            total_votes: 1,
            label: Helpfulness::NotHelpful,
        }
    }

    #[test]
    fn structural() {
        let v = str_features(&review("Nice room. Why stay?")).to_dense();
        assert_eq!(v, vec![4.0, 2.0, 2.0, 0.0, 0.5]);
        assert_eq!(str_features(&review("")).to_dense(), vec![0.0; 5]);
        assert_eq!(str_features(&review("Great!!")).get(3), 2.0);
        assert_eq!(str_features(&review("Really?!")).get(4), 1.0);
    }

    #[test]
    fn vocabulary_thresholds() {
        let docs = [
            review("pool pool spa the the"),
            review("pool spa the"),
            review("the the the view"),
        ];
        let vocab = build_vocabulary(&docs, &Stopwords::english()).unwrap();
        assert_eq!(vocab.terms(), &["pool".to_string()]);
        assert_eq!(vocab.document_frequency("pool"), Some(2));
        assert_eq!(vocab.corpus_size(), 3);
        assert!(matches!(
            build_vocabulary(&[], &Stopwords::english()),
            Err(VocabularyError::EmptyTrainingSet)
        ));
    }

    #[test]
    fn vocabulary_text_round_trip() {
        let docs = [review("a1 a1 a1 b2 b2 b2 c3"), review("b2")];
        let vocab = build_vocabulary(&docs, &Stopwords::empty()).unwrap();
        assert_eq!(Vocabulary::parse(&vocab.to_text()).unwrap(), vocab);
        assert!(Vocabulary::parse("x\t1\n").is_err());
        assert!(Vocabulary::parse("# corpus_size 2\nb\t1\na\t1\n").is_err());
    }

    #[test]
    fn tfidf_weights() {
        // N = 10, df = 4, tf = 2 -> 2 * (ln(10/5) + 1).
        let vocab = Vocabulary::from_parts(vec!["pool".into(), "spa".into()], vec![4, 9], 10);
        let v = ugr_from_tokens(&["pool", "pool", "other"], &vocab);
        assert!((v.get(0) - 2.0 * (2f64.ln() + 1.0)).abs() < 1e-12);
        assert_eq!(v.nnz(), 1);
        assert!(ugr_from_tokens(&["nothing"], &vocab).is_empty());
        assert!(vocab.idf(0) > vocab.idf(1));
        let rare = Vocabulary::from_parts(vec!["a".into(), "b".into()], vec![1, 9], 10);
        let v = ugr_from_tokens(&["a", "b"], &rare);
        assert!(v.get(0) > v.get(1));
    }

    #[test]
    fn lexicon_loading() {
        let lex = load_lexicon("JOY\thappy,glad\nANGER\tmad\n").unwrap();
        assert_eq!(lex.categories().len(), 2);
        assert_eq!(lex.word_count(), 3);
        assert_eq!(load_lexicon("").unwrap().categories().len(), 0);
        let lex = load_lexicon("A\tword\nB\tword,other\n").unwrap();
        assert_eq!(lex.categories_of("word"), &[0, 1]);
        assert_eq!(
            load_lexicon("A\tx\nA\ty\n"),
            Err(LexiconError::DuplicateCategory { line: 2, category: "A".into() })
        );
        assert_eq!(load_lexicon("A x\n"), Err(LexiconError::Malformed { line: 1 }));
    }

    #[test]
    fn galc_counts() {
        let galc = Lexicon::galc_stub();
        assert_eq!(galc.categories().len(), 36);
        assert_eq!(galc_features(&review("x"), &galc).dimension(), 37);
        let v = galc_features(&review("we stayed in a room for two nights"), &Lexicon::parse("JOY\thappy\n").unwrap());
        assert_eq!(v.to_dense(), vec![0.0, 8.0]);
        // "glad" in both categories counts twice; "room" is non-emotional.
        let lex = Lexicon::parse("JOY\tglad,happy\nRELIEF\tglad\n").unwrap();
        let v = galc_features(&review("glad happy room"), &lex);
        assert_eq!(v.to_dense(), vec![2.0, 1.0, 1.0]);
    }

    #[test]
    fn inquirer_counts() {
        let lex = Lexicon::parse("NEG\tabsurd\nVICE\tabsurd\nPOS\tgood\n").unwrap();
        assert_eq!(inquirer_features(&review("absurd"), &lex).to_dense(), vec![1.0, 1.0, 0.0]);
        assert!(inquirer_features(&review(""), &lex).is_empty());
        assert_eq!(inquirer_features(&review("absurd absurd"), &lex).to_dense(), vec![2.0, 2.0, 0.0]);
        let stub = Lexicon::inquirer_stub();
        let v = inquirer_features(&review("absurd"), &stub);
        let neg = stub.categories().iter().position(|c| c == "NEG").unwrap();
        let vice = stub.categories().iter().position(|c| c == "VICE").unwrap();
        assert_eq!((v.get(neg), v.get(vice)), (1.0, 1.0));
    }

    proptest! {
        #[test]
        fn str_is_five_dimensional(text in "\\PC{0,80}") {
            prop_assert_eq!(str_features_text(&text).dimension(), 5);
        }

        #[test]
        fn galc_sums_to_tokens_with_single_category_words(words in proptest::collection::vec("[a-f]{1,2}", 0..30)) {
            let lex = Lexicon::parse("A\ta,b\nB\tc\n").unwrap();
            let v = galc_from_tokens(&words, &lex);
            let total: f64 = v.to_dense().iter().sum();
            prop_assert_eq!(total, words.len() as f64);
        }

        #[test]
        fn doubling_text_doubles_ugr(words in proptest::collection::vec("[a-d]{1,2}", 1..30)) {
            let docs: Vec<&[String]> = vec![&words];
            let vocab = Vocabulary::from_token_lists(&docs, &Stopwords::empty()).unwrap();
            let once = ugr_from_tokens(&words, &vocab);
            let doubled: Vec<String> = words.iter().chain(&words).cloned().collect();
            let twice = ugr_from_tokens(&doubled, &vocab);
            prop_assert_eq!(once.nnz(), twice.nnz());
            for (&(i, a), &(j, b)) in once.entries().iter().zip(twice.entries()) {
                prop_assert_eq!(i, j);
                prop_assert!((2.0 * a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn vocabulary_ignores_order(docs in proptest::collection::vec(proptest::collection::vec("[a-e]", 0..8), 1..8)) {
            let fwd: Vec<&[String]> = docs.iter().map(Vec::as_slice).collect();
            let mut rev = fwd.clone();
            rev.reverse();
            let sw = Stopwords::empty();
            prop_assert_eq!(
                Vocabulary::from_token_lists(&fwd, &sw).unwrap(),
                Vocabulary::from_token_lists(&rev, &sw).unwrap()
            );
        }
    }
}
