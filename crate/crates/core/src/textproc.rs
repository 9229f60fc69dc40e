//! Tokenization and segmentation shared by every feature extractor.
//!
//! All rules are character-class based so results are identical across
//! platforms: sentences end at a run of `.`, `!` or `?` followed by
//! whitespace or end of text, clauses split at `, ; :` and em or en dashes, and tokens are
//! maximal runs of alphanumeric characters after lowercasing.

use std::collections::HashSet;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

/// Clause delimiters inside a sentence.
pub const CLAUSE_DELIMITERS: [char; 5] = [',', ';', ':', '\u{2014}', '\u{2013}'];

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// A lowercased token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub is_stopword: bool,
}

/// A stopword list. Lookups are exact on the lowercased surface form.
#[derive(Debug, Clone, Default)]
pub struct Stopwords {
    words: HashSet<String>,
}

impl Stopwords {
    /// Parses a stopword file: one word per line, `#` starts a comment.
    pub fn parse(document: &str) -> Self {
        let words = document
            .lines()
            .map(|line| line.split('#').next().unwrap_or("").trim())
            .filter(|w| !w.is_empty())
            .map(str::to_lowercase)
            .collect();
        Stopwords { words }
    }

    /// The bundled English list.
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Text split into sentences, clauses and tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedText {
    pub sentences: Vec<String>,
    /// Clauses in text order, each tagged with the index of its sentence.
    pub clauses: Vec<(usize, String)>,
    pub tokens: Vec<Token>,
}

impl SegmentedText {
    pub fn new(text: &str, stopwords: &Stopwords) -> Self {
        let sentences = segment_sentences(text);
        let clauses = sentences
            .iter()
            .enumerate()
            .flat_map(|(i, s)| segment_clauses(s).into_iter().map(move |c| (i, c)))
            .collect();
        SegmentedText {
            sentences,
            clauses,
            tokens: tokenize(text, stopwords),
        }
    }
}

/// Splits text into sentences at terminal punctuation runs followed by
/// whitespace or end of input. Empty segments are dropped.
pub fn segment_sentences(text: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        if is_terminal(chars[i].1) {
            let mut j = i;
            while j + 1 < chars.len() && is_terminal(chars[j + 1].1) {
                j += 1;
            }
            let at_boundary = j + 1 == chars.len() || chars[j + 1].1.is_whitespace();
            if at_boundary {
                let end = chars[j].0 + chars[j].1.len_utf8();
                push_trimmed(&mut sentences, &text[start..end]);
                start = end;
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    push_trimmed(&mut sentences, &text[start..]);
    sentences
}

fn push_trimmed(out: &mut Vec<String>, piece: &str) {
    let piece = piece.trim();
    if !piece.is_empty() {
        out.push(piece.to_string());
    }
}

/// Splits a sentence into clauses at commas, semicolons, colons and dashes.
pub fn segment_clauses(sentence: &str) -> Vec<String> {
    let mut clauses = Vec::new();
    for piece in sentence.split(&CLAUSE_DELIMITERS[..]) {
        push_trimmed(&mut clauses, piece);
    }
    clauses
}

/// Lowercases the text and splits it on every non-alphanumeric character.
pub fn tokenize(text: &str, stopwords: &Stopwords) -> Vec<Token> {
    token_surfaces(text)
        .map(|surface| Token {
            is_stopword: stopwords.contains(&surface),
            surface,
        })
        .collect()
}

/// Lowercased token strings, without stopword flags.
pub fn token_surfaces(text: &str) -> impl Iterator<Item = String> {
    let lower = text.to_lowercase();
    lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect::<Vec<_>>()
        .into_iter()
}

/// Number of tokens `tokenize` would produce, without allocating them.
pub fn token_count(text: &str) -> usize {
    let mut count = 0;
    let mut in_token = false;
    for c in text.chars().flat_map(char::to_lowercase) {
        let alnum = c.is_alphanumeric();
        if alnum && !in_token {
            count += 1;
        }
        in_token = alnum;
    }
    count
}

/// Number of alphabetic characters.
pub fn letter_count(text: &str) -> usize {
    text.chars().filter(|c| c.is_alphabetic()).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn surfaces(text: &str) -> Vec<String> {
        tokenize(text, &Stopwords::english())
            .into_iter()
            .map(|t| t.surface)
            .collect()
    }

    #[test]
    fn sentences() {
        assert_eq!(segment_sentences("Great stay. Would return!"), vec!["Great stay.", "Would return!"]);
        assert!(segment_sentences("").is_empty());
        assert_eq!(segment_sentences("No terminal punctuation"), vec!["No terminal punctuation"]);
        assert_eq!(segment_sentences("Great!!"), vec!["Great!!"]);
        assert_eq!(segment_sentences("Price was 3.5 stars. Ok?"), vec!["Price was 3.5 stars.", "Ok?"]);
        assert_eq!(segment_sentences("  .  "), vec!["."]);
    }

    #[test]
    fn clauses() {
        let c = segment_clauses("The staff were amazing, they went out of their way to help us");
        assert_eq!(c, vec!["The staff were amazing", "they went out of their way to help us"]);
        assert_eq!(segment_clauses("Nice room"), vec!["Nice room"]);
        assert_eq!(segment_clauses("a, , b"), vec!["a", "b"]);
        assert_eq!(segment_clauses("x; y: z \u{2014} w"), vec!["x", "y", "z", "w"]);
    }

    #[test]
    fn tokens() {
        assert_eq!(surfaces("The Staff were AMAZING"), vec!["the", "staff", "were", "amazing"]);
        assert!(surfaces("").is_empty());
        assert_eq!(surfaces("don't"), vec!["don", "t"]);
        assert_eq!(surfaces("room 101!"), vec!["room", "101"]);
        let toks = tokenize("The pool", &Stopwords::english());
        assert!(toks[0].is_stopword);
        assert!(!toks[1].is_stopword);
    }

    #[test]
    fn letters() {
        assert_eq!(letter_count("abc, def!"), 6);
        assert_eq!(letter_count("123"), 0);
        assert_eq!(letter_count("The staff"), 8);
    }

    #[test]
    fn stopword_file_comments() {
        let s = Stopwords::parse("# header\nThe\n\nand # trailing\n");
        assert_eq!(s.len(), 2);
        assert!(s.contains("the") && s.contains("and"));
        assert!(Stopwords::english().len() >= 150);
    }

    proptest! {
        #[test]
        fn tokenize_ignores_case(text in "[a-zA-Z0-9 ,.!?'éÉß-]{0,60}") {
            prop_assert_eq!(surfaces(&text.to_lowercase()), surfaces(&text));
        }

        #[test]
        fn clause_split_preserves_tokens(text in "[a-zA-Z ,;:]{0,80}") {
            let whole = token_count(&text);
            let parts: usize = segment_clauses(&text).iter().map(|c| token_count(c)).sum();
            prop_assert_eq!(whole, parts);
            prop_assert_eq!(whole, surfaces(&text).len());
        }

        #[test]
        fn letter_count_is_additive(a in "\\PC{0,30}", b in "\\PC{0,30}") {
            let joined = format!("{a}{b}");
            prop_assert_eq!(letter_count(&joined), letter_count(&a) + letter_count(&b));
        }
    }
}
