//! Tokenization, lemmatization and content-word extraction shared by every
//! sieving stage. All functions are pure.

mod lemma;
mod stoplist;

use std::collections::BTreeSet;

pub use lemma::lemmatize;
pub use stoplist::{parse_word_list, Stoplist};

/// A set of lowercase lemmas, iterated in sorted order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenSet(BTreeSet<String>);

impl TokenSet {
    pub fn new() -> Self {
        TokenSet::default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn intersection_len(&self, other: &TokenSet) -> usize {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.0.iter().filter(|t| large.0.contains(*t)).count()
    }

    pub fn is_disjoint(&self, other: &TokenSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn is_subset(&self, other: &TokenSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn extend(&mut self, other: TokenSet) {
        self.0.extend(other.0);
    }

    pub fn into_inner(self) -> BTreeSet<String> {
        self.0
    }
}

impl FromIterator<String> for TokenSet {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        TokenSet(
            iter.into_iter()
                .filter(|t| !t.is_empty() && !t.chars().any(char::is_whitespace))
                .collect(),
        )
    }
}

impl<'a> FromIterator<&'a str> for TokenSet {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        iter.into_iter().map(str::to_owned).collect()
    }
}

fn is_joiner(c: char) -> bool {
    matches!(c, '-' | '\'' | '\u{2019}')
}

/// Splits text into lowercase tokens.
///
/// Any non-alphanumeric character separates tokens, except a hyphen or
/// apostrophe with alphanumerics on both sides, which stays inside the token.
pub fn tokenize(text: &str) -> Vec<String> {
    // Case-fold first so every char below is lowercase alphanumeric, a
    // joiner, or a separator.
    let mut chars: Vec<char> = Vec::with_capacity(text.len());
    for c in text.chars() {
        if c.is_alphanumeric() {
            let before = chars.len();
            chars.extend(c.to_lowercase().filter(|l| l.is_alphanumeric()));
            if chars.len() == before {
                chars.push(' ');
            }
        } else if is_joiner(c) {
            chars.push(if c == '\u{2019}' { '\'' } else { c });
        } else {
            chars.push(' ');
        }
    }
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let joins = is_joiner(c)
            && !current.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if c.is_alphanumeric() || joins {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Decides which tokens of a sentence are content words.
///
/// The shipped implementation is [`Stoplist`] exclusion; a part-of-speech
/// backend can be plugged in through [`PosSelector`].
pub trait ContentSelector: Sync {
    /// Returns one keep/drop flag per token.
    fn select(&self, tokens: &[String], lemmas: &[String]) -> Vec<bool>;
}

impl ContentSelector for Stoplist {
    fn select(&self, tokens: &[String], lemmas: &[String]) -> Vec<bool> {
        tokens
            .iter()
            .zip(lemmas)
            .map(|(t, l)| !self.contains(t) && !self.contains(l))
            .collect()
    }
}

/// Coarse part-of-speech classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartOfSpeech {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Numeral,
    Other,
}

/// A sentence-level part-of-speech tagger.
pub trait PosTagger: Sync {
    fn tag(&self, tokens: &[String]) -> Vec<PartOfSpeech>;
}

/// Keeps nouns, verbs, adjectives, adverbs and numerals reported by a tagger,
/// then drops generic recipe words.
pub struct PosSelector<T> {
    pub tagger: T,
    pub stoplist: Stoplist,
}

impl<T: PosTagger> ContentSelector for PosSelector<T> {
    fn select(&self, tokens: &[String], lemmas: &[String]) -> Vec<bool> {
        let tags = self.tagger.tag(tokens);
        tags.iter()
            .zip(lemmas)
            .map(|(tag, lemma)| {
                *tag != PartOfSpeech::Other && !self.stoplist.generic_recipe_words.contains(lemma)
            })
            .collect()
    }
}

/// Content-word lemmas of `text` in order of occurrence, with repeats.
pub fn content_lemmas<S: ContentSelector + ?Sized>(text: &str, selector: &S) -> Vec<String> {
    let tokens = tokenize(text);
    let lemmas: Vec<String> = tokens.iter().map(|t| lemmatize(t)).collect();
    let keep = selector.select(&tokens, &lemmas);
    lemmas
        .into_iter()
        .zip(keep)
        .filter_map(|(l, k)| k.then_some(l))
        .collect()
}

/// The set of content-word lemmas of `text`.
pub fn content_words<S: ContentSelector + ?Sized>(text: &str, selector: &S) -> TokenSet {
    content_lemmas(text, selector).into_iter().collect()
}
