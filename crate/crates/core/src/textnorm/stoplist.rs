use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::error::{CurateError, Result};

const DEFAULT_FUNCTION_WORDS: &str = include_str!("../../data/function_words.txt");
const DEFAULT_GENERIC_WORDS: &str = include_str!("../../data/generic_recipe_words.txt");

/// Words excluded from content-word sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stoplist {
    pub function_words: BTreeSet<String>,
    pub generic_recipe_words: BTreeSet<String>,
}

/// Parses a word-per-line list; `#` starts a comment.
pub fn parse_word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|line| line.split('#').next().unwrap_or("").trim().to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

impl Stoplist {
    pub fn new(
        function_words: impl IntoIterator<Item = impl Into<String>>,
        generic_recipe_words: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        let lower = |w: String| w.to_lowercase();
        Stoplist {
            function_words: function_words.into_iter().map(Into::into).map(lower).collect(),
            generic_recipe_words: generic_recipe_words
                .into_iter()
                .map(Into::into)
                .map(lower)
                .collect(),
        }
    }

    /// An empty stoplist: every token is a content word.
    pub fn empty() -> Self {
        Stoplist {
            function_words: BTreeSet::new(),
            generic_recipe_words: BTreeSet::new(),
        }
    }

    /// Loads either list from a file, falling back to the shipped default.
    pub fn load(function_words: Option<&Path>, generic_words: Option<&Path>) -> Result<Self> {
        let read = |path: Option<&Path>, default: &str| -> Result<BTreeSet<String>> {
            match path {
                Some(p) => fs::read_to_string(p)
                    .map(|t| parse_word_list(&t))
                    .map_err(|e| CurateError::io(p, e)),
                None => Ok(parse_word_list(default)),
            }
        };
        Ok(Stoplist {
            function_words: read(function_words, DEFAULT_FUNCTION_WORDS)?,
            generic_recipe_words: read(generic_words, DEFAULT_GENERIC_WORDS)?,
        })
    }

    pub fn contains(&self, word: &str) -> bool {
        self.function_words.contains(word) || self.generic_recipe_words.contains(word)
    }
}

impl Default for Stoplist {
    fn default() -> Self {
        Stoplist {
            function_words: parse_word_list(DEFAULT_FUNCTION_WORDS),
            generic_recipe_words: parse_word_list(DEFAULT_GENERIC_WORDS),
        }
    }
}
