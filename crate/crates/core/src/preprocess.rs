//! Text cleaning and tokenization.

use std::collections::HashSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bundled English stopword list, one lowercase word per line.
pub const STOPWORDS_EN: &str = include_str!("../data/stopwords_en.txt");
/// Bumped whenever `data/stopwords_en.txt` changes.
pub const STOPWORDS_VERSION: &str = "en-318-v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub lowercase: bool,
    pub strip_urls: bool,
    pub strip_emails: bool,
    pub strip_numeric_tokens: bool,
    pub remove_stopwords: bool,
    pub min_token_chars: usize,
    pub strip_newsgroup_headers: bool,
    pub stopwords_version: String,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            strip_urls: true,
            strip_emails: true,
            strip_numeric_tokens: true,
            remove_stopwords: false,
            min_token_chars: 2,
            strip_newsgroup_headers: false,
            stopwords_version: STOPWORDS_VERSION.to_owned(),
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_token_chars == 0 {
            return Err(Error::InvalidConfig(
                "min_token_chars must be at least 1".into(),
            ));
        }
        if self.remove_stopwords && self.stopwords_version != STOPWORDS_VERSION {
            return Err(Error::InvalidConfig(format!(
                "stopword list {} requested but this build ships {}",
                self.stopwords_version, STOPWORDS_VERSION
            )));
        }
        Ok(())
    }

    /// Cleans then tokenizes.
    pub fn analyze(&self, raw: &str) -> TokenSequence {
        tokenize(&clean(raw, self), self)
    }
}

/// Ordered, non-empty, whitespace-free tokens of one document.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    tokens: Vec<String>,
}

impl TokenSequence {
    pub fn new(tokens: Vec<String>) -> Self {
        debug_assert!(tokens
            .iter()
            .all(|t| !t.is_empty() && !t.chars().any(char::is_whitespace)));
        Self { tokens }
    }

    pub fn as_slice(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn into_inner(self) -> Vec<String> {
        self.tokens
    }
}

impl<S: Into<String>> FromIterator<S> for TokenSequence {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self::new(iter.into_iter().map(Into::into).collect())
    }
}

fn url_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)(?:https?://|www\.)\S*").unwrap())
}

fn email_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"[\p{L}\p{N}._+\-]+@[\p{L}\p{N}._+\-]+\.[\p{L}\p{N}._+\-]+").unwrap()
    })
}

fn header_line_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[A-Za-z][A-Za-z0-9-]*:").unwrap())
}

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS_EN
            .lines()
            .map(str::trim)
            .filter(|w| !w.is_empty())
            .collect()
    })
}

pub fn is_stopword(word: &str) -> bool {
    stopwords().contains(word)
}

/// Drops a leading RFC 822 style header block.
///
/// The block is everything before the first blank line, and is only removed
/// when its first line is a `Name: value` field and every other line is either
/// such a field or a continuation line (leading whitespace). Text without a
/// header block is returned unchanged.
pub fn strip_header_block(raw: &str) -> &str {
    let mut offset = 0;
    let mut saw_header = false;
    for line in raw.split_inclusive('\n') {
        let content = line.trim_end_matches(['\n', '\r']);
        if content.trim().is_empty() {
            return if saw_header {
                &raw[offset + line.len()..]
            } else {
                raw
            };
        }
        let is_field = header_line_regex().is_match(content);
        let is_continuation = saw_header && content.starts_with([' ', '\t']);
        if !(is_field || is_continuation) {
            return raw;
        }
        saw_header = true;
        offset += line.len();
    }
    raw
}

/// Applies, in order: header stripping, URL removal, email removal, and
/// lowercasing, each only if enabled.
///
/// URLs are maximal non-whitespace runs starting with `http://`, `https://`
/// or `www.` (case-insensitive). Emails are `local@domain.tld` runs over
/// letters, digits and `._+-`. Removal repeats until nothing matches, so a
/// removal can never leave a new match behind.
pub fn clean(raw: &str, config: &PreprocessConfig) -> String {
    let mut text = if config.strip_newsgroup_headers {
        strip_header_block(raw).to_owned()
    } else {
        raw.to_owned()
    };
    if config.strip_urls || config.strip_emails {
        loop {
            let before = text.len();
            if config.strip_urls {
                text = url_regex().replace_all(&text, "").into_owned();
            }
            if config.strip_emails {
                text = email_regex().replace_all(&text, "").into_owned();
            }
            if text.len() == before {
                break;
            }
        }
    }
    if config.lowercase {
        text = text.to_lowercase();
    }
    text
}

/// Splits cleaned text into maximal runs of alphanumeric characters and
/// applies the length, numeric and stopword filters.
pub fn tokenize(cleaned: &str, config: &PreprocessConfig) -> TokenSequence {
    let tokens = cleaned
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .filter(|t| t.chars().count() >= config.min_token_chars)
        .filter(|t| !(config.strip_numeric_tokens && t.chars().all(char::is_numeric)))
        .filter(|t| !(config.remove_stopwords && is_stopword(&t.to_lowercase())))
        .map(str::to_owned)
        .collect();
    TokenSequence { tokens }
}
