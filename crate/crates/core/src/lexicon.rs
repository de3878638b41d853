//! Phrase lexicons loaded from plain-text files.

use std::fs;
use std::io;
use std::path::Path;

/// Lowercase multi-word phrases matched against token sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseLexicon {
    // sorted longest first so the first hit at a position is the longest
    phrases: Vec<Vec<String>>,
}

impl PhraseLexicon {
    /// One phrase per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Self {
        let mut phrases: Vec<Vec<String>> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(|l| l.split_whitespace().map(str::to_lowercase).collect())
            .collect();
        phrases.sort_by(|a: &Vec<String>, b: &Vec<String>| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        phrases.dedup();
        PhraseLexicon { phrases }
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        Ok(Self::parse(&fs::read_to_string(path)?))
    }

    pub fn from_phrases<I, S>(phrases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let text: Vec<String> = phrases.into_iter().map(|p| p.as_ref().to_string()).collect();
        Self::parse(&text.join("\n"))
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    pub fn phrases(&self) -> impl Iterator<Item = String> + '_ {
        self.phrases.iter().map(|p| p.join(" "))
    }

    /// Length in words of the longest phrase starting at `words[at]`.
    pub fn match_at(&self, words: &[String], at: usize) -> Option<usize> {
        self.phrases
            .iter()
            .find(|p| words.len() >= at + p.len() && p.iter().zip(&words[at..]).all(|(a, b)| a == b))
            .map(Vec::len)
    }

    /// Non-overlapping leftmost-longest matches as `(start, len)`.
    pub fn find_all(&self, words: &[String]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < words.len() {
            match self.match_at(words, i) {
                Some(len) => {
                    out.push((i, len));
                    i += len;
                }
                None => i += 1,
            }
        }
        out
    }

    /// Copy without the given phrases.
    pub fn without(&self, drop: &[&str]) -> Self {
        let drop: Vec<Vec<String>> = drop
            .iter()
            .map(|d| d.split_whitespace().map(str::to_lowercase).collect())
            .collect();
        PhraseLexicon {
            phrases: self.phrases.iter().filter(|p| !drop.contains(p)).cloned().collect(),
        }
    }
}
