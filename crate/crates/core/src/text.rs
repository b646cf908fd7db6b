//! Tokenization and token-boundary phrase matching shared by filters,
//! lexicon matching, and document embedding.

use std::collections::BTreeMap;

/// Lowercase tokens; alphanumerics and apostrophes are token characters,
/// everything else is a separator. "can't" stays one token, "chair" never
/// yields "hair".
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() || ch == '\'' {
            for lc in ch.to_lowercase() {
                current.push(lc);
            }
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Normalize a term or concept label for matching: lowercase, tokenize,
/// re-join with single spaces.
pub fn normalize_phrase(s: &str) -> String {
    tokenize(s).join(" ")
}

/// A set of tokenized phrases supporting longest-first greedy matching.
/// Each phrase carries the payloads (e.g. (category, term) pairs) attached
/// to it.
#[derive(Debug, Clone, Default)]
pub struct PhraseSet<P> {
    // token sequence -> payloads
    phrases: BTreeMap<Vec<String>, Vec<P>>,
    max_len: usize,
}

impl<P: Clone> PhraseSet<P> {
    pub fn new() -> Self {
        PhraseSet {
            phrases: BTreeMap::new(),
            max_len: 0,
        }
    }

    pub fn insert(&mut self, phrase: &str, payload: P) {
        let toks = tokenize(phrase);
        if toks.is_empty() {
            return;
        }
        self.max_len = self.max_len.max(toks.len());
        self.phrases.entry(toks).or_default().push(payload);
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    /// Longest-phrase-first greedy scan. Each token span is consumed by at
    /// most one match; all payloads registered for the matched span fire.
    /// Returns (start token index, matched length, payload) triples.
    pub fn scan(&self, tokens: &[String]) -> Vec<(usize, usize, P)> {
        let mut hits = Vec::new();
        if self.phrases.is_empty() {
            return hits;
        }
        let mut i = 0;
        while i < tokens.len() {
            let mut matched = 0;
            let upper = self.max_len.min(tokens.len() - i);
            for len in (1..=upper).rev() {
                if let Some(payloads) = self.phrases.get(&tokens[i..i + len]) {
                    for p in payloads {
                        hits.push((i, len, p.clone()));
                    }
                    matched = len;
                    break;
                }
            }
            i += if matched > 0 { matched } else { 1 };
        }
        hits
    }

    /// True when any phrase occurs at a token boundary.
    pub fn matches_any(&self, tokens: &[String]) -> bool {
        if self.phrases.is_empty() {
            return false;
        }
        for i in 0..tokens.len() {
            let upper = self.max_len.min(tokens.len() - i);
            for len in 1..=upper {
                if self.phrases.contains_key(&tokens[i..i + len]) {
                    return true;
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_lowercases_and_splits() {
        assert_eq!(tokenize("I can't, mate!"), vec!["i", "can't", "mate"]);
    }

    #[test]
    fn no_substring_match() {
        let mut set = PhraseSet::new();
        set.insert("hair", ());
        assert!(!set.matches_any(&tokenize("the chair is broken")));
        assert!(set.matches_any(&tokenize("my hair fell out")));
    }

    #[test]
    fn longest_phrase_wins() {
        let mut set = PhraseSet::new();
        set.insert("personality disorder", "short");
        set.insert("borderline personality disorder", "long");
        let toks = tokenize("diagnosed with borderline personality disorder today");
        let hits = set.scan(&toks);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].2, "long");
    }

    #[test]
    fn spans_consumed_once() {
        let mut set = PhraseSet::new();
        set.insert("end it", 1);
        set.insert("it all", 2);
        let hits = set.scan(&tokenize("want to end it all"));
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].2, 1);
    }
}
