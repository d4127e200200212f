//! Rule-based lemmatization.
//!
//! Candidates come from an irregular-form table and inflectional suffix
//! rules (the usual noun, verb and adjective detachments plus consonant
//! undoubling). Without a dictionary the rules over-generate, so matching
//! tests membership in the candidate set rather than trusting one guess.

use std::collections::HashMap;
use std::sync::OnceLock;

/// Lemmatizer adapter.
pub trait Lemmatizer {
    /// Candidate lemmas, most plausible first. Always includes the
    /// lower-cased word itself.
    fn lemmas(&self, word: &str) -> Vec<String>;

    fn lemmatize(&self, word: &str) -> String {
        self.lemmas(word).into_iter().next().unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RuleLemmatizer;

const IRREGULAR: &[(&str, &str)] = &[
    ("am", "be"), ("are", "be"), ("is", "be"), ("was", "be"), ("were", "be"), ("been", "be"),
    ("ate", "eat"), ("eaten", "eat"), ("became", "become"), ("began", "begin"), ("begun", "begin"),
    ("bent", "bend"), ("bound", "bind"), ("bit", "bite"), ("bitten", "bite"), ("blew", "blow"),
    ("blown", "blow"), ("broke", "break"), ("broken", "break"), ("brought", "bring"),
    ("built", "build"), ("bought", "buy"), ("caught", "catch"), ("chose", "choose"),
    ("chosen", "choose"), ("came", "come"), ("did", "do"), ("done", "do"), ("does", "do"),
    ("drew", "draw"), ("drawn", "draw"), ("dried", "dry"), ("fed", "feed"), ("fell", "fall"),
    ("fallen", "fall"), ("felt", "feel"), ("found", "find"), ("froze", "freeze"),
    ("frozen", "freeze"), ("gave", "give"), ("given", "give"), ("went", "go"), ("gone", "go"),
    ("got", "get"), ("gotten", "get"), ("ground", "grind"), ("grew", "grow"), ("grown", "grow"),
    ("had", "have"), ("has", "have"), ("held", "hold"), ("hung", "hang"), ("kept", "keep"),
    ("knew", "know"), ("known", "know"), ("laid", "lay"), ("led", "lead"), ("left", "leave"),
    ("lost", "lose"), ("made", "make"), ("meant", "mean"), ("met", "meet"), ("paid", "pay"),
    ("ran", "run"), ("rose", "rise"), ("risen", "rise"), ("said", "say"), ("saw", "see"),
    ("seen", "see"), ("sent", "send"), ("shook", "shake"), ("shaken", "shake"), ("shone", "shine"),
    ("shrank", "shrink"), ("shrunk", "shrink"), ("slid", "slide"), ("sold", "sell"),
    ("spent", "spend"), ("spun", "spin"), ("stood", "stand"), ("stuck", "stick"),
    ("stirred", "stir"), ("struck", "strike"), ("swept", "sweep"), ("took", "take"),
    ("taken", "take"), ("taught", "teach"), ("thought", "think"), ("threw", "throw"),
    ("thrown", "throw"), ("tore", "tear"), ("torn", "tear"), ("told", "tell"), ("woke", "wake"),
    ("wore", "wear"), ("worn", "wear"), ("won", "win"), ("wound", "wind"), ("wrote", "write"),
    ("written", "write"), ("children", "child"), ("feet", "foot"), ("geese", "goose"),
    ("halves", "half"), ("knives", "knife"), ("leaves", "leaf"), ("loaves", "loaf"),
    ("men", "man"), ("mice", "mouse"), ("teeth", "tooth"), ("women", "woman"),
    ("shelves", "shelf"), ("better", "good"), ("best", "good"), ("worse", "bad"), ("worst", "bad"),
];

fn irregular() -> &'static HashMap<&'static str, &'static str> {
    static TABLE: OnceLock<HashMap<&'static str, &'static str>> = OnceLock::new();
    TABLE.get_or_init(|| IRREGULAR.iter().copied().collect())
}

// (suffix, replacement), tried in order
const SUFFIX_RULES: &[(&str, &str)] = &[
    ("ies", "y"),
    ("ches", "ch"),
    ("shes", "sh"),
    ("sses", "ss"),
    ("xes", "x"),
    ("zes", "z"),
    ("ves", "f"),
    ("es", "e"),
    ("es", ""),
    ("s", ""),
    ("ied", "y"),
    ("ed", ""),
    ("ed", "e"),
    ("ing", ""),
    ("ing", "e"),
    ("ier", "y"),
    ("iest", "y"),
    ("er", ""),
    ("er", "e"),
    ("est", ""),
    ("est", "e"),
];

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

impl Lemmatizer for RuleLemmatizer {
    fn lemmas(&self, word: &str) -> Vec<String> {
        let lower = word.to_lowercase();
        let mut out: Vec<String> = Vec::new();
        let push = |s: String, out: &mut Vec<String>| {
            if !s.is_empty() && !out.contains(&s) {
                out.push(s);
            }
        };
        if let Some(base) = irregular().get(lower.as_str()) {
            push(base.to_string(), &mut out);
        }
        let alphabetic = lower.bytes().all(|b| b.is_ascii_lowercase());
        if alphabetic && lower.len() > 3 && !lower.ends_with("ss") {
            for (suffix, repl) in SUFFIX_RULES {
                if let Some(stem) = lower.strip_suffix(suffix) {
                    if stem.len() < 2 || !stem.bytes().any(is_vowel) && !repl.contains(|c: char| "aeiouy".contains(c)) {
                        continue;
                    }
                    let candidate = format!("{stem}{repl}");
                    // chopped -> chop, stirring -> stir
                    let b = stem.as_bytes();
                    if repl.is_empty()
                        && matches!(*suffix, "ed" | "ing" | "er" | "est")
                        && b.len() >= 3
                        && b[b.len() - 1] == b[b.len() - 2]
                        && !is_vowel(b[b.len() - 1])
                        && !matches!(b[b.len() - 1], b'l' | b's' | b'z')
                    {
                        push(stem[..stem.len() - 1].to_string(), &mut out);
                    }
                    push(candidate, &mut out);
                }
            }
        }
        push(lower, &mut out);
        out
    }
}
