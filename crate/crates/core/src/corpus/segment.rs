use super::span::Span;
use super::CorpusError;

/// Sentence segmentation adapter.
pub trait SentenceSegmenter {
    /// Sentence spans as character offsets into `text`.
    fn segment(&self, text: &str) -> Result<Vec<Span>, String>;
}

/// Rule-based segmenter: a sentence ends at `.`, `!` or `?` (plus any closing
/// quotes or brackets) followed by whitespace or end of text, unless the word
/// carrying the period is a known abbreviation.
#[derive(Debug, Clone)]
pub struct RuleSegmenter {
    abbreviations: Vec<String>,
}

const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "approx", "ca", "cf", "dr", "e.g", "eq", "etc", "fig", "figs", "i.e", "lb", "lbs", "min", "mr",
    "mrs", "no", "oz", "pt", "ref", "refs", "resp", "st", "tbsp", "tsp", "vol", "vs", "wt",
];

impl Default for RuleSegmenter {
    fn default() -> Self {
        RuleSegmenter {
            abbreviations: DEFAULT_ABBREVIATIONS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl RuleSegmenter {
    pub fn with_abbreviations<I, S>(abbreviations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        RuleSegmenter {
            abbreviations: abbreviations
                .into_iter()
                .map(|s| s.into().to_lowercase())
                .collect(),
        }
    }

    fn is_abbreviation(&self, chars: &[char], period: usize) -> bool {
        let mut start = period;
        while start > 0 && !chars[start - 1].is_whitespace() {
            start -= 1;
        }
        let word: String = chars[start..period].iter().collect::<String>().to_lowercase();
        let word = word.trim_start_matches(['(', '"', '\'']);
        if word.is_empty() {
            return false;
        }
        // single capital letters are initials ("J. Smith")
        if word.chars().count() == 1 && chars[start].is_uppercase() {
            return true;
        }
        self.abbreviations.iter().any(|a| a == word)
    }
}

impl SentenceSegmenter for RuleSegmenter {
    fn segment(&self, text: &str) -> Result<Vec<Span>, String> {
        let chars: Vec<char> = text.chars().collect();
        let mut spans = Vec::new();
        let mut start: Option<usize> = None;
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if start.is_none() {
                if c.is_whitespace() {
                    i += 1;
                    continue;
                }
                start = Some(i);
            }
            if matches!(c, '.' | '!' | '?') {
                let mut end = i + 1;
                while end < chars.len() && matches!(chars[end], '.' | '!' | '?' | '"' | '\'' | ')' | ']') {
                    end += 1;
                }
                let at_boundary = end == chars.len() || chars[end].is_whitespace();
                if at_boundary && !(c == '.' && self.is_abbreviation(&chars, i)) {
                    spans.push(Span::new(start.take().unwrap(), end));
                }
                i = end;
                continue;
            }
            i += 1;
        }
        if let Some(s) = start {
            let mut end = chars.len();
            while end > s && chars[end - 1].is_whitespace() {
                end -= 1;
            }
            spans.push(Span::new(s, end));
        }
        Ok(spans)
    }
}

/// Segment `text` with `segmenter`, enforcing the span contract.
pub fn segment_context(text: &str, segmenter: &dyn SentenceSegmenter) -> Result<Vec<Span>, CorpusError> {
    if text.trim().is_empty() {
        return Err(CorpusError::Segmentation("cannot segment empty text".into()));
    }
    let spans = segmenter.segment(text).map_err(CorpusError::Segmentation)?;
    let n = text.chars().count();
    let mut prev_end = 0;
    for s in &spans {
        if s.is_empty() || s.start < prev_end || s.end > n {
            return Err(CorpusError::Segmentation(format!(
                "segmenter returned invalid span {:?}",
                (s.start, s.end)
            )));
        }
        prev_end = s.end;
    }
    Ok(spans)
}
