use serde::{Deserialize, Serialize};

/// Half-open interval `[start, end)` of character (Unicode scalar) offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn intersects(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn shift_left(&self, offset: usize) -> Span {
        Span::new(self.start - offset, self.end - offset)
    }
}

impl From<(usize, usize)> for Span {
    fn from((start, end): (usize, usize)) -> Self {
        Span { start, end }
    }
}

impl From<Span> for (usize, usize) {
    fn from(span: Span) -> Self {
        (span.start, span.end)
    }
}

/// Number of characters in `text`.
pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

/// Slice `text` by character offsets. Offsets past the end are clamped.
pub fn slice_chars(text: &str, span: Span) -> &str {
    let mut start_byte = text.len();
    let mut end_byte = text.len();
    for (ci, (bi, _)) in text.char_indices().enumerate() {
        if ci == span.start {
            start_byte = bi;
        }
        if ci == span.end {
            end_byte = bi;
            break;
        }
    }
    if start_byte > end_byte {
        return "";
    }
    &text[start_byte..end_byte]
}
