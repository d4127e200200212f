use super::span::Span;

/// A word-level token with its character span in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub span: Span,
}

/// Canonical word tokenization shared by graph alignments and the encoders.
///
/// Alphanumeric runs form one token (a `.` or `,` between two digits stays
/// inside the run, so `2.5` is one token); every other non-whitespace
/// character is a token on its own.
pub fn tokenize_words(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_alphanumeric() {
            i += 1;
            while i < chars.len() {
                let d = chars[i];
                let decimal = (d == '.' || d == ',')
                    && chars[i - 1].is_ascii_digit()
                    && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
                if d.is_alphanumeric() || decimal {
                    i += 1;
                } else {
                    break;
                }
            }
        } else {
            i += 1;
        }
        tokens.push(Token {
            text: chars[start..i].iter().collect(),
            span: Span::new(start, i),
        });
    }
    tokens
}

/// Indices of tokens whose span intersects `span`.
pub fn tokens_in(tokens: &[Token], span: Span) -> Vec<usize> {
    tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.span.intersects(&span))
        .map(|(i, _)| i)
        .collect()
}
