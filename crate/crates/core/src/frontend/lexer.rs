//! Tokenizer for un-preprocessed C-like source. Comments and whitespace are
//! skipped (they live in the gaps between token spans); preprocessor lines
//! come out as a single `Directive` token.

use super::ast::Span;
use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokKind {
    Ident,
    Number,
    Str,
    Char,
    Punct,
    Directive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub kind: TokKind,
    pub span: Span,
}

const PUNCT3: [&str; 4] = ["<<=", ">>=", "...", "->*"];
const PUNCT2: [&str; 21] = [
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "^=", "|=",
    "##", "::",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    // true while only whitespace/comments have been seen on the current line
    let mut line_start = true;

    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b'\n' => {
                line_start = true;
                i += 1;
            }
            b' ' | b'\t' | b'\r' | 0x0c | 0x0b => i += 1,
            b'\\' if bytes.get(i + 1) == Some(&b'\n') => i += 2,
            b'\\' if bytes.get(i + 1) == Some(&b'\r') && bytes.get(i + 2) == Some(&b'\n') => i += 3,
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                let start = i;
                i += 2;
                loop {
                    if i + 1 >= bytes.len() {
                        return Err(ParseError::unterminated(src, start, "block comment"));
                    }
                    if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                        i += 2;
                        break;
                    }
                    i += 1;
                }
            }
            b'#' if line_start => {
                let start = i;
                let end = directive_end(bytes, i);
                toks.push(Token { kind: TokKind::Directive, span: Span::new(start, end) });
                i = end;
            }
            b'"' | b'\'' => {
                let start = i;
                i = quoted_end(src, i, b)?;
                let kind = if b == b'"' { TokKind::Str } else { TokKind::Char };
                toks.push(Token { kind, span: Span::new(start, i) });
                line_start = false;
            }
            b'0'..=b'9' => {
                let start = i;
                i = number_end(bytes, i);
                toks.push(Token { kind: TokKind::Number, span: Span::new(start, i) });
                line_start = false;
            }
            b'.' if bytes.get(i + 1).is_some_and(u8::is_ascii_digit) => {
                let start = i;
                i = number_end(bytes, i);
                toks.push(Token { kind: TokKind::Number, span: Span::new(start, i) });
                line_start = false;
            }
            _ if is_ident_start(b) => {
                let start = i;
                while i < bytes.len() && is_ident_continue(bytes[i]) {
                    i += 1;
                }
                // string/char prefixes: L"..", u8"..", U'..'
                let word = &src[start..i];
                if matches!(word, "L" | "u" | "U" | "u8") && matches!(bytes.get(i), Some(b'"') | Some(b'\'')) {
                    let q = bytes[i];
                    i = quoted_end(src, i, q)?;
                    let kind = if q == b'"' { TokKind::Str } else { TokKind::Char };
                    toks.push(Token { kind, span: Span::new(start, i) });
                } else {
                    toks.push(Token { kind: TokKind::Ident, span: Span::new(start, i) });
                }
                line_start = false;
            }
            _ => {
                let start = i;
                let rest = &src[i..];
                let len = PUNCT3
                    .iter()
                    .chain(PUNCT2.iter())
                    .find(|p| rest.starts_with(**p))
                    .map(|p| p.len())
                    .unwrap_or_else(|| rest.chars().next().map_or(1, char::len_utf8));
                i += len;
                toks.push(Token { kind: TokKind::Punct, span: Span::new(start, i) });
                line_start = false;
            }
        }
    }
    Ok(toks)
}

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_' || b == b'$' || b >= 0x80
}

fn is_ident_continue(b: u8) -> bool {
    is_ident_start(b) || b.is_ascii_digit()
}

/// End offset of a preprocessor line, honoring backslash continuations.
/// The terminating newline is not included.
fn directive_end(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() {
        match bytes[i] {
            b'\\' if bytes.get(i + 1) == Some(&b'\n') => i += 2,
            b'\\' if bytes.get(i + 1) == Some(&b'\r') && bytes.get(i + 2) == Some(&b'\n') => i += 3,
            b'\n' => break,
            _ => i += 1,
        }
    }
    // keep a trailing '\r' out of the span for CRLF files
    if i > 0 && bytes.get(i - 1) == Some(&b'\r') && bytes.get(i) == Some(&b'\n') {
        i - 1
    } else {
        i
    }
}

fn quoted_end(src: &str, start: usize, quote: u8) -> Result<usize, ParseError> {
    let bytes = src.as_bytes();
    let mut i = start + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'\n' => break,
            c if c == quote => return Ok(i + 1),
            _ => i += 1,
        }
    }
    let what = if quote == b'"' { "string literal" } else { "character literal" };
    Err(ParseError::unterminated(src, start, what))
}

/// pp-number: digits, letters, dots, and exponent signs.
fn number_end(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_alphanumeric() || c == b'.' || c == b'_' {
            i += 1;
        } else if (c == b'+' || c == b'-') && i > 0 && matches!(bytes[i - 1], b'e' | b'E' | b'p' | b'P') {
            // only an exponent sign when the number is not hex digits ending in e
            i += 1;
        } else if c == b'\'' && bytes.get(i + 1).is_some_and(u8::is_ascii_alphanumeric) {
            // C23 digit separator
            i += 1;
        } else {
            break;
        }
    }
    i
}
