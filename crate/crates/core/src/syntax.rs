//! Tokenizer shared by the feature-expression, property and model parsers.

use std::fmt;

use thiserror::Error;

use crate::rational::{parse_rational, Rational};

/// A syntax error with a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    /// Raw numeric literal; decimal point and exponent allowed.
    Number(String),
    Str(String),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokenKind::Number(s) => write!(f, "number `{s}`"),
            TokenKind::Str(s) => write!(f, "string {s:?}"),
            TokenKind::Punct(p) => write!(f, "`{p}`"),
            TokenKind::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

// Longest match first.
const PUNCTS: &[&str] = &[
    "||", "|>", "->", "<=", ">=", "=?", "{", "}", "(", ")", "[", "]", ";", ",", ":", "=", "<", ">",
    "&", "|", "!", "^", "/", "-", "+", "*",
];

fn unicode_alias(c: char) -> Option<&'static str> {
    match c {
        '∧' => Some("&"),
        '∨' => Some("|"),
        '¬' => Some("!"),
        '→' => Some("->"),
        '≤' => Some("<="),
        '≥' => Some(">="),
        _ => None,
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

/// Splits `text` into tokens. `//` starts a comment running to end of line.
pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut column = 1;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column };
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            column += i - start;
            tokens.push(Token {
                kind: TokenKind::Ident(word),
                pos,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let lit: String = chars[start..i].iter().collect();
            column += i - start;
            tokens.push(Token {
                kind: TokenKind::Number(lit),
                pos,
            });
            continue;
        }
        if c == '"' {
            let start = i;
            i += 1;
            let mut value = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(ParseError::new(pos, "unterminated string literal"));
                    }
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') if chars.get(i + 1).is_some() => {
                        value.push(chars[i + 1]);
                        i += 2;
                    }
                    Some(&ch) => {
                        value.push(ch);
                        i += 1;
                    }
                }
            }
            column += i - start;
            tokens.push(Token {
                kind: TokenKind::Str(value),
                pos,
            });
            continue;
        }
        if let Some(p) = unicode_alias(c) {
            i += 1;
            column += 1;
            tokens.push(Token {
                kind: TokenKind::Punct(p),
                pos,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                i += p.len();
                column += p.len();
                tokens.push(Token {
                    kind: TokenKind::Punct(p),
                    pos,
                });
            }
            None => return Err(ParseError::new(pos, format!("unexpected character `{c}`"))),
        }
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        pos: Pos { line, column },
    });
    Ok(tokens)
}

/// Cursor over a token vector; the last token is always `Eof`.
#[derive(Debug, Clone)]
pub struct TokenStream {
    tokens: Vec<Token>,
    index: usize,
}

impl TokenStream {
    pub fn new(text: &str) -> Result<Self, ParseError> {
        Ok(TokenStream {
            tokens: tokenize(text)?,
            index: 0,
        })
    }

    pub fn peek(&self) -> &Token {
        &self.tokens[self.index]
    }

    pub fn peek_nth(&self, n: usize) -> &Token {
        &self.tokens[(self.index + n).min(self.tokens.len() - 1)]
    }

    pub fn advance(&mut self) -> Token {
        let tok = self.tokens[self.index].clone();
        if self.index + 1 < self.tokens.len() {
            self.index += 1;
        }
        tok
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek().kind, TokenKind::Eof)
    }

    pub fn at_punct(&self, p: &str) -> bool {
        matches!(self.peek().kind, TokenKind::Punct(q) if q == p)
    }

    pub fn at_ident(&self, word: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(w) if w == word)
    }

    pub fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn eat_ident(&mut self, word: &str) -> bool {
        if self.at_ident(word) {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn expect_punct(&mut self, p: &str) -> Result<Pos, ParseError> {
        if self.at_punct(p) {
            Ok(self.advance().pos)
        } else {
            Err(self.unexpected(&format!("`{p}`")))
        }
    }

    pub fn expect_keyword(&mut self, word: &str) -> Result<Pos, ParseError> {
        if self.at_ident(word) {
            Ok(self.advance().pos)
        } else {
            Err(self.unexpected(&format!("`{word}`")))
        }
    }

    pub fn expect_ident(&mut self) -> Result<(String, Pos), ParseError> {
        match &self.peek().kind {
            TokenKind::Ident(name) => {
                let name = name.clone();
                let pos = self.advance().pos;
                Ok((name, pos))
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    pub fn expect_string(&mut self) -> Result<(String, Pos), ParseError> {
        match &self.peek().kind {
            TokenKind::Str(s) => {
                let s = s.clone();
                let pos = self.advance().pos;
                Ok((s, pos))
            }
            _ => Err(self.unexpected("a string literal")),
        }
    }

    /// A number, optionally signed and optionally written as a fraction `a/b`.
    pub fn expect_rational(&mut self) -> Result<Rational, ParseError> {
        let negative = self.eat_punct("-");
        let mut value = self.number_literal()?;
        if self.eat_punct("/") {
            let den_pos = self.peek().pos;
            let den = self.number_literal()?;
            if num_traits::Zero::is_zero(&den) {
                return Err(ParseError::new(den_pos, "division by zero"));
            }
            value /= den;
        }
        Ok(if negative { -value } else { value })
    }

    fn number_literal(&mut self) -> Result<Rational, ParseError> {
        match &self.peek().kind {
            TokenKind::Number(lit) => {
                let lit = lit.clone();
                let pos = self.advance().pos;
                parse_rational(&lit).ok_or_else(|| ParseError::new(pos, format!("malformed number `{lit}`")))
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    pub fn expect_eof(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    pub fn unexpected(&self, expected: &str) -> ParseError {
        let tok = self.peek();
        ParseError::new(tok.pos, format!("expected {expected}, found {}", tok.kind))
    }

    pub fn error_here(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.peek().pos, message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizes_operators_and_positions() {
        let toks = tokenize("P[<=0.1](F a.b) // tail").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.kind.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::Ident("P".into()),
                TokenKind::Punct("["),
                TokenKind::Punct("<="),
                TokenKind::Number("0.1".into()),
                TokenKind::Punct("]"),
                TokenKind::Punct("("),
                TokenKind::Ident("F".into()),
                TokenKind::Ident("a.b".into()),
                TokenKind::Punct(")"),
                TokenKind::Eof,
            ]
        );
        assert_eq!(toks[3].pos, Pos { line: 1, column: 5 });
    }

    #[test]
    fn eof_sits_after_last_character() {
        let toks = tokenize("W &").unwrap();
        assert_eq!(toks.last().unwrap().pos, Pos { line: 1, column: 4 });
    }

    #[test]
    fn rejects_stray_characters() {
        let err = tokenize("a $ b").unwrap_err();
        assert_eq!((err.line, err.column), (1, 3));
    }
}
