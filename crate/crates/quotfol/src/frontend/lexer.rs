//! Tokenizer for scenario files.
//!
//! `#` starts a comment running to the end of the line; statements are
//! terminated by newlines or `;`, so the lexer emits explicit terminator
//! tokens (consecutive ones are collapsed by the parser).

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokKind {
    Ident(String),
    Int(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Semi,
    Equals,
    Arrow,
    Newline,
    Eof,
}

impl fmt::Display for TokKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokKind::Int(s) => write!(f, "integer `{s}`"),
            TokKind::Plus => write!(f, "`+`"),
            TokKind::Minus => write!(f, "`-`"),
            TokKind::Star => write!(f, "`*`"),
            TokKind::Slash => write!(f, "`/`"),
            TokKind::Caret => write!(f, "`^`"),
            TokKind::LParen => write!(f, "`(`"),
            TokKind::RParen => write!(f, "`)`"),
            TokKind::LBracket => write!(f, "`[`"),
            TokKind::RBracket => write!(f, "`]`"),
            TokKind::Comma => write!(f, "`,`"),
            TokKind::Colon => write!(f, "`:`"),
            TokKind::Semi => write!(f, "`;`"),
            TokKind::Equals => write!(f, "`=`"),
            TokKind::Arrow => write!(f, "`->`"),
            TokKind::Newline => write!(f, "end of line"),
            TokKind::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokKind,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone)]
pub struct LexError {
    pub message: String,
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for LexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut push = |kind| out.push(Token { kind, line: tline, col: tcol });
        match c {
            '\n' => {
                chars.next();
                push(TokKind::Newline);
                line += 1;
                col = 1;
                continue;
            }
            ' ' | '\t' | '\r' => {
                chars.next();
                col += 1;
                continue;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
                continue;
            }
            '+' => {
                chars.next();
                push(TokKind::Plus);
            }
            '-' => {
                chars.next();
                if chars.peek() == Some(&'>') {
                    chars.next();
                    col += 1;
                    push(TokKind::Arrow);
                } else {
                    push(TokKind::Minus);
                }
            }
            '*' => {
                chars.next();
                push(TokKind::Star);
            }
            '/' => {
                chars.next();
                push(TokKind::Slash);
            }
            '^' => {
                chars.next();
                push(TokKind::Caret);
            }
            '(' => {
                chars.next();
                push(TokKind::LParen);
            }
            ')' => {
                chars.next();
                push(TokKind::RParen);
            }
            '[' => {
                chars.next();
                push(TokKind::LBracket);
            }
            ']' => {
                chars.next();
                push(TokKind::RBracket);
            }
            ',' => {
                chars.next();
                push(TokKind::Comma);
            }
            ':' => {
                chars.next();
                push(TokKind::Colon);
            }
            ';' => {
                chars.next();
                push(TokKind::Semi);
            }
            '=' => {
                chars.next();
                push(TokKind::Equals);
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                out.push(Token { kind: TokKind::Int(s), line: tline, col: tcol });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                out.push(Token { kind: TokKind::Ident(s), line: tline, col: tcol });
                continue;
            }
            other => {
                return Err(LexError {
                    message: format!("unexpected character `{other}`"),
                    line,
                    col,
                });
            }
        }
        col += 1;
    }
    out.push(Token { kind: TokKind::Eof, line, col });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_terminators() {
        let toks = tokenize("poly p = x^2 # squared\nassert euler(p); refute foo(p)\n").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| &t.kind).collect();
        assert!(kinds.contains(&&TokKind::Caret));
        assert!(kinds.contains(&&TokKind::Semi));
        assert_eq!(kinds.iter().filter(|k| ***k == TokKind::Newline).count(), 2);
    }

    #[test]
    fn arrow_and_positions() {
        let toks = tokenize("(1,2,3) -> (1,1,1)").unwrap();
        assert!(toks.iter().any(|t| t.kind == TokKind::Arrow));
        assert_eq!(toks[0].line, 1);
        assert_eq!(toks[0].col, 1);
    }

    #[test]
    fn rejects_stray_character() {
        let err = tokenize("poly p = x?\n").unwrap_err();
        assert_eq!(err.line, 1);
        assert_eq!(err.col, 11);
    }
}
