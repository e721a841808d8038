use num_bigint::BigInt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eq,
    Semi,
    Comma,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("number `{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => {
                let c = match other {
                    Tok::Plus => "+",
                    Tok::Minus => "-",
                    Tok::Star => "*",
                    Tok::Slash => "/",
                    Tok::Caret => "^",
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LBrace => "{",
                    Tok::RBrace => "}",
                    Tok::Eq => "=",
                    Tok::Semi => ";",
                    Tok::Comma => ",",
                    _ => unreachable!(),
                };
                format!("`{c}`")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() {
            let begin = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            col += i - begin;
            let text: String = chars[begin..i].iter().collect();
            out.push(Token { tok: Tok::Ident(text), line: start_line, col: start_col });
            continue;
        }
        if c.is_ascii_digit() {
            let begin = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            col += i - begin;
            let text: String = chars[begin..i].iter().collect();
            let n: BigInt = text.parse().expect("digits parse as an integer");
            out.push(Token { tok: Tok::Int(n), line: start_line, col: start_col });
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '=' => Tok::Eq,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            other => return Err(Error::Syntax { line, col, msg: format!("unexpected character `{other}`") }),
        };
        out.push(Token { tok, line: start_line, col: start_col });
        i += 1;
        col += 1;
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_and_comments() {
        let toks = tokenize("# header\nu_x *\n  a'").unwrap();
        assert_eq!(toks[0].tok, Tok::Ident("u_x".into()));
        assert_eq!((toks[0].line, toks[0].col), (2, 1));
        assert_eq!(toks[1].tok, Tok::Star);
        assert_eq!(toks[2].tok, Tok::Ident("a'".into()));
        assert_eq!((toks[2].line, toks[2].col), (3, 3));
    }

    #[test]
    fn stray_character() {
        let err = tokenize("u + 1.5").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 1, col: 6, .. }));
    }
}
