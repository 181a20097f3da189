//! Text syntax for structures.
//!
//! ```text
//! S    ::= "1" | NAME | "~" NAME
//!        | "[" S (";" S)+ "]" | "(" S (";" S)+ ")" | "<" S (";" S)+ ">"
//!        | "{" NAME "}" S
//! NAME ::= [a-zA-Z_][a-zA-Z0-9_]*
//! ```
//!
//! Whitespace is insignificant. `{a}S` is the renaming binder; the bound
//! name must be positive, so `{~a}S` is rejected.

use thiserror::Error;

use crate::atom::AtomName;
use crate::structure::Structure;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: renaming must bind a positive atom, found `~{name}`")]
    NegativeBinder { line: usize, col: usize, name: String },
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    One,
    Name(String),
    Tilde,
    Semi,
    Open(char),
    Close(char),
    Eof,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0, line: 1, col: 1 }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line, col: self.col, msg: msg.into() }
    }

    fn bump(&mut self, c: char) {
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.bump(c);
            } else {
                break;
            }
        }
    }

    fn peek_char(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn next_tok(&mut self) -> Result<Tok, ParseError> {
        let c = match self.peek_char() {
            None => return Ok(Tok::Eof),
            Some(c) => c,
        };
        match c {
            '1' => {
                self.bump(c);
                Ok(Tok::One)
            }
            '~' => {
                self.bump(c);
                Ok(Tok::Tilde)
            }
            ';' => {
                self.bump(c);
                Ok(Tok::Semi)
            }
            '[' | '(' | '<' | '{' => {
                self.bump(c);
                Ok(Tok::Open(c))
            }
            ']' | ')' | '>' | '}' => {
                self.bump(c);
                Ok(Tok::Close(c))
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = self.pos;
                while let Some(c) = self.src[self.pos..].chars().next() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        self.bump(c);
                    } else {
                        break;
                    }
                }
                Ok(Tok::Name(self.src[start..self.pos].to_string()))
            }
            other => Err(self.err(format!("unexpected character `{other}`"))),
        }
    }
}

struct Parser<'a> {
    lx: Lexer<'a>,
}

impl<'a> Parser<'a> {
    fn expect_close(&mut self, close: char) -> Result<(), ParseError> {
        match self.lx.next_tok()? {
            Tok::Close(c) if c == close => Ok(()),
            other => Err(self.lx.err(format!("expected `{close}`, found {other:?}"))),
        }
    }

    fn structure(&mut self) -> Result<Structure, ParseError> {
        let (line, col) = (self.lx.line, self.lx.col);
        match self.lx.next_tok()? {
            Tok::One => Ok(Structure::Unit),
            Tok::Name(n) => Ok(Structure::atom(n.as_str())),
            Tok::Tilde => match self.lx.next_tok()? {
                Tok::Name(n) => Ok(Structure::natom(n.as_str())),
                other => Err(self.lx.err(format!("expected name after `~`, found {other:?}"))),
            },
            Tok::Open('[') => self.children(']').map(Structure::par),
            Tok::Open('(') => self.children(')').map(Structure::copar),
            Tok::Open('<') => self.children('>').map(Structure::seq),
            Tok::Open('{') => {
                match self.lx.next_tok()? {
                    Tok::Name(n) => {
                        self.expect_close('}')?;
                        let body = self.structure()?;
                        Ok(Structure::ren(AtomName::new(n), body))
                    }
                    Tok::Tilde => {
                        let name = match self.lx.next_tok()? {
                            Tok::Name(n) => n,
                            _ => String::from("?"),
                        };
                        Err(ParseError::NegativeBinder { line, col, name })
                    }
                    other => {
                        Err(self.lx.err(format!("expected binder name, found {other:?}")))
                    }
                }
            }
            other => Err(ParseError::Syntax {
                line,
                col,
                msg: format!("expected structure, found {other:?}"),
            }),
        }
    }

    fn children(&mut self, close: char) -> Result<Vec<Structure>, ParseError> {
        let mut out = vec![self.structure()?];
        loop {
            let save = (self.lx.pos, self.lx.line, self.lx.col);
            match self.lx.next_tok()? {
                Tok::Semi => out.push(self.structure()?),
                Tok::Close(c) if c == close => return Ok(out),
                other => {
                    self.lx.pos = save.0;
                    self.lx.line = save.1;
                    self.lx.col = save.2;
                    return Err(self.lx.err(format!(
                        "expected `;` or `{close}`, found {other:?}"
                    )));
                }
            }
        }
    }
}

/// Parses a structure; composite nodes are flattened and units absorbed on
/// the way in, so `parse . print` is the identity up to canonical form.
pub fn parse_structure(text: &str) -> Result<Structure, ParseError> {
    let mut p = Parser { lx: Lexer::new(text) };
    let s = p.structure()?;
    match p.lx.next_tok()? {
        Tok::Eof => Ok(s),
        other => Err(p.lx.err(format!("trailing input: {other:?}"))),
    }
}

/// Canonical-spacing printer (the `Display` impl).
pub fn print_structure(s: &Structure) -> String {
    s.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Structure;

    #[test]
    fn grammar_exercise() {
        let s = parse_structure("[<x;~o> ; (p;~o)]").unwrap();
        assert_eq!(
            s,
            Structure::par(vec![
                Structure::seq(vec![Structure::atom("x"), Structure::natom("o")]),
                Structure::copar(vec![Structure::atom("p"), Structure::natom("o")]),
            ])
        );
    }

    #[test]
    fn binder() {
        let s = parse_structure("{a}[a;~a]").unwrap();
        assert_eq!(
            s,
            Structure::ren(
                "a",
                Structure::par(vec![Structure::atom("a"), Structure::natom("a")])
            )
        );
    }

    #[test]
    fn negative_binder_rejected() {
        match parse_structure("{~a}1") {
            Err(ParseError::NegativeBinder { name, .. }) => assert_eq!(name, "a"),
            other => panic!("expected negative-binder error, got {other:?}"),
        }
    }

    #[test]
    fn error_has_position() {
        match parse_structure("[a;;b]") {
            Err(ParseError::Syntax { line: 1, col, .. }) => assert!(col >= 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn print_parse_round_trip() {
        for src in ["1", "a", "~ch_o", "[a;b;c]", "(<a;b>;~c)", "{a}<a;{b}[b;~b]>"] {
            let s = parse_structure(src).unwrap();
            assert_eq!(parse_structure(&s.to_string()).unwrap(), s);
        }
    }
}
