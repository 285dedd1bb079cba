//! Concrete syntax: `λx y.x (y x)` or backslash form `\x y.x (y x)`.
//!
//! Variables start lowercase; uppercase-initial names are constants,
//! resolved against user [`Definitions`] first and the builtins `Y`,
//! `THETA` and `Y_<n>` second. Application is left-associative and binders
//! extend as far right as possible. Tracked variables print as
//! `⟨υk:tag⟩` placeholders and have no parseable form.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::fixpoint::{theta, y_combinator, y_n};
use crate::term::{Term, VarKind};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl ParseError {
    fn new(line: u32, col: u32, message: impl Into<String>) -> ParseError {
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }
}

// ===========================================================================
// Definitions
// ===========================================================================

/// Named constants usable from the parser. Later definitions shadow
/// earlier ones and the builtin combinators.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Definitions {
    map: BTreeMap<String, Term>,
}

impl Definitions {
    pub fn insert(&mut self, name: impl Into<String>, term: Term) {
        self.map.insert(name.into(), term);
    }

    pub fn get(&self, name: &str) -> Option<&Term> {
        self.map.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }
}

fn builtin(name: &str) -> Option<Term> {
    match name {
        "Y" => Some(y_combinator()),
        "THETA" => Some(theta()),
        _ => {
            let digits = name.strip_prefix("Y_")?;
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            digits.parse::<usize>().ok().map(y_n)
        }
    }
}

// ===========================================================================
// Tokenizer
// ===========================================================================

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Lambda,
    Dot,
    LParen,
    RParen,
    Ident(String),
    Const(String),
}

struct Lexed {
    tok: Tok,
    line: u32,
    col: u32,
}

fn is_name_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

fn is_name_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

struct Scanner {
    chars: Vec<char>,
    i: usize,
    line: u32,
    col: u32,
}

impl Scanner {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.i).copied()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }
}

fn tokenize(src: &str) -> Result<Vec<Lexed>, ParseError> {
    let mut s = Scanner {
        chars: src.chars().collect(),
        i: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    while let Some(c) = s.peek() {
        let (tl, tc) = (s.line, s.col);
        let simple = match c {
            'λ' | '\\' => Some(Tok::Lambda),
            '.' => Some(Tok::Dot),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            s.bump();
            out.push(Lexed {
                tok,
                line: tl,
                col: tc,
            });
        } else if c.is_whitespace() {
            s.bump();
        } else if is_name_start(c) {
            let mut name = String::new();
            name.push(s.bump().unwrap());
            while let Some(c) = s.peek() {
                if is_name_continue(c) {
                    name.push(s.bump().unwrap());
                } else {
                    break;
                }
            }
            let tok = if name.chars().next().unwrap().is_ascii_uppercase() {
                Tok::Const(name)
            } else {
                Tok::Ident(name)
            };
            out.push(Lexed {
                tok,
                line: tl,
                col: tc,
            });
        } else {
            return Err(ParseError::new(
                tl,
                tc,
                format!("unexpected character {c:?}"),
            ));
        }
    }
    Ok(out)
}

// ===========================================================================
// Parser
// ===========================================================================

struct Parser<'a> {
    toks: Vec<Lexed>,
    pos: usize,
    defs: &'a Definitions,
    end: (u32, u32),
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn here(&self) -> (u32, u32) {
        self.toks
            .get(self.pos)
            .map(|l| (l.line, l.col))
            .unwrap_or(self.end)
    }

    fn advance(&mut self) -> Option<&Lexed> {
        let l = self.toks.get(self.pos);
        if l.is_some() {
            self.pos += 1;
        }
        l
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::new(line, col, message)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        if self.peek() == Some(&Tok::Lambda) {
            return self.lambda();
        }
        let mut acc = self.atom()?.ok_or_else(|| self.err("expected a term"))?;
        loop {
            if self.peek() == Some(&Tok::Lambda) {
                // a binder as the final argument needs no parentheses
                let arg = self.lambda()?;
                acc = Term::app(acc, arg);
                return Ok(acc);
            }
            match self.atom()? {
                Some(arg) => acc = Term::app(acc, arg),
                None => return Ok(acc),
            }
        }
    }

    fn lambda(&mut self) -> Result<Term, ParseError> {
        self.advance();
        let mut binders = Vec::new();
        while let Some(Tok::Ident(_)) = self.peek() {
            let Some(Lexed {
                tok: Tok::Ident(name),
                ..
            }) = self.advance()
            else {
                unreachable!()
            };
            binders.push(name.clone());
        }
        if binders.is_empty() {
            return Err(self.err("expected at least one binder"));
        }
        if self.peek() != Some(&Tok::Dot) {
            return Err(self.err("expected '.' after binders"));
        }
        self.advance();
        let body = self.term()?;
        Ok(binders
            .into_iter()
            .rev()
            .fold(body, |acc, b| Term::lam(b, acc)))
    }

    fn atom(&mut self) -> Result<Option<Term>, ParseError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.advance();
                let t = self.term()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.err("expected ')'"));
                }
                self.advance();
                Ok(Some(t))
            }
            Some(Tok::Ident(_)) => {
                let Some(Lexed {
                    tok: Tok::Ident(name),
                    ..
                }) = self.advance()
                else {
                    unreachable!()
                };
                Ok(Some(Term::var(name.as_str())))
            }
            Some(Tok::Const(_)) => {
                let (line, col) = self.here();
                let Some(Lexed {
                    tok: Tok::Const(name),
                    ..
                }) = self.advance()
                else {
                    unreachable!()
                };
                let name = name.clone();
                if let Some(t) = self.defs.get(&name) {
                    return Ok(Some(t.clone()));
                }
                match builtin(&name) {
                    Some(t) => Ok(Some(t)),
                    None => Err(ParseError::new(
                        line,
                        col,
                        format!("unknown constant {name}"),
                    )),
                }
            }
            _ => Ok(None),
        }
    }
}

fn end_position(src: &str) -> (u32, u32) {
    let mut line = 1u32;
    let mut col = 1u32;
    for c in src.chars() {
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

/// Parse a term, resolving constants against `defs` and the builtins.
pub fn parse_with(src: &str, defs: &Definitions) -> Result<Term, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        defs,
        end: end_position(src),
    };
    let t = p.term()?;
    if p.peek().is_some() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(t)
}

/// Parse a term with only the builtin constants in scope.
pub fn parse(src: &str) -> Result<Term, ParseError> {
    parse_with(src, &Definitions::default())
}

/// Parse a definitions file: one `NAME = term` per line, `#` comments,
/// blank lines ignored. Later lines may use earlier names.
pub fn parse_definitions(src: &str) -> Result<Definitions, ParseError> {
    let mut defs = Definitions::default();
    for (i, raw) in src.lines().enumerate() {
        let line_no = i as u32 + 1;
        let line = match raw.find('#') {
            Some(at) => &raw[..at],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(ParseError::new(line_no, 1, "expected NAME = term"));
        };
        let name = line[..eq].trim();
        if name.is_empty() || !name.chars().next().unwrap().is_ascii_uppercase() {
            return Err(ParseError::new(
                line_no,
                1,
                "definition names start with an uppercase letter",
            ));
        }
        if !name.chars().all(is_name_continue) {
            return Err(ParseError::new(line_no, 1, format!("bad name {name:?}")));
        }
        let body = &line[eq + 1..];
        let term = parse_with(body, &defs).map_err(|e| ParseError {
            line: line_no,
            col: e.col + eq as u32 + 1,
            message: e.message,
        })?;
        defs.insert(name, term);
    }
    Ok(defs)
}

// ===========================================================================
// Printer
// ===========================================================================

#[derive(Clone, Copy, PartialEq)]
enum Pos {
    Top,
    Fun,
    Arg,
}

fn write_term(t: &Term, pos: Pos, numbering: &[crate::term::TrackedVar], out: &mut String) {
    match t {
        Term::Var(VarKind::Named(v)) => out.push_str(v.as_str()),
        Term::Var(VarKind::Tracked(tv)) => {
            let i = numbering
                .iter()
                .position(|x| x == tv)
                .map(|i| i + 1)
                .unwrap_or(0);
            let _ = write!(out, "⟨υ{}:{}⟩", i, tv.elem().form_tag());
        }
        Term::Lam(_, _) => {
            let parens = pos != Pos::Top;
            if parens {
                out.push('(');
            }
            out.push('λ');
            let mut cur = t;
            let mut first = true;
            while let Term::Lam(v, b) = cur {
                if !first {
                    out.push(' ');
                }
                out.push_str(v.as_str());
                first = false;
                cur = b;
            }
            out.push('.');
            write_term(cur, Pos::Top, numbering, out);
            if parens {
                out.push(')');
            }
        }
        Term::App(f, a) => {
            let parens = pos == Pos::Arg;
            if parens {
                out.push('(');
            }
            write_term(f, Pos::Fun, numbering, out);
            out.push(' ');
            write_term(a, Pos::Arg, numbering, out);
            if parens {
                out.push(')');
            }
        }
    }
}

/// Render with minimal parentheses; inverse of [`parse`] up to alpha
/// equivalence for terms without tracked variables.
pub fn print(t: &Term) -> String {
    let numbering = t.tracked_vars();
    let mut out = String::new();
    write_term(t, Pos::Top, &numbering, &mut out);
    out
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}
