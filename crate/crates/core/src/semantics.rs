//! A small probabilistic-choice language over a finite state poset.
//!
//! ```text
//! expr := ret <state>
//!       | choice <p/q> <expr> <expr>       0 < p/q < 1
//!       | scale <p/q> <expr>               p/q >= 0
//!       | par <expr> <expr>
//!       | bind <expr> { <state> -> <expr>, ... }
//!       | ( <expr> )
//! ```
//!
//! A program denotes a simple valuation. `bind` is the bar extension of its
//! table, so the table must be monotone and must cover the support of the
//! bound expression.

use std::collections::BTreeMap;
use std::fmt;

use crate::cone::{bar_extension, cx_cone};
use crate::error::{Error, Result};
use crate::poset::FinitePoset;
use crate::rational::Rational;
use crate::relations;
use crate::valuation::{SimpleValuation, Space};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Program {
    Ret(String),
    Choice(Rational, Box<Program>, Box<Program>),
    Scale(Rational, Box<Program>),
    Par(Box<Program>, Box<Program>),
    Bind(Box<Program>, BTreeMap<String, Program>),
}

impl Program {
    pub fn ret(state: impl Into<String>) -> Self {
        Program::Ret(state.into())
    }

    pub fn choice(p: Rational, left: Program, right: Program) -> Self {
        Program::Choice(p, Box::new(left), Box::new(right))
    }

    pub fn scale(a: Rational, body: Program) -> Self {
        Program::Scale(a, Box::new(body))
    }

    pub fn par(left: Program, right: Program) -> Self {
        Program::Par(Box::new(left), Box::new(right))
    }

    pub fn bind(body: Program, table: BTreeMap<String, Program>) -> Self {
        Program::Bind(Box::new(body), table)
    }

    /// Number of nodes in the syntax tree, binder tables included.
    pub fn size(&self) -> usize {
        match self {
            Program::Ret(_) => 1,
            Program::Choice(_, l, r) | Program::Par(l, r) => 1 + l.size() + r.size(),
            Program::Scale(_, e) => 1 + e.size(),
            Program::Bind(e, table) => 1 + e.size() + table.values().map(Program::size).sum::<usize>(),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Program::Ret(s) => write!(f, "ret {s}"),
            Program::Choice(p, l, r) => write!(f, "choice {p} ({l}) ({r})"),
            Program::Scale(a, e) => write!(f, "scale {a} ({e})"),
            Program::Par(l, r) => write!(f, "par ({l}) ({r})"),
            Program::Bind(e, table) => {
                write!(f, "bind ({e}) {{")?;
                for (i, (s, k)) in table.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, " {s} -> {k}")?;
                }
                write!(f, " }}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    LBrace,
    RBrace,
    Comma,
    Arrow,
    Word(String),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Open => f.write_str("'('"),
            Tok::Close => f.write_str("')'"),
            Tok::LBrace => f.write_str("'{'"),
            Tok::RBrace => f.write_str("'}'"),
            Tok::Comma => f.write_str("','"),
            Tok::Arrow => f.write_str("'->'"),
            Tok::Word(w) => write!(f, "{w:?}"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn is_delim(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '{' | '}' | ',' | '#')
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for (l, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line, column) = (l + 1, i + 1);
            let single = match c {
                '(' => Some(Tok::Open),
                ')' => Some(Tok::Close),
                '{' => Some(Tok::LBrace),
                '}' => Some(Tok::RBrace),
                ',' => Some(Tok::Comma),
                _ => None,
            };
            if c == '#' {
                break;
            } else if c.is_whitespace() {
                i += 1;
            } else if let Some(tok) = single {
                out.push(Token { tok, line, column });
                i += 1;
            } else if c == '-' && chars.get(i + 1) == Some(&'>') {
                out.push(Token { tok: Tok::Arrow, line, column });
                i += 2;
            } else {
                let start = i;
                while i < chars.len()
                    && !is_delim(chars[i])
                    && !(chars[i] == '-' && chars.get(i + 1) == Some(&'>'))
                {
                    i += 1;
                }
                let word = chars[start..i].iter().collect();
                out.push(Token { tok: Tok::Word(word), line, column });
            }
        }
    }
    out
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    space: &'a FinitePoset,
    end: (usize, usize),
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.end, |t| (t.line, t.column))
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let (line, column) = self.here();
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn next(&mut self, expected: &str) -> Result<Token> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(self.error(format!("expected {expected}, found end of input"))),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        let t = self.next(&tok.to_string())?;
        if t.tok == tok {
            Ok(())
        } else {
            self.pos -= 1;
            Err(self.error(format!("expected {tok}, found {}", t.tok)))
        }
    }

    fn word(&mut self, expected: &str) -> Result<Token> {
        let t = self.next(expected)?;
        if matches!(t.tok, Tok::Word(_)) {
            Ok(t)
        } else {
            self.pos -= 1;
            Err(self.error(format!("expected {expected}, found {}", t.tok)))
        }
    }

    fn state(&mut self) -> Result<String> {
        let t = self.word("a state")?;
        let Tok::Word(name) = t.tok else { unreachable!() };
        if self.space.index_of(&name).is_err() {
            return Err(Error::UnknownState {
                name,
                line: t.line,
                column: t.column,
            });
        }
        Ok(name)
    }

    fn rational(&mut self) -> Result<(Rational, Token)> {
        let t = self.word("a rational p/q")?;
        let Tok::Word(w) = &t.tok else { unreachable!() };
        match w.parse::<Rational>() {
            Ok(r) => Ok((r, t)),
            Err(_) => {
                self.pos -= 1;
                Err(self.error(format!("expected a rational p/q, found {w:?}")))
            }
        }
    }

    fn range_error(t: &Token, message: String) -> Error {
        Error::Syntax {
            line: t.line,
            column: t.column,
            message,
        }
    }

    fn expr(&mut self) -> Result<Program> {
        let t = self.next("an expression")?;
        let keyword = match &t.tok {
            Tok::Open => {
                let e = self.expr()?;
                self.expect(Tok::Close)?;
                return Ok(e);
            }
            Tok::Word(w) => w.as_str(),
            other => {
                self.pos -= 1;
                return Err(self.error(format!("expected an expression, found {other}")));
            }
        };
        match keyword {
            "ret" => Ok(Program::Ret(self.state()?)),
            "choice" => {
                let (p, pt) = self.rational()?;
                if !p.is_positive() || p >= Rational::one() {
                    return Err(Self::range_error(
                        &pt,
                        format!("probability {p} out of range: must lie strictly between 0 and 1"),
                    ));
                }
                let l = self.expr()?;
                let r = self.expr()?;
                Ok(Program::choice(p, l, r))
            }
            "scale" => {
                let (a, at) = self.rational()?;
                if a.is_negative() {
                    return Err(Self::range_error(&at, format!("scale factor {a} is negative")));
                }
                Ok(Program::scale(a, self.expr()?))
            }
            "par" => {
                let l = self.expr()?;
                let r = self.expr()?;
                Ok(Program::par(l, r))
            }
            "bind" => {
                let body = self.expr()?;
                self.expect(Tok::LBrace)?;
                let mut table = BTreeMap::new();
                while self.peek().is_some_and(|t| t.tok != Tok::RBrace) {
                    let at = self.here();
                    let s = self.state()?;
                    self.expect(Tok::Arrow)?;
                    let k = self.expr()?;
                    if table.insert(s.clone(), k).is_some() {
                        return Err(Error::Syntax {
                            line: at.0,
                            column: at.1,
                            message: format!("duplicate binder entry for {s:?}"),
                        });
                    }
                    if self.peek().is_some_and(|t| t.tok == Tok::Comma) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                self.expect(Tok::RBrace)?;
                Ok(Program::bind(body, table))
            }
            other => {
                self.pos -= 1;
                Err(self.error(format!("unknown keyword {other:?}")))
            }
        }
    }
}

/// Parses one program; every state must name an element of `space`.
pub fn parse(text: &str, space: &FinitePoset) -> Result<Program> {
    let tokens = tokenize(text);
    let end = text
        .lines()
        .enumerate()
        .last()
        .map_or((1, 1), |(i, l)| (i + 1, l.chars().count() + 1));
    let mut parser = Parser {
        tokens,
        pos: 0,
        space,
        end,
    };
    let program = parser.expr()?;
    if let Some(t) = parser.peek() {
        return Err(parser.error(format!("unexpected {} after the program", t.tok)));
    }
    Ok(program)
}

/// The valuation a program denotes.
pub fn denote(program: &Program, space: &Space) -> Result<SimpleValuation> {
    match program {
        Program::Ret(s) => SimpleValuation::point(space, space.index_of(s)?),
        Program::Choice(p, l, r) => {
            if !p.is_positive() || *p >= Rational::one() {
                return Err(Error::PreconditionFailed(format!(
                    "choice probability {p} must lie strictly between 0 and 1"
                )));
            }
            let left = denote(l, space)?.scale(p)?;
            let right = denote(r, space)?.scale(&(Rational::one() - p))?;
            left.add(&right)
        }
        Program::Scale(a, e) => denote(e, space)?.scale(a),
        Program::Par(l, r) => denote(l, space)?.add(&denote(r, space)?),
        Program::Bind(e, table) => {
            let body = denote(e, space)?;
            let mut images = BTreeMap::new();
            for (s, k) in table {
                images.insert(space.index_of(s)?, denote(k, space)?);
            }
            for (&s, ks) in &images {
                for (&t, kt) in &images {
                    if space.lt(s, t) && !relations::leq(ks, kt)?.verdict {
                        return Err(Error::NonMonotoneBinder {
                            lower: space.name(s).to_owned(),
                            upper: space.name(t).to_owned(),
                        });
                    }
                }
            }
            bar_extension(&cx_cone(space), &body, |b| {
                images
                    .get(&b)
                    .cloned()
                    .ok_or_else(|| Error::MissingBinderEntry(space.name(b).to_owned()))
            })
        }
    }
}
