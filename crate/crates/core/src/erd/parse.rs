//! Reader for the ERD term notation.
//!
//! Parsing happens in two passes: the text is first read into a generic
//! constructor-term tree (strings, numbers, lists, constructor applications),
//! which is then interpreted as an [`Erd`]. Both passes report positions.

use std::fmt;

use thiserror::Error;

use super::{Attribute, Cardinality, Domain, Entity, Erd, KeyKind, MaxBound, REnd, Relationship};
use crate::calendar;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: expected {expected}, found {found}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Str(String),
    Num(String),
    Con(String),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Num(n) => write!(f, "number {n}"),
            Tok::Con(c) => write!(f, "`{c}`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn error_at(pos: Pos, expected: impl Into<String>, found: impl Into<String>) -> ParseError {
    ParseError {
        line: pos.line,
        column: pos.column,
        expected: expected.into(),
        found: found.into(),
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.chars().peekable(),
            pos: Pos { line: 1, column: 1 },
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn peek2(&self) -> (Option<char>, Option<char>) {
        let mut it = self.chars.clone();
        (it.next(), it.next())
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek2() {
                (Some(c), _) if c.is_whitespace() => {
                    self.bump();
                }
                (Some('-'), Some('-')) => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => return,
            }
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, Pos)>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let start = self.pos;
            let Some(c) = self.chars.peek().copied() else {
                out.push((Tok::Eof, start));
                return Ok(out);
            };
            let tok = match c {
                '[' => self.single(Tok::LBracket),
                ']' => self.single(Tok::RBracket),
                '(' => self.single(Tok::LParen),
                ')' => self.single(Tok::RParen),
                ',' => self.single(Tok::Comma),
                '"' => self.string(start)?,
                '-' | '0'..='9' => self.number(start)?,
                c if c.is_ascii_alphabetic() => {
                    let mut name = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                            name.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    Tok::Con(name)
                }
                other => return Err(error_at(start, "a term", format!("character {other:?}"))),
            };
            out.push((tok, start));
        }
    }

    fn single(&mut self, tok: Tok) -> Tok {
        self.bump();
        tok
    }

    fn string(&mut self, start: Pos) -> Result<Tok, ParseError> {
        self.bump();
        let mut s = String::new();
        loop {
            let here = self.pos;
            match self.bump() {
                None => return Err(error_at(start, "closing `\"`", "end of input")),
                Some('"') => return Ok(Tok::Str(s)),
                Some('\\') => match self.bump() {
                    Some('"') => s.push('"'),
                    Some('\\') => s.push('\\'),
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some('r') => s.push('\r'),
                    Some('&') => {}
                    Some(d) if d.is_ascii_digit() => {
                        let mut code = d.to_digit(10).unwrap_or(0);
                        while let Some(&d) = self.chars.peek() {
                            let Some(v) = d.to_digit(10) else { break };
                            code = code.saturating_mul(10).saturating_add(v);
                            self.bump();
                        }
                        match char::from_u32(code) {
                            Some(ch) => s.push(ch),
                            None => return Err(error_at(here, "a valid character code", code.to_string())),
                        }
                    }
                    other => {
                        return Err(error_at(
                            here,
                            "an escape sequence",
                            other.map_or("end of input".to_string(), |c| format!("\\{c}")),
                        ))
                    }
                },
                Some(c) => s.push(c),
            }
        }
    }

    fn number(&mut self, start: Pos) -> Result<Tok, ParseError> {
        let mut text = String::new();
        if self.chars.peek() == Some(&'-') {
            text.push('-');
            self.bump();
        }
        let digits = |lx: &mut Self, text: &mut String| {
            let mut any = false;
            while let Some(&c) = lx.chars.peek() {
                if c.is_ascii_digit() {
                    text.push(c);
                    lx.bump();
                    any = true;
                } else {
                    break;
                }
            }
            any
        };
        if !digits(self, &mut text) {
            return Err(error_at(start, "a number", format!("{text:?}")));
        }
        if self.chars.peek() == Some(&'.') {
            text.push('.');
            self.bump();
            if !digits(self, &mut text) {
                return Err(error_at(start, "digits after decimal point", text));
            }
        }
        if matches!(self.chars.peek(), Some('e' | 'E')) {
            text.push('e');
            self.bump();
            if let Some(&c @ ('+' | '-')) = self.chars.peek() {
                text.push(c);
                self.bump();
            }
            if !digits(self, &mut text) {
                return Err(error_at(start, "exponent digits", text));
            }
        }
        Ok(Tok::Num(text))
    }
}

#[derive(Clone, Debug)]
enum Term {
    Str(String, Pos),
    Num(String, Pos),
    List(Vec<Term>, Pos),
    App(String, Vec<Term>, Pos),
}

impl Term {
    fn pos(&self) -> Pos {
        match self {
            Term::Str(_, p) | Term::Num(_, p) | Term::List(_, p) | Term::App(_, _, p) => *p,
        }
    }

    fn describe(&self) -> String {
        match self {
            Term::Str(s, _) => format!("string {s:?}"),
            Term::Num(n, _) => format!("number {n}"),
            Term::List(..) => "a list".to_string(),
            Term::App(c, args, _) if args.is_empty() => format!("`{c}`"),
            Term::App(c, _, _) => format!("`{c} ...`"),
        }
    }
}

struct TermParser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl TermParser {
    fn peek(&self) -> &(Tok, Pos) {
        &self.toks[self.at]
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, expected: &str) -> Result<(), ParseError> {
        let (tok, pos) = self.next();
        if tok == want {
            Ok(())
        } else {
            Err(error_at(pos, expected, tok.to_string()))
        }
    }

    fn starts_atom(tok: &Tok) -> bool {
        matches!(
            tok,
            Tok::Str(_) | Tok::Num(_) | Tok::Con(_) | Tok::LBracket | Tok::LParen
        )
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        if let (Tok::Con(name), pos) = self.peek().clone() {
            self.next();
            let mut args = Vec::new();
            while Self::starts_atom(&self.peek().0) {
                args.push(self.atom()?);
            }
            return Ok(Term::App(name, args, pos));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        let (tok, pos) = self.next();
        match tok {
            Tok::Str(s) => Ok(Term::Str(s, pos)),
            Tok::Num(n) => Ok(Term::Num(n, pos)),
            Tok::Con(c) => Ok(Term::App(c, Vec::new(), pos)),
            Tok::LParen => {
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::LBracket => {
                let mut items = Vec::new();
                if self.peek().0 == Tok::RBracket {
                    self.next();
                    return Ok(Term::List(items, pos));
                }
                loop {
                    items.push(self.term()?);
                    let (tok, p) = self.next();
                    match tok {
                        Tok::Comma => continue,
                        Tok::RBracket => return Ok(Term::List(items, pos)),
                        other => return Err(error_at(p, "`,` or `]`", other.to_string())),
                    }
                }
            }
            other => Err(error_at(pos, "a term", other.to_string())),
        }
    }
}

/// Parses an ERD from its term notation.
///
/// Only structure is checked here; see [`super::validate_erd`] for the
/// semantic invariants.
pub fn parse_erd(source: &str) -> Result<Erd, ParseError> {
    let toks = Lexer::new(source).tokens()?;
    let mut parser = TermParser { toks, at: 0 };
    let term = parser.term()?;
    let (tok, pos) = parser.next();
    if tok != Tok::Eof {
        return Err(error_at(pos, "end of input", tok.to_string()));
    }
    erd_of(&term)
}

fn app<'t>(term: &'t Term, con: &str, arity: usize) -> Result<&'t [Term], ParseError> {
    match term {
        Term::App(c, args, pos) if c == con => {
            if args.len() == arity {
                Ok(args)
            } else {
                Err(error_at(
                    *pos,
                    format!("{arity} argument(s) to `{con}`"),
                    format!("{} argument(s)", args.len()),
                ))
            }
        }
        other => Err(error_at(other.pos(), format!("`{con}`"), other.describe())),
    }
}

fn string(term: &Term, what: &str) -> Result<String, ParseError> {
    match term {
        Term::Str(s, _) => Ok(s.clone()),
        other => Err(error_at(
            other.pos(),
            format!("string literal ({what})"),
            other.describe(),
        )),
    }
}

fn list<'t>(term: &'t Term, what: &str) -> Result<&'t [Term], ParseError> {
    match term {
        Term::List(items, _) => Ok(items),
        other => Err(error_at(other.pos(), format!("list of {what}"), other.describe())),
    }
}

fn nullary<'t>(term: &'t Term, choices: &[&str]) -> Result<&'t str, ParseError> {
    match term {
        Term::App(c, args, _) if args.is_empty() && choices.contains(&c.as_str()) => Ok(c),
        other => Err(error_at(
            other.pos(),
            format!("one of {}", choices.join(", ")),
            other.describe(),
        )),
    }
}

fn unsigned(term: &Term) -> Result<u64, ParseError> {
    match term {
        Term::Num(n, pos) => n
            .parse::<u64>()
            .map_err(|_| error_at(*pos, "non-negative integer", format!("number {n}"))),
        other => Err(error_at(other.pos(), "non-negative integer", other.describe())),
    }
}

fn erd_of(term: &Term) -> Result<Erd, ParseError> {
    let args = app(term, "ERD", 3)?;
    Ok(Erd {
        name: string(&args[0], "ERD name")?,
        entities: list(&args[1], "entities")?
            .iter()
            .map(entity_of)
            .collect::<Result<_, _>>()?,
        relationships: list(&args[2], "relationships")?
            .iter()
            .map(relationship_of)
            .collect::<Result<_, _>>()?,
    })
}

fn entity_of(term: &Term) -> Result<Entity, ParseError> {
    let args = app(term, "Entity", 2)?;
    Ok(Entity {
        name: string(&args[0], "entity name")?,
        attributes: list(&args[1], "attributes")?
            .iter()
            .map(attribute_of)
            .collect::<Result<_, _>>()?,
    })
}

fn attribute_of(term: &Term) -> Result<Attribute, ParseError> {
    let args = app(term, "Attribute", 4)?;
    let key = match nullary(&args[2], &["NoKey", "Unique"])? {
        "Unique" => KeyKind::Unique,
        _ => KeyKind::NoKey,
    };
    Ok(Attribute {
        name: string(&args[0], "attribute name")?,
        domain: domain_of(&args[1])?,
        key,
        null_allowed: bool_of(&args[3])?,
    })
}

fn bool_of(term: &Term) -> Result<bool, ParseError> {
    Ok(nullary(term, &["True", "False"])? == "True")
}

const DOMAINS: [&str; 5] = ["IntDom", "FloatDom", "BoolDom", "StringDom", "DateDom"];

fn domain_of(term: &Term) -> Result<Domain, ParseError> {
    let (con, default) = match term {
        Term::App(c, args, pos) if DOMAINS.contains(&c.as_str()) => {
            if args.len() != 1 {
                return Err(error_at(
                    *pos,
                    format!("1 argument to `{c}`"),
                    format!("{} argument(s)", args.len()),
                ));
            }
            (c.as_str(), &args[0])
        }
        other => {
            return Err(error_at(
                other.pos(),
                format!("one of {}", DOMAINS.join(", ")),
                other.describe(),
            ))
        }
    };
    let literal = match default {
        Term::App(c, args, _) if c == "Nothing" && args.is_empty() => None,
        Term::App(c, args, _) if c == "Just" && args.len() == 1 => Some(&args[0]),
        other => return Err(error_at(other.pos(), "`Nothing` or `Just <literal>`", other.describe())),
    };
    Ok(match con {
        "IntDom" => Domain::Int(literal.map(int_literal).transpose()?),
        "FloatDom" => Domain::Float(literal.map(float_literal).transpose()?),
        "BoolDom" => Domain::Bool(literal.map(bool_of).transpose()?),
        "StringDom" => Domain::String(literal.map(|t| string(t, "default value")).transpose()?),
        _ => Domain::Date(literal.map(date_literal).transpose()?),
    })
}

fn int_literal(term: &Term) -> Result<i64, ParseError> {
    match term {
        Term::Num(n, pos) => n
            .parse::<i64>()
            .map_err(|_| error_at(*pos, "integer literal", format!("number {n}"))),
        other => Err(error_at(other.pos(), "integer literal", other.describe())),
    }
}

fn float_literal(term: &Term) -> Result<f64, ParseError> {
    match term {
        Term::Num(n, pos) => n
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| error_at(*pos, "finite float literal", format!("number {n}"))),
        other => Err(error_at(other.pos(), "float literal", other.describe())),
    }
}

fn date_literal(term: &Term) -> Result<calendar::CalendarTime, ParseError> {
    match term {
        Term::Str(s, pos) => {
            calendar::parse_iso(s).ok_or_else(|| error_at(*pos, "date literal YYYY-MM-DDTHH:MM:SS", format!("{s:?}")))
        }
        other => Err(error_at(other.pos(), "date literal string", other.describe())),
    }
}

fn relationship_of(term: &Term) -> Result<Relationship, ParseError> {
    let args = app(term, "Relationship", 2)?;
    let name = string(&args[0], "relationship name")?;
    let ends = list(&args[1], "relationship ends")?;
    if ends.len() != 2 {
        return Err(error_at(
            args[1].pos(),
            "exactly two `REnd` terms",
            format!("{} end(s)", ends.len()),
        ));
    }
    Ok(Relationship {
        name,
        end_a: rend_of(&ends[0])?,
        end_b: rend_of(&ends[1])?,
    })
}

fn rend_of(term: &Term) -> Result<REnd, ParseError> {
    let args = app(term, "REnd", 3)?;
    Ok(REnd {
        entity: string(&args[0], "entity name")?,
        role: string(&args[1], "role name")?,
        cardinality: cardinality_of(&args[2])?,
    })
}

fn cardinality_of(term: &Term) -> Result<Cardinality, ParseError> {
    match term {
        Term::App(c, args, pos) if c == "Exactly" => match args.as_slice() {
            [n] => Ok(Cardinality::Exactly(unsigned(n)?)),
            _ => Err(error_at(
                *pos,
                "1 argument to `Exactly`",
                format!("{} argument(s)", args.len()),
            )),
        },
        Term::App(c, args, pos) if c == "Between" => match args.as_slice() {
            [min, max] => {
                let max = match max {
                    Term::App(i, a, _) if i == "Infinite" && a.is_empty() => MaxBound::Infinite,
                    other => MaxBound::Finite(unsigned(other)?),
                };
                Ok(Cardinality::Between(unsigned(min)?, max))
            }
            _ => Err(error_at(
                *pos,
                "2 arguments to `Between`",
                format!("{} argument(s)", args.len()),
            )),
        },
        other => Err(error_at(
            other.pos(),
            "`Exactly n` or `Between min max`",
            other.describe(),
        )),
    }
}
