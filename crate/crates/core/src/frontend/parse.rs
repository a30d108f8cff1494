//! The `.bnd` text format.
//!
//! One bend per line, disjuncts separated by `|`, `#` starts a comment and an
//! optional `vars a b c` line fixes the variable order. A disjunct is
//! `TERM (+|- TERM)* OP CONST` where a term is an optional rational
//! coefficient followed by a variable, `OP` is one of `<= < >= >` and `CONST`
//! is a rational, `inf` or `-inf`.

use crate::bend::{normalize_bend, Bend, RawLiteral, Rel, VarId};
use crate::error::{Error, SourceLocation};
use crate::formula::BijunctiveFormula;
use crate::num::{ExtendedRational, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Number(Rational),
    Ident(String),
    Plus,
    Minus,
    Op(Rel),
    Equals,
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { text, pos: 0 }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    /// Next token with its byte offset, or `None` at the end.
    fn next(&mut self) -> Result<Option<(usize, Token)>, (usize, String)> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.text[start..];
        let Some(c) = rest.chars().next() else {
            return Ok(None);
        };
        let two = rest.get(..2);
        let tok = if two == Some("<=") {
            self.pos += 2;
            Token::Op(Rel::Le)
        } else if two == Some(">=") {
            self.pos += 2;
            Token::Op(Rel::Ge)
        } else if two == Some("==") {
            self.pos += 2;
            Token::Equals
        } else {
            match c {
                '<' => {
                    self.pos += 1;
                    Token::Op(Rel::Lt)
                }
                '>' => {
                    self.pos += 1;
                    Token::Op(Rel::Gt)
                }
                '=' => {
                    self.pos += 1;
                    Token::Equals
                }
                '+' => {
                    self.pos += 1;
                    Token::Plus
                }
                '-' => {
                    self.pos += 1;
                    Token::Minus
                }
                '*' => {
                    // Optional multiplication sign between coefficient and variable.
                    self.pos += 1;
                    return self.next();
                }
                c if c.is_ascii_digit() => {
                    let len = rest
                        .find(|ch: char| !(ch.is_ascii_digit() || ch == '/'))
                        .unwrap_or(rest.len());
                    self.pos += len;
                    let lit = &rest[..len];
                    let q: Rational = lit.parse().map_err(|_| (start, format!("malformed number '{lit}'")))?;
                    Token::Number(q)
                }
                c if c.is_alphabetic() || c == '_' => {
                    let len = rest
                        .find(|ch: char| !(ch.is_alphanumeric() || ch == '_' || ch == '\''))
                        .unwrap_or(rest.len());
                    self.pos += len;
                    Token::Ident(rest[..len].to_string())
                }
                c => return Err((start, format!("unexpected character '{c}'"))),
            }
        };
        Ok(Some((start, tok)))
    }

    fn tokens(mut self) -> Result<Vec<(usize, Token)>, (usize, String)> {
        let mut out = Vec::new();
        while let Some(t) = self.next()? {
            out.push(t);
        }
        Ok(out)
    }
}

/// Parses one disjunct; errors carry byte offsets into `text`.
fn parse_disjunct(
    text: &str,
    intern: &mut dyn FnMut(&str) -> VarId,
) -> Result<RawLiteral, (usize, String)> {
    let tokens = Lexer::new(text).tokens()?;
    let end = text.len();
    let mut i = 0;
    let mut terms: Vec<(VarId, Rational)> = Vec::new();
    let at = |i: usize| tokens.get(i).map_or(end, |t| t.0);

    loop {
        let mut sign = Rational::one();
        // A sign is required between terms and optional before the first.
        let mut signed = false;
        while let Some((_, t @ (Token::Plus | Token::Minus))) = tokens.get(i) {
            if *t == Token::Minus {
                sign = -sign;
            }
            signed = true;
            i += 1;
        }
        if !terms.is_empty() && !signed {
            return Err((at(i), "expected '+', '-' or a comparison".into()));
        }
        let mut coeff = Rational::one();
        if let Some((_, Token::Number(q))) = tokens.get(i) {
            coeff = q.clone();
            i += 1;
        }
        match tokens.get(i) {
            Some((_, Token::Ident(name))) if name == "inf" => {
                return Err((at(i), "'inf' is only allowed as a constant".into()));
            }
            Some((_, Token::Ident(name))) => {
                terms.push((intern(name), &sign * &coeff));
                i += 1;
            }
            Some((p, Token::Op(_))) if terms.is_empty() => return Err((*p, "expected a variable before the comparison".into())),
            _ => return Err((at(i), "expected a variable".into())),
        }
        match tokens.get(i) {
            Some((_, Token::Plus | Token::Minus)) => continue,
            Some((_, Token::Op(_))) => break,
            Some((p, Token::Equals)) => {
                return Err((
                    *p,
                    "equality is not a bend; write it as two lines 'lhs <= c' and 'lhs >= c'".into(),
                ))
            }
            Some((p, _)) => return Err((*p, "expected '+', '-' or a comparison".into())),
            None => return Err((end, "missing comparison".into())),
        }
    }
    let Some((_, Token::Op(rel))) = tokens.get(i).cloned() else {
        unreachable!("loop exits on a comparison")
    };
    i += 1;
    let mut negative = false;
    while let Some((_, t @ (Token::Plus | Token::Minus))) = tokens.get(i) {
        negative ^= *t == Token::Minus;
        i += 1;
    }
    let constant = match tokens.get(i) {
        Some((_, Token::Number(q))) => ExtendedRational::Finite(if negative { -q } else { q.clone() }),
        Some((_, Token::Ident(name))) if name == "inf" => {
            if negative {
                ExtendedRational::NegInf
            } else {
                ExtendedRational::PosInf
            }
        }
        _ => return Err((at(i), "expected a constant".into())),
    };
    i += 1;
    if let Some((p, _)) = tokens.get(i) {
        return Err((*p, "unexpected text after the constant".into()));
    }
    Ok(RawLiteral::new(terms, rel, constant))
}

/// Splits a line into disjunct texts with their byte offsets.
fn disjuncts(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in line.char_indices() {
        if c == '|' {
            out.push((start, &line[start..i]));
            start = i + 1;
        }
    }
    out.push((start, &line[start..]));
    out
}

fn column(line: &str, byte: usize) -> usize {
    line[..byte.min(line.len())].chars().count() + 1
}

/// Why a line failed, at a 1-based column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub column: usize,
    pub message: String,
    /// Well-formed literals that do not make up a bend.
    pub not_a_bend: bool,
}

/// Parses one bend, interning variables through `intern`.
pub fn parse_bend_line(line: &str, intern: &mut dyn FnMut(&str) -> VarId) -> Result<Bend, LineError> {
    let syntax = |column: usize, message: String| LineError {
        column,
        message,
        not_a_bend: false,
    };
    let mut raws = Vec::new();
    let mut starts = Vec::new();
    for (off, text) in disjuncts(line) {
        let lead = text.len() - text.trim_start().len();
        starts.push(off + lead);
        if text.trim().is_empty() {
            return Err(syntax(column(line, off + lead), "empty disjunct".into()));
        }
        let raw = parse_disjunct(text, intern).map_err(|(p, m)| syntax(column(line, off + p), m))?;
        raws.push(raw);
    }
    normalize_bend(&raws).map_err(|e| match e {
        Error::RejectedNotABend { literal, reason } => LineError {
            column: column(line, starts[literal]),
            message: reason,
            not_a_bend: true,
        },
        other => syntax(1, other.to_string()),
    })
}

/// Parses a whole file. `file` only labels diagnostics.
pub fn parse_named(text: &str, file: &str) -> Result<BijunctiveFormula, Error> {
    let mut phi = BijunctiveFormula::new();
    let loc = |line: usize, column: usize| SourceLocation {
        file: file.to_string(),
        line,
        column,
    };
    for (n, raw_line) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw_line.split('#').next().unwrap_or("");
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed == "vars" || trimmed.starts_with("vars ") || trimmed.starts_with("vars\t") {
            let lead = line.len() - line.trim_start().len();
            let mut offset = lead + 4;
            for name in trimmed[4..].split_whitespace() {
                let pos = offset + line[offset..].find(name).unwrap_or(0);
                offset = pos + name.len();
                let valid = name.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
                    && name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
                    && name != "inf"
                    && name != "vars";
                if !valid {
                    return Err(Error::Parse {
                        location: loc(line_no, column(line, pos)),
                        message: format!("invalid variable name '{name}'"),
                    });
                }
                phi.var(name);
            }
            continue;
        }
        let bend = {
            let mut intern = |name: &str| phi.var(name);
            parse_bend_line(line, &mut intern)
        };
        match bend {
            Ok(b) => {
                phi.push(b).expect("variables were interned");
            }
            Err(e) => {
                let location = loc(line_no, e.column);
                return Err(if e.not_a_bend {
                    Error::NotABendAt {
                        location,
                        reason: e.message,
                    }
                } else {
                    Error::Parse {
                        location,
                        message: e.message,
                    }
                });
            }
        }
    }
    Ok(phi)
}

pub fn parse(text: &str) -> Result<BijunctiveFormula, Error> {
    parse_named(text, "<input>")
}
