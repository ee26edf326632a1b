//! Recursive-descent parser for Laurent polynomial expressions.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := factor ('*' factor)*
//! factor   := '-' factor | base ('^' exponent)?
//! base     := rational | var | '(' expr ')'
//! rational := int ('/' posint)?
//! exponent := '-'? int
//! ```
//!
//! `^` is non-associative and negative exponents are only accepted on a bare
//! variable. Errors carry the 0-based byte offset of the offending token.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::laurent::{format_rational, ExponentVector, LaurentPolynomial};

/// Largest exponent magnitude accepted on a parenthesized or repeated base.
pub const MAX_EXPONENT: i64 = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at offset {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        ParseError { offset, message: message.into() }
    }
}

/// Expression text together with the variable order that fixes coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprSource {
    pub text: String,
    pub variable_order: Vec<String>,
}

impl ExprSource {
    pub fn new(text: impl Into<String>, vars: &[&str]) -> Self {
        ExprSource {
            text: text.into(),
            variable_order: vars.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Uses the identifiers found in `text`, in natural order (`x2` before `x10`).
    pub fn inferred(text: impl Into<String>) -> Self {
        let text = text.into();
        let variable_order = infer_variables(&text);
        ExprSource { text, variable_order }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(n) => format!("integer {n}"),
        Tok::Ident(s) => format!("identifier '{s}'"),
        Tok::Plus => "'+'".into(),
        Tok::Minus => "'-'".into(),
        Tok::Star => "'*'".into(),
        Tok::Slash => "'/'".into(),
        Tok::Caret => "'^'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::End => "end of input".into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'.' || bytes[i].is_ascii_alphabetic()) {
                    return Err(ParseError::new(i, "malformed number"));
                }
                let n: BigInt = text[start..i].parse().expect("digits");
                out.push((Tok::Int(n), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::new(start, format!("unexpected character '{ch}'")));
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a [String],
}

/// Result of parsing a `base`: a bare variable is tracked separately so that
/// negative exponents can be allowed on it.
enum Base {
    Var(usize),
    Poly(LaurentPolynomial),
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn n(&self) -> usize {
        self.vars.len()
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::new(self.offset(), format!("expected {wanted}, found {}", describe(self.peek())))
    }

    fn expr(&mut self) -> Result<LaurentPolynomial, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<LaurentPolynomial, ParseError> {
        let mut acc = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let f = self.factor()?;
            acc = &acc * &f;
        }
        if *self.peek() == Tok::Slash {
            return Err(ParseError::new(
                self.offset(),
                "division is only allowed inside a rational literal",
            ));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<LaurentPolynomial, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(-&self.factor()?);
        }
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(self.base_poly(base));
        }
        self.bump();
        let exp_at = self.offset();
        let e = self.exponent()?;
        if *self.peek() == Tok::Caret {
            return Err(ParseError::new(self.offset(), "'^' is non-associative; add parentheses"));
        }
        match base {
            Base::Var(i) => {
                if e.unsigned_abs() > u64::from(u32::MAX) {
                    return Err(ParseError::new(exp_at, "exponent out of range"));
                }
                let mut m = ExponentVector::zeros(self.n());
                m.0[i] = e;
                Ok(LaurentPolynomial::monomial(m, BigRational::one()))
            }
            Base::Poly(p) => {
                if e < 0 {
                    return Err(ParseError::new(
                        exp_at,
                        "negative exponent is only allowed on a bare variable",
                    ));
                }
                if e > MAX_EXPONENT {
                    return Err(ParseError::new(exp_at, format!("exponent exceeds {MAX_EXPONENT}")));
                }
                Ok(pow_checked(&p, e as u32))
            }
        }
    }

    fn base_poly(&self, b: Base) -> LaurentPolynomial {
        match b {
            Base::Var(i) => LaurentPolynomial::var(self.n(), i),
            Base::Poly(p) => p,
        }
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let at = self.offset();
        match self.bump() {
            (Tok::Int(n), _) => {
                let v: i64 = i64::try_from(&n)
                    .map_err(|_| ParseError::new(at, "exponent out of range"))?;
                Ok(if neg { -v } else { v })
            }
            (t, off) => Err(ParseError::new(
                off,
                format!("exponent must be an integer, found {}", describe(&t)),
            )),
        }
    }

    fn base(&mut self) -> Result<Base, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Int(num) => {
                self.bump();
                let mut q = BigRational::from_integer(num);
                if *self.peek() == Tok::Slash {
                    self.bump();
                    let dat = self.offset();
                    match self.bump() {
                        (Tok::Int(d), _) if !d.is_zero() => {
                            q = BigRational::new(q.numer().clone(), d);
                        }
                        (Tok::Int(_), _) => {
                            return Err(ParseError::new(dat, "division by zero"));
                        }
                        _ => {
                            return Err(ParseError::new(
                                dat,
                                "division is only allowed inside a rational literal",
                            ));
                        }
                    }
                }
                Ok(Base::Poly(LaurentPolynomial::constant(self.n(), q)))
            }
            Tok::Ident(name) => {
                self.bump();
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Base::Var(i)),
                    None => Err(ParseError::new(at, format!("unknown variable '{name}'"))),
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected("')'"));
                }
                self.bump();
                Ok(Base::Poly(inner))
            }
            _ => Err(self.unexpected("a number, variable or '('")),
        }
    }
}

fn pow_checked(p: &LaurentPolynomial, e: u32) -> LaurentPolynomial {
    // Monomials are cheap to raise even for large exponents.
    if p.len() == 1 {
        let (m, c) = p.terms().next().expect("one term");
        let mut cc = BigRational::one();
        for _ in 0..e {
            cc *= c;
        }
        return LaurentPolynomial::monomial(m.scaled(i64::from(e)), cc);
    }
    p.pow(e)
}

/// Parses `src.text` over `src.variable_order`.
pub fn parse(src: &ExprSource) -> Result<LaurentPolynomial, ParseError> {
    for (i, v) in src.variable_order.iter().enumerate() {
        if !is_identifier(v) {
            return Err(ParseError::new(0, format!("invalid variable name '{v}'")));
        }
        if src.variable_order[..i].contains(v) {
            return Err(ParseError::new(0, format!("duplicate variable '{v}'")));
        }
    }
    let toks = tokenize(&src.text)?;
    let mut p = Parser { toks, pos: 0, vars: &src.variable_order };
    if *p.peek() == Tok::End {
        return Err(ParseError::new(0, "empty expression"));
    }
    let out = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(out)
}

/// Parses with an explicit variable list.
pub fn parse_with(text: &str, vars: &[&str]) -> Result<LaurentPolynomial, ParseError> {
    parse(&ExprSource::new(text, vars))
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Identifiers occurring in `text`, deduplicated and naturally sorted.
pub fn infer_variables(text: &str) -> Vec<String> {
    let mut names: Vec<String> = match tokenize(text) {
        Ok(t) => t
            .into_iter()
            .filter_map(|(t, _)| match t {
                Tok::Ident(s) => Some(s),
                _ => None,
            })
            .collect(),
        Err(_) => Vec::new(),
    };
    names.sort_by_key(|a| natural_key(a));
    names.dedup();
    names
}

fn natural_key(s: &str) -> (String, u128, String) {
    let prefix: String = s.trim_end_matches(|c: char| c.is_ascii_digit()).to_string();
    let digits = &s[prefix.len()..];
    let num = digits.parse::<u128>().unwrap_or(0);
    (prefix, num, s.to_string())
}

/// Default names `x1, …, xn`.
pub fn default_variables(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

/// Canonical text of `p` over `x1..xn`, terms in ascending lex order.
pub fn format(p: &LaurentPolynomial) -> String {
    format_with(p, &default_variables(p.nvars()))
}

/// Canonical text of `p` with the given variable names.
pub fn format_with(p: &LaurentPolynomial, names: &[String]) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (idx, (m, c)) in p.terms().enumerate() {
        let neg = c.is_negative();
        if idx == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let a = c.abs();
        let mono = format_monomial(m, names);
        match (mono.is_empty(), a.is_one()) {
            (true, _) => out.push_str(&format_rational(&a)),
            (false, true) => out.push_str(&mono),
            (false, false) => {
                let _ = write!(out, "{}*{}", format_rational(&a), mono);
            }
        }
    }
    out
}

fn format_monomial(m: &ExponentVector, names: &[String]) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.0.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(names[i].clone()),
            _ => parts.push(format!("{}^{}", names[i], e)),
        }
    }
    parts.join("*")
}
