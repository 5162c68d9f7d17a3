//! Problem files.
//!
//! ```text
//! d=2
//! minpoly: x^2 - 2
//! alpha: [1, theta]
//! form: elliptic
//! H: 1/2*(p1^2+q1^2) + theta/2*(p2^2+q2^2) + 1/10*q1^2*q2
//! ```
//!
//! Header keys may use `=` or `:`. Blank lines and lines starting with `#`
//! are skipped. Everything after `H:` up to the end of the file is the
//! Hamiltonian, so it may span several lines.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use hnf::normalform::{quadratic_part, NormalFormProblem};
use hnf::scalar::{AlphaContext, BaseField, BaseNumber, SmallDenomScalar};
use hnf::series::GradedSeries;
use hnf::tori::{elliptic_quadratic, EllipticProblem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InputError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("quadratic part does not match alpha: expected {expected}, found {found}")]
    QuadraticMismatch { expected: String, found: String },
    #[error("invalid problem: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    Elliptic,
    Hyperbolic,
}

impl Form {
    pub fn name(self) -> &'static str {
        match self {
            Form::Elliptic => "elliptic",
            Form::Hyperbolic => "hyperbolic",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Problem {
    Hyperbolic(NormalFormProblem),
    Elliptic(EllipticProblem),
}

impl Problem {
    pub fn form(&self) -> Form {
        match self {
            Problem::Hyperbolic(_) => Form::Hyperbolic,
            Problem::Elliptic(_) => Form::Elliptic,
        }
    }

    pub fn ctx(&self) -> &Arc<AlphaContext> {
        match self {
            Problem::Hyperbolic(p) => p.ctx(),
            Problem::Elliptic(p) => p.ctx(),
        }
    }

    pub fn hamiltonian(&self) -> &GradedSeries {
        match self {
            Problem::Hyperbolic(p) => p.hamiltonian(),
            Problem::Elliptic(p) => p.hamiltonian(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
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
    End,
}

#[derive(Clone, Debug)]
enum Expr {
    Num(BigInt),
    Ident(String, usize),
    Neg(Box<Expr>),
    Bin(char, Box<Expr>, Box<Expr>, usize),
    Pow(Box<Expr>, u32),
}

/// Byte offsets into the whole file are mapped back to 1-based line and column.
struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn error(&self, offset: usize, message: impl Into<String>) -> ParseError {
        let before = &self.text[..offset.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ParseError { line, column, message: message.into() }
    }

    fn lex(&self, start: usize, end: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
        let s = &self.text[start..end];
        let mut out = Vec::new();
        let mut it = s.char_indices().peekable();
        while let Some(&(i, ch)) = it.peek() {
            let at = start + i;
            if ch.is_whitespace() {
                it.next();
                continue;
            }
            if ch.is_ascii_digit() {
                let mut j = i;
                while let Some(&(k, c)) = it.peek() {
                    if !c.is_ascii_digit() {
                        break;
                    }
                    j = k + c.len_utf8();
                    it.next();
                }
                out.push((Tok::Num(s[i..j].parse().expect("digits")), at));
                continue;
            }
            if ch.is_ascii_alphabetic() {
                let mut j = i;
                while let Some(&(k, c)) = it.peek() {
                    if !(c.is_ascii_alphanumeric() || c == '_') {
                        break;
                    }
                    j = k + c.len_utf8();
                    it.next();
                }
                out.push((Tok::Ident(s[i..j].to_string()), at));
                continue;
            }
            let tok = match ch {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                other => return Err(self.error(at, format!("unexpected character {other:?}"))),
            };
            out.push((tok, at));
            it.next();
        }
        out.push((Tok::End, start + s.trim_end().len()));
        Ok(out)
    }
}

struct Parser<'a, 'b> {
    src: &'b Source<'a>,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser<'_, '_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn at(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.src.error(self.at(), format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => '+',
                Tok::Minus => '-',
                _ => return Ok(lhs),
            };
            let (_, at) = self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), at);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => '*',
                Tok::Slash => '/',
                _ => return Ok(lhs),
            };
            let (_, at) = self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), at);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.at();
        match self.bump() {
            (Tok::Num(n), _) => {
                let e = n.to_u32().filter(|e| *e <= 64).ok_or_else(|| self.src.error(at, "exponent too large"))?;
                Ok(Expr::Pow(Box::new(base), e))
            }
            _ => Err(self.src.error(at, "expected a nonnegative integer exponent")),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.at();
        match self.bump() {
            (Tok::Num(n), _) => Ok(Expr::Num(n)),
            (Tok::Ident(s), at) => Ok(Expr::Ident(s, at)),
            (Tok::LParen, _) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            (Tok::End, _) => Err(self.src.error(at, "unexpected end of expression")),
            (t, _) => Err(self.src.error(at, format!("unexpected token {t:?}"))),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::End => Ok(()),
            t => Err(self.src.error(self.at(), format!("unexpected trailing token {t:?}"))),
        }
    }
}

/// Interpretation of parsed expressions in a target ring.
trait Eval {
    type V: Clone;
    fn number(&self, n: &BigInt) -> Self::V;
    fn ident(&self, name: &str) -> Result<Self::V, String>;
    fn add(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn sub(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn mul(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn div(&self, a: &Self::V, b: &Self::V) -> Result<Self::V, String>;
    fn neg(&self, a: &Self::V) -> Self::V;
    fn pow(&self, a: &Self::V, e: u32) -> Self::V;
}

fn eval<E: Eval>(e: &E, src: &Source<'_>, x: &Expr) -> Result<E::V, ParseError> {
    Ok(match x {
        Expr::Num(n) => e.number(n),
        Expr::Ident(s, at) => e.ident(s).map_err(|m| src.error(*at, m))?,
        Expr::Neg(a) => e.neg(&eval(e, src, a)?),
        Expr::Pow(a, k) => e.pow(&eval(e, src, a)?, *k),
        Expr::Bin(op, a, b, at) => {
            let (a, b) = (eval(e, src, a)?, eval(e, src, b)?);
            match op {
                '+' => e.add(&a, &b),
                '-' => e.sub(&a, &b),
                '*' => e.mul(&a, &b),
                _ => e.div(&a, &b).map_err(|m| src.error(*at, m))?,
            }
        }
    })
}

/// Weighted degree of an expression, with q and p of weight 1.
fn degree(x: &Expr) -> u32 {
    match x {
        Expr::Num(_) => 0,
        Expr::Ident(s, _) => u32::from(s.starts_with('q') || s.starts_with('p')),
        Expr::Neg(a) => degree(a),
        Expr::Pow(a, k) => degree(a) * k,
        Expr::Bin('*', a, b, _) => degree(a) + degree(b),
        Expr::Bin('/', a, _, _) => degree(a),
        Expr::Bin(_, a, b, _) => degree(a).max(degree(b)),
    }
}

/// Univariate rational polynomials in `x`, for the minimal polynomial.
struct UniPoly;

impl Eval for UniPoly {
    type V = Vec<BigRational>;
    fn number(&self, n: &BigInt) -> Self::V {
        vec![BigRational::from_integer(n.clone())]
    }
    fn ident(&self, name: &str) -> Result<Self::V, String> {
        match name {
            "x" => Ok(vec![BigRational::zero(), BigRational::one()]),
            other => Err(format!("unknown symbol {other:?} in minimal polynomial")),
        }
    }
    fn add(&self, a: &Self::V, b: &Self::V) -> Self::V {
        let n = a.len().max(b.len());
        (0..n)
            .map(|k| a.get(k).cloned().unwrap_or_default() + b.get(k).cloned().unwrap_or_default())
            .collect()
    }
    fn sub(&self, a: &Self::V, b: &Self::V) -> Self::V {
        self.add(a, &self.neg(b))
    }
    fn mul(&self, a: &Self::V, b: &Self::V) -> Self::V {
        let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }
    fn div(&self, a: &Self::V, b: &Self::V) -> Result<Self::V, String> {
        if b.iter().skip(1).any(|c| !c.is_zero()) || b[0].is_zero() {
            return Err("can only divide by a nonzero number".into());
        }
        Ok(a.iter().map(|c| c / &b[0]).collect())
    }
    fn neg(&self, a: &Self::V) -> Self::V {
        a.iter().map(|c| -c).collect()
    }
    fn pow(&self, a: &Self::V, e: u32) -> Self::V {
        (0..e).fold(vec![BigRational::one()], |acc, _| self.mul(&acc, a))
    }
}

/// Constants of the base field.
struct Constants {
    field: Arc<BaseField>,
    has_theta: bool,
}

impl Eval for Constants {
    type V = BaseNumber;
    fn number(&self, n: &BigInt) -> Self::V {
        BaseNumber::from_rational(&self.field, BigRational::from_integer(n.clone()))
    }
    fn ident(&self, name: &str) -> Result<Self::V, String> {
        match name {
            "theta" if self.has_theta => Ok(BaseNumber::theta(&self.field)),
            "theta" => Err("theta needs a minpoly header".into()),
            "i" => Ok(BaseNumber::imag_unit(&self.field)),
            other => Err(format!("unknown constant {other:?}")),
        }
    }
    fn add(&self, a: &Self::V, b: &Self::V) -> Self::V {
        a + b
    }
    fn sub(&self, a: &Self::V, b: &Self::V) -> Self::V {
        a - b
    }
    fn mul(&self, a: &Self::V, b: &Self::V) -> Self::V {
        a * b
    }
    fn div(&self, a: &Self::V, b: &Self::V) -> Result<Self::V, String> {
        b.inv().map(|inv| a * &inv).ok_or_else(|| "division by zero".into())
    }
    fn neg(&self, a: &Self::V) -> Self::V {
        -a
    }
    fn pow(&self, a: &Self::V, e: u32) -> Self::V {
        a.pow(e)
    }
}

/// Polynomials in q, p over the base field, truncated at the cutoff.
struct Series<'a> {
    ctx: &'a Arc<AlphaContext>,
    cutoff: u32,
    constants: Constants,
}

impl Series<'_> {
    fn constant(&self, c: BaseNumber) -> GradedSeries {
        GradedSeries::constant(self.ctx, self.cutoff, SmallDenomScalar::constant(self.ctx.dim(), c))
    }
}

impl Eval for Series<'_> {
    type V = GradedSeries;
    fn number(&self, n: &BigInt) -> Self::V {
        self.constant(self.constants.number(n))
    }
    fn ident(&self, name: &str) -> Result<Self::V, String> {
        let d = self.ctx.dim();
        let var = |prefix: &str| {
            name.strip_prefix(prefix)
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|k| (1..=d).contains(k))
                .map(|k| k - 1)
        };
        if let Some(k) = var("q") {
            return Ok(GradedSeries::q(self.ctx, self.cutoff, k));
        }
        if let Some(k) = var("p") {
            return Ok(GradedSeries::p(self.ctx, self.cutoff, k));
        }
        if name.starts_with('q') || name.starts_with('p') {
            return Err(format!("unknown variable {name:?}; expected q1..q{d}, p1..p{d}"));
        }
        self.constants.ident(name).map(|c| self.constant(c))
    }
    fn add(&self, a: &Self::V, b: &Self::V) -> Self::V {
        a.add(b)
    }
    fn sub(&self, a: &Self::V, b: &Self::V) -> Self::V {
        a.sub(b)
    }
    fn mul(&self, a: &Self::V, b: &Self::V) -> Self::V {
        a.mul(b)
    }
    fn div(&self, a: &Self::V, b: &Self::V) -> Result<Self::V, String> {
        let mut terms = b.terms();
        let c = match (terms.next(), terms.next()) {
            (Some((m, c)), None) if m.weight() == 0 => c.as_constant().cloned(),
            _ => None,
        };
        let inv = c.and_then(|c| c.inv()).ok_or("can only divide by a nonzero constant")?;
        Ok(a.scale_base(&inv))
    }
    fn neg(&self, a: &Self::V) -> Self::V {
        a.neg()
    }
    fn pow(&self, a: &Self::V, e: u32) -> Self::V {
        a.pow(e)
    }
}

struct Header {
    key: String,
    value_start: usize,
    value_end: usize,
    line_start: usize,
}

fn split_headers(text: &str) -> Result<Vec<Header>, ParseError> {
    let src = Source { text };
    let mut out: Vec<Header> = Vec::new();
    let mut offset = 0;
    for raw in text.split_inclusive('\n') {
        let start = offset;
        offset += raw.len();
        let line = raw.trim_end_matches(['\n', '\r']);
        let body = line.trim_start();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let indent = line.len() - body.len();
        let Some(sep) = body.find([':', '=']) else {
            return Err(src.error(start + indent, "expected `key: value`"));
        };
        let key = body[..sep].trim().to_string();
        if !["d", "minpoly", "alpha", "form", "H"].contains(&key.as_str()) {
            return Err(src.error(start + indent, format!("unknown key {key:?}")));
        }
        if out.iter().any(|h| h.key == key) {
            return Err(src.error(start + indent, format!("duplicate key {key:?}")));
        }
        let value_start = start + indent + sep + 1;
        if key == "H" {
            out.push(Header { key, value_start, value_end: text.len(), line_start: start });
            return Ok(out);
        }
        out.push(Header { key, value_start, value_end: start + line.len(), line_start: start });
    }
    Ok(out)
}

fn parse_expr(src: &Source<'_>, start: usize, end: usize) -> Result<Expr, ParseError> {
    let mut p = Parser { src, toks: src.lex(start, end)?, pos: 0 };
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

fn parse_list(src: &Source<'_>, start: usize, end: usize) -> Result<Vec<Expr>, ParseError> {
    let mut p = Parser { src, toks: src.lex(start, end)?, pos: 0 };
    p.expect(Tok::LBracket, "'['")?;
    let mut items = vec![p.expr()?];
    while *p.peek() == Tok::Comma {
        p.bump();
        items.push(p.expr()?);
    }
    p.expect(Tok::RBracket, "']'")?;
    p.finish()?;
    Ok(items)
}

fn field_from_minpoly(src: &Source<'_>, h: &Header) -> Result<Arc<BaseField>, InputError> {
    let e = parse_expr(src, h.value_start, h.value_end)?;
    let poly = eval(&UniPoly, src, &e)?;
    let mut poly: Vec<BigRational> = poly;
    while poly.len() > 1 && poly.last().is_some_and(Zero::is_zero) {
        poly.pop();
    }
    if poly.len() > 3 || poly.len() < 2 {
        return Err(src.error(h.value_start, "minimal polynomial must have degree 1 or 2").into());
    }
    let lcm = poly.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let mut coeffs = [BigInt::zero(), BigInt::zero(), BigInt::zero()];
    for (k, c) in poly.iter().enumerate() {
        coeffs[k] = (c * BigRational::from_integer(lcm.clone())).to_integer();
    }
    BaseField::from_minpoly(coeffs).map_err(|e| InputError::Parse(src.error(h.value_start, e.to_string())))
}

/// Parse a problem file. Without `cutoff` the weighted degree of `H` is used.
pub fn parse_input(text: &str, cutoff: Option<u32>) -> Result<Problem, InputError> {
    let src = Source { text };
    let headers = split_headers(text)?;
    let get = |k: &str| headers.iter().find(|h| h.key == k);
    let missing = |k: &str| src.error(text.len(), format!("missing `{k}` line"));

    let dh = get("d").ok_or_else(|| missing("d"))?;
    let dtext = text[dh.value_start..dh.value_end].trim();
    let d: usize = dtext
        .parse()
        .ok()
        .filter(|d| (1..=6).contains(d))
        .ok_or_else(|| src.error(dh.value_start, format!("d must be an integer in 1..=6, got {dtext:?}")))?;

    let (field, has_theta) = match get("minpoly") {
        Some(h) => (field_from_minpoly(&src, h)?, true),
        None => (BaseField::rational(), false),
    };
    let constants = Constants { field: field.clone(), has_theta };

    let ah = get("alpha").ok_or_else(|| missing("alpha"))?;
    let alpha = parse_list(&src, ah.value_start, ah.value_end)?
        .iter()
        .map(|e| eval(&constants, &src, e))
        .collect::<Result<Vec<_>, _>>()?;
    if alpha.len() != d {
        return Err(src.error(ah.value_start, format!("alpha has {} entries, d = {d}", alpha.len())).into());
    }

    let fh = get("form").ok_or_else(|| missing("form"))?;
    let form = match text[fh.value_start..fh.value_end].trim() {
        "elliptic" => Form::Elliptic,
        "hyperbolic" => Form::Hyperbolic,
        other => return Err(src.error(fh.value_start, format!("form must be elliptic or hyperbolic, got {other:?}")).into()),
    };

    let hh = get("H").ok_or_else(|| missing("H"))?;
    let first_key = headers.iter().map(|h| h.line_start).max().unwrap_or(0);
    debug_assert_eq!(first_key, hh.line_start);
    let expr = parse_expr(&src, hh.value_start, hh.value_end)?;
    let cutoff = cutoff.unwrap_or_else(|| degree(&expr).max(2));
    let ctx = AlphaContext::new(field, alpha);
    let h = eval(&Series { ctx: &ctx, cutoff, constants }, &src, &expr)?;

    let expect = match form {
        Form::Elliptic => elliptic_quadratic(&ctx, cutoff),
        Form::Hyperbolic => quadratic_part(&ctx, cutoff),
    };
    let low = h.truncate(0, Some(3));
    if low != expect {
        return Err(InputError::QuadraticMismatch { expected: expect.to_canonical(), found: low.to_canonical() });
    }
    match form {
        Form::Elliptic => EllipticProblem::new(h).map(Problem::Elliptic).map_err(|e| InputError::Invalid(e.to_string())),
        Form::Hyperbolic => {
            NormalFormProblem::new(h).map(Problem::Hyperbolic).map_err(|e| InputError::Invalid(e.to_string()))
        }
    }
}

fn minpoly_text(c: &[BigInt; 3]) -> String {
    let mut out = String::new();
    for (k, name) in [(2usize, "x^2"), (1, "x"), (0, "")] {
        let v = &c[k];
        if v.is_zero() {
            continue;
        }
        let mag = v.abs();
        let body = match (mag.is_one(), name.is_empty()) {
            (_, true) => mag.to_string(),
            (true, false) => name.to_string(),
            (false, false) => format!("{mag}*{name}"),
        };
        if out.is_empty() {
            out = if v.is_negative() { format!("-{body}") } else { body };
        } else {
            out.push_str(if v.is_negative() { " - " } else { " + " });
            out.push_str(&body);
        }
    }
    out
}

/// Canonical text of a problem; `parse_input(print_problem(p))` gives `p` back.
pub fn print_problem(p: &Problem) -> String {
    let ctx = p.ctx();
    let mut out = format!("d={}\n", ctx.dim());
    let field = ctx.field();
    if field.is_quadratic() || field.minpoly() != BaseField::rational().minpoly() {
        out.push_str(&format!("minpoly: {}\n", minpoly_text(field.minpoly())));
    }
    let alpha: Vec<String> = ctx.alpha().iter().map(BaseNumber::to_canonical).collect();
    out.push_str(&format!("alpha: [{}]\n", alpha.join(", ")));
    out.push_str(&format!("form: {}\n", p.form().name()));
    out.push_str(&format!("H: {}\n", p.hamiltonian().to_canonical()));
    out
}
