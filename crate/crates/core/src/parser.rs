//! Concrete syntax for expressions and format strings.
//!
//! ```text
//! expr    := '#' '(' format ';' expr (',' expr)* ')'     einsum
//!          | '(' expr ('+' expr)* ')'                    elementwise aggregate
//!          | 'delta' '(' order ';' dims ')'              delta tensor
//!          | 'ones' '(' dims ')'                         all-ones tensor
//!          | 'fill' '(' literal ';' dims ')'             constant tensor
//!          | literal                                     scalar
//!          | name                                        named tensor
//! format  := string (',' string)* '->' string
//! string  := (letter | '{' digits '}')*
//! dims    := ε | digits (',' digits)*
//! literal := '-'? digits ('.' digits)? (('e'|'E') ('+'|'-')? digits)? | 'inf' | 'true' | 'false'
//! ```
//!
//! Whitespace is insignificant everywhere. `+` is syntax for the elementwise
//! aggregate of whichever semiring the expression is evaluated in.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{list_symbols, ParseError};
use crate::expr::{Einsum, Expr};
use crate::semiring::Literal;
use crate::symbol::{FormatString, IndexString, IndexSymbol};
use crate::tensor::Shape;

/// Byte range `start..end` into the parsed text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        SourceSpan { start, end }
    }

    /// Whether this span lies within a text of `len` bytes.
    pub fn within(&self, len: usize) -> bool {
        self.start <= self.end && self.end <= len
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// Source spans of every node, keyed by node path.
pub type SpanTable = BTreeMap<Vec<usize>, SourceSpan>;

const RESERVED: [&str; 6] = ["delta", "ones", "fill", "inf", "true", "false"];

/// Parses a standalone format string such as `ij,jk->ik` and checks that
/// every output symbol is bound by an input.
pub fn parse_format(text: &str) -> Result<FormatString, ParseError> {
    let mut p = Parser::new(text);
    let (format, out_span) = p.format()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error_here("unexpected trailing input after format string"));
    }
    let unbound = format.unbound_output_symbols();
    if !unbound.is_empty() {
        return Err(ParseError::Constraint {
            span: out_span,
            symbols: list_symbols(&unbound),
        });
    }
    Ok(format)
}

/// Parses a bare index string such as `ij{3}`.
pub fn parse_index_string(text: &str) -> Result<IndexString, ParseError> {
    let mut p = Parser::new(text);
    let index = p.index_string()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error_here("expected index symbols"));
    }
    Ok(index)
}

/// Parses an expression.
///
/// Only syntax and argument counts are checked; constraint III and axis
/// lengths are the validator's business.
pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    parse_expression_with_spans(text).map(|(e, _)| e)
}

/// Parses an expression and records the span of every node.
pub fn parse_expression_with_spans(text: &str) -> Result<(Expr, SpanTable), ParseError> {
    let mut p = Parser::new(text);
    let mut spans = SpanTable::new();
    let mut path = Vec::new();
    p.skip_ws();
    let expr = p.expr(&mut path, &mut spans)?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error_here("unexpected trailing input"));
    }
    Ok((expr, spans))
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { text, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let end = self.peek().map_or(self.pos, |c| self.pos + c.len_utf8());
        ParseError::syntax(SourceSpan::new(self.pos, end), message)
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(format!("expected `{c}`")))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn index_string(&mut self) -> Result<IndexString, ParseError> {
        let mut symbols = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(c) if c.is_ascii_alphabetic() => {
                    self.bump();
                    symbols.push(IndexSymbol::Letter(c));
                }
                Some('{') => {
                    let start = self.pos;
                    self.bump();
                    let digits_start = self.pos;
                    while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        self.bump();
                    }
                    let digits = &self.text[digits_start..self.pos];
                    if digits.is_empty() || self.peek() != Some('}') {
                        return Err(ParseError::syntax(
                            SourceSpan::new(start, self.pos),
                            "integer tag must be written `{n}`",
                        ));
                    }
                    self.bump();
                    let n = digits.parse::<u32>().map_err(|_| {
                        ParseError::syntax(
                            SourceSpan::new(start, self.pos),
                            "integer tag too large",
                        )
                    })?;
                    symbols.push(IndexSymbol::Tag(n));
                }
                _ => return Ok(IndexString(symbols)),
            }
        }
    }

    /// Returns the format and the span of its output string.
    fn format(&mut self) -> Result<(FormatString, SourceSpan), ParseError> {
        let mut inputs = vec![self.index_string()?];
        loop {
            self.skip_ws();
            if self.rest().starts_with("->") {
                self.pos += 2;
                break;
            }
            match self.peek() {
                Some(',') => {
                    self.bump();
                    inputs.push(self.index_string()?);
                }
                _ => return Err(self.error_here("expected `,` or `->` in format string")),
            }
        }
        self.skip_ws();
        let out_start = self.pos;
        let output = self.index_string()?;
        let out_span = SourceSpan::new(out_start, self.pos);
        Ok((FormatString { inputs, output }, out_span))
    }

    fn uint(&mut self) -> Result<usize, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        let span = SourceSpan::new(start, self.pos);
        if start == self.pos {
            return Err(self.error_here("expected a non-negative integer"));
        }
        self.text[start..self.pos]
            .parse()
            .map_err(|_| ParseError::syntax(span, "integer too large"))
    }

    /// Comma-separated positive axis lengths, possibly none, up to `)`.
    fn dims(&mut self) -> Result<Shape, ParseError> {
        let mut dims = Vec::new();
        self.skip_ws();
        if self.peek() == Some(')') {
            return Ok(Shape(dims));
        }
        loop {
            self.skip_ws();
            let start = self.pos;
            let d = self.uint()?;
            if d == 0 {
                return Err(ParseError::syntax(
                    SourceSpan::new(start, self.pos),
                    "axis lengths must be positive",
                ));
            }
            dims.push(d);
            if !self.eat(',') {
                return Ok(Shape(dims));
            }
        }
    }

    /// A number or one of `inf`, `true`, `false`.
    fn constant(&mut self) -> Result<Literal, ParseError> {
        self.skip_ws();
        if !self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            return self.literal();
        }
        let start = self.pos;
        match self.identifier() {
            "inf" => Ok(Literal::Infinity),
            "true" => Ok(Literal::Bool(true)),
            "false" => Ok(Literal::Bool(false)),
            other => Err(ParseError::syntax(
                SourceSpan::new(start, self.pos),
                format!("expected a constant, found `{other}`"),
            )),
        }
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some('-') {
            self.bump();
        }
        let int_start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        if int_start == self.pos {
            return Err(self.error_here("expected a number"));
        }
        let mut is_float = false;
        if self.peek() == Some('.') {
            is_float = true;
            self.bump();
            let frac_start = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
            }
            if frac_start == self.pos {
                return Err(self.error_here("expected digits after `.`"));
            }
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            is_float = true;
            self.bump();
            if matches!(self.peek(), Some('+' | '-')) {
                self.bump();
            }
            let exp_start = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
            }
            if exp_start == self.pos {
                return Err(self.error_here("expected exponent digits"));
            }
        }
        let span = SourceSpan::new(start, self.pos);
        let text = &self.text[start..self.pos];
        if is_float {
            text.parse::<f64>()
                .map(Literal::Float)
                .map_err(|_| ParseError::syntax(span, "malformed number"))
        } else {
            text.parse::<i64>()
                .map(Literal::Int)
                .map_err(|_| ParseError::syntax(span, "integer literal out of range"))
        }
    }

    fn identifier(&mut self) -> &'a str {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            self.bump();
        }
        &self.text[start..self.pos]
    }

    fn expr(&mut self, path: &mut Vec<usize>, spans: &mut SpanTable) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let expr = match self.peek() {
            Some('#') => {
                self.bump();
                self.expect('(')?;
                self.skip_ws();
                let (format, _) = self.format()?;
                self.expect(';')?;
                let mut args = Vec::new();
                loop {
                    path.push(args.len());
                    let arg = self.expr(path, spans);
                    path.pop();
                    args.push(arg?);
                    if !self.eat(',') {
                        break;
                    }
                }
                self.expect(')')?;
                if args.len() != format.arity() {
                    return Err(ParseError::ArityMismatch {
                        span: SourceSpan::new(start, self.pos),
                        strings: format.arity(),
                        args: args.len(),
                    });
                }
                Expr::Einsum(Einsum { format, args })
            }
            Some('(') => {
                self.bump();
                let mut terms = Vec::new();
                loop {
                    path.push(terms.len());
                    let term = self.expr(path, spans);
                    path.pop();
                    terms.push(term?);
                    if !self.eat('+') {
                        break;
                    }
                }
                self.expect(')')?;
                Expr::Aggregate(terms)
            }
            Some(c) if c.is_ascii_digit() || c == '-' => Expr::Scalar(self.literal()?),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let ident = self.identifier();
                match ident {
                    "inf" => Expr::Scalar(Literal::Infinity),
                    "true" => Expr::Scalar(Literal::Bool(true)),
                    "false" => Expr::Scalar(Literal::Bool(false)),
                    "delta" => {
                        self.expect('(')?;
                        let order_start = self.pos;
                        let order = self.uint()?;
                        self.expect(';')?;
                        let dims = self.dims()?;
                        self.expect(')')?;
                        if dims.order() != order {
                            return Err(ParseError::syntax(
                                SourceSpan::new(order_start, self.pos),
                                format!(
                                    "delta of order {order} needs {order} axis lengths, found {}",
                                    dims.order()
                                ),
                            ));
                        }
                        Expr::Delta { dims }
                    }
                    "ones" => {
                        self.expect('(')?;
                        let dims = self.dims()?;
                        self.expect(')')?;
                        Expr::Ones(dims)
                    }
                    "fill" => {
                        self.expect('(')?;
                        let value = self.constant()?;
                        self.expect(';')?;
                        let shape = self.dims()?;
                        self.expect(')')?;
                        Expr::Fill { value, shape }
                    }
                    name => Expr::Named(name.to_string()),
                }
            }
            Some(_) => return Err(self.error_here("expected an expression")),
            None => return Err(self.error_here("unexpected end of input, expected an expression")),
        };
        spans.insert(path.clone(), SourceSpan::new(start, self.pos));
        Ok(expr)
    }
}

/// Canonical single-line rendering; [`parse_expression`] inverts it.
pub fn render(expr: &Expr) -> String {
    let mut out = String::new();
    render_into(expr, &mut out);
    out
}

pub(crate) fn render_einsum(e: &Einsum) -> String {
    let mut out = String::new();
    render_einsum_into(e, &mut out);
    out
}

fn render_dims(shape: &Shape) -> String {
    shape
        .dims()
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn render_einsum_into(e: &Einsum, out: &mut String) {
    out.push_str("#(");
    out.push_str(&e.format.to_string());
    out.push_str("; ");
    for (k, arg) in e.args.iter().enumerate() {
        if k > 0 {
            out.push_str(", ");
        }
        render_into(arg, out);
    }
    out.push(')');
}

fn render_into(expr: &Expr, out: &mut String) {
    match expr {
        Expr::Named(n) => out.push_str(n),
        Expr::Delta { dims } => {
            out.push_str(&format!("delta({}; {})", dims.order(), render_dims(dims)));
        }
        Expr::Ones(shape) => out.push_str(&format!("ones({})", render_dims(shape))),
        Expr::Scalar(lit) => out.push_str(&lit.to_string()),
        Expr::Fill { value, shape } => {
            out.push_str(&format!("fill({value}; {})", render_dims(shape)));
        }
        Expr::Einsum(e) => render_einsum_into(e, out),
        Expr::Aggregate(terms) => {
            out.push('(');
            for (k, t) in terms.iter().enumerate() {
                if k > 0 {
                    out.push_str(" + ");
                }
                render_into(t, out);
            }
            out.push(')');
        }
    }
}

/// Whether `name` can be used for a named tensor in expression text.
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.contains(&name)
}
