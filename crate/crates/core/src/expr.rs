//! The small expression language used for metric coefficients and the twist
//! function.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' '-'? integer)*
//! atom    := number | ident | ident '(' sum ')' | '(' sum ')'
//! ```
//!
//! Variables are `x1..xN` and, where allowed, `y1..yN` (1-based). Function
//! names are `sqrt`, `exp`, `ln`, `sin`, `cos`.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::jet::JetError;
use crate::scalar::{Scalar, UnaryFn};

/// Byte range into the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    fn join(self, other: SourceSpan) -> SourceSpan {
        SourceSpan::new(self.start.min(other.start), self.end.max(other.end))
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at {span}: {message}")]
    Syntax { message: String, span: SourceSpan },
    #[error("unknown variable `{name}` at {span}")]
    UnknownVariable { name: String, span: SourceSpan },
    #[error("unknown function `{name}` at {span}")]
    UnknownFunction { name: String, span: SourceSpan },
    #[error("exponent at {span} must be an integer literal")]
    NonIntegerExponent { span: SourceSpan },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{source} at {span}")]
pub struct EvalError {
    pub source: JetError,
    pub span: SourceSpan,
}

/// Which variable names an expression may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AllowedVars {
    pub x: usize,
    pub y: usize,
}

impl AllowedVars {
    /// Base variables only (`x1..xn`).
    pub fn base(n: usize) -> Self {
        Self { x: n, y: 0 }
    }

    /// Base and fiber variables (`x1..xn`, `y1..yn`).
    pub fn tangent(n: usize) -> Self {
        Self { x: n, y: n }
    }
}

/// Variable reference, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X(usize),
    Y(usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::Y(i) => write!(f, "y{}", i + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone)]
pub enum Node {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Call(UnaryFn, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

/// Parsed expression. Equality is structural and ignores spans.
#[derive(Debug, Clone)]
pub struct Expr {
    pub node: Node,
    pub span: SourceSpan,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (&self.node, &other.node) {
            (Node::Const(a), Node::Const(b)) => a.to_bits() == b.to_bits(),
            (Node::Var(a), Node::Var(b)) => a == b,
            (Node::Neg(a), Node::Neg(b)) => a == b,
            (Node::Call(f, a), Node::Call(g, b)) => f == g && a == b,
            (Node::Binary(o, a1, a2), Node::Binary(p, b1, b2)) => o == p && a1 == b1 && a2 == b2,
            (Node::Pow(a, n), Node::Pow(b, m)) => n == m && a == b,
            _ => false,
        }
    }
}

impl Expr {
    fn new(node: Node, span: SourceSpan) -> Self {
        Self { node, span }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(Node::Const(c), SourceSpan::default())
    }

    pub fn parse(text: &str, allowed: AllowedVars) -> Result<Self, ParseError> {
        parse(text, allowed)
    }

    /// Calls `visit` on every variable occurrence.
    pub fn for_each_var(&self, visit: &mut impl FnMut(Var)) {
        match &self.node {
            Node::Const(_) => {}
            Node::Var(v) => visit(*v),
            Node::Neg(a) | Node::Call(_, a) | Node::Pow(a, _) => a.for_each_var(visit),
            Node::Binary(_, a, b) => {
                a.for_each_var(visit);
                b.for_each_var(visit);
            }
        }
    }

    pub fn mentions(&self, pred: impl Fn(Var) -> bool) -> bool {
        let mut found = false;
        self.for_each_var(&mut |v| found |= pred(v));
        found
    }

    /// Evaluates over any scalar algebra. `template` fixes the algebra for
    /// constants (for jets: the jet space); its value is ignored.
    pub fn eval<S: Scalar>(&self, template: &S, xs: &[S], ys: &[S]) -> Result<S, EvalError> {
        let err = |source| EvalError {
            source,
            span: self.span,
        };
        let out = match &self.node {
            Node::Const(c) => template.lift_constant(*c),
            Node::Var(Var::X(i)) => xs
                .get(*i)
                .cloned()
                .ok_or_else(|| err(JetError::VariableOutOfRange { index: *i, arity: xs.len() }))?,
            Node::Var(Var::Y(i)) => ys
                .get(*i)
                .cloned()
                .ok_or_else(|| err(JetError::VariableOutOfRange { index: *i, arity: ys.len() }))?,
            Node::Neg(a) => a.eval(template, xs, ys)?.neg(),
            Node::Call(f, a) => a.eval(template, xs, ys)?.apply(*f).map_err(err)?,
            Node::Pow(a, n) => a.eval(template, xs, ys)?.powi(*n).map_err(err)?,
            Node::Binary(op, a, b) => {
                let l = a.eval(template, xs, ys)?;
                let r = b.eval(template, xs, ys)?;
                match op {
                    BinOp::Add => l.add(&r),
                    BinOp::Sub => l.sub(&r),
                    BinOp::Mul => l.mul(&r),
                    BinOp::Div => l.div(&r).map_err(err)?,
                }
            }
        };
        if !out.is_finite() {
            return Err(err(JetError::NonFinite("expression")));
        }
        Ok(out)
    }

    /// Real-valued evaluation.
    pub fn eval_real(&self, xs: &[f64], ys: &[f64]) -> Result<f64, EvalError> {
        self.eval(&0.0, xs, ys)
    }
}

/// Prints a form that reparses to a structurally identical tree: every
/// compound node is parenthesised.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Node::Const(c) => write!(f, "{c:?}"),
            Node::Var(v) => write!(f, "{v}"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
            Node::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Node::Pow(a, n) => write!(f, "({a}^{n})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let span = SourceSpan::new(start, i);
                let value: f64 = text[start..i].parse().map_err(|_| ParseError::Syntax {
                    message: alloc::format!("malformed number `{}`", &text[start..i]),
                    span,
                })?;
                out.push((Tok::Num(value), span));
            }
            b'a'..=b'z' => {
                while i < bytes.len() && (bytes[i].is_ascii_lowercase() || bytes[i].is_ascii_digit()) {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), SourceSpan::new(start, i)));
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                i += 1;
                out.push((Tok::Op(c as char), SourceSpan::new(start, i)));
            }
            b'(' => {
                i += 1;
                out.push((Tok::LParen, SourceSpan::new(start, i)));
            }
            b')' => {
                i += 1;
                out.push((Tok::RParen, SourceSpan::new(start, i)));
            }
            _ => {
                let width = text[start..].chars().next().map_or(1, char::len_utf8);
                return Err(ParseError::Syntax {
                    message: alloc::format!("unexpected character `{}`", &text[start..start + width]),
                    span: SourceSpan::new(start, start + width),
                });
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    allowed: AllowedVars,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn next(&mut self) -> Option<(Tok, SourceSpan)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eof_span(&self) -> SourceSpan {
        SourceSpan::new(self.len, self.len)
    }

    fn syntax<T>(&self, message: &str, span: SourceSpan) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            message: message.to_string(),
            span,
        })
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.pos += 1;
            let rhs = self.product()?;
            let span = lhs.span.join(rhs.span);
            lhs = Expr::new(Node::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.pos += 1;
            let rhs = self.unary()?;
            let span = lhs.span.join(rhs.span);
            lhs = Expr::new(Node::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Op('-')) = self.peek() {
            let start = self.toks[self.pos].1;
            self.pos += 1;
            let inner = self.unary()?;
            let span = start.join(inner.span);
            return Ok(Expr::new(Node::Neg(Box::new(inner)), span));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.atom()?;
        while let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let negative = matches!(self.peek(), Some(Tok::Op('-')));
            if negative {
                self.pos += 1;
            }
            match self.next() {
                Some((Tok::Num(v), span)) => {
                    if libm::trunc(v) != v || v > i32::MAX as f64 {
                        return Err(ParseError::NonIntegerExponent { span });
                    }
                    let n = if negative { -(v as i32) } else { v as i32 };
                    let full = base.span.join(span);
                    base = Expr::new(Node::Pow(Box::new(base), n), full);
                }
                Some((_, span)) => return Err(ParseError::NonIntegerExponent { span }),
                None => return self.syntax("expected exponent", self.eof_span()),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.next() {
            Some((Tok::Num(v), span)) => Ok(Expr::new(Node::Const(v), span)),
            Some((Tok::LParen, open)) => {
                let inner = self.sum()?;
                match self.next() {
                    Some((Tok::RParen, _)) => Ok(inner),
                    Some((_, span)) => self.syntax("expected `)`", span),
                    None => self.syntax("unclosed `(`", open),
                }
            }
            Some((Tok::Ident(name), span)) => {
                if let Some(Tok::LParen) = self.peek() {
                    let Some(func) = UnaryFn::from_name(&name) else {
                        return Err(ParseError::UnknownFunction { name, span });
                    };
                    self.pos += 1;
                    let arg = self.sum()?;
                    return match self.next() {
                        Some((Tok::RParen, close)) => {
                            Ok(Expr::new(Node::Call(func, Box::new(arg)), span.join(close)))
                        }
                        Some((_, s)) => self.syntax("expected `)`", s),
                        None => self.syntax("unclosed `(`", span),
                    };
                }
                let var = self.resolve(&name, span)?;
                Ok(Expr::new(Node::Var(var), span))
            }
            Some((_, span)) => self.syntax("expected a number, variable or `(`", span),
            None => self.syntax("unexpected end of expression", self.eof_span()),
        }
    }

    fn resolve(&self, name: &str, span: SourceSpan) -> Result<Var, ParseError> {
        let unknown = || ParseError::UnknownVariable {
            name: name.to_string(),
            span,
        };
        let (kind, digits) = name.split_at(1);
        if digits.is_empty() || digits.starts_with('0') {
            return Err(unknown());
        }
        let k: usize = digits.parse().map_err(|_| unknown())?;
        match kind {
            "x" if k <= self.allowed.x => Ok(Var::X(k - 1)),
            "y" if k <= self.allowed.y => Ok(Var::Y(k - 1)),
            _ => Err(unknown()),
        }
    }
}

/// Parses `text`, checking every variable against `allowed`.
pub fn parse(text: &str, allowed: AllowedVars) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser {
        toks,
        pos: 0,
        allowed,
        len: text.len(),
    };
    let e = p.sum()?;
    if let Some((_, span)) = p.toks.get(p.pos) {
        return p.syntax("unexpected trailing input", *span);
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetSpace;

    fn four() -> AllowedVars {
        AllowedVars::base(4)
    }

    #[test]
    fn precedence() {
        let e = parse("1+2*3", four()).unwrap();
        assert_eq!(e.eval_real(&[], &[]).unwrap(), 7.0);
        assert_eq!(parse("2^3^2", four()).unwrap().eval_real(&[], &[]).unwrap(), 64.0);
        assert_eq!(parse("-2^2", four()).unwrap().eval_real(&[], &[]).unwrap(), -4.0);
        assert_eq!(parse("8/4/2", four()).unwrap().eval_real(&[], &[]).unwrap(), 1.0);
        assert_eq!(parse("1-2-3", four()).unwrap().eval_real(&[], &[]).unwrap(), -4.0);
        assert_eq!(parse("2^-1", four()).unwrap().eval_real(&[], &[]).unwrap(), 0.5);
        assert_eq!(parse("1.5e2 + 2E-1", four()).unwrap().eval_real(&[], &[]).unwrap(), 150.2);
    }

    #[test]
    fn accepts_twist_function() {
        let e = parse("exp(0.1*(x1+x3))", four()).unwrap();
        let v = e.eval_real(&[1.0, 0.0, 2.0, 0.0], &[]).unwrap();
        assert!((v - libm::exp(0.3)).abs() < 1e-15);
        assert!(e.mentions(|v| v == Var::X(2)));
        assert!(!e.mentions(|v| v == Var::X(1)));
    }

    #[test]
    fn unknown_variable_reports_span() {
        let err = parse("x9", four()).unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownVariable {
                name: "x9".into(),
                span: SourceSpan::new(0, 2)
            }
        );
        let err = parse("1 + y1", four()).unwrap_err();
        assert!(matches!(err, ParseError::UnknownVariable { span, .. } if span == SourceSpan::new(4, 6)));
        assert!(matches!(parse("x0", four()), Err(ParseError::UnknownVariable { .. })));
    }

    #[test]
    fn syntax_errors() {
        assert_eq!(parse("  ", four()), Err(ParseError::Empty));
        assert!(matches!(parse("1 +", four()), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("(1", four()), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("1 2", four()), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("x1 % 2", four()), Err(ParseError::Syntax { span, .. }) if span == SourceSpan::new(3, 4)));
        assert!(matches!(parse("tan(x1)", four()), Err(ParseError::UnknownFunction { .. })));
        assert!(matches!(
            parse("x1^2.5", four()),
            Err(ParseError::NonIntegerExponent { span }) if span == SourceSpan::new(3, 6)
        ));
        assert!(matches!(parse("x1^x2", four()), Err(ParseError::NonIntegerExponent { .. })));
    }

    #[test]
    fn real_and_jet_evaluation() {
        let sq = parse("x1*x1", four()).unwrap();
        assert_eq!(sq.eval_real(&[3.0], &[]).unwrap(), 9.0);

        let space = JetSpace::with_default_caps(2, 0);
        let xs = [
            space.lift_variable(0, 3.0).unwrap(),
            space.lift_variable(1, 5.0).unwrap(),
        ];
        let e = parse("x1*x2", AllowedVars::base(2)).unwrap();
        let j = e.eval(&xs[0], &xs, &[]).unwrap();
        assert_eq!(j.value(), 15.0);
        assert_eq!(j.partial_vars(&[0]).unwrap(), 5.0);
        assert_eq!(j.partial_vars(&[1]).unwrap(), 3.0);
    }

    #[test]
    fn domain_error_carries_span() {
        let e = parse("1 + sqrt(x1)", four()).unwrap();
        let err = e.eval_real(&[-1.0], &[]).unwrap_err();
        assert!(matches!(err.source, JetError::NonPositive { op: "sqrt", .. }));
        assert_eq!(err.span, SourceSpan::new(4, 12));
        let d = parse("1/(x1-1)", four()).unwrap();
        assert_eq!(d.eval_real(&[1.0], &[]).unwrap_err().source, JetError::DivisionByZero);
    }

    #[test]
    fn display_reparses() {
        let src = "-x1^2 + 3*sin(x2)/(1 + y1) - exp(-x3)^-2";
        let allowed = AllowedVars::tangent(4);
        let e = parse(src, allowed).unwrap();
        let again = parse(&alloc::format!("{e}"), allowed).unwrap();
        assert_eq!(e, again);
    }
}
