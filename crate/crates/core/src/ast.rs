//! Relational algebra expressions.
//!
//! The concrete syntax is fully parenthesized so there is no precedence
//! table:
//!
//! ```text
//! e ::= r
//!     | (e union e) | (e minus e) | (e join e) | (e times e)
//!     | select[PRED](e) | project[A1,...,An](e) | rename[A/B](e) | projout[A](e)
//! PRED ::= CMP ('&' CMP)*
//! CMP  ::= OPERAND ('=' | '!=' | '<' | '<=' | '>' | '>=') OPERAND
//! OPERAND ::= Attr | integer | "text"
//! ```
//!
//! Two abbreviations are accepted: the parentheses around a unary operand
//! also serve a binary operand (`select[A=B](r join s)`), and the outermost
//! binary operator may stand bare (`r union s`). The printer always emits
//! the full form.
//!
//! Relation variables start with a lowercase letter, attribute names with an
//! uppercase letter.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn valid_ident(s: &str, first: fn(&char) -> bool) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if first(&c)) && chars.all(is_ident_char)
}

const KEYWORDS: [&str; 8] = [
    "union", "minus", "join", "times", "select", "project", "rename", "projout",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("`{0}` is not an attribute name (expected an uppercase-initial identifier)")]
    BadAttr(String),
    #[error("`{0}` is not a relation variable (expected a lowercase-initial identifier)")]
    BadRelVar(String),
    #[error("`{0}` is a reserved word")]
    Reserved(String),
}

/// An attribute name such as `A` or `B1`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttrName(Arc<str>);

impl AttrName {
    pub fn new(name: &str) -> Result<Self, NameError> {
        if valid_ident(name, char::is_ascii_uppercase) {
            Ok(AttrName(Arc::from(name)))
        } else {
            Err(NameError::BadAttr(name.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// A relation variable such as `r` or `s1`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelVar(Arc<str>);

impl RelVar {
    pub fn new(name: &str) -> Result<Self, NameError> {
        if !valid_ident(name, char::is_ascii_lowercase) {
            Err(NameError::BadRelVar(name.to_string()))
        } else if KEYWORDS.contains(&name) || name == "true" || name == "false" {
            Err(NameError::Reserved(name.to_string()))
        } else {
            Ok(RelVar(Arc::from(name)))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

macro_rules! name_impls {
    ($ty:ident) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl FromStr for $ty {
            type Err = NameError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                $ty::new(s)
            }
        }
    };
}

name_impls!(AttrName);
name_impls!(RelVar);

/// Byte range into the source text. Detached nodes use `0..0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operand {
    Attr(AttrName),
    /// Integer literal, kept verbatim.
    Number(Arc<str>),
    /// Double-quoted literal without the quotes.
    Text(Arc<str>),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Attr(a) => write!(f, "{a}"),
            Operand::Number(n) => f.write_str(n),
            Operand::Text(t) => write!(f, "\"{t}\""),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Comparison {
    pub lhs: Operand,
    pub op: CmpOp,
    pub rhs: Operand,
}

/// A selection predicate: a nonempty conjunction of comparisons that
/// mentions at least one attribute.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Predicate {
    comparisons: Vec<Comparison>,
}

impl Predicate {
    pub fn new(comparisons: Vec<Comparison>) -> Result<Self, AstError> {
        let p = Predicate { comparisons };
        if p.attrs().is_empty() {
            return Err(AstError::PredicateWithoutAttributes);
        }
        Ok(p)
    }

    pub fn comparisons(&self) -> &[Comparison] {
        &self.comparisons
    }

    /// The attributes the predicate mentions, in order of first mention.
    pub fn attrs(&self) -> Vec<AttrName> {
        let mut out: Vec<AttrName> = Vec::new();
        for c in &self.comparisons {
            for side in [&c.lhs, &c.rhs] {
                if let Operand::Attr(a) = side {
                    if !out.contains(a) {
                        out.push(a.clone());
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.comparisons.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "{}{}{}", c.lhs, c.op.symbol(), c.rhs)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Union,
    Difference,
    Join,
    Product,
}

impl BinOp {
    pub fn keyword(self) -> &'static str {
        match self {
            BinOp::Union => "union",
            BinOp::Difference => "minus",
            BinOp::Join => "join",
            BinOp::Product => "times",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Rel(RelVar),
    Binary {
        op: BinOp,
        left: Box<Expr>,
        right: Box<Expr>,
    },
    Select(Predicate, Box<Expr>),
    Project(Vec<AttrName>, Box<Expr>),
    Rename {
        from: AttrName,
        to: AttrName,
        expr: Box<Expr>,
    },
    ProjectOut(AttrName, Box<Expr>),
}

/// An expression node with its source span.
///
/// Equality is structural and ignores spans.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AstError {
    #[error("attribute {0} occurs twice in a projection list")]
    DuplicateProjection(AttrName),
    #[error("rename[{0}/{0}] renames an attribute to itself")]
    IdenticalRename(AttrName),
    #[error("selection predicate must mention at least one attribute")]
    PredicateWithoutAttributes,
}

impl Expr {
    fn detached(kind: ExprKind) -> Self {
        Expr {
            kind,
            span: Span::default(),
        }
    }

    pub fn rel(r: RelVar) -> Self {
        Self::detached(ExprKind::Rel(r))
    }

    pub fn binary(op: BinOp, left: Expr, right: Expr) -> Self {
        Self::detached(ExprKind::Binary {
            op,
            left: Box::new(left),
            right: Box::new(right),
        })
    }

    pub fn select(pred: Predicate, e: Expr) -> Self {
        Self::detached(ExprKind::Select(pred, Box::new(e)))
    }

    pub fn project(attrs: Vec<AttrName>, e: Expr) -> Result<Self, AstError> {
        for (i, a) in attrs.iter().enumerate() {
            if attrs[..i].contains(a) {
                return Err(AstError::DuplicateProjection(a.clone()));
            }
        }
        Ok(Self::detached(ExprKind::Project(attrs, Box::new(e))))
    }

    pub fn rename(from: AttrName, to: AttrName, e: Expr) -> Result<Self, AstError> {
        if from == to {
            return Err(AstError::IdenticalRename(from));
        }
        Ok(Self::detached(ExprKind::Rename {
            from,
            to,
            expr: Box::new(e),
        }))
    }

    pub fn project_out(attr: AttrName, e: Expr) -> Self {
        Self::detached(ExprKind::ProjectOut(attr, Box::new(e)))
    }

    /// The relation variables occurring in the expression.
    pub fn relvars(&self) -> BTreeSet<RelVar> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let ExprKind::Rel(r) = &e.kind {
                out.insert(r.clone());
            }
        });
        out
    }

    /// The attribute names explicitly written in the expression (the
    /// special attributes).
    pub fn specattrs(&self) -> BTreeSet<AttrName> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| match &e.kind {
            ExprKind::Select(p, _) => out.extend(p.attrs()),
            ExprKind::Project(attrs, _) => out.extend(attrs.iter().cloned()),
            ExprKind::Rename { from, to, .. } => {
                out.insert(from.clone());
                out.insert(to.clone());
            }
            ExprKind::ProjectOut(a, _) => {
                out.insert(a.clone());
            }
            ExprKind::Rel(_) | ExprKind::Binary { .. } => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Expr)) {
        visit(self);
        match &self.kind {
            ExprKind::Rel(_) => {}
            ExprKind::Binary { left, right, .. } => {
                left.walk(visit);
                right.walk(visit);
            }
            ExprKind::Select(_, e)
            | ExprKind::Project(_, e)
            | ExprKind::Rename { expr: e, .. }
            | ExprKind::ProjectOut(_, e) => e.walk(visit),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Rel(r) => write!(f, "{r}"),
            ExprKind::Binary { op, left, right } => {
                write!(f, "({left} {} {right})", op.keyword())
            }
            ExprKind::Select(p, e) => write!(f, "select[{p}]({e})"),
            ExprKind::Project(attrs, e) => {
                f.write_str("project[")?;
                for (i, a) in attrs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, "]({e})")
            }
            ExprKind::Rename { from, to, expr } => write!(f, "rename[{from}/{to}]({expr})"),
            ExprKind::ProjectOut(a, e) => write!(f, "projout[{a}]({e})"),
        }
    }
}

/// Renders an expression in the concrete syntax accepted by [`parse_expr`].
pub fn render_expr(e: &Expr) -> String {
    e.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("expected {expected}, found {found}")]
    Unexpected {
        expected: &'static str,
        found: String,
    },
    #[error("unterminated string literal")]
    UnterminatedString,
    #[error("unexpected character `{0}`")]
    BadChar(char),
    #[error(transparent)]
    Ast(#[from] AstError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {}: {kind}", span.start)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok<'a> {
    Lower(&'a str),
    Upper(&'a str),
    Number(&'a str),
    Text(&'a str),
    Op(CmpOp),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Slash,
    Amp,
    Eof,
}

impl Tok<'_> {
    fn describe(&self) -> String {
        match self {
            Tok::Lower(s) | Tok::Upper(s) | Tok::Number(s) => alloc::format!("`{s}`"),
            Tok::Text(s) => alloc::format!("\"{s}\""),
            Tok::Op(op) => alloc::format!("`{}`", op.symbol()),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok<'_>, Span)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = src[i..].chars().next().unwrap_or('\0');
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        let start = i;
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            '/' => Tok::Slash,
            '&' => Tok::Amp,
            '=' => Tok::Op(CmpOp::Eq),
            '!' if bytes.get(i + 1) == Some(&b'=') => {
                i += 1;
                Tok::Op(CmpOp::Ne)
            }
            '<' | '>' => {
                let or_eq = bytes.get(i + 1) == Some(&b'=');
                if or_eq {
                    i += 1;
                }
                Tok::Op(match (c, or_eq) {
                    ('<', false) => CmpOp::Lt,
                    ('<', true) => CmpOp::Le,
                    ('>', false) => CmpOp::Gt,
                    _ => CmpOp::Ge,
                })
            }
            '"' => {
                let Some(len) = src[i + 1..].find('"') else {
                    return Err(ParseError {
                        kind: ParseErrorKind::UnterminatedString,
                        span: Span::new(i, src.len()),
                    });
                };
                let text = &src[i + 1..i + 1 + len];
                i += len + 1;
                Tok::Text(text)
            }
            c if c.is_ascii_digit()
                || (c == '-' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) =>
            {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let s = &src[i..j];
                i = j - 1;
                Tok::Number(s)
            }
            c if c.is_ascii_alphabetic() => {
                let mut j = i + 1;
                while j < bytes.len() && is_ident_char(bytes[j] as char) {
                    j += 1;
                }
                let s = &src[i..j];
                i = j - 1;
                if c.is_ascii_uppercase() {
                    Tok::Upper(s)
                } else {
                    Tok::Lower(s)
                }
            }
            other => {
                return Err(ParseError {
                    kind: ParseErrorKind::BadChar(other),
                    span: Span::new(i, i + other.len_utf8()),
                })
            }
        };
        i += 1;
        out.push((tok, Span::new(start, i)));
    }
    out.push((Tok::Eof, Span::new(src.len(), src.len())));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok<'a>, Span)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &(Tok<'a>, Span) {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> (Tok<'a>, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &'static str) -> Result<T, ParseError> {
        let (tok, span) = self.peek();
        Err(ParseError {
            kind: ParseErrorKind::Unexpected {
                expected,
                found: tok.describe(),
            },
            span: *span,
        })
    }

    fn expect(&mut self, want: Tok<'static>, expected: &'static str) -> Result<Span, ParseError> {
        if self.peek().0 == want {
            Ok(self.bump().1)
        } else {
            self.unexpected(expected)
        }
    }

    fn attr(&mut self) -> Result<AttrName, ParseError> {
        match self.peek().0 {
            Tok::Upper(s) => {
                self.bump();
                Ok(AttrName(Arc::from(s)))
            }
            _ => self.unexpected("an attribute name"),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let (tok, span) = self.peek().clone();
        match tok {
            Tok::LParen => {
                self.bump();
                let left = self.expr()?;
                if self.binary_op().is_none() {
                    return self.unexpected("`union`, `minus`, `join` or `times`");
                }
                let e = self.binary_tail(left, span.start)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Lower(kw @ ("select" | "project" | "rename" | "projout")) => {
                self.bump();
                self.expect(Tok::LBracket, "`[`")?;
                let built = match kw {
                    "select" => {
                        let pred = self.predicate()?;
                        self.close_bracket()?;
                        let (inner, end) = self.argument()?;
                        (Expr::select(pred, inner), end)
                    }
                    "project" => {
                        let mut attrs = Vec::new();
                        if !matches!(self.peek().0, Tok::RBracket) {
                            loop {
                                let at = self.peek().1;
                                let a = self.attr()?;
                                if attrs.contains(&a) {
                                    return Err(ParseError {
                                        kind: AstError::DuplicateProjection(a).into(),
                                        span: at,
                                    });
                                }
                                attrs.push(a);
                                if matches!(self.peek().0, Tok::Comma) {
                                    self.bump();
                                } else {
                                    break;
                                }
                            }
                        }
                        self.close_bracket()?;
                        let (inner, end) = self.argument()?;
                        (
                            Expr::detached(ExprKind::Project(attrs, Box::new(inner))),
                            end,
                        )
                    }
                    "rename" => {
                        let at = self.peek().1;
                        let from = self.attr()?;
                        self.expect(Tok::Slash, "`/`")?;
                        let to = self.attr()?;
                        if from == to {
                            return Err(ParseError {
                                kind: AstError::IdenticalRename(from).into(),
                                span: Span::new(at.start, self.peek().1.start),
                            });
                        }
                        self.close_bracket()?;
                        let (inner, end) = self.argument()?;
                        (
                            Expr::detached(ExprKind::Rename {
                                from,
                                to,
                                expr: Box::new(inner),
                            }),
                            end,
                        )
                    }
                    _ => {
                        let a = self.attr()?;
                        self.close_bracket()?;
                        let (inner, end) = self.argument()?;
                        (Expr::project_out(a, inner), end)
                    }
                };
                let (mut e, end) = built;
                e.span = Span::new(span.start, end);
                Ok(e)
            }
            Tok::Lower(name) => match RelVar::new(name) {
                Ok(r) => {
                    self.bump();
                    Ok(Expr {
                        kind: ExprKind::Rel(r),
                        span,
                    })
                }
                Err(_) => self.unexpected("an expression"),
            },
            _ => self.unexpected("an expression"),
        }
    }

    fn close_bracket(&mut self) -> Result<(), ParseError> {
        self.expect(Tok::RBracket, "`]`").map(|_| ())
    }

    fn binary_op(&self) -> Option<BinOp> {
        match self.peek().0 {
            Tok::Lower("union") => Some(BinOp::Union),
            Tok::Lower("minus") => Some(BinOp::Difference),
            Tok::Lower("join") => Some(BinOp::Join),
            Tok::Lower("times") => Some(BinOp::Product),
            _ => None,
        }
    }

    /// Parses `OP e` after `left` when an operator follows; the node spans
    /// from `start` through the closing parenthesis.
    fn binary_tail(&mut self, left: Expr, start: usize) -> Result<Expr, ParseError> {
        let Some(op) = self.binary_op() else {
            return Ok(left);
        };
        self.bump();
        let right = self.expr()?;
        Ok(Expr {
            kind: ExprKind::Binary {
                op,
                left: Box::new(left),
                right: Box::new(right),
            },
            span: Span::new(start, self.peek().1.end),
        })
    }

    /// A parenthesized operand of a unary operator. The parentheses may
    /// double as those of a binary operand: `select[A=B](r join s)`.
    fn argument(&mut self) -> Result<(Expr, usize), ParseError> {
        let start = self.expect(Tok::LParen, "`(`")?.start;
        let left = self.expr()?;
        let e = self.binary_tail(left, start)?;
        let end = self.expect(Tok::RParen, "`)`")?;
        Ok((e, end.end))
    }

    fn operand(&mut self) -> Result<Operand, ParseError> {
        let op = match self.peek().0 {
            Tok::Upper(s) => Operand::Attr(AttrName(Arc::from(s))),
            Tok::Number(s) => Operand::Number(Arc::from(s)),
            Tok::Text(s) => Operand::Text(Arc::from(s)),
            _ => return self.unexpected("an attribute or a literal"),
        };
        self.bump();
        Ok(op)
    }

    fn predicate(&mut self) -> Result<Predicate, ParseError> {
        let start = self.peek().1.start;
        let mut comparisons = Vec::new();
        loop {
            let lhs = self.operand()?;
            let op = match self.peek().0 {
                Tok::Op(op) => op,
                _ => return self.unexpected("a comparison operator"),
            };
            self.bump();
            let rhs = self.operand()?;
            comparisons.push(Comparison { lhs, op, rhs });
            if matches!(self.peek().0, Tok::Amp) {
                self.bump();
            } else {
                break;
            }
        }
        Predicate::new(comparisons).map_err(|e| ParseError {
            kind: e.into(),
            span: Span::new(start, self.peek().1.start),
        })
    }
}

/// Parses an expression in the concrete syntax described in the module
/// documentation. The outermost binary operator may omit its parentheses.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let left = p.expr()?;
    let start = left.span.start;
    let bare = p.binary_op().is_some();
    let mut e = p.binary_tail(left, start)?;
    if let (true, ExprKind::Binary { right, .. }) = (bare, &e.kind) {
        e.span.end = right.span.end;
    }
    if p.peek().0 != Tok::Eof {
        return p.unexpected("end of input");
    }
    Ok(e)
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> AttrName {
        s.parse().unwrap()
    }

    fn r(s: &str) -> RelVar {
        s.parse().unwrap()
    }

    #[test]
    fn single_relvar() {
        assert_eq!(parse_expr("r").unwrap(), Expr::rel(r("r")));
        assert_eq!(parse_expr("  s1 ").unwrap().span, Span::new(2, 4));
    }

    #[test]
    fn running_example() {
        let e = parse_expr("select[B=C]((rename[A/B](r) union s) join u)").unwrap();
        let pred = Predicate::new(alloc::vec![Comparison {
            lhs: Operand::Attr(a("B")),
            op: CmpOp::Eq,
            rhs: Operand::Attr(a("C")),
        }])
        .unwrap();
        let expected = Expr::select(
            pred,
            Expr::binary(
                BinOp::Join,
                Expr::binary(
                    BinOp::Union,
                    Expr::rename(a("A"), a("B"), Expr::rel(r("r"))).unwrap(),
                    Expr::rel(r("s")),
                ),
                Expr::rel(r("u")),
            ),
        );
        assert_eq!(e, expected);
        assert_eq!(
            e.relvars().into_iter().collect::<Vec<_>>(),
            alloc::vec![r("r"), r("s"), r("u")]
        );
        assert_eq!(
            e.specattrs().into_iter().collect::<Vec<_>>(),
            alloc::vec![a("A"), a("B"), a("C")]
        );
    }

    #[test]
    fn duplicate_projection_rejected() {
        let err = parse_expr("project[A,A](r)").unwrap_err();
        assert_eq!(
            err.kind,
            ParseErrorKind::Ast(AstError::DuplicateProjection(a("A")))
        );
        assert_eq!(err.span.start, 10);
    }

    #[test]
    fn identical_rename_rejected() {
        let err = parse_expr("rename[B/B](r)").unwrap_err();
        assert!(matches!(
            err.kind,
            ParseErrorKind::Ast(AstError::IdenticalRename(_))
        ));
    }

    #[test]
    fn literal_only_predicate_rejected() {
        let err = parse_expr("select[1=1](r)").unwrap_err();
        assert!(matches!(
            err.kind,
            ParseErrorKind::Ast(AstError::PredicateWithoutAttributes)
        ));
    }

    #[test]
    fn syntax_error_reports_position_and_hint() {
        let err = parse_expr("(r plus s)").unwrap_err();
        assert_eq!(err.span.start, 3);
        match err.kind {
            ParseErrorKind::Unexpected { expected, found } => {
                assert!(expected.contains("union"));
                assert_eq!(found, "`plus`");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_expr("r s").is_err());
        assert!(parse_expr("(r union s").is_err());
        assert!(parse_expr("select[A=\"x](r)").is_err());
        assert!(parse_expr("union").is_err());
    }

    #[test]
    fn render_forms() {
        assert_eq!(render_expr(&Expr::rel(r("r"))), "r");
        let u = Expr::binary(BinOp::Union, Expr::rel(r("r")), Expr::rel(r("s")));
        assert_eq!(render_expr(&u), "(r union s)");
        let p = Expr::project(alloc::vec![a("A")], Expr::rel(r("r"))).unwrap();
        assert_eq!(render_expr(&p), "project[A](r)");
        assert_eq!(
            render_expr(&parse_expr("project[](r)").unwrap()),
            "project[](r)"
        );
        let sel = parse_expr("select[ A<5 & B != \"x y\" & C>=-3 ](r)").unwrap();
        assert_eq!(render_expr(&sel), "select[A<5 & B!=\"x y\" & C>=-3](r)");
    }

    #[test]
    fn relvars_and_specattrs() {
        let e = parse_expr("(r join r)").unwrap();
        assert_eq!(e.relvars().len(), 1);
        assert!(parse_expr("(r times s)").unwrap().specattrs().is_empty());
        assert_eq!(parse_expr("rename[A/B](r)").unwrap().specattrs().len(), 2);
        let sel = parse_expr("select[A<5 & 3>B](r)").unwrap();
        assert_eq!(
            sel.specattrs().into_iter().collect::<Vec<_>>(),
            alloc::vec![a("A"), a("B")]
        );
    }

    #[test]
    fn name_validation() {
        assert!(AttrName::new("a").is_err());
        assert!(AttrName::new("B1").is_ok());
        assert!(RelVar::new("R").is_err());
        assert!(RelVar::new("join").is_err());
        assert!(RelVar::new("true").is_err());
        assert!(RelVar::new("s_2").is_ok());
    }

    #[test]
    fn abbreviated_parentheses() {
        let full = parse_expr("select[A=B]((r join s))").unwrap();
        let short = parse_expr("select[A=B](r join s)").unwrap();
        assert_eq!(full, short);
        let ExprKind::Select(_, inner) = &short.kind else {
            panic!("expected a selection");
        };
        assert_eq!(inner.span, Span::new(11, 21));
        let bare = parse_expr(" r union s ").unwrap();
        assert_eq!(bare, parse_expr("(r union s)").unwrap());
        assert_eq!(bare.span, Span::new(1, 10));
        assert!(parse_expr("r union s join u").is_err());
        assert!(parse_expr("(r)").is_err());
    }

    mod round_trip {
        use super::*;
        use proptest::prelude::*;

        fn arb_attr() -> impl Strategy<Value = AttrName> {
            prop::sample::select(alloc::vec!["A", "B", "C", "D", "B1"]).prop_map(a)
        }

        fn arb_operand() -> impl Strategy<Value = Operand> {
            prop_oneof![
                arb_attr().prop_map(Operand::Attr),
                (-50i32..50)
                    .prop_map(|n| Operand::Number(Arc::from(alloc::format!("{n}").as_str()))),
                "[a-z0-9 ]{0,4}".prop_map(|t| Operand::Text(Arc::from(t.as_str()))),
            ]
        }

        fn arb_op() -> impl Strategy<Value = CmpOp> {
            prop::sample::select(alloc::vec![
                CmpOp::Eq,
                CmpOp::Ne,
                CmpOp::Lt,
                CmpOp::Le,
                CmpOp::Gt,
                CmpOp::Ge
            ])
        }

        fn arb_predicate() -> impl Strategy<Value = Predicate> {
            (
                arb_attr(),
                arb_op(),
                arb_operand(),
                prop::collection::vec((arb_operand(), arb_op(), arb_operand()), 0..3),
            )
                .prop_map(|(first, op, rhs, rest)| {
                    let mut cs = alloc::vec![Comparison {
                        lhs: Operand::Attr(first),
                        op,
                        rhs,
                    }];
                    cs.extend(
                        rest.into_iter()
                            .map(|(lhs, op, rhs)| Comparison { lhs, op, rhs }),
                    );
                    Predicate::new(cs).unwrap()
                })
        }

        fn arb_expr() -> impl Strategy<Value = Expr> {
            let leaf = prop::sample::select(alloc::vec!["r", "s", "u", "v1"])
                .prop_map(|n| Expr::rel(r(n)));
            leaf.prop_recursive(5, 24, 2, |inner| {
                prop_oneof![
                    (
                        prop::sample::select(alloc::vec![
                            BinOp::Union,
                            BinOp::Difference,
                            BinOp::Join,
                            BinOp::Product
                        ]),
                        inner.clone(),
                        inner.clone()
                    )
                        .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
                    (arb_predicate(), inner.clone()).prop_map(|(p, e)| Expr::select(p, e)),
                    (prop::collection::btree_set(arb_attr(), 0..3), inner.clone()).prop_map(
                        |(attrs, e)| Expr::project(attrs.into_iter().collect(), e).unwrap()
                    ),
                    (arb_attr(), arb_attr(), inner.clone())
                        .prop_filter_map("identical rename", |(x, y, e)| Expr::rename(x, y, e)
                            .ok()),
                    (arb_attr(), inner).prop_map(|(x, e)| Expr::project_out(x, e)),
                ]
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(500))]
            #[test]
            fn render_then_parse_is_identity(e in arb_expr()) {
                let text = render_expr(&e);
                let back = parse_expr(&text).unwrap();
                prop_assert_eq!(&back, &e);
                prop_assert_eq!(render_expr(&back), text.clone());
                prop_assert_eq!(back.span, Span::new(0, text.len()));
                prop_assert_eq!(back.relvars(), e.relvars());
                prop_assert_eq!(back.specattrs(), e.specattrs());
            }
        }
    }
}
