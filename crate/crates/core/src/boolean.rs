//! Propositional formulas over relation variables.
//!
//! Attribute constraints and output conditions are formulas of this kind. A
//! subset of relation variables is a truth assignment: the members are true,
//! everything else is false.
//!
//! Satisfiability and equivalence are decided by exhaustive truth tables. The
//! variable count is the number of relation variables of an expression, which
//! stays small for real queries.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::ast::RelVar;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum BoolFormula {
    True,
    False,
    Var(RelVar),
    Not(Arc<BoolFormula>),
    And(Arc<BoolFormula>, Arc<BoolFormula>),
    Or(Arc<BoolFormula>, Arc<BoolFormula>),
    Implies(Arc<BoolFormula>, Arc<BoolFormula>),
    Iff(Arc<BoolFormula>, Arc<BoolFormula>),
}

impl BoolFormula {
    pub fn var(r: RelVar) -> Self {
        BoolFormula::Var(r)
    }

    pub fn constant(b: bool) -> Self {
        if b {
            BoolFormula::True
        } else {
            BoolFormula::False
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: BoolFormula) -> Self {
        BoolFormula::Not(Arc::new(f))
    }

    pub fn and(f: BoolFormula, g: BoolFormula) -> Self {
        BoolFormula::And(Arc::new(f), Arc::new(g))
    }

    pub fn or(f: BoolFormula, g: BoolFormula) -> Self {
        BoolFormula::Or(Arc::new(f), Arc::new(g))
    }

    pub fn implies(f: BoolFormula, g: BoolFormula) -> Self {
        BoolFormula::Implies(Arc::new(f), Arc::new(g))
    }

    pub fn iff(f: BoolFormula, g: BoolFormula) -> Self {
        BoolFormula::Iff(Arc::new(f), Arc::new(g))
    }

    /// Conjunction of all items; `True` when empty.
    pub fn all(items: impl IntoIterator<Item = BoolFormula>) -> Self {
        items
            .into_iter()
            .reduce(BoolFormula::and)
            .unwrap_or(BoolFormula::True)
    }

    /// Disjunction of all items; `False` when empty.
    pub fn any(items: impl IntoIterator<Item = BoolFormula>) -> Self {
        items
            .into_iter()
            .reduce(BoolFormula::or)
            .unwrap_or(BoolFormula::False)
    }

    pub fn eval(&self, truthy: &BTreeSet<RelVar>) -> bool {
        match self {
            BoolFormula::True => true,
            BoolFormula::False => false,
            BoolFormula::Var(r) => truthy.contains(r),
            BoolFormula::Not(f) => !f.eval(truthy),
            BoolFormula::And(f, g) => f.eval(truthy) && g.eval(truthy),
            BoolFormula::Or(f, g) => f.eval(truthy) || g.eval(truthy),
            BoolFormula::Implies(f, g) => !f.eval(truthy) || g.eval(truthy),
            BoolFormula::Iff(f, g) => f.eval(truthy) == g.eval(truthy),
        }
    }

    pub fn vars(&self) -> BTreeSet<RelVar> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<RelVar>) {
        match self {
            BoolFormula::True | BoolFormula::False => {}
            BoolFormula::Var(r) => {
                out.insert(r.clone());
            }
            BoolFormula::Not(f) => f.collect_vars(out),
            BoolFormula::And(f, g)
            | BoolFormula::Or(f, g)
            | BoolFormula::Implies(f, g)
            | BoolFormula::Iff(f, g) => {
                f.collect_vars(out);
                g.collect_vars(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            BoolFormula::Iff(..) => 1,
            BoolFormula::Implies(..) => 2,
            BoolFormula::Or(..) => 3,
            BoolFormula::And(..) => 4,
            BoolFormula::Not(_) => 5,
            _ => 6,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.precedence();
        if prec < min {
            f.write_str("(")?;
        }
        match self {
            BoolFormula::True => f.write_str("true")?,
            BoolFormula::False => f.write_str("false")?,
            BoolFormula::Var(r) => write!(f, "{r}")?,
            BoolFormula::Not(g) => {
                f.write_str("!")?;
                g.fmt_prec(f, 5)?;
            }
            BoolFormula::And(l, r) | BoolFormula::Or(l, r) => {
                let sym = if matches!(self, BoolFormula::And(..)) {
                    " & "
                } else {
                    " | "
                };
                l.fmt_prec(f, prec)?;
                f.write_str(sym)?;
                r.fmt_prec(f, prec + 1)?;
            }
            BoolFormula::Implies(l, r) | BoolFormula::Iff(l, r) => {
                let sym = if matches!(self, BoolFormula::Implies(..)) {
                    " -> "
                } else {
                    " <-> "
                };
                l.fmt_prec(f, prec + 1)?;
                f.write_str(sym)?;
                r.fmt_prec(f, prec)?;
            }
        }
        if prec < min {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for BoolFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl fmt::Debug for BoolFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The truth table of a formula over an ordered variable list, one bit per
/// subset. Row `k` makes variable `i` true iff bit `i` of `k` is set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    vars: Vec<RelVar>,
    bits: Vec<u64>,
}

impl TruthTable {
    /// Tabulates `f` over `vars`. Variables of `f` outside `vars` read as
    /// false.
    pub fn new(f: &BoolFormula, vars: &BTreeSet<RelVar>) -> Self {
        let vars: Vec<RelVar> = vars.iter().cloned().collect();
        assert!(
            vars.len() <= 24,
            "truth table over {} variables",
            vars.len()
        );
        let rows = 1usize << vars.len();
        let blocks = rows.div_ceil(64);
        let mut t = TruthTable {
            bits: vec![0; blocks],
            vars,
        };
        t.bits = t.tabulate(f);
        t
    }

    fn rows(&self) -> usize {
        1 << self.vars.len()
    }

    fn full(&self) -> Vec<u64> {
        let rows = self.rows();
        let mut bits = vec![u64::MAX; self.bits.len()];
        if rows % 64 != 0 {
            bits[0] = (1u64 << rows) - 1;
        }
        bits
    }

    fn tabulate(&self, f: &BoolFormula) -> Vec<u64> {
        let zip = |a: Vec<u64>, b: Vec<u64>, op: fn(u64, u64) -> u64| -> Vec<u64> {
            a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
        };
        let full = self.full();
        match f {
            BoolFormula::True => full,
            BoolFormula::False => vec![0; self.bits.len()],
            BoolFormula::Var(r) => {
                let mut bits = vec![0u64; self.bits.len()];
                if let Ok(i) = self.vars.binary_search(r) {
                    for k in 0..self.rows() {
                        if (k >> i) & 1 == 1 {
                            bits[k / 64] |= 1 << (k % 64);
                        }
                    }
                }
                bits
            }
            BoolFormula::Not(g) => zip(self.tabulate(g), full, |x, m| !x & m),
            BoolFormula::And(l, r) => zip(self.tabulate(l), self.tabulate(r), |x, y| x & y),
            BoolFormula::Or(l, r) => zip(self.tabulate(l), self.tabulate(r), |x, y| x | y),
            BoolFormula::Implies(l, r) => {
                let t = zip(self.tabulate(l), self.tabulate(r), |x, y| !x | y);
                zip(t, full, |x, m| x & m)
            }
            BoolFormula::Iff(l, r) => {
                let t = zip(self.tabulate(l), self.tabulate(r), |x, y| !(x ^ y));
                zip(t, full, |x, m| x & m)
            }
        }
    }

    pub fn get(&self, row: usize) -> bool {
        (self.bits[row / 64] >> (row % 64)) & 1 == 1
    }

    pub fn is_satisfiable(&self) -> bool {
        self.bits.iter().any(|&b| b != 0)
    }

    /// The subset of variables denoted by a row.
    pub fn row_set(&self, row: usize) -> BTreeSet<RelVar> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(i, _)| (row >> i) & 1 == 1)
            .map(|(_, r)| r.clone())
            .collect()
    }

    /// Satisfying rows, by ascending subset size then row index.
    pub fn models(&self) -> Vec<usize> {
        let mut rows: Vec<usize> = (0..self.rows()).filter(|&k| self.get(k)).collect();
        rows.sort_by_key(|&k| (k.count_ones(), k));
        rows
    }
}

/// Whether some subset of `vars` satisfies `f`.
pub fn satisfiable(f: &BoolFormula, vars: &BTreeSet<RelVar>) -> bool {
    TruthTable::new(f, vars).is_satisfiable()
}

/// A smallest satisfying subset of `vars`, if any.
pub fn find_model(f: &BoolFormula, vars: &BTreeSet<RelVar>) -> Option<BTreeSet<RelVar>> {
    let t = TruthTable::new(f, vars);
    t.models().first().map(|&row| t.row_set(row))
}

/// All satisfying subsets of `vars`, smallest first.
pub fn models(f: &BoolFormula, vars: &BTreeSet<RelVar>) -> Vec<BTreeSet<RelVar>> {
    let t = TruthTable::new(f, vars);
    t.models().into_iter().map(|row| t.row_set(row)).collect()
}

/// Whether `f` and `g` agree on every subset of `vars`.
pub fn equivalent(f: &BoolFormula, g: &BoolFormula, vars: &BTreeSet<RelVar>) -> bool {
    TruthTable::new(f, vars) == TruthTable::new(g, vars)
}

fn negate(f: BoolFormula) -> BoolFormula {
    match f {
        BoolFormula::True => BoolFormula::False,
        BoolFormula::False => BoolFormula::True,
        BoolFormula::Not(g) => Arc::unwrap_or_clone(g),
        other => BoolFormula::not(other),
    }
}

fn is_negation_of(f: &BoolFormula, g: &BoolFormula) -> bool {
    matches!(f, BoolFormula::Not(x) if **x == *g) || matches!(g, BoolFormula::Not(x) if **x == *f)
}

fn flatten(f: BoolFormula, conj: bool, out: &mut Vec<BoolFormula>) {
    match f {
        BoolFormula::And(l, r) if conj => {
            flatten(Arc::unwrap_or_clone(l), conj, out);
            flatten(Arc::unwrap_or_clone(r), conj, out);
        }
        BoolFormula::Or(l, r) if !conj => {
            flatten(Arc::unwrap_or_clone(l), conj, out);
            flatten(Arc::unwrap_or_clone(r), conj, out);
        }
        other => out.push(other),
    }
}

/// Conjunction (`conj`) or disjunction of already simplified operands.
fn junction(l: BoolFormula, r: BoolFormula, conj: bool) -> BoolFormula {
    let (unit, zero) = if conj {
        (BoolFormula::True, BoolFormula::False)
    } else {
        (BoolFormula::False, BoolFormula::True)
    };
    let mut items = Vec::new();
    flatten(l, conj, &mut items);
    flatten(r, conj, &mut items);
    let mut kept: Vec<BoolFormula> = Vec::new();
    for item in items {
        if item == zero {
            return zero;
        }
        if item == unit || kept.contains(&item) {
            continue;
        }
        if kept.iter().any(|k| is_negation_of(k, &item)) {
            return zero;
        }
        kept.push(item);
    }
    if conj {
        BoolFormula::all(kept)
    } else {
        BoolFormula::any(kept)
    }
}

/// Best-effort display simplification. The result is equivalent to `f` but
/// not canonical.
pub fn simplify(f: &BoolFormula) -> BoolFormula {
    use BoolFormula as F;
    match f {
        F::True | F::False | F::Var(_) => f.clone(),
        F::Not(g) => negate(simplify(g)),
        F::And(l, r) => junction(simplify(l), simplify(r), true),
        F::Or(l, r) => junction(simplify(l), simplify(r), false),
        F::Implies(l, r) => {
            let (l, r) = (simplify(l), simplify(r));
            match (&l, &r) {
                (F::False, _) | (_, F::True) => F::True,
                (F::True, _) => r,
                (_, F::False) => negate(l),
                _ if l == r => F::True,
                _ if is_negation_of(&l, &r) => r,
                _ => F::implies(l, r),
            }
        }
        F::Iff(l, r) => {
            let (l, r) = (simplify(l), simplify(r));
            match (&l, &r) {
                (F::True, _) => r,
                (_, F::True) => l,
                (F::False, _) => negate(r),
                (_, F::False) => negate(l),
                _ if l == r => F::True,
                _ if is_negation_of(&l, &r) => F::False,
                _ => F::iff(l, r),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("formula syntax error at byte {pos}: {message}")]
pub struct FormulaParseError {
    pub pos: usize,
    pub message: String,
}

struct FormulaParser<'a> {
    src: &'a str,
    pos: usize,
}

impl FormulaParser<'_> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, message: &str) -> Result<T, FormulaParseError> {
        Err(FormulaParseError {
            pos: self.pos,
            message: message.to_string(),
        })
    }

    fn iff(&mut self) -> Result<BoolFormula, FormulaParseError> {
        let l = self.implies()?;
        if self.eat("<->") {
            Ok(BoolFormula::iff(l, self.iff()?))
        } else {
            Ok(l)
        }
    }

    fn implies(&mut self) -> Result<BoolFormula, FormulaParseError> {
        let l = self.or()?;
        if self.eat("->") {
            Ok(BoolFormula::implies(l, self.implies()?))
        } else {
            Ok(l)
        }
    }

    fn or(&mut self) -> Result<BoolFormula, FormulaParseError> {
        let mut l = self.and()?;
        loop {
            self.skip_ws();
            if self.src[self.pos..].starts_with("||") {
                return self.error("unexpected `||`");
            }
            if !self.eat("|") {
                return Ok(l);
            }
            l = BoolFormula::or(l, self.and()?);
        }
    }

    fn and(&mut self) -> Result<BoolFormula, FormulaParseError> {
        let mut l = self.not()?;
        while self.eat("&") {
            l = BoolFormula::and(l, self.not()?);
        }
        Ok(l)
    }

    fn not(&mut self) -> Result<BoolFormula, FormulaParseError> {
        if self.eat("!") {
            Ok(BoolFormula::not(self.not()?))
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<BoolFormula, FormulaParseError> {
        if self.eat("(") {
            let f = self.iff()?;
            if !self.eat(")") {
                return self.error("expected `)`");
            }
            return Ok(f);
        }
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        let word = &rest[..len];
        let f = match word {
            "" => return self.error("expected `true`, `false`, a relation variable or `(`"),
            "true" => BoolFormula::True,
            "false" => BoolFormula::False,
            w => match RelVar::new(w) {
                Ok(r) => BoolFormula::Var(r),
                Err(e) => return self.error(&e.to_string()),
            },
        };
        self.pos += len;
        Ok(f)
    }
}

/// Parses the formula text grammar: `true`, `false`, relation variables,
/// `!f`, `f & g`, `f | g`, `f -> g`, `f <-> g` and parentheses, with
/// precedence `!` > `&` > `|` > `->` > `<->` and right-associative arrows.
pub fn parse_formula(text: &str) -> Result<BoolFormula, FormulaParseError> {
    let mut p = FormulaParser { src: text, pos: 0 };
    let f = p.iff()?;
    p.skip_ws();
    if p.pos != text.len() {
        return p.error("trailing input");
    }
    Ok(f)
}

impl core::str::FromStr for BoolFormula {
    type Err = FormulaParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}
