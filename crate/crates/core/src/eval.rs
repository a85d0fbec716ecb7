//! Evaluation of well-typed expressions and bounded polymorphic
//! equivalence.
//!
//! Relations store their columns in sorted attribute order and their rows as
//! positional vectors, so every operator is a column reshuffle plus a filter.

use alloc::borrow::Cow;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use thiserror::Error;

use crate::ast::{AttrName, BinOp, CmpOp, Comparison, Expr, ExprKind, Operand, Predicate, RelVar};
use crate::formula::fresh_attrs;
use crate::typing::{typecheck, RelationType, TypeAssignment, TypeError};

/// An element of the universe of data values.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value(Arc<str>);

impl Value {
    pub fn new(s: &str) -> Self {
        Value(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::new(s)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelationError {
    #[error("row has {found} values but the header has {expected} attributes")]
    Arity { expected: usize, found: usize },
    #[error("attribute {0} occurs twice in a header")]
    DuplicateAttribute(AttrName),
}

/// A finite set of tuples over a relation type.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relation {
    attrs: Vec<AttrName>,
    rows: BTreeSet<Vec<Value>>,
}

impl Relation {
    pub fn empty(ty: &RelationType) -> Self {
        Relation {
            attrs: ty.iter().cloned().collect(),
            rows: BTreeSet::new(),
        }
    }

    /// Builds a relation from rows laid out in `header` order.
    pub fn from_rows(
        header: &[AttrName],
        rows: impl IntoIterator<Item = Vec<Value>>,
    ) -> Result<Self, RelationError> {
        let mut order: Vec<usize> = (0..header.len()).collect();
        order.sort_by(|&i, &j| header[i].cmp(&header[j]));
        for w in order.windows(2) {
            if header[w[0]] == header[w[1]] {
                return Err(RelationError::DuplicateAttribute(header[w[0]].clone()));
            }
        }
        let mut rel = Relation {
            attrs: order.iter().map(|&i| header[i].clone()).collect(),
            rows: BTreeSet::new(),
        };
        for row in rows {
            if row.len() != header.len() {
                return Err(RelationError::Arity {
                    expected: header.len(),
                    found: row.len(),
                });
            }
            rel.rows
                .insert(order.iter().map(|&i| row[i].clone()).collect());
        }
        Ok(rel)
    }

    /// Inserts a row given in sorted attribute order.
    pub fn insert(&mut self, row: Vec<Value>) -> Result<bool, RelationError> {
        if row.len() != self.attrs.len() {
            return Err(RelationError::Arity {
                expected: self.attrs.len(),
                found: row.len(),
            });
        }
        Ok(self.rows.insert(row))
    }

    pub fn rel_type(&self) -> RelationType {
        self.attrs.iter().cloned().collect()
    }

    /// The attributes in column order (sorted).
    pub fn attrs(&self) -> &[AttrName] {
        &self.attrs
    }

    /// Rows in column order.
    pub fn rows(&self) -> impl Iterator<Item = &[Value]> {
        self.rows.iter().map(Vec::as_slice)
    }

    /// Rows as attribute-to-value maps.
    pub fn tuples(&self) -> impl Iterator<Item = BTreeMap<AttrName, Value>> + '_ {
        self.rows.iter().map(|row| {
            self.attrs
                .iter()
                .cloned()
                .zip(row.iter().cloned())
                .collect()
        })
    }

    pub fn contains(&self, row: &[Value]) -> bool {
        self.rows.contains(row)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn position(&self, a: &AttrName) -> usize {
        self.attrs
            .binary_search(a)
            .expect("attribute checked by typing")
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.tuples()).finish()
    }
}

/// A database: a relation for every relation variable of its schema.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Database {
    schema: TypeAssignment,
    contents: BTreeMap<RelVar, Relation>,
}

impl Database {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, r: RelVar, rel: Relation) -> Option<Relation> {
        self.schema.insert(r.clone(), rel.rel_type());
        self.contents.insert(r, rel)
    }

    pub fn schema(&self) -> &TypeAssignment {
        &self.schema
    }

    pub fn get(&self, r: &RelVar) -> Option<&Relation> {
        self.contents.get(r)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RelVar, &Relation)> {
        self.contents.iter()
    }
}

impl FromIterator<(RelVar, Relation)> for Database {
    fn from_iter<I: IntoIterator<Item = (RelVar, Relation)>>(iter: I) -> Self {
        let mut db = Database::new();
        for (r, rel) in iter {
            db.insert(r, rel);
        }
        db
    }
}

/// Evaluates `e` on `db`. Fails iff `e` is not well-typed under the
/// database schema.
pub fn evaluate(db: &Database, e: &Expr) -> Result<Relation, TypeError> {
    typecheck(&db.schema, e)?;
    Ok(eval_node(&|r| &db.contents[r], e).into_owned())
}

enum Side {
    Attr(usize),
    Lit(Value),
}

fn resolve(rel: &Relation, op: &Operand) -> Side {
    match op {
        Operand::Attr(a) => Side::Attr(rel.position(a)),
        Operand::Number(n) | Operand::Text(n) => Side::Lit(Value(n.clone())),
    }
}

fn compare(op: CmpOp, x: &str, y: &str) -> bool {
    let ord = || match (x.parse::<i64>(), y.parse::<i64>()) {
        (Ok(a), Ok(b)) => a.cmp(&b),
        _ => x.cmp(y),
    };
    match op {
        CmpOp::Eq => x == y,
        CmpOp::Ne => x != y,
        CmpOp::Lt => ord() == Ordering::Less,
        CmpOp::Le => ord() != Ordering::Greater,
        CmpOp::Gt => ord() == Ordering::Greater,
        CmpOp::Ge => ord() != Ordering::Less,
    }
}

fn satisfies(rel: &Relation, pred: &Predicate) -> impl Fn(&[Value]) -> bool {
    let tests: Vec<(Side, CmpOp, Side)> = pred
        .comparisons()
        .iter()
        .map(|Comparison { lhs, op, rhs }| (resolve(rel, lhs), *op, resolve(rel, rhs)))
        .collect();
    move |row: &[Value]| {
        let get = |s: &Side| -> Value {
            match s {
                Side::Attr(i) => row[*i].clone(),
                Side::Lit(v) => v.clone(),
            }
        };
        tests
            .iter()
            .all(|(l, op, r)| compare(*op, get(l).as_str(), get(r).as_str()))
    }
}

/// Keeps the columns at `sources`, under the new (sorted) header `attrs`.
fn reshape(rel: &Relation, attrs: Vec<AttrName>, sources: &[usize]) -> Relation {
    Relation {
        attrs,
        rows: rel
            .rows
            .iter()
            .map(|row| sources.iter().map(|&i| row[i].clone()).collect())
            .collect(),
    }
}

fn join(l: &Relation, r: &Relation) -> Relation {
    let mut attrs: Vec<AttrName> = l.attrs.iter().chain(&r.attrs).cloned().collect();
    attrs.sort();
    attrs.dedup();
    // Each output column comes from the left operand if present there.
    let sources: Vec<(bool, usize)> = attrs
        .iter()
        .map(|a| match l.attrs.binary_search(a) {
            Ok(i) => (true, i),
            Err(_) => (false, r.position(a)),
        })
        .collect();
    let shared: Vec<(usize, usize)> = l
        .attrs
        .iter()
        .enumerate()
        .filter_map(|(i, a)| r.attrs.binary_search(a).ok().map(|j| (i, j)))
        .collect();
    let mut rows = BTreeSet::new();
    for x in &l.rows {
        for y in &r.rows {
            if shared.iter().all(|&(i, j)| x[i] == y[j]) {
                rows.insert(
                    sources
                        .iter()
                        .map(|&(left, i)| if left { x[i].clone() } else { y[i].clone() })
                        .collect(),
                );
            }
        }
    }
    Relation { attrs, rows }
}

fn eval_node<'a>(lookup: &dyn Fn(&RelVar) -> &'a Relation, e: &Expr) -> Cow<'a, Relation> {
    match &e.kind {
        ExprKind::Rel(r) => Cow::Borrowed(lookup(r)),
        ExprKind::Binary { op, left, right } => {
            let l = eval_node(lookup, left);
            let r = eval_node(lookup, right);
            match op {
                BinOp::Union => {
                    let mut out = l.into_owned();
                    out.rows.extend(r.rows.iter().cloned());
                    Cow::Owned(out)
                }
                BinOp::Difference => {
                    let mut out = l.into_owned();
                    out.rows.retain(|row| !r.rows.contains(row));
                    Cow::Owned(out)
                }
                BinOp::Join | BinOp::Product => Cow::Owned(join(&l, &r)),
            }
        }
        ExprKind::Select(pred, inner) => {
            let rel = eval_node(lookup, inner);
            let keep = satisfies(&rel, pred);
            let mut out = rel.into_owned();
            out.rows.retain(|row| keep(row));
            Cow::Owned(out)
        }
        ExprKind::Project(attrs, inner) => {
            let rel = eval_node(lookup, inner);
            let mut attrs = attrs.clone();
            attrs.sort();
            let sources: Vec<usize> = attrs.iter().map(|a| rel.position(a)).collect();
            Cow::Owned(reshape(&rel, attrs, &sources))
        }
        ExprKind::Rename { from, to, expr } => {
            let rel = eval_node(lookup, expr);
            let mut attrs: Vec<AttrName> = rel
                .attrs
                .iter()
                .map(|a| if a == from { to.clone() } else { a.clone() })
                .collect();
            attrs.sort();
            let sources: Vec<usize> = attrs
                .iter()
                .map(|a| rel.position(if a == to { from } else { a }))
                .collect();
            Cow::Owned(reshape(&rel, attrs, &sources))
        }
        ExprKind::ProjectOut(attr, inner) => {
            let rel = eval_node(lookup, inner);
            let drop = rel.position(attr);
            let sources: Vec<usize> = (0..rel.attrs.len()).filter(|&i| i != drop).collect();
            let attrs = sources.iter().map(|&i| rel.attrs[i].clone()).collect();
            Cow::Owned(reshape(&rel, attrs, &sources))
        }
    }
}

/// Outcome of [`poly_equiv_bounded`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquivVerdict {
    /// No difference within the budgets.
    Equivalent,
    /// Both expressions are well-typed with the same output type on `db`
    /// but evaluate differently.
    Counterexample {
        db: Database,
        left: Relation,
        right: Relation,
    },
    /// Under `schema` the expressions disagree on well-typedness or on the
    /// output type; `None` means not well-typed.
    DomainMismatch {
        schema: TypeAssignment,
        left: Option<RelationType>,
        right: Option<RelationType>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error("{what} budget {given} exceeds the maximum of {max}")]
    Budget {
        what: &'static str,
        given: usize,
        max: usize,
    },
    #[error("the expressions use different relation variables")]
    RelvarMismatch {
        left: BTreeSet<RelVar>,
        right: BTreeSet<RelVar>,
    },
    #[error(
        "too many relation variables and attributes to enumerate ({0} membership bits, at most 16)"
    )]
    TooLarge(usize),
}

pub const MAX_ATTRS: usize = 4;
pub const MAX_VALUES: usize = 3;
pub const MAX_ROWS: usize = 2;
const MAX_RELVARS: usize = 4;

fn check_budget(what: &'static str, given: usize, max: usize) -> Result<(), EquivError> {
    if given > max {
        Err(EquivError::Budget { what, given, max })
    } else {
        Ok(())
    }
}

/// Type assignments over `relvars` drawing from `special` plus up to
/// `fresh` interchangeable fresh attributes. Fresh attributes only matter up
/// to renaming, so each is identified with the set of relation variables
/// containing it and only non-increasing sequences of such sets are listed.
fn schemas(relvars: &[RelVar], special: &[AttrName], fresh: usize) -> Vec<TypeAssignment> {
    let m = relvars.len();
    let names = fresh_attrs(&special.iter().cloned().collect(), fresh);
    let mut signatures: Vec<Vec<u32>> = Vec::new();
    let mut current = Vec::with_capacity(fresh);
    fn descend(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, left: usize, bound: u32) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for s in (0..=bound).rev() {
            cur.push(s);
            descend(out, cur, left - 1, s);
            cur.pop();
        }
    }
    descend(&mut signatures, &mut current, fresh, (1u32 << m) - 1);

    let bits = m * special.len();
    let mut out: Vec<TypeAssignment> = Vec::new();
    for mask in 0u32..1 << bits {
        for sig in &signatures {
            out.push(
                relvars
                    .iter()
                    .enumerate()
                    .map(|(i, r)| {
                        let mut ty: RelationType = special
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| (mask >> (i * special.len() + j)) & 1 == 1)
                            .map(|(_, a)| a.clone())
                            .collect();
                        ty.extend(
                            sig.iter()
                                .zip(&names)
                                .filter(|(s, _)| (*s >> i) & 1 == 1)
                                .map(|(_, a)| a.clone()),
                        );
                        (r.clone(), ty)
                    })
                    .collect(),
            );
        }
    }
    out.sort_by(|a, b| a.weight().cmp(&b.weight()).then_with(|| a.cmp(b)));
    out
}

/// All relations of type `ty` with at most `max_rows` rows over `values`,
/// grouped by row count.
fn relations_by_size(ty: &RelationType, values: &[Value], max_rows: usize) -> Vec<Vec<Relation>> {
    let arity = ty.len();
    let mut all_rows: Vec<Vec<Value>> = vec![Vec::new()];
    for _ in 0..arity {
        all_rows = all_rows
            .into_iter()
            .flat_map(|row| {
                values.iter().map(move |v| {
                    let mut next = row.clone();
                    next.push(v.clone());
                    next
                })
            })
            .collect();
    }
    let mut groups = Vec::new();
    let mut combo: Vec<usize> = Vec::new();
    for size in 0..=max_rows.min(all_rows.len()) {
        let mut group = Vec::new();
        combo.clear();
        combo.extend(0..size);
        loop {
            let mut rel = Relation::empty(ty);
            rel.rows.extend(combo.iter().map(|&i| all_rows[i].clone()));
            group.push(rel);
            // Next combination of `size` indices in lexicographic order.
            let n = all_rows.len();
            let Some(pos) = (0..size).rev().find(|&p| combo[p] < n - size + p) else {
                break;
            };
            combo[pos] += 1;
            for q in pos + 1..size {
                combo[q] = combo[q - 1] + 1;
            }
        }
        groups.push(group);
    }
    groups
}

/// Size vectors (one entry per relation variable, each below
/// `limits[i]`) summing to `total`.
fn size_vectors(limits: &[usize], total: usize) -> Vec<Vec<usize>> {
    fn go(limits: &[usize], total: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        match limits.split_first() {
            None => {
                if total == 0 {
                    out.push(cur.clone());
                }
            }
            Some((&limit, rest)) => {
                for s in 0..limit.min(total + 1) {
                    cur.push(s);
                    go(rest, total - s, cur, out);
                    cur.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    go(limits, total, &mut Vec::new(), &mut out);
    out
}

fn first_difference(
    schema: &TypeAssignment,
    e1: &Expr,
    e2: &Expr,
    values: &[Value],
    max_rows: usize,
) -> Option<EquivVerdict> {
    let relvars: Vec<&RelVar> = schema.domain().collect();
    let groups: Vec<Vec<Vec<Relation>>> = schema
        .iter()
        .map(|(_, ty)| relations_by_size(ty, values, max_rows))
        .collect();
    let limits: Vec<usize> = groups.iter().map(Vec::len).collect();
    let max_total: usize = limits.iter().map(|l| l - 1).sum();
    for total in 0..=max_total {
        for sizes in size_vectors(&limits, total) {
            let choices: Vec<&Vec<Relation>> =
                sizes.iter().zip(&groups).map(|(&s, g)| &g[s]).collect();
            let mut idx = vec![0usize; choices.len()];
            loop {
                let pick = |r: &RelVar| -> &Relation {
                    let i = relvars.binary_search(&r).expect("relvar in schema");
                    &choices[i][idx[i]]
                };
                let left = eval_node(&pick, e1);
                let right = eval_node(&pick, e2);
                if left != right {
                    let db = relvars
                        .iter()
                        .map(|r| ((*r).clone(), pick(r).clone()))
                        .collect();
                    return Some(EquivVerdict::Counterexample {
                        db,
                        left: left.into_owned(),
                        right: right.into_owned(),
                    });
                }
                let Some(pos) = (0..idx.len())
                    .rev()
                    .find(|&p| idx[p] + 1 < choices[p].len())
                else {
                    break;
                };
                idx[pos] += 1;
                idx[pos + 1..].fill(0);
            }
        }
    }
    None
}

/// Checks whether `e1` and `e2` express the same polymorphic query, within
/// bounds: type assignments over the special attributes of both plus
/// `attr_budget` fresh attributes, and databases with at most `max_rows`
/// rows per relation over `value_budget` values.
///
/// Schemas are tried in order of increasing size, databases in order of
/// increasing total row count. A database counterexample on a schema where
/// both expressions are well-typed takes precedence over a domain mismatch,
/// which is reported only when no such database exists within bounds.
pub fn poly_equiv_bounded(
    e1: &Expr,
    e2: &Expr,
    attr_budget: usize,
    value_budget: usize,
    max_rows: usize,
) -> Result<EquivVerdict, EquivError> {
    check_budget("attribute", attr_budget, MAX_ATTRS)?;
    check_budget("value", value_budget, MAX_VALUES)?;
    check_budget("row", max_rows, MAX_ROWS)?;
    let (rv1, rv2) = (e1.relvars(), e2.relvars());
    if rv1 != rv2 {
        return Err(EquivError::RelvarMismatch {
            left: rv1,
            right: rv2,
        });
    }
    let relvars: Vec<RelVar> = rv1.into_iter().collect();
    let special: Vec<AttrName> = (&e1.specattrs() | &e2.specattrs()).into_iter().collect();
    let bits = relvars.len() * special.len();
    if bits > 16 || relvars.len() > MAX_RELVARS {
        return Err(EquivError::TooLarge(bits.max(relvars.len())));
    }
    let values: Vec<Value> = (0..value_budget)
        .map(|i| Value::new(&format!("{i}")))
        .collect();

    let mut mismatch = None;
    for schema in schemas(&relvars, &special, attr_budget) {
        let t1 = typecheck(&schema, e1).ok();
        let t2 = typecheck(&schema, e2).ok();
        match (&t1, &t2) {
            (Some(a), Some(b)) if a == b => {
                if let Some(found) = first_difference(&schema, e1, e2, &values, max_rows) {
                    return Ok(found);
                }
            }
            (None, None) => {}
            _ => {
                if mismatch.is_none() {
                    mismatch = Some(EquivVerdict::DomainMismatch {
                        schema,
                        left: t1,
                        right: t2,
                    });
                }
            }
        }
    }
    Ok(mismatch.unwrap_or(EquivVerdict::Equivalent))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_expr;
    use proptest::prelude::*;

    fn attrs(s: &str) -> Vec<AttrName> {
        s.split_whitespace().map(|a| a.parse().unwrap()).collect()
    }

    fn rel(header: &str, rows: &[&str]) -> Relation {
        Relation::from_rows(
            &attrs(header),
            rows.iter()
                .map(|r| r.split_whitespace().map(Value::new).collect()),
        )
        .unwrap()
    }

    fn db(entries: &[(&str, Relation)]) -> Database {
        entries
            .iter()
            .map(|(r, rel)| (r.parse().unwrap(), rel.clone()))
            .collect()
    }

    fn run(d: &Database, text: &str) -> Relation {
        evaluate(d, &parse_expr(text).unwrap()).unwrap()
    }

    fn prop3() -> Database {
        db(&[
            ("r", rel("A B", &["x y", "u v"])),
            ("s", rel("B C", &["y z"])),
        ])
    }

    #[test]
    fn join_of_proof_database() {
        assert_eq!(run(&prop3(), "(r join s)"), rel("A B C", &["x y z"]));
    }

    #[test]
    fn projections_and_renaming() {
        let d = prop3();
        assert_eq!(run(&d, "projout[A](r)"), rel("B", &["y", "v"]));
        assert_eq!(run(&d, "project[B,A](r)"), rel("A B", &["x y", "u v"]));
        assert_eq!(run(&d, "project[](r)"), rel("", &[""]));
        assert_eq!(run(&d, "rename[A/D](r)"), rel("D B", &["x y", "u v"]));
        let empty = db(&[("r", rel("A B", &[]))]);
        assert_eq!(run(&empty, "project[A](r)"), rel("A", &[]));
    }

    #[test]
    fn header_order_is_normalized() {
        assert_eq!(rel("B A", &["1 2"]), rel("A B", &["2 1"]));
        assert!(matches!(
            Relation::from_rows(&attrs("A A"), []),
            Err(RelationError::DuplicateAttribute(_))
        ));
        assert!(matches!(
            Relation::from_rows(&attrs("A B"), [vec![Value::new("x")]]),
            Err(RelationError::Arity {
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn predicates() {
        let d = db(&[("r", rel("A B", &["9 10", "b a", "3 3"]))]);
        assert_eq!(run(&d, "select[A<B](r)"), rel("A B", &["9 10"]));
        assert_eq!(run(&d, "select[A>B](r)"), rel("A B", &["b a"]));
        assert_eq!(run(&d, "select[A=B](r)"), rel("A B", &["3 3"]));
        assert_eq!(run(&d, "select[A!=B & A<5](r)"), rel("A B", &[]));
        assert_eq!(run(&d, "select[A=\"b\"](r)"), rel("A B", &["b a"]));
        assert_eq!(run(&d, "select[A<=3](r)"), rel("A B", &["3 3"]));
    }

    #[test]
    fn set_operators_and_product() {
        let d = db(&[
            ("r", rel("A", &["1", "2"])),
            ("s", rel("A", &["2", "3"])),
            ("u", rel("B", &["x"])),
        ]);
        assert_eq!(run(&d, "(r union s)"), rel("A", &["1", "2", "3"]));
        assert_eq!(run(&d, "(r minus s)"), rel("A", &["1"]));
        assert_eq!(run(&d, "(r times u)"), rel("A B", &["1 x", "2 x"]));
    }

    #[test]
    fn ill_typed_input_is_rejected() {
        assert!(evaluate(&prop3(), &parse_expr("(r union s)").unwrap()).is_err());
    }

    #[test]
    fn reflexivity_and_small_examples() {
        let r = parse_expr("r").unwrap();
        assert_eq!(
            poly_equiv_bounded(&r, &r, 2, 2, 2).unwrap(),
            EquivVerdict::Equivalent
        );

        let e1 = parse_expr("project[A]((r join project[A,B](s)))").unwrap();
        let e2 = parse_expr("project[A]((r join s))").unwrap();
        match poly_equiv_bounded(&e1, &e2, 1, 2, 1).unwrap() {
            EquivVerdict::Counterexample { db, left, right } => {
                assert_ne!(left, right);
                let schema = db.schema();
                let r = schema.get(&"r".parse().unwrap()).unwrap();
                let s = schema.get(&"s".parse().unwrap()).unwrap();
                assert!(!r
                    .intersection(s)
                    .all(|a| a.as_str() == "A" || a.as_str() == "B"));
                assert_eq!(evaluate(&db, &e1).unwrap(), left);
                assert_eq!(evaluate(&db, &e2).unwrap(), right);
            }
            other => panic!("expected a counterexample, got {other:?}"),
        }

        let a = parse_expr("(r union s)").unwrap();
        let b = parse_expr("(s union r)").unwrap();
        assert_eq!(
            poly_equiv_bounded(&a, &b, 1, 2, 2).unwrap(),
            EquivVerdict::Equivalent
        );
    }

    #[test]
    fn domain_mismatch_without_database_witness() {
        let a = parse_expr("project[A](r)").unwrap();
        let b = parse_expr("project[A](projout[B](r))").unwrap();
        match poly_equiv_bounded(&a, &b, 0, 1, 1).unwrap() {
            EquivVerdict::DomainMismatch { left, right, .. } => {
                assert!(left.is_some());
                assert!(right.is_none());
            }
            other => panic!("expected a domain mismatch, got {other:?}"),
        }
    }

    #[test]
    fn budgets_and_relvars_are_checked() {
        let r = parse_expr("r").unwrap();
        let s = parse_expr("s").unwrap();
        assert!(matches!(
            poly_equiv_bounded(&r, &r, 5, 2, 2),
            Err(EquivError::Budget {
                what: "attribute",
                ..
            })
        ));
        assert!(matches!(
            poly_equiv_bounded(&r, &r, 1, 4, 2),
            Err(EquivError::Budget { .. })
        ));
        assert!(matches!(
            poly_equiv_bounded(&r, &r, 1, 2, 3),
            Err(EquivError::Budget { .. })
        ));
        assert!(matches!(
            poly_equiv_bounded(&r, &s, 1, 2, 2),
            Err(EquivError::RelvarMismatch { .. })
        ));
    }

    #[test]
    fn fresh_signatures_are_canonical() {
        let rv: Vec<RelVar> = ["r", "s"].iter().map(|r| r.parse().unwrap()).collect();
        // Multisets of size 2 over 4 signatures.
        assert_eq!(schemas(&rv, &[], 2).len(), 10);
        assert_eq!(schemas(&rv, &attrs("A"), 1).len(), 16);
        let weights: Vec<usize> = schemas(&rv, &attrs("A"), 1)
            .iter()
            .map(|t| t.weight())
            .collect();
        assert!(weights.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn relation_enumeration_counts() {
        let vals: Vec<Value> = ["0", "1"].iter().map(|v| Value::new(v)).collect();
        let ty: RelationType = attrs("A B").into_iter().collect();
        let sizes: Vec<usize> = relations_by_size(&ty, &vals, 2)
            .iter()
            .map(Vec::len)
            .collect();
        assert_eq!(sizes, [1, 4, 6]);
        let nullary = relations_by_size(&RelationType::new(), &vals, 2);
        assert_eq!(nullary.iter().map(Vec::len).collect::<Vec<_>>(), [1, 1]);
    }

    fn small_relation(header: &'static str) -> impl Strategy<Value = Relation> {
        let width = attrs(header).len();
        proptest::collection::vec(proptest::collection::vec(0..3u8, width), 0..4).prop_map(
            move |rows| {
                Relation::from_rows(
                    &attrs(header),
                    rows.into_iter()
                        .map(|row| row.iter().map(|v| Value::new(&format!("{v}"))).collect()),
                )
                .unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn algebraic_laws(r in small_relation("A B"), s in small_relation("A B"), u in small_relation("B C")) {
            let d = db(&[("r", r), ("s", s), ("u", u)]);
            prop_assert_eq!(run(&d, "(r union s)"), run(&d, "(s union r)"));
            prop_assert_eq!(run(&d, "(r join u)"), run(&d, "(u join r)"));
            prop_assert_eq!(
                run(&d, "select[A<B]((r union s))"),
                run(&d, "(select[A<B](r) union select[A<B](s))")
            );
            for text in ["((r minus s) join u)", "rename[C/D](projout[B](u))", "(project[B](r) times project[C](u))"] {
                let e = parse_expr(text).unwrap();
                prop_assert_eq!(run(&d, text).rel_type(), typecheck(d.schema(), &e).unwrap());
            }
        }
    }
}
