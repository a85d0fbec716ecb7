//! The monomorphic typing judgment `T |- e : tau`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use core::fmt;

use thiserror::Error;

use crate::ast::{AttrName, BinOp, Expr, ExprKind, RelVar, Span};

/// A relation type: a finite set of attribute names.
pub type RelationType = BTreeSet<AttrName>;

/// Writes `{A, B}`.
pub(crate) struct SetDisplay<'a, T>(pub &'a BTreeSet<T>);

impl<T: fmt::Display> fmt::Display for SetDisplay<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("}")
    }
}

/// Maps each relation variable of a schema to its type.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeAssignment(BTreeMap<RelVar, RelationType>);

impl TypeAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, r: RelVar, ty: RelationType) -> Option<RelationType> {
        self.0.insert(r, ty)
    }

    pub fn get(&self, r: &RelVar) -> Option<&RelationType> {
        self.0.get(r)
    }

    pub fn domain(&self) -> impl Iterator<Item = &RelVar> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RelVar, &RelationType)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total number of attribute occurrences over all relation variables.
    pub fn weight(&self) -> usize {
        self.0.values().map(BTreeSet::len).sum()
    }

    /// Pointwise intersection with `attrs`, keeping the domain.
    pub fn restrict(&self, attrs: &BTreeSet<AttrName>) -> TypeAssignment {
        TypeAssignment(
            self.0
                .iter()
                .map(|(r, ty)| (r.clone(), ty.intersection(attrs).cloned().collect()))
                .collect(),
        )
    }
}

impl FromIterator<(RelVar, RelationType)> for TypeAssignment {
    fn from_iter<I: IntoIterator<Item = (RelVar, RelationType)>>(iter: I) -> Self {
        TypeAssignment(iter.into_iter().collect())
    }
}

impl fmt::Display for TypeAssignment {
    /// One `r: A B` line per relation variable.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (r, ty) in &self.0 {
            write!(f, "{r}:")?;
            for a in ty {
                write!(f, " {a}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// The typing rule whose premise or side condition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Relvar,
    Union,
    Difference,
    Join,
    Product,
    Select,
    Project,
    Rename,
    ProjectOut,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeErrorKind {
    #[error("relation variable {0} has no type in the schema")]
    Unbound(RelVar),
    #[error("operand types differ: {} vs {}", SetDisplay(.left), SetDisplay(.right))]
    OperandMismatch {
        left: RelationType,
        right: RelationType,
    },
    #[error("product operands overlap on {}", SetDisplay(.common))]
    ProductOverlap { common: RelationType },
    #[error("attribute {attr} is not in the operand type {}", SetDisplay(.available))]
    MissingAttribute {
        attr: AttrName,
        available: RelationType,
    },
    #[error("rename target {attr} is already in the operand type {}", SetDisplay(.available))]
    TargetPresent {
        attr: AttrName,
        available: RelationType,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("type error in {rule:?} at {span}: {kind}")]
pub struct TypeError {
    pub rule: Rule,
    pub span: Span,
    pub kind: TypeErrorKind,
}

fn require(
    rule: Rule,
    e: &Expr,
    ty: &RelationType,
    attrs: impl IntoIterator<Item = AttrName>,
) -> Result<(), TypeError> {
    for attr in attrs {
        if !ty.contains(&attr) {
            return Err(TypeError {
                rule,
                span: e.span,
                kind: TypeErrorKind::MissingAttribute {
                    attr,
                    available: ty.clone(),
                },
            });
        }
    }
    Ok(())
}

/// Derives the unique `tau` with `ta |- e : tau`.
///
/// Children are checked left to right before the node's own side condition,
/// so the reported error is the leftmost-innermost failure.
pub fn typecheck(ta: &TypeAssignment, e: &Expr) -> Result<RelationType, TypeError> {
    match &e.kind {
        ExprKind::Rel(r) => ta.get(r).cloned().ok_or_else(|| TypeError {
            rule: Rule::Relvar,
            span: e.span,
            kind: TypeErrorKind::Unbound(r.clone()),
        }),
        ExprKind::Binary { op, left, right } => {
            let t1 = typecheck(ta, left)?;
            let t2 = typecheck(ta, right)?;
            let fail = |rule, kind| {
                Err(TypeError {
                    rule,
                    span: e.span,
                    kind,
                })
            };
            match op {
                BinOp::Union | BinOp::Difference => {
                    if t1 == t2 {
                        Ok(t1)
                    } else {
                        let rule = if *op == BinOp::Union {
                            Rule::Union
                        } else {
                            Rule::Difference
                        };
                        fail(
                            rule,
                            TypeErrorKind::OperandMismatch {
                                left: t1,
                                right: t2,
                            },
                        )
                    }
                }
                BinOp::Join => Ok(&t1 | &t2),
                BinOp::Product => {
                    let common: RelationType = t1.intersection(&t2).cloned().collect();
                    if common.is_empty() {
                        Ok(&t1 | &t2)
                    } else {
                        fail(Rule::Product, TypeErrorKind::ProductOverlap { common })
                    }
                }
            }
        }
        ExprKind::Select(pred, inner) => {
            let ty = typecheck(ta, inner)?;
            require(Rule::Select, e, &ty, pred.attrs())?;
            Ok(ty)
        }
        ExprKind::Project(attrs, inner) => {
            let ty = typecheck(ta, inner)?;
            require(Rule::Project, e, &ty, attrs.iter().cloned())?;
            Ok(attrs.iter().cloned().collect())
        }
        ExprKind::Rename { from, to, expr } => {
            let mut ty = typecheck(ta, expr)?;
            require(Rule::Rename, e, &ty, [from.clone()])?;
            if ty.contains(to) {
                return Err(TypeError {
                    rule: Rule::Rename,
                    span: e.span,
                    kind: TypeErrorKind::TargetPresent {
                        attr: to.clone(),
                        available: ty,
                    },
                });
            }
            ty.remove(from);
            ty.insert(to.clone());
            Ok(ty)
        }
        ExprKind::ProjectOut(attr, inner) => {
            let mut ty = typecheck(ta, inner)?;
            require(Rule::ProjectOut, e, &ty, [attr.clone()])?;
            ty.remove(attr);
            Ok(ty)
        }
    }
}

/// Renders a type as space-separated attribute names.
pub fn render_type(ty: &RelationType) -> String {
    let mut out = String::new();
    for (i, a) in ty.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(a.as_str());
    }
    out
}
