//! Principal type inference.
//!
//! [`infer`] works bottom-up over the expression. A relation variable `r`
//! gets the formula `r:a |-> a`. Unary operators first make their attribute
//! arguments special (via [`TypeFormula::extend_with_attribute`]) and then
//! tighten constraints and output conditions. Binary operators make the
//! special attributes of both sides agree, unify the two polymorphic bases by
//! solving a system of set equations, and conjoin the contexts.
//!
//! An untypable expression still gets a formula, with an unsatisfiable
//! context. [`Mode::EarlyStop`] instead reports the first operator at which a
//! constraint became unsatisfiable.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use thiserror::Error;

use crate::ast::{AttrName, BinOp, Expr, ExprKind, RelVar, Span};
use crate::boolean::BoolFormula;
use crate::equations::{solve, EquationSystem, SolutionVar};
use crate::formula::{conjoin, TypeContext, TypeFormula, TypeVar};
use crate::typing::{typecheck, RelationType, TypeAssignment};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Always return a formula; it is unsatisfiable iff the expression is
    /// untypable.
    Complete,
    /// Stop at the first unsatisfiable attribute constraint.
    EarlyStop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    UnsatisfiableConstraint,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("untypable: the constraint on attribute {attribute} becomes unsatisfiable at {at}")]
pub struct InferenceDiagnostic {
    pub kind: DiagnosticKind,
    pub attribute: AttrName,
    pub at: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Side {
    Left,
    Right,
}

type Tagged = (Side, TypeVar);

/// Computes the principal type formula of `e`.
///
/// Type variables of the result are numbered `1..=n` in canonical order.
pub fn infer(e: &Expr, mode: Mode) -> Result<TypeFormula, InferenceDiagnostic> {
    Ok(infer_node(e, mode == Mode::EarlyStop)?.canonicalize())
}

fn base_formula(e: &Expr, r: &RelVar) -> TypeFormula {
    let a = TypeVar(0);
    TypeFormula {
        context: TypeContext {
            typevars: [a].into(),
            decl: [(r.clone(), [a].into())].into(),
            constraint: BTreeMap::new(),
        },
        expr: e.clone(),
        outvars: [a].into(),
        outatt: BTreeMap::new(),
    }
}

fn check(
    phi: &TypeFormula,
    early: bool,
    order: &[AttrName],
    at: Span,
) -> Result<(), InferenceDiagnostic> {
    if !early {
        return Ok(());
    }
    match phi.context.first_unsatisfiable(order) {
        Some(attribute) => Err(InferenceDiagnostic {
            kind: DiagnosticKind::UnsatisfiableConstraint,
            attribute,
            at,
        }),
        None => Ok(()),
    }
}

fn infer_node(e: &Expr, early: bool) -> Result<TypeFormula, InferenceDiagnostic> {
    let phi = match &e.kind {
        ExprKind::Rel(r) => base_formula(e, r),
        ExprKind::Binary { op, left, right } => {
            let phi1 = infer_node(left, early)?;
            let phi2 = infer_node(right, early)?;
            let phi = combine(*op, phi1, phi2, e);
            let attrs: Vec<AttrName> = phi.context.constraint.keys().cloned().collect();
            check(&phi, early, &attrs, e.span)?;
            phi
        }
        ExprKind::Select(pred, inner) => {
            let args = pred.attrs();
            let mut phi = with_special(infer_node(inner, early)?, &args);
            for a in &args {
                tighten(&mut phi, a, true);
            }
            check(&phi, early, &args, e.span)?;
            for a in &args {
                phi.outatt.insert(a.clone(), BoolFormula::True);
            }
            phi
        }
        ExprKind::Project(args, inner) => {
            let mut phi = with_special(infer_node(inner, early)?, args);
            for a in args {
                tighten(&mut phi, a, true);
            }
            check(&phi, early, args, e.span)?;
            for (a, cond) in phi.outatt.iter_mut() {
                *cond = BoolFormula::constant(args.contains(a));
            }
            phi.outvars.clear();
            phi
        }
        ExprKind::Rename { from, to, expr } => {
            let args = [from.clone(), to.clone()];
            let mut phi = with_special(infer_node(expr, early)?, &args);
            tighten(&mut phi, from, true);
            tighten(&mut phi, to, false);
            check(&phi, early, &args, e.span)?;
            phi.outatt.insert(from.clone(), BoolFormula::False);
            phi.outatt.insert(to.clone(), BoolFormula::True);
            phi
        }
        ExprKind::ProjectOut(attr, inner) => {
            let args = [attr.clone()];
            let mut phi = with_special(infer_node(inner, early)?, &args);
            tighten(&mut phi, attr, true);
            check(&phi, early, &args, e.span)?;
            phi.outatt.insert(attr.clone(), BoolFormula::False);
            phi
        }
    };
    let phi = TypeFormula {
        expr: e.clone(),
        ..phi
    };
    debug_assert!(
        phi.outvars_are_covered(),
        "output variables not covered at {}",
        e.span
    );
    Ok(phi)
}

/// Extends `phi` with every attribute of `attrs` that is not yet special.
fn with_special(mut phi: TypeFormula, attrs: &[AttrName]) -> TypeFormula {
    for a in attrs {
        if !phi.context.constraint.contains_key(a) {
            phi = phi
                .extend_with_attribute(a)
                .expect("attribute checked not special");
        }
    }
    phi
}

/// Conjoins the constraint of `attr` with its output condition (`present`)
/// or the negation of it.
fn tighten(phi: &mut TypeFormula, attr: &AttrName, present: bool) {
    let out = phi.outatt[attr].clone();
    let out = if present { out } else { BoolFormula::not(out) };
    let c = phi
        .context
        .constraint
        .get_mut(attr)
        .expect("special attribute");
    *c = BoolFormula::and(c.clone(), out);
}

fn combine(op: BinOp, phi1: TypeFormula, phi2: TypeFormula, e: &Expr) -> TypeFormula {
    // Make the special attributes agree.
    let only1: Vec<AttrName> = phi1
        .outatt
        .keys()
        .filter(|a| !phi2.outatt.contains_key(*a))
        .cloned()
        .collect();
    let only2: Vec<AttrName> = phi2
        .outatt
        .keys()
        .filter(|a| !phi1.outatt.contains_key(*a))
        .cloned()
        .collect();
    let phi2 = with_special(phi2, &only1);
    let phi1 = with_special(phi1, &only2);

    // Unify the polymorphic bases, keeping the two type variable supplies
    // apart by tagging them with their side.
    let tag = |side: Side, vars: &BTreeSet<TypeVar>| -> BTreeSet<Tagged> {
        vars.iter().map(|a| (side, *a)).collect()
    };
    let mut sys = EquationSystem::new(
        tag(Side::Left, &phi1.context.typevars),
        tag(Side::Right, &phi2.context.typevars),
    )
    .expect("tagged pools are disjoint");
    for (r, vars1) in &phi1.context.decl {
        if let Some(vars2) = phi2.context.decl.get(r) {
            sys.add_equation(tag(Side::Left, vars1), tag(Side::Right, vars2))
                .expect("declarations use context type variables");
        }
    }
    if matches!(op, BinOp::Union | BinOp::Difference) {
        sys.add_equation(
            tag(Side::Left, &phi1.outvars),
            tag(Side::Right, &phi2.outvars),
        )
        .expect("output variables are context type variables");
    }
    let forced: BTreeSet<(Tagged, Tagged)> = if op == BinOp::Product {
        phi1.outvars
            .iter()
            .flat_map(|a| {
                phi2.outvars
                    .iter()
                    .map(move |b| ((Side::Left, *a), (Side::Right, *b)))
            })
            .collect()
    } else {
        BTreeSet::new()
    };
    let sol = solve(&sys, &forced).expect("forced pairs come from the pools");

    let ids: BTreeMap<&SolutionVar<Tagged>, TypeVar> = sol
        .fresh_vars
        .iter()
        .enumerate()
        .map(|(i, c)| (c, TypeVar(i as u32)))
        .collect();
    let apply = |side: Side, vars: &BTreeSet<TypeVar>| -> BTreeSet<TypeVar> {
        sol.apply(&tag(side, vars))
            .expect("known variables")
            .iter()
            .map(|c| ids[c])
            .collect()
    };
    let typevars: BTreeSet<TypeVar> = ids.values().copied().collect();
    let context_on = |side: Side, phi: &TypeFormula| TypeContext {
        typevars: typevars.clone(),
        decl: phi
            .context
            .decl
            .iter()
            .map(|(r, vars)| (r.clone(), apply(side, vars)))
            .collect(),
        constraint: phi.context.constraint.clone(),
    };
    let gamma1 = context_on(Side::Left, &phi1);
    let gamma2 = context_on(Side::Right, &phi2);
    let mut context = conjoin(&gamma1, &gamma2).expect("solved contexts are compatible");

    let out1 = apply(Side::Left, &phi1.outvars);
    let out2 = apply(Side::Right, &phi2.outvars);
    let outvars = match op {
        BinOp::Union | BinOp::Difference => {
            debug_assert_eq!(out1, out2);
            out1
        }
        BinOp::Join | BinOp::Product => &out1 | &out2,
    };

    let mut outatt = BTreeMap::new();
    for (a, c) in context.constraint.iter_mut() {
        let o1 = phi1.outatt[a].clone();
        let o2 = phi2.outatt[a].clone();
        match op {
            BinOp::Union | BinOp::Difference => {
                *c = BoolFormula::and(c.clone(), BoolFormula::iff(o1.clone(), o2));
                outatt.insert(a.clone(), o1);
            }
            BinOp::Join => {
                outatt.insert(a.clone(), BoolFormula::or(o1, o2));
            }
            BinOp::Product => {
                *c = BoolFormula::and(
                    c.clone(),
                    BoolFormula::not(BoolFormula::and(o1.clone(), o2.clone())),
                );
                outatt.insert(a.clone(), BoolFormula::or(o1, o2));
            }
        }
    }

    TypeFormula {
        context,
        expr: e.clone(),
        outvars,
        outatt,
    }
}

/// Typability via the principal formula: `e` is typable iff the context of
/// its principal formula is satisfiable.
pub fn typable(e: &Expr) -> bool {
    infer(e, Mode::Complete)
        .expect("complete mode never stops early")
        .context
        .is_satisfiable()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("brute-force search over {relvars} relation variables x {attrs} attributes exceeds the limit of 16")]
pub struct GuardExceeded {
    pub relvars: usize,
    pub attrs: usize,
}

/// Searches all type assignments whose types only contain special
/// attributes of `e`. That space suffices: restricting a well-typing
/// assignment to any superset of the special attributes keeps it
/// well-typing. Returns a witness with the fewest attributes.
pub fn typable_bruteforce(e: &Expr) -> Result<Option<TypeAssignment>, GuardExceeded> {
    let relvars: Vec<RelVar> = e.relvars().into_iter().collect();
    let attrs: Vec<AttrName> = e.specattrs().into_iter().collect();
    let bits = relvars.len() * attrs.len();
    if bits > 16 {
        return Err(GuardExceeded {
            relvars: relvars.len(),
            attrs: attrs.len(),
        });
    }
    let assignment = |mask: u32| -> TypeAssignment {
        relvars
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let ty: RelationType = attrs
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| (mask >> (i * attrs.len() + j)) & 1 == 1)
                    .map(|(_, a)| a.clone())
                    .collect();
                (r.clone(), ty)
            })
            .collect()
    };
    for weight in 0..=bits as u32 {
        for mask in (0u32..1 << bits).filter(|m| m.count_ones() == weight) {
            let ta = assignment(mask);
            if typecheck(&ta, e).is_ok() {
                return Ok(Some(ta));
            }
        }
    }
    Ok(None)
}
