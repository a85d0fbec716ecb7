//! Polymorphic type inference for the relational algebra.
//!
//! Given a relational algebra expression, [`infer`] computes its principal
//! type formula: a finite description of every type assignment (relation
//! variable to attribute set) under which the expression is well-typed,
//! together with the output type under each of them.
//!
//! The crate is `no_std` and only needs `alloc`. Reading and writing files
//! lives in the `ratype-cli` companion crate.
//!
//! Module map:
//!
//! - [`ast`]: expressions, their text syntax, parser and printer.
//! - [`typing`]: the monomorphic judgment `T |- e : tau`.
//! - [`boolean`]: propositional formulas over relation variables.
//! - [`equations`]: systems of set equations and their symbolic solutions.
//! - [`formula`]: type contexts, instantiations and type formulas.
//! - [`inference`]: the principal type inference algorithm and typability.
//! - [`eval`]: evaluation over databases and bounded polymorphic equivalence.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod ast;
pub mod boolean;
pub mod equations;
pub mod eval;
pub mod formula;
pub mod inference;
pub mod typing;

pub use ast::{parse_expr, AttrName, BinOp, Expr, ExprKind, ParseError, RelVar, Span};
pub use boolean::BoolFormula;
pub use equations::{solve, EqVar, EquationSystem, SolutionVar, SymbolicSolution};
pub use eval::{evaluate, poly_equiv_bounded, Database, EquivVerdict, Relation, Value};
pub use formula::{Instantiation, TypeContext, TypeFormula, TypeVar};
pub use inference::{infer, typable, typable_bruteforce, InferenceDiagnostic, Mode};
pub use typing::{typecheck, RelationType, TypeAssignment, TypeError};
