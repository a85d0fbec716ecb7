//! Type contexts, instantiations and type formulas.
//!
//! A type context declares each relation variable as a union of type
//! variables and constrains, per special attribute, which relation variables
//! may carry that attribute. An instantiation picks pairwise disjoint types
//! for the type variables and a constraint-satisfying set of relation
//! variables for each special attribute; its image is a concrete type
//! assignment. A type formula adds the output side: the type variables and
//! per-attribute conditions that make up the output type.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::ast::{AttrName, Expr, RelVar};
use crate::boolean::{self, BoolFormula, TruthTable};
use crate::typing::{RelationType, SetDisplay, TypeAssignment};

/// A type variable. Inference numbers them internally; the text format
/// renames them `c1, c2, ...`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeVar(pub u32);

impl fmt::Display for TypeVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

impl fmt::Debug for TypeVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("declaration of {relvar} uses undeclared type variable {var}")]
    UndeclaredTypeVar { relvar: RelVar, var: TypeVar },
    #[error("attribute {0} is already special")]
    AlreadySpecial(AttrName),
    #[error("contexts are incompatible: {0}")]
    Incompatible(String),
    #[error("formulas range over different relation variables")]
    RelvarMismatch,
    #[error("formulas are for different expressions")]
    ExprMismatch,
    #[error("at most 3 extra attributes are supported, got {0}")]
    TooManyExtraAttrs(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstantiationError {
    #[error("type variable {0} has no type")]
    MissingTypeVar(TypeVar),
    #[error("special attribute {0} has no relation set")]
    MissingAttr(AttrName),
    #[error("types of {0} and {1} overlap")]
    Overlap(TypeVar, TypeVar),
    #[error("special attribute {attr} occurs in the type of {var}")]
    SpecialInTypeVar { var: TypeVar, attr: AttrName },
    #[error("relation set of {0} mentions an unknown relation variable")]
    UnknownRelvar(AttrName),
    #[error("relation set {} violates the constraint of {attr}", SetDisplay(.set))]
    ConstraintViolated {
        attr: AttrName,
        set: BTreeSet<RelVar>,
    },
}

/// Relation variable declarations plus per-attribute constraints.
///
/// The relation variables are the keys of `decl`; the special attributes
/// are the keys of `constraint`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeContext {
    pub typevars: BTreeSet<TypeVar>,
    pub decl: BTreeMap<RelVar, BTreeSet<TypeVar>>,
    pub constraint: BTreeMap<AttrName, BoolFormula>,
}

impl TypeContext {
    pub fn new(
        typevars: BTreeSet<TypeVar>,
        decl: BTreeMap<RelVar, BTreeSet<TypeVar>>,
        constraint: BTreeMap<AttrName, BoolFormula>,
    ) -> Result<Self, FormulaError> {
        for (r, vars) in &decl {
            if let Some(v) = vars.iter().find(|v| !typevars.contains(v)) {
                return Err(FormulaError::UndeclaredTypeVar {
                    relvar: r.clone(),
                    var: *v,
                });
            }
        }
        Ok(TypeContext {
            typevars,
            decl,
            constraint,
        })
    }

    pub fn relvars(&self) -> BTreeSet<RelVar> {
        self.decl.keys().cloned().collect()
    }

    pub fn specattrs(&self) -> BTreeSet<AttrName> {
        self.constraint.keys().cloned().collect()
    }

    /// The constraint a freshly added special attribute gets: if any
    /// relation variable carries it, the carriers are exactly the relation
    /// variables whose declaration contains one particular type variable.
    pub fn extension_constraint(&self) -> BoolFormula {
        let some = BoolFormula::any(self.decl.keys().cloned().map(BoolFormula::var));
        let regions = self.typevars.iter().map(|a| {
            BoolFormula::all(self.decl.iter().map(|(r, vars)| {
                let lit = BoolFormula::var(r.clone());
                if vars.contains(a) {
                    lit
                } else {
                    BoolFormula::not(lit)
                }
            }))
        });
        BoolFormula::implies(some, BoolFormula::any(regions))
    }

    /// Whether every attribute constraint is satisfiable.
    ///
    /// This decides satisfiability of the whole context: the instantiation
    /// conditions constrain each special attribute separately, and type
    /// variables can always be instantiated (for instance all empty).
    pub fn is_satisfiable(&self) -> bool {
        self.first_unsatisfiable(self.constraint.keys()).is_none()
    }

    /// The first attribute in `order` whose constraint is unsatisfiable.
    pub fn first_unsatisfiable<'a>(
        &self,
        order: impl IntoIterator<Item = &'a AttrName>,
    ) -> Option<AttrName> {
        let relvars = self.relvars();
        order
            .into_iter()
            .find(|a| {
                self.constraint
                    .get(*a)
                    .is_some_and(|c| !boolean::satisfiable(c, &relvars))
            })
            .cloned()
    }
}

/// Componentwise union of two compatible contexts, conjoining constraints.
///
/// Compatible means: same type variables, same special attributes, and equal
/// declarations on shared relation variables.
pub fn conjoin(g1: &TypeContext, g2: &TypeContext) -> Result<TypeContext, FormulaError> {
    if g1.typevars != g2.typevars {
        return Err(FormulaError::Incompatible("type variables differ".into()));
    }
    if g1.specattrs() != g2.specattrs() {
        return Err(FormulaError::Incompatible(
            "special attributes differ".into(),
        ));
    }
    let mut decl = g1.decl.clone();
    for (r, vars) in &g2.decl {
        if let Some(existing) = decl.get(r) {
            if existing != vars {
                return Err(FormulaError::Incompatible(format!(
                    "declarations of {r} differ"
                )));
            }
        } else {
            decl.insert(r.clone(), vars.clone());
        }
    }
    let constraint = g1
        .constraint
        .iter()
        .map(|(a, c1)| {
            (
                a.clone(),
                BoolFormula::and(c1.clone(), g2.constraint[a].clone()),
            )
        })
        .collect();
    Ok(TypeContext {
        typevars: g1.typevars.clone(),
        decl,
        constraint,
    })
}

pub fn context_satisfiable(gamma: &TypeContext) -> bool {
    gamma.is_satisfiable()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Instantiation {
    pub var_types: BTreeMap<TypeVar, RelationType>,
    pub attr_sets: BTreeMap<AttrName, BTreeSet<RelVar>>,
}

impl Instantiation {
    pub fn validate(&self, gamma: &TypeContext) -> Result<(), InstantiationError> {
        let empty = RelationType::new();
        let mut seen: Vec<(TypeVar, &RelationType)> = Vec::new();
        for a in &gamma.typevars {
            let ty = self
                .var_types
                .get(a)
                .ok_or(InstantiationError::MissingTypeVar(*a))?;
            if let Some(attr) = ty.iter().find(|x| gamma.constraint.contains_key(*x)) {
                return Err(InstantiationError::SpecialInTypeVar {
                    var: *a,
                    attr: attr.clone(),
                });
            }
            if let Some((b, _)) = seen.iter().find(|(_, t)| !t.is_disjoint(ty)) {
                return Err(InstantiationError::Overlap(*b, *a));
            }
            if ty != &empty {
                seen.push((*a, ty));
            }
        }
        for (attr, c) in &gamma.constraint {
            let set = self
                .attr_sets
                .get(attr)
                .ok_or_else(|| InstantiationError::MissingAttr(attr.clone()))?;
            if set.iter().any(|r| !gamma.decl.contains_key(r)) {
                return Err(InstantiationError::UnknownRelvar(attr.clone()));
            }
            if !c.eval(set) {
                return Err(InstantiationError::ConstraintViolated {
                    attr: attr.clone(),
                    set: set.clone(),
                });
            }
        }
        Ok(())
    }
}

/// The type assignment induced by a valid instantiation.
pub fn image(
    gamma: &TypeContext,
    inst: &Instantiation,
) -> Result<TypeAssignment, InstantiationError> {
    inst.validate(gamma)?;
    Ok(gamma
        .decl
        .iter()
        .map(|(r, vars)| {
            let mut ty: RelationType = vars
                .iter()
                .flat_map(|a| inst.var_types[a].iter().cloned())
                .collect();
            ty.extend(
                gamma
                    .constraint
                    .keys()
                    .filter(|attr| inst.attr_sets[*attr].contains(r))
                    .cloned(),
            );
            (r.clone(), ty)
        })
        .collect())
}

/// A type formula `(context, expr, outvars, outatt)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeFormula {
    pub context: TypeContext,
    pub expr: Expr,
    pub outvars: BTreeSet<TypeVar>,
    pub outatt: BTreeMap<AttrName, BoolFormula>,
}

/// The output type of a formula under a valid instantiation.
pub fn output_type(
    phi: &TypeFormula,
    inst: &Instantiation,
) -> Result<RelationType, InstantiationError> {
    inst.validate(&phi.context)?;
    let mut ty: RelationType = phi
        .outvars
        .iter()
        .flat_map(|a| inst.var_types[a].iter().cloned())
        .collect();
    ty.extend(
        phi.outatt
            .iter()
            .filter(|(attr, cond)| cond.eval(&inst.attr_sets[*attr]))
            .map(|(attr, _)| attr.clone()),
    );
    Ok(ty)
}

/// Per type variable: the relation variables declaring it and whether it is
/// output, sorted.
fn typevar_signatures(phi: &TypeFormula) -> Vec<(Vec<&RelVar>, bool)> {
    let mut sigs: Vec<(Vec<&RelVar>, bool)> = phi
        .context
        .typevars
        .iter()
        .map(|a| {
            let owners = phi
                .context
                .decl
                .iter()
                .filter(|(_, vars)| vars.contains(a))
                .map(|(r, _)| r)
                .collect();
            (owners, phi.outvars.contains(a))
        })
        .collect();
    sigs.sort();
    sigs
}

/// `n` attribute names `Z1, Z2, ...` that avoid `taken`.
pub fn fresh_attrs(taken: &BTreeSet<AttrName>, n: usize) -> Vec<AttrName> {
    (1..)
        .map(|i| AttrName::new(&format!("Z{i}")).expect("valid attribute name"))
        .filter(|a| !taken.contains(a))
        .take(n)
        .collect()
}

impl TypeFormula {
    /// Adds `attr` as a special attribute without changing the meaning of
    /// the formula.
    pub fn extend_with_attribute(&self, attr: &AttrName) -> Result<TypeFormula, FormulaError> {
        if self.context.constraint.contains_key(attr) {
            return Err(FormulaError::AlreadySpecial(attr.clone()));
        }
        let mut out = self.clone();
        let constraint = self.context.extension_constraint();
        let outatt = BoolFormula::any(
            self.context
                .decl
                .iter()
                .filter(|(_, vars)| vars.is_subset(&self.outvars))
                .map(|(r, _)| BoolFormula::var(r.clone())),
        );
        out.context.constraint.insert(attr.clone(), constraint);
        out.outatt.insert(attr.clone(), outatt);
        Ok(out)
    }

    /// Equality up to a renaming of type variables and logical equivalence
    /// of constraints and output conditions. A type variable is determined
    /// by the declarations containing it and whether it is output, so the
    /// renaming exists iff those signatures agree as multisets.
    pub fn same_up_to_renaming(&self, other: &TypeFormula) -> bool {
        let relvars = self.context.relvars();
        let same_formulas = |f: &BTreeMap<AttrName, BoolFormula>,
                             g: &BTreeMap<AttrName, BoolFormula>| {
            f.len() == g.len()
                && f.iter().all(|(a, x)| {
                    g.get(a)
                        .is_some_and(|y| boolean::equivalent(x, y, &relvars))
                })
        };
        relvars == other.context.relvars()
            && typevar_signatures(self) == typevar_signatures(other)
            && same_formulas(&self.context.constraint, &other.context.constraint)
            && same_formulas(&self.outatt, &other.outatt)
    }

    /// Every output type variable belongs to the declaration of some
    /// relation variable whose whole declaration is output.
    pub fn outvars_are_covered(&self) -> bool {
        self.outvars.iter().all(|a| {
            self.context
                .decl
                .values()
                .any(|vars| vars.contains(a) && vars.is_subset(&self.outvars))
        })
    }

    /// Type variables in first-occurrence order: declarations by sorted
    /// relation variable, then output variables, then anything left.
    pub fn canonical_typevar_order(&self) -> Vec<TypeVar> {
        let mut order: Vec<TypeVar> = Vec::new();
        let all = self
            .context
            .decl
            .values()
            .flatten()
            .chain(&self.outvars)
            .chain(&self.context.typevars);
        for a in all {
            if !order.contains(a) {
                order.push(*a);
            }
        }
        order
    }

    /// Renames type variables through `f`, which must be injective on the
    /// formula's type variables.
    pub fn map_typevars(&self, f: impl Fn(TypeVar) -> TypeVar) -> TypeFormula {
        let map_set = |s: &BTreeSet<TypeVar>| s.iter().map(|a| f(*a)).collect::<BTreeSet<_>>();
        TypeFormula {
            context: TypeContext {
                typevars: map_set(&self.context.typevars),
                decl: self
                    .context
                    .decl
                    .iter()
                    .map(|(r, vars)| (r.clone(), map_set(vars)))
                    .collect(),
                constraint: self.context.constraint.clone(),
            },
            expr: self.expr.clone(),
            outvars: map_set(&self.outvars),
            outatt: self.outatt.clone(),
        }
    }

    /// Renumbers type variables `1..=n` in canonical order.
    pub fn canonicalize(&self) -> TypeFormula {
        let order = self.canonical_typevar_order();
        self.map_typevars(|a| {
            let pos = order
                .iter()
                .position(|b| *b == a)
                .expect("known type variable");
            TypeVar(pos as u32 + 1)
        })
    }

    /// Every `(image, output type)` pair over instantiations whose type
    /// variables draw their attributes from `pool`. Attributes of `pool`
    /// that are special in this formula are ignored.
    pub fn instantiation_pairs(
        &self,
        pool: &BTreeSet<AttrName>,
    ) -> BTreeSet<(TypeAssignment, RelationType)> {
        let gamma = &self.context;
        let pool: Vec<&AttrName> = pool
            .iter()
            .filter(|a| !gamma.constraint.contains_key(*a))
            .collect();
        let typevars: Vec<TypeVar> = gamma.typevars.iter().copied().collect();
        let relvars = gamma.relvars();
        let relvar_list: Vec<&RelVar> = relvars.iter().collect();

        // Per special attribute: the satisfying carrier sets, each with its
        // carrier mask and whether the output condition holds.
        let mut choices: Vec<(&AttrName, Vec<(usize, bool)>)> = Vec::new();
        for (attr, c) in &gamma.constraint {
            let table = TruthTable::new(c, &relvars);
            let out = TruthTable::new(&self.outatt[attr], &relvars);
            let models: Vec<(usize, bool)> = table
                .models()
                .into_iter()
                .map(|row| (row, out.get(row)))
                .collect();
            if models.is_empty() {
                return BTreeSet::new();
            }
            choices.push((attr, models));
        }

        let mut pairs = BTreeSet::new();
        let mut owner = vec![0usize; pool.len()];
        loop {
            let mut var_types: BTreeMap<TypeVar, RelationType> =
                typevars.iter().map(|a| (*a, RelationType::new())).collect();
            for (attr, &o) in pool.iter().zip(&owner) {
                if o > 0 {
                    var_types
                        .get_mut(&typevars[o - 1])
                        .unwrap()
                        .insert((*attr).clone());
                }
            }
            let base: Vec<RelationType> = relvar_list
                .iter()
                .map(|r| {
                    gamma.decl[*r]
                        .iter()
                        .flat_map(|a| var_types[a].iter().cloned())
                        .collect()
                })
                .collect();
            let base_out: RelationType = self
                .outvars
                .iter()
                .flat_map(|a| var_types[a].iter().cloned())
                .collect();

            let mut pick = vec![0usize; choices.len()];
            loop {
                let mut types = base.clone();
                let mut out = base_out.clone();
                for ((attr, models), &i) in choices.iter().zip(&pick) {
                    let (row, holds) = models[i];
                    for (j, ty) in types.iter_mut().enumerate() {
                        if (row >> j) & 1 == 1 {
                            ty.insert((*attr).clone());
                        }
                    }
                    if holds {
                        out.insert((*attr).clone());
                    }
                }
                let ta: TypeAssignment = relvar_list
                    .iter()
                    .map(|r| (*r).clone())
                    .zip(types)
                    .collect();
                pairs.insert((ta, out));
                if !advance(&mut pick, |k| choices[k].1.len()) {
                    break;
                }
            }
            if !advance(&mut owner, |_| typevars.len() + 1) {
                break;
            }
        }
        pairs
    }
}

/// Odometer step; returns false after the last combination.
fn advance(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for (k, d) in digits.iter_mut().enumerate() {
        *d += 1;
        if *d < radix(k) {
            return true;
        }
        *d = 0;
    }
    false
}

/// Bounded equivalence of two type formulas for the same expression.
///
/// Both formulas are instantiated with type variables drawing from
/// `extra_attrs` fresh attributes (plus the special attributes of the other
/// formula that are not special in this one); they are equivalent within the
/// bound iff the sets of (image, output type) pairs coincide.
pub fn formulas_equivalent_bounded(
    p1: &TypeFormula,
    p2: &TypeFormula,
    extra_attrs: usize,
) -> Result<bool, FormulaError> {
    if extra_attrs > 3 {
        return Err(FormulaError::TooManyExtraAttrs(extra_attrs));
    }
    if p1.context.relvars() != p2.context.relvars() {
        return Err(FormulaError::RelvarMismatch);
    }
    if p1.expr != p2.expr {
        return Err(FormulaError::ExprMismatch);
    }
    let special: BTreeSet<AttrName> = &p1.context.specattrs() | &p2.context.specattrs();
    let mut pool = special.clone();
    pool.extend(fresh_attrs(&special, extra_attrs));
    Ok(p1.instantiation_pairs(&pool) == p2.instantiation_pairs(&pool))
}
