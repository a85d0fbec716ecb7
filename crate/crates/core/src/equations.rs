//! Systems of set equations and their symbolic solutions.
//!
//! An equation `a1 ... am = b1 ... bn` equates the union of left-pool
//! variables with the union of right-pool variables. Solutions are pairs of
//! *proper* substitutions: distinct variables of one pool denote disjoint
//! sets. A symbolic solution maps every pool variable to a set of fresh
//! variables, which again stand for pairwise disjoint sets, such that the
//! solutions of the system are exactly the images of proper substitutions of
//! the fresh variables.
//!
//! The solver is the classic Venn construction: every left variable `a` gets
//! a private region `Bar(a)` and a shared region `Pair(a, b)` with each right
//! variable `b`, and vice versa. A region is then dropped (forced empty) if
//! some equation has it on one side only.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// A named pool variable, as read from equation-system text.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EqVar(Arc<str>);

impl EqVar {
    pub fn new(name: &str) -> Result<Self, EquationError> {
        if !name.is_empty() && name.chars().all(|c| c.is_alphanumeric() || c == '_') {
            Ok(EqVar(Arc::from(name)))
        } else {
            Err(EquationError::BadName(name.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EqVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for EqVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl core::str::FromStr for EqVar {
    type Err = EquationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EqVar::new(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquationError {
    #[error("`{0}` is not a valid variable name")]
    BadName(String),
    #[error("variable {0} is in both pools")]
    PoolsOverlap(String),
    #[error("variable {0} on the left-hand side is not in the left pool")]
    NotLeft(String),
    #[error("variable {0} on the right-hand side is not in the right pool")]
    NotRight(String),
    #[error("forced pair ({0}, {1}) is not in left pool x right pool")]
    ForcedPairOutsidePools(String, String),
    #[error("variable {0} is not in either pool")]
    Unknown(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation<V> {
    pub lhs: BTreeSet<V>,
    pub rhs: BTreeSet<V>,
}

/// Two disjoint variable pools and equations between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationSystem<V = EqVar> {
    left: BTreeSet<V>,
    right: BTreeSet<V>,
    equations: Vec<Equation<V>>,
}

impl<V: Ord + Clone + fmt::Debug> EquationSystem<V> {
    pub fn new(left: BTreeSet<V>, right: BTreeSet<V>) -> Result<Self, EquationError> {
        if let Some(v) = left.intersection(&right).next() {
            return Err(EquationError::PoolsOverlap(format!("{v:?}")));
        }
        Ok(EquationSystem {
            left,
            right,
            equations: Vec::new(),
        })
    }

    pub fn add_equation(
        &mut self,
        lhs: BTreeSet<V>,
        rhs: BTreeSet<V>,
    ) -> Result<(), EquationError> {
        if let Some(v) = lhs.iter().find(|v| !self.left.contains(v)) {
            return Err(EquationError::NotLeft(format!("{v:?}")));
        }
        if let Some(v) = rhs.iter().find(|v| !self.right.contains(v)) {
            return Err(EquationError::NotRight(format!("{v:?}")));
        }
        self.equations.push(Equation { lhs, rhs });
        Ok(())
    }

    pub fn left(&self) -> &BTreeSet<V> {
        &self.left
    }

    pub fn right(&self) -> &BTreeSet<V> {
        &self.right
    }

    pub fn equations(&self) -> &[Equation<V>] {
        &self.equations
    }
}

/// A fresh variable of a symbolic solution: the region private to one pool
/// variable, or the region shared by a left and a right variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SolutionVar<V> {
    Bar(V),
    Pair(V, V),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicSolution<V = EqVar> {
    pub fresh_vars: BTreeSet<SolutionVar<V>>,
    pub assignment: BTreeMap<V, BTreeSet<SolutionVar<V>>>,
}

impl<V: Ord + Clone + fmt::Debug> SymbolicSolution<V> {
    /// The union of the images of `vars`.
    pub fn apply<'a>(
        &self,
        vars: impl IntoIterator<Item = &'a V>,
    ) -> Result<BTreeSet<SolutionVar<V>>, EquationError>
    where
        V: 'a,
    {
        let mut out = BTreeSet::new();
        for v in vars {
            let image = self
                .assignment
                .get(v)
                .ok_or_else(|| EquationError::Unknown(format!("{v:?}")))?;
            out.extend(image.iter().cloned());
        }
        Ok(out)
    }

    /// Numbers the fresh variables `1, 2, ...` by first occurrence, visiting
    /// the left pool then the right pool in sorted order and each image in
    /// sorted order.
    pub fn canonical_numbering(&self, sys: &EquationSystem<V>) -> BTreeMap<SolutionVar<V>, usize> {
        let mut names = BTreeMap::new();
        for v in sys.left.iter().chain(&sys.right) {
            for c in self.assignment.get(v).into_iter().flatten() {
                let next = names.len() + 1;
                names.entry(c.clone()).or_insert(next);
            }
        }
        names
    }
}

/// Computes a symbolic solution of `sys`.
///
/// `forced_empty` lists (left, right) pairs whose shared region must be
/// empty; the product case of inference uses it to make two output type
/// sets disjoint.
pub fn solve<V: Ord + Clone + fmt::Debug>(
    sys: &EquationSystem<V>,
    forced_empty: &BTreeSet<(V, V)>,
) -> Result<SymbolicSolution<V>, EquationError> {
    for (a, b) in forced_empty {
        if !sys.left.contains(a) || !sys.right.contains(b) {
            return Err(EquationError::ForcedPairOutsidePools(
                format!("{a:?}"),
                format!("{b:?}"),
            ));
        }
    }

    let mut initial: BTreeMap<V, BTreeSet<SolutionVar<V>>> = BTreeMap::new();
    for a in &sys.left {
        let mut image: BTreeSet<_> = sys
            .right
            .iter()
            .map(|b| SolutionVar::Pair(a.clone(), b.clone()))
            .collect();
        image.insert(SolutionVar::Bar(a.clone()));
        initial.insert(a.clone(), image);
    }
    for b in &sys.right {
        let mut image: BTreeSet<_> = sys
            .left
            .iter()
            .map(|a| SolutionVar::Pair(a.clone(), b.clone()))
            .collect();
        image.insert(SolutionVar::Bar(b.clone()));
        initial.insert(b.clone(), image);
    }

    let mut dropped: BTreeSet<SolutionVar<V>> = forced_empty
        .iter()
        .map(|(a, b)| SolutionVar::Pair(a.clone(), b.clone()))
        .collect();
    let union_of = |vars: &BTreeSet<V>| -> BTreeSet<SolutionVar<V>> {
        vars.iter()
            .flat_map(|v| initial[v].iter().cloned())
            .collect()
    };
    for eq in &sys.equations {
        let lhs = union_of(&eq.lhs);
        let rhs = union_of(&eq.rhs);
        dropped.extend(lhs.symmetric_difference(&rhs).cloned());
    }

    let assignment: BTreeMap<V, BTreeSet<SolutionVar<V>>> = initial
        .into_iter()
        .map(|(v, image)| (v, image.difference(&dropped).cloned().collect()))
        .collect();
    let fresh_vars = assignment.values().flatten().cloned().collect();
    Ok(SymbolicSolution {
        fresh_vars,
        assignment,
    })
}

/// All proper substitutions of `n` variables into subsets of a `k`-element
/// universe, as bitmasks. Each element goes to at most one variable.
fn proper_substitutions(n: usize, k: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut owner = vec![0usize; k];
    loop {
        let mut masks = vec![0u8; n];
        for (elem, &o) in owner.iter().enumerate() {
            if o > 0 {
                masks[o - 1] |= 1 << elem;
            }
        }
        out.push(masks);
        let mut i = 0;
        loop {
            if i == k {
                return out;
            }
            owner[i] += 1;
            if owner[i] <= n {
                break;
            }
            owner[i] = 0;
            i += 1;
        }
    }
}

fn is_proper(masks: &[u8]) -> bool {
    let mut seen = 0u8;
    for &m in masks {
        if seen & m != 0 {
            return false;
        }
        seen |= m;
    }
    true
}

/// Exhaustively checks over a `universe_size`-element universe (at most 4)
/// that every proper substitution of the fresh variables yields a solution
/// of `sys`, and that every solution arises this way.
pub fn verify_solution<V: Ord + Clone + fmt::Debug>(
    sys: &EquationSystem<V>,
    sol: &SymbolicSolution<V>,
    universe_size: usize,
) -> bool {
    assert!(universe_size <= 4, "universe_size {universe_size} > 4");
    let left: Vec<&V> = sys.left.iter().collect();
    let right: Vec<&V> = sys.right.iter().collect();
    let fresh: Vec<&SolutionVar<V>> = sol.fresh_vars.iter().collect();
    let index_of = |c: &SolutionVar<V>| fresh.binary_search(&c).ok();

    let mut images: Vec<Vec<usize>> = Vec::new();
    for v in left.iter().chain(&right) {
        let Some(image) = sol.assignment.get(*v) else {
            return false;
        };
        let mut idx = Vec::new();
        for c in image {
            match index_of(c) {
                Some(i) => idx.push(i),
                None => return false,
            }
        }
        images.push(idx);
    }

    let pos_left: BTreeMap<&V, usize> = left.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let pos_right: BTreeMap<&V, usize> = right.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let satisfies = |fl: &[u8], fr: &[u8]| -> bool {
        sys.equations.iter().all(|eq| {
            let l = eq.lhs.iter().fold(0u8, |acc, v| acc | fl[pos_left[v]]);
            let r = eq.rhs.iter().fold(0u8, |acc, v| acc | fr[pos_right[v]]);
            l == r
        })
    };

    let mut realized: BTreeSet<(Vec<u8>, Vec<u8>)> = BTreeSet::new();
    for h in proper_substitutions(fresh.len(), universe_size) {
        let valuation: Vec<u8> = images
            .iter()
            .map(|idx| idx.iter().fold(0u8, |acc, &i| acc | h[i]))
            .collect();
        let (fl, fr) = valuation.split_at(left.len());
        if !is_proper(fl) || !is_proper(fr) || !satisfies(fl, fr) {
            return false;
        }
        realized.insert((fl.to_vec(), fr.to_vec()));
    }

    let left_subs = proper_substitutions(left.len(), universe_size);
    let right_subs = proper_substitutions(right.len(), universe_size);
    left_subs.iter().all(|fl| {
        right_subs
            .iter()
            .all(|fr| !satisfies(fl, fr) || realized.contains(&(fl.clone(), fr.clone())))
    })
}

/// Renders `x = c1 c2` lines for every pool variable (left pool first), with
/// `{}` for an empty image.
pub fn render_solution<V: Ord + Clone + fmt::Debug + fmt::Display>(
    sys: &EquationSystem<V>,
    sol: &SymbolicSolution<V>,
) -> String {
    let names = sol.canonical_numbering(sys);
    let mut out = String::new();
    for v in sys.left.iter().chain(&sys.right) {
        let mut ids: Vec<usize> = sol
            .assignment
            .get(v)
            .into_iter()
            .flatten()
            .map(|c| names[c])
            .collect();
        ids.sort_unstable();
        out.push_str(&format!("{v} ="));
        if ids.is_empty() {
            out.push_str(" {}");
        }
        for id in ids {
            out.push_str(&format!(" c{id}"));
        }
        out.push('\n');
    }
    out
}
