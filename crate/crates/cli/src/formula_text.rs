//! Type formulas as text:
//!
//! ```text
//! decl r: c1 c2
//! decl s: c1 c2
//! decl u: c2 c3
//! out: c1 c2 c3
//! attr A: r & !s || A: u
//! attr B: s & !r || B: true
//! ```
//!
//! One `decl` line per relation variable (sorted), one `out:` line, one
//! `attr` line per special attribute (sorted). Type variables are renamed
//! `c1, c2, ...` by first occurrence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use ratype_core::boolean::{parse_formula, simplify};
use ratype_core::{AttrName, BoolFormula, Expr, RelVar, TypeContext, TypeFormula, TypeVar};

use crate::{content_lines, FormatError};

/// Renders `phi`; with `simplified`, constraints and output conditions are
/// passed through the Boolean simplifier first.
pub fn render_type_formula(phi: &TypeFormula, simplified: bool) -> String {
    let order = phi.canonical_typevar_order();
    let name = |a: &TypeVar| {
        let pos = order
            .iter()
            .position(|b| b == a)
            .expect("known type variable");
        format!("c{}", pos + 1)
    };
    let list = |vars: &BTreeSet<TypeVar>| {
        let mut names: Vec<(usize, String)> = vars
            .iter()
            .map(|a| (order.iter().position(|b| b == a).unwrap_or(0), name(a)))
            .collect();
        names.sort();
        names
            .into_iter()
            .map(|(_, n)| format!(" {n}"))
            .collect::<String>()
    };
    let show = |f: &BoolFormula| {
        if simplified {
            simplify(f).to_string()
        } else {
            f.to_string()
        }
    };
    let mut out = String::new();
    for (r, vars) in &phi.context.decl {
        writeln!(out, "decl {r}:{}", list(vars)).expect("writing to a string");
    }
    writeln!(out, "out:{}", list(&phi.outvars)).expect("writing to a string");
    for (a, c) in &phi.context.constraint {
        writeln!(
            out,
            "attr {a}: {} || {a}: {}",
            show(c),
            show(&phi.outatt[a])
        )
        .expect("writing to a string");
    }
    out
}

fn typevar(line: usize, token: &str) -> Result<TypeVar, FormatError> {
    token
        .strip_prefix('c')
        .and_then(|n| n.parse::<u32>().ok())
        .map(TypeVar)
        .ok_or_else(|| {
            FormatError::new(
                line,
                format!("`{token}` is not a type variable (expected c1, c2, ...)"),
            )
        })
}

fn attr(line: usize, text: &str) -> Result<AttrName, FormatError> {
    text.trim()
        .parse()
        .map_err(|e| FormatError::new(line, format!("{e}")))
}

fn formula(line: usize, text: &str) -> Result<BoolFormula, FormatError> {
    parse_formula(text.trim()).map_err(|e| FormatError::new(line, format!("{e}")))
}

/// Reads a type formula for `expr`. The type variables of the formula are
/// those mentioned in `decl` and `out` lines.
pub fn parse_type_formula(text: &str, expr: Expr) -> Result<TypeFormula, FormatError> {
    let mut decl: BTreeMap<RelVar, BTreeSet<TypeVar>> = BTreeMap::new();
    let mut outvars = None;
    let mut constraint = BTreeMap::new();
    let mut outatt = BTreeMap::new();
    for (line, content) in content_lines(text) {
        if let Some(rest) = content.strip_prefix("decl ") {
            let (r, vars) = rest
                .split_once(':')
                .ok_or_else(|| FormatError::new(line, "expected `decl r: c1 c2 ...`"))?;
            let r: RelVar = r
                .trim()
                .parse()
                .map_err(|e| FormatError::new(line, format!("{e}")))?;
            let vars = vars
                .split_whitespace()
                .map(|t| typevar(line, t))
                .collect::<Result<_, _>>()?;
            if decl.insert(r.clone(), vars).is_some() {
                return Err(FormatError::new(
                    line,
                    format!("relation variable {r} declared twice"),
                ));
            }
        } else if let Some(rest) = content.strip_prefix("out:") {
            if outvars.is_some() {
                return Err(FormatError::new(line, "second `out:` line"));
            }
            outvars = Some(
                rest.split_whitespace()
                    .map(|t| typevar(line, t))
                    .collect::<Result<BTreeSet<_>, _>>()?,
            );
        } else if let Some(rest) = content.strip_prefix("attr ") {
            let bad = || {
                FormatError::new(
                    line,
                    "expected `attr A: <constraint> || A: <output condition>`",
                )
            };
            let (left, right) = rest.split_once("||").ok_or_else(bad)?;
            let (a, c) = left.split_once(':').ok_or_else(bad)?;
            let (a2, o) = right.split_once(':').ok_or_else(bad)?;
            let (a, a2) = (attr(line, a)?, attr(line, a2)?);
            if a != a2 {
                return Err(FormatError::new(
                    line,
                    format!("attribute {a} on the left but {a2} on the right"),
                ));
            }
            if constraint.insert(a.clone(), formula(line, c)?).is_some() {
                return Err(FormatError::new(
                    line,
                    format!("attribute {a} listed twice"),
                ));
            }
            outatt.insert(a, formula(line, o)?);
        } else {
            return Err(FormatError::new(
                line,
                "expected a `decl`, `out:` or `attr` line",
            ));
        }
    }
    let outvars = outvars.ok_or_else(|| FormatError::new(0, "missing `out:` line"))?;
    let typevars: BTreeSet<TypeVar> = decl.values().flatten().chain(&outvars).copied().collect();
    let context = TypeContext::new(typevars, decl, constraint)
        .map_err(|e| FormatError::new(0, format!("{e}")))?;
    Ok(TypeFormula {
        context,
        expr,
        outvars,
        outatt,
    })
}
