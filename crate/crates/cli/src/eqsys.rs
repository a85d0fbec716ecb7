//! Set-equation systems:
//!
//! ```text
//! L: a1 a2 a3
//! R: b1 b2 b3
//! a1 = b1
//! a2 = b1 b2
//! ```
//!
//! Statements are separated by newlines or `;`. The pools come first. `{}`
//! (or nothing) denotes an empty side.

use std::collections::BTreeSet;

use ratype_core::equations::render_solution;
use ratype_core::{EqVar, EquationSystem, SymbolicSolution};

use crate::{content_lines, FormatError};

fn vars(line: usize, text: &str) -> Result<BTreeSet<EqVar>, FormatError> {
    text.split_whitespace()
        .filter(|t| *t != "{}")
        .map(|t| {
            t.parse()
                .map_err(|e| FormatError::new(line, format!("{e}")))
        })
        .collect()
}

pub fn parse_system(text: &str) -> Result<EquationSystem, FormatError> {
    let mut left = None;
    let mut right = None;
    let mut sys: Option<EquationSystem> = None;
    for (line, content) in content_lines(text) {
        for stmt in content.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            if let Some(rest) = stmt.strip_prefix("L:") {
                if left.is_some() || sys.is_some() {
                    return Err(FormatError::new(
                        line,
                        "the left pool must be declared once, before any equation",
                    ));
                }
                left = Some(vars(line, rest)?);
            } else if let Some(rest) = stmt.strip_prefix("R:") {
                if right.is_some() || sys.is_some() {
                    return Err(FormatError::new(
                        line,
                        "the right pool must be declared once, before any equation",
                    ));
                }
                right = Some(vars(line, rest)?);
            } else if let Some((lhs, rhs)) = stmt.split_once('=') {
                if sys.is_none() {
                    let (Some(l), Some(r)) = (left.take(), right.take()) else {
                        return Err(FormatError::new(line, "equation before both `L:` and `R:`"));
                    };
                    sys = Some(
                        EquationSystem::new(l, r)
                            .map_err(|e| FormatError::new(line, format!("{e}")))?,
                    );
                }
                let s = sys.as_mut().expect("created above");
                s.add_equation(vars(line, lhs)?, vars(line, rhs)?)
                    .map_err(|e| FormatError::new(line, format!("{e}")))?;
            } else {
                return Err(FormatError::new(
                    line,
                    format!("expected `L:`, `R:` or an equation, found `{stmt}`"),
                ));
            }
        }
    }
    match sys {
        Some(sys) => Ok(sys),
        None => EquationSystem::new(left.unwrap_or_default(), right.unwrap_or_default())
            .map_err(|e| FormatError::new(0, format!("{e}"))),
    }
}

/// One `x = c1 c2` line per pool variable, `{}` for an empty image, with
/// fresh variables numbered by first occurrence.
pub fn render_system_solution(sys: &EquationSystem, sol: &SymbolicSolution) -> String {
    render_solution(sys, sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ratype_core::solve;

    fn solved(text: &str) -> String {
        let sys = parse_system(text).unwrap();
        let sol = solve(&sys, &BTreeSet::new()).unwrap();
        render_system_solution(&sys, &sol)
    }

    #[test]
    fn trivial_system() {
        assert_eq!(solved("L: a\nR: b\n"), "a = c1 c2\nb = c2 c3\n");
    }

    #[test]
    fn worked_system_on_one_line() {
        assert_eq!(
            solved("L: a1 a2 a3; R: b1 b2 b3; a1 = b1; a2 = b1 b2"),
            "a1 = {}\na2 = c1\na3 = c2 c3\nb1 = {}\nb2 = c1\nb3 = c3 c4\n"
        );
    }

    #[test]
    fn empty_sides_and_systems() {
        assert_eq!(solved(""), "");
        assert_eq!(solved("L: a; R: b; a = {}"), "a = {}\nb = c1\n");
    }

    #[test]
    fn errors() {
        assert!(parse_system("L: a; R: a").is_err());
        assert!(parse_system("L: a; R: b; b = a").is_err());
        assert!(parse_system("a = b").is_err());
        assert_eq!(parse_system("L: a\nR: b\nfoo").unwrap_err().line, 3);
        assert!(parse_system("L: a; R: b; a = b; L: c").is_err());
    }
}
