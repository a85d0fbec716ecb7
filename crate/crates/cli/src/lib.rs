//! Text formats and the `ratype` command-line front end.
//!
//! Formats:
//!
//! - [`schema`]: type assignments, one `r: A B` line per relation variable.
//! - [`database`]: `relation r (A, B)` blocks followed by comma-separated rows.
//! - [`eqsys`]: set-equation systems, `L: a1 a2; R: b1 b2; a1 = b1`.
//! - [`formula_text`]: type formulas, `decl` / `out` / `attr` lines.
//!
//! [`run`] dispatches a command line against explicit streams, so the binary
//! and the tests share one code path.

pub mod app;
pub mod database;
pub mod eqsys;
pub mod formula_text;
pub mod schema;

use thiserror::Error;

pub use app::run;

/// A malformed input line. Lines are numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

impl FormatError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        FormatError {
            line,
            message: message.into(),
        }
    }
}

/// Non-blank lines with their 1-based numbers, trimmed, with `#` comments
/// removed.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}
