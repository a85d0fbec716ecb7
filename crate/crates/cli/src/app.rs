//! Command dispatch. Results go to `stdout`, diagnostics to `stderr`.
//!
//! Exit status: 0 for success or an affirmative answer, 1 for a negative
//! answer (untypable, type error, not equivalent), 2 for usage and input
//! errors.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use ratype_core::{
    evaluate, infer, parse_expr, poly_equiv_bounded, solve, typable, typable_bruteforce, typecheck,
    EquivVerdict, Expr, Mode, Span,
};

use crate::database::{parse_database, render_database, render_relation};
use crate::eqsys::{parse_system, render_system_solution};
use crate::formula_text::render_type_formula;
use crate::schema::{parse_schema, render_schema};

#[derive(Debug, Parser)]
#[command(
    name = "ratype",
    version,
    about = "Polymorphic type inference for relational algebra"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the principal type formula of an expression.
    Infer {
        /// Expression file, `-` for stdin.
        expr: PathBuf,
        /// Stop at the first operator whose constraints become unsatisfiable.
        #[arg(long)]
        early_stop: bool,
        /// Simplify printed constraints and output conditions.
        #[arg(long)]
        simplify: bool,
    },
    /// Type-check an expression against a schema and print its output type.
    Check {
        #[arg(long)]
        schema: PathBuf,
        expr: PathBuf,
    },
    /// Decide whether an expression is well-typed under some schema.
    Typable {
        expr: PathBuf,
        /// Cross-check against brute-force enumeration of schemas.
        #[arg(long)]
        oracle: bool,
    },
    /// Solve a system of set equations.
    SolveEqs { system: PathBuf },
    /// Evaluate an expression on a database.
    Eval {
        #[arg(long)]
        db: PathBuf,
        expr: PathBuf,
    },
    /// Search for a difference between two expressions within bounds.
    Equiv {
        left: PathBuf,
        right: PathBuf,
        /// Fresh attributes beyond those the expressions mention (at most 4).
        #[arg(long, default_value_t = 2)]
        attrs: usize,
        /// Distinct data values (at most 3).
        #[arg(long, default_value_t = 2)]
        values: usize,
        /// Rows per relation (at most 2).
        #[arg(long, default_value_t = 2)]
        rows: usize,
    },
}

/// A failed command: the exit status and the message for `stderr`.
struct Failure {
    code: i32,
    message: String,
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn negative(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
}

impl Io<'_> {
    fn read(&mut self, path: &PathBuf) -> Result<String, Failure> {
        if path.as_os_str() == "-" {
            let mut text = String::new();
            self.stdin
                .read_to_string(&mut text)
                .map_err(|e| input_error(format!("error: cannot read stdin: {e}")))?;
            Ok(text)
        } else {
            fs::read_to_string(path)
                .map_err(|e| input_error(format!("error: cannot read {}: {e}", path.display())))
        }
    }

    fn expr(&mut self, path: &PathBuf) -> Result<(String, Expr), Failure> {
        let text = self.read(path)?;
        match parse_expr(&text) {
            Ok(e) => Ok((text, e)),
            Err(err) => Err(input_error(format!(
                "error: {}: {err}\n{}",
                path.display(),
                excerpt(&text, err.span)
            ))),
        }
    }

    fn print(&mut self, text: &str) -> Result<(), Failure> {
        self.stdout
            .write_all(text.as_bytes())
            .map_err(|e| input_error(format!("error: cannot write output: {e}")))
    }
}

/// The source line containing `span.start` with carets under the span.
pub fn excerpt(text: &str, span: Span) -> String {
    let start = span.start.min(text.len());
    let line_start = text[..start].rfind('\n').map_or(0, |i| i + 1);
    let line_end = text[start..].find('\n').map_or(text.len(), |i| start + i);
    let line = &text[line_start..line_end];
    let col = text[line_start..start].chars().count();
    let end = span.end.clamp(start, line_end);
    let width = text[start..end].chars().count().max(1);
    format!("  {line}\n  {}{}", " ".repeat(col), "^".repeat(width))
}

fn execute(command: Command, io: &mut Io<'_>) -> Result<i32, Failure> {
    match command {
        Command::Infer {
            expr,
            early_stop,
            simplify,
        } => {
            let (text, e) = io.expr(&expr)?;
            let mode = if early_stop {
                Mode::EarlyStop
            } else {
                Mode::Complete
            };
            match infer(&e, mode) {
                Ok(phi) => {
                    io.print(&render_type_formula(&phi, simplify))?;
                    if let Some(a) = phi.context.first_unsatisfiable(
                        &phi.context.constraint.keys().cloned().collect::<Vec<_>>(),
                    ) {
                        return Err(negative(format!(
                            "untypable: the constraint on attribute {a} is unsatisfiable"
                        )));
                    }
                    Ok(0)
                }
                Err(diag) => Err(negative(format!("{diag}\n{}", excerpt(&text, diag.at)))),
            }
        }
        Command::Check { schema, expr } => {
            let schema_text = io.read(&schema)?;
            let ta = parse_schema(&schema_text)
                .map_err(|e| input_error(format!("error: {}: {e}", schema.display())))?;
            let (text, e) = io.expr(&expr)?;
            match typecheck(&ta, &e) {
                Ok(ty) => {
                    let names: Vec<&str> = ty.iter().map(|a| a.as_str()).collect();
                    io.print(&format!("{}\n", names.join(" ")))?;
                    Ok(0)
                }
                Err(err) => Err(negative(format!("{err}\n{}", excerpt(&text, err.span)))),
            }
        }
        Command::Typable { expr, oracle } => {
            let (_, e) = io.expr(&expr)?;
            let verdict = typable(&e);
            if oracle {
                let witness =
                    typable_bruteforce(&e).map_err(|err| input_error(format!("error: {err}")))?;
                if witness.is_some() != verdict {
                    return Err(input_error(format!(
                        "error: inference says {} but brute force says {}",
                        if verdict { "typable" } else { "untypable" },
                        if witness.is_some() {
                            "typable"
                        } else {
                            "untypable"
                        },
                    )));
                }
            }
            if verdict {
                io.print("typable\n")?;
                Ok(0)
            } else {
                io.print("untypable\n")?;
                Ok(1)
            }
        }
        Command::SolveEqs { system } => {
            let text = io.read(&system)?;
            let sys = parse_system(&text)
                .map_err(|e| input_error(format!("error: {}: {e}", system.display())))?;
            let sol =
                solve(&sys, &BTreeSet::new()).map_err(|e| input_error(format!("error: {e}")))?;
            io.print(&render_system_solution(&sys, &sol))?;
            Ok(0)
        }
        Command::Eval { db, expr } => {
            let db_text = io.read(&db)?;
            let database = parse_database(&db_text)
                .map_err(|e| input_error(format!("error: {}: {e}", db.display())))?;
            let (text, e) = io.expr(&expr)?;
            match evaluate(&database, &e) {
                Ok(rel) => {
                    io.print(&render_relation("result", &rel))?;
                    Ok(0)
                }
                Err(err) => Err(negative(format!("{err}\n{}", excerpt(&text, err.span)))),
            }
        }
        Command::Equiv {
            left,
            right,
            attrs,
            values,
            rows,
        } => {
            let (_, e1) = io.expr(&left)?;
            let (_, e2) = io.expr(&right)?;
            match poly_equiv_bounded(&e1, &e2, attrs, values, rows) {
                Ok(EquivVerdict::Equivalent) => {
                    io.print("equivalent\n")?;
                    Ok(0)
                }
                Ok(EquivVerdict::Counterexample { db, left, right }) => {
                    io.print(&render_database(&db))?;
                    Err(negative(format!(
                        "not equivalent: the results differ on this database\n{}{}",
                        render_relation("left", &left),
                        render_relation("right", &right)
                    )))
                }
                Ok(EquivVerdict::DomainMismatch {
                    schema,
                    left,
                    right,
                }) => {
                    io.print(&render_schema(&schema))?;
                    let show = |t: &Option<ratype_core::RelationType>| match t {
                        Some(ty) => format!(
                            "output type {{{}}}",
                            ty.iter().map(|a| a.as_str()).collect::<Vec<_>>().join(", ")
                        ),
                        None => "not well-typed".to_string(),
                    };
                    Err(negative(format!(
                        "not equivalent: under this schema the left expression is {} and the right is {}",
                        show(&left),
                        show(&right)
                    )))
                }
                Err(err) => Err(input_error(format!("error: {err}"))),
            }
        }
    }
}

/// Runs the command line `args` (program name first).
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let text = err.render().to_string();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    let mut io = Io { stdin, stdout };
    match execute(cli.command, &mut io) {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            let _ = writeln!(stderr, "{message}");
            code
        }
    }
}
