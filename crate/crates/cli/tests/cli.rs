use std::fs;
use std::path::PathBuf;
use std::process::Command;

use ratype_cli::formula_text::parse_type_formula;
use ratype_cli::run;
use ratype_core::formula::formulas_equivalent_bounded;
use ratype_core::{infer, parse_expr, Mode};

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn ratype(args: &[&str], stdin: &str) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ratype").chain(args.iter().copied());
    let code = run(argv, &mut stdin.as_bytes(), &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

/// Writes `content` to a file unique to this test and returns its path.
fn file(name: &str, content: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ratype-cli-tests-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

const RUNNING: &str = "select[B=C]((rename[A/B](r) union s) join u)\n";

#[test]
fn infer_running_example_matches_golden() {
    let out = ratype(&["infer", "-"], RUNNING);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let e = parse_expr(RUNNING).unwrap();
    let printed = parse_type_formula(&out.stdout, e.clone()).unwrap();
    let golden = parse_type_formula(
        "decl r: c1 c2\ndecl s: c1 c2\ndecl u: c2 c3\nout: c1 c2 c3\n\
         attr A: r & !s || A: u\nattr B: s & !r || B: true\n\
         attr C: (r <-> s) & (r | s | u) || C: true\n",
        e,
    )
    .unwrap();
    assert!(formulas_equivalent_bounded(&printed, &golden, 2).unwrap());
}

#[test]
fn infer_simplify_keeps_meaning() {
    let plain = ratype(&["infer", "-"], RUNNING);
    let simple = ratype(&["infer", "--simplify", "-"], RUNNING);
    assert_eq!(simple.code, 0);
    let e = parse_expr(RUNNING).unwrap();
    let a = parse_type_formula(&plain.stdout, e.clone()).unwrap();
    let b = parse_type_formula(&simple.stdout, e).unwrap();
    assert!(a.same_up_to_renaming(&b));
    assert!(simple.stdout.len() <= plain.stdout.len());
}

#[test]
fn infer_untypable() {
    let text = "(project[A](r) union project[B](s))";
    let complete = ratype(&["infer", "-"], text);
    assert_eq!(complete.code, 1);
    assert!(complete.stdout.starts_with("decl r:"));
    assert!(complete.stderr.contains("untypable"));

    let early = ratype(&["infer", "--early-stop", "-"], text);
    assert_eq!(early.code, 1);
    assert!(early.stdout.is_empty());
    assert!(early.stderr.contains("at 0..35"), "{}", early.stderr);
    assert!(early.stderr.contains(&"^".repeat(35)));
}

#[test]
fn check_prints_output_type_or_error() {
    let schema = file("schema.txt", "r: A C\ns: B C\nu: C D\n");
    let expr = file("running.ra", RUNNING);
    let out = ratype(
        &[
            "check",
            "--schema",
            schema.to_str().unwrap(),
            expr.to_str().unwrap(),
        ],
        "",
    );
    assert_eq!((out.code, out.stdout.as_str()), (0, "B C D\n"));

    let bad = file("bad-schema.txt", "r: A B\ns: B C\nu: C D\n");
    let out = ratype(
        &[
            "check",
            "--schema",
            bad.to_str().unwrap(),
            expr.to_str().unwrap(),
        ],
        "",
    );
    assert_eq!(out.code, 1);
    assert!(out.stdout.is_empty());
    assert!(out.stderr.contains("rename target B"), "{}", out.stderr);

    let malformed = file("malformed.txt", "r A\n");
    let out = ratype(
        &[
            "check",
            "--schema",
            malformed.to_str().unwrap(),
            expr.to_str().unwrap(),
        ],
        "",
    );
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("line 1"));
}

#[test]
fn typable_verdicts() {
    let out = ratype(&["typable", "-"], "(project[A](r) union project[B](s))");
    assert_eq!((out.code, out.stdout.as_str()), (1, "untypable\n"));
    let out = ratype(
        &["typable", "--oracle", "-"],
        "((r times s) join (r union s))",
    );
    assert_eq!((out.code, out.stdout.as_str()), (0, "typable\n"));
    let out = ratype(
        &["typable", "--oracle", "-"],
        "select[A=B](project[B,C](r))",
    );
    assert_eq!((out.code, out.stdout.as_str()), (1, "untypable\n"));
}

#[test]
fn solve_eqs_worked_example() {
    let out = ratype(
        &["solve-eqs", "-"],
        "L: a1 a2 a3\nR: b1 b2 b3\na1 = b1\na2 = b1 b2\n",
    );
    assert_eq!(out.code, 0);
    assert_eq!(
        out.stdout,
        "a1 = {}\na2 = c1\na3 = c2 c3\nb1 = {}\nb2 = c1\nb3 = c3 c4\n"
    );
    let out = ratype(&["solve-eqs", "-"], "L: a; R: a");
    assert_eq!(out.code, 2);
}

#[test]
fn eval_on_proof_database() {
    let db = file(
        "proof.db",
        "relation r (A, B)\nx, y\nu, v\n\nrelation s (B, C)\ny, z\n",
    );
    let out = ratype(&["eval", "--db", db.to_str().unwrap(), "-"], "(r join s)");
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout, "relation result (A, B, C)\nx, y, z\n");
    let out = ratype(&["eval", "--db", db.to_str().unwrap(), "-"], "(r union s)");
    assert_eq!(out.code, 1);
}

#[test]
fn equiv_verdicts() {
    let left = file("sel-left.ra", "select[A=B]((r times project[A,B,C](s)))");
    let right = file("sel-right.ra", "(r times select[A=B](project[A,B,C](s)))");
    let out = ratype(
        &[
            "equiv",
            left.to_str().unwrap(),
            right.to_str().unwrap(),
            "--attrs",
            "1",
        ],
        "",
    );
    assert_eq!(
        (out.code, out.stdout.as_str()),
        (0, "equivalent\n"),
        "{}",
        out.stderr
    );

    let left = file("pj-left.ra", "project[A]((r join project[A,B](s)))");
    let right = file("pj-right.ra", "project[A]((r join s))");
    let out = ratype(
        &["equiv", left.to_str().unwrap(), right.to_str().unwrap()],
        "",
    );
    assert_eq!(out.code, 1);
    assert!(out.stdout.starts_with("relation r ("), "{}", out.stdout);
    assert!(out.stderr.contains("not equivalent"));

    let out = ratype(
        &[
            "equiv",
            left.to_str().unwrap(),
            right.to_str().unwrap(),
            "--rows",
            "3",
        ],
        "",
    );
    assert_eq!(out.code, 2);
}

#[test]
fn usage_and_parse_errors() {
    assert_eq!(ratype(&[], "").code, 2);
    assert_eq!(ratype(&["frobnicate"], "").code, 2);
    let help = ratype(&["--help"], "");
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("infer"));
    let out = ratype(&["infer", "-"], "(r plus s)");
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("`plus`"));
    assert!(out.stderr.contains("   ^^^^"));
    assert_eq!(ratype(&["infer", "/nonexistent/file.ra"], "").code, 2);
}

#[test]
fn output_is_deterministic() {
    let text = "(select[A<5]((r join s)) join ((r times u) minus v))";
    let a = ratype(&["infer", "-"], text);
    let b = ratype(&["infer", "-"], text);
    assert_eq!(a.stdout, b.stdout);
    let phi = infer(&parse_expr(text).unwrap(), Mode::Complete).unwrap();
    let back = parse_type_formula(&a.stdout, phi.expr.clone()).unwrap();
    assert!(back.same_up_to_renaming(&phi));
}

#[test]
fn binary_exit_codes() {
    let expr = file("untypable.ra", "(project[A](r) union project[B](s))");
    let status = Command::new(env!("CARGO_BIN_EXE_ratype"))
        .args(["typable", expr.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
    assert_eq!(String::from_utf8_lossy(&status.stdout), "untypable\n");
}
