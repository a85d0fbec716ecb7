//! Databases as relation blocks:
//!
//! ```text
//! relation r (A, B)
//! x, y
//! u, v
//! relation t ()
//! ()
//! ```
//!
//! A nullary relation holds either nothing or the empty tuple, written `()`.

use ratype_core::{AttrName, Database, RelVar, Relation, Value};

use crate::{content_lines, FormatError};

/// Header line, relation variable, attributes and rows of one block.
type Block = (usize, RelVar, Vec<AttrName>, Vec<Vec<Value>>);

fn header(line: usize, rest: &str) -> Result<(RelVar, Vec<AttrName>), FormatError> {
    let bad = || FormatError::new(line, "expected `relation r (A, B, ...)`");
    let (name, attrs) = rest.split_once('(').ok_or_else(bad)?;
    let attrs = attrs.trim().strip_suffix(')').ok_or_else(bad)?;
    let r: RelVar = name
        .trim()
        .parse()
        .map_err(|e| FormatError::new(line, format!("{e}")))?;
    let attrs = if attrs.trim().is_empty() {
        Vec::new()
    } else {
        attrs
            .split(',')
            .map(|a| {
                a.trim()
                    .parse()
                    .map_err(|e| FormatError::new(line, format!("{e}")))
            })
            .collect::<Result<_, _>>()?
    };
    Ok((r, attrs))
}

fn row(line: usize, content: &str, arity: usize) -> Result<Vec<Value>, FormatError> {
    if arity == 0 {
        return if content == "()" {
            Ok(Vec::new())
        } else {
            Err(FormatError::new(
                line,
                "a nullary relation's only row is `()`",
            ))
        };
    }
    let values: Vec<&str> = content.split(',').map(str::trim).collect();
    if values.iter().any(|v| v.is_empty()) {
        return Err(FormatError::new(line, "empty value"));
    }
    if values.len() != arity {
        return Err(FormatError::new(
            line,
            format!(
                "row has {} values but the header has {arity} attributes",
                values.len()
            ),
        ));
    }
    Ok(values.into_iter().map(Value::new).collect())
}

pub fn parse_database(text: &str) -> Result<Database, FormatError> {
    let mut db = Database::new();
    let mut current: Option<Block> = None;
    let finish = |db: &mut Database, block: Option<Block>| -> Result<(), FormatError> {
        if let Some((line, r, attrs, rows)) = block {
            let rel = Relation::from_rows(&attrs, rows)
                .map_err(|e| FormatError::new(line, format!("{e}")))?;
            if db.get(&r).is_some() {
                return Err(FormatError::new(
                    line,
                    format!("relation {r} defined twice"),
                ));
            }
            db.insert(r, rel);
        }
        Ok(())
    };
    for (line, content) in content_lines(text) {
        if let Some(rest) = content.strip_prefix("relation ") {
            finish(&mut db, current.take())?;
            let (r, attrs) = header(line, rest)?;
            current = Some((line, r, attrs, Vec::new()));
        } else {
            let Some((_, _, attrs, rows)) = current.as_mut() else {
                return Err(FormatError::new(
                    line,
                    "row before the first `relation` header",
                ));
            };
            rows.push(row(line, content, attrs.len())?);
        }
    }
    finish(&mut db, current)?;
    Ok(db)
}

/// Renders one relation block; columns appear in sorted attribute order.
pub fn render_relation(name: &str, rel: &Relation) -> String {
    let names: Vec<&str> = rel.attrs().iter().map(AttrName::as_str).collect();
    let mut out = format!("relation {name} ({})\n", names.join(", "));
    for row in rel.rows() {
        if row.is_empty() {
            out.push_str("()\n");
        } else {
            let values: Vec<&str> = row.iter().map(Value::as_str).collect();
            out.push_str(&values.join(", "));
            out.push('\n');
        }
    }
    out
}

pub fn render_database(db: &Database) -> String {
    db.iter()
        .map(|(r, rel)| render_relation(r.as_str(), rel))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const PROOF_DB: &str = "relation r (A, B)\nx, y\nu, v\n\nrelation s (B, C)\ny, z\n";

    #[test]
    fn reads_blocks() {
        let db = parse_database(PROOF_DB).unwrap();
        let r = db.get(&"r".parse().unwrap()).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(db.schema().to_string(), "r: A B\ns: B C\n");
        assert_eq!(
            render_database(&db),
            "relation r (A, B)\nu, v\nx, y\nrelation s (B, C)\ny, z\n"
        );
    }

    #[test]
    fn empty_and_nullary_blocks() {
        let db = parse_database("relation r (A, B)\nrelation t ()\n()\nrelation e ()\n").unwrap();
        assert!(db.get(&"r".parse().unwrap()).unwrap().is_empty());
        assert_eq!(db.get(&"t".parse().unwrap()).unwrap().len(), 1);
        assert!(db.get(&"e".parse().unwrap()).unwrap().is_empty());
        assert_eq!(parse_database(&render_database(&db)).unwrap(), db);
    }

    #[test]
    fn header_order_is_respected() {
        let db = parse_database("relation r (B, A)\n1, 2\n").unwrap();
        assert_eq!(render_database(&db), "relation r (A, B)\n2, 1\n");
    }

    #[test]
    fn errors() {
        assert_eq!(
            parse_database("relation r (A, B)\nx\n").unwrap_err().line,
            2
        );
        assert_eq!(
            parse_database("relation r (A)\nrelation r (B)\n")
                .unwrap_err()
                .line,
            2
        );
        assert!(parse_database("relation r (A, A)\n").is_err());
        assert!(parse_database("x, y\n").is_err());
        assert!(parse_database("relation r A, B\n").is_err());
        assert!(parse_database("relation r (A, B)\nx, \n").is_err());
        assert!(parse_database("relation t ()\nx\n").is_err());
    }

    proptest! {
        #[test]
        fn render_then_parse(rows in proptest::collection::vec(("[a-z0-9]{1,3}", "[a-z0-9]{1,3}"), 0..5)) {
            let text: String = core::iter::once("relation r (A, B)\n".to_string())
                .chain(rows.iter().map(|(a, b)| format!("{a}, {b}\n")))
                .collect();
            let db = parse_database(&text).unwrap();
            prop_assert_eq!(parse_database(&render_database(&db)).unwrap(), db);
        }
    }
}
