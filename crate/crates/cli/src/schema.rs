//! Type assignments: one `r: A B C` line per relation variable; `r:` alone
//! is the empty type.

use ratype_core::{AttrName, RelVar, RelationType, TypeAssignment};

use crate::{content_lines, FormatError};

pub fn parse_schema(text: &str) -> Result<TypeAssignment, FormatError> {
    let mut ta = TypeAssignment::new();
    for (line, content) in content_lines(text) {
        let (name, attrs) = content
            .split_once(':')
            .ok_or_else(|| FormatError::new(line, "expected `r: A B ...`"))?;
        let r: RelVar = name
            .trim()
            .parse()
            .map_err(|e| FormatError::new(line, format!("{e}")))?;
        let mut ty = RelationType::new();
        for a in attrs.split_whitespace() {
            let a: AttrName = a
                .parse()
                .map_err(|e| FormatError::new(line, format!("{e}")))?;
            if !ty.insert(a.clone()) {
                return Err(FormatError::new(
                    line,
                    format!("attribute {a} listed twice"),
                ));
            }
        }
        if ta.insert(r.clone(), ty).is_some() {
            return Err(FormatError::new(
                line,
                format!("relation variable {r} declared twice"),
            ));
        }
    }
    Ok(ta)
}

pub fn render_schema(ta: &TypeAssignment) -> String {
    ta.to_string()
}
