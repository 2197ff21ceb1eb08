//! Plain-text coefficient lists.
//!
//! Whitespace or newline separated decimal reals. A `#` starts a comment that
//! runs to the end of the line. The number of values is the number of cells.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: cannot parse {token:?} as a real number")]
    BadToken { line: usize, token: String },
    #[error("line {line}: {token:?} is not finite")]
    NonFinite { line: usize, token: String },
    #[error("no coefficients found")]
    Empty,
    #[error("reading {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub fn parse(text: &str) -> Result<Vec<f64>, ParseError> {
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        for token in line.split_whitespace() {
            let value: f64 = token.parse().map_err(|_| ParseError::BadToken {
                line: idx + 1,
                token: token.to_string(),
            })?;
            if !value.is_finite() {
                return Err(ParseError::NonFinite {
                    line: idx + 1,
                    token: token.to_string(),
                });
            }
            values.push(value);
        }
    }
    if values.is_empty() {
        return Err(ParseError::Empty);
    }
    Ok(values)
}

pub fn read(path: &Path) -> Result<Vec<f64>, ParseError> {
    let text = std::fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

/// Five values per line in shortest round-trip notation, so
/// `parse(&format(v, ..)) == v` bit for bit.
pub fn format(values: &[f64], header: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(header) = header {
        for line in header.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    for row in values.chunks(5) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_layout() {
        let text = "# header\n 1.5  2e-3\n\n-0.25 # trailing\n#3.0\n";
        assert_eq!(parse(text).unwrap(), vec![1.5, 2e-3, -0.25]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse("1.0\n2.0 abc\n") {
            Err(ParseError::BadToken { line, token }) => {
                assert_eq!(line, 2);
                assert_eq!(token, "abc");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("# only comments\n\n"), Err(ParseError::Empty)));
        assert!(matches!(parse("inf"), Err(ParseError::NonFinite { line: 1, .. })));
    }

    #[test]
    fn formatted_text_is_a_fixed_point() {
        let values = vec![0.1, 1.0 / 3.0, -2.5e-300, 0.0, 7.0, 1e21];
        let text = format(&values, Some("two\nlines"));
        let back = parse(&text).unwrap();
        assert_eq!(back, values);
        assert_eq!(format(&back, Some("two\nlines")), text);
    }
}
