//! The `pwamap v1` text format.
//!
//! ```text
//! pwamap v1
//! # comment
//! 0/1 0/1
//! 1/2 1/1
//! 1/1 0/1
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::map::PwaMap;
use crate::rational::{fmt_rational, parse_rational};

pub const HEADER: &str = "pwamap v1";

pub fn serialize(f: &PwaMap) -> String {
    let mut out = String::with_capacity(16 * f.len() + 16);
    out.push_str(HEADER);
    out.push('\n');
    for (x, y) in f.nodes() {
        let _ = writeln!(out, "{} {}", fmt_rational(x), fmt_rational(y));
    }
    out
}

pub fn parse(text: &str) -> Result<PwaMap> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, l)) if l.split_whitespace().collect::<Vec<_>>() == ["pwamap", "v1"] => {}
        Some((line, l)) => {
            return Err(Error::Parse {
                line,
                msg: format!("expected header {HEADER:?}, found {l:?}"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "empty input".into(),
            })
        }
    }
    let mut nodes = Vec::new();
    for (line, l) in lines {
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line,
                msg: format!("expected two fields `x y`, found {}", fields.len()),
            });
        }
        let at = |e: Error| match e {
            Error::Parse { msg, .. } => Error::Parse { line, msg },
            other => other,
        };
        let x = parse_rational(fields[0]).map_err(at)?;
        let y = parse_rational(fields[1]).map_err(at)?;
        nodes.push((x, y));
    }
    PwaMap::new(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::desk;

    #[test]
    fn round_trip_is_exact() {
        for name in desk::NAMES {
            let f = desk::by_name(name).unwrap();
            assert_eq!(parse(&serialize(&f)).unwrap(), f, "{name}");
        }
    }

    #[test]
    fn tent_text() {
        assert_eq!(
            serialize(&desk::tent()),
            "pwamap v1\n0/1 0/1\n1/2 1/1\n1/1 0/1\n"
        );
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# tent\npwamap v1\n\n0/1 0/1\n# peak\n1/2 1\n1/1   0/1\n";
        assert_eq!(parse(text).unwrap(), desk::tent());
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse("pwamap v1\n0/1 0/1\n1/x 1/1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(matches!(
            parse("pwamap v2\n").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
        assert!(matches!(
            parse("pwamap v1\n0/1 0/1\n1/1\n").unwrap_err(),
            Error::Parse { line: 3, .. }
        ));
        assert!(matches!(
            parse("pwamap v1\n0/1 0/1\n1/2 1/1\n").unwrap_err(),
            Error::InvalidMap(_)
        ));
    }
}
