//! Line-oriented MCD text format.
//!
//! ```text
//! mcd 1
//! cables 2
//! cable 1: X1@+1 X2@-1
//! cable 2: X1@-1 X2@+1
//! order: 1L 2L 2R 1R
//! terminated: 3
//! ```
//!
//! `#` starts a comment line. The `terminated:` line is optional. Serialization
//! is canonical (cables by id, visits left to right) so that parsing and
//! serializing are mutually inverse on canonical text.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use super::{
    validate, CableId, CrossingId, Diagram, Endpoint, SegmentDepth, Side, ValidationReport, Visit,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {reason}")]
    Syntax {
        line: usize,
        column: usize,
        reason: String,
    },
    #[error("invalid diagram: {0}")]
    Invalid(String),
}

impl ParseError {
    fn at(line: usize, column: usize, reason: impl Into<String>) -> Self {
        ParseError::Syntax {
            line,
            column,
            reason: reason.into(),
        }
    }
}

impl From<ValidationReport> for ParseError {
    fn from(r: ValidationReport) -> Self {
        let msgs: Vec<String> = r.violations.iter().map(ToString::to_string).collect();
        ParseError::Invalid(msgs.join("; "))
    }
}

pub fn serialize(d: &Diagram) -> String {
    let mut s = String::new();
    s.push_str("mcd 1\n");
    let _ = writeln!(s, "cables {}", d.cables().len());
    for (id, visits) in d.cables() {
        let _ = write!(s, "cable {id}:");
        for v in visits {
            let _ = write!(s, " X{}@{}", v.crossing.0, v.depth);
        }
        s.push('\n');
    }
    s.push_str("order:");
    for e in d.endpoint_order() {
        let _ = write!(s, " {e}");
    }
    s.push('\n');
    if !d.terminated().is_empty() {
        s.push_str("terminated:");
        for t in d.terminated() {
            let _ = write!(s, " {t}");
        }
        s.push('\n');
    }
    s
}

/// A non-comment line with its 1-based number.
struct Line<'a> {
    no: usize,
    text: &'a str,
}

/// Whitespace-separated words with their 1-based columns.
fn words(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split(' ')
        .scan(1usize, |col, w| {
            let c = *col;
            *col += w.len() + 1;
            Some((c, w))
        })
        .filter(|(_, w)| !w.is_empty())
}

fn parse_u32(s: &str, line: usize, col: usize, what: &str) -> Result<u32, ParseError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseError::at(
            line,
            col,
            format!("expected {what}, found `{s}`"),
        ));
    }
    s.parse()
        .map_err(|_| ParseError::at(line, col, format!("{what} out of range: `{s}`")))
}

fn parse_token(tok: &str, line: usize, col: usize) -> Result<Visit, ParseError> {
    let body = tok.strip_prefix('X').ok_or_else(|| {
        ParseError::at(
            line,
            col,
            format!("expected crossing token `X<id>@<depth>`, found `{tok}`"),
        )
    })?;
    let (id, depth) = body
        .split_once('@')
        .ok_or_else(|| ParseError::at(line, col, format!("missing `@` in `{tok}`")))?;
    let id = parse_u32(id, line, col + 1, "crossing id")?;
    let dcol = col + 2 + id.to_string().len();
    let depth = match depth.as_bytes().first() {
        Some(b'+') if &depth[1..] == "1" => SegmentDepth::TOP,
        Some(b'-') => {
            let m = parse_u32(&depth[1..], line, dcol + 1, "depth")?;
            if m == 0 || m > i32::MAX as u32 {
                return Err(ParseError::at(line, dcol, format!("bad depth `{depth}`")));
            }
            SegmentDepth::under(m)
        }
        _ => {
            return Err(ParseError::at(
                line,
                dcol,
                format!("depth must be `+1` or `-m`, found `{depth}`"),
            ))
        }
    };
    Ok(Visit::new(CrossingId(id), depth))
}

fn parse_endpoint(tok: &str, line: usize, col: usize) -> Result<Endpoint, ParseError> {
    let (num, side) = match tok.as_bytes().last() {
        Some(b'L') => (&tok[..tok.len() - 1], Side::L),
        Some(b'R') => (&tok[..tok.len() - 1], Side::R),
        _ => {
            return Err(ParseError::at(
                line,
                col,
                format!("endpoint must end in L or R, found `{tok}`"),
            ))
        }
    };
    let cable = CableId(parse_u32(num, line, col, "cable id")?);
    Ok(Endpoint { cable, side })
}

fn expect_keyword<'a>(line: &Line<'a>, kw: &str) -> Result<&'a str, ParseError> {
    line.text
        .strip_prefix(kw)
        .ok_or_else(|| ParseError::at(line.no, 1, format!("expected `{}`", kw.trim_end())))
}

pub fn parse(text: &str) -> Result<Diagram, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, t)| Line {
            no: i + 1,
            text: t.trim_end_matches('\r'),
        })
        .filter(|l| !l.text.trim().is_empty() && !l.text.starts_with('#'))
        .peekable();
    let eof = |what: &str| {
        ParseError::at(
            text.lines().count() + 1,
            1,
            format!("unexpected end of input, expected {what}"),
        )
    };

    let header = lines.next().ok_or_else(|| eof("`mcd 1`"))?;
    if header.text.trim() != "mcd 1" {
        return Err(ParseError::at(header.no, 1, "expected `mcd 1` header"));
    }

    let count_line = lines.next().ok_or_else(|| eof("`cables <n>`"))?;
    let rest = expect_keyword(&count_line, "cables ")?;
    let n = parse_u32(rest.trim(), count_line.no, 8, "cable count")? as usize;

    let mut cables: BTreeMap<CableId, Vec<Visit>> = BTreeMap::new();
    for _ in 0..n {
        let l = lines.next().ok_or_else(|| eof("`cable <id>:` line"))?;
        let rest = expect_keyword(&l, "cable ")?;
        let (id, toks) = rest
            .split_once(':')
            .ok_or_else(|| ParseError::at(l.no, 7, "missing `:` after cable id"))?;
        let id = CableId(parse_u32(id, l.no, 7, "cable id")?);
        let base = 7 + rest.len() - toks.len();
        let visits = words(toks)
            .map(|(c, w)| parse_token(w, l.no, base + c - 1))
            .collect::<Result<Vec<_>, _>>()?;
        if cables.insert(id, visits).is_some() {
            return Err(ParseError::at(l.no, 7, format!("cable {id} defined twice")));
        }
    }

    let mut order = Vec::new();
    let mut terminated = BTreeSet::new();
    let mut saw_order = false;
    for l in lines {
        if let Some(rest) = l.text.strip_prefix("order:") {
            if saw_order {
                return Err(ParseError::at(l.no, 1, "duplicate `order:` line"));
            }
            saw_order = true;
            for (c, w) in words(rest) {
                order.push(parse_endpoint(w, l.no, 6 + c)?);
            }
        } else if let Some(rest) = l.text.strip_prefix("terminated:") {
            for (c, w) in words(rest) {
                let id = CableId(parse_u32(w, l.no, 11 + c, "cable id")?);
                if !terminated.insert(id) {
                    return Err(ParseError::at(
                        l.no,
                        11 + c,
                        format!("cable {id} terminated twice"),
                    ));
                }
            }
        } else if l.text.starts_with("cable ") {
            return Err(ParseError::at(
                l.no,
                1,
                format!("more cable lines than the declared {n}"),
            ));
        } else {
            return Err(ParseError::at(
                l.no,
                1,
                "expected `order:` or `terminated:`",
            ));
        }
    }

    let d = Diagram::from_parts(cables, order, terminated);
    let report = validate(&d);
    if !report.is_valid() {
        return Err(report.into());
    }
    Ok(d)
}
