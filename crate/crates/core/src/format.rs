//! Text formats: graphs (`.edg`), joint tables (`.jpt`), statements and
//! statement lists (`.stm`).
//!
//! All formats are line based, whitespace separated and allow `#` comments.
//! The formatters emit a canonical form: comments and blank lines dropped,
//! single spaces, edges and rows in id order.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::graph::{EDag, Edge, GraphError};
use crate::oracle::{JointTable, OracleError, MAX_ROWS};
use crate::statement::Statement;
use crate::varset::{Universe, VarSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Table(#[from] OracleError),
}

fn syntax<T>(line: usize, msg: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::Syntax {
        line,
        msg: msg.into(),
    })
}

/// Non-empty lines with comments removed, numbered from 1.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn header<'a>(
    it: &mut impl Iterator<Item = (usize, &'a str)>,
) -> Result<(usize, Vec<&'a str>), FormatError> {
    let Some((line, l)) = it.next() else {
        return syntax(1, "missing `vars` header");
    };
    let mut tokens = l.split_whitespace();
    if tokens.next() != Some("vars") {
        return syntax(line, "expected `vars` header");
    }
    Ok((line, tokens.collect()))
}

fn universe(line: usize, names: Vec<String>) -> Result<Universe, FormatError> {
    Universe::new(names).map_err(|e| FormatError::Syntax {
        line,
        msg: e.to_string(),
    })
}

pub fn parse_edg(text: &str) -> Result<EDag, FormatError> {
    let mut it = lines(text);
    let (line, names) = header(&mut it)?;
    let u = universe(line, names.into_iter().map(String::from).collect())?;
    let mut edges = Vec::new();
    for (line, l) in it {
        let tokens: Vec<&str> = l.split_whitespace().collect();
        let [a, arrow, b] = tokens[..] else {
            return syntax(line, "expected `<a> -> <b>` or `<a> <-> <b>`");
        };
        let id = |n: &str| {
            u.lookup(n).ok_or_else(|| FormatError::Syntax {
                line,
                msg: format!("undeclared vertex `{n}`"),
            })
        };
        let (a, b) = (id(a)?, id(b)?);
        edges.push(match arrow {
            "->" => Edge::Directed { tail: a, head: b },
            "<->" if a == b => Edge::Bidirected(a, b),
            "<->" => Edge::bidirected(a, b),
            other => return syntax(line, format!("unknown edge kind `{other}`")),
        });
    }
    Ok(EDag::new(u, edges)?)
}

pub fn format_edg(g: &EDag) -> String {
    let mut out = String::from("vars");
    for n in g.universe().names() {
        out.push(' ');
        out.push_str(n);
    }
    out.push('\n');
    for e in g.edges() {
        let _ = match e {
            Edge::Directed { tail, head } => writeln!(out, "{} -> {}", g.name(tail), g.name(head)),
            Edge::Bidirected(a, b) => writeln!(out, "{} <-> {}", g.name(a), g.name(b)),
        };
    }
    out
}

pub fn parse_jpt(text: &str) -> Result<JointTable, FormatError> {
    let mut it = lines(text);
    let (line, decls) = header(&mut it)?;
    let mut variables = Vec::with_capacity(decls.len());
    for d in decls {
        let Some((name, size)) = d.split_once(':') else {
            return syntax(line, format!("expected `<name>:<domain>`, got `{d}`"));
        };
        let Ok(size) = size.parse::<usize>() else {
            return syntax(line, format!("bad domain size in `{d}`"));
        };
        variables.push((name.to_string(), size));
    }
    universe(line, variables.iter().map(|(n, _)| n.clone()).collect())?;
    let domains: Vec<usize> = variables.iter().map(|v| v.1).collect();
    let mut rows = 1usize;
    for (name, d) in &variables {
        if *d < 2 {
            return Err(OracleError::DomainTooSmall(name.clone(), *d).into());
        }
        rows = rows
            .checked_mul(*d)
            .filter(|&r| r <= MAX_ROWS)
            .ok_or(OracleError::TooLarge)?;
    }
    let mut probs = vec![0.0; rows];
    let mut seen = HashSet::new();
    for (line, l) in it {
        let tokens: Vec<&str> = l.split_whitespace().collect();
        if tokens.len() != domains.len() + 1 {
            return syntax(
                line,
                format!("expected {} values and a probability", domains.len()),
            );
        }
        let mut row = 0;
        for (tok, &d) in tokens.iter().zip(&domains) {
            match tok.parse::<usize>() {
                Ok(v) if v < d => row = row * d + v,
                _ => return syntax(line, format!("value `{tok}` outside 0..{d}")),
            }
        }
        let p_tok = tokens[domains.len()];
        let Ok(p) = p_tok.parse::<f64>() else {
            return syntax(line, format!("bad probability `{p_tok}`"));
        };
        if !seen.insert(row) {
            return syntax(line, "duplicate row");
        }
        probs[row] = p;
    }
    Ok(JointTable::new(variables, probs)?)
}

pub fn format_jpt(p: &JointTable) -> String {
    let mut out = String::from("vars");
    for (name, d) in p.variables() {
        let _ = write!(out, " {name}:{d}");
    }
    out.push('\n');
    for (row, &q) in p.probs().iter().enumerate() {
        if q == 0.0 {
            continue;
        }
        for v in p.assignment(row) {
            let _ = write!(out, "{v} ");
        }
        let _ = writeln!(out, "{q}");
    }
    out
}

fn parse_set(u: &Universe, text: &str, line: usize) -> Result<VarSet, FormatError> {
    let mut set = VarSet::EMPTY;
    for name in text.split(',') {
        let name = name.trim();
        if name.is_empty() {
            return syntax(line, "empty variable name in set");
        }
        let Some(v) = u.lookup(name) else {
            return syntax(line, format!("unknown variable `{name}`"));
        };
        if !set.insert(v) {
            return syntax(line, format!("`{name}` listed twice"));
        }
    }
    Ok(set)
}

fn parse_statement_at(u: &Universe, text: &str, line: usize) -> Result<Statement, FormatError> {
    let t = text.trim();
    let Some(inner) = t.strip_prefix("I(").and_then(|r| r.strip_suffix(')')) else {
        return syntax(line, "expected `I(X ; Y)` or `I(X ; Y | Z)`");
    };
    let Some((x, rest)) = inner.split_once(';') else {
        return syntax(line, "missing `;`");
    };
    let (y, z) = match rest.split_once('|') {
        Some((y, z)) => (y, Some(z)),
        None => (rest, None),
    };
    let x = parse_set(u, x, line)?;
    let y = parse_set(u, y, line)?;
    let z = match z {
        Some(z) => parse_set(u, z, line)?,
        None => VarSet::EMPTY,
    };
    Statement::new(x, z, y).or_else(|e| syntax(line, e.to_string()))
}

/// Parses `I(X ; Y)` or `I(X ; Y | Z)` over the names of `u`.
pub fn parse_statement(u: &Universe, text: &str) -> Result<Statement, FormatError> {
    parse_statement_at(u, text, 1)
}

pub fn format_statement(u: &Universe, s: &Statement) -> String {
    s.display(u).to_string()
}

/// A `vars` header followed by one statement per line, order preserved.
pub fn parse_stm(text: &str) -> Result<(Universe, Vec<Statement>), FormatError> {
    let mut it = lines(text);
    let (line, names) = header(&mut it)?;
    let u = universe(line, names.into_iter().map(String::from).collect())?;
    let mut out = Vec::new();
    for (line, l) in it {
        out.push(parse_statement_at(&u, l, line)?);
    }
    Ok((u, out))
}

pub fn format_stm(u: &Universe, statements: &[Statement]) -> String {
    let mut out = String::from("vars");
    for n in u.names() {
        out.push(' ');
        out.push_str(n);
    }
    out.push('\n');
    for s in statements {
        let _ = writeln!(out, "{}", s.display(u));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edg_round_trip_and_canonical_order() {
        let text = "# figure one\nvars B E A R\n\nE -> R\nB -> A   # burglary\nE -> A\n";
        let g = parse_edg(text).unwrap();
        assert_eq!(g.len(), 4);
        let canon = format_edg(&g);
        assert_eq!(canon, "vars B E A R\nB -> A\nE -> A\nE -> R\n");
        assert_eq!(parse_edg(&canon).unwrap(), g);

        let g = parse_edg("vars a b c\nc <-> b\na -> b\n").unwrap();
        assert_eq!(format_edg(&g), "vars a b c\na -> b\nb <-> c\n");
    }

    #[test]
    fn edg_errors() {
        assert!(matches!(parse_edg(""), Err(FormatError::Syntax { line: 1, .. })));
        assert!(matches!(parse_edg("a -> b"), Err(FormatError::Syntax { .. })));
        assert!(matches!(
            parse_edg("vars a b\n\na => b"),
            Err(FormatError::Syntax { line: 3, .. })
        ));
        assert!(matches!(
            parse_edg("vars a b\na -> c"),
            Err(FormatError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_edg("vars a b\na -> b\nb -> a"),
            Err(FormatError::Graph(GraphError::DirectedCycle(_)))
        ));
        assert!(matches!(
            parse_edg("vars a b\na -> b\na <-> b"),
            Err(FormatError::Graph(GraphError::ParallelEdge(..)))
        ));
        assert!(matches!(
            parse_edg("vars a\na <-> a"),
            Err(FormatError::Graph(GraphError::SelfLoop(_)))
        ));
        assert!(matches!(parse_edg("vars a a"), Err(FormatError::Syntax { .. })));
    }

    #[test]
    fn isolated_vertices_survive() {
        let g = parse_edg("vars a b c\n").unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(format_edg(&g), "vars a b c\n");
    }

    #[test]
    fn jpt_round_trip() {
        let text = "vars a:2 b:3\n0 0 0.1\n1 2 0.4\n0 1 0.25\n1 0 0.25\n";
        let p = parse_jpt(text).unwrap();
        assert_eq!(p.prob(&[0, 2]), 0.0);
        assert_eq!(p.prob(&[1, 2]), 0.4);
        let canon = format_jpt(&p);
        assert_eq!(canon, "vars a:2 b:3\n0 0 0.1\n0 1 0.25\n1 0 0.25\n1 2 0.4\n");
        assert_eq!(parse_jpt(&canon).unwrap(), p);
    }

    #[test]
    fn jpt_errors() {
        let dup = "vars a:2\n0 0.5\n0 0.5\n";
        assert!(matches!(parse_jpt(dup), Err(FormatError::Syntax { line: 3, .. })));
        let short = "vars a:2\n0 0.5\n";
        assert!(matches!(parse_jpt(short), Err(FormatError::Table(OracleError::BadTotal(_)))));
        let range = "vars a:2\n2 1.0\n";
        assert!(matches!(parse_jpt(range), Err(FormatError::Syntax { line: 2, .. })));
        let arity = "vars a:2 b:2\n0 1.0\n";
        assert!(matches!(parse_jpt(arity), Err(FormatError::Syntax { line: 2, .. })));
        assert!(matches!(parse_jpt("vars a\n"), Err(FormatError::Syntax { line: 1, .. })));
        assert!(matches!(
            parse_jpt("vars a:1\n0 1\n"),
            Err(FormatError::Table(OracleError::DomainTooSmall(..)))
        ));
        assert!(matches!(parse_jpt("vars a:2\n0 x\n"), Err(FormatError::Syntax { .. })));
        // Within the total tolerance.
        assert!(parse_jpt("vars a:2\n0 0.5\n1 0.5000000001\n").is_ok());
    }

    #[test]
    fn statement_syntax() {
        let u = Universe::new(["R", "E", "A", "B"]).unwrap();
        let s = parse_statement(&u, "I(R ; A,B | E)").unwrap();
        let id = |n| u.lookup(n).unwrap();
        assert_eq!(s.x, VarSet::singleton(id("R")));
        assert_eq!(s.z, VarSet::singleton(id("E")));
        assert_eq!(s.y, [id("A"), id("B")].into_iter().collect());
        assert_eq!(format_statement(&u, &s), "I(R ; A,B | E)");

        let s = parse_statement(&u, "  I( B ;E )").unwrap();
        assert_eq!(format_statement(&u, &s), "I(B ; E)");

        for bad in [
            "I(B E)",
            "I(B ; )",
            "I(B ; E | )",
            "I(B ; B)",
            "I(B ; X)",
            "J(B ; E)",
            "I(B,B ; E)",
            "I(B ; E",
        ] {
            assert!(parse_statement(&u, bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn stm_round_trip() {
        let text = "vars c0 c1 d0\n# T for k = 1\nI(c0, c1 ; d0)\nI(c0 ; d0 | c1)\n";
        let (u, list) = parse_stm(text).unwrap();
        assert_eq!(list.len(), 2);
        let canon = format_stm(&u, &list);
        assert_eq!(canon, "vars c0 c1 d0\nI(c0,c1 ; d0)\nI(c0 ; d0 | c1)\n");
        let (u2, list2) = parse_stm(&canon).unwrap();
        assert_eq!((u2, list2), (u, list));
        assert!(matches!(
            parse_stm("vars a b\nI(a ; c)\n"),
            Err(FormatError::Syntax { line: 2, .. })
        ));
    }
}
