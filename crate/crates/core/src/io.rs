//! Plain-text formats.
//!
//! Matrix file: line 1 is `n`, line 2 the `n` space-separated arities (root
//! first), then `n` lines of `n + 1` weights. Tree file: one `parent child`
//! pair per line, duplicates allowed. Graph file: line 1 is the vertex
//! count, then one `u v cost` triple per line. Blank lines and lines
//! starting with `#` are skipped everywhere.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{AritySpec, SuperpositionMatrix, SuperpositionTree, WeightedGraph};

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_fields<T: FromStr>(line: usize, text: &str) -> Result<Vec<T>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<T>()
                .map_err(|_| Error::parse(line, format!("cannot parse {tok:?}")))
        })
        .collect()
}

pub fn parse_matrix(text: &str) -> Result<(SuperpositionMatrix, AritySpec)> {
    let mut lines = content_lines(text);
    let (l, header) = lines.next().ok_or_else(|| Error::parse(1, "empty matrix file"))?;
    let n = match parse_fields::<usize>(l, header)?.as_slice() {
        [n] if *n > 0 => *n,
        _ => return Err(Error::parse(l, "expected the number of internal vertices")),
    };
    let (l, arity_line) = lines
        .next()
        .ok_or_else(|| Error::parse(l + 1, "missing arity line"))?;
    let arities = parse_fields::<usize>(l, arity_line)?;
    if arities.len() != n {
        return Err(Error::parse(l, format!("expected {n} arities, found {}", arities.len())));
    }
    let arity = AritySpec::new(arities).map_err(|e| Error::parse(l, e.to_string()))?;

    let mut rows = Vec::with_capacity(n);
    let mut last = l;
    for (l, row) in lines {
        let row = parse_fields::<f64>(l, row)?;
        if row.len() != n + 1 {
            return Err(Error::parse(l, format!("expected {} weights, found {}", n + 1, row.len())));
        }
        if rows.len() == n {
            return Err(Error::parse(l, format!("more than {n} matrix rows")));
        }
        rows.push(row);
        last = l;
    }
    if rows.len() != n {
        return Err(Error::parse(last, format!("expected {n} matrix rows, found {}", rows.len())));
    }
    let matrix = SuperpositionMatrix::from_rows(rows).map_err(|e| Error::parse(last, e.to_string()))?;
    Ok((matrix, arity))
}

pub fn format_matrix(matrix: &SuperpositionMatrix, arity: &AritySpec) -> String {
    let mut out = format!("{}\n", matrix.n_internal());
    let arities: Vec<String> = arity.as_slice().iter().map(usize::to_string).collect();
    out.push_str(&arities.join(" "));
    out.push('\n');
    for row in matrix.rows() {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out
}

pub fn parse_tree(text: &str) -> Result<SuperpositionTree> {
    let mut edges = Vec::new();
    for (l, line) in content_lines(text) {
        match parse_fields::<usize>(l, line)?.as_slice() {
            [p, c] => edges.push((*p, *c)),
            _ => return Err(Error::parse(l, "expected `parent child`")),
        }
    }
    Ok(SuperpositionTree::new(edges))
}

pub fn format_tree(tree: &SuperpositionTree) -> String {
    tree.to_string()
}

pub fn parse_graph(text: &str) -> Result<WeightedGraph> {
    let mut lines = content_lines(text);
    let (l, header) = lines.next().ok_or_else(|| Error::parse(1, "empty graph file"))?;
    let n = match parse_fields::<usize>(l, header)?.as_slice() {
        [n] => *n,
        _ => return Err(Error::parse(l, "expected the vertex count")),
    };
    let mut edges = Vec::new();
    let mut last = l;
    for (l, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [u, v, c] = fields.as_slice() else {
            return Err(Error::parse(l, "expected `u v cost`"));
        };
        let bad = |tok: &str| Error::parse(l, format!("cannot parse {tok:?}"));
        edges.push((
            u.parse::<usize>().map_err(|_| bad(u))?,
            v.parse::<usize>().map_err(|_| bad(v))?,
            c.parse::<f64>().map_err(|_| bad(c))?,
        ));
        last = l;
    }
    WeightedGraph::new(n, edges).map_err(|e| Error::parse(last, e.to_string()))
}

pub fn format_graph(graph: &WeightedGraph) -> String {
    let mut out = format!("{}\n", graph.n_vertices());
    for e in graph.edges() {
        let _ = writeln!(out, "{} {} {}", e.u, e.v, e.cost);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const WORKED: &str = "6
1 3 1 1 2 1
0.2 0.7 0.5 0.4 0.5 0.3 0.2
0.3 0.2 1.0 0.8 0.6 0.3 0.7
0.3 0.2 0.0 0.0 0.1 0.5 0.5
0.1 0.4 0.0 0.5 0.9 0.2 0.5
0.3 0.0 0.3 0.5 0.0 0.8 0.6
0.3 0.3 0.4 0.1 0.5 0.4 0.4
";

    #[test]
    fn matrix_round_trip() {
        let (m, a) = parse_matrix(WORKED).unwrap();
        assert_eq!(m.n_internal(), 6);
        assert_eq!(m.get(3, 4), 0.9);
        assert_eq!(a.as_slice(), &[1, 3, 1, 1, 2, 1]);
        let (m2, a2) = parse_matrix(&format_matrix(&m, &a)).unwrap();
        assert_eq!((m2, a2), (m, a));
    }

    #[test]
    fn matrix_errors_carry_line_numbers() {
        let cases = [
            ("", 1),
            ("2\n", 2),
            ("2\n1 1 1\n", 2),
            ("2\n2 1\n", 2),
            ("2\n1 1\n0 0 0\n0 x 0\n", 4),
            ("2\n1 1\n0 0 0\n0 0\n", 4),
            ("2\n1 1\n0 0 0\n", 3),
            ("2\n1 1\n0 0 0\n0 0 0\n0 0 0\n", 5),
        ];
        for (text, line) in cases {
            match parse_matrix(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn tree_parsing() {
        let t = parse_tree("# comment\n0 1\n1 2\n\n1 2\n").unwrap();
        assert_eq!(t.multiplicity((1, 2)), 2);
        assert_eq!(parse_tree(&format_tree(&t)).unwrap(), t);
        assert!(matches!(parse_tree("0 1 2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_tree("0 -1\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn graph_parsing() {
        let g = parse_graph("3\n0 1 0.5\n2 1 1.5\n").unwrap();
        assert_eq!(g.edges().len(), 2);
        assert_eq!(parse_graph(&format_graph(&g)).unwrap(), g);
        assert!(matches!(parse_graph("3\n0 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_graph("3\n0 0 1\n"), Err(Error::Parse { .. })));
    }
}
