//! Graph file formats.
//!
//! Edge list: a `n <count>` line followed by one `i j` pair per line
//! (1-based, `i` receives from `j`). `#` starts a comment.
//!
//! JSON: `{"n": 3, "adjacency": [[0,1,0],[0,0,1],[1,0,0]]}`.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::DirectedGraph;
use crate::error::{Error, Result};

pub fn parse_edge_list(text: &str) -> Result<DirectedGraph> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let loc = || format!("line {line_no}");
        match n {
            None => {
                if fields.len() != 2 || fields[0] != "n" {
                    return Err(Error::parse(
                        loc(),
                        format!("expected `n <count>`, found `{line}`"),
                    ));
                }
                let count = fields[1].parse::<usize>().map_err(|e| {
                    Error::parse(loc(), format!("bad node count `{}`: {e}", fields[1]))
                })?;
                if count == 0 {
                    return Err(Error::parse(loc(), "node count must be positive"));
                }
                n = Some(count);
            }
            Some(count) => {
                if fields.len() != 2 {
                    return Err(Error::parse(
                        loc(),
                        format!("expected two node indices `i j`, found `{line}`"),
                    ));
                }
                let mut idx = [0usize; 2];
                for (k, f) in fields.iter().enumerate() {
                    idx[k] = f.parse::<usize>().map_err(|e| {
                        Error::parse(
                            format!("line {line_no}, field {}", k + 1),
                            format!("`{f}`: {e}"),
                        )
                    })?;
                    if idx[k] == 0 || idx[k] > count {
                        return Err(Error::parse(
                            format!("line {line_no}, field {}", k + 1),
                            format!("node {} outside 1..={count}", idx[k]),
                        ));
                    }
                }
                if idx[0] == idx[1] {
                    return Err(Error::parse(loc(), format!("self-loop on node {}", idx[0])));
                }
                edges.push((idx[0], idx[1]));
            }
        }
    }
    let n = n.ok_or_else(|| Error::parse("line 1", "missing `n <count>` header"))?;
    DirectedGraph::new(n, edges)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AdjacencyDoc {
    n: usize,
    adjacency: Vec<Vec<u8>>,
}

pub fn parse_adjacency_json(text: &str) -> Result<DirectedGraph> {
    let doc: AdjacencyDoc = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    if doc.n == 0 {
        return Err(Error::parse("field `n`", "node count must be positive"));
    }
    if doc.adjacency.len() != doc.n {
        return Err(Error::parse(
            "field `adjacency`",
            format!("{} rows, expected {}", doc.adjacency.len(), doc.n),
        ));
    }
    for (i, row) in doc.adjacency.iter().enumerate() {
        if row.len() != doc.n {
            return Err(Error::parse(
                format!("field `adjacency`, row {}", i + 1),
                format!("{} entries, expected {}", row.len(), doc.n),
            ));
        }
        for (j, &a) in row.iter().enumerate() {
            if a > 1 {
                return Err(Error::parse(
                    format!("field `adjacency`, row {}, column {}", i + 1, j + 1),
                    format!("entry {a} is not 0 or 1"),
                ));
            }
            if a == 1 && i == j {
                return Err(Error::parse(
                    format!("field `adjacency`, row {}, column {}", i + 1, j + 1),
                    "self-loop on the diagonal",
                ));
            }
        }
    }
    DirectedGraph::from_adjacency(&doc.adjacency)
}

/// Loads a graph, choosing JSON for `.json` files and the edge list otherwise.
pub fn read_graph(path: &Path) -> Result<DirectedGraph> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    let is_json = path
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("json"));
    let parsed = if is_json {
        parse_adjacency_json(&text)
    } else {
        parse_edge_list(&text)
    };
    parsed.map_err(|e| match e {
        Error::Parse { location, message } => Error::Parse {
            location: format!("{}: {location}", path.display()),
            message,
        },
        other => other,
    })
}

pub fn to_edge_list(g: &DirectedGraph) -> String {
    let mut out =
        String::from("# each line `i j`: node i receives information from node j (1-based)\n");
    let _ = writeln!(out, "n {}", g.node_count());
    for (i, j) in g.edges() {
        let _ = writeln!(out, "{i} {j}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_with_comments() {
        let g = parse_edge_list("# header\nn 3\n1 2 # first\n\n2 3\n3 1\n").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(1, 2), (2, 3), (3, 1)]);
    }

    #[test]
    fn edge_list_diagnostics_name_the_line() {
        let err = parse_edge_list("n 3\n1 2\n1 x\n").unwrap_err();
        assert!(
            matches!(&err, Error::Parse { location, .. } if location == "line 3, field 2"),
            "{err}"
        );
        let err = parse_edge_list("n 3\n1 5\n").unwrap_err();
        assert!(matches!(&err, Error::Parse { location, .. } if location.starts_with("line 2")));
        let err = parse_edge_list("3\n1 2\n").unwrap_err();
        assert!(matches!(&err, Error::Parse { location, .. } if location == "line 1"));
        assert!(parse_edge_list("n 3\n2 2\n").is_err());
        assert!(parse_edge_list("n 3\n1 2 3\n").is_err());
        assert!(parse_edge_list("").is_err());
    }

    #[test]
    fn json_adjacency() {
        let g = parse_adjacency_json(r#"{"n": 2, "adjacency": [[0,1],[1,0]]}"#).unwrap();
        assert_eq!(g.edge_count(), 2);
        let err = parse_adjacency_json(r#"{"n": 2, "adjacency": [[0,1],[2,0]]}"#).unwrap_err();
        assert!(
            matches!(&err, Error::Parse { location, .. } if location.contains("row 2, column 1"))
        );
        assert!(parse_adjacency_json(r#"{"n": 2, "adjacency": [[0,1]]}"#).is_err());
        assert!(parse_adjacency_json(r#"{"n": 2, "adjacency": [[1,1],[1,0]]}"#).is_err());
        assert!(parse_adjacency_json(r#"{"n": 2"#).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = DirectedGraph::six_agent_example();
        assert_eq!(parse_edge_list(&to_edge_list(&g)).unwrap(), g);
    }
}
