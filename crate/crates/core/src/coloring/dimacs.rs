//! DIMACS edge format. Vertices are 1-based on disk and 0-based in memory.
//! The chromatic number rides along as a `c chromatic number <k>` comment.

use alloc::format;
use alloc::string::String;

use super::{chromatic_number_exact, ColoringInstance, Graph, GraphError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DimacsError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Graph { line: usize, source: GraphError },
    #[error("missing 'p edge' line")]
    MissingProblemLine,
    #[error("header declares {declared} edges but {found} were listed")]
    EdgeCount { declared: usize, found: usize },
    #[error("stated chromatic number {stated} but the graph needs {exact}")]
    WrongChromaticNumber { stated: usize, exact: usize },
}

pub fn to_dimacs(instance: &ColoringInstance) -> String {
    let g = &instance.graph;
    let mut out = format!(
        "c chromatic number {}\np edge {} {}\n",
        instance.chromatic_number,
        g.n(),
        g.edge_count()
    );
    for (u, v) in g.edges() {
        out.push_str(&format!("e {} {}\n", u + 1, v + 1));
    }
    out
}

/// The graph part only, as shown in prompts.
pub fn graph_to_dimacs(g: &Graph) -> String {
    let mut out = format!("p edge {} {}\n", g.n(), g.edge_count());
    for (u, v) in g.edges() {
        out.push_str(&format!("e {} {}\n", u + 1, v + 1));
    }
    out
}

fn number(tok: Option<&str>, line: usize, what: &str) -> Result<usize, DimacsError> {
    tok.and_then(|t| t.parse().ok()).ok_or_else(|| DimacsError::Syntax {
        line,
        message: format!("expected {what}"),
    })
}

/// Parse a DIMACS edge file. Without a chromatic-number comment the exact
/// value is computed; a stated value is checked against the exact solver.
pub fn from_dimacs(text: &str) -> Result<ColoringInstance, DimacsError> {
    let mut stated = None;
    let mut graph: Option<Graph> = None;
    let mut declared = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut toks = raw.split_whitespace();
        match toks.next() {
            None => continue,
            Some("c") => {
                let rest: alloc::vec::Vec<&str> = toks.collect();
                if rest.len() == 3 && rest[0] == "chromatic" && rest[1] == "number" {
                    stated = Some(number(Some(rest[2]), line, "chromatic number")?);
                }
            }
            Some("p") => {
                if graph.is_some() {
                    return Err(DimacsError::Syntax {
                        line,
                        message: "second 'p' line".into(),
                    });
                }
                if toks.next() != Some("edge") {
                    return Err(DimacsError::Syntax {
                        line,
                        message: "expected 'p edge <n> <m>'".into(),
                    });
                }
                let n = number(toks.next(), line, "vertex count")?;
                declared = number(toks.next(), line, "edge count")?;
                graph = Some(Graph::new(n));
            }
            Some("e") => {
                let g = graph.as_mut().ok_or(DimacsError::MissingProblemLine)?;
                let u = number(toks.next(), line, "edge endpoint")?;
                let v = number(toks.next(), line, "edge endpoint")?;
                if u == 0 || v == 0 {
                    return Err(DimacsError::Syntax {
                        line,
                        message: "vertices are numbered from 1".into(),
                    });
                }
                let added = g
                    .add_edge(u - 1, v - 1)
                    .map_err(|source| DimacsError::Graph { line, source })?;
                if !added {
                    return Err(DimacsError::Graph {
                        line,
                        source: GraphError::Duplicate(u.min(v) - 1, u.max(v) - 1),
                    });
                }
            }
            Some(other) => {
                return Err(DimacsError::Syntax {
                    line,
                    message: format!("unknown line type '{other}'"),
                })
            }
        }
    }
    let graph = graph.ok_or(DimacsError::MissingProblemLine)?;
    if graph.edge_count() != declared {
        return Err(DimacsError::EdgeCount {
            declared,
            found: graph.edge_count(),
        });
    }
    let exact = chromatic_number_exact(&graph);
    if let Some(stated) = stated {
        if stated != exact {
            return Err(DimacsError::WrongChromaticNumber { stated, exact });
        }
    }
    Ok(ColoringInstance {
        graph,
        chromatic_number: exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_round_trip() {
        let inst = ColoringInstance::new(Graph::complete(3));
        let text = to_dimacs(&inst);
        assert_eq!(text, "c chromatic number 3\np edge 3 3\ne 1 2\ne 1 3\ne 2 3\n");
        assert_eq!(from_dimacs(&text).unwrap(), inst);
    }

    #[test]
    fn errors_cite_lines() {
        assert!(matches!(
            from_dimacs("p edge 2 1\ne 1 1"),
            Err(DimacsError::Graph { line: 2, source: GraphError::SelfLoop(0) })
        ));
        assert!(matches!(from_dimacs("p edge 2 1\ne 1 3"), Err(DimacsError::Graph { line: 2, .. })));
        assert!(matches!(from_dimacs("p edge 2 2\ne 1 2"), Err(DimacsError::EdgeCount { .. })));
        assert!(matches!(from_dimacs("e 1 2"), Err(DimacsError::MissingProblemLine)));
        assert!(matches!(from_dimacs("p edge x 1"), Err(DimacsError::Syntax { line: 1, .. })));
        assert!(matches!(
            from_dimacs("c chromatic number 2\np edge 3 3\ne 1 2\ne 2 3\ne 1 3\n"),
            Err(DimacsError::WrongChromaticNumber { stated: 2, exact: 3 })
        ));
    }

    #[test]
    fn chromatic_number_computed_when_absent() {
        let inst = from_dimacs("c some comment\np edge 4 4\ne 1 2\ne 2 3\ne 3 4\ne 4 1\n").unwrap();
        assert_eq!(inst.chromatic_number, 2);
    }
}
