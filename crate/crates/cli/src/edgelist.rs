//! Plain-text edge lists: one `i j` pair of 0-based agent indices per line.
//! Blank lines and anything after `#` are ignored.
//!
//! ```text
//! # 4-agent path
//! 0 1
//! 1 2
//! 2 3
//! ```

use std::fs;
use std::path::Path;

use dql_core::InteractionGraph;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EdgeListError {
    #[error("line {line}: expected two agent indices, found {found:?}")]
    Syntax { line: usize, found: String },
    #[error("edge list has no edges and no agent count was given")]
    Empty,
    #[error("invalid graph: {0}")]
    Graph(#[from] dql_core::model::ModelError),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Parses edges; the agent count defaults to one past the largest index.
pub fn parse_edge_list(text: &str, num_agents: Option<usize>) -> Result<InteractionGraph, EdgeListError> {
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        let pair = match fields.as_slice() {
            [i, j] => i.parse::<usize>().ok().zip(j.parse::<usize>().ok()),
            _ => None,
        };
        let Some(edge) = pair else {
            return Err(EdgeListError::Syntax {
                line: idx + 1,
                found: body.to_string(),
            });
        };
        edges.push(edge);
    }
    let inferred = edges.iter().map(|&(i, j)| i.max(j) + 1).max();
    let count = num_agents.or(inferred).ok_or(EdgeListError::Empty)?;
    Ok(InteractionGraph::new(count, &edges)?)
}

pub fn read_edge_list(path: &Path, num_agents: Option<usize>) -> Result<InteractionGraph, EdgeListError> {
    let text = fs::read_to_string(path).map_err(|source| EdgeListError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_edge_list(&text, num_agents)
}

/// Inverse of [`parse_edge_list`] for graphs without isolated trailing agents.
pub fn format_edge_list(g: &InteractionGraph) -> String {
    g.edges().iter().map(|(i, j)| format!("{i} {j}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blank_lines() {
        let g = parse_edge_list("# header\n0 1\n\n1 2  # trailing\n", None).unwrap();
        assert_eq!(g.num_agents(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn explicit_count_keeps_isolated_agents() {
        let g = parse_edge_list("0 1\n", Some(4)).unwrap();
        assert_eq!(g.num_agents(), 4);
        assert_eq!(g.degree(3), 0);
    }

    #[test]
    fn bad_lines_report_their_number() {
        match parse_edge_list("0 1\n1 x\n", None) {
            Err(EdgeListError::Syntax { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_edge_list("0 1 2\n", None), Err(EdgeListError::Syntax { line: 1, .. })));
        assert!(matches!(parse_edge_list("# nothing\n", None), Err(EdgeListError::Empty)));
        assert!(matches!(parse_edge_list("1 1\n", None), Err(EdgeListError::Graph(_))));
        assert!(matches!(parse_edge_list("0 5\n", Some(3)), Err(EdgeListError::Graph(_))));
    }

    #[test]
    fn format_round_trips() {
        let g = InteractionGraph::cycle(5).unwrap();
        assert_eq!(parse_edge_list(&format_edge_list(&g), None).unwrap(), g);
    }
}
