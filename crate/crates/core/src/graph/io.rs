use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use super::{Graph, HazardMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeListFormat {
    #[default]
    Unweighted,
    Weighted,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub format: EdgeListFormat,
    /// Expand every input line into both directed edges.
    pub undirected: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub data_lines: usize,
    pub self_loops: usize,
    pub duplicates: usize,
}

impl LoadReport {
    /// Lines that produced a warning (self-loops). Duplicates are dropped silently.
    pub fn warnings(&self) -> usize {
        self.self_loops
    }
}

#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Arc<Graph>,
    /// Raw per-edge weights for the weighted format, aligned with the edge index.
    pub weights: Option<Vec<f64>>,
    pub report: LoadReport,
}

impl LoadedGraph {
    /// The weights read as integrated hazards, if the input was weighted.
    pub fn hazard(&self) -> Option<Result<HazardMatrix>> {
        self.weights
            .as_ref()
            .map(|w| HazardMatrix::new(self.graph.clone(), w.clone()))
    }
}

fn header_node_count(comment: &str) -> Option<usize> {
    if !comment.starts_with("# netshape-") {
        return None;
    }
    comment
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix("n="))
        .and_then(|v| v.parse().ok())
}

/// Reads a SNAP-style edge list: `src dst [weight]` per line (tabs or spaces),
/// `#` comments and blank lines ignored.
///
/// Edge indices follow first appearance after deduplication. Self-loops are skipped and
/// counted in the report. The node count is one past the largest id, or the `n=` value
/// of a `# netshape-...` header if that is larger.
pub fn load_edge_list<R: BufRead>(source: R, opts: LoadOptions) -> Result<LoadedGraph> {
    let weighted = opts.format == EdgeListFormat::Weighted;
    let expected = if weighted { 3 } else { 2 };
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    let mut report = LoadReport::default();
    let mut n = 0usize;

    for (lineno, line) in source.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if let Some(h) = header_node_count(trimmed) {
                n = n.max(h);
            }
            continue;
        }
        report.data_lines += 1;
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != expected {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {expected} fields, found {}", fields.len()),
            });
        }
        let parse_node = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid node id {s:?}"),
            })
        };
        let src = parse_node(fields[0])?;
        let dst = parse_node(fields[1])?;
        let weight = if weighted {
            let w: f64 = fields[2].parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid weight {:?}", fields[2]),
            })?;
            if !w.is_finite() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("non-finite weight {w}"),
                });
            }
            if w < 0.0 {
                return Err(Error::domain(format!("line {lineno}: negative weight {w}")));
            }
            w
        } else {
            1.0
        };
        n = n.max(src + 1).max(dst + 1);
        if src == dst {
            report.self_loops += 1;
            continue;
        }
        let directions: &[(usize, usize)] = if opts.undirected {
            &[(src, dst), (dst, src)]
        } else {
            &[(src, dst)]
        };
        for &pair in directions {
            if seen.insert(pair) {
                edges.push(pair);
                weights.push(weight);
            } else {
                report.duplicates += 1;
            }
        }
    }
    if report.self_loops > 0 {
        log::warn!("skipped {} self-loop line(s)", report.self_loops);
    }
    Ok(LoadedGraph {
        graph: Arc::new(Graph::from_clean_edges(n, edges)),
        weights: weighted.then_some(weights),
        report,
    })
}

pub fn read_edge_list_file(path: impl AsRef<Path>, opts: LoadOptions) -> Result<LoadedGraph> {
    let path = path.as_ref();
    let file = File::open(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    load_edge_list(BufReader::new(file), opts)
}

/// Writes the graph in the unweighted format; loading the output reproduces the graph.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# netshape-graph v1 n={}", g.node_count())?;
    for &(i, j) in g.edges() {
        writeln!(out, "{i}\t{j}")?;
    }
    Ok(())
}
