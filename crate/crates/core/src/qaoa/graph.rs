use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected simple graph. Edge order is significant: it fixes gate order in the ansatz
/// and therefore the indexing of noisy locations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "GraphFile", try_from = "GraphFile")]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

/// On-disk layout `{"n": 4, "edges": [[0, 1], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for (k, &(a, b)) in edges.iter().enumerate() {
            if a >= n || b >= n {
                return Err(Error::Invalid(format!("edge ({a},{b}) outside {n} vertices")));
            }
            if a == b {
                return Err(Error::Invalid(format!("self-loop at {a}")));
            }
            if edges[..k].iter().any(|&(c, d)| (c, d) == (a, b) || (c, d) == (b, a)) {
                return Err(Error::Invalid(format!("duplicate edge ({a},{b})")));
            }
        }
        Ok(Graph { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Number of edges cut by the partition whose bit `q` is vertex `q`'s side.
    pub fn cut_value(&self, bits: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| (bits >> a ^ bits >> b) & 1 == 1).count()
    }

    /// Brute-force maximum cut.
    pub fn max_cut(&self) -> usize {
        (0..1usize << self.n).map(|b| self.cut_value(b)).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("graph: {e}")))
    }
}

impl From<Graph> for GraphFile {
    fn from(g: Graph) -> Self {
        GraphFile { n: g.n, edges: g.edges.iter().map(|&(a, b)| [a, b]).collect() }
    }
}

impl TryFrom<GraphFile> for Graph {
    type Error = Error;
    fn try_from(f: GraphFile) -> Result<Self> {
        Graph::new(f.n, f.edges.into_iter().map(|[a, b]| (a, b)).collect())
    }
}

/// Built-in graph families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphKind {
    /// Cycle `0-1-…-(n−1)-0`.
    Ring,
    /// Vertex 0 joined to every other vertex.
    Star,
    /// Complete graph on 4 vertices.
    Pyramid4,
    /// Square plus the diagonal `0-2`.
    Diag4,
    /// `Star` on 4 vertices plus the edge `1-2`.
    Brush4,
    Explicit(Vec<(usize, usize)>),
}

pub fn make_graph(kind: &GraphKind, n: usize) -> Result<Graph> {
    let fixed4 = |name: &str| {
        if n != 4 {
            Err(Error::Invalid(format!("{name} has 4 vertices, got n = {n}")))
        } else {
            Ok(())
        }
    };
    match kind {
        GraphKind::Ring => {
            if n < 3 {
                return Err(Error::Invalid(format!("ring needs n ≥ 3, got {n}")));
            }
            Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
        }
        GraphKind::Star => {
            if n < 2 {
                return Err(Error::Invalid(format!("star needs n ≥ 2, got {n}")));
            }
            Graph::new(n, (1..n).map(|i| (0, i)).collect())
        }
        GraphKind::Pyramid4 => {
            fixed4("pyramid4")?;
            Graph::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)])
        }
        GraphKind::Diag4 => {
            fixed4("diag4")?;
            Graph::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)])
        }
        GraphKind::Brush4 => {
            fixed4("brush4")?;
            Graph::new(4, vec![(0, 1), (0, 2), (0, 3), (1, 2)])
        }
        GraphKind::Explicit(edges) => Graph::new(n, edges.clone()),
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::Ring => f.write_str("ring"),
            GraphKind::Star => f.write_str("star"),
            GraphKind::Pyramid4 => f.write_str("pyramid4"),
            GraphKind::Diag4 => f.write_str("diag4"),
            GraphKind::Brush4 => f.write_str("brush4"),
            GraphKind::Explicit(_) => f.write_str("explicit"),
        }
    }
}

/// Parses `ring_6`, `star_8`, `pyramid4`, `diag4`, `brush4` into a graph.
impl FromStr for Graph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, n) = match s {
            "pyramid4" => (GraphKind::Pyramid4, 4),
            "diag4" => (GraphKind::Diag4, 4),
            "brush4" => (GraphKind::Brush4, 4),
            _ => {
                let (family, n) = s
                    .split_once('_')
                    .ok_or_else(|| Error::Parse(format!("unknown graph {s:?}")))?;
                let n: usize = n.parse().map_err(|_| Error::Parse(format!("bad vertex count in {s:?}")))?;
                let kind = match family {
                    "ring" => GraphKind::Ring,
                    "star" => GraphKind::Star,
                    _ => return Err(Error::Parse(format!("unknown graph family {family:?}"))),
                };
                (kind, n)
            }
        };
        make_graph(&kind, n)
    }
}
