//! Architecture (coupling) graphs and hop distances.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::circuit::Qubit;

const Q20_EDGES: &str = include_str!("../data/ibm_q20_tokyo.txt");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArchError {
    #[error("architecture graph is not connected")]
    NotConnected,
    #[error("self-loop on vertex {0}")]
    SelfLoop(u32),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(u32, u32),
    #[error("vertex {vertex} out of range for {vertex_count} vertices")]
    IndexOutOfRange { vertex: u32, vertex_count: usize },
    #[error("architecture needs at least one vertex")]
    Empty,
    #[error("grid {rows}x{cols} has fewer than two vertices")]
    GridTooSmall { rows: usize, cols: usize },
    #[error("edge list line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown architecture `{0}` (expected q20, grid5x4, grid:RxC or file:PATH)")]
    UnknownSpec(String),
    #[error("reading {path}: {msg}")]
    Io { path: String, msg: String },
}

/// Undirected, connected coupling graph.
#[derive(Clone, Debug)]
pub struct ArchGraph {
    vertex_count: usize,
    /// Normalised `(min, max)` pairs, sorted.
    edges: Vec<(u32, u32)>,
    adjacency: Vec<Vec<u32>>,
    adjacent: Vec<bool>,
}

impl PartialEq for ArchGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertex_count == other.vertex_count && self.edges == other.edges
    }
}

impl Eq for ArchGraph {}

impl ArchGraph {
    pub fn from_edge_list(n: usize, pairs: &[(u32, u32)]) -> Result<Self, ArchError> {
        if n == 0 {
            return Err(ArchError::Empty);
        }
        let mut adjacent = vec![false; n * n];
        let mut adjacency = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(pairs.len());
        for &(u, v) in pairs {
            for x in [u, v] {
                if x as usize >= n {
                    return Err(ArchError::IndexOutOfRange {
                        vertex: x,
                        vertex_count: n,
                    });
                }
            }
            if u == v {
                return Err(ArchError::SelfLoop(u));
            }
            let (a, b) = (u.min(v), u.max(v));
            let slot = a as usize * n + b as usize;
            if adjacent[slot] {
                return Err(ArchError::DuplicateEdge(a, b));
            }
            adjacent[slot] = true;
            adjacent[b as usize * n + a as usize] = true;
            adjacency[a as usize].push(b);
            adjacency[b as usize].push(a);
            edges.push((a, b));
        }
        edges.sort_unstable();
        for nb in &mut adjacency {
            nb.sort_unstable();
        }
        let g = ArchGraph {
            vertex_count: n,
            edges,
            adjacency,
            adjacent,
        };
        if !g.is_connected() {
            return Err(ArchError::NotConnected);
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, v: Qubit) -> &[u32] {
        &self.adjacency[v as usize]
    }

    pub fn is_edge(&self, u: Qubit, v: Qubit) -> bool {
        let n = self.vertex_count;
        (u as usize) < n && (v as usize) < n && self.adjacent[u as usize * n + v as usize]
    }

    /// Position of the normalised edge in [`ArchGraph::edges`].
    pub fn edge_index(&self, u: Qubit, v: Qubit) -> Option<usize> {
        self.edges.binary_search(&(u.min(v), u.max(v))).ok()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertex_count];
        let mut queue = VecDeque::from([0u32]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in self.neighbors(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.vertex_count
    }

    /// Serialises to the edge-list text format read by [`parse_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{}\n", self.vertex_count);
        for &(u, v) in &self.edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }
}

/// Parses the edge-list format: first non-comment line is the vertex count,
/// then one `u v` pair per line. `#` starts a comment.
pub fn parse_edge_list(text: &str) -> Result<ArchGraph, ArchError> {
    let mut n: Option<usize> = None;
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| ArchError::Parse {
            line: i + 1,
            msg: msg.to_string(),
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        match (n, fields.as_slice()) {
            (None, [count]) => {
                n = Some(count.parse().map_err(|_| err("expected vertex count"))?);
            }
            (None, _) => return Err(err("first line must be the vertex count")),
            (Some(_), [u, v]) => {
                let u = u.parse().map_err(|_| err("bad vertex index"))?;
                let v = v.parse().map_err(|_| err("bad vertex index"))?;
                pairs.push((u, v));
            }
            (Some(_), _) => return Err(err("expected `u v`")),
        }
    }
    let n = n.ok_or(ArchError::Parse {
        line: 0,
        msg: "missing vertex count".into(),
    })?;
    ArchGraph::from_edge_list(n, &pairs)
}

/// IBM Q20 Tokyo: 4x5 grid with six pairs of crossed diagonal couplers.
pub fn builtin_q20() -> ArchGraph {
    parse_edge_list(Q20_EDGES).expect("bundled Q20 edge list is valid")
}

/// `rows x cols` lattice with horizontal and vertical couplers only.
pub fn builtin_grid(rows: usize, cols: usize) -> Result<ArchGraph, ArchError> {
    if rows == 0 || cols == 0 || rows * cols < 2 {
        return Err(ArchError::GridTooSmall { rows, cols });
    }
    let id = |r: usize, c: usize| (r * cols + c) as u32;
    let mut pairs = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                pairs.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                pairs.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    ArchGraph::from_edge_list(rows * cols, &pairs)
}

/// Resolves a CLI architecture name: `q20`, `grid5x4`, `grid:RxC` or `file:PATH`.
pub fn from_spec(spec: &str) -> Result<ArchGraph, ArchError> {
    let unknown = || ArchError::UnknownSpec(spec.to_string());
    match spec {
        "q20" => Ok(builtin_q20()),
        "grid5x4" => builtin_grid(5, 4),
        _ => {
            if let Some(dims) = spec.strip_prefix("grid:") {
                let (r, c) = dims.split_once('x').ok_or_else(unknown)?;
                let r = r.trim().parse().map_err(|_| unknown())?;
                let c = c.trim().parse().map_err(|_| unknown())?;
                builtin_grid(r, c)
            } else if let Some(path) = spec.strip_prefix("file:") {
                read_edge_list(Path::new(path))
            } else {
                Err(unknown())
            }
        }
    }
}

pub fn read_edge_list(path: &Path) -> Result<ArchGraph, ArchError> {
    let text = std::fs::read_to_string(path).map_err(|e| ArchError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    parse_edge_list(&text)
}

/// All-pairs hop distances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<u32>,
}

impl DistanceMatrix {
    #[inline]
    pub fn get(&self, u: Qubit, v: Qubit) -> u32 {
        self.d[u as usize * self.n + v as usize]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn diameter(&self) -> u32 {
        self.d.iter().copied().max().unwrap_or(0)
    }
}

/// One BFS per source vertex.
pub fn distances(g: &ArchGraph) -> DistanceMatrix {
    let n = g.vertex_count();
    let mut d = vec![u32::MAX; n * n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        let row = &mut d[s * n..(s + 1) * n];
        row[s] = 0;
        queue.clear();
        queue.push_back(s as u32);
        while let Some(v) = queue.pop_front() {
            let dv = row[v as usize];
            for &w in g.neighbors(v) {
                if row[w as usize] == u32::MAX {
                    row[w as usize] = dv + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    DistanceMatrix { n, d }
}

/// A shortest vertex path `from ..= to`. Among equal-length paths the one
/// through lowest-numbered vertices is returned.
pub fn shortest_path(g: &ArchGraph, dist: &DistanceMatrix, from: Qubit, to: Qubit) -> Vec<Qubit> {
    let mut path = vec![from];
    let mut cur = from;
    while cur != to {
        let here = dist.get(cur, to);
        cur = *g
            .neighbors(cur)
            .iter()
            .find(|&&w| dist.get(w, to) + 1 == here)
            .expect("connected graph has a descending neighbour");
        path.push(cur);
    }
    path
}
