//! Undirected weighted graphs in a hybrid CSR-COO layout.
//!
//! Every undirected edge `{u, v}` is stored as two arcs `(u, v)` and `(v, u)`
//! with equal weight. Arcs are sorted by `(src, dst)`, so the arcs leaving `u`
//! occupy `offsets[u]..offsets[u + 1]`. The per-arc source array makes the
//! layout usable edge-parallel (COO) as well as vertex-parallel (CSR).

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = usize;

/// Integral path length. [`INF`] marks "unreachable".
pub type Dist = u64;

/// Number of shortest paths.
pub type PathCount = u128;

pub const INF: Dist = Dist::MAX;

/// Saturating distance addition: anything involving [`INF`] stays [`INF`].
#[inline]
pub fn dist_add(a: Dist, b: Dist) -> Dist {
    a.saturating_add(b)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_vertices: usize,
    offsets: Vec<usize>,
    arc_src: Vec<VertexId>,
    arc_dst: Vec<VertexId>,
    arc_weight: Vec<Dist>,
    reverse: Vec<usize>,
}

impl Graph {
    /// Builds a normalized undirected graph: self-loops are dropped, both
    /// orientations are added, and parallel edges collapse to the minimum
    /// weight.
    pub fn from_edges<I>(num_vertices: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId, Dist)>,
    {
        let mut best: BTreeMap<(VertexId, VertexId), Dist> = BTreeMap::new();
        for (u, v, w) in edges {
            if u >= num_vertices || v >= num_vertices {
                return Err(Error::Domain(format!(
                    "edge ({u}, {v}) out of range for {num_vertices} vertices"
                )));
            }
            if w == 0 {
                return Err(Error::Domain(format!(
                    "edge ({u}, {v}) has zero weight; weights must be >= 1"
                )));
            }
            if u == v {
                continue;
            }
            let key = (u.min(v), u.max(v));
            best.entry(key)
                .and_modify(|old| *old = (*old).min(w))
                .or_insert(w);
        }

        let mut total: Dist = 0;
        for &w in best.values() {
            total = total
                .checked_add(w)
                .filter(|t| *t < INF)
                .ok_or_else(|| Error::Domain("sum of edge weights overflows".into()))?;
        }

        let mut arcs: Vec<(VertexId, VertexId, Dist)> = Vec::with_capacity(best.len() * 2);
        for (&(u, v), &w) in &best {
            arcs.push((u, v, w));
            arcs.push((v, u, w));
        }
        arcs.sort_unstable();

        let mut offsets = vec![0usize; num_vertices + 1];
        for &(u, _, _) in &arcs {
            offsets[u + 1] += 1;
        }
        for i in 0..num_vertices {
            offsets[i + 1] += offsets[i];
        }

        let arc_src: Vec<VertexId> = arcs.iter().map(|a| a.0).collect();
        let arc_dst: Vec<VertexId> = arcs.iter().map(|a| a.1).collect();
        let arc_weight: Vec<Dist> = arcs.iter().map(|a| a.2).collect();

        let mut graph = Graph {
            num_vertices,
            offsets,
            arc_src,
            arc_dst,
            arc_weight,
            reverse: Vec::new(),
        };
        graph.reverse = (0..graph.num_arcs())
            .map(|a| {
                graph
                    .find_arc(graph.arc_dst[a], graph.arc_src[a])
                    .expect("symmetric arc present")
            })
            .collect();
        Ok(graph)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.arc_dst.len() / 2
    }

    pub fn num_arcs(&self) -> usize {
        self.arc_dst.len()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn arc_src(&self) -> &[VertexId] {
        &self.arc_src
    }

    pub fn arc_dst(&self) -> &[VertexId] {
        &self.arc_dst
    }

    pub fn arc_weight(&self) -> &[Dist] {
        &self.arc_weight
    }

    /// Index of the arc `(v, u)` for arc `(u, v)`.
    pub fn reverse_arc(&self, arc: usize) -> usize {
        self.reverse[arc]
    }

    pub fn arc_range(&self, u: VertexId) -> std::ops::Range<usize> {
        self.offsets[u]..self.offsets[u + 1]
    }

    pub fn degree(&self, u: VertexId) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    /// `(neighbor, weight)` pairs of `u`, ascending by neighbor.
    pub fn neighbors(&self, u: VertexId) -> impl Iterator<Item = (VertexId, Dist)> + '_ {
        self.arc_range(u)
            .map(move |a| (self.arc_dst[a], self.arc_weight[a]))
    }

    pub fn find_arc(&self, u: VertexId, v: VertexId) -> Option<usize> {
        let range = self.arc_range(u);
        self.arc_dst[range.clone()]
            .binary_search(&v)
            .ok()
            .map(|i| range.start + i)
    }

    pub fn edge_weight(&self, u: VertexId, v: VertexId) -> Option<Dist> {
        self.find_arc(u, v).map(|a| self.arc_weight[a])
    }

    /// Each undirected edge once, as `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, Dist)> + '_ {
        (0..self.num_arcs())
            .filter(move |&a| self.arc_src[a] < self.arc_dst[a])
            .map(move |a| (self.arc_src[a], self.arc_dst[a], self.arc_weight[a]))
    }

    pub fn is_unit_weight(&self) -> bool {
        self.arc_weight.iter().all(|&w| w == 1)
    }

    /// Subgraph induced by the vertices for which `keep` is true, relabelled
    /// densely in ascending id order. Also returns the new-to-old id map.
    pub fn induced_subgraph(&self, keep: impl Fn(VertexId) -> bool) -> (Graph, Vec<VertexId>) {
        let old_ids: Vec<VertexId> = (0..self.num_vertices).filter(|&v| keep(v)).collect();
        let mut new_id = vec![usize::MAX; self.num_vertices];
        for (i, &v) in old_ids.iter().enumerate() {
            new_id[v] = i;
        }
        let edges = self
            .edges()
            .filter(|&(u, v, _)| new_id[u] != usize::MAX && new_id[v] != usize::MAX)
            .map(|(u, v, w)| (new_id[u], new_id[v], w));
        let sub = Graph::from_edges(old_ids.len(), edges).expect("subgraph of a valid graph");
        (sub, old_ids)
    }

    /// Loads `u v [w]` lines. Lines starting with `#` or `%` are comments,
    /// except the directive `# vertices N` which fixes the vertex count
    /// (used to preserve trailing isolated vertices).
    pub fn load_edge_list(path: impl AsRef<Path>, weighted: bool) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_edge_list(&text, weighted)
    }

    pub fn parse_edge_list(text: &str, weighted: bool) -> Result<Self> {
        let mut declared: Option<usize> = None;
        let mut edges = Vec::new();
        let mut max_id: Option<VertexId> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#').or_else(|| line.strip_prefix('%')) {
                let mut parts = rest.split_whitespace();
                if parts.next() == Some("vertices") {
                    let n = parts.next().and_then(|t| t.parse::<usize>().ok()).ok_or(
                        Error::Parse {
                            line: line_no,
                            msg: "malformed vertices directive".into(),
                        },
                    )?;
                    declared = Some(n);
                }
                continue;
            }

            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 2 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected `u v [w]`, got {line:?}"),
                });
            }
            let u = parse_vertex(fields[0], line_no)?;
            let v = parse_vertex(fields[1], line_no)?;
            let w = if weighted {
                let tok = fields.get(2).ok_or(Error::Parse {
                    line: line_no,
                    msg: "missing weight".into(),
                })?;
                parse_weight(tok, line_no)?
            } else {
                1
            };
            max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
            edges.push((u, v, w));
        }

        let implied = max_id.map_or(0, |m| m + 1);
        let n = match declared {
            Some(d) if d < implied => {
                return Err(Error::Format(format!(
                    "vertices directive says {d} but ids reach {}",
                    implied - 1
                )))
            }
            Some(d) => d,
            None => implied,
        };
        Graph::from_edges(n, edges)
    }

    /// Loads a DIMACS shortest-path `.gr` file (1-based ids).
    pub fn load_dimacs_gr(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_dimacs_gr(&text)
    }

    pub fn parse_dimacs_gr(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            let mut parts = line.split_whitespace();
            match parts.next() {
                None | Some("c") => continue,
                Some("p") => {
                    if header.is_some() {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: "duplicate problem line".into(),
                        });
                    }
                    if parts.next() != Some("sp") {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: "expected `p sp n m`".into(),
                        });
                    }
                    let n = parts.next().and_then(|t| t.parse().ok());
                    let m = parts.next().and_then(|t| t.parse().ok());
                    match (n, m) {
                        (Some(n), Some(m)) => header = Some((n, m)),
                        _ => {
                            return Err(Error::Parse {
                                line: line_no,
                                msg: "expected `p sp n m`".into(),
                            })
                        }
                    }
                }
                Some("a") => {
                    let (n, _) = header.ok_or(Error::Parse {
                        line: line_no,
                        msg: "arc before problem line".into(),
                    })?;
                    let fields: Vec<&str> = parts.collect();
                    if fields.len() != 3 {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: "expected `a u v w`".into(),
                        });
                    }
                    let u = parse_vertex(fields[0], line_no)?;
                    let v = parse_vertex(fields[1], line_no)?;
                    let w = parse_weight(fields[2], line_no)?;
                    for id in [u, v] {
                        if id == 0 || id > n {
                            return Err(Error::Parse {
                                line: line_no,
                                msg: format!("vertex {id} out of range 1..={n}"),
                            });
                        }
                    }
                    edges.push((u - 1, v - 1, w));
                }
                Some(other) => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("unknown line type {other:?}"),
                    })
                }
            }
        }

        let (n, m) = header.ok_or_else(|| Error::Format("missing `p sp` line".into()))?;
        if edges.len() != m {
            return Err(Error::Format(format!(
                "header declares {m} arcs but file has {}",
                edges.len()
            )));
        }
        Graph::from_edges(n, edges)
    }

    pub fn write_edge_list(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "# vertices {}", self.num_vertices)?;
        for (u, v, w) in self.edges() {
            writeln!(out, "{u} {v} {w}")?;
        }
        Ok(())
    }

    pub fn stats(&self) -> GraphStats {
        let n = self.num_vertices;
        let m = self.num_edges();
        GraphStats {
            n,
            m,
            avg_degree: if n == 0 { 0.0 } else { 2.0 * m as f64 / n as f64 },
            max_degree: (0..n).map(|v| self.degree(v)).max().unwrap_or(0),
        }
    }
}

fn parse_vertex(tok: &str, line: usize) -> Result<VertexId> {
    tok.parse::<VertexId>().map_err(|_| Error::Parse {
        line,
        msg: format!("bad vertex id {tok:?}"),
    })
}

fn parse_weight(tok: &str, line: usize) -> Result<Dist> {
    match tok.parse::<i128>() {
        Ok(w) if w < 0 => Err(Error::Domain(format!("line {line}: negative weight {w}"))),
        Ok(w) => Dist::try_from(w).map_err(|_| Error::Parse {
            line,
            msg: format!("weight {w} too large"),
        }),
        Err(_) => Err(Error::Parse {
            line,
            msg: format!("bad weight {tok:?}"),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub n: usize,
    pub m: usize,
    pub avg_degree: f64,
    pub max_degree: usize,
}
