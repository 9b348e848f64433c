//! All-border-pairs distances and path counts inside each partition.
//!
//! Computed once per (graph, partition) and reused for every source.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::forward::{initial_relax, Active, SourceState};
use crate::graph::{Dist, Graph, PathCount, INF};
use crate::partition::{BorderSet, Partition, SIDES};
use crate::worker::WorkerGraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Copy> SquareMatrix<T> {
    pub fn filled(dim: usize, value: T) -> Self {
        SquareMatrix {
            dim,
            data: vec![value; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    fn from_rows(dim: usize, rows: Vec<Vec<T>>) -> Self {
        let data = rows.into_iter().flatten().collect::<Vec<_>>();
        debug_assert_eq!(data.len(), dim * dim);
        SquareMatrix { dim, data }
    }
}

/// `dist[p][i][j]`: shortest distance between borders `i` and `j` of side
/// `p` using only side-`p` vertices; `sigma[p][i][j]`: number of such paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BorderMatrices {
    pub dist: [SquareMatrix<Dist>; SIDES],
    pub sigma: [SquareMatrix<PathCount>; SIDES],
    pub sigma_overflow: bool,
}

impl BorderMatrices {
    pub fn num_borders(&self, side: usize) -> usize {
        self.dist[side].dim()
    }
}

pub fn compute_border_matrices(g: &Graph, p: &Partition, bs: &BorderSet) -> BorderMatrices {
    let workers = WorkerGraph::build_pair(g, p, bs);
    border_matrices_for(&workers)
}

/// Both sides are computed concurrently; within a side, border sources run
/// in parallel on the current rayon pool.
pub fn border_matrices_for(workers: &[WorkerGraph; SIDES]) -> BorderMatrices {
    let (side0, side1) = rayon::join(|| side_matrices(&workers[0]), || side_matrices(&workers[1]));
    BorderMatrices {
        sigma_overflow: side0.2 || side1.2,
        dist: [side0.0, side1.0],
        sigma: [side0.1, side1.1],
    }
}

fn side_matrices(wg: &WorkerGraph) -> (SquareMatrix<Dist>, SquareMatrix<PathCount>, bool) {
    let b = wg.num_borders();
    let rows: Vec<(Vec<Dist>, Vec<PathCount>, bool)> = wg
        .border_locals()
        .par_iter()
        .map(|&src| {
            let mut st = SourceState::new(wg);
            let active = Active {
                vertex: wg.global(src),
                dist: 0,
                sigma: 1,
            };
            initial_relax(wg, &mut st, &[active]).expect("border belongs to its worker");
            let d = wg.border_locals().iter().map(|&l| st.dist[l as usize]).collect();
            let s = wg.border_locals().iter().map(|&l| st.sigma[l as usize]).collect();
            (d, s, st.sigma_overflow)
        })
        .collect();
    let overflow = rows.iter().any(|r| r.2);
    let (d, s): (Vec<_>, Vec<_>) = rows.into_iter().map(|(d, s, _)| (d, s)).unzip();
    (
        SquareMatrix::from_rows(b, d),
        SquareMatrix::from_rows(b, s),
        overflow,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MemoryEstimate {
    pub unpartitioned_elems: u128,
    pub hybrid_elems_per_device: u128,
}

impl MemoryEstimate {
    pub fn unpartitioned_bytes(&self, elem_bytes: u64) -> u128 {
        self.unpartitioned_elems * elem_bytes as u128
    }

    pub fn hybrid_bytes(&self, elem_bytes: u64) -> u128 {
        self.hybrid_elems_per_device * elem_bytes as u128
    }
}

/// Element counts for the single-device layout, `4(m + n)`, and for one
/// device of an equal split with `b` borders per side, `2(m + n) + 4b + b^2`.
pub fn estimate_memory(n: u64, m: u64, b: u64) -> MemoryEstimate {
    let (n, m, b) = (n as u128, m as u128, b as u128);
    MemoryEstimate {
        unpartitioned_elems: 4 * (m + n),
        hybrid_elems_per_device: 2 * (m + n) + 4 * b + b * b,
    }
}

const CACHE_MAGIC: &[u8; 8] = b"HBCBM001";

/// Identifies the (graph, partition) pair a cached matrix set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheKey {
    pub graph: u64,
    pub partition: u64,
}

impl CacheKey {
    pub fn new(g: &Graph, p: &Partition) -> Self {
        let mut h = Sha256::new();
        h.update((g.num_vertices() as u64).to_le_bytes());
        for (u, v, w) in g.edges() {
            h.update((u as u64).to_le_bytes());
            h.update((v as u64).to_le_bytes());
            h.update(w.to_le_bytes());
        }
        let graph = first_u64(&h.finalize());
        let partition = first_u64(&Sha256::digest(p.assignment()));
        CacheKey { graph, partition }
    }
}

fn first_u64(digest: &[u8]) -> u64 {
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

pub fn save_cache(path: impl AsRef<Path>, key: CacheKey, bm: &BorderMatrices) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    buf.extend_from_slice(CACHE_MAGIC);
    buf.extend_from_slice(&key.graph.to_le_bytes());
    buf.extend_from_slice(&key.partition.to_le_bytes());
    buf.push(bm.sigma_overflow as u8);
    for side in 0..SIDES {
        buf.extend_from_slice(&(bm.dist[side].dim() as u64).to_le_bytes());
        for &d in &bm.dist[side].data {
            buf.extend_from_slice(&d.to_le_bytes());
        }
        for &s in &bm.sigma[side].data {
            buf.extend_from_slice(&s.to_le_bytes());
        }
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

/// Returns `Ok(None)` when the file is missing or belongs to another
/// (graph, partition) pair.
pub fn load_cache(path: impl AsRef<Path>, key: CacheKey) -> Result<Option<BorderMatrices>> {
    let path = path.as_ref();
    let mut f = match fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(Error::io(path, e)),
    };
    let mut buf = Vec::new();
    f.read_to_end(&mut buf).map_err(|e| Error::io(path, e))?;

    let mut r = ByteReader { buf: &buf, pos: 0 };
    if r.take(8)? != CACHE_MAGIC {
        return Err(Error::Format("not a border-matrix cache file".into()));
    }
    let stored = CacheKey {
        graph: r.u64()?,
        partition: r.u64()?,
    };
    if stored != key {
        return Ok(None);
    }
    let sigma_overflow = r.take(1)?[0] != 0;
    let mut dist = Vec::with_capacity(SIDES);
    let mut sigma = Vec::with_capacity(SIDES);
    for _ in 0..SIDES {
        let dim = r.u64()? as usize;
        let cells = dim
            .checked_mul(dim)
            .ok_or_else(|| Error::Format("matrix dimension overflows".into()))?;
        let d = (0..cells).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
        let s = (0..cells).map(|_| r.u128()).collect::<Result<Vec<_>>>()?;
        dist.push(SquareMatrix { dim, data: d });
        sigma.push(SquareMatrix { dim, data: s });
    }
    if r.pos != buf.len() {
        return Err(Error::Format("trailing bytes in cache file".into()));
    }
    let [d0, d1]: [SquareMatrix<Dist>; 2] = dist.try_into().expect("two sides");
    let [s0, s1]: [SquareMatrix<PathCount>; 2] = sigma.try_into().expect("two sides");
    Ok(Some(BorderMatrices {
        dist: [d0, d1],
        sigma: [s0, s1],
        sigma_overflow,
    }))
}

struct ByteReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(k)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Format("truncated cache file".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u128(&mut self) -> Result<u128> {
        Ok(u128::from_le_bytes(self.take(16)?.try_into().unwrap()))
    }
}

/// True when `bm` has the structural properties every border matrix must
/// have: zero/one diagonal, symmetry, `INF` exactly where the count is zero,
/// and the triangle inequality.
pub fn check_invariants(bm: &BorderMatrices) -> std::result::Result<(), String> {
    for side in 0..SIDES {
        let (d, s) = (&bm.dist[side], &bm.sigma[side]);
        let b = d.dim();
        for i in 0..b {
            if d.get(i, i) != 0 || s.get(i, i) != 1 {
                return Err(format!("side {side}: bad diagonal at {i}"));
            }
            for j in 0..b {
                if d.get(i, j) != d.get(j, i) || s.get(i, j) != s.get(j, i) {
                    return Err(format!("side {side}: asymmetric at ({i},{j})"));
                }
                if i != j && ((d.get(i, j) == INF) != (s.get(i, j) == 0)) {
                    return Err(format!("side {side}: INF/zero mismatch at ({i},{j})"));
                }
                for k in 0..b {
                    let via = d.get(i, k).saturating_add(d.get(k, j));
                    if d.get(i, j) > via {
                        return Err(format!("side {side}: triangle fails at ({i},{k},{j})"));
                    }
                }
            }
        }
    }
    Ok(())
}
