//! Parity-check matrices and their Tanner graphs.
//!
//! Edges are numbered in check-major order: the edges of check `c` occupy the
//! contiguous range [`CodeGraph::check_edges`]. Each variable keeps the list of
//! its edge identifiers, so both adjacency views refer to the same edge slots.

mod alist;
mod gf2;
mod peg;

pub use alist::{parse_alist, write_alist};
pub use gf2::{gf2_rank, Encoder};
pub use peg::generate_regular_code;

use std::ops::Range;

use crate::{Error, Result};

/// Sparse parity-check matrix `H ∈ {0,1}^{N_c × N}` with both adjacency views.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeGraph {
    n: usize,
    nc: usize,
    check_ptr: Vec<usize>,
    edge_var: Vec<u32>,
    edge_check: Vec<u32>,
    /// Position of each edge inside its variable's list.
    edge_var_pos: Vec<u32>,
    var_ptr: Vec<usize>,
    var_edges: Vec<u32>,
}

impl CodeGraph {
    /// Builds a graph from `(check, variable)` pairs. Neighbour lists end up ascending.
    pub fn from_edges<I>(n: usize, nc: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut pairs: Vec<(usize, usize)> = edges.into_iter().collect();
        for &(c, v) in &pairs {
            if c >= nc || v >= n {
                return Err(Error::Validation(format!(
                    "edge ({c}, {v}) out of range for {nc} x {n} matrix"
                )));
            }
        }
        pairs.sort_unstable();
        if let Some(w) = pairs.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Validation(format!("duplicate edge ({}, {})", w[0].0, w[0].1)));
        }
        let mut check_ptr = vec![0usize; nc + 1];
        for &(c, _) in &pairs {
            check_ptr[c + 1] += 1;
        }
        for c in 0..nc {
            check_ptr[c + 1] += check_ptr[c];
        }
        let edge_var: Vec<u32> = pairs.iter().map(|&(_, v)| v as u32).collect();
        let edge_check: Vec<u32> = pairs.iter().map(|&(c, _)| c as u32).collect();

        let mut var_ptr = vec![0usize; n + 1];
        for &(_, v) in &pairs {
            var_ptr[v + 1] += 1;
        }
        for v in 0..n {
            var_ptr[v + 1] += var_ptr[v];
        }
        let mut fill = var_ptr.clone();
        let mut var_edges = vec![0u32; pairs.len()];
        let mut edge_var_pos = vec![0u32; pairs.len()];
        // Check-major order visits each variable's checks in ascending order.
        for (e, &(_, v)) in pairs.iter().enumerate() {
            edge_var_pos[e] = (fill[v] - var_ptr[v]) as u32;
            var_edges[fill[v]] = e as u32;
            fill[v] += 1;
        }
        Ok(CodeGraph { n, nc, check_ptr, edge_var, edge_check, edge_var_pos, var_ptr, var_edges })
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_checks(&self) -> usize {
        self.nc
    }

    pub fn num_edges(&self) -> usize {
        self.edge_var.len()
    }

    pub fn check_edges(&self, c: usize) -> Range<usize> {
        self.check_ptr[c]..self.check_ptr[c + 1]
    }

    /// Variables of check `c`, ascending.
    pub fn check_neighbors(&self, c: usize) -> &[u32] {
        &self.edge_var[self.check_edges(c)]
    }

    /// Edge identifiers of variable `v`, ordered by ascending check index.
    pub fn var_edges(&self, v: usize) -> &[u32] {
        &self.var_edges[self.var_ptr[v]..self.var_ptr[v + 1]]
    }

    /// Checks of variable `v`, ascending.
    pub fn var_neighbors(&self, v: usize) -> Vec<u32> {
        self.var_edges(v).iter().map(|&e| self.edge_check[e as usize]).collect()
    }

    pub fn edge_var(&self, e: usize) -> usize {
        self.edge_var[e] as usize
    }

    pub fn edge_check(&self, e: usize) -> usize {
        self.edge_check[e] as usize
    }

    pub fn var_degree(&self, v: usize) -> usize {
        self.var_ptr[v + 1] - self.var_ptr[v]
    }

    pub fn check_degree(&self, c: usize) -> usize {
        self.check_ptr[c + 1] - self.check_ptr[c]
    }

    /// `(d_v, d_c)` when every variable and every check has the same degree.
    pub fn regular_degrees(&self) -> Option<(usize, usize)> {
        let dv = self.var_degree(0);
        let dc = self.check_degree(0);
        let ok = (0..self.n).all(|v| self.var_degree(v) == dv)
            && (0..self.nc).all(|c| self.check_degree(c) == dc);
        ok.then_some((dv, dc))
    }

    /// `1 - N_c / N`.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.nc as f64 / self.n as f64
    }

    /// `(N - rank(H)) / N` with the rank computed over GF(2).
    pub fn actual_rate(&self) -> f64 {
        (self.n - gf2_rank(self)) as f64 / self.n as f64
    }

    /// Verifies that the two adjacency views describe the same edges.
    pub fn is_consistent(&self) -> bool {
        (0..self.n).all(|v| {
            self.var_edges(v).iter().enumerate().all(|(k, &e)| {
                let e = e as usize;
                self.edge_var(e) == v
                    && self.edge_var_pos[e] as usize == k
                    && self.check_edges(self.edge_check(e)).contains(&e)
            })
        }) && (0..self.nc).all(|c| self.check_edges(c).all(|e| self.edge_check(e) == c))
    }

    /// True when no two checks share more than one variable.
    pub fn is_four_cycle_free(&self) -> bool {
        let mut mark = vec![usize::MAX; self.n];
        for v in 0..self.n {
            for &e in self.var_edges(v) {
                for &u in self.check_neighbors(self.edge_check(e as usize)) {
                    let u = u as usize;
                    if u == v {
                        continue;
                    }
                    if mark[u] == v {
                        return false;
                    }
                    mark[u] = v;
                }
            }
        }
        true
    }

    /// Number of unsatisfied checks for hard decisions `bits` (0/1).
    pub fn syndrome_weight(&self, bits: &[u8]) -> usize {
        (0..self.nc)
            .filter(|&c| self.check_neighbors(c).iter().fold(0u8, |acc, &v| acc ^ bits[v as usize]) != 0)
            .count()
    }

    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        bits.len() == self.n && self.syndrome_weight(bits) == 0
    }
}
