//! Dense GF(2) elimination on bit-packed rows.

use super::CodeGraph;

#[derive(Clone, Debug)]
struct BitRows {
    words: usize,
    rows: Vec<Vec<u64>>,
}

impl BitRows {
    fn from_graph(g: &CodeGraph) -> Self {
        let words = g.num_vars().div_ceil(64);
        let rows = (0..g.num_checks())
            .map(|c| {
                let mut row = vec![0u64; words];
                for &v in g.check_neighbors(c) {
                    row[v as usize / 64] |= 1 << (v % 64);
                }
                row
            })
            .collect();
        BitRows { words, rows }
    }

    /// Reduces to row echelon form in place (fully reduced above pivots too).
    /// Returns the pivot column of each surviving row.
    fn reduce(&mut self, n: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..n {
            if r == self.rows.len() {
                break;
            }
            let (w, bit) = (col / 64, 1u64 << (col % 64));
            let Some(p) = (r..self.rows.len()).find(|&i| self.rows[i][w] & bit != 0) else {
                continue;
            };
            self.rows.swap(r, p);
            let pivot = self.rows[r].clone();
            for (i, row) in self.rows.iter_mut().enumerate() {
                if i != r && row[w] & bit != 0 {
                    for (a, b) in row.iter_mut().zip(&pivot).skip(w) {
                        *a ^= b;
                    }
                }
            }
            pivots.push(col);
            r += 1;
        }
        self.rows.truncate(r);
        debug_assert!(self.rows.iter().all(|row| row.len() == self.words));
        pivots
    }
}

/// Rank of the parity-check matrix over GF(2).
pub fn gf2_rank(g: &CodeGraph) -> usize {
    BitRows::from_graph(g).reduce(g.num_vars()).len()
}

/// Systematic encoder: information bits occupy the non-pivot columns of the
/// reduced parity-check matrix, and each pivot bit is a parity of them.
#[derive(Clone, Debug)]
pub struct Encoder {
    n: usize,
    info_positions: Vec<usize>,
    pivots: Vec<usize>,
    rows: Vec<Vec<u64>>,
}

impl Encoder {
    pub fn new(g: &CodeGraph) -> Self {
        let n = g.num_vars();
        let mut m = BitRows::from_graph(g);
        let pivots = m.reduce(n);
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let info_positions = (0..n).filter(|&j| !is_pivot[j]).collect();
        Encoder { n, info_positions, pivots, rows: m.rows }
    }

    /// Code dimension `K = N - rank(H)`.
    pub fn dimension(&self) -> usize {
        self.info_positions.len()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// Maps `K` information bits (0/1) to a codeword of length `N`.
    pub fn encode(&self, info: &[u8]) -> Vec<u8> {
        assert_eq!(info.len(), self.dimension(), "information word has wrong length");
        let mut packed = vec![0u64; self.n.div_ceil(64)];
        for (&pos, &b) in self.info_positions.iter().zip(info) {
            if b & 1 == 1 {
                packed[pos / 64] |= 1 << (pos % 64);
            }
        }
        let mut word = vec![0u8; self.n];
        for (&pos, &b) in self.info_positions.iter().zip(info) {
            word[pos] = b & 1;
        }
        // Each reduced row touches exactly one pivot, so its parity over the
        // information bits fixes that pivot.
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let ones: u32 = row.iter().zip(&packed).map(|(a, b)| (a & b).count_ones()).sum();
            word[p] = (ones & 1) as u8;
        }
        word
    }
}
