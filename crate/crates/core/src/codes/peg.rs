//! Progressive edge growth for regular Tanner graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::CodeGraph;
use crate::{Error, Result};

const MAX_ATTEMPTS: u64 = 32;
const UNREACHED: u32 = u32::MAX;

struct Builder {
    dc: usize,
    var_checks: Vec<Vec<u32>>,
    check_vars: Vec<Vec<u32>>,
    depth: Vec<u32>,
    var_seen: Vec<usize>,
    epoch: usize,
    frontier: Vec<u32>,
    next: Vec<u32>,
}

impl Builder {
    fn new(n: usize, nc: usize, dc: usize) -> Self {
        Builder {
            dc,
            var_checks: vec![Vec::new(); n],
            check_vars: vec![Vec::new(); nc],
            depth: vec![UNREACHED; nc],
            var_seen: vec![0; n],
            epoch: 0,
            frontier: Vec::new(),
            next: Vec::new(),
        }
    }

    fn has_room(&self, c: usize) -> bool {
        self.check_vars[c].len() < self.dc
    }

    /// Check-layer distances from `v` in the current graph.
    fn bfs(&mut self, v: usize) {
        self.depth.fill(UNREACHED);
        self.frontier.clear();
        self.epoch += 1;
        let epoch = self.epoch;
        self.var_seen[v] = epoch;
        for &c in &self.var_checks[v] {
            self.depth[c as usize] = 0;
            self.frontier.push(c);
        }
        let mut reached = self.frontier.len();
        let mut level = 0;
        while !self.frontier.is_empty() && reached < self.depth.len() {
            level += 1;
            self.next.clear();
            for &c in &self.frontier {
                for &u in &self.check_vars[c as usize] {
                    let u = u as usize;
                    if self.var_seen[u] == epoch {
                        continue;
                    }
                    self.var_seen[u] = epoch;
                    for &c2 in &self.var_checks[u] {
                        if self.depth[c2 as usize] == UNREACHED {
                            self.depth[c2 as usize] = level;
                            self.next.push(c2);
                            reached += 1;
                        }
                    }
                }
            }
            std::mem::swap(&mut self.frontier, &mut self.next);
        }
    }

    fn connect(&mut self, c: usize, v: usize) {
        self.var_checks[v].push(c as u32);
        self.check_vars[c].push(v as u32);
    }

    fn disconnect(&mut self, c: usize, v: usize) {
        self.var_checks[v].retain(|&x| x as usize != c);
        self.check_vars[c].retain(|&x| x as usize != v);
    }

    /// Would the edge `(c, u)` close a 4-cycle (or duplicate an edge)?
    fn closes_short_cycle(&self, c: usize, u: usize) -> bool {
        if self.check_vars[c].iter().any(|&x| x as usize == u) {
            return true;
        }
        self.var_checks[u].iter().any(|&c2| {
            self.check_vars[c2 as usize]
                .iter()
                .any(|&w| w as usize != u && self.check_vars[c].contains(&w))
        })
    }

    /// Frees a slot for `v`: move an edge `(c2, u)` to a check `c` with spare room,
    /// then attach `v` to `c2`. Only used when 4-cycles are the sole constraint.
    fn repair(&mut self, v: usize, min_depth: u32, rng: &mut ChaCha8Rng) -> bool {
        let nc = self.check_vars.len();
        let mut open: Vec<usize> = (0..nc).filter(|&c| self.has_room(c)).collect();
        let mut far: Vec<usize> =
            (0..nc).filter(|&c| self.depth[c] >= min_depth).collect();
        shuffle(&mut open, rng);
        shuffle(&mut far, rng);
        for &c in &open {
            if self.var_checks[v].contains(&(c as u32)) {
                continue;
            }
            for &c2 in &far {
                if c2 == c {
                    continue;
                }
                let members = self.check_vars[c2].clone();
                for u in members {
                    let u = u as usize;
                    if u == v {
                        continue;
                    }
                    self.disconnect(c2, u);
                    if !self.closes_short_cycle(c, u) {
                        self.connect(c, u);
                        self.connect(c2, v);
                        return true;
                    }
                    self.connect(c2, u);
                }
            }
        }
        false
    }

    fn finish(self) -> Result<CodeGraph> {
        let n = self.var_checks.len();
        let nc = self.check_vars.len();
        let edges = self
            .var_checks
            .iter()
            .enumerate()
            .flat_map(|(v, cs)| cs.iter().map(move |&c| (c as usize, v)))
            .collect::<Vec<_>>();
        CodeGraph::from_edges(n, nc, edges)
    }
}

fn shuffle<T>(xs: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..xs.len()).rev() {
        let j = rng.random_range(0..=i);
        xs.swap(i, j);
    }
}

fn pick(cands: &[usize], rng: &mut ChaCha8Rng) -> usize {
    cands[rng.random_range(0..cands.len())]
}

fn try_build(n: usize, nc: usize, dv: usize, dc: usize, girth_min: u32, rng: &mut ChaCha8Rng) -> Option<CodeGraph> {
    // Joining a check at depth d closes a cycle of length 2(d + 1).
    let min_depth = girth_min / 2 - 1;
    let mut b = Builder::new(n, nc, dc);
    let mut cands = Vec::new();
    for v in 0..n {
        for k in 0..dv {
            cands.clear();
            if k == 0 {
                let low = (0..nc).filter(|&c| b.has_room(c)).map(|c| b.check_vars[c].len()).min()?;
                cands.extend((0..nc).filter(|&c| b.check_vars[c].len() == low));
            } else {
                b.bfs(v);
                let ok = |c: usize, b: &Builder| b.has_room(c) && b.depth[c] >= min_depth;
                let best_depth = (0..nc).filter(|&c| ok(c, &b)).map(|c| b.depth[c]).max();
                if let Some(d) = best_depth {
                    let low = (0..nc)
                        .filter(|&c| ok(c, &b) && b.depth[c] == d)
                        .map(|c| b.check_vars[c].len())
                        .min()
                        .unwrap();
                    cands.extend((0..nc).filter(|&c| ok(c, &b) && b.depth[c] == d && b.check_vars[c].len() == low));
                }
            }
            if cands.is_empty() {
                if girth_min <= 6 && b.repair(v, min_depth.max(1), rng) {
                    continue;
                }
                return None;
            }
            let c = pick(&cands, rng);
            b.connect(c, v);
        }
    }
    b.finish().ok()
}

/// Builds a `(d_v, d_c)`-regular parity-check matrix with `n` columns whose
/// Tanner graph has girth at least `girth_min`. Deterministic in `seed`.
pub fn generate_regular_code(dv: usize, dc: usize, n: usize, seed: u64, girth_min: u32) -> Result<CodeGraph> {
    if dv < 2 || dc < 2 {
        return Err(Error::Validation(format!("degrees ({dv}, {dc}) must be at least 2")));
    }
    if n == 0 || (n * dv) % dc != 0 {
        return Err(Error::Validation(format!("N * d_v = {} is not a multiple of d_c = {dc}", n * dv)));
    }
    if girth_min < 4 || girth_min % 2 != 0 {
        return Err(Error::Validation(format!("girth bound {girth_min} must be even and at least 4")));
    }
    let nc = n * dv / dc;
    if nc < dv || n < dc {
        return Err(Error::Validation(format!("N = {n} too small for degrees ({dv}, {dc})")));
    }
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        if let Some(g) = try_build(n, nc, dv, dc, girth_min, &mut rng) {
            log::debug!("PEG succeeded on attempt {attempt}");
            return Ok(g);
        }
    }
    Err(Error::Construction(format!(
        "no ({dv}, {dc})-regular graph with N = {n} and girth >= {girth_min} after {MAX_ATTEMPTS} attempts"
    )))
}
