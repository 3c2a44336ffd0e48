//! Floating-point flooding belief propagation.

use serde::{Deserialize, Serialize};

use super::DecodeResult;
use crate::codes::CodeGraph;

/// Largest LLR magnitude carried by BP messages.
pub const LLR_LIMIT: f64 = 40.0;

/// Check node rule for [`decode_bp`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckRule {
    #[default]
    BoxPlus,
    /// Sign product and minimum magnitude.
    MinSum,
}

/// Correction term `ln(1 + e^{-|x-y|}) - ln(1 + e^{-|x+y|})`.
pub fn boxplus_correction(x: f64, y: f64) -> f64 {
    (-(x - y).abs()).exp().ln_1p() - (-(x + y).abs()).exp().ln_1p()
}

/// `a ⊞ b = 2 atanh(tanh(a/2) tanh(b/2))` in the min-plus-correction form.
pub fn boxplus(a: f64, b: f64) -> f64 {
    let (x, y) = (a.abs(), b.abs());
    let s = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    s * (x.min(y) - boxplus_correction(x, y))
}

/// Reusable BP decoder state for one graph.
pub struct BpDecoder<'g> {
    graph: &'g CodeGraph,
    rule: CheckRule,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'g> BpDecoder<'g> {
    pub fn new(graph: &'g CodeGraph, rule: CheckRule) -> Self {
        let e = graph.num_edges();
        BpDecoder { graph, rule, v2c: vec![0.0; e], c2v: vec![0.0; e], scratch: Vec::new() }
    }

    /// Iteration `ℓ`: variable update (channel only in the first), hard
    /// decision, syndrome test, then check update.
    pub fn decode(&mut self, llrs: &[f64], max_iters: usize) -> DecodeResult {
        let g = self.graph;
        assert_eq!(llrs.len(), g.num_vars(), "input length must equal N");
        let mut bits = vec![0u8; g.num_vars()];
        let mut syndromes = Vec::new();
        self.c2v.fill(0.0);
        for it in 1..=max_iters.max(1) {
            for (v, bit) in bits.iter_mut().enumerate() {
                let l = llrs[v].clamp(-LLR_LIMIT, LLR_LIMIT);
                let edges = g.var_edges(v);
                let total: f64 = l + edges.iter().map(|&e| self.c2v[e as usize]).sum::<f64>();
                for &e in edges {
                    let e = e as usize;
                    self.v2c[e] = (total - self.c2v[e]).clamp(-LLR_LIMIT, LLR_LIMIT);
                }
                *bit = (total < 0.0) as u8;
            }
            let weight = g.syndrome_weight(&bits);
            syndromes.push(weight);
            if weight == 0 {
                return DecodeResult { bits, success: true, iterations: it, syndrome_weights: syndromes };
            }
            if it == max_iters {
                break;
            }
            for c in 0..g.num_checks() {
                let r = g.check_edges(c);
                match self.rule {
                    CheckRule::BoxPlus => tanh_rule(&self.v2c[r.clone()], &mut self.c2v[r], &mut self.scratch),
                    CheckRule::MinSum => min_rule(&self.v2c[r.clone()], &mut self.c2v[r]),
                }
            }
        }
        DecodeResult { bits, success: false, iterations: max_iters, syndrome_weights: syndromes }
    }
}

/// Extrinsic box-plus via forward/backward products of `tanh(L/2)`.
fn tanh_rule(inp: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) {
    let d = inp.len();
    scratch.clear();
    scratch.extend(inp.iter().map(|&l| (0.5 * l).tanh()));
    // scratch[d + i] holds the product of tanh values past position i.
    scratch.resize(2 * d + 1, 1.0);
    for i in (0..d).rev() {
        scratch[d + i] = scratch[d + i + 1] * scratch[i];
    }
    let mut prefix = 1.0;
    for i in 0..d {
        let p = prefix * scratch[d + i + 1];
        out[i] = (2.0 * p.atanh()).clamp(-LLR_LIMIT, LLR_LIMIT);
        prefix *= scratch[i];
    }
}

fn min_rule(inp: &[f64], out: &mut [f64]) {
    let mut neg = false;
    let (mut m1, mut m2, mut pos) = (f64::INFINITY, f64::INFINITY, 0);
    for (i, &l) in inp.iter().enumerate() {
        neg ^= l < 0.0;
        let a = l.abs();
        if a < m1 {
            m2 = m1;
            m1 = a;
            pos = i;
        } else if a < m2 {
            m2 = a;
        }
    }
    for (i, (&l, o)) in inp.iter().zip(out.iter_mut()).enumerate() {
        let m = if i == pos { m2 } else { m1 };
        *o = if neg ^ (l < 0.0) { -m } else { m };
    }
}

/// Convenience wrapper around [`BpDecoder`].
pub fn decode_bp(llrs: &[f64], graph: &CodeGraph, max_iters: usize, rule: CheckRule) -> DecodeResult {
    BpDecoder::new(graph, rule).decode(llrs, max_iters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn boxplus_examples() {
        assert_eq!(boxplus(1.7, 0.0), 0.0);
        assert_eq!(boxplus(-3.0, 0.0).abs(), 0.0);
        let oracle = 2.0 * (1f64.tanh() * 1f64.tanh()).atanh();
        assert_abs_diff_eq!(boxplus(2.0, 2.0), oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(boxplus(2.0, 2.0), 1.3250, epsilon = 5e-5);
        assert_abs_diff_eq!(boxplus(-2.0, 3.0), -2.0 * (1f64.tanh() * 1.5f64.tanh()).atanh(), epsilon = 1e-12);
        // Large, well separated arguments reduce to the minimum rule.
        assert!(boxplus_correction(60.0, 20.0).abs() < 1e-8);
        assert_abs_diff_eq!(boxplus(60.0, -20.0), -20.0, epsilon = 1e-8);
    }

    #[test]
    fn tanh_rule_matches_pairwise_boxplus() {
        let inp = [1.3, -0.4, 2.2, 5.0, -0.9];
        let mut out = [0.0; 5];
        let mut scratch = Vec::new();
        tanh_rule(&inp, &mut out, &mut scratch);
        for j in 0..inp.len() {
            let expect = inp
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, &l)| l)
                .reduce(boxplus)
                .unwrap();
            assert_abs_diff_eq!(out[j], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn min_rule_is_extrinsic() {
        let mut out = [0.0; 4];
        min_rule(&[2.0, -1.0, 3.0, 0.5], &mut out);
        assert_eq!(out, [-0.5, 0.5, -0.5, -1.0]);
    }
}
