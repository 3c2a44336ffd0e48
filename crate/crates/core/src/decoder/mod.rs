//! Finite-alphabet flooding decoder and a floating-point BP reference.
//!
//! One decoding iteration is a variable-node pass (channel messages only in
//! the first), a hard decision with a syndrome test, and a check-node pass.

mod bp;
mod cn;
mod spec;

pub use bp::{boxplus, boxplus_correction, decode_bp, BpDecoder, CheckRule, LLR_LIMIT};
pub use cn::{
    cn_netlist, cn_update_boolean, cn_update_min, decode_sign_magnitude, encode_sign_magnitude, tree_comparisons,
    verify_cn_circuit, CnSchedule, Gate, Netlist,
};
pub use spec::{DecoderSpec, DesignConfig};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codes::CodeGraph;
use crate::dde::IterationDesign;
use crate::translate::{uniform_quantize, TieBreaker, TieRule, UniformQuantizerParams};
use crate::{Error, Result};

/// Outcome of one decoding attempt.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeResult {
    /// Hard decisions, 0/1.
    pub bits: Vec<u8>,
    /// Zero syndrome at the last decision.
    pub success: bool,
    pub iterations: usize,
    /// Unsatisfied checks after each iteration's decision.
    pub syndrome_weights: Vec<usize>,
}

/// Tie bits drawn from a seeded stream. With `mirror` set every bit is
/// inverted, which is what a negated input needs to stay sign-symmetric.
pub struct TieBits {
    rng: ChaCha8Rng,
    buf: u64,
    left: u32,
    mirror: bool,
}

impl TieBits {
    pub fn new(seed: u64, mirror: bool) -> Self {
        TieBits { rng: ChaCha8Rng::seed_from_u64(seed), buf: 0, left: 0, mirror }
    }
}

impl TieBreaker for TieBits {
    #[inline]
    fn next_tie(&mut self) -> bool {
        if self.left == 0 {
            self.buf = self.rng.next_u64();
            self.left = 64;
        }
        let b = self.buf & 1 == 1;
        self.buf >>= 1;
        self.left -= 1;
        b ^ self.mirror
    }
}

/// Integer tables of one iteration, indexed by `t + 2^(w-1)`.
#[derive(Clone, Debug)]
struct Compiled {
    ch: Vec<i32>,
    ch_half: i32,
    cn: Option<Vec<i32>>,
    cn_half: i32,
    q: UniformQuantizerParams,
}

impl Compiled {
    fn new(d: &IterationDesign, tie_rule: TieRule) -> Result<Self> {
        let ch_half = d.channel_table.alphabet.max_magnitude() as i32;
        let lut = |t: &crate::translate::TranslationTable| {
            let h = t.alphabet.max_magnitude();
            (-h..=h).map(|v| if v == 0 { 0 } else { t.phi_delta_at(v) }).collect::<Vec<i32>>()
        };
        let cn_half = d.check_table.as_ref().map_or(0, |t| t.alphabet.max_magnitude() as i32);
        Ok(Compiled {
            ch: lut(&d.channel_table),
            ch_half,
            cn: d.check_table.as_ref().map(lut),
            cn_half,
            q: UniformQuantizerParams::new(d.shift, d.width, tie_rule)?,
        })
    }

    /// Writes extrinsic outputs and returns the full sum.
    #[inline]
    fn vn_update(&self, t_ch: i16, cn_in: &[i16], out: &mut [i16], ties: &mut impl TieBreaker) -> i32 {
        let base = self.ch[(t_ch as i32 + self.ch_half) as usize];
        match &self.cn {
            None => {
                for o in out.iter_mut() {
                    *o = uniform_quantize(base, &self.q, ties);
                }
                base
            }
            Some(cn) => {
                let idx = |t: i16| (t as i32 + self.cn_half) as usize;
                let full = base + cn_in.iter().map(|&t| cn[idx(t)]).sum::<i32>();
                for (o, &t) in out.iter_mut().zip(cn_in) {
                    *o = uniform_quantize(full - cn[idx(t)], &self.q, ties);
                }
                full
            }
        }
    }
}

/// One variable-node update with the tables of `design`.
///
/// `cn_msgs` holds one message per edge; in a design without a check table
/// (the first iteration) their values are ignored and every output is the
/// quantized channel translation. Returns the extrinsic outputs and the full sum.
pub fn vn_update_fixed(
    ch_msg: i16,
    cn_msgs: &[i16],
    design: &IterationDesign,
    tie_rule: TieRule,
    ties: &mut impl TieBreaker,
) -> Result<(Vec<i16>, i32)> {
    let c = Compiled::new(design, tie_rule)?;
    if ch_msg == 0 || ch_msg.abs() as i32 > c.ch_half {
        return Err(Error::Validation(format!("channel message {ch_msg} outside its alphabet")));
    }
    if c.cn.is_some() && cn_msgs.iter().any(|&t| t == 0 || t.abs() as i32 > c.cn_half) {
        return Err(Error::Validation("check message outside its alphabet".into()));
    }
    let mut out = vec![0; cn_msgs.len()];
    let full = c.vn_update(ch_msg, cn_msgs, &mut out, ties);
    Ok((out, full))
}

/// Switches for [`FixedDecoder::decode_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodeOptions {
    /// Stop as soon as the syndrome is zero.
    pub early_stop: bool,
    /// Invert every tie bit.
    pub mirror_ties: bool,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        DecodeOptions { early_stop: true, mirror_ties: false }
    }
}

/// Fixed-point decoder bound to one graph and spec; owns its message buffers.
pub struct FixedDecoder<'a> {
    graph: &'a CodeGraph,
    spec: &'a DecoderSpec,
    compiled: Vec<Compiled>,
    v2c: Vec<i16>,
    c2v: Vec<i16>,
    gin: Vec<i16>,
    gout: Vec<i16>,
}

impl<'a> FixedDecoder<'a> {
    pub fn new(graph: &'a CodeGraph, spec: &'a DecoderSpec) -> Result<Self> {
        spec.validate()?;
        spec.check_graph(graph)?;
        let compiled = spec.iterations.iter().map(|d| Compiled::new(d, spec.tie_rule)).collect::<Result<_>>()?;
        let e = graph.num_edges();
        let dv = spec.degrees.dv;
        Ok(FixedDecoder { graph, spec, compiled, v2c: vec![0; e], c2v: vec![1; e], gin: vec![1; dv], gout: vec![0; dv] })
    }

    pub fn decode(&mut self, ch_msgs: &[i16], seed: u64) -> Result<DecodeResult> {
        self.decode_with(ch_msgs, seed, DecodeOptions::default(), |_, _| {})
    }

    /// Decodes channel messages; `observe(iteration, v2c)` sees the
    /// variable-to-check messages (check-major edge order) after each pass.
    pub fn decode_with<F>(&mut self, ch_msgs: &[i16], seed: u64, opts: DecodeOptions, mut observe: F) -> Result<DecodeResult>
    where
        F: FnMut(usize, &[i16]),
    {
        let g = self.graph;
        let n = g.num_vars();
        if ch_msgs.len() != n {
            return Err(Error::Config(format!("got {} channel messages for N = {n}", ch_msgs.len())));
        }
        let h_ch = 1i16 << (self.spec.w_ch - 1);
        if ch_msgs.iter().any(|&t| t == 0 || t.abs() > h_ch) {
            return Err(Error::Validation(format!("channel message outside the {}-bit alphabet", self.spec.w_ch)));
        }
        let mut ties = TieBits::new(seed, opts.mirror_ties);
        let random_ties = self.spec.tie_rule == TieRule::Random;
        let acc_limit = 1i32 << (self.spec.w_y - 1);
        let max_it = self.spec.max_iterations;
        let mut bits = vec![0u8; n];
        let mut syndromes = Vec::with_capacity(max_it);
        for it in 1..=max_it {
            let comp = &self.compiled[it.min(self.compiled.len()) - 1];
            for (v, bit) in bits.iter_mut().enumerate() {
                let edges = g.var_edges(v);
                let d = edges.len();
                if comp.cn.is_some() {
                    for (slot, &e) in self.gin[..d].iter_mut().zip(edges) {
                        *slot = self.c2v[e as usize];
                    }
                }
                let full = comp.vn_update(ch_msgs[v], &self.gin[..d], &mut self.gout[..d], &mut ties);
                assert!(full.abs() < acc_limit, "accumulator overflow: {full} needs more than {} bits", self.spec.w_y);
                for (&e, &o) in edges.iter().zip(&self.gout[..d]) {
                    self.v2c[e as usize] = o;
                }
                *bit = match full.signum() {
                    1 => 0,
                    -1 => 1,
                    _ if random_ties => !ties.next_tie() as u8,
                    _ => 0,
                };
            }
            observe(it, &self.v2c);
            let weight = g.syndrome_weight(&bits);
            syndromes.push(weight);
            if weight == 0 && opts.early_stop {
                return Ok(DecodeResult { bits, success: true, iterations: it, syndrome_weights: syndromes });
            }
            if it < max_it {
                for c in 0..g.num_checks() {
                    let r = g.check_edges(c);
                    cn::two_minima_update(&self.v2c[r.clone()], &mut self.c2v[r]);
                }
            }
        }
        let success = syndromes.last() == Some(&0);
        Ok(DecodeResult { bits, success, iterations: max_it, syndrome_weights: syndromes })
    }
}

/// Decodes quantized channel messages with a fresh [`FixedDecoder`].
pub fn decode(ch_msgs: &[i16], graph: &CodeGraph, spec: &DecoderSpec, seed: u64) -> Result<DecodeResult> {
    FixedDecoder::new(graph, spec)?.decode(ch_msgs, seed)
}
