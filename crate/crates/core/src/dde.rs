//! Discrete density evolution and the `(Δ, r)` search for the variable node.
//!
//! The variable node adds integer translations of its inputs and quantizes the
//! sum with the uniform quantizer `Q^v`, so a design is fully described by the
//! LLR step `Δ` and the right shift `r`. Two objectives are supported:
//!
//! * [`DesignMode::Unaware`] maximizes `I(B; T^v)`, the information in the
//!   variable-to-check message;
//! * [`DesignMode::Aware`] maximizes `I(X; T^c)`, the information left after a
//!   degree-`d_c` min-approximation check node has combined `d_c - 1` such messages.
//!
//! All densities are symmetric joint tables `p(b, t)`; the check node target
//! bit `x` is the XOR of the other `d_c - 1` code bits.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelQuantizer;
use crate::dist::{flush, mutual_information, JointBitDist, SignedAlphabet, Support};
use crate::translate::{build_phi, scale_phi, LlrTable, TranslationTable};
use crate::{Error, Result};

/// Degrees of a regular code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDegrees {
    pub dv: usize,
    pub dc: usize,
}

impl NodeDegrees {
    pub fn new(dv: usize, dc: usize) -> Result<Self> {
        if dv < 2 || dc < 3 {
            return Err(Error::Config(format!("need d_v >= 2 and d_c >= 3, got ({dv}, {dc})")));
        }
        Ok(NodeDegrees { dv, dc })
    }

    /// Design rate `1 - d_v/d_c`.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.dv as f64 / self.dc as f64
    }
}

/// Which mutual information the variable-node quantizer maximizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignMode {
    /// `max I(X; T^c)` after the check node.
    Aware,
    /// `max I(B; T^v)` before the check node.
    Unaware,
}

impl std::str::FromStr for DesignMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aware" => Ok(DesignMode::Aware),
            "unaware" => Ok(DesignMode::Unaware),
            other => Err(Error::Config(format!("unknown design mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for DesignMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DesignMode::Aware => "aware",
            DesignMode::Unaware => "unaware",
        })
    }
}

/// Search grid over `(Δ, r)` plus the widths it is evaluated at.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub deltas: Vec<f64>,
    pub shifts: Vec<u32>,
    pub w_phi: u32,
    /// Message width `w`.
    pub w: u32,
}

impl GridSpec {
    /// `points` log-spaced steps on `[lo, hi]`, shifts `0..=max_shift`.
    pub fn log_spaced(w: u32, lo: f64, hi: f64, points: usize, max_shift: u32, w_phi: u32) -> Self {
        let deltas = if points <= 1 {
            vec![lo]
        } else {
            let (a, b) = (lo.log2(), hi.log2());
            (0..points)
                .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp2())
                .collect()
        };
        GridSpec { deltas, shifts: (0..=max_shift).collect(), w_phi, w }
    }

    /// 256 log-spaced steps on `[2^-12, 1]`, `r ∈ {0, ..., 8}`, `w_φ = 8`.
    pub fn default_for(w: u32) -> Self {
        Self::log_spaced(w, 2f64.powi(-12), 1.0, 256, 8, 8)
    }

    pub fn validate(&self) -> Result<()> {
        if self.deltas.is_empty() || self.shifts.is_empty() {
            return Err(Error::Config("design grid is empty".into()));
        }
        if self.deltas.iter().any(|d| !(*d > 0.0 && d.is_finite()))
            || self.deltas.windows(2).any(|p| p[0] >= p[1])
        {
            return Err(Error::Config("grid steps must be positive and strictly ascending".into()));
        }
        if self.shifts.windows(2).any(|p| p[0] >= p[1]) || self.shifts.iter().any(|&r| r > 30) {
            return Err(Error::Config("grid shifts must be strictly ascending and <= 30".into()));
        }
        if !(2..=8).contains(&self.w) {
            return Err(Error::Config(format!("message width must be in 2..=8, got {}", self.w)));
        }
        if !(4..=16).contains(&self.w_phi) {
            return Err(Error::Config(format!("w_phi must be in 4..=16, got {}", self.w_phi)));
        }
        Ok(())
    }

    /// Accumulator width that can hold `d_v + 1` translated inputs: `w_φ + ⌈log2(d_v + 1)⌉`.
    pub fn acc_width(&self, dv: usize) -> u32 {
        self.w_phi + ceil_log2(dv + 1)
    }
}

pub(crate) fn ceil_log2(n: usize) -> u32 {
    usize::BITS - (n.max(1) - 1).leading_zeros()
}

/// Bits needed to hold every value of `[lo, hi]` in two's complement.
fn twos_complement_bits(lo: i64, hi: i64) -> u32 {
    let mut w = 1;
    while lo < -(1i64 << (w - 1)) || hi > (1i64 << (w - 1)) - 1 {
        w += 1;
    }
    w
}

/// Design of one variable-node update and the densities it produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationDesign {
    /// 1-based; iteration 1 quantizes the channel message alone.
    pub iteration: usize,
    pub delta: f64,
    pub shift: u32,
    pub width: u32,
    pub channel_table: TranslationTable,
    /// Table for the incoming check messages; absent in iteration 1.
    pub check_table: Option<TranslationTable>,
    /// `I(B; T^v)` in bits.
    pub mi_vtc: f64,
    /// `I(X; T^c)` in bits.
    pub mi_ctv: f64,
    /// MI of the unquantized full sum over channel and all `d_v` check inputs.
    pub mi_app: f64,
    /// `p(b, t^v)`.
    pub vn_density: JointBitDist,
    /// `p(x, t^c)`.
    pub cn_density: JointBitDist,
}

/// A sequence of designs, one per decoding iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub mode: DesignMode,
    pub degrees: NodeDegrees,
    pub channel: JointBitDist,
    pub iterations: Vec<IterationDesign>,
}

impl EvolutionTrace {
    pub const CSV_HEADER: &'static str = "iteration,delta,r,mi_vtc,mi_ctv,mi_app";

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for d in &self.iterations {
            writeln!(
                out,
                "{},{:e},{},{},{},{}",
                d.iteration, d.delta, d.shift, d.mi_vtc, d.mi_ctv, d.mi_app
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("ascii")
    }
}

/// Density of the integer variable-node sum
/// `y = φ^ch_Δ(t^ch) + Σ_{k=1..n} φ^c_Δ(t^c_k)` for `n` conditionally
/// independent check inputs distributed as `checks.0`.
///
/// With `n = d_v - 1` this is the extrinsic sum `y^v`; with `n = d_v` it is the
/// APP sum. The support is the exact reachable interval; an interval wider
/// than `acc_width` two's-complement bits is an [`Error::Overflow`].
pub fn vn_sum_density(
    ch_joint: &JointBitDist,
    ch_table: &TranslationTable,
    checks: Option<(&JointBitDist, &TranslationTable)>,
    num_checks: usize,
    acc_width: u32,
) -> Result<JointBitDist> {
    if ch_joint.alphabet() != Some(ch_table.alphabet) {
        return Err(Error::Validation("channel table does not match channel alphabet".into()));
    }
    let ch_vals: Vec<i64> = ch_joint.values().map(|t| ch_table.phi_delta_at(t) as i64).collect();
    let mut lo = *ch_vals.iter().min().expect("non-empty");
    let mut hi = *ch_vals.iter().max().expect("non-empty");
    let mut rows = [vec![0.0; (hi - lo + 1) as usize], vec![0.0; (hi - lo + 1) as usize]];
    for b in 0..2 {
        for (i, &s) in ch_vals.iter().enumerate() {
            rows[b][(s - lo) as usize] += ch_joint.row(b)[i];
        }
    }

    if num_checks > 0 {
        let (cn_joint, cn_table) = checks.ok_or_else(|| {
            Error::Validation("check inputs requested without a check density".into())
        })?;
        if cn_joint.alphabet() != Some(cn_table.alphabet) {
            return Err(Error::Validation("check table does not match check alphabet".into()));
        }
        let cn_vals: Vec<i64> = cn_joint.values().map(|t| cn_table.phi_delta_at(t) as i64).collect();
        let cmin = *cn_vals.iter().min().expect("non-empty");
        let cmax = *cn_vals.iter().max().expect("non-empty");
        let cond = [cn_joint.conditional(0), cn_joint.conditional(1)];
        for _ in 0..num_checks {
            let (nlo, nhi) = (lo + cmin, hi + cmax);
            let len = (nhi - nlo + 1) as usize;
            let mut next = [vec![0.0; len], vec![0.0; len]];
            for b in 0..2 {
                for (s_idx, &m) in rows[b].iter().enumerate() {
                    if m == 0.0 {
                        continue;
                    }
                    for (j, &v) in cn_vals.iter().enumerate() {
                        let pc = cond[b][j];
                        if pc != 0.0 {
                            next[b][s_idx + (v - cmin) as usize] += m * pc;
                        }
                    }
                }
            }
            rows = next;
            lo = nlo;
            hi = nhi;
        }
    }

    let required = twos_complement_bits(lo, hi);
    if required > acc_width {
        return Err(Error::Overflow { required, configured: acc_width });
    }
    let [r0, r1] = rows;
    JointBitDist::interval(lo, r0.into_iter().map(flush).collect(), r1.into_iter().map(flush).collect())
}

/// Pushes an integer-sum density through `Q^v` with shift `r` and width `w`.
/// Mass at `y = 0` is split evenly between `+1` and `-1`.
pub fn quantize_density(yv: &JointBitDist, shift: u32, w: u32) -> Result<JointBitDist> {
    if !matches!(yv.support(), Support::Interval { .. }) {
        return Err(Error::Unsupported("quantize_density expects an integer-interval sum".into()));
    }
    let alphabet = SignedAlphabet::new(w)?;
    let half = alphabet.max_magnitude() as usize;
    let mut p0 = vec![0.0; 2 * half];
    let mut p1 = vec![0.0; 2 * half];
    let (plus, minus) = (half, half - 1);
    for (i, y) in yv.values().enumerate() {
        let (a, b) = (yv.row(0)[i], yv.row(1)[i]);
        if y == 0 {
            p0[plus] += 0.5 * a;
            p1[plus] += 0.5 * b;
            p0[minus] += 0.5 * a;
            p1[minus] += 0.5 * b;
            continue;
        }
        let mag = ((y.unsigned_abs() >> shift) + 1).min(half as u64) as usize;
        let idx = if y > 0 { half + mag - 1 } else { half - mag };
        p0[idx] += a;
        p1[idx] += b;
    }
    JointBitDist::signed(half, p0, p1)
}

/// Density `p(x, t^c)` of the min-approximation check node output for
/// `d_c - 1` i.i.d. inputs distributed as `tv`.
///
/// Computed by the pairwise recursion: the running output `t_{k-1}` is
/// combined with input `t^v_k` into `sgn·sgn·min`, and `x_k = x_{k-1} ⊕ b_k`.
pub fn cn_out_density(tv: &JointBitDist, dc: usize) -> Result<JointBitDist> {
    let alphabet = tv
        .alphabet()
        .ok_or_else(|| Error::Unsupported("check node density needs a sign-magnitude alphabet".into()))?;
    if dc < 2 {
        return Err(Error::Config(format!("check degree must be >= 2, got {dc}")));
    }
    let n = alphabet.len();
    let vals: Vec<i64> = alphabet.values().collect();
    // Output index of sgn(a)sgn(b)min(|a|,|b|) for every input index pair.
    let combine: Vec<usize> = (0..n * n)
        .map(|k| {
            let (a, b) = (vals[k / n], vals[k % n]);
            let m = a.abs().min(b.abs());
            let v = if (a < 0) != (b < 0) { -m } else { m };
            alphabet.index_of(v).expect("in alphabet")
        })
        .collect();
    let input = [tv.row(0).to_vec(), tv.row(1).to_vec()];
    let mut state = input.clone();
    for _ in 2..dc {
        let mut next = [vec![0.0; n], vec![0.0; n]];
        for x_prev in 0..2 {
            for i in 0..n {
                let a = state[x_prev][i];
                if a == 0.0 {
                    continue;
                }
                for bk in 0..2 {
                    let row = &input[bk];
                    let x = x_prev ^ bk;
                    for j in 0..n {
                        let c = row[j];
                        if c != 0.0 {
                            next[x][combine[i * n + j]] += a * c;
                        }
                    }
                }
            }
        }
        for row in next.iter_mut() {
            for v in row.iter_mut() {
                *v = flush(*v);
            }
        }
        state = next;
    }
    let [s0, s1] = state;
    JointBitDist::over_alphabet(alphabet, s0, s1)
}

struct Prepared {
    ch_llr: LlrTable,
    cn_llr: Option<LlrTable>,
}

fn prepare(ch_joint: &JointBitDist, cn_joint: Option<&JointBitDist>) -> Result<Prepared> {
    for j in std::iter::once(ch_joint).chain(cn_joint) {
        if !j.is_symmetric(1e-12) {
            return Err(Error::Validation("design inputs must be symmetric".into()));
        }
    }
    Ok(Prepared {
        ch_llr: build_phi(ch_joint)?,
        cn_llr: cn_joint.map(build_phi).transpose()?,
    })
}

fn tables_at(
    prep: &Prepared,
    delta: f64,
    w_phi: u32,
) -> Result<(TranslationTable, Option<TranslationTable>)> {
    Ok((
        scale_phi(&prep.ch_llr, delta, w_phi)?,
        prep.cn_llr.as_ref().map(|t| scale_phi(t, delta, w_phi)).transpose()?,
    ))
}

/// Searches the whole grid for the best `(Δ, r)`.
///
/// In iteration 1 (`cn_joint = None`) the variable node sees only the channel
/// message, otherwise the channel and `d_v - 1` check messages. Every grid
/// point is evaluated; ties go to the smaller `Δ`, then the smaller `r`.
/// The returned design has `iteration = 0`; [`evolve`] numbers them.
pub fn optimize_vn(
    mode: DesignMode,
    ch_joint: &JointBitDist,
    cn_joint: Option<&JointBitDist>,
    degrees: NodeDegrees,
    grid: &GridSpec,
) -> Result<IterationDesign> {
    grid.validate()?;
    let prep = prepare(ch_joint, cn_joint)?;
    let acc = grid.acc_width(degrees.dv);
    let n_in = if cn_joint.is_some() { degrees.dv - 1 } else { 0 };

    let scores: Vec<Vec<f64>> = grid
        .deltas
        .par_iter()
        .map(|&delta| -> Result<Vec<f64>> {
            let (ch_t, cn_t) = tables_at(&prep, delta, grid.w_phi)?;
            let sum = vn_sum_density(ch_joint, &ch_t, cn_joint.zip(cn_t.as_ref()), n_in, acc)?;
            grid.shifts
                .iter()
                .map(|&r| {
                    let tv = quantize_density(&sum, r, grid.w)?;
                    match mode {
                        DesignMode::Unaware => mutual_information(&tv),
                        DesignMode::Aware => mutual_information(&cn_out_density(&tv, degrees.dc)?),
                    }
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    for (i, row) in scores.iter().enumerate() {
        for (k, &s) in row.iter().enumerate() {
            if s > best.0 {
                best = (s, i, k);
            }
        }
    }
    let (delta, shift) = (grid.deltas[best.1], grid.shifts[best.2]);
    evaluate_design(&prep, ch_joint, cn_joint, degrees, grid, delta, shift)
}

/// Evaluates one fixed `(Δ, r)` point with all scores filled in.
pub fn evaluate_point(
    ch_joint: &JointBitDist,
    cn_joint: Option<&JointBitDist>,
    degrees: NodeDegrees,
    grid: &GridSpec,
    delta: f64,
    shift: u32,
) -> Result<IterationDesign> {
    let prep = prepare(ch_joint, cn_joint)?;
    evaluate_design(&prep, ch_joint, cn_joint, degrees, grid, delta, shift)
}

fn evaluate_design(
    prep: &Prepared,
    ch_joint: &JointBitDist,
    cn_joint: Option<&JointBitDist>,
    degrees: NodeDegrees,
    grid: &GridSpec,
    delta: f64,
    shift: u32,
) -> Result<IterationDesign> {
    let acc = grid.acc_width(degrees.dv);
    let (ch_t, cn_t) = tables_at(prep, delta, grid.w_phi)?;
    let checks = cn_joint.zip(cn_t.as_ref());
    let n_in = if cn_joint.is_some() { degrees.dv - 1 } else { 0 };
    let sum = vn_sum_density(ch_joint, &ch_t, checks, n_in, acc)?;
    let tv = quantize_density(&sum, shift, grid.w)?;
    let tc = cn_out_density(&tv, degrees.dc)?;
    let app = if cn_joint.is_some() {
        vn_sum_density(ch_joint, &ch_t, checks, degrees.dv, acc)?
    } else {
        sum
    };
    Ok(IterationDesign {
        iteration: 0,
        delta,
        shift,
        width: grid.w,
        mi_vtc: mutual_information(&tv)?,
        mi_ctv: mutual_information(&tc)?,
        mi_app: mutual_information(&app)?,
        channel_table: ch_t,
        check_table: cn_t,
        vn_density: tv,
        cn_density: tc,
    })
}

/// Designs `iterations` consecutive variable-node updates, each fed with the
/// check density produced by the previous one.
pub fn evolve(
    mode: DesignMode,
    degrees: NodeDegrees,
    ch_quantizer: &ChannelQuantizer,
    iterations: usize,
    grid: &GridSpec,
) -> Result<EvolutionTrace> {
    if iterations == 0 {
        return Err(Error::Config("at least one iteration is required".into()));
    }
    let ch = &ch_quantizer.joint;
    let mut designs: Vec<IterationDesign> = Vec::with_capacity(iterations);
    for it in 1..=iterations {
        let prev = designs.last().map(|d| &d.cn_density);
        let mut d = optimize_vn(mode, ch, prev, degrees, grid)?;
        d.iteration = it;
        log::debug!(
            "{mode} iteration {it}: delta {:.5} r {} I(B;Tv) {:.4} I(X;Tc) {:.4} app {:.4}",
            d.delta,
            d.shift,
            d.mi_vtc,
            d.mi_ctv,
            d.mi_app
        );
        designs.push(d);
    }
    Ok(EvolutionTrace { mode, degrees, channel: ch.clone(), iterations: designs })
}
