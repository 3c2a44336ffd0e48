//! LLR translation tables and the uniform variable-node quantizer.
//!
//! A translation table maps each message of a sign-magnitude alphabet to its
//! LLR `φ(t) = ln p(t|b=0)/p(t|b=1)` and to the integer
//! `φ_Δ(t) = sgn(φ) min(⌊|φ|/Δ + 1/2⌋, 2^(w_φ-1) - 1)` used by the adder.
//! Only the positive half is stored; negative messages are the odd extension.

use serde::{Deserialize, Serialize};

use crate::dist::{JointBitDist, SignedAlphabet};
use crate::{Error, Result};

/// Saturation magnitude for LLRs of messages with a zero conditional.
pub const PHI_MAX: f64 = 50.0;

/// Real LLRs per positive message, as produced by [`build_phi`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlrTable {
    pub alphabet: SignedAlphabet,
    /// `φ(+1), ..., φ(+2^(w-1))`.
    pub phi: Vec<f64>,
    /// Set when some entry had to be saturated at `±PHI_MAX`.
    pub saturated: bool,
}

impl LlrTable {
    pub fn at(&self, t: i64) -> f64 {
        let v = self.phi[(t.unsigned_abs() - 1) as usize];
        if t < 0 {
            -v
        } else {
            v
        }
    }
}

/// LLR table together with its integer-scaled form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslationTable {
    pub alphabet: SignedAlphabet,
    pub phi: Vec<f64>,
    pub phi_delta: Vec<i32>,
    pub delta: f64,
    pub w_phi: u32,
}

impl TranslationTable {
    /// Real LLR of message `t` (odd extension).
    pub fn phi_at(&self, t: i64) -> f64 {
        let v = self.phi[(t.unsigned_abs() - 1) as usize];
        if t < 0 {
            -v
        } else {
            v
        }
    }

    /// Scaled integer LLR of message `t` (odd extension).
    pub fn phi_delta_at(&self, t: i64) -> i32 {
        let v = self.phi_delta[(t.unsigned_abs() - 1) as usize];
        if t < 0 {
            -v
        } else {
            v
        }
    }

    /// `φ_Δ` over the whole alphabet in ascending message order.
    pub fn full_integer_table(&self) -> Vec<i32> {
        self.alphabet.values().map(|t| self.phi_delta_at(t)).collect()
    }

    pub fn clip_bound(&self) -> i32 {
        (1 << (self.w_phi - 1)) - 1
    }

    pub fn max_abs(&self) -> i32 {
        self.phi_delta.iter().map(|v| v.abs()).max().unwrap_or(0)
    }
}

/// `φ(t) = ln(p(t|0)/p(t|1))` for every positive message of a symmetric joint.
///
/// A message with exactly one zero conditional saturates at `±PHI_MAX` and
/// sets the flag; a message that never occurs gets `φ = 0`.
pub fn build_phi(joint: &JointBitDist) -> Result<LlrTable> {
    let alphabet = joint
        .alphabet()
        .ok_or_else(|| Error::Unsupported("translation tables need a sign-magnitude alphabet".into()))?;
    if !joint.is_symmetric(1e-12) {
        return Err(Error::Validation("translation table input must be symmetric".into()));
    }
    let c0 = joint.conditional(0);
    let c1 = joint.conditional(1);
    let mut saturated = false;
    let phi = (1..=alphabet.max_magnitude())
        .map(|t| {
            let i = alphabet.index_of(t).expect("in range");
            match (c0[i] > 0.0, c1[i] > 0.0) {
                (true, true) => (c0[i] / c1[i]).ln().clamp(-PHI_MAX, PHI_MAX),
                (true, false) => {
                    saturated = true;
                    PHI_MAX
                }
                (false, true) => {
                    saturated = true;
                    -PHI_MAX
                }
                (false, false) => 0.0,
            }
        })
        .collect();
    Ok(LlrTable { alphabet, phi, saturated })
}

/// Scalar form of the scaling rule.
pub fn scale_llr(phi: f64, delta: f64, w_phi: u32) -> i32 {
    let clip = ((1i64 << (w_phi - 1)) - 1) as f64;
    let mag = (phi.abs() / delta + 0.5).floor().min(clip) as i32;
    if phi < 0.0 {
        -mag
    } else {
        mag
    }
}

/// Scales an LLR table with step `delta` into `w_phi`-bit integers.
pub fn scale_phi(table: &LlrTable, delta: f64, w_phi: u32) -> Result<TranslationTable> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Validation(format!("delta must be positive, got {delta}")));
    }
    if !(2..=16).contains(&w_phi) {
        return Err(Error::Validation(format!("w_phi must be in 2..=16, got {w_phi}")));
    }
    Ok(TranslationTable {
        alphabet: table.alphabet,
        phi: table.phi.clone(),
        phi_delta: table.phi.iter().map(|&p| scale_llr(p, delta, w_phi)).collect(),
        delta,
        w_phi,
    })
}

/// How `Q^v(0)` is resolved.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    /// Always `+1`; bit-exact hardware emulation.
    DeterministicPlus,
    /// `±1` with equal probability from caller-supplied randomness.
    #[default]
    Random,
}

/// Source of tie-breaking bits; `true` selects `+1`.
pub trait TieBreaker {
    fn next_tie(&mut self) -> bool;
}

/// Ties always go to `+1`.
pub struct AlwaysPlus;

impl TieBreaker for AlwaysPlus {
    fn next_tie(&mut self) -> bool {
        true
    }
}

impl<F: FnMut() -> bool> TieBreaker for F {
    fn next_tie(&mut self) -> bool {
        self()
    }
}

/// Parameters of `Q^v(y) = sgn(y) min(⌊|y|/2^r⌋ + 1, 2^(w-1))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformQuantizerParams {
    pub shift: u32,
    pub width: u32,
    pub tie_rule: TieRule,
}

impl UniformQuantizerParams {
    pub fn new(shift: u32, width: u32, tie_rule: TieRule) -> Result<Self> {
        if !(2..=8).contains(&width) {
            return Err(Error::Validation(format!("message width must be in 2..=8, got {width}")));
        }
        if shift > 30 {
            return Err(Error::Validation(format!("shift {shift} is out of range")));
        }
        Ok(UniformQuantizerParams { shift, width, tie_rule })
    }

    #[inline]
    pub fn max_magnitude(&self) -> i32 {
        1 << (self.width - 1)
    }

    /// Magnitude for `y != 0`.
    #[inline]
    pub fn magnitude(&self, y: i32) -> i32 {
        ((y.unsigned_abs() >> self.shift) as i32 + 1).min(self.max_magnitude())
    }
}

/// Evaluates `Q^v(y)`; `y = 0` is resolved by the tie rule.
#[inline]
pub fn uniform_quantize(y: i32, params: &UniformQuantizerParams, ties: &mut impl TieBreaker) -> i16 {
    if y == 0 {
        return match params.tie_rule {
            TieRule::DeterministicPlus => 1,
            TieRule::Random => {
                if ties.next_tie() {
                    1
                } else {
                    -1
                }
            }
        };
    }
    let m = params.magnitude(y) as i16;
    if y < 0 {
        -m
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params(r: u32, w: u32) -> UniformQuantizerParams {
        UniformQuantizerParams::new(r, w, TieRule::DeterministicPlus).unwrap()
    }

    #[test]
    fn phi_of_uninformative_joint_is_zero() {
        let j = JointBitDist::signed(2, vec![0.125; 4], vec![0.125; 4]).unwrap();
        let t = build_phi(&j).unwrap();
        assert_eq!(t.phi, vec![0.0, 0.0]);
        assert!(!t.saturated);
    }

    #[test]
    fn phi_of_bsc() {
        let j = JointBitDist::signed(1, vec![0.1, 0.4], vec![0.4, 0.1]).unwrap();
        let t = build_phi(&j).unwrap();
        assert_abs_diff_eq!(t.phi[0], (0.8f64 / 0.2).ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(t.phi[0], 1.386_294_361_119_890_6, epsilon = 1e-12);
        assert_eq!(t.at(-1), -t.at(1));
    }

    #[test]
    fn phi_saturates_on_zero_conditional() {
        let j = JointBitDist::signed(2, vec![0.0, 0.1, 0.1, 0.3], vec![0.3, 0.1, 0.1, 0.0]).unwrap();
        let t = build_phi(&j).unwrap();
        assert!(t.saturated);
        assert_eq!(t.phi[1], PHI_MAX);
        assert_eq!(t.phi[0], 0.0);
    }

    #[test]
    fn scaling_rule() {
        assert_eq!(scale_llr(0.30, 0.05, 8), 6);
        assert_eq!(scale_llr(8.64, 0.05, 8), 127);
        assert_eq!(scale_llr(-0.30, 0.05, 8), -6);
        assert_eq!(scale_llr(0.0, 0.05, 8), 0);
        assert_eq!(scale_llr(0.025, 0.05, 8), 1);
    }

    #[test]
    fn reference_table_shape_is_monotone_and_clips() {
        // A channel table with the same shape as a 4-bit MI-optimal quantizer output.
        let phi = vec![0.30, 0.93, 1.60, 2.36, 3.23, 4.32, 5.83, 8.64];
        let lt = LlrTable { alphabet: SignedAlphabet::new(4).unwrap(), phi, saturated: false };
        let t = scale_phi(&lt, 0.05, 8).unwrap();
        assert!(t.phi.windows(2).all(|p| p[0] < p[1]));
        assert!(t.phi_delta.windows(2).all(|p| p[0] <= p[1]));
        assert_eq!(*t.phi_delta.last().unwrap(), 127);
        assert!(t.phi_delta.iter().all(|v| v.abs() <= t.clip_bound()));
    }

    #[test]
    fn uniform_quantizer_examples() {
        let mut ties = AlwaysPlus;
        assert_eq!(uniform_quantize(5, &params(3, 2), &mut ties), 1);
        assert_eq!(uniform_quantize(-20, &params(3, 2), &mut ties), -2);
        assert_eq!(uniform_quantize(7, &params(0, 4), &mut ties), 8);
        assert_eq!(uniform_quantize(0, &params(0, 4), &mut ties), 1);
        let rp = UniformQuantizerParams::new(0, 2, TieRule::Random).unwrap();
        let mut minus = || false;
        assert_eq!(uniform_quantize(0, &rp, &mut minus), -1);
    }

    #[test]
    fn uniform_quantizer_is_odd_and_monotone_exhaustively() {
        let mut ties = AlwaysPlus;
        for w in 2..=4 {
            for r in 0..=8 {
                let p = params(r, w);
                let mut last = 0;
                for y in 1..=(1 << 12) {
                    let q = uniform_quantize(y, &p, &mut ties);
                    assert_eq!(uniform_quantize(-y, &p, &mut ties), -q);
                    assert!(q >= last);
                    assert!(q >= 1 && i32::from(q) <= p.max_magnitude());
                    last = q;
                }
            }
        }
    }

    proptest! {
        #[test]
        fn scaling_commutes_with_negation(
            phi in prop::collection::vec(0.0f64..12.0, 4),
            weight in prop::collection::vec(0.05f64..1.0, 4),
            delta in 0.001f64..1.0,
            w_phi in 4u32..=16,
        ) {
            // Symmetric joint whose positive messages carry LLR phi[k].
            let mut pos0 = Vec::new();
            let mut pos1 = Vec::new();
            for (p, q) in phi.iter().zip(&weight) {
                let s = 1.0 / (1.0 + (-p).exp());
                pos0.push(q * s);
                pos1.push(q * (1.0 - s));
            }
            let mut p0: Vec<f64> = pos1.iter().rev().copied().collect();
            p0.extend(&pos0);
            let j = JointBitDist::symmetric_from_bit0(4, p0).unwrap().normalized().unwrap();
            let lt = build_phi(&j).unwrap();
            let t = scale_phi(&lt, delta, w_phi).unwrap();
            for v in lt.alphabet.values() {
                prop_assert_eq!(t.phi_at(-v), -t.phi_at(v));
                prop_assert_eq!(t.phi_delta_at(-v), -t.phi_delta_at(v));
                prop_assert!(t.phi_delta_at(v).abs() <= t.clip_bound());
            }
            for (k, p) in phi.iter().enumerate() {
                prop_assert!((lt.phi[k] - p).abs() < 1e-9);
            }
        }
    }
}
