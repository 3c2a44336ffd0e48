//! BPSK over AWGN and the symmetric mutual-information-maximizing channel quantizer.
//!
//! Bit `0` is sent as `+1`, bit `1` as `-1`. The channel LLR `L = 2y/σ²` is
//! positive for bit `0`; for bit `0` it is Gaussian with mean `μ = 2/σ²` and
//! variance `2μ`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::dist::{mutual_information, JointBitDist, SignedAlphabet, Support};
use crate::{Error, Result};

/// Default number of fine LLR cells.
pub const DEFAULT_BINS: usize = 4000;

/// Unit-energy BPSK over AWGN at a given `E_b/N_0` and code rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub ebno_db: f64,
    pub rate: f64,
}

impl ChannelModel {
    pub fn new(ebno_db: f64, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) || !ebno_db.is_finite() {
            return Err(Error::Validation(format!(
                "invalid channel: ebno {ebno_db} dB, rate {rate}"
            )));
        }
        Ok(ChannelModel { ebno_db, rate })
    }

    /// Noise standard deviation per real dimension, `σ² = 1 / (2 R 10^(Eb/N0 / 10))`.
    pub fn sigma(&self) -> f64 {
        (1.0 / (2.0 * self.rate * 10f64.powf(self.ebno_db / 10.0))).sqrt()
    }

    /// Mean of the channel LLR given bit `0`.
    pub fn llr_mean(&self) -> f64 {
        2.0 / (self.sigma() * self.sigma())
    }

    /// The grid clip used when no explicit value is given: `6/σ + 8`.
    pub fn default_clip(&self) -> f64 {
        6.0 / self.sigma() + 8.0
    }
}

/// A fine uniform LLR grid together with the density `p(b, y)` on it.
#[derive(Clone, Debug, PartialEq)]
pub struct LlrGrid {
    pub joint: JointBitDist,
    pub cell_width: f64,
}

impl LlrGrid {
    /// Number of cells on the positive side.
    pub fn half(&self) -> usize {
        self.joint.len() / 2
    }
}

/// Upper tail probability `P(Z > z)` for a standard normal.
fn q_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Probability that `N(mean, std²)` falls into `[lo, hi]`; infinite bounds allowed.
fn gauss_mass(mean: f64, std: f64, lo: f64, hi: f64) -> f64 {
    let zl = (lo - mean) / std;
    let zh = (hi - mean) / std;
    // Use the tail on the side away from the mean to keep precision.
    if zl >= 0.0 {
        q_tail(zl) - q_tail(zh)
    } else if zh <= 0.0 {
        q_tail(-zh) - q_tail(-zl)
    } else {
        1.0 - q_tail(-zl) - q_tail(zh)
    }
}

/// Discretizes the AWGN LLR density onto `bins` uniform cells over
/// `[-llr_clip, +llr_clip]`; tails are folded into the edge cells.
pub fn fine_llr_density(model: &ChannelModel, bins: usize, llr_clip: f64) -> Result<LlrGrid> {
    if bins < 64 || bins % 2 != 0 {
        return Err(Error::Validation(format!("bins must be even and >= 64, got {bins}")));
    }
    if !(llr_clip > 0.0) {
        return Err(Error::Validation(format!("llr_clip must be positive, got {llr_clip}")));
    }
    let mean = model.llr_mean();
    let std = (2.0 * mean).sqrt();
    let width = 2.0 * llr_clip / bins as f64;
    let half = bins / 2;
    let edge = |k: usize| -llr_clip + k as f64 * width;
    let p0: Vec<f64> = (0..bins)
        .map(|i| {
            let lo = if i == 0 { f64::NEG_INFINITY } else { edge(i) };
            let hi = if i == bins - 1 { f64::INFINITY } else { edge(i + 1) };
            0.5 * gauss_mass(mean, std, lo, hi).max(0.0)
        })
        .collect();
    let joint = JointBitDist::symmetric_from_bit0(half, p0)?;
    let joint = joint.normalized()?;
    Ok(LlrGrid { joint, cell_width: width })
}

/// Symmetric threshold quantizer on `|LLR|` plus sign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelQuantizer {
    pub width: u32,
    /// Ascending magnitude thresholds in LLR units, `2^(w-1) - 1` of them.
    pub thresholds: Vec<f64>,
    /// Induced `p(b, t^ch)` over the `w`-bit alphabet.
    pub joint: JointBitDist,
}

impl ChannelQuantizer {
    pub fn alphabet(&self) -> SignedAlphabet {
        SignedAlphabet::new(self.width).expect("validated at construction")
    }

    /// Maps a channel LLR to a message: magnitude `1 + #{τ <= |L|}`, sign of `L` (zero counts as +).
    pub fn quantize(&self, llr: f64) -> i16 {
        let mag = 1 + self.thresholds.partition_point(|&t| t <= llr.abs()) as i16;
        if llr < 0.0 {
            -mag
        } else {
            mag
        }
    }

    /// Re-bins a fine LLR density with these thresholds.
    pub fn apply(&self, fine: &LlrGrid) -> Result<JointBitDist> {
        let half = 1usize << (self.width - 1);
        let h = fine.half();
        let mut p0 = vec![0.0; 2 * half];
        let mut p1 = vec![0.0; 2 * half];
        for m in 0..h {
            let lower = m as f64 * fine.cell_width;
            let level = self.thresholds.partition_point(|&t| t <= lower);
            let (pos, neg) = (half + level, half - 1 - level);
            let (ip, ineg) = (h + m, h - 1 - m);
            p0[pos] += fine.joint.row(0)[ip];
            p1[pos] += fine.joint.row(1)[ip];
            p0[neg] += fine.joint.row(0)[ineg];
            p1[neg] += fine.joint.row(1)[ineg];
        }
        JointBitDist::signed(half, p0, p1)
    }

    pub fn mutual_information(&self) -> f64 {
        mutual_information(&self.joint).unwrap_or(0.0)
    }
}

/// One side's contribution to the MI for a group with masses `(a0, a1)` on the
/// positive side; the mirrored group contributes the same amount.
#[inline]
fn group_gain(a0: f64, a1: f64, p0: f64, p1: f64) -> f64 {
    let t = a0 + a1;
    if t <= 0.0 {
        return 0.0;
    }
    let term = |a: f64, pb: f64| if a > 0.0 { a * (a / (pb * t)).log2() } else { 0.0 };
    term(a0, p0) + term(a1, p1)
}

/// Globally MI-optimal symmetric threshold quantizer on the fine grid.
///
/// Dynamic programming over contiguous groups of magnitude cells; each of
/// the `2^(w_ch-1)` groups must contain at least one cell.
pub fn design_channel_quantizer(fine: &LlrGrid, w_ch: u32) -> Result<ChannelQuantizer> {
    if !(1..=6).contains(&w_ch) {
        return Err(Error::Config(format!("w_ch must be in 1..=6, got {w_ch}")));
    }
    if !matches!(fine.joint.support(), Support::Signed { .. }) || !fine.joint.is_symmetric(1e-12) {
        return Err(Error::Validation("fine density must be symmetric on a signed grid".into()));
    }
    let levels = 1usize << (w_ch - 1);
    let h = fine.half();
    if h < levels {
        return Err(Error::Config(format!(
            "grid has {h} magnitude cells, fewer than the {levels} quantizer levels"
        )));
    }
    let [p0, p1] = fine.joint.bit_marginal();
    let mut c0 = vec![0.0; h + 1];
    let mut c1 = vec![0.0; h + 1];
    for m in 0..h {
        c0[m + 1] = c0[m] + fine.joint.row(0)[h + m];
        c1[m + 1] = c1[m] + fine.joint.row(1)[h + m];
    }
    let gain = |i: usize, j: usize| group_gain(c0[j] - c0[i], c1[j] - c1[i], p0, p1);

    // best[k][j]: best value using k groups covering cells [0, j).
    let neg = f64::NEG_INFINITY;
    let mut best = vec![vec![neg; h + 1]; levels + 1];
    let mut arg = vec![vec![0usize; h + 1]; levels + 1];
    best[0][0] = 0.0;
    for k in 1..=levels {
        // Groups k+1..levels still need at least one cell each.
        let j_max = h - (levels - k);
        for j in k..=j_max {
            let mut bv = neg;
            let mut bi = 0;
            for i in (k - 1)..j {
                let prev = best[k - 1][i];
                if prev == neg {
                    continue;
                }
                let v = prev + gain(i, j);
                if v > bv {
                    bv = v;
                    bi = i;
                }
            }
            best[k][j] = bv;
            arg[k][j] = bi;
        }
    }
    let mut bounds = Vec::with_capacity(levels - 1);
    let mut j = h;
    for k in (1..=levels).rev() {
        let i = arg[k][j];
        if k > 1 {
            bounds.push(i);
        }
        j = i;
    }
    bounds.reverse();
    let thresholds = bounds.iter().map(|&b| b as f64 * fine.cell_width).collect();
    let mut q = ChannelQuantizer {
        width: w_ch,
        thresholds,
        joint: JointBitDist::signed(levels, vec![0.0; 2 * levels], vec![0.0; 2 * levels])?,
    };
    q.joint = q.apply(fine)?;
    Ok(q)
}

/// Designs the channel quantizer for a model with the default grid.
pub fn design_for_model(model: &ChannelModel, w_ch: u32) -> Result<ChannelQuantizer> {
    let grid = fine_llr_density(model, DEFAULT_BINS, model.default_clip())?;
    design_channel_quantizer(&grid, w_ch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::check_symmetry;
    use approx::assert_abs_diff_eq;

    /// Binary-input AWGN mutual information by Simpson quadrature:
    /// `1 - E[log2(1 + e^-L)]`, `L ~ N(μ, 2μ)`.
    fn biawgn_mi_quadrature(sigma: f64) -> f64 {
        let mu = 2.0 / (sigma * sigma);
        let s = (2.0 * mu).sqrt();
        let (a, b) = (mu - 14.0 * s, mu + 14.0 * s);
        let n = 200_000;
        let h = (b - a) / n as f64;
        let f = |l: f64| {
            let z = (l - mu) / s;
            let pdf = (-0.5 * z * z).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
            let loss = if l > 0.0 { (-l).exp().ln_1p() } else { -l + l.exp().ln_1p() };
            pdf * loss / std::f64::consts::LN_2
        };
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        1.0 - acc * h / 3.0
    }

    #[test]
    fn sigma_formula() {
        let m = ChannelModel::new(0.0, 0.5).unwrap();
        assert_abs_diff_eq!(m.sigma(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn fine_density_extremes() {
        let m = ChannelModel::new(40.0, 0.84).unwrap();
        let g = fine_llr_density(&m, 4000, m.default_clip()).unwrap();
        assert_abs_diff_eq!(mutual_information(&g.joint).unwrap(), 1.0, epsilon = 1e-6);
        let m = ChannelModel::new(-40.0, 0.84).unwrap();
        let g = fine_llr_density(&m, 4000, m.default_clip()).unwrap();
        assert!(mutual_information(&g.joint).unwrap() < 1e-3);
    }

    #[test]
    fn fine_density_matches_capacity_quadrature() {
        // sigma = 1 at rate 1/2 and 0 dB.
        let m = ChannelModel::new(0.0, 0.5).unwrap();
        let g = fine_llr_density(&m, 4000, 30.0).unwrap();
        assert!(g.joint.is_symmetric(0.0));
        let mi = mutual_information(&g.joint).unwrap();
        let oracle = biawgn_mi_quadrature(1.0);
        assert_abs_diff_eq!(mi, oracle, epsilon = 1e-4);
    }

    #[test]
    fn fine_density_rejects_bad_grid() {
        let m = ChannelModel::new(1.0, 0.5).unwrap();
        assert!(fine_llr_density(&m, 32, 10.0).is_err());
        assert!(fine_llr_density(&m, 100, 0.0).is_err());
    }

    #[test]
    fn one_bit_quantizer_is_bsc() {
        let m = ChannelModel::new(0.0, 0.5).unwrap();
        let g = fine_llr_density(&m, 4000, m.default_clip()).unwrap();
        let q = design_channel_quantizer(&g, 1).unwrap();
        assert!(q.thresholds.is_empty());
        // crossover Q(1/σ)
        let eps = q_tail(1.0 / m.sigma());
        assert_abs_diff_eq!(q.joint.prob(0, -1), 0.5 * eps, epsilon = 1e-6);
        assert_abs_diff_eq!(q.joint.prob(0, 1), 0.5 * (1.0 - eps), epsilon = 1e-6);
    }

    #[test]
    fn quantizer_refinement_is_monotone() {
        let m = ChannelModel::new(2.0, 0.84).unwrap();
        let g = fine_llr_density(&m, 4000, m.default_clip()).unwrap();
        let fine_mi = mutual_information(&g.joint).unwrap();
        let mis: Vec<f64> = (2..=4)
            .map(|w| {
                let q = design_channel_quantizer(&g, w).unwrap();
                assert!(check_symmetry(&q.joint, 1e-12).unwrap());
                assert!(q.thresholds.windows(2).all(|p| p[0] < p[1]));
                q.mutual_information()
            })
            .collect();
        assert!(mis[0] <= mis[1] && mis[1] <= mis[2]);
        assert!(mis[2] <= fine_mi + 1e-12);
    }

    #[test]
    fn six_bit_quantizer_is_nearly_lossless() {
        let m = ChannelModel::new(2.0, 0.84).unwrap();
        let g = fine_llr_density(&m, 4000, m.default_clip()).unwrap();
        let q = design_channel_quantizer(&g, 6).unwrap();
        let fine_mi = mutual_information(&g.joint).unwrap();
        assert!(q.mutual_information() <= fine_mi + 1e-12);
        assert!(fine_mi - q.mutual_information() < 1e-3);
    }

    #[test]
    fn rebinning_is_idempotent() {
        let m = ChannelModel::new(3.45, 0.84).unwrap();
        let g = fine_llr_density(&m, 4000, m.default_clip()).unwrap();
        let q = design_channel_quantizer(&g, 4).unwrap();
        assert_eq!(q.apply(&g).unwrap(), q.joint);
        for (k, &t) in q.thresholds.iter().enumerate() {
            assert_eq!(q.quantize(t + 1e-9), k as i16 + 2);
            assert_eq!(q.quantize(-(t + 1e-9)), -(k as i16 + 2));
        }
        assert_eq!(q.quantize(0.0), 1);
    }

    #[test]
    fn too_many_levels_for_grid() {
        let joint = JointBitDist::symmetric_from_bit0(4, vec![0.01, 0.04, 0.1, 0.35, 0.0, 0.0, 0.0, 0.0])
            .unwrap()
            .normalized()
            .unwrap();
        let g = LlrGrid { joint, cell_width: 1.0 };
        assert!(design_channel_quantizer(&g, 3).is_ok());
        assert!(matches!(design_channel_quantizer(&g, 4), Err(Error::Config(_))));
        assert!(matches!(design_channel_quantizer(&g, 7), Err(Error::Config(_))));
    }
}
