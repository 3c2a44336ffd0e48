//! Finite alphabets, joint bit/message distributions and information measures.
//!
//! Every density handled during the design phase is a table `p(b, t)` with a
//! binary coordinate `b` and an integer message coordinate `t`. The message
//! coordinate lives either on a sign-magnitude alphabet without zero or on a
//! contiguous integer interval (the variable-node sums).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Entries below this are flushed to zero.
pub const FLUSH_BELOW: f64 = 1e-300;

/// Tolerance used when validating total mass.
pub const MASS_TOL: f64 = 1e-12;

#[inline]
pub(crate) fn flush(x: f64) -> f64 {
    if x < FLUSH_BELOW {
        0.0
    } else {
        x
    }
}

/// The symmetric sign-magnitude alphabet `{-2^(w-1), ..., -1, +1, ..., +2^(w-1)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct SignedAlphabet {
    width: u32,
}

impl SignedAlphabet {
    pub fn new(width: u32) -> Result<Self> {
        if !(1..=15).contains(&width) {
            return Err(Error::Validation(format!(
                "alphabet width must be in 1..=15, got {width}"
            )));
        }
        Ok(SignedAlphabet { width })
    }

    pub fn width(self) -> u32 {
        self.width
    }

    /// Largest magnitude, `2^(w-1)`.
    pub fn max_magnitude(self) -> i64 {
        1 << (self.width - 1)
    }

    pub fn len(self) -> usize {
        1 << self.width
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn contains(self, v: i64) -> bool {
        v != 0 && v.abs() <= self.max_magnitude()
    }

    /// Values in ascending order.
    pub fn values(self) -> impl Iterator<Item = i64> {
        let h = self.max_magnitude();
        (-h..=h).filter(|&v| v != 0)
    }

    pub fn index_of(self, v: i64) -> Option<usize> {
        signed_index(self.max_magnitude() as usize, v)
    }

    pub fn value_at(self, i: usize) -> i64 {
        signed_value(self.max_magnitude() as usize, i)
    }
}

impl TryFrom<u32> for SignedAlphabet {
    type Error = Error;
    fn try_from(w: u32) -> Result<Self> {
        SignedAlphabet::new(w)
    }
}

impl From<SignedAlphabet> for u32 {
    fn from(a: SignedAlphabet) -> u32 {
        a.width
    }
}

fn signed_index(half: usize, v: i64) -> Option<usize> {
    let h = half as i64;
    if v == 0 || v.abs() > h {
        None
    } else if v < 0 {
        Some((v + h) as usize)
    } else {
        Some((v + h - 1) as usize)
    }
}

fn signed_value(half: usize, i: usize) -> i64 {
    let h = half as i64;
    let i = i as i64;
    if i < h {
        i - h
    } else {
        i - h + 1
    }
}

/// Which bit a joint distribution refers to. Documentation only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BitRole {
    /// Code bit `b` at a variable node.
    CodeBit,
    /// Check-node target bit `x`, the XOR of the other neighbours.
    CheckTarget,
    /// Information bit `u`.
    InfoBit,
}

/// Message axis of a [`JointBitDist`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    /// Values `±1, ..., ±half`; no zero.
    Signed { half: usize },
    /// Values `start, start + 1, ...` (length given by the mass table).
    Interval { start: i64 },
}

/// Joint probability table `p(b, t)` for a binary `b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointBitDist {
    support: Support,
    mass: [Vec<f64>; 2],
}

impl JointBitDist {
    fn build(support: Support, p0: Vec<f64>, p1: Vec<f64>) -> Result<Self> {
        if p0.len() != p1.len() || p0.is_empty() {
            return Err(Error::Validation(format!(
                "mass rows must be non-empty and of equal length ({} vs {})",
                p0.len(),
                p1.len()
            )));
        }
        if let Support::Signed { half } = support {
            if half == 0 || p0.len() != 2 * half {
                return Err(Error::Validation(format!(
                    "signed support with half {half} needs {} entries, got {}",
                    2 * half,
                    p0.len()
                )));
            }
        }
        if p0.iter().chain(&p1).any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Validation("probabilities must be finite and >= 0".into()));
        }
        let mass = [
            p0.into_iter().map(flush).collect(),
            p1.into_iter().map(flush).collect(),
        ];
        Ok(JointBitDist { support, mass })
    }

    /// Distribution on the signed support `±1..±half`, rows indexed in ascending value order.
    pub fn signed(half: usize, p0: Vec<f64>, p1: Vec<f64>) -> Result<Self> {
        Self::build(Support::Signed { half }, p0, p1)
    }

    pub fn over_alphabet(alphabet: SignedAlphabet, p0: Vec<f64>, p1: Vec<f64>) -> Result<Self> {
        Self::signed(alphabet.max_magnitude() as usize, p0, p1)
    }

    pub fn interval(start: i64, p0: Vec<f64>, p1: Vec<f64>) -> Result<Self> {
        Self::build(Support::Interval { start }, p0, p1)
    }

    /// Builds a symmetric distribution from the `b = 0` row: `p(1, t) = p(0, -t)`.
    pub fn symmetric_from_bit0(half: usize, p0: Vec<f64>) -> Result<Self> {
        let p1 = p0.iter().rev().copied().collect();
        Self::signed(half, p0, p1)
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn len(&self) -> usize {
        self.mass[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The alphabet when the support is a power-of-two signed support.
    pub fn alphabet(&self) -> Option<SignedAlphabet> {
        match self.support {
            Support::Signed { half } if half.is_power_of_two() => {
                SignedAlphabet::new(half.trailing_zeros() + 1).ok()
            }
            _ => None,
        }
    }

    pub fn value(&self, i: usize) -> i64 {
        match self.support {
            Support::Signed { half } => signed_value(half, i),
            Support::Interval { start } => start + i as i64,
        }
    }

    pub fn index_of(&self, v: i64) -> Option<usize> {
        match self.support {
            Support::Signed { half } => signed_index(half, v),
            Support::Interval { start } => {
                let i = v - start;
                (i >= 0 && (i as usize) < self.len()).then_some(i as usize)
            }
        }
    }

    pub fn values(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.len()).map(|i| self.value(i))
    }

    pub fn row(&self, b: usize) -> &[f64] {
        &self.mass[b]
    }

    /// `p(b, v)`, zero outside the support.
    pub fn prob(&self, b: usize, v: i64) -> f64 {
        self.index_of(v).map_or(0.0, |i| self.mass[b][i])
    }

    pub fn total(&self) -> f64 {
        self.mass[0].iter().sum::<f64>() + self.mass[1].iter().sum::<f64>()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.total() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.total();
        if t <= 0.0 {
            return Err(Error::Validation("cannot normalize a zero-mass table".into()));
        }
        let scale = |row: &Vec<f64>| row.iter().map(|x| x / t).collect::<Vec<_>>();
        Self::build(self.support, scale(&self.mass[0]), scale(&self.mass[1]))
    }

    /// `[p(b=0), p(b=1)]`, each summed in ascending order of magnitude.
    pub fn bit_marginal(&self) -> [f64; 2] {
        [sorted_sum(&self.mass[0]), sorted_sum(&self.mass[1])]
    }

    /// `p(t)` per support index.
    pub fn message_marginal(&self) -> Vec<f64> {
        self.mass[0].iter().zip(&self.mass[1]).map(|(a, b)| a + b).collect()
    }

    /// `p(t | b)` per support index.
    pub fn conditional(&self, b: usize) -> Vec<f64> {
        let pb = self.bit_marginal()[b];
        if pb == 0.0 {
            return vec![0.0; self.len()];
        }
        self.mass[b].iter().map(|x| x / pb).collect()
    }

    /// `max_t |p(0, t) - p(1, -t)|` over the union of `t` and `-t` ranges.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, v) in self.values().enumerate() {
            worst = worst.max((self.mass[0][i] - self.prob(1, -v)).abs());
            worst = worst.max((self.mass[1][i] - self.prob(0, -v)).abs());
        }
        worst
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.symmetry_defect() <= tol
    }

    /// Average of the table and its bit/sign mirror image.
    ///
    /// Only defined for signed supports and intervals centred on zero.
    pub fn symmetrized(&self) -> Result<Self> {
        if let Support::Interval { start } = self.support {
            if start + self.len() as i64 - 1 != -start {
                return Err(Error::Unsupported(
                    "symmetrization needs an interval centred on zero".into(),
                ));
            }
        }
        let n = self.len();
        let p0 = (0..n)
            .map(|i| 0.5 * (self.mass[0][i] + self.mass[1][n - 1 - i]))
            .collect();
        let p1 = (0..n)
            .map(|i| 0.5 * (self.mass[1][i] + self.mass[0][n - 1 - i]))
            .collect();
        Self::build(self.support, p0, p1)
    }

    /// Half the L1 distance between two tables, aligned by message value.
    pub fn total_variation(&self, other: &JointBitDist) -> f64 {
        let mut vals: Vec<i64> = self.values().chain(other.values()).collect();
        vals.sort_unstable();
        vals.dedup();
        let mut acc = 0.0;
        for v in vals {
            for b in 0..2 {
                acc += (self.prob(b, v) - other.prob(b, v)).abs();
            }
        }
        0.5 * acc
    }

    /// Table with bit labels swapped and message axis negated.
    pub fn relabelled(&self) -> Self {
        let n = self.len();
        let support = match self.support {
            s @ Support::Signed { .. } => s,
            Support::Interval { start } => Support::Interval {
                start: -(start + n as i64 - 1),
            },
        };
        let rev = |row: &Vec<f64>| row.iter().rev().copied().collect::<Vec<_>>();
        JointBitDist {
            support,
            mass: [rev(&self.mass[1]), rev(&self.mass[0])],
        }
    }
}

fn sorted_sum(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v.iter().sum()
}

#[inline]
fn info_term(p: f64, pb: f64, pt: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * (p / (pb * pt)).log2()
    }
}

/// `I(B; T) = Σ_t p(t) D_KL(p(b|t) || p(b))` in bits.
///
/// Terms are grouped by message magnitude so the result is bit-identical
/// under simultaneous negation of the message axis and flipping of the bit.
pub fn mutual_information(joint: &JointBitDist) -> Result<f64> {
    let total = joint.total();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::Validation(format!(
            "joint distribution is not normalized (total mass {total})"
        )));
    }
    let [p0, p1] = joint.bit_marginal();
    let max_mag = joint.values().map(i64::abs).max().unwrap_or(0);
    let mut acc = 0.0;
    for m in 0..=max_mag {
        let (a, b) = (joint.prob(0, m), joint.prob(1, m));
        if m == 0 {
            let pt = a + b;
            acc += info_term(a, p0, pt) + info_term(b, p1, pt);
            continue;
        }
        let (c, d) = (joint.prob(0, -m), joint.prob(1, -m));
        let (pp, pn) = (a + b, c + d);
        acc += (info_term(a, p0, pp) + info_term(d, p1, pn))
            + (info_term(b, p1, pp) + info_term(c, p0, pn));
    }
    Ok(acc.clamp(0.0, 1.0))
}

/// `D_KL(posterior || prior)` in bits for distributions over `{0, 1}` (or any
/// common finite outcome set).
pub fn kl_divergence(posterior: &[f64], prior: &[f64]) -> Result<f64> {
    if posterior.len() != prior.len() || posterior.is_empty() {
        return Err(Error::Validation("KL arguments must have equal, non-zero length".into()));
    }
    for (name, d) in [("posterior", posterior), ("prior", prior)] {
        let s: f64 = d.iter().sum();
        if d.iter().any(|x| *x < 0.0 || !x.is_finite()) || (s - 1.0).abs() > MASS_TOL {
            return Err(Error::Validation(format!("{name} is not a probability vector")));
        }
    }
    let mut acc = 0.0;
    for (&p, &q) in posterior.iter().zip(prior) {
        if p == 0.0 {
            continue;
        }
        if q == 0.0 {
            return Err(Error::Validation(
                "posterior puts mass on an outcome with zero prior".into(),
            ));
        }
        acc += p * (p / q).log2();
    }
    Ok(acc.max(0.0))
}

/// True iff `max_t |p(0,t) - p(1,-t)| <= tol`. Only signed supports pair `t` with `-t`.
pub fn check_symmetry(joint: &JointBitDist, tol: f64) -> Result<bool> {
    match joint.support() {
        Support::Signed { .. } => Ok(joint.symmetry_defect() <= tol),
        Support::Interval { .. } => Err(Error::Unsupported(
            "symmetry check requires a signed alphabet support".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn bsc(eps: f64) -> JointBitDist {
        JointBitDist::signed(1, vec![0.5 * eps, 0.5 * (1.0 - eps)], vec![0.5 * (1.0 - eps), 0.5 * eps])
            .unwrap()
    }

    #[test]
    fn alphabet_layout() {
        let a = SignedAlphabet::new(2).unwrap();
        assert_eq!(a.values().collect::<Vec<_>>(), vec![-2, -1, 1, 2]);
        assert_eq!(a.len(), 4);
        for (i, v) in a.values().enumerate() {
            assert_eq!(a.index_of(v), Some(i));
            assert_eq!(a.value_at(i), v);
            assert!(a.contains(-v));
        }
        assert!(!a.contains(0));
        assert!(SignedAlphabet::new(0).is_err());
    }

    #[test]
    fn mi_deterministic_channel_is_one() {
        let j = JointBitDist::signed(1, vec![0.0, 0.5], vec![0.5, 0.0]).unwrap();
        assert_abs_diff_eq!(mutual_information(&j).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn mi_independent_is_zero() {
        let j = JointBitDist::signed(2, vec![0.125; 4], vec![0.125; 4]).unwrap();
        assert_abs_diff_eq!(mutual_information(&j).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn mi_rejects_unnormalized() {
        let j = JointBitDist::signed(1, vec![0.3, 0.3], vec![0.3, 0.3]).unwrap();
        assert!(matches!(mutual_information(&j), Err(Error::Validation(_))));
    }

    #[test]
    fn mi_matches_binary_entropy_for_bsc() {
        let eps: f64 = 0.11;
        let h = -eps * eps.log2() - (1.0 - eps) * (1.0 - eps).log2();
        assert_abs_diff_eq!(mutual_information(&bsc(eps)).unwrap(), 1.0 - h, epsilon = 1e-14);
    }

    #[test]
    fn mi_equals_weighted_kl_sum() {
        let j = JointBitDist::symmetric_from_bit0(2, vec![0.02, 0.08, 0.15, 0.25]).unwrap();
        let pt = j.message_marginal();
        let prior = j.bit_marginal();
        let mut acc = 0.0;
        for i in 0..j.len() {
            let post = [j.row(0)[i] / pt[i], j.row(1)[i] / pt[i]];
            acc += pt[i] * kl_divergence(&post, &prior).unwrap();
        }
        assert_abs_diff_eq!(mutual_information(&j).unwrap(), acc, epsilon = 1e-14);
    }

    #[test]
    fn kl_examples() {
        assert_abs_diff_eq!(kl_divergence(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_abs_diff_eq!(kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap(), 1.0);
        // 0.75 log2(1.5) + 0.25 log2(0.5)
        assert_abs_diff_eq!(
            kl_divergence(&[0.75, 0.25], &[0.5, 0.5]).unwrap(),
            0.188_721_875_540_867,
            epsilon = 1e-12
        );
        assert!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn symmetry_checks() {
        let j = bsc(0.2);
        assert!(check_symmetry(&j, 1e-12).unwrap());
        let mut p0 = j.row(0).to_vec();
        p0[1] += 1e-3;
        let p1 = j.row(1).to_vec();
        let bent = JointBitDist::signed(1, p0, p1).unwrap();
        assert!(!check_symmetry(&bent, 1e-6).unwrap());
        let iv = JointBitDist::interval(-1, vec![0.25, 0.0, 0.25], vec![0.25, 0.0, 0.25]).unwrap();
        assert!(matches!(check_symmetry(&iv, 1e-12), Err(Error::Unsupported(_))));
    }

    #[test]
    fn tiny_entries_are_flushed() {
        let j = JointBitDist::signed(1, vec![1e-310, 0.5], vec![0.5, 0.0]).unwrap();
        assert_eq!(j.row(0)[0], 0.0);
    }

    #[test]
    fn normalized_helpers_renormalize() {
        let j = JointBitDist::interval(-2, vec![1.0, 2.0, 3.0, 0.0, 0.5], vec![0.1, 0.2, 0.3, 0.4, 0.5])
            .unwrap()
            .normalized()
            .unwrap();
        assert_abs_diff_eq!(j.total(), 1.0, epsilon = 1e-12);
        let c = j.conditional(1);
        assert_abs_diff_eq!(c.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        let s = j.symmetrized().unwrap();
        assert_abs_diff_eq!(s.total(), 1.0, epsilon = 1e-12);
        assert!(s.is_symmetric(1e-15));
    }

    fn arb_joint() -> impl Strategy<Value = JointBitDist> {
        (1u32..=4, prop::collection::vec(0.0f64..1.0, 32)).prop_map(|(w, raw)| {
            let n = 1usize << w;
            let p0 = raw[..n].to_vec();
            let p1 = raw[16..16 + n].to_vec();
            let t: f64 = p0.iter().chain(&p1).sum::<f64>().max(1e-9);
            JointBitDist::signed(n / 2, p0.iter().map(|x| x / t).collect(), p1.iter().map(|x| x / t).collect())
                .unwrap()
        })
    }

    proptest! {
        #[test]
        fn mi_is_relabelling_invariant(j in arb_joint()) {
            prop_assume!(j.is_normalized(MASS_TOL));
            let a = mutual_information(&j).unwrap();
            let b = mutual_information(&j.relabelled()).unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }

        #[test]
        fn product_distributions_carry_no_information(
            pb in 0.01f64..0.99,
            raw in prop::collection::vec(0.001f64..1.0, 8),
        ) {
            let t: f64 = raw.iter().sum();
            let pt: Vec<f64> = raw.iter().map(|x| x / t).collect();
            let j = JointBitDist::signed(4, pt.iter().map(|x| pb * x).collect(), pt.iter().map(|x| (1.0 - pb) * x).collect()).unwrap();
            prop_assert!(mutual_information(&j).unwrap() <= 1e-12);
        }

        #[test]
        fn kl_is_nonnegative(p in 0.0f64..=1.0, q in 0.001f64..0.999) {
            let d = kl_divergence(&[p, 1.0 - p], &[q, 1.0 - q]).unwrap();
            prop_assert!(d >= 0.0);
            if (p - q).abs() < 1e-15 { prop_assert!(d < 1e-12); }
        }
    }
}
