use proptest::prelude::*;

use qldpc_core::channel::{design_channel_quantizer, fine_llr_density, ChannelModel};
use qldpc_core::codes::{generate_regular_code, parse_alist, write_alist};
use qldpc_core::dde::{cn_out_density, optimize_vn, quantize_density, vn_sum_density, DesignMode, GridSpec, NodeDegrees};
use qldpc_core::decoder::{boxplus, cn_update_boolean, cn_update_min, CnSchedule};
use qldpc_core::dist::{mutual_information, JointBitDist};
use qldpc_core::sim::wilson_interval;
use qldpc_core::translate::{build_phi, scale_phi};

/// Normalized symmetric joint over the `w`-bit alphabet, biased toward bit 0
/// on positive messages.
fn symmetric(w: u32, raw: &[f64]) -> JointBitDist {
    let half = 1usize << (w - 1);
    // Positive side gets the larger weights so the table is informative.
    let pos: Vec<f64> = raw[..half].iter().map(|x| 0.05 + x).collect();
    let neg: Vec<f64> = raw[half..2 * half].iter().map(|x| 0.01 + 0.3 * x).collect();
    let mut p0: Vec<f64> = neg.iter().rev().copied().collect();
    p0.extend(&pos);
    JointBitDist::symmetric_from_bit0(half, p0).unwrap().normalized().unwrap()
}

fn arb_joint(w: u32) -> impl Strategy<Value = JointBitDist> {
    prop::collection::vec(0.0f64..1.0, 1usize << w).prop_map(move |raw| symmetric(w, &raw))
}

fn channel(ebno: f64, w_ch: u32) -> JointBitDist {
    let model = ChannelModel::new(ebno, 0.5).unwrap();
    let fine = fine_llr_density(&model, 600, model.default_clip()).unwrap();
    design_channel_quantizer(&fine, w_ch).unwrap().joint
}

fn assert_clean(j: &JointBitDist) {
    assert!((j.total() - 1.0).abs() <= 1e-12, "total {}", j.total());
    assert!(j.symmetry_defect() <= 1e-12, "defect {}", j.symmetry_defect());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn density_pipeline_stays_symmetric_and_normalized(
        cn in arb_joint(2),
        ebno in 0.0f64..4.0,
        delta in 0.02f64..1.0,
        shift in 0u32..5,
        dv in 2usize..5,
        dc in 2usize..9,
    ) {
        let ch = channel(ebno, 3);
        let ch_t = scale_phi(&build_phi(&ch).unwrap(), delta, 8).unwrap();
        let cn_t = scale_phi(&build_phi(&cn).unwrap(), delta, 8).unwrap();
        let sum = vn_sum_density(&ch, &ch_t, Some((&cn, &cn_t)), dv - 1, 12).unwrap();
        assert_clean(&sum);
        let tv = quantize_density(&sum, shift, 2).unwrap();
        assert_clean(&tv);
        prop_assert!(mutual_information(&tv).unwrap() <= mutual_information(&sum).unwrap() + 1e-12);
        let tc = cn_out_density(&tv, dc).unwrap();
        assert_clean(&tc);
    }

    #[test]
    fn more_check_inputs_carry_less_information(tv in arb_joint(3)) {
        let mut last = f64::INFINITY;
        for dc in 3..=8 {
            let mi = mutual_information(&cn_out_density(&tv, dc).unwrap()).unwrap();
            prop_assert!(mi <= last + 1e-12, "dc {dc}: {mi} > {last}");
            last = mi;
        }
    }

    #[test]
    fn grid_search_dominance_and_determinism(cn in arb_joint(2), ebno in 1.0f64..3.0) {
        let ch = channel(ebno, 3);
        let deg = NodeDegrees::new(3, 6).unwrap();
        let grid = GridSpec::log_spaced(2, 2f64.powi(-5), 1.0, 12, 4, 8);
        let a = optimize_vn(DesignMode::Aware, &ch, Some(&cn), deg, &grid).unwrap();
        let u = optimize_vn(DesignMode::Unaware, &ch, Some(&cn), deg, &grid).unwrap();
        prop_assert!(a.mi_ctv >= u.mi_ctv);
        prop_assert!(u.mi_vtc >= a.mi_vtc);
        let again = optimize_vn(DesignMode::Aware, &ch, Some(&cn), deg, &grid).unwrap();
        prop_assert_eq!((a.delta, a.shift), (again.delta, again.shift));
    }

    #[test]
    fn check_node_schedules_agree(w in 2u32..=3, raw in prop::collection::vec((any::<bool>(), 0u16..8), 2..12)) {
        let h = 1i16 << (w - 1);
        let inputs: Vec<i16> = raw
            .iter()
            .map(|&(neg, m)| {
                let mag = (m as i16 % h) + 1;
                if neg { -mag } else { mag }
            })
            .collect();
        let two = cn_update_min(&inputs, CnSchedule::TwoMinima);
        let tree = cn_update_min(&inputs, CnSchedule::Tree);
        prop_assert_eq!(&two, &tree);
        for (j, &out) in two.iter().enumerate() {
            let others = inputs.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &t)| t);
            let folded = others.reduce(|a, b| cn_update_boolean(a, b, w).unwrap()).unwrap();
            prop_assert_eq!(out, folded);
        }
    }

    #[test]
    fn boxplus_is_a_softened_minimum(a in -30.0f64..30.0, b in -30.0f64..30.0) {
        let c = boxplus(a, b);
        prop_assert!((c - boxplus(b, a)).abs() < 1e-12);
        prop_assert!(c.abs() <= a.abs().min(b.abs()) + 1e-12);
        if a * b > 0.0 {
            prop_assert!(c >= 0.0);
        } else if a * b < 0.0 {
            prop_assert!(c <= 0.0);
        }
    }

    #[test]
    fn wilson_interval_brackets_estimate(n in 1u64..100_000, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac).floor() as u64;
        let (lo, hi) = wilson_interval(k, n);
        let p = k as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn generated_codes_round_trip_through_alist(dv in 2usize..5, mult in 2usize..4, blocks in 4usize..12, seed in 0u64..1000) {
        let dc = dv * mult;
        let n = dc * blocks;
        let g = generate_regular_code(dv, dc, n, seed, 4).unwrap();
        prop_assert!(g.is_consistent());
        prop_assert_eq!(g.regular_degrees(), Some((dv, dc)));
        let text = write_alist(&g);
        let back = parse_alist(&text).unwrap();
        prop_assert_eq!(write_alist(&back), text);
    }

    #[test]
    fn channel_quantizer_is_symmetric_and_lossy(ebno in -1.0f64..6.0, rate in 0.3f64..0.95) {
        let model = ChannelModel::new(ebno, rate).unwrap();
        let fine = fine_llr_density(&model, 1000, model.default_clip()).unwrap();
        let full = mutual_information(&fine.joint).unwrap();
        let mut last = 0.0;
        for w_ch in 1..=4 {
            let q = design_channel_quantizer(&fine, w_ch).unwrap();
            prop_assert!(q.joint.is_symmetric(1e-12));
            let mi = mutual_information(&q.joint).unwrap();
            prop_assert!(mi <= full + 1e-12);
            prop_assert!(mi + 1e-12 >= last);
            prop_assert_eq!(q.apply(&fine).unwrap(), q.joint.clone());
            last = mi;
        }
    }
}
