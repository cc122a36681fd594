use std::io::Cursor;

use lipq::harness::{run_lip_experiment, ExperimentConfig};
use lipq::heavytail::{nu_alpha_tail, ArrivalDist, TailParams};
use lipq::intense::{enumerate_periods, longest_intense};
use lipq::measures::ModelParams;
use lipq::pathspace::{classify_jumps, embed_walk, h_j_path, JumpSpec, PiecewisePath};
use lipq::reflect::{reflect_path, simulate_queue_with_arrivals, Embedding, QueueModel};
use proptest::prelude::*;

fn jump_spec(max_jumps: usize, horizon: f64) -> impl Strategy<Value = JumpSpec> {
    (
        prop::collection::btree_set(1u32..10_000, 0..=max_jumps),
        prop::collection::vec(prop_oneof![-20.0..-0.01f64, 0.01..20.0f64], max_jumps),
        -2.0..2.0f64,
    )
        .prop_map(move |(ticks, sizes, drift)| {
            let times: Vec<f64> = ticks.iter().map(|&t| t as f64 * horizon / 10_000.0).collect();
            let sizes = sizes[..times.len()].to_vec();
            JumpSpec::new(times, sizes, drift).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn nu_alpha_scales(alpha in 1.01..3.0f64, p in 0.0..=1.0f64, y in 0.01..100.0f64, x in 0.01..100.0f64, s in 0.01..100.0f64) {
        let t = TailParams::new(alpha, p).unwrap();
        let base = nu_alpha_tail(&t, Some(y), Some(x)).unwrap();
        let scaled = nu_alpha_tail(&t, Some(s * y), Some(s * x)).unwrap();
        prop_assert!((scaled / (s.powf(-alpha) * base) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn survival_decreasing(alpha in 1.01..3.0f64, mean in 0.01..10.0f64, a in 0.0..1e4f64, gap in 1e-6..1e3f64) {
        let d = ArrivalDist::new(alpha, mean).unwrap();
        prop_assert!(d.survival(a + gap).unwrap() < d.survival(a).unwrap());
        prop_assert_eq!(d.survival(0.0).unwrap(), 1.0);
    }

    #[test]
    fn path_text_round_trip(spec in jump_spec(6, 50.0)) {
        let path = h_j_path(&spec, 50.0).unwrap();
        let back = PiecewisePath::read_text(Cursor::new(path.to_text())).unwrap();
        prop_assert_eq!(back, path);
    }

    #[test]
    fn h_j_jumps_are_recovered(spec in jump_spec(8, 10.0)) {
        let path = h_j_path(&spec, 10.0).unwrap();
        let jumps = path.jumps();
        prop_assert_eq!(jumps.len(), spec.len());
        for ((t, z), (u, s)) in jumps.iter().zip(spec.times().iter().zip(spec.sizes())) {
            prop_assert_eq!(t, u);
            prop_assert!((z - s).abs() <= 1e-12 * (1.0 + s.abs()) * 10.0);
        }
    }

    #[test]
    fn classify_non_increasing(incs in prop::collection::vec(-50.0..50.0f64, 1..200), a in 0.01..40.0f64, b in 0.01..40.0f64) {
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(classify_jumps(&incs, hi).unwrap() <= classify_jumps(&incs, lo).unwrap());
    }

    #[test]
    fn embed_walk_discontinuities(incs in prop::collection::vec(prop_oneof![Just(0.0), -5.0..5.0f64], 1..100)) {
        let path = embed_walk(&incs, 7.0).unwrap();
        let nonzero = incs.iter().filter(|z| **z != 0.0).count();
        // an increment cancelling to an unchanged partial sum is not a jump
        let mut s = 0.0f64;
        let moved = incs.iter().filter(|z| { let before = s; s += **z; s != before }).count();
        prop_assert!(moved <= nonzero);
        prop_assert_eq!(path.jumps().len(), moved);
    }

    #[test]
    fn reflection_range_and_conservation(spec in jump_spec(8, 20.0), buffer in 0.5..15.0f64) {
        let input = h_j_path(&spec, 20.0).unwrap();
        let q = reflect_path(&input, buffer, true).unwrap();
        for (i, seg) in q.path().segments().iter().enumerate() {
            let end = q.path().segment_end(i);
            for v in [seg.value, seg.at(end)] {
                prop_assert!((-1e-9..=buffer + 1e-9).contains(&v));
            }
        }
        let gap = input.end_value() - (q.path().end_value() - q.lower_total() + q.lost_work());
        prop_assert!(gap.abs() <= 1e-9 * (1.0 + input.end_value().abs()));
        let r = q.regulators().unwrap();
        prop_assert!((r.lower.end_value() - q.lower_total()).abs() < 1e-9);
        prop_assert!((r.upper.end_value() - q.lost_work()).abs() < 1e-9);
    }

    #[test]
    fn longest_non_increasing_in_level(spec in jump_spec(8, 20.0), a in 0.0..10.0f64, b in 0.0..10.0f64) {
        let q = reflect_path(&h_j_path(&spec, 20.0).unwrap(), 10.0, false).unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(longest_intense(&q, hi).unwrap() <= longest_intense(&q, lo).unwrap());
        let set = enumerate_periods(&q, lo).unwrap();
        prop_assert!(set.periods().windows(2).all(|w| w[0].end <= w[1].start));
        prop_assert!(set.total_length() <= 20.0 + 1e-9);
    }

    #[test]
    fn one_jump_family_bounded_by_kappa(t in 0.01..40.0f64, z in 0.0..100.0f64, theta in 0.05..0.95f64, drain in 0.1..2.0f64) {
        let (buffer, horizon) = (10.0, 50.0);
        let spec = JumpSpec::new(vec![t], vec![z], -drain).unwrap();
        let q = reflect_path(&h_j_path(&spec, horizon).unwrap(), buffer, false).unwrap();
        let kappa = (1.0 - theta) * buffer / drain;
        prop_assert!(longest_intense(&q, theta * buffer).unwrap() <= kappa + 1e-9);
    }

    #[test]
    fn lost_work_monotone_in_buffer(arrivals in prop::collection::vec(0.0..8.0f64, 1..60), k1 in 0.5..20.0f64, k2 in 0.5..20.0f64) {
        let law = ArrivalDist::new(1.5, 0.5).unwrap().into();
        let horizon = arrivals.len() as f64;
        let (small, large) = (k1.min(k2), k1.max(k2));
        for e in [Embedding::Step, Embedding::Drift] {
            let lost = |k: f64| {
                let m = QueueModel::new(k, 1.0, law, horizon, e).unwrap();
                simulate_queue_with_arrivals(&m, &arrivals, false).unwrap().lost_work()
            };
            prop_assert!(lost(large) <= lost(small) + 1e-9);
        }
    }
}

#[test]
fn experiment_independent_of_thread_count() {
    let params = ModelParams::desk();
    let mut cfg = ExperimentConfig::new(params, 300, 77);
    cfg.threads = Some(1);
    let serial = run_lip_experiment(&cfg).unwrap();
    cfg.threads = Some(3);
    let parallel = run_lip_experiment(&cfg).unwrap();
    assert_eq!(serial.records, parallel.records);
}

#[test]
fn zero_arrivals_give_no_periods() {
    let mut cfg = ExperimentConfig::new(ModelParams::desk(), 50, 1);
    cfg.fixed_arrival = Some(0.0);
    let d = run_lip_experiment(&cfg).unwrap();
    assert!(d.records.iter().all(|r| r.longest == 0.0 && r.n_periods == 0));
    assert_eq!(d.positive_fraction().value, 0.0);
    assert_eq!(d.conditional_histogram().total, 0.0);
}

#[test]
fn experiment_config_invariants() {
    let p = ModelParams::desk();
    let mut cfg = ExperimentConfig::new(p, 0, 1);
    assert_eq!(run_lip_experiment(&cfg).unwrap_err().kind(), "invalid_parameter");
    cfg.n_reps = 1;
    cfg.bin_width = 0.0;
    assert!(run_lip_experiment(&cfg).is_err());
    cfg.bin_width = 30.0;
    cfg.n_arrivals = 4999;
    assert!(run_lip_experiment(&cfg).is_err());
}
