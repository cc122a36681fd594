//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::time::Instant;

use common::mu2_mc_oracle;
use lipq::harness::{
    default_floor, planted_two_jump_sampler, run_lip_experiment, uniform_edges, verify_bernstein,
    verify_rate_j1, ExperimentConfig, LipDataset, RateConfig,
};
use lipq::heavytail::{tail_constant, TailScale};
use lipq::measures::{mu2_tail, ModelParams, DEFAULT_REL_TOL};
use lipq::reflect::{simulate_queue_with_arrivals, Embedding};
use lipq::seeding::{draw_arrivals, replication_rng};

const SEED: u64 = 20_240_601;
const DESK_REPS: usize = 100_000;
const PLANTED_SAMPLES: usize = 1_000_000;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
    seconds: f64,
}

fn check(results: &mut Vec<Outcome>, name: &'static str, f: impl FnOnce() -> (bool, String)) {
    let start = Instant::now();
    let (pass, detail) = f();
    let seconds = start.elapsed().as_secs_f64();
    println!(
        "{} {name}: {detail} [{seconds:.1}s]",
        if pass { "PASS" } else { "FAIL" }
    );
    results.push(Outcome {
        name,
        pass,
        detail,
        seconds,
    });
}

fn lindley_reference(arrivals: &[f64], c: f64, k: f64) -> Vec<f64> {
    let mut q = 0.0f64;
    arrivals
        .iter()
        .map(|a| {
            q = (q + a - c).max(0.0).min(k);
            q
        })
        .collect()
}

fn lindley_equivalence() -> (bool, String) {
    let p = ModelParams::desk();
    let model = p.queue_model(Embedding::Step).unwrap();
    let mut worst = 0.0f64;
    for rep in 0..1000u64 {
        let mut rng = replication_rng(SEED, rep);
        let arrivals = draw_arrivals(model.arrivals(), 5000, &mut rng);
        let q = simulate_queue_with_arrivals(&model, &arrivals, false).unwrap();
        let reference = lindley_reference(&arrivals, p.rate, p.buffer);
        for (i, r) in reference.iter().enumerate() {
            worst = worst.max((q.value_at((i + 1) as f64).unwrap() - r).abs());
        }
    }
    (worst <= 1e-9, format!("1000 runs, max |reflected - recursion| = {worst:e} (tol 1e-9)"))
}

fn range_and_conservation() -> (bool, String) {
    let p = ModelParams::desk();
    let (mut range_bad, mut worst_gap) = (0usize, 0.0f64);
    for rep in 0..10_000u64 {
        let embedding = if rep % 2 == 0 { Embedding::Step } else { Embedding::Drift };
        let model = p.queue_model(embedding).unwrap();
        let mut rng = replication_rng(SEED + 1, rep);
        let arrivals = draw_arrivals(model.arrivals(), 5000, &mut rng);
        let q = simulate_queue_with_arrivals(&model, &arrivals, true).unwrap();
        let path = q.path();
        for (i, seg) in path.segments().iter().enumerate() {
            let end = path.segment_end(i);
            if [seg.value, seg.at(end)].iter().any(|v| !(0.0..=p.buffer).contains(v)) {
                range_bad += 1;
            }
        }
        let gap = q.input_end() - (path.end_value() - q.lower_total() + q.lost_work());
        worst_gap = worst_gap.max(gap.abs());
    }
    (
        range_bad == 0 && worst_gap <= 1e-9,
        format!("10000 runs, {range_bad} events outside [0, K], max conservation gap {worst_gap:e} (tol 1e-9)"),
    )
}

fn quadrature_vs_oracle() -> (bool, String) {
    let p = ModelParams::desk();
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, f) in [1.1, 1.3, 1.5, 1.7, 1.9].into_iter().enumerate() {
        let l = f * p.kappa();
        let (est, se) = mu2_mc_oracle(&p, l, 10_000_000, SEED + 10 + i as u64);
        let q = mu2_tail(&p, l, DEFAULT_REL_TOL).unwrap();
        let z = (q - est) / se;
        ok &= z.abs() <= 3.0;
        parts.push(format!("{f}k z={z:+.2}"));
    }
    (ok, format!("1e7 samples per point; {}", parts.join(", ")))
}

fn support(data: &LipDataset) -> (bool, String) {
    let kappa = data.config.params.kappa();
    let bound = 2.0 * kappa * 1.02;
    let over = data.records.iter().filter(|r| r.longest > bound).count();
    let violations = data.support_violations(bound);
    (
        violations.is_empty(),
        format!(
            "{} reps, {over} with L > 2.04 kappa, {} without a third jump above {:.1} (expected 0)",
            data.n_reps(),
            violations.len(),
            data.config.audit_threshold.unwrap()
        ),
    )
}

fn first_level(data: &LipDataset, c: f64) -> (bool, String) {
    let p = data.config.params;
    let target = c * p.horizon * p.level().powf(-p.alpha);
    let est = data.positive_fraction();
    let ratio = est.value / target;
    let z = est.z_score(target);
    (
        (0.5..=2.0).contains(&ratio),
        format!(
            "P(L>0) = {:.5} ± {:.5} vs C M (theta K)^-alpha = {target:.5}; ratio {ratio:.3} in [0.5, 2]; z = {z:+.2} ({} within 3 SE)",
            est.value,
            est.se,
            if z.abs() <= 3.0 { "" } else { "not" }
        ),
    )
}

fn atom_mode(data: &LipDataset) -> (bool, String) {
    let kappa = data.config.params.kappa();
    let h = data.conditional_histogram();
    let i = h.bin_of(kappa).unwrap();
    let centre = h.counts[i];
    let neighbours: Vec<f64> = (i.saturating_sub(3)..=(i + 3).min(h.bins() - 1))
        .filter(|&j| j != i)
        .map(|j| h.counts[j])
        .collect();
    let pass = neighbours.len() == 6 && neighbours.iter().all(|&c| centre > c);
    let show = |r: std::ops::Range<usize>| r.map(|j| format!("{}", h.counts[j])).collect::<Vec<_>>().join(" ");
    (
        pass,
        format!(
            "bin [{:.0}, {:.0}) holds {centre}; left {} | right {}",
            h.edges[i],
            h.edges[i + 1],
            show(i - 3..i),
            show(i + 1..i + 4)
        ),
    )
}

fn hidden_shape(p: &ModelParams, seed: u64, threads: Option<usize>) -> (bool, String, Vec<f64>) {
    let kappa = p.kappa();
    let sample = in_pool(threads, || planted_two_jump_sampler(p, PLANTED_SAMPLES, seed, default_floor(p)).unwrap());
    let edges = uniform_edges(1.05 * kappa, 1.95 * kappa, 10);
    let h = sample.histogram(edges.clone());
    let empirical = h.normalized_masses();
    let analytic: Vec<f64> = edges
        .windows(2)
        .map(|e| mu2_tail(p, e[0], DEFAULT_REL_TOL).unwrap() - mu2_tail(p, e[1], DEFAULT_REL_TOL).unwrap())
        .collect();
    let total: f64 = analytic.iter().sum();
    let errors: Vec<f64> = empirical
        .iter()
        .zip(&analytic)
        .map(|(e, a)| (e / (a / total) - 1.0).abs())
        .collect();
    let good = errors.iter().filter(|e| **e <= 0.25).count();
    let worst = errors.iter().copied().fold(0.0, f64::max);
    (
        good >= 8,
        format!("{good}/10 bins within 25% (worst {:.1}%), {PLANTED_SAMPLES} planted samples", 100.0 * worst),
        sample.draws.iter().map(|d| d.longest).collect(),
    )
}

fn rate_config(walks: usize) -> RateConfig {
    let d = ModelParams::desk().arrival_dist().unwrap();
    RateConfig::with_exponent(10_000, 0.9, d, walks, SEED + 3)
}

fn rate_j1() -> (bool, String) {
    let checks = verify_rate_j1(&rate_config(1_000_000), &[1.0, 1.5, 2.0]).unwrap();
    let pass = checks.iter().all(|c| !c.low_power && c.z.abs() <= 3.0);
    let parts: Vec<String> = checks
        .iter()
        .map(|c| format!("x={} {:.4}±{:.4} vs {:.4} z={:+.2}", c.x, c.scaled.value, c.scaled.se, c.analytic, c.z))
        .collect();
    (pass, format!("n=1e4, lambda=n^0.9, 1e6 walks; {}", parts.join("; ")))
}

fn bernstein() -> (bool, String) {
    let mut pass = true;
    let mut worst = f64::NEG_INFINITY;
    for n in [100usize, 1000] {
        let sd = (n as f64 / 3.0).sqrt();
        let levels: Vec<f64> = (1..=5).map(|k| 0.75 * k as f64 * sd).collect();
        for c in verify_bernstein(n, &levels, 100_000, SEED + 4).unwrap() {
            pass &= c.holds;
            worst = worst.max(c.frequency.value - c.bound - 3.0 * c.frequency.se);
        }
    }
    (pass, format!("n in {{100, 1000}}, 5 levels each, 1e5 trials; max(freq - bound - 3 SE) = {worst:.4}"))
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(f),
        None => f(),
    }
}

fn determinism(desk: &LipDataset, planted_lengths: &[f64]) -> (bool, String) {
    let mut cfg = desk.config.clone();
    cfg.threads = Some(1);
    let serial = run_lip_experiment(&cfg).unwrap();
    cfg.threads = Some(4);
    let parallel = run_lip_experiment(&cfg).unwrap();
    let desk_same = serial.records == desk.records && parallel.records == desk.records;

    let p = desk.config.params;
    let (_, _, serial_planted) = hidden_shape(&p, SEED + 2, Some(1));
    let planted_same = serial_planted == planted_lengths;

    let walks = 20_000;
    let r1 = in_pool(Some(1), || verify_rate_j1(&rate_config(walks), &[1.0, 1.5, 2.0]).unwrap());
    let r4 = in_pool(Some(4), || verify_rate_j1(&rate_config(walks), &[1.0, 1.5, 2.0]).unwrap());
    let rates_same = r1 == r4;
    (
        desk_same && planted_same && rates_same,
        format!(
            "desk experiment default/1/4 threads identical: {desk_same}; planted sample: {planted_same}; rate walks: {rates_same}"
        ),
    )
}

fn main() {
    let started = Instant::now();
    let params = ModelParams::desk();
    let c = tail_constant(&params.arrival_dist().unwrap(), TailScale::Asymptotic).unwrap();
    let mut results = Vec::new();

    check(&mut results, "lindley_equivalence", lindley_equivalence);
    check(&mut results, "range_and_conservation", range_and_conservation);
    check(&mut results, "second_level_quadrature_vs_mc_oracle", quadrature_vs_oracle);

    let t = Instant::now();
    let desk = run_lip_experiment(&ExperimentConfig::new(params, DESK_REPS, SEED)).unwrap();
    println!(
        "     desk dataset: {} reps, {} positive, {:.1}s",
        desk.n_reps(),
        desk.n_positive(),
        t.elapsed().as_secs_f64()
    );
    check(&mut results, "support_two_kappa", || support(&desk));
    check(&mut results, "first_level_calibration", || first_level(&desk, c));
    check(&mut results, "atom_mode", || atom_mode(&desk));

    let mut planted_lengths = Vec::new();
    check(&mut results, "hidden_level_shape", || {
        let (pass, detail, lengths) = hidden_shape(&params, SEED + 2, None);
        planted_lengths = lengths;
        (pass, detail)
    });
    check(&mut results, "rate_j1", rate_j1);
    check(&mut results, "bernstein_bound", bernstein);
    check(&mut results, "determinism", || determinism(&desk, &planted_lengths));

    let failed: Vec<&Outcome> = results.iter().filter(|r| !r.pass).collect();
    let slowest = results.iter().map(|r| r.seconds).fold(0.0, f64::max);
    println!(
        "acceptance: {} passed, {} failed in {:.0}s (slowest criterion {slowest:.0}s)",
        results.len() - failed.len(),
        failed.len(),
        started.elapsed().as_secs_f64()
    );
    for f in &failed {
        println!("  failed: {} ({})", f.name, f.detail);
    }
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
