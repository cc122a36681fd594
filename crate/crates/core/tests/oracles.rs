//! High-precision reference values for the closed-form quantities.

use std::str::FromStr;

use dashu_float::DBig;
use lipq::heavytail::{survival, tail_constant, ArrivalDist, TailScale};
use lipq::measures::{mu1_atom, mu1_density, mu1_tail, ModelParams};

const DIGITS: usize = 60;

fn big(s: &str) -> DBig {
    DBig::from_str(s).unwrap().with_precision(DIGITS).value()
}

fn pow(base: &DBig, exp: &str) -> DBig {
    base.powf(&big(exp))
}

fn f64_of(x: &DBig) -> f64 {
    x.to_f64().value()
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

/// `(z / ((alpha - 1) m) + 1)^(-alpha)` for the desk law.
fn survival_oracle(z: &str) -> DBig {
    let scale = big("0.22");
    pow(&(big(z) / scale + big("1")), "-1.44")
}

/// `(M - l) (l (c - m) + theta K)^(-alpha)` for the desk parameters.
fn mu1_oracle(l: &str) -> DBig {
    let l = big(l);
    let base = l.clone() * big("0.5") + big("1700");
    (big("5000") - l) * pow(&base, "-1.44")
}

#[test]
fn survival_matches_high_precision() {
    let d = ArrivalDist::new(1.44, 0.5).unwrap();
    for (z, frozen) in [("1000", 5.406_934_282_024_349e-6), ("0.5", 0.181_355_138_571_747_37), ("1e6", 2.588_740_527_670_807_6e-10)] {
        let oracle = f64_of(&survival_oracle(z));
        assert!(rel(oracle, frozen) < 1e-15, "oracle drift at {z}: {oracle:e}");
        let got = survival(&d, z.parse().unwrap()).unwrap();
        assert!(rel(got, oracle) < 1e-13, "z = {z}: {got:e} vs {oracle:e}");
    }
}

#[test]
fn tail_constant_matches_high_precision() {
    let oracle = f64_of(&pow(&big("0.22"), "1.44"));
    let frozen = 0.113_002_658_388_239_47;
    assert!(rel(oracle, frozen) < 1e-15);
    let d = ArrivalDist::new(1.44, 0.5).unwrap();
    let c = tail_constant(&d, TailScale::Asymptotic).unwrap();
    assert!(rel(c, oracle) < 1e-14);
    // n^alpha P(A > n) approaches the limit from below
    let c_n = tail_constant(&d, TailScale::Reference(1e8)).unwrap();
    let oracle_n = f64_of(&(pow(&big("1e8"), "1.44") * survival_oracle("1e8")));
    assert!(rel(c_n, oracle_n) < 1e-12);
    assert!(c_n < c);
}

#[test]
fn first_level_matches_high_precision() {
    let p = ModelParams::desk();
    let half = p.kappa() / 2.0;
    let oracle = f64_of(&mu1_oracle("300"));
    let frozen = 0.092_762_099_393_005_49;
    assert!(rel(oracle, frozen) < 1e-15);
    assert!(rel(mu1_tail(&p, half).unwrap(), oracle) < 1e-13);

    let atom = f64_of(&(big("4400") * pow(&big("2000"), "-1.44")));
    assert!(rel(mu1_atom(&p).mass, atom) < 1e-13);
    assert!(rel(mu1_tail(&p, p.kappa()).unwrap(), atom) < 1e-12);

    // density by a central difference of the high-precision tail
    let h = "1e-20";
    let d = (mu1_oracle("300") - mu1_oracle(&(big("300") + big(h)).to_string())) / big(h);
    assert!(rel(mu1_density(&p, half).unwrap(), f64_of(&d)) < 1e-10);
}
