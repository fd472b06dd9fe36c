mod common;

use common::*;
use nevanlab::diff_poly::{build_standard_monomial, MonomialSpec};
use nevanlab::inequality_lab::{check_fmt, check_hinchliffe, check_lemma3, check_smt, SlackPolicy};
use nevanlab::nevanlinna::RadialGrid;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid() -> RadialGrid {
    RadialGrid::geometric(2.0, 128.0, 32).unwrap()
}

#[test]
fn smt_two_values_on_random_rationals() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let policy = SlackPolicy::default();
    for _ in 0..10 {
        let (f, _, _) = random_rational(&mut rng, 5);
        let values = [random_complex(&mut rng, 1.0), random_complex(&mut rng, 1.0) + c(2.0, 0.0)];
        let s = check_smt(&f, &values, &grid(), 1024).unwrap();
        let start = policy.tail_start(s.records.len());
        for rec in &s.records[start..] {
            assert!(rec.normalized_slack() >= -0.05, "{f}: {rec:?}");
        }
    }
}

#[test]
fn hinchliffe_equals_lemma3_with_one_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let p = build_standard_monomial(&MonomialSpec::new(1, vec![(1, 1)]).unwrap()).unwrap();
    for _ in 0..5 {
        let (g, _, _) = random_rational(&mut rng, 3);
        let h = check_hinchliffe(&g, &p, &grid(), 1024).unwrap();
        let l = check_lemma3(&g, &p, &[c(1.0, 0.0)], false, &grid(), 1024).unwrap();
        for (a, b) in h.records.iter().zip(&l.records) {
            assert!((a.lhs - b.lhs).abs() <= 1e-12);
            assert!((a.rhs - b.rhs).abs() <= 1e-12);
        }
    }
}

#[test]
fn slack_is_stable_under_sample_doubling() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..5 {
        let (f, _, _) = random_rational(&mut rng, 4);
        let a = random_complex(&mut rng, 1.0);
        let coarse = check_fmt(&f, a, &grid(), 4096).unwrap();
        let fine = check_fmt(&f, a, &grid(), 8192).unwrap();
        for (x, y) in coarse.records.iter().zip(&fine.records) {
            assert!((x.slack - y.slack).abs() < 1e-3 * (1.0 + y.normalizer));
        }
    }
}
