mod common;

use common::*;
use nevanlab::func_algebra::{divisors, parse_function, Expr, Polynomial, Value};
use nevanlab::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NODES: usize = 64;

/// `f^(k)(z0)` from the Cauchy integral on `|z - z0| = h`, and the roundoff floor `k! max|f| / h^k`.
fn cauchy_derivative(f: &Expr, z0: Complex64, k: u32, h: f64) -> Option<(Complex64, f64)> {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut max_f: f64 = 0.0;
    for j in 0..NODES {
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / NODES as f64);
        let v = match f.eval(z0 + h * w) {
            Ok(Value::Finite(v)) if v.re.is_finite() && v.im.is_finite() => v,
            _ => return None,
        };
        max_f = max_f.max(v.norm());
        acc += v / w.powu(k);
    }
    let fact: f64 = (1..=k).map(f64::from).product();
    let scale = fact / h.powi(k as i32);
    Some((acc * scale / NODES as f64, scale * max_f))
}

#[test]
fn symbolic_derivatives_match_cauchy_integrals() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..1000 {
        let e = random_expr(&mut rng, 5);
        let k = rng.gen_range(1..=3);
        let d = e.differentiate(k);
        for _attempt in 0..5 {
            let z0 = random_complex(&mut rng, 1.0);
            let (Some((coarse, floor)), Some((fine, _))) =
                (cauchy_derivative(&e, z0, k, 0.05), cauchy_derivative(&e, z0, k, 0.025))
            else {
                continue;
            };
            // A singularity near the circle shows up as disagreement between the two radii.
            if (coarse - fine).norm() > 1e-8 * coarse.norm() + 1e-9 * floor {
                continue;
            }
            let Ok(Value::Finite(sym)) = d.eval(z0) else { continue };
            if !(floor.is_finite() && sym.re.is_finite() && sym.im.is_finite()) {
                continue;
            }
            assert!(
                (sym - coarse).norm() <= 1e-6 * sym.norm() + 1e-9 * floor,
                "k={k} at {z0}: symbolic {sym} vs cauchy {coarse} for {e}"
            );
            checked += 1;
            break;
        }
    }
    assert!(checked >= 800, "only {checked} expressions were checkable");
}

#[test]
fn divisors_are_multiplicative_for_rationals() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 100 {
        let (f, fz, fp) = random_rational(&mut rng, 4);
        let (g, gz, gp) = random_rational(&mut rng, 4);
        let all: Vec<Complex64> = fz.iter().chain(&fp).chain(&gz).chain(&gp).copied().collect();
        if all
            .iter()
            .enumerate()
            .any(|(i, a)| all[i + 1..].iter().any(|b| (a - b).norm() < 1e-2))
        {
            continue;
        }
        let (zeros, poles) = divisors(&f.mul(&g)).unwrap();
        assert_eq!(zeros.degree() as usize, fz.len() + gz.len());
        assert_eq!(poles.degree() as usize, fp.len() + gp.len());
        for w in fz.iter().chain(&gz) {
            assert_eq!(zeros.multiplicity_at(*w), 1, "missing zero {w}");
        }
        let (zeros, poles) = divisors(&f.div(&g)).unwrap();
        assert_eq!(zeros.degree() as usize, fz.len() + gp.len());
        assert_eq!(poles.degree() as usize, fp.len() + gz.len());
        let (zeros, _) = divisors(&f.pow(3)).unwrap();
        for w in &fz {
            assert_eq!(zeros.multiplicity_at(*w), 3);
        }
        checked += 1;
    }
}

#[test]
fn exponential_power_derivative_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let cc = loop {
            let v = random_complex(&mut rng, 1.0);
            if v.norm() > 0.1 {
                break v;
            }
        };
        let d = random_complex(&mut rng, 1.0);
        let g = Expr::exp(Polynomial::new(vec![d, cc]));
        for k in 1..=4u32 {
            let lhs = g.pow(k + 1).differentiate(k);
            for _ in 0..10 {
                let z = random_complex(&mut rng, 1.0);
                let got = lhs.eval(z).unwrap().finite().unwrap();
                let kk = f64::from(k + 1);
                let want = (kk * cc).powu(k) * (kk * (cc * z + d)).exp();
                assert!(rel_err(got, want) <= 1e-10, "k={k}: {got} vs {want}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn printed_expressions_parse_back(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_expr(&mut rng, 4);
        let text = e.to_string();
        let back = parse_function(&text).unwrap();
        for _ in 0..3 {
            let z = random_complex(&mut rng, 1.0);
            if let (Ok(Value::Finite(a)), Ok(Value::Finite(b))) = (e.eval(z), back.eval(z)) {
                if a.re.is_finite() && a.im.is_finite() {
                    prop_assert!(rel_err(a, b) <= 1e-9 || (a - b).norm() <= 1e-12, "{} -> {}", text, back);
                }
            }
        }
    }
}
