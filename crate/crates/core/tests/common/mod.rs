#![allow(dead_code)]

use nevanlab::func_algebra::{Expr, Polynomial};
use nevanlab::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_complex(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

pub fn random_poly(rng: &mut ChaCha8Rng, max_degree: usize, scale: f64) -> Polynomial {
    let deg = rng.gen_range(0..=max_degree);
    Polynomial::new((0..=deg).map(|_| random_complex(rng, scale)).collect())
}

/// Random expression tree of depth at most `depth`.
pub fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..4) {
            0 => Expr::constant(random_complex(rng, 2.0)),
            1 => Expr::var(),
            2 => Expr::poly(random_poly(rng, 2, 1.0)),
            _ => Expr::exp(random_poly(rng, 2, 0.5)),
        };
    }
    let a = random_expr(rng, depth - 1);
    match rng.gen_range(0..4) {
        0 => a.add(&random_expr(rng, depth - 1)),
        1 => a.mul(&random_expr(rng, depth - 1)),
        2 => a.pow(rng.gen_range(2..=3)),
        _ => {
            let b = random_expr(rng, depth - 1);
            if b.is_zero() {
                a
            } else {
                a.div(&b)
            }
        }
    }
}

/// `lead * prod (z - r_i) / prod (z - p_j)` as an expression.
pub fn rational_from_roots(lead: Complex64, zeros: &[Complex64], poles: &[Complex64]) -> Expr {
    let num = zeros
        .iter()
        .fold(Polynomial::constant(lead), |acc, &w| &acc * &Polynomial::linear_power(w, 1));
    let den = poles
        .iter()
        .fold(Polynomial::one(), |acc, &w| &acc * &Polynomial::linear_power(w, 1));
    Expr::poly(num).div(&Expr::poly(den))
}

/// Random rational function with roots and poles in the box `|re|, |im| < 2`.
pub fn random_rational(rng: &mut ChaCha8Rng, max_degree: usize) -> (Expr, Vec<Complex64>, Vec<Complex64>) {
    loop {
        let nz = rng.gen_range(0..=max_degree);
        let np = rng.gen_range(0..=max_degree);
        if nz + np == 0 {
            continue;
        }
        let zeros: Vec<Complex64> = (0..nz).map(|_| random_complex(rng, 2.0)).collect();
        let poles: Vec<Complex64> = (0..np).map(|_| random_complex(rng, 2.0)).collect();
        let well_separated = zeros
            .iter()
            .chain(&poles)
            .enumerate()
            .all(|(i, a)| zeros.iter().chain(&poles).skip(i + 1).all(|b| (a - b).norm() > 1e-2));
        if well_separated {
            return (rational_from_roots(c(1.0, 0.0), &zeros, &poles), zeros, poles);
        }
    }
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}
