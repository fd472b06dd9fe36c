//! Simultaneous root finding for complex polynomials.
//!
//! Roots are located with the Aberth-Ehrlich iteration (Gauss-Seidel
//! updates). A root is frozen once its residual reaches the rounding level of
//! the evaluation. If the iteration stalls, the eigenvalues of the companion
//! matrix are used instead. Multiplicities are recovered afterwards by
//! clustering the approximations and confirming that the first `m - 1`
//! derivatives vanish at the cluster centroid.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;

use super::polynomial::Polynomial;
use crate::error::{Error, Result};

/// Root points closer than this are always merged into one multiple root.
pub const CLUSTER_RADIUS: f64 = 1e-6;

/// Wider search window for multiple roots. Approximations of an `m`-fold root
/// spread like `eps^(1/m)`; clusters inside this window are merged only when
/// the derivatives confirm the multiplicity.
const WIDE_WINDOW: f64 = 1e-3;

/// Relative size below which `p^(j)(c)` counts as vanishing.
const DERIVATIVE_TOL: f64 = 1e-10;

pub const MAX_ITERATIONS: usize = 1000;

/// A root together with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub point: Complex64,
    pub multiplicity: u32,
}

/// All roots of `p`, counted with multiplicity.
///
/// A constant polynomial has no roots. The zero polynomial is rejected.
pub fn poly_roots(p: &Polynomial) -> Result<Vec<Root>> {
    let degree = p.degree().ok_or(Error::ZeroPolynomial)?;
    if degree == 0 {
        return Ok(Vec::new());
    }

    // Exact zeros at the origin are peeled off first.
    let zero_mult = p.coeffs().iter().take_while(|c| c.is_zero()).count();
    let reduced = Polynomial::new(p.coeffs()[zero_mult..].to_vec());
    let mut approx = vec![Complex64::zero(); zero_mult];
    let lead = reduced.leading();
    let monic = reduced.scale(lead.inv());

    approx.extend(match monic.degree() {
        Some(0) | None => Vec::new(),
        Some(1) => vec![-monic.coeff(0)],
        Some(_) => match aberth(&monic) {
            Some(zs) => zs,
            None => companion_eigenvalues(&monic)?,
        },
    });

    Ok(cluster(p, approx))
}

fn initial_guesses(p: &Polynomial) -> Vec<Complex64> {
    let n = p.degree().unwrap_or(0);
    let coeffs = p.coeffs();
    // Fujiwara-style radius and centre at the mean of the roots.
    let radius = (0..n)
        .map(|k| coeffs[k].norm().powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let centre = -coeffs[n - 1] / n as f64;
    (0..n)
        .map(|k| {
            let angle = 2.0 * PI * k as f64 / n as f64 + 0.4;
            centre + Complex64::from_polar(radius, angle)
        })
        .collect()
}

fn aberth(p: &Polynomial) -> Option<Vec<Complex64>> {
    let dp = p.derivative();
    let mut zs = initial_guesses(p);
    let n = zs.len();
    let mut done = vec![false; n];

    for _ in 0..MAX_ITERATIONS {
        for i in 0..n {
            if done[i] {
                continue;
            }
            let z = zs[i];
            let value = p.eval(z);
            if value.norm() <= 4.0 * f64::EPSILON * p.eval_abs(z) {
                done[i] = true;
                continue;
            }
            let ratio = value / dp.eval(z);
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z - zs[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                return None;
            }
            zs[i] = z - step;
            if step.norm() <= f64::EPSILON * zs[i].norm() {
                done[i] = true;
            }
        }
        if done.iter().all(|&d| d) {
            return Some(zs);
        }
    }
    None
}

fn companion_eigenvalues(p: &Polynomial) -> Result<Vec<Complex64>> {
    let n = p.degree().unwrap_or(0);
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -p.coeff(i);
    }
    nalgebra::Schur::try_new(m, f64::EPSILON, 10 * MAX_ITERATIONS)
        .and_then(|s| s.eigenvalues())
        .map(|v| v.iter().copied().collect())
        .ok_or(Error::NoConvergence(MAX_ITERATIONS))
}

/// Checks that `p, p', ..., p^(m-1)` all vanish at `c` relative to their scale.
fn derivatives_vanish(derivs: &[Polynomial], c: Complex64, m: usize) -> bool {
    derivs.iter().take(m).all(|d| {
        let scale = d.eval_abs(c).max(f64::MIN_POSITIVE);
        d.eval(c).norm() <= DERIVATIVE_TOL * scale
    })
}

fn cluster(p: &Polynomial, approx: Vec<Complex64>) -> Vec<Root> {
    let n = approx.len();
    let derivs: Vec<Polynomial> = std::iter::successors(Some(p.clone()), |d| Some(d.derivative()))
        .take(n + 1)
        .collect();
    let mut used = vec![false; n];
    let mut roots = Vec::new();

    for i in 0..n {
        if used[i] {
            continue;
        }
        let anchor = approx[i];
        let mut near: Vec<(f64, usize)> = (0..n)
            .filter(|&j| !used[j])
            .map(|j| ((approx[j] - anchor).norm(), j))
            .filter(|&(d, _)| d <= WIDE_WINDOW * (1.0 + anchor.norm()))
            .collect();
        near.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut chosen = 1;
        let mut centre = anchor;
        for m in (2..=near.len()).rev() {
            let members = &near[..m];
            let mean = members.iter().map(|&(_, j)| approx[j]).sum::<Complex64>() / m as f64;
            let tight = members
                .iter()
                .all(|&(_, j)| (approx[j] - mean).norm() <= CLUSTER_RADIUS);
            // An m-fold root of p is a simple root of p^(m-1); polish there and
            // confirm that the lower derivatives vanish too.
            let polished = polish(&derivs[m - 1], &derivs[m], mean);
            if tight || derivatives_vanish(&derivs, polished, m) {
                chosen = m;
                centre = polished;
                break;
            }
        }
        for &(_, j) in &near[..chosen] {
            used[j] = true;
        }
        roots.push(Root {
            point: centre,
            multiplicity: chosen as u32,
        });
    }
    roots
}

/// Newton refinement on `p^(m-1)`, where an `m`-fold root of `p` is simple.
fn polish(f: &Polynomial, df: &Polynomial, start: Complex64) -> Complex64 {
    let mut z = start;
    for _ in 0..8 {
        let d = df.eval(z);
        if d.is_zero() {
            break;
        }
        let step = f.eval(z) / d;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= f64::EPSILON * (1.0 + z.norm()) {
            break;
        }
    }
    if (z - start).norm() <= WIDE_WINDOW * (1.0 + start.norm()) {
        z
    } else {
        start
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted(mut roots: Vec<Root>) -> Vec<Root> {
        roots.sort_by(|a, b| {
            let key = |z: Complex64| ((z.re * 1e6).round() + 0.0, (z.im * 1e6).round() + 0.0);
            let (ka, kb) = (key(a.point), key(b.point));
            ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
        });
        roots
    }

    #[test]
    fn roots_of_z2_plus_1() {
        let roots = sorted(poly_roots(&Polynomial::from_real(&[1.0, 0.0, 1.0])).unwrap());
        assert_eq!(roots.len(), 2);
        let want = [c(0.0, -1.0), c(0.0, 1.0)];
        for (r, w) in roots.iter().zip(want) {
            assert_eq!(r.multiplicity, 1);
            assert!((r.point - w).norm() < 1e-12);
        }
    }

    #[test]
    fn double_root_is_clustered() {
        let roots = poly_roots(&Polynomial::from_real(&[1.0, -2.0, 1.0])).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].multiplicity, 2);
        assert!((roots[0].point - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn high_multiplicity_root() {
        let p = &Polynomial::linear_power(c(0.5, -0.25), 4) * &Polynomial::from_real(&[2.0, 1.0]);
        let roots = sorted(poly_roots(&p).unwrap());
        assert_eq!(roots.len(), 2);
        assert_eq!(roots[0].multiplicity, 1);
        assert!((roots[0].point - c(-2.0, 0.0)).norm() < 1e-10);
        assert_eq!(roots[1].multiplicity, 4);
        assert!((roots[1].point - c(0.5, -0.25)).norm() < 1e-8);
    }

    #[test]
    fn cubic_residuals() {
        // z^3 - 2z + 2: no closed form needed, the residual bound is the oracle.
        let p = Polynomial::from_real(&[2.0, -2.0, 0.0, 1.0]);
        let roots = poly_roots(&p).unwrap();
        assert_eq!(roots.iter().map(|r| r.multiplicity).sum::<u32>(), 3);
        for r in roots {
            assert!(residual_ok(&p, r.point));
        }
    }

    #[test]
    fn constant_and_zero() {
        assert!(poly_roots(&Polynomial::from_real(&[3.0])).unwrap().is_empty());
        assert_eq!(poly_roots(&Polynomial::zero()), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn origin_roots_are_exact() {
        let p = Polynomial::from_real(&[0.0, 0.0, -1.0, 1.0]);
        let roots = sorted(poly_roots(&p).unwrap());
        assert_eq!(roots[0].point, c(0.0, 0.0));
        assert_eq!(roots[0].multiplicity, 2);
    }

    #[test]
    fn companion_fallback_agrees() {
        let p = Polynomial::from_real(&[-6.0, 11.0, -6.0, 1.0]);
        let mut eig = companion_eigenvalues(&p).unwrap();
        eig.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (e, w) in eig.iter().zip([1.0, 2.0, 3.0]) {
            assert!((e - c(w, 0.0)).norm() < 1e-10);
        }
    }

    fn residual_ok(p: &Polynomial, z: Complex64) -> bool {
        let deg = p.degree().unwrap() as i32;
        let bound = 1e-8 * (1.0 + p.max_abs_coeff()) * (1.0 + z.norm()).powi(deg);
        p.eval(z).norm() <= bound
    }

    #[test]
    fn residual_bound_on_random_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let deg = rng.gen_range(1..=12);
            let mut coeffs: Vec<Complex64> = (0..=deg)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            if coeffs[deg].norm() < 1e-3 {
                coeffs[deg] = c(1.0, 0.0);
            }
            let p = Polynomial::new(coeffs);
            let roots = poly_roots(&p).unwrap();
            assert_eq!(roots.iter().map(|r| r.multiplicity as usize).sum::<usize>(), deg);
            for r in roots {
                assert!(residual_ok(&p, r.point), "residual too large for {p}");
            }
        }
    }
}
