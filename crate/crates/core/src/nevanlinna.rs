//! Nevanlinna functionals on circles `|z| = r`.
//!
//! * `N(r, nu) = int_1^r n(t)/t dt`, evaluated in closed form: `n(t)` is a step
//!   function, so each point `z_i` contributes `nu(z_i) (log r - log max(|z_i|, 1))`.
//! * `m(r, f) = (1/2pi) int log+ |f(r e^{it})| dt`, by the composite trapezoidal
//!   rule, which converges spectrally for smooth periodic integrands.
//! * `T(r, f) = m(r, f) + N(r, f)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::func_algebra::{canonicalize, CanonicalForm, Divisor, Expr, ExpTerm, Value};

/// Default number of quadrature nodes on each circle.
pub const DEFAULT_SAMPLES: usize = 4096;

/// Sample points closer than this fraction of `r` to a pole are shifted by half a step.
const POLE_DODGE: f64 = 1e-8;

/// Geometric grid of radii, all greater than one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialGrid {
    radii: Vec<f64>,
    ratio: f64,
}

impl RadialGrid {
    /// `count` radii from `r_min` to `r_max` inclusive, with constant ratio.
    pub fn geometric(r_min: f64, r_max: f64, count: usize) -> Result<Self> {
        if !(r_min > 1.0) || !r_min.is_finite() {
            return Err(Error::Domain(format!("grid must start above 1, got {r_min}")));
        }
        if count == 0 {
            return Err(Error::Domain("grid needs at least one radius".into()));
        }
        if count == 1 {
            return Ok(RadialGrid {
                radii: vec![r_min],
                ratio: 1.0,
            });
        }
        if !(r_max > r_min) || !r_max.is_finite() {
            return Err(Error::Domain(format!(
                "grid end {r_max} must exceed start {r_min}"
            )));
        }
        let ratio = (r_max / r_min).powf(1.0 / (count - 1) as f64);
        let mut radii: Vec<f64> = (0..count).map(|i| r_min * ratio.powi(i as i32)).collect();
        radii[count - 1] = r_max;
        Ok(RadialGrid { radii, ratio })
    }

    /// `r0, r0*ratio, r0*ratio^2, ...`.
    pub fn from_ratio(r0: f64, ratio: f64, count: usize) -> Result<Self> {
        if !(ratio > 1.0) {
            return Err(Error::Domain(format!("grid ratio must exceed 1, got {ratio}")));
        }
        Self::geometric(r0, r0 * ratio.powi(count.saturating_sub(1) as i32), count)
    }

    /// 64 radii from 2 to 128.
    pub fn default_grid() -> Self {
        Self::geometric(2.0, 128.0, 64).expect("valid default grid")
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

/// `n(t)`: number of divisor points in the closed disc `|z| <= t`, with multiplicity.
pub fn unintegrated_counting(divisor: &Divisor, t: f64) -> u64 {
    divisor
        .entries()
        .iter()
        .filter(|(p, _)| p.norm() <= t)
        .map(|&(_, m)| u64::from(m))
        .sum()
}

/// `N(r, nu)` in closed form; `truncated` uses `min(nu, 1)`.
pub fn counting_n(divisor: &Divisor, r: f64, truncated: bool) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::Domain(format!("counting function needs r > 1, got {r}")));
    }
    let log_r = r.ln();
    Ok(divisor
        .entries()
        .iter()
        .filter(|(p, _)| p.norm() <= r)
        .map(|&(p, m)| {
            let weight = if truncated { 1.0 } else { f64::from(m) };
            weight * (log_r - p.norm().max(1.0).ln())
        })
        .fold(0.0, |acc, x| acc + x))
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 64 || !samples.is_power_of_two() {
        return Err(Error::Precondition(format!(
            "quadrature samples must be a power of two >= 64, got {samples}"
        )));
    }
    Ok(())
}

/// Trapezoidal mean of `log+ |term(r e^{it})|`.
fn mean_log_plus(term: &ExpTerm, r: f64, samples: usize) -> f64 {
    let step = 2.0 * PI / samples as f64;
    let near_circle: Vec<Complex64> = term
        .rational
        .poles()
        .iter()
        .map(|&(w, _)| w)
        .filter(|w| (w.norm() - r).abs() <= POLE_DODGE * r)
        .collect();
    let total: f64 = (0..samples)
        .map(|k| {
            let mut theta = k as f64 * step;
            let mut z = Complex64::from_polar(r, theta);
            if near_circle.iter().any(|&w| (z - w).norm() <= POLE_DODGE * r) {
                theta += 0.5 * step;
                z = Complex64::from_polar(r, theta);
            }
            term.log_abs(z).max(0.0)
        })
        .sum();
    total / samples as f64
}

fn single_term(form: &CanonicalForm) -> Result<&ExpTerm> {
    form.single()
}

/// `m(r, f)`.
pub fn proximity_m(f: &Expr, r: f64, samples: usize) -> Result<f64> {
    check_samples(samples)?;
    if !(r > 1.0) {
        return Err(Error::Domain(format!("proximity function needs r > 1, got {r}")));
    }
    let form = canonicalize(f)?;
    Ok(mean_log_plus(single_term(&form)?, r, samples))
}

/// `T(r, f) = m(r, f) + N(r, f)`.
pub fn characteristic_t(f: &Expr, r: f64, samples: usize) -> Result<f64> {
    Characteristic::new(f)?.at(r, samples).map(|rec| rec.t)
}

/// A function prepared for repeated evaluation of its Nevanlinna functionals.
#[derive(Clone, Debug)]
pub struct Characteristic {
    term: ExpTerm,
    zeros: Divisor,
    poles: Divisor,
}

impl Characteristic {
    pub fn new(f: &Expr) -> Result<Self> {
        let form = canonicalize(f)?;
        let term = single_term(&form)?.clone();
        let (zeros, poles) = term.rational.divisors()?;
        Ok(Characteristic { term, zeros, poles })
    }

    pub fn zeros(&self) -> &Divisor {
        &self.zeros
    }

    pub fn poles(&self) -> &Divisor {
        &self.poles
    }

    pub fn proximity(&self, r: f64, samples: usize) -> Result<f64> {
        check_samples(samples)?;
        if !(r > 1.0) {
            return Err(Error::Domain(format!("proximity function needs r > 1, got {r}")));
        }
        Ok(mean_log_plus(&self.term, r, samples))
    }

    pub fn at(&self, r: f64, samples: usize) -> Result<NevanlinnaRecord> {
        let m = self.proximity(r, samples)?;
        let n = counting_n(&self.poles, r, false)?;
        let nbar = counting_n(&self.poles, r, true)?;
        Ok(NevanlinnaRecord {
            r,
            m,
            n,
            nbar,
            t: m + n,
        })
    }

    pub fn t(&self, r: f64, samples: usize) -> Result<f64> {
        self.at(r, samples).map(|rec| rec.t)
    }
}

/// Spherical derivative `|f'(z)| / (1 + |f(z)|^2)`.
///
/// At a pole the value is computed from `1/f`, which has the same spherical derivative.
pub fn spherical_derivative(f: &Expr, z: Complex64) -> Result<f64> {
    SphericalDerivative::new(f).at(z)
}

/// Spherical derivative with the symbolic derivative computed once.
#[derive(Clone, Debug)]
pub struct SphericalDerivative {
    f: Expr,
    df: Expr,
}

impl SphericalDerivative {
    pub fn new(f: &Expr) -> Self {
        SphericalDerivative {
            f: f.clone(),
            df: f.differentiate(1),
        }
    }

    pub fn at(&self, z: Complex64) -> Result<f64> {
        if let (Ok(Value::Finite(v)), Ok(Value::Finite(dv))) = (self.f.eval(z), self.df.eval(z)) {
            return Ok(dv.norm() / (1.0 + v.norm_sqr()));
        }
        self.through_reciprocal(z)
    }

    fn through_reciprocal(&self, z: Complex64) -> Result<f64> {
        let recip = canonicalize(&self.f)
            .and_then(|form| form.inverse())
            .map_err(|_| Error::Indeterminate(z))?;
        let d_recip = recip.derivative();
        match (recip.eval(z), d_recip.eval(z)) {
            (Value::Finite(v), Value::Finite(dv)) => Ok(dv.norm() / (1.0 + v.norm_sqr())),
            _ => Err(Error::Indeterminate(z)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NevanlinnaRecord {
    pub r: f64,
    pub m: f64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "Nbar")]
    pub nbar: f64,
    #[serde(rename = "T")]
    pub t: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NevanlinnaReport {
    pub function: String,
    pub samples: usize,
    pub grid_ratio: f64,
    /// Whether `T` is nondecreasing along the grid up to [`MONOTONE_SLACK`].
    pub monotone: bool,
    pub records: Vec<NevanlinnaRecord>,
}

/// Allowed decrease of `T` between consecutive radii, absorbing quadrature noise.
pub const MONOTONE_SLACK: f64 = 1e-6;

impl NevanlinnaReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,m,N,Nbar,T\n");
        for rec in &self.records {
            out.push_str(&format!(
                "{:?},{:?},{:?},{:?},{:?}\n",
                rec.r, rec.m, rec.n, rec.nbar, rec.t
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Evaluates `m`, `N`, `Nbar` and `T` at every grid radius.
pub fn radial_report(f: &Expr, grid: &RadialGrid, samples: usize) -> Result<NevanlinnaReport> {
    check_samples(samples)?;
    let ch = Characteristic::new(f)?;
    let records = grid
        .radii()
        .par_iter()
        .map(|&r| ch.at(r, samples))
        .collect::<Result<Vec<_>>>()?;
    let monotone = records
        .windows(2)
        .all(|w| w[1].t >= w[0].t - MONOTONE_SLACK);
    Ok(NevanlinnaReport {
        function: f.to_string(),
        samples,
        grid_ratio: grid.ratio(),
        monotone,
        records,
    })
}
