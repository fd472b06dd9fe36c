//! Slack curves for Nevanlinna-type inequalities over radial grids.
//!
//! Each harness evaluates both sides of an inequality at every radius of a
//! [`RadialGrid`] and records `slack = rhs - lhs` together with the
//! normalizer `T(r, g)`. The `o(T)` error terms are dropped; a [`SlackPolicy`]
//! decides whether the tail of the grid is compliant.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::diff_poly::{degree_d, weight_theta, DiffPolynomial};
use crate::error::{Error, Result};
use crate::func_algebra::{canonicalize, complex_literal, divisors, Divisor, Expr};
use crate::nevanlinna::{counting_n, Characteristic, RadialGrid};

/// Tolerance policy for finite grids.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlackPolicy {
    /// Allowed relative deficit `-slack / T`.
    pub epsilon: f64,
    /// Largest fraction of tail radii allowed to exceed the deficit.
    pub max_exceptional_fraction: f64,
    /// Fraction of the grid, counted from the outer end, that forms the tail.
    pub tail_fraction: f64,
}

impl Default for SlackPolicy {
    fn default() -> Self {
        SlackPolicy {
            epsilon: 0.05,
            max_exceptional_fraction: 0.10,
            tail_fraction: 0.6,
        }
    }
}

impl SlackPolicy {
    pub fn new(epsilon: f64, max_exceptional_fraction: f64) -> Result<Self> {
        SlackPolicy {
            epsilon,
            max_exceptional_fraction,
            ..Default::default()
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParams(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if !(0.0..1.0).contains(&self.max_exceptional_fraction) {
            return Err(Error::InvalidParams(format!(
                "exceptional fraction must lie in [0, 1), got {}",
                self.max_exceptional_fraction
            )));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "tail fraction must lie in (0, 1], got {}",
                self.tail_fraction
            )));
        }
        Ok(self)
    }

    /// Index of the first tail radius in a series of `len` records.
    pub fn tail_start(&self, len: usize) -> usize {
        let tail = ((len as f64) * self.tail_fraction).round() as usize;
        len - tail.clamp(1.min(len), len)
    }
}

/// How a series is judged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictRule {
    /// `slack / T >= -epsilon` on all but a fraction of the tail.
    Slack,
    /// `slack / T >= 0` on all but a fraction of the tail (`rhs` already carries `epsilon`).
    NonNegative,
    /// `max |rhs - lhs|` over the tail is at most the head maximum plus one.
    Bounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlackRecord {
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub normalizer: f64,
}

impl SlackRecord {
    fn new(r: f64, lhs: f64, rhs: f64, normalizer: f64) -> Self {
        SlackRecord {
            r,
            lhs,
            rhs,
            slack: rhs - lhs,
            normalizer,
        }
    }

    pub fn normalized_slack(&self) -> f64 {
        self.slack / self.normalizer
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SlackSeries {
    pub inequality: String,
    pub parameters: serde_json::Value,
    pub rule: VerdictRule,
    pub samples: usize,
    pub records: Vec<SlackRecord>,
}

impl SlackSeries {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,lhs,rhs,slack,normalized_slack\n");
        for rec in &self.records {
            out.push_str(&format!(
                "{:?},{:?},{:?},{:?},{:?}\n",
                rec.r,
                rec.lhs,
                rec.rhs,
                rec.slack,
                rec.normalized_slack()
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub rule: VerdictRule,
    pub worst_radius: f64,
    pub worst_normalized_slack: f64,
    pub exceptional_fraction: f64,
    pub tail_start: usize,
    pub policy: SlackPolicy,
}

/// Applies `policy` to the tail of `series`.
pub fn slack_verdict(series: &SlackSeries, policy: &SlackPolicy) -> Result<Verdict> {
    let records = &series.records;
    if records.is_empty() {
        return Err(Error::Precondition("slack series is empty".into()));
    }
    let start = policy.tail_start(records.len());
    let tail = &records[start..];
    let worst = tail
        .iter()
        .min_by(|a, b| a.normalized_slack().total_cmp(&b.normalized_slack()))
        .expect("tail is nonempty");
    let (pass, fraction) = match series.rule {
        VerdictRule::Slack | VerdictRule::NonNegative => {
            let floor = if series.rule == VerdictRule::Slack { -policy.epsilon } else { 0.0 };
            let bad = tail.iter().filter(|rec| rec.normalized_slack() < floor).count();
            let fraction = bad as f64 / tail.len() as f64;
            (fraction <= policy.max_exceptional_fraction, fraction)
        }
        VerdictRule::Bounded => {
            let max_abs = |recs: &[SlackRecord]| recs.iter().map(|x| x.slack.abs()).fold(0.0, f64::max);
            let head = max_abs(&records[..start]);
            (max_abs(tail) <= head + 1.0, 0.0)
        }
    };
    Ok(Verdict {
        pass,
        rule: series.rule,
        worst_radius: worst.r,
        worst_normalized_slack: worst.normalized_slack(),
        exceptional_fraction: fraction,
        tail_start: start,
        policy: *policy,
    })
}

fn is_constant(f: &Expr) -> Result<bool> {
    Ok(canonicalize(&f.differentiate(1))?.is_zero())
}

fn require_nonconstant(f: &Expr) -> Result<()> {
    if is_constant(f)? {
        return Err(Error::Precondition(format!("{f} is constant")));
    }
    Ok(())
}

fn distinct(values: &[Complex64]) -> Result<()> {
    for (i, a) in values.iter().enumerate() {
        if values[..i].iter().any(|b| (a - b).norm() <= 1e-12 * (1.0 + a.norm())) {
            return Err(Error::InvalidParams(format!(
                "value {} is repeated",
                complex_literal(*a)
            )));
        }
    }
    Ok(())
}

fn literals(values: &[Complex64]) -> Vec<String> {
    values.iter().map(|&a| complex_literal(a)).collect()
}

fn build_series<F>(
    inequality: &str,
    parameters: serde_json::Value,
    rule: VerdictRule,
    grid: &RadialGrid,
    samples: usize,
    row: F,
) -> Result<SlackSeries>
where
    F: Fn(f64) -> Result<SlackRecord> + Sync,
{
    let records = grid.radii().par_iter().map(|&r| row(r)).collect::<Result<Vec<_>>>()?;
    if let Some(bad) = records
        .iter()
        .find(|rec| !(rec.lhs.is_finite() && rec.rhs.is_finite() && rec.normalizer.is_finite()))
    {
        return Err(Error::Domain(format!("non-finite slack record at r = {}", bad.r)));
    }
    Ok(SlackSeries {
        inequality: inequality.into(),
        parameters,
        rule,
        samples,
        records,
    })
}

/// `m(r, f^(k)/f)` against `epsilon * T(r, f)`.
pub fn check_log_derivative(
    f: &Expr,
    k: u32,
    epsilon: f64,
    grid: &RadialGrid,
    samples: usize,
) -> Result<SlackSeries> {
    if k == 0 {
        return Err(Error::Precondition("derivative order must be positive".into()));
    }
    require_nonconstant(f)?;
    let ratio = Characteristic::new(&f.differentiate(k).div(f))?;
    let base = Characteristic::new(f)?;
    build_series(
        "logderiv",
        json!({ "f": f.to_string(), "k": k, "epsilon": epsilon }),
        VerdictRule::NonNegative,
        grid,
        samples,
        |r| {
            let t = base.t(r, samples)?;
            Ok(SlackRecord::new(r, ratio.proximity(r, samples)?, epsilon * t, t))
        },
    )
}

/// `T(r, 1/(f - a))` against `T(r, f)`.
pub fn check_fmt(f: &Expr, a: Complex64, grid: &RadialGrid, samples: usize) -> Result<SlackSeries> {
    require_nonconstant(f)?;
    let shifted = f.sub(&Expr::constant(a));
    let inverse = Characteristic::new(&shifted.recip())?;
    let base = Characteristic::new(f)?;
    build_series(
        "fmt",
        json!({ "f": f.to_string(), "a": complex_literal(a) }),
        VerdictRule::Bounded,
        grid,
        samples,
        |r| {
            let t = base.t(r, samples)?;
            Ok(SlackRecord::new(r, inverse.t(r, samples)?, t, t))
        },
    )
}

fn value_zeros(f: &Expr, a: Complex64, label: impl Fn() -> String) -> Result<Divisor> {
    match divisors(&f.sub(&Expr::constant(a))) {
        Ok((zeros, _)) => Ok(zeros),
        Err(Error::NotNormalizable(msg)) => Err(Error::NotNormalizable(format!("{}: {msg}", label()))),
        Err(Error::IdenticallyZero) => Err(Error::Precondition(format!("{} vanishes identically", label()))),
        Err(e) => Err(e),
    }
}

/// `(q - 1) T(r, f)` against `Nbar(r, f) + sum Nbar(r, 1/(f - a_i))`.
pub fn check_smt(f: &Expr, values: &[Complex64], grid: &RadialGrid, samples: usize) -> Result<SlackSeries> {
    if values.len() < 2 {
        return Err(Error::InvalidParams("at least two values are required".into()));
    }
    distinct(values)?;
    require_nonconstant(f)?;
    let base = Characteristic::new(f)?;
    let zeros = values
        .iter()
        .map(|&a| value_zeros(f, a, || format!("f - {}", complex_literal(a))))
        .collect::<Result<Vec<_>>>()?;
    let q = values.len() as f64;
    build_series(
        "smt",
        json!({ "f": f.to_string(), "values": literals(values) }),
        VerdictRule::Slack,
        grid,
        samples,
        |r| {
            let t = base.t(r, samples)?;
            let mut rhs = counting_n(base.poles(), r, true)?;
            for z in &zeros {
                rhs += counting_n(z, r, true)?;
            }
            Ok(SlackRecord::new(r, (q - 1.0) * t, rhs, t))
        },
    )
}

struct DiffPolyData {
    g: Characteristic,
    value_zeros: Vec<Divisor>,
    d: u32,
    theta: u32,
}

fn prepare(g: &Expr, p: &DiffPolynomial, values: &[Complex64], entire: bool) -> Result<DiffPolyData> {
    let d = degree_d(p);
    if d < 2 {
        return Err(Error::Precondition(format!("d(P) = {d}, at least 2 is required")));
    }
    if values.is_empty() {
        return Err(Error::InvalidParams("at least one value is required".into()));
    }
    if let Some(j) = values.iter().position(|a| *a == Complex64::new(0.0, 0.0)) {
        return Err(Error::Precondition(format!("value a_{} is zero", j + 1)));
    }
    distinct(values)?;
    require_nonconstant(g)?;
    let g_char = Characteristic::new(g)?;
    if entire && !g_char.poles().is_empty() {
        return Err(Error::Precondition(format!("{g} has poles; the entire variant needs a pole-free g")));
    }
    let composed = p.compose(g);
    let value_zeros = values
        .iter()
        .enumerate()
        .map(|(j, &a)| value_zeros(&composed, a, || format!("P - a_{}", j + 1)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiffPolyData {
        g: g_char,
        value_zeros,
        d,
        theta: weight_theta(p),
    })
}

fn diffpoly_series(
    name: &str,
    parameters: serde_json::Value,
    data: DiffPolyData,
    zero_weight: f64,
    value_weight: f64,
    grid: &RadialGrid,
    samples: usize,
) -> Result<SlackSeries> {
    build_series(name, parameters, VerdictRule::Slack, grid, samples, |r| {
        let t = data.g.t(r, samples)?;
        let mut values = 0.0;
        for z in &data.value_zeros {
            values += counting_n(z, r, true)?;
        }
        let rhs = zero_weight * counting_n(data.g.zeros(), r, true)? + value_weight * values;
        Ok(SlackRecord::new(r, t, rhs, t))
    })
}

/// `T(r, g)` against `(theta + 1)/(d - 1) Nbar(r, 1/g) + 1/(d - 1) Nbar(r, 1/(P - 1))`.
pub fn check_hinchliffe(g: &Expr, p: &DiffPolynomial, grid: &RadialGrid, samples: usize) -> Result<SlackSeries> {
    let one = [Complex64::new(1.0, 0.0)];
    let data = prepare(g, p, &one, false)?;
    let (d, theta) = (f64::from(data.d), f64::from(data.theta));
    diffpoly_series(
        "hinchliffe",
        json!({ "g": g.to_string(), "P": p.to_string(), "d": data.d, "theta": data.theta }),
        data,
        (theta + 1.0) / (d - 1.0),
        1.0 / (d - 1.0),
        grid,
        samples,
    )
}

/// `T(r, g)` against `(q theta + 1)/D Nbar(r, 1/g) + 1/D sum Nbar(r, 1/(P - a_j))`,
/// with `D = q d - 1`, or `D = q d` for pole-free `g`.
pub fn check_lemma3(
    g: &Expr,
    p: &DiffPolynomial,
    values: &[Complex64],
    entire: bool,
    grid: &RadialGrid,
    samples: usize,
) -> Result<SlackSeries> {
    let data = prepare(g, p, values, entire)?;
    let q = values.len() as f64;
    let (d, theta) = (f64::from(data.d), f64::from(data.theta));
    let denominator = if entire { q * d } else { q * d - 1.0 };
    diffpoly_series(
        "lemma3",
        json!({
            "g": g.to_string(),
            "P": p.to_string(),
            "values": literals(values),
            "entire": entire,
            "d": data.d,
            "theta": data.theta,
        }),
        data,
        (q * theta + 1.0) / denominator,
        1.0 / denominator,
        grid,
        samples,
    )
}
