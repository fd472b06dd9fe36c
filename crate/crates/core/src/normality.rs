//! Normality criteria: hypothesis checkers, a Marty-criterion probe and
//! Zalcman rescaling demonstrations for concrete families `f_v`.
//!
//! Everything here is numerical evidence on finite grids. Divergence of the
//! spherical derivative along a parameter sequence is reported as evidence of
//! non-normality, never as a proof.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diff_poly::{alpha_index, build_standard_monomial, generalized_polynomial, MonomialSpec};
use crate::error::{Error, Result};
use crate::func_algebra::{divisors, parse_complex, parse_with_params, Expr, Value};
use crate::nevanlinna::SphericalDerivative;

/// Required zero multiplicity: a positive integer or infinity (no zeros at all).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ell {
    Finite(u32),
    Infinite,
}

impl Ell {
    /// `1/ell`, with `1/inf = 0`.
    pub fn reciprocal(self) -> BigRational {
        match self {
            Ell::Finite(l) => BigRational::new(BigInt::from(1), BigInt::from(l)),
            Ell::Infinite => BigRational::zero(),
        }
    }
}

impl FromStr for Ell {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "oo" | "∞" => Ok(Ell::Infinite),
            t => match t.parse::<u32>() {
                Ok(l) if l >= 1 => Ok(Ell::Finite(l)),
                _ => Err(Error::InvalidParams(format!("multiplicity must be a positive integer or inf, got '{t}'"))),
            },
        }
    }
}

impl fmt::Display for Ell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ell::Finite(l) => write!(f, "{l}"),
            Ell::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Ell {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Parameters of a normality criterion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionParams {
    pub monomial: MonomialSpec,
    /// The values `a_m`; may be omitted when only the arithmetic conditions matter.
    pub values: Option<Vec<Complex64>>,
    pub ells: Vec<Ell>,
}

impl CriterionParams {
    /// `ells` of length one is repeated `q` times.
    pub fn new(monomial: MonomialSpec, q: usize, values: Option<Vec<Complex64>>, ells: Vec<Ell>) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParams("q must be at least 1".into()));
        }
        let ells = match ells.len() {
            1 => vec![ells[0]; q],
            n if n == q => ells,
            n => return Err(Error::InvalidParams(format!("expected {q} multiplicities, got {n}"))),
        };
        if let Some(vs) = &values {
            if vs.len() != q {
                return Err(Error::InvalidParams(format!("expected {q} values, got {}", vs.len())));
            }
            for (i, a) in vs.iter().enumerate() {
                if a.is_zero() {
                    return Err(Error::InvalidParams(format!("value a_{} is zero", i + 1)));
                }
                if vs[..i].contains(a) {
                    return Err(Error::InvalidParams(format!("value a_{} is repeated", i + 1)));
                }
            }
        }
        Ok(CriterionParams { monomial, values, ells })
    }

    pub fn q(&self) -> usize {
        self.ells.len()
    }
}

/// Both sides of condition b) plus the verdicts of a) and b).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionRecord {
    pub criterion: String,
    pub condition_a: bool,
    pub condition_b: bool,
    #[serde(serialize_with = "ser_rational")]
    pub lhs: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub rhs: BigRational,
}

fn ser_rational<S: serde::Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(x)
}

impl CriterionRecord {
    pub fn applies(&self) -> bool {
        self.condition_a && self.condition_b
    }
}

impl fmt::Display for CriterionRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "lhs={} rhs={} {}",
            self.lhs,
            self.rhs,
            if self.applies() { "PASS" } else { "FAIL" }
        )
    }
}

fn int(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn condition_a(params: &CriterionParams) -> bool {
    params.monomial.pairs().iter().all(|&(nj, tj)| nj >= tj)
        && params.ells.iter().all(|l| !matches!(l, Ell::Finite(v) if *v < 2))
}

fn sum_reciprocals(params: &CriterionParams) -> BigRational {
    params.ells.iter().fold(BigRational::zero(), |acc, l| acc + l.reciprocal())
}

fn criterion(params: &CriterionParams, name: &str, offset: i64, with_orders: bool) -> CriterionRecord {
    let m = &params.monomial;
    let q = params.q() as i64;
    let n = i64::from(m.n());
    let diff: i64 = m.pairs().iter().map(|&(nj, tj)| i64::from(nj) - i64::from(tj)).sum();
    let num = q * n - offset + q * diff;
    let den = i64::from(m.total_power()) + if with_orders { i64::from(m.total_order()) } else { 0 };
    let lhs = sum_reciprocals(params);
    let rhs = BigRational::new(BigInt::from(num), BigInt::from(den));
    CriterionRecord {
        criterion: name.into(),
        condition_a: condition_a(params),
        condition_b: lhs < rhs,
        lhs,
        rhs,
    }
}

/// Meromorphic criterion: `sum 1/ell_i < (q n - 2 + q sum(n_j - t_j)) / (n + sum(n_j + t_j))`.
pub fn check_theorem1(params: &CriterionParams) -> CriterionRecord {
    criterion(params, "th1", 2, true)
}

/// Holomorphic criterion: `sum 1/ell_i < (q n - 1 + q sum(n_j - t_j)) / (n + sum n_j)`.
pub fn check_theorem2(params: &CriterionParams) -> CriterionRecord {
    criterion(params, "th2", 1, false)
}

fn corollary(spec: &MonomialSpec, name: &str, constant: u32) -> CriterionRecord {
    CriterionRecord {
        criterion: name.into(),
        condition_a: spec.pairs().iter().all(|&(nj, tj)| nj >= tj),
        condition_b: spec.total_power() >= constant + spec.total_order(),
        lhs: int(i64::from(spec.total_power())),
        rhs: int(i64::from(constant + spec.total_order())),
    }
}

/// `n + sum n_j >= 3 + sum t_j` for omitted values.
pub fn check_corollary1(spec: &MonomialSpec) -> CriterionRecord {
    corollary(spec, "cor1", 3)
}

/// `n + sum n_j >= 2 + sum t_j` for omitted values, holomorphic families.
pub fn check_corollary2(spec: &MonomialSpec) -> CriterionRecord {
    corollary(spec, "cor2", 2)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiplicityVerdict {
    pub ell: Ell,
    pub zeros: Vec<(Complex64, u32)>,
    pub min_multiplicity: Option<u32>,
    pub pass: bool,
}

/// Checks that every zero of `P[f] - a` in the plane has multiplicity at least `ell`.
pub fn check_multiplicities(f: &Expr, spec: &MonomialSpec, a: Complex64, ell: Ell) -> Result<MultiplicityVerdict> {
    let composed = build_standard_monomial(spec)?.compose(f);
    let (zeros, _) = divisors(&composed.sub(&Expr::constant(a)))?;
    let min_multiplicity = zeros.min_multiplicity();
    let pass = match (ell, min_multiplicity) {
        (_, None) => true,
        (Ell::Infinite, Some(_)) => false,
        (Ell::Finite(l), Some(m)) => m >= l,
    };
    Ok(MultiplicityVerdict {
        ell,
        zeros: zeros.entries().to_vec(),
        min_multiplicity,
        pass,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Disc {
    pub center: Complex64,
    pub radius: f64,
}

impl Disc {
    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }
}

/// Family `f_v(z)` given by a template in `z` and `v`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilySpec {
    pub template: String,
    pub params: Vec<Complex64>,
    pub disc: Disc,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Scalar {
    Number(f64),
    Text(String),
}

impl Scalar {
    fn value(&self) -> Result<Complex64> {
        match self {
            Scalar::Number(x) => Ok(Complex64::new(*x, 0.0)),
            Scalar::Text(t) => parse_complex(t),
        }
    }
}

#[derive(Deserialize)]
struct RawDisc {
    center: Scalar,
    radius: f64,
}

#[derive(Deserialize)]
struct RawFamily {
    template: String,
    params: Vec<Scalar>,
    disc: RawDisc,
}

impl FamilySpec {
    pub fn new(template: &str, params: Vec<Complex64>, disc: Disc) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidParams("family needs at least one parameter value".into()));
        }
        if params.windows(2).any(|w| w[1].norm() <= w[0].norm()) {
            return Err(Error::InvalidParams("parameter moduli must be strictly increasing".into()));
        }
        if !(disc.radius > 0.0 && disc.radius.is_finite()) {
            return Err(Error::InvalidParams(format!("disc radius must be positive, got {}", disc.radius)));
        }
        let spec = FamilySpec {
            template: template.into(),
            params,
            disc,
        };
        for &v in &spec.params {
            spec.instantiate(v)?;
        }
        Ok(spec)
    }

    /// Parses `{"template":"v*z","params":[1,2,4],"disc":{"center":"0","radius":1}}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawFamily = serde_json::from_str(text).map_err(|e| Error::InvalidParams(e.to_string()))?;
        let params = raw.params.iter().map(Scalar::value).collect::<Result<Vec<_>>>()?;
        let disc = Disc {
            center: raw.disc.center.value()?,
            radius: raw.disc.radius,
        };
        FamilySpec::new(&raw.template, params, disc)
    }

    pub fn instantiate(&self, v: Complex64) -> Result<Expr> {
        parse_with_params(&self.template, &[("v", v)])
    }
}

/// Points of a square lattice inside a disc; the centre is always included.
pub fn disc_grid(center: Complex64, radius: f64, resolution: usize) -> Vec<Complex64> {
    let half = (resolution / 2).max(1) as i64;
    let step = radius / half as f64;
    let mut pts = Vec::new();
    for i in -half..=half {
        for j in -half..=half {
            let z = Complex64::new(i as f64 * step, j as f64 * step);
            if z.norm() <= radius * (1.0 + 1e-12) {
                pts.push(center + z);
            }
        }
    }
    pts
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum MartyFlag {
    NotNormalEvidence,
    NormalConsistent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MartySample {
    pub v: Complex64,
    pub max_spherical_derivative: f64,
    pub argmax: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MartyReport {
    pub family: FamilySpec,
    pub resolution: usize,
    pub shrink: f64,
    pub samples: Vec<MartySample>,
    pub flag: MartyFlag,
}

impl MartyReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("v_re,v_im,M,argmax_re,argmax_im\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{:?},{:?},{:?},{:?},{:?}\n",
                s.v.re, s.v.im, s.max_spherical_derivative, s.argmax.re, s.argmax.im
            ));
        }
        out
    }
}

/// Growth factor of `M_v` that counts as divergence.
pub const MARTY_GROWTH: f64 = 100.0;
/// Length of the monotone tail required for divergence.
pub const MARTY_TAIL: usize = 5;

fn max_spherical_derivative(f: &Expr, pts: &[Complex64]) -> Option<(f64, Complex64)> {
    let sd = SphericalDerivative::new(f);
    pts.par_iter()
        .filter_map(|&z| sd.at(z).ok().filter(|s| s.is_finite()).map(|s| (s, z)))
        .reduce_with(|a, b| {
            if b.0 > a.0 || (b.0 == a.0 && (b.1.re, b.1.im) < (a.1.re, a.1.im)) {
                b
            } else {
                a
            }
        })
}

/// `M_v = max f_v^#` over a lattice in the disc shrunk by `shrink`.
pub fn marty_probe(family: &FamilySpec, resolution: usize, shrink: f64) -> Result<MartyReport> {
    if !(shrink > 0.0 && shrink <= 1.0) {
        return Err(Error::InvalidParams(format!("shrink factor must lie in (0, 1], got {shrink}")));
    }
    let pts = disc_grid(family.disc.center, shrink * family.disc.radius, resolution);
    let mut samples = Vec::with_capacity(family.params.len());
    for (index, &v) in family.params.iter().enumerate() {
        let f = family.instantiate(v)?;
        let (m, argmax) = max_spherical_derivative(&f, &pts).ok_or(Error::PoleDense { index })?;
        samples.push(MartySample {
            v,
            max_spherical_derivative: m,
            argmax,
        });
    }
    let ms: Vec<f64> = samples.iter().map(|s| s.max_spherical_derivative).collect();
    let tail = &ms[ms.len().saturating_sub(MARTY_TAIL)..];
    let diverges = ms.len() >= 2
        && ms[ms.len() - 1] > MARTY_GROWTH * ms[0]
        && tail.windows(2).all(|w| w[1] >= w[0]);
    Ok(MartyReport {
        family: family.clone(),
        resolution,
        shrink,
        samples,
        flag: if diverges { MartyFlag::NotNormalEvidence } else { MartyFlag::NormalConsistent },
    })
}

/// How a rescaling sequence (`z_v` or `rho_v`) is produced.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceRule {
    /// One value per family parameter.
    Explicit(Vec<Complex64>),
    /// An expression in `v`.
    Expression(String),
    /// From the Marty probe: `z_v` = argmax of `f_v^#`, `rho_v = 1/M_v`.
    Marty { resolution: usize, shrink: f64 },
}

impl SequenceRule {
    /// Parses a JSON array of numbers, the word `marty`, or an expression in `v`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t == "marty" {
            return Ok(SequenceRule::Marty {
                resolution: 64,
                shrink: 0.5,
            });
        }
        if t.starts_with('[') {
            let raw: Vec<Scalar> = serde_json::from_str(t).map_err(|e| Error::InvalidParams(e.to_string()))?;
            return Ok(SequenceRule::Explicit(raw.iter().map(Scalar::value).collect::<Result<_>>()?));
        }
        parse_with_params(t, &[("v", Complex64::new(1.0, 0.0))])?;
        Ok(SequenceRule::Expression(t.into()))
    }

    fn values(&self, family: &FamilySpec, want_rho: bool) -> Result<Vec<Complex64>> {
        match self {
            SequenceRule::Explicit(vs) => {
                if vs.len() != family.params.len() {
                    return Err(Error::InvalidParams(format!(
                        "sequence has {} values for {} parameters",
                        vs.len(),
                        family.params.len()
                    )));
                }
                Ok(vs.clone())
            }
            SequenceRule::Expression(text) => family
                .params
                .iter()
                .map(|&v| {
                    parse_with_params(text, &[("v", v)])?
                        .eval(Complex64::zero())?
                        .finite()
                        .ok_or_else(|| Error::InvalidParams(format!("'{text}' is infinite at v = {v}")))
                })
                .collect(),
            SequenceRule::Marty { resolution, shrink } => Ok(marty_probe(family, *resolution, *shrink)?
                .samples
                .iter()
                .map(|s| {
                    if want_rho {
                        Complex64::new(1.0 / s.max_spherical_derivative, 0.0)
                    } else {
                        s.argmax
                    }
                })
                .collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RescalingSpec {
    pub alpha: f64,
    pub zv: SequenceRule,
    pub rho: SequenceRule,
}

impl RescalingSpec {
    pub fn new(alpha: f64, zv: SequenceRule, rho: SequenceRule) -> Result<Self> {
        if !(alpha > -1.0 && alpha < 1.0) {
            return Err(Error::InvalidParams(format!("alpha must lie in (-1, 1), got {alpha}")));
        }
        Ok(RescalingSpec { alpha, zv, rho })
    }

    /// The resolved `(z_v, rho_v)` for every family parameter.
    pub fn resolve(&self, family: &FamilySpec) -> Result<Vec<(Complex64, f64)>> {
        let zs = self.zv.values(family, false)?;
        let rhos = self.rho.values(family, true)?;
        let mut out = Vec::with_capacity(zs.len());
        for (i, (z, rho)) in zs.into_iter().zip(rhos).enumerate() {
            if rho.im.abs() > 1e-12 * rho.norm() || !(rho.re > 0.0) {
                return Err(Error::InvalidParams(format!("rho_{} = {rho} is not a positive real", i + 1)));
            }
            if !family.disc.contains(z) {
                return Err(Error::DomainEscape(z));
            }
            out.push((z, rho.re));
        }
        if out.windows(2).any(|w| w[1].1 >= w[0].1) {
            return Err(Error::InvalidParams("rho_v must be strictly decreasing".into()));
        }
        Ok(out)
    }
}

/// Chordal distance on the Riemann sphere.
pub fn chordal_distance(a: Value, b: Value) -> f64 {
    match (a, b) {
        (Value::Infinity, Value::Infinity) => 0.0,
        (Value::Finite(x), Value::Infinity) | (Value::Infinity, Value::Finite(x)) => 1.0 / (1.0 + x.norm_sqr()).sqrt(),
        (Value::Finite(x), Value::Finite(y)) => {
            (x - y).norm() / ((1.0 + x.norm_sqr()).sqrt() * (1.0 + y.norm_sqr()).sqrt())
        }
    }
}

/// `g_v(xi) = f_v(z_v + rho_v xi) / rho_v^alpha` as an expression in `xi`.
pub fn rescaled(f: &Expr, zv: Complex64, rho: f64, alpha: f64) -> Expr {
    f.substitute_affine(Complex64::new(rho, 0.0), zv)
        .scale(Complex64::new(rho.powf(-alpha), 0.0))
}

fn check_domain(disc: &Disc, zv: Complex64, rho: f64, xis: &[Complex64]) -> Result<()> {
    match xis.iter().find(|&&xi| !disc.contains(zv + rho * xi)) {
        Some(&xi) => Err(Error::DomainEscape(xi)),
        None => Ok(()),
    }
}

fn values_on(g: &Expr, xis: &[Complex64]) -> Result<Vec<Value>> {
    xis.par_iter().map(|&xi| g.eval(xi)).collect()
}

fn sup_distance(a: &[Value], b: &[Value]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| chordal_distance(x, y)).fold(0.0, f64::max)
}

/// Distances below this count as converged.
pub const CONVERGENCE_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RescaleStep {
    pub v: Complex64,
    pub zv: Complex64,
    pub rho: f64,
    /// `g_v^#(0)`, recorded but not normalized.
    pub spherical_derivative_at_origin: Option<f64>,
    /// Sup chordal distance to the previous `g_v` on the grid.
    pub distance_to_previous: Option<f64>,
    pub distance_to_limit: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZalcmanReport {
    pub family: FamilySpec,
    pub spec: RescalingSpec,
    pub xi_radius: f64,
    pub xi_resolution: usize,
    pub limit: Option<String>,
    pub steps: Vec<RescaleStep>,
    pub converged: bool,
}

impl ZalcmanReport {
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:?}"));
        let mut out = String::from("v_re,v_im,zv_re,zv_im,rho,g_sharp_0,dist_prev,dist_limit\n");
        for s in &self.steps {
            out.push_str(&format!(
                "{:?},{:?},{:?},{:?},{:?},{},{},{}\n",
                s.v.re,
                s.v.im,
                s.zv.re,
                s.zv.im,
                s.rho,
                opt(s.spherical_derivative_at_origin),
                opt(s.distance_to_previous),
                opt(s.distance_to_limit)
            ));
        }
        out
    }
}

/// Evaluates `g_v` on a lattice of `|xi| <= xi_radius` and measures convergence.
pub fn zalcman_rescale(
    family: &FamilySpec,
    spec: &RescalingSpec,
    xi_radius: f64,
    xi_resolution: usize,
    limit: Option<&Expr>,
) -> Result<ZalcmanReport> {
    let xis = disc_grid(Complex64::zero(), xi_radius, xi_resolution);
    let limit_values = limit.map(|g| values_on(g, &xis)).transpose()?;
    let seq = spec.resolve(family)?;
    let mut steps = Vec::with_capacity(seq.len());
    let mut previous: Option<Vec<Value>> = None;
    for (&v, &(zv, rho)) in family.params.iter().zip(&seq) {
        check_domain(&family.disc, zv, rho, &xis)?;
        let g = rescaled(&family.instantiate(v)?, zv, rho, spec.alpha);
        let vals = values_on(&g, &xis)?;
        steps.push(RescaleStep {
            v,
            zv,
            rho,
            spherical_derivative_at_origin: SphericalDerivative::new(&g).at(Complex64::zero()).ok(),
            distance_to_previous: previous.as_ref().map(|p| sup_distance(p, &vals)),
            distance_to_limit: limit_values.as_ref().map(|l| sup_distance(l, &vals)),
        });
        previous = Some(vals);
    }
    let last = steps.last().expect("family has parameters");
    let converged = match (last.distance_to_limit, last.distance_to_previous) {
        (Some(d), _) => d < CONVERGENCE_TOL,
        (None, Some(d)) => d < CONVERGENCE_TOL,
        (None, None) => false,
    };
    Ok(ZalcmanReport {
        family: family.clone(),
        spec: spec.clone(),
        xi_radius,
        xi_resolution,
        limit: limit.map(Expr::to_string),
        steps,
        converged,
    })
}

/// Both sides of `(g^{n_j})^{(t_j)}(xi) = rho^{t_j - n_j alpha} (f^{n_j})^{(t_j)}(z_v + rho xi)`.
pub fn scaling_identity(
    f: &Expr,
    zv: Complex64,
    rho: f64,
    alpha: f64,
    (nj, tj): (u32, u32),
    xi: Complex64,
) -> Result<(Value, Value)> {
    let g = rescaled(f, zv, rho, alpha);
    let lhs = g.pow(nj).differentiate(tj).eval(xi)?;
    let factor = rho.powf(f64::from(tj) - f64::from(nj) * alpha);
    let rhs = match f.pow(nj).differentiate(tj).eval(zv + rho * xi)? {
        Value::Finite(x) => Value::Finite(x * factor),
        Value::Infinity => Value::Infinity,
    };
    Ok((lhs, rhs))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtraTermSeries {
    pub index: usize,
    #[serde(serialize_with = "ser_rational")]
    pub alpha_extra: BigRational,
    /// `sup |c_I E_I[f_v]|` over `z_v + rho_v xi`, one per parameter.
    pub sup_modulus: Vec<f64>,
    /// The same quantity predicted from the rescaled function, `rho^{(alpha - alpha_I) N_I} sup |c_I E_I[g_v]|`.
    pub predicted: Vec<f64>,
    pub vanishes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Remark14Report {
    #[serde(serialize_with = "ser_rational")]
    pub alpha: BigRational,
    pub polynomial: String,
    pub rho: Vec<f64>,
    pub extras: Vec<ExtraTermSeries>,
    /// Sup chordal distance between consecutive rescaled main terms.
    pub main_term_distances: Vec<f64>,
    pub pass: bool,
}

/// Shows that the lower-index terms of a generalized polynomial disappear under the rescaling
/// with `alpha = alpha(main)`; `z_v` and `rho_v` come from `zv` and `rho`.
pub fn remark14_rescale_check(
    main: &MonomialSpec,
    extras: &[(Expr, MonomialSpec)],
    family: &FamilySpec,
    zv: &SequenceRule,
    rho: &SequenceRule,
    xi_radius: f64,
    xi_resolution: usize,
) -> Result<Remark14Report> {
    let polynomial = generalized_polynomial(main, extras)?;
    let alpha = alpha_index(main)?;
    let alpha_f = alpha.to_f64().expect("finite rational");
    let spec = RescalingSpec::new(alpha_f, zv.clone(), rho.clone())?;
    let seq = spec.resolve(family)?;
    let xis = disc_grid(Complex64::zero(), xi_radius, xi_resolution);
    let main_poly = build_standard_monomial(main)?;

    let mut series: Vec<ExtraTermSeries> = Vec::with_capacity(extras.len());
    for (i, (_, s)) in extras.iter().enumerate() {
        series.push(ExtraTermSeries {
            index: i + 1,
            alpha_extra: alpha_index(s)?,
            sup_modulus: Vec::new(),
            predicted: Vec::new(),
            vanishes: false,
        });
    }
    let mut main_terms: Vec<Vec<Value>> = Vec::new();

    for (&v, &(z0, r)) in family.params.iter().zip(&seq) {
        check_domain(&family.disc, z0, r, &xis)?;
        let f = family.instantiate(v)?;
        let g = rescaled(&f, z0, r, alpha_f);
        main_terms.push(values_on(&main_poly.compose(&g), &xis)?);
        for ((c, s), out) in extras.iter().zip(series.iter_mut()) {
            let term = build_standard_monomial(s)?;
            let direct = c.mul(&term.compose(&f));
            let shifted = c.substitute_affine(Complex64::new(r, 0.0), z0).mul(&term.compose(&g));
            let exponent = (alpha_f - out.alpha_extra.to_f64().expect("finite")) * f64::from(s.total_power());
            let sup = |e: &Expr, map: &(dyn Fn(Complex64) -> Complex64 + Sync)| -> Result<f64> {
                let vals = xis
                    .par_iter()
                    .map(|&xi| e.eval(map(xi)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(vals
                    .iter()
                    .map(|x| x.finite().map_or(f64::INFINITY, |z| z.norm()))
                    .fold(0.0, f64::max))
            };
            out.sup_modulus.push(sup(&direct, &|xi| z0 + r * xi)?);
            out.predicted.push(r.powf(exponent) * sup(&shifted, &|xi| xi)?);
        }
    }
    for s in &mut series {
        let (first, last) = (s.sup_modulus[0], *s.sup_modulus.last().expect("nonempty"));
        s.vanishes = last < CONVERGENCE_TOL && (s.sup_modulus.len() == 1 || last < first);
    }
    let main_term_distances = main_terms.windows(2).map(|w| sup_distance(&w[0], &w[1])).collect();
    Ok(Remark14Report {
        alpha,
        polynomial: polynomial.to_string(),
        rho: seq.iter().map(|p| p.1).collect(),
        pass: series.iter().all(|s| s.vanishes),
        extras: series,
        main_term_distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func_algebra::parse_function;

    fn spec(n: u32, pairs: &[(u32, u32)]) -> MonomialSpec {
        MonomialSpec::new(n, pairs.to_vec()).unwrap()
    }

    fn params(n: u32, pairs: &[(u32, u32)], q: usize, ell: Ell) -> CriterionParams {
        CriterionParams::new(spec(n, pairs), q, None, vec![ell]).unwrap()
    }

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn theorem1_examples() {
        let rec = check_theorem1(&params(3, &[(3, 1)], 1, Ell::Finite(3)));
        assert_eq!((rec.lhs.clone(), rec.rhs.clone()), (rat(1, 3), rat(3, 7)));
        assert_eq!(rec.to_string(), "lhs=1/3 rhs=3/7 PASS");
        let rec = check_theorem1(&params(2, &[(3, 1)], 1, Ell::Finite(2)));
        assert_eq!((rec.lhs.clone(), rec.rhs.clone()), (rat(1, 2), rat(1, 3)));
        assert!(!rec.applies());
    }

    #[test]
    fn theorem2_examples() {
        assert!(check_theorem2(&params(0, &[(5, 2)], 1, Ell::Infinite)).applies());
        assert!(check_theorem1(&params(0, &[(5, 2)], 1, Ell::Infinite)).applies());
        for k in 1..6 {
            let rec = check_theorem2(&params(0, &[(k + 1, k)], 1, Ell::Infinite));
            assert!(rec.rhs.is_zero() && !rec.applies());
        }
    }

    #[test]
    fn ell_one_fails_condition_a() {
        let rec = check_theorem1(&params(5, &[(1, 1)], 1, Ell::Finite(1)));
        assert!(!rec.condition_a);
        assert!("0".parse::<Ell>().is_err());
        assert_eq!("inf".parse::<Ell>().unwrap(), Ell::Infinite);
    }

    #[test]
    fn bad_values_rejected() {
        let s = spec(1, &[(1, 1)]);
        let one = Complex64::new(1.0, 0.0);
        assert!(CriterionParams::new(s.clone(), 1, Some(vec![Complex64::zero()]), vec![Ell::Infinite]).is_err());
        assert!(CriterionParams::new(s, 2, Some(vec![one, one]), vec![Ell::Infinite]).is_err());
    }

    #[test]
    fn multiplicity_examples() {
        let z = parse_function("z").unwrap();
        let v = check_multiplicities(&z, &spec(1, &[(2, 1)]), Complex64::new(2.0, 0.0), Ell::Finite(2)).unwrap();
        assert_eq!(v.zeros.len(), 2);
        assert_eq!(v.min_multiplicity, Some(1));
        assert!(!v.pass);
        // f' - 2 = (z - 1)^2
        let f = parse_function("(z-1)^3/3 + 2*z").unwrap();
        let v = check_multiplicities(&f, &spec(0, &[(1, 1)]), Complex64::new(2.0, 0.0), Ell::Finite(2)).unwrap();
        assert_eq!(v.zeros.len(), 1);
        assert!(v.pass);
        // e^z (e^z)' = e^{2z} never vanishes.
        let e = parse_function("exp(z)").unwrap();
        let v = check_multiplicities(&e, &spec(1, &[(1, 1)]), Complex64::zero(), Ell::Infinite).unwrap();
        assert!(v.pass && v.zeros.is_empty());
    }

    fn unit_disc() -> Disc {
        Disc {
            center: Complex64::zero(),
            radius: 1.0,
        }
    }

    fn real_params(vs: &[f64]) -> Vec<Complex64> {
        vs.iter().map(|&v| Complex64::new(v, 0.0)).collect()
    }

    #[test]
    fn family_json() {
        let fam = FamilySpec::from_json(r#"{"template":"v*z","params":[1,2,4,8,16],"disc":{"center":"0","radius":1}}"#)
            .unwrap();
        assert_eq!(fam.params.len(), 5);
        assert!(FamilySpec::from_json(r#"{"template":"v*","params":[1],"disc":{"center":"0","radius":1}}"#).is_err());
        assert!(FamilySpec::new("v*z", real_params(&[2.0, 1.0]), unit_disc()).is_err());
    }

    #[test]
    fn marty_flags_dilations_not_translations() {
        let ps = real_params(&[1.0, 4.0, 16.0, 64.0, 256.0, 1024.0]);
        let dil = FamilySpec::new("v*z", ps.clone(), unit_disc()).unwrap();
        let rep = marty_probe(&dil, 32, 0.5).unwrap();
        assert_eq!(rep.flag, MartyFlag::NotNormalEvidence);
        for s in &rep.samples {
            assert!(s.max_spherical_derivative >= s.v.re * (1.0 - 1e-12));
            assert!(s.argmax.norm() < 1e-12);
        }
        let tr = FamilySpec::new("z+v", ps, unit_disc()).unwrap();
        let rep = marty_probe(&tr, 32, 0.5).unwrap();
        assert_eq!(rep.flag, MartyFlag::NormalConsistent);
        assert!(rep.samples.iter().all(|s| s.max_spherical_derivative <= 1.0));
    }

    #[test]
    fn marty_exponential_grows() {
        let ps = real_params(&[1.0, 4.0, 16.0, 64.0, 256.0, 1024.0]);
        let fam = FamilySpec::new("exp(v*z)", ps, unit_disc()).unwrap();
        let rep = marty_probe(&fam, 32, 0.5).unwrap();
        assert_eq!(rep.flag, MartyFlag::NotNormalEvidence);
        // On the imaginary axis |f| = 1, so f^# = |v|/2.
        for s in &rep.samples {
            assert!(s.max_spherical_derivative >= 0.5 * s.v.re * (1.0 - 1e-12));
        }
    }

    #[test]
    fn pole_dense_is_reported() {
        // The 5-point lattice {0, +-1, +-i} consists of poles, and 1/f has no canonical form.
        let fam = FamilySpec::new("exp(z)/(z*(z^4-1)) + v*exp(2*z)", real_params(&[1.0]), unit_disc()).unwrap();
        assert_eq!(disc_grid(Complex64::zero(), 1.0, 2).len(), 5);
        assert!(matches!(marty_probe(&fam, 2, 1.0), Err(Error::PoleDense { index: 0 })));
    }

    #[test]
    fn zalcman_dilation_is_exact() {
        let fam = FamilySpec::new("v*z", real_params(&[4.0, 8.0, 16.0, 32.0]), unit_disc()).unwrap();
        let spec = RescalingSpec::new(
            0.0,
            SequenceRule::parse("0").unwrap(),
            SequenceRule::parse("1/v").unwrap(),
        )
        .unwrap();
        let limit = parse_function("z").unwrap();
        let rep = zalcman_rescale(&fam, &spec, 2.0, 16, Some(&limit)).unwrap();
        assert!(rep.converged);
        assert!(rep.steps.iter().all(|s| s.distance_to_limit.unwrap() < 1e-10));
    }

    #[test]
    fn zalcman_domain_escape() {
        let fam = FamilySpec::new("v*z", real_params(&[2.0]), unit_disc()).unwrap();
        let spec = RescalingSpec::new(0.0, SequenceRule::parse("0").unwrap(), SequenceRule::parse("1/v").unwrap())
            .unwrap();
        assert!(matches!(
            zalcman_rescale(&fam, &spec, 3.0, 4, None),
            Err(Error::DomainEscape(_))
        ));
        assert!(RescalingSpec::new(1.0, SequenceRule::parse("0").unwrap(), SequenceRule::parse("1/v").unwrap()).is_err());
    }

    #[test]
    fn scaling_identity_holds() {
        let f = parse_function("(z^2+3)/(z-2)").unwrap();
        let (lhs, rhs) = scaling_identity(&f, Complex64::new(0.1, 0.2), 0.01, 1.0 / 3.0, (2, 2), Complex64::new(0.3, -0.4))
            .unwrap();
        let (l, r) = (lhs.finite().unwrap(), rhs.finite().unwrap());
        assert!((l - r).norm() <= 1e-8 * r.norm());
    }

    #[test]
    fn remark14_examples() {
        let main = spec(1, &[(2, 1)]);
        let vs = [10.0, 100.0, 1e3, 1e4, 1e5, 1e6];
        let fam = FamilySpec::new("v*z", real_params(&vs), unit_disc()).unwrap();
        let rho = SequenceRule::Explicit(vs.iter().map(|v: &f64| Complex64::new(v.powf(-1.5), 0.0)).collect());
        let zero = SequenceRule::parse("0").unwrap();
        let extra = (Expr::one(), spec(2, &[(2, 1)]));
        let rep = remark14_rescale_check(&main, &[extra], &fam, &zero, &rho, 0.5, 8).unwrap();
        assert!(rep.pass);
        let series = &rep.extras[0];
        for ((s, p), v) in series.sup_modulus.iter().zip(&series.predicted).zip(vs) {
            assert!((s - p).abs() <= 1e-8 * s);
            assert!((s - 0.25 / v.sqrt()).abs() <= 1e-8 * s);
        }
        assert!(rep.main_term_distances.iter().all(|&d| d < 1e-10));

        let empty = remark14_rescale_check(&main, &[], &fam, &zero, &rho, 0.5, 8).unwrap();
        assert!(empty.pass);

        let bad = (Expr::one(), spec(1, &[(1, 1)]));
        assert!(matches!(
            remark14_rescale_check(&main, &[bad], &fam, &zero, &rho, 0.5, 8),
            Err(Error::AlphaViolation { index: 1, .. })
        ));
    }
}
