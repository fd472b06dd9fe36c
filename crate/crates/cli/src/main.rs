//! `nevanlab` command-line front end.
//!
//! Exit codes: 0 on success or PASS, 1 on FAIL, 2 on usage, parse or precondition errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nevanlab::diff_poly::{build_standard_monomial, expand_power_derivative, DiffPolynomial, MonomialSpec, Term};
use nevanlab::func_algebra::{complex_literal, parse_complex, parse_function, Expr};
use nevanlab::inequality_lab::{
    check_fmt, check_hinchliffe, check_lemma3, check_log_derivative, check_smt, slack_verdict, SlackPolicy, SlackSeries,
};
use nevanlab::nevanlinna::{radial_report, RadialGrid, DEFAULT_SAMPLES};
use nevanlab::normality::{
    check_corollary1, check_corollary2, check_theorem1, check_theorem2, marty_probe, remark14_rescale_check,
    zalcman_rescale, CriterionParams, CriterionRecord, Ell, FamilySpec, RescalingSpec, SequenceRule,
};
use num_complex::Complex64;
use serde_json::{json, Map, Value as Json};

const SAMPLES_ENV: &str = "NEVANLAB_SAMPLES";

#[derive(Debug, Parser)]
#[command(name = "nevanlab", version)]
#[command(about = "Nevanlinna characteristic, inequality and normality experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Quadrature samples per circle. Falls back to $NEVANLAB_SAMPLES, then 4096.
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Smallest radius of the geometric grid.
    #[arg(long, global = true, default_value_t = 2.0)]
    rmin: f64,

    /// Largest radius of the geometric grid.
    #[arg(long, global = true, default_value_t = 128.0)]
    rmax: f64,

    /// Number of grid radii.
    #[arg(long, global = true, default_value_t = 64)]
    points: usize,

    /// Allowed relative deficit of the slack verdict.
    #[arg(long, global = true, default_value_t = 0.05)]
    epsilon: f64,

    /// Largest fraction of tail radii allowed to violate the deficit.
    #[arg(long, global = true, default_value_t = 0.10)]
    exceptional_fraction: f64,

    /// Fraction of the grid, from the outer end, that the verdict inspects.
    #[arg(long, global = true, default_value_t = 0.6)]
    tail_fraction: f64,

    /// Output format. Defaults to csv for series and text for expand/criteria.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Text => "text",
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// m, N, Nbar and T along the radial grid.
    Characteristic {
        /// Function of z, e.g. "exp(z)" or "(z^2-1)/z".
        #[arg(long)]
        f: String,
    },
    /// Slack curve and verdict for one inequality.
    Verify {
        #[command(subcommand)]
        which: Verify,
    },
    /// Leibniz expansion of (g^n)^(t) with exact coefficients.
    Expand {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long)]
        t: u32,
    },
    /// Exact check of the normality criteria.
    Criteria {
        #[command(subcommand)]
        which: Criteria,
    },
    /// Marty probe of a family: max spherical derivative per parameter.
    Marty {
        /// Family JSON, inline or @path.
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 32)]
        resolution: usize,
        /// Probe the disc shrunk by this factor.
        #[arg(long, default_value_t = 0.5)]
        shrink: f64,
    },
    /// Zalcman rescaling g_v(xi) = rho^-alpha f_v(z_v + rho xi).
    Zalcman {
        #[command(flatten)]
        rescale: RescaleArgs,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        /// Expected limit g(xi), written in z.
        #[arg(long)]
        limit: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        xi_radius: f64,
    },
    /// Lower-index terms of a generalized polynomial under rescaling.
    Remark14 {
        #[command(flatten)]
        rescale: RescaleArgs,
        /// Main monomial JSON, e.g. {"n":1,"pairs":[[2,1]]}.
        #[arg(long)]
        main: String,
        /// Extra monomial JSON, repeatable; an optional "coefficient" field holds a function of z.
        #[arg(long)]
        extra: Vec<String>,
        #[arg(long, default_value_t = 0.5)]
        xi_radius: f64,
    },
}

#[derive(Debug, Args)]
struct RescaleArgs {
    /// Family JSON, inline or @path.
    #[arg(long)]
    family: String,
    /// Centres z_v: JSON array, expression in v, or "marty".
    #[arg(long, default_value = "0")]
    zv: String,
    /// Radii rho_v: JSON array or expression in v.
    #[arg(long)]
    rho: String,
    #[arg(long, default_value_t = 8)]
    xi_resolution: usize,
}

#[derive(Debug, Args)]
struct PolyArgs {
    /// Generator g, a function of z.
    #[arg(long)]
    g: String,
    /// Monomial JSON, inline or @path, e.g. {"n":1,"pairs":[[2,1]]}.
    #[arg(long, required_unless_present = "poly", conflicts_with = "poly")]
    spec: Option<String>,
    /// Differential polynomial text, e.g. "g^2*g' + 3*g''".
    #[arg(long)]
    poly: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Verify {
    /// T(r, 1/(f-a)) against T(r, f).
    Fmt {
        #[arg(long)]
        f: String,
        #[arg(long)]
        a: String,
    },
    /// (q-1) T(r, f) against the truncated counting functions of q values.
    Smt {
        #[arg(long)]
        f: String,
        /// Comma-separated values, "inf" allowed.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// m(r, f^(k)/f) against epsilon T(r, f).
    Logderiv {
        #[arg(long)]
        f: String,
        #[arg(long, default_value_t = 1)]
        k: u32,
    },
    /// T(r, g) for a single value a = 1 of P[g].
    Hinchliffe {
        #[command(flatten)]
        poly: PolyArgs,
    },
    /// T(r, g) against Nbar(r, 1/g) and the values of P[g].
    Lemma3 {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Use the pole-free bound.
        #[arg(long)]
        entire: bool,
    },
}

#[derive(Debug, Args)]
struct MonomialArgs {
    #[arg(long, default_value_t = 0)]
    n: u32,
    /// Pairs n_j:t_j, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pairs: Vec<String>,
}

#[derive(Debug, Args)]
struct TheoremArgs {
    #[command(flatten)]
    monomial: MonomialArgs,
    #[arg(long, default_value_t = 1)]
    q: usize,
    /// Multiplicity bounds, one or q of them, "inf" allowed.
    #[arg(long, value_delimiter = ',', default_value = "inf")]
    ell: Vec<String>,
    /// Optional concrete values a_j.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<String>>,
}

#[derive(Debug, Subcommand)]
enum Criteria {
    /// Meromorphic criterion.
    Th1(TheoremArgs),
    /// Holomorphic criterion.
    Th2(TheoremArgs),
    /// n + sum n_j >= 3 + sum t_j.
    Cor1(MonomialArgs),
    /// n + sum n_j >= 2 + sum t_j.
    Cor2(MonomialArgs),
}

type CliResult<T> = Result<T, String>;

fn fail<E: std::fmt::Display>(context: &str) -> impl Fn(E) -> String + '_ {
    move |e| format!("{context}: {e}")
}

struct Report {
    config: Json,
    body: Map<String, Json>,
    notes: Vec<(&'static str, Json)>,
    csv: Option<String>,
    text: Option<String>,
    pass: bool,
}

impl Report {
    fn new(config: Json) -> Self {
        Report {
            config,
            body: Map::new(),
            notes: Vec::new(),
            csv: None,
            text: None,
            pass: true,
        }
    }

    fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Json => {
                let mut out = Map::new();
                out.insert("config".into(), self.config.clone());
                out.extend(self.body.clone());
                Ok(serde_json::to_string_pretty(&Json::Object(out)).expect("json renders") + "\n")
            }
            Format::Csv => {
                let csv = self.csv.as_ref().ok_or("csv output is not available for this command")?;
                let mut out = format!("# config: {}\n", self.config);
                for (k, v) in &self.notes {
                    out.push_str(&format!("# {k}: {v}\n"));
                }
                out.push_str(csv);
                Ok(out)
            }
            Format::Text => self
                .text
                .as_ref()
                .map(|t| format!("{t}\n"))
                .ok_or_else(|| "text output is not available for this command".into()),
        }
    }
}

struct Context {
    samples: usize,
    grid: RadialGrid,
    policy: SlackPolicy,
    config: Map<String, Json>,
}

impl Context {
    fn new(g: &Global) -> CliResult<Self> {
        let samples = match g.samples {
            Some(s) => s,
            None => match std::env::var(SAMPLES_ENV) {
                Ok(s) => s.trim().parse().map_err(fail(&format!("invalid {SAMPLES_ENV}")))?,
                Err(_) => DEFAULT_SAMPLES,
            },
        };
        let grid = RadialGrid::geometric(g.rmin, g.rmax, g.points).map_err(fail("grid"))?;
        let policy = SlackPolicy {
            epsilon: g.epsilon,
            max_exceptional_fraction: g.exceptional_fraction,
            tail_fraction: g.tail_fraction,
        }
        .validated()
        .map_err(fail("policy"))?;
        let mut config = Map::new();
        config.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        config.insert("samples".into(), json!(samples));
        config.insert("grid".into(), json!({ "rmin": g.rmin, "rmax": g.rmax, "points": g.points }));
        config.insert("policy".into(), json!(policy));
        config.insert("output".into(), json!(g.output.as_ref().map(|p| p.display().to_string())));
        Ok(Context {
            samples,
            grid,
            policy,
            config,
        })
    }

    fn config(&self, command: &str, args: Json) -> Json {
        let mut c = self.config.clone();
        c.insert("command".into(), json!(command));
        c.insert("args".into(), args);
        Json::Object(c)
    }
}

fn payload(arg: &str) -> CliResult<String> {
    match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(fail(&format!("cannot read {path}"))),
        None => Ok(arg.to_string()),
    }
}

fn function(text: &str) -> CliResult<Expr> {
    parse_function(text).map_err(fail(&format!("function '{text}'")))
}

fn complex(text: &str) -> CliResult<Complex64> {
    parse_complex(text).map_err(fail(&format!("value '{text}'")))
}

fn complexes(texts: &[String]) -> CliResult<Vec<Complex64>> {
    texts.iter().map(|t| complex(t)).collect()
}

fn diff_polynomial(args: &PolyArgs) -> CliResult<DiffPolynomial> {
    match (&args.spec, &args.poly) {
        (Some(spec), _) => {
            let spec = MonomialSpec::from_json(&payload(spec)?).map_err(fail("spec"))?;
            build_standard_monomial(&spec).map_err(fail("spec"))
        }
        (None, Some(text)) => DiffPolynomial::parse(text).map_err(fail("poly")),
        (None, None) => Err("one of --spec or --poly is required".into()),
    }
}

fn monomial(args: &MonomialArgs) -> CliResult<MonomialSpec> {
    let pairs = args
        .pairs
        .iter()
        .map(|p| {
            let (a, b) = p.split_once(':').ok_or_else(|| format!("pair '{p}' must look like n_j:t_j"))?;
            let parse = |s: &str| s.trim().parse::<u32>().map_err(fail(&format!("pair '{p}'")));
            Ok((parse(a)?, parse(b)?))
        })
        .collect::<CliResult<Vec<_>>>()?;
    MonomialSpec::new(args.n, pairs).map_err(fail("monomial"))
}

fn family(text: &str) -> CliResult<FamilySpec> {
    FamilySpec::from_json(&payload(text)?).map_err(fail("family"))
}

fn sequence(name: &str, text: &str) -> CliResult<SequenceRule> {
    SequenceRule::parse(text).map_err(fail(name))
}

fn slack_report(ctx: &Context, config: Json, series: SlackSeries) -> CliResult<Report> {
    let verdict = slack_verdict(&series, &ctx.policy).map_err(fail("verdict"))?;
    let mut report = Report::new(config);
    report.pass = verdict.pass;
    report.notes.push(("verdict", json!(verdict)));
    report.csv = Some(series.to_csv());
    report.body.insert("verdict".into(), json!(verdict));
    report.body.insert("series".into(), json!(series));
    Ok(report)
}

fn verify(ctx: &Context, which: &Verify) -> CliResult<Report> {
    let (name, args, series) = match which {
        Verify::Fmt { f, a } => {
            let s = check_fmt(&function(f)?, complex(a)?, &ctx.grid, ctx.samples);
            ("verify fmt", json!({ "f": f, "a": a }), s)
        }
        Verify::Smt { f, values } => {
            let s = check_smt(&function(f)?, &complexes(values)?, &ctx.grid, ctx.samples);
            ("verify smt", json!({ "f": f, "values": values }), s)
        }
        Verify::Logderiv { f, k } => {
            let s = check_log_derivative(&function(f)?, *k, ctx.policy.epsilon, &ctx.grid, ctx.samples);
            ("verify logderiv", json!({ "f": f, "k": k }), s)
        }
        Verify::Hinchliffe { poly } => {
            let p = diff_polynomial(poly)?;
            let s = check_hinchliffe(&function(&poly.g)?, &p, &ctx.grid, ctx.samples);
            ("verify hinchliffe", json!({ "g": poly.g, "P": p.to_string() }), s)
        }
        Verify::Lemma3 { poly, values, entire } => {
            let p = diff_polynomial(poly)?;
            let s = check_lemma3(&function(&poly.g)?, &p, &complexes(values)?, *entire, &ctx.grid, ctx.samples);
            let args = json!({ "g": poly.g, "P": p.to_string(), "values": values, "entire": entire });
            ("verify lemma3", args, s)
        }
    };
    let series = series.map_err(fail(name))?;
    slack_report(ctx, ctx.config(name, args), series)
}

fn expand(ctx: &Context, n: u32, t: u32) -> CliResult<Report> {
    let terms = expand_power_derivative(n, t).map_err(fail("expand"))?;
    let poly = DiffPolynomial::new(
        terms
            .iter()
            .map(|(c, index)| Term {
                coefficient: *c,
                factor: None,
                index: index.clone(),
            })
            .collect(),
    )
    .map_err(fail("expand"))?;
    let mut report = Report::new(ctx.config("expand", json!({ "n": n, "t": t })));
    let mut csv = String::from("coefficient,exponents\n");
    for (c, index) in &terms {
        let exps: Vec<String> = index.exponents().iter().map(u32::to_string).collect();
        csv.push_str(&format!("{c},{}\n", exps.join(" ")));
    }
    report.csv = Some(csv);
    report.text = Some(poly.to_string());
    report.body.insert("expansion".into(), json!(poly.to_string()));
    report.body.insert(
        "terms".into(),
        json!(terms
            .iter()
            .map(|(c, index)| json!({ "coefficient": c.to_string(), "exponents": index.exponents() }))
            .collect::<Vec<_>>()),
    );
    Ok(report)
}

fn criteria(ctx: &Context, which: &Criteria) -> CliResult<Report> {
    let theorem = |args: &TheoremArgs| -> CliResult<(CriterionParams, Json)> {
        let spec = monomial(&args.monomial)?;
        let ells = args
            .ell
            .iter()
            .map(|e| e.parse::<Ell>().map_err(fail("ell")))
            .collect::<CliResult<Vec<_>>>()?;
        let values = args.values.as_deref().map(complexes).transpose()?;
        let json = json!({
            "n": args.monomial.n,
            "pairs": spec.pairs(),
            "q": args.q,
            "ell": ells,
            "values": values.as_ref().map(|vs| vs.iter().map(|&v| complex_literal(v)).collect::<Vec<_>>()),
        });
        let params = CriterionParams::new(spec, args.q, values, ells).map_err(fail("criteria"))?;
        Ok((params, json))
    };
    let cor_json = |args: &MonomialArgs, spec: &MonomialSpec| json!({ "n": args.n, "pairs": spec.pairs() });
    let (name, args, record): (&str, Json, CriterionRecord) = match which {
        Criteria::Th1(a) => {
            let (p, j) = theorem(a)?;
            ("criteria th1", j, check_theorem1(&p))
        }
        Criteria::Th2(a) => {
            let (p, j) = theorem(a)?;
            ("criteria th2", j, check_theorem2(&p))
        }
        Criteria::Cor1(a) => {
            let spec = monomial(a)?;
            ("criteria cor1", cor_json(a, &spec), check_corollary1(&spec))
        }
        Criteria::Cor2(a) => {
            let spec = monomial(a)?;
            ("criteria cor2", cor_json(a, &spec), check_corollary2(&spec))
        }
    };
    let mut report = Report::new(ctx.config(name, args));
    report.pass = record.applies();
    report.text = Some(record.to_string());
    report.body.insert("record".into(), json!(record));
    report.body.insert("pass".into(), json!(record.applies()));
    Ok(report)
}

fn extra_term(text: &str) -> CliResult<(Expr, MonomialSpec)> {
    let mut value: Json = serde_json::from_str(&payload(text)?).map_err(fail("extra"))?;
    let coefficient = match value.as_object_mut().and_then(|o| o.remove("coefficient")) {
        None => Expr::one(),
        Some(Json::String(s)) => function(&s)?,
        Some(Json::Number(x)) => function(&x.to_string())?,
        Some(other) => return Err(format!("extra: coefficient must be a string or number, got {other}")),
    };
    let spec = MonomialSpec::from_json(&value.to_string()).map_err(fail("extra"))?;
    Ok((coefficient, spec))
}

fn run(cli: &Cli) -> CliResult<(Report, Format)> {
    let ctx = Context::new(&cli.global)?;
    let report = match &cli.command {
        Command::Characteristic { f } => {
            let r = radial_report(&function(f)?, &ctx.grid, ctx.samples).map_err(fail("characteristic"))?;
            let mut report = Report::new(ctx.config("characteristic", json!({ "f": f })));
            report.notes.push(("monotone", json!(r.monotone)));
            report.csv = Some(r.to_csv());
            report.body.insert("report".into(), r.to_json());
            report
        }
        Command::Verify { which } => verify(&ctx, which)?,
        Command::Expand { n, t } => expand(&ctx, *n, *t)?,
        Command::Criteria { which } => criteria(&ctx, which)?,
        Command::Marty {
            family: fam,
            resolution,
            shrink,
        } => {
            let r = marty_probe(&family(fam)?, *resolution, *shrink).map_err(fail("marty"))?;
            let args = json!({ "family": r.family, "resolution": resolution, "shrink": shrink });
            let mut report = Report::new(ctx.config("marty", args));
            report.notes.push(("flag", json!(r.flag)));
            report.csv = Some(r.to_csv());
            report.body.insert("report".into(), json!(r));
            report
        }
        Command::Zalcman {
            rescale,
            alpha,
            limit,
            xi_radius,
        } => {
            let fam = family(&rescale.family)?;
            let spec = RescalingSpec::new(*alpha, sequence("zv", &rescale.zv)?, sequence("rho", &rescale.rho)?)
                .map_err(fail("zalcman"))?;
            let limit = limit.as_deref().map(function).transpose()?;
            let r = zalcman_rescale(&fam, &spec, *xi_radius, rescale.xi_resolution, limit.as_ref())
                .map_err(fail("zalcman"))?;
            let args = json!({
                "family": fam,
                "alpha": alpha,
                "zv": rescale.zv,
                "rho": rescale.rho,
                "limit": r.limit,
                "xi_radius": xi_radius,
                "xi_resolution": rescale.xi_resolution,
            });
            let mut report = Report::new(ctx.config("zalcman", args));
            report.notes.push(("converged", json!(r.converged)));
            report.csv = Some(r.to_csv());
            report.body.insert("report".into(), json!(r));
            report
        }
        Command::Remark14 {
            rescale,
            main,
            extra,
            xi_radius,
        } => {
            let fam = family(&rescale.family)?;
            let main_spec = MonomialSpec::from_json(&payload(main)?).map_err(fail("main"))?;
            let extras = extra.iter().map(|e| extra_term(e)).collect::<CliResult<Vec<_>>>()?;
            let r = remark14_rescale_check(
                &main_spec,
                &extras,
                &fam,
                &sequence("zv", &rescale.zv)?,
                &sequence("rho", &rescale.rho)?,
                *xi_radius,
                rescale.xi_resolution,
            )
            .map_err(fail("remark14"))?;
            let args = json!({
                "family": fam,
                "main": main_spec,
                "extras": extras.iter().map(|(c, s)| json!({ "coefficient": c.to_string(), "spec": s })).collect::<Vec<_>>(),
                "zv": rescale.zv,
                "rho": rescale.rho,
                "xi_radius": xi_radius,
                "xi_resolution": rescale.xi_resolution,
            });
            let mut report = Report::new(ctx.config("remark14", args));
            report.pass = r.pass;
            let mut csv = String::from("v_re,v_im,rho");
            for e in &r.extras {
                csv.push_str(&format!(",sup_extra_{}", e.index));
            }
            csv.push('\n');
            for (i, (v, rho)) in fam.params.iter().zip(&r.rho).enumerate() {
                csv.push_str(&format!("{:?},{:?},{:?}", v.re, v.im, rho));
                for e in &r.extras {
                    csv.push_str(&format!(",{:?}", e.sup_modulus[i]));
                }
                csv.push('\n');
            }
            report.notes.push(("pass", json!(r.pass)));
            report.csv = Some(csv);
            report.body.insert("report".into(), json!(r));
            report
        }
    };
    let format = cli.global.format.unwrap_or(if report.csv.is_some() && report.text.is_none() {
        Format::Csv
    } else {
        Format::Text
    });
    Ok((report, format))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut report, format) = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Json::Object(c) = &mut report.config {
        c.insert("format".into(), json!(format.name()));
    }
    let text = match report.render(format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match &cli.global.output {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        eprintln!("FAIL");
        ExitCode::from(1)
    }
}
