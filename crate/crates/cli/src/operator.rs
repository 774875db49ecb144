//! `analyze`, `solve` and `example`: work on an operator `L_{aq}`.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use komatsu_spectral::builtins::{self, NAMES};
use komatsu_spectral::diophantine::Quantifier;
use komatsu_spectral::harmonic::{GroupId, HalfInt, Oversample};
use komatsu_spectral::normalform::{
    apply_operator, random_bandlimited, Expr, Field, GridPlan, OperatorSpec, SpecFile,
};
use komatsu_spectral::solver::{analyze_with, solve_variable, Property, PropertyVerdict};
use komatsu_spectral::transform::{forward_full, GridFunction, Spectrum};
use komatsu_spectral::{Error, Result, Verdict};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::{read, JobConfig, OperatorRef};
use crate::output::metadata;
use crate::{Globals, QuantifierArg, EXIT_OK, EXIT_REFUTED};

/// Operator source: a built-in example or a spec file.
#[derive(Debug, Clone, Args)]
pub struct OperatorArgs {
    /// Operator spec file (JSON, schema 1).
    #[arg(long, value_name = "FILE", conflicts_with = "example")]
    pub spec: Option<PathBuf>,
    /// Built-in example name.
    #[arg(long, value_name = "NAME")]
    pub example: Option<String>,
}

/// Verdict options shared by `analyze` and `example --analyze`.
#[derive(Debug, Clone, Args)]
pub struct VerdictArgs {
    #[command(flatten)]
    pub weights: crate::WeightArgs,
    /// Scan cutoff on <xi> + <eta> (nested cutoffs at 1/4 and 1/2 of it).
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Values of N (comma separated).
    #[arg(long = "N", value_name = "N", value_delimiter = ',')]
    pub n: Vec<f64>,
    #[arg(long, value_enum)]
    pub quantifier: Option<QuantifierArg>,
    /// Property whose verdict sets the exit code (first weight is used).
    #[arg(long, value_enum, default_value = "gh-roumieu")]
    pub exit_on: PropertyArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PropertyArg {
    GhRoumieu,
    GhBeurling,
    GsRoumieu,
    GsBeurling,
    GhSmooth,
    GsSmooth,
}

impl From<PropertyArg> for Property {
    fn from(p: PropertyArg) -> Self {
        match p {
            PropertyArg::GhRoumieu => Property::GhRoumieu,
            PropertyArg::GhBeurling => Property::GhBeurling,
            PropertyArg::GsRoumieu => Property::GsRoumieu,
            PropertyArg::GsBeurling => Property::GsBeurling,
            PropertyArg::GhSmooth => Property::GhSmooth,
            PropertyArg::GsSmooth => Property::GsSmooth,
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub op: OperatorArgs,
    #[command(flatten)]
    pub verdict: VerdictArgs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub op: OperatorArgs,
    /// Right-hand side f = L u0 for a random band-limited u0 (seeded by --seed).
    #[arg(long, conflicts_with = "rhs")]
    pub manufactured: bool,
    /// Right-hand side from a function file {"schema":1,"groups":[..],"expr":{..}}.
    #[arg(long, value_name = "FILE")]
    pub rhs: Option<PathBuf>,
    /// Band of the grid on G2 (l_max on S3, k_max on T1).
    #[arg(long, value_name = "L")]
    pub lmax: Option<f64>,
    /// Band of the grid on G1.
    #[arg(long, value_name = "B")]
    pub band1: Option<f64>,
    /// Oversampling of the fibre axis (psi, or t) on G1.
    #[arg(long, value_name = "F")]
    pub os1: Option<f64>,
    /// Oversampling of the fibre axis (psi, or t) on G2.
    #[arg(long, value_name = "F")]
    pub os2: Option<f64>,
    /// Relative threshold below which a coefficient counts as zero.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Largest accepted relative residual; above it the run exits with 1.
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    /// Example name (omit with --list).
    #[arg(value_name = "NAME", required_unless_present = "list")]
    pub name: Option<String>,
    /// List the built-in examples.
    #[arg(long)]
    pub list: bool,
    /// Run the property analysis.
    #[arg(long)]
    pub analyze: bool,
    #[command(flatten)]
    pub verdict: VerdictArgs,
}

/// A function on `G₁ × G₂` given symbolically.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionFile {
    pub schema: u32,
    pub groups: [GroupId; 2],
    pub expr: Expr,
}

impl FunctionFile {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let f: Self = serde_json::from_str(&read(path)?)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if f.schema != 1 {
            return Err(Error::Config(format!("unsupported function schema {}", f.schema)));
        }
        f.expr.validate(f.groups[0], f.groups[1])?;
        Ok(f)
    }
}

/// Loaded operator plus what to record about its origin.
pub struct Loaded {
    pub spec: OperatorSpec,
    pub source: Value,
}

fn merge_config(g: &Globals) -> JobConfig {
    g.config.clone().unwrap_or_default()
}

fn load_operator(op: &OperatorArgs, g: &Globals) -> Result<Loaded> {
    let r = match (&op.spec, &op.example) {
        (Some(p), None) => OperatorRef::File(p.clone()),
        (None, Some(n)) => OperatorRef::Builtin(n.clone()),
        _ => match g.config.as_ref().and_then(|c| c.operator.clone()) {
            Some(r) => r,
            None => return Err(Error::Config("give --spec FILE or --example NAME".into())),
        },
    };
    let loaded = match &r {
        OperatorRef::Builtin(n) => {
            let ex = builtins::load(n, g.convergent)?;
            Loaded {
                spec: ex.spec,
                source: json!({ "builtin": n, "description": ex.description, "primitive_check": ex.check }),
            }
        }
        OperatorRef::File(p) => {
            let (spec, notes) = SpecFile::from_json(&read(p)?)?.build(g.convergent)?;
            Loaded { spec, source: json!({ "file": p, "load": notes }) }
        }
    };
    if let Some(groups) = g.config.as_ref().and_then(|c| c.groups) {
        if groups != [loaded.spec.group1, loaded.spec.group2] {
            return Err(Error::Config(format!(
                "config groups {groups:?} do not match the operator ({:?}, {:?})",
                loaded.spec.group1, loaded.spec.group2
            )));
        }
    }
    Ok(loaded)
}

fn job(v: &VerdictArgs, g: &Globals) -> Result<JobConfig> {
    let mut c = merge_config(g);
    let w = v.weights.refs();
    if !w.is_empty() {
        c.weights = w;
    }
    if let Some(r) = v.cutoff {
        c.cutoffs = vec![r / 4.0, r / 2.0, r];
    }
    if !v.n.is_empty() {
        c.n_grid = v.n.clone();
    }
    if let Some(q) = v.quantifier {
        c.quantifier = Quantifier::from(q);
    }
    c.precision.convergent = g.convergent;
    c.seed = g.seed;
    c.validate()?;
    Ok(c)
}

fn print_verdicts(pv: &PropertyVerdict) {
    for (k, v) in pv.summary() {
        say!("{k}: {v}");
    }
    for n in &pv.notes {
        say!("note: {n}");
    }
    for c in &pv.chain_violations {
        say!("chain violation: {c}");
    }
}

fn verdict_csv(pv: &PropertyVerdict) -> String {
    let mut s = String::from("property,weight,verdict,cutoff\n");
    for e in &pv.entries {
        let _ = writeln!(s, "{},{},{},{}", e.property.as_str(), e.weight.as_deref().unwrap_or(""), e.verdict, e.cutoff);
    }
    s
}

fn run_verdicts(loaded: &Loaded, v: &VerdictArgs, g: &Globals, command: &str, extra: Value) -> Result<i32> {
    let c = job(v, g)?;
    let opts = c.report_options()?;
    let pv = analyze_with(&loaded.spec, &opts, crate::dioph::cached_report)?;
    print_verdicts(&pv);
    let label = komatsu_spectral::diophantine::weight_label(&opts.weights[0]);
    let p = Property::from(v.exit_on);
    let head = match p {
        Property::GhSmooth | Property::GsSmooth => pv.get(p, None),
        _ => pv.get(p, Some(&label)),
    }
    .unwrap_or(Verdict::Undecided);
    let report = json!({
        "metadata": metadata(command),
        "config": c,
        "operator": loaded.source,
        "extra": extra,
        "verdicts": pv,
    });
    g.out.json("verdicts.json", &report)?;
    g.out.file("verdicts.csv", &verdict_csv(&pv))?;
    if let Some(d) = &pv.diophantine {
        g.out.file("shells.csv", &d.scan.to_csv())?;
    }
    Ok(head.exit_code())
}

pub fn run_analyze(a: &AnalyzeArgs, g: &Globals) -> Result<i32> {
    let loaded = load_operator(&a.op, g)?;
    run_verdicts(&loaded, &a.verdict, g, "analyze", Value::Null)
}

pub fn run_example(a: &ExampleArgs, g: &Globals) -> Result<i32> {
    if a.list {
        for n in NAMES {
            let ex = builtins::load(n, g.convergent)?;
            say!("{n}: {}", ex.description);
        }
        return Ok(EXIT_OK);
    }
    let name = a.name.as_deref().expect("required by clap");
    let ex = builtins::load(name, g.convergent)?;
    say!("{}: {}", ex.name, ex.description);
    say!(
        "primitive residuals: A {:.3e}, Q {}",
        ex.check.a_residual.unwrap_or(0.0),
        ex.check.q_residual.map(|q| format!("{q:.3e}")).unwrap_or_else(|| "n/a".into())
    );
    let stated: Vec<_> = ex.stated.iter().map(|s| json!({ "property": s.property.as_str(), "verdict": s.verdict })).collect();
    let loaded = Loaded {
        source: json!({ "builtin": name, "description": ex.description, "primitive_check": ex.check }),
        spec: ex.spec,
    };
    if !a.analyze {
        g.out.json("example.json", &json!({ "metadata": metadata("example"), "operator": loaded.source, "stated": stated }))?;
        return Ok(EXIT_OK);
    }
    for s in &ex.stated {
        say!("stated {}: {}", s.property.as_str(), s.verdict);
    }
    run_verdicts(&loaded, &a.verdict, g, "example", json!({ "stated": stated }))
}

fn plan(spec: &OperatorSpec, a: &SolveArgs, c: &JobConfig) -> Result<GridPlan> {
    let mut p = GridPlan::default_for(spec.group1, spec.group2);
    if spec.group1 == GroupId::SU2 {
        // e^{i r A(x1)} is truncated at band1; band 6 with r <= 1 keeps it near 1e-6
        p.band1 = HalfInt::from_int(6);
        p.os1 = Oversample::default();
        if spec.group2 == GroupId::SU2 {
            p.band2 = HalfInt::from_int(1);
            if !spec.q_is_constant() {
                p.band1 = HalfInt::from_int(5);
            }
        }
    }
    if let Some([b1, b2]) = c.bands {
        p.band1 = b1;
        p.band2 = b2;
    }
    let half = |x: f64, what: &str| -> Result<HalfInt> {
        let t = 2.0 * x;
        if !(t.is_finite() && t >= 1.0 && t.fract() == 0.0) {
            return Err(Error::Config(format!("{what} must be a positive half-integer, got {x}")));
        }
        Ok(HalfInt::from_twice(t as i64))
    };
    if let Some(b) = a.band1 {
        p.band1 = half(b, "band1")?;
    }
    if let Some(l) = a.lmax {
        p.band2 = half(l, "lmax")?;
    }
    for (os, f) in [(&mut p.os1, a.os1), (&mut p.os2, a.os2)] {
        if let Some(f) = f {
            if !(f.is_finite() && f >= 1.0) {
                return Err(Error::Config(format!("oversampling must be >= 1, got {f}")));
            }
            os.psi = f;
        }
    }
    for (g, b) in [(spec.group1, p.band1), (spec.group2, p.band2)] {
        if g == GroupId::T1 && !b.is_integer() {
            return Err(Error::Config(format!("T1 band must be an integer, got {b}")));
        }
    }
    if !spec.q_is_constant() {
        // e^{±Q} needs headroom along the x2 fibre
        p.os2 = Oversample { psi: p.os2.psi.max(2.0), ..p.os2 };
        if a.lmax.is_none() && c.bands.is_none() && spec.group1 == GroupId::T1 {
            p.band2 = match spec.group2 {
                GroupId::T1 => HalfInt::from_int(16),
                GroupId::SU2 => HalfInt::from_int(7),
            };
        }
    }
    Ok(p)
}

/// `(⟨ξ⟩+⟨η⟩, max |coef|)` rows for plotting decay.
fn decay_csv(f: &Spectrum, u: &Spectrum) -> String {
    let mut s = String::from("scale,rhs_max_abs,solution_max_abs\n");
    for (a, b) in f.block_maxima().iter().zip(u.block_maxima()) {
        let _ = writeln!(s, "{},{:e},{:e}", a.0, a.1, b.1);
    }
    s
}

pub fn run_solve(a: &SolveArgs, g: &Globals) -> Result<i32> {
    let loaded = load_operator(&a.op, g)?;
    let spec = &loaded.spec;
    let mut c = merge_config(g);
    c.precision.convergent = g.convergent;
    c.seed = g.seed;
    if let Some(t) = a.threshold {
        c.precision.threshold = t;
    }
    c.validate()?;
    let p = plan(spec, a, &c)?;
    let grid = p.build(spec.group1, spec.group2)?;
    let mut manufactured = None;
    let f = if let Some(path) = &a.rhs {
        let ff = FunctionFile::load(path)?;
        if ff.groups != [spec.group1, spec.group2] {
            return Err(Error::Config("rhs groups do not match the operator".into()));
        }
        Field::Expr(ff.expr).sample(&grid, spec.alpha)?
    } else if a.manufactured || g.config.is_some() {
        let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
        let quarter = |b: HalfInt, grp: GroupId| match grp {
            GroupId::T1 => HalfInt::from_int((b.twice / 8).max(1)),
            GroupId::SU2 => HalfInt::from_twice((b.twice / 4).max(1)),
        };
        let u0 = random_bandlimited(&grid, quarter(p.band1, spec.group1), quarter(p.band2, spec.group2), &mut rng)?;
        let f = apply_operator(spec, &u0)?;
        manufactured = Some(u0);
        f
    } else {
        return Err(Error::Config("give --manufactured or --rhs FILE".into()));
    };
    let (u, rep) = solve_variable(spec, &f, c.precision.threshold)?;
    let residual = rep.residual.unwrap_or(f64::NAN);
    say!("residual ||L u - f|| / ||f|| = {residual:.3e}");
    say!("resonant modes = {}, min |denominator| = {:.3e}", rep.resonant_count, rep.min_denominator);
    let mut extra = json!({});
    if let Some(u0) = &manufactured {
        let d: GridFunction = u.zip_with(u0, |x, y| x - y)?;
        let kernel_defect = apply_operator(spec, &d)?.norm() / f.norm().max(f64::MIN_POSITIVE);
        say!("manufactured: ||L(u - u0)|| / ||f|| = {kernel_defect:.3e}");
        extra = json!({ "manufactured": true, "seed": g.seed, "kernel_defect": kernel_defect });
    }
    let (fs, us) = (forward_full(&f)?, forward_full(&u)?);
    g.out.json(
        "solve.json",
        &json!({
            "metadata": metadata("solve"),
            "config": c,
            "operator": loaded.source,
            "grid": p,
            "report": rep,
            "residual": residual,
            "tolerance": a.tolerance,
            "check": extra,
        }),
    )?;
    g.out.file("solution_spectrum.csv", &us.to_csv())?;
    g.out.file("decay.csv", &decay_csv(&fs, &us))?;
    if residual.is_nan() || residual > a.tolerance {
        eprintln!("error: residual {residual:.3e} exceeds tolerance {:.1e}; try a larger --lmax or --band1", a.tolerance);
        return Ok(EXIT_REFUTED);
    }
    Ok(EXIT_OK)
}
