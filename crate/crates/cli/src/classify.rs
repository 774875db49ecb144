//! `classify`: Komatsu-class membership from coefficient decay.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use komatsu_spectral::harmonic::{GroupGrid, GroupId, HalfInt, Rep};
use komatsu_spectral::normalform::{alpha_convergent, Field};
use komatsu_spectral::transform::{decay_classify, forward_full, ClassMode, Layout, ProductGrid, Spectrum};
use komatsu_spectral::{Error, Result};
use num_complex::Complex64;
use serde_json::json;

use crate::config::{parse_groups, WeightRef};
use crate::operator::FunctionFile;
use crate::output::metadata;
use crate::{Globals, EXIT_OK, EXIT_REFUTED};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    RoumieuFunction,
    BeurlingFunction,
    RoumieuDistribution,
    BeurlingDistribution,
}

impl From<ModeArg> for ClassMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::RoumieuFunction => ClassMode::RoumieuFunction,
            ModeArg::BeurlingFunction => ClassMode::BeurlingFunction,
            ModeArg::RoumieuDistribution => ClassMode::RoumieuDistribution,
            ModeArg::BeurlingDistribution => ClassMode::BeurlingDistribution,
        }
    }
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Function file {"schema":1,"groups":[..],"expr":{..}}, sampled and transformed.
    #[arg(long, value_name = "FILE", conflicts_with = "synthetic")]
    pub function: Option<PathBuf>,
    /// Synthetic spectrum exp(-RATE (<xi>+<eta>)) on the diagonal m = n, r = s.
    #[arg(long, value_name = "RATE", allow_hyphen_values = true)]
    pub synthetic: Option<f64>,
    /// Group pair for --synthetic.
    #[arg(long, default_value = "t1xs3")]
    pub group: String,
    /// Band on G1.
    #[arg(long, default_value_t = 16.0)]
    pub band1: f64,
    /// Band on G2.
    #[arg(long, default_value_t = 8.0)]
    pub band2: f64,
    /// Gevrey order (default 1).
    #[arg(long, value_name = "S", conflicts_with = "custom")]
    pub gevrey: Option<f64>,
    /// Custom weight table.
    #[arg(long, value_name = "FILE")]
    pub custom: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "roumieu-function")]
    pub mode: ModeArg,
    /// Values of N (comma separated).
    #[arg(long = "N", value_name = "N", value_delimiter = ',', default_value = "0.25,0.5,1,2,4")]
    pub n: Vec<f64>,
    /// Nested cutoffs on <xi>+<eta> (default: 1/4, 1/2, 1 of the way across the retained scales).
    #[arg(long, value_name = "R", value_delimiter = ',')]
    pub cutoffs: Vec<f64>,
}

fn band(g: GroupId, b: f64) -> Result<HalfInt> {
    let t = 2.0 * b;
    let ok = t.is_finite() && t >= 1.0 && t.fract() == 0.0 && (g == GroupId::SU2 || (t as i64) % 2 == 0);
    if !ok {
        return Err(Error::Config(format!("invalid band {b} for {}", g.name())));
    }
    Ok(HalfInt::from_twice(t as i64))
}

fn synthetic(groups: [GroupId; 2], b1: HalfInt, b2: HalfInt, rate: f64) -> Spectrum {
    let layout = Layout::new(groups[0], b1, groups[1], b2);
    Spectrum::from_fn(layout, |xi: Rep, eta: Rep, m, n, r, s| {
        if m == n && r == s {
            Complex64::new((-rate * (xi.bracket() + eta.bracket())).exp(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

pub fn run(a: &ClassifyArgs, g: &Globals) -> Result<i32> {
    let w = match (a.gevrey, &a.custom) {
        (_, Some(p)) => WeightRef::Custom(p.clone()),
        (Some(s), None) => WeightRef::Gevrey(s),
        (None, None) => g.config.as_ref().and_then(|c| c.weights.first().cloned()).unwrap_or(WeightRef::Gevrey(1.0)),
    }
    .load()?;
    let (spec, source) = match (&a.function, a.synthetic) {
        (Some(p), None) => {
            let f = FunctionFile::load(p)?;
            let [g1, g2] = f.groups;
            let grid = ProductGrid::new(
                GroupGrid::quadrature(g1, band(g1, a.band1)?, 1.0)?,
                GroupGrid::quadrature(g2, band(g2, a.band2)?, 1.0)?,
            );
            let values = Field::Expr(f.expr).sample(&grid, alpha_convergent(g.convergent)?)?;
            (forward_full(&values)?, json!({ "function": p }))
        }
        (None, Some(rate)) => {
            let groups = parse_groups(&a.group)?;
            let s = synthetic(groups, band(groups[0], a.band1)?, band(groups[1], a.band2)?, rate);
            (s, json!({ "synthetic_rate": rate, "groups": groups }))
        }
        _ => return Err(Error::Config("give --function FILE or --synthetic RATE".into())),
    };
    let cut = (!a.cutoffs.is_empty()).then_some(a.cutoffs.as_slice());
    let rep = decay_classify(&spec, &w, &a.n, a.mode.into(), cut)?;
    say!("{}", rep.verdict);
    if let Some(n) = rep.critical_n {
        say!("critical N = {n:.6}");
    }
    if let Some(c) = rep.equivalent_rate {
        say!("equivalent rate = {c:.6}");
    }
    g.out.json("classify.json", &json!({ "metadata": metadata("classify"), "input": source, "report": rep }))?;
    g.out.file("spectrum.csv", &spec.to_csv())?;
    Ok(if rep.consistent { EXIT_OK } else { EXIT_REFUTED })
}
