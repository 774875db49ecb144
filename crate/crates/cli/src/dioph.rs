//! `dioph`: continued fractions, small-divisor scans and certificates.

use clap::Args;
use komatsu_spectral::diophantine::{
    build_report, scan_small_divisors, ContinuedFraction, DiophantineReport, DivisorProblem, Quantifier,
    ReportOptions, ScanOptions, ScanReport, ScanTarget,
};
use komatsu_spectral::weights::WeightSequence;
use komatsu_spectral::{Error, Result, Verdict};
use num_bigint::BigInt;
use num_traits::Signed;
use serde_json::json;

use crate::config::{parse_complex, parse_groups, parse_real, WeightRef};
use crate::output::{metadata, Cache};
use crate::{Globals, QuantifierArg, EXIT_OK};

#[derive(Debug, Args)]
pub struct DiophArgs {
    /// Use alpha = [10^{1!}; 10^{2!}, 10^{3!}, ...] (the default).
    #[arg(long)]
    pub alpha_factorial: bool,
    /// Use a finite continued fraction instead, e.g. "10,100".
    #[arg(long, value_name = "A0,A1,...", conflicts_with = "alpha_factorial")]
    pub cf_terms: Option<String>,
    /// Print the convergents p_0/q_0, ..., p_N/q_N exactly.
    #[arg(long, value_name = "N")]
    pub convergents: Option<usize>,
    /// Print Liouville witnesses for n = 0..=N.
    #[arg(long, value_name = "N")]
    pub liouville: Option<usize>,
    /// Scan small divisors shell by shell.
    #[arg(long)]
    pub scan: bool,
    /// Certify condition 2 for each weight and N.
    #[arg(long)]
    pub certify: bool,
    /// Group pair, t1xs3 or s3xs3.
    #[arg(long, default_value = "t1xs3")]
    pub group: String,
    /// Scan cutoff on <xi> + <eta>.
    #[arg(long, default_value_t = 2000.0)]
    pub cutoff: f64,
    /// Nested cutoffs for C_N (default: cutoff/4, cutoff/2, cutoff).
    #[arg(long, value_name = "R", value_delimiter = ',')]
    pub c_cutoffs: Vec<f64>,
    /// Constant a0, exact: rationals and multiples of alpha.
    #[arg(long, default_value = "alpha", allow_hyphen_values = true)]
    pub a0: String,
    /// Constant q0, e.g. 0, 1/2i, alpha*i.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub q0: String,
    #[command(flatten)]
    pub weights: crate::WeightArgs,
    /// Values of N (comma separated).
    #[arg(long = "N", value_name = "N", value_delimiter = ',')]
    pub n: Vec<f64>,
    #[arg(long, value_enum, default_value = "roumieu")]
    pub quantifier: QuantifierArg,
}

fn continued_fraction(a: &DiophArgs) -> Result<ContinuedFraction> {
    match &a.cf_terms {
        None => Ok(ContinuedFraction::alpha_factorial()),
        Some(s) => {
            let t: Vec<i64> = s
                .split(',')
                .map(|x| x.trim().parse().map_err(|_| Error::Config(format!("bad continued fraction term {x:?}"))))
                .collect::<Result<_>>()?;
            ContinuedFraction::finite(&t)
        }
    }
}

fn problem(a: &DiophArgs) -> Result<DivisorProblem> {
    let [g1, g2] = parse_groups(&a.group)?;
    let (re, im) = parse_complex(&a.q0)?;
    Ok(DivisorProblem::exact(g1, g2, parse_real(&a.a0)?, re, im).with_cf(continued_fraction(a)?))
}

fn weights(a: &DiophArgs) -> Result<Vec<WeightSequence>> {
    let mut refs = a.weights.refs();
    if refs.is_empty() {
        refs.push(WeightRef::Gevrey(1.0));
    }
    refs.iter().map(WeightRef::load).collect()
}

fn cutoffs(a: &DiophArgs) -> Result<Vec<f64>> {
    if !(a.cutoff.is_finite() && a.cutoff > 0.0) {
        return Err(Error::Config(format!("cutoff must be positive, got {}", a.cutoff)));
    }
    let c = if a.c_cutoffs.is_empty() { vec![a.cutoff / 4.0, a.cutoff / 2.0, a.cutoff] } else { a.c_cutoffs.clone() };
    if c.iter().any(|x| *x > a.cutoff || *x <= 0.0) {
        return Err(Error::Config(format!("C_N cutoffs must lie in (0, {}]", a.cutoff)));
    }
    Ok(c)
}

fn cache_key(kind: &str, p: &DivisorProblem, extra: &str) -> String {
    format!("{}|{kind}|{}|{extra}", env!("CARGO_PKG_VERSION"), serde_json::to_string(p).unwrap_or_default())
}

/// Full report (resonances, scan, certificates, smooth analysis), through the cache.
pub fn cached_report(p: &DivisorProblem, opts: &ReportOptions) -> Result<DiophantineReport> {
    let key = cache_key("report", p, &format!("{opts:?}"));
    let (r, hit) = Cache::from_env().get_or("report", &key, || build_report(p, opts))?;
    if hit {
        eprintln!("note: report taken from cache");
    }
    Ok(r)
}

fn cached_scan(p: &DivisorProblem, opts: &ScanOptions) -> Result<ScanReport> {
    let targets: Vec<_> = opts.targets.iter().map(|t| (&t.label, t.n)).collect();
    let key = cache_key("scan", p, &format!("{}|{:?}|{targets:?}|{}", opts.cutoff, opts.c_cutoffs, opts.pair_budget));
    let (r, hit) = Cache::from_env().get_or("scan", &key, || scan_small_divisors(p, opts))?;
    if hit {
        eprintln!("note: scan taken from cache");
    }
    Ok(r)
}

pub fn run(a: &DiophArgs, g: &Globals) -> Result<i32> {
    let cf = continued_fraction(a)?;
    let mut report = json!({ "metadata": metadata("dioph"), "cf": cf });
    let mut did = false;
    let mut code = EXIT_OK;

    if let Some(n) = a.convergents {
        did = true;
        let list = cf.convergent_list(n)?;
        let mut rows = Vec::new();
        for (i, c) in list.iter().enumerate() {
            let det = if i > 0 {
                let prev = &list[i - 1];
                Some((&c.p * &prev.q - &prev.p * &c.q).abs())
            } else {
                None
            };
            say!("p_{}/q_{} = {}/{}", c.n, c.n, c.p, c.q);
            rows.push(json!({
                "n": c.n, "p": c.p.to_string(), "q": c.q.to_string(),
                "determinant": det.as_ref().map(BigInt::to_string),
            }));
        }
        report["convergents"] = json!(rows);
    }

    if let Some(n) = a.liouville {
        did = true;
        let ws = cf.liouville_witnesses(n)?;
        for w in &ws {
            say!(
                "n = {}: |p_n - alpha q_n| < 1/q_(n+1): {}, q_n^n < q_(n+1): {}, log10 gap <= {:.3}",
                w.n, w.below_reciprocal_next, w.beats_power, w.log10_gap_upper
            );
        }
        report["liouville"] = json!(ws);
    }

    if a.scan || a.certify {
        did = true;
        let p = problem(a)?;
        let ws = weights(a)?;
        let ns = if a.n.is_empty() { vec![0.5, 1.0] } else { a.n.clone() };
        let c = cutoffs(a)?;
        report["problem"] = json!(p);
        if a.certify {
            let opts = ReportOptions {
                cutoff: a.cutoff,
                c_cutoffs: c,
                weights: ws,
                n_grid: ns,
                mode: Quantifier::from(a.quantifier),
                ..ReportOptions::default()
            };
            let r = cached_report(&p, &opts)?;
            let mut vs = Vec::new();
            for cert in &r.certificates {
                say!(
                    "{} N = {}: certified C_N = {:.6e} on {} [{}] -> {}",
                    cert.weight,
                    cert.n,
                    cert.certified_c(),
                    cert.validity,
                    cert.regime,
                    cert.verdict
                );
                vs.push(cert.verdict);
            }
            code = if vs.iter().all(|v| *v == Verdict::Consistent) {
                EXIT_OK
            } else if vs.contains(&Verdict::Refuted) {
                Verdict::Refuted.exit_code()
            } else {
                Verdict::Undecided.exit_code()
            };
            if !g.out.enabled() && a.scan {
                sayraw!(r.scan.to_csv());
            }
            g.out.file("shells.csv", &r.scan.to_csv())?;
            report["report"] = json!(r);
        } else {
            let mut opts = ScanOptions::new(a.cutoff);
            opts.c_cutoffs = c;
            for w in &ws {
                for &n in &ns {
                    opts.targets.push(ScanTarget::new(w, n));
                }
            }
            let s = cached_scan(&p, &opts)?;
            if g.out.enabled() {
                if let Some(m) = s.global_min() {
                    say!(
                        "global minimum {:.6e} at shell {} (lambda = {}, mu = {}, xi = {}, eta = {})",
                        m.min_denominator, m.shell, m.lambda, m.mu, m.xi, m.eta
                    );
                }
            } else {
                sayraw!(s.to_csv());
            }
            g.out.file("shells.csv", &s.to_csv())?;
            report["scan"] = json!(s);
        }
    }

    if !did {
        return Err(Error::Config(
            "nothing to do: give --convergents, --liouville, --scan or --certify".into(),
        ));
    }
    g.out.json("dioph.json", &report)?;
    Ok(code)
}
