//! `weights`: axioms, associated function and the elementary inequalities.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use komatsu_spectral::diophantine::weight_label;
use komatsu_spectral::weights::WeightSequence;
use komatsu_spectral::{Error, Result};
use serde_json::json;

use crate::config::WeightRef;
use crate::output::metadata;
use crate::{Globals, EXIT_OK, EXIT_REFUTED};

/// Grid on which the inequality suites run.
pub const INEQUALITY_GRID: [f64; 7] = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0];
/// Largest `t` in the second inequality suite.
pub const INEQUALITY_T_MAX: usize = 8;

#[derive(Debug, Args)]
pub struct WeightsArgs {
    /// Gevrey order s >= 1.
    #[arg(long, value_name = "S", conflicts_with = "custom")]
    pub gevrey: Option<f64>,
    /// Custom weight table: JSON array of M_0..M_kmax.
    #[arg(long, value_name = "FILE")]
    pub custom: Option<PathBuf>,
    /// Check the axioms (always done for custom tables).
    #[arg(long)]
    pub check_axioms: bool,
    /// Largest index checked.
    #[arg(long, default_value_t = 50)]
    pub kmax: usize,
    /// Check the Beurling variant of the third axiom.
    #[arg(long)]
    pub beurling: bool,
    /// Evaluate the associated function M(r) (repeatable).
    #[arg(long, value_name = "R")]
    pub associated: Vec<f64>,
    /// Run both inequality suites on r, s in {0.1, ..., 50}, t <= 8.
    #[arg(long)]
    pub inequalities: bool,
}

fn weight(a: &WeightsArgs, g: &Globals) -> Result<WeightSequence> {
    let r = match (a.gevrey, &a.custom) {
        (Some(s), None) => WeightRef::Gevrey(s),
        (None, Some(p)) => WeightRef::Custom(p.clone()),
        _ => match g.config.as_ref().and_then(|c| c.weights.first()) {
            Some(w) => w.clone(),
            None => return Err(Error::Config("give --gevrey S or --custom FILE".into())),
        },
    };
    r.load()
}

pub fn run(a: &WeightsArgs, g: &Globals) -> Result<i32> {
    let w = weight(a, g)?;
    let label = weight_label(&w);
    let custom = w.gevrey_order().is_none();
    let mut code = EXIT_OK;
    let mut report = json!({ "metadata": metadata("weights"), "weight": label, "sequence": w });
    let mut csv = String::from("section,r,s,t,value,argmax_k,pass,slack_i,slack_ii\n");

    if a.check_axioms || custom || (a.associated.is_empty() && !a.inequalities) {
        let kmax = match w.kmax() {
            Some(k) => a.kmax.min(k),
            None => a.kmax,
        };
        let ax = w.check_axioms(kmax, a.beurling)?;
        for e in &ax.entries {
            let at = e.failed_at.map(|k| format!(" at k = {k}")).unwrap_or_default();
            say!("{:<5} {}{at} (margin {:.6e})", e.axiom, if e.pass { "pass" } else { "FAIL" }, e.margin);
            let _ = writeln!(csv, "axiom:{},,,{},,,{},{},", e.axiom, e.failed_at.map(|k| k.to_string()).unwrap_or_default(), e.pass, e.margin);
        }
        if ax.all_pass() {
            say!("axioms: all pass (kmax = {})", ax.kmax);
        } else {
            let failed: Vec<_> = ax.entries.iter().filter(|e| !e.pass).map(|e| e.axiom.as_str()).collect();
            say!("axioms: failed {}", failed.join(", "));
            code = EXIT_REFUTED;
        }
        report["axioms"] = json!(ax);
        report["all_pass"] = json!(ax.all_pass());
    }

    if !a.associated.is_empty() {
        let mut qs = Vec::new();
        for &r in &a.associated {
            let q = w.associated(r)?;
            say!("M({r}) = {:.6} (argmax k = {})", q.result, q.argmax_k);
            let _ = writeln!(csv, "associated,{r},,,{},{},,,", q.result, q.argmax_k);
            qs.push(q);
        }
        report["associated"] = json!(qs);
    }

    if a.inequalities {
        let witness = match w.stability {
            Some(c) => c,
            None => w.stability_witness(w.kmax().map_or(a.kmax, |k| k.min(a.kmax)))?,
        };
        let mut rows = Vec::new();
        let mut all = true;
        for &r in &INEQUALITY_GRID {
            for &s in &INEQUALITY_GRID {
                let c = w.check_inequality_prop31(r, s, Some(witness))?;
                all &= c.pass();
                let _ = writeln!(csv, "prop31,{r},{s},,,,{},{},{}", c.pass(), c.slack_i, c.slack_ii);
                rows.push(json!({ "suite": "prop31", "r": r, "s": s, "check": c }));
                for t in 0..=INEQUALITY_T_MAX {
                    let c = w.check_inequality_prop32(r, s, t, Some(witness))?;
                    all &= c.pass();
                    let _ = writeln!(csv, "prop32,{r},{s},{t},,,{},{},{}", c.pass(), c.slack_i, c.slack_ii);
                    rows.push(json!({ "suite": "prop32", "r": r, "s": s, "t": t, "check": c }));
                }
            }
        }
        say!("inequalities: {} ({} checks)", if all { "all pass" } else { "FAIL" }, rows.len());
        if !all {
            code = EXIT_REFUTED;
        }
        report["inequalities"] = json!({ "all_pass": all, "checks": rows });
    }

    g.out.json("weights.json", &report)?;
    g.out.file("weights.csv", &csv)?;
    Ok(code)
}
