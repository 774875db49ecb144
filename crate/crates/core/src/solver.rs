//! Fourier-division solvers for `L_{a₀q₀}`, the compatibility sets and the
//! property verdicts obtained from the normal form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::diophantine::{build_report, DiophantineReport, DivisorProblem, ReportOptions, ResonanceTest, Structure};
use crate::error::{Error, Result};
use crate::harmonic::{HalfInt, Rep};
use crate::normalform::{apply_operator, conjugate_backward, conjugate_forward, OperatorSpec};
use crate::transform::{partial_to_full, plancherel_norm, spectrum_to_partial, GridFunction, Layout, Spectrum};
use crate::verdict::Verdict;

/// Relative size below which a resonant coefficient counts as zero.
pub const DEFAULT_THRESHOLD: f64 = 1e-9;
/// `|σ|` below which a float-only symbol counts as resonant.
pub const FLOAT_RESONANCE_TOL: f64 = 1e-12;
/// Resonant modes listed in reports.
const MODE_LIST_CAP: usize = 50;

#[derive(Clone, Debug)]
enum Rule {
    Exact(ResonanceTest),
    Float,
}

/// Symbol `σ = i(λ + a₀μ) + q₀` of the normal form with its resonance rule.
#[derive(Clone, Debug)]
pub struct NormalForm {
    pub a0: f64,
    pub q0: Complex64,
    rule: Rule,
}

impl NormalForm {
    /// Exact resonance decisions when the problem is exact, else `|σ| < 1e−12`.
    pub fn new(problem: &DivisorProblem, alpha: f64) -> Result<Self> {
        let a0 = problem.a0.to_f64_with(alpha);
        let q0 = Complex64::new(problem.q0_re.to_f64_with(alpha), problem.q0_im.to_f64_with(alpha));
        let rule = if problem.is_exact() { Rule::Exact(problem.resonance_test()?) } else { Rule::Float };
        Ok(Self { a0, q0, rule })
    }

    pub fn from_spec(spec: &OperatorSpec) -> Result<Self> {
        Self::new(&spec.divisor_problem(), spec.alpha)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.rule, Rule::Exact(_))
    }

    pub fn symbol(&self, lambda: HalfInt, mu: HalfInt) -> Complex64 {
        Complex64::new(0.0, lambda.as_f64() + self.a0 * mu.as_f64()) + self.q0
    }

    pub fn is_resonant(&self, lambda: HalfInt, mu: HalfInt) -> bool {
        match &self.rule {
            Rule::Exact(t) => t.is_resonant(lambda, mu),
            Rule::Float => self.symbol(lambda, mu).norm() < FLOAT_RESONANCE_TOL,
        }
    }

    /// `(λ, μ)` of a product slot.
    fn weights(lay: &Layout, k: usize) -> (HalfInt, HalfInt) {
        let c2 = lay.f2.ncoef;
        (lay.f1.slots[k / c2].1, lay.f2.slots[k % c2].1)
    }
}

fn mode_label(lay: &Layout, k: usize) -> String {
    let c2 = lay.f2.ncoef;
    let (s1, s2) = (&lay.f1.slots[k / c2], &lay.f2.slots[k % c2]);
    let (r1, r2): (Rep, Rep) = (lay.f1.reps[s1.0], lay.f2.reps[s2.0]);
    format!("{r1}[{},{}] x {r2}[{},{}]", s1.1, s1.2, s2.1, s2.2)
}

/// Diagnostics of one division solve.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SolveReport {
    /// `‖L u − f‖ / ‖f‖`, computed by applying the operator on the grid.
    pub residual: Option<f64>,
    pub resonant_count: usize,
    pub resonant_modes: Vec<String>,
    /// Norm of the content removed on resonant modes.
    pub projected_mass: f64,
    /// `min |σ|` over the support of `f̂`.
    pub min_denominator: f64,
    /// `max|û| / max|f̂|`.
    pub amplification: f64,
    pub threshold: f64,
    pub exact_resonances: bool,
}

/// Zero the resonant coefficients; returns the projection and the removed norm.
pub fn project_k(nf: &NormalForm, f: &Spectrum) -> (Spectrum, f64) {
    let lay = f.layout.clone();
    let mut out = f.clone();
    let mut removed = Spectrum::zeros(lay.clone());
    for k in 0..lay.len() {
        let (l, m) = NormalForm::weights(&lay, k);
        if nf.is_resonant(l, m) {
            removed.coefs[k] = out.coefs[k];
            out.coefs[k] = Complex64::default();
        }
    }
    (out, plancherel_norm(&removed))
}

/// Resonant modes whose coefficient exceeds `threshold·‖f‖`, and their norm.
fn resonant_content(nf: &NormalForm, f: &Spectrum, threshold: f64) -> (Vec<String>, usize, f64) {
    let lay = &f.layout;
    let scale = plancherel_norm(f).max(1e-300);
    let mut modes = Vec::new();
    let mut count = 0;
    let mut removed = Spectrum::zeros(lay.clone());
    for (k, c) in f.coefs.iter().enumerate() {
        let (l, m) = NormalForm::weights(lay, k);
        if nf.is_resonant(l, m) {
            removed.coefs[k] = *c;
            if c.norm() > threshold * scale {
                count += 1;
                if modes.len() < MODE_LIST_CAP {
                    modes.push(mode_label(lay, k));
                }
            }
        }
    }
    (modes, count, plancherel_norm(&removed))
}

/// `û = f̂ / σ` coefficientwise. Fails with `NotInK` on resonant content.
pub fn solve_constant(nf: &NormalForm, f: &Spectrum, threshold: f64) -> Result<(Spectrum, SolveReport)> {
    let (modes, count, mass) = resonant_content(nf, f, threshold);
    if count > 0 {
        return Err(Error::NotInK { modes });
    }
    let lay = f.layout.clone();
    let scale = plancherel_norm(f).max(1e-300);
    let mut u = Spectrum::zeros(lay.clone());
    let mut min_den = f64::INFINITY;
    let (mut max_u, mut max_f) = (0.0f64, 0.0f64);
    for (k, c) in f.coefs.iter().enumerate() {
        let (l, m) = NormalForm::weights(&lay, k);
        if nf.is_resonant(l, m) {
            continue;
        }
        let s = nf.symbol(l, m);
        u.coefs[k] = c / s;
        if c.norm() > threshold * scale {
            min_den = min_den.min(s.norm());
        }
        max_f = max_f.max(c.norm());
        max_u = max_u.max(u.coefs[k].norm());
    }
    let report = SolveReport {
        residual: None,
        resonant_count: 0,
        resonant_modes: Vec::new(),
        projected_mass: mass,
        min_denominator: min_den,
        amplification: if max_f > 0.0 { max_u / max_f } else { 0.0 },
        threshold,
        exact_resonances: nf.is_exact(),
    };
    Ok((u, report))
}

/// `‖L_{aq} u − f‖ / ‖f‖`.
pub fn residual(spec: &OperatorSpec, u: &GridFunction, f: &GridFunction) -> Result<f64> {
    let lu = apply_operator(spec, u)?;
    Ok(lu.zip_with(f, |a, b| a - b)?.norm() / f.norm().max(1e-300))
}

/// Solve `L_{aq} u = f` through `Ψ_a ∘ e^Q`. Fails with `NotInJ` when
/// `Ψ_a e^Q f` has resonant content.
pub fn solve_variable(spec: &OperatorSpec, f: &GridFunction, threshold: f64) -> Result<(GridFunction, SolveReport)> {
    let nf = NormalForm::from_spec(spec)?;
    let g = partial_to_full(&conjugate_forward(spec, f)?)?;
    let (modes, count, mass) = resonant_content(&nf, &g, threshold);
    if count > 0 {
        return Err(Error::NotInJ { resonant_mass: mass, modes });
    }
    let (g, _) = project_k(&nf, &g);
    let (uhat, mut report) = solve_constant(&nf, &g, threshold)?;
    report.projected_mass = mass;
    let u = conjugate_backward(spec, &spectrum_to_partial(&uhat, &f.grid)?)?;
    report.residual = Some(residual(spec, &u, f)?);
    Ok((u, report))
}

/// The six global properties.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    GhRoumieu,
    GhBeurling,
    GsRoumieu,
    GsBeurling,
    GhSmooth,
    GsSmooth,
}

impl Property {
    pub fn as_str(self) -> &'static str {
        match self {
            Property::GhRoumieu => "GH_roumieu",
            Property::GhBeurling => "GH_beurling",
            Property::GsRoumieu => "GS_roumieu",
            Property::GsBeurling => "GS_beurling",
            Property::GhSmooth => "GH_smooth",
            Property::GsSmooth => "GS_smooth",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PropertyEntry {
    pub property: Property,
    /// Weight label for Komatsu properties; `None` for the smooth ones.
    pub weight: Option<String>,
    pub verdict: Verdict,
    pub evidence: serde_json::Value,
    pub cutoff: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PropertyVerdict {
    pub a0: String,
    pub q0: String,
    pub alpha_convergent: usize,
    /// Whether the reduction to `L_{a₀q₀}` is available.
    pub normal_form: bool,
    pub entries: Vec<PropertyEntry>,
    /// Implications of the diagram violated by the verdicts (expected empty).
    pub chain_violations: Vec<String>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diophantine: Option<DiophantineReport>,
}

impl PropertyVerdict {
    pub fn get(&self, p: Property, weight: Option<&str>) -> Option<Verdict> {
        self.entries
            .iter()
            .find(|e| e.property == p && e.weight.as_deref() == weight)
            .map(|e| e.verdict)
    }

    /// `property[weight] -> verdict` lines.
    pub fn summary(&self) -> Vec<(String, Verdict)> {
        self.entries
            .iter()
            .map(|e| {
                let key = match &e.weight {
                    Some(w) => format!("{}[{w}]", e.property.as_str()),
                    None => e.property.as_str().to_string(),
                };
                (key, e.verdict)
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn all_any(vs: &[Verdict], all: bool) -> Verdict {
    if vs.is_empty() {
        return Verdict::Undecided;
    }
    let (c, r) = (
        vs.iter().filter(|v| **v == Verdict::Consistent).count(),
        vs.iter().filter(|v| **v == Verdict::Refuted).count(),
    );
    if all {
        if c == vs.len() {
            Verdict::Consistent
        } else if r > 0 {
            Verdict::Refuted
        } else {
            Verdict::Undecided
        }
    } else if c > 0 {
        Verdict::Consistent
    } else if r == vs.len() {
        Verdict::Refuted
    } else {
        Verdict::Undecided
    }
}

fn undecided_all(spec: &OperatorSpec, note: String) -> PropertyVerdict {
    let (a0, q0) = spec.divisor_problem().describe();
    let props = [
        Property::GhRoumieu,
        Property::GhBeurling,
        Property::GsRoumieu,
        Property::GsBeurling,
        Property::GhSmooth,
        Property::GsSmooth,
    ];
    PropertyVerdict {
        a0,
        q0,
        alpha_convergent: spec.convergent,
        normal_form: false,
        entries: props
            .iter()
            .map(|&p| PropertyEntry {
                property: p,
                weight: None,
                verdict: Verdict::Undecided,
                evidence: json!({ "reason": note }),
                cutoff: 0.0,
            })
            .collect(),
        chain_violations: Vec::new(),
        notes: vec![note],
        diophantine: None,
    }
}

/// Property verdicts for `L_{aq}` from its normal form `L_{a₀q₀}`.
pub fn analyze(spec: &OperatorSpec, opts: &ReportOptions) -> Result<PropertyVerdict> {
    analyze_with(spec, opts, build_report)
}

/// [`analyze`] with a caller-supplied report builder (e.g. a cache).
pub fn analyze_with<F>(spec: &OperatorSpec, opts: &ReportOptions, build: F) -> Result<PropertyVerdict>
where
    F: FnOnce(&DivisorProblem, &ReportOptions) -> Result<DiophantineReport>,
{
    let a_const = matches!(&spec.a.field, crate::normalform::Field::Expr(e)
        if e.terms.iter().all(|t| t.x1 == crate::normalform::Atom::Const));
    if spec.a.primitive.is_none() && !a_const {
        return Ok(undecided_all(spec, "undecided (no normal form): missing primitive A".into()));
    }
    if spec.q_primitive.is_none() && !spec.q_is_constant() {
        return Ok(undecided_all(spec, "undecided (no normal form): missing primitive Q".into()));
    }
    let problem = spec.divisor_problem();
    let report = build(&problem, opts)?;
    let mut entries = Vec::new();
    let mut notes = Vec::new();

    let (res_verdict, res_evidence) = match &report.resonance {
        Some(inv) => {
            let sample: Vec<String> = inv
                .tuples
                .iter()
                .take(5)
                .map(|t| format!("xi={} eta={} m={} r={}", t.xi, t.eta, t.m, t.r))
                .collect();
            let v = match &inv.structure {
                Structure::Infinite { .. } => Verdict::Refuted,
                _ => Verdict::Consistent,
            };
            (v, json!({ "structure": inv.structure, "pairs": inv.pairs.iter().map(|(m, r)| format!("({m},{r})")).collect::<Vec<_>>(), "tuples_within_cutoff": inv.tuple_count, "cutoff": inv.cutoff, "sample": sample }))
        }
        None => {
            notes.push(format!("resonances undecided: {}", report.resonance_error.clone().unwrap_or_default()));
            (Verdict::Undecided, json!({ "reason": report.resonance_error }))
        }
    };

    for w in &opts.weights {
        let label = crate::diophantine::weight_label(w);
        let certs: Vec<_> = report.certificates.iter().filter(|c| c.weight == label).collect();
        let vs: Vec<Verdict> = certs.iter().map(|c| c.verdict).collect();
        let cond2 = certs
            .iter()
            .map(|c| {
                json!({ "N": c.n, "certified_C": c.certified_c(), "regime": c.regime, "validity": c.validity, "scan_log_c": c.scan_log_c, "stable": c.stable, "verdict": c.verdict })
            })
            .collect::<Vec<_>>();
        for (gs, gh, all) in [
            (Property::GsRoumieu, Property::GhRoumieu, true),
            (Property::GsBeurling, Property::GhBeurling, false),
        ] {
            let v2 = all_any(&vs, all);
            entries.push(PropertyEntry {
                property: gs,
                weight: Some(label.clone()),
                verdict: v2,
                evidence: json!({ "condition2": cond2 }),
                cutoff: opts.cutoff,
            });
            let gh_v = match (res_verdict, v2) {
                (Verdict::Refuted, _) | (_, Verdict::Refuted) => Verdict::Refuted,
                (Verdict::Consistent, Verdict::Consistent) => Verdict::Consistent,
                _ => Verdict::Undecided,
            };
            entries.push(PropertyEntry {
                property: gh,
                weight: Some(label.clone()),
                verdict: gh_v,
                evidence: json!({ "condition1": res_evidence, "condition2": cond2 }),
                cutoff: opts.cutoff,
            });
        }
    }

    let smooth = report.smooth.verdict();
    let witnesses: Vec<_> = report.smooth.witnesses.iter().take(4).collect();
    let smooth_evidence = json!({
        "regime": report.smooth.regime,
        "exponents": report.smooth.entries.iter().map(|e| json!({ "P": e.p, "verdict": e.verdict })).collect::<Vec<_>>(),
        "witnesses": witnesses,
        "liouville": report.smooth.liouville.iter().take(4).collect::<Vec<_>>(),
    });
    entries.push(PropertyEntry {
        property: Property::GsSmooth,
        weight: None,
        verdict: smooth,
        evidence: smooth_evidence.clone(),
        cutoff: opts.cutoff,
    });
    let gh_smooth = match (res_verdict, smooth) {
        (Verdict::Refuted, _) | (_, Verdict::Refuted) => Verdict::Refuted,
        (Verdict::Consistent, Verdict::Consistent) => Verdict::Consistent,
        _ => Verdict::Undecided,
    };
    entries.push(PropertyEntry {
        property: Property::GhSmooth,
        weight: None,
        verdict: gh_smooth,
        evidence: json!({ "condition1": res_evidence, "polynomial_bounds": smooth_evidence }),
        cutoff: opts.cutoff,
    });

    let mut out = PropertyVerdict {
        a0: report.a0.clone(),
        q0: report.q0.clone(),
        alpha_convergent: spec.convergent,
        normal_form: true,
        entries,
        chain_violations: Vec::new(),
        notes,
        diophantine: Some(report),
    };
    out.chain_violations = chain_violations(&out, opts);
    Ok(out)
}

/// `A ⇒ B` pairs of the diagram whose verdicts read `A` consistent, `B` refuted.
fn chain_violations(pv: &PropertyVerdict, opts: &ReportOptions) -> Vec<String> {
    let mut out = Vec::new();
    let mut check = |a: (Property, Option<&str>), b: (Property, Option<&str>)| {
        if pv.get(a.0, a.1) == Some(Verdict::Consistent) && pv.get(b.0, b.1) == Some(Verdict::Refuted) {
            out.push(format!("{} consistent but {} refuted", a.0.as_str(), b.0.as_str()));
        }
    };
    check((Property::GhSmooth, None), (Property::GsSmooth, None));
    for w in &opts.weights {
        let l = crate::diophantine::weight_label(w);
        let l = Some(l.as_str());
        check((Property::GhSmooth, None), (Property::GhRoumieu, l));
        check((Property::GhRoumieu, l), (Property::GhBeurling, l));
        check((Property::GsSmooth, None), (Property::GsRoumieu, l));
        check((Property::GsRoumieu, l), (Property::GsBeurling, l));
        check((Property::GhRoumieu, l), (Property::GsRoumieu, l));
        check((Property::GhBeurling, l), (Property::GsBeurling, l));
    }
    out
}
