//! Certified lower bounds `|D| ≥ C_N e^{−M(N·scale)}` and polynomial-bound refutations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::scan::weight_label;
use super::{
    bracket_at, big_ln, resonance_set, scan_small_divisors, DivisorProblem,
    LiouvilleWitness, ResonanceInventory, ScanOptions, ScanReport, ScanTarget,
};
use crate::error::{Error, Result};
use crate::harmonic::GroupId;
use crate::verdict::Verdict;
use crate::weights::WeightSequence;

/// Quantifier over `N` in the Roumieu (`∀N`) and Beurling (`∃N`) statements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantifier {
    Roumieu,
    Beurling,
}

/// Bound on tuples with `q_n <= |Y| < q_{n+1}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LadderRung {
    pub n: usize,
    pub y_from: String,
    pub y_below: String,
    /// Lower bound of `⟨ξ⟩ + ⟨η⟩` over the rung.
    pub scale_lower: f64,
    pub log_bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Condition2Certificate {
    pub weight: String,
    pub n: f64,
    pub mode: Quantifier,
    pub cutoffs: Vec<f64>,
    /// `ln C_N` from the scan at each cutoff.
    pub scan_log_c: Vec<f64>,
    /// Scan values agree within a factor 2 across cutoffs.
    pub stable: bool,
    pub uncertified: u64,
    /// Which certified argument applies.
    pub regime: String,
    pub ladder: Vec<LadderRung>,
    /// Certified `ln C_N` valid on `validity`.
    pub certified_log_c: f64,
    pub validity: String,
    /// Every scanned tuple lies in the certified range.
    pub scan_covered: bool,
    /// The scan never undercuts the certified bound.
    pub scan_respects_bound: bool,
    pub verdict: Verdict,
}

impl Condition2Certificate {
    pub fn certified_c(&self) -> f64 {
        self.certified_log_c.exp()
    }
}

/// Number of ladder rungs: `n = 0, 1, 2` covers `|Y| < q_3`.
pub const DEFAULT_RUNGS: usize = 3;

fn m_lower(w: &WeightSequence, r: f64) -> f64 {
    w.associated_fn().eval_lower(r).unwrap_or(0.0)
}

/// Certifies condition 2 for one `(w, N)` from a scan that tracked that pair.
pub fn certify_condition2(
    problem: &DivisorProblem,
    scan: &ScanReport,
    w: &WeightSequence,
    n: f64,
    mode: Quantifier,
    rungs: usize,
) -> Result<Condition2Certificate> {
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::Domain(format!("N must be a positive real, got {n}")));
    }
    let label = weight_label(w);
    let entries = scan.c_entries_for(&label, n);
    if entries.is_empty() {
        return Err(Error::Domain(format!("scan did not track C_N for {label}, N = {n}")));
    }
    let cutoffs: Vec<f64> = entries.iter().map(|e| e.cutoff).collect();
    let scan_log_c: Vec<f64> = entries.iter().map(|e| e.log_c).collect();
    let lo = scan_log_c.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = scan_log_c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let stable = lo.is_finite() && hi - lo <= std::f64::consts::LN_2 + 1e-12;

    let mut cert = Condition2Certificate {
        weight: label,
        n,
        mode,
        cutoffs,
        scan_log_c,
        stable,
        uncertified: scan.uncertified,
        regime: String::new(),
        ladder: Vec::new(),
        certified_log_c: f64::NEG_INFINITY,
        validity: String::new(),
        scan_covered: false,
        scan_respects_bound: false,
        verdict: Verdict::Undecided,
    };

    let lat = match problem.lattice() {
        Ok(l) => l,
        Err(Error::UncertifiedInput(_)) => {
            cert.regime = "float coefficients: no certified bound".into();
            return Ok(cert);
        }
        Err(e) => return Err(e),
    };
    let ln_2l = (lat.two_l as f64).ln() * (1.0 + 1e-15);
    let margin = |v: f64| v - 1e-12 * (1.0 + v.abs());
    let max_y: BigInt = scan.max_abs_y.parse().unwrap_or_default();

    if !lat.x_zero {
        cert.regime = "Re q0 != 0: |D| >= |Re q0|".into();
        cert.certified_log_c = margin(lat.x_lo.ln());
        cert.validity = "all tuples".into();
        cert.scan_covered = true;
    } else if !lat.uses_alpha {
        cert.regime = "rational coefficients: |D| >= 1/(2L) off resonance".into();
        cert.certified_log_c = margin(-ln_2l);
        cert.validity = "all non-resonant tuples".into();
        cert.scan_covered = true;
    } else {
        let cf = &problem.cf;
        let top = rungs.max(1);
        let conv = cf.convergent_list(top)?;
        let g2 = problem.group2;
        let mut bounds = Vec::new();
        // Y = 0: X is a non-zero integer
        bounds.push(margin(-ln_2l));
        let (l_b1, two_l_y1) = (lat.cyj.abs() as f64, lat.cy0.abs() as f64);
        for k in 0..top {
            let (qn, qn1) = (&conv[k].q, &conv[k + 1].q);
            if lat.cyj == 0 && !(BigInt::from(lat.cy0.abs()) >= *qn && BigInt::from(lat.cy0.abs()) < *qn1) {
                continue;
            }
            // |Y| >= q_n forces |j| >= (q_n - |cy0|)/|cyj|
            let scale_lower = if lat.cyj == 0 {
                2.0
            } else {
                let qf = qn.to_f64().unwrap_or(f64::INFINITY);
                let jmin = ((qf - two_l_y1) / l_b1).max(0.0);
                let s = 1.0 + bracket_at(g2, jmin / 2.0);
                s * (1.0 - 1e-12)
            };
            let gap = big_ln(&(qn1 + qn)) * (1.0 + 1e-15) + 1e-15;
            let log_bound = margin(-ln_2l - gap + m_lower(w, n * scale_lower));
            bounds.push(log_bound);
            cert.ladder.push(LadderRung {
                n: k,
                y_from: qn.to_string(),
                y_below: qn1.to_string(),
                scale_lower,
                log_bound,
            });
        }
        let q_top = &conv[top].q;
        if lat.cyj == 0 {
            cert.regime = "irrational constant shift: one ladder rung".into();
            let covered = BigInt::from(lat.cy0.abs()) < *q_top;
            cert.validity = if covered { "all non-resonant tuples".into() } else { "none".into() };
            cert.scan_covered = covered;
            if !covered {
                bounds.clear();
            }
        } else {
            cert.regime = "continued-fraction ladder on |Y| = |L·b1·2μ + 2L·Im q0 alpha part|".into();
            cert.validity = format!("non-resonant tuples with |Y| < q_{top} ({} digits)", q_top.to_string().len());
            cert.scan_covered = max_y < *q_top;
        }
        cert.certified_log_c = bounds.iter().cloned().fold(f64::INFINITY, f64::min);
        if bounds.is_empty() {
            cert.certified_log_c = f64::NEG_INFINITY;
        }
    }
    cert.scan_respects_bound = cert.scan_log_c.iter().all(|&c| c >= cert.certified_log_c - 1e-9);
    cert.verdict = if cert.certified_log_c.is_finite()
        && cert.stable
        && cert.uncertified == 0
        && cert.scan_covered
        && cert.scan_respects_bound
    {
        Verdict::Consistent
    } else {
        Verdict::Undecided
    };
    Ok(cert)
}

/// One tuple family `X + αY = σt(αq_n − p_n)` contradicting polynomial bounds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmoothWitness {
    pub n: usize,
    pub t: u64,
    pub sigma: i8,
    /// `2λ` and `2μ` as decimal strings when the convergent is materialized.
    pub twice_lambda: Option<String>,
    pub twice_mu: Option<String>,
    pub log10_denominator_upper: f64,
    pub log10_scale_upper: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmoothEntry {
    pub p: u32,
    pub verdict: Verdict,
    /// `log10` upper bounds of `|D|·scale^P` along the witnesses.
    pub u: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmoothReport {
    pub regime: String,
    pub witnesses: Vec<SmoothWitness>,
    pub entries: Vec<SmoothEntry>,
    /// Exact Liouville witnesses of `α` (empty if `α` is not involved).
    pub liouville: Vec<LiouvilleWitness>,
}

impl SmoothReport {
    /// The smooth condition asks for one exponent `P`: refuted only if every
    /// tested `P` is refuted, consistent if some `P` is.
    pub fn verdict(&self) -> Verdict {
        if self.entries.iter().any(|e| e.verdict == Verdict::Consistent) {
            Verdict::Consistent
        } else if !self.entries.is_empty() && self.entries.iter().all(|e| e.verdict == Verdict::Refuted) {
            Verdict::Refuted
        } else {
            Verdict::Undecided
        }
    }
}

/// Threshold below which `log10(|D| scale^P)` counts as a violation.
pub const SMOOTH_LOG10_THRESHOLD: f64 = -1000.0;

fn log10_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (1.0 + 10f64.powf(lo - hi)).log10() + 1e-12
}

/// Tests `|D| >= C·scale^{−P}` for `P = 1..=p_max` along convergents `n <= n_max`.
pub fn smooth_analysis(problem: &DivisorProblem, p_max: u32, n_max: usize) -> Result<SmoothReport> {
    let lat = match problem.lattice() {
        Ok(l) => l,
        Err(Error::UncertifiedInput(_)) => {
            return Ok(SmoothReport {
                regime: "float coefficients".into(),
                witnesses: vec![],
                entries: (1..=p_max).map(|p| SmoothEntry { p, verdict: Verdict::Undecided, u: vec![] }).collect(),
                liouville: vec![],
            })
        }
        Err(e) => return Err(e),
    };
    let cf = &problem.cf;
    let liouville = if lat.uses_alpha && cf.is_infinite() {
        cf.liouville_witnesses(cf.cap.saturating_sub(2).min(4))?
    } else {
        vec![]
    };
    let bounded = |regime: &str| SmoothReport {
        regime: regime.into(),
        witnesses: vec![],
        entries: (1..=p_max).map(|p| SmoothEntry { p, verdict: Verdict::Consistent, u: vec![] }).collect(),
        liouville: liouville.clone(),
    };
    if !lat.x_zero {
        return Ok(bounded("Re q0 != 0: denominators bounded below"));
    }
    if !lat.uses_alpha {
        return Ok(bounded("rational coefficients: |D| >= 1/(2L) off resonance"));
    }
    if lat.cyj == 0 {
        return Ok(bounded("constant irrational shift: |D| bounded below"));
    }

    // admissibility depends on (p_n, q_n) modulo 2·|cxi|·|cyj|
    let modulus = BigInt::from(2 * lat.cxi.abs() * lat.cyj.abs());
    let step1 = super::weight_step(problem.group1) as i128;
    let step2 = super::weight_step(problem.group2) as i128;
    let admissible = |p: &BigInt, q: &BigInt, t: i128, sigma: i128| -> Option<(BigInt, BigInt)> {
        let num_j = BigInt::from(sigma * t) * q - lat.cy0;
        let (j, rj) = num_j.div_rem(&BigInt::from(lat.cyj));
        if !rj.is_zero() || !j.mod_floor(&BigInt::from(step2)).is_zero() {
            return None;
        }
        let num_i = -BigInt::from(sigma * t) * p - BigInt::from(lat.cxj) * &j - lat.cx0;
        let (i, ri) = num_i.div_rem(&BigInt::from(lat.cxi));
        if !ri.is_zero() || !i.mod_floor(&BigInt::from(step1)).is_zero() {
            return None;
        }
        Some((i, j))
    };
    let t_max = (modulus.to_i128().unwrap_or(i128::MAX)).clamp(1, 4096) * 2;

    let alpha_hi_log = (lat.alpha.1.abs() + 1.0).log10();
    let log2l = (lat.two_l as f64).log10();
    let mut witnesses = Vec::new();
    for n in 0..=n_max {
        let (p_res, q_res) = if n <= cf.cap {
            let c = cf.convergent(n)?;
            (c.p, c.q)
        } else {
            cf.convergent_residues(n, &modulus)?
        };
        let mut found = None;
        'search: for t in 1..=t_max {
            for sigma in [1i128, -1] {
                if let Some(ij) = admissible(&p_res, &q_res, t, sigma) {
                    found = Some((t, sigma, ij));
                    break 'search;
                }
            }
        }
        let Some((t, sigma, (i, j))) = found else {
            continue;
        };
        let (_, lq) = cf.log10_q_bracket(n)?;
        let (lq1, _) = cf.log10_q_bracket(n + 1)?;
        let lt = (t as f64).log10();
        // |D| = t|αq_n − p_n|/(2L) < t/(2L q_{n+1})
        let log_d = lt - log2l - lq1 + 1e-12;
        // |2μ| <= (t q_n + |cy0|)/|cyj|, |2λ| <= (t p_n + |cxj||2μ| + |cx0|)/|cxi|
        let l_abs = |v: i128| if v == 0 { f64::NEG_INFINITY } else { (v.abs() as f64).log10() };
        let lj = log10_add(lt + lq, l_abs(lat.cy0)) - l_abs(lat.cyj);
        let lp = lq + alpha_hi_log;
        let li = log10_add(log10_add(lt + lp, l_abs(lat.cxj) + lj), l_abs(lat.cx0)) - l_abs(lat.cxi);
        let log_scale = log10_add(log10_add(li, lj) - 2f64.log10(), 2f64.log10());
        let exact_ij = n <= cf.cap;
        witnesses.push(SmoothWitness {
            n,
            t: t as u64,
            sigma: sigma as i8,
            twice_lambda: exact_ij.then(|| i.to_string()),
            twice_mu: exact_ij.then(|| j.to_string()),
            log10_denominator_upper: log_d,
            log10_scale_upper: log_scale,
        });
    }

    let entries = (1..=p_max)
        .map(|p| {
            let u: Vec<f64> = witnesses
                .iter()
                .map(|w| w.log10_denominator_upper + p as f64 * w.log10_scale_upper)
                .collect();
            let k = u.len();
            let accelerating = k >= 3 && {
                let (a, b, c) = (u[k - 3], u[k - 2], u[k - 1]);
                c < b && b < a && (b - c) > (a - b)
            };
            let reached = u.iter().any(|&x| x < SMOOTH_LOG10_THRESHOLD);
            let verdict = if reached && accelerating { Verdict::Refuted } else { Verdict::Undecided };
            SmoothEntry { p, verdict, u }
        })
        .collect();
    Ok(SmoothReport {
        regime: "continued-fraction witnesses X + αY = σt(αq_n − p_n)".into(),
        witnesses,
        entries,
        liouville,
    })
}

/// Options for [`build_report`].
#[derive(Clone, Debug)]
pub struct ReportOptions {
    pub cutoff: f64,
    pub c_cutoffs: Vec<f64>,
    pub weights: Vec<WeightSequence>,
    pub n_grid: Vec<f64>,
    pub mode: Quantifier,
    pub rungs: usize,
    pub resonance_cutoff: f64,
    pub p_max: u32,
    pub n_max: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            cutoff: 2000.0,
            c_cutoffs: vec![500.0, 1000.0, 2000.0],
            weights: vec![WeightSequence::gevrey(1.0).expect("valid")],
            n_grid: vec![0.5, 1.0],
            mode: Quantifier::Roumieu,
            rungs: DEFAULT_RUNGS,
            resonance_cutoff: 20.0,
            p_max: 10,
            n_max: 12,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiophantineReport {
    pub a0: String,
    pub q0: String,
    pub group1: GroupId,
    pub group2: GroupId,
    pub cutoff: f64,
    pub resonance: Option<ResonanceInventory>,
    /// Set when resonances could not be decided (float input).
    pub resonance_error: Option<String>,
    pub scan: ScanReport,
    pub certificates: Vec<Condition2Certificate>,
    pub smooth: SmoothReport,
}

/// Resonances, scan, certificates and smooth analysis in one pass.
pub fn build_report(problem: &DivisorProblem, opts: &ReportOptions) -> Result<DiophantineReport> {
    let mut scan_opts = ScanOptions::new(opts.cutoff);
    scan_opts.c_cutoffs = opts.c_cutoffs.clone();
    for w in &opts.weights {
        for &n in &opts.n_grid {
            scan_opts.targets.push(ScanTarget::new(w, n));
        }
    }
    let scan = scan_small_divisors(problem, &scan_opts)?;
    let (resonance, resonance_error) = match resonance_set(problem, opts.resonance_cutoff) {
        Ok(r) => (Some(r), None),
        Err(Error::UncertifiedInput(m)) => (None, Some(m)),
        Err(e) => return Err(e),
    };
    let mut certificates = Vec::new();
    for w in &opts.weights {
        for &n in &opts.n_grid {
            certificates.push(certify_condition2(problem, &scan, w, n, opts.mode, opts.rungs)?);
        }
    }
    let smooth = smooth_analysis(problem, opts.p_max, opts.n_max)?;
    let (a0, q0) = problem.describe();
    Ok(DiophantineReport {
        a0,
        q0,
        group1: problem.group1,
        group2: problem.group2,
        cutoff: opts.cutoff,
        resonance,
        resonance_error,
        scan,
        certificates,
        smooth,
    })
}

impl DiophantineReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::AlphaLinear;

    fn alpha_problem(y: AlphaLinear) -> DivisorProblem {
        DivisorProblem::exact(GroupId::T1, GroupId::SU2, AlphaLinear::alpha(), AlphaLinear::zero(), y)
    }

    fn scan_for(p: &DivisorProblem, w: &WeightSequence, ns: &[f64], cutoffs: &[f64]) -> ScanReport {
        let mut o = ScanOptions::new(*cutoffs.last().unwrap());
        o.c_cutoffs = cutoffs.to_vec();
        for &n in ns {
            o.targets.push(ScanTarget::new(w, n));
        }
        scan_small_divisors(p, &o).unwrap()
    }

    #[test]
    fn alpha_gevrey_ladder() {
        let p = alpha_problem(AlphaLinear::zero());
        let w = WeightSequence::gevrey(1.0).unwrap();
        let s = scan_for(&p, &w, &[0.5, 1.0], &[100.0, 200.0, 400.0]);
        for n in [0.5, 1.0] {
            let c = certify_condition2(&p, &s, &w, n, Quantifier::Roumieu, DEFAULT_RUNGS).unwrap();
            assert_eq!(c.ladder.len(), 3);
            assert!(c.certified_log_c.is_finite(), "{c:?}");
            assert!(c.scan_covered && c.scan_respects_bound && c.stable);
            assert_eq!(c.verdict, Verdict::Consistent);
        }
    }

    #[test]
    fn rung_bound_oracle() {
        // rung n = 1 (100 <= |m| < q_2): -ln 2 - ln(q_2 + q_1) + M(N·(1 + <50>))
        let p = alpha_problem(AlphaLinear::zero());
        let w = WeightSequence::gevrey(1.0).unwrap();
        let s = scan_for(&p, &w, &[1.0], &[50.0]);
        let c = certify_condition2(&p, &s, &w, 1.0, Quantifier::Roumieu, DEFAULT_RUNGS).unwrap();
        let r = &c.ladder[1];
        assert_eq!(r.y_from, "100");
        assert_eq!(r.y_below, "100000001");
        let scale = 1.0 + (1.0f64 + 50.0 * 51.0).sqrt();
        let m: f64 = (0..400)
            .map(|k| k as f64 * scale.ln() - (1..=k).map(|j| (j as f64).ln()).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        let oracle = -(2f64.ln()) - (100_000_101f64).ln() + m;
        assert!((r.log_bound - oracle).abs() < 1e-6, "{} vs {oracle}", r.log_bound);
    }

    #[test]
    fn other_regimes() {
        let w = WeightSequence::gevrey(2.0).unwrap();
        let p = alpha_problem(AlphaLinear::from_ratio(1, 2));
        let s = scan_for(&p, &w, &[1.0], &[50.0, 100.0]);
        let c = certify_condition2(&p, &s, &w, 1.0, Quantifier::Beurling, 3).unwrap();
        assert!(c.regime.contains("ladder"));
        let p = DivisorProblem::exact(
            GroupId::T1,
            GroupId::SU2,
            AlphaLinear::from_ratio(1001, 100),
            AlphaLinear::zero(),
            AlphaLinear::zero(),
        );
        let s = scan_for(&p, &w, &[1.0], &[50.0, 100.0]);
        let c = certify_condition2(&p, &s, &w, 1.0, Quantifier::Roumieu, 3).unwrap();
        assert!((c.certified_c() - 1.0 / 200.0).abs() < 1e-12);
        assert_eq!(c.verdict, Verdict::Consistent);
        assert!(certify_condition2(&p, &s, &w, -1.0, Quantifier::Roumieu, 3).is_err());
        assert!(certify_condition2(&p, &s, &w, 3.0, Quantifier::Roumieu, 3).is_err());
    }

    #[test]
    fn smooth_refuted_for_alpha() {
        let p = alpha_problem(AlphaLinear::zero());
        let r = smooth_analysis(&p, 10, 12).unwrap();
        assert_eq!(r.verdict(), Verdict::Refuted);
        assert!(r.liouville.iter().all(LiouvilleWitness::holds));
        // the first materialized witness is (k, m) = (-p_n, q_n)
        let w1 = r.witnesses.iter().find(|w| w.n == 1).unwrap();
        assert_eq!(w1.twice_mu.as_deref(), Some("200"));
        assert_eq!(w1.twice_lambda.as_deref(), Some("-2002"));
    }

    #[test]
    fn smooth_consistent_when_bounded() {
        let p = DivisorProblem::exact(
            GroupId::T1,
            GroupId::SU2,
            AlphaLinear::alpha(),
            AlphaLinear::from_ratio(1, 2),
            AlphaLinear::zero(),
        );
        assert_eq!(smooth_analysis(&p, 10, 12).unwrap().verdict(), Verdict::Consistent);
        let p = DivisorProblem::exact(
            GroupId::T1,
            GroupId::SU2,
            AlphaLinear::from_ratio(1, 3),
            AlphaLinear::zero(),
            AlphaLinear::zero(),
        );
        assert_eq!(smooth_analysis(&p, 10, 12).unwrap().verdict(), Verdict::Consistent);
    }

    #[test]
    fn shifted_alpha_witnesses_need_admissibility() {
        // q0 = αi shifts μ by one; witnesses still exist with exact integers
        let p = alpha_problem(AlphaLinear::alpha());
        let r = smooth_analysis(&p, 10, 12).unwrap();
        assert_eq!(r.verdict(), Verdict::Refuted);
        // 2L(λ + αμ + α) = 2λ + α(2μ + 2) must equal σt(αq_n − p_n)
        for w in r.witnesses.iter().filter(|w| w.n <= 3) {
            let i: BigInt = w.twice_lambda.as_ref().unwrap().parse().unwrap();
            let j: BigInt = w.twice_mu.as_ref().unwrap().parse().unwrap();
            let c = p.cf.convergent(w.n).unwrap();
            let st = BigInt::from(w.sigma as i64 * w.t as i64);
            assert_eq!(i, -&st * &c.p);
            assert_eq!(j + 2, st * &c.q);
        }
    }
}
