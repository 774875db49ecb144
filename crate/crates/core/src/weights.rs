//! Komatsu weight sequences `{M_k}` and their associated function
//! `M(r) = sup_k log(r^k / M_k)`.
//!
//! All arithmetic on `M_k` happens in log-space: `(k!)^s` overflows a double
//! around `k = 170` for `s = 1`, while the stopping rule of the associated
//! function routinely needs several hundred terms.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when comparing log-quantities that are equal in exact arithmetic.
const LOG_TOL: f64 = 1e-12;

/// Hard cap on the number of terms scanned by [`WeightSequence::associated`].
pub const ASSOCIATED_SCAN_CAP: usize = 20_000_000;

/// H candidates scanned when searching for the (A, H) witness.
pub const H_CANDIDATES: [f64; 5] = [1.0, 1.25, 1.5, 2.0, 4.0];

const LN_FACT_TABLE_LEN: usize = 4096;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_TABLE_LEN);
        let mut acc = 0.0f64;
        t.push(0.0);
        for j in 1..LN_FACT_TABLE_LEN {
            acc += (j as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// Stirling series for `ln k!`, truncated after the `1/(12k)` term.
///
/// The truncation is an upper bound of the true value (alternating series with
/// decreasing terms).
fn stirling_upper(k: f64) -> f64 {
    k * k.ln() - k + 0.5 * (2.0 * std::f64::consts::PI * k).ln() + 1.0 / (12.0 * k)
}

/// `ln k!` for integer-valued `k >= 0` (accepts large `k` as a float).
pub fn ln_factorial(k: f64) -> f64 {
    if k < LN_FACT_TABLE_LEN as f64 {
        ln_fact_table()[k as usize]
    } else {
        stirling_upper(k) - 1.0 / (360.0 * k * k * k)
    }
}

/// A rigorous upper bound for `ln k!`, robust to rounding.
pub fn ln_factorial_upper(k: f64) -> f64 {
    let v = if k < LN_FACT_TABLE_LEN as f64 {
        ln_fact_table()[k as usize]
    } else {
        stirling_upper(k)
    };
    v + 1e-12 * (1.0 + v.abs())
}

/// Generating rule of a weight sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    /// `M_k = (k!)^s` with `s >= 1`.
    Gevrey { order: f64 },
    /// Finite table `M_0..M_kmax`, stored as natural logs.
    Custom { log_table: Vec<f64> },
}

/// The `(A, H)` pair of (M.1)/(M.2): `M_{k+1} <= A H^k M_k`, `M_{2k} <= A H^{2k} M_k^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityConstants {
    pub a: f64,
    pub h: f64,
}

/// A Komatsu weight sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSequence {
    pub kind: WeightKind,
    pub stability: Option<StabilityConstants>,
}

/// `M_k` together with its logarithm; `value` may be `inf` when it overflows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightValue {
    pub value: f64,
    pub log: f64,
}

/// Result of evaluating the associated function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssociatedFunctionQuery {
    pub r: f64,
    pub result: f64,
    pub argmax_k: usize,
}

/// One line of an axiom report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomEntry {
    pub axiom: String,
    pub pass: bool,
    pub witness: Option<serde_json::Value>,
    /// Smallest log-slack over the checked range (negative when failing).
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_at: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub kmax: usize,
    pub beurling: bool,
    pub entries: Vec<AxiomEntry>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn entry(&self, axiom: &str) -> Option<&AxiomEntry> {
        self.entries.iter().find(|e| e.axiom == axiom)
    }
}

/// Pass flags and log-slacks of a two-part inequality check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub part_i: bool,
    pub slack_i: f64,
    pub part_ii: bool,
    pub slack_ii: f64,
}

impl InequalityCheck {
    pub fn pass(&self) -> bool {
        self.part_i && self.part_ii
    }
}

/// Fitted constant for `x^p exp(-δ M(q x)) <= C` over a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsFit {
    pub fitted_c: f64,
    pub argmax_x: f64,
    /// Whether the left side decreases over the last quarter of the grid.
    pub tail_decreasing: bool,
    pub komine_pass: bool,
    pub komine_min_slack: f64,
}

impl WeightSequence {
    /// Gevrey sequence `(k!)^s` with the default constants `A = H = 2^s`.
    pub fn gevrey(order: f64) -> Result<Self> {
        if !(order.is_finite() && order >= 1.0) {
            return Err(Error::Domain(format!("Gevrey order must be >= 1, got {order}")));
        }
        let c = 2f64.powf(order);
        Ok(Self {
            kind: WeightKind::Gevrey { order },
            stability: Some(StabilityConstants { a: c, h: c }),
        })
    }

    /// Custom finite table `M_0..M_kmax`.
    pub fn custom(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSequence("empty table".into()));
        }
        if let Some((k, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::InvalidSequence(format!("M_{k} = {v} is not a positive number")));
        }
        Ok(Self {
            kind: WeightKind::Custom {
                log_table: values.iter().map(|v| v.ln()).collect(),
            },
            stability: None,
        })
    }

    /// Parse a custom table from a JSON array of positive decimals.
    pub fn custom_from_json(text: &str) -> Result<Self> {
        let values: Vec<f64> = serde_json::from_str(text)?;
        Self::custom(&values)
    }

    pub fn with_stability(mut self, a: f64, h: f64) -> Self {
        self.stability = Some(StabilityConstants { a, h });
        self
    }

    pub fn gevrey_order(&self) -> Option<f64> {
        match self.kind {
            WeightKind::Gevrey { order } => Some(order),
            WeightKind::Custom { .. } => None,
        }
    }

    /// Largest index available, `None` for generated sequences.
    pub fn kmax(&self) -> Option<usize> {
        match &self.kind {
            WeightKind::Gevrey { .. } => None,
            WeightKind::Custom { log_table } => Some(log_table.len() - 1),
        }
    }

    pub fn log_value(&self, k: usize) -> Result<f64> {
        match &self.kind {
            WeightKind::Gevrey { order } => Ok(order * ln_factorial(k as f64)),
            WeightKind::Custom { log_table } => log_table.get(k).copied().ok_or_else(|| {
                Error::Index(format!("k = {k} beyond table end {}", log_table.len() - 1))
            }),
        }
    }

    pub fn value(&self, k: usize) -> Result<WeightValue> {
        let log = self.log_value(k)?;
        Ok(WeightValue { value: log.exp(), log })
    }

    /// Associated function by upward scan with the (LC) stopping rule.
    ///
    /// Scans `k = 0, 1, ...` and stops at the first `k` with `M_{k+1}/M_k > r`.
    /// Past that index the terms `log(r^k/M_k)` decrease when the ratios are
    /// nondecreasing, so the scanned maximum is the supremum.
    pub fn associated(&self, r: f64) -> Result<AssociatedFunctionQuery> {
        if r.is_nan() || r < 0.0 || r.is_infinite() {
            return Err(Error::Domain(format!("associated function needs r >= 0, got {r}")));
        }
        if r == 0.0 {
            return Ok(AssociatedFunctionQuery { r, result: 0.0, argmax_k: 0 });
        }
        let ln_r = r.ln();
        let mut best = 0.0f64;
        let mut argmax = 0usize;
        let mut log_m = self.log_value(0)?;
        best -= log_m;
        let mut k = 0usize;
        loop {
            if k >= ASSOCIATED_SCAN_CAP {
                return Err(Error::NoConvergence(format!("stopping rule not met within {k} terms")));
            }
            let next = match self.log_value(k + 1) {
                Ok(v) => v,
                Err(_) => {
                    return Err(Error::NoConvergence(format!(
                        "table ends at k = {k} before M_(k+1)/M_k exceeds r = {r}"
                    )))
                }
            };
            if next - log_m > ln_r {
                break;
            }
            k += 1;
            log_m = next;
            let term = k as f64 * ln_r - log_m;
            if term > best {
                best = term;
                argmax = k;
            }
        }
        Ok(AssociatedFunctionQuery { r, result: best, argmax_k: argmax })
    }

    /// Bulk evaluator equivalent to [`Self::associated`].
    pub fn associated_fn(&self) -> AssociatedFn {
        match &self.kind {
            WeightKind::Gevrey { order } => AssociatedFn::Gevrey { order: *order },
            WeightKind::Custom { log_table } => {
                let ratios = log_table.windows(2).map(|w| w[1] - w[0]).collect();
                AssociatedFn::Table { log_m: log_table.clone(), log_ratios: ratios }
            }
        }
    }

    fn scan_len(&self, kmax: usize) -> Result<usize> {
        match self.kmax() {
            Some(km) if km < kmax => Err(Error::Index(format!(
                "kmax = {kmax} exceeds the table end {km}"
            ))),
            _ => Ok(kmax),
        }
    }

    /// Minimal `log A` for a given `H` over (M.1) and (M.2) up to `kmax`.
    fn min_log_a(&self, kmax: usize, h: f64) -> Result<f64> {
        let ln_h = h.ln();
        let mut log_a = 0.0f64;
        for k in 0..kmax {
            let need = self.log_value(k + 1)? - self.log_value(k)? - k as f64 * ln_h;
            log_a = log_a.max(need);
        }
        for k in 0..=kmax / 2 {
            let need = self.log_value(2 * k)? - 2.0 * self.log_value(k)? - 2.0 * k as f64 * ln_h;
            log_a = log_a.max(need);
        }
        if log_a < LOG_TOL {
            log_a = 0.0;
        }
        Ok(log_a)
    }

    /// Search `H` over [`H_CANDIDATES`] and keep the pair minimizing `A * H`.
    pub fn stability_witness(&self, kmax: usize) -> Result<StabilityConstants> {
        let kmax = self.scan_len(kmax)?;
        let mut best: Option<(f64, StabilityConstants)> = None;
        for &h in &H_CANDIDATES {
            let log_a = self.min_log_a(kmax, h)?;
            let score = log_a + h.ln();
            if best.is_none_or(|(s, _)| score < s - LOG_TOL) {
                best = Some((score, StabilityConstants { a: log_a.exp(), h }));
            }
        }
        Ok(best.expect("candidate list is nonempty").1)
    }

    /// Check (M.0)–(M.4) and (LC) on `k <= kmax`.
    ///
    /// `beurling` replaces (M.3) by (M.3'), sampled on `ℓ ∈ {2^-10, ..., 2^10}`.
    pub fn check_axioms(&self, kmax: usize, beurling: bool) -> Result<AxiomReport> {
        if kmax < 2 {
            return Err(Error::Domain(format!("kmax must be >= 2, got {kmax}")));
        }
        let kmax = self.scan_len(kmax)?;
        let logm: Vec<f64> = (0..=kmax).map(|k| self.log_value(k)).collect::<Result<_>>()?;
        let mut entries = Vec::new();

        let m0 = logm[0];
        entries.push(AxiomEntry {
            axiom: "M.0".into(),
            pass: m0.abs() <= LOG_TOL,
            witness: None,
            margin: -m0.abs(),
            failed_at: (m0.abs() > LOG_TOL).then_some(0),
        });

        let witness = self.stability_witness(kmax)?;
        let (ln_a, ln_h) = (witness.a.ln(), witness.h.ln());
        let wjson = serde_json::json!({ "A": witness.a, "H": witness.h });
        let mut m1 = (f64::INFINITY, None);
        for k in 0..kmax {
            let slack = ln_a + k as f64 * ln_h + logm[k] - logm[k + 1];
            if slack < m1.0 {
                m1 = (slack, Some(k));
            }
        }
        entries.push(AxiomEntry {
            axiom: "M.1".into(),
            pass: m1.0 >= -LOG_TOL,
            witness: Some(wjson.clone()),
            margin: m1.0,
            failed_at: if m1.0 < -LOG_TOL { m1.1 } else { None },
        });
        let mut m2 = (f64::INFINITY, None);
        for k in 0..=kmax / 2 {
            let slack = ln_a + 2.0 * k as f64 * ln_h + 2.0 * logm[k] - logm[2 * k];
            if slack < m2.0 {
                m2 = (slack, Some(k));
            }
        }
        entries.push(AxiomEntry {
            axiom: "M.2".into(),
            pass: m2.0 >= -LOG_TOL,
            witness: Some(wjson),
            margin: m2.0,
            failed_at: if m2.0 < -LOG_TOL { m2.1 } else { None },
        });

        entries.push(self.check_m3(kmax, beurling)?);

        let mut m4 = (f64::INFINITY, None);
        for r in 0..=kmax {
            for s in 0..=(kmax - r) {
                let slack = logm[r + s] - ln_factorial((r + s) as f64) - logm[r] + ln_factorial(r as f64)
                    - logm[s]
                    + ln_factorial(s as f64);
                if slack < m4.0 {
                    m4 = (slack, Some(r + s));
                }
            }
        }
        entries.push(AxiomEntry {
            axiom: "M.4".into(),
            pass: m4.0 >= -LOG_TOL,
            witness: None,
            margin: m4.0,
            failed_at: if m4.0 < -LOG_TOL { m4.1 } else { None },
        });

        let mut lc = (f64::INFINITY, None);
        for k in 1..kmax {
            let slack = logm[k - 1] + logm[k + 1] - 2.0 * logm[k];
            if slack < lc.0 {
                lc = (slack, Some(k));
            }
        }
        entries.push(AxiomEntry {
            axiom: "LC".into(),
            pass: lc.0 >= -LOG_TOL,
            witness: None,
            margin: lc.0,
            failed_at: if lc.0 < -LOG_TOL { lc.1 } else { None },
        });

        Ok(AxiomReport { kmax, beurling, entries })
    }

    /// (M.3) / (M.3'): `k! <= C ℓ^k M_k`.
    ///
    /// For a fixed `ℓ`, the sampled constant is bounded when the log-terms
    /// `ln k! - k ln ℓ - ln M_k` have started to decrease at the end of the
    /// scanned range. Generated sequences are scanned to `max(kmax, 4096)`.
    fn check_m3(&self, kmax: usize, beurling: bool) -> Result<AxiomEntry> {
        let klen = match self.kind {
            WeightKind::Gevrey { .. } => kmax.max(LN_FACT_TABLE_LEN - 1),
            WeightKind::Custom { .. } => kmax,
        };
        let logm: Vec<f64> = (0..=klen).map(|k| self.log_value(k)).collect::<Result<_>>()?;
        let mut fitted = Vec::new();
        for e in -10..=10 {
            let ell = 2f64.powi(e);
            let ln_ell = ell.ln();
            let terms: Vec<f64> = (0..=klen)
                .map(|k| ln_factorial(k as f64) - k as f64 * ln_ell - logm[k])
                .collect();
            let log_c = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let settled = terms[klen] < terms[klen - 1] + LOG_TOL;
            fitted.push((ell, log_c, settled));
        }
        let (pass, witness, margin) = if beurling {
            let pass = fitted.iter().all(|f| f.2);
            let w: Vec<_> = fitted
                .iter()
                .map(|(l, c, ok)| serde_json::json!({ "ell": l, "C": c.exp(), "bounded": ok }))
                .collect();
            let worst = fitted
                .iter()
                .filter(|f| f.2)
                .map(|f| -f.1)
                .fold(f64::INFINITY, f64::min);
            (pass, Some(serde_json::Value::Array(w)), if pass { worst } else { -1.0 })
        } else {
            match fitted.iter().find(|f| f.2) {
                Some((ell, log_c, _)) => (
                    true,
                    Some(serde_json::json!({ "ell": ell, "C": log_c.exp() })),
                    -log_c,
                ),
                None => (false, None, -1.0),
            }
        };
        Ok(AxiomEntry {
            axiom: if beurling { "M.3'" } else { "M.3" }.into(),
            pass,
            witness,
            margin,
            failed_at: None,
        })
    }

    fn constants_or(&self, witness: Option<StabilityConstants>) -> Result<StabilityConstants> {
        witness.or(self.stability).ok_or(Error::MissingWitness)
    }

    /// (i) `e^{-M(r)} e^{-M(s)} <= e^{-M((r+s)/2)}`; (ii) `e^{M(r)} e^{M(s)} <= A e^{M(H(r+s))}`.
    pub fn check_inequality_prop31(
        &self,
        r: f64,
        s: f64,
        witness: Option<StabilityConstants>,
    ) -> Result<InequalityCheck> {
        positive(r, "r")?;
        positive(s, "s")?;
        let c = self.constants_or(witness)?;
        let m = |x: f64| self.associated(x).map(|q| q.result);
        let (mr, ms) = (m(r)?, m(s)?);
        let slack_i = mr + ms - m(0.5 * (r + s))?;
        let slack_ii = c.a.ln() + m(c.h * (r + s))? - mr - ms;
        Ok(InequalityCheck {
            part_i: slack_i >= -LOG_TOL,
            slack_i,
            part_ii: slack_ii >= -LOG_TOL,
            slack_ii,
        })
    }

    /// (i) `r^t e^{-M(sr)} <= A (H/s)^t M_t e^{-M(sr/H)}`;
    /// (ii) `r^t e^{M(sr)} <= A s^{-t} M_t e^{M(Hsr)}`.
    pub fn check_inequality_prop32(
        &self,
        r: f64,
        s: f64,
        t: usize,
        witness: Option<StabilityConstants>,
    ) -> Result<InequalityCheck> {
        positive(r, "r")?;
        positive(s, "s")?;
        let c = self.constants_or(witness)?;
        let m = |x: f64| self.associated(x).map(|q| q.result);
        let (ln_a, ln_h, ln_s, ln_r) = (c.a.ln(), c.h.ln(), s.ln(), r.ln());
        let tf = t as f64;
        let log_mt = self.log_value(t)?;
        let lhs_i = tf * ln_r - m(s * r)?;
        let rhs_i = ln_a + tf * (ln_h - ln_s) + log_mt - m(s * r / c.h)?;
        let lhs_ii = tf * ln_r + m(s * r)?;
        let rhs_ii = ln_a - tf * ln_s + log_mt + m(c.h * s * r)?;
        let (slack_i, slack_ii) = (rhs_i - lhs_i, rhs_ii - lhs_ii);
        let tol = LOG_TOL * (1.0 + lhs_i.abs().max(lhs_ii.abs()));
        Ok(InequalityCheck {
            part_i: slack_i >= -tol,
            slack_i,
            part_ii: slack_ii >= -tol,
            slack_ii,
        })
    }

    /// Fitted `C` with `x^p e^{-δ M(q x)} <= C` on the grid, plus the
    /// `e^{-M(qx)/2} <= sqrt(A) e^{-M(qx/H)}` check at every grid point.
    pub fn check_bounds_2x(&self, p: f64, q: f64, delta: f64, grid: &[f64]) -> Result<BoundsFit> {
        positive(p, "p")?;
        positive(q, "q")?;
        positive(delta, "delta")?;
        if grid.is_empty() {
            return Err(Error::Domain("empty grid".into()));
        }
        let c = self.constants_or(None)?;
        let mut best = (f64::NEG_INFINITY, grid[0]);
        let mut lhs = Vec::with_capacity(grid.len());
        let mut komine_min = f64::INFINITY;
        for &x in grid {
            positive(x, "grid point")?;
            let mqx = self.associated(q * x)?.result;
            let v = p * x.ln() - delta * mqx;
            lhs.push(v);
            if v > best.0 {
                best = (v, x);
            }
            let slack = 0.5 * c.a.ln() - self.associated(q * x / c.h)?.result + 0.5 * mqx;
            komine_min = komine_min.min(slack);
        }
        let tail = &lhs[lhs.len() - (lhs.len() / 4).max(1)..];
        let tail_decreasing = tail.windows(2).all(|w| w[1] <= w[0] + LOG_TOL);
        Ok(BoundsFit {
            fitted_c: best.0.exp(),
            argmax_x: best.1,
            tail_decreasing,
            komine_pass: komine_min >= -LOG_TOL,
            komine_min_slack: komine_min,
        })
    }
}

fn positive(x: f64, name: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be a positive real, got {x}")))
    }
}

/// Fast evaluator of the associated function for bulk use.
///
/// Under (LC) the maximizing index is the number of leading ratios
/// `M_k/M_{k-1} <= r`, found in closed form for Gevrey sequences and by
/// binary search for tables.
#[derive(Clone, Debug)]
pub enum AssociatedFn {
    Gevrey { order: f64 },
    Table { log_m: Vec<f64>, log_ratios: Vec<f64> },
}

impl AssociatedFn {
    /// Maximizing index (as a float, it can exceed `u64` range for Gevrey).
    fn argmax(&self, ln_r: f64) -> Option<f64> {
        match self {
            AssociatedFn::Gevrey { order } => {
                // largest k with order * ln k <= ln r
                let mut k = (ln_r / order).exp().floor();
                if k < 2f64.powi(52) {
                    while order * (k + 1.0).ln() <= ln_r {
                        k += 1.0;
                    }
                    while k > 0.0 && order * k.ln() > ln_r {
                        k -= 1.0;
                    }
                }
                Some(k.max(0.0))
            }
            AssociatedFn::Table { log_ratios, .. } => {
                let k = log_ratios.partition_point(|&lr| lr <= ln_r);
                (k < log_ratios.len()).then_some(k as f64)
            }
        }
    }

    /// `M(r)`; `None` when a finite table is too short for this `r`.
    pub fn try_eval(&self, r: f64) -> Option<f64> {
        if r <= 0.0 {
            return Some(0.0);
        }
        let ln_r = r.ln();
        let k = self.argmax(ln_r)?;
        Some(match self {
            AssociatedFn::Gevrey { order } => (k * ln_r - order * ln_factorial(k)).max(0.0),
            AssociatedFn::Table { log_m, .. } => {
                let k = k as usize;
                (k as f64 * ln_r - log_m[k]).max(-log_m[0])
            }
        })
    }

    /// `M(r)`; panics if a table is too short (use [`Self::try_eval`] to probe).
    pub fn eval(&self, r: f64) -> f64 {
        self.try_eval(r)
            .unwrap_or_else(|| panic!("weight table too short to evaluate M({r})"))
    }

    /// A certified lower bound on `M(r)` (one admissible term of the supremum,
    /// with a rigorous upper bound for `ln k!` and a rounding margin).
    pub fn eval_lower(&self, r: f64) -> Option<f64> {
        if r <= 0.0 {
            return Some(0.0);
        }
        let ln_r = r.ln();
        match self {
            AssociatedFn::Gevrey { order } => {
                let k = self.argmax(ln_r)?;
                let a = k * ln_r;
                let b = order * ln_factorial_upper(k);
                Some((a - b - 1e-12 * (a.abs() + b.abs() + 1.0)).max(0.0))
            }
            AssociatedFn::Table { .. } => {
                let v = self.try_eval(r)?;
                Some(v - 1e-12 * (1.0 + v.abs()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Independent oracle: maximum of `k ln r - ln M_k` over `k <= kmax`.
    fn brute_force(w: &WeightSequence, r: f64, kmax: usize) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for k in 0..=kmax {
            let v = k as f64 * r.ln() - w.log_value(k).unwrap();
            if v > best.0 {
                best = (v, k);
            }
        }
        best
    }

    #[test]
    fn gevrey_values() {
        let g1 = WeightSequence::gevrey(1.0).unwrap();
        let g2 = WeightSequence::gevrey(2.0).unwrap();
        assert_eq!(g1.value(0).unwrap().value, 1.0);
        assert_relative_eq!(g2.value(3).unwrap().value, 36.0, max_relative = 1e-14);
        let oracle: f64 = (1..=20).map(|j| (j as f64).ln()).sum();
        assert_relative_eq!(g1.log_value(20).unwrap(), oracle, max_relative = 1e-14);
        assert_relative_eq!(oracle, 42.3356, epsilon = 1e-4);
        // well past overflow of the plain value
        let v = g1.value(400).unwrap();
        assert!(v.value.is_infinite() && v.log.is_finite());
    }

    #[test]
    fn custom_table_errors() {
        let w = WeightSequence::custom(&[1.0, 2.0, 4.0]).unwrap();
        assert!(matches!(w.value(3), Err(Error::Index(_))));
        assert!(matches!(WeightSequence::custom(&[1.0, 0.0]), Err(Error::InvalidSequence(_))));
        assert!(matches!(WeightSequence::custom(&[1.0, -2.0]), Err(Error::InvalidSequence(_))));
        assert!(matches!(
            WeightSequence::custom_from_json("[1, 2, \"x\"]"),
            Err(Error::Json(_))
        ));
    }

    #[test]
    fn axioms_gevrey_one() {
        let w = WeightSequence::gevrey(1.0).unwrap();
        let rep = w.check_axioms(50, false).unwrap();
        assert!(rep.all_pass(), "{rep:#?}");
        let m2 = rep.entry("M.2").unwrap();
        let wit = m2.witness.as_ref().unwrap();
        assert_eq!(wit["A"].as_f64().unwrap(), 1.0);
        assert_eq!(wit["H"].as_f64().unwrap(), 2.0);
        let lc = rep.entry("LC").unwrap();
        // min over k of ln((k+1)/k) is at k = kmax - 1
        assert_relative_eq!(lc.margin, (50f64 / 49.0).ln(), max_relative = 1e-9);
        assert!(lc.margin > 0.0);
    }

    #[test]
    fn axioms_lc_counterexample() {
        let w = WeightSequence::custom(&[1.0, 1.0, 0.5]).unwrap();
        let rep = w.check_axioms(2, false).unwrap();
        let lc = rep.entry("LC").unwrap();
        assert!(!lc.pass);
        assert_eq!(lc.failed_at, Some(1));
        assert!(matches!(w.check_axioms(1, false), Err(Error::Domain(_))));
        assert!(matches!(w.check_axioms(3, false), Err(Error::Index(_))));
    }

    #[test]
    fn beurling_m3_prime() {
        // (k!)^1 fails (M.3') for ℓ < 1; (k!)^2 satisfies it on the sampled grid.
        let g1 = WeightSequence::gevrey(1.0).unwrap().check_axioms(50, true).unwrap();
        assert!(!g1.entry("M.3'").unwrap().pass);
        let g2 = WeightSequence::gevrey(2.0).unwrap().check_axioms(50, true).unwrap();
        assert!(g2.entry("M.3'").unwrap().pass);
    }

    #[test]
    fn associated_examples() {
        let g1 = WeightSequence::gevrey(1.0).unwrap();
        let g2 = WeightSequence::gevrey(2.0).unwrap();
        let q = g1.associated(1.0).unwrap();
        assert_eq!((q.result, q.argmax_k), (0.0, 0));
        let q = g1.associated(2.0).unwrap();
        assert_eq!(q.result, 2f64.ln());
        assert!(q.argmax_k == 1 || q.argmax_k == 2);
        let (bf, _) = brute_force(&g1, 2.0, 100);
        assert_relative_eq!(bf, std::f64::consts::LN_2, epsilon = 1e-12);
        let (bf, _) = brute_force(&g2, 4.0, 100);
        assert_relative_eq!(g2.associated(4.0).unwrap().result, bf, max_relative = 1e-14);
        assert_relative_eq!(bf, 1.386294, epsilon = 1e-6);
        assert_eq!(g1.associated(0.0).unwrap().result, 0.0);
        assert!(matches!(g1.associated(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn associated_short_table_no_convergence() {
        let w = WeightSequence::custom(&[1.0, 1.0, 2.0]).unwrap();
        assert!(w.associated(0.5).is_ok());
        assert!(matches!(w.associated(10.0), Err(Error::NoConvergence(_))));
        assert!(w.associated_fn().try_eval(10.0).is_none());
    }

    #[test]
    fn fast_evaluator_matches_scan() {
        for s in [1.0, 1.5, 2.0, 3.0] {
            let w = WeightSequence::gevrey(s).unwrap();
            let f = w.associated_fn();
            for &r in &[0.1, 0.5, 1.0, 2.0, 2.5, 3.0, 7.3, 10.0, 123.4, 1e3, 5e3] {
                let scan = w.associated(r).unwrap().result;
                assert_relative_eq!(f.eval(r), scan, max_relative = 1e-12, epsilon = 1e-12);
                assert!(f.eval_lower(r).unwrap() <= scan);
            }
        }
        let table: Vec<f64> = (0..60).map(|k| ln_factorial(k as f64).exp()).collect();
        let w = WeightSequence::custom(&table).unwrap();
        let f = w.associated_fn();
        for &r in &[0.3, 1.0, 4.5, 20.0, 55.0] {
            assert_relative_eq!(f.eval(r), w.associated(r).unwrap().result, max_relative = 1e-12);
        }
    }

    #[test]
    fn prop31_examples() {
        let g1 = WeightSequence::gevrey(1.0).unwrap();
        let c = g1.check_inequality_prop31(1.0, 1.0, None).unwrap();
        assert!(c.part_i && c.slack_i == 0.0);
        let c = g1.check_inequality_prop31(2.0, 3.0, None).unwrap();
        assert!(c.part_i);
        let (m2, _) = brute_force(&g1, 2.0, 100);
        let (m3, _) = brute_force(&g1, 3.0, 100);
        let (m25, _) = brute_force(&g1, 2.5, 100);
        assert_relative_eq!(c.slack_i, m2 + m3 - m25, max_relative = 1e-12);
        assert_relative_eq!(m2 + m3, 2.1972, epsilon = 1e-4);
        let w = StabilityConstants { a: 1.0, h: 2.0 };
        let c = g1.check_inequality_prop31(2.0, 3.0, Some(w)).unwrap();
        let (m10, _) = brute_force(&g1, 10.0, 100);
        assert!(c.part_ii);
        assert_relative_eq!(c.slack_ii, m10 - m2 - m3, max_relative = 1e-12);
        let bare = WeightSequence::custom(&[1.0, 1.0, 2.0, 6.0]).unwrap();
        assert!(matches!(bare.check_inequality_prop31(1.0, 1.0, None), Err(Error::MissingWitness)));
    }

    #[test]
    fn prop32_examples() {
        let g1 = WeightSequence::gevrey(1.0).unwrap();
        let w = StabilityConstants { a: 1.0, h: 2.0 };
        for &(r, s) in &[(0.3, 2.0), (5.0, 0.1), (17.0, 3.0)] {
            let c = g1.check_inequality_prop32(r, s, 0, Some(w)).unwrap();
            assert!(c.pass());
        }
        let c = g1.check_inequality_prop32(3.0, 1.0, 2, Some(w)).unwrap();
        let (m3, _) = brute_force(&g1, 3.0, 100);
        let (m6, _) = brute_force(&g1, 6.0, 100);
        assert_relative_eq!(m3, (4.5f64).ln(), max_relative = 1e-12);
        assert_relative_eq!(c.slack_ii, 2f64.ln() + m6 - 9f64.ln() - m3, max_relative = 1e-12);
        assert!(c.part_ii);
        let g2 = WeightSequence::gevrey(2.0).unwrap();
        assert!(g2.check_inequality_prop32(5.0, 0.5, 3, None).unwrap().pass());
    }

    #[test]
    fn bounds_fit() {
        let g1 = WeightSequence::gevrey(1.0).unwrap();
        let grid: Vec<f64> = (1..=100).map(|x| x as f64).collect();
        let fit = g1.check_bounds_2x(2.0, 1.0, 1.0, &grid).unwrap();
        assert!(fit.fitted_c.is_finite() && fit.tail_decreasing && fit.komine_pass);
        // oracle: x^2 inf_k k!/x^k
        let oracle = grid
            .iter()
            .map(|&x| {
                (0..200)
                    .map(|k| 2.0 * x.ln() + ln_factorial(k as f64) - k as f64 * x.ln())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert_relative_eq!(fit.fitted_c.ln(), oracle, max_relative = 1e-10);

        let g = WeightSequence::gevrey(2.0).unwrap();
        let grid: Vec<f64> = (0..=40).map(|i| 10f64.powf(i as f64 / 10.0)).collect();
        let fit = g.check_bounds_2x(4.0, 0.5, 0.25, &grid).unwrap();
        assert!(fit.fitted_c.is_finite() && fit.tail_decreasing && fit.komine_pass);

        let flat = WeightSequence::gevrey(1.0).unwrap().with_stability(1.0, 1.0);
        let fit = flat.check_bounds_2x(1.0, 0.5, 1.0, &[1.5]).unwrap();
        assert!(fit.komine_pass && fit.komine_min_slack == 0.0);
    }
}
