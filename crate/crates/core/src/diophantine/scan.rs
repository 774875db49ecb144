//! Enumeration of small divisors up to a cutoff, in parallel over `λ`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{max_twice, min_bracket, min_rep, rat_to_f64_down, weight_step, DivisorProblem, Lattice};
use crate::error::{Error, Result};
use crate::harmonic::{GroupId, HalfInt, Rep};
use crate::weights::{AssociatedFn, WeightSequence};

/// Default cap on enumerated weight pairs.
pub const DEFAULT_PAIR_BUDGET: u64 = 64_000_000;

/// `(weight, N)` for which `C_N = min |D|·e^{M(N·scale)}` is accumulated.
#[derive(Clone, Debug)]
pub struct ScanTarget {
    pub label: String,
    pub n: f64,
    pub m: AssociatedFn,
}

impl ScanTarget {
    pub fn new(w: &WeightSequence, n: f64) -> Self {
        Self { label: weight_label(w), n, m: w.associated_fn() }
    }
}

pub fn weight_label(w: &WeightSequence) -> String {
    match w.gevrey_order() {
        Some(s) => format!("gevrey({s})"),
        None => format!("custom(kmax={})", w.kmax().unwrap_or(0)),
    }
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub cutoff: f64,
    /// Nested cutoffs at which each `C_N` is reported (each `<= cutoff`).
    pub c_cutoffs: Vec<f64>,
    pub targets: Vec<ScanTarget>,
    pub pair_budget: u64,
}

impl ScanOptions {
    pub fn new(cutoff: f64) -> Self {
        Self { cutoff, c_cutoffs: vec![cutoff], targets: Vec::new(), pair_budget: DEFAULT_PAIR_BUDGET }
    }
}

/// Minimum over non-resonant tuples whose scale falls in `[shell, shell + 1)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShellMinimum {
    pub shell: usize,
    pub min_denominator: f64,
    /// Certified lower bound of the minimum.
    pub lower_bound: f64,
    pub lambda: HalfInt,
    pub mu: HalfInt,
    pub xi: Rep,
    pub eta: Rep,
}

/// `ln C_N` fitted on tuples within `cutoff`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CEntry {
    pub weight: String,
    pub n: f64,
    pub cutoff: f64,
    pub log_c: f64,
    pub lambda: HalfInt,
    pub mu: HalfInt,
    pub scale: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanReport {
    pub group1: GroupId,
    pub group2: GroupId,
    pub cutoff: f64,
    /// False when inputs are floats (no certified bounds).
    pub exact: bool,
    pub pairs: u64,
    pub resonant_pairs: u64,
    /// Tuples whose sign could not be certified even with the exact enclosure.
    pub uncertified: u64,
    /// Largest `|Y|` met in the scan (coefficient of `α`).
    pub max_abs_y: String,
    pub shells: Vec<ShellMinimum>,
    pub c_entries: Vec<CEntry>,
}

impl ScanReport {
    /// `shell,min_denominator,lower_bound,lambda,mu,xi,eta` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("shell,min_denominator,lower_bound,lambda,mu,xi,eta\n");
        for m in &self.shells {
            if m.min_denominator.is_finite() {
                s.push_str(&format!(
                    "{},{:e},{:e},{},{},{},{}\n",
                    m.shell, m.min_denominator, m.lower_bound, m.lambda, m.mu, m.xi, m.eta
                ));
            }
        }
        s
    }

    pub fn c_entries_for(&self, label: &str, n: f64) -> Vec<&CEntry> {
        self.c_entries.iter().filter(|e| e.weight == label && e.n == n).collect()
    }

    pub fn global_min(&self) -> Option<&ShellMinimum> {
        self.shells
            .iter()
            .filter(|s| s.min_denominator.is_finite())
            .min_by(|a, b| a.min_denominator.total_cmp(&b.min_denominator))
    }
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    approx: f64,
    lower: f64,
    i: i64,
    j: i64,
}

impl Cell {
    const EMPTY: Cell = Cell { approx: f64::INFINITY, lower: f64::INFINITY, i: 0, j: 0 };

    fn key(&self) -> (f64, i64, i64) {
        (self.approx, self.i, self.j)
    }

    fn merge(&mut self, o: &Cell) {
        let (a, b) = (self.key(), o.key());
        if b.0 < a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
            self.approx = o.approx;
            self.i = o.i;
            self.j = o.j;
        }
        self.lower = self.lower.min(o.lower);
    }
}

#[derive(Clone, Copy, Debug)]
struct CCell {
    log_c: f64,
    i: i64,
    j: i64,
    scale: f64,
}

impl CCell {
    const EMPTY: CCell = CCell { log_c: f64::INFINITY, i: 0, j: 0, scale: 0.0 };

    fn merge(&mut self, o: &CCell) {
        if o.log_c < self.log_c || (o.log_c == self.log_c && (o.i, o.j) < (self.i, self.j)) {
            *self = *o;
        }
    }
}

struct Acc {
    shells: Vec<Cell>,
    c: Vec<CCell>,
    pairs: u64,
    resonant: u64,
    uncertified: u64,
    max_abs_y: i128,
}

impl Acc {
    fn new(nshell: usize, nc: usize) -> Self {
        Self {
            shells: vec![Cell::EMPTY; nshell],
            c: vec![CCell::EMPTY; nc],
            pairs: 0,
            resonant: 0,
            uncertified: 0,
            max_abs_y: 0,
        }
    }

    fn merge(mut self, o: Acc) -> Acc {
        for (a, b) in self.shells.iter_mut().zip(&o.shells) {
            a.merge(b);
        }
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            a.merge(b);
        }
        self.pairs += o.pairs;
        self.resonant += o.resonant;
        self.uncertified += o.uncertified;
        self.max_abs_y = self.max_abs_y.max(o.max_abs_y);
        self
    }
}

enum Eval {
    Exact(Lattice, Option<(BigRational, BigRational)>),
    Float { a0: f64, x: f64, y: f64 },
}

/// `(approx |D|, certified lower bound)`, or `None` when resonant.
fn denominator(ev: &Eval, i: i64, j: i64, acc: &mut Acc) -> Option<(f64, f64)> {
    match ev {
        Eval::Float { a0, x, y } => {
            let re = i as f64 / 2.0 + a0 * j as f64 / 2.0 + y;
            let d = re.hypot(*x);
            if d < 1e-12 {
                acc.resonant += 1;
                return None;
            }
            acc.uncertified += 1;
            Some((d, 0.0))
        }
        Eval::Exact(lat, exact_alpha) => {
            let (i, j) = (i as i128, j as i128);
            let x_int = lat.cxi * i + lat.cxj * j + lat.cx0;
            let y_int = lat.cyj * j + lat.cy0;
            acc.max_abs_y = acc.max_abs_y.max(y_int.abs());
            if x_int == 0 && y_int == 0 && lat.x_zero {
                acc.resonant += 1;
                return None;
            }
            let two_l = lat.two_l as f64;
            let (xf, yf) = (x_int as f64, y_int as f64);
            let mut approx_re = (xf + yf * lat.alpha_mid) / two_l;
            if y_int != 0 && approx_re.abs() * two_l < 1e-6 * xf.abs() {
                // heavy cancellation: evaluate on the exact enclosure
                if let Some((lo, _)) = exact_alpha {
                    let v = BigRational::from(BigInt::from(x_int)) + BigRational::from(BigInt::from(y_int)) * lo;
                    approx_re = super::rat_to_f64(&v) / two_l;
                }
            }
            let approx = approx_re.hypot(lat.x_f64);
            let re_lo = if y_int == 0 {
                xf.abs() / two_l * (1.0 - 4.0 * f64::EPSILON)
            } else {
                let p1 = xf + yf * lat.alpha.0;
                let p2 = xf + yf * lat.alpha.1;
                let err = 8.0 * f64::EPSILON * (xf.abs() + yf.abs() * lat.alpha.1.abs());
                let (lo, hi) = (p1.min(p2) - err, p1.max(p2) + err);
                let v = if lo > 0.0 {
                    lo
                } else if hi < 0.0 {
                    -hi
                } else {
                    exact_gap(x_int, y_int, exact_alpha.as_ref()).unwrap_or_else(|| {
                        acc.uncertified += 1;
                        0.0
                    })
                };
                v / two_l * (1.0 - 4.0 * f64::EPSILON)
            };
            let lower = re_lo.hypot(lat.x_lo) * (1.0 - 4.0 * f64::EPSILON);
            Some((approx, lower))
        }
    }
}

/// Certified `|X + αY|` lower bound from the tight rational enclosure.
fn exact_gap(x: i128, y: i128, enc: Option<&(BigRational, BigRational)>) -> Option<f64> {
    let (lo, hi) = enc?;
    let xb = BigRational::from(BigInt::from(x));
    let yb = BigRational::from(BigInt::from(y));
    let a = &xb + &yb * lo;
    let b = &xb + &yb * hi;
    if a.is_positive() == b.is_positive() && !a.is_zero() && !b.is_zero() {
        let m = if a.abs() < b.abs() { a.abs() } else { b.abs() };
        Some(rat_to_f64_down(&m))
    } else {
        None
    }
}

/// Per-shell minima of `|λ + a₀μ − iq₀|` and `C_N` fits up to `opts.cutoff`.
pub fn scan_small_divisors(problem: &DivisorProblem, opts: &ScanOptions) -> Result<ScanReport> {
    let (g1, g2) = (problem.group1, problem.group2);
    let cutoff = opts.cutoff;
    if !(cutoff.is_finite() && cutoff >= 2.0) {
        return Err(Error::Domain(format!("cutoff must be >= 2, got {cutoff}")));
    }
    if opts.c_cutoffs.iter().any(|&c| c > cutoff || c < 2.0) {
        return Err(Error::Domain("C_N cutoffs must lie in [2, cutoff]".into()));
    }
    let ev = match problem.lattice() {
        Ok(lat) => {
            let enc = if lat.uses_alpha && problem.cf.is_infinite() {
                Some(problem.cf.enclose(problem.cf.cap)?)
            } else {
                None
            };
            Eval::Exact(lat, enc)
        }
        Err(Error::UncertifiedInput(_)) => {
            let alpha = problem.cf.f64_enclosure().map(|(a, b)| 0.5 * (a + b)).unwrap_or(0.0);
            Eval::Float {
                a0: problem.a0.to_f64_with(alpha),
                x: problem.q0_re.to_f64_with(alpha),
                y: problem.q0_im.to_f64_with(alpha),
            }
        }
        Err(e) => return Err(e),
    };
    let exact = matches!(ev, Eval::Exact(..));

    let step1 = weight_step(g1);
    let step2 = weight_step(g2);
    let imax = max_twice(g1, cutoff - 1.0).unwrap_or(0);
    let is: Vec<i64> = (-imax..=imax).filter(|i| i.rem_euclid(step1) == 0).collect();
    let budget: u64 = is
        .iter()
        .map(|&i| match max_twice(g2, cutoff - min_bracket(g1, i)) {
            Some(j) => (2 * j / step2 + 1) as u64,
            None => 0,
        })
        .sum();
    if budget > opts.pair_budget {
        return Err(Error::GridTooLarge(format!(
            "{budget} weight pairs exceed the budget {}",
            opts.pair_budget
        )));
    }

    let nshell = cutoff.floor() as usize + 1;
    let ncut = opts.c_cutoffs.len();
    let nc = opts.targets.len() * ncut;
    let acc = is
        .par_iter()
        .fold(
            || Acc::new(nshell, nc),
            |mut acc, &i| {
                let s1 = min_bracket(g1, i);
                let Some(jmax) = max_twice(g2, cutoff - s1) else {
                    return acc;
                };
                let mut j = -jmax;
                while j <= jmax {
                    let s = s1 + min_bracket(g2, j);
                    acc.pairs += 1;
                    if let Some((approx, lower)) = denominator(&ev, i, j, &mut acc) {
                        let cell = Cell { approx, lower, i, j };
                        acc.shells[(s.floor() as usize).min(nshell - 1)].merge(&cell);
                        let ln_lo = lower.ln();
                        for (t, target) in opts.targets.iter().enumerate() {
                            let m = target.m.eval_lower(target.n * s).unwrap_or(0.0);
                            let c = CCell { log_c: ln_lo + m, i, j, scale: s };
                            for (k, &cut) in opts.c_cutoffs.iter().enumerate() {
                                if s <= cut {
                                    acc.c[t * ncut + k].merge(&c);
                                }
                            }
                        }
                    }
                    j += step2;
                }
                acc
            },
        )
        .reduce(|| Acc::new(nshell, nc), Acc::merge);

    // a weight pair on SU(2) reappears in every later shell through larger ℓ
    let mut cells = acc.shells.clone();
    if g1 == GroupId::SU2 || g2 == GroupId::SU2 {
        for k in 1..cells.len() {
            let prev = cells[k - 1];
            cells[k].merge(&prev);
        }
    }
    let shells = cells
        .iter()
        .enumerate()
        .map(|(shell, c)| ShellMinimum {
            shell,
            min_denominator: c.approx,
            lower_bound: c.lower,
            lambda: HalfInt::from_twice(c.i),
            mu: HalfInt::from_twice(c.j),
            xi: min_rep(g1, c.i),
            eta: min_rep(g2, c.j),
        })
        .collect();
    let mut c_entries = Vec::with_capacity(nc);
    for (t, target) in opts.targets.iter().enumerate() {
        for (k, &cut) in opts.c_cutoffs.iter().enumerate() {
            let c = acc.c[t * ncut + k];
            c_entries.push(CEntry {
                weight: target.label.clone(),
                n: target.n,
                cutoff: cut,
                log_c: c.log_c,
                lambda: HalfInt::from_twice(c.i),
                mu: HalfInt::from_twice(c.j),
                scale: c.scale,
            });
        }
    }
    Ok(ScanReport {
        group1: g1,
        group2: g2,
        cutoff,
        exact,
        pairs: acc.pairs,
        resonant_pairs: acc.resonant,
        uncertified: acc.uncertified,
        max_abs_y: acc.max_abs_y.to_string(),
        shells,
        c_entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diophantine::{AlphaLinear, ContinuedFraction, Scalar};

    fn problem(a0: AlphaLinear, x: AlphaLinear, y: AlphaLinear) -> DivisorProblem {
        DivisorProblem::exact(GroupId::T1, GroupId::SU2, a0, x, y)
    }

    #[test]
    fn alpha_witness_shell() {
        let p = problem(AlphaLinear::alpha(), AlphaLinear::zero(), AlphaLinear::zero());
        let r = scan_small_divisors(&p, &ScanOptions::new(1200.0)).unwrap();
        assert!(r.exact);
        assert_eq!(r.uncertified, 0);
        let s = (1001f64.hypot(1.0) + (1.0 + 100.0 * 101.0f64).sqrt()).floor() as usize;
        let m = &r.shells[s];
        assert!(m.min_denominator < 1e-8, "{m:?}");
        assert!(m.lower_bound > 0.0 && m.lower_bound <= m.min_denominator);
        assert_eq!((m.lambda, m.mu), (HalfInt::from_int(-1001), HalfInt::from_int(100)));
        assert_eq!(m.eta, Rep::su2_twice(200));
        // shells below it stay far from the witness
        assert!(r.shells[s - 1].min_denominator > 1e-6);
    }

    #[test]
    fn zero_a0_integer_minima() {
        let p = problem(AlphaLinear::zero(), AlphaLinear::zero(), AlphaLinear::zero());
        let r = scan_small_divisors(&p, &ScanOptions::new(30.0)).unwrap();
        for m in r.shells.iter().filter(|m| m.min_denominator.is_finite()) {
            assert_eq!(m.min_denominator, 1.0);
        }
        assert!(r.resonant_pairs > 0);
    }

    #[test]
    fn half_i_shift_bounded() {
        let p = problem(AlphaLinear::alpha(), AlphaLinear::zero(), AlphaLinear::from_ratio(1, 2));
        let r = scan_small_divisors(&p, &ScanOptions::new(200.0)).unwrap();
        assert_eq!(r.resonant_pairs, 0);
        // m = 0 tuples: |k + 1/2| >= 1/2
        assert!(r.shells.iter().all(|m| !m.min_denominator.is_finite() || m.lower_bound > 0.0));
    }

    #[test]
    fn rational_a0_bound() {
        let p = problem(AlphaLinear::from_ratio(1001, 100), AlphaLinear::zero(), AlphaLinear::zero());
        let r = scan_small_divisors(&p, &ScanOptions::new(300.0)).unwrap();
        let g = r.global_min().unwrap();
        assert!(g.min_denominator >= 1.0 / 200.0 - 1e-15);
        assert!((g.min_denominator - 1.0 / 200.0).abs() < 1e-12);
    }

    #[test]
    fn scan_respects_best_approximation() {
        // every scanned tuple with |m| below q_1 satisfies |k + αm| >= B(|m|)
        let cf = ContinuedFraction::alpha_factorial();
        let p = problem(AlphaLinear::alpha(), AlphaLinear::zero(), AlphaLinear::zero());
        let r = scan_small_divisors(&p, &ScanOptions::new(120.0)).unwrap();
        let b99 = crate::diophantine::rat_to_f64(&cf.best_approx_lower_bound(&99.into()).unwrap());
        for m in r.shells.iter().filter(|m| m.min_denominator.is_finite()) {
            if m.mu.twice != 0 && m.mu.twice.abs() < 200 && m.mu.is_integer() {
                assert!(m.lower_bound >= b99 * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn budget_and_float_flag() {
        let p = problem(AlphaLinear::alpha(), AlphaLinear::zero(), AlphaLinear::zero());
        let mut o = ScanOptions::new(500.0);
        o.pair_budget = 1000;
        assert!(matches!(scan_small_divisors(&p, &o), Err(Error::GridTooLarge(_))));
        let f = DivisorProblem::new(GroupId::T1, GroupId::SU2, Scalar::Float(0.3), Scalar::zero(), Scalar::zero());
        let r = scan_small_divisors(&f, &ScanOptions::new(20.0)).unwrap();
        assert!(!r.exact && r.uncertified > 0);
    }

    #[test]
    fn deterministic_under_threads() {
        let p = problem(AlphaLinear::alpha(), AlphaLinear::zero(), AlphaLinear::zero());
        let w = WeightSequence::gevrey(1.0).unwrap();
        let mut o = ScanOptions::new(150.0);
        o.targets.push(ScanTarget::new(&w, 1.0));
        let a = scan_small_divisors(&p, &o).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| scan_small_divisors(&p, &o).unwrap());
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
