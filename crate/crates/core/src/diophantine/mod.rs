//! Small divisors `λ_m(ξ) + a₀ μ_r(η) − i q₀` of constant-coefficient operators.
//!
//! Coefficients are exact affine expressions `b + c·α` with rational `b, c`
//! and `α` given by a continued fraction. Writing `λ = i/2`, `μ = j/2` and
//! clearing denominators, `2L·(λ + a₀μ + Im q₀) = X + αY` with integers
//! `X, Y` affine in `(i, j)`. For irrational `α` a tuple is resonant iff
//! `X = Y = 0` and `Re q₀ = 0`.

mod cf;
mod certify;
mod scan;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::harmonic::{GroupId, HalfInt, Rep};

pub use cf::{
    big_ln, big_log10, rat_to_f64, rat_to_f64_down, rat_to_f64_up, ContinuedFraction, Convergent,
    LiouvilleWitness, Terms, DEFAULT_CAP,
};
pub use certify::{
    build_report, certify_condition2, smooth_analysis, Condition2Certificate, DiophantineReport,
    LadderRung, Quantifier, ReportOptions, SmoothEntry, SmoothReport, SmoothWitness, DEFAULT_RUNGS,
};
pub use scan::{scan_small_divisors, weight_label, CEntry, ScanOptions, ScanReport, ScanTarget, ShellMinimum};

/// Exact real number `rat + alpha·α`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlphaLinear {
    pub rat: BigRational,
    pub alpha: BigRational,
}

impl AlphaLinear {
    pub fn zero() -> Self {
        Self::rational(BigRational::zero())
    }

    pub fn rational(r: BigRational) -> Self {
        Self { rat: r, alpha: BigRational::zero() }
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        Self::rational(BigRational::new(p.into(), q.into()))
    }

    /// `b + c·α`.
    pub fn affine(b: BigRational, c: BigRational) -> Self {
        Self { rat: b, alpha: c }
    }

    pub fn alpha() -> Self {
        Self { rat: BigRational::zero(), alpha: BigRational::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.alpha.is_zero()
    }

    pub fn has_alpha(&self) -> bool {
        !self.alpha.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { rat: &self.rat + &o.rat, alpha: &self.alpha + &o.alpha }
    }

    pub fn neg(&self) -> Self {
        Self { rat: -&self.rat, alpha: -&self.alpha }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self { rat: &self.rat * r, alpha: &self.alpha * r }
    }

    /// Value with `α` replaced by a rational approximation.
    pub fn substitute(&self, alpha: &BigRational) -> BigRational {
        &self.rat + &self.alpha * alpha
    }

    pub fn to_f64_with(&self, alpha: f64) -> f64 {
        rat_to_f64(&self.rat) + rat_to_f64(&self.alpha) * alpha
    }

    /// Outward-rounded enclosure given an enclosure of `α`.
    pub fn f64_enclosure(&self, alpha: (f64, f64)) -> (f64, f64) {
        let b = (rat_to_f64_down(&self.rat), rat_to_f64_up(&self.rat));
        if !self.has_alpha() {
            if self.rat.is_zero() {
                return (0.0, 0.0);
            }
            return b;
        }
        let c = (rat_to_f64_down(&self.alpha), rat_to_f64_up(&self.alpha));
        let prods = [c.0 * alpha.0, c.0 * alpha.1, c.1 * alpha.0, c.1 * alpha.1];
        let lo = prods.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = prods.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = (b.0 + lo, b.1 + hi);
        let pad = 4.0 * f64::EPSILON * (lo.abs().max(hi.abs()) + 1.0);
        (lo - pad, hi + pad)
    }
}

impl fmt::Display for AlphaLinear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.rat.is_zero(), self.alpha.is_zero()) {
            (_, true) => write!(f, "{}", self.rat),
            (true, false) => write!(f, "{}*alpha", self.alpha),
            (false, false) => write!(f, "{} + {}*alpha", self.rat, self.alpha),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlphaLinearRepr {
    #[serde(default)]
    rat: Option<String>,
    #[serde(default)]
    alpha: Option<String>,
}

/// Parses `"p"`, `"p/q"` or a terminating decimal such as `"0.25"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Ok(r) = BigRational::from_str(s) {
        return Ok(r);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if let Some((ip, fp)) = body.split_once('.') {
        if !ip.is_empty() && !ip.chars().all(|c| c.is_ascii_digit())
            || !fp.chars().all(|c| c.is_ascii_digit())
        {
            return Err(Error::Config(format!("not a rational number: {s:?}")));
        }
        let digits: BigInt = format!("{ip}{fp}").parse().map_err(|_| Error::Config(format!("bad number {s:?}")))?;
        let den = num_traits::pow(BigInt::from(10), fp.len());
        let r = BigRational::new(digits, den);
        return Ok(if neg { -r } else { r });
    }
    Err(Error::Config(format!("not a rational number: {s:?}")))
}

impl Serialize for AlphaLinear {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AlphaLinearRepr { rat: Some(self.rat.to_string()), alpha: Some(self.alpha.to_string()) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlphaLinear {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = AlphaLinearRepr::deserialize(d)?;
        let get = |o: Option<String>| -> std::result::Result<BigRational, D::Error> {
            match o {
                None => Ok(BigRational::zero()),
                Some(s) => parse_rational(&s).map_err(serde::de::Error::custom),
            }
        };
        Ok(AlphaLinear { rat: get(r.rat)?, alpha: get(r.alpha)? })
    }
}

/// A real input that is either exact or only known as a double.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scalar {
    Exact(AlphaLinear),
    Float(f64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(AlphaLinear::zero())
    }

    pub fn exact(&self) -> Option<&AlphaLinear> {
        match self {
            Scalar::Exact(a) => Some(a),
            Scalar::Float(_) => None,
        }
    }

    pub fn to_f64_with(&self, alpha: f64) -> f64 {
        match self {
            Scalar::Exact(a) => a.to_f64_with(alpha),
            Scalar::Float(x) => *x,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(a) => write!(f, "{a}"),
            Scalar::Float(x) => write!(f, "{x} (float)"),
        }
    }
}

/// Data defining the divisors `λ + a₀μ − i q₀` over `Ĝ₁ × Ĝ₂`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorProblem {
    pub group1: GroupId,
    pub group2: GroupId,
    pub a0: Scalar,
    pub q0_re: Scalar,
    pub q0_im: Scalar,
    pub cf: ContinuedFraction,
}

/// Integer form of the problem: `2L·Re D = X + αY`, `X = cxi·i + cxj·j + cx0`,
/// `Y = cyj·j + cy0`.
#[derive(Clone, Debug)]
pub(crate) struct Lattice {
    pub two_l: i128,
    pub cxi: i128,
    pub cxj: i128,
    pub cx0: i128,
    pub cyj: i128,
    pub cy0: i128,
    pub uses_alpha: bool,
    /// Certified lower bound on `|Re q₀|`, and whether it is exactly zero.
    pub x_lo: f64,
    pub x_zero: bool,
    pub x_f64: f64,
    pub alpha: (f64, f64),
    pub alpha_mid: f64,
}

fn to_i128(x: &BigInt) -> Result<i128> {
    x.to_i128()
        .ok_or_else(|| Error::PrecisionCap(format!("lattice coefficient {x} exceeds 128 bits")))
}

impl DivisorProblem {
    pub fn new(group1: GroupId, group2: GroupId, a0: Scalar, q0_re: Scalar, q0_im: Scalar) -> Self {
        Self { group1, group2, a0, q0_re, q0_im, cf: ContinuedFraction::alpha_factorial() }
    }

    /// Exact problem with `q₀ = q0_re + i·q0_im`.
    pub fn exact(
        group1: GroupId,
        group2: GroupId,
        a0: AlphaLinear,
        q0_re: AlphaLinear,
        q0_im: AlphaLinear,
    ) -> Self {
        Self::new(group1, group2, Scalar::Exact(a0), Scalar::Exact(q0_re), Scalar::Exact(q0_im))
    }

    pub fn with_cf(mut self, cf: ContinuedFraction) -> Self {
        self.cf = cf;
        self
    }

    pub fn is_exact(&self) -> bool {
        [&self.a0, &self.q0_re, &self.q0_im].iter().all(|s| s.exact().is_some())
    }

    pub fn uses_alpha(&self) -> bool {
        [&self.a0, &self.q0_re, &self.q0_im]
            .iter()
            .any(|s| s.exact().map(AlphaLinear::has_alpha).unwrap_or(false))
    }

    /// Exact parts with `α` folded in when the continued fraction is finite.
    fn exact_parts(&self) -> Option<(AlphaLinear, AlphaLinear, AlphaLinear)> {
        let (a, x, y) = (self.a0.exact()?, self.q0_re.exact()?, self.q0_im.exact()?);
        if self.cf.is_infinite() {
            return Some((a.clone(), x.clone(), y.clone()));
        }
        let v = self.cf.convergents(self.cf.cap).ok()?.pop()?;
        let fold = |z: &AlphaLinear| AlphaLinear::rational(z.substitute(&v));
        Some((fold(a), fold(x), fold(y)))
    }

    pub(crate) fn lattice(&self) -> Result<Lattice> {
        let alpha = if self.cf.is_infinite() {
            self.cf.f64_enclosure()?
        } else {
            let v = rat_to_f64(&self.cf.convergents(self.cf.cap)?.pop().expect("non-empty"));
            (v, v)
        };
        let alpha_mid = 0.5 * (alpha.0 + alpha.1);
        let Some((a, x, y)) = self.exact_parts() else {
            return Err(Error::UncertifiedInput("coefficients given as floats".into()));
        };
        let mut l = BigInt::one();
        for r in [&a.rat, &a.alpha, &y.rat, &y.alpha] {
            l = l.lcm(r.denom());
        }
        let lr = BigRational::from(l.clone());
        let int = |r: BigRational| -> Result<i128> { to_i128(&r.to_integer()) };
        let two = BigRational::from(BigInt::from(2));
        let (x_lo, x_hi) = x.f64_enclosure(alpha);
        let x_lo_abs = if x_lo > 0.0 {
            x_lo
        } else if x_hi < 0.0 {
            -x_hi
        } else {
            0.0
        };
        Ok(Lattice {
            two_l: to_i128(&(&l * 2))?,
            cxi: to_i128(&l)?,
            cxj: int(&lr * &a.rat)?,
            cx0: int(&two * &lr * &y.rat)?,
            cyj: int(&lr * &a.alpha)?,
            cy0: int(&two * &lr * &y.alpha)?,
            uses_alpha: a.has_alpha() || y.has_alpha(),
            x_lo: x_lo_abs,
            x_zero: x.is_zero(),
            x_f64: x.to_f64_with(alpha_mid),
            alpha,
            alpha_mid,
        })
    }

    /// Exact per-mode test of `λ + a₀μ − i·q₀ = 0`.
    pub fn resonance_test(&self) -> Result<ResonanceTest> {
        Ok(ResonanceTest(self.lattice()?))
    }

    /// Human-readable description of `a₀` and `q₀`.
    pub fn describe(&self) -> (String, String) {
        (self.a0.to_string(), format!("({}) + i({})", self.q0_re, self.q0_im))
    }
}

/// Smallest `⟨·⟩` over representations of `group` containing the weight `twice/2`.
pub fn min_bracket(group: GroupId, twice: i64) -> f64 {
    let w = twice.unsigned_abs() as f64 / 2.0;
    match group {
        GroupId::T1 => (1.0 + w * w).sqrt(),
        GroupId::SU2 => (1.0 + w * (w + 1.0)).sqrt(),
    }
}

/// Continuous lower envelope of [`min_bracket`] at weight modulus `w >= 0`.
pub(crate) fn bracket_at(group: GroupId, w: f64) -> f64 {
    let w = w.max(0.0);
    match group {
        GroupId::T1 => (1.0 + w * w).sqrt(),
        GroupId::SU2 => (1.0 + w * (w + 1.0)).sqrt(),
    }
}

/// Step in `twice` units between admissible weights.
pub(crate) fn weight_step(group: GroupId) -> i64 {
    match group {
        GroupId::T1 => 2,
        GroupId::SU2 => 1,
    }
}

/// Largest admissible `twice` with `min_bracket <= rem` (`None` if `rem < 1`).
pub(crate) fn max_twice(group: GroupId, rem: f64) -> Option<i64> {
    if rem < 1.0 {
        return None;
    }
    let step = weight_step(group);
    let mut t = (2.0 * (rem * rem - 1.0).max(0.0).sqrt()).floor() as i64;
    t -= t.rem_euclid(step);
    while min_bracket(group, t + step) <= rem {
        t += step;
    }
    while t > 0 && min_bracket(group, t) > rem {
        t -= step;
    }
    Some(t)
}

/// Minimal representation containing weight `twice/2`.
pub fn min_rep(group: GroupId, twice: i64) -> Rep {
    match group {
        GroupId::T1 => Rep::Torus { k: twice / 2 },
        GroupId::SU2 => Rep::su2_twice(twice.abs()),
    }
}

/// A resonant tuple `(ξ, η, m, r)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonantTuple {
    pub xi: Rep,
    pub eta: Rep,
    pub m: HalfInt,
    pub r: HalfInt,
    pub scale: f64,
}

/// Whether the full (uncut) resonant set is empty, finite or infinite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Structure {
    Empty,
    Finite { count: usize },
    Infinite { family: String },
}

/// Exact resonance inventory up to a cutoff.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResonanceInventory {
    pub cutoff: f64,
    pub structure: Structure,
    /// Resonant weight pairs `(λ, μ)` with some tuple inside the cutoff.
    pub pairs: Vec<(HalfInt, HalfInt)>,
    pub tuple_count: usize,
    /// At most [`TUPLE_LIST_CAP`] tuples, ordered by scale.
    pub tuples: Vec<ResonantTuple>,
}

pub const TUPLE_LIST_CAP: usize = 10_000;

/// Exact resonance predicate on `(λ, μ)` built from the divisor lattice.
#[derive(Clone, Debug)]
pub struct ResonanceTest(Lattice);

impl ResonanceTest {
    pub fn is_resonant(&self, lambda: HalfInt, mu: HalfInt) -> bool {
        let l = &self.0;
        let (i, j) = (lambda.twice as i128, mu.twice as i128);
        l.x_zero && l.cxi * i + l.cxj * j + l.cx0 == 0 && l.cyj * j + l.cy0 == 0
    }
}

impl ResonanceInventory {
    pub fn is_resonant(&self, m: HalfInt, r: HalfInt) -> bool {
        self.pairs.contains(&(m, r))
    }
}

/// Exact resonant set within `⟨ξ⟩ + ⟨η⟩ <= cutoff` and its structural verdict.
pub fn resonance_set(problem: &DivisorProblem, cutoff: f64) -> Result<ResonanceInventory> {
    if !problem.is_exact() {
        return Err(Error::UncertifiedInput(
            "a0 or q0 given as float; resonances cannot be decided exactly".into(),
        ));
    }
    let lat = problem.lattice()?;
    let (g1, g2) = (problem.group1, problem.group2);
    let any_su2 = g1 == GroupId::SU2 || g2 == GroupId::SU2;
    let step1 = weight_step(g1) as i128;
    let step2 = weight_step(g2) as i128;

    // i solving X = 0 for a given j, if admissible
    let solve_i = |j: i128| -> Option<i128> {
        let num = -(lat.cxj * j + lat.cx0);
        (num % lat.cxi == 0)
            .then_some(num / lat.cxi)
            .filter(|i| i.rem_euclid(step1) == 0)
    };
    let y_zero = |j: i128| lat.cyj * j + lat.cy0 == 0;

    let structure = if !lat.x_zero {
        Structure::Empty
    } else if lat.cyj != 0 {
        let num = -lat.cy0;
        let j = (num % lat.cyj == 0).then_some(num / lat.cyj).filter(|j| j.rem_euclid(step2) == 0);
        match j.and_then(|j| solve_i(j).map(|i| (i, j))) {
            None => Structure::Empty,
            Some((i, j)) if any_su2 => Structure::Infinite {
                family: format!(
                    "weights (λ, μ) = ({}, {}) in every representation pair containing them",
                    HalfInt::from_twice(i as i64),
                    HalfInt::from_twice(j as i64)
                ),
            },
            Some(_) => Structure::Finite { count: 1 },
        }
    } else if lat.cy0 != 0 {
        Structure::Empty
    } else {
        // X = 0 is a line; admissibility is periodic in j with period dividing 2·cxi·step2
        let period = 2 * lat.cxi * step2;
        let found = (0..period / step2).map(|t| t * step2).find(|&j| solve_i(j).is_some());
        match found {
            None => Structure::Empty,
            Some(j) => Structure::Infinite {
                family: format!(
                    "the line 2L·(λ + a0·μ + Im q0) = 0 through (λ, μ) = ({}, {}), period {} in 2μ",
                    HalfInt::from_twice(solve_i(j).expect("found") as i64),
                    HalfInt::from_twice(j as i64),
                    period
                ),
            },
        }
    };

    let mut pairs = Vec::new();
    let mut tuples = Vec::new();
    let mut tuple_count = 0usize;
    if lat.x_zero {
        if let Some(jmax) = max_twice(g2, cutoff - 1.0) {
            let jmax = jmax as i128;
            let mut j = -jmax;
            while j <= jmax {
                if y_zero(j) {
                    if let Some(i) = solve_i(j) {
                        let (it, jt) = (i as i64, j as i64);
                        let base = min_bracket(g1, it) + min_bracket(g2, jt);
                        if base <= cutoff {
                            pairs.push((HalfInt::from_twice(it), HalfInt::from_twice(jt)));
                            for (xi, eta, s) in reps_within(g1, it, g2, jt, cutoff) {
                                tuple_count += 1;
                                if tuples.len() < TUPLE_LIST_CAP {
                                    tuples.push(ResonantTuple {
                                        xi,
                                        eta,
                                        m: HalfInt::from_twice(it),
                                        r: HalfInt::from_twice(jt),
                                        scale: s,
                                    });
                                }
                            }
                        }
                    }
                }
                j += step2;
            }
        }
    }
    tuples.sort_by(|a, b| a.scale.total_cmp(&b.scale));
    pairs.sort();
    Ok(ResonanceInventory { cutoff, structure, pairs, tuple_count, tuples })
}

/// All representation pairs containing the weights, with scale within the cutoff.
fn reps_within(g1: GroupId, i: i64, g2: GroupId, j: i64, cutoff: f64) -> Vec<(Rep, Rep, f64)> {
    let chain = |g: GroupId, t: i64, rem: f64| -> Vec<Rep> {
        match g {
            GroupId::T1 => {
                let r = Rep::Torus { k: t / 2 };
                if r.bracket() <= rem { vec![r] } else { vec![] }
            }
            GroupId::SU2 => {
                let mut v = Vec::new();
                let mut l = t.abs();
                while Rep::su2_twice(l).bracket() <= rem {
                    v.push(Rep::su2_twice(l));
                    l += 2;
                }
                v
            }
        }
    };
    let mut out = Vec::new();
    for xi in chain(g1, i, cutoff - 1.0) {
        for eta in chain(g2, j, cutoff - xi.bracket()) {
            out.push((xi, eta, xi.bracket() + eta.bracket()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t1s3(a0: AlphaLinear, x: AlphaLinear, y: AlphaLinear) -> DivisorProblem {
        DivisorProblem::exact(GroupId::T1, GroupId::SU2, a0, x, y)
    }

    #[test]
    fn alpha_linear_serde() {
        let a = AlphaLinear::affine(BigRational::new(1.into(), 2.into()), BigRational::one());
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"rat":"1/2","alpha":"1"}"#);
        assert_eq!(serde_json::from_str::<AlphaLinear>(&s).unwrap(), a);
        let d: AlphaLinear = serde_json::from_str(r#"{"rat":"-0.25"}"#).unwrap();
        assert_eq!(d, AlphaLinear::from_ratio(-1, 4));
        assert!(serde_json::from_str::<AlphaLinear>(r#"{"rat":"x"}"#).is_err());
    }

    #[test]
    fn bracket_helpers() {
        assert_eq!(max_twice(GroupId::T1, 0.5), None);
        assert_eq!(max_twice(GroupId::T1, 1.0), Some(0));
        assert_eq!(max_twice(GroupId::T1, 2f64.sqrt()), Some(2));
        // SU2: sqrt(1 + l(l+1)) <= 3 iff l(l+1) <= 8, l <= 2.37 -> twice 4
        assert_eq!(max_twice(GroupId::SU2, 3.0), Some(4));
        for rem in [1.0, 1.7, 5.3, 100.0, 777.7] {
            for g in [GroupId::T1, GroupId::SU2] {
                let t = max_twice(g, rem).unwrap();
                assert!(min_bracket(g, t) <= rem && min_bracket(g, t + weight_step(g)) > rem);
            }
        }
    }

    #[test]
    fn irrational_t1s3_resonances() {
        let p = t1s3(AlphaLinear::alpha(), AlphaLinear::zero(), AlphaLinear::zero());
        let inv = resonance_set(&p, 20.0).unwrap();
        assert!(matches!(inv.structure, Structure::Infinite { .. }));
        assert_eq!(inv.pairs, vec![(HalfInt::ZERO, HalfInt::ZERO)]);
        // k = 0 and integer l with m = 0: scale 1 + sqrt(1 + l(l+1)) <= 20
        let oracle = (0..40).filter(|&l: &i64| 1.0 + (1.0 + (l * (l + 1)) as f64).sqrt() <= 20.0).count();
        assert_eq!(inv.tuple_count, oracle);
        assert!(inv.tuples.iter().all(|t| matches!(t.eta, Rep::SU2 { ell } if ell.is_integer())));
    }

    #[test]
    fn rational_one_resonances() {
        let p = t1s3(AlphaLinear::from_ratio(1, 1), AlphaLinear::zero(), AlphaLinear::zero());
        let inv = resonance_set(&p, 20.0).unwrap();
        assert!(matches!(inv.structure, Structure::Infinite { .. }));
        // brute force over integer pairs k + m = 0 with m integer
        let mut count = 0;
        for k in -20i64..=20 {
            for tl in 0..60i64 {
                for tm in (-tl..=tl).step_by(2) {
                    let s = Rep::Torus { k }.bracket() + Rep::su2_twice(tl).bracket();
                    if s <= 20.0 && 2 * k + tm == 0 {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(inv.tuple_count, count);
        assert!(inv.pairs.iter().all(|(l, m)| (*l + *m) == HalfInt::ZERO));
    }

    #[test]
    fn s3s3_alpha_resonances() {
        let p = DivisorProblem::exact(
            GroupId::SU2,
            GroupId::SU2,
            AlphaLinear::alpha(),
            AlphaLinear::zero(),
            AlphaLinear::zero(),
        );
        let inv = resonance_set(&p, 20.0).unwrap();
        assert!(matches!(inv.structure, Structure::Infinite { .. }));
        assert_eq!(inv.pairs, vec![(HalfInt::ZERO, HalfInt::ZERO)]);
        assert!(inv.tuple_count > 10);
    }

    #[test]
    fn shifted_problems() {
        // Re q0 != 0: nothing resonates
        let p = t1s3(AlphaLinear::alpha(), AlphaLinear::from_ratio(1, 2), AlphaLinear::zero());
        assert_eq!(resonance_set(&p, 20.0).unwrap().structure, Structure::Empty);
        // q0 = alpha·i: λ + αμ − i(iα) = λ + α(μ + 1), resonant at (0, −1)
        let p = t1s3(AlphaLinear::alpha(), AlphaLinear::zero(), AlphaLinear::alpha());
        let inv = resonance_set(&p, 20.0).unwrap();
        assert!(matches!(inv.structure, Structure::Infinite { .. }));
        assert_eq!(inv.pairs, vec![(HalfInt::ZERO, HalfInt::from_int(-1))]);
        // both tori: a single tuple
        let p = DivisorProblem::exact(
            GroupId::T1,
            GroupId::T1,
            AlphaLinear::alpha(),
            AlphaLinear::zero(),
            AlphaLinear::alpha(),
        );
        assert_eq!(resonance_set(&p, 20.0).unwrap().structure, Structure::Finite { count: 1 });
        // a0 = 1/3 on the tori: k + m/3 = 0 has solutions (m = -3k)
        let p = DivisorProblem::exact(
            GroupId::T1,
            GroupId::T1,
            AlphaLinear::from_ratio(1, 3),
            AlphaLinear::zero(),
            AlphaLinear::from_ratio(1, 2),
        );
        // k + m/3 + 1/2 = 0 has no integer solution
        assert_eq!(resonance_set(&p, 50.0).unwrap().structure, Structure::Empty);
    }

    #[test]
    fn float_input_is_uncertified() {
        let p = DivisorProblem::new(GroupId::T1, GroupId::SU2, Scalar::Float(10.01), Scalar::zero(), Scalar::zero());
        assert!(matches!(resonance_set(&p, 10.0), Err(Error::UncertifiedInput(_))));
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("3/4").unwrap(), BigRational::new(3.into(), 4.into()));
        assert_eq!(parse_rational("-1.5").unwrap(), BigRational::new((-3).into(), 2.into()));
        assert_eq!(parse_rational(".5").unwrap(), BigRational::new(1.into(), 2.into()));
        assert!(parse_rational("1e3").is_err());
    }
}
