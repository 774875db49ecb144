//! Exact continued fractions and convergent arithmetic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default largest term index that may be materialized.
pub const DEFAULT_CAP: usize = 6;

/// Source of the partial quotients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Terms {
    /// `a_i = base^{(i+1)!}` for `i >= 0` (so the integer part is `base`).
    FactorialTower { base: u32 },
    /// An explicit finite list; the value is then the rational last convergent.
    Finite { terms: Vec<String> },
}

/// A simple continued fraction `[a_0; a_1, a_2, ...]` with a term cap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuedFraction {
    pub terms: Terms,
    pub cap: usize,
}

/// Convergent `p_n / q_n` with its index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub n: usize,
    pub p: BigInt,
    pub q: BigInt,
}

impl Convergent {
    pub fn ratio(&self) -> BigRational {
        BigRational::new(self.p.clone(), self.q.clone())
    }
}

/// `|p_n - alpha q_n| < 1/q_{n+1} < q_n^{-n}`, checked exactly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiouvilleWitness {
    pub n: usize,
    pub p: String,
    pub q: String,
    pub q_next: String,
    /// `|p_n - alpha q_n| < 1/q_{n+1}` via the open enclosure of alpha.
    pub below_reciprocal_next: bool,
    /// `q_n^n < q_{n+1}`.
    pub beats_power: bool,
    pub log10_gap_upper: f64,
}

impl LiouvilleWitness {
    pub fn holds(&self) -> bool {
        self.below_reciprocal_next && self.beats_power
    }
}

fn factorial(n: usize) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k))
}

impl ContinuedFraction {
    /// `[10^{1!}; 10^{2!}, 10^{3!}, ...]`.
    pub fn alpha_factorial() -> Self {
        Self {
            terms: Terms::FactorialTower { base: 10 },
            cap: DEFAULT_CAP,
        }
    }

    pub fn finite(terms: &[i64]) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Domain("empty continued fraction".into()));
        }
        if terms[1..].iter().any(|&a| a < 1) {
            return Err(Error::Domain("partial quotients after a_0 must be >= 1".into()));
        }
        Ok(Self {
            terms: Terms::Finite {
                terms: terms.iter().map(|a| a.to_string()).collect(),
            },
            cap: terms.len() - 1,
        })
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    /// True when the expansion never terminates (an irrational value).
    pub fn is_infinite(&self) -> bool {
        matches!(self.terms, Terms::FactorialTower { .. })
    }

    fn check_cap(&self, i: usize) -> Result<()> {
        if i > self.cap {
            return Err(Error::PrecisionCap(format!(
                "term index {i} exceeds the cap {} (raise the cap or stay below it)",
                self.cap
            )));
        }
        if let Terms::Finite { terms } = &self.terms {
            if i >= terms.len() {
                return Err(Error::Index(format!("finite expansion has {} terms", terms.len())));
            }
        }
        Ok(())
    }

    /// Partial quotient `a_i`.
    pub fn term(&self, i: usize) -> Result<BigInt> {
        self.check_cap(i)?;
        match &self.terms {
            Terms::FactorialTower { base } => {
                let e = factorial(i + 1).ok_or_else(|| Error::PrecisionCap("exponent overflow".into()))?;
                Ok(Pow::pow(BigInt::from(*base), e))
            }
            Terms::Finite { terms } => terms[i]
                .parse()
                .map_err(|_| Error::Domain(format!("bad integer term {:?}", terms[i]))),
        }
    }

    /// `a_i mod m`, available for any index (no cap).
    pub fn term_mod(&self, i: usize, m: &BigInt) -> Result<BigInt> {
        match &self.terms {
            Terms::FactorialTower { base } => {
                let mut e = BigInt::one();
                for k in 2..=(i as u64 + 1) {
                    e *= k;
                }
                Ok(BigInt::from(*base).modpow(&e, m))
            }
            Terms::Finite { .. } => Ok(self.term(i)?.mod_floor(m)),
        }
    }

    /// Convergents `0..=n`.
    pub fn convergent_list(&self, n: usize) -> Result<Vec<Convergent>> {
        self.check_cap(n)?;
        let (mut p2, mut q2) = (BigInt::zero(), BigInt::one());
        let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let a = self.term(i)?;
            let p = &a * &p1 + &p2;
            let q = &a * &q1 + &q2;
            out.push(Convergent { n: i, p: p.clone(), q: q.clone() });
            p2 = std::mem::replace(&mut p1, p);
            q2 = std::mem::replace(&mut q1, q);
        }
        Ok(out)
    }

    pub fn convergent(&self, n: usize) -> Result<Convergent> {
        Ok(self.convergent_list(n)?.pop().expect("non-empty"))
    }

    /// Exact convergents `p_i/q_i`, `i <= n`.
    pub fn convergents(&self, n: usize) -> Result<Vec<BigRational>> {
        Ok(self.convergent_list(n)?.iter().map(Convergent::ratio).collect())
    }

    /// `(p_n mod m, q_n mod m)` for any `n`, by the recurrence in residues.
    pub fn convergent_residues(&self, n: usize, m: &BigInt) -> Result<(BigInt, BigInt)> {
        let (mut p2, mut q2) = (BigInt::zero(), BigInt::one());
        let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
        for i in 0..=n {
            let a = self.term_mod(i, m)?;
            let p = (&a * &p1 + &p2).mod_floor(m);
            let q = (&a * &q1 + &q2).mod_floor(m);
            p2 = std::mem::replace(&mut p1, p);
            q2 = std::mem::replace(&mut q1, q);
        }
        Ok((p1, q1))
    }

    /// Consecutive convergents `n-1`, `n` ordered so that `lo < value < hi`.
    pub fn enclose(&self, n: usize) -> Result<(BigRational, BigRational)> {
        if n < 1 {
            return Err(Error::Domain("enclosure needs n >= 1".into()));
        }
        let c = self.convergents(n)?;
        let (a, b) = (c[n - 1].clone(), c[n].clone());
        // even-indexed convergents lie below the value
        Ok(if n % 2 == 1 { (a, b) } else { (b, a) })
    }

    /// Certified `B(m)` with `|k + value * m'| >= B(m)` for all integers `k`
    /// and all `1 <= m' <= m`: `1/(q_{n+1} + q_n)` with `q_n <= m < q_{n+1}`.
    pub fn best_approx_lower_bound(&self, m: &BigInt) -> Result<BigRational> {
        if !m.is_positive() {
            return Err(Error::Domain("m must be positive".into()));
        }
        if !self.is_infinite() {
            return Err(Error::Domain("lower bound needs an infinite expansion".into()));
        }
        let list = self.convergent_list(self.cap)?;
        for w in list.windows(2) {
            if &w[0].q <= m && m < &w[1].q {
                return Ok(BigRational::new(BigInt::one(), &w[1].q + &w[0].q));
            }
        }
        Err(Error::PrecisionCap(format!(
            "m = {m} is beyond q_{} at the cap",
            self.cap
        )))
    }

    /// Liouville witnesses for `n <= n_max` (needs convergent `n_max + 2`).
    pub fn liouville_witnesses(&self, n_max: usize) -> Result<Vec<LiouvilleWitness>> {
        if !self.is_infinite() {
            return Err(Error::Domain("witnesses need an infinite expansion".into()));
        }
        let c = self.convergent_list(n_max + 2)?;
        let mut out = Vec::new();
        for n in 0..=n_max {
            let (cn, c1, c2) = (&c[n], &c[n + 1], &c[n + 2]);
            // |p_n - x q_n| is affine in x; alpha lies strictly between
            // c_{n+1} and c_{n+2}, so it is below the larger endpoint value.
            let at = |x: &Convergent| -> BigRational {
                (BigRational::from(cn.p.clone()) - BigRational::from(cn.q.clone()) * x.ratio()).abs()
            };
            let (v1, v2) = (at(c1), at(c2));
            let bound = BigRational::new(BigInt::one(), c1.q.clone());
            let below = v1 <= bound && v2 < bound && v1 != v2;
            let beats = Pow::pow(&cn.q, n as u32) < c1.q;
            out.push(LiouvilleWitness {
                n,
                p: cn.p.to_string(),
                q: cn.q.to_string(),
                q_next: c1.q.to_string(),
                below_reciprocal_next: below,
                beats_power: beats,
                log10_gap_upper: -big_log10(&c1.q),
            });
        }
        Ok(out)
    }

    /// Rigorous bracket on `log10 q_n`, valid past the cap for factorial towers.
    pub fn log10_q_bracket(&self, n: usize) -> Result<(f64, f64)> {
        if n <= self.cap {
            let q = self.convergent(n)?.q;
            let l = big_log10(&q);
            return Ok((l - 1e-9, l + 1e-9));
        }
        match &self.terms {
            Terms::FactorialTower { base } => {
                // a_1 ... a_n <= q_n <= prod (a_i + 1) <= 2^n prod a_i
                let lb = (*base as f64).log10();
                let mut s = 0.0;
                for i in 1..=n {
                    s += factorial(i + 1).map(|f| f as f64).unwrap_or(f64::INFINITY) * lb;
                }
                Ok((s * (1.0 - 1e-12), s * (1.0 + 1e-12) + n as f64 * 2f64.log10()))
            }
            Terms::Finite { .. } => Err(Error::Index("beyond the finite expansion".into())),
        }
    }

    /// Floating enclosure `[lo, hi]` of the value rounded outward.
    pub fn f64_enclosure(&self) -> Result<(f64, f64)> {
        let n = self.cap.clamp(1, 3);
        let (lo, hi) = self.enclose(n)?;
        Ok((rat_to_f64_down(&lo), rat_to_f64_up(&hi)))
    }
}

/// `log10 |x|` for arbitrarily large integers (about 1e-15 relative accuracy).
pub fn big_log10(x: &BigInt) -> f64 {
    big_ln(x) / std::f64::consts::LN_10
}

/// `ln |x|` for arbitrarily large integers.
pub fn big_ln(x: &BigInt) -> f64 {
    let x = x.abs();
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits").ln();
    }
    let shift = bits - 64;
    let top: BigInt = &x >> shift;
    top.to_f64().expect("fits").ln() + shift as f64 * std::f64::consts::LN_2
}

/// Nearest-double conversion moved two ulps toward -inf.
pub fn rat_to_f64_down(r: &BigRational) -> f64 {
    rat_to_f64(r).next_down().next_down()
}

pub fn rat_to_f64_up(r: &BigRational) -> f64 {
    rat_to_f64(r).next_up().next_up()
}

/// Approximate double value of a rational, robust to huge numerators/denominators.
pub fn rat_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    sign * (big_ln(r.numer()) - big_ln(r.denom())).exp()
}
