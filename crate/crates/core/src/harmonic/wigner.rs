//! Wigner small-d functions and SU(2) matrix elements in Euler angles.
//!
//! Convention: `t^ℓ_{mn}(φ,θ,ψ) = e^{i(mφ+nψ)} i^{n-m} d^ℓ_{mn}(θ)` with the
//! standard small-d. At `ℓ = ½` (rows/columns ordered `+½, -½`) this is
//! `[[p₁, p₂], [-p̄₂, p̄₁]]` with `p₁ = cos(θ/2)e^{i(φ+ψ)/2}` and
//! `p₂ = i sin(θ/2)e^{i(φ-ψ)/2}`, and `∂_ψ t_{mn} = i n t_{mn}`.

use num_complex::Complex64;

use super::{i_pow, HalfInt};
use crate::error::{Error, Result};
use crate::weights::ln_factorial;

fn ln_binom(n: i64, k: i64) -> f64 {
    ln_factorial(n as f64) - ln_factorial(k as f64) - ln_factorial((n - k) as f64)
}

/// Jacobi polynomial `P_n^{(a,b)}(x)` by the three-term recurrence.
fn jacobi(n: i64, a: f64, b: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    for k in 2..=n {
        let k = k as f64;
        let c = 2.0 * k + a + b;
        let a1 = 2.0 * k * (k + a + b) * (c - 2.0);
        let a2 = (c - 1.0) * (a * a - b * b);
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * c;
        let p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn check_indices(twice_l: i64, twice_m: i64, twice_n: i64) -> Result<()> {
    let ok = |t: i64| t.abs() <= twice_l && (twice_l - t) % 2 == 0;
    if twice_l < 0 || !ok(twice_m) || !ok(twice_n) {
        return Err(Error::Index(format!(
            "(l, m, n) = ({}, {}, {}) is not a valid index triple",
            HalfInt::from_twice(twice_l),
            HalfInt::from_twice(twice_m),
            HalfInt::from_twice(twice_n)
        )));
    }
    Ok(())
}

/// Wigner small-d `d^ℓ_{m'm}(θ)`; arguments are twice the spin and weights.
pub fn wigner_d(twice_l: i64, twice_mp: i64, twice_m: i64, theta: f64) -> Result<f64> {
    check_indices(twice_l, twice_mp, twice_m)?;
    let j = twice_l;
    // all in doubled units; the four candidates for k are integers
    let cands = [(j + twice_m) / 2, (j - twice_m) / 2, (j + twice_mp) / 2, (j - twice_mp) / 2];
    let k = *cands.iter().min().unwrap();
    let diff = (twice_mp - twice_m) / 2;
    let (a, lambda) = if k == cands[0] {
        (diff, diff)
    } else if k == cands[1] || k == cands[2] {
        (-diff, 0)
    } else {
        (diff, diff)
    };
    let b = j - 2 * k - a;
    let sign = if lambda.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let norm = (0.5 * (ln_binom(j - k, k + a) - ln_binom(k + b, b))).exp();
    let (s, c) = (theta / 2.0).sin_cos();
    Ok(sign * norm * s.powi(a as i32) * c.powi(b as i32) * jacobi(k, a as f64, b as f64, theta.cos()))
}

/// The explicit factorial sum for `d^ℓ_{m'm}(θ)`. Kept as a cross-check of
/// [`wigner_d`]; it loses accuracy at large `ℓ` through cancellation.
pub fn wigner_d_sum(twice_l: i64, twice_mp: i64, twice_m: i64, theta: f64) -> Result<f64> {
    check_indices(twice_l, twice_mp, twice_m)?;
    let (jm, jpm) = ((twice_l - twice_m) / 2, (twice_l + twice_m) / 2);
    let (jmp, jpmp) = ((twice_l - twice_mp) / 2, (twice_l + twice_mp) / 2);
    let dm = (twice_mp - twice_m) / 2;
    let pre = 0.5
        * (ln_factorial(jpmp as f64) + ln_factorial(jmp as f64) + ln_factorial(jpm as f64) + ln_factorial(jm as f64));
    let (sn, cs) = (theta / 2.0).sin_cos();
    let mut acc = 0.0;
    for s in 0.max(-dm)..=jpm.min(jmp) {
        let den = ln_factorial((jpm - s) as f64)
            + ln_factorial(s as f64)
            + ln_factorial((dm + s) as f64)
            + ln_factorial((jmp - s) as f64);
        let sign = if (dm + s).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let ce = (twice_l - dm - 2 * s) as i32;
        let se = (dm + 2 * s) as i32;
        acc += sign * (pre - den).exp() * cs.powi(ce) * sn.powi(se);
    }
    Ok(acc)
}

/// Full `d^ℓ(θ)` as a row-major `(2ℓ+1)²` array, indices ordered `-ℓ..ℓ`.
pub fn wigner_d_matrix(twice_l: i64, theta: f64) -> Vec<f64> {
    let d = (twice_l + 1) as usize;
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let mp = -twice_l + 2 * i as i64;
            let m = -twice_l + 2 * k as i64;
            out[i * d + k] = wigner_d(twice_l, mp, m, theta).expect("indices in range");
        }
    }
    out
}

/// `t^ℓ_{mn}(φ,θ,ψ)`.
pub fn matrix_element(ell: HalfInt, m: HalfInt, n: HalfInt, phi: f64, theta: f64, psi: f64) -> Result<Complex64> {
    let d = wigner_d(ell.twice, m.twice, n.twice, theta)?;
    let phase = Complex64::from_polar(1.0, 0.5 * (m.twice as f64 * phi + n.twice as f64 * psi));
    Ok(phase * i_pow((n.twice - m.twice) / 2) * d)
}

/// Row-major representation matrix `t^ℓ(φ,θ,ψ)`, indices ordered `-ℓ..ℓ`.
pub fn rep_matrix(ell: HalfInt, phi: f64, theta: f64, psi: f64) -> Vec<Complex64> {
    let w: Vec<HalfInt> = (0..=ell.twice).map(|i| HalfInt::from_twice(-ell.twice + 2 * i)).collect();
    let mut out = Vec::with_capacity(w.len() * w.len());
    for &m in &w {
        for &n in &w {
            out.push(matrix_element(ell, m, n, phi, theta, psi).expect("indices in range"));
        }
    }
    out
}
