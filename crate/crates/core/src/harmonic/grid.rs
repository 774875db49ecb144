//! Quadrature grids and single-group transforms.
//!
//! Torus nodes are `t_j = 2πj/N`. SU(2) nodes form a tensor grid with
//! uniform `φ, ψ` on `[0, 4π)` (so half-integer frequencies are periodic)
//! and Gauss-Legendre nodes in `cos θ`. Nodes are ordered `φ`-major with
//! `ψ` fastest. Coefficients of rep `ρ` are stored at
//! `offset(ρ) + m_idx·d + n_idx`.

use std::f64::consts::PI;
use std::path::PathBuf;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{i_pow, reps_up_to, wigner_d_matrix, GroupId, HalfInt, Rep};
use crate::error::{Error, Result};

/// Resource cap on the number of nodes of one grid.
pub const MAX_GRID_POINTS: usize = 20_000_000;

const SCHUR_TOL: f64 = 1e-12;
const CACHE_ENV: &str = "KOMATSU_SPECTRAL_CACHE";

/// Gauss-Legendre nodes and weights on `[-1, 1]` (weights sum to 2).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    if let Some(hit) = cache_load(n) {
        return hit;
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    cache_store(n, &x, &w);
    (x, w)
}

fn cache_path(n: usize) -> Option<PathBuf> {
    let dir = std::env::var_os(CACHE_ENV)?;
    Some(PathBuf::from(dir).join(format!("gauss_legendre_{n}.json")))
}

fn cache_load(n: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(cache_path(n)?).ok()?;
    let (x, w): (Vec<f64>, Vec<f64>) = serde_json::from_str(&text).ok()?;
    (x.len() == n && w.len() == n).then_some((x, w))
}

fn cache_store(n: usize, x: &[f64], w: &[f64]) {
    if let Some(p) = cache_path(n) {
        if let Some(dir) = p.parent() {
            let _ = std::fs::create_dir_all(dir);
        }
        if let Ok(text) = serde_json::to_string(&(x, w)) {
            let _ = std::fs::write(p, text);
        }
    }
}

/// Per-axis oversampling factors (`≥ 1`); the torus uses `psi` for `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Oversample {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl Oversample {
    pub fn uniform(f: f64) -> Self {
        Self { phi: f, theta: f, psi: f }
    }
}

impl Default for Oversample {
    fn default() -> Self {
        Self::uniform(1.0)
    }
}

#[derive(Clone, Debug)]
pub enum GridAxes {
    Torus { n: usize },
    SU2 { n_phi: usize, n_theta: usize, n_psi: usize, theta: Vec<f64>, theta_w: Vec<f64> },
}

/// A quadrature grid on one group together with its band-limited transforms.
#[derive(Clone, Debug)]
pub struct GroupGrid {
    pub group: GroupId,
    /// `kmax` (torus, integral) or `ℓmax` (SU(2)).
    pub band: HalfInt,
    pub axes: GridAxes,
    reps: Vec<Rep>,
    offsets: Vec<usize>,
    ncoef: usize,
    /// `d^ℓ(θ_b)` for every θ node `b` and spin `2ℓ = 0..=2ℓmax`.
    dtab: Vec<Vec<Vec<f64>>>,
    /// Real spectral differentiation matrix along the field coordinate.
    dmat: Vec<f64>,
    /// Field-coordinate twiddles `e^{-i j x_c/p}` for `j` in `[-B, B]`.
    tw_field: Vec<Complex64>,
    tw_phi: Vec<Complex64>,
}

fn scaled(base: usize, f: f64) -> usize {
    ((base as f64) * f.max(1.0)).ceil() as usize
}

/// Differentiation matrix for `N` uniform nodes over a period `2π/freq_unit`.
fn diff_matrix(n: usize, freq_unit: f64) -> Vec<f64> {
    let mut d = vec![0.0; n * n];
    let jmax = (n as i64 - 1) / 2;
    for a in 0..n {
        for b in 0..n {
            let delta = 2.0 * PI * (a as f64 - b as f64) / n as f64;
            let mut s = 0.0;
            for j in 1..=jmax {
                // i j e^{ijΔ} + (-i j) e^{-ijΔ} = -2 j sin(jΔ)
                s += -2.0 * j as f64 * (j as f64 * delta).sin();
            }
            d[a * n + b] = s * freq_unit / n as f64;
        }
    }
    d
}

impl GroupGrid {
    /// Grid for `G` with bandlimit `band` and a uniform oversampling factor.
    pub fn quadrature(group: GroupId, band: HalfInt, oversample: f64) -> Result<Self> {
        Self::with_oversample(group, band, Oversample::uniform(oversample))
    }

    pub fn torus(kmax: i64) -> Result<Self> {
        Self::quadrature(GroupId::T1, HalfInt::from_int(kmax), 1.0)
    }

    pub fn su2(lmax: HalfInt) -> Result<Self> {
        Self::quadrature(GroupId::SU2, lmax, 1.0)
    }

    pub fn with_oversample(group: GroupId, band: HalfInt, os: Oversample) -> Result<Self> {
        if band.twice < 0 {
            return Err(Error::Domain(format!("negative bandlimit {band}")));
        }
        if group == GroupId::T1 && !band.is_integer() {
            return Err(Error::Domain(format!("torus bandlimit must be an integer, got {band}")));
        }
        let reps = reps_up_to(group, band);
        let mut offsets = Vec::with_capacity(reps.len());
        let mut ncoef = 0;
        for r in &reps {
            offsets.push(ncoef);
            ncoef += r.dim() * r.dim();
        }
        match group {
            GroupId::T1 => {
                let k = (band.twice / 2) as usize;
                let n = scaled(2 * k + 1, os.psi);
                if n > MAX_GRID_POINTS {
                    return Err(Error::GridTooLarge(format!("{n} torus nodes")));
                }
                let tw: Vec<Complex64> = (-(k as i64)..=k as i64)
                    .flat_map(|j| (0..n).map(move |c| Complex64::from_polar(1.0, -2.0 * PI * (j * c as i64) as f64 / n as f64)))
                    .collect();
                Ok(Self {
                    group,
                    band,
                    axes: GridAxes::Torus { n },
                    reps,
                    offsets,
                    ncoef,
                    dtab: Vec::new(),
                    dmat: diff_matrix(n, 1.0),
                    tw_field: tw,
                    tw_phi: Vec::new(),
                })
            }
            GroupId::SU2 => {
                let b = band.twice as usize;
                let n_phi = scaled(2 * b + 2, os.phi);
                let n_psi = scaled(2 * b + 2, os.psi);
                let mut n_theta = scaled(b + 8, os.theta);
                let total = n_phi.saturating_mul(n_psi).saturating_mul(n_theta);
                if total > MAX_GRID_POINTS {
                    return Err(Error::GridTooLarge(format!("{n_phi}x{n_theta}x{n_psi} SU(2) nodes")));
                }
                let twiddles = |n: usize| -> Vec<Complex64> {
                    (-(b as i64)..=b as i64)
                        .flat_map(|j| (0..n).map(move |c| Complex64::from_polar(1.0, -2.0 * PI * (j * c as i64) as f64 / n as f64)))
                        .collect()
                };
                loop {
                    let (x, w) = gauss_legendre(n_theta);
                    let theta: Vec<f64> = x.iter().map(|x| x.acos()).collect();
                    let theta_w: Vec<f64> = w.iter().map(|w| w / 2.0).collect();
                    let dtab: Vec<Vec<Vec<f64>>> = theta
                        .iter()
                        .map(|&th| (0..=b as i64).map(|t| wigner_d_matrix(t, th)).collect())
                        .collect();
                    if schur_theta_gate(b as i64, &theta_w, &dtab) {
                        return Ok(Self {
                            group,
                            band,
                            axes: GridAxes::SU2 { n_phi, n_theta, n_psi, theta, theta_w },
                            reps,
                            offsets,
                            ncoef,
                            dtab,
                            dmat: diff_matrix(n_psi, 0.5),
                            tw_field: twiddles(n_psi),
                            tw_phi: twiddles(n_phi),
                        });
                    }
                    n_theta *= 2;
                    if n_phi * n_psi * n_theta > MAX_GRID_POINTS {
                        return Err(Error::GridTooLarge("Schur gate did not pass within the cap".into()));
                    }
                }
            }
        }
    }

    pub fn npoints(&self) -> usize {
        match &self.axes {
            GridAxes::Torus { n } => *n,
            GridAxes::SU2 { n_phi, n_theta, n_psi, .. } => n_phi * n_theta * n_psi,
        }
    }

    pub fn reps(&self) -> &[Rep] {
        &self.reps
    }

    pub fn offset(&self, rep_idx: usize) -> usize {
        self.offsets[rep_idx]
    }

    pub fn rep_index(&self, rep: Rep) -> Option<usize> {
        self.reps.iter().position(|r| *r == rep)
    }

    pub fn ncoef(&self) -> usize {
        self.ncoef
    }

    /// Coefficient slot of `(rep, m, n)`.
    pub fn coef_index(&self, rep: Rep, m: HalfInt, n: HalfInt) -> Result<usize> {
        let ri = self.rep_index(rep).ok_or_else(|| Error::Index(format!("{rep} outside the bandlimit")))?;
        let d = rep.dim();
        Ok(self.offsets[ri] + rep.weight_index(m)? * d + rep.weight_index(n)?)
    }

    /// `(rep, row weight, column weight)` for every coefficient slot, in order.
    pub fn coef_labels(&self) -> Vec<(Rep, HalfInt, HalfInt)> {
        let mut out = Vec::with_capacity(self.ncoef);
        for r in &self.reps {
            let w = r.weights();
            for &m in &w {
                for &n in &w {
                    out.push((*r, m, n));
                }
            }
        }
        out
    }

    /// Normalized Haar weight of each node.
    pub fn weights(&self) -> Vec<f64> {
        match &self.axes {
            GridAxes::Torus { n } => vec![1.0 / *n as f64; *n],
            GridAxes::SU2 { n_phi, n_psi, theta_w, .. } => {
                let s = 1.0 / (*n_phi * *n_psi) as f64;
                let mut w = Vec::with_capacity(self.npoints());
                for _ in 0..*n_phi {
                    for tw in theta_w {
                        w.extend(std::iter::repeat_n(tw * s, *n_psi));
                    }
                }
                w
            }
        }
    }

    /// Coordinates of node `i`: `[t, 0, 0]` on the torus, `[φ, θ, ψ]` on SU(2).
    pub fn coords(&self, i: usize) -> [f64; 3] {
        match &self.axes {
            GridAxes::Torus { n } => [2.0 * PI * i as f64 / *n as f64, 0.0, 0.0],
            GridAxes::SU2 { n_phi, n_theta, n_psi, theta, .. } => {
                let c = i % n_psi;
                let b = (i / n_psi) % n_theta;
                let a = i / (n_psi * n_theta);
                [4.0 * PI * a as f64 / *n_phi as f64, theta[b], 4.0 * PI * c as f64 / *n_psi as f64]
            }
        }
    }

    pub fn sample<F: Fn([f64; 3]) -> Complex64 + Sync>(&self, f: F) -> Vec<Complex64> {
        (0..self.npoints()).into_par_iter().map(|i| f(self.coords(i))).collect()
    }

    /// Values of the matrix element `ρ_{mn}` at every node.
    pub fn element_values(&self, rep: Rep, m: HalfInt, n: HalfInt) -> Result<Vec<Complex64>> {
        match rep {
            Rep::Torus { k } => {
                rep.weight_index(m)?;
                rep.weight_index(n)?;
                Ok(self.sample(|x| Complex64::from_polar(1.0, k as f64 * x[0])))
            }
            Rep::SU2 { ell } => {
                super::matrix_element(ell, m, n, 0.0, 0.0, 0.0)?;
                Ok(self.sample(|x| super::matrix_element(ell, m, n, x[0], x[1], x[2]).unwrap()))
            }
        }
    }

    /// Forward transform `f̂(ρ)_{mn} = Σ w f conj(ρ_{nm})`.
    pub fn forward(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(values.len())?;
        match &self.axes {
            GridAxes::Torus { n } => {
                let kmax = (self.band.twice / 2) as usize;
                Ok((0..=2 * kmax)
                    .map(|j| {
                        let tw = &self.tw_field[j * n..(j + 1) * n];
                        values.iter().zip(tw).map(|(v, t)| v * t).sum::<Complex64>() / *n as f64
                    })
                    .collect())
            }
            GridAxes::SU2 { n_phi, n_theta, n_psi, theta_w, .. } => {
                let b = self.band.twice as usize;
                let nf = 2 * b + 1;
                let slices: Vec<Vec<Complex64>> = (0..*n_theta)
                    .into_par_iter()
                    .map(|tb| {
                        // H[a][j] = Σ_c f e^{-i j ψ_c/2}; G[jn][jm] = Σ_a e^{-i jn φ_a/2} H[a][jm]
                        let mut h = vec![Complex64::default(); n_phi * nf];
                        for a in 0..*n_phi {
                            let row = &values[(a * n_theta + tb) * n_psi..][..*n_psi];
                            for j in 0..nf {
                                let tw = &self.tw_field[j * n_psi..(j + 1) * n_psi];
                                h[a * nf + j] = row.iter().zip(tw).map(|(v, t)| v * t).sum();
                            }
                        }
                        let norm = theta_w[tb] / (*n_phi * *n_psi) as f64;
                        let mut g = vec![Complex64::default(); nf * nf];
                        for jn in 0..nf {
                            let tw = &self.tw_phi[jn * n_phi..(jn + 1) * n_phi];
                            for a in 0..*n_phi {
                                let t = tw[a] * norm;
                                for jm in 0..nf {
                                    g[jn * nf + jm] += t * h[a * nf + jm];
                                }
                            }
                        }
                        let mut out = vec![Complex64::default(); self.ncoef];
                        for (ri, rep) in self.reps.iter().enumerate() {
                            let l = rep.dim() as i64 - 1;
                            let d = rep.dim();
                            let dm = &self.dtab[tb][l as usize];
                            for mi in 0..d {
                                let tm = -l + 2 * mi as i64;
                                for ni in 0..d {
                                    let tn = -l + 2 * ni as i64;
                                    let gv = g[(tn + b as i64) as usize * nf + (tm + b as i64) as usize];
                                    out[self.offsets[ri] + mi * d + ni] =
                                        gv * i_pow((tn - tm) / 2) * dm[ni * d + mi];
                                }
                            }
                        }
                        out
                    })
                    .collect();
                let mut acc = vec![Complex64::default(); self.ncoef];
                for s in &slices {
                    for (a, v) in acc.iter_mut().zip(s) {
                        *a += v;
                    }
                }
                Ok(acc)
            }
        }
    }

    /// Synthesis `f(x) = Σ d_ρ Σ_{mn} ρ_{nm}(x) f̂(ρ)_{mn}`.
    pub fn inverse(&self, coefs: &[Complex64]) -> Result<Vec<Complex64>> {
        if coefs.len() != self.ncoef {
            return Err(Error::Shape(format!("expected {} coefficients, got {}", self.ncoef, coefs.len())));
        }
        match &self.axes {
            GridAxes::Torus { n } => {
                let kmax = (self.band.twice / 2) as usize;
                Ok((0..*n)
                    .map(|c| (0..=2 * kmax).map(|j| coefs[j] * self.tw_field[j * n + c].conj()).sum())
                    .collect())
            }
            GridAxes::SU2 { n_phi, n_theta, n_psi, .. } => {
                let b = self.band.twice as usize;
                let nf = 2 * b + 1;
                let mut out = vec![Complex64::default(); self.npoints()];
                let slices: Vec<Vec<Complex64>> = (0..*n_theta)
                    .into_par_iter()
                    .map(|tb| {
                        let mut k = vec![Complex64::default(); nf * nf];
                        for (ri, rep) in self.reps.iter().enumerate() {
                            let d = rep.dim();
                            let l = d as i64 - 1;
                            let dm = &self.dtab[tb][l as usize];
                            for mi in 0..d {
                                let tm = -l + 2 * mi as i64;
                                for ni in 0..d {
                                    let tn = -l + 2 * ni as i64;
                                    k[(tn + b as i64) as usize * nf + (tm + b as i64) as usize] += coefs
                                        [self.offsets[ri] + mi * d + ni]
                                        * (d as f64 * dm[ni * d + mi])
                                        * i_pow((tm - tn) / 2);
                                }
                            }
                        }
                        // P[jn][c] = Σ_jm K e^{i jm ψ_c/2}; f[a][c] = Σ_jn e^{i jn φ_a/2} P[jn][c]
                        let mut p = vec![Complex64::default(); nf * n_psi];
                        for jn in 0..nf {
                            for jm in 0..nf {
                                let kv = k[jn * nf + jm];
                                if kv == Complex64::default() {
                                    continue;
                                }
                                let tw = &self.tw_field[jm * n_psi..(jm + 1) * n_psi];
                                for c in 0..*n_psi {
                                    p[jn * n_psi + c] += kv * tw[c].conj();
                                }
                            }
                        }
                        let mut slice = vec![Complex64::default(); n_phi * n_psi];
                        for a in 0..*n_phi {
                            for jn in 0..nf {
                                let t = self.tw_phi[jn * n_phi + a].conj();
                                for c in 0..*n_psi {
                                    slice[a * n_psi + c] += t * p[jn * n_psi + c];
                                }
                            }
                        }
                        slice
                    })
                    .collect();
                for (tb, slice) in slices.iter().enumerate() {
                    for a in 0..*n_phi {
                        let dst = (a * n_theta + tb) * n_psi;
                        out[dst..dst + n_psi].copy_from_slice(&slice[a * n_psi..(a + 1) * n_psi]);
                    }
                }
                Ok(out)
            }
        }
    }

    /// Spectral derivative along the field coordinate (`t` or `ψ`).
    pub fn apply_field(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        self.apply_field_strided(values, 1)
    }

    /// Field derivative of `stride` interleaved functions: entry `(i, s)` of
    /// node `i` sits at `i * stride + s`.
    pub fn apply_field_strided(&self, values: &[Complex64], stride: usize) -> Result<Vec<Complex64>> {
        if stride == 0 || values.len() != self.npoints() * stride {
            return Err(Error::Shape(format!(
                "expected {} x {stride} values, got {}",
                self.npoints(),
                values.len()
            )));
        }
        let n = self.field_len();
        let block = n * stride;
        let mut out = vec![Complex64::default(); values.len()];
        out.par_chunks_mut(block).zip(values.par_chunks(block)).for_each(|(o, v)| {
            for a in 0..n {
                let dst = &mut o[a * stride..(a + 1) * stride];
                for b in 0..n {
                    let d = self.dmat[a * n + b];
                    if d == 0.0 {
                        continue;
                    }
                    for (x, y) in dst.iter_mut().zip(&v[b * stride..(b + 1) * stride]) {
                        *x += y * d;
                    }
                }
            }
        });
        Ok(out)
    }

    pub fn layout(&self) -> super::FactorLayout {
        super::FactorLayout::new(self.group, self.band)
    }

    /// Number of nodes along the field coordinate (contiguous in memory).
    pub fn field_len(&self) -> usize {
        match &self.axes {
            GridAxes::Torus { n } => *n,
            GridAxes::SU2 { n_psi, .. } => *n_psi,
        }
    }

    /// Weighted `L²` inner product `Σ w f conj(g)`.
    pub fn inner(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        let w = self.weights();
        let terms: Vec<Complex64> = f.iter().zip(g).zip(&w).map(|((a, b), w)| a * b.conj() * w).collect();
        terms.iter().sum()
    }

    /// Numerical symbol `ρ(x)^* (Xρ)(x)` read at node `node`.
    pub fn numeric_symbol(&self, rep: Rep, node: usize) -> Result<Vec<Complex64>> {
        let w = rep.weights();
        let d = w.len();
        let mut vals = Vec::with_capacity(d * d);
        let mut dvals = Vec::with_capacity(d * d);
        for &m in &w {
            for &n in &w {
                let v = self.element_values(rep, m, n)?;
                dvals.push(self.apply_field(&v)?[node]);
                vals.push(v[node]);
            }
        }
        let mut s = vec![Complex64::default(); d * d];
        for i in 0..d {
            for k in 0..d {
                s[i * d + k] = (0..d).map(|j| vals[j * d + i].conj() * dvals[j * d + k]).sum();
            }
        }
        Ok(s)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.npoints() {
            return Err(Error::Shape(format!("expected {} grid values, got {len}", self.npoints())));
        }
        Ok(())
    }
}

/// `Σ_b w_b d^ℓ_{nm}(θ_b) d^{ℓ'}_{nm}(θ_b) = δ_{ℓℓ'}/(2ℓ+1)` for all admissible pairs.
fn schur_theta_gate(b: i64, theta_w: &[f64], dtab: &[Vec<Vec<f64>>]) -> bool {
    for tn in -b..=b {
        for tm in -b..=b {
            if (tn - tm) % 2 != 0 {
                continue;
            }
            let lo = tn.abs().max(tm.abs());
            for l1 in (lo..=b).step_by(2) {
                for l2 in (l1..=b).step_by(2) {
                    let idx = |l: i64| (((tn + l) / 2) * (l + 1) + (tm + l) / 2) as usize;
                    let s: f64 = theta_w
                        .iter()
                        .zip(dtab)
                        .map(|(w, dt)| w * dt[l1 as usize][idx(l1)] * dt[l2 as usize][idx(l2)])
                        .sum();
                    let want = if l1 == l2 { 1.0 / (l1 + 1) as f64 } else { 0.0 };
                    if (s - want).abs() > SCHUR_TOL {
                        return false;
                    }
                }
            }
        }
    }
    true
}
