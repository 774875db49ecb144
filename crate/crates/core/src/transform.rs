//! Full and partial Fourier analysis on `G₁ × G₂` and coefficient-decay
//! fitting against Komatsu weights.
//!
//! Product values are stored `x₁`-major (`i₁·n₂ + i₂`). A [`Spectrum`] is
//! an `ncoef₁ × ncoef₂` array using the per-factor slot layout of
//! [`FactorLayout`]; a [`PartialField`] transformed in `x₂` is an
//! `n₁ × ncoef₂` array.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{wigner_d, FactorLayout, GridAxes, GroupGrid, GroupId, HalfInt, Rep};
use crate::weights::{AssociatedFn, WeightSequence};

/// Relative threshold below which coefficients are ignored by decay fits.
pub const RETENTION_THRESHOLD: f64 = 1e-15;

/// Relative tolerance for "no new maximum in the outer shells".
const BOUNDED_TOL: f64 = 1e-9;

/// Grids on both factors.
#[derive(Clone, Debug)]
pub struct ProductGrid {
    pub g1: GroupGrid,
    pub g2: GroupGrid,
}

impl ProductGrid {
    pub fn new(g1: GroupGrid, g2: GroupGrid) -> Arc<Self> {
        Arc::new(Self { g1, g2 })
    }

    pub fn npoints(&self) -> usize {
        self.g1.npoints() * self.g2.npoints()
    }

    pub fn layout(&self) -> Arc<Layout> {
        Arc::new(Layout { f1: self.g1.layout(), f2: self.g2.layout() })
    }

    /// Sample `f(x₁, x₂)` at every node pair.
    pub fn sample<F: Fn([f64; 3], [f64; 3]) -> Complex64 + Sync>(self: &Arc<Self>, f: F) -> GridFunction {
        let n2 = self.g2.npoints();
        let c2: Vec<[f64; 3]> = (0..n2).map(|i| self.g2.coords(i)).collect();
        let values = (0..self.npoints())
            .into_par_iter()
            .map(|i| f(self.g1.coords(i / n2), c2[i % n2]))
            .collect();
        GridFunction { grid: self.clone(), values }
    }
}

/// Coefficient layout of a product spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub f1: FactorLayout,
    pub f2: FactorLayout,
}

impl Layout {
    pub fn new(g1: GroupId, band1: HalfInt, g2: GroupId, band2: HalfInt) -> Arc<Self> {
        Arc::new(Self { f1: FactorLayout::new(g1, band1), f2: FactorLayout::new(g2, band2) })
    }

    pub fn len(&self) -> usize {
        self.f1.ncoef * self.f2.ncoef
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `⟨ξ⟩ + ⟨η⟩` of slot `idx`.
    pub fn scale(&self, idx: usize) -> f64 {
        let (a, b) = (idx / self.f2.ncoef, idx % self.f2.ncoef);
        self.f1.rep_of(a).bracket() + self.f2.rep_of(b).bracket()
    }
}

/// Values of a function on the product grid.
#[derive(Clone, Debug)]
pub struct GridFunction {
    pub grid: Arc<ProductGrid>,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Arc<ProductGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.npoints() {
            return Err(Error::Shape(format!("expected {} values, got {}", grid.npoints(), values.len())));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Domain(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: &Arc<ProductGrid>, c: Complex64) -> Self {
        Self { grid: grid.clone(), values: vec![c; grid.npoints()] }
    }

    /// Weighted `L²` norm on the grid.
    pub fn norm(&self) -> f64 {
        let (w1, w2) = (self.grid.g1.weights(), self.grid.g2.weights());
        let n2 = w2.len();
        let s: f64 = self
            .values
            .par_chunks(n2)
            .zip(w1.par_iter())
            .map(|(row, a)| a * row.iter().zip(&w2).map(|(v, b)| b * v.norm_sqr()).sum::<f64>())
            .collect::<Vec<_>>()
            .iter()
            .sum();
        s.sqrt()
    }

    pub fn zip_with(&self, o: &GridFunction, f: impl Fn(Complex64, Complex64) -> Complex64 + Sync) -> Result<Self> {
        same_grid(&self.grid, &o.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.par_iter().zip(&o.values).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64 + Sync) -> Self {
        Self { grid: self.grid.clone(), values: self.values.par_iter().map(|v| f(*v)).collect() }
    }

    /// `X₁` applied along `x₁`.
    pub fn apply_x1(&self) -> Result<Self> {
        let v = self.grid.g1.apply_field_strided(&self.values, self.grid.g2.npoints())?;
        Ok(Self { grid: self.grid.clone(), values: v })
    }

    /// `X₂` applied along `x₂`.
    pub fn apply_x2(&self) -> Result<Self> {
        let n2 = self.grid.g2.npoints();
        let rows: Vec<Vec<Complex64>> = self
            .values
            .par_chunks(n2)
            .map(|row| self.grid.g2.apply_field(row))
            .collect::<Result<_>>()?;
        Ok(Self { grid: self.grid.clone(), values: rows.concat() })
    }
}

pub(crate) fn same_grid(a: &Arc<ProductGrid>, b: &Arc<ProductGrid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || (a.g1.npoints() == b.g1.npoints() && a.g2.npoints() == b.g2.npoints() && a.g1.band == b.g1.band && a.g2.band == b.g2.band) {
        Ok(())
    } else {
        Err(Error::Shape("functions live on different grids".into()))
    }
}

/// Which variable a partial transform is taken in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variable {
    First,
    Second,
}

/// Mixed representation: one variable on its grid, the other spectral.
#[derive(Clone, Debug)]
pub struct PartialField {
    pub grid: Arc<ProductGrid>,
    pub wrt: Variable,
    /// `wrt = Second`: `n₁ × ncoef₂`; `wrt = First`: `ncoef₁ × n₂`.
    pub values: Vec<Complex64>,
}

impl PartialField {
    /// Norm `(Σ_{x₁} w₁ Σ_η d_η Σ_{rs} |v|²)^{1/2}` (or the mirrored form).
    pub fn norm(&self) -> f64 {
        let (gp, gs) = match self.wrt {
            Variable::Second => (&self.grid.g1, &self.grid.g2),
            Variable::First => (&self.grid.g2, &self.grid.g1),
        };
        let lay = gs.layout();
        let dims: Vec<f64> = lay.slots.iter().map(|s| lay.reps[s.0].dim() as f64).collect();
        let w = gp.weights();
        let s: f64 = match self.wrt {
            Variable::Second => self
                .values
                .chunks(lay.ncoef)
                .zip(&w)
                .map(|(row, w)| w * row.iter().zip(&dims).map(|(v, d)| d * v.norm_sqr()).sum::<f64>())
                .sum(),
            Variable::First => self
                .values
                .chunks(w.len())
                .zip(&dims)
                .map(|(row, d)| d * row.iter().zip(&w).map(|(v, w)| w * v.norm_sqr()).sum::<f64>())
                .sum(),
        };
        s.sqrt()
    }

    /// `X₁` along the grid variable (`wrt = Second` only).
    pub fn apply_x1(&self) -> Result<Self> {
        if self.wrt != Variable::Second {
            return Err(Error::Shape("X₁ on a field transformed in x₁".into()));
        }
        let v = self.grid.g1.apply_field_strided(&self.values, self.grid.g2.ncoef())?;
        Ok(Self { grid: self.grid.clone(), wrt: self.wrt, values: v })
    }
}

/// Full double Fourier coefficients.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub layout: Arc<Layout>,
    pub coefs: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(layout: Arc<Layout>) -> Self {
        let n = layout.len();
        Self { layout, coefs: vec![Complex64::default(); n] }
    }

    /// Slot of `(ξ, η, m, n, r, s)`.
    pub fn index(&self, xi: Rep, eta: Rep, m: HalfInt, n: HalfInt, r: HalfInt, s: HalfInt) -> Result<usize> {
        let a = self.layout.f1.coef_index(xi, m, n)?;
        let b = self.layout.f2.coef_index(eta, r, s)?;
        Ok(a * self.layout.f2.ncoef + b)
    }

    pub fn get(&self, xi: Rep, eta: Rep, m: HalfInt, n: HalfInt, r: HalfInt, s: HalfInt) -> Result<Complex64> {
        Ok(self.coefs[self.index(xi, eta, m, n, r, s)?])
    }

    pub fn set(&mut self, xi: Rep, eta: Rep, m: HalfInt, n: HalfInt, r: HalfInt, s: HalfInt, v: Complex64) -> Result<()> {
        let i = self.index(xi, eta, m, n, r, s)?;
        self.coefs[i] = v;
        Ok(())
    }

    /// Build a spectrum from a rule on labels `(ξ, η, m, n, r, s)`.
    pub fn from_fn<F>(layout: Arc<Layout>, f: F) -> Self
    where
        F: Fn(Rep, Rep, HalfInt, HalfInt, HalfInt, HalfInt) -> Complex64 + Sync,
    {
        let n2 = layout.f2.ncoef;
        let coefs = (0..layout.len())
            .into_par_iter()
            .map(|i| {
                let (a, b) = (&layout.f1.slots[i / n2], &layout.f2.slots[i % n2]);
                f(layout.f1.reps[a.0], layout.f2.reps[b.0], a.1, a.2, b.1, b.2)
            })
            .collect();
        Self { layout, coefs }
    }

    /// Per-(ξ,η) block: largest modulus and scale `⟨ξ⟩+⟨η⟩`.
    pub fn block_maxima(&self) -> Vec<(f64, f64)> {
        let (l1, l2) = (&self.layout.f1, &self.layout.f2);
        let mut out = Vec::with_capacity(l1.reps.len() * l2.reps.len());
        for (i1, r1) in l1.reps.iter().enumerate() {
            for (i2, r2) in l2.reps.iter().enumerate() {
                let (d1, d2) = (r1.dim(), r2.dim());
                let mut mx: f64 = 0.0;
                for a in l1.offsets[i1]..l1.offsets[i1] + d1 * d1 {
                    let row = &self.coefs[a * l2.ncoef..];
                    for c in &row[l2.offsets[i2]..l2.offsets[i2] + d2 * d2] {
                        mx = mx.max(c.norm());
                    }
                }
                out.push((r1.bracket() + r2.bracket(), mx));
            }
        }
        out
    }

    /// CSV with columns `g1,key1,g2,key2,m,n,r,s,re,im` (`key` is `k` or `2ℓ`).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("g1,key1,g2,key2,m,n,r,s,re,im\n");
        let n2 = self.layout.f2.ncoef;
        for (i, c) in self.coefs.iter().enumerate() {
            let (a, b) = (&self.layout.f1.slots[i / n2], &self.layout.f2.slots[i % n2]);
            let (x, e) = (self.layout.f1.reps[a.0], self.layout.f2.reps[b.0]);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{:e},{:e}",
                x.group().name(),
                rep_key(x),
                e.group().name(),
                rep_key(e),
                a.1.as_f64(),
                a.2.as_f64(),
                b.1.as_f64(),
                b.2.as_f64(),
                c.re,
                c.im
            );
        }
        out
    }

    /// JSON layout: reps as `["T1", k]` / `["SU2", 2ℓ]`, values as `[re, im]`.
    pub fn to_json(&self) -> serde_json::Value {
        let n2 = self.layout.f2.ncoef;
        let entries: Vec<_> = self
            .coefs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(i, c)| {
                let (a, b) = (&self.layout.f1.slots[i / n2], &self.layout.f2.slots[i % n2]);
                serde_json::json!({
                    "xi": self.layout.f1.reps[a.0],
                    "eta": self.layout.f2.reps[b.0],
                    "m": a.1, "n": a.2, "r": b.1, "s": b.2,
                    "value": [c.re, c.im],
                })
            })
            .collect();
        serde_json::json!({
            "groups": [self.layout.f1.group, self.layout.f2.group],
            "bands": [self.layout.f1.band, self.layout.f2.band],
            "entries": entries,
        })
    }
}

fn rep_key(r: Rep) -> i64 {
    match r {
        Rep::Torus { k } => k,
        Rep::SU2 { ell } => ell.twice,
    }
}

/// `\doublehat{f}(ξ,η)_{mn,rs} = Σ w₁w₂ f conj(ξ_{nm}) conj(η_{sr})`.
pub fn forward_full(f: &GridFunction) -> Result<Spectrum> {
    let pf = forward_partial(f, Variable::Second)?;
    partial_to_full(&pf)
}

/// Partial transform in one variable.
pub fn forward_partial(f: &GridFunction, wrt: Variable) -> Result<PartialField> {
    let g = &f.grid;
    let (n1, n2) = (g.g1.npoints(), g.g2.npoints());
    if f.values.len() != n1 * n2 {
        return Err(Error::Shape("grid function does not match its grid".into()));
    }
    let values = match wrt {
        Variable::Second => f
            .values
            .par_chunks(n2)
            .map(|row| g.g2.forward(row))
            .collect::<Result<Vec<_>>>()?
            .concat(),
        Variable::First => {
            let cols: Vec<Vec<Complex64>> = (0..n2)
                .into_par_iter()
                .map(|j| g.g1.forward(&(0..n1).map(|i| f.values[i * n2 + j]).collect::<Vec<_>>()))
                .collect::<Result<_>>()?;
            transpose(&cols, g.g1.ncoef())
        }
    };
    Ok(PartialField { grid: g.clone(), wrt, values })
}

fn transpose(cols: &[Vec<Complex64>], rows: usize) -> Vec<Complex64> {
    let nc = cols.len();
    let mut out = vec![Complex64::default(); rows * nc];
    for (j, c) in cols.iter().enumerate() {
        for (i, v) in c.iter().enumerate() {
            out[i * nc + j] = *v;
        }
    }
    out
}

/// Complete a partial transform to the full spectrum.
pub fn partial_to_full(pf: &PartialField) -> Result<Spectrum> {
    let g = &pf.grid;
    let (n1, n2, c1, c2) = (g.g1.npoints(), g.g2.npoints(), g.g1.ncoef(), g.g2.ncoef());
    let coefs = match pf.wrt {
        Variable::Second => {
            let cols: Vec<Vec<Complex64>> = (0..c2)
                .into_par_iter()
                .map(|j| g.g1.forward(&(0..n1).map(|i| pf.values[i * c2 + j]).collect::<Vec<_>>()))
                .collect::<Result<_>>()?;
            transpose(&cols, c1)
        }
        Variable::First => pf
            .values
            .par_chunks(n2)
            .map(|row| g.g2.forward(row))
            .collect::<Result<Vec<_>>>()?
            .concat(),
    };
    Ok(Spectrum { layout: g.layout(), coefs })
}

/// Inverse of [`forward_partial`] with `wrt = Second`.
pub fn partial_inverse(pf: &PartialField) -> Result<GridFunction> {
    let g = &pf.grid;
    let c2 = g.g2.ncoef();
    match pf.wrt {
        Variable::Second => {
            let rows: Vec<Vec<Complex64>> =
                pf.values.par_chunks(c2).map(|row| g.g2.inverse(row)).collect::<Result<_>>()?;
            Ok(GridFunction { grid: g.clone(), values: rows.concat() })
        }
        Variable::First => {
            let n2 = g.g2.npoints();
            let cols: Vec<Vec<Complex64>> = (0..n2)
                .into_par_iter()
                .map(|j| g.g1.inverse(&(0..g.g1.ncoef()).map(|i| pf.values[i * n2 + j]).collect::<Vec<_>>()))
                .collect::<Result<_>>()?;
            Ok(GridFunction { grid: g.clone(), values: transpose(&cols, g.g1.npoints()) })
        }
    }
}

/// `x₂`-partial field of a spectrum (inverse transform in `x₁` only).
pub fn spectrum_to_partial(spec: &Spectrum, grid: &Arc<ProductGrid>) -> Result<PartialField> {
    check_layout(spec, grid)?;
    let (c1, c2) = (grid.g1.ncoef(), grid.g2.ncoef());
    let cols: Vec<Vec<Complex64>> = (0..c2)
        .into_par_iter()
        .map(|j| grid.g1.inverse(&(0..c1).map(|i| spec.coefs[i * c2 + j]).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    Ok(PartialField { grid: grid.clone(), wrt: Variable::Second, values: transpose(&cols, grid.g1.npoints()) })
}

fn check_layout(spec: &Spectrum, grid: &ProductGrid) -> Result<()> {
    let l = &spec.layout;
    if l.f1.group != grid.g1.group || l.f2.group != grid.g2.group || l.f1.band != grid.g1.band || l.f2.band != grid.g2.band {
        return Err(Error::Shape(format!(
            "spectrum bands ({}, {}) do not match grid bands ({}, {})",
            l.f1.band, l.f2.band, grid.g1.band, grid.g2.band
        )));
    }
    Ok(())
}

/// Synthesis `f(x₁,x₂) = Σ d_ξ d_η Tr(...)` in both variables.
pub fn inverse(spec: &Spectrum, grid: &Arc<ProductGrid>) -> Result<GridFunction> {
    let pf = spectrum_to_partial(spec, grid)?;
    partial_inverse(&pf)
}

/// Tensor-product indices `i = d_η(m-1)+r`, `j = d_η(n-1)+s` (1-based).
pub fn index_flatten(m: usize, n: usize, r: usize, s: usize, d_xi: usize, d_eta: usize) -> Result<(usize, usize)> {
    let ok = |x: usize, d: usize| (1..=d).contains(&x);
    if !(ok(m, d_xi) && ok(n, d_xi) && ok(r, d_eta) && ok(s, d_eta)) {
        return Err(Error::Index(format!(
            "(m,n,r,s) = ({m},{n},{r},{s}) outside 1..{d_xi} x 1..{d_eta}"
        )));
    }
    Ok((d_eta * (m - 1) + r, d_eta * (n - 1) + s))
}

/// `(Σ d_ξ d_η Σ |coef|²)^{1/2}`.
pub fn plancherel_norm(spec: &Spectrum) -> f64 {
    let (l1, l2) = (&spec.layout.f1, &spec.layout.f2);
    let d2: Vec<f64> = l2.slots.iter().map(|s| l2.reps[s.0].dim() as f64).collect();
    let s: f64 = spec
        .coefs
        .par_chunks(l2.ncoef)
        .enumerate()
        .map(|(a, row)| {
            let d1 = l1.reps[l1.slots[a].0].dim() as f64;
            d1 * row.iter().zip(&d2).map(|(c, d)| d * c.norm_sqr()).sum::<f64>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    s.sqrt()
}

/// Coefficient-growth characterization being tested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassMode {
    RoumieuFunction,
    BeurlingFunction,
    RoumieuDistribution,
    BeurlingDistribution,
}

impl ClassMode {
    fn is_function(self) -> bool {
        matches!(self, ClassMode::RoumieuFunction | ClassMode::BeurlingFunction)
    }

    /// Whether the characterization quantifies "for every N".
    fn for_all_n(self) -> bool {
        matches!(self, ClassMode::BeurlingFunction | ClassMode::RoumieuDistribution)
    }
}

/// Fitted constants for one `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassFit {
    pub n: f64,
    /// `ln C*(N)` at each nested cutoff.
    pub log_c_star: Vec<f64>,
    pub bounded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub mode: ClassMode,
    pub weight: WeightSequence,
    /// Nested cutoffs on `⟨ξ⟩ + ⟨η⟩`.
    pub cutoffs: Vec<f64>,
    pub fits: Vec<ClassFit>,
    /// Boundary between bounded and unbounded `N` (by bisection), if bracketed.
    pub critical_n: Option<f64>,
    /// For Gevrey order `s`: `s·N*^{1/s}`, the rate `c` in `exp(±c·scale^{1/s})`.
    pub equivalent_rate: Option<f64>,
    pub consistent: bool,
    pub verdict: String,
}

fn log_c_star(blocks: &[(f64, f64)], m: &AssociatedFn, n: f64, sign: f64, cutoffs: &[f64]) -> Vec<f64> {
    cutoffs
        .iter()
        .map(|&r| {
            blocks
                .iter()
                .filter(|b| b.0 <= r + 1e-12)
                .map(|b| b.1.ln() + sign * m.eval(n * b.0))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

fn is_bounded(logs: &[f64]) -> bool {
    match logs {
        [.., a, b] if a.is_infinite() => b.is_infinite(),
        [.., a, b] => *b <= *a + BOUNDED_TOL * (1.0 + a.abs()),
        _ => true,
    }
}

/// Fit `C*(N) = max |coef| exp(±M(N(⟨ξ⟩+⟨η⟩)))` over nested cutoffs and
/// classify. Verdicts hold at truncation only.
///
/// Default cutoffs sit at `{¼, ½, 1}` of the way across the retained scales.
pub fn decay_classify(
    spec: &Spectrum,
    w: &WeightSequence,
    n_grid: &[f64],
    mode: ClassMode,
    cutoffs: Option<&[f64]>,
) -> Result<ClassReport> {
    let all = spec.block_maxima();
    let top = all.iter().map(|b| b.1).fold(0.0, f64::max);
    let blocks: Vec<(f64, f64)> =
        all.into_iter().filter(|b| b.1 > RETENTION_THRESHOLD * top && b.1 > 0.0).collect();
    // windows span the retained support, so fast decay still gets nested cutoffs
    let smin = blocks.iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
    let smax = blocks.iter().map(|b| b.0).fold(0.0, f64::max);
    let cutoffs: Vec<f64> = match cutoffs {
        Some(c) if !c.is_empty() => c.to_vec(),
        _ if blocks.is_empty() => vec![1.0],
        _ => [0.25, 0.5, 1.0].iter().map(|f| smin + f * (smax - smin)).collect(),
    };
    decay_classify_blocks(&blocks, w, n_grid, mode, &cutoffs)
}

/// Classifier on block data `(⟨ξ⟩+⟨η⟩, max |coef| in the block)`.
pub fn decay_classify_blocks(
    blocks: &[(f64, f64)],
    w: &WeightSequence,
    n_grid: &[f64],
    mode: ClassMode,
    cutoffs: &[f64],
) -> Result<ClassReport> {
    if n_grid.is_empty() {
        return Err(Error::Domain("empty N grid".into()));
    }
    if let Some(n) = n_grid.iter().find(|n| !(n.is_finite() && **n > 0.0)) {
        return Err(Error::Domain(format!("N must be positive, got {n}")));
    }
    if blocks.is_empty() || cutoffs.is_empty() {
        return Err(Error::Domain("no retained coefficients or no cutoffs".into()));
    }
    let cutoffs = cutoffs.to_vec();
    let smax = blocks.iter().map(|b| b.0).fold(0.0, f64::max);
    let m = w.associated_fn();
    // table-backed weights must reach the largest argument
    let nmax = n_grid.iter().cloned().fold(0.0, f64::max);
    if m.try_eval(nmax * smax).is_none() {
        return Err(Error::NoConvergence(format!("weight table too short for M({})", nmax * smax)));
    }
    let sign = if mode.is_function() { 1.0 } else { -1.0 };
    let bounded_at = |n: f64| is_bounded(&log_c_star(blocks, &m, n, sign, &cutoffs));
    let fits: Vec<ClassFit> = n_grid
        .iter()
        .map(|&n| {
            let log_c_star = log_c_star(blocks, &m, n, sign, &cutoffs);
            ClassFit { n, bounded: is_bounded(&log_c_star), log_c_star }
        })
        .collect();

    // function modes: bounded for small N; distribution modes: bounded for large N
    let critical_n = {
        let (mut lo, mut hi) = (1e-6f64, 1e6f64);
        let good_low = mode.is_function();
        let ok_lo = bounded_at(lo);
        let ok_hi = bounded_at(hi);
        if ok_lo == good_low && ok_hi != good_low {
            for _ in 0..80 {
                let mid = (lo * hi).sqrt();
                if bounded_at(mid) == good_low {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some((lo * hi).sqrt())
        } else {
            None
        }
    };
    let equivalent_rate = match (critical_n, w.gevrey_order()) {
        (Some(n), Some(s)) => Some(s * n.powf(1.0 / s)),
        _ => None,
    };
    let consistent = if mode.for_all_n() {
        fits.iter().all(|f| f.bounded)
    } else {
        fits.iter().any(|f| f.bounded)
    };
    let quant = if mode.for_all_n() { "every" } else { "some" };
    let verdict = format!(
        "{} at truncation: C*(N) {} for {quant} N in the grid across cutoffs {:?}",
        if consistent { "consistent" } else { "not consistent" },
        if consistent { "stays bounded" } else { "grows" },
        cutoffs
    );
    Ok(ClassReport {
        mode,
        weight: w.clone(),
        cutoffs,
        fits,
        critical_n,
        equivalent_rate,
        consistent,
        verdict,
    })
}

/// Fit table of the partial-coefficient characterization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialDecayFit {
    pub alpha_max: usize,
    pub h_grid: Vec<f64>,
    pub eps_grid: Vec<f64>,
    /// `ln C(h, ε)`, indexed `[h][ε]`, over all retained `η`.
    pub log_c: Vec<Vec<f64>>,
    /// Same fit restricted to the lower half of the `η` band.
    pub log_c_inner: Vec<Vec<f64>>,
    /// `C(h, ε)` did not grow when the outer half of the band was added.
    pub stable: Vec<Vec<bool>>,
    /// Largest `ε` with a stable fit for some `h`.
    pub best_eps: Option<f64>,
    pub note: String,
}

/// Derivative multi-indices on `G₁` of total order `<= alpha_max`.
fn multi_indices(group: GroupId, alpha_max: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    match group {
        GroupId::T1 => (0..=alpha_max).for_each(|a| out.push([0, 0, a])),
        GroupId::SU2 => {
            for a in 0..=alpha_max {
                for b in 0..=alpha_max - a {
                    for c in 0..=alpha_max - a - b {
                        out.push([a, b, c]);
                    }
                }
            }
        }
    }
    out
}

/// Fourier coefficients of `θ ↦ d^ℓ_{mn}(θ)` in `e^{ijθ/2}`, `j = -2ℓ..2ℓ`.
fn half_angle_series(twice_l: i64, tm: i64, tn: i64) -> Vec<Complex64> {
    let k = 2 * twice_l + 1;
    let samples: Vec<f64> = (0..k)
        .map(|q| wigner_d(twice_l, tm, tn, 4.0 * std::f64::consts::PI * q as f64 / k as f64).unwrap())
        .collect();
    (-twice_l..=twice_l)
        .map(|j| {
            samples
                .iter()
                .enumerate()
                .map(|(q, v)| v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * q as i64) as f64 / k as f64))
                .sum::<Complex64>()
                / k as f64
        })
        .collect()
}

/// `∂^α` of every `G₁` basis function at every node, for every multi-index.
/// Result indexed `[alpha][slot][node]`.
fn basis_derivatives(g1: &GroupGrid, alphas: &[[usize; 3]]) -> Vec<Vec<Vec<Complex64>>> {
    let lay = g1.layout();
    let coords: Vec<[f64; 3]> = (0..g1.npoints()).map(|i| g1.coords(i)).collect();
    alphas
        .par_iter()
        .map(|al| {
            lay.slots
                .iter()
                .map(|&(ri, m, n)| {
                    let rep = lay.reps[ri];
                    match rep {
                        Rep::Torus { k } => {
                            let f = Complex64::new(0.0, k as f64).powu(al[2] as u32);
                            coords.iter().map(|x| f * Complex64::from_polar(1.0, k as f64 * x[0])).collect()
                        }
                        Rep::SU2 { ell } => {
                            // basis element in the synthesis is ρ_{nm}: φ-weight n, ψ-weight m
                            let series = half_angle_series(ell.twice, n.twice, m.twice);
                            let pre = Complex64::new(0.0, n.as_f64()).powu(al[0] as u32)
                                * Complex64::new(0.0, m.as_f64()).powu(al[2] as u32)
                                * crate::harmonic::i_pow((m.twice - n.twice) / 2);
                            coords
                                .iter()
                                .map(|x| {
                                    let dth: Complex64 = series
                                        .iter()
                                        .enumerate()
                                        .map(|(q, c)| {
                                            let j = q as i64 - ell.twice;
                                            c * Complex64::new(0.0, j as f64 / 2.0).powu(al[1] as u32)
                                                * Complex64::from_polar(1.0, j as f64 * x[1] / 2.0)
                                        })
                                        .sum();
                                    pre * dth * Complex64::from_polar(1.0, n.as_f64() * x[0] + m.as_f64() * x[2])
                                })
                                .collect()
                        }
                    }
                })
                .collect()
        })
        .collect()
}

/// Fit `max_{x₁} |∂^α f̂(x₁,η)_{rs}| <= C h^{|α|} M_{|α|} exp(-M(ε⟨η⟩))`.
///
/// Derivatives are coordinate derivatives on `G₁` (`∂_t`, or `∂_φ^a ∂_θ^b ∂_ψ^c`),
/// taken exactly on the band-limited `x₁`-expansion; the `θ` derivative uses
/// the half-angle Fourier series of `d^ℓ`. `alpha_max` is a budget, not the
/// theorem's "all orders".
pub fn partial_decay_check_field(
    pf: &PartialField,
    w: &WeightSequence,
    alpha_max: usize,
    eps_grid: &[f64],
    h_grid: &[f64],
) -> Result<PartialDecayFit> {
    if pf.wrt != Variable::Second {
        return Err(Error::Shape("partial decay check needs a field transformed in x₂".into()));
    }
    if eps_grid.is_empty() || h_grid.is_empty() {
        return Err(Error::Domain("empty h or ε grid".into()));
    }
    let g = &pf.grid;
    let freq = match &g.g1.axes {
        GridAxes::Torus { .. } => g.g1.band.as_f64(),
        GridAxes::SU2 { .. } => g.g1.band.as_f64().max(0.5),
    };
    if (2.0 * freq + 1.0).powi(alpha_max as i32) > 1e12 {
        return Err(Error::Resolution(format!(
            "order {alpha_max} derivatives at bandlimit {} exceed double precision",
            g.g1.band
        )));
    }
    let full = partial_to_full(pf)?;
    let alphas = multi_indices(g.g1.group, alpha_max);
    let basis = basis_derivatives(&g.g1, &alphas);
    let (l1, l2) = (g.g1.layout(), g.g2.layout());
    let (c1, c2, n1) = (l1.ncoef, l2.ncoef, g.g1.npoints());
    let d1: Vec<f64> = l1.slots.iter().map(|s| l1.reps[s.0].dim() as f64).collect();
    // D[α][η-rep] = max over x₁, r, s of |∂^α û(x₁, η)_{rs}|
    let dmax: Vec<Vec<f64>> = basis
        .par_iter()
        .map(|bas| {
            let mut per_rep = vec![0.0f64; l2.reps.len()];
            for j in 0..c2 {
                let eta = l2.slots[j].0;
                for x in 0..n1 {
                    let mut v = Complex64::default();
                    for i in 0..c1 {
                        let c = full.coefs[i * c2 + j];
                        if c != Complex64::default() {
                            v += c * d1[i] * bas[i][x];
                        }
                    }
                    per_rep[eta] = per_rep[eta].max(v.norm());
                }
            }
            per_rep
        })
        .collect();
    let top = dmax.iter().flatten().cloned().fold(0.0, f64::max);
    let m = w.associated_fn();
    let brackets: Vec<f64> = l2.reps.iter().map(|r| r.bracket()).collect();
    let mut sorted = brackets.clone();
    sorted.sort_by(f64::total_cmp);
    let (bmax, binner) = (sorted[sorted.len() - 1], sorted[(sorted.len() - 1) / 2]);
    let fit = |h: f64, eps: f64, limit: f64| -> Result<f64> {
        let mut best = f64::NEG_INFINITY;
        for (ai, al) in alphas.iter().enumerate() {
            let order = al.iter().sum::<usize>();
            let base = order as f64 * h.ln() + w.log_value(order)?;
            for (e, &b) in brackets.iter().enumerate() {
                let v = dmax[ai][e];
                if b > limit + 1e-12 || v <= RETENTION_THRESHOLD * top || v == 0.0 {
                    continue;
                }
                best = best.max(v.ln() - base + m.eval(eps * b));
            }
        }
        Ok(best)
    };
    let mut log_c = Vec::new();
    let mut log_c_inner = Vec::new();
    let mut stable = Vec::new();
    for &h in h_grid {
        let (mut a, mut b, mut s) = (Vec::new(), Vec::new(), Vec::new());
        for &eps in eps_grid {
            let outer = fit(h, eps, bmax)?;
            let inner = fit(h, eps, binner)?;
            s.push(outer <= inner + BOUNDED_TOL * (1.0 + inner.abs()) || outer.is_infinite());
            a.push(outer);
            b.push(inner);
        }
        log_c.push(a);
        log_c_inner.push(b);
        stable.push(s);
    }
    let best_eps = eps_grid
        .iter()
        .enumerate()
        .filter(|(e, _)| stable.iter().any(|row| row[*e]))
        .map(|(_, &eps)| eps)
        .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.max(e))));
    Ok(PartialDecayFit {
        alpha_max,
        h_grid: h_grid.to_vec(),
        eps_grid: eps_grid.to_vec(),
        log_c,
        log_c_inner,
        stable,
        best_eps,
        note: format!("derivatives up to total order {alpha_max}; fits hold at truncation only"),
    })
}

/// [`partial_decay_check_field`] on a grid function.
pub fn partial_decay_check(
    f: &GridFunction,
    w: &WeightSequence,
    alpha_max: usize,
    eps_grid: &[f64],
    h_grid: &[f64],
) -> Result<PartialDecayFit> {
    partial_decay_check_field(&forward_partial(f, Variable::Second)?, w, alpha_max, eps_grid, h_grid)
}
