//! Conjugation of `L_{aq} = X₁ + a(x₁)X₂ + q(x₁,x₂)` to the constant-coefficient
//! form `L_{a₀q₀}`.
//!
//! With `X₁A = a − a₀` and `(X₁ + aX₂)Q = q − q₀`,
//! `Ψ_a ∘ e^Q ∘ L_{aq} = L_{a₀q₀} ∘ Ψ_a ∘ e^Q`, where `Ψ_a` multiplies the
//! `x₂`-coefficient in row `r` by `e^{i r A(x₁)}`.

mod expr;
mod spec_file;

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::diophantine::{AlphaLinear, DivisorProblem, ResonanceTest, Scalar};
use crate::error::{Error, Result};
use crate::harmonic::{GroupGrid, GroupId, HalfInt, Oversample, Rep};
use crate::transform::{
    forward_full, forward_partial, partial_inverse, partial_to_full, spectrum_to_partial, GridFunction, Layout,
    PartialField, ProductGrid, Spectrum, Variable,
};

pub use expr::{alpha_convergent, embed, mean_index, trivial_slot, Atom, ExactCoef, Expr, Field, Term};
pub use spec_file::{LoadNotes, Samples, SpecFile, SPEC_SCHEMA};

/// Relative size below which a `λ = 0` coefficient of `a` counts as zero.
pub const PRIMITIVE_TOL: f64 = 1e-10;
/// Relative size below which a resonant coefficient of `q − q₀` counts as zero.
pub const RESONANCE_TOL: f64 = 1e-9;
/// Convergent of `α` used for floating-point evaluation.
pub const DEFAULT_CONVERGENT: usize = 2;

/// Cap on the nodes of a product grid built from a [`GridPlan`].
pub const MAX_PRODUCT_POINTS: usize = 8_000_000;

/// Bands and oversampling of a product grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridPlan {
    pub band1: HalfInt,
    pub os1: Oversample,
    pub band2: HalfInt,
    pub os2: Oversample,
}

impl GridPlan {
    pub fn new(band1: HalfInt, band2: HalfInt) -> Self {
        Self { band1, os1: Oversample::default(), band2, os2: Oversample::default() }
    }

    pub fn with_oversample(mut self, os1: Oversample, os2: Oversample) -> Self {
        self.os1 = os1;
        self.os2 = os2;
        self
    }

    pub fn build(&self, g1: GroupId, g2: GroupId) -> Result<Arc<ProductGrid>> {
        let (a, b) = (
            GroupGrid::with_oversample(g1, self.band1, self.os1)?,
            GroupGrid::with_oversample(g2, self.band2, self.os2)?,
        );
        let n = a.npoints().saturating_mul(b.npoints());
        if n > MAX_PRODUCT_POINTS {
            return Err(Error::GridTooLarge(format!(
                "{} x {} = {n} product nodes (cap {MAX_PRODUCT_POINTS})",
                a.npoints(),
                b.npoints()
            )));
        }
        Ok(ProductGrid::new(a, b))
    }

    /// Defaults resolving `e^{i r A}` for moderate `A`.
    pub fn default_for(g1: GroupId, g2: GroupId) -> Self {
        let b1 = match g1 {
            GroupId::T1 => HalfInt::from_int(32),
            GroupId::SU2 => HalfInt::from_int(4),
        };
        let os1 = match g1 {
            GroupId::T1 => Oversample::default(),
            GroupId::SU2 => Oversample { phi: 1.0, theta: 1.0, psi: 5.0 },
        };
        let b2 = match g2 {
            GroupId::T1 => HalfInt::from_int(8),
            GroupId::SU2 => HalfInt::from_int(2),
        };
        Self { band1: b1, os1, band2: b2, os2: Oversample::default() }
    }
}

fn slot_label(rep: Rep, m: HalfInt, n: HalfInt) -> String {
    format!("{rep}[{m},{n}]")
}

/// Real coefficient `a(x₁)` with its mean and, once known, a primitive `A`.
#[derive(Clone, Debug)]
pub struct CoefficientFunction {
    pub group: GroupId,
    pub field: Field,
    pub a0: Scalar,
    pub primitive: Option<Field>,
}

impl CoefficientFunction {
    /// Symbolic coefficient; `a₀` is the exact constant part.
    pub fn from_expr(group: GroupId, expr: Expr) -> Result<Self> {
        if expr.terms.iter().any(|t| t.x2 != Atom::Const) {
            return Err(Error::Domain("a must depend on x1 only".into()));
        }
        let (re, im) = expr.mean();
        if !im.is_zero() {
            return Err(Error::Domain(format!("a must be real-valued, mean has imaginary part {im}")));
        }
        Ok(Self { group, field: Field::Expr(expr), a0: Scalar::Exact(re), primitive: None })
    }

    /// Sampled coefficient on a `G₁` grid; `a₀` is a float.
    pub fn from_samples(grid: &GroupGrid, values: &[Complex64], group2: GroupId) -> Result<Self> {
        if values.len() != grid.npoints() {
            return Err(Error::Shape(format!("expected {} samples, got {}", grid.npoints(), values.len())));
        }
        let coefs = grid.forward(values)?;
        let layout = Layout::new(grid.group, grid.band, group2, HalfInt::ZERO);
        let a0 = coefs[trivial_slot(&grid.layout())];
        Ok(Self {
            group: grid.group,
            field: Field::Spectral(Spectrum { layout, coefs }),
            a0: Scalar::Float(a0.re),
            primitive: None,
        })
    }

    pub fn with_primitive(mut self, a: Field) -> Self {
        self.primitive = Some(a);
        self
    }

    pub fn a0_f64(&self, alpha: f64) -> f64 {
        self.a0.to_f64_with(alpha)
    }

    /// Fails unless the samples on `grid` are real to `1e-12`.
    pub fn check_real(&self, grid: &GroupGrid, alpha: f64) -> Result<()> {
        let v = self.field.sample_x1(grid, alpha)?;
        let scale = v.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let worst = v.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if worst > 1e-12 * scale {
            return Err(Error::Domain(format!("a is not real-valued (max |Im a| = {worst:.3e})")));
        }
        Ok(())
    }
}

/// Primitive `A` of `a − a₀` with zero mean, solved mode by mode on `G₁`.
#[derive(Clone, Debug)]
pub struct Primitive {
    pub field: Field,
    pub a0: f64,
    /// `‖X₁A − (a − a₀)‖ / ‖a‖` on the grid.
    pub residual: f64,
}

/// Solve `X₁A = a − a₀`. Fails with `NotSolvable` on non-trivial `λ = 0` content.
pub fn solve_primitive_g1(
    a: &CoefficientFunction,
    grid: &GroupGrid,
    group2: GroupId,
    alpha: f64,
) -> Result<Primitive> {
    let vals = a.field.sample_x1(grid, alpha)?;
    let coefs = grid.forward(&vals)?;
    let lay = grid.layout();
    let norm = lay
        .slots
        .iter()
        .zip(&coefs)
        .map(|(s, c)| lay.reps[s.0].dim() as f64 * c.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let mut out = vec![Complex64::default(); coefs.len()];
    let t = trivial_slot(&lay);
    let mut obstructions = Vec::new();
    for (k, (&(ri, m, n), c)) in lay.slots.iter().zip(&coefs).enumerate() {
        let rep = lay.reps[ri];
        if m.twice != 0 {
            out[k] = c / Complex64::new(0.0, m.as_f64());
        } else if k != t && c.norm() > PRIMITIVE_TOL * norm.max(1e-300) {
            obstructions.push(slot_label(rep, m, n));
        }
    }
    if !obstructions.is_empty() {
        return Err(Error::NotSolvable { modes: obstructions });
    }
    let a0 = coefs[t].re;
    let av = grid.inverse(&out)?;
    let xa = grid.apply_field(&av)?;
    let w = grid.weights();
    let err = xa
        .iter()
        .zip(&vals)
        .zip(&w)
        .map(|((x, v), w)| w * (x - (v - a0)).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(Primitive {
        field: Field::Spectral(Spectrum { layout: Layout::new(grid.group, grid.band, group2, HalfInt::ZERO), coefs: out }),
        a0,
        residual: err / norm.max(1e-300),
    })
}

/// `L_{aq}` with its normal-form data.
#[derive(Clone, Debug)]
pub struct OperatorSpec {
    pub group1: GroupId,
    pub group2: GroupId,
    pub a: CoefficientFunction,
    pub q: Option<Field>,
    pub q0: (Scalar, Scalar),
    pub q_primitive: Option<Field>,
    /// Float value used for `α`.
    pub alpha: f64,
    pub convergent: usize,
}

impl OperatorSpec {
    pub fn new(group1: GroupId, group2: GroupId, a: CoefficientFunction) -> Result<Self> {
        if a.group != group1 {
            return Err(Error::Config("a must live on the first factor".into()));
        }
        Ok(Self {
            group1,
            group2,
            a,
            q: None,
            q0: (Scalar::zero(), Scalar::zero()),
            q_primitive: None,
            alpha: alpha_convergent(DEFAULT_CONVERGENT)?,
            convergent: DEFAULT_CONVERGENT,
        })
    }

    /// Symbolic `a` and optional `q`.
    pub fn from_exprs(group1: GroupId, group2: GroupId, a: Expr, q: Option<Expr>) -> Result<Self> {
        a.validate(group1, group2)?;
        let mut s = Self::new(group1, group2, CoefficientFunction::from_expr(group1, a)?)?;
        if let Some(q) = q {
            q.validate(group1, group2)?;
            s = s.with_q(Field::Expr(q));
        }
        Ok(s)
    }

    pub fn with_q(mut self, q: Field) -> Self {
        self.q0 = match &q {
            Field::Expr(e) => {
                let (re, im) = e.mean();
                (Scalar::Exact(re), Scalar::Exact(im))
            }
            Field::Spectral(s) => {
                let c = s.coefs.get(mean_index(&s.layout)).copied().unwrap_or_default();
                (Scalar::Float(c.re), Scalar::Float(c.im))
            }
        };
        self.q = Some(q);
        self
    }

    pub fn with_a_primitive(mut self, a: Field) -> Self {
        self.a.primitive = Some(a);
        self
    }

    pub fn with_q_primitive(mut self, q: Field) -> Self {
        self.q_primitive = Some(q);
        self
    }

    pub fn with_convergent(mut self, n: usize) -> Result<Self> {
        self.alpha = alpha_convergent(n)?;
        self.convergent = n;
        Ok(self)
    }

    pub fn a0_f64(&self) -> f64 {
        self.a.a0_f64(self.alpha)
    }

    pub fn q0_c64(&self) -> Complex64 {
        Complex64::new(self.q0.0.to_f64_with(self.alpha), self.q0.1.to_f64_with(self.alpha))
    }

    /// Divisor problem of the normal form `L_{a₀q₀}`.
    pub fn divisor_problem(&self) -> DivisorProblem {
        DivisorProblem::new(self.group1, self.group2, self.a.a0.clone(), self.q0.0.clone(), self.q0.1.clone())
    }

    /// Whether `q` has non-constant part.
    pub fn q_is_constant(&self) -> bool {
        match &self.q {
            None => true,
            Some(Field::Expr(e)) => e.terms.iter().all(|t| t.x1 == Atom::Const && t.x2 == Atom::Const),
            Some(Field::Spectral(s)) => {
                let t = mean_index(&s.layout);
                s.coefs.iter().enumerate().all(|(k, c)| k == t || *c == Complex64::default())
            }
        }
    }

    /// `A` on the `x₁` nodes of `grid`.
    pub fn a_primitive_values(&self, grid: &GroupGrid) -> Result<Vec<Complex64>> {
        self.a
            .primitive
            .as_ref()
            .ok_or_else(|| Error::MissingPrimitive("A with X1 A = a - a0".into()))?
            .sample_x1(grid, self.alpha)
    }

    /// `Q` on `grid`, or zero when `q` is constant.
    pub fn q_primitive_values(&self, grid: &Arc<ProductGrid>) -> Result<GridFunction> {
        match &self.q_primitive {
            Some(f) => f.sample(grid, self.alpha),
            None if self.q_is_constant() => Ok(GridFunction::constant(grid, Complex64::default())),
            None => Err(Error::MissingPrimitive("Q with (X1 + a X2) Q = q - q0".into())),
        }
    }
}

/// `Ψ_{±a}` in the mixed representation: row `r` of the `x₂` coefficients at
/// node `x₁` is multiplied by `e^{±i r A(x₁)}`.
pub fn psi_apply(a_prim: &[Complex64], pf: &PartialField, sign: f64) -> Result<PartialField> {
    if pf.wrt != Variable::Second {
        return Err(Error::Shape("Ψ acts on fields transformed in x2".into()));
    }
    let lay = pf.grid.g2.layout();
    let c2 = lay.ncoef;
    if a_prim.len() != pf.grid.g1.npoints() {
        return Err(Error::Shape("A sampled on a different x1 grid".into()));
    }
    let rows: Vec<f64> = lay.slots.iter().map(|s| s.1.as_f64()).collect();
    let values = pf
        .values
        .chunks(c2)
        .zip(a_prim)
        .flat_map(|(row, a)| {
            row.iter()
                .zip(&rows)
                .map(move |(v, r)| v * (Complex64::new(0.0, sign * r) * a).exp())
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(PartialField { grid: pf.grid.clone(), wrt: pf.wrt, values })
}

/// `e^{±Q} u`.
pub fn exp_conjugate(q_prim: &GridFunction, u: &GridFunction, sign: f64) -> Result<GridFunction> {
    q_prim.zip_with(u, |q, v| (q * sign).exp() * v)
}

/// `L_{aq} u = X₁u + a X₂u + q u` on the grid of `u`.
pub fn apply_operator(spec: &OperatorSpec, u: &GridFunction) -> Result<GridFunction> {
    let grid = &u.grid;
    let a = spec.a.field.sample_x1(&grid.g1, spec.alpha)?;
    let n2 = grid.g2.npoints();
    let x1 = u.apply_x1()?;
    let x2 = u.apply_x2()?;
    let mut out: Vec<Complex64> = x1
        .values
        .iter()
        .zip(&x2.values)
        .enumerate()
        .map(|(i, (d1, d2))| d1 + a[i / n2] * d2)
        .collect();
    if let Some(q) = &spec.q {
        let qv = q.sample(grid, spec.alpha)?;
        for ((o, q), v) in out.iter_mut().zip(&qv.values).zip(&u.values) {
            *o += q * v;
        }
    }
    GridFunction::new(grid.clone(), out)
}

/// `L_{a₀q₀}` on a mixed field: `X₁v + i a₀ r v + q₀ v`.
pub fn apply_normal_form(a0: f64, q0: Complex64, pf: &PartialField) -> Result<PartialField> {
    let lay = pf.grid.g2.layout();
    let rows: Vec<f64> = lay.slots.iter().map(|s| s.1.as_f64()).collect();
    let mut d = pf.apply_x1()?;
    for (k, (o, v)) in d.values.iter_mut().zip(&pf.values).enumerate() {
        *o += (Complex64::new(0.0, a0 * rows[k % lay.ncoef]) + q0) * v;
    }
    Ok(d)
}

/// `Ψ_a e^Q u` in the mixed representation.
pub fn conjugate_forward(spec: &OperatorSpec, u: &GridFunction) -> Result<PartialField> {
    let a = spec.a_primitive_values(&u.grid.g1)?;
    let q = spec.q_primitive_values(&u.grid)?;
    let w = exp_conjugate(&q, u, 1.0)?;
    psi_apply(&a, &forward_partial(&w, Variable::Second)?, 1.0)
}

/// Inverse of [`conjugate_forward`].
pub fn conjugate_backward(spec: &OperatorSpec, v: &PartialField) -> Result<GridFunction> {
    let a = spec.a_primitive_values(&v.grid.g1)?;
    let q = spec.q_primitive_values(&v.grid)?;
    let w = partial_inverse(&psi_apply(&a, v, -1.0)?)?;
    exp_conjugate(&q, &w, -1.0)
}

/// `‖Ψ_a e^Q L_{aq} u − L_{a₀q₀} Ψ_a e^Q u‖ / ‖u‖`.
pub fn conjugation_residual(spec: &OperatorSpec, u: &GridFunction) -> Result<f64> {
    let lhs = conjugate_forward(spec, &apply_operator(spec, u)?)?;
    let rhs = apply_normal_form(spec.a0_f64(), spec.q0_c64(), &conjugate_forward(spec, u)?)?;
    let diff = PartialField {
        grid: lhs.grid.clone(),
        wrt: Variable::Second,
        values: lhs.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect(),
    };
    Ok(diff.norm() / u.norm().max(1e-300))
}

/// Numerical `Q` with its identity residual.
#[derive(Clone, Debug)]
pub struct QSolution {
    pub field: Field,
    /// `‖(X₁ + aX₂)Q − (q − q₀)‖ / ‖q − q₀‖` on the solve grid.
    pub residual: f64,
}

/// Solve `(X₁ + aX₂)Q = q − q₀` through `Ψ_a`:
/// `Q = Ψ_{−a} (L_{a₀}^{-1} Ψ_a (q − q₀))`, mean zero.
pub fn solve_q(spec: &OperatorSpec, plan: &GridPlan) -> Result<QSolution> {
    let q = spec.q.as_ref().ok_or_else(|| Error::Domain("operator has no q".into()))?;
    let grid = plan.build(spec.group1, spec.group2)?;
    let q0 = spec.q0_c64();
    let rhs = q.sample(&grid, spec.alpha)?.map(|v| v - q0);
    let a = spec.a_primitive_values(&grid.g1)?;
    let full = partial_to_full(&psi_apply(&a, &forward_partial(&rhs, Variable::Second)?, 1.0)?)?;
    let a0 = spec.a0_f64();
    let test = exact_a0_test(spec)?;
    let lay = full.layout.clone();
    let norm = crate::transform::plancherel_norm(&full);
    let c2 = lay.f2.ncoef;
    let mut out = Spectrum::zeros(lay.clone());
    let mut obstructions = Vec::new();
    for (k, c) in full.coefs.iter().enumerate() {
        let (s1, s2) = (&lay.f1.slots[k / c2], &lay.f2.slots[k % c2]);
        let (lam, mu) = (s1.1, s2.1);
        let resonant = match &test {
            Some(t) => t.is_resonant(lam, mu),
            None => (lam.as_f64() + a0 * mu.as_f64()).abs() < 1e-12,
        };
        if resonant {
            if c.norm() > RESONANCE_TOL * norm.max(1e-300) {
                obstructions.push(format!(
                    "{} x {}",
                    slot_label(lay.f1.reps[s1.0], s1.1, s1.2),
                    slot_label(lay.f2.reps[s2.0], s2.1, s2.2)
                ));
            }
        } else {
            out.coefs[k] = c / Complex64::new(0.0, lam.as_f64() + a0 * mu.as_f64());
        }
    }
    if !obstructions.is_empty() {
        return Err(Error::NotSolvable { modes: obstructions });
    }
    let qv = partial_inverse(&psi_apply(&a, &spectrum_to_partial(&out, &grid)?, -1.0)?)?;
    let av = spec.a.field.sample_x1(&grid.g1, spec.alpha)?;
    let n2 = grid.g2.npoints();
    let (d1, d2) = (qv.apply_x1()?, qv.apply_x2()?);
    let err = GridFunction::new(
        grid.clone(),
        (0..qv.values.len())
            .map(|i| d1.values[i] + av[i / n2] * d2.values[i] - rhs.values[i])
            .collect(),
    )?;
    let residual = err.norm() / rhs.norm().max(1e-300);
    Ok(QSolution { field: Field::Spectral(forward_full(&qv)?), residual })
}

/// Exact test of `λ + a₀μ = 0`, if `a₀` is exact.
fn exact_a0_test(spec: &OperatorSpec) -> Result<Option<ResonanceTest>> {
    match &spec.a.a0 {
        Scalar::Exact(a0) => DivisorProblem::exact(
            spec.group1,
            spec.group2,
            a0.clone(),
            AlphaLinear::zero(),
            AlphaLinear::zero(),
        )
        .resonance_test()
        .map(Some),
        Scalar::Float(_) => Ok(None),
    }
}

/// Residuals of the primitive identities on a check grid.
#[derive(Clone, Debug, Serialize)]
pub struct PrimitiveCheck {
    /// `‖X₁A − (a − a₀)‖ / max(‖a‖, 1)`.
    pub a_residual: Option<f64>,
    /// `‖(X₁ + aX₂)Q − (q − q₀)‖ / max(‖q − q₀‖, 1)`.
    pub q_residual: Option<f64>,
}

impl PrimitiveCheck {
    pub fn worst(&self) -> f64 {
        self.a_residual.unwrap_or(0.0).max(self.q_residual.unwrap_or(0.0))
    }
}

/// Evaluates the defining identities of the primitives present in `spec`.
pub fn verify_primitives(spec: &OperatorSpec, plan: &GridPlan) -> Result<PrimitiveCheck> {
    let grid = plan.build(spec.group1, spec.group2)?;
    let g1 = &grid.g1;
    let av = spec.a.field.sample_x1(g1, spec.alpha)?;
    let w1 = g1.weights();
    let l2 = |v: &[Complex64]| v.iter().zip(&w1).map(|(z, w)| w * z.norm_sqr()).sum::<f64>().sqrt();
    let a_residual = match &spec.a.primitive {
        Some(p) => {
            let x = g1.apply_field(&p.sample_x1(g1, spec.alpha)?)?;
            let a0 = spec.a0_f64();
            let d: Vec<Complex64> = x.iter().zip(&av).map(|(x, a)| x - (a - a0)).collect();
            Some(l2(&d) / l2(&av).max(1.0))
        }
        None => None,
    };
    let q_residual = match (&spec.q, &spec.q_primitive) {
        (Some(q), Some(p)) => {
            let rhs = q.sample(&grid, spec.alpha)?.map(|v| v - spec.q0_c64());
            let qv = p.sample(&grid, spec.alpha)?;
            let (d1, d2) = (qv.apply_x1()?, qv.apply_x2()?);
            let n2 = grid.g2.npoints();
            let err = GridFunction::new(
                grid.clone(),
                (0..qv.values.len()).map(|i| d1.values[i] + av[i / n2] * d2.values[i] - rhs.values[i]).collect(),
            )?;
            Some(err.norm() / rhs.norm().max(1.0))
        }
        _ => None,
    };
    Ok(PrimitiveCheck { a_residual, q_residual })
}

/// Random band-limited test function with Gaussian coefficients.
pub fn random_bandlimited<R: rand::Rng>(
    grid: &Arc<ProductGrid>,
    band1: HalfInt,
    band2: HalfInt,
    rng: &mut R,
) -> Result<GridFunction> {
    use rand_distr::{Distribution, StandardNormal};
    let lay = grid.layout();
    let c2 = lay.f2.ncoef;
    let mut spec = Spectrum::zeros(lay.clone());
    for (k, c) in spec.coefs.iter_mut().enumerate() {
        let (r1, r2) = (lay.f1.rep_of(k / c2), lay.f2.rep_of(k % c2));
        if rep_twice(r1) <= band1.twice && rep_twice(r2) <= band2.twice {
            let (x, y): (f64, f64) = (StandardNormal.sample(rng), StandardNormal.sample(rng));
            *c = Complex64::new(x, y);
        }
    }
    crate::transform::inverse(&spec, grid)
}

/// `2|k|` or `2ℓ`.
pub fn rep_twice(r: Rep) -> i64 {
    match r {
        Rep::Torus { k } => 2 * k.abs(),
        Rep::SU2 { ell } => ell.twice,
    }
}
