//! Symbolic coefficient functions built from named atoms.

use std::sync::Arc;

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::diophantine::{AlphaLinear, ContinuedFraction};
use crate::error::{Error, Result};
use crate::harmonic::{matrix_element, FactorLayout, GroupGrid, GroupId, HalfInt, Rep};
use crate::transform::{inverse, GridFunction, Layout, ProductGrid, Spectrum};

/// Named building blocks. Torus atoms take `t`; SU(2) atoms take Euler angles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Atom {
    Const,
    SinT,
    CosT,
    ExpIt { k: i64 },
    /// `2 cos(θ/2) cos((φ+ψ)/2)`.
    Tr,
    /// `X tr = −cos(θ/2) sin((φ+ψ)/2)`.
    H,
    /// `cos(θ/2) e^{i(φ+ψ)/2}`.
    P1,
    /// `i sin(θ/2) e^{i(φ−ψ)/2}`.
    P2,
    P1Bar,
    P2Bar,
    /// Matrix element `t^ℓ_{mn}` given by twice its labels.
    Wigner { twice_l: i64, twice_m: i64, twice_n: i64 },
}

impl Atom {
    pub fn group(self) -> Option<GroupId> {
        match self {
            Atom::Const => None,
            Atom::SinT | Atom::CosT | Atom::ExpIt { .. } => Some(GroupId::T1),
            _ => Some(GroupId::SU2),
        }
    }

    /// Haar mean of the atom.
    pub fn mean(self) -> f64 {
        match self {
            Atom::Const | Atom::ExpIt { k: 0 } | Atom::Wigner { twice_l: 0, .. } => 1.0,
            _ => 0.0,
        }
    }

    pub fn eval(self, x: [f64; 3]) -> Complex64 {
        let [a, b, c] = x;
        match self {
            Atom::Const => Complex64::new(1.0, 0.0),
            Atom::SinT => Complex64::new(a.sin(), 0.0),
            Atom::CosT => Complex64::new(a.cos(), 0.0),
            Atom::ExpIt { k } => Complex64::from_polar(1.0, k as f64 * a),
            Atom::Tr => Complex64::new(2.0 * (b / 2.0).cos() * ((a + c) / 2.0).cos(), 0.0),
            Atom::H => Complex64::new(-(b / 2.0).cos() * ((a + c) / 2.0).sin(), 0.0),
            Atom::P1 => Complex64::from_polar((b / 2.0).cos(), (a + c) / 2.0),
            Atom::P2 => Complex64::i() * Complex64::from_polar((b / 2.0).sin(), (a - c) / 2.0),
            Atom::P1Bar => Atom::P1.eval(x).conj(),
            Atom::P2Bar => Atom::P2.eval(x).conj(),
            Atom::Wigner { twice_l, twice_m, twice_n } => matrix_element(
                HalfInt::from_twice(twice_l),
                HalfInt::from_twice(twice_m),
                HalfInt::from_twice(twice_n),
                a,
                b,
                c,
            )
            .unwrap_or_default(),
        }
    }

    fn validate(self) -> Result<()> {
        if let Atom::Wigner { twice_l, twice_m, twice_n } = self {
            Rep::su2_twice(twice_l).validate()?;
            let r = Rep::su2_twice(twice_l);
            r.weight_index(HalfInt::from_twice(twice_m))?;
            r.weight_index(HalfInt::from_twice(twice_n))?;
        }
        Ok(())
    }
}

/// Exact complex coefficient `re + i·im` with `α`-affine parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactCoef {
    #[serde(default = "AlphaLinear::zero")]
    pub re: AlphaLinear,
    #[serde(default = "AlphaLinear::zero")]
    pub im: AlphaLinear,
}

impl ExactCoef {
    pub fn real(re: AlphaLinear) -> Self {
        Self { re, im: AlphaLinear::zero() }
    }

    pub fn imag(im: AlphaLinear) -> Self {
        Self { re: AlphaLinear::zero(), im }
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Self::real(AlphaLinear::from_ratio(p, q))
    }

    pub fn to_c64(&self, alpha: f64) -> Complex64 {
        Complex64::new(self.re.to_f64_with(alpha), self.im.to_f64_with(alpha))
    }
}

/// `coef · x1(x₁) · x2(x₂)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub coef: ExactCoef,
    #[serde(default = "const_atom")]
    pub x1: Atom,
    #[serde(default = "const_atom")]
    pub x2: Atom,
}

fn const_atom() -> Atom {
    Atom::Const
}

/// A finite sum of [`Term`]s.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expr {
    pub terms: Vec<Term>,
}

impl Expr {
    pub fn term(coef: ExactCoef, x1: Atom, x2: Atom) -> Self {
        Self { terms: vec![Term { coef, x1, x2 }] }
    }

    pub fn plus(mut self, coef: ExactCoef, x1: Atom, x2: Atom) -> Self {
        self.terms.push(Term { coef, x1, x2 });
        self
    }

    pub fn eval(&self, x1: [f64; 3], x2: [f64; 3], alpha: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coef.to_c64(alpha) * t.x1.eval(x1) * t.x2.eval(x2))
            .sum()
    }

    pub fn depends_on_x2(&self) -> bool {
        self.terms.iter().any(|t| t.x2 != Atom::Const)
    }

    /// Exact Haar mean `(re, im)`.
    pub fn mean(&self) -> (AlphaLinear, AlphaLinear) {
        let mut re = AlphaLinear::zero();
        let mut im = AlphaLinear::zero();
        for t in &self.terms {
            if t.x1.mean() != 0.0 && t.x2.mean() != 0.0 {
                re = re.add(&t.coef.re);
                im = im.add(&t.coef.im);
            }
        }
        (re, im)
    }

    /// Checks atoms against the factor groups.
    pub fn validate(&self, g1: GroupId, g2: GroupId) -> Result<()> {
        for t in &self.terms {
            for (atom, g, which) in [(t.x1, g1, "x1"), (t.x2, g2, "x2")] {
                if let Some(ag) = atom.group() {
                    if ag != g {
                        return Err(Error::Config(format!(
                            "atom {atom:?} lives on {} but {which} is on {}",
                            ag.name(),
                            g.name()
                        )));
                    }
                }
                atom.validate()?;
            }
        }
        Ok(())
    }
}

/// A function on `G₁ × G₂`: symbolic, or spectral on some band.
#[derive(Clone, Debug)]
pub enum Field {
    Expr(Expr),
    Spectral(Spectrum),
}

/// Copy a spectrum into another layout, matching labels.
pub fn embed(spec: &Spectrum, target: &Arc<Layout>) -> Result<Spectrum> {
    if spec.layout == *target {
        return Ok(spec.clone());
    }
    let (s1, s2) = (&spec.layout.f1, &spec.layout.f2);
    if s1.group != target.f1.group || s2.group != target.f2.group {
        return Err(Error::Shape("cannot embed across different groups".into()));
    }
    let mut out = Spectrum::zeros(target.clone());
    let mut dropped = 0.0;
    let mut total = 0.0;
    for (a, sa) in s1.slots.iter().enumerate() {
        let ta = target.f1.coef_index(s1.reps[sa.0], sa.1, sa.2).ok();
        for (b, sb) in s2.slots.iter().enumerate() {
            let v = spec.coefs[a * s2.ncoef + b];
            total += v.norm_sqr();
            match (ta, target.f2.coef_index(s2.reps[sb.0], sb.1, sb.2).ok()) {
                (Some(i), Some(j)) => out.coefs[i * target.f2.ncoef + j] = v,
                _ => dropped += v.norm_sqr(),
            }
        }
    }
    if dropped > 1e-24 * total.max(1e-300) && dropped > 0.0 {
        return Err(Error::Resolution(format!(
            "embedding drops relative mass {:.2e}; enlarge the target band",
            (dropped / total).sqrt()
        )));
    }
    Ok(out)
}

impl Field {
    /// Values on a product grid, with `α` replaced by `alpha`.
    pub fn sample(&self, grid: &Arc<ProductGrid>, alpha: f64) -> Result<GridFunction> {
        match self {
            Field::Expr(e) => {
                e.validate(grid.g1.group, grid.g2.group)?;
                Ok(grid.sample(|x1, x2| e.eval(x1, x2, alpha)))
            }
            Field::Spectral(s) => inverse(&embed(s, &grid.layout())?, grid),
        }
    }

    /// Values on a single `G₁` grid; the field must not depend on `x₂`.
    pub fn sample_x1(&self, g1: &GroupGrid, alpha: f64) -> Result<Vec<Complex64>> {
        match self {
            Field::Expr(e) => {
                if e.terms.iter().any(|t| t.x2 != Atom::Const) {
                    return Err(Error::Domain("coefficient depends on x2".into()));
                }
                Ok(g1.sample(|x| e.eval(x, [0.0; 3], alpha)))
            }
            Field::Spectral(s) => {
                let l2 = &s.layout.f2;
                let (c2, t2) = (l2.ncoef, trivial_slot(l2));
                let off: f64 = s
                    .coefs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i % c2 != t2)
                    .map(|(_, v)| v.norm_sqr())
                    .sum();
                if off > 0.0 {
                    return Err(Error::Domain("coefficient depends on x2".into()));
                }
                let target = Layout::new(g1.group, g1.band, l2.group, HalfInt::ZERO);
                let col: Spectrum = embed(&x1_only(s)?, &target)?;
                g1.inverse(&col.coefs)
            }
        }
    }

    /// Haar mean in floating point.
    pub fn mean_f64(&self, alpha: f64) -> Complex64 {
        match self {
            Field::Expr(e) => {
                let (re, im) = e.mean();
                Complex64::new(re.to_f64_with(alpha), im.to_f64_with(alpha))
            }
            Field::Spectral(s) => s.coefs.get(mean_index(&s.layout)).copied().unwrap_or_else(Complex64::zero),
        }
    }

    pub fn as_expr(&self) -> Option<&Expr> {
        match self {
            Field::Expr(e) => Some(e),
            Field::Spectral(_) => None,
        }
    }
}

/// Slot of the trivial representation in one factor.
pub fn trivial_slot(l: &FactorLayout) -> usize {
    match l.group {
        GroupId::T1 => (l.band.twice / 2) as usize,
        GroupId::SU2 => 0,
    }
}

/// Slot of the constant function in a product layout.
pub fn mean_index(l: &Layout) -> usize {
    trivial_slot(&l.f1) * l.f2.ncoef + trivial_slot(&l.f2)
}

/// Restrict a spectrum to its `η = trivial` column.
fn x1_only(s: &Spectrum) -> Result<Spectrum> {
    let l = &s.layout;
    let target = Layout::new(l.f1.group, l.f1.band, l.f2.group, HalfInt::ZERO);
    let c2 = l.f2.ncoef;
    let t2 = trivial_slot(&l.f2);
    let coefs = (0..l.f1.ncoef).map(|a| s.coefs[a * c2 + t2]).collect();
    Ok(Spectrum { layout: target, coefs })
}

/// `α` as a float, replaced by convergent `n`.
pub fn alpha_convergent(n: usize) -> Result<f64> {
    let cf = ContinuedFraction::alpha_factorial();
    let c = cf.convergents(n)?.pop().expect("non-empty");
    Ok(crate::diophantine::rat_to_f64(&c))
}
