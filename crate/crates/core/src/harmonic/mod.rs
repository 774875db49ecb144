//! Group backends for the circle `T¹` and `SU(2) ≅ S³`: representation
//! indices, Wigner matrix elements, quadrature grids and the invariant
//! vector field `X = ∂_t` (torus) or `X = ∂_ψ` (Euler angles).

mod grid;
mod wigner;

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use grid::{gauss_legendre, GridAxes, GroupGrid, Oversample, MAX_GRID_POINTS};
pub use wigner::{matrix_element, rep_matrix, wigner_d, wigner_d_matrix, wigner_d_sum};

/// A number in `½ℤ`, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInt {
    pub twice: i64,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };

    pub const fn from_twice(twice: i64) -> Self {
        Self { twice }
    }

    pub const fn from_int(n: i64) -> Self {
        Self { twice: 2 * n }
    }

    pub fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub fn as_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn abs(self) -> Self {
        Self { twice: self.twice.abs() }
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, o: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice + o.twice }
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, o: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice - o.twice }
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt { twice: -self.twice }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        let t = 2.0 * v;
        if t.fract() != 0.0 {
            return Err(serde::de::Error::custom(format!("{v} is not a half-integer")));
        }
        Ok(HalfInt::from_twice(t as i64))
    }
}

/// Which compact group a factor is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupId {
    T1,
    SU2,
}

impl GroupId {
    pub fn name(self) -> &'static str {
        match self {
            GroupId::T1 => "T1",
            GroupId::SU2 => "SU2",
        }
    }
}

/// Irreducible representation index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rep {
    Torus { k: i64 },
    SU2 { ell: HalfInt },
}

impl Rep {
    pub fn su2_twice(twice: i64) -> Self {
        Rep::SU2 { ell: HalfInt::from_twice(twice) }
    }

    pub fn group(self) -> GroupId {
        match self {
            Rep::Torus { .. } => GroupId::T1,
            Rep::SU2 { .. } => GroupId::SU2,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Rep::Torus { .. } => 1,
            Rep::SU2 { ell } => (ell.twice + 1) as usize,
        }
    }

    /// Laplacian eigenvalue `ν`: `k²` on the torus, `ℓ(ℓ+1)` on SU(2).
    pub fn casimir_eig(self) -> f64 {
        match self {
            Rep::Torus { k } => (k * k) as f64,
            Rep::SU2 { ell } => {
                let l = ell.as_f64();
                l * (l + 1.0)
            }
        }
    }

    /// `⟨rep⟩ = (1 + ν)^{1/2}`.
    pub fn bracket(self) -> f64 {
        (1.0 + self.casimir_eig()).sqrt()
    }

    /// Weights `m` labelling rows and columns, in increasing order.
    pub fn weights(self) -> Vec<HalfInt> {
        match self {
            Rep::Torus { k } => vec![HalfInt::from_int(k)],
            Rep::SU2 { ell } => (0..=ell.twice)
                .map(|i| HalfInt::from_twice(-ell.twice + 2 * i))
                .collect(),
        }
    }

    /// Position of weight `m` in [`Self::weights`].
    pub fn weight_index(self, m: HalfInt) -> Result<usize> {
        match self {
            Rep::Torus { k } if m.twice == 2 * k => Ok(0),
            Rep::SU2 { ell } if m.twice.abs() <= ell.twice && (ell.twice - m.twice) % 2 == 0 => {
                Ok(((m.twice + ell.twice) / 2) as usize)
            }
            _ => Err(Error::Index(format!("weight {m} is not a weight of {self}"))),
        }
    }

    pub fn validate(self) -> Result<()> {
        match self {
            Rep::SU2 { ell } if ell.twice < 0 => {
                Err(Error::Index(format!("negative spin {ell}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Rep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rep::Torus { k } => write!(f, "T1(k={k})"),
            Rep::SU2 { ell } => write!(f, "SU2(l={ell})"),
        }
    }
}

impl Serialize for Rep {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Rep::Torus { k } => ("T1", *k).serialize(s),
            Rep::SU2 { ell } => ("SU2", ell.twice).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Rep {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (tag, v): (String, i64) = Deserialize::deserialize(d)?;
        match tag.as_str() {
            "T1" => Ok(Rep::Torus { k: v }),
            "SU2" if v >= 0 => Ok(Rep::su2_twice(v)),
            _ => Err(serde::de::Error::custom(format!("bad rep key ({tag}, {v})"))),
        }
    }
}

/// Diagonal of the symbol of `X`: `i·k` on the torus, `diag(i·m)` on SU(2).
pub fn field_symbol(rep: Rep) -> Vec<Complex64> {
    rep.weights()
        .into_iter()
        .map(|m| Complex64::new(0.0, m.as_f64()))
        .collect()
}

/// All representations with `⟨rep⟩`-index up to `band` (`|k| <= band` or `ℓ <= band`).
pub fn reps_up_to(group: GroupId, band: HalfInt) -> Vec<Rep> {
    match group {
        GroupId::T1 => {
            let k = band.twice / 2;
            (-k..=k).map(|k| Rep::Torus { k }).collect()
        }
        GroupId::SU2 => (0..=band.twice).map(Rep::su2_twice).collect(),
    }
}

/// Coefficient layout of one factor: rep order, offsets and slot labels.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorLayout {
    pub group: GroupId,
    pub band: HalfInt,
    pub reps: Vec<Rep>,
    pub offsets: Vec<usize>,
    pub ncoef: usize,
    /// `(rep index, row weight, column weight)` of every slot.
    pub slots: Vec<(usize, HalfInt, HalfInt)>,
}

impl FactorLayout {
    pub fn new(group: GroupId, band: HalfInt) -> Self {
        let reps = reps_up_to(group, band);
        let mut offsets = Vec::with_capacity(reps.len());
        let mut slots = Vec::new();
        for (ri, r) in reps.iter().enumerate() {
            offsets.push(slots.len());
            let w = r.weights();
            for &m in &w {
                for &n in &w {
                    slots.push((ri, m, n));
                }
            }
        }
        Self { group, band, ncoef: slots.len(), reps, offsets, slots }
    }

    pub fn rep_index(&self, rep: Rep) -> Option<usize> {
        match rep {
            Rep::Torus { k } if self.group == GroupId::T1 && 2 * k.abs() <= self.band.twice => {
                Some((k + self.band.twice / 2) as usize)
            }
            Rep::SU2 { ell } if self.group == GroupId::SU2 && ell.twice <= self.band.twice && ell.twice >= 0 => {
                Some(ell.twice as usize)
            }
            _ => None,
        }
    }

    pub fn coef_index(&self, rep: Rep, m: HalfInt, n: HalfInt) -> Result<usize> {
        let ri = self
            .rep_index(rep)
            .ok_or_else(|| Error::Index(format!("{rep} outside the bandlimit {}", self.band)))?;
        let d = rep.dim();
        Ok(self.offsets[ri] + rep.weight_index(m)? * d + rep.weight_index(n)?)
    }

    pub fn rep_of(&self, slot: usize) -> Rep {
        self.reps[self.slots[slot].0]
    }
}

/// `i^p` for an integer `p`.
pub(crate) fn i_pow(p: i64) -> Complex64 {
    match p.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}
