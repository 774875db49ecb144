//! JSON operator specifications: symbolic atoms or sampled coefficient grids.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    solve_primitive_g1, solve_q, CoefficientFunction, Expr, Field, GridPlan, OperatorSpec,
};
use crate::error::{Error, Result};
use crate::harmonic::{GroupGrid, GroupId, HalfInt, Oversample};

pub const SPEC_SCHEMA: u32 = 1;

/// Tolerance on the identity residual of a numerically solved `A`.
pub const A_TOL: f64 = 1e-8;
/// Tolerance on the identity residual of a numerically solved `Q`.
pub const Q_TOL: f64 = 1e-7;

/// Values of `a` on the quadrature nodes of a `G₁` grid, as `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Samples {
    pub band: HalfInt,
    #[serde(default)]
    pub oversample: Oversample,
    pub values: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub schema: u32,
    pub groups: [GroupId; 2],
    #[serde(default)]
    pub a: Option<Expr>,
    #[serde(default)]
    pub a_samples: Option<Samples>,
    #[serde(default)]
    pub a_primitive: Option<Expr>,
    #[serde(default)]
    pub q: Option<Expr>,
    #[serde(default)]
    pub q_primitive: Option<Expr>,
}

/// What was supplied and what had to be solved.
#[derive(Clone, Debug, Default, Serialize)]
pub struct LoadNotes {
    pub a_primitive_solved: Option<f64>,
    pub q_primitive_solved: Option<f64>,
}

fn primitive_grid(g: GroupId) -> Result<GroupGrid> {
    match g {
        GroupId::T1 => GroupGrid::torus(32),
        GroupId::SU2 => GroupGrid::su2(HalfInt::from_int(4)),
    }
}

impl SpecFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        if s.schema != SPEC_SCHEMA {
            return Err(Error::Config(format!("unsupported spec schema {} (expected {SPEC_SCHEMA})", s.schema)));
        }
        Ok(s)
    }

    /// Builds the operator, solving missing primitives numerically.
    pub fn build(&self, convergent: usize) -> Result<(OperatorSpec, LoadNotes)> {
        let [g1, g2] = self.groups;
        let alpha = super::alpha_convergent(convergent)?;
        let mut notes = LoadNotes::default();
        let (a, sample_grid) = match (&self.a, &self.a_samples) {
            (Some(e), None) => {
                e.validate(g1, g2)?;
                (CoefficientFunction::from_expr(g1, e.clone())?, primitive_grid(g1)?)
            }
            (None, Some(s)) => {
                let grid = GroupGrid::with_oversample(g1, s.band, s.oversample)?;
                let v: Vec<Complex64> = s.values.iter().map(|p| Complex64::new(p[0], p[1])).collect();
                (CoefficientFunction::from_samples(&grid, &v, g2)?, grid)
            }
            _ => return Err(Error::Config("give exactly one of `a` and `a_samples`".into())),
        };
        a.check_real(&sample_grid, alpha)?;
        let a = match &self.a_primitive {
            Some(p) => {
                p.validate(g1, g2)?;
                a.with_primitive(Field::Expr(p.clone()))
            }
            None => {
                let p = solve_primitive_g1(&a, &sample_grid, g2, alpha)?;
                if p.residual >= A_TOL {
                    return Err(Error::NoConvergence(format!("primitive A residual {:.3e}", p.residual)));
                }
                notes.a_primitive_solved = Some(p.residual);
                a.with_primitive(p.field)
            }
        };
        let mut spec = OperatorSpec::new(g1, g2, a)?.with_convergent(convergent)?;
        if let Some(q) = &self.q {
            q.validate(g1, g2)?;
            spec = spec.with_q(Field::Expr(q.clone()));
            match &self.q_primitive {
                Some(p) => {
                    p.validate(g1, g2)?;
                    spec = spec.with_q_primitive(Field::Expr(p.clone()));
                }
                None if !spec.q_is_constant() => {
                    let sol = solve_q(&spec, &GridPlan::default_for(g1, g2))?;
                    if sol.residual >= Q_TOL {
                        return Err(Error::NoConvergence(format!("primitive Q residual {:.3e}", sol.residual)));
                    }
                    notes.q_primitive_solved = Some(sol.residual);
                    spec = spec.with_q_primitive(sol.field);
                }
                None => {}
            }
        }
        Ok((spec, notes))
    }
}

impl Default for SpecFile {
    fn default() -> Self {
        Self {
            schema: SPEC_SCHEMA,
            groups: [GroupId::T1, GroupId::SU2],
            a: None,
            a_samples: None,
            a_primitive: None,
            q: None,
            q_primitive: None,
        }
    }
}
