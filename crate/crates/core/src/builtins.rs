//! The worked examples on `T¹ × S³` and `S³ × S³`, with their stated conclusions.

use serde::Serialize;

use crate::diophantine::AlphaLinear;
use crate::error::{Error, Result};
use crate::harmonic::{GroupId, HalfInt, Oversample};
use crate::normalform::{verify_primitives, Atom, ExactCoef, Expr, Field, GridPlan, OperatorSpec, PrimitiveCheck};
use crate::solver::Property;
use crate::verdict::Verdict;

pub const NAMES: [&str; 5] = ["t1s3_La", "t1s3_Laq_half_i", "t1s3_Laq_alpha_i", "s3s3_Lh", "s3s3_Lhq"];

/// Tolerance for the primitive identities checked at load.
pub const LOAD_TOL: f64 = 1e-7;

/// A verdict stated for an example; Komatsu properties apply to every Gevrey order.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StatedVerdict {
    pub property: Property,
    pub verdict: Verdict,
}

#[derive(Clone, Debug)]
pub struct BuiltinExample {
    pub name: &'static str,
    pub description: &'static str,
    pub spec: OperatorSpec,
    pub stated: Vec<StatedVerdict>,
    pub check: PrimitiveCheck,
}

fn c(p: i64) -> ExactCoef {
    ExactCoef::ratio(p, 1)
}

fn alpha() -> ExactCoef {
    ExactCoef::real(AlphaLinear::alpha())
}

fn stated(list: &[(Property, Verdict)]) -> Vec<StatedVerdict> {
    list.iter().map(|&(property, verdict)| StatedVerdict { property, verdict }).collect()
}

/// `sin t + α`, primitive `−cos t`.
fn t1_a() -> (Expr, Field) {
    (
        Expr::term(c(1), Atom::SinT, Atom::Const).plus(alpha(), Atom::Const, Atom::Const),
        Field::Expr(Expr::term(c(-1), Atom::CosT, Atom::Const)),
    )
}

/// `h + α` on the first sphere, primitive `tr`.
fn s3_a() -> (Expr, Field) {
    (
        Expr::term(c(1), Atom::H, Atom::Const).plus(alpha(), Atom::Const, Atom::Const),
        Field::Expr(Expr::term(c(1), Atom::Tr, Atom::Const)),
    )
}

/// `cos t + (sin t + α) h + shift`, primitive `sin t + tr`.
fn t1_q(shift: ExactCoef) -> (Expr, Field) {
    (
        Expr::term(c(1), Atom::CosT, Atom::Const)
            .plus(c(1), Atom::SinT, Atom::H)
            .plus(alpha(), Atom::Const, Atom::H)
            .plus(shift, Atom::Const, Atom::Const),
        Field::Expr(Expr::term(c(1), Atom::SinT, Atom::Const).plus(c(1), Atom::Const, Atom::Tr)),
    )
}

fn check_plan(g1: GroupId) -> GridPlan {
    match g1 {
        GroupId::T1 => GridPlan::new(HalfInt::from_int(8), HalfInt::from_int(2)),
        GroupId::SU2 => GridPlan::new(HalfInt::from_int(2), HalfInt::from_int(2))
            .with_oversample(Oversample { phi: 1.0, theta: 1.0, psi: 2.0 }, Oversample::default()),
    }
}

/// Builds the example and verifies its primitives; `convergent` picks the float `α`.
pub fn load(name: &str, convergent: usize) -> Result<BuiltinExample> {
    use Property::*;
    use Verdict::*;
    let half_i = ExactCoef::imag(AlphaLinear::from_ratio(1, 2));
    let (description, spec, stated) = match name {
        "t1s3_La" => {
            let (a, ap) = t1_a();
            (
                "d/dt + (sin t + alpha) X on T1 x S3",
                OperatorSpec::from_exprs(GroupId::T1, GroupId::SU2, a, None)?.with_a_primitive(ap),
                stated(&[(GhRoumieu, Refuted), (GsRoumieu, Consistent), (GhSmooth, Refuted), (GsSmooth, Refuted)]),
            )
        }
        "t1s3_Laq_half_i" | "t1s3_Laq_alpha_i" => {
            let (a, ap) = t1_a();
            let (shift, gh) = if name == "t1s3_Laq_half_i" {
                (half_i, Consistent)
            } else {
                (ExactCoef::imag(AlphaLinear::alpha()), Refuted)
            };
            let (q, qp) = t1_q(shift);
            (
                if gh == Consistent {
                    "d/dt + (sin t + alpha) X + cos t + (sin t + alpha) h + i/2 on T1 x S3"
                } else {
                    "d/dt + (sin t + alpha) X + cos t + (sin t + alpha) h + alpha i on T1 x S3"
                },
                OperatorSpec::from_exprs(GroupId::T1, GroupId::SU2, a, Some(q))?
                    .with_a_primitive(ap)
                    .with_q_primitive(qp),
                stated(&[(GhRoumieu, gh), (GsRoumieu, Consistent), (GhSmooth, Refuted), (GsSmooth, Refuted)]),
            )
        }
        "s3s3_Lh" => {
            let (a, ap) = s3_a();
            (
                "X1 + (h(x1) + alpha) X2 on S3 x S3",
                OperatorSpec::from_exprs(GroupId::SU2, GroupId::SU2, a, None)?.with_a_primitive(ap),
                stated(&[(GhRoumieu, Refuted), (GsRoumieu, Consistent), (GhSmooth, Refuted), (GsSmooth, Refuted)]),
            )
        }
        "s3s3_Lhq" => {
            let (a, ap) = s3_a();
            let q = Expr::term(c(1), Atom::P1, Atom::Const)
                .plus(c(1), Atom::H, Atom::P2)
                .plus(alpha(), Atom::Const, Atom::P2)
                .plus(half_i, Atom::Const, Atom::Const);
            let qp = Field::Expr(
                Expr::term(ExactCoef::imag(AlphaLinear::from_ratio(2, 1)), Atom::Const, Atom::P2)
                    .plus(ExactCoef::imag(AlphaLinear::from_ratio(-2, 1)), Atom::P1, Atom::Const),
            );
            (
                "X1 + (h(x1) + alpha) X2 + p1(x1) + (h(x1) + alpha) p2(x2) + i/2 on S3 x S3",
                OperatorSpec::from_exprs(GroupId::SU2, GroupId::SU2, a, Some(q))?
                    .with_a_primitive(ap)
                    .with_q_primitive(qp),
                stated(&[(GhRoumieu, Consistent), (GsRoumieu, Consistent), (GhSmooth, Refuted), (GsSmooth, Refuted)]),
            )
        }
        other => {
            return Err(Error::Config(format!("unknown example {other:?}; available: {}", NAMES.join(", "))));
        }
    };
    let spec = spec.with_convergent(convergent)?;
    let check = verify_primitives(&spec, &check_plan(spec.group1))?;
    if check.worst() >= LOAD_TOL {
        return Err(Error::NoConvergence(format!(
            "{name}: primitive identity residual {:.3e} exceeds {LOAD_TOL:e}",
            check.worst()
        )));
    }
    Ok(BuiltinExample { name: NAMES.iter().find(|n| **n == name).copied().unwrap_or("custom"), description, spec, stated, check })
}
