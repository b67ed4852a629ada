use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::GridKind;
use crate::error::{invalid, Error, Result};
use crate::pickands::{FieldBatch, Support};

/// Magnitude at which infinite arguments are clamped.
pub const ARG_CLAMP: f64 = 40.0;

/// Which limit law applies, by grid pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", deny_unknown_fields)]
#[allow(non_camel_case_types)]
pub enum TheoremCase {
    /// Two sparse grids without common points.
    T21_i,
    /// Two sparse grids sharing the sub-grid `delta_3`.
    T21_ii { theta1: f64, theta2: f64 },
    /// Sparse and Pickands grid.
    T21_iii { d2: f64 },
    /// Sparse and dense grid.
    T21_iv,
    /// Two Pickands grids with `D1 != D2`.
    T22_i { d1: f64, d2: f64 },
    /// Pickands and dense grid.
    T22_ii { d1: f64 },
    /// Two dense grids.
    T22_iii,
}

/// Coarse grid class, used to match configured grids against a case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KindReq {
    Sparse,
    Pickands(f64),
    Dense,
}

impl KindReq {
    pub fn matches(&self, kind: &GridKind) -> bool {
        match (self, kind) {
            (KindReq::Sparse, GridKind::Sparse) | (KindReq::Dense, GridKind::Dense) => true,
            (KindReq::Pickands(a), GridKind::Pickands { d }) => (a - d).abs() <= 1e-12 * a.max(1.0),
            _ => false,
        }
    }
}

impl TheoremCase {
    pub fn tag(&self) -> &'static str {
        match self {
            TheoremCase::T21_i => "T21_i",
            TheoremCase::T21_ii { .. } => "T21_ii",
            TheoremCase::T21_iii { .. } => "T21_iii",
            TheoremCase::T21_iv => "T21_iv",
            TheoremCase::T22_i { .. } => "T22_i",
            TheoremCase::T22_ii { .. } => "T22_ii",
            TheoremCase::T22_iii => "T22_iii",
        }
    }

    /// Grid kinds the case is stated for, in grid order.
    pub fn required_kinds(&self) -> [KindReq; 2] {
        match *self {
            TheoremCase::T21_i | TheoremCase::T21_ii { .. } => [KindReq::Sparse, KindReq::Sparse],
            TheoremCase::T21_iii { d2 } => [KindReq::Sparse, KindReq::Pickands(d2)],
            TheoremCase::T21_iv => [KindReq::Sparse, KindReq::Dense],
            TheoremCase::T22_i { d1, d2 } => [KindReq::Pickands(d1), KindReq::Pickands(d2)],
            TheoremCase::T22_ii { d1 } => [KindReq::Pickands(d1), KindReq::Dense],
            TheoremCase::T22_iii => [KindReq::Dense, KindReq::Dense],
        }
    }

    /// Grid spacings (in Pickands units) whose constants the case consumes.
    pub fn pickands_spacings(&self) -> Vec<f64> {
        match *self {
            TheoremCase::T21_iii { d2 } => vec![d2],
            TheoremCase::T22_i { d1, d2 } => vec![d1, d2],
            TheoremCase::T22_ii { d1 } => vec![d1],
            _ => vec![],
        }
    }

    /// True when `f` involves estimated `H^{...}` functions.
    pub fn needs_field(&self) -> bool {
        !self.pickands_spacings().is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TheoremCase::T21_ii { theta1, theta2 } => {
                if !(theta1 >= 0.0 && theta2 >= 0.0 && theta1.is_finite() && theta2.is_finite()) {
                    return Err(invalid("theta1, theta2 must lie in [0, inf)"));
                }
            }
            TheoremCase::T22_i { d1, d2 } if d1 == d2 => return Err(Error::EqualSpacings(d1)),
            _ => {}
        }
        for d in self.pickands_spacings() {
            if !(d > 0.0 && d.is_finite()) {
                return Err(invalid(format!("Pickands spacing must be positive, got {d}")));
            }
        }
        Ok(())
    }
}

/// Pickands-type constants consumed by `f`. When `field` is set, `h_alpha`
/// and `h_d1`/`h_d2` are expected to come from the same batch, which makes
/// the inclusion-exclusion terms consistent path by path.
#[derive(Debug, Clone, Default)]
pub struct CaseConstants {
    pub h_alpha: Option<f64>,
    pub h_d1: Option<f64>,
    pub h_d2: Option<f64>,
    pub field: Option<Arc<FieldBatch>>,
}

impl CaseConstants {
    /// Every constant taken from one batch.
    pub fn from_batch(case: &TheoremCase, batch: Arc<FieldBatch>) -> Result<Self> {
        let h_alpha = Some(batch.h_alpha()?.value);
        let (h_d1, h_d2) = match *case {
            TheoremCase::T21_iii { d2 } => (None, Some(batch.h_d(d2)?.value)),
            TheoremCase::T22_i { d1, d2 } => (Some(batch.h_d(d1)?.value), Some(batch.h_d(d2)?.value)),
            TheoremCase::T22_ii { d1 } => (Some(batch.h_d(d1)?.value), None),
            _ => (None, None),
        };
        Ok(Self {
            h_alpha,
            h_d1,
            h_d2,
            field: Some(batch),
        })
    }

    fn get(v: Option<f64>, name: &str) -> Result<f64> {
        match v {
            Some(h) if h > 0.0 => Ok(h),
            Some(h) => Err(Error::MissingConstant(format!("{name} must be positive, got {h}"))),
            None => Err(Error::MissingConstant(name.into())),
        }
    }

    fn field(&self) -> Result<&FieldBatch> {
        self.field
            .as_deref()
            .ok_or_else(|| Error::MissingConstant("field batch for H^{...} terms".into()))
    }
}

/// Clamps infinities (and huge values) to `±ARG_CLAMP`.
#[inline]
pub fn clamp_arg(v: f64) -> f64 {
    if v.is_nan() {
        v
    } else {
        v.clamp(-ARG_CLAMP, ARG_CLAMP)
    }
}

/// The exponent function `f(x, y1, y2)` of the case.
pub fn f_case(case: &TheoremCase, consts: &CaseConstants, x: f64, y1: f64, y2: f64) -> Result<f64> {
    let (x, y1, y2) = (clamp_arg(x), clamp_arg(y1), clamp_arg(y2));
    if x.is_nan() || y1.is_nan() || y2.is_nan() {
        return Err(invalid("NaN argument"));
    }
    let e = |v: f64| (-v).exp();
    Ok(match *case {
        TheoremCase::T21_i => e(x) + e(y1) + e(y2),
        TheoremCase::T21_ii { theta1, theta2 } => {
            let theta = theta2 - theta1;
            let base = e(x) + e(y1) + e(y2);
            if y1 > y2 + theta {
                base - e(y1 + theta1)
            } else {
                base - e(y2 + theta2)
            }
        }
        TheoremCase::T21_iii { d2 } => {
            let ha = CaseConstants::get(consts.h_alpha, "H_alpha")?;
            let hd = CaseConstants::get(consts.h_d2, "H_D2")?;
            let h = consts.field()?.value_min(&[
                (Support::Continuous, ha.ln() + x),
                (Support::Grid(d2), hd.ln() + y2),
            ])?;
            e(x) + e(y1) + e(y2) - h
        }
        TheoremCase::T21_iv => e(y1) + e(x.min(y2)),
        TheoremCase::T22_i { d1, d2 } => {
            let ha = CaseConstants::get(consts.h_alpha, "H_alpha")?.ln();
            let h1 = CaseConstants::get(consts.h_d1, "H_D1")?.ln();
            let h2 = CaseConstants::get(consts.h_d2, "H_D2")?.ln();
            let f = consts.field()?;
            let (c, g1, g2) = (Support::Continuous, Support::Grid(d1), Support::Grid(d2));
            let a = f.value_min(&[(c, ha + x), (g1, h1 + y1)])?;
            let b = f.value_min(&[(c, ha + x), (g2, h2 + y2)])?;
            let cc = f.value_min(&[(g1, h1 + y1), (g2, h2 + y2)])?;
            let d = f.value_min(&[(c, ha + x), (g1, h1 + y1), (g2, h2 + y2)])?;
            e(x) + e(y1) + e(y2) - a - b - cc + d
        }
        TheoremCase::T22_ii { d1 } => {
            let ha = CaseConstants::get(consts.h_alpha, "H_alpha")?.ln();
            let h1 = CaseConstants::get(consts.h_d1, "H_D1")?.ln();
            let m = x.min(y2);
            let h = consts
                .field()?
                .value_min(&[(Support::Continuous, ha + m), (Support::Grid(d1), h1 + y1)])?;
            e(m) + e(y1) - h
        }
        TheoremCase::T22_iii => e(x.min(y1).min(y2)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pickands::FieldParams;

    fn closed() -> CaseConstants {
        CaseConstants::default()
    }

    #[test]
    fn printed_examples() {
        let c = closed();
        assert_eq!(f_case(&TheoremCase::T21_i, &c, 0.0, 0.0, 0.0).unwrap(), 3.0);
        assert_eq!(f_case(&TheoremCase::T21_iv, &c, 0.0, 0.0, 0.0).unwrap(), 2.0);
        let ii = TheoremCase::T21_ii {
            theta1: 0.0,
            theta2: 2f64.ln(),
        };
        assert!((f_case(&ii, &c, 0.0, 0.0, 0.0).unwrap() - 2.5).abs() < 1e-15);
        let v = f_case(&TheoremCase::T22_iii, &c, -1.0, 0.0, 2.0).unwrap();
        assert!((v - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn tie_break_uses_strict_inequality() {
        let ii = TheoremCase::T21_ii {
            theta1: 0.5,
            theta2: 1.0,
        };
        let c = closed();
        // y1 = y2 + theta: second branch
        let v = f_case(&ii, &c, 0.0, 0.5, 0.0).unwrap();
        let want = 1.0 + (-0.5f64).exp() + 1.0 - (-1.0f64).exp();
        assert!((v - want).abs() < 1e-15);
    }

    #[test]
    fn missing_constants_reported() {
        let e = f_case(&TheoremCase::T21_iii { d2: 1.0 }, &closed(), 0.0, 0.0, 0.0).unwrap_err();
        assert!(matches!(e, Error::MissingConstant(_)));
    }

    #[test]
    fn estimated_cases_homogeneous_and_nonnegative() {
        let batch = Arc::new(
            FieldBatch::sample(
                FieldParams::new(1.0, 16.0, 1.0 / 64.0, 500, 3),
                &[Support::Grid(0.5), Support::Grid(1.0)],
            )
            .unwrap(),
        );
        for case in [
            TheoremCase::T21_iii { d2: 1.0 },
            TheoremCase::T22_i { d1: 0.5, d2: 1.0 },
            TheoremCase::T22_ii { d1: 0.5 },
        ] {
            let k = CaseConstants::from_batch(&case, batch.clone()).unwrap();
            for &(x, y1, y2) in &[(0.0, 0.0, 0.0), (-1.0, 0.5, 2.0), (1.5, -0.3, -1.2), (2.0, 2.0, -2.0)] {
                let f0 = f_case(&case, &k, x, y1, y2).unwrap();
                assert!(f0 >= -1e-12, "{case:?} {f0}");
                for c in [-1.0, 2f64.ln(), 2.0] {
                    let fc = f_case(&case, &k, x + c, y1 + c, y2 + c).unwrap();
                    assert!((fc * c.exp() - f0).abs() <= 1e-12 * f0.abs().max(1.0), "{case:?}");
                }
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn closed_forms_shift_homogeneous(
            x in -5.0f64..5.0, y1 in -5.0f64..5.0, y2 in -5.0f64..5.0,
            c in -3.0f64..3.0, t1 in -1.0f64..1.0, t2 in -1.0f64..1.0,
        ) {
            let ii = TheoremCase::T21_ii { theta1: t1, theta2: t2 };
            for case in [TheoremCase::T21_i, ii, TheoremCase::T21_iv, TheoremCase::T22_iii] {
                let f0 = f_case(&case, &closed(), x, y1, y2).unwrap();
                let fc = f_case(&case, &closed(), x + c, y1 + c, y2 + c).unwrap();
                proptest::prop_assert!((fc * c.exp() - f0).abs() <= 1e-12 * f0.abs().max(1.0));
            }
        }
    }

    #[test]
    fn infinite_arguments_clamped() {
        let v = f_case(&TheoremCase::T21_i, &closed(), f64::INFINITY, f64::INFINITY, 0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-16);
        assert!(f_case(&TheoremCase::T21_i, &closed(), f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn case_json() {
        let c: TheoremCase = serde_json::from_str(r#"{"case":"T22_i","d1":1.0,"d2":0.5}"#).unwrap();
        assert_eq!(c, TheoremCase::T22_i { d1: 1.0, d2: 0.5 });
        assert!(TheoremCase::T22_i { d1: 1.0, d2: 1.0 }.validate().is_err());
    }
}
