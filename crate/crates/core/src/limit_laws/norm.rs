use serde::{Deserialize, Serialize};

use super::grid::{GridKind, GridSpec};
use crate::error::{invalid, Error, Result};

/// Normalisation `a_T (M - b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormConstants {
    pub a: f64,
    pub b: f64,
}

impl NormConstants {
    #[inline]
    pub fn normalize(&self, m: f64) -> f64 {
        self.a * (m - self.b)
    }
}

/// Which maximum is being normalised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MaxTarget {
    Continuous,
    Grid(GridKind),
}

/// Pickands-type constants available to the normalisation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstantTable {
    pub h_alpha: Option<f64>,
    /// `(D, H_{D,alpha})` pairs.
    pub h_d: Vec<(f64, f64)>,
}

impl ConstantTable {
    pub fn h_d(&self, d: f64) -> Option<f64> {
        self.h_d
            .iter()
            .find(|(k, _)| (k - d).abs() <= 1e-12 * d.abs().max(1.0))
            .map(|&(_, v)| v)
    }
}

/// `a_T = sqrt(2 ln T)`.
pub fn a_t(t: f64) -> Result<f64> {
    if !(t > 1.0 && t.is_finite()) {
        return Err(invalid(format!("horizon must exceed 1, got {t}")));
    }
    Ok((2.0 * t.ln()).sqrt())
}

fn pickands_b(a: f64, alpha: f64, c: f64, h: f64) -> f64 {
    let inner =
        (2.0 * std::f64::consts::PI).powf(-0.5) * c.powf(1.0 / alpha) * h * a.powf(-1.0 + 2.0 / alpha);
    a + inner.ln() / a
}

/// `a_T` and the location constant for `target`. Sparse grids need the
/// actual `grid` to evaluate `delta(T)`.
pub fn norm_constants(
    t: f64,
    alpha: f64,
    c: f64,
    target: MaxTarget,
    grid: Option<&GridSpec>,
    constants: &ConstantTable,
) -> Result<NormConstants> {
    let a = a_t(t)?;
    let need_alpha = || {
        constants
            .h_alpha
            .ok_or_else(|| Error::MissingConstant("H_alpha".into()))
    };
    let b = match target {
        MaxTarget::Continuous | MaxTarget::Grid(GridKind::Dense) => {
            pickands_b(a, alpha, c, need_alpha()?)
        }
        MaxTarget::Grid(GridKind::Pickands { d }) => {
            let h = constants
                .h_d(d)
                .ok_or_else(|| Error::MissingConstant(format!("H_D for D = {d}")))?;
            pickands_b(a, alpha, c, h)
        }
        MaxTarget::Grid(GridKind::Sparse) => {
            let g = grid.ok_or_else(|| invalid("sparse normalisation needs the grid spacing"))?;
            let delta = g.spacing_at(t, alpha)?;
            a - (a * delta * (2.0 * std::f64::consts::PI).sqrt()).ln() / a
        }
    };
    Ok(NormConstants { a, b })
}
