use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::field::{default_mesh, Estimator, FieldBatch, FieldParams, Support};
use crate::error::{Error, Result};
use crate::stats::MeanEstimate;

/// Which Pickands-type constant an estimate refers to, with its arguments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ConstantKind {
    /// `H_alpha`
    #[serde(rename = "H")]
    HAlpha,
    /// `H_{D,alpha}`
    #[serde(rename = "H_D")]
    HD { d: f64 },
    /// `H^{x,y}_{D,alpha}`
    #[serde(rename = "H_xy")]
    HXY { d: f64, x: f64, y: f64 },
    /// `H^{z1,z2}_{D1,D2,alpha}`
    #[serde(rename = "H_D1D2")]
    HD1D2 { d1: f64, d2: f64, z1: f64, z2: f64 },
    /// `H^{x,z1,z2}_{D1,D2,alpha}`
    #[serde(rename = "H_x_z1z2")]
    HXZ1Z2 {
        d1: f64,
        d2: f64,
        x: f64,
        z1: f64,
        z2: f64,
    },
}

impl ConstantKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ConstantKind::HAlpha => "H",
            ConstantKind::HD { .. } => "H_D",
            ConstantKind::HXY { .. } => "H_xy",
            ConstantKind::HD1D2 { .. } => "H_D1D2",
            ConstantKind::HXZ1Z2 { .. } => "H_x_z1z2",
        }
    }

    /// `(D1, D2, x, z1, z2)` as laid out in the CSV table; for `H_xy` the
    /// second offset `y` goes to the `z1` column.
    pub fn columns(&self) -> [Option<f64>; 5] {
        match *self {
            ConstantKind::HAlpha => [None; 5],
            ConstantKind::HD { d } => [Some(d), None, None, None, None],
            ConstantKind::HXY { d, x, y } => [Some(d), None, Some(x), Some(y), None],
            ConstantKind::HD1D2 { d1, d2, z1, z2 } => {
                [Some(d1), Some(d2), None, Some(z1), Some(z2)]
            }
            ConstantKind::HXZ1Z2 { d1, d2, x, z1, z2 } => {
                [Some(d1), Some(d2), Some(x), Some(z1), Some(z2)]
            }
        }
    }
}

impl fmt::Display for ConstantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Monte Carlo estimate of a Pickands-type constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub kind: ConstantKind,
    pub alpha: f64,
    pub value: f64,
    pub stderr: f64,
    pub lambda: f64,
    pub mesh_spacing: f64,
    pub reps: usize,
    pub estimator: Estimator,
    /// Estimate from the same paths on `[0, lambda/2]`.
    pub half_lambda_value: Option<f64>,
    /// Fewer than two replications: the standard error is not meaningful.
    pub low_confidence: bool,
}

impl ConstantEstimate {
    /// Linear extrapolation in `1/lambda` from the full and half horizons.
    pub fn extrapolated(&self) -> Option<f64> {
        self.half_lambda_value.map(|h| 2.0 * self.value - h)
    }

    /// True when the half-horizon estimate differs by more than three
    /// standard errors, i.e. boundary bias is visible at this `lambda`.
    pub fn lambda_bias_flag(&self) -> bool {
        match self.half_lambda_value {
            Some(h) => (self.value - h).abs() > 3.0 * self.stderr,
            None => false,
        }
    }
}

/// Header of the constants CSV table.
pub const CONSTANTS_CSV_HEADER: &str = "kind,alpha,D1,D2,x,z1,z2,lambda,mesh,reps,value,stderr";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes estimates as CSV with [`CONSTANTS_CSV_HEADER`].
pub fn write_constants_csv<W: Write>(mut w: W, rows: &[ConstantEstimate]) -> std::io::Result<()> {
    writeln!(w, "{CONSTANTS_CSV_HEADER}")?;
    for r in rows {
        let c = r.kind.columns();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.kind.tag(),
            r.alpha,
            opt(c[0]),
            opt(c[1]),
            opt(c[2]),
            opt(c[3]),
            opt(c[4]),
            r.lambda,
            r.mesh_spacing,
            r.reps,
            r.value,
            r.stderr
        )?;
    }
    Ok(())
}

impl FieldBatch {
    /// Estimate of `lambda^-1 E[exp(min_i (M_i - offset_i))]` over the listed
    /// supports, plus its half-horizon counterpart.
    pub fn expect_min(&self, offsets: &[(Support, f64)]) -> Result<(MeanEstimate, Option<f64>)> {
        let width = self.supports.len();
        let idx = offsets
            .iter()
            .map(|&(s, off)| Ok((self.support_index(s)?, off)))
            .collect::<Result<Vec<_>>>()?;
        if self.full.n_points == 1 {
            return Err(Error::Precondition("lambda must be positive".into()));
        }
        let full = MeanEstimate::from_slice(&self.full.terms(width, &idx));
        let half = self
            .half
            .as_ref()
            .map(|h| MeanEstimate::from_slice(&h.terms(width, &idx)).mean);
        Ok((full, half))
    }

    /// Point value of [`Self::expect_min`] without the half-horizon pass.
    pub fn value_min(&self, offsets: &[(Support, f64)]) -> Result<f64> {
        let width = self.supports.len();
        let idx = offsets
            .iter()
            .map(|&(s, off)| Ok((self.support_index(s)?, off)))
            .collect::<Result<Vec<_>>>()?;
        let terms = self.full.terms(width, &idx);
        Ok(crate::stats::compensated_sum(terms.iter().copied()) / terms.len() as f64)
    }

    fn estimate(&self, kind: ConstantKind, offsets: &[(Support, f64)]) -> Result<ConstantEstimate> {
        let (m, half) = self.expect_min(offsets)?;
        Ok(ConstantEstimate {
            kind,
            alpha: self.params.alpha,
            value: m.mean,
            stderr: m.stderr,
            lambda: self.params.lambda,
            mesh_spacing: self.params.mesh_spacing,
            reps: self.reps(),
            estimator: self.params.estimator,
            half_lambda_value: half,
            low_confidence: self.reps() < 2,
        })
    }

    pub fn h_alpha(&self) -> Result<ConstantEstimate> {
        self.estimate(ConstantKind::HAlpha, &[(Support::Continuous, 0.0)])
    }

    pub fn h_d(&self, d: f64) -> Result<ConstantEstimate> {
        self.estimate(ConstantKind::HD { d }, &[(Support::Grid(d), 0.0)])
    }

    pub fn h_xy(&self, d: f64, x: f64, y: f64) -> Result<ConstantEstimate> {
        self.estimate(
            ConstantKind::HXY { d, x, y },
            &[(Support::Continuous, x), (Support::Grid(d), y)],
        )
    }

    pub fn h_d1d2(&self, d1: f64, d2: f64, z1: f64, z2: f64) -> Result<ConstantEstimate> {
        if d1 == d2 {
            return Err(Error::EqualSpacings(d1));
        }
        self.estimate(
            ConstantKind::HD1D2 { d1, d2, z1, z2 },
            &[(Support::Grid(d1), z1), (Support::Grid(d2), z2)],
        )
    }

    pub fn h_x_z1z2(&self, d1: f64, d2: f64, x: f64, z1: f64, z2: f64) -> Result<ConstantEstimate> {
        if d1 == d2 {
            return Err(Error::EqualSpacings(d1));
        }
        self.estimate(
            ConstantKind::HXZ1Z2 { d1, d2, x, z1, z2 },
            &[
                (Support::Continuous, x),
                (Support::Grid(d1), z1),
                (Support::Grid(d2), z2),
            ],
        )
    }
}

/// Per-replication maxima of `B*` over the continuous proxy and each grid,
/// from plain one-sided paths.
pub fn field_maxima(
    alpha: f64,
    lambda: f64,
    mesh_spacing: f64,
    supports: &[Support],
    reps: usize,
    seed: u64,
) -> Result<FieldBatch> {
    let params =
        FieldParams::new(alpha, lambda, mesh_spacing, reps, seed).with_estimator(Estimator::Direct);
    FieldBatch::sample(params, supports)
}

pub fn estimate_h_alpha(params: FieldParams) -> Result<ConstantEstimate> {
    FieldBatch::sample(params, &[])?.h_alpha()
}

pub fn estimate_h_d(params: FieldParams, d: f64) -> Result<ConstantEstimate> {
    FieldBatch::sample(params, &[Support::Grid(d)])?.h_d(d)
}

pub fn estimate_h_xy(params: FieldParams, d: f64, x: f64, y: f64) -> Result<ConstantEstimate> {
    FieldBatch::sample(params, &[Support::Grid(d)])?.h_xy(d, x, y)
}

pub fn estimate_h_d1d2(
    params: FieldParams,
    d1: f64,
    d2: f64,
    z1: f64,
    z2: f64,
) -> Result<ConstantEstimate> {
    if d1 == d2 {
        return Err(Error::EqualSpacings(d1));
    }
    FieldBatch::sample(params, &[Support::Grid(d1), Support::Grid(d2)])?.h_d1d2(d1, d2, z1, z2)
}

pub fn estimate_h_x_z1z2(
    params: FieldParams,
    d1: f64,
    d2: f64,
    x: f64,
    z1: f64,
    z2: f64,
) -> Result<ConstantEstimate> {
    if d1 == d2 {
        return Err(Error::EqualSpacings(d1));
    }
    FieldBatch::sample(params, &[Support::Grid(d1), Support::Grid(d2)])?
        .h_x_z1z2(d1, d2, x, z1, z2)
}

/// Field parameters with the default mesh for the given grid spacings.
pub fn params_for(
    alpha: f64,
    lambda: f64,
    spacings: &[f64],
    reps: usize,
    seed: u64,
) -> FieldParams {
    FieldParams::new(alpha, lambda, default_mesh(spacings), reps, seed)
}
