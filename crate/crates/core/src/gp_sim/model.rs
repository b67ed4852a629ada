use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Short-range correlation family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum KernelFamily {
    /// `exp(-C |t|^alpha)`
    #[default]
    ExpPower,
}

/// Correlation model of one stationary component.
///
/// The short-range kernel is `exp(-C |t|^alpha)`, which behaves like
/// `1 - C|t|^alpha` at the origin and decays faster than any logarithm at
/// infinity. Long-range dependence of strength `r_long` is added on top by
/// the random-effect construction in [`super::VectorSampler`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationModel {
    pub alpha: f64,
    pub c: f64,
    #[serde(default)]
    pub r_long: f64,
    #[serde(default)]
    pub family: KernelFamily,
}

impl CorrelationModel {
    pub fn new(alpha: f64, c: f64, r_long: f64) -> Result<Self> {
        let m = Self {
            alpha,
            c,
            r_long,
            family: KernelFamily::ExpPower,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(invalid(format!("alpha must lie in (0,2], got {}", self.alpha)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(invalid(format!("C must be positive and finite, got {}", self.c)));
        }
        if !(self.r_long >= 0.0 && self.r_long.is_finite()) {
            return Err(invalid(format!(
                "long-range parameter must be finite and >= 0, got {}",
                self.r_long
            )));
        }
        Ok(())
    }

    /// Short-range kernel value at lag `t`.
    #[inline]
    pub fn kernel(&self, t: f64) -> f64 {
        (-self.c * t.abs().powf(self.alpha)).exp()
    }

    /// Same model without long-range part.
    pub fn short_range(&self) -> Self {
        Self {
            r_long: 0.0,
            ..*self
        }
    }
}

/// Uniform simulation mesh `{k * spacing : k = 0..n_points}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationMesh {
    pub spacing: f64,
    pub n_points: usize,
}

impl SimulationMesh {
    pub fn new(spacing: f64, n_points: usize) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(invalid(format!("mesh spacing must be positive, got {spacing}")));
        }
        if n_points < 2 {
            return Err(invalid(format!("mesh needs at least 2 points, got {n_points}")));
        }
        Ok(Self { spacing, n_points })
    }

    /// Smallest mesh with the given spacing whose last point reaches `horizon`.
    pub fn covering(horizon: f64, spacing: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid(format!("horizon must be positive, got {horizon}")));
        }
        let steps = (horizon / spacing - 1e-9).ceil().max(1.0) as usize;
        Self::new(spacing, steps + 1)
    }

    pub fn horizon(&self) -> f64 {
        (self.n_points - 1) as f64 * self.spacing
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.spacing
    }
}

/// Covariance of the common random effect `Z`: `r_kl / sqrt(r_kk r_ll)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingVector {
    pub p: usize,
    /// Row-major `p x p`.
    pub cov: Vec<f64>,
}

impl MixingVector {
    pub fn from_cross(p: usize, cross: &[f64]) -> Self {
        let mut cov = vec![0.0; p * p];
        for k in 0..p {
            for l in 0..p {
                let denom = cross[k * p + k] * cross[l * p + l];
                cov[k * p + l] = if denom > 0.0 {
                    cross[k * p + l] / denom.sqrt()
                } else {
                    0.0
                };
            }
        }
        Self { p, cov }
    }

    pub fn identity(p: usize) -> Self {
        let mut cov = vec![0.0; p * p];
        for k in 0..p {
            cov[k * p + k] = 1.0;
        }
        Self { p, cov }
    }

    /// Lower Cholesky factor of a positive semi-definite matrix. Columns with
    /// a vanishing pivot are left at zero.
    pub fn cholesky(&self) -> Result<Vec<f64>> {
        let p = self.p;
        let a = &self.cov;
        let mut l = vec![0.0; p * p];
        for j in 0..p {
            let mut d = a[j * p + j];
            for k in 0..j {
                d -= l[j * p + k] * l[j * p + k];
            }
            let tol = 1e-10 * a[j * p + j].abs().max(1.0);
            if d < -tol {
                return Err(Error::NonPsd { index: j, pivot: d });
            }
            if d <= tol {
                // zero pivot: the rest of the column must vanish too
                for i in j + 1..p {
                    let mut s = a[i * p + j];
                    for k in 0..j {
                        s -= l[i * p + k] * l[j * p + k];
                    }
                    if s.abs() > 1e-8 {
                        return Err(Error::NonPsd { index: j, pivot: d });
                    }
                }
                continue;
            }
            let djj = d.sqrt();
            l[j * p + j] = djj;
            for i in j + 1..p {
                let mut s = a[i * p + j];
                for k in 0..j {
                    s -= l[i * p + k] * l[j * p + k];
                }
                l[i * p + j] = s / djj;
            }
        }
        Ok(l)
    }
}

/// A `p`-variate jointly stationary process observed on `[0, horizon_t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorProcessSpec {
    pub components: Vec<CorrelationModel>,
    /// Row-major `p x p` long-range dependence matrix `r_kl`.
    pub cross: Vec<f64>,
    pub horizon_t: f64,
}

impl VectorProcessSpec {
    pub fn new(components: Vec<CorrelationModel>, cross: Vec<f64>, horizon_t: f64) -> Result<Self> {
        let s = Self {
            components,
            cross,
            horizon_t,
        };
        s.validate()?;
        Ok(s)
    }

    /// Independent components without long-range dependence.
    pub fn independent(model: CorrelationModel, p: usize, horizon_t: f64) -> Result<Self> {
        let m = model.short_range();
        Self::new(vec![m; p], vec![0.0; p * p], horizon_t)
    }

    pub fn p(&self) -> usize {
        self.components.len()
    }

    pub fn with_horizon(&self, horizon_t: f64) -> Self {
        Self {
            horizon_t,
            ..self.clone()
        }
    }

    pub fn r_diag(&self) -> Vec<f64> {
        let p = self.p();
        (0..p).map(|k| self.cross[k * p + k]).collect()
    }

    pub fn mixing(&self) -> MixingVector {
        MixingVector::from_cross(self.p(), &self.cross)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p();
        if p == 0 {
            return Err(invalid("process needs at least one component"));
        }
        if self.cross.len() != p * p {
            return Err(invalid(format!(
                "cross matrix has {} entries, expected {}",
                self.cross.len(),
                p * p
            )));
        }
        for m in &self.components {
            m.validate()?;
        }
        for k in 0..p {
            if (self.cross[k * p + k] - self.components[k].r_long).abs() > 1e-12 {
                return Err(invalid(format!(
                    "cross[{k},{k}] = {} differs from component r_long = {}",
                    self.cross[k * p + k],
                    self.components[k].r_long
                )));
            }
            for l in 0..p {
                let v = self.cross[k * p + l];
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(invalid(format!("r_{k}{l} must be finite and >= 0, got {v}")));
                }
                if (v - self.cross[l * p + k]).abs() > 1e-12 {
                    return Err(invalid("cross matrix must be symmetric"));
                }
                if k != l && v > 0.0 && self.cross[k * p + k] * self.cross[l * p + l] == 0.0 {
                    return Err(invalid(format!(
                        "r_{k}{l} > 0 needs positive r_{k}{k} and r_{l}{l} to be realisable"
                    )));
                }
            }
        }
        if !(self.horizon_t > 0.0 && self.horizon_t.is_finite()) {
            return Err(invalid(format!("horizon must be positive, got {}", self.horizon_t)));
        }
        self.mixing().cholesky()?;
        Ok(())
    }

    /// `rho_kl(T) = r_kl / ln T`, checked against the horizon constraints.
    pub fn rho(&self) -> Result<Vec<f64>> {
        let p = self.p();
        let ln_t = self.horizon_t.ln();
        let max_r = self.r_diag().into_iter().fold(0.0_f64, f64::max);
        if max_r > 0.0 && ln_t <= max_r {
            return Err(Error::InvalidHorizon {
                horizon: self.horizon_t,
                max_r,
            });
        }
        let rho: Vec<f64> = self
            .cross
            .iter()
            .map(|&r| if r == 0.0 { 0.0 } else { r / ln_t })
            .collect();
        for k in 0..p {
            for l in 0..p {
                if k != l && rho[k * p + l].abs() >= 1.0 {
                    return Err(invalid(format!(
                        "cross-correlation {} between components {k},{l} must be below 1 in absolute value",
                        rho[k * p + l]
                    )));
                }
            }
        }
        Ok(rho)
    }
}
