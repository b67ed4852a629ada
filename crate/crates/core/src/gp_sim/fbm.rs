//! Fractional Brownian motion via exact fractional Gaussian noise.

use rand::Rng;
use rand_distr::StandardNormal;

use super::circulant::CirculantEmbedding;
use super::model::SimulationMesh;
use super::sampler::Workspace;
use crate::error::{invalid, Result};

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let k = k as f64;
    let h2 = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

#[derive(Debug, Clone)]
enum FbmEngine {
    /// `H = 1`: `B(t) = t N`.
    Line,
    /// `H = 1/2`: independent increments.
    Brownian,
    Noise(CirculantEmbedding),
}

/// Sampler of `B_H` on `{k h : k = 0..n}` with `B_H(0) = 0`.
#[derive(Debug, Clone)]
pub struct FbmSampler {
    hurst: f64,
    mesh: SimulationMesh,
    engine: FbmEngine,
}

impl FbmSampler {
    pub fn new(hurst: f64, mesh: &SimulationMesh) -> Result<Self> {
        if !(hurst > 0.0 && hurst <= 1.0) {
            return Err(invalid(format!("Hurst index must lie in (0,1], got {hurst}")));
        }
        let engine = if hurst == 1.0 {
            FbmEngine::Line
        } else if hurst == 0.5 {
            FbmEngine::Brownian
        } else {
            FbmEngine::Noise(CirculantEmbedding::for_kernel(
                |k| fgn_autocovariance(hurst, k),
                mesh.n_points - 1,
            )?)
        };
        Ok(Self {
            hurst,
            mesh: *mesh,
            engine,
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn mesh(&self) -> &SimulationMesh {
        &self.mesh
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, ws: &mut Workspace, out: &mut [f64]) {
        let n = self.mesh.n_points;
        debug_assert_eq!(out.len(), n);
        let h = self.mesh.spacing;
        out[0] = 0.0;
        match &self.engine {
            FbmEngine::Line => {
                let g: f64 = rng.sample(StandardNormal);
                for (k, v) in out.iter_mut().enumerate() {
                    *v = k as f64 * h * g;
                }
            }
            FbmEngine::Brownian => {
                let s = h.sqrt();
                let mut acc = 0.0;
                for v in out.iter_mut().skip(1) {
                    let e: f64 = rng.sample(StandardNormal);
                    acc += s * e;
                    *v = acc;
                }
            }
            FbmEngine::Noise(emb) => {
                let mut a = std::mem::take(&mut ws.spare_a);
                let mut b = std::mem::take(&mut ws.spare_b);
                a.resize(n - 1, 0.0);
                b.resize(n - 1, 0.0);
                emb.sample_pair(rng, &mut ws.circulant, &mut a, &mut b);
                let s = h.powf(self.hurst);
                let mut acc = 0.0;
                for (v, inc) in out.iter_mut().skip(1).zip(&a) {
                    acc += s * inc;
                    *v = acc;
                }
                ws.spare_a = a;
                ws.spare_b = b;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fgn_covariance_special_cases() {
        // H = 1/2 is white noise
        assert_eq!(fgn_autocovariance(0.5, 0), 1.0);
        assert!(fgn_autocovariance(0.5, 3).abs() < 1e-15);
        // H = 1 is perfectly correlated
        assert!((fgn_autocovariance(1.0, 5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_hurst_out_of_range() {
        let mesh = SimulationMesh::new(0.1, 8).unwrap();
        assert!(FbmSampler::new(0.0, &mesh).is_err());
        assert!(FbmSampler::new(1.2, &mesh).is_err());
    }
}
