use rand::Rng;
use rand_distr::StandardNormal;

use super::circulant::{CirculantEmbedding, CirculantScratch};
use super::model::{CorrelationModel, SimulationMesh, VectorProcessSpec};
use crate::error::Result;

/// Lag covariances `exp(-C (k h)^alpha)` for `k = 0..n_points`.
pub fn covariance_sequence(model: &CorrelationModel, mesh: &SimulationMesh) -> Vec<f64> {
    (0..mesh.n_points)
        .map(|k| model.kernel(mesh.time(k)))
        .collect()
}

/// Which exact algorithm backs a [`ScalarSampler`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Markov recursion when `alpha == 1`, circulant embedding otherwise.
    Auto,
    Circulant,
}

#[derive(Debug, Clone)]
enum Engine {
    Circulant(CirculantEmbedding),
    /// Exact AR(1) recursion of the Ornstein-Uhlenbeck kernel `exp(-C|t|)`.
    Markov { phi: f64, innovation: f64 },
}

/// Worker-local buffers reused across replications.
#[derive(Default)]
pub struct Workspace {
    pub(crate) circulant: CirculantScratch,
    pub(crate) spare: Vec<f64>,
    pub(crate) spare_a: Vec<f64>,
    pub(crate) spare_b: Vec<f64>,
}

/// Sampler for one stationary unit-variance component on a fixed mesh.
#[derive(Debug, Clone)]
pub struct ScalarSampler {
    n: usize,
    engine: Engine,
}

impl ScalarSampler {
    pub fn new(model: &CorrelationModel, mesh: &SimulationMesh) -> Result<Self> {
        Self::with_backend(model, mesh, Backend::Auto)
    }

    pub fn with_backend(
        model: &CorrelationModel,
        mesh: &SimulationMesh,
        backend: Backend,
    ) -> Result<Self> {
        model.validate()?;
        let n = mesh.n_points;
        let engine = if backend == Backend::Auto && model.alpha == 1.0 {
            let phi = (-model.c * mesh.spacing).exp();
            Engine::Markov {
                phi,
                innovation: (1.0 - phi * phi).sqrt(),
            }
        } else {
            let h = mesh.spacing;
            let m = *model;
            Engine::Circulant(CirculantEmbedding::for_kernel(
                move |k| m.kernel(k as f64 * h),
                n,
            )?)
        };
        Ok(Self { n, engine })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_markov(&self) -> bool {
        matches!(self.engine, Engine::Markov { .. })
    }

    fn markov_fill<R: Rng + ?Sized>(phi: f64, innovation: f64, rng: &mut R, out: &mut [f64]) {
        let mut x: f64 = rng.sample(StandardNormal);
        out[0] = x;
        for v in out.iter_mut().skip(1) {
            let e: f64 = rng.sample(StandardNormal);
            x = phi * x + innovation * e;
            *v = x;
        }
    }

    /// Fills `out` (length `n`) with one path.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, ws: &mut Workspace, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n);
        match &self.engine {
            Engine::Markov { phi, innovation } => Self::markov_fill(*phi, *innovation, rng, out),
            Engine::Circulant(emb) => {
                let mut spare = std::mem::take(&mut ws.spare);
                spare.resize(self.n, 0.0);
                emb.sample_pair(rng, &mut ws.circulant, out, &mut spare);
                ws.spare = spare;
            }
        }
    }

    /// Fills two independent paths; with circulant embedding this costs one FFT.
    pub fn sample_pair<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        ws: &mut Workspace,
        a: &mut [f64],
        b: &mut [f64],
    ) {
        match &self.engine {
            Engine::Markov { phi, innovation } => {
                Self::markov_fill(*phi, *innovation, rng, a);
                Self::markov_fill(*phi, *innovation, rng, b);
            }
            Engine::Circulant(emb) => emb.sample_pair(rng, &mut ws.circulant, a, b),
        }
    }
}

/// One replication of a vector process with its building blocks.
#[derive(Debug, Clone)]
pub struct VectorDraw {
    /// Short-range paths, one per component.
    pub eta: Vec<Vec<f64>>,
    /// Common random effect.
    pub z: Vec<f64>,
    /// Output paths `sqrt(1-rho_kk) eta_k + sqrt(rho_kk) Z_k`.
    pub x: Vec<Vec<f64>>,
}

/// Random-effect generator for a [`VectorProcessSpec`] at its horizon:
/// `X_k = sqrt(1 - rho_kk) eta_k + sqrt(rho_kk) Z_k` with `rho_kk = r_kk / ln T`.
#[derive(Debug, Clone)]
pub struct VectorSampler {
    samplers: Vec<ScalarSampler>,
    /// `pair_with[k] == true` when component `k` and `k+1` share a model.
    pair_with_next: Vec<bool>,
    chol: Vec<f64>,
    short_scale: Vec<f64>,
    effect_scale: Vec<f64>,
    p: usize,
    n: usize,
}

impl VectorSampler {
    pub fn new(spec: &VectorProcessSpec, mesh: &SimulationMesh) -> Result<Self> {
        Self::with_backend(spec, mesh, Backend::Auto)
    }

    pub fn with_backend(
        spec: &VectorProcessSpec,
        mesh: &SimulationMesh,
        backend: Backend,
    ) -> Result<Self> {
        spec.validate()?;
        let rho = spec.rho()?;
        let p = spec.p();
        let chol = spec.mixing().cholesky()?;
        let mut samplers: Vec<ScalarSampler> = Vec::with_capacity(p);
        for (k, m) in spec.components.iter().enumerate() {
            let short = m.short_range();
            if k > 0 && spec.components[k - 1].short_range() == short {
                let prev = samplers[k - 1].clone();
                samplers.push(prev);
            } else {
                samplers.push(ScalarSampler::with_backend(&short, mesh, backend)?);
            }
        }
        let mut pair_with_next = vec![false; p];
        let mut k = 0;
        while k + 1 < p {
            if spec.components[k].short_range() == spec.components[k + 1].short_range() {
                pair_with_next[k] = true;
                k += 2;
            } else {
                k += 1;
            }
        }
        let short_scale = (0..p).map(|k| (1.0 - rho[k * p + k]).sqrt()).collect();
        let effect_scale = (0..p).map(|k| rho[k * p + k].sqrt()).collect();
        Ok(Self {
            samplers,
            pair_with_next,
            chol,
            short_scale,
            effect_scale,
            p,
            n: mesh.n_points,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    fn fill_eta<R: Rng + ?Sized>(&self, rng: &mut R, ws: &mut Workspace, eta: &mut [Vec<f64>]) {
        let mut k = 0;
        while k < self.p {
            if self.pair_with_next[k] {
                let (lo, hi) = eta.split_at_mut(k + 1);
                self.samplers[k].sample_pair(rng, ws, &mut lo[k], &mut hi[0]);
                k += 2;
            } else {
                self.samplers[k].sample(rng, ws, &mut eta[k]);
                k += 1;
            }
        }
    }

    fn draw_effect<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let p = self.p;
        let g: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        (0..p)
            .map(|i| (0..=i).map(|j| self.chol[i * p + j] * g[j]).sum())
            .collect()
    }

    /// Draws one replication into `out` (resized to `p` paths of `n` points)
    /// and returns the common random effect.
    pub fn draw_into<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        ws: &mut Workspace,
        out: &mut Vec<Vec<f64>>,
    ) -> Vec<f64> {
        out.resize_with(self.p, Vec::new);
        for path in out.iter_mut() {
            path.resize(self.n, 0.0);
        }
        self.fill_eta(rng, ws, out);
        let z = self.draw_effect(rng);
        for k in 0..self.p {
            let (s, e) = (self.short_scale[k], self.effect_scale[k] * z[k]);
            if s != 1.0 || e != 0.0 {
                for v in out[k].iter_mut() {
                    *v = s * *v + e;
                }
            }
        }
        z
    }

    /// Same random numbers as [`Self::draw_into`], keeping the components apart.
    pub fn draw_detailed<R: Rng + ?Sized>(&self, rng: &mut R, ws: &mut Workspace) -> VectorDraw {
        let mut eta = vec![vec![0.0; self.n]; self.p];
        self.fill_eta(rng, ws, &mut eta);
        let z = self.draw_effect(rng);
        let x = (0..self.p)
            .map(|k| {
                let (s, e) = (self.short_scale[k], self.effect_scale[k] * z[k]);
                eta[k].iter().map(|v| s * v + e).collect()
            })
            .collect();
        VectorDraw { eta, z, x }
    }

    pub fn short_scale(&self) -> &[f64] {
        &self.short_scale
    }

    pub fn effect_scale(&self) -> &[f64] {
        &self.effect_scale
    }
}
