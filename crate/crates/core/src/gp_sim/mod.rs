//! Exact simulation of stationary scalar and vector Gaussian processes and
//! of fractional Brownian motion on uniform meshes.

mod circulant;
mod fbm;
mod model;
mod sampler;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use circulant::{circulant_embed, CirculantEmbedding, EIGEN_TOLERANCE, MAX_DOUBLINGS};
pub use fbm::{fgn_autocovariance, FbmSampler};
pub use model::{CorrelationModel, KernelFamily, MixingVector, SimulationMesh, VectorProcessSpec};
pub use sampler::{covariance_sequence, Backend, ScalarSampler, VectorDraw, VectorSampler, Workspace};

use crate::error::{Error, Result};
use crate::seed::{derive_seed, replication_rng, Stream};

/// Root seed and the derived per-replication seeds of a batch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub root: u64,
    pub per_replication: Vec<u64>,
}

impl SeedRecord {
    fn new(root: u64, stream: Stream, reps: usize) -> Self {
        Self {
            root,
            per_replication: (0..reps as u64)
                .map(|i| derive_seed(root, stream, i))
                .collect(),
        }
    }
}

/// `reps x p x n_points` array of simulated values.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBatch {
    pub values: Vec<f64>,
    pub reps: usize,
    pub p: usize,
    pub mesh: SimulationMesh,
    pub seed_record: SeedRecord,
}

impl PathBatch {
    pub fn path(&self, rep: usize, component: usize) -> &[f64] {
        let n = self.mesh.n_points;
        let start = (rep * self.p + component) * n;
        &self.values[start..start + n]
    }

    /// Grid indices into this batch's mesh.
    pub fn grid_indices(&self, spacing: f64) -> Result<Vec<usize>> {
        Ok(subsample_grid(&self.mesh, spacing)?.indices().collect())
    }

    /// CSV dump: one row per mesh point, columns `t, rep<i>_k<j>...`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "t")?;
        for i in 0..self.reps {
            for k in 0..self.p {
                write!(w, ",rep{i}_k{k}")?;
            }
        }
        writeln!(w)?;
        for t in 0..self.mesh.n_points {
            write!(w, "{}", self.mesh.time(t))?;
            for i in 0..self.reps {
                for k in 0..self.p {
                    write!(w, ",{}", self.path(i, k)[t])?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn collect_batch(
    reps: usize,
    p: usize,
    mesh: &SimulationMesh,
    root: u64,
    stream: Stream,
    fill: impl Fn(usize, &mut Workspace, &mut [f64]) + Sync,
) -> PathBatch {
    let n = mesh.n_points;
    let chunks: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map_init(Workspace::default, |ws, i| {
            let mut v = vec![0.0; p * n];
            fill(i, ws, &mut v);
            v
        })
        .collect();
    PathBatch {
        values: chunks.concat(),
        reps,
        p,
        mesh: *mesh,
        seed_record: SeedRecord::new(root, stream, reps),
    }
}

/// Independent replications of a stationary component with covariance
/// `exp(-C|t|^alpha)`; the long-range parameter of `model` is ignored.
pub fn sample_scalar_paths(
    model: &CorrelationModel,
    mesh: &SimulationMesh,
    reps: usize,
    seed: u64,
) -> Result<PathBatch> {
    sample_scalar_paths_with(model, mesh, reps, seed, Backend::Auto)
}

pub fn sample_scalar_paths_with(
    model: &CorrelationModel,
    mesh: &SimulationMesh,
    reps: usize,
    seed: u64,
    backend: Backend,
) -> Result<PathBatch> {
    let sampler = ScalarSampler::with_backend(&model.short_range(), mesh, backend)?;
    Ok(collect_batch(reps, 1, mesh, seed, Stream::Paths, |i, ws, out| {
        let mut rng = replication_rng(seed, Stream::Paths, i as u64);
        sampler.sample(&mut rng, ws, out);
    }))
}

/// Replications of the random-effect vector process at `spec.horizon_t`.
pub fn sample_vector_paths(
    spec: &VectorProcessSpec,
    mesh: &SimulationMesh,
    reps: usize,
    seed: u64,
) -> Result<PathBatch> {
    let sampler = VectorSampler::new(spec, mesh)?;
    let n = mesh.n_points;
    Ok(collect_batch(reps, spec.p(), mesh, seed, Stream::Paths, |i, ws, out| {
        let mut rng = replication_rng(seed, Stream::Paths, i as u64);
        let mut paths = Vec::new();
        sampler.draw_into(&mut rng, ws, &mut paths);
        for (k, path) in paths.iter().enumerate() {
            out[k * n..(k + 1) * n].copy_from_slice(path);
        }
    }))
}

/// Replications of fractional Brownian motion with Hurst index `hurst`.
pub fn sample_fbm(hurst: f64, mesh: &SimulationMesh, reps: usize, seed: u64) -> Result<PathBatch> {
    let sampler = FbmSampler::new(hurst, mesh)?;
    Ok(collect_batch(reps, 1, mesh, seed, Stream::Paths, |i, ws, out| {
        let mut rng = replication_rng(seed, Stream::Paths, i as u64);
        sampler.sample(&mut rng, ws, out);
    }))
}

/// Uniform grid `{0, s h, 2 s h, ...}` inside a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridStride {
    pub stride: usize,
    pub count: usize,
}

impl GridStride {
    pub fn indices(&self) -> impl Iterator<Item = usize> {
        let s = self.stride;
        (0..self.count).map(move |j| j * s)
    }

    /// Maximum of `path` over the grid.
    #[inline]
    pub fn max_of(&self, path: &[f64]) -> f64 {
        path[..(self.count - 1) * self.stride + 1]
            .iter()
            .step_by(self.stride)
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Relative tolerance for a grid spacing to count as a mesh multiple.
pub const GRID_TOLERANCE: f64 = 1e-9;

/// Mesh indices of `{k * spacing} ∩ [0, horizon]`.
pub fn subsample_grid(mesh: &SimulationMesh, spacing: f64) -> Result<GridStride> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "grid spacing must be positive, got {spacing}"
        )));
    }
    let ratio = spacing / mesh.spacing;
    let stride = ratio.round();
    if stride < 1.0 || (stride * mesh.spacing - spacing).abs() > GRID_TOLERANCE * spacing {
        return Err(Error::GridMeshMismatch {
            spacing,
            mesh: mesh.spacing,
        });
    }
    let stride = stride as usize;
    Ok(GridStride {
        stride,
        count: (mesh.n_points - 1) / stride + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::MeanEstimate;

    fn exp_model() -> CorrelationModel {
        CorrelationModel::new(1.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn covariance_sequence_examples() {
        let m = exp_model();
        let mesh = SimulationMesh::new(0.3, 3).unwrap();
        assert_eq!(covariance_sequence(&m, &mesh)[0], 1.0);
        let m2 = CorrelationModel::new(2.0, 1.0, 0.0).unwrap();
        let mesh = SimulationMesh::new(1.0, 3).unwrap();
        assert!((covariance_sequence(&m2, &mesh)[1] - (-1.0f64).exp()).abs() < 1e-15);
        let m3 = CorrelationModel::new(1.0, 2.0, 0.0).unwrap();
        let mesh = SimulationMesh::new(0.5, 3).unwrap();
        assert!((covariance_sequence(&m3, &mesh)[2] - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn covariance_sequence_strictly_decreasing() {
        for &alpha in &[0.3, 1.0, 1.7, 2.0] {
            let m = CorrelationModel::new(alpha, 0.8, 0.0).unwrap();
            let mesh = SimulationMesh::new(0.05, 40).unwrap();
            let c = covariance_sequence(&m, &mesh);
            assert!(c.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn exponential_kernel_mesh_embeds() {
        let mesh = SimulationMesh::new(0.1, 64).unwrap();
        let eig = circulant_embed(&covariance_sequence(&exp_model(), &mesh)).unwrap();
        assert!(eig.iter().all(|&e| e >= 0.0));
    }

    #[test]
    fn empty_batch_keeps_metadata() {
        let mesh = SimulationMesh::new(0.1, 16).unwrap();
        let b = sample_scalar_paths(&exp_model(), &mesh, 0, 5).unwrap();
        assert_eq!(b.reps, 0);
        assert!(b.values.is_empty());
        assert_eq!(b.mesh, mesh);
        assert_eq!(b.seed_record.root, 5);
    }

    #[test]
    fn identical_seed_gives_identical_batch() {
        let m = CorrelationModel::new(1.5, 1.0, 0.0).unwrap();
        let mesh = SimulationMesh::new(0.1, 50).unwrap();
        let a = sample_scalar_paths(&m, &mesh, 20, 11).unwrap();
        let b = sample_scalar_paths(&m, &mesh, 20, 11).unwrap();
        assert_eq!(a, b);
        let c = sample_scalar_paths(&m, &mesh, 20, 12).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn lag_one_correlation_matches_kernel() {
        let mesh = SimulationMesh::new(0.05, 2048).unwrap();
        let b = sample_scalar_paths_with(&exp_model(), &mesh, 10_000, 3, Backend::Circulant).unwrap();
        let prod: Vec<f64> = (0..b.reps).map(|i| b.path(i, 0)[0] * b.path(i, 0)[1]).collect();
        let est = MeanEstimate::from_slice(&prod);
        let target = (-0.05f64).exp();
        assert!(
            (est.mean - target).abs() < 3.0 * est.stderr,
            "{} vs {target} ± {}",
            est.mean,
            est.stderr
        );
    }

    #[test]
    fn markov_and_circulant_agree_in_law() {
        let mesh = SimulationMesh::new(0.2, 64).unwrap();
        let m = CorrelationModel::new(1.0, 0.7, 0.0).unwrap();
        for backend in [Backend::Auto, Backend::Circulant] {
            let b = sample_scalar_paths_with(&m, &mesh, 20_000, 9, backend).unwrap();
            for lag in [0usize, 1, 5, 20] {
                let prod: Vec<f64> = (0..b.reps)
                    .map(|i| b.path(i, 0)[10] * b.path(i, 0)[10 + lag])
                    .collect();
                let est = MeanEstimate::from_slice(&prod);
                let target = m.kernel(lag as f64 * 0.2);
                assert!((est.mean - target).abs() < 4.0 * est.stderr, "{backend:?} lag {lag}");
            }
        }
    }

    #[test]
    fn zero_dependence_vector_reduces_to_scalar() {
        let mesh = SimulationMesh::new(0.1, 32).unwrap();
        let spec = VectorProcessSpec::independent(exp_model(), 1, 100.0).unwrap();
        let v = sample_vector_paths(&spec, &mesh, 10, 4).unwrap();
        let s = sample_scalar_paths(&exp_model(), &mesh, 10, 4).unwrap();
        assert_eq!(v.values, s.values);
    }

    #[test]
    fn random_effect_identity() {
        let m = CorrelationModel::new(1.3, 1.0, 1.0).unwrap();
        let spec =
            VectorProcessSpec::new(vec![m, m], vec![1.0, 0.5, 0.5, 1.0], 4f64.exp()).unwrap();
        let mesh = SimulationMesh::new(0.1, 40).unwrap();
        let sampler = VectorSampler::new(&spec, &mesh).unwrap();
        let mut ws = Workspace::default();
        let mut rng = replication_rng(1, Stream::Paths, 0);
        let d = sampler.draw_detailed(&mut rng, &mut ws);
        for k in 0..2 {
            let target = 0.25f64.sqrt() * d.z[k];
            for (x, e) in d.x[k].iter().zip(&d.eta[k]) {
                let diff = x - 0.75f64.sqrt() * e;
                assert!((diff - target).abs() <= 1e-12 * target.abs().max(1e-300) + 1e-15);
            }
        }
        // draw_into consumes the same random numbers
        let mut rng = replication_rng(1, Stream::Paths, 0);
        let mut out = Vec::new();
        let z = sampler.draw_into(&mut rng, &mut ws, &mut out);
        assert_eq!(z, d.z);
        assert_eq!(out, d.x);
    }

    #[test]
    fn strong_dependence_long_lag_correlation() {
        let m = CorrelationModel::new(1.0, 1.0, 1.0).unwrap();
        let spec = VectorProcessSpec::new(vec![m], vec![1.0], 4f64.exp()).unwrap();
        let mesh = SimulationMesh::new(1.0, 41).unwrap();
        let b = sample_vector_paths(&spec, &mesh, 20_000, 8).unwrap();
        let prod: Vec<f64> = (0..b.reps).map(|i| b.path(i, 0)[0] * b.path(i, 0)[40]).collect();
        let est = MeanEstimate::from_slice(&prod);
        let target = 0.75 * (-40.0f64).exp() + 0.25;
        assert!((est.mean - target).abs() < 3.0 * est.stderr, "{} vs {target}", est.mean);
    }

    #[test]
    fn cross_correlation_is_r12_over_log_t() {
        let m = CorrelationModel::new(1.0, 1.0, 1.0).unwrap();
        let spec =
            VectorProcessSpec::new(vec![m, m], vec![1.0, 0.5, 0.5, 1.0], 4f64.exp()).unwrap();
        let mesh = SimulationMesh::new(0.5, 8).unwrap();
        let b = sample_vector_paths(&spec, &mesh, 20_000, 21).unwrap();
        let prod: Vec<f64> = (0..b.reps).map(|i| b.path(i, 0)[3] * b.path(i, 1)[3]).collect();
        let est = MeanEstimate::from_slice(&prod);
        assert!((est.mean - 0.125).abs() < 3.0 * est.stderr, "{}", est.mean);
    }

    #[test]
    fn vector_sampler_rejects_short_horizon() {
        let m = CorrelationModel::new(1.0, 1.0, 3.0).unwrap();
        let spec = VectorProcessSpec::new(vec![m], vec![3.0], 10.0).unwrap();
        let mesh = SimulationMesh::new(0.5, 8).unwrap();
        assert!(matches!(
            VectorSampler::new(&spec, &mesh),
            Err(Error::InvalidHorizon { .. })
        ));
    }

    #[test]
    fn stationarity_proxy() {
        let m = CorrelationModel::new(1.5, 1.0, 0.0).unwrap();
        let mesh = SimulationMesh::new(0.1, 200).unwrap();
        let b = sample_scalar_paths(&m, &mesh, 10_000, 17).unwrap();
        let at = |origin: usize| {
            let v: Vec<f64> = (0..b.reps)
                .map(|i| b.path(i, 0)[origin] * b.path(i, 0)[origin + 3])
                .collect();
            MeanEstimate::from_slice(&v)
        };
        let (a, c) = (at(0), at(150));
        let se = (a.stderr.powi(2) + c.stderr.powi(2)).sqrt();
        assert!((a.mean - c.mean).abs() < 3.0 * se);
    }

    #[test]
    fn brownian_fbm_variance() {
        let mesh = SimulationMesh::new(0.01, 101).unwrap();
        let b = sample_fbm(0.5, &mesh, 10_000, 2).unwrap();
        let ends: Vec<f64> = (0..b.reps).map(|i| b.path(i, 0)[100].powi(2)).collect();
        let est = MeanEstimate::from_slice(&ends);
        assert!((est.mean - 1.0).abs() < 3.0 * est.stderr);
        assert!((0..b.reps).all(|i| b.path(i, 0)[0] == 0.0));
    }

    #[test]
    fn hurst_one_paths_are_lines() {
        let mesh = SimulationMesh::new(0.25, 9).unwrap();
        let b = sample_fbm(1.0, &mesh, 5, 2).unwrap();
        for i in 0..5 {
            let p = b.path(i, 0);
            let slope = p[1] / 0.25;
            for (k, v) in p.iter().enumerate() {
                assert!((v - slope * k as f64 * 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fbm_self_similarity() {
        let hurst = 0.35;
        let mesh = SimulationMesh::new(0.05, 81).unwrap();
        let b = sample_fbm(hurst, &mesh, 20_000, 6).unwrap();
        let var_at = |k: usize| {
            let v: Vec<f64> = (0..b.reps).map(|i| b.path(i, 0)[k].powi(2)).collect();
            MeanEstimate::from_slice(&v)
        };
        let base = var_at(20);
        for lambda in [2usize, 4] {
            let scaled = var_at(20 * lambda);
            let ratio = scaled.mean / base.mean;
            // delta-method standard error of the ratio
            let se = ratio
                * ((scaled.stderr / scaled.mean).powi(2) + (base.stderr / base.mean).powi(2))
                    .sqrt();
            let target = (lambda as f64).powf(2.0 * hurst);
            assert!((ratio - target).abs() < 3.0 * se, "{lambda}: {ratio} vs {target}");
        }
        // exact variance at t = 1
        let v1 = var_at(20);
        assert!((v1.mean - 1.0).abs() < 3.0 * v1.stderr);
    }

    #[test]
    fn subsample_examples() {
        let mesh = SimulationMesh::new(0.1, 5).unwrap();
        let all: Vec<usize> = subsample_grid(&mesh, 0.1).unwrap().indices().collect();
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
        let even: Vec<usize> = subsample_grid(&mesh, 0.2).unwrap().indices().collect();
        assert_eq!(even, vec![0, 2, 4]);
        assert!(matches!(
            subsample_grid(&mesh, 0.37),
            Err(Error::GridMeshMismatch { .. })
        ));
        let g = subsample_grid(&mesh, 0.2).unwrap();
        assert_eq!(g.max_of(&[1.0, 9.0, 2.0, 9.0, 0.5]), 2.0);
    }

    #[test]
    fn csv_dump_header() {
        let mesh = SimulationMesh::new(0.5, 3).unwrap();
        let b = sample_scalar_paths(&exp_model(), &mesh, 2, 1).unwrap();
        let mut buf = Vec::new();
        b.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,rep0_k0,rep1_k0\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
