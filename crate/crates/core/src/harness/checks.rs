use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::experiment::{horizon_maxima, resolve_constants};
use crate::error::{invalid, Error, Result};
use crate::gp_sim::{CorrelationModel, ScalarSampler, SimulationMesh, Workspace, GRID_TOLERANCE};
use crate::limit_laws::{classify_grid, GridKind};
use crate::seed::{replication_rng, Stream};
use crate::stats::{binomial_stderr, normal_sf};

/// `max |F(a, b) - F_1(a) F_2(b)|` of the empirical distribution of `pairs`
/// over the product lattice `axis_a x axis_b`.
pub fn factorization_gap(pairs: &[(f64, f64)], axis_a: &[f64], axis_b: &[f64]) -> f64 {
    let n = pairs.len();
    if n == 0 || axis_a.is_empty() || axis_b.is_empty() {
        return 0.0;
    }
    let frac = |c: usize| c as f64 / n as f64;
    let mut gap = 0.0_f64;
    for &a in axis_a {
        let fa = frac(pairs.iter().filter(|p| p.0 <= a).count());
        for &b in axis_b {
            let fb = frac(pairs.iter().filter(|p| p.1 <= b).count());
            let fab = frac(pairs.iter().filter(|p| p.0 <= a && p.1 <= b).count());
            gap = gap.max((fab - fa * fb).abs());
        }
    }
    gap
}

/// Outcome of [`independence_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceResult {
    pub t: f64,
    pub reps: usize,
    pub gap: f64,
    /// Index (0 or 1) of the sparse grid.
    pub sparse_grid: usize,
}

/// Default axis of the independence lattice, per coordinate.
pub const INDEPENDENCE_AXIS: [f64; 5] = [-2.0, -0.875, 0.25, 1.375, 2.5];

/// Factorisation gap between the normalised sparse-grid maximum and the
/// other grid's maximum at the last horizon, worst over components.
pub fn independence_check(cfg: &ExperimentConfig) -> Result<IndependenceResult> {
    cfg.validate()?;
    if cfg.process.r_diag().iter().any(|&r| r != 0.0) {
        return Err(Error::Precondition(
            "independence check needs weak dependence (all r_kk = 0)".into(),
        ));
    }
    let kinds = [
        classify_grid(&cfg.grids[0], cfg.alpha())?,
        classify_grid(&cfg.grids[1], cfg.alpha())?,
    ];
    let sparse_grid = match kinds {
        [GridKind::Sparse, GridKind::Sparse] => {
            return Err(Error::ConfigMismatch("need exactly one sparse grid".into()))
        }
        [GridKind::Sparse, _] => 0,
        [_, GridKind::Sparse] => 1,
        _ => return Err(Error::ConfigMismatch("need exactly one sparse grid".into())),
    };
    let constants = resolve_constants(cfg)?;
    let t = *cfg.t_values.last().expect("validated");
    let hm = horizon_maxima(cfg, &constants.summary.table, t)?;
    let p = hm.p;
    let (si, oi) = (1 + sparse_grid, 2 - sparse_grid);
    let mut gap = 0.0_f64;
    for k in 0..p {
        let pairs: Vec<(f64, f64)> = (0..hm.reps())
            .map(|r| {
                let row = hm.row(r);
                (row[si * p + k], row[oi * p + k])
            })
            .collect();
        gap = gap.max(factorization_gap(&pairs, &INDEPENDENCE_AXIS, &INDEPENDENCE_AXIS));
    }
    Ok(IndependenceResult {
        t,
        reps: hm.reps(),
        gap,
        sparse_grid,
    })
}

/// Outcome of [`point_set_tail_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSetTail {
    pub ratio: f64,
    pub stderr: f64,
    pub empirical: f64,
    /// `N * Phi_bar(u)`.
    pub expected: f64,
    pub events: usize,
    pub reps: usize,
    pub n_points: usize,
}

/// Empirical `P(max over points > u)` relative to `N * Phi_bar(u)` for a
/// finite point set lying on the mesh `{k * mesh_spacing}`.
pub fn point_set_tail_check(
    model: &CorrelationModel,
    points: &[f64],
    mesh_spacing: f64,
    u: f64,
    reps: usize,
    seed: u64,
) -> Result<PointSetTail> {
    model.validate()?;
    if points.is_empty() {
        return Err(invalid("point set is empty"));
    }
    let n_pts = points.len();
    let expected = n_pts as f64 * normal_sf(u);
    if !(expected > 1e-3 && expected < 1e-1) {
        return Err(Error::Precondition(format!(
            "N * Phi_bar(u) = {expected:.3e} outside (1e-3, 1e-1)"
        )));
    }
    let mut idx = Vec::with_capacity(n_pts);
    for &t in points {
        let k = (t / mesh_spacing).round();
        if !(t >= 0.0) || (k * mesh_spacing - t).abs() > GRID_TOLERANCE * t.abs().max(mesh_spacing) {
            return Err(Error::GridMeshMismatch {
                spacing: t,
                mesh: mesh_spacing,
            });
        }
        idx.push(k as usize);
    }
    idx.sort_unstable();
    idx.dedup();
    if idx.len() != n_pts {
        return Err(invalid("point set contains duplicates"));
    }
    let n = idx[idx.len() - 1] + 1;
    let mesh = SimulationMesh::new(mesh_spacing, n.max(2))?;
    let sampler = ScalarSampler::new(&model.short_range(), &mesh)?;
    let events: usize = (0..reps)
        .into_par_iter()
        .map_init(
            || (Workspace::default(), vec![0.0; mesh.n_points]),
            |(ws, path), i| {
                let mut rng = replication_rng(seed, Stream::Tail, i as u64);
                sampler.sample(&mut rng, ws, path);
                usize::from(idx.iter().any(|&j| path[j] > u))
            },
        )
        .sum();
    if events < 50 {
        return Err(Error::InsufficientExceedances {
            observed: events,
            required: 50,
        });
    }
    let empirical = events as f64 / reps as f64;
    Ok(PointSetTail {
        ratio: empirical / expected,
        stderr: binomial_stderr(empirical, reps) / expected,
        empirical,
        expected,
        events,
        reps,
        n_points: n_pts,
    })
}

/// Points `0, s_1, s_1 + s_2, ...` with spacings cycling through `pattern`.
pub fn alternating_points(count: usize, pattern: &[f64]) -> Vec<f64> {
    let mut t = 0.0;
    (0..count)
        .map(|i| {
            let v = t;
            t += pattern[i % pattern.len()];
            v
        })
        .collect()
}
