use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimate::ConstantEstimate;
use super::field::{default_mesh, FieldBatch, FieldParams, Support};
use crate::error::{invalid, Error, Result};
use crate::gp_sim::{subsample_grid, CorrelationModel, ScalarSampler, SimulationMesh, Workspace};
use crate::seed::{child_seed, replication_rng, Stream};
use crate::stats::{binomial_stderr, normal_sf};

/// Joint tail probability of two grid maxima on `[0, S]` at the local
/// scale `u^{-2/alpha}`, compared with its Pickands-type asymptotics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    pub alpha: f64,
    pub d1: f64,
    pub d2: f64,
    pub x: f64,
    pub s: f64,
    pub u: f64,
    /// Simulation mesh in the same units as `d1`, `d2`. Defaults to the
    /// smaller spacing.
    pub mesh: Option<f64>,
    pub reps: usize,
    pub seed: u64,
    /// Horizon and replications for the constant `H^{0,x}_{D1,D2}`.
    pub constant_lambda: f64,
    pub constant_reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRatio {
    pub ratio: f64,
    /// Binomial standard error of the ratio from the path count alone.
    pub stderr: f64,
    pub empirical: f64,
    pub expected: f64,
    pub events: usize,
    pub reps: usize,
    pub constant: ConstantEstimate,
}

/// Number of replications in which the `D1` grid maximum exceeds `u` and
/// the `D2` grid maximum exceeds `u + x/u`. No precondition on the level.
pub fn joint_exceedances(cfg: &TailCheck) -> Result<usize> {
    let TailCheck {
        alpha,
        d1,
        d2,
        x,
        s,
        u,
        mesh,
        reps,
        seed,
        ..
    } = *cfg;
    let scale = u.powf(-2.0 / alpha);
    let h = mesh.unwrap_or(d1.min(d2)) * scale;
    let grid_mesh = SimulationMesh::covering(s, h)?;
    let g1 = subsample_grid(&grid_mesh, d1 * scale)?;
    let g2 = subsample_grid(&grid_mesh, d2 * scale)?;
    let model = CorrelationModel::new(alpha, 1.0, 0.0)?;
    let sampler = ScalarSampler::new(&model, &grid_mesh)?;
    let n = grid_mesh.n_points;
    let level2 = u + x / u;

    Ok((0..reps)
        .into_par_iter()
        .map_init(
            || (Workspace::default(), vec![0.0; n]),
            |(ws, path), i| {
                let mut rng = replication_rng(seed, Stream::Tail, i as u64);
                sampler.sample(&mut rng, ws, path);
                usize::from(g1.max_of(path) > u && g2.max_of(path) > level2)
            },
        )
        .sum())
}

/// Runs the check. The unit-variance process has kernel `exp(-|t|^alpha)`.
pub fn tail_prob_check(cfg: &TailCheck) -> Result<TailRatio> {
    let TailCheck {
        alpha,
        d1,
        d2,
        x,
        s,
        u,
        reps,
        seed,
        constant_lambda,
        constant_reps,
        ..
    } = *cfg;
    if d1 == d2 {
        return Err(Error::EqualSpacings(d1));
    }
    if !(u > 0.0 && s > 0.0) {
        return Err(invalid("level u and horizon S must be positive"));
    }
    let constant = FieldBatch::sample(
        FieldParams::new(
            alpha,
            constant_lambda,
            default_mesh(&[d1, d2]),
            constant_reps,
            child_seed(seed, 1),
        ),
        &[Support::Grid(d1), Support::Grid(d2)],
    )?
    .h_d1d2(d1, d2, 0.0, x)?;

    let scale = u.powf(-2.0 / alpha);
    let expected = s * constant.value * scale.recip() * normal_sf(u);
    if !(expected > 1e-3 && expected < 1e-1) {
        return Err(Error::Precondition(format!(
            "expected tail probability {expected:.3e} outside (1e-3, 1e-1)"
        )));
    }

    let events = joint_exceedances(cfg)?;
    if events < 50 {
        return Err(Error::InsufficientExceedances {
            observed: events,
            required: 50,
        });
    }
    let empirical = events as f64 / reps as f64;
    Ok(TailRatio {
        ratio: empirical / expected,
        stderr: binomial_stderr(empirical, reps) / expected,
        empirical,
        expected,
        events,
        reps,
        constant,
    })
}
