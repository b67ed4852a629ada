use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gp_sim::{subsample_grid, FbmSampler, GridStride, SimulationMesh, Workspace};
use crate::seed::{replication_rng, Stream};

/// Where the drifted field is maximised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Support {
    /// Every mesh point of `[0, lambda]`, the proxy for the continuum.
    Continuous,
    /// `{k D} ∩ [0, lambda]`.
    Grid(f64),
}

/// How `lambda^-1 E[F(exp B*)]` is estimated from simulated paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Estimator {
    /// Plain sample mean of `F(exp B*)` over one-sided paths.
    Direct,
    /// Change of measure to a uniformly chosen mesh point: the path is
    /// re-anchored there and the functional is divided by the mesh sum of
    /// `exp B*`. Unbiased for the same finite-`lambda`, finite-mesh quantity
    /// as [`Estimator::Direct`], with variance bounded by `1/h` per draw.
    #[default]
    Tilted,
}

/// Simulation settings for the drifted field `B*(t) = sqrt(2) B_{alpha/2}(t) - t^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    pub alpha: f64,
    pub lambda: f64,
    pub mesh_spacing: f64,
    pub reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub estimator: Estimator,
}

impl FieldParams {
    pub fn new(alpha: f64, lambda: f64, mesh_spacing: f64, reps: usize, seed: u64) -> Self {
        Self {
            alpha,
            lambda,
            mesh_spacing,
            reps,
            seed,
            estimator: Estimator::Tilted,
        }
    }

    pub fn with_estimator(self, estimator: Estimator) -> Self {
        Self { estimator, ..self }
    }
}

/// Default mesh for a set of grid spacings: divides the smallest spacing,
/// at most `min(D)/32` and at most 0.01.
pub fn default_mesh(spacings: &[f64]) -> f64 {
    match spacings.iter().copied().reduce(f64::min) {
        None => 0.01,
        Some(d) => d / (d / 0.01).ceil().max(32.0),
    }
}

/// Per-replication maxima of the drifted field over each support together
/// with the log-weight that turns `exp(min(...))` into an estimator term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSamples {
    pub lambda: f64,
    pub n_points: usize,
    pub log_weight: Vec<f64>,
    /// Row-major `reps x supports`.
    pub maxima: Vec<f64>,
}

/// Common-random-number sample of the drifted field over several supports.
///
/// Support 0 is always [`Support::Continuous`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldBatch {
    pub params: FieldParams,
    pub supports: Vec<Support>,
    pub full: FieldSamples,
    /// Same paths restricted to `[0, lambda/2]`.
    pub half: Option<FieldSamples>,
}

struct Layout {
    drift: Vec<f64>,
    strides: Vec<Option<GridStride>>,
    half_strides: Vec<Option<GridStride>>,
    n_half: usize,
}

fn log_sum_exp(values: &[f64], max: f64) -> f64 {
    let s: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + s.ln()
}

impl FieldBatch {
    /// Simulates `params.reps` paths and records the maxima over `supports`.
    pub fn sample(params: FieldParams, supports: &[Support]) -> Result<Self> {
        let FieldParams {
            alpha,
            lambda,
            mesh_spacing: h,
            reps,
            seed,
            estimator,
        } = params;
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(invalid(format!("alpha must lie in (0,2], got {alpha}")));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(invalid(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        let mut all = vec![Support::Continuous];
        for s in supports {
            if !all.contains(s) {
                all.push(*s);
            }
        }
        if lambda == 0.0 {
            // only t = 0: every maximum is B*(0) = 0
            let k = all.len();
            return Ok(Self {
                params,
                supports: all,
                full: FieldSamples {
                    lambda,
                    n_points: 1,
                    log_weight: vec![f64::INFINITY; reps],
                    maxima: vec![0.0; reps * k],
                },
                half: None,
            });
        }
        let mesh = SimulationMesh::covering(lambda, h)?;
        let n = mesh.n_points;
        let n_half = (n - 1) / 2 + 1;
        let half_mesh = SimulationMesh {
            spacing: h,
            n_points: n_half,
        };
        let mut strides = Vec::with_capacity(all.len());
        let mut half_strides = Vec::with_capacity(all.len());
        for s in &all {
            match s {
                Support::Continuous => {
                    strides.push(None);
                    half_strides.push(None);
                }
                Support::Grid(d) => {
                    if !(*d > 0.0) {
                        return Err(invalid(format!("grid spacing must be positive, got {d}")));
                    }
                    strides.push(Some(subsample_grid(&mesh, *d)?));
                    half_strides.push(if n_half >= 2 {
                        Some(subsample_grid(&half_mesh, *d)?)
                    } else {
                        None
                    });
                }
            }
        }
        let layout = Layout {
            drift: (0..n).map(|k| (k as f64 * h).powf(alpha)).collect(),
            strides,
            half_strides,
            n_half,
        };
        let sampler = FbmSampler::new(alpha / 2.0, &mesh)?;
        let k = all.len();
        let actual_lambda = mesh.horizon();
        let half_lambda = (n_half - 1) as f64 * h;

        let rows: Vec<(f64, Vec<f64>, f64, Vec<f64>)> = (0..reps)
            .into_par_iter()
            .map_init(
                || (Workspace::default(), vec![0.0; n], vec![0.0; n]),
                |(ws, path, field), i| {
                    let mut rng = replication_rng(seed, Stream::Field, i as u64);
                    sampler.sample(&mut rng, ws, path);
                    let (lw, mx) = Self::evaluate(
                        &layout, estimator, path, field, n, actual_lambda, &layout.strides, &mut rng,
                    );
                    let (hw, hx) = if n_half >= 2 {
                        Self::evaluate(
                            &layout,
                            estimator,
                            &path[..n_half],
                            &mut field[..n_half],
                            n_half,
                            half_lambda,
                            &layout.half_strides,
                            &mut rng,
                        )
                    } else {
                        (f64::NAN, vec![f64::NAN; k])
                    };
                    (lw, mx, hw, hx)
                },
            )
            .collect();

        let mut full = FieldSamples {
            lambda: actual_lambda,
            n_points: n,
            log_weight: Vec::with_capacity(reps),
            maxima: Vec::with_capacity(reps * k),
        };
        let mut half = FieldSamples {
            lambda: half_lambda,
            n_points: n_half,
            log_weight: Vec::with_capacity(reps),
            maxima: Vec::with_capacity(reps * k),
        };
        for (lw, mx, hw, hx) in rows {
            full.log_weight.push(lw);
            full.maxima.extend(mx);
            half.log_weight.push(hw);
            half.maxima.extend(hx);
        }
        Ok(Self {
            params: FieldParams {
                lambda: actual_lambda,
                ..params
            },
            supports: all,
            full,
            half: (layout.n_half >= 2).then_some(half),
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn evaluate<R: Rng>(
        layout: &Layout,
        estimator: Estimator,
        path: &[f64],
        field: &mut [f64],
        n: usize,
        lambda: f64,
        strides: &[Option<GridStride>],
        rng: &mut R,
    ) -> (f64, Vec<f64>) {
        let sqrt2 = std::f64::consts::SQRT_2;
        let log_weight = match estimator {
            Estimator::Direct => {
                for j in 0..n {
                    field[j] = sqrt2 * path[j] - layout.drift[j];
                }
                -lambda.ln()
            }
            Estimator::Tilted => {
                let anchor = rng.gen_range(0..n);
                let base = path[anchor];
                for j in 0..n {
                    field[j] = sqrt2 * (path[j] - base) - layout.drift[j.abs_diff(anchor)];
                }
                let mx = field[..n].iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (n as f64 / lambda).ln() - log_sum_exp(&field[..n], mx)
            }
        };
        let maxima = strides
            .iter()
            .map(|s| match s {
                None => field[..n].iter().copied().fold(f64::NEG_INFINITY, f64::max),
                Some(g) => g.max_of(&field[..n]),
            })
            .collect();
        (log_weight, maxima)
    }

    pub fn reps(&self) -> usize {
        self.full.log_weight.len()
    }

    pub fn support_index(&self, support: Support) -> Result<usize> {
        self.supports
            .iter()
            .position(|s| *s == support)
            .ok_or_else(|| invalid(format!("support {support:?} was not sampled")))
    }

    /// Maxima of replication `rep`, in support order.
    pub fn maxima(&self, rep: usize) -> &[f64] {
        let k = self.supports.len();
        &self.full.maxima[rep * k..(rep + 1) * k]
    }

    /// Largest maximum over all replications and supports.
    pub fn max_observed(&self) -> f64 {
        self.full
            .maxima
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest maximum over all replications and supports.
    pub fn min_observed(&self) -> f64 {
        self.full
            .maxima
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

impl FieldSamples {
    /// Per-replication terms `exp(log_w + min_i (M_i - offset_i))`.
    pub fn terms(&self, width: usize, offsets: &[(usize, f64)]) -> Vec<f64> {
        self.log_weight
            .iter()
            .enumerate()
            .map(|(r, lw)| {
                let row = &self.maxima[r * width..(r + 1) * width];
                let m = offsets
                    .iter()
                    .map(|&(i, off)| row[i] - off)
                    .fold(f64::INFINITY, f64::min);
                (lw + m).exp()
            })
            .collect()
    }
}
