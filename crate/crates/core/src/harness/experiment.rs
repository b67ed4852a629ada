use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{plan_mesh, ExperimentConfig, MeshPlan};
use crate::error::{Error, Result};
use crate::gp_sim::{subsample_grid, SimulationMesh, VectorSampler, Workspace};
use crate::limit_laws::{
    classify_grid, norm_constants, CaseConstants, ConstantTable, GridKind, LatticePoint, MaxTarget,
    NormConstants, PiterbargLaw, PiterbargParams,
};
use crate::pickands::{default_mesh, known_h_alpha, ConstantEstimate, FieldBatch, FieldParams, Support};
use crate::seed::{child_seed, replication_rng, Stream};
use crate::stats::binomial_stderr;

/// Constants used by an experiment, with their origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantSummary {
    pub table: ConstantTable,
    /// Empty when only closed forms were used.
    pub estimates: Vec<ConstantEstimate>,
}

/// Constants resolved for a configuration.
#[derive(Debug, Clone)]
pub struct ResolvedConstants {
    pub summary: ConstantSummary,
    pub case: CaseConstants,
}

fn pickands_spacings(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let mut out = cfg.case.pickands_spacings();
    for g in &cfg.grids {
        if let GridKind::Pickands { d } = classify_grid(g, cfg.alpha())? {
            if !out.contains(&d) {
                out.push(d);
            }
        }
    }
    Ok(out)
}

/// Closed forms where possible, otherwise one common-path field batch.
pub fn resolve_constants(cfg: &ExperimentConfig) -> Result<ResolvedConstants> {
    let alpha = cfg.alpha();
    let spacings = pickands_spacings(cfg)?;
    let known = if cfg.constants.prefer_known {
        known_h_alpha(alpha)
    } else {
        None
    };
    if let (Some(h), true, false) = (known, spacings.is_empty(), cfg.case.needs_field()) {
        return Ok(ResolvedConstants {
            summary: ConstantSummary {
                table: ConstantTable {
                    h_alpha: Some(h),
                    h_d: vec![],
                },
                estimates: vec![],
            },
            case: CaseConstants {
                h_alpha: Some(h),
                ..Default::default()
            },
        });
    }
    let cc = &cfg.constants;
    let params = FieldParams::new(
        alpha,
        cc.lambda,
        cc.mesh.unwrap_or_else(|| default_mesh(&spacings)),
        cc.reps,
        child_seed(cfg.seed ^ cc.seed, 0x636f_6e73),
    );
    let supports: Vec<Support> = spacings.iter().map(|&d| Support::Grid(d)).collect();
    let batch = Arc::new(FieldBatch::sample(params, &supports)?);
    let mut estimates = vec![batch.h_alpha()?];
    for &d in &spacings {
        estimates.push(batch.h_d(d)?);
    }
    let table = ConstantTable {
        h_alpha: Some(estimates[0].value),
        h_d: spacings
            .iter()
            .zip(&estimates[1..])
            .map(|(&d, e)| (d, e.value))
            .collect(),
    };
    let case = if cfg.case.needs_field() {
        CaseConstants::from_batch(&cfg.case, batch)?
    } else {
        CaseConstants {
            h_alpha: table.h_alpha,
            ..Default::default()
        }
    };
    Ok(ResolvedConstants {
        summary: ConstantSummary { table, estimates },
        case,
    })
}

/// Raw and normalised maxima of every replication at one horizon.
///
/// Rows hold `[M_1..M_p, M_1(d1)..M_p(d1), M_1(d2)..M_p(d2)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizonMaxima {
    pub t: f64,
    pub p: usize,
    pub plan: MeshPlan,
    /// Continuous, grid 1, grid 2.
    pub norms: [NormConstants; 3],
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
}

impl HorizonMaxima {
    pub fn reps(&self) -> usize {
        self.raw.len() / (3 * self.p)
    }

    pub fn row(&self, rep: usize) -> &[f64] {
        let w = 3 * self.p;
        &self.normalized[rep * w..(rep + 1) * w]
    }

    pub fn raw_row(&self, rep: usize) -> &[f64] {
        let w = 3 * self.p;
        &self.raw[rep * w..(rep + 1) * w]
    }

    /// Fraction of replications below `point` in every coordinate.
    pub fn empirical_cdf(&self, point: &LatticePoint) -> f64 {
        let p = self.p;
        let hits = (0..self.reps())
            .filter(|&r| {
                let row = self.row(r);
                (0..p).all(|k| row[k] <= point.0[k] && row[p + k] <= point.1[k] && row[2 * p + k] <= point.2[k])
            })
            .count();
        hits as f64 / self.reps().max(1) as f64
    }
}

/// Seed of horizon `t`; depends on the value, not its position in the ladder.
fn horizon_seed(root: u64, t: f64) -> u64 {
    child_seed(root, t.to_bits())
}

/// Simulates `cfg.reps` replications at horizon `t`.
pub fn horizon_maxima(cfg: &ExperimentConfig, table: &ConstantTable, t: f64) -> Result<HorizonMaxima> {
    let alpha = cfg.alpha();
    let c = cfg.c();
    let plan = plan_mesh(cfg, t)?;
    let spec = cfg.process.with_horizon(t);
    let mesh = SimulationMesh::covering(t, plan.mesh_spacing)?;
    let g1 = subsample_grid(&mesh, plan.used[0])?;
    let g2 = subsample_grid(&mesh, plan.used[1])?;
    let sampler = VectorSampler::new(&spec, &mesh)?;
    let p = spec.p();

    let target = |g| -> Result<NormConstants> {
        let kind = classify_grid(g, alpha)?;
        norm_constants(t, alpha, c, MaxTarget::Grid(kind), Some(g), table)
    };
    let norms = [
        norm_constants(t, alpha, c, MaxTarget::Continuous, None, table)?,
        target(&cfg.grids[0])?,
        target(&cfg.grids[1])?,
    ];

    let seed = horizon_seed(cfg.seed, t);
    let rows: Vec<Vec<f64>> = (0..cfg.reps)
        .into_par_iter()
        .map_init(
            || (Workspace::default(), Vec::new()),
            |(ws, paths), i| {
                let mut rng = replication_rng(seed, Stream::Experiment, i as u64);
                sampler.draw_into(&mut rng, ws, paths);
                let mut row = vec![0.0; 3 * p];
                for (k, path) in paths.iter().enumerate() {
                    row[k] = path.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    row[p + k] = g1.max_of(path);
                    row[2 * p + k] = g2.max_of(path);
                }
                row
            },
        )
        .collect();
    let raw = rows.concat();
    let normalized = raw
        .chunks(3 * p)
        .flat_map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, &m)| norms[j / p].normalize(m))
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(HorizonMaxima {
        t,
        p,
        plan,
        norms,
        raw,
        normalized,
    })
}

/// Empirical vs theoretical value at one lattice point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub index: usize,
    pub x: Vec<f64>,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    pub empirical: f64,
    pub theoretical: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonResult {
    pub t: f64,
    pub reps: usize,
    pub plan: MeshPlan,
    pub norms: [NormConstants; 3],
    pub points: Vec<PointResult>,
    pub sup_distance: f64,
}

/// Result of [`run_experiment`]; a pure function of the configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub config_hash: String,
    pub root_seed: u64,
    pub config: ExperimentConfig,
    pub constants: ConstantSummary,
    pub horizons: Vec<HorizonResult>,
}

impl ComparisonReport {
    pub fn distances(&self) -> Vec<(f64, f64)> {
        self.horizons.iter().map(|h| (h.t, h.sup_distance)).collect()
    }

    /// Checks the configured acceptance rule; returns the failed predicates.
    pub fn acceptance_failures(&self) -> Vec<String> {
        let rule = self.config.acceptance;
        let mut out = Vec::new();
        let (Some(first), Some(last)) = (self.horizons.first(), self.horizons.last()) else {
            return out;
        };
        if let Some(max) = rule.max_final_distance {
            if last.sup_distance > max {
                out.push(format!(
                    "sup distance {} at T={} exceeds {max}",
                    last.sup_distance, last.t
                ));
            }
        }
        if rule.require_trend && last.sup_distance > first.sup_distance {
            out.push(format!(
                "sup distance grew from {} to {}",
                first.sup_distance, last.sup_distance
            ));
        }
        out
    }
}

/// The limit law of the configuration.
pub fn theoretical_law(cfg: &ExperimentConfig, constants: &ResolvedConstants) -> Result<PiterbargLaw> {
    PiterbargLaw::new(
        PiterbargParams::from_spec(&cfg.process),
        cfg.case,
        constants.case.clone(),
        cfg.integration,
    )
}

/// Simulates every horizon and compares the joint empirical CDF of the
/// normalised maxima with `G` on the lattice.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ComparisonReport> {
    run_experiment_with(cfg, |_, _| {})
}

/// As [`run_experiment`], calling `progress(T, seconds)` after each horizon.
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    mut progress: impl FnMut(f64, f64),
) -> Result<ComparisonReport> {
    cfg.validate()?;
    let constants = resolve_constants(cfg)?;
    let law = theoretical_law(cfg, &constants)?;
    let lattice = cfg.lattice();
    let theory = lattice
        .iter()
        .map(|(x, a, b)| law.cdf(x, a, b))
        .collect::<Result<Vec<_>>>()?;
    let mut horizons = Vec::with_capacity(cfg.t_values.len());
    for &t in &cfg.t_values {
        let start = std::time::Instant::now();
        let hm = horizon_maxima(cfg, &constants.summary.table, t)?;
        let points: Vec<PointResult> = lattice
            .iter()
            .zip(&theory)
            .enumerate()
            .map(|(index, (pt, &th))| {
                let emp = hm.empirical_cdf(pt);
                PointResult {
                    index,
                    x: pt.0.clone(),
                    y1: pt.1.clone(),
                    y2: pt.2.clone(),
                    empirical: emp,
                    theoretical: th,
                    stderr: binomial_stderr(emp, cfg.reps),
                }
            })
            .collect();
        let sup_distance = points
            .iter()
            .map(|p| (p.empirical - p.theoretical).abs())
            .fold(0.0, f64::max);
        horizons.push(HorizonResult {
            t,
            reps: cfg.reps,
            plan: hm.plan,
            norms: hm.norms,
            points,
            sup_distance,
        });
        progress(t, start.elapsed().as_secs_f64());
    }
    Ok(ComparisonReport {
        config_hash: cfg.hash(),
        root_seed: cfg.seed,
        config: cfg.clone(),
        constants: constants.summary,
        horizons,
    })
}

/// Distances along a horizon ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub distances: Vec<(f64, f64)>,
    pub threshold: f64,
    /// `last <= first` and `last <= threshold`.
    pub accepted: bool,
    pub report: ComparisonReport,
}

/// Default threshold of the sweep acceptance predicate.
pub const DEFAULT_SWEEP_THRESHOLD: f64 = 0.1;

pub fn convergence_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    if cfg.t_values.len() < 3 {
        return Err(Error::Precondition(format!(
            "a sweep needs at least 3 horizons, got {}",
            cfg.t_values.len()
        )));
    }
    let report = run_experiment(cfg)?;
    let distances = report.distances();
    let threshold = cfg
        .acceptance
        .max_final_distance
        .unwrap_or(DEFAULT_SWEEP_THRESHOLD);
    let (first, last) = (distances[0].1, distances[distances.len() - 1].1);
    Ok(SweepResult {
        accepted: last <= first && last <= threshold,
        distances,
        threshold,
        report,
    })
}
