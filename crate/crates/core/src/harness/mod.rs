//! End-to-end verification: simulate joint maxima over `[0, T]` and two
//! grids, normalise, and compare the empirical joint CDF with `G`.

mod checks;
mod config;
mod experiment;
mod report;

pub use checks::{
    alternating_points, factorization_gap, independence_check, point_set_tail_check,
    IndependenceResult, PointSetTail, INDEPENDENCE_AXIS,
};
pub use config::{
    default_lattice, plan_mesh, AcceptanceRule, ConstantsConfig, ExperimentConfig, MeshPlan,
    MeshRule,
};
pub use experiment::{
    convergence_sweep, horizon_maxima, resolve_constants, run_experiment, run_experiment_with,
    theoretical_law, ComparisonReport, ConstantSummary, HorizonMaxima, HorizonResult, PointResult,
    ResolvedConstants, SweepResult, DEFAULT_SWEEP_THRESHOLD,
};
pub use report::{export_report, import_report, parse_report, render_report, ReportFormat};
