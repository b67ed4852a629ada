use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::gp_sim::VectorProcessSpec;
use crate::limit_laws::{classify_grid, GridSpec, Integration, LatticePoint, TheoremCase};

/// How the simulation mesh is chosen at each horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", deny_unknown_fields)]
pub enum MeshRule {
    /// Spacing at most `eps (2 ln T)^{-1/alpha}`, refined so that it divides
    /// the finer grid.
    PickandsFraction { eps: f64 },
    /// Fixed spacing.
    Explicit { spacing: f64 },
    /// Mesh equal to the finer grid: no continuous-time resolution beyond it.
    GridAligned,
}

impl Default for MeshRule {
    fn default() -> Self {
        MeshRule::PickandsFraction { eps: 0.05 }
    }
}

/// Where the Pickands-type constants come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    /// Use closed forms (`H_1`, `H_2`) where no estimated `H^{...}` term
    /// is needed.
    #[serde(default = "yes")]
    pub prefer_known: bool,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_constant_reps")]
    pub reps: usize,
    #[serde(default)]
    pub mesh: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

fn yes() -> bool {
    true
}
fn default_lambda() -> f64 {
    64.0
}
fn default_constant_reps() -> usize {
    20_000
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self {
            prefer_known: true,
            lambda: default_lambda(),
            reps: default_constant_reps(),
            mesh: None,
            seed: 0,
        }
    }
}

/// Thresholds checked after a run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptanceRule {
    /// Largest allowed sup-distance at the last horizon.
    #[serde(default)]
    pub max_final_distance: Option<f64>,
    /// Require the last distance not to exceed the first.
    #[serde(default)]
    pub require_trend: bool,
}

/// One verification experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `horizon_t` is overwritten by each entry of `t_values`.
    pub process: VectorProcessSpec,
    pub grids: [GridSpec; 2],
    pub case: TheoremCase,
    pub t_values: Vec<f64>,
    pub reps: usize,
    #[serde(default)]
    pub mesh_rule: MeshRule,
    /// Explicit evaluation points; default is [`default_lattice`].
    #[serde(default)]
    pub lattice: Option<Vec<LatticePoint>>,
    #[serde(default)]
    pub integration: Integration,
    #[serde(default)]
    pub constants: ConstantsConfig,
    #[serde(default)]
    pub acceptance: AcceptanceRule,
    pub seed: u64,
}

/// Default lattice: 5 values per argument block over `[-2, 2.5]`, shared by
/// all components, i.e. 125 points.
pub fn default_lattice(p: usize) -> Vec<LatticePoint> {
    let axis = [-2.0, -0.875, 0.25, 1.375, 2.5];
    let mut out = Vec::with_capacity(125);
    for &y2 in &axis {
        for &y1 in &axis {
            for &x in &axis {
                out.push((vec![x; p], vec![y1; p], vec![y2; p]));
            }
        }
    }
    out
}

impl ExperimentConfig {
    pub fn alpha(&self) -> f64 {
        self.process.components[0].alpha
    }

    pub fn c(&self) -> f64 {
        self.process.components[0].c
    }

    pub fn lattice(&self) -> Vec<LatticePoint> {
        self.lattice
            .clone()
            .unwrap_or_else(|| default_lattice(self.process.p()))
    }

    /// Structural checks; simulates nothing.
    pub fn validate(&self) -> Result<()> {
        self.process.validate()?;
        let (a0, c0) = (self.alpha(), self.c());
        if self
            .process
            .components
            .iter()
            .any(|m| m.alpha != a0 || m.c != c0)
        {
            return Err(invalid("all components must share alpha and C"));
        }
        self.case.validate()?;
        for (i, (g, req)) in self.grids.iter().zip(self.case.required_kinds()).enumerate() {
            let kind = classify_grid(g, a0)?;
            if !req.matches(&kind) {
                return Err(Error::ConfigMismatch(format!(
                    "grid {} is {kind:?} but case {} needs {req:?}",
                    i + 1,
                    self.case.tag()
                )));
            }
        }
        if self.t_values.is_empty() {
            return Err(invalid("t_values must not be empty"));
        }
        let max_r = self.process.r_diag().into_iter().fold(0.0, f64::max);
        for &t in &self.t_values {
            if !(t > 1.0 && t.is_finite()) || t.ln() <= max_r {
                return Err(Error::InvalidHorizon { horizon: t, max_r });
            }
        }
        if self.reps == 0 {
            return Err(invalid("reps must be positive"));
        }
        let p = self.process.p();
        if let Some(l) = &self.lattice {
            if l.iter().any(|(x, a, b)| x.len() != p || a.len() != p || b.len() != p) {
                return Err(invalid(format!("lattice points must have {p} entries per block")));
            }
        }
        match self.mesh_rule {
            MeshRule::PickandsFraction { eps } if !(eps > 0.0) => {
                Err(invalid("mesh eps must be positive"))
            }
            MeshRule::Explicit { spacing } if !(spacing > 0.0) => {
                Err(invalid("mesh spacing must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Mesh and snapped grid spacings at one horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshPlan {
    pub mesh_spacing: f64,
    pub requested: [f64; 2],
    pub used: [f64; 2],
}

/// Resolves the mesh at horizon `t` and snaps both grid spacings to mesh
/// multiples (recorded in the plan).
pub fn plan_mesh(cfg: &ExperimentConfig, t: f64) -> Result<MeshPlan> {
    let alpha = cfg.alpha();
    let requested = [
        cfg.grids[0].spacing_at(t, alpha)?,
        cfg.grids[1].spacing_at(t, alpha)?,
    ];
    let finest = requested[0].min(requested[1]);
    let h = match cfg.mesh_rule {
        MeshRule::PickandsFraction { eps } => {
            let target = eps * (2.0 * t.ln()).powf(-1.0 / alpha);
            finest / (finest / target - 1e-9).ceil().max(1.0)
        }
        MeshRule::Explicit { spacing } => spacing,
        MeshRule::GridAligned => finest,
    };
    let used = requested.map(|d| (d / h).round().max(1.0) * h);
    Ok(MeshPlan {
        mesh_spacing: h,
        requested,
        used,
    })
}
