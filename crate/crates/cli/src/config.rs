use std::path::{Path, PathBuf};

use piterbarg::gp_sim::{CorrelationModel, VectorProcessSpec};
use piterbarg::harness::{AcceptanceRule, ConstantsConfig, ExperimentConfig, MeshRule, ReportFormat};
use piterbarg::limit_laws::{GridSpec, Integration, LatticePoint, TheoremCase};
use piterbarg::{Error, Result};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSection {
    pub components: Vec<CorrelationModel>,
    /// Row-major `r_kl`; all zeros when omitted.
    #[serde(default)]
    pub cross: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub t_values: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub mesh_rule: MeshRule,
    #[serde(default)]
    pub lattice: Option<Vec<LatticePoint>>,
    #[serde(default)]
    pub integration: Integration,
    #[serde(default)]
    pub acceptance: AcceptanceRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<ReportFormat>,
    #[serde(default)]
    pub plots: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("piterbarg-out")
}
fn default_formats() -> Vec<ReportFormat> {
    vec![ReportFormat::Json, ReportFormat::Csv]
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            formats: default_formats(),
            plots: false,
        }
    }
}

/// On-disk run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub schema_version: u32,
    pub process: ProcessSection,
    pub grids: [GridSpec; 2],
    pub case: TheoremCase,
    #[serde(default)]
    pub estimation: ConstantsConfig,
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    /// The harness configuration this file describes (validated).
    pub fn experiment_config(&self) -> Result<ExperimentConfig> {
        let p = self.process.components.len();
        let cross = self.process.cross.clone().unwrap_or_else(|| vec![0.0; p * p]);
        let horizon = self.experiment.t_values.first().copied().unwrap_or(10.0);
        let process = VectorProcessSpec::new(self.process.components.clone(), cross, horizon)?;
        let cfg = ExperimentConfig {
            process,
            grids: self.grids,
            case: self.case,
            t_values: self.experiment.t_values.clone(),
            reps: self.experiment.reps,
            mesh_rule: self.experiment.mesh_rule,
            lattice: self.experiment.lattice.clone(),
            integration: self.experiment.integration,
            constants: self.estimation,
            acceptance: self.experiment.acceptance,
            seed: self.experiment.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "process": {"components": [{"alpha": 1.0, "c": 1.0}]},
        "grids": [{"form": "ConstantSpacing", "delta0": 1.0},
                  {"form": "PowerLogSpacing", "beta": 2.0}],
        "case": {"case": "T21_iv"},
        "experiment": {"t_values": [55.0], "reps": 10, "seed": 1}
    }"#;

    #[test]
    fn minimal_config_resolves() {
        let f = RunConfigFile::parse(MINIMAL).unwrap();
        let c = f.experiment_config().unwrap();
        assert_eq!(c.process.cross, vec![0.0]);
        assert_eq!(f.output.formats.len(), 2);
    }

    #[test]
    fn unknown_keys_and_versions_rejected() {
        let extra = MINIMAL.replacen("\"schema_version\": 1,", "\"schema_version\": 1, \"extra\": 0,", 1);
        assert!(RunConfigFile::parse(&extra).is_err());
        let v2 = MINIMAL.replacen("\"schema_version\": 1", "\"schema_version\": 2", 1);
        assert!(RunConfigFile::parse(&v2).is_err());
    }
}
