use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{NoodlError, Result};
use crate::model::GenerativeConfig;
use crate::runner::{Algorithm, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Convergence,
    PhaseTransition,
    Compare,
}

/// Grid for a phase-transition sweep over dictionary size and samples per atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub m_values: Vec<usize>,
    /// Samples per iteration as a multiple of `m`; `p = ceil(ratio * m)`.
    pub ratios: Vec<f64>,
    pub trials: usize,
    /// A trial succeeds when the relative Frobenius error is below this.
    pub success_threshold: f64,
    pub iteration_cap: usize,
    /// `eta_A = eta_a_scale * m / k` for each cell.
    pub eta_a_scale: f64,
}

impl Sweep {
    pub fn validate(&self) -> Result<()> {
        if self.m_values.is_empty() || self.ratios.is_empty() {
            return Err(NoodlError::config(
                "sweep grid must contain at least one m and one ratio",
            ));
        }
        if self.m_values.contains(&0) {
            return Err(NoodlError::config("sweep m values must be positive"));
        }
        if let Some(r) = self.ratios.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(NoodlError::config(format!("sweep ratio {r} gives an empty batch")));
        }
        if self.trials == 0 || self.iteration_cap == 0 {
            return Err(NoodlError::config("sweep needs at least one trial and one iteration"));
        }
        if !(self.success_threshold > 0.0) {
            return Err(NoodlError::config("success threshold must be positive"));
        }
        if !(self.eta_a_scale > 0.0) {
            return Err(NoodlError::config("eta_a_scale must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub model: GenerativeConfig,
    pub solver: SolverConfig,
    pub sweep: Option<Sweep>,
    pub algorithms: Vec<Algorithm>,
    pub output_dir: PathBuf,
    /// Seeds the ground-truth dictionary (and, in sweeps, every trial).
    pub seed: u64,
    /// Write measured wall times; when off the column is zero and reruns
    /// are byte-identical.
    pub record_wall_time: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.solver.validate()?;
        match self.kind {
            ExperimentKind::PhaseTransition => {
                let sweep = self
                    .sweep
                    .as_ref()
                    .ok_or_else(|| NoodlError::config("phase_transition experiments need a sweep"))?;
                sweep.validate()?;
                for &m in &sweep.m_values {
                    GenerativeConfig {
                        m,
                        ..self.model.clone()
                    }
                    .validate()?;
                }
            }
            ExperimentKind::Convergence => {
                if self.algorithms.is_empty() {
                    return Err(NoodlError::config("no algorithms selected"));
                }
            }
            ExperimentKind::Compare => {}
        }
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| NoodlError::io(path, e))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| NoodlError::config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
