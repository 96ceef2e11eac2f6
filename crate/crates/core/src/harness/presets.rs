//! Named parameter sets. Every field is written out explicitly.

use std::path::PathBuf;

use super::config::{ExperimentConfig, ExperimentKind, Sweep};
use crate::coeff::{CoeffSolverConfig, IhtSteps};
use crate::model::GenerativeConfig;
use crate::runner::{Algorithm, SolverConfig};

pub const PRESETS: &[&str] = &["fig2-k10", "fig2-k20", "fig2-k50", "fig2-k100", "phase", "scaled"];

/// Stopping threshold on the largest column error.
pub const DICT_STOP: f64 = 1e-10;

fn coeff() -> CoeffSolverConfig {
    CoeffSolverConfig {
        eta_x: 0.2,
        tau: 0.1,
        steps: IhtSteps::Decay(1e-15),
        c: 1.0,
        stall_tol: 1e-12,
    }
}

fn solver(eta_a: f64, p: usize, max_iters: usize, seed: u64) -> SolverConfig {
    SolverConfig {
        coeff: coeff(),
        eta_a,
        max_iters,
        eps_t: DICT_STOP,
        delta_t: 1e-9,
        dict_stop: DICT_STOP,
        p,
        seed,
    }
}

/// Convergence runs at `n = 1000, m = 1500, p = 5000`.
pub fn fig2(k: usize) -> ExperimentConfig {
    let eta_a = if k <= 20 { 30.0 } else { 15.0 };
    ExperimentConfig {
        kind: ExperimentKind::Convergence,
        model: GenerativeConfig::standard(1000, 1500, k),
        solver: solver(eta_a, 5000, 150, 1),
        sweep: None,
        algorithms: vec![Algorithm::Noodl, Algorithm::BiasedHt],
        output_dir: PathBuf::from(format!("out/fig2-k{k}")),
        seed: 1,
        record_wall_time: false,
    }
}

/// Desk-scale convergence run (`n = 100, m = 150, k = 3, p = 600`).
pub fn scaled() -> ExperimentConfig {
    ExperimentConfig {
        kind: ExperimentKind::Convergence,
        model: GenerativeConfig::standard(100, 150, 3),
        solver: solver(10.0, 600, 200, 1),
        sweep: None,
        algorithms: vec![Algorithm::Noodl, Algorithm::BiasedHt],
        output_dir: PathBuf::from("out/scaled"),
        seed: 1,
        record_wall_time: false,
    }
}

/// Sample-complexity sweep at `n = 100, k = 3`.
pub fn phase() -> ExperimentConfig {
    ExperimentConfig {
        kind: ExperimentKind::PhaseTransition,
        model: GenerativeConfig::standard(100, 100, 3),
        solver: solver(0.5 * 100.0 / 3.0, 100, 50, 1),
        sweep: Some(Sweep {
            m_values: vec![50, 100, 200, 400],
            ratios: vec![0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0],
            trials: 10,
            success_threshold: 5e-7,
            iteration_cap: 50,
            eta_a_scale: 0.5,
        }),
        algorithms: vec![Algorithm::Noodl],
        output_dir: PathBuf::from("out/phase"),
        seed: 1,
        record_wall_time: false,
    }
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    match name {
        "fig2-k10" => Some(fig2(10)),
        "fig2-k20" => Some(fig2(20)),
        "fig2-k50" => Some(fig2(50)),
        "fig2-k100" => Some(fig2(100)),
        "phase" => Some(phase()),
        "scaled" => Some(scaled()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for name in PRESETS {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap();
            let back: ExperimentConfig = serde_json::from_str(&cfg.to_json()).unwrap();
            assert_eq!(back, cfg, "{name}");
        }
        assert!(preset("nope").is_none());
    }

    #[test]
    fn fig2_k10_parameters() {
        let cfg = fig2(10);
        assert_eq!(
            (cfg.model.n, cfg.model.m, cfg.model.k, cfg.solver.p),
            (1000, 1500, 10, 5000)
        );
        assert_eq!(cfg.solver.eta_a, 30.0);
        assert_eq!((cfg.solver.coeff.eta_x, cfg.solver.coeff.tau), (0.2, 0.1));
        assert!((cfg.model.epsilon0 - 0.28953).abs() < 1e-5);
        assert_eq!(fig2(50).solver.eta_a, 15.0);
    }
}
