use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, Sweep};
use super::convergence::{create_dir, write_json};
use crate::dict_update::default_eta_a;
use crate::error::{NoodlError, Result};
use crate::model::{generate_ground_truth, GenerativeConfig};
use crate::rng::{derive_seed, label};
use crate::runner::{run_noodl, SolverConfig, Termination};

pub const GRID_SCHEMA: &str = "# noodl-phase v1";
pub const GRID_HEADER: &str = "m,ratio,succ_A,succ_X";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub m: usize,
    pub ratio: f64,
    pub trial: usize,
    pub p: usize,
    pub iterations: usize,
    pub termination: Termination,
    pub rel_frob_a: Option<f64>,
    pub rel_frob_x: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseCell {
    pub m: usize,
    pub ratio: f64,
    pub success_rate_a: f64,
    pub success_rate_x: f64,
}

#[derive(Debug, Clone)]
pub struct PhaseOutput {
    pub cells: Vec<PhaseCell>,
    pub trials: Vec<TrialOutcome>,
    pub files: Vec<PathBuf>,
}

/// Samples per iteration for a cell.
pub fn batch_size(m: usize, ratio: f64) -> usize {
    ((ratio * m as f64).ceil() as usize).max(1)
}

pub fn trial_seed(seed: u64, m: usize, ratio_idx: usize, trial: usize) -> u64 {
    derive_seed(seed, &[label::TRIAL, m as u64, ratio_idx as u64, trial as u64])
}

/// Runs one trial: fresh ground truth and initialization, `iteration_cap`
/// iterations at most.
pub fn run_trial(
    model: &GenerativeConfig,
    solver: &SolverConfig,
    sweep: &Sweep,
    seed: u64,
    (m, ratio_idx, trial): (usize, usize, usize),
) -> Result<TrialOutcome> {
    let ratio = sweep.ratios[ratio_idx];
    let gen = GenerativeConfig { m, ..model.clone() };
    let s = trial_seed(seed, m, ratio_idx, trial);
    let cfg = SolverConfig {
        eta_a: default_eta_a(m, gen.k, sweep.eta_a_scale)?,
        max_iters: sweep.iteration_cap,
        p: batch_size(m, ratio),
        seed: s,
        ..solver.clone()
    };
    let truth = generate_ground_truth(gen.n, m, s)?;
    let res = run_noodl(&truth, &gen, &cfg)?;
    let last = res.last();
    Ok(TrialOutcome {
        m,
        ratio,
        trial,
        p: cfg.p,
        iterations: res.trace.len(),
        termination: res.termination,
        rel_frob_a: last.and_then(|r| r.rel_frob_a),
        rel_frob_x: last.and_then(|r| r.rel_frob_x),
    })
}

fn success(v: Option<f64>, threshold: f64, term: Termination) -> bool {
    term != Termination::Degenerate && v.is_some_and(|e| e <= threshold)
}

/// Aggregates trial outcomes into success rates per `(m, ratio)` cell.
pub fn summarize(sweep: &Sweep, trials: &[TrialOutcome]) -> Vec<PhaseCell> {
    let mut cells = Vec::new();
    for &m in &sweep.m_values {
        for &ratio in &sweep.ratios {
            let group: Vec<_> = trials.iter().filter(|t| t.m == m && t.ratio == ratio).collect();
            let n = group.len().max(1) as f64;
            let rate = |f: &dyn Fn(&TrialOutcome) -> Option<f64>| {
                group
                    .iter()
                    .filter(|t| success(f(t), sweep.success_threshold, t.termination))
                    .count() as f64
                    / n
            };
            cells.push(PhaseCell {
                m,
                ratio,
                success_rate_a: rate(&|t| t.rel_frob_a),
                success_rate_x: rate(&|t| t.rel_frob_x),
            });
        }
    }
    cells
}

pub fn grid_csv(cells: &[PhaseCell]) -> String {
    let mut s = format!("{GRID_SCHEMA}\n{GRID_HEADER}\n");
    for c in cells {
        let _ = writeln!(s, "{},{},{},{}", c.m, c.ratio, c.success_rate_a, c.success_rate_x);
    }
    s
}

fn trials_csv(trials: &[TrialOutcome]) -> String {
    let mut s = String::from("m,ratio,trial,p,iterations,termination,rel_frob_A,rel_frob_X\n");
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for t in trials {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:?},{},{}",
            t.m,
            t.ratio,
            t.trial,
            t.p,
            t.iterations,
            t.termination,
            opt(t.rel_frob_a),
            opt(t.rel_frob_x)
        );
    }
    s
}

/// Runs the full sweep. Trials run in parallel; each derives its own seed,
/// so the output does not depend on scheduling.
pub fn run_phase(cfg: &ExperimentConfig) -> Result<PhaseOutput> {
    cfg.validate()?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| NoodlError::config("phase_transition experiments need a sweep"))?;
    let jobs: Vec<(usize, usize, usize)> = sweep
        .m_values
        .iter()
        .flat_map(|&m| (0..sweep.ratios.len()).flat_map(move |r| (0..sweep.trials).map(move |t| (m, r, t))))
        .collect();
    log::info!("phase sweep: {} trials", jobs.len());
    let trials = jobs
        .par_iter()
        .map(|&job| {
            let out = run_trial(&cfg.model, &cfg.solver, sweep, cfg.seed, job)?;
            log::debug!(
                "m={} ratio={} trial={}: A {:?}, X {:?}",
                out.m,
                out.ratio,
                out.trial,
                out.rel_frob_a,
                out.rel_frob_x
            );
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let cells = summarize(sweep, &trials);

    let out = &cfg.output_dir;
    create_dir(out)?;
    let grid = out.join("phase_grid.csv");
    fs::write(&grid, grid_csv(&cells)).map_err(|e| NoodlError::io(&grid, e))?;
    let per_trial = out.join("phase_trials.csv");
    fs::write(&per_trial, trials_csv(&trials)).map_err(|e| NoodlError::io(&per_trial, e))?;
    let json = out.join("phase_grid.json");
    write_json(
        &json,
        &serde_json::json!({ "n": cfg.model.n, "k": cfg.model.k, "cells": cells }),
    )?;
    Ok(PhaseOutput {
        cells,
        trials,
        files: vec![grid, per_trial, json],
    })
}
