use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::{NoodlError, Result};
use crate::model::generate_ground_truth;
use crate::runner::{run_algorithm, Algorithm, RunResult, Termination};

/// Final state of one run, comparable across algorithms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    pub k: usize,
    pub iterations: usize,
    pub termination: Termination,
    pub final_max_col_err: Option<f64>,
    pub final_rel_frob_a: Option<f64>,
    pub final_rel_frob_x: Option<f64>,
    pub final_fit: Option<f64>,
    pub final_support_acc: Option<f64>,
    pub final_coef_max_err: Option<f64>,
    /// Final column error at or below `eps_t`.
    pub eps_t_met: bool,
    /// Final entrywise coefficient error at or below `delta_t`.
    pub delta_t_met: bool,
    pub mean_wall_ms: Option<f64>,
}

impl RunSummary {
    pub fn from_run(res: &RunResult, k: usize, eps_t: f64, delta_t: f64, with_timing: bool) -> Self {
        let last = res.last();
        let mean_wall = (with_timing && !res.trace.is_empty())
            .then(|| res.trace.iter().map(|r| r.wall_ms).sum::<f64>() / res.trace.len() as f64);
        RunSummary {
            algorithm: res.algorithm,
            k,
            iterations: res.trace.len(),
            termination: res.termination,
            final_max_col_err: last.and_then(|r| r.max_col_err),
            final_rel_frob_a: last.and_then(|r| r.rel_frob_a),
            final_rel_frob_x: last.and_then(|r| r.rel_frob_x),
            final_fit: last.map(|r| r.fit),
            final_support_acc: last.and_then(|r| r.support_acc),
            final_coef_max_err: res.final_coef_max_err,
            eps_t_met: last.and_then(|r| r.max_col_err).is_some_and(|e| e <= eps_t),
            delta_t_met: res.final_coef_max_err.is_some_and(|e| e <= delta_t),
            mean_wall_ms: mean_wall,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceOutput {
    pub runs: Vec<RunResult>,
    pub summaries: Vec<RunSummary>,
    pub files: Vec<PathBuf>,
}

impl ConvergenceOutput {
    pub fn any_degenerate(&self) -> bool {
        self.runs.iter().any(|r| r.termination == Termination::Degenerate)
    }
}

pub(crate) fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| NoodlError::io(dir, e))
}

pub(crate) fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| NoodlError::io(path, e))?;
    serde_json::to_writer_pretty(BufWriter::new(file), value)?;
    Ok(())
}

/// Runs every selected algorithm on one ground truth and writes a trace
/// CSV and JSON per algorithm plus `summary.json`.
pub fn run_convergence(cfg: &ExperimentConfig, algorithms: &[Algorithm]) -> Result<ConvergenceOutput> {
    cfg.validate()?;
    let out = &cfg.output_dir;
    create_dir(out)?;
    let truth = generate_ground_truth(cfg.model.n, cfg.model.m, cfg.seed)?;
    let k = cfg.model.k;
    let mut runs = Vec::new();
    let mut summaries = Vec::new();
    let mut files = Vec::new();
    for &alg in algorithms {
        log::info!(
            "running {alg} (n={}, m={}, k={k}, p={})",
            cfg.model.n,
            cfg.model.m,
            cfg.solver.p
        );
        let res = run_algorithm(alg, &truth, &cfg.model, &cfg.solver)?;
        if let Some(last) = res.last() {
            log::info!(
                "{alg}: {} iterations, {:?}, final max column error {:?}",
                res.trace.len(),
                res.termination,
                last.max_col_err
            );
        }
        let csv = out.join(format!("trace_{alg}_k{k}.csv"));
        let file = fs::File::create(&csv).map_err(|e| NoodlError::io(&csv, e))?;
        res.write_trace_csv(BufWriter::new(file), cfg.record_wall_time)
            .map_err(|e| NoodlError::io(&csv, e))?;
        let json = out.join(format!("trace_{alg}_k{k}.json"));
        write_json(&json, &res.trace_json(cfg.record_wall_time))?;
        files.extend([csv, json]);
        summaries.push(RunSummary::from_run(
            &res,
            k,
            cfg.solver.eps_t,
            cfg.solver.delta_t,
            cfg.record_wall_time,
        ));
        runs.push(res);
    }
    let summary = out.join("summary.json");
    write_json(
        &summary,
        &serde_json::json!({
            "n": cfg.model.n,
            "m": cfg.model.m,
            "k": k,
            "p": cfg.solver.p,
            "seed": cfg.seed,
            "runs": summaries,
        }),
    )?;
    files.push(summary);
    Ok(ConvergenceOutput { runs, summaries, files })
}

/// Table of final errors, one row per algorithm.
pub fn comparison_table(summaries: &[RunSummary]) -> String {
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.3e}")).unwrap_or_else(|| "-".into());
    let mut s =
        String::from("algorithm,k,iterations,termination,final_max_col_err,final_rel_frob_A,final_rel_frob_X\n");
    for r in summaries {
        s.push_str(&format!(
            "{},{},{},{:?},{},{},{}\n",
            r.algorithm,
            r.k,
            r.iterations,
            r.termination,
            fmt(r.final_max_col_err),
            fmt(r.final_rel_frob_a),
            fmt(r.final_rel_frob_x)
        ));
    }
    s
}
