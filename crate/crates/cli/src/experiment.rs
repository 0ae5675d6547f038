//! Solver x instance x seed matrices and their CSV report.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use sdmsop_core::exact::emit_mps;
use sdmsop_core::gtsp_io::MetaTable;
use sdmsop_core::model::{check_vertices, write_solution};
use sdmsop_core::{
    brute_force_opt, build_ilp, emit_lp, evaluate, run_ga, run_vns, Profit, ProfitRule, SdmsopInstance, Solution,
    SolverConfig,
};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::inputs::Source;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Ga,
    Vns,
    Oracle,
    EmitIlp,
}

impl SolverKind {
    /// Deterministic solvers run once per instance, not once per seed.
    pub fn seeded(self) -> bool {
        matches!(self, SolverKind::Ga | SolverKind::Vns)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Ga => "ga",
            SolverKind::Vns => "vns",
            SolverKind::Oracle => "oracle",
            SolverKind::EmitIlp => "emit-ilp",
        })
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ga" => Ok(SolverKind::Ga),
            "vns" => Ok(SolverKind::Vns),
            "oracle" => Ok(SolverKind::Oracle),
            "emit-ilp" | "ilp" => Ok(SolverKind::EmitIlp),
            other => Err(format!("unknown solver `{other}` (expected ga, vns, oracle or emit-ilp)")),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SpecError {
    #[error("no instances given")]
    NoInstances,
    #[error("no solvers given")]
    NoSolvers,
    #[error("no seeds given")]
    NoSeeds,
    #[error("seed {0} is listed twice")]
    DuplicateSeed(u64),
    #[error("no traveler counts given")]
    NoTravelers,
    #[error("traveler count must be positive")]
    ZeroTravelers,
    #[error("w must lie in [0, 1], got {0}")]
    BadW(f64),
    #[error("time limit must be non-negative")]
    BadTimeLimit,
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub instances: Vec<PathBuf>,
    pub rules: Vec<ProfitRule>,
    pub w: f64,
    pub travelers: Vec<usize>,
    pub solvers: Vec<SolverKind>,
    pub seeds: Vec<u64>,
    pub time_limit: Option<f64>,
    pub config: SolverConfig,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.instances.is_empty() {
            return Err(SpecError::NoInstances);
        }
        if self.solvers.is_empty() {
            return Err(SpecError::NoSolvers);
        }
        if self.seeds.is_empty() {
            return Err(SpecError::NoSeeds);
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(&s) = self.seeds.iter().find(|s| !seen.insert(**s)) {
            return Err(SpecError::DuplicateSeed(s));
        }
        if self.travelers.is_empty() {
            return Err(SpecError::NoTravelers);
        }
        if self.travelers.contains(&0) {
            return Err(SpecError::ZeroTravelers);
        }
        if !(0.0..=1.0).contains(&self.w) {
            return Err(SpecError::BadW(self.w));
        }
        if self.time_limit.is_some_and(|t| t.is_nan() || t < 0.0) {
            return Err(SpecError::BadTimeLimit);
        }
        Ok(())
    }

    /// Effective settings for one run: seed and time limit applied.
    fn config_for(&self, seed: u64) -> SolverConfig {
        let mut cfg = self.config.clone();
        cfg.ga.rng_seed = seed;
        cfg.vns.rng_seed = seed;
        if self.time_limit.is_some() {
            cfg.ga.time_limit = self.time_limit;
            cfg.vns.time_limit = self.time_limit;
        }
        cfg
    }

    /// Short hash of the settings that shape a solver's result, seed excluded.
    pub fn fingerprint(&self, solver: SolverKind) -> String {
        let cfg = self.config_for(0);
        let mut h = Sha256::new();
        h.update(solver.to_string());
        h.update(cfg.to_toml());
        hex::encode(&h.finalize()[..8])
    }
}

/// Column names of the report, in order.
pub const COLUMNS: [&str; 12] = [
    "kind",
    "instance",
    "n",
    "t",
    "rule",
    "solver",
    "seed",
    "profit",
    "wall_time_seconds",
    "feasible",
    "config_fingerprint",
    "error",
];

/// One solver run, or (`kind = "best"`) the best-of-seeds summary of a cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub kind: &'static str,
    pub instance: String,
    pub n: usize,
    pub t: usize,
    pub rule: String,
    pub solver: String,
    pub seed: Option<u64>,
    pub profit: Option<Profit>,
    pub wall_time_seconds: f64,
    pub feasible: Option<bool>,
    pub config_fingerprint: String,
    pub error: Option<String>,
}

/// Files produced by one run, keyed by a stem unique within the matrix.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub stem: String,
    pub history_csv: Option<String>,
    pub solution: Option<String>,
    pub lp: Option<String>,
    pub mps: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    pub artifacts: Artifacts,
}

struct Cell {
    instance: Result<SdmsopInstance, String>,
    name: String,
    t: usize,
    rule: String,
}

struct Job {
    cell: usize,
    solver: SolverKind,
    seed: Option<u64>,
}

/// Runs every (instance, rule, t, solver, seed) combination on a pool of
/// `workers` threads. Failures become rows with an `error`.
pub fn run_matrix(spec: &ExperimentSpec, meta: Option<&MetaTable>, workers: usize, emit_mps_files: bool) -> Vec<RunOutput> {
    let mut cells = Vec::new();
    for path in &spec.instances {
        let source = Source::load(path);
        let fallback = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        for &rule in &spec.rules {
            for &t in &spec.travelers {
                let (name, label, instance) = match &source {
                    Ok(src) => {
                        let inst = src.materialize(rule, spec.w, meta, t, path).map(|(inst, warnings)| {
                            for w in warnings {
                                log::warn!("{}: {w}", src.name());
                            }
                            inst
                        });
                        (src.name().to_string(), src.rule_label(rule), inst.map_err(|e| e.to_string()))
                    }
                    Err(e) => (fallback.clone(), rule.to_string(), Err(e.to_string())),
                };
                if cells.iter().any(|c: &Cell| c.name == name && c.t == t && c.rule == label) {
                    continue;
                }
                cells.push(Cell {
                    instance,
                    name,
                    t,
                    rule: label,
                });
            }
        }
    }
    let mut jobs = Vec::new();
    for cell in 0..cells.len() {
        for &solver in &spec.solvers {
            if solver.seeded() {
                jobs.extend(spec.seeds.iter().map(|&s| Job {
                    cell,
                    solver,
                    seed: Some(s),
                }));
            } else {
                jobs.push(Job { cell, solver, seed: None });
            }
        }
    }
    let run = || {
        jobs.par_iter()
            .map(|job| run_one(spec, &cells[job.cell], job, emit_mps_files))
            .collect::<Vec<_>>()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(e) => {
            log::warn!("worker pool unavailable ({e}); running on the global pool");
            run()
        }
    }
}

fn run_one(spec: &ExperimentSpec, cell: &Cell, job: &Job, emit_mps_files: bool) -> RunOutput {
    let mut record = RunRecord {
        kind: "run",
        instance: cell.name.clone(),
        n: 0,
        t: cell.t,
        rule: cell.rule.clone(),
        solver: job.solver.to_string(),
        seed: job.seed,
        profit: None,
        wall_time_seconds: 0.0,
        feasible: None,
        config_fingerprint: spec.fingerprint(job.solver),
        error: None,
    };
    let mut stem = format!("{}_t{}_{}_{}", cell.name, cell.t, cell.rule, job.solver);
    if let Some(s) = job.seed {
        stem.push_str(&format!("_s{s}"));
    }
    let mut artifacts = Artifacts {
        stem,
        ..Artifacts::default()
    };
    let inst = match &cell.instance {
        Ok(inst) => inst,
        Err(e) => {
            record.error = Some(e.clone());
            return RunOutput { record, artifacts };
        }
    };
    record.n = inst.node_count();
    let cfg = spec.config_for(job.seed.unwrap_or(0));
    let start = Instant::now();
    let solved: Result<Solution, String> = match job.solver {
        SolverKind::Ga => {
            let out = run_ga(inst, &cfg.ga);
            record.wall_time_seconds = start.elapsed().as_secs_f64();
            let mut csv = String::from("generation,incumbent_profit,generation_best,mean_fitness\n");
            for h in &out.history {
                csv.push_str(&format!("{},{},{},{}\n", h.generation, h.incumbent_profit, h.generation_best, h.mean_fitness));
            }
            artifacts.history_csv = Some(csv);
            Ok(out.best)
        }
        SolverKind::Vns => {
            let out = run_vns(inst, &cfg.vns);
            record.wall_time_seconds = start.elapsed().as_secs_f64();
            let mut csv = String::from("iteration,l,incumbent_profit,incumbent_max_cost\n");
            for h in &out.history {
                csv.push_str(&format!("{},{},{},{}\n", h.iteration, h.l, h.incumbent_profit, h.incumbent_max_cost));
            }
            artifacts.history_csv = Some(csv);
            Ok(out.best)
        }
        SolverKind::Oracle => {
            let out = brute_force_opt(inst, &cfg.oracle);
            record.wall_time_seconds = start.elapsed().as_secs_f64();
            out.map(|(sol, _)| sol).map_err(|e| e.to_string())
        }
        SolverKind::EmitIlp => {
            let model = build_ilp(inst);
            artifacts.lp = Some(emit_lp(&model));
            if emit_mps_files {
                artifacts.mps = Some(emit_mps(&model));
            }
            record.wall_time_seconds = start.elapsed().as_secs_f64();
            return RunOutput { record, artifacts };
        }
    };
    match solved.and_then(|sol| score(inst, &sol)) {
        Ok((profit, feasible, text)) => {
            record.profit = Some(profit);
            record.feasible = Some(feasible);
            artifacts.solution = Some(text);
        }
        Err(e) => record.error = Some(e),
    }
    RunOutput { record, artifacts }
}

/// Re-scores a solver result independently of the solver's own bookkeeping.
fn score(inst: &SdmsopInstance, sol: &Solution) -> Result<(Profit, bool, String), String> {
    let eval = evaluate(inst, sol).map_err(|e| e.to_string())?;
    let vertices_ok = check_vertices(inst, sol).is_ok();
    let text = write_solution(inst, sol).map_err(|e| e.to_string())?;
    Ok((eval.total_profit, eval.feasible && vertices_ok, text))
}

/// Best-of-seeds rows, one per (instance, t, rule, solver) cell in first-seen
/// order. Wall time is the mean over successful runs; `seed` is the first
/// seed reaching the best profit.
pub fn summarize(runs: &[RunRecord]) -> Vec<RunRecord> {
    let mut keys: Vec<(String, usize, String, String)> = Vec::new();
    for r in runs.iter().filter(|r| r.kind == "run" && r.solver != "emit-ilp") {
        let key = (r.instance.clone(), r.t, r.rule.clone(), r.solver.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(instance, t, rule, solver)| {
            let group: Vec<&RunRecord> = runs
                .iter()
                .filter(|r| r.kind == "run" && r.instance == instance && r.t == t && r.rule == rule && r.solver == solver)
                .collect();
            let ok: Vec<&&RunRecord> = group.iter().filter(|r| r.profit.is_some()).collect();
            let best = ok.iter().max_by(|a, b| a.profit.cmp(&b.profit).then(b.seed.cmp(&a.seed)));
            let failed = group.len() - ok.len();
            RunRecord {
                kind: "best",
                n: group[0].n,
                seed: best.and_then(|r| r.seed),
                profit: best.and_then(|r| r.profit),
                wall_time_seconds: if ok.is_empty() {
                    0.0
                } else {
                    ok.iter().map(|r| r.wall_time_seconds).sum::<f64>() / ok.len() as f64
                },
                feasible: best.and_then(|r| r.feasible),
                config_fingerprint: group[0].config_fingerprint.clone(),
                error: (failed > 0).then(|| format!("{failed} of {} runs failed", group.len())),
                instance,
                t,
                rule,
                solver,
            }
        })
        .collect()
}

pub fn write_csv<W: std::io::Write>(out: W, rows: &[RunRecord]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
