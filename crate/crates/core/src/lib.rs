//! Single-depot multiple set orienteering (sDmSOP) toolkit.
//!
//! `m` identical travelers leave a shared depot, each visits an ordered list
//! of clusters (one vertex per cluster) and returns, with every route cost
//! bounded by the budget `B`. A cluster's profit is collected at most once.
//! The goal is to maximize the total collected profit.
//!
//! Indexing inside the crate is zero-based: node `0` is the depot and cluster
//! `0` is the depot cluster `[0]`. Every text format reads and writes the
//! one-based numbering of the benchmark files.
//!
//! * [`gtsp_io`] parses GTSP benchmark files and turns them into instances.
//! * [`model`] holds solutions, the layered route DP and feasibility checks.
//! * [`ga`] and [`vns`] are the two metaheuristics.
//! * [`exact`] is the ground truth: a brute-force oracle and the ILP writer.

pub mod config;
pub mod exact;
pub mod ga;
pub mod gtsp_io;
pub mod instance;
pub mod model;
pub mod vns;

pub use config::{ConfigError, SolverConfig};
pub use exact::{brute_force_opt, build_ilp, emit_lp, emit_mps, IlpModel, OracleLimits};
pub use ga::{run_ga, Chromosome, GaConfig};
pub use gtsp_io::{parse_gtsp, transform_to_sdmsop, GtspFile, InstanceMeta, ProfitRule};
pub use instance::{Cost, DistanceSource, Profit, SdmsopInstance};
pub use model::{cluster_path_dp, evaluate, is_valid, EvalResult, Solution};
pub use vns::{run_vns, VnsConfig};
