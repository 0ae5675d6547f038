//! Variable neighborhood search: greedy construction, then alternating
//! shake / local search / unvisited-cluster insertion, accepting only valid
//! strictly more profitable solutions.

mod ops;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ConfigError;
use crate::instance::{Cost, Profit, SdmsopInstance};
use crate::model::{self, ModelError, RoutePricer, Solution};
use ops::Plan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalSearchMode {
    /// Random pair draws, as many as the trial count.
    #[default]
    Random,
    /// Full neighborhood scan, best strict improvement per step.
    BestImprovement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VnsConfig {
    pub l_max: usize,
    /// Outer sweeps without improvement before stopping.
    pub stall_limit: usize,
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
    /// Trials per local-search call; `None` means `p * p`.
    pub local_search_trials: Option<usize>,
    pub local_search_mode: LocalSearchMode,
    pub rng_seed: u64,
    /// Let One Cluster Exchange swap an unvisited cluster into a route.
    pub pool_exchange: bool,
    pub dp_cache: bool,
}

impl Default for VnsConfig {
    fn default() -> Self {
        Self {
            l_max: 2,
            stall_limit: 2000,
            time_limit: None,
            local_search_trials: None,
            local_search_mode: LocalSearchMode::Random,
            rng_seed: 0,
            pool_exchange: true,
            dp_cache: false,
        }
    }
}

impl VnsConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |field: &'static str, reason: &str| {
            Err(ConfigError::Invalid {
                field,
                reason: reason.to_string(),
            })
        };
        if self.l_max == 0 {
            return bad("l_max", "must be at least 1");
        }
        if self.stall_limit == 0 {
            return bad("stall_limit", "must be at least 1");
        }
        if self.time_limit.is_some_and(|t| t.is_nan() || t < 0.0) {
            return bad("time_limit", "must be non-negative");
        }
        Ok(())
    }

    pub fn trials(&self, inst: &SdmsopInstance) -> usize {
        let p = inst.visitable_clusters();
        self.local_search_trials.unwrap_or(p * p)
    }
}

/// One row per accepted incumbent; row 0 is the constructed solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VnsHistoryRow {
    pub iteration: u64,
    pub l: usize,
    pub incumbent_profit: Profit,
    pub incumbent_max_cost: Cost,
}

#[derive(Debug, Clone)]
pub struct VnsOutcome {
    pub best: Solution,
    pub profit: Profit,
    pub history: Vec<VnsHistoryRow>,
    pub iterations: u64,
    pub sweeps: u64,
    pub timed_out: bool,
}

fn to_solution(inst: &SdmsopInstance, plan: &Plan) -> Solution {
    Solution::from_routes(inst, plan.routes.clone()).expect("operators keep routes well formed")
}

fn to_plan(inst: &SdmsopInstance, sol: &Solution, pricer: &mut RoutePricer) -> Result<Plan, ModelError> {
    model::evaluate(inst, sol)?;
    Ok(Plan::new(inst, sol.routes.clone(), pricer))
}

/// Post-construction reassignment of routes to travelers. Travelers are
/// identical and share one depot, so every assignment of whole routes costs
/// the same; this is the identity and exists as an extension point.
pub fn reassign_routes(_inst: &SdmsopInstance, routes: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    routes
}

pub fn construct_initial_solution(inst: &SdmsopInstance, rng: &mut impl Rng) -> Solution {
    let mut pricer = RoutePricer::new(false);
    let plan = ops::construct(inst, &mut pricer, rng);
    Solution::from_routes(inst, reassign_routes(inst, plan.routes)).expect("construction is well formed")
}

/// Path Move for odd `l`, Path Exchange for even `l`. The result may exceed
/// the budget.
pub fn shake(inst: &SdmsopInstance, u: &Solution, l: usize, rng: &mut impl Rng) -> Result<Solution, ModelError> {
    let mut pricer = RoutePricer::new(false);
    let mut plan = to_plan(inst, u, &mut pricer)?;
    ops::shake(inst, &mut plan, l, &mut pricer, rng);
    Ok(to_solution(inst, &plan))
}

/// One Cluster Move for odd `l`, One Cluster Exchange for even `l`.
pub fn local_search(
    inst: &SdmsopInstance,
    u: &Solution,
    l: usize,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<Solution, ModelError> {
    let mut pricer = RoutePricer::new(false);
    let mut plan = to_plan(inst, u, &mut pricer)?;
    ops::local_search(inst, &mut plan, l, trials, false, &mut pricer, rng);
    Ok(to_solution(inst, &plan))
}

/// Inserts unvisited clusters at their cheapest feasible positions.
pub fn insert_unvisited(inst: &SdmsopInstance, u: &Solution) -> Result<Solution, ModelError> {
    let mut pricer = RoutePricer::new(false);
    let mut plan = to_plan(inst, u, &mut pricer)?;
    ops::insert_unvisited(inst, &mut plan, &mut pricer);
    Ok(to_solution(inst, &plan))
}

pub fn run_vns(inst: &SdmsopInstance, cfg: &VnsConfig) -> VnsOutcome {
    let start = Instant::now();
    let deadline = cfg.time_limit.map(|s| start + Duration::from_secs_f64(s));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut pricer = RoutePricer::new(cfg.dp_cache);
    let budget = inst.budget();
    let trials = cfg.trials(inst);

    let built = ops::construct(inst, &mut pricer, &mut rng);
    let mut u = Plan::new(inst, reassign_routes(inst, built.routes), &mut pricer);
    let mut history = vec![VnsHistoryRow {
        iteration: 0,
        l: 0,
        incumbent_profit: u.profit,
        incumbent_max_cost: u.max_cost(),
    }];
    let mut iterations = 0u64;
    let mut sweeps = 0u64;
    let mut stall = 0;
    let mut timed_out = false;
    'outer: loop {
        let mut improved = false;
        let mut l = 1;
        while l <= cfg.l_max {
            if deadline.is_some_and(|d| Instant::now() >= d) {
                timed_out = true;
                break 'outer;
            }
            iterations += 1;
            let mut cand = u.clone();
            ops::shake(inst, &mut cand, l, &mut pricer, &mut rng);
            match cfg.local_search_mode {
                LocalSearchMode::Random => {
                    ops::local_search(inst, &mut cand, l, trials, cfg.pool_exchange, &mut pricer, &mut rng)
                }
                LocalSearchMode::BestImprovement => ops::local_search_best(inst, &mut cand, l, trials, &mut pricer),
            }
            ops::insert_unvisited(inst, &mut cand, &mut pricer);
            if cand.feasible(budget) && cand.profit > u.profit {
                u = cand;
                debug_assert!(model::is_valid(inst, &to_solution(inst, &u)) || inst.travelers() > inst.visitable_clusters());
                history.push(VnsHistoryRow {
                    iteration: iterations,
                    l,
                    incumbent_profit: u.profit,
                    incumbent_max_cost: u.max_cost(),
                });
                improved = true;
                l = 1;
            } else {
                l += 1;
            }
        }
        sweeps += 1;
        stall = if improved { 0 } else { stall + 1 };
        if stall >= cfg.stall_limit {
            break;
        }
    }
    log::debug!(
        "vns {}: profit {} after {} iterations in {:.2?}",
        inst.name(),
        u.profit,
        iterations,
        start.elapsed()
    );
    VnsOutcome {
        best: to_solution(inst, &u),
        profit: u.profit,
        history,
        iterations,
        sweeps,
        timed_out,
    }
}
