//! Brute-force optimum for tiny instances.
//!
//! Every ordered sequence of non-depot clusters is priced with the layered
//! DP, extended one cluster at a time. The cheapest order of each cluster
//! subset is kept, and up to `m` disjoint affordable subsets are packed by
//! a submask DP.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Cost, Profit, SdmsopInstance};
use crate::model::{ModelError, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleLimits {
    pub max_clusters: usize,
    pub max_vertices_per_cluster: usize,
    /// Cap on the number of ordered cluster sequences enumerated.
    pub max_sequences: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_clusters: 8,
            max_vertices_per_cluster: 4,
            max_sequences: 1_000_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error(
        "instance too large for the exact oracle: {clusters} clusters (limit {max_clusters}), \
         largest cluster {largest} vertices (limit {max_vertices}), \
         {sequences} sequences (limit {max_sequences})"
    )]
    TooLarge {
        clusters: usize,
        max_clusters: usize,
        largest: usize,
        max_vertices: usize,
        sequences: u64,
        max_sequences: u64,
    },
    #[error("invalid limits: all limits must be positive")]
    BadLimits,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Ordered sequences of length `0..=p` drawn without repetition from `p`.
fn sequence_count(p: usize) -> u64 {
    let mut total: u64 = 1;
    let mut term: u64 = 1;
    for k in 0..p as u64 {
        term = term.saturating_mul(p as u64 - k);
        total = total.saturating_add(term);
    }
    total
}

/// Cheapest affordable order per subset of non-depot clusters. Bit `b`
/// of a mask stands for cluster `b + 1`.
struct SubsetTable {
    cost: Vec<Cost>,
    order: Vec<Vec<usize>>,
    profit: Vec<Profit>,
}

impl SubsetTable {
    fn build(inst: &SdmsopInstance) -> Self {
        let p = inst.visitable_clusters();
        let size = 1usize << p;
        let mut table = Self {
            cost: vec![Cost::MAX; size],
            order: vec![Vec::new(); size],
            profit: (0..size)
                .map(|mask| (0..p).filter(|b| mask >> b & 1 == 1).map(|b| inst.profit(b + 1)).sum())
                .collect(),
        };
        table.cost[0] = 0;
        let mut seq = Vec::with_capacity(p);
        let mut layers: Vec<Vec<(usize, Cost)>> = vec![vec![(0, 0)]];
        table.extend(inst, 0, &mut seq, &mut layers);
        table
    }

    fn extend(
        &mut self,
        inst: &SdmsopInstance,
        mask: usize,
        seq: &mut Vec<usize>,
        layers: &mut Vec<Vec<(usize, Cost)>>,
    ) {
        let p = inst.visitable_clusters();
        for b in 0..p {
            if mask >> b & 1 == 1 {
                continue;
            }
            let q = b + 1;
            let prev = layers.last().expect("depot layer");
            let layer: Vec<(usize, Cost)> = inst
                .cluster(q)
                .iter()
                .map(|&v| {
                    let best = prev.iter().map(|&(u, c)| c + inst.dist(u, v)).min().unwrap_or(Cost::MAX);
                    (v, best)
                })
                .collect();
            // Distances are non-negative, so a prefix already over budget
            // cannot be completed.
            if layer.iter().map(|&(_, c)| c).min().unwrap_or(Cost::MAX) > inst.budget() {
                continue;
            }
            let closed = layer.iter().map(|&(v, c)| c + inst.dist(v, 0)).min().unwrap_or(Cost::MAX);
            let next = mask | 1 << b;
            seq.push(q);
            if closed < self.cost[next] {
                self.cost[next] = closed;
                self.order[next].clone_from(seq);
            }
            layers.push(layer);
            self.extend(inst, next, seq, layers);
            layers.pop();
            seq.pop();
        }
    }

    fn affordable(&self, mask: usize, budget: Cost) -> bool {
        self.cost[mask] <= budget
    }
}

fn check_limits(inst: &SdmsopInstance, limits: &OracleLimits) -> Result<(), OracleError> {
    if limits.max_clusters == 0 || limits.max_vertices_per_cluster == 0 || limits.max_sequences == 0 {
        return Err(OracleError::BadLimits);
    }
    let p = inst.visitable_clusters();
    let largest = inst.max_cluster_size();
    let sequences = sequence_count(p);
    if p > limits.max_clusters || largest > limits.max_vertices_per_cluster || sequences > limits.max_sequences {
        return Err(OracleError::TooLarge {
            clusters: p,
            max_clusters: limits.max_clusters,
            largest,
            max_vertices: limits.max_vertices_per_cluster,
            sequences,
            max_sequences: limits.max_sequences,
        });
    }
    Ok(())
}

/// Packs up to `m` routes (`strict`: exactly `m` non-empty routes) into
/// disjoint affordable subsets. `best[k][mask]` is the best profit with `k`
/// routes drawn from `mask`; `None` marks an impossible state.
fn pack(table: &SubsetTable, p: usize, m: usize, budget: Cost, strict: bool) -> Option<(Profit, Vec<usize>)> {
    let size = 1usize << p;
    let full = size - 1;
    let mut best: Vec<Vec<Option<Profit>>> = vec![vec![Some(0); size]];
    let mut pick: Vec<Vec<usize>> = vec![vec![0; size]];
    for k in 1..=m {
        let prev = &best[k - 1];
        let mut row = vec![None; size];
        let mut choice = vec![0; size];
        for mask in 0..size {
            let mut s = mask;
            loop {
                if (!strict || s != 0) && table.affordable(s, budget) {
                    if let Some(rest) = prev[mask ^ s] {
                        let value = rest + table.profit[s];
                        if row[mask].map_or(true, |r| value > r) {
                            row[mask] = Some(value);
                            choice[mask] = s;
                        }
                    }
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & mask;
            }
        }
        best.push(row);
        pick.push(choice);
    }
    let profit = best[m][full]?;
    let mut subsets = Vec::with_capacity(m);
    let mut mask = full;
    for k in (1..=m).rev() {
        let s = pick[k][mask];
        subsets.push(s);
        mask ^= s;
    }
    Some((profit, subsets))
}

fn assemble(inst: &SdmsopInstance, table: &SubsetTable, subsets: &[usize]) -> Result<Solution, ModelError> {
    let mut routes: Vec<Vec<usize>> = subsets.iter().map(|&s| table.order[s].clone()).collect();
    routes.sort_by_key(Vec::is_empty);
    Solution::from_routes(inst, routes)
}

/// Exact optimum with idle travelers allowed.
pub fn brute_force_opt(inst: &SdmsopInstance, limits: &OracleLimits) -> Result<(Solution, Profit), OracleError> {
    check_limits(inst, limits)?;
    let table = SubsetTable::build(inst);
    let (profit, subsets) = pack(&table, inst.visitable_clusters(), inst.travelers(), inst.budget(), false)
        .expect("the all-idle packing always exists");
    Ok((assemble(inst, &table, &subsets)?, profit))
}

/// Exact optimum when every traveler must leave the depot and visit at
/// least one cluster. `None` when that is impossible within budget.
pub fn brute_force_opt_strict(
    inst: &SdmsopInstance,
    limits: &OracleLimits,
) -> Result<Option<(Solution, Profit)>, OracleError> {
    check_limits(inst, limits)?;
    let table = SubsetTable::build(inst);
    match pack(&table, inst.visitable_clusters(), inst.travelers(), inst.budget(), true) {
        Some((profit, subsets)) => Ok(Some((assemble(inst, &table, &subsets)?, profit))),
        None => Ok(None),
    }
}
