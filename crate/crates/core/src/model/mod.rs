//! Solutions, feasibility and evaluation.
//!
//! A solution is one ordered cluster sequence per traveler; the depot is
//! implicit at both ends. The vertex used inside each visited cluster is
//! picked by the layered DP in [`dp`].

mod dp;
mod text;

use std::collections::BTreeMap;

use thiserror::Error;

pub use dp::{cluster_path_dp, route_cost, DpScratch, DpTable, RouteCostCache, RoutePlan, RoutePricer};
pub use text::{parse_solution, write_solution, ParsedSolution, SolutionParseError};

use crate::instance::{Cost, Profit, SdmsopInstance};

/// Structural problems with a solution. Cluster, vertex and traveler numbers
/// are one-based, as in the file formats.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("cluster {0} is not a visitable cluster")]
    InvalidCluster(usize),
    #[error("cluster {0} appears twice in one route")]
    RepeatedInRoute(usize),
    #[error("cluster {cluster} is visited by travelers {first} and {second}; a set may be visited by at most one traveler")]
    DuplicateCluster {
        cluster: usize,
        first: usize,
        second: usize,
    },
    #[error("solution has {got} routes, instance has {expected} travelers")]
    TravelerCount { expected: usize, got: usize },
    #[error("vertex {vertex} chosen for cluster {cluster} is not a member of it")]
    VertexNotInCluster { cluster: usize, vertex: usize },
    #[error("no vertex chosen for visited cluster {0}")]
    MissingVertex(usize),
    #[error("vertex chosen for cluster {0}, which no route visits")]
    StrayVertex(usize),
}

/// Per-traveler cluster sequences (zero-based cluster indices, never the
/// depot) plus the vertex chosen in each visited cluster.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Solution {
    pub routes: Vec<Vec<usize>>,
    pub chosen_vertex: BTreeMap<usize, usize>,
}

impl Solution {
    /// `m` idle travelers.
    pub fn empty(m: usize) -> Self {
        Self {
            routes: vec![Vec::new(); m],
            chosen_vertex: BTreeMap::new(),
        }
    }

    /// Builds a solution from cluster sequences, choosing vertices with the
    /// DP. Fails on the same structural errors as [`evaluate`].
    pub fn from_routes(inst: &SdmsopInstance, routes: Vec<Vec<usize>>) -> Result<Self, ModelError> {
        check_routes(inst, &routes)?;
        let mut chosen_vertex = BTreeMap::new();
        for route in &routes {
            let plan = cluster_path_dp(inst, route)?;
            chosen_vertex.extend(route.iter().copied().zip(plan.vertices));
        }
        Ok(Self {
            routes,
            chosen_vertex,
        })
    }

    pub fn visited(&self) -> impl Iterator<Item = usize> + '_ {
        self.routes.iter().flatten().copied()
    }

    pub fn visited_count(&self) -> usize {
        self.routes.iter().map(Vec::len).sum()
    }

    pub fn profit(&self, inst: &SdmsopInstance) -> Profit {
        self.visited().map(|q| inst.profit(q)).sum()
    }

    /// Closed walk of traveler `t` through the chosen vertices, depot at
    /// both ends.
    pub fn walk(&self, t: usize) -> Vec<usize> {
        let mut walk = vec![0];
        walk.extend(
            self.routes[t]
                .iter()
                .map(|q| self.chosen_vertex.get(q).copied().unwrap_or(usize::MAX)),
        );
        walk.push(0);
        walk
    }
}

/// Evaluation of a solution against an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalResult {
    pub total_profit: Profit,
    pub route_costs: Vec<Cost>,
    pub feasible: bool,
}

impl EvalResult {
    pub fn max_cost(&self) -> Cost {
        self.route_costs.iter().copied().max().unwrap_or(0)
    }

    /// Zero-based travelers whose route exceeds `budget`.
    pub fn violations(&self, budget: Cost) -> Vec<usize> {
        (0..self.route_costs.len())
            .filter(|&t| self.route_costs[t] > budget)
            .collect()
    }
}

fn check_routes(inst: &SdmsopInstance, routes: &[Vec<usize>]) -> Result<(), ModelError> {
    if routes.len() != inst.travelers() {
        return Err(ModelError::TravelerCount {
            expected: inst.travelers(),
            got: routes.len(),
        });
    }
    let mut owner = vec![usize::MAX; inst.cluster_count()];
    for (t, route) in routes.iter().enumerate() {
        dp::check_sequence(inst, route)?;
        for &q in route {
            if owner[q] != usize::MAX {
                return Err(ModelError::DuplicateCluster {
                    cluster: q + 1,
                    first: owner[q] + 1,
                    second: t + 1,
                });
            }
            owner[q] = t;
        }
    }
    Ok(())
}

/// Checks the chosen-vertex map: defined exactly on visited clusters, each
/// vertex a member of its cluster.
pub fn check_vertices(inst: &SdmsopInstance, sol: &Solution) -> Result<(), ModelError> {
    for q in sol.visited() {
        match sol.chosen_vertex.get(&q) {
            None => return Err(ModelError::MissingVertex(q + 1)),
            Some(&v) if v >= inst.node_count() || inst.cluster_of(v) != q => {
                return Err(ModelError::VertexNotInCluster {
                    cluster: q + 1,
                    vertex: v + 1,
                })
            }
            Some(_) => {}
        }
    }
    if sol.chosen_vertex.len() != sol.visited_count() {
        let stray = sol
            .chosen_vertex
            .keys()
            .find(|q| !sol.visited().any(|v| v == **q))
            .copied()
            .unwrap_or(0);
        return Err(ModelError::StrayVertex(stray + 1));
    }
    Ok(())
}

/// Prices every route with the DP. Shared clusters are an error, never
/// silently scored.
pub fn evaluate(inst: &SdmsopInstance, sol: &Solution) -> Result<EvalResult, ModelError> {
    check_routes(inst, &sol.routes)?;
    let mut scratch = DpScratch::new();
    let route_costs: Vec<Cost> = sol
        .routes
        .iter()
        .map(|r| scratch.route_cost(inst, r))
        .collect();
    let feasible = route_costs.iter().all(|&c| c <= inst.budget());
    Ok(EvalResult {
        total_profit: sol.profit(inst),
        route_costs,
        feasible,
    })
}

/// Full validity: structure, chosen vertices, every route within budget,
/// and at most as many travelers as visitable clusters.
pub fn is_valid(inst: &SdmsopInstance, sol: &Solution) -> bool {
    inst.travelers() <= inst.visitable_clusters()
        && check_vertices(inst, sol).is_ok()
        && evaluate(inst, sol).is_ok_and(|e| e.feasible)
}

/// Cost of the walk through the solution's own chosen vertices, which can
/// exceed the DP price when the vertices were edited by hand.
pub fn walk_costs(inst: &SdmsopInstance, sol: &Solution) -> Result<Vec<Cost>, ModelError> {
    check_routes(inst, &sol.routes)?;
    check_vertices(inst, sol)?;
    Ok((0..sol.routes.len())
        .map(|t| {
            sol.walk(t)
                .windows(2)
                .map(|w| inst.dist(w[0], w[1]))
                .sum()
        })
        .collect())
}

#[cfg(test)]
pub(crate) mod testing {
    use crate::instance::{Cost, DistanceSource, SdmsopInstance};

    /// Random EUC_2D-like instance with integer coordinates.
    pub fn random_instance(
        rng: &mut impl rand::Rng,
        n: usize,
        clusters: usize,
        travelers: usize,
        budget: Cost,
    ) -> SdmsopInstance {
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen_range(0..100) as f64, rng.gen_range(0..100) as f64))
            .collect();
        let mut dist = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = crate::gtsp_io::euc2d_distance(pts[i], pts[j]);
            }
        }
        let mut sets = vec![vec![0]];
        sets.extend((0..clusters).map(|_| Vec::new()));
        for v in 1..n {
            let q = if v <= clusters { v } else { rng.gen_range(1..=clusters) };
            sets[q].push(v);
        }
        let profits = (0..=clusters)
            .map(|q| if q == 0 { 0 } else { rng.gen_range(1..10) })
            .collect();
        SdmsopInstance::new("rand", n, dist, sets, profits, budget, travelers, DistanceSource::Euc2d(pts))
            .unwrap()
    }
}
