use std::collections::HashMap;

use super::ModelError;
use crate::instance::{Cost, SdmsopInstance};

/// Layered DP over a fixed cluster sequence: layer 0 and the last layer are
/// the depot, layer `i` in between holds the members of `seq[i - 1]`.
/// `cost[i][j]` is the cheapest walk from the depot to the `j`-th vertex of
/// layer `i`; `back[i][j]` is the index of its predecessor in layer `i - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DpTable {
    pub nodes: Vec<Vec<usize>>,
    pub cost: Vec<Vec<Cost>>,
    pub back: Vec<Vec<usize>>,
}

impl DpTable {
    pub fn build(inst: &SdmsopInstance, seq: &[usize]) -> Result<Self, ModelError> {
        check_sequence(inst, seq)?;
        let mut nodes: Vec<Vec<usize>> = Vec::with_capacity(seq.len() + 2);
        nodes.push(vec![0]);
        nodes.extend(seq.iter().map(|&q| inst.cluster(q).to_vec()));
        nodes.push(vec![0]);
        let mut cost = vec![vec![0]];
        let mut back = vec![vec![0]];
        for i in 1..nodes.len() {
            let prev_nodes = &nodes[i - 1];
            let prev_cost = &cost[i - 1];
            let mut layer_cost = Vec::with_capacity(nodes[i].len());
            let mut layer_back = Vec::with_capacity(nodes[i].len());
            for &v in &nodes[i] {
                let mut best = Cost::MAX;
                let mut arg = 0;
                for (k, (&u, &c)) in prev_nodes.iter().zip(prev_cost).enumerate() {
                    let through = c + inst.dist(u, v);
                    if through < best {
                        best = through;
                        arg = k;
                    }
                }
                layer_cost.push(best);
                layer_back.push(arg);
            }
            cost.push(layer_cost);
            back.push(layer_back);
        }
        Ok(Self { nodes, cost, back })
    }

    /// Minimum closed-walk cost.
    pub fn total(&self) -> Cost {
        self.cost.last().map_or(0, |l| l[0])
    }

    /// Arg-min vertex per cluster of the sequence, in sequence order.
    pub fn reconstruct(&self) -> Vec<usize> {
        let layers = self.nodes.len();
        let mut picks = vec![0; layers - 2];
        let mut j = 0;
        for i in (1..layers).rev() {
            j = self.back[i][j];
            if i >= 2 {
                picks[i - 2] = self.nodes[i - 1][j];
            }
        }
        picks
    }
}

/// Cost of a route and the vertex chosen in each of its clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutePlan {
    pub cost: Cost,
    pub vertices: Vec<usize>,
}

/// Cheapest depot -> one vertex per cluster (in order) -> depot walk.
/// Ties go to the lowest vertex index.
pub fn cluster_path_dp(inst: &SdmsopInstance, seq: &[usize]) -> Result<RoutePlan, ModelError> {
    let table = DpTable::build(inst, seq)?;
    Ok(RoutePlan {
        cost: table.total(),
        vertices: table.reconstruct(),
    })
}

pub(crate) fn check_sequence(inst: &SdmsopInstance, seq: &[usize]) -> Result<(), ModelError> {
    for (pos, &q) in seq.iter().enumerate() {
        if q == 0 || q >= inst.cluster_count() {
            return Err(ModelError::InvalidCluster(q + 1));
        }
        if seq[..pos].contains(&q) {
            return Err(ModelError::RepeatedInRoute(q + 1));
        }
    }
    Ok(())
}

/// Reusable buffers for cost-only DP evaluation in the solver hot loops.
#[derive(Debug, Default, Clone)]
pub struct DpScratch {
    prev: Vec<(usize, Cost)>,
    next: Vec<(usize, Cost)>,
}

impl DpScratch {
    pub fn new() -> Self {
        Self::default()
    }

    /// Same value as [`cluster_path_dp`]`.cost`, without validation or
    /// vertex reconstruction.
    pub fn route_cost(&mut self, inst: &SdmsopInstance, seq: &[usize]) -> Cost {
        if seq.is_empty() {
            return 0;
        }
        self.prev.clear();
        self.prev.extend(inst.cluster(seq[0]).iter().map(|&v| (v, inst.dist(0, v))));
        for &q in &seq[1..] {
            self.next.clear();
            for &v in inst.cluster(q) {
                let best = self
                    .prev
                    .iter()
                    .map(|&(u, c)| c + inst.dist(u, v))
                    .min()
                    .unwrap_or(Cost::MAX);
                self.next.push((v, best));
            }
            std::mem::swap(&mut self.prev, &mut self.next);
        }
        self.prev
            .iter()
            .map(|&(u, c)| c + inst.dist(u, 0))
            .min()
            .unwrap_or(0)
    }
}

pub fn route_cost(inst: &SdmsopInstance, seq: &[usize]) -> Cost {
    DpScratch::new().route_cost(inst, seq)
}

/// Optional per-run memo of route costs keyed by cluster sequence. Owned by
/// a single solver run, so no synchronisation is needed.
#[derive(Debug, Default)]
pub struct RouteCostCache {
    map: HashMap<Vec<usize>, Cost>,
    hits: u64,
    misses: u64,
}

impl RouteCostCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cost(&mut self, scratch: &mut DpScratch, inst: &SdmsopInstance, seq: &[usize]) -> Cost {
        if let Some(&c) = self.map.get(seq) {
            self.hits += 1;
            return c;
        }
        self.misses += 1;
        let c = scratch.route_cost(inst, seq);
        self.map.insert(seq.to_vec(), c);
        c
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn misses(&self) -> u64 {
        self.misses
    }
}

/// Route pricing with an optional cache; what the solvers call per move.
#[derive(Debug, Default)]
pub struct RoutePricer {
    scratch: DpScratch,
    cache: Option<RouteCostCache>,
}

impl RoutePricer {
    pub fn new(cached: bool) -> Self {
        Self {
            scratch: DpScratch::new(),
            cache: cached.then(RouteCostCache::new),
        }
    }

    pub fn cost(&mut self, inst: &SdmsopInstance, seq: &[usize]) -> Cost {
        match &mut self.cache {
            Some(cache) => cache.cost(&mut self.scratch, inst, seq),
            None => self.scratch.route_cost(inst, seq),
        }
    }

    pub fn cache(&self) -> Option<&RouteCostCache> {
        self.cache.as_ref()
    }
}
