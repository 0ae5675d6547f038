//! Construction, shake and local-search operators on a priced plan.

use std::cmp::Ordering;

use rand::Rng;

use crate::instance::{Cost, Profit, SdmsopInstance};
use crate::model::RoutePricer;

/// Number of redraws allowed for a degenerate random draw.
const REDRAWS: usize = 10;

/// Routes with cached DP costs and profit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Plan {
    pub routes: Vec<Vec<usize>>,
    pub costs: Vec<Cost>,
    pub profit: Profit,
}

impl Plan {
    pub fn new(inst: &SdmsopInstance, routes: Vec<Vec<usize>>, pricer: &mut RoutePricer) -> Self {
        let costs = routes.iter().map(|r| pricer.cost(inst, r)).collect();
        let profit = routes.iter().flatten().map(|&q| inst.profit(q)).sum();
        Self {
            routes,
            costs,
            profit,
        }
    }

    pub fn empty(m: usize) -> Self {
        Self {
            routes: vec![Vec::new(); m],
            costs: vec![0; m],
            profit: 0,
        }
    }

    pub fn feasible(&self, budget: Cost) -> bool {
        self.costs.iter().all(|&c| c <= budget)
    }

    pub fn max_cost(&self) -> Cost {
        self.costs.iter().copied().max().unwrap_or(0)
    }

    fn excess(&self, budget: Cost) -> Cost {
        self.costs.iter().map(|&c| c.saturating_sub(budget)).sum()
    }

    fn total_cost(&self) -> Cost {
        self.costs.iter().sum()
    }

    /// Ordering key for local search: total budget excess, then total cost.
    fn key(&self, budget: Cost) -> (Cost, Cost) {
        (self.excess(budget), self.total_cost())
    }

    fn visited_count(&self) -> usize {
        self.routes.iter().map(Vec::len).sum()
    }

    fn locate(&self, mut flat: usize) -> (usize, usize) {
        for (t, r) in self.routes.iter().enumerate() {
            if flat < r.len() {
                return (t, flat);
            }
            flat -= r.len();
        }
        unreachable!("flat index beyond visited count")
    }

    fn visited_mask(&self, k: usize) -> Vec<bool> {
        let mut mask = vec![false; k];
        for &q in self.routes.iter().flatten() {
            mask[q] = true;
        }
        mask
    }
}

/// Compares insertion ratios `d1 / p1` and `d2 / p2` exactly.
fn cmp_ratio(d1: i64, p1: Profit, d2: i64, p2: Profit) -> Ordering {
    (d1 as i128 * p2 as i128).cmp(&(d2 as i128 * p1 as i128))
}

struct Insertion {
    q: usize,
    t: usize,
    pos: usize,
    cost: Cost,
    delta: i64,
}

/// Cheapest-ratio feasible insertion of `q` over every traveler and
/// position. The first candidate wins ties.
fn best_position(
    inst: &SdmsopInstance,
    plan: &Plan,
    q: usize,
    pricer: &mut RoutePricer,
    buf: &mut Vec<usize>,
) -> Option<Insertion> {
    let mut best: Option<Insertion> = None;
    for (t, route) in plan.routes.iter().enumerate() {
        for pos in 0..=route.len() {
            buf.clear();
            buf.extend_from_slice(&route[..pos]);
            buf.push(q);
            buf.extend_from_slice(&route[pos..]);
            let cost = pricer.cost(inst, buf);
            if cost > inst.budget() {
                continue;
            }
            let delta = cost as i64 - plan.costs[t] as i64;
            if best.as_ref().map_or(true, |b| delta < b.delta) {
                best = Some(Insertion { q, t, pos, cost, delta });
            }
        }
    }
    best
}

fn apply(inst: &SdmsopInstance, plan: &mut Plan, ins: Insertion) {
    plan.routes[ins.t].insert(ins.pos, ins.q);
    plan.costs[ins.t] = ins.cost;
    plan.profit += inst.profit(ins.q);
}

/// Greedy construction: repeatedly insert the (cluster, traveler, position)
/// with the smallest cost increase per unit of profit that keeps the route
/// within budget. Exactly equal ratios are broken uniformly at random.
pub(crate) fn construct(inst: &SdmsopInstance, pricer: &mut RoutePricer, rng: &mut impl Rng) -> Plan {
    let k = inst.cluster_count();
    let mut plan = Plan::empty(inst.travelers());
    let mut visited = vec![false; k];
    let mut buf = Vec::new();
    loop {
        let mut best: Option<Insertion> = None;
        let mut ties = 0u32;
        for (q, _) in visited.iter().enumerate().skip(1).filter(|&(_, &seen)| !seen) {
            let p = inst.profit(q);
            if p == 0 {
                continue;
            }
            for (t, route) in plan.routes.iter().enumerate() {
                for pos in 0..=route.len() {
                    buf.clear();
                    buf.extend_from_slice(&route[..pos]);
                    buf.push(q);
                    buf.extend_from_slice(&route[pos..]);
                    let cost = pricer.cost(inst, &buf);
                    if cost > inst.budget() {
                        continue;
                    }
                    let delta = cost as i64 - plan.costs[t] as i64;
                    let ord = best
                        .as_ref()
                        .map_or(Ordering::Less, |b| cmp_ratio(delta, p, b.delta, inst.profit(b.q)));
                    let take = match ord {
                        Ordering::Less => {
                            ties = 1;
                            true
                        }
                        Ordering::Equal => {
                            ties += 1;
                            rng.gen_range(0..ties) == 0
                        }
                        Ordering::Greater => false,
                    };
                    if take {
                        best = Some(Insertion { q, t, pos, cost, delta });
                    }
                }
            }
        }
        match best {
            Some(ins) => {
                visited[ins.q] = true;
                apply(inst, &mut plan, ins);
            }
            None => return plan,
        }
    }
}

/// One sweep over unvisited clusters in index order, inserting each at its
/// cheapest feasible position if it has one.
pub(crate) fn insert_unvisited(inst: &SdmsopInstance, plan: &mut Plan, pricer: &mut RoutePricer) {
    let visited = plan.visited_mask(inst.cluster_count());
    let mut buf = Vec::new();
    for q in (1..inst.cluster_count()).filter(|&q| !visited[q] && inst.profit(q) > 0) {
        if let Some(ins) = best_position(inst, plan, q, pricer, &mut buf) {
            apply(inst, plan, ins);
        }
    }
}

fn reprice(inst: &SdmsopInstance, plan: &mut Plan, travelers: &[usize], pricer: &mut RoutePricer) {
    for &t in travelers {
        plan.costs[t] = pricer.cost(inst, &plan.routes[t]);
    }
}

/// Path Move: relocate a contiguous block of one traveler's route to a
/// random side of a random position in some traveler's route.
pub(crate) fn path_move(inst: &SdmsopInstance, plan: &mut Plan, pricer: &mut RoutePricer, rng: &mut impl Rng) {
    let m = plan.routes.len();
    for _ in 0..REDRAWS {
        let donors: Vec<usize> = (0..m).filter(|&t| !plan.routes[t].is_empty()).collect();
        if donors.is_empty() {
            return;
        }
        let r_range = donors[rng.gen_range(0..donors.len())];
        let len = plan.routes[r_range].len();
        let lo = rng.gen_range(0..len);
        let hi = rng.gen_range(lo..len);
        let r_swap = rng.gen_range(0..m);
        let after = rng.gen_bool(0.5);
        if r_swap == r_range {
            let id = rng.gen_range(0..len);
            if (lo..=hi).contains(&id) {
                continue;
            }
            let route = &mut plan.routes[r_range];
            let block: Vec<usize> = route.drain(lo..=hi).collect();
            let target = id + usize::from(after);
            let at = if target <= lo { target } else { target - block.len() };
            route.splice(at..at, block);
            reprice(inst, plan, &[r_range], pricer);
        } else {
            let rlen = plan.routes[r_swap].len();
            let at = if rlen == 0 {
                0
            } else {
                rng.gen_range(0..rlen) + usize::from(after)
            };
            let block: Vec<usize> = plan.routes[r_range].drain(lo..=hi).collect();
            plan.routes[r_swap].splice(at..at, block);
            reprice(inst, plan, &[r_range, r_swap], pricer);
        }
        return;
    }
}

/// Path Exchange: swap two contiguous blocks, from two travelers or two
/// disjoint blocks of one traveler.
pub(crate) fn path_exchange(inst: &SdmsopInstance, plan: &mut Plan, pricer: &mut RoutePricer, rng: &mut impl Rng) {
    let m = plan.routes.len();
    for _ in 0..REDRAWS {
        let donors: Vec<usize> = (0..m).filter(|&t| !plan.routes[t].is_empty()).collect();
        if donors.is_empty() {
            return;
        }
        let r1 = donors[rng.gen_range(0..donors.len())];
        let r2 = donors[rng.gen_range(0..donors.len())];
        let (l1, l2) = (plan.routes[r1].len(), plan.routes[r2].len());
        let id0 = rng.gen_range(0..l1);
        let id1 = rng.gen_range(id0..l1);
        let id2 = rng.gen_range(0..l2);
        let id3 = rng.gen_range(id2..l2);
        if r1 == r2 {
            let ((a0, a1), (b0, b1)) = if id1 < id2 {
                ((id0, id1), (id2, id3))
            } else if id3 < id0 {
                ((id2, id3), (id0, id1))
            } else {
                continue;
            };
            let route = &plan.routes[r1];
            let mut next = Vec::with_capacity(route.len());
            next.extend_from_slice(&route[..a0]);
            next.extend_from_slice(&route[b0..=b1]);
            next.extend_from_slice(&route[a1 + 1..b0]);
            next.extend_from_slice(&route[a0..=a1]);
            next.extend_from_slice(&route[b1 + 1..]);
            plan.routes[r1] = next;
            reprice(inst, plan, &[r1], pricer);
        } else {
            let block1: Vec<usize> = plan.routes[r1].drain(id0..=id1).collect();
            let block2: Vec<usize> = plan.routes[r2].splice(id2..=id3, block1).collect();
            plan.routes[r1].splice(id0..id0, block2);
            reprice(inst, plan, &[r1, r2], pricer);
        }
        return;
    }
}

/// As in the operator tables: odd `l` moves, even `l` exchanges; larger
/// `l` repeats the operator for a stronger kick.
pub(crate) fn shake(inst: &SdmsopInstance, plan: &mut Plan, l: usize, pricer: &mut RoutePricer, rng: &mut impl Rng) {
    for _ in 0..l.div_ceil(2) {
        if l % 2 == 1 {
            path_move(inst, plan, pricer, rng);
        } else {
            path_exchange(inst, plan, pricer, rng);
        }
    }
}

/// Acceptance for a local-search step. Profit may never drop. A feasible
/// incumbent only accepts feasible candidates that gain profit or do not
/// raise total cost; an infeasible one accepts anything feasible or
/// anything with a smaller budget excess.
fn accepts(current: &Plan, cand: &Plan, budget: Cost) -> bool {
    if cand.profit < current.profit {
        return false;
    }
    let gain = cand.profit > current.profit;
    let (cur_ex, cur_cost) = current.key(budget);
    let (cand_ex, cand_cost) = cand.key(budget);
    if cur_ex == 0 {
        cand_ex == 0 && (gain || cand_cost <= cur_cost)
    } else {
        cand_ex == 0 || cand_ex < cur_ex || (cand_ex == cur_ex && (gain || cand_cost < cur_cost))
    }
}

/// One Cluster Move (`exchange == false`) or One Cluster Exchange on the
/// visited clusters at flat positions `i` and `j`. With `coin`, cluster
/// `i` goes right after cluster `j`; otherwise `j` goes right before `i`.
fn one_cluster(plan: &mut Plan, i: usize, j: usize, exchange: bool, coin: bool) -> Vec<usize> {
    let (ti, pi) = plan.locate(i);
    let (tj, pj) = plan.locate(j);
    let qi = plan.routes[ti][pi];
    let qj = plan.routes[tj][pj];
    if exchange {
        plan.routes[ti][pi] = qj;
        plan.routes[tj][pj] = qi;
    } else if coin {
        plan.routes[ti].remove(pi);
        let at = plan.routes[tj].iter().position(|&q| q == qj).unwrap_or(0) + 1;
        plan.routes[tj].insert(at, qi);
    } else {
        plan.routes[tj].remove(pj);
        let at = plan.routes[ti].iter().position(|&q| q == qi).unwrap_or(0);
        plan.routes[ti].insert(at, qj);
    }
    if ti == tj {
        vec![ti]
    } else {
        vec![ti, tj]
    }
}

/// Randomized local search: `trials` draws of the neighborhood for `l`,
/// keeping each change that [`accepts`] allows. With `pool`, the second
/// draw of an exchange ranges over the unvisited clusters too, and drawing
/// one swaps it into the route in place of the first.
pub(crate) fn local_search(
    inst: &SdmsopInstance,
    plan: &mut Plan,
    l: usize,
    trials: usize,
    pool: bool,
    pricer: &mut RoutePricer,
    rng: &mut impl Rng,
) {
    let exchange = l % 2 == 0;
    let pool = pool && exchange;
    let budget = inst.budget();
    let visited = plan.visited_count();
    let mut unvisited: Vec<usize> = if pool {
        let mask = plan.visited_mask(inst.cluster_count());
        (1..inst.cluster_count()).filter(|&q| !mask[q] && inst.profit(q) > 0).collect()
    } else {
        Vec::new()
    };
    if visited < 2 && (visited == 0 || unvisited.is_empty()) {
        return;
    }
    let mut cand = plan.clone();
    for _ in 0..trials {
        let i = rng.gen_range(0..visited);
        let j = rng.gen_range(0..visited + unvisited.len());
        let coin = rng.gen_bool(0.5);
        if i == j {
            continue;
        }
        let touched = if j >= visited {
            let (t, pos) = cand.locate(i);
            let incoming = unvisited[j - visited];
            let outgoing = std::mem::replace(&mut cand.routes[t][pos], incoming);
            cand.profit = cand.profit + inst.profit(incoming) - inst.profit(outgoing);
            vec![t]
        } else {
            one_cluster(&mut cand, i, j, exchange, coin)
        };
        reprice(inst, &mut cand, &touched, pricer);
        if accepts(plan, &cand, budget) {
            if j >= visited {
                let (t, pos) = plan.locate(i);
                unvisited[j - visited] = plan.routes[t][pos];
            }
            for &t in &touched {
                plan.routes[t].clone_from(&cand.routes[t]);
                plan.costs[t] = cand.costs[t];
            }
            plan.profit = cand.profit;
        } else {
            for &t in &touched {
                cand.routes[t].clone_from(&plan.routes[t]);
                cand.costs[t] = plan.costs[t];
            }
            cand.profit = plan.profit;
        }
    }
}

/// Best-improvement variant: scan the whole neighborhood, apply the best
/// strictly improving change, repeat until none is left or `max_steps`
/// changes were made.
pub(crate) fn local_search_best(
    inst: &SdmsopInstance,
    plan: &mut Plan,
    l: usize,
    max_steps: usize,
    pricer: &mut RoutePricer,
) {
    let exchange = l % 2 == 0;
    let budget = inst.budget();
    let visited = plan.visited_count();
    if visited < 2 {
        return;
    }
    for _ in 0..max_steps {
        let mut best: Option<((Cost, Cost), Plan)> = None;
        let current = plan.key(budget);
        for i in 0..visited {
            for j in 0..visited {
                if i == j || (exchange && j < i) {
                    continue;
                }
                for coin in [true, false] {
                    if exchange && !coin {
                        continue;
                    }
                    let mut cand = plan.clone();
                    let touched = one_cluster(&mut cand, i, j, exchange, coin);
                    reprice(inst, &mut cand, &touched, pricer);
                    let key = cand.key(budget);
                    if key < current && best.as_ref().map_or(true, |(b, _)| key < *b) {
                        best = Some((key, cand));
                    }
                }
            }
        }
        match best {
            Some((_, cand)) => *plan = cand,
            None => return,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testing::random_instance;
    use crate::model::DpScratch;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn multiset(plan: &Plan) -> Vec<usize> {
        let mut v: Vec<usize> = plan.routes.iter().flatten().copied().collect();
        v.sort_unstable();
        v
    }

    fn costs_match(inst: &SdmsopInstance, plan: &Plan) -> bool {
        let mut s = DpScratch::new();
        plan.routes
            .iter()
            .zip(&plan.costs)
            .all(|(r, &c)| s.route_cost(inst, r) == c)
    }

    #[test]
    fn construct_respects_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut pricer = RoutePricer::new(false);
        for _ in 0..20 {
            let inst = random_instance(&mut rng, 15, 6, 2, 150);
            let plan = construct(&inst, &mut pricer, &mut rng);
            assert!(plan.feasible(inst.budget()));
            assert!(costs_match(&inst, &plan));
            let closed = insert_unvisited_probe(&inst, &plan);
            assert!(!closed, "construction left an affordable insertion");
        }
        let inst = random_instance(&mut rng, 10, 4, 2, 0);
        assert_eq!(construct(&inst, &mut pricer, &mut rng).visited_count(), 0);
    }

    fn insert_unvisited_probe(inst: &SdmsopInstance, plan: &Plan) -> bool {
        let mut copy = plan.clone();
        insert_unvisited(inst, &mut copy, &mut RoutePricer::new(false));
        copy.profit > plan.profit
    }

    #[test]
    fn shakes_conserve_clusters() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut pricer = RoutePricer::new(false);
        let inst = random_instance(&mut rng, 20, 9, 3, 400);
        let mut plan = construct(&inst, &mut pricer, &mut rng);
        let before = multiset(&plan);
        for step in 0..20_000 {
            shake(&inst, &mut plan, 1 + step % 2, &mut pricer, &mut rng);
            assert_eq!(multiset(&plan), before);
        }
        assert!(costs_match(&inst, &plan));
    }

    #[test]
    fn exchange_degenerate_draw_is_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut pricer = RoutePricer::new(false);
        let inst = random_instance(&mut rng, 6, 3, 1, 1000);
        let mut plan = Plan::new(&inst, vec![vec![2]], &mut pricer);
        let before = plan.clone();
        path_exchange(&inst, &mut plan, &mut pricer, &mut rng);
        assert_eq!(plan, before);
    }

    #[test]
    fn move_whole_route_into_empty_traveler() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut pricer = RoutePricer::new(false);
        let inst = random_instance(&mut rng, 8, 4, 2, 1000);
        // Single-cluster donor: the only range is the whole route, and the
        // only other traveler is empty, so any accepted draw relabels.
        let start = Plan::new(&inst, vec![vec![], vec![3]], &mut pricer);
        for _ in 0..50 {
            let mut plan = start.clone();
            path_move(&inst, &mut plan, &mut pricer, &mut rng);
            assert!(plan == start || plan.routes == vec![vec![3], vec![]]);
        }
    }

    #[test]
    fn local_search_never_worsens_feasible_plans() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut pricer = RoutePricer::new(false);
        for _ in 0..50 {
            let inst = random_instance(&mut rng, 18, 8, 2, 250);
            let mut plan = construct(&inst, &mut pricer, &mut rng);
            let (p, c) = (plan.profit, plan.key(inst.budget()));
            local_search(&inst, &mut plan, 1 + rng.gen_range(0..2), 64, false, &mut pricer, &mut rng);
            assert_eq!(plan.profit, p);
            assert!(plan.feasible(inst.budget()));
            assert!(plan.key(inst.budget()) <= c);
            assert!(costs_match(&inst, &plan));
            local_search_best(&inst, &mut plan, 1, 50, &mut pricer);
            assert!(plan.feasible(inst.budget()) && costs_match(&inst, &plan));
        }
    }

    #[test]
    fn one_cluster_move_directions() {
        let mut plan = Plan {
            routes: vec![vec![1, 2, 3], vec![4, 5]],
            costs: vec![0, 0],
            profit: 0,
        };
        one_cluster(&mut plan, 0, 4, false, true);
        assert_eq!(plan.routes, vec![vec![2, 3], vec![4, 5, 1]]);
        one_cluster(&mut plan, 0, 3, false, false);
        assert_eq!(plan.routes, vec![vec![5, 2, 3], vec![4, 1]]);
        one_cluster(&mut plan, 0, 4, true, true);
        assert_eq!(plan.routes, vec![vec![1, 2, 3], vec![4, 5]]);
    }
}
