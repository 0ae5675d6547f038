//! Acceptance report. Prints one PASS/FAIL line per criterion plus detail
//! lines. The process exits non-zero on a FAIL only when
//! `SDMSOP_ACCEPTANCE_STRICT=1` is set.

use std::collections::HashMap;
use std::path::PathBuf;
use std::time::Instant;

use lp_parser_rs::model::{ComparisonOp, Constraint as LpConstraint, Sense as LpSense, VariableKind};
use lp_parser_rs::problem::LpProblem;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdmsop_core::exact::{brute_force_opt_strict, decode_assignment, encode_solution, RowFamily, Sense, VarKind};
use sdmsop_core::ga::{crossover, mutate};
use sdmsop_core::gtsp_io::{euc2d_distance, MetaTable};
use sdmsop_core::vns::shake;
use sdmsop_core::*;

// Tolerances and sizes.
const SEEDS_TABLE: u64 = 10;
const EXACT_ROWS_REQUIRED: usize = 14;
const NEAR_FRACTION: f64 = 0.97;
const PER_SEED_LIMIT_S: f64 = 300.0;
const GA_FRACTION: f64 = 0.95;
const ORACLE_INSTANCES: usize = 200;
const ORACLE_SEEDS: u64 = 5;
const ORACLE_VNS_RATE: f64 = 0.95;
const ORACLE_GA_RATE: f64 = 0.90;
const ORACLE_LIMIT_S: f64 = 600.0;
const DP_PAIRS: usize = 1000;
const DP_MAX_LEN: usize = 3;
const GA_OPS: usize = 10_000;
const SHAKES: usize = 100_000;
const LARGE_TIME_LIMIT_S: f64 = 10.0;
const LARGE_SLACK_S: f64 = 1.0;
const LARGE_SEEDS: u64 = 2;
const W: f64 = 0.25;

/// Reference profits for the small instances.
const TABLE: [(&str, usize, &str, Profit); 16] = [
    ("11berlin52", 2, "g1", 37),
    ("11berlin52", 3, "g1", 37),
    ("11eil51", 2, "g1", 24),
    ("11eil51", 3, "g1", 28),
    ("14st70", 2, "g1", 27),
    ("14st70", 3, "g1", 27),
    ("16eil76", 2, "g1", 40),
    ("16eil76", 3, "g1", 45),
    ("11berlin52", 2, "g2", 1729),
    ("11berlin52", 3, "g2", 1729),
    ("11eil51", 2, "g2", 1279),
    ("11eil51", 3, "g2", 1466),
    ("14st70", 2, "g2", 1271),
    ("14st70", 3, "g2", 1271),
    ("16eil76", 2, "g2", 2192),
    ("16eil76", 3, "g2", 2394),
];

struct Report {
    failed: Vec<String>,
}

impl Report {
    fn line(&mut self, id: &str, pass: bool, detail: impl AsRef<str>) {
        println!("{} {id}: {}", if pass { "PASS" } else { "FAIL" }, detail.as_ref());
        if !pass {
            self.failed.push(id.to_string());
        }
    }
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn meta() -> MetaTable {
    MetaTable::parse(&std::fs::read_to_string(data_dir().join("gtsp_opt.txt")).unwrap()).unwrap()
}

fn gtsp(name: &str) -> GtspFile {
    parse_gtsp(&std::fs::read_to_string(data_dir().join(format!("gtsp/{name}.gtsp"))).unwrap()).unwrap()
}

fn load(name: &str, rule: &str, m: usize) -> SdmsopInstance {
    let im = InstanceMeta::new(meta().gtsp_opt_cost(name).unwrap(), W).unwrap();
    transform_to_sdmsop(&gtsp(name), rule.parse().unwrap(), im, m).unwrap().instance
}

fn vns_cfg(seed: u64) -> VnsConfig {
    VnsConfig {
        rng_seed: seed,
        ..VnsConfig::default()
    }
}

fn ga_cfg(seed: u64) -> GaConfig {
    GaConfig {
        rng_seed: seed,
        ..GaConfig::default()
    }
}

/// Random instance with `k` clusters of 1..=4 vertices on a 100x100 grid.
fn random_instance(rng: &mut ChaCha8Rng, k: usize, m: usize, budget: Cost, max_profit: Profit) -> SdmsopInstance {
    let mut sets = vec![vec![0usize]];
    let mut n = 1;
    for _ in 0..k {
        let s = rng.gen_range(1..=4);
        sets.push((n..n + s).collect());
        n += s;
    }
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(0..100) as f64, rng.gen_range(0..100) as f64))
        .collect();
    let mut d = vec![0; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = euc2d_distance(pts[i], pts[j]);
        }
    }
    let profits = (0..=k).map(|q| if q == 0 { 0 } else { rng.gen_range(1..=max_profit) }).collect();
    SdmsopInstance::new("rand", n, d, sets, profits, budget, m, DistanceSource::Explicit).unwrap()
}

/// Exact GTSP tour cost over all sets by a Held-Karp DP anchored at the
/// smallest set.
fn gtsp_exact(g: &GtspFile) -> Cost {
    let d = g.distance_matrix();
    let n = g.dimension;
    let s = g.sets.len();
    let anchor = (0..s).min_by_key(|&i| g.sets[i].len()).unwrap();
    let others: Vec<usize> = (0..s).filter(|&i| i != anchor).collect();
    let k = others.len();
    let mut best = Cost::MAX;
    for &start in &g.sets[anchor] {
        let mut dp = vec![u32::MAX; (1 << k) * n];
        for (b, &set) in others.iter().enumerate() {
            for &v in &g.sets[set] {
                dp[(1 << b) * n + v] = d[start * n + v] as u32;
            }
        }
        for mask in 1usize..1 << k {
            for (b, &set) in others.iter().enumerate() {
                if mask & (1 << b) == 0 {
                    continue;
                }
                for &v in &g.sets[set] {
                    let cur = dp[mask * n + v];
                    if cur == u32::MAX {
                        continue;
                    }
                    for (c, &next) in others.iter().enumerate() {
                        if mask & (1 << c) != 0 {
                            continue;
                        }
                        let to = (mask | 1 << c) * n;
                        for &w in &g.sets[next] {
                            let val = cur + d[v * n + w] as u32;
                            if val < dp[to + w] {
                                dp[to + w] = val;
                            }
                        }
                    }
                }
            }
        }
        let full = (1 << k) - 1;
        for &set in &others {
            for &v in &g.sets[set] {
                let cur = dp[full * n + v];
                if cur != u32::MAX {
                    best = best.min(cur as Cost + d[v * n + start]);
                }
            }
        }
    }
    best
}

fn budget_check(r: &mut Report) {
    let meta = meta();
    let mut detail = Vec::new();
    let mut ok = true;
    for name in ["11berlin52", "11eil51", "14st70", "16eil76"] {
        let exact = gtsp_exact(&gtsp(name));
        let listed = meta.gtsp_opt_cost(name).unwrap();
        ok &= exact == listed;
        detail.push(format!("{name} listed={listed} exact={exact}"));
    }
    r.line("C0 bundled GTSP optima", ok, detail.join(", "));
}

fn table_rows(r: &mut Report) -> Vec<Profit> {
    let mut exact = 0;
    let mut near_ok = true;
    let mut slowest: f64 = 0.0;
    let mut best_rows = Vec::new();
    for &(name, m, rule, target) in &TABLE {
        let inst = load(name, rule, m);
        let mut best = 0;
        for seed in 0..SEEDS_TABLE {
            let t = Instant::now();
            let out = run_vns(&inst, &vns_cfg(seed));
            slowest = slowest.max(t.elapsed().as_secs_f64());
            assert!(is_valid(&inst, &out.best) || out.best.visited_count() == 0);
            best = best.max(out.profit);
        }
        let ratio = best as f64 / target as f64;
        if best == target {
            exact += 1;
        } else if ratio < NEAR_FRACTION {
            near_ok = false;
        }
        println!("  {name} t={m} {rule}: target={target} vns={best} ({:.1}%)", 100.0 * ratio);
        best_rows.push(best);
    }
    r.line(
        "C1 small-instance profits",
        exact >= EXACT_ROWS_REQUIRED && near_ok && slowest < PER_SEED_LIMIT_S,
        format!(
            "{exact}/16 exact (need {EXACT_ROWS_REQUIRED}), rest >= {:.0}%: {near_ok}, slowest seed {slowest:.1}s",
            100.0 * NEAR_FRACTION
        ),
    );
    best_rows
}

fn ga_parity(r: &mut Report, vns: &[Profit]) {
    let mut ok = true;
    for (&(name, m, rule, _), &v) in TABLE.iter().zip(vns) {
        let inst = load(name, rule, m);
        let best = (0..SEEDS_TABLE).map(|s| run_ga(&inst, &ga_cfg(s)).profit).max().unwrap();
        let pass = best as f64 >= GA_FRACTION * v as f64;
        ok &= pass;
        println!("  {name} t={m} {rule}: vns={v} ga={best}");
    }
    r.line("C2 GA parity", ok, format!("every row GA >= {:.0}% of VNS", 100.0 * GA_FRACTION));
}

fn oracle_equivalence(r: &mut Report) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut vns_match, mut ga_match, mut above) = (0, 0, 0);
    for _ in 0..ORACLE_INSTANCES {
        let k = rng.gen_range(3..=8);
        let m = rng.gen_range(1..=3.min(k));
        let b = rng.gen_range(40..=250);
        let inst = random_instance(&mut rng, k, m, b, 20);
        let (_, opt) = brute_force_opt(&inst, &OracleLimits::default()).unwrap();
        let v = (0..ORACLE_SEEDS).map(|s| run_vns(&inst, &vns_cfg(s)).profit).max().unwrap();
        let g = (0..ORACLE_SEEDS).map(|s| run_ga(&inst, &ga_cfg(s)).profit).max().unwrap();
        vns_match += usize::from(v == opt);
        ga_match += usize::from(g == opt);
        above += usize::from(v > opt || g > opt);
    }
    let secs = t.elapsed().as_secs_f64();
    let n = ORACLE_INSTANCES as f64;
    r.line(
        "C3 oracle equivalence",
        vns_match as f64 >= ORACLE_VNS_RATE * n && ga_match as f64 >= ORACLE_GA_RATE * n && above == 0 && secs < ORACLE_LIMIT_S,
        format!("VNS {vns_match}/{ORACLE_INSTANCES}, GA {ga_match}/{ORACLE_INSTANCES}, above optimum {above}, {secs:.0}s"),
    );
}

/// Minimum walk cost over every vertex combination of `seq`.
fn enumerate_route(inst: &SdmsopInstance, seq: &[usize]) -> Cost {
    let mut pick = vec![0usize; seq.len()];
    let mut best = Cost::MAX;
    loop {
        let mut at = 0;
        let mut cost = 0;
        for (i, &q) in seq.iter().enumerate() {
            let v = inst.cluster(q)[pick[i]];
            cost += inst.dist(at, v);
            at = v;
        }
        best = best.min(cost + inst.dist(at, 0));
        let mut i = 0;
        loop {
            if i == seq.len() {
                return best;
            }
            pick[i] += 1;
            if pick[i] < inst.cluster(seq[i]).len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

fn dp_check(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = 0;
    for _ in 0..DP_PAIRS {
        let k = rng.gen_range(1..=6);
        let inst = random_instance(&mut rng, k, 1, 1000, 9);
        let mut order: Vec<usize> = (1..=k).collect();
        order.shuffle(&mut rng);
        order.truncate(rng.gen_range(0..=DP_MAX_LEN.min(k)));
        let plan = cluster_path_dp(&inst, &order).unwrap();
        let expected = enumerate_route(&inst, &order);
        let mut walk = vec![0];
        walk.extend(&plan.vertices);
        walk.push(0);
        let walked: Cost = walk.windows(2).map(|w| inst.dist(w[0], w[1])).sum();
        let members = plan.vertices.len() == order.len()
            && plan.vertices.iter().zip(&order).all(|(&v, &q)| inst.cluster_of(v) == q);
        if plan.cost != expected || (!order.is_empty() && walked != expected) || !members {
            mismatches += 1;
        }
    }
    r.line("C4 route DP", mismatches == 0, format!("{mismatches} mismatches over {DP_PAIRS} pairs"));
}

fn invariants(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let inst = random_instance(&mut rng, 8, 3, 200, 9);

    let mut a = Chromosome::random(&inst, 0.5, &mut rng);
    let b = Chromosome::random(&inst, 0.5, &mut rng);
    let mut broken = 0;
    for i in 0..GA_OPS {
        if i % 2 == 0 {
            mutate(&mut a, 0.2, &mut rng);
        } else {
            a = crossover(&a, &b, &mut rng);
        }
        broken += usize::from(!a.is_well_formed(&inst));
    }
    r.line("C5a chromosome permutation", broken == 0, format!("{broken} malformed after {GA_OPS} operations"));

    let mut u = run_vns(&inst, &vns_cfg(0)).best;
    let mut lost = 0;
    for i in 0..SHAKES {
        let mut before: Vec<usize> = u.visited().collect();
        before.sort_unstable();
        let next = shake(&inst, &u, 1 + i % 4, &mut rng).unwrap();
        let mut after: Vec<usize> = next.visited().collect();
        after.sort_unstable();
        lost += usize::from(before != after);
        u = next;
    }
    r.line("C5b shake conservation", lost == 0, format!("{lost} multiset changes over {SHAKES} shakes"));

    let mut invalid = 0;
    let mut vns_monotone = true;
    let mut ga_monotone = true;
    for seed in 0..30 {
        let k = rng.gen_range(4..=10);
        let m = rng.gen_range(1..=3);
        let b = rng.gen_range(60..=300);
        let inst = random_instance(&mut rng, k, m, b, 20);
        let v = run_vns(&inst, &vns_cfg(seed));
        invalid += usize::from(!(evaluate(&inst, &v.best).unwrap().feasible && v.best.profit(&inst) == v.profit));
        vns_monotone &= v.history.windows(2).all(|w| w[0].incumbent_profit < w[1].incumbent_profit);
        let g = run_ga(&inst, &ga_cfg(seed));
        invalid += usize::from(!(evaluate(&inst, &g.best).unwrap().feasible && g.best.profit(&inst) == g.profit));
        ga_monotone &= g.history.windows(2).all(|w| w[0].incumbent_profit <= w[1].incumbent_profit);
    }
    r.line(
        "C5c incumbent validity",
        invalid == 0 && cfg!(debug_assertions),
        format!("{invalid} invalid results over 30 runs per solver, per-acceptance assertion active: {}", cfg!(debug_assertions)),
    );
    r.line(
        "C5d monotone best-so-far",
        vns_monotone && ga_monotone,
        format!("VNS strictly increasing: {vns_monotone}, GA non-decreasing: {ga_monotone}"),
    );
}

fn three_node() -> SdmsopInstance {
    SdmsopInstance::new(
        "tiny3",
        3,
        vec![0, 2, 3, 2, 0, 4, 3, 4, 0],
        vec![vec![0], vec![1], vec![2]],
        vec![0, 5, 7],
        9,
        1,
        DistanceSource::Explicit,
    )
    .unwrap()
}

/// Evaluates parsed LP rows and objective at named values.
fn lp_holds(problem: &LpProblem, named: &HashMap<String, f64>) -> (bool, f64) {
    let val = |id| named.get(problem.resolve(id)).copied().unwrap_or(0.0);
    let ok = problem.constraints.values().all(|c| match c {
        LpConstraint::Standard {
            coefficients,
            operator,
            rhs,
            ..
        } => {
            let lhs: f64 = coefficients.iter().map(|t| t.value * val(t.name)).sum();
            match operator {
                ComparisonOp::LTE | ComparisonOp::LT => lhs <= rhs + 1e-9,
                ComparisonOp::GTE | ComparisonOp::GT => lhs >= rhs - 1e-9,
                ComparisonOp::EQ => (lhs - rhs).abs() <= 1e-9,
            }
        }
        _ => false,
    });
    let obj = problem.objectives.values().next().unwrap();
    let value = obj.constant + obj.coefficients.iter().map(|t| t.value * val(t.name)).sum::<f64>();
    (ok, value)
}

fn lp_relaxation(model: &IlpModel) -> f64 {
    let mut lp = minilp::Problem::new(minilp::OptimizationDirection::Maximize);
    let mut obj = vec![0.0; model.variables.len()];
    for &(v, c) in &model.objective {
        obj[v] += c;
    }
    let vars: Vec<minilp::Variable> = model
        .variables
        .iter()
        .zip(&obj)
        .map(|(v, &c)| lp.add_var(c, (v.lower, v.upper)))
        .collect();
    for row in &model.constraints {
        let terms: Vec<(minilp::Variable, f64)> = row.terms.iter().map(|&(v, c)| (vars[v], c)).collect();
        let op = match row.sense {
            Sense::Le => minilp::ComparisonOp::Le,
            Sense::Ge => minilp::ComparisonOp::Ge,
            Sense::Eq => minilp::ComparisonOp::Eq,
        };
        lp.add_constraint(terms.as_slice(), op, row.rhs);
    }
    lp.solve().unwrap().objective()
}

fn ilp_checks(r: &mut Report) {
    let golden = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/tiny3.lp")).unwrap();
    let text = emit_lp(&build_ilp(&three_node()));
    r.line("C6a LP golden file", text == golden, format!("{} bytes, identical: {}", text.len(), text == golden));

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut counts_ok = true;
    for _ in 0..20 {
        let k = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=3);
        let inst = random_instance(&mut rng, k, m, 150, 9);
        let model = build_ilp(&inst);
        let (n, p) = (inst.node_count(), k);
        let vars = m * n * n + m * n + m * p + n * n;
        let rows = 1 + m + 1 + 2 * m * n + m * p + p + n * (n - 1) + (n - 1);
        let parsed = LpProblem::parse(&emit_lp(&model)).unwrap();
        let mps = LpProblem::parse_mps(&emit_mps(&model)).unwrap();
        let binaries = model.variables.iter().filter(|v| v.kind == VarKind::Binary).count();
        let parsed_binaries = parsed.variables.values().filter(|v| v.kind == VariableKind::Binary).count();
        counts_ok &= model.variables.len() == vars
            && model.constraints.len() == rows
            && model.count_by_prefix("x_") == m * n * n
            && model.count_by_prefix("z_") == m * p
            && model.rows(RowFamily::SingleVisit).count() == p
            && parsed.constraint_count() == rows
            && parsed.variable_count() == vars
            && parsed_binaries == binaries
            && matches!(parsed.sense, LpSense::Maximize)
            && mps.constraint_count() == rows
            && mps.variable_count() == vars;
    }
    r.line("C6b closed-form counts", counts_ok, "20 models, in-memory, LP and MPS parses agree with closed form");

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let inst = random_instance(&mut rng, 5, 2, 160, 20);
    let model = build_ilp(&inst);
    let parsed = LpProblem::parse(&emit_lp(&model)).unwrap();
    let (mut feasible, mut agree, mut budget_caught, mut infeasible) = (0, true, true, 0);
    for _ in 0..400 {
        let mut owners: Vec<usize> = (1..=5).collect();
        owners.shuffle(&mut rng);
        let mut routes = vec![Vec::new(); 2];
        for q in owners {
            let slot = rng.gen_range(0..3);
            if slot < 2 {
                routes[slot].push(q);
            }
        }
        if routes.iter().any(Vec::is_empty) {
            continue;
        }
        let sol = Solution::from_routes(&inst, routes).unwrap();
        let eval = evaluate(&inst, &sol).unwrap();
        let values = encode_solution(&model, &inst, &sol).unwrap();
        let violated = model.violations(&values, 1e-9);
        if eval.feasible {
            feasible += 1;
            let named: HashMap<String, f64> = model.variables.iter().map(|v| v.name.clone()).zip(values.iter().copied()).collect();
            let (holds, lp_obj) = lp_holds(&parsed, &named);
            let back = decode_assignment(&model, &inst, &values).unwrap();
            agree &= violated.is_empty()
                && holds
                && (model.objective_value(&values) - eval.total_profit as f64).abs() < 1e-9
                && (lp_obj - eval.total_profit as f64).abs() < 1e-9
                && back.routes == sol.routes
                && evaluate(&inst, &back).unwrap().total_profit == eval.total_profit;
        } else {
            infeasible += 1;
            budget_caught &= !violated.is_empty() && violated.iter().all(|name| name.starts_with("budget"));
        }
    }
    let strict = brute_force_opt_strict(&inst, &OracleLimits::default()).unwrap();
    let relaxed = lp_relaxation(&model);
    let bound_ok = strict.as_ref().map_or(true, |(_, opt)| relaxed + 1e-6 >= *opt as f64);
    let optimum_ok = strict.as_ref().map_or(true, |(sol, opt)| {
        let values = encode_solution(&model, &inst, sol).unwrap();
        model.violations(&values, 1e-9).is_empty() && (model.objective_value(&values) - *opt as f64).abs() < 1e-9
    });
    r.line(
        "C6c cross-semantics rescoring",
        feasible > 0 && infeasible > 0 && agree && budget_caught && bound_ok && optimum_ok,
        format!(
            "{feasible} feasible assignments rescored equal: {agree}; {infeasible} over-budget caught only by budget rows: {budget_caught}; \
             strict optimum {:?} encodes feasibly: {optimum_ok}; LP relaxation {relaxed:.2} bounds it: {bound_ok}; idle travelers are not representable",
            strict.map(|s| s.1)
        ),
    );
}

fn large_instance(r: &mut Report) {
    let name = "107att532";
    let mut bests = Vec::new();
    let mut slowest: f64 = 0.0;
    let mut nodes = 0;
    for m in [2, 3, 4] {
        let inst = load(name, "g2", m);
        nodes = inst.node_count();
        let mut best = 0;
        for seed in 0..LARGE_SEEDS {
            let cfg = VnsConfig {
                time_limit: Some(LARGE_TIME_LIMIT_S),
                rng_seed: seed,
                ..VnsConfig::default()
            };
            let t = Instant::now();
            let out = run_vns(&inst, &cfg);
            slowest = slowest.max(t.elapsed().as_secs_f64());
            best = best.max(out.profit);
        }
        bests.push(best);
    }
    let monotone = bests.windows(2).all(|w| w[0] <= w[1]);
    r.line(
        "C7 large instance",
        nodes > 500 && monotone && slowest <= LARGE_TIME_LIMIT_S + LARGE_SLACK_S,
        format!("{name} ({nodes} nodes) g2 best profit for t=2,3,4: {bests:?}, slowest run {slowest:.1}s of {LARGE_TIME_LIMIT_S}s"),
    );
}

fn main() {
    let mut r = Report { failed: Vec::new() };
    let t = Instant::now();
    budget_check(&mut r);
    let vns = table_rows(&mut r);
    ga_parity(&mut r, &vns);
    oracle_equivalence(&mut r);
    dp_check(&mut r);
    invariants(&mut r);
    ilp_checks(&mut r);
    large_instance(&mut r);
    println!("acceptance finished in {:.0}s; failing: {:?}", t.elapsed().as_secs_f64(), r.failed);
    if !r.failed.is_empty() && std::env::var("SDMSOP_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
