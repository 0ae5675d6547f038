//! The integer model over arc, vertex, set and flow variables, with CPLEX
//! LP and free MPS writers.
//!
//! Variable names use one-based indices: `x_t_i_j` (traveler `t` uses arc
//! `i -> j`), `y_t_i` (traveler `t` visits vertex `i`), `z_t_q` (traveler
//! `t` collects set `q`, non-depot sets only) and the continuous flow
//! `u_i_j`.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::instance::SdmsopInstance;
use crate::model::{ModelError, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

/// Which group of rows a constraint belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowFamily {
    Budget,
    DepotOut,
    DepotIn,
    InDegree,
    OutDegree,
    SetVisit,
    SingleVisit,
    FlowCapacity,
    FlowBalance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub family: RowFamily,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn lhs(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v]).sum()
    }

    pub fn satisfied(&self, values: &[f64], tol: f64) -> bool {
        let lhs = self.lhs(values);
        match self.sense {
            Sense::Le => lhs <= self.rhs + tol,
            Sense::Ge => lhs >= self.rhs - tol,
            Sense::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IlpModel {
    pub name: String,
    pub variables: Vec<Variable>,
    pub objective: Vec<(usize, f64)>,
    pub constraints: Vec<Constraint>,
    n: usize,
    m: usize,
    p: usize,
}

impl IlpModel {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn travelers(&self) -> usize {
        self.m
    }

    /// Non-depot set count.
    pub fn set_count(&self) -> usize {
        self.p
    }

    /// Zero-based traveler and vertices.
    pub fn x(&self, t: usize, i: usize, j: usize) -> usize {
        (t * self.n + i) * self.n + j
    }

    pub fn y(&self, t: usize, i: usize) -> usize {
        self.m * self.n * self.n + t * self.n + i
    }

    /// `q` is the zero-based cluster index, `1..=p`.
    pub fn z(&self, t: usize, q: usize) -> usize {
        self.m * self.n * self.n + self.m * self.n + t * self.p + (q - 1)
    }

    pub fn u(&self, i: usize, j: usize) -> usize {
        self.m * self.n * self.n + self.m * self.n + self.m * self.p + i * self.n + j
    }

    pub fn count_by_prefix(&self, prefix: &str) -> usize {
        self.variables.iter().filter(|v| v.name.starts_with(prefix)).count()
    }

    pub fn rows(&self, family: RowFamily) -> impl Iterator<Item = &Constraint> {
        self.constraints.iter().filter(move |c| c.family == family)
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v]).sum()
    }

    /// Names of violated rows and bounds, plus integrality breaches.
    pub fn violations(&self, values: &[f64], tol: f64) -> Vec<String> {
        let mut out: Vec<String> = self
            .constraints
            .iter()
            .filter(|c| !c.satisfied(values, tol))
            .map(|c| c.name.clone())
            .collect();
        for (var, &x) in self.variables.iter().zip(values) {
            if x < var.lower - tol || x > var.upper + tol {
                out.push(format!("bound {}", var.name));
            }
            if var.kind == VarKind::Binary && (x - x.round()).abs() > tol {
                out.push(format!("integrality {}", var.name));
            }
        }
        out
    }

    pub fn closed_form_variable_count(n: usize, m: usize, p: usize) -> usize {
        m * n * n + m * n + m * p + n * n
    }

    pub fn closed_form_row_count(n: usize, m: usize, p: usize) -> usize {
        m + 2 + 2 * m * n + m * p + p + n * (n - 1) + (n - 1)
    }
}

struct Builder {
    model: IlpModel,
}

impl Builder {
    fn var(&mut self, name: String, kind: VarKind, lower: f64, upper: f64) {
        self.model.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
    }

    fn row(&mut self, name: String, family: RowFamily, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.model.constraints.push(Constraint {
            name,
            family,
            terms,
            sense,
            rhs,
        });
    }
}

pub fn build_ilp(inst: &SdmsopInstance) -> IlpModel {
    let n = inst.node_count();
    let m = inst.travelers();
    let p = inst.visitable_clusters();
    let mut b = Builder {
        model: IlpModel {
            name: inst.name().to_string(),
            variables: Vec::with_capacity(IlpModel::closed_form_variable_count(n, m, p)),
            objective: Vec::new(),
            constraints: Vec::new(),
            n,
            m,
            p,
        },
    };
    let flow_cap = n.saturating_sub(m) as f64;
    for t in 0..m {
        for i in 0..n {
            for j in 0..n {
                let upper = if i == j { 0.0 } else { 1.0 };
                b.var(format!("x_{}_{}_{}", t + 1, i + 1, j + 1), VarKind::Binary, 0.0, upper);
            }
        }
    }
    for t in 0..m {
        for i in 0..n {
            b.var(format!("y_{}_{}", t + 1, i + 1), VarKind::Binary, 0.0, 1.0);
        }
    }
    for t in 0..m {
        for q in 1..=p {
            b.var(format!("z_{}_{}", t + 1, q + 1), VarKind::Binary, 0.0, 1.0);
        }
    }
    for i in 0..n {
        for j in 0..n {
            let upper = if i == j { 0.0 } else { flow_cap };
            b.var(format!("u_{}_{}", i + 1, j + 1), VarKind::Continuous, 0.0, upper);
        }
    }
    let md = IlpModel {
        name: String::new(),
        variables: Vec::new(),
        objective: Vec::new(),
        constraints: Vec::new(),
        n,
        m,
        p,
    };
    let arcs = || (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)));

    b.model.objective = (0..m)
        .flat_map(|t| (1..=p).map(move |q| (t, q)))
        .filter(|&(_, q)| inst.profit(q) > 0)
        .map(|(t, q)| (md.z(t, q), inst.profit(q) as f64))
        .collect();

    for t in 0..m {
        let terms = arcs()
            .filter(|&(i, j)| inst.dist(i, j) > 0)
            .map(|(i, j)| (md.x(t, i, j), inst.dist(i, j) as f64))
            .collect();
        b.row(format!("budget_{}", t + 1), RowFamily::Budget, terms, Sense::Le, inst.budget() as f64);
    }
    let out_terms = (0..m).flat_map(|t| (1..n).map(move |j| (t, j))).map(|(t, j)| (md.x(t, 0, j), 1.0)).collect();
    b.row("depot_out".into(), RowFamily::DepotOut, out_terms, Sense::Eq, m as f64);
    let in_terms = (0..m).flat_map(|t| (1..n).map(move |j| (t, j))).map(|(t, j)| (md.x(t, j, 0), 1.0)).collect();
    b.row("depot_in".into(), RowFamily::DepotIn, in_terms, Sense::Eq, m as f64);
    for t in 0..m {
        for j in 0..n {
            let mut terms: Vec<(usize, f64)> = (0..n).filter(|&i| i != j).map(|i| (md.x(t, i, j), 1.0)).collect();
            terms.push((md.y(t, j), -1.0));
            b.row(format!("indeg_{}_{}", t + 1, j + 1), RowFamily::InDegree, terms, Sense::Eq, 0.0);
        }
    }
    for t in 0..m {
        for j in 0..n {
            let mut terms: Vec<(usize, f64)> = (0..n).filter(|&i| i != j).map(|i| (md.x(t, j, i), 1.0)).collect();
            terms.push((md.y(t, j), -1.0));
            b.row(format!("outdeg_{}_{}", t + 1, j + 1), RowFamily::OutDegree, terms, Sense::Eq, 0.0);
        }
    }
    for t in 0..m {
        for q in 1..=p {
            let mut terms: Vec<(usize, f64)> = inst.cluster(q).iter().map(|&i| (md.y(t, i), 1.0)).collect();
            terms.push((md.z(t, q), -1.0));
            b.row(format!("visit_{}_{}", t + 1, q + 1), RowFamily::SetVisit, terms, Sense::Eq, 0.0);
        }
    }
    for q in 1..=p {
        let terms = (0..m).map(|t| (md.z(t, q), 1.0)).collect();
        b.row(format!("once_{}", q + 1), RowFamily::SingleVisit, terms, Sense::Le, 1.0);
    }
    for (i, j) in arcs() {
        let mut terms = vec![(md.u(i, j), 1.0)];
        terms.extend((0..m).map(|t| (md.x(t, i, j), -flow_cap)));
        b.row(format!("cap_{}_{}", i + 1, j + 1), RowFamily::FlowCapacity, terms, Sense::Le, 0.0);
    }
    for i in 1..n {
        let mut terms: Vec<(usize, f64)> = (0..n).filter(|&j| j != i).map(|j| (md.u(i, j), 1.0)).collect();
        terms.extend((1..n).filter(|&j| j != i).map(|j| (md.u(j, i), -1.0)));
        terms.extend((0..m).map(|t| (md.y(t, i), -1.0)));
        b.row(format!("flow_{}", i + 1), RowFamily::FlowBalance, terms, Sense::Eq, 0.0);
    }
    b.model
}

fn fmt_num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Writes `terms` as `c1 v1 + c2 v2 ...`, wrapping long lines. An empty
/// expression is written as `0 fallback`.
fn write_expr(out: &mut String, model: &IlpModel, terms: &[(usize, f64)], fallback: usize) {
    if terms.is_empty() {
        let _ = write!(out, " 0 {}", model.variables[fallback].name);
        return;
    }
    for (k, &(v, c)) in terms.iter().enumerate() {
        if k > 0 && k % 8 == 0 {
            out.push_str("\n  ");
        }
        let sign = if c < 0.0 { "-" } else { "+" };
        if k == 0 && c >= 0.0 {
            let _ = write!(out, " {} {}", fmt_num(c), model.variables[v].name);
        } else {
            let _ = write!(out, " {} {} {}", sign, fmt_num(c.abs()), model.variables[v].name);
        }
    }
}

/// CPLEX LP text. Deterministic for a given model.
pub fn emit_lp(model: &IlpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ sDmSOP model {}", model.name);
    let _ = writeln!(
        out,
        "\\ n={} m={} sets={} variables={} rows={}",
        model.n,
        model.m,
        model.p,
        model.variables.len(),
        model.constraints.len()
    );
    out.push_str("Maximize\n obj:");
    let fallback = model.variables.len().saturating_sub(1);
    write_expr(&mut out, model, &model.objective, fallback);
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        let _ = write!(out, " {}:", c.name);
        write_expr(&mut out, model, &c.terms, fallback);
        let _ = writeln!(out, " {} {}", c.sense, fmt_num(c.rhs));
    }
    out.push_str("Bounds\n");
    for v in &model.variables {
        if v.lower == v.upper {
            let _ = writeln!(out, " {} = {}", v.name, fmt_num(v.lower));
        } else if v.kind == VarKind::Continuous {
            let _ = writeln!(out, " {} <= {} <= {}", fmt_num(v.lower), v.name, fmt_num(v.upper));
        }
    }
    out.push_str("Binaries\n");
    for (k, v) in model.variables.iter().filter(|v| v.kind == VarKind::Binary).enumerate() {
        out.push(' ');
        out.push_str(&v.name);
        if k % 8 == 7 {
            out.push('\n');
        }
    }
    if !out.ends_with('\n') {
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

/// Free-format MPS with an `OBJSENSE MAX` section.
pub fn emit_mps(model: &IlpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME {}", if model.name.is_empty() { "sdmsop" } else { &model.name });
    out.push_str("OBJSENSE\n    MAX\nROWS\n N obj\n");
    for c in &model.constraints {
        let tag = match c.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        let _ = writeln!(out, " {} {}", tag, c.name);
    }
    let mut columns: Vec<Vec<(&str, f64)>> = vec![Vec::new(); model.variables.len()];
    for &(v, c) in &model.objective {
        columns[v].push(("obj", c));
    }
    for row in &model.constraints {
        for &(v, c) in &row.terms {
            columns[v].push((&row.name, c));
        }
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    for (var, entries) in model.variables.iter().zip(&columns) {
        let binary = var.kind == VarKind::Binary;
        if binary != in_int {
            let _ = writeln!(out, " MARKER 'MARKER' '{}'", if binary { "INTORG" } else { "INTEND" });
            in_int = binary;
        }
        if entries.is_empty() {
            let _ = writeln!(out, " {} obj 0", var.name);
        }
        for (row, c) in entries {
            let _ = writeln!(out, " {} {} {}", var.name, row, fmt_num(*c));
        }
    }
    if in_int {
        out.push_str(" MARKER 'MARKER' 'INTEND'\n");
    }
    out.push_str("RHS\n");
    for c in model.constraints.iter().filter(|c| c.rhs != 0.0) {
        let _ = writeln!(out, " RHS {} {}", c.name, fmt_num(c.rhs));
    }
    out.push_str("BOUNDS\n");
    for v in &model.variables {
        if v.lower == v.upper {
            let _ = writeln!(out, " FX BND {} {}", v.name, fmt_num(v.lower));
        } else if v.kind == VarKind::Binary {
            let _ = writeln!(out, " BV BND {}", v.name);
        } else {
            let _ = writeln!(out, " UP BND {} {}", v.name, fmt_num(v.upper));
        }
    }
    out.push_str("ENDATA\n");
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssignmentError {
    #[error("traveler {0} is idle; the model requires every traveler to leave the depot")]
    IdleTraveler(usize),
    #[error("traveler {0} has no arc leaving vertex {1}")]
    BrokenRoute(usize, usize),
    #[error("traveler {0} never returns to the depot")]
    NoReturn(usize),
    #[error("model and instance disagree on dimensions")]
    Mismatch,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Variable values for a solution whose travelers all leave the depot.
/// Flow on the `k`-th arc of a route is `k - 1`.
pub fn encode_solution(model: &IlpModel, inst: &SdmsopInstance, sol: &Solution) -> Result<Vec<f64>, AssignmentError> {
    if model.n != inst.node_count() || model.m != sol.routes.len() {
        return Err(AssignmentError::Mismatch);
    }
    crate::model::check_vertices(inst, sol)?;
    let mut values = vec![0.0; model.variables.len()];
    for t in 0..model.m {
        if sol.routes[t].is_empty() {
            return Err(AssignmentError::IdleTraveler(t + 1));
        }
        let walk = sol.walk(t);
        for (k, w) in walk.windows(2).enumerate() {
            values[model.x(t, w[0], w[1])] = 1.0;
            values[model.u(w[0], w[1])] = k as f64;
        }
        for &v in &walk[..walk.len() - 1] {
            values[model.y(t, v)] = 1.0;
        }
        for &q in &sol.routes[t] {
            values[model.z(t, q)] = 1.0;
        }
    }
    Ok(values)
}

/// Follows each traveler's arcs out of the depot. Values above one half
/// count as set.
pub fn decode_assignment(model: &IlpModel, inst: &SdmsopInstance, values: &[f64]) -> Result<Solution, AssignmentError> {
    if model.n != inst.node_count() || values.len() != model.variables.len() {
        return Err(AssignmentError::Mismatch);
    }
    let n = model.n;
    let mut routes = Vec::with_capacity(model.m);
    let mut chosen = Vec::new();
    for t in 0..model.m {
        let mut route = Vec::new();
        let mut at = 0;
        let mut steps = 0;
        loop {
            let next = (0..n)
                .find(|&j| j != at && values[model.x(t, at, j)] > 0.5)
                .ok_or(AssignmentError::BrokenRoute(t + 1, at + 1))?;
            if next == 0 {
                break;
            }
            route.push(inst.cluster_of(next));
            chosen.push((inst.cluster_of(next), next));
            at = next;
            steps += 1;
            if steps > n {
                return Err(AssignmentError::NoReturn(t + 1));
            }
        }
        routes.push(route);
    }
    let sol = Solution {
        routes,
        chosen_vertex: chosen.into_iter().collect(),
    };
    crate::model::evaluate(inst, &sol)?;
    Ok(sol)
}

/// Values keyed by variable name, as an external solver reports them.
pub fn values_by_name(model: &IlpModel, named: &HashMap<String, f64>) -> Vec<f64> {
    model
        .variables
        .iter()
        .map(|v| named.get(&v.name).copied().unwrap_or(0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::DistanceSource;

    pub(crate) fn three_node() -> SdmsopInstance {
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

    #[test]
    fn closed_form_counts() {
        let model = build_ilp(&three_node());
        assert_eq!(model.count_by_prefix("x_"), 9);
        assert_eq!(model.count_by_prefix("y_"), 3);
        assert_eq!(model.count_by_prefix("z_"), 2);
        assert_eq!(model.count_by_prefix("u_"), 9);
        assert_eq!(model.rows(RowFamily::SingleVisit).count(), 2);
        assert_eq!(model.constraints.len(), IlpModel::closed_form_row_count(3, 1, 2));
        let depot: Vec<f64> = model.rows(RowFamily::DepotOut).map(|c| c.rhs).collect();
        assert_eq!(depot, vec![1.0]);
    }

    #[test]
    fn lp_text_is_stable() {
        let model = build_ilp(&three_node());
        let a = emit_lp(&model);
        assert!(a.lines().nth(2).unwrap().starts_with("Maximize"));
        assert_eq!(a, emit_lp(&build_ilp(&three_node())));
        assert!(a.contains(" budget_1: 2 x_1_1_2 + 3 x_1_1_3"));
        assert!(a.ends_with("End\n"));
        let mps = emit_mps(&model);
        assert!(mps.contains(" FX BND x_1_1_1 0") && mps.ends_with("ENDATA\n"));
    }

    #[test]
    fn encode_decode_round_trip() {
        let inst = three_node();
        let model = build_ilp(&inst);
        let sol = Solution::from_routes(&inst, vec![vec![2, 1]]).unwrap();
        let values = encode_solution(&model, &inst, &sol).unwrap();
        assert_eq!(model.violations(&values, 1e-9), Vec::<String>::new());
        assert_eq!(model.objective_value(&values), 12.0);
        assert_eq!(decode_assignment(&model, &inst, &values).unwrap(), sol);

        let over = inst.with_budget(8);
        let model = build_ilp(&over);
        let values = encode_solution(&model, &over, &sol).unwrap();
        assert_eq!(model.violations(&values, 1e-9), vec!["budget_1".to_string()]);
    }
}
