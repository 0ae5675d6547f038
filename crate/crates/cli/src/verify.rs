//! Independent re-scoring of a solution file.

use std::fmt;

use sdmsop_core::model::{check_vertices, parse_solution, walk_costs, ModelError, SolutionParseError};
use sdmsop_core::{evaluate, Cost, Profit, SdmsopInstance};

/// One problem found in a solution, with the line it was found on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Breach {
    pub line: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TravelerLine {
    pub traveler: usize,
    pub clusters: usize,
    /// Cost of the walk through the stated vertices.
    pub cost: Cost,
    /// Cheapest cost of the same cluster order.
    pub dp_cost: Cost,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub instance: String,
    pub budget: Cost,
    pub travelers: Vec<TravelerLine>,
    pub profit: Option<Profit>,
    pub breaches: Vec<Breach>,
}

impl VerifyReport {
    pub fn feasible(&self) -> bool {
        self.breaches.is_empty()
    }

    pub fn verdict(&self) -> String {
        match self.breaches.first() {
            None => "feasible".to_string(),
            Some(b) => b.message.clone(),
        }
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "instance: {} (budget {})", self.instance, self.budget)?;
        for t in &self.travelers {
            write!(f, "traveler {}: {} clusters, cost {}", t.traveler, t.clusters, t.cost)?;
            if t.dp_cost < t.cost {
                write!(f, " (cheapest vertex choice {})", t.dp_cost)?;
            }
            writeln!(f)?;
        }
        if let Some(p) = self.profit {
            writeln!(f, "profit: {p}")?;
        }
        for b in &self.breaches {
            match b.line {
                Some(l) => writeln!(f, "breach (line {l}): {}", b.message)?,
                None => writeln!(f, "breach: {}", b.message)?,
            }
        }
        writeln!(f, "verdict: {}", self.verdict())
    }
}

/// Route line holding the one-based `cluster`, if any route visits it.
fn line_of_cluster(routes: &[Vec<usize>], lines: &[usize], cluster: usize) -> Option<usize> {
    routes
        .iter()
        .rposition(|r| r.contains(&(cluster - 1)))
        .and_then(|t| lines.get(t).copied())
}

fn structural(err: &ModelError, routes: &[Vec<usize>], lines: &[usize]) -> Breach {
    let line = match *err {
        ModelError::DuplicateCluster { second, .. } => lines.get(second - 1).copied(),
        ModelError::InvalidCluster(q)
        | ModelError::RepeatedInRoute(q)
        | ModelError::MissingVertex(q)
        | ModelError::VertexNotInCluster { cluster: q, .. } => line_of_cluster(routes, lines, q),
        ModelError::TravelerCount { .. } | ModelError::StrayVertex(_) => None,
    };
    Breach {
        line,
        message: err.to_string(),
    }
}

pub fn verify(inst: &SdmsopInstance, text: &str) -> Result<VerifyReport, SolutionParseError> {
    let parsed = parse_solution(text)?;
    let sol = &parsed.solution;
    let lines = &parsed.route_lines;
    let mut report = VerifyReport {
        instance: inst.name().to_string(),
        budget: inst.budget(),
        travelers: Vec::new(),
        profit: None,
        breaches: Vec::new(),
    };
    let eval = match evaluate(inst, sol) {
        Ok(e) => e,
        Err(e) => {
            report.breaches.push(structural(&e, &sol.routes, lines));
            return Ok(report);
        }
    };
    if let Err(e) = check_vertices(inst, sol) {
        report.breaches.push(structural(&e, &sol.routes, lines));
        return Ok(report);
    }
    let costs = walk_costs(inst, sol).expect("structure already checked");
    report.profit = Some(eval.total_profit);
    for (t, (&cost, &dp_cost)) in costs.iter().zip(&eval.route_costs).enumerate() {
        report.travelers.push(TravelerLine {
            traveler: t + 1,
            clusters: sol.routes[t].len(),
            cost,
            dp_cost,
        });
        if cost > inst.budget() {
            report.breaches.push(Breach {
                line: lines.get(t).copied(),
                message: format!("budget violated, traveler {} (cost {cost} > {})", t + 1, inst.budget()),
            });
        }
    }
    if let Some(claimed) = parsed.claimed_profit.filter(|&c| c != eval.total_profit) {
        report.breaches.push(Breach {
            line: None,
            message: format!("claimed profit {claimed}, recomputed {}", eval.total_profit),
        });
    }
    for (&t, &claimed) in &parsed.claimed_costs {
        if costs.get(t).is_some_and(|&c| c != claimed) {
            report.breaches.push(Breach {
                line: None,
                message: format!("claimed cost {claimed} for traveler {}, recomputed {}", t + 1, costs[t]),
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sdmsop_core::DistanceSource;

    /// Depot plus clusters {1,2} and {3} on a line.
    fn line() -> SdmsopInstance {
        let x = [0i64, 1, 5, 2];
        let d = (0..16).map(|k| x[k / 4].abs_diff(x[k % 4])).collect();
        SdmsopInstance::new(
            "line",
            4,
            d,
            vec![vec![0], vec![1, 2], vec![3]],
            vec![0, 4, 6],
            6,
            2,
            DistanceSource::Explicit,
        )
        .unwrap()
    }

    #[test]
    fn accepts_a_correct_solution() {
        let r = verify(&line(), "1: 2 | 2\n2: 3 | 4\nprofit=10 cost_1=2 cost_2=4\n").unwrap();
        assert!(r.feasible(), "{r}");
        assert_eq!(r.profit, Some(10));
        assert_eq!(r.verdict(), "feasible");
    }

    #[test]
    fn flags_budget_with_traveler_and_line() {
        let r = verify(&line(), "1: 2 | 3\n2: 3 | 4\n").unwrap();
        assert_eq!(r.verdict(), "budget violated, traveler 1 (cost 10 > 6)");
        assert_eq!(r.breaches[0].line, Some(1));
        assert_eq!(r.travelers[0].dp_cost, 2);
    }

    #[test]
    fn duplicate_cluster_cites_rule() {
        let r = verify(&line(), "1: 2 | 2\n2: 2 | 2\n").unwrap();
        assert!(r.verdict().contains("at most one traveler"), "{}", r.verdict());
        assert_eq!(r.breaches[0].line, Some(2));
    }

    #[test]
    fn claims_are_checked() {
        let r = verify(&line(), "1: 2 | 2\n2: |\nprofit=9 cost_1=3\n").unwrap();
        let messages: Vec<&str> = r.breaches.iter().map(|b| b.message.as_str()).collect();
        assert_eq!(messages, vec!["claimed profit 9, recomputed 4", "claimed cost 3 for traveler 1, recomputed 2"]);
    }

    #[test]
    fn wrong_vertex_is_located() {
        let r = verify(&line(), "1: |\n2: 3 | 2\n").unwrap();
        assert_eq!(r.breaches[0].line, Some(2));
        assert!(r.verdict().contains("not a member"));
    }
}
