//! Solution text format. One line per traveler, then a trailer:
//!
//! ```text
//! 1: 3 2 | 2 4
//! 2: 4 5 6 | 6 7 8
//! profit=7 cost_1=8 cost_2=16
//! ```
//!
//! Clusters and vertices are one-based; the depot (cluster 1) is implicit.
//! Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{evaluate, ModelError, Solution};
use crate::instance::{Cost, Profit, SdmsopInstance};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct SolutionParseError {
    pub line: usize,
    pub message: String,
}

/// A parsed solution plus whatever the trailer claimed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedSolution {
    pub solution: Solution,
    pub claimed_profit: Option<Profit>,
    /// Claimed cost per traveler, zero-based.
    pub claimed_costs: BTreeMap<usize, Cost>,
    /// Line number of each traveler's route line, zero-based traveler.
    pub route_lines: Vec<usize>,
}

pub fn write_solution(inst: &SdmsopInstance, sol: &Solution) -> Result<String, ModelError> {
    let eval = evaluate(inst, sol)?;
    let mut out = String::new();
    for (t, route) in sol.routes.iter().enumerate() {
        let _ = write!(out, "{}:", t + 1);
        for q in route {
            let _ = write!(out, " {}", q + 1);
        }
        out.push_str(" |");
        for q in route {
            match sol.chosen_vertex.get(q) {
                Some(v) => {
                    let _ = write!(out, " {}", v + 1);
                }
                None => return Err(ModelError::MissingVertex(q + 1)),
            }
        }
        out.push('\n');
    }
    let _ = write!(out, "profit={}", eval.total_profit);
    for (t, c) in eval.route_costs.iter().enumerate() {
        let _ = write!(out, " cost_{}={}", t + 1, c);
    }
    out.push('\n');
    Ok(out)
}

/// Parses the text format. Structural checks (duplicate clusters, vertex
/// membership) are left to [`evaluate`] and [`super::check_vertices`] so
/// that a verifier can report them as verdicts, not parse failures.
pub fn parse_solution(text: &str) -> Result<ParsedSolution, SolutionParseError> {
    let err = |line: usize, message: String| SolutionParseError { line, message };
    let mut routes = Vec::new();
    let mut route_lines = Vec::new();
    let mut chosen_vertex = BTreeMap::new();
    let mut claimed_profit = None;
    let mut claimed_costs = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if trimmed.starts_with("profit=") {
            for tok in trimmed.split_whitespace() {
                let (key, value) = tok
                    .split_once('=')
                    .ok_or_else(|| err(line, format!("expected key=value, got {tok:?}")))?;
                let value: u64 = value
                    .parse()
                    .map_err(|_| err(line, format!("bad number {value:?}")))?;
                if key == "profit" {
                    claimed_profit = Some(value);
                } else if let Some(t) = key.strip_prefix("cost_") {
                    let t: usize = t
                        .parse()
                        .ok()
                        .filter(|&t| t >= 1)
                        .ok_or_else(|| err(line, format!("bad traveler in {key:?}")))?;
                    claimed_costs.insert(t - 1, value);
                }
            }
            continue;
        }
        let (label, body) = trimmed
            .split_once(':')
            .ok_or_else(|| err(line, "expected \"t: clusters | vertices\"".into()))?;
        let t: usize = label
            .trim()
            .parse()
            .map_err(|_| err(line, format!("bad traveler label {label:?}")))?;
        if t != routes.len() + 1 {
            return Err(err(line, format!("expected traveler {}, got {t}", routes.len() + 1)));
        }
        let (clusters, vertices) = body
            .split_once('|')
            .ok_or_else(|| err(line, "missing '|' between clusters and vertices".into()))?;
        let ids = |s: &str| -> Result<Vec<usize>, SolutionParseError> {
            s.split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>()
                        .ok()
                        .filter(|&v| v >= 1)
                        .map(|v| v - 1)
                        .ok_or_else(|| err(line, format!("bad index {tok:?}")))
                })
                .collect()
        };
        let clusters = ids(clusters)?;
        let vertices = ids(vertices)?;
        if clusters.len() != vertices.len() {
            return Err(err(
                line,
                format!("{} clusters but {} vertices", clusters.len(), vertices.len()),
            ));
        }
        chosen_vertex.extend(clusters.iter().copied().zip(vertices));
        routes.push(clusters);
        route_lines.push(line);
    }
    Ok(ParsedSolution {
        solution: Solution {
            routes,
            chosen_vertex,
        },
        claimed_profit,
        claimed_costs,
        route_lines,
    })
}
