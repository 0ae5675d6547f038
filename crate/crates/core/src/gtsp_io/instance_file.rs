//! Self-contained sDmSOP instance files.
//!
//! ```text
//! NAME: 11eil51
//! TYPE: SDMSOP
//! COMMENT: <provenance>
//! DIMENSION: 51
//! TRAVELERS: 2
//! BUDGET: 43
//! CLUSTERS: 12
//! EDGE_WEIGHT_TYPE: EUC_2D
//! NODE_COORD_SECTION
//! 1 37 52
//! ...
//! CLUSTER_SECTION
//! 1 0 1 -1
//! 2 4 3 20 35 36 -1
//! EOF
//! ```
//!
//! Each `CLUSTER_SECTION` record is `cluster_id profit v1 ... -1`. `EXPLICIT`
//! instances carry an `EDGE_WEIGHT_SECTION` full matrix instead of
//! coordinates.

use std::fmt::Write as _;

use super::scan::{explicit_matrix, scan, Token};
use super::{euc2d_distance, header, number, read_coords, section, ParseError, ParseErrorKind};
use crate::instance::{Cost, DistanceSource, Profit, SdmsopInstance};

const SECTIONS: &[&str] = &["NODE_COORD_SECTION", "EDGE_WEIGHT_SECTION", "CLUSTER_SECTION"];

pub fn write_instance(inst: &SdmsopInstance) -> String {
    let mut out = String::new();
    let n = inst.node_count();
    let _ = writeln!(out, "NAME: {}", inst.name());
    let _ = writeln!(out, "TYPE: SDMSOP");
    if !inst.provenance().is_empty() {
        let _ = writeln!(out, "COMMENT: {}", inst.provenance());
    }
    let _ = writeln!(out, "DIMENSION: {n}");
    let _ = writeln!(out, "TRAVELERS: {}", inst.travelers());
    let _ = writeln!(out, "BUDGET: {}", inst.budget());
    let _ = writeln!(out, "CLUSTERS: {}", inst.cluster_count());
    match inst.source() {
        DistanceSource::Euc2d(coords) => {
            let _ = writeln!(out, "EDGE_WEIGHT_TYPE: EUC_2D");
            let _ = writeln!(out, "NODE_COORD_SECTION");
            for (i, (x, y)) in coords.iter().enumerate() {
                let _ = writeln!(out, "{} {} {}", i + 1, x, y);
            }
        }
        DistanceSource::Explicit => {
            let _ = writeln!(out, "EDGE_WEIGHT_TYPE: EXPLICIT");
            let _ = writeln!(out, "EDGE_WEIGHT_FORMAT: FULL_MATRIX");
            let _ = writeln!(out, "EDGE_WEIGHT_SECTION");
            for row in inst.distances().chunks(n) {
                let cells: Vec<String> = row.iter().map(u64::to_string).collect();
                let _ = writeln!(out, "{}", cells.join(" "));
            }
        }
    }
    let _ = writeln!(out, "CLUSTER_SECTION");
    for (q, members) in inst.clusters().iter().enumerate() {
        let _ = write!(out, "{} {}", q + 1, inst.profit(q));
        for v in members {
            let _ = write!(out, " {}", v + 1);
        }
        let _ = writeln!(out, " -1");
    }
    out.push_str("EOF\n");
    out
}

pub fn read_instance(text: &str) -> Result<SdmsopInstance, ParseError> {
    let blocks = scan(text, SECTIONS)?;
    let last_line = text.lines().count().max(1);
    let get = |key: &'static str| {
        header(&blocks, key).ok_or(ParseError {
            line: last_line,
            kind: ParseErrorKind::MissingHeader(key),
        })
    };
    let (v, l) = get("DIMENSION")?;
    let n: usize = number(v, l)?;
    let (v, l) = get("TRAVELERS")?;
    let travelers: usize = number(v, l)?;
    let (v, l) = get("BUDGET")?;
    let budget: Cost = number(v, l)?;
    let (ewt, ewt_line) = get("EDGE_WEIGHT_TYPE")?;
    let name = header(&blocks, "NAME").map_or("", |(v, _)| v);
    let comment = header(&blocks, "COMMENT").map_or("", |(v, _)| v);

    let (dist, source) = match ewt {
        "EUC_2D" => {
            let (tokens, line) = section(&blocks, "NODE_COORD_SECTION").ok_or(ParseError {
                line: last_line,
                kind: ParseErrorKind::MissingSection("NODE_COORD_SECTION"),
            })?;
            let coords = read_coords(tokens, n, line)?;
            let mut d = vec![0; n * n];
            for i in 0..n {
                for j in 0..n {
                    d[i * n + j] = euc2d_distance(coords[i], coords[j]);
                }
            }
            (d, DistanceSource::Euc2d(coords))
        }
        "EXPLICIT" => {
            let format = header(&blocks, "EDGE_WEIGHT_FORMAT").map_or("FULL_MATRIX", |(v, _)| v);
            let (tokens, line) = section(&blocks, "EDGE_WEIGHT_SECTION").ok_or(ParseError {
                line: last_line,
                kind: ParseErrorKind::MissingSection("EDGE_WEIGHT_SECTION"),
            })?;
            (explicit_matrix(format, n, tokens, line)?, DistanceSource::Explicit)
        }
        other => {
            return Err(ParseError {
                line: ewt_line,
                kind: ParseErrorKind::Unsupported(format!("EDGE_WEIGHT_TYPE {other}")),
            })
        }
    };

    let (tokens, section_line) = section(&blocks, "CLUSTER_SECTION").ok_or(ParseError {
        line: last_line,
        kind: ParseErrorKind::MissingSection("CLUSTER_SECTION"),
    })?;
    let (clusters, profits) = read_clusters(tokens, n)?;
    if let Some((v, l)) = header(&blocks, "CLUSTERS") {
        let expected: usize = number(v, l)?;
        if expected != clusters.len() {
            return Err(ParseError {
                line: l,
                kind: ParseErrorKind::SetCountMismatch {
                    expected,
                    got: clusters.len(),
                },
            });
        }
    }
    SdmsopInstance::new(name, n, dist, clusters, profits, budget, travelers, source)
        .map(|inst| inst.with_provenance(comment))
        .map_err(|e| ParseError {
            line: section_line,
            kind: ParseErrorKind::Instance(e),
        })
}

fn read_clusters(tokens: &[Token<'_>], n: usize) -> Result<(Vec<Vec<usize>>, Vec<Profit>), ParseError> {
    let mut clusters = Vec::new();
    let mut profits = Vec::new();
    let mut iter = tokens.iter();
    while let Some(id_tok) = iter.next() {
        let id: usize = id_tok.parse()?;
        let profit: Profit = iter
            .next()
            .ok_or(ParseError {
                line: id_tok.line,
                kind: ParseErrorKind::UnterminatedSet(id),
            })?
            .parse()?;
        let mut members = Vec::new();
        let mut closed = false;
        for tok in iter.by_ref() {
            let v: i64 = tok.parse()?;
            if v == -1 {
                closed = true;
                break;
            }
            if v < 1 || v as usize > n {
                return Err(ParseError {
                    line: tok.line,
                    kind: ParseErrorKind::VertexOutOfRange(v.max(0) as usize),
                });
            }
            members.push(v as usize - 1);
        }
        if !closed {
            return Err(ParseError {
                line: id_tok.line,
                kind: ParseErrorKind::UnterminatedSet(id),
            });
        }
        clusters.push(members);
        profits.push(profit);
    }
    Ok((clusters, profits))
}
