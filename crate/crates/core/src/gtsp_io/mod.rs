//! GTSP benchmark files and their conversion into sDmSOP instances.
//!
//! The conversion moves node 1 into its own depot cluster, assigns cluster
//! profits with one of two rules and derives the per-traveler budget from the
//! best-known GTSP tour cost as `B = floor(w * gtsp_opt_cost)`.

mod instance_file;
mod scan;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::instance::{Cost, DistanceSource, InstanceError, Profit, SdmsopInstance};
pub use instance_file::{read_instance, write_instance};
use scan::{scan, Block, Token};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseErrorKind {
    #[error("malformed header `{0}`")]
    MalformedHeader(String),
    #[error("missing header {0}")]
    MissingHeader(&'static str),
    #[error("missing section {0}")]
    MissingSection(&'static str),
    #[error("unsupported {0}")]
    Unsupported(String),
    #[error("bad number `{0}`")]
    BadNumber(String),
    #[error("dimension mismatch: expected {expected} entries, found {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("set count mismatch: header says {expected}, found {got}")]
    SetCountMismatch { expected: usize, got: usize },
    #[error("duplicate vertex {0}")]
    DuplicateVertex(usize),
    #[error("vertex {0} is missing from all sets")]
    MissingVertex(usize),
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(usize),
    #[error("set {0} is empty")]
    EmptySet(usize),
    #[error("set {0} is not terminated by -1")]
    UnterminatedSet(usize),
    #[error("invalid instance: {0}")]
    Instance(#[from] InstanceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeWeightType {
    Euc2d,
    Explicit,
}

/// Contents of a GTSP file. Vertex indices are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct GtspFile {
    pub name: String,
    pub dimension: usize,
    pub edge_weight_type: EdgeWeightType,
    /// One pair per node when the file is `EUC_2D`, empty otherwise.
    pub coords: Vec<(f64, f64)>,
    /// Dense row-major matrix when the file is `EXPLICIT`.
    pub explicit_weights: Option<Vec<Cost>>,
    pub sets: Vec<Vec<usize>>,
}

impl GtspFile {
    /// Dense distance matrix with a zero diagonal.
    pub fn distance_matrix(&self) -> Vec<Cost> {
        let n = self.dimension;
        let mut d = match &self.explicit_weights {
            Some(w) => w.clone(),
            None => {
                let mut d = vec![0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        d[i * n + j] = euc2d_distance(self.coords[i], self.coords[j]);
                    }
                }
                d
            }
        };
        for i in 0..n {
            d[i * n + i] = 0;
        }
        d
    }
}

/// TSPLIB `EUC_2D`: Euclidean distance rounded half up.
pub fn euc2d_distance(a: (f64, f64), b: (f64, f64)) -> Cost {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    ((dx * dx + dy * dy).sqrt() + 0.5).floor() as Cost
}

fn header<'a>(blocks: &[Block<'a>], key: &str) -> Option<(&'a str, usize)> {
    blocks.iter().find_map(|b| match b {
        Block::Header { key: k, value, line } if k.eq_ignore_ascii_case(key) => {
            Some((*value, *line))
        }
        _ => None,
    })
}

fn section<'a, 'b>(blocks: &'b [Block<'a>], name: &str) -> Option<(&'b [Token<'a>], usize)> {
    blocks.iter().find_map(|b| match b {
        Block::Section { name: n, tokens, line } if *n == name => Some((tokens.as_slice(), *line)),
        _ => None,
    })
}

fn number<T: FromStr>(value: &str, line: usize) -> Result<T, ParseError> {
    value.parse().map_err(|_| ParseError {
        line,
        kind: ParseErrorKind::BadNumber(value.to_string()),
    })
}

fn required<'a>(
    blocks: &[Block<'a>],
    key: &'static str,
    last_line: usize,
) -> Result<(&'a str, usize), ParseError> {
    header(blocks, key).ok_or(ParseError {
        line: last_line,
        kind: ParseErrorKind::MissingHeader(key),
    })
}

/// Reads `count` coordinate records `id x y`.
fn read_coords(tokens: &[Token<'_>], count: usize, line: usize) -> Result<Vec<(f64, f64)>, ParseError> {
    if tokens.len() != 3 * count {
        return Err(ParseError {
            line: tokens.last().map_or(line, |t| t.line),
            kind: ParseErrorKind::DimensionMismatch {
                expected: count,
                got: tokens.len() / 3,
            },
        });
    }
    tokens
        .chunks(3)
        .map(|rec| Ok((rec[1].parse()?, rec[2].parse()?)))
        .collect()
}

pub(crate) const GTSP_SECTIONS: &[&str] = &[
    "NODE_COORD_SECTION",
    "EDGE_WEIGHT_SECTION",
    "GTSP_SET_SECTION",
    "DISPLAY_DATA_SECTION",
];

/// Parses a GTSP library file (`NAME`, `DIMENSION`, `GTSP_SETS`,
/// `EDGE_WEIGHT_TYPE` headers, coordinate or weight section and a
/// `GTSP_SET_SECTION` of `set_id v1 v2 ... -1` records).
pub fn parse_gtsp(text: &str) -> Result<GtspFile, ParseError> {
    let blocks = scan(text, GTSP_SECTIONS)?;
    let last_line = text.lines().count().max(1);
    let name = header(&blocks, "NAME").map_or("", |(v, _)| v).to_string();
    let (dim, dim_line) = required(&blocks, "DIMENSION", last_line)?;
    let dimension: usize = number(dim, dim_line)?;
    let (sets_v, sets_line) = required(&blocks, "GTSP_SETS", last_line)?;
    let set_count: usize = number(sets_v, sets_line)?;
    let (ewt, ewt_line) = required(&blocks, "EDGE_WEIGHT_TYPE", last_line)?;

    let (edge_weight_type, coords, explicit_weights) = match ewt {
        "EUC_2D" => {
            let (tokens, line) =
                section(&blocks, "NODE_COORD_SECTION").ok_or(ParseError {
                    line: last_line,
                    kind: ParseErrorKind::MissingSection("NODE_COORD_SECTION"),
                })?;
            (EdgeWeightType::Euc2d, read_coords(tokens, dimension, line)?, None)
        }
        "EXPLICIT" => {
            let format = header(&blocks, "EDGE_WEIGHT_FORMAT").map_or("FULL_MATRIX", |(v, _)| v);
            let (tokens, line) =
                section(&blocks, "EDGE_WEIGHT_SECTION").ok_or(ParseError {
                    line: last_line,
                    kind: ParseErrorKind::MissingSection("EDGE_WEIGHT_SECTION"),
                })?;
            let matrix = scan::explicit_matrix(format, dimension, tokens, line)?;
            (EdgeWeightType::Explicit, Vec::new(), Some(matrix))
        }
        other => {
            return Err(ParseError {
                line: ewt_line,
                kind: ParseErrorKind::Unsupported(format!("EDGE_WEIGHT_TYPE {other}")),
            })
        }
    };

    let (tokens, set_line) = section(&blocks, "GTSP_SET_SECTION").ok_or(ParseError {
        line: last_line,
        kind: ParseErrorKind::MissingSection("GTSP_SET_SECTION"),
    })?;
    let sets = read_sets(tokens, dimension, set_line)?;
    if sets.len() != set_count {
        return Err(ParseError {
            line: sets_line,
            kind: ParseErrorKind::SetCountMismatch {
                expected: set_count,
                got: sets.len(),
            },
        });
    }
    Ok(GtspFile {
        name,
        dimension,
        edge_weight_type,
        coords,
        explicit_weights,
        sets,
    })
}

/// Reads `set_id v1 ... -1` records into zero-based partitions of `0..n`.
fn read_sets(tokens: &[Token<'_>], n: usize, section_line: usize) -> Result<Vec<Vec<usize>>, ParseError> {
    let mut owner = vec![false; n];
    let mut sets = Vec::new();
    let mut iter = tokens.iter();
    while let Some(id_tok) = iter.next() {
        let id: usize = id_tok.parse()?;
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
            let v = v as usize;
            if owner[v - 1] {
                return Err(ParseError {
                    line: tok.line,
                    kind: ParseErrorKind::DuplicateVertex(v),
                });
            }
            owner[v - 1] = true;
            members.push(v - 1);
        }
        if !closed {
            return Err(ParseError {
                line: id_tok.line,
                kind: ParseErrorKind::UnterminatedSet(id),
            });
        }
        if members.is_empty() {
            return Err(ParseError {
                line: id_tok.line,
                kind: ParseErrorKind::EmptySet(id),
            });
        }
        sets.push(members);
    }
    if let Some(v) = owner.iter().position(|seen| !seen) {
        return Err(ParseError {
            line: tokens.last().map_or(section_line, |t| t.line),
            kind: ParseErrorKind::MissingVertex(v + 1),
        });
    }
    Ok(sets)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProfitRule {
    /// Cluster profit = number of nodes in the cluster.
    G1,
    /// Cluster profit = sum over members of `(1 + 7141 * i) mod 100`.
    G2,
}

impl fmt::Display for ProfitRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfitRule::G1 => "g1",
            ProfitRule::G2 => "g2",
        })
    }
}

impl FromStr for ProfitRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "g1" => Ok(ProfitRule::G1),
            "g2" => Ok(ProfitRule::G2),
            other => Err(format!("unknown profit rule `{other}` (expected g1 or g2)")),
        }
    }
}

/// Cluster sizes, depot cluster first at profit 0.
pub fn profit_g1(clusters: &[Vec<usize>]) -> Vec<Profit> {
    clusters
        .iter()
        .enumerate()
        .map(|(q, c)| if q == 0 { 0 } else { c.len() as Profit })
        .collect()
}

/// Node profit for the one-based node id `i`.
pub fn node_profit_g2(i: u64) -> Profit {
    (1 + 7141 * i) % 100
}

/// Sum of member node profits, using each node's original one-based id.
pub fn profit_g2(clusters: &[Vec<usize>]) -> Vec<Profit> {
    clusters
        .iter()
        .enumerate()
        .map(|(q, c)| {
            if q == 0 {
                0
            } else {
                c.iter().map(|&v| node_profit_g2(v as u64 + 1)).sum()
            }
        })
        .collect()
}

pub fn profits(rule: ProfitRule, clusters: &[Vec<usize>]) -> Vec<Profit> {
    match rule {
        ProfitRule::G1 => profit_g1(clusters),
        ProfitRule::G2 => profit_g2(clusters),
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetaError {
    #[error("best-known GTSP cost must be positive")]
    NonPositiveOpt,
    #[error("w must lie in (0, 1], got {0}")]
    BadW(f64),
    #[error("line {line}: expected `instance_name gtsp_opt_cost`, got `{text}`")]
    BadLine { line: usize, text: String },
    #[error("no metadata for instance `{name}`; known: {}", known.join(", "))]
    Missing { name: String, known: Vec<String> },
}

/// Budget parameters for one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceMeta {
    gtsp_opt_cost: Cost,
    w: f64,
}

impl InstanceMeta {
    pub fn new(gtsp_opt_cost: Cost, w: f64) -> Result<Self, MetaError> {
        if gtsp_opt_cost == 0 {
            return Err(MetaError::NonPositiveOpt);
        }
        if !(w > 0.0 && w <= 1.0) {
            return Err(MetaError::BadW(w));
        }
        Ok(Self { gtsp_opt_cost, w })
    }

    /// Like [`InstanceMeta::new`] but also admits `w = 0`, which yields the
    /// degenerate zero-budget instance.
    pub fn allow_zero(gtsp_opt_cost: Cost, w: f64) -> Result<Self, MetaError> {
        if w == 0.0 {
            if gtsp_opt_cost == 0 {
                return Err(MetaError::NonPositiveOpt);
            }
            return Ok(Self { gtsp_opt_cost, w });
        }
        Self::new(gtsp_opt_cost, w)
    }

    pub fn gtsp_opt_cost(&self) -> Cost {
        self.gtsp_opt_cost
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    /// `floor(w * gtsp_opt_cost)`. The epsilon absorbs binary rounding of
    /// products such as `0.29 * 100`.
    pub fn budget(&self) -> Cost {
        (self.w * self.gtsp_opt_cost as f64 + 1e-9).floor() as Cost
    }
}

/// Metadata sidecar: one `instance_name gtsp_opt_cost` pair per line, `#`
/// starts a comment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetaTable {
    entries: BTreeMap<String, Cost>,
}

impl MetaTable {
    pub fn parse(text: &str) -> Result<Self, MetaError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut parts = body.split_whitespace();
            let (Some(name), Some(cost), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(MetaError::BadLine {
                    line: idx + 1,
                    text: raw.to_string(),
                });
            };
            let cost: Cost = cost.parse().map_err(|_| MetaError::BadLine {
                line: idx + 1,
                text: raw.to_string(),
            })?;
            entries.insert(name.to_string(), cost);
        }
        Ok(Self { entries })
    }

    pub fn gtsp_opt_cost(&self, name: &str) -> Result<Cost, MetaError> {
        self.entries.get(name).copied().ok_or_else(|| MetaError::Missing {
            name: name.to_string(),
            known: self.entries.keys().cloned().collect(),
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransformWarning {
    /// Node 1 was the only member of its set, which disappeared.
    DroppedEmptySet { set: usize },
    /// Not every traveler can be given its own cluster.
    TravelersExceedClusters { travelers: usize, clusters: usize },
}

impl fmt::Display for TransformWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransformWarning::DroppedEmptySet { set } => {
                write!(f, "set {set} only contained node 1 and was dropped")
            }
            TransformWarning::TravelersExceedClusters { travelers, clusters } => write!(
                f,
                "{travelers} travelers but only {clusters} non-depot clusters; some travelers stay idle"
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Transformed {
    pub instance: SdmsopInstance,
    pub warnings: Vec<TransformWarning>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("instance has no node 1")]
    NoDepot,
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Converts a GTSP file into an sDmSOP instance: node 1 becomes the depot
/// cluster, the remaining sets keep their order, profits follow `rule` and
/// the budget is `floor(w * gtsp_opt_cost)`.
pub fn transform_to_sdmsop(
    g: &GtspFile,
    rule: ProfitRule,
    meta: InstanceMeta,
    travelers: usize,
) -> Result<Transformed, TransformError> {
    if g.dimension == 0 {
        return Err(TransformError::NoDepot);
    }
    let mut warnings = Vec::new();
    let mut clusters = vec![vec![0usize]];
    for (s, set) in g.sets.iter().enumerate() {
        let rest: Vec<usize> = set.iter().copied().filter(|&v| v != 0).collect();
        if rest.is_empty() {
            warnings.push(TransformWarning::DroppedEmptySet { set: s + 1 });
        } else {
            clusters.push(rest);
        }
    }
    let visitable = clusters.len() - 1;
    if travelers > visitable {
        warnings.push(TransformWarning::TravelersExceedClusters {
            travelers,
            clusters: visitable,
        });
    }
    let profits = profits(rule, &clusters);
    let source = match g.edge_weight_type {
        EdgeWeightType::Euc2d => DistanceSource::Euc2d(g.coords.clone()),
        EdgeWeightType::Explicit => DistanceSource::Explicit,
    };
    let budget = meta.budget();
    let instance = SdmsopInstance::new(
        g.name.clone(),
        g.dimension,
        g.distance_matrix(),
        clusters,
        profits,
        budget,
        travelers,
        source,
    )?
    .with_provenance(format!(
        "{} rule={} w={} gtsp_opt={} B=floor(w*gtsp_opt)={}",
        g.name,
        rule,
        meta.w(),
        meta.gtsp_opt_cost(),
        budget
    ));
    for w in &warnings {
        log::warn!("{}: {}", g.name, w);
    }
    Ok(Transformed { instance, warnings })
}
