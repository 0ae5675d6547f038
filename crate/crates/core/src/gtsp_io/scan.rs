//! Line scanner shared by the TSPLIB-style formats (GTSP input files and
//! our own instance files): `KEY : value` headers followed by
//! whitespace-separated data sections, optionally closed by `EOF`.

use super::{ParseError, ParseErrorKind};

pub(crate) enum Block<'a> {
    Header {
        key: &'a str,
        value: &'a str,
        line: usize,
    },
    Section {
        name: &'a str,
        line: usize,
        tokens: Vec<Token<'a>>,
    },
}

#[derive(Clone, Copy)]
pub(crate) struct Token<'a> {
    pub text: &'a str,
    pub line: usize,
}

impl Token<'_> {
    pub fn parse<T: std::str::FromStr>(&self) -> Result<T, ParseError> {
        self.text.parse().map_err(|_| ParseError {
            line: self.line,
            kind: ParseErrorKind::BadNumber(self.text.to_string()),
        })
    }
}

pub(crate) fn scan<'a>(text: &'a str, sections: &[&'static str]) -> Result<Vec<Block<'a>>, ParseError> {
    let mut blocks = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed == "EOF" {
            break;
        }
        let head = trimmed.trim_end_matches(':').trim();
        if sections.contains(&head) {
            blocks.push(Block::Section {
                name: sections.iter().find(|s| **s == head).copied().unwrap_or(head),
                line,
                tokens: Vec::new(),
            });
            continue;
        }
        if let Some(Block::Section { tokens, .. }) = blocks.last_mut() {
            tokens.extend(trimmed.split_whitespace().map(|text| Token { text, line }));
            continue;
        }
        match trimmed.split_once(':') {
            Some((key, value)) if !key.trim().is_empty() => blocks.push(Block::Header {
                key: key.trim(),
                value: value.trim(),
                line,
            }),
            _ => {
                return Err(ParseError {
                    line,
                    kind: ParseErrorKind::MalformedHeader(trimmed.to_string()),
                })
            }
        }
    }
    Ok(blocks)
}

/// Reads an `EDGE_WEIGHT_SECTION` in one of the symmetric TSPLIB layouts into
/// a dense row-major matrix.
pub(crate) fn explicit_matrix(
    format: &str,
    n: usize,
    tokens: &[Token<'_>],
    section_line: usize,
) -> Result<Vec<u64>, ParseError> {
    let mut cells: Vec<(usize, usize)> = Vec::new();
    match format {
        "FULL_MATRIX" => {
            for i in 0..n {
                for j in 0..n {
                    cells.push((i, j));
                }
            }
        }
        "UPPER_ROW" => (0..n).for_each(|i| (i + 1..n).for_each(|j| cells.push((i, j)))),
        "LOWER_ROW" => (0..n).for_each(|i| (0..i).for_each(|j| cells.push((i, j)))),
        "UPPER_DIAG_ROW" => (0..n).for_each(|i| (i..n).for_each(|j| cells.push((i, j)))),
        "LOWER_DIAG_ROW" => (0..n).for_each(|i| (0..=i).for_each(|j| cells.push((i, j)))),
        other => {
            return Err(ParseError {
                line: section_line,
                kind: ParseErrorKind::Unsupported(format!("EDGE_WEIGHT_FORMAT {other}")),
            })
        }
    }
    if tokens.len() != cells.len() {
        return Err(ParseError {
            line: tokens.last().map_or(section_line, |t| t.line),
            kind: ParseErrorKind::DimensionMismatch {
                expected: cells.len(),
                got: tokens.len(),
            },
        });
    }
    let mut matrix = vec![0u64; n * n];
    let full = format == "FULL_MATRIX";
    for (&(i, j), tok) in cells.iter().zip(tokens) {
        let w: u64 = tok.parse()?;
        matrix[i * n + j] = w;
        if !full {
            matrix[j * n + i] = w;
        }
    }
    Ok(matrix)
}
